//! Gauss-Legendre quadrature.

use nalgebra::{DMatrix, SymmetricEigen};

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule from the eigen-decomposition of the Jacobi matrix
    /// (Golub-Welsch), with nodes refined by Newton on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            let b = i as f64 / ((4 * i * i - 1) as f64).sqrt();
            jac[(i, i - 1)] = b;
            jac[(i - 1, i)] = b;
        }
        let eig = SymmetricEigen::new(jac);
        let mut pairs: Vec<(f64, f64)> = eig.eigenvalues.iter().map(|&x| (x, 0.0)).collect();
        for pair in pairs.iter_mut() {
            let mut x = pair.0;
            for _ in 0..3 {
                let (p, dp) = legendre(n, x);
                x -= p / dp;
            }
            let dp = legendre(n, x).1;
            *pair = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        }
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (half, mid) = (0.5 * (b - a), 0.5 * (b + a));
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }

    /// Composite rule over consecutive break points.
    pub fn composite(&self, breaks: &[f64]) -> Vec<(f64, f64)> {
        breaks.windows(2).flat_map(|w| self.on(w[0], w[1])).collect()
    }
}

/// `P_n(x)` and its derivative by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// Uniform break points splitting `[a, b]` into `panels` pieces, with the
/// extra points `cuts` (those strictly inside) merged in.
pub fn breaks_with_cuts(a: f64, b: f64, panels: usize, cuts: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = (0..=panels)
        .map(|i| a + (b - a) * i as f64 / panels as f64)
        .chain(cuts.iter().copied().filter(|&c| c > a && c < b))
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    out
}
