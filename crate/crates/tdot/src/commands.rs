//! The four subcommands. Every sweep runs in parallel over momenta and
//! collects rows in grid order, so output never depends on scheduling.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use serde_json::{json, Value};
use tdot_core::floquet;
use tdot_core::gpp::GppEngine;
use tdot_core::model::static_scattering;
use tdot_core::oracle::propagate_detailed;
use tdot_core::resonance::{find_resonances, ScanOptions};
use tdot_core::ModelParams;

use crate::config::{ConfigError, Method, RunConfig};
use crate::format::{round, Cell, Report, Table};

/// Half-width in `k` of the window excluded around each resonance.
pub const RESONANCE_WINDOW: f64 = 0.05;

/// Tolerances of the self-check.
pub const UNITARITY_TOL: f64 = 1e-5;
pub const STATIC_UNITARITY_TOL: f64 = 1e-12;

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Numerical { k: Option<f64>, source: tdot_core::Error },
    SelfCheck(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::SelfCheck(_) => 4,
        }
    }

    fn at(k: f64) -> impl Fn(tdot_core::Error) -> CliError {
        move |e| CliError::from_core(e, Some(k))
    }

    fn from_core(e: tdot_core::Error, k: Option<f64>) -> Self {
        match e {
            tdot_core::Error::InvalidParam { field, reason } => CliError::Config(ConfigError {
                field: field.to_string(),
                message: reason,
            }),
            source => CliError::Numerical { k, source },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Numerical { k: Some(k), source } => write!(f, "numerical failure at k = {k}: {source}"),
            CliError::Numerical { k: None, source } => write!(f, "numerical failure: {source}"),
            CliError::SelfCheck(m) => write!(f, "self-check failed: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<tdot_core::Error> for CliError {
    fn from(e: tdot_core::Error) -> Self {
        CliError::from_core(e, None)
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// One spectrum row; `t_elastic` is unknown for wavepacket runs.
#[derive(Debug, Clone, PartialEq)]
struct Row {
    k: f64,
    t_total: f64,
    t_elastic: Option<f64>,
    /// `(n, k_f, T_n)` for the open inelastic sidebands.
    sidebands: Vec<(i32, f64, f64)>,
}

fn levels(cfg: &RunConfig) -> Result<Vec<ModelParams>> {
    (0..cfg.eps_d.len())
        .map(|i| cfg.params(i).map_err(CliError::from))
        .collect()
}

fn needs_engine(p: &ModelParams) -> Result<()> {
    if p.g0 > 0.0 {
        Ok(())
    } else {
        Err(CliError::Config(ConfigError {
            field: "g0".into(),
            message: "the perturbative engine needs g0 > 0".into(),
        }))
    }
}

fn sweep(method: Method, cfg: &RunConfig, p: &ModelParams, ks: &[f64]) -> Result<Vec<Row>> {
    match method {
        Method::Static => ks
            .par_iter()
            .map(|&k| {
                let t = static_scattering(k, p.g0, p).map_err(CliError::at(k))?.transmission();
                Ok(Row {
                    k,
                    t_total: t,
                    t_elastic: Some(t),
                    sidebands: Vec::new(),
                })
            })
            .collect(),
        Method::Floquet => ks
            .par_iter()
            .map(|&k| {
                let s = floquet::solve(k, cfg.n_modes, p).map_err(CliError::at(k))?;
                let sidebands = s
                    .open_inelastic()
                    .map(|n| {
                        let c = s.channel(n).expect("open channel is kept");
                        (n, c.momentum.k.re, s.t_inelastic(n).expect("open channel"))
                    })
                    .collect();
                Ok(Row {
                    k,
                    t_total: s.t_total,
                    t_elastic: Some(s.t_elastic),
                    sidebands,
                })
            })
            .collect(),
        Method::Gpp => {
            needs_engine(p)?;
            let eng = GppEngine::with_options(p, cfg.gpp_options())?;
            ks.par_iter()
                .map(|&k| {
                    let a = eng.transmission(k).map_err(CliError::at(k))?;
                    let sidebands = a
                        .channels
                        .iter()
                        .filter(|c| c.n != 0)
                        .map(|c| (c.n, c.k_f, c.weight * c.tau.norm_sqr()))
                        .collect();
                    Ok(Row {
                        k,
                        t_total: a.t_total,
                        t_elastic: Some(a.t_elastic),
                        sidebands,
                    })
                })
                .collect()
        }
        Method::Oracle => {
            let opts = cfg.oracle_options(p);
            ks.par_iter()
                .map(|&k| {
                    let r = propagate_detailed(k, &opts, p).map_err(CliError::at(k))?;
                    Ok(Row {
                        k,
                        t_total: r.transmitted,
                        t_elastic: None,
                        sidebands: Vec::new(),
                    })
                })
                .collect()
        }
        Method::Compare => Err(CliError::Config(ConfigError {
            field: "method".into(),
            message: "use the compare command for method = compare".into(),
        })),
    }
}

fn sideband_label(n: i32) -> String {
    format!("T_inel_n{n:+}")
}

/// Leading `eps_d` column, present only for multi-level sweeps.
fn level_cells(cfg: &RunConfig, p: &ModelParams) -> Vec<Cell> {
    if cfg.eps_d.len() > 1 {
        vec![Cell::Num(p.eps_d)]
    } else {
        Vec::new()
    }
}

fn level_columns(cfg: &RunConfig) -> Vec<String> {
    if cfg.eps_d.len() > 1 {
        vec!["eps_d".into()]
    } else {
        Vec::new()
    }
}

/// Transmission spectrum with the configured method.
pub fn run_spectrum(cfg: &RunConfig) -> Result<Report> {
    let ks = cfg.momenta();
    let mut blocks = Vec::new();
    for p in levels(cfg)? {
        blocks.push((p, sweep(cfg.method, cfg, &p, &ks)?));
    }
    let orders: BTreeSet<i32> = blocks
        .iter()
        .flat_map(|(_, rows)| rows.iter().flat_map(|r| r.sidebands.iter().map(|s| s.0)))
        .collect();
    let mut columns = level_columns(cfg);
    columns.extend(["k", "T_total", "T_elastic"].map(String::from));
    columns.extend(orders.iter().map(|&n| sideband_label(n)));
    let mut table = Table {
        columns,
        ..Table::default()
    };
    let mut spectra = Vec::new();
    for (p, rows) in &blocks {
        for r in rows {
            let mut cells = level_cells(cfg, p);
            cells.push(Cell::Num(r.k));
            cells.push(Cell::Num(r.t_total));
            cells.push(r.t_elastic.map_or(Cell::Empty, Cell::Num));
            for &n in &orders {
                cells.push(
                    r.sidebands
                        .iter()
                        .find(|s| s.0 == n)
                        .map_or(Cell::Empty, |s| Cell::Num(s.2)),
                );
            }
            table.rows.push(cells);
        }
        let json_rows: Vec<Value> = rows
            .iter()
            .map(|r| {
                json!({
                    "k": round(r.k),
                    "T_total": round(r.t_total),
                    "T_elastic": r.t_elastic.map_or(Value::Null, round),
                    "sidebands": r.sidebands.iter().map(|&(n, kf, t)| json!({
                        "n": n, "k_f": round(kf), "T": round(t)
                    })).collect::<Vec<_>>(),
                })
            })
            .collect();
        spectra.push(json!({ "eps_d": round(p.eps_d), "rows": json_rows }));
    }
    if cfg.method == Method::Oracle {
        table
            .notes
            .push("wavepacket runs resolve only the total transmission".into());
    }
    Ok(Report {
        command: "spectrum",
        table,
        body: json!({ "method": cfg.method.as_str(), "spectra": spectra }),
    })
}

fn scan_options(cfg: &RunConfig) -> ScanOptions {
    ScanOptions {
        k_min: cfg.k_min,
        k_max: cfg.k_max,
        ..ScanOptions::default()
    }
}

/// Roots of the resonance condition with widths and classification.
pub fn run_resonances(cfg: &RunConfig) -> Result<Report> {
    let mut columns = level_columns(cfg);
    columns.extend(
        [
            "b",
            "nu",
            "k_res",
            "linewidth",
            "lifetime",
            "strength_ratio",
            "classification",
            "residual",
        ]
        .map(String::from),
    );
    let mut table = Table {
        columns,
        ..Table::default()
    };
    let mut sets = Vec::new();
    for p in levels(cfg)? {
        if p.g1 == 0.0 {
            table.notes.push(format!(
                "eps_d = {}: g1 = 0, the dot is not driven, so there are no resonances and T follows the static result",
                crate::format::fmt_num(p.eps_d)
            ));
            sets.push(json!({ "eps_d": round(p.eps_d), "records": [] }));
            continue;
        }
        needs_engine(&p)?;
        let eng = GppEngine::with_options(&p, cfg.gpp_options())?;
        let recs = find_resonances(&eng, &scan_options(cfg))?;
        let mut json_recs = Vec::new();
        for r in &recs {
            let mut cells = level_cells(cfg, &p);
            cells.extend([
                Cell::Int(r.b as i64),
                Cell::Int(r.nu as i64),
                Cell::Num(r.k_res),
                Cell::Num(r.linewidth),
                Cell::Num(r.lifetime),
                Cell::Num(r.strength_ratio),
                Cell::Text(r.classification.as_str().into()),
                Cell::Num(r.residual),
            ]);
            table.rows.push(cells);
            json_recs.push(json!({
                "b": r.b, "nu": r.nu, "k_res": round(r.k_res), "linewidth": round(r.linewidth),
                "lifetime": round(r.lifetime), "strength_ratio": round(r.strength_ratio),
                "classification": r.classification.as_str(), "residual": round(r.residual),
            }));
        }
        sets.push(json!({ "eps_d": round(p.eps_d), "records": json_recs }));
    }
    Ok(Report {
        command: "resonances",
        table,
        body: json!({ "resonances": sets }),
    })
}

#[derive(Debug, Clone, Copy, Default)]
struct Stats {
    max: f64,
    sum: f64,
    count: usize,
}

impl Stats {
    fn add(&mut self, d: f64) {
        self.max = self.max.max(d);
        self.sum += d;
        self.count += 1;
    }

    fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        }
    }
}

/// Slowest packets the wavepacket check sends: below this `k` (or above
/// `pi - k`) the run time and chain length needed grow like `1 / sin k`.
pub const ORACLE_K_MARGIN: f64 = 0.5;

/// Oracle momenta inside `compare`: evenly spread over the part of the grid
/// at least [`ORACLE_K_MARGIN`] away from the band edges.
fn oracle_momenta(cfg: &RunConfig) -> Vec<f64> {
    let lo = cfg.k_min.max(ORACLE_K_MARGIN);
    let hi = cfg.k_max.min(std::f64::consts::PI - ORACLE_K_MARGIN);
    match cfg.oracle_points {
        _ if lo > hi => Vec::new(),
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        n => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Deviations of the perturbative, static and wavepacket results from the
/// Floquet reference, with resonance windows reported separately.
pub fn run_compare(cfg: &RunConfig) -> Result<Report> {
    let ks = cfg.momenta();
    let mut columns = level_columns(cfg);
    columns.extend(["reference", "method", "window", "max_abs_dT", "mean_abs_dT", "points"].map(String::from));
    let mut table = Table {
        columns,
        ..Table::default()
    };
    let mut levels_json = Vec::new();
    for p in levels(cfg)? {
        let exact = sweep(Method::Floquet, cfg, &p, &ks)?;
        let st = sweep(Method::Static, cfg, &p, &ks)?;
        let driven = p.g1 > 0.0;
        let (gpp, flagged, resonances) = if p.g0 > 0.0 {
            let eng = GppEngine::with_options(&p, cfg.gpp_options())?;
            let amps: Vec<_> = ks
                .par_iter()
                .map(|&k| eng.transmission(k).map_err(CliError::at(k)))
                .collect::<Result<_>>()?;
            let res = if driven {
                find_resonances(&eng, &scan_options(cfg))?
                    .iter()
                    .map(|r| r.k_res)
                    .collect()
            } else {
                Vec::new()
            };
            let flagged: Vec<bool> = amps.iter().map(|a| !a.near_resonance.is_empty()).collect();
            (Some(amps.iter().map(|a| a.t_total).collect::<Vec<_>>()), flagged, res)
        } else {
            (None, vec![false; ks.len()], Vec::new())
        };
        let near = |k: f64| resonances.iter().any(|r: &f64| (k - r).abs() < RESONANCE_WINDOW);
        let ok = oracle_momenta(cfg);
        let oracle = sweep(Method::Oracle, cfg, &p, &ok)?;
        let oracle_ref = sweep(Method::Floquet, cfg, &p, &ok)?;

        let mut push = |name: &str, pairs: Vec<(f64, f64, f64, bool)>| {
            let (mut all, mut off, mut on) = (Stats::default(), Stats::default(), Stats::default());
            for (k, a, b, flag) in pairs {
                let d = (a - b).abs();
                all.add(d);
                if near(k) || flag {
                    on.add(d);
                } else {
                    off.add(d);
                }
            }
            let mut out = Vec::new();
            for (window, s) in [("all", all), ("off_resonance", off), ("resonance", on)] {
                let mut cells = level_cells(cfg, &p);
                cells.extend([
                    Cell::Text("floquet".into()),
                    Cell::Text(name.into()),
                    Cell::Text(window.into()),
                    if s.count > 0 { Cell::Num(s.max) } else { Cell::Empty },
                    if s.count > 0 { Cell::Num(s.mean()) } else { Cell::Empty },
                    Cell::Int(s.count as i64),
                ]);
                table.rows.push(cells);
                let (max, mean) = if s.count > 0 {
                    (round(s.max), round(s.mean()))
                } else {
                    (Value::Null, Value::Null)
                };
                out.push(json!({ "window": window, "max_abs_dT": max, "mean_abs_dT": mean, "points": s.count }));
            }
            json!({ "method": name, "windows": out })
        };
        let mut summaries = Vec::new();
        if let Some(g) = &gpp {
            let pairs = ks
                .iter()
                .enumerate()
                .map(|(i, &k)| (k, g[i], exact[i].t_total, flagged[i]))
                .collect();
            summaries.push(push("gpp", pairs));
        }
        let pairs = ks
            .iter()
            .enumerate()
            .map(|(i, &k)| (k, st[i].t_total, exact[i].t_total, false))
            .collect();
        summaries.push(push("static", pairs));
        if !ok.is_empty() {
            let pairs = oracle
                .iter()
                .zip(&oracle_ref)
                .map(|(o, f)| (o.k, o.t_total, f.t_total, false))
                .collect();
            summaries.push(push("oracle", pairs));
        }
        let rows: Vec<Value> = ks
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                json!({
                    "k": round(k),
                    "T_floquet": round(exact[i].t_total),
                    "T_static": round(st[i].t_total),
                    "T_gpp": gpp.as_ref().map_or(Value::Null, |g| round(g[i])),
                    "resonance_window": near(k) || flagged[i],
                })
            })
            .collect();
        let oracle_rows: Vec<Value> = oracle
            .iter()
            .zip(&oracle_ref)
            .map(|(o, f)| json!({ "k": round(o.k), "T_oracle": round(o.t_total), "T_floquet": round(f.t_total) }))
            .collect();
        levels_json.push(json!({
            "eps_d": round(p.eps_d),
            "resonances": resonances.iter().map(|&k| round(k)).collect::<Vec<_>>(),
            "summary": summaries,
            "rows": rows,
            "oracle_rows": oracle_rows,
        }));
    }
    table.notes.push(format!(
        "resonance window: |k - k_res| < {RESONANCE_WINDOW} or a propagator flagged near its pole"
    ));
    Ok(Report {
        command: "compare",
        table,
        body: json!({ "levels": levels_json }),
    })
}

/// Wavepacket transmission on the grid next to the Floquet value.
pub fn run_oracle(cfg: &RunConfig) -> Result<Report> {
    let ks = cfg.momenta();
    let mut columns = level_columns(cfg);
    columns.extend(["k", "T_oracle", "T_floquet", "abs_dT", "norm_drift"].map(String::from));
    let mut table = Table {
        columns,
        ..Table::default()
    };
    let mut levels_json = Vec::new();
    for p in levels(cfg)? {
        let opts = cfg.oracle_options(&p);
        let runs: Vec<_> = ks
            .par_iter()
            .map(|&k| propagate_detailed(k, &opts, &p).map_err(CliError::at(k)))
            .collect::<Result<_>>()?;
        let exact = sweep(Method::Floquet, cfg, &p, &ks)?;
        let mut rows = Vec::new();
        for (r, f) in runs.iter().zip(&exact) {
            let mut cells = level_cells(cfg, &p);
            cells.extend([
                Cell::Num(r.k0),
                Cell::Num(r.transmitted),
                Cell::Num(f.t_total),
                Cell::Num((r.transmitted - f.t_total).abs()),
                Cell::Num(r.norm_drift),
            ]);
            table.rows.push(cells);
            rows.push(json!({
                "k": round(r.k0), "T_oracle": round(r.transmitted), "T_floquet": round(f.t_total),
                "norm_drift": round(r.norm_drift), "final_time": round(r.final_time),
            }));
        }
        levels_json.push(json!({ "eps_d": round(p.eps_d), "rows": rows }));
    }
    Ok(Report {
        command: "oracle",
        table,
        body: json!({ "levels": levels_json }),
    })
}

/// Unitarity suite run before anything is emitted.
pub fn self_check(cfg: &RunConfig) -> Result<()> {
    let ks = cfg.momenta();
    for p in levels(cfg)? {
        let worst = ks
            .par_iter()
            .map(|&k| {
                floquet::solve(k, cfg.n_modes, &p)
                    .map(|s| (k, (s.unitarity_sum() - 1.0).abs()))
                    .map_err(CliError::at(k))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold((0.0, 0.0), |m, v| if v.1 > m.1 { v } else { m });
        if worst.1 > UNITARITY_TOL {
            return Err(CliError::SelfCheck(format!(
                "Floquet current defect {:e} at k = {} (eps_d = {}) exceeds {UNITARITY_TOL:e}",
                worst.1, worst.0, p.eps_d
            )));
        }
        for &k in &ks {
            let s = static_scattering(k, p.g0, &p).map_err(CliError::at(k))?;
            let d = (s.tau.norm_sqr() + s.r.norm_sqr() - 1.0).abs();
            if d > STATIC_UNITARITY_TOL {
                return Err(CliError::SelfCheck(format!("static defect {d:e} at k = {k}")));
            }
        }
    }
    Ok(())
}
