//! Experiment configs, the two builtin example systems, table reproduction
//! and CSV emission. The CLI is a thin layer over this module.

mod config;
mod format;
mod table;

use std::io::Write;
use std::path::PathBuf;

use thiserror::Error;

pub use config::{
    builtin_series, Builtin, ChannelConfig, ExperimentConfig, InputConfig, OutputSpec, PolynomialConfig,
    RepresentationConfig, SystemConfig,
};
pub use format::{csv_field, fmt_g, fmt_g_digits, fmt_opt};
pub use table::{
    compare_row, paper_rows, reproduce_rows, reproduce_table, table_config, Check, PaperRow, RowResult, Table,
    TableReport, Tolerance,
};

use crate::algebra::{AlgebraError, GrowthKind, SeriesSpec};
use crate::bounds::{
    classify_convergence, dt_tail_bound, gc_bounds, gc_simplified, lc_bounds, lc_simplified, regime_check,
    BoundInputs, BoundMode, BoundReport, BoundsError,
};
use crate::operators::{dt_fliess_trajectory, fliess_truncated, OperatorError, QuadratureControl};
use crate::realization::{ct_bilinear_simulate, simulate_forward, RealizationError, StateAffineSystem};
use crate::signals::{discretize_with, Channel, ContinuousInput, DiscreteInput, SignalError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Realization(#[from] RealizationError),
    #[error("column {column}: {source}")]
    Bounds {
        column: &'static str,
        #[source]
        source: BoundsError,
    },
    #[error("column {column}: {message}")]
    Domain { column: &'static str, message: String },
}

/// One row of a results table.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub label: Option<String>,
    pub u: String,
    pub horizon: f64,
    pub steps: usize,
    pub delta: f64,
    pub order: usize,
    pub norm_uhat: f64,
    /// `None` when the series declares no growth class.
    pub s: Option<f64>,
    pub s_hat: Option<f64>,
    pub y_t: f64,
    pub y_hat: f64,
    /// `ŷ^J(L) − y(T)`.
    pub error: f64,
    pub e_hat: Option<f64>,
    pub e_tail: Option<f64>,
    /// Set only for locally convergent series, the one case with two formulas.
    pub bound_mode: Option<BoundMode>,
    pub warnings: Vec<String>,
}

pub const REPORT_HEADER: &str = "u,T,L,delta,J,norm_uhat,s,s_hat,y_T,y_hat_J,error,e_hat,e_tail,bound_mode";

impl ExperimentReport {
    pub fn csv_row(&self) -> String {
        [
            csv_field(&self.u),
            fmt_g(self.horizon),
            self.steps.to_string(),
            fmt_g(self.delta),
            self.order.to_string(),
            fmt_g(self.norm_uhat),
            fmt_opt(self.s),
            fmt_opt(self.s_hat),
            fmt_g(self.y_t),
            fmt_g(self.y_hat),
            fmt_g(self.error),
            fmt_opt(self.e_hat),
            fmt_opt(self.e_tail),
            self.bound_mode.map(|m| m.to_string()).unwrap_or_default(),
        ]
        .join(",")
    }

    pub fn bound_total(&self) -> Option<f64> {
        Some(self.e_hat? + self.e_tail?)
    }
}

fn describe_channel(c: &Channel) -> String {
    match c {
        Channel::Constant { value } => fmt_g(*value),
        Channel::Sinusoid { amplitude, omega, phase } => {
            let amp = if *amplitude == 1.0 { String::new() } else { fmt_g(*amplitude) };
            if *phase == 0.0 {
                format!("{amp}sin({}t)", fmt_g(*omega))
            } else {
                format!("{amp}sin({}t+{})", fmt_g(*omega), fmt_g(*phase))
            }
        }
        Channel::PiecewiseConstant { .. } => "piecewise".into(),
        Channel::Sampled { .. } => "sampled".into(),
        Channel::Catenated { .. } => "catenated".into(),
    }
}

fn describe_input(u: &ContinuousInput) -> String {
    u.channels().iter().map(describe_channel).collect::<Vec<_>>().join(";")
}

fn check_channels(c: &SeriesSpec, u: &ContinuousInput) -> Result<(), HarnessError> {
    if let Some(&l) = c.active_letters().iter().find(|&&l| l > u.m()) {
        return Err(HarnessError::Config(format!("series uses x{l} but the input has {} channels", u.m())));
    }
    Ok(())
}

/// RK4 steps used for the continuous reference of explicit representations.
const REFERENCE_STEPS: usize = 4096;

/// `y(t_k)` at `t_k = kT/resolution`, `k = 0..=resolution`.
fn continuous_curve(cfg: &ExperimentConfig, c: &SeriesSpec, u: &ContinuousInput, resolution: usize) -> Result<Vec<f64>, HarnessError> {
    let t = cfg.horizon;
    let times: Vec<f64> = (0..=resolution).map(|k| t * k as f64 / resolution as f64).collect();
    let column = "y_T";
    match &cfg.system {
        SystemConfig::Builtin(b) => times
            .iter()
            .map(|&tk| {
                let z = if tk == 0.0 { 0.0 } else { u.integral(1, 0.0, tk)? };
                match b {
                    Builtin::LcFactorial if z >= 1.0 => Err(HarnessError::Domain {
                        column,
                        message: format!("∫u = {z} ≥ 1 at t = {tk}, 1/(1 − ∫u) has no finite value"),
                    }),
                    Builtin::LcFactorial => Ok(1.0 / (1.0 - z)),
                    Builtin::GcGeometric => Ok(z.exp()),
                }
            })
            .collect(),
        SystemConfig::Representation(_) => {
            let rep = c.representation().expect("representation system");
            let sub = REFERENCE_STEPS.div_ceil(resolution);
            let out = ct_bilinear_simulate(rep, &u.with_horizon(t)?, t, resolution * sub)?;
            Ok(out.values.iter().step_by(sub).copied().collect())
        }
        SystemConfig::Polynomial(_) => {
            // finite series: truncating at the degree is exact
            let degree = polynomial_degree(cfg);
            times
                .iter()
                .map(|&tk| {
                    if tk == 0.0 {
                        return Ok(c.coefficient(&crate::algebra::Word::empty())?);
                    }
                    Ok(fliess_truncated(c, u, tk, degree, &QuadratureControl::default(), cfg.enumeration_cap)?.value)
                })
                .collect()
        }
    }
}

fn polynomial_degree(cfg: &ExperimentConfig) -> usize {
    match &cfg.system {
        SystemConfig::Polynomial(p) => p
            .terms
            .iter()
            .filter(|(_, &c)| c != 0.0)
            .filter_map(|(w, _)| w.parse::<crate::algebra::Word>().ok().map(|w| w.len()))
            .max()
            .unwrap_or(0),
        _ => 0,
    }
}

struct Prepared {
    c: SeriesSpec,
    u: ContinuousInput,
    uhat: DiscreteInput,
}

fn prepare(cfg: &ExperimentConfig) -> Result<Prepared, HarnessError> {
    cfg.validate()?;
    let c = cfg.series()?;
    let u = cfg.input()?;
    check_channels(&c, &u)?;
    let uhat = discretize_with(&u, cfg.steps, cfg.increment_rule)?;
    Ok(Prepared { c, u, uhat })
}

fn bound_report(cfg: &ExperimentConfig, p: &Prepared) -> Result<Option<(BoundInputs, BoundReport)>, HarnessError> {
    let Some(g) = p.c.growth() else { return Ok(None) };
    let b = BoundInputs::for_series(&p.c, &p.u, &p.uhat, cfg.order)
        .map_err(|source| HarnessError::Bounds { column: "norm_uhat", source })?;
    let report = match g.kind {
        GrowthKind::LocallyConvergent => lc_bounds(&b, cfg.bound_mode).map_err(|source| {
            let column = match source {
                BoundsError::Divergent { parameter: "s", .. } => "e_tail",
                _ => "e_hat",
            };
            HarnessError::Bounds { column, source }
        })?,
        // factorial-decay coefficients also satisfy the geometric bound
        GrowthKind::GloballyConvergent | GrowthKind::FactorialDecay => gc_bounds(&b),
    };
    Ok(Some((b, report)))
}

/// Evaluates `ŷ^J(L)`, `y(T)` and the bounds for one config.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    let p = prepare(cfg)?;
    let y_hat = *dt_fliess_trajectory(&p.c, &p.uhat, cfg.order, cfg.enumeration_cap)?
        .last()
        .expect("trajectory has L+1 entries");
    let y_t = *continuous_curve(cfg, &p.c, &p.u, 1)?.last().expect("two samples");
    let bounds = bound_report(cfg, &p)?;
    let mut warnings = Vec::new();
    if p.c.growth().is_some() {
        warnings.extend(
            regime_check(&p.c, &p.u, &p.uhat, cfg.order)
                .map_err(|source| HarnessError::Bounds { column: "s", source })?
                .iter()
                .map(|w| w.to_string()),
        );
    }
    let norm_uhat = p.uhat.sup_norm_over(p.c.active_letters());
    Ok(ExperimentReport {
        label: cfg.label.clone(),
        u: describe_input(&p.u),
        horizon: cfg.horizon,
        steps: cfg.steps,
        delta: p.uhat.delta(),
        order: cfg.order,
        norm_uhat,
        s: bounds.as_ref().map(|(_, r)| r.s),
        s_hat: bounds.as_ref().map(|(_, r)| r.s_hat),
        y_t,
        y_hat,
        error: y_hat - y_t,
        e_hat: bounds.as_ref().map(|(_, r)| r.e_hat),
        e_tail: bounds.as_ref().map(|(_, r)| r.e_tail),
        bound_mode: p
            .c
            .growth()
            .filter(|g| g.kind == GrowthKind::LocallyConvergent)
            .map(|_| cfg.bound_mode),
        warnings,
    })
}

/// CSV time series `t,y,N,y_hat_J` sampled at `resolution + 1` evenly spaced
/// times; `N` is the last discrete step at or before `t`. With
/// `cfg.realization` set, a `realization` column holds the resolvent output.
pub fn emit_trajectory(cfg: &ExperimentConfig, resolution: usize) -> Result<String, HarnessError> {
    if resolution == 0 {
        return Err(HarnessError::Config("resolution must be at least 1".into()));
    }
    let p = prepare(cfg)?;
    let discrete = dt_fliess_trajectory(&p.c, &p.uhat, cfg.order, cfg.enumeration_cap)?;
    let continuous = continuous_curve(cfg, &p.c, &p.u, resolution)?;
    let realized = if cfg.realization {
        let rep = p.c.representation().ok_or_else(|| {
            HarnessError::Config("realization output needs a rational system (builtin gc_geometric or a representation)".into())
        })?;
        Some(simulate_forward(&StateAffineSystem::new(rep.clone()), &p.uhat, cfg.steps)?.outputs)
    } else {
        None
    };
    let mut out = String::from("t,y,N,y_hat_J");
    if realized.is_some() {
        out.push_str(",realization");
    }
    out.push('\n');
    for (k, y) in continuous.iter().enumerate() {
        let t = cfg.horizon * k as f64 / resolution as f64;
        // exact rational position avoids flooring 0.999999 steps down
        let n = (k * cfg.steps) / resolution;
        out.push_str(&format!("{},{},{},{}", fmt_g(t), fmt_g(*y), n, fmt_g(discrete[n])));
        if let Some(r) = &realized {
            out.push(',');
            out.push_str(&fmt_g(r[n]));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Multi-line human-readable bound summary for one config.
pub fn bounds_summary(cfg: &ExperimentConfig) -> Result<String, HarnessError> {
    let p = prepare(cfg)?;
    let g = p
        .c
        .growth()
        .ok_or_else(|| HarnessError::Config("bounds need a declared growth class".into()))?;
    let b = BoundInputs::for_series(&p.c, &p.u, &p.uhat, cfg.order)
        .map_err(|source| HarnessError::Bounds { column: "norm_uhat", source })?;
    let conv = classify_convergence(&g, b.m);
    let mut lines = vec![
        format!("growth: {:?} K={} M={}", g.kind, fmt_g(g.scale), fmt_g(g.rate)),
        format!("continuous regime: {}", conv.continuous),
        format!("discrete regime: {}", conv.discrete),
    ];
    if let Some(r) = conv.discrete_radius {
        lines.push(format!("discrete radius: {}", fmt_g(r)));
    }
    lines.push(format!("m_effective: {}", b.m));
    lines.push(format!("norm_uhat: {}", fmt_g(b.norm_uhat)));
    lines.push(format!("R_bar: {}", fmt_g(b.r_bar)));
    lines.push(format!("s: {}", fmt_g(b.s())));
    lines.push(format!("s_hat: {}", fmt_g(b.s_hat())));
    let show = |lines: &mut Vec<String>, name: &str, r: Result<f64, BoundsError>| match r {
        Ok(v) => lines.push(format!("{name}: {}", fmt_g(v))),
        Err(e) => lines.push(format!("{name}: {e}")),
    };
    match g.kind {
        GrowthKind::LocallyConvergent => {
            for mode in [BoundMode::Statement, BoundMode::ExactSum] {
                show(&mut lines, &format!("e_hat[{mode}]"), lc_bounds(&b, mode).map(|r| r.e_hat));
            }
            show(&mut lines, "e_tail", lc_bounds(&b, cfg.bound_mode).map(|r| r.e_tail));
            show(&mut lines, "e_hat_simplified", lc_simplified(&b));
        }
        GrowthKind::GloballyConvergent | GrowthKind::FactorialDecay => {
            let r = gc_bounds(&b);
            lines.push(format!("e_hat: {}", fmt_g(r.e_hat)));
            lines.push(format!("e_tail: {}", fmt_g(r.e_tail)));
            lines.push(format!("e_hat_simplified: {}", fmt_g(gc_simplified(&b))));
            show(&mut lines, "dt_tail", dt_tail_bound(&g, b.m, b.norm_uhat, cfg.steps, cfg.order));
        }
    }
    for w in regime_check(&p.c, &p.u, &p.uhat, cfg.order).map_err(|source| HarnessError::Bounds { column: "s", source })? {
        lines.push(format!("warning: {w}"));
    }
    Ok(lines.join("\n") + "\n")
}

/// Runs a config and carries out its `outputs`: table rows go to `out`,
/// trajectory CSVs to their paths. Returns the files written.
pub fn run_config(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<(ExperimentReport, Vec<PathBuf>), HarnessError> {
    let report = run_experiment(cfg)?;
    let io = |e: std::io::Error| HarnessError::Io(e.to_string());
    let wants_row = cfg.outputs.is_empty() || cfg.outputs.iter().any(|o| *o == OutputSpec::TableRow);
    if wants_row {
        writeln!(out, "{REPORT_HEADER}").map_err(io)?;
        writeln!(out, "{}", report.csv_row()).map_err(io)?;
    }
    let mut written = Vec::new();
    for o in &cfg.outputs {
        if let OutputSpec::TrajectoryCsv { path, resolution } = o {
            let csv = emit_trajectory(cfg, *resolution)?;
            std::fs::write(path, csv).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
            written.push(path.clone());
        }
    }
    Ok((report, written))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(json: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(json).unwrap()
    }

    const LC1: &str = r#"{"system": {"builtin": "lc_factorial"},
        "input": {"channels": [{"type": "constant", "value": 1.0}]}, "T": 0.5, "L": 50, "J": 10}"#;

    #[test]
    fn table_two_first_row() {
        let r = run_experiment(&cfg(LC1)).unwrap();
        assert_eq!(r.u, "1");
        assert!((r.delta * r.steps as f64 - r.horizon).abs() < 1e-15);
        assert!((r.y_t - 2.0).abs() < 1e-15);
        assert!((r.y_hat - 2.0412).abs() < 5e-5);
        assert!((r.e_hat.unwrap() - 0.0355).abs() < 5e-5);
        assert!((r.e_tail.unwrap() - 9.7656e-4).abs() < 1e-8);
        assert_eq!(r.s.unwrap(), 0.5);
        assert!((r.s_hat.unwrap() - 0.5).abs() < 1e-14);
        assert!(r.warnings.is_empty());
        let row = r.csv_row();
        assert!(row.starts_with("1,0.5,50,0.01,10,0.01,0.5,0.5,2,2.0412"), "{row}");
        assert!(row.ends_with(",statement"));
    }

    #[test]
    fn zero_input_zero_order() {
        let c = cfg(r#"{"system": {"builtin": "gc_geometric"},
            "input": {"channels": [{"type": "constant", "value": 0.0}]}, "T": 1.0, "L": 10, "J": 0}"#);
        let r = run_experiment(&c).unwrap();
        assert_eq!((r.y_hat, r.y_t, r.error), (1.0, 1.0, 0.0));
        let csv = emit_trajectory(&c, 5).unwrap();
        for line in csv.lines().skip(1) {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!((cols[1], cols[3]), ("1", "1"));
        }
    }

    #[test]
    fn lc_outside_radius_is_a_domain_error() {
        let c = cfg(r#"{"system": {"builtin": "lc_factorial"},
            "input": {"channels": [{"type": "constant", "value": 1.0}]}, "T": 2.0, "L": 50, "J": 10}"#);
        assert!(matches!(run_experiment(&c), Err(HarnessError::Domain { column: "y_T", .. })));
    }

    #[test]
    fn trajectory_columns() {
        let c = cfg(r#"{"system": {"builtin": "gc_geometric"}, "realization": true,
            "input": {"channels": [{"type": "constant", "value": 1.0}]}, "T": 2.0, "L": 50, "J": 20}"#);
        let csv = emit_trajectory(&c, 50).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,y,N,y_hat_J,realization");
        assert_eq!(lines.len(), 52);
        assert!(lines[51].starts_with("2,7.38906,50,7.69907,7.69907"), "{}", lines[51]);
        assert_eq!(csv, emit_trajectory(&c, 50).unwrap());
        let lc = cfg(&LC1.replace("\"J\": 10", "\"J\": 10, \"realization\": true"));
        assert!(matches!(emit_trajectory(&lc, 10), Err(HarnessError::Config(_))));
    }

    #[test]
    fn explicit_systems_use_reference_integrators() {
        let rep = cfg(r#"{"system": {"representation": {"dim": 1, "matrices": [[0.0], [1.0]], "gamma": [1.0],
                "lambda": [1.0], "growth": {"kind": "gc", "K": 1.0, "M": 1.0}}},
            "input": {"channels": [{"type": "sinusoid", "amplitude": 1.0, "omega": 10.0}]}, "T": 2.0, "L": 50, "J": 10}"#);
        let r = run_experiment(&rep).unwrap();
        assert!((r.y_t - ((1.0 - 20f64.cos()) / 10.0).exp()).abs() < 1e-9);
        let poly = cfg(r#"{"system": {"polynomial": {"m": 1, "terms": {"": 1.0, "x1x1": 2.0}}},
            "input": {"channels": [{"type": "constant", "value": 1.0}]}, "T": 1.0, "L": 40, "J": 2}"#);
        let r = run_experiment(&poly).unwrap();
        assert!((r.y_t - 2.0).abs() < 1e-12);
        assert!((r.y_hat - (1.0 + 2.0 * 41.0 / 80.0)).abs() < 1e-12);
        assert_eq!((r.e_hat, r.s), (None, None));
        assert_eq!(polynomial_degree(&poly), 2);
    }

    #[test]
    fn summary_mentions_both_modes() {
        let s = bounds_summary(&cfg(LC1)).unwrap();
        assert!(s.contains("e_hat[statement]: 0.0354"));
        assert!(s.contains("e_hat[exact_sum]: 0.0386"));
        assert!(s.contains("discrete regime: divergent"));
    }

    #[test]
    fn run_config_writes_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traj.csv");
        let mut c = cfg(LC1);
        c.outputs = vec![OutputSpec::TableRow, OutputSpec::TrajectoryCsv { path: path.clone(), resolution: 10 }];
        let mut buf = Vec::new();
        let (_, files) = run_config(&c, &mut buf).unwrap();
        assert_eq!(files, vec![path.clone()]);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(REPORT_HEADER));
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 12);
    }
}
