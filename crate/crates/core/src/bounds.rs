//! A-priori error bounds for truncated discrete-time Fliess operators.
//!
//! The total error `|F_c[u](T) − F̂_c^J[û](L)|` splits into the sum-vs-integral
//! error `ê(J)` of the first `J` terms and the continuous tail `e(J)`. Both
//! depend on the growth constants `K`, `M`, on `ŝ = M(m+1)L‖û‖_∞` and on
//! `s = M(m+1)R̄` with `R̄ = max{‖u‖_1, T}`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{Alphabet, GrowthClass, GrowthKind, SeriesSpec, Word};
use crate::numeric::{binomial, factorial};
use crate::signals::{channel_l1_norms, ContinuousInput, DiscreteInput};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("bound diverges: {parameter} = {value} must be below 1")]
    Divergent { parameter: &'static str, value: f64 },
    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, BoundsError>;

/// Below this `L/J` ratio the asymptotic bounds are flagged.
pub const DEFAULT_MIN_STEP_RATIO: f64 = 5.0;

/// Which closed form to use for the LC sum-vs-integral error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMode {
    /// `(K/L)[ŝ²/(1−ŝ)³ − 2J(J+1)ŝ^{J+1}/(1−ŝ) − Jŝ^{J+2}/(1−ŝ)² − ŝ^{J+2}/(1−ŝ)³]`
    #[default]
    Statement,
    /// `(K/2L) Σ_{j≤J} j(j−1)ŝ^j`
    ExactSum,
}

impl fmt::Display for BoundMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundMode::Statement => "statement",
            BoundMode::ExactSum => "exact_sum",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    /// Growth scale `K`.
    pub scale: f64,
    /// Growth rate `M`.
    pub rate: f64,
    /// `m` in the `(m+1)` letter-count factor.
    pub m: usize,
    pub steps: usize,
    pub order: usize,
    pub norm_uhat: f64,
    /// `max{R, T}`.
    pub r_bar: f64,
}

impl BoundInputs {
    pub fn new(growth: GrowthClass, m: usize, steps: usize, order: usize, norm_uhat: f64, r_bar: f64) -> Result<Self> {
        if steps == 0 {
            return Err(BoundsError::Domain("L must be at least 1".into()));
        }
        if !(norm_uhat >= 0.0 && r_bar >= 0.0 && norm_uhat.is_finite() && r_bar.is_finite()) {
            return Err(BoundsError::Domain(format!("norms must be finite and nonnegative: {norm_uhat}, {r_bar}")));
        }
        Ok(Self { scale: growth.scale, rate: growth.rate, m, steps, order, norm_uhat, r_bar })
    }

    /// Parameters for a series driven by `u` and its discretization `û`.
    ///
    /// Only letters the series involves count towards `m+1`, `‖û‖_∞` and `R`.
    pub fn for_series(c: &SeriesSpec, u: &ContinuousInput, uhat: &DiscreteInput, order: usize) -> Result<Self> {
        let growth = c
            .growth()
            .ok_or_else(|| BoundsError::Domain("series has no declared growth class".into()))?;
        let active = c.active_letters();
        if let Some(&l) = active.iter().find(|&&l| l > uhat.m() || l > u.m()) {
            return Err(BoundsError::Domain(format!("series letter x{l} has no input channel")));
        }
        let m = active.len().max(1) - 1;
        let l1 = channel_l1_norms(u);
        let r = active.iter().map(|&i| l1[i]).fold(0.0, f64::max);
        Self::new(growth, m, uhat.steps(), order, uhat.sup_norm_over(active), r.max(u.horizon()))
    }

    pub fn s_hat(&self) -> f64 {
        self.rate * (self.m + 1) as f64 * self.steps as f64 * self.norm_uhat
    }

    pub fn s(&self) -> f64 {
        self.rate * (self.m + 1) as f64 * self.r_bar
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RegimeWarning {
    /// `L/J` is below the configured ratio.
    FewSteps { steps: usize, order: usize, min_ratio: f64 },
    /// LC series with `R̄` outside the continuous convergence radius.
    OutsideRadius { r_bar: f64, radius: f64 },
    /// A geometric bound parameter is at least 1.
    BoundDiverges { parameter: &'static str, value: f64 },
    /// GC series whose discrete operator is only known to converge for `‖û‖_∞ < radius`.
    OutsideDiscreteRadius { norm_uhat: f64, radius: f64 },
}

impl fmt::Display for RegimeWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegimeWarning::FewSteps { steps, order, min_ratio } => {
                write!(f, "L/J = {steps}/{order} is below {min_ratio}; asymptotic bounds may not hold")
            }
            RegimeWarning::OutsideRadius { r_bar, radius } => {
                write!(f, "R̄ = {r_bar} is not below the convergence radius {radius}")
            }
            RegimeWarning::BoundDiverges { parameter, value } => {
                write!(f, "{parameter} = {value} ≥ 1, locally convergent bound formulas diverge")
            }
            RegimeWarning::OutsideDiscreteRadius { norm_uhat, radius } => {
                write!(f, "‖û‖∞ = {norm_uhat} is not below the discrete convergence radius {radius}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub e_hat: f64,
    pub e_tail: f64,
    pub s_hat: f64,
    pub s: f64,
    /// Formula used for `e_hat`; always `Statement` for GC reports.
    pub mode: BoundMode,
    pub regime_warnings: Vec<RegimeWarning>,
}

impl BoundReport {
    pub fn total(&self) -> f64 {
        self.e_hat + self.e_tail
    }
}

fn ratio_warning(b: &BoundInputs, min_ratio: f64) -> Option<RegimeWarning> {
    (b.order > 0 && (b.steps as f64) < min_ratio * b.order as f64).then_some(RegimeWarning::FewSteps {
        steps: b.steps,
        order: b.order,
        min_ratio,
    })
}

/// Bounds for a locally convergent series.
pub fn lc_bounds(b: &BoundInputs, mode: BoundMode) -> Result<BoundReport> {
    let (sh, s) = (b.s_hat(), b.s());
    if sh >= 1.0 {
        return Err(BoundsError::Divergent { parameter: "ŝ", value: sh });
    }
    if s >= 1.0 {
        return Err(BoundsError::Divergent { parameter: "s", value: s });
    }
    let (k, l, j) = (b.scale, b.steps as f64, b.order as i32);
    let e_hat = match mode {
        BoundMode::Statement => {
            let jf = j as f64;
            let q = 1.0 - sh;
            k / l
                * (sh * sh / q.powi(3)
                    - 2.0 * jf * (jf + 1.0) * sh.powi(j + 1) / q
                    - jf * sh.powi(j + 2) / (q * q)
                    - sh.powi(j + 2) / q.powi(3))
        }
        BoundMode::ExactSum => {
            let sum: f64 = (2..=b.order).rev().map(|i| (i * (i - 1)) as f64 * sh.powi(i as i32)).sum();
            k / (2.0 * l) * sum
        }
    };
    let e_tail = k * s.powi(j + 1) / (1.0 - s);
    Ok(BoundReport {
        e_hat,
        e_tail,
        s_hat: sh,
        s,
        mode,
        regime_warnings: ratio_warning(b, DEFAULT_MIN_STEP_RATIO).into_iter().collect(),
    })
}

/// `K ŝ² / (L (1−ŝ)³)`, the `J → ∞` limit of the statement-mode `ê`.
pub fn lc_simplified(b: &BoundInputs) -> Result<f64> {
    let (sh, s) = (b.s_hat(), b.s());
    if sh >= 1.0 {
        return Err(BoundsError::Divergent { parameter: "ŝ", value: sh });
    }
    if s >= 1.0 {
        return Err(BoundsError::Divergent { parameter: "s", value: s });
    }
    Ok(b.scale * sh * sh / (b.steps as f64 * (1.0 - sh).powi(3)))
}

/// Bounds for a globally convergent series.
pub fn gc_bounds(b: &BoundInputs) -> BoundReport {
    let (sh, s) = (b.s_hat(), b.s());
    let (k, l) = (b.scale, b.steps as f64);
    // e^ŝ Γ(J+1, ŝ) is the partial exponential sum; no exp/Γ round trip needed
    let e_hat = k / (2.0 * l) * sh * sh * exp_partial_sum(b.order, sh);
    let e_tail = k * exp_tail(b.order, s);
    BoundReport {
        e_hat,
        e_tail,
        s_hat: sh,
        s,
        mode: BoundMode::Statement,
        regime_warnings: ratio_warning(b, DEFAULT_MIN_STEP_RATIO).into_iter().collect(),
    }
}

/// `(K/2L) e^ŝ ŝ²`, the `J → ∞` limit of the GC `ê`.
pub fn gc_simplified(b: &BoundInputs) -> f64 {
    let sh = b.s_hat();
    b.scale / (2.0 * b.steps as f64) * sh.exp() * sh * sh
}

/// `Σ_{j=0}^{n} x^j / j!`, smallest terms first.
pub fn exp_partial_sum(n: usize, x: f64) -> f64 {
    let mut terms = Vec::with_capacity(n + 1);
    let mut t = 1.0;
    terms.push(t);
    for j in 1..=n {
        t *= x / j as f64;
        terms.push(t);
    }
    terms.into_iter().rev().sum()
}

/// `Σ_{j>n} x^j / j!` for `x ≥ 0`, summed directly so small tails keep
/// their relative accuracy.
pub fn exp_tail(n: usize, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    // first term x^{n+1}/(n+1)! built up in a way that avoids overflow
    let mut t = (1..=n + 1).fold(1.0, |acc, j| acc * x / j as f64);
    let mut terms = vec![t];
    let mut j = n + 1;
    loop {
        j += 1;
        t *= x / j as f64;
        terms.push(t);
        let sum: f64 = terms.iter().sum();
        if (j as f64 > x && t <= f64::EPSILON * 1e-3 * sum) || t == 0.0 || j > n + 100_000 {
            break;
        }
    }
    terms.into_iter().rev().sum()
}

/// Regularized upper incomplete gamma `Γ(n, x) = e^{−x} Σ_{j<n} x^j/j!` for
/// integer `n ≥ 1`.
pub fn upper_gamma_regularized(n: usize, x: f64) -> Result<f64> {
    if n == 0 {
        return Err(BoundsError::Domain("incomplete gamma needs a positive order".into()));
    }
    if x < 0.0 {
        return Err(BoundsError::Domain(format!("incomplete gamma argument {x} is negative")));
    }
    Ok((-x).exp() * exp_partial_sum(n - 1, x))
}

/// Asymptotic error `(T^j/L) ‖û/Δ‖^j / (2 (j−2)!)` between `S_η(L)` and `E_η(T)` for a word of length `j`.
pub fn single_integral_error_bound(word_len: usize, t: f64, steps: usize, norm_u: f64) -> Result<f64> {
    if word_len < 2 {
        return Err(BoundsError::Domain(format!("word length {word_len} < 2 has no first-order error")));
    }
    if steps == 0 {
        return Err(BoundsError::Domain("L must be at least 1".into()));
    }
    let j = word_len as i32;
    Ok(t.powi(j) / steps as f64 * norm_u.powi(j) / (2.0 * factorial(word_len - 2)))
}

/// `R̂^j C(N−1+j, j)`, a bound on `|S_η[û](N)|` when every `|û_i| ≤ R̂`.
pub fn seta_bound(word_len: usize, n: usize, r_hat: f64) -> f64 {
    if word_len == 0 {
        return 1.0;
    }
    if n == 0 {
        return 0.0;
    }
    r_hat.powi(word_len as i32) * binomial(n - 1 + word_len, word_len)
}

/// `Π U_i^{|η|_i} / |η|_i!`, a bound on `|E_η[u]|` given the channel L1 norms `U_0..U_m`.
pub fn eeta_bound(eta: &Word, channel_l1: &[f64]) -> Result<f64> {
    if channel_l1.is_empty() {
        return Err(BoundsError::Domain("need at least the drift channel norm".into()));
    }
    Alphabet::new(channel_l1.len() - 1)
        .check_word(eta)
        .map_err(|e| BoundsError::Domain(e.to_string()))?;
    let mut out = 1.0;
    for (i, &u) in channel_l1.iter().enumerate() {
        if u < 0.0 {
            return Err(BoundsError::Domain(format!("channel norm U_{i} = {u} is negative")));
        }
        let n = eta.count(i);
        out *= u.powi(n as i32) / factorial(n);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    LocallyConvergent,
    GloballyConvergent,
    AtLeastGloballyConvergent,
    Divergent,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::LocallyConvergent => "locally convergent",
            Regime::GloballyConvergent => "globally convergent",
            Regime::AtLeastGloballyConvergent => "at least globally convergent",
            Regime::Divergent => "divergent",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Convergence {
    pub continuous: Regime,
    pub discrete: Regime,
    /// `‖û‖_∞` radius when the discrete operator is only locally convergent.
    pub discrete_radius: Option<f64>,
}

/// Sense in which `F_c` and `F̂_c` converge for a growth class over `m+1` letters.
pub fn classify_convergence(g: &GrowthClass, m: usize) -> Convergence {
    match g.kind {
        GrowthKind::LocallyConvergent => Convergence {
            continuous: Regime::LocallyConvergent,
            discrete: Regime::Divergent,
            discrete_radius: None,
        },
        GrowthKind::GloballyConvergent => Convergence {
            continuous: Regime::GloballyConvergent,
            discrete: Regime::LocallyConvergent,
            discrete_radius: Some(1.0 / (g.rate * (m + 1) as f64)),
        },
        GrowthKind::FactorialDecay => Convergence {
            continuous: Regime::AtLeastGloballyConvergent,
            discrete: Regime::GloballyConvergent,
            discrete_radius: None,
        },
    }
}

/// Warnings for evaluating `c` on `u` with `û` truncated at `order`.
pub fn regime_check(c: &SeriesSpec, u: &ContinuousInput, uhat: &DiscreteInput, order: usize) -> Result<Vec<RegimeWarning>> {
    regime_check_with(c, u, uhat, order, DEFAULT_MIN_STEP_RATIO)
}

pub fn regime_check_with(
    c: &SeriesSpec,
    u: &ContinuousInput,
    uhat: &DiscreteInput,
    order: usize,
    min_ratio: f64,
) -> Result<Vec<RegimeWarning>> {
    let b = BoundInputs::for_series(c, u, uhat, order)?;
    let g = c.growth().expect("checked by for_series");
    let mut out: Vec<RegimeWarning> = ratio_warning(&b, min_ratio).into_iter().collect();
    let radius = 1.0 / (g.rate * (b.m + 1) as f64);
    match g.kind {
        GrowthKind::LocallyConvergent => {
            if b.r_bar >= radius {
                out.push(RegimeWarning::OutsideRadius { r_bar: b.r_bar, radius });
            }
            if b.s_hat() >= 1.0 {
                out.push(RegimeWarning::BoundDiverges { parameter: "ŝ", value: b.s_hat() });
            }
            if b.s() >= 1.0 {
                out.push(RegimeWarning::BoundDiverges { parameter: "s", value: b.s() });
            }
        }
        GrowthKind::GloballyConvergent => {
            if b.norm_uhat >= radius {
                out.push(RegimeWarning::OutsideDiscreteRadius { norm_uhat: b.norm_uhat, radius });
            }
        }
        GrowthKind::FactorialDecay => {}
    }
    Ok(out)
}

/// `Σ_{j>J} K r^j C(N−1+j, j)` with `r = M(m+1)R̂`: bounds `|F̂_c[û](N) − F̂_c^J[û](N)|`
/// when every `|û_i| ≤ R̂` and `c` has GC (or faster) growth.
pub fn dt_tail_bound(g: &GrowthClass, m: usize, r_hat: f64, n: usize, order: usize) -> Result<f64> {
    if g.kind == GrowthKind::LocallyConvergent {
        return Err(BoundsError::Domain("discrete tail bound needs a globally convergent class".into()));
    }
    let r = g.rate * (m + 1) as f64 * r_hat;
    if r >= 1.0 {
        return Err(BoundsError::Divergent { parameter: "M(m+1)R̂", value: r });
    }
    if n == 0 || r == 0.0 {
        return Ok(0.0);
    }
    let mut j = order + 1;
    let mut t = g.scale * r.powi(j as i32) * binomial(n - 1 + j, j);
    let mut terms = vec![t];
    loop {
        // t_{j+1}/t_j = r (N+j)/(j+1)
        let ratio = r * (n + j) as f64 / (j + 1) as f64;
        j += 1;
        t *= ratio;
        terms.push(t);
        if ratio < 1.0 && t <= 1e-3 * f64::EPSILON * terms.iter().sum::<f64>() || t == 0.0 {
            break;
        }
        if terms.len() > 1_000_000 {
            return Err(BoundsError::Domain("tail sum did not settle".into()));
        }
    }
    Ok(terms.into_iter().rev().sum())
}
