//! Iterated integrals, iterated sums, Chen series truncations and truncated
//! Fliess operators.
//!
//! Iterated integrals follow `E_{x_i η}[u](t) = ∫_0^t u_i(τ) E_η[u](τ) dτ`
//! with `E_∅ = 1`, and iterated sums `S_{x_i η}[û](N) = Σ_{k=1}^N û_i(k) S_η[û](k)`
//! with `S_∅ = 1`. Both recursions only ever look at the suffix `η` of a
//! word, so every routine here walks a set of words in an order where each
//! suffix is handled before the words built on it.

use thiserror::Error;

use crate::algebra::{AlgebraError, Polynomial, SeriesSpec, Word, WordTable};
use crate::numeric::{binomial_u128, factorial};
use crate::signals::{ContinuousInput, DiscreteInput, SignalError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error("iterated integral did not converge: last correction {correction:e} after {panels} panels")]
    QuadratureFailure { correction: f64, panels: usize },
    #[error("word length {len} exceeds the configured depth {max}")]
    DepthExceeded { len: usize, max: usize },
    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, OperatorError>;

/// Refinement settings for the iterated-integral quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureControl {
    /// Stop once successive Richardson estimates differ by less than this.
    pub tol: f64,
    /// Longest word accepted.
    pub max_depth: usize,
    /// Panels on the first pass.
    pub initial_panels: usize,
    /// Number of panel doublings before giving up.
    pub max_refinements: usize,
}

impl Default for QuadratureControl {
    fn default() -> Self {
        Self { tol: 1e-10, max_depth: 12, initial_panels: 8, max_refinements: 14 }
    }
}

/// Value plus bookkeeping for a truncated operator evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluationResult {
    pub value: f64,
    pub truncation_order: usize,
    /// Words that took part in the sum.
    pub words: usize,
    /// Discrete steps, or quadrature panels for continuous evaluations.
    pub steps_used: usize,
}

/// Linear ODE `y_k' = u_{letter_k}(t) y_{parent_k}`, `y_0 = 1`, whose
/// solution at `t` is the vector of iterated integrals of a word set.
struct Chain<'a> {
    letter: &'a [usize],
    parent: &'a [usize],
}

impl Chain<'_> {
    fn rhs(&self, uvals: &[f64], y: &[f64], out: &mut [f64]) {
        out[0] = 0.0;
        for k in 1..y.len() {
            out[k] = uvals[self.letter[k]] * y[self.parent[k]];
        }
    }

    /// Classical RK4 over `[0, t_end]`, splitting at the input's breakpoints,
    /// with `panels` steps spread over the segments by length.
    fn rk4(&self, u: &ContinuousInput, t_end: f64, panels: usize) -> (Vec<f64>, usize) {
        let n = self.letter.len();
        let mut cuts = vec![0.0];
        cuts.extend(u.breakpoints(0.0, t_end));
        cuts.push(t_end);
        let channels = u.m() + 1;
        let mut y = vec![0.0; n];
        y[0] = 1.0;
        let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let mut tmp = vec![0.0; n];
        let mut uvals = vec![0.0; channels];
        let mut used = 0;
        for seg in cuts.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            if b <= a {
                continue;
            }
            let steps = ((panels as f64 * (b - a) / t_end).ceil() as usize).max(1);
            used += steps;
            let h = (b - a) / steps as f64;
            // sample strictly inside the segment so one-sided limits are used at its ends
            let guard = (b - a) * 1e-13;
            let sample = |t: f64, uv: &mut [f64]| {
                let t = t.clamp(a + guard, b - guard);
                for (i, v) in uv.iter_mut().enumerate() {
                    *v = u.value(i, t);
                }
            };
            for s in 0..steps {
                let t = a + s as f64 * h;
                sample(t, &mut uvals);
                self.rhs(&uvals, &y, &mut k1);
                sample(t + 0.5 * h, &mut uvals);
                for k in 0..n {
                    tmp[k] = y[k] + 0.5 * h * k1[k];
                }
                self.rhs(&uvals, &tmp, &mut k2);
                for k in 0..n {
                    tmp[k] = y[k] + 0.5 * h * k2[k];
                }
                self.rhs(&uvals, &tmp, &mut k3);
                sample(t + h, &mut uvals);
                for k in 0..n {
                    tmp[k] = y[k] + h * k3[k];
                }
                self.rhs(&uvals, &tmp, &mut k4);
                for k in 0..n {
                    y[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
                }
            }
        }
        (y, used)
    }

    /// Doubles the panel count until the Richardson-corrected estimates of
    /// two successive passes agree to `tol`.
    fn integrate(&self, u: &ContinuousInput, t_end: f64, control: &QuadratureControl) -> Result<(Vec<f64>, usize)> {
        if t_end == 0.0 {
            let mut y = vec![0.0; self.letter.len()];
            y[0] = 1.0;
            return Ok((y, 0));
        }
        let mut panels = control.initial_panels.max(1);
        let (mut coarse, _) = self.rk4(u, t_end, panels);
        let mut previous: Option<Vec<f64>> = None;
        let mut correction = f64::INFINITY;
        for _ in 0..control.max_refinements {
            panels *= 2;
            let (fine, used) = self.rk4(u, t_end, panels);
            let extrapolated: Vec<f64> =
                fine.iter().zip(&coarse).map(|(f, c)| f + (f - c) / 15.0).collect();
            let raw_gap = fine.iter().zip(&coarse).map(|(f, c)| (f - c).abs()).fold(0.0, f64::max);
            if let Some(prev) = &previous {
                correction = extrapolated
                    .iter()
                    .zip(prev)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                if correction < control.tol {
                    return Ok((extrapolated, used));
                }
            }
            if raw_gap == 0.0 {
                // RK4 is exact on this input (nilpotent segments)
                return Ok((fine, used));
            }
            previous = Some(extrapolated);
            coarse = fine;
        }
        Err(OperatorError::QuadratureFailure { correction, panels })
    }
}

/// Node arrays for the suffixes of one word: node `ℓ` is the suffix of length `ℓ`.
fn suffix_chain(eta: &Word) -> (Vec<usize>, Vec<usize>) {
    let w = eta.letters();
    let n = w.len();
    let mut letter = vec![0; n + 1];
    let mut parent = vec![0; n + 1];
    for l in 1..=n {
        letter[l] = w[n - l];
        parent[l] = l - 1;
    }
    (letter, parent)
}

fn check_letters(eta: &Word, m: usize) -> Result<()> {
    crate::algebra::Alphabet::new(m).check_word(eta).map_err(OperatorError::from)
}

fn check_time(u: &ContinuousInput, t: f64) -> Result<()> {
    if !(t >= 0.0 && t <= u.horizon() * (1.0 + 1e-12)) {
        return Err(OperatorError::Domain(format!("time {t} outside [0, {}]", u.horizon())));
    }
    Ok(())
}

/// `E_η[u](T, 0)` by refined RK4 quadrature of the nested integrals.
///
/// This is the brute-force reference every discrete evaluation is tested
/// against; it only assumes `u` is smooth between its breakpoints.
pub fn iterated_integral(eta: &Word, u: &ContinuousInput, t: f64, control: &QuadratureControl) -> Result<f64> {
    if eta.len() > control.max_depth {
        return Err(OperatorError::DepthExceeded { len: eta.len(), max: control.max_depth });
    }
    check_letters(eta, u.m())?;
    check_time(u, t)?;
    let (letter, parent) = suffix_chain(eta);
    let (y, _) = Chain { letter: &letter, parent: &parent }.integrate(u, t.min(u.horizon()), control)?;
    Ok(y[eta.len()])
}

/// Exact iterated integral at `t = NΔ` of the piecewise-constant input
/// `u_i(t) = û_i(N)/Δ` on step `N`.
///
/// On one step the input is constant, so a block `ξ` of letters contributes
/// `û_ξ(N) / |ξ|!`. A dynamic program over the suffixes of `η` composes
/// the steps; no partition is enumerated.
pub fn iterated_integral_pc(eta: &Word, uhat: &DiscreteInput) -> Result<f64> {
    iterated_integral_pc_at(eta, uhat, uhat.steps())
}

pub fn iterated_integral_pc_at(eta: &Word, uhat: &DiscreteInput, n_steps: usize) -> Result<f64> {
    check_letters(eta, uhat.m())?;
    check_step(uhat, n_steps)?;
    let w = eta.letters();
    let len = w.len();
    let inv_fact: Vec<f64> = (0..=len).map(|k| 1.0 / factorial(k)).collect();
    // e[l] = E of the suffix of length l, over the steps done so far
    let mut e = vec![0.0; len + 1];
    e[0] = 1.0;
    let mut next = vec![0.0; len + 1];
    for n in 1..=n_steps {
        let row = uhat.step(n);
        for l in 0..=len {
            // suffix of length l is w[len-l..]; its top block of k letters is w[len-l..len-l+k]
            let start = len - l;
            let mut acc = e[l];
            let mut block = 1.0;
            for k in 1..=l {
                block *= row[w[start + k - 1]];
                acc += e[l - k] * block * inv_fact[k];
            }
            next[l] = acc;
        }
        std::mem::swap(&mut e, &mut next);
    }
    Ok(e[len])
}

fn check_step(uhat: &DiscreteInput, n: usize) -> Result<()> {
    if n > uhat.steps() {
        return Err(OperatorError::Domain(format!("step {n} beyond the {} available", uhat.steps())));
    }
    Ok(())
}

/// `S_η[û](N)`. `N = 0` gives the empty-sum convention: 1 for `∅`, else 0.
pub fn iterated_sum(eta: &Word, uhat: &DiscreteInput, n_steps: usize) -> Result<f64> {
    check_letters(eta, uhat.m())?;
    check_step(uhat, n_steps)?;
    let w = eta.letters();
    let len = w.len();
    let mut s = vec![0.0; len + 1];
    s[0] = 1.0;
    for n in 1..=n_steps {
        let row = uhat.step(n);
        // shorter suffixes first: S_{x_i η}(N) uses S_η at the current step
        for l in 1..=len {
            s[l] += row[w[len - l]] * s[l - 1];
        }
    }
    Ok(s[len])
}

/// `S_η[û](N)` by explicit enumeration of all ways to cut `η` into `N`
/// possibly empty consecutive blocks `ξ_N ⋯ ξ_1`, with block `ξ_k`
/// evaluated on step `k`:
/// `Δ^{|η|} Σ u_{ξ_N}(N) ⋯ u_{ξ_1}(1)`, `u_i(k) = û_i(k)/Δ`.
///
/// There are `C(N-1+|η|, |η|)` terms. Exists as an independent check of
/// [`iterated_sum`].
pub fn iterated_sum_partition(eta: &Word, uhat: &DiscreteInput, n_steps: usize, cap: usize) -> Result<f64> {
    check_letters(eta, uhat.m())?;
    check_step(uhat, n_steps)?;
    let len = eta.len();
    if n_steps == 0 {
        return Ok(if len == 0 { 1.0 } else { 0.0 });
    }
    let terms = binomial_u128(n_steps - 1 + len, len);
    if terms > cap as u128 {
        return Err(AlgebraError::CapExceeded { requested: terms, cap }.into());
    }
    let delta = uhat.delta();
    let scaled = |k: usize, i: usize| uhat.get(k, i) / delta;

    // block for step k starts at `pos`; leftmost blocks belong to the latest steps
    fn go(w: &[usize], pos: usize, k: usize, u: &dyn Fn(usize, usize) -> f64) -> f64 {
        if k == 1 {
            return w[pos..].iter().map(|&i| u(1, i)).product();
        }
        let mut total = 0.0;
        let mut block = 1.0;
        for end in pos..=w.len() {
            if end > pos {
                block *= u(k, w[end - 1]);
            }
            total += block * go(w, end, k - 1, u);
        }
        total
    }
    Ok(delta.powi(len as i32) * go(eta.letters(), 0, n_steps, &scaled))
}

/// Coefficients `E_η[u](T, 0)` for all words up to a given length.
#[derive(Debug, Clone, PartialEq)]
pub struct ChenTruncation {
    pub order: usize,
    pub coefficients: Polynomial,
}

impl ChenTruncation {
    /// Catenation product `P[later] · P[earlier]`, dropping words longer
    /// than the smaller order. By Chen's identity this is the truncated
    /// Chen series of `earlier` followed by `later`.
    pub fn product(later: &ChenTruncation, earlier: &ChenTruncation) -> ChenTruncation {
        let order = later.order.min(earlier.order);
        ChenTruncation {
            order,
            coefficients: later.coefficients.concat_product(&earlier.coefficients, Some(order)),
        }
    }
}

/// Chen series `Σ_{|η| ≤ order} E_η[u](T, 0) η` over all letters `x0..xm`.
pub fn chen_truncation(
    u: &ContinuousInput,
    t: f64,
    order: usize,
    control: &QuadratureControl,
    cap: usize,
) -> Result<ChenTruncation> {
    let alphabet = crate::algebra::Alphabet::new(u.m());
    let letters: Vec<usize> = alphabet.letters().collect();
    let table = WordTable::new(alphabet, &letters, order, cap)?;
    let values = all_iterated_integrals(&table, u, t, control)?.0;
    let coefficients = Polynomial::from_terms((0..table.len()).map(|k| (table.word(k), values[k])));
    Ok(ChenTruncation { order, coefficients })
}

fn all_iterated_integrals(
    table: &WordTable,
    u: &ContinuousInput,
    t: f64,
    control: &QuadratureControl,
) -> Result<(Vec<f64>, usize)> {
    if table.max_len() > control.max_depth {
        return Err(OperatorError::DepthExceeded { len: table.max_len(), max: control.max_depth });
    }
    if let Some(&l) = table.letters().last() {
        if l > u.m() {
            return Err(AlgebraError::LetterOutOfRange { letter: l, m: u.m() }.into());
        }
    }
    check_time(u, t)?;
    let letter: Vec<usize> = (0..table.len()).map(|k| table.letter(k)).collect();
    let parent: Vec<usize> = (0..table.len()).map(|k| table.parent(k)).collect();
    Chain { letter: &letter, parent: &parent }.integrate(u, t.min(u.horizon()), control)
}

/// `Σ_{|η| ≤ J} (c, η) E_η[u](T, 0)`.
pub fn fliess_truncated(
    c: &SeriesSpec,
    u: &ContinuousInput,
    t: f64,
    order: usize,
    control: &QuadratureControl,
    cap: usize,
) -> Result<EvaluationResult> {
    let table = WordTable::new(c.alphabet(), c.active_letters(), order, cap)?;
    let coeffs = c.coefficient_table(&table);
    let (values, panels) = all_iterated_integrals(&table, u, t, control)?;
    let value = coeffs.iter().zip(&values).map(|(a, b)| a * b).sum();
    Ok(EvaluationResult { value, truncation_order: order, words: table.len(), steps_used: panels })
}

/// `F̂_c^J[û](N) = Σ_{|η| ≤ J} (c, η) S_η[û](N)`.
pub fn dt_fliess_truncated(
    c: &SeriesSpec,
    uhat: &DiscreteInput,
    n_steps: usize,
    order: usize,
    cap: usize,
) -> Result<EvaluationResult> {
    check_step(uhat, n_steps)?;
    let traj = dt_fliess_trajectory(c, &uhat.prefix(n_steps), order, cap)?;
    let words = WordTable::new(c.alphabet(), c.active_letters(), order, cap)?.len();
    Ok(EvaluationResult { value: traj[n_steps], truncation_order: order, words, steps_used: n_steps })
}

/// `F̂_c^J[û](N)` for every `N = 0..=L` in one forward pass.
///
/// All `S_η(N)`, `|η| ≤ J`, live in one flat array ranked so a word's
/// suffix comes first; the step update
/// `S_{x_i η}(N) = S_{x_i η}(N-1) + û_i(N) S_η(N)` then runs in index order.
pub fn dt_fliess_trajectory(c: &SeriesSpec, uhat: &DiscreteInput, order: usize, cap: usize) -> Result<Vec<f64>> {
    for &l in c.active_letters() {
        if l > uhat.m() {
            return Err(AlgebraError::LetterOutOfRange { letter: l, m: uhat.m() }.into());
        }
    }
    let table = WordTable::new(c.alphabet(), c.active_letters(), order, cap)?;
    let coeffs = c.coefficient_table(&table);
    let letter: Vec<usize> = (0..table.len()).map(|k| table.letter(k)).collect();
    let parent: Vec<usize> = (0..table.len()).map(|k| table.parent(k)).collect();
    let mut s = vec![0.0; table.len()];
    s[0] = 1.0;
    let output = |s: &[f64]| coeffs.iter().zip(s).map(|(a, b)| a * b).sum::<f64>();
    let mut out = Vec::with_capacity(uhat.steps() + 1);
    out.push(output(&s));
    for n in 1..=uhat.steps() {
        let row = uhat.step(n);
        for k in 1..s.len() {
            s[k] += row[letter[k]] * s[parent[k]];
        }
        out.push(output(&s));
    }
    Ok(out)
}
