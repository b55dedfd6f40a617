//! State-space evaluation of rational series.
//!
//! A series with linear representation `(A_0..A_m, γ, λ)` is realized in
//! discrete time by the resolvent recursion
//! `ẑ(N+1) = [I − Σ_j A_j û_j(N+1)]^{-1} ẑ(N)`, `ẑ(0) = γ`, `ŷ = λẑ`,
//! which sums every word at once. The continuous counterpart is the bilinear
//! system `ż = Σ_j A_j z u_j`, `z(0) = γ`, `y = λz`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{left_shift, AlgebraError, LinearRepresentation, SeriesSpec};
use crate::operators::{dt_fliess_truncated, OperatorError};
use crate::signals::{ContinuousInput, DiscreteInput};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RealizationError {
    #[error("transition matrix is numerically singular")]
    SingularTransition,
    #[error("‖Σ A_j û_j‖∞ = {norm} is not below {threshold}")]
    PolicyViolation { norm: f64, threshold: f64 },
    #[error("linear solve residual {residual:e} exceeds {limit:e}")]
    ResidualTooLarge { residual: f64, limit: f64 },
    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<RealizationError>,
    },
    #[error("state left the finite range at t = {t}")]
    NonFinite { t: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

pub type Result<T> = std::result::Result<T, RealizationError>;

/// How `forward_step` decides the resolvent may be applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvertibilityPolicy {
    /// Require `‖Σ A_j û_j‖∞` below the threshold (a Neumann-series condition).
    #[default]
    StrictNorm,
    /// Accept any solve whose residual is below `1e-10 ‖z‖∞`.
    SolveWithResidual,
}

pub const DEFAULT_NORM_THRESHOLD: f64 = 1.0 - 1e-9;
const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct StateAffineSystem {
    pub rep: LinearRepresentation,
    pub policy: InvertibilityPolicy,
    pub norm_threshold: f64,
}

impl StateAffineSystem {
    pub fn new(rep: LinearRepresentation) -> Self {
        Self { rep, policy: InvertibilityPolicy::default(), norm_threshold: DEFAULT_NORM_THRESHOLD }
    }

    pub fn with_policy(mut self, policy: InvertibilityPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn dim(&self) -> usize {
        self.rep.dim()
    }

    fn drive(&self, u: &[f64]) -> Result<DMatrix<f64>> {
        let mats = self.rep.matrices();
        if u.len() != mats.len() {
            return Err(RealizationError::Domain(format!(
                "increment has {} channels, system has {} letters",
                u.len(),
                mats.len()
            )));
        }
        let n = self.dim();
        Ok(mats.iter().zip(u).fold(DMatrix::zeros(n, n), |acc, (a, &v)| acc + a * v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `ẑ(0) .. ẑ(N_f)`.
    pub states: Vec<DVector<f64>>,
    /// `ŷ(N) = λ ẑ(N)`.
    pub outputs: Vec<f64>,
}

fn norm_inf(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// `ẑ(N+1) = [I − Σ A_j û_j(N+1)]^{-1} ẑ(N)`, via an LU solve.
///
/// `u_next` holds `û_0(N+1) .. û_m(N+1)`.
pub fn forward_step(sys: &StateAffineSystem, z: &DVector<f64>, u_next: &[f64]) -> Result<DVector<f64>> {
    let drive = sys.drive(u_next)?;
    let n = sys.dim();
    let transition = DMatrix::identity(n, n) - &drive;
    let lu = transition.clone().lu();
    let scale = norm_inf(&transition).max(f64::MIN_POSITIVE);
    let pivot = lu.u().diagonal().iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
    if !(pivot > 1e-14 * scale) {
        return Err(RealizationError::SingularTransition);
    }
    let norm = norm_inf(&drive);
    if sys.policy == InvertibilityPolicy::StrictNorm && !(norm < sys.norm_threshold) {
        return Err(RealizationError::PolicyViolation { norm, threshold: sys.norm_threshold });
    }
    let next = lu.solve(z).ok_or(RealizationError::SingularTransition)?;
    if sys.policy == InvertibilityPolicy::SolveWithResidual {
        let residual = (&transition * &next - z).amax();
        let limit = RESIDUAL_TOL * z.amax();
        if residual > limit {
            return Err(RealizationError::ResidualTooLarge { residual, limit });
        }
    }
    Ok(next)
}

/// Same update as [`forward_step`], read as the implicit Euler step
/// `z((N+1)Δ) ≈ z(NΔ) + Σ A_j û_j(N+1) z((N+1)Δ)` of the bilinear system.
pub fn implicit_discretize_step(sys: &StateAffineSystem, z_prev: &DVector<f64>, u_next: &[f64]) -> Result<DVector<f64>> {
    forward_step(sys, z_prev, u_next)
}

/// Runs [`forward_step`] from `ẑ(0) = γ` for `n_f` steps.
pub fn simulate_forward(sys: &StateAffineSystem, uhat: &DiscreteInput, n_f: usize) -> Result<Trajectory> {
    if n_f > uhat.steps() {
        return Err(RealizationError::Domain(format!("N_f = {n_f} exceeds L = {}", uhat.steps())));
    }
    let mut z = sys.rep.gamma().clone();
    let mut states = Vec::with_capacity(n_f + 1);
    let mut outputs = Vec::with_capacity(n_f + 1);
    outputs.push((sys.rep.lambda() * &z)[0]);
    states.push(z.clone());
    for n in 1..=n_f {
        z = forward_step(sys, &z, uhat.step(n))
            .map_err(|e| RealizationError::AtStep { step: n, source: Box::new(e) })?;
        outputs.push((sys.rep.lambda() * &z)[0]);
        states.push(z.clone());
    }
    Ok(Trajectory { states, outputs })
}

/// `ẑ(N) = [I − Σ A_j û_j(N+1)] ẑ(N+1)`.
pub fn backward_step(sys: &StateAffineSystem, z_next: &DVector<f64>, u_next: &[f64]) -> Result<DVector<f64>> {
    let drive = sys.drive(u_next)?;
    Ok(z_next - drive * z_next)
}

/// Runs [`backward_step`] from `ẑ(N_f) = terminal` down to `ẑ(0)`.
///
/// Started from the terminal state of [`simulate_forward`] this returns to `γ`.
pub fn simulate_backward(
    sys: &StateAffineSystem,
    uhat: &DiscreteInput,
    n_f: usize,
    terminal: &DVector<f64>,
) -> Result<Trajectory> {
    if n_f > uhat.steps() {
        return Err(RealizationError::Domain(format!("N_f = {n_f} exceeds L = {}", uhat.steps())));
    }
    if terminal.len() != sys.dim() {
        return Err(RealizationError::Domain(format!("terminal state has dimension {}", terminal.len())));
    }
    let mut states = vec![terminal.clone(); n_f + 1];
    for n in (0..n_f).rev() {
        states[n] = backward_step(sys, &states[n + 1], uhat.step(n + 1))?;
    }
    let outputs = states.iter().map(|z| (sys.rep.lambda() * z)[0]).collect();
    Ok(Trajectory { states, outputs })
}

/// Output samples `y(kT/steps)`, `k = 0..=steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledOutput {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

/// Fixed-step RK4 on `ż = Σ A_j z u_j(t)`, `z(0) = γ`, `y = λz`.
pub fn ct_bilinear_simulate(rep: &LinearRepresentation, u: &ContinuousInput, t: f64, steps: usize) -> Result<SampledOutput> {
    if steps == 0 {
        return Err(RealizationError::Domain("need at least one RK4 step".into()));
    }
    if u.m() + 1 != rep.matrices().len() {
        return Err(RealizationError::Domain(format!(
            "input has {} channels, system has {} letters",
            u.m() + 1,
            rep.matrices().len()
        )));
    }
    if !(t > 0.0 && t <= u.horizon() * (1.0 + 1e-12)) {
        return Err(RealizationError::Domain(format!("time {t} outside (0, {}]", u.horizon())));
    }
    let n = rep.dim();
    let field = |time: f64, z: &DVector<f64>| -> DVector<f64> {
        rep.matrices()
            .iter()
            .enumerate()
            .fold(DVector::zeros(n), |acc, (j, a)| acc + a * z * u.value(j, time.min(u.horizon())))
    };
    let h = t / steps as f64;
    let mut z = rep.gamma().clone();
    let mut times = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    times.push(0.0);
    values.push((rep.lambda() * &z)[0]);
    for k in 0..steps {
        let t0 = k as f64 * h;
        let k1 = field(t0, &z);
        let k2 = field(t0 + 0.5 * h, &(&z + &k1 * (0.5 * h)));
        let k3 = field(t0 + 0.5 * h, &(&z + &k2 * (0.5 * h)));
        let k4 = field(t0 + h, &(&z + &k3 * h));
        z += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        let t1 = (k + 1) as f64 * h;
        if !z.iter().all(|x| x.is_finite()) {
            return Err(RealizationError::NonFinite { t: t1 });
        }
        times.push(t1);
        values.push((rep.lambda() * &z)[0]);
    }
    Ok(SampledOutput { times, values })
}

/// `|F̂^J(N+1) − F̂^J(N) − Σ_j û_j(N+1) F̂^{J−1}_{x_j^{-1}c}(N+1)|`.
///
/// Vanishes up to rounding for every series and input.
pub fn one_step_identity_check(c: &SeriesSpec, uhat: &DiscreteInput, n: usize, order: usize, cap: usize) -> Result<f64> {
    if n + 1 > uhat.steps() {
        return Err(RealizationError::Domain(format!("step N+1 = {} exceeds L = {}", n + 1, uhat.steps())));
    }
    let lhs = dt_fliess_truncated(c, uhat, n + 1, order, cap)?.value;
    let mut rhs = dt_fliess_truncated(c, uhat, n, order, cap)?.value;
    if order > 0 {
        let row = uhat.step(n + 1);
        for &j in c.active_letters() {
            let shifted = left_shift(&crate::algebra::Word::new(vec![j]), c)?;
            rhs += row[j] * dt_fliess_truncated(&shifted, uhat, n + 1, order - 1, cap)?.value;
        }
    }
    Ok((lhs - rhs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Alphabet, Polynomial, Word};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn example4() -> StateAffineSystem {
        StateAffineSystem::new(LinearRepresentation::scalar(&[0.0, 1.0], 1.0, 1.0).unwrap())
    }

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn scalar_forward_step() {
        let sys = example4();
        let z = forward_step(&sys, &v(&[1.0]), &[0.04, 0.04]).unwrap();
        assert_abs_diff_eq!(z[0], 1.0 / 0.96, epsilon = 1e-15);
        assert_eq!(forward_step(&sys, &v(&[2.5]), &[0.0, 0.0]).unwrap()[0], 2.5);
        assert_eq!(forward_step(&sys, &v(&[1.0]), &[0.0, 1.0]), Err(RealizationError::SingularTransition));
        assert!(matches!(
            forward_step(&sys, &v(&[1.0]), &[0.0, 1.2]),
            Err(RealizationError::PolicyViolation { .. })
        ));
        let loose = example4().with_policy(InvertibilityPolicy::SolveWithResidual);
        assert_abs_diff_eq!(forward_step(&loose, &v(&[1.0]), &[0.0, 1.2]).unwrap()[0], -5.0, epsilon = 1e-12);
        assert!(forward_step(&sys, &v(&[1.0]), &[0.1]).is_err());
    }

    #[test]
    fn product_formula() {
        let sys = example4();
        let d = DiscreteInput::constant(1, 50, 0.04, 0.04).unwrap();
        let tr = simulate_forward(&sys, &d, 50).unwrap();
        assert_eq!(tr.outputs[0], 1.0);
        assert_eq!(tr.states[0], v(&[1.0]));
        assert_abs_diff_eq!(tr.outputs[50], 0.96f64.powi(-50), epsilon = 1e-12);
        assert_abs_diff_eq!(tr.outputs[50], 7.6990, epsilon = 1e-4);
        let one = DiscreteInput::single_channel(0.1, &[0.3]).unwrap();
        let tr = simulate_forward(&sys, &one, 1).unwrap();
        let geometric: f64 = (0..60).map(|i| 0.3f64.powi(i)).sum();
        assert_abs_diff_eq!(tr.outputs[1], geometric, epsilon = 1e-15);
        assert!(simulate_forward(&sys, &one, 2).is_err());
        let bad = DiscreteInput::single_channel(0.1, &[0.1, 1.0]).unwrap();
        assert!(matches!(simulate_forward(&sys, &bad, 2), Err(RealizationError::AtStep { step: 2, .. })));
    }

    #[test]
    fn backward_inverts_forward() {
        let rep = LinearRepresentation::from_row_major(
            3,
            &[
                vec![0.0, 0.2, 0.0, -0.1, 0.0, 0.3, 0.1, 0.0, 0.0],
                vec![0.5, -0.2, 0.1, 0.0, 0.4, 0.2, -0.3, 0.1, 0.6],
            ],
            &[1.0, 0.5, -0.2],
            &[0.3, -1.0, 2.0],
        )
        .unwrap();
        let sys = StateAffineSystem::new(rep);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let controls: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.gen_range(-0.05..0.05)]).collect();
        let d = DiscreteInput::from_controls(0.02, &controls).unwrap();
        let fwd = simulate_forward(&sys, &d, 40).unwrap();
        let back = simulate_backward(&sys, &d, 40, &fwd.states[40]).unwrap();
        for (a, b) in fwd.states.iter().zip(&back.states) {
            assert!((a - b).amax() <= 1e-10 * a.amax());
        }
        let z = v(&[0.4, -0.2, 1.0]);
        let s = backward_step(&sys, &z, &[0.0, 0.0]).unwrap();
        assert_eq!(s, z);
        let scalar = backward_step(&example4(), &v(&[2.0]), &[0.1, 0.25]).unwrap();
        assert_abs_diff_eq!(scalar[0], 1.5, epsilon = 1e-15);
    }

    #[test]
    fn forward_matches_truncated_series() {
        let sys = example4();
        let c = SeriesSpec::from_representation(sys.rep.clone());
        let d = DiscreteInput::constant(1, 50, 0.04, 0.04).unwrap();
        let tr = simulate_forward(&sys, &d, 50).unwrap();
        let y = dt_fliess_truncated(&c, &d, 50, 10, 1000).unwrap().value;
        assert_abs_diff_eq!(y, 7.6989, epsilon = 5e-5);
        assert!((tr.outputs[50] - y).abs() < 1e-3);
        let implicit = implicit_discretize_step(&sys, &v(&[1.0]), &[0.04, 0.04]).unwrap();
        assert_eq!(implicit, forward_step(&sys, &v(&[1.0]), &[0.04, 0.04]).unwrap());
    }

    #[test]
    fn rk4_reference() {
        let rep = LinearRepresentation::scalar(&[0.0, 1.0], 1.0, 1.0).unwrap();
        let u = ContinuousInput::constant(1.0, 2.0).unwrap();
        let y = ct_bilinear_simulate(&rep, &u, 2.0, 400).unwrap();
        assert_abs_diff_eq!(*y.values.last().unwrap(), 2f64.exp(), epsilon = 1e-9);
        let s = ContinuousInput::sinusoid(1.0, 10.0, 2.0).unwrap();
        let y = ct_bilinear_simulate(&rep, &s, 2.0, 2000).unwrap();
        assert_abs_diff_eq!(*y.values.last().unwrap(), ((1.0 - 20f64.cos()) / 10.0).exp(), epsilon = 1e-10);
        let zero = ContinuousInput::constant(0.0, 1.0).unwrap();
        let y = ct_bilinear_simulate(&rep, &zero, 1.0, 10).unwrap();
        assert!(y.values.iter().all(|&x| x == 1.0));
        let big = LinearRepresentation::scalar(&[0.0, 1e100], 1.0, 1.0).unwrap();
        let u = ContinuousInput::constant(1.0, 1.0).unwrap();
        assert!(matches!(ct_bilinear_simulate(&big, &u, 1.0, 2), Err(RealizationError::NonFinite { .. })));
    }

    #[test]
    fn implicit_steps_converge_to_exponential() {
        let sys = example4();
        let mut prev = f64::INFINITY;
        for l in [50, 100, 200, 400] {
            let delta = 1.0 / l as f64;
            let d = DiscreteInput::constant(1, l, delta, delta).unwrap();
            let y = simulate_forward(&sys, &d, l).unwrap().outputs[l];
            assert_abs_diff_eq!(y, (1.0 - delta).powi(-(l as i32)), epsilon = 1e-12);
            let err = y - 1f64.exp();
            assert!(err > 0.0 && err < prev);
            prev = err;
        }
    }

    #[test]
    fn one_step_identity() {
        let geometric = SeriesSpec::from_representation(example4().rep);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let controls: Vec<Vec<f64>> = (0..5).map(|_| vec![rng.gen_range(-0.2..0.2)]).collect();
        let d = DiscreteInput::from_controls(0.05, &controls).unwrap();
        assert!(one_step_identity_check(&geometric, &d, 3, 6, 1000).unwrap() < 1e-12);
        let zero_next = DiscreteInput::from_controls(0.05, &[vec![0.1], vec![0.0]]).unwrap();
        let c = SeriesSpec::from_polynomial(
            Alphabet::new(1),
            Polynomial::from_terms([(Word::empty(), 1.0), ("x1".parse().unwrap(), 2.0), ("x1x0".parse().unwrap(), -0.5)]),
        )
        .unwrap();
        assert!(one_step_identity_check(&c, &d, 2, 2, 100).unwrap() < 1e-15);
        let driven = SeriesSpec::from_polynomial(
            Alphabet::new(1),
            Polynomial::from_terms([(Word::empty(), 1.0), ("x1".parse().unwrap(), 2.0), ("x1x1".parse().unwrap(), 3.0)]),
        )
        .unwrap()
        .with_active_letters(&[1])
        .unwrap();
        assert_eq!(one_step_identity_check(&driven, &zero_next, 1, 3, 100).unwrap(), 0.0);
        assert!(one_step_identity_check(&c, &d, 5, 2, 100).is_err());
    }
}
