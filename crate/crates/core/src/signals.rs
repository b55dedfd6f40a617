//! Continuous-time inputs, their increment sequences and norms.
//!
//! Channel `0` is the drift channel and is identically one; a
//! [`ContinuousInput`] stores only the controlled channels `1..=m`.

use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignalError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature did not reach {tol:e} on [{a}, {b}]")]
    QuadratureFailure { a: f64, b: f64, tol: f64 },
    #[error("cannot read sampled channel: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, SignalError>;

/// Absolute tolerance for quadrature of channels without a closed-form antiderivative.
pub const INCREMENT_TOL: f64 = 1e-12;
const SIMPSON_MAX_DEPTH: usize = 48;

/// One controlled input channel on `[0, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Channel {
    Constant {
        value: f64,
    },
    /// `amplitude · sin(omega · t + phase)`
    Sinusoid {
        amplitude: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `values[0]` on `[0, breaks[0])`, `values[k]` on `[breaks[k-1], breaks[k])`,
    /// the last value from the last break on.
    PiecewiseConstant { breaks: Vec<f64>, values: Vec<f64> },
    /// Linear interpolation through `(times[k], values[k])`, held constant
    /// outside the sampled range.
    Sampled { times: Vec<f64>, values: Vec<f64> },
    /// `head` on `[0, tau]`, then `tail(t - tau)`.
    Catenated { head: Box<Channel>, tail: Box<Channel>, tau: f64 },
}

impl Channel {
    pub fn constant(value: f64) -> Self {
        Channel::Constant { value }
    }

    pub fn sinusoid(amplitude: f64, omega: f64, phase: f64) -> Self {
        Channel::Sinusoid { amplitude, omega, phase }
    }

    pub fn piecewise_constant(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let ch = Channel::PiecewiseConstant { breaks, values };
        ch.validate()?;
        Ok(ch)
    }

    pub fn sampled(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let ch = Channel::Sampled { times, values };
        ch.validate()?;
        Ok(ch)
    }

    /// Reads a two-column `time, value` table. Columns may be separated by a
    /// comma, semicolon, tab or spaces; blank lines and `#` comments are skipped.
    pub fn from_delimited<R: BufRead>(reader: R) -> Result<Self> {
        let mut times = Vec::new();
        let mut values = Vec::new();
        let mut header_seen = false;
        for (n, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| SignalError::Io(e.to_string()))?;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line
                .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| SignalError::Io(format!("line {}: cannot parse {s:?}", n + 1)))
            };
            // a header row is allowed before any data
            if times.is_empty() && !header_seen && cols.iter().any(|c| c.parse::<f64>().is_err()) {
                header_seen = true;
                continue;
            }
            match cols.as_slice() {
                [t, v] => {
                    times.push(parse(t)?);
                    values.push(parse(v)?);
                }
                _ => return Err(SignalError::Io(format!("line {}: expected two columns", n + 1))),
            }
        }
        Self::sampled(times, values)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| SignalError::Io(format!("{}: {e}", path.display())))?;
        Self::from_delimited(std::io::BufReader::new(file))
    }

    fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            Channel::Constant { value } if !value.is_finite() => {
                Err(SignalError::Domain("non-finite constant".into()))
            }
            Channel::Sinusoid { amplitude, omega, phase }
                if !(amplitude.is_finite() && omega.is_finite() && phase.is_finite()) =>
            {
                Err(SignalError::Domain("non-finite sinusoid parameter".into()))
            }
            Channel::PiecewiseConstant { breaks, values } => {
                if values.len() != breaks.len() + 1 {
                    return Err(SignalError::Domain(format!(
                        "piecewise constant needs {} values for {} breaks, got {}",
                        breaks.len() + 1,
                        breaks.len(),
                        values.len()
                    )));
                }
                if !finite(breaks) || !finite(values) || breaks.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(SignalError::Domain("breaks must be finite and increasing".into()));
                }
                if breaks.first().is_some_and(|&b| b <= 0.0) {
                    return Err(SignalError::Domain("breaks must be positive".into()));
                }
                Ok(())
            }
            Channel::Sampled { times, values } => {
                if times.len() != values.len() || times.is_empty() {
                    return Err(SignalError::Domain("sampled channel needs equal, non-empty columns".into()));
                }
                if !finite(times) || !finite(values) || times.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(SignalError::Domain("sample times must be finite and increasing".into()));
                }
                Ok(())
            }
            Channel::Catenated { head, tail, tau } => {
                if !(tau.is_finite() && *tau >= 0.0) {
                    return Err(SignalError::Domain(format!("catenation time {tau} is invalid")));
                }
                head.validate()?;
                tail.validate()
            }
            _ => Ok(()),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Channel::Constant { value } => *value,
            Channel::Sinusoid { amplitude, omega, phase } => amplitude * (omega * t + phase).sin(),
            Channel::PiecewiseConstant { breaks, values } => {
                values[breaks.partition_point(|&b| b <= t)]
            }
            Channel::Sampled { times, values } => {
                let k = times.partition_point(|&s| s <= t);
                if k == 0 {
                    values[0]
                } else if k == times.len() {
                    values[k - 1]
                } else {
                    let w = (t - times[k - 1]) / (times[k] - times[k - 1]);
                    values[k - 1] + w * (values[k] - values[k - 1])
                }
            }
            Channel::Catenated { head, tail, tau } => {
                if t <= *tau {
                    head.value(t)
                } else {
                    tail.value(t - tau)
                }
            }
        }
    }

    /// Points in `(a, b)` where the channel is discontinuous or has a kink.
    pub fn breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        let inside = |v: &[f64]| v.iter().copied().filter(|&t| t > a && t < b).collect::<Vec<_>>();
        match self {
            Channel::Constant { .. } | Channel::Sinusoid { .. } => Vec::new(),
            Channel::PiecewiseConstant { breaks, .. } => inside(breaks),
            Channel::Sampled { times, .. } => inside(times),
            Channel::Catenated { head, tail, tau } => {
                let mut out = head.breakpoints(a, b.min(*tau));
                if *tau > a && *tau < b {
                    out.push(*tau);
                }
                out.extend(tail.breakpoints((a - tau).max(0.0), b - tau).into_iter().map(|t| t + tau));
                out.retain(|&t| t > a && t < b);
                out
            }
        }
    }

    /// Closed-form `∫_a^b`, when the channel has one.
    fn exact_integral(&self, a: f64, b: f64) -> Option<f64> {
        match self {
            Channel::Constant { value } => Some(value * (b - a)),
            Channel::Sinusoid { amplitude, omega, phase } => {
                if *omega == 0.0 {
                    Some(amplitude * phase.sin() * (b - a))
                } else {
                    Some(amplitude * ((omega * a + phase).cos() - (omega * b + phase).cos()) / omega)
                }
            }
            Channel::PiecewiseConstant { breaks, values } => {
                let mut total = 0.0;
                let mut lo = a;
                let mut k = breaks.partition_point(|&t| t <= a);
                while lo < b {
                    let hi = breaks.get(k).copied().unwrap_or(f64::INFINITY).min(b);
                    total += values[k] * (hi - lo);
                    lo = hi;
                    k += 1;
                }
                Some(total)
            }
            _ => None,
        }
    }

    /// `∫_a^b`, exact for analytic channels, adaptive Simpson otherwise.
    pub fn integral(&self, a: f64, b: f64) -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        if let Some(v) = self.exact_integral(a, b) {
            return Ok(v);
        }
        match self {
            Channel::Catenated { head, tail, tau } => {
                let mut total = 0.0;
                if a < *tau {
                    total += head.integral(a, b.min(*tau))?;
                }
                if b > *tau {
                    total += tail.integral((a - tau).max(0.0), b - tau)?;
                }
                Ok(total)
            }
            _ => {
                // split at knots so each piece is smooth
                let mut cuts = vec![a];
                cuts.extend(self.breakpoints(a, b));
                cuts.push(b);
                let mut total = 0.0;
                for w in cuts.windows(2) {
                    total += adaptive_simpson(&|t| self.value(t), w[0], w[1], INCREMENT_TOL)?;
                }
                Ok(total)
            }
        }
    }

    /// `∫_a^b |u(t)| dt`, exact on every channel kind.
    pub fn abs_integral(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        match self {
            Channel::Constant { value } => value.abs() * (b - a),
            Channel::Sinusoid { amplitude, omega, phase } => {
                if *omega == 0.0 {
                    return (amplitude * phase.sin()).abs() * (b - a);
                }
                // split at zeros of the phase angle, theta = k pi
                let (w, p) = if *omega < 0.0 { (-omega, -phase) } else { (*omega, *phase) };
                let (ta, tb) = (w * a + p, w * b + p);
                let pi = std::f64::consts::PI;
                let mut angles = vec![ta];
                let mut k = (ta / pi).floor() + 1.0;
                while k * pi < tb {
                    angles.push(k * pi);
                    k += 1.0;
                }
                angles.push(tb);
                let sum: f64 = angles.windows(2).map(|t| (t[0].cos() - t[1].cos()).abs()).sum();
                amplitude.abs() * sum / w
            }
            Channel::PiecewiseConstant { breaks, values } => {
                let abs = Channel::PiecewiseConstant {
                    breaks: breaks.clone(),
                    values: values.iter().map(|v| v.abs()).collect(),
                };
                abs.exact_integral(a, b).unwrap_or(0.0)
            }
            Channel::Sampled { .. } => {
                let mut cuts = vec![a];
                cuts.extend(self.breakpoints(a, b));
                cuts.push(b);
                cuts.windows(2)
                    .map(|w| {
                        let (t0, t1) = (w[0], w[1]);
                        let (v0, v1) = (self.value(t0), self.value(t1));
                        let h = t1 - t0;
                        if v0 * v1 >= 0.0 {
                            0.5 * h * (v0.abs() + v1.abs())
                        } else {
                            // linear piece crossing zero
                            0.5 * h * (v0 * v0 + v1 * v1) / (v0.abs() + v1.abs())
                        }
                    })
                    .sum()
            }
            Channel::Catenated { head, tail, tau } => {
                let mut total = 0.0;
                if a < *tau {
                    total += head.abs_integral(a, b.min(*tau));
                }
                if b > *tau {
                    total += tail.abs_integral((a - tau).max(0.0), b - tau);
                }
                total
            }
        }
    }
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> Option<f64> {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Some(left + right + delta / 15.0);
        }
        if depth == 0 {
            return None;
        }
        Some(
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
                + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?,
        )
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, SIMPSON_MAX_DEPTH)
        .ok_or(SignalError::QuadratureFailure { a, b, tol })
}

/// An input on `[0, T]` with `m` controlled channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousInput {
    channels: Vec<Channel>,
    horizon: f64,
}

impl ContinuousInput {
    pub fn new(channels: Vec<Channel>, horizon: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(SignalError::Domain(format!("horizon must be positive, got {horizon}")));
        }
        for ch in &channels {
            ch.validate()?;
        }
        Ok(Self { channels, horizon })
    }

    /// The zero-duration input, identity for catenation.
    pub fn identity(m: usize) -> Self {
        Self { channels: vec![Channel::constant(0.0); m], horizon: 0.0 }
    }

    /// Single controlled channel `u1 = value`.
    pub fn constant(value: f64, horizon: f64) -> Result<Self> {
        Self::new(vec![Channel::constant(value)], horizon)
    }

    /// Single controlled channel `u1 = amplitude · sin(omega t)`.
    pub fn sinusoid(amplitude: f64, omega: f64, horizon: f64) -> Result<Self> {
        Self::new(vec![Channel::sinusoid(amplitude, omega, 0.0)], horizon)
    }

    pub fn m(&self) -> usize {
        self.channels.len()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    /// `u_i(t)`; channel `0` is identically one.
    pub fn value(&self, channel: usize, t: f64) -> f64 {
        if channel == 0 {
            1.0
        } else {
            self.channels[channel - 1].value(t)
        }
    }

    /// `∫_a^b u_i`.
    pub fn integral(&self, channel: usize, a: f64, b: f64) -> Result<f64> {
        if channel == 0 {
            Ok((b - a).max(0.0))
        } else {
            self.channels[channel - 1].integral(a, b)
        }
    }

    /// Sorted, de-duplicated discontinuities and kinks of any channel in `(a, b)`.
    pub fn breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        let mut all: Vec<f64> = self.channels.iter().flat_map(|c| c.breakpoints(a, b)).collect();
        all.sort_by(f64::total_cmp);
        all.dedup();
        all
    }

    /// Same channels on a different horizon.
    pub fn with_horizon(&self, horizon: f64) -> Result<Self> {
        Self::new(self.channels.clone(), horizon)
    }
}

/// How increments `û_i(N)` are computed from a continuous input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IncrementRule {
    /// `û_i(N) = ∫_{(N-1)Δ}^{NΔ} u_i`, closed form where available.
    #[default]
    Exact,
    /// `û_i(N) = Δ (u_i((N-1)Δ) + u_i(NΔ)) / 2`, the grid trapezoid rule.
    /// Used to regenerate published reference tables computed this way.
    GridTrapezoid,
}

/// Increments `û(N) ∈ R^{m+1}`, `N = 1..=L`, with `û_0(N) = Δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteInput {
    m: usize,
    delta: f64,
    // row-major, stride m + 1
    data: Vec<f64>,
}

impl DiscreteInput {
    /// `controls[N-1]` holds `û_1(N) .. û_m(N)`; the drift increment is set to `delta`.
    pub fn from_controls(delta: f64, controls: &[Vec<f64>]) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(SignalError::Domain(format!("step must be positive, got {delta}")));
        }
        let m = controls.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(controls.len() * (m + 1));
        for row in controls {
            if row.len() != m {
                return Err(SignalError::Domain("every step needs the same channel count".into()));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(SignalError::Domain("non-finite increment".into()));
            }
            data.push(delta);
            data.extend_from_slice(row);
        }
        Ok(Self { m, delta, data })
    }

    /// `L` steps where every controlled increment equals `value`.
    pub fn constant(m: usize, steps: usize, delta: f64, value: f64) -> Result<Self> {
        Self::from_controls(delta, &vec![vec![value; m]; steps])
    }

    /// Same as [`from_controls`](Self::from_controls) for a single controlled channel.
    pub fn single_channel(delta: f64, increments: &[f64]) -> Result<Self> {
        let rows: Vec<Vec<f64>> = increments.iter().map(|&v| vec![v]).collect();
        let mut d = Self::from_controls(delta, &rows)?;
        d.m = 1;
        Ok(d)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn steps(&self) -> usize {
        self.data.len() / (self.m + 1)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn horizon(&self) -> f64 {
        self.delta * self.steps() as f64
    }

    /// `û(N)` for `1 ≤ N ≤ L`, all channels `0..=m`.
    pub fn step(&self, n: usize) -> &[f64] {
        let w = self.m + 1;
        &self.data[(n - 1) * w..n * w]
    }

    /// `û_i(N)`.
    pub fn get(&self, n: usize, channel: usize) -> f64 {
        self.step(n)[channel]
    }

    /// `Σ_N û_i(N)`.
    pub fn channel_sum(&self, channel: usize) -> f64 {
        (1..=self.steps()).map(|n| self.get(n, channel)).sum()
    }

    /// First `steps` increments.
    pub fn prefix(&self, steps: usize) -> DiscreteInput {
        let w = self.m + 1;
        DiscreteInput { m: self.m, delta: self.delta, data: self.data[..steps.min(self.steps()) * w].to_vec() }
    }

    /// `‖û‖_∞` restricted to the listed channels.
    pub fn sup_norm_over(&self, channels: &[usize]) -> f64 {
        (1..=self.steps())
            .flat_map(|n| channels.iter().map(move |&i| self.get(n, i).abs()))
            .fold(0.0, f64::max)
    }
}

/// Increments of `u` on `L` equal steps over `[0, T]`, exact integrals.
pub fn discretize(u: &ContinuousInput, steps: usize) -> Result<DiscreteInput> {
    discretize_with(u, steps, IncrementRule::Exact)
}

pub fn discretize_with(u: &ContinuousInput, steps: usize, rule: IncrementRule) -> Result<DiscreteInput> {
    if steps == 0 {
        return Err(SignalError::Domain("need at least one step".into()));
    }
    if u.horizon() <= 0.0 {
        return Err(SignalError::Domain("cannot discretize a zero-duration input".into()));
    }
    let delta = u.horizon() / steps as f64;
    let grid = |n: usize| if n == steps { u.horizon() } else { n as f64 * delta };
    let mut rows = Vec::with_capacity(steps);
    for n in 1..=steps {
        let (a, b) = (grid(n - 1), grid(n));
        let row = (1..=u.m())
            .map(|i| match rule {
                IncrementRule::Exact => u.integral(i, a, b),
                IncrementRule::GridTrapezoid => Ok(0.5 * delta * (u.value(i, a) + u.value(i, b))),
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let mut d = DiscreteInput::from_controls(delta, &rows)?;
    d.m = u.m();
    Ok(d)
}

/// `u` on `[0, tau]` followed by `v` shifted to start at `tau`.
pub fn catenate(u: &ContinuousInput, v: &ContinuousInput, tau: f64) -> Result<ContinuousInput> {
    if !(0.0..=u.horizon()).contains(&tau) {
        return Err(SignalError::Domain(format!(
            "catenation time {tau} outside [0, {}]",
            u.horizon()
        )));
    }
    if u.m() != v.m() {
        return Err(SignalError::Domain(format!("channel counts differ: {} vs {}", u.m(), v.m())));
    }
    let channels = u
        .channels
        .iter()
        .zip(&v.channels)
        .map(|(h, t)| Channel::Catenated { head: Box::new(h.clone()), tail: Box::new(t.clone()), tau })
        .collect();
    Ok(ContinuousInput { channels, horizon: tau + v.horizon() })
}

/// `max_i ‖u_i‖_1` over the controlled channels on `[0, T]`.
pub fn l1_norm(u: &ContinuousInput) -> f64 {
    u.channels.iter().map(|c| c.abs_integral(0.0, u.horizon())).fold(0.0, f64::max)
}

/// L1 norm of each channel `0..=m` on `[0, T]`, drift channel included.
pub fn channel_l1_norms(u: &ContinuousInput) -> Vec<f64> {
    std::iter::once(u.horizon())
        .chain(u.channels.iter().map(|c| c.abs_integral(0.0, u.horizon())))
        .collect()
}

/// `‖û‖_∞ = max_{N, i} |û_i(N)|` over all channels `0..=m`.
pub fn sup_increment_norm(uhat: &DiscreteInput) -> f64 {
    uhat.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}
