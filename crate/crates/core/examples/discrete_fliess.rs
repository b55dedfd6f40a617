//! Truncated discrete-time Fliess operator against the exact output for
//! the factorial series c = Σ k! x1^k, whose output is y = 1/(1 - ∫u).

use fliess::harness::{builtin_series, Builtin};
use fliess::operators::dt_fliess_trajectory;
use fliess::signals::{discretize, ContinuousInput};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = builtin_series(Builtin::LcFactorial);
    let t = 0.5;
    let u = ContinuousInput::constant(1.0, t)?;
    for (l, j) in [(50, 10), (50, 20), (100, 10), (400, 10)] {
        let uhat = discretize(&u, l)?;
        let y_hat = dt_fliess_trajectory(&c, &uhat, j, 1_000_000)?;
        let y = 1.0 / (1.0 - t);
        println!("L={l:<4} J={j:<3} y_hat={:.6} y={y:.6} gap={:.6}", y_hat[l], y_hat[l] - y);
    }
    Ok(())
}
