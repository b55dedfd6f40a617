//! First-order convergence of an iterated sum to its integral, next to the
//! asymptotic single-integral bound.

use fliess::bounds::single_integral_error_bound;
use fliess::operators::{iterated_integral, iterated_sum, QuadratureControl};
use fliess::signals::{discretize, ContinuousInput};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let t = 0.5;
    let u = ContinuousInput::sinusoid(1.0, 20.0, t)?;
    for word in ["x1x0", "x1x1", "x0x1x1"] {
        let eta: fliess::algebra::Word = word.parse()?;
        let e = iterated_integral(&eta, &u, t, &QuadratureControl::default())?;
        let mut prev: Option<f64> = None;
        for l in [64, 128, 256, 512] {
            let uhat = discretize(&u, l)?;
            let err = (iterated_sum(&eta, &uhat, l)? - e).abs();
            let bound = single_integral_error_bound(eta.len(), t, l, 1.0)?;
            let ratio = prev.map(|p| format!("{:.3}", p / err)).unwrap_or_default();
            println!("{word:<7} L={l:<4} |S-E|={err:.3e} bound={bound:.3e} ratio={ratio}");
            prev = Some(err);
        }
    }
    Ok(())
}
