//! Exact evaluation of a rational series by the resolvent recursion, the
//! backward bilinear map, and the continuous RK4 reference.

use fliess::algebra::{LinearRepresentation, SeriesSpec};
use fliess::operators::dt_fliess_truncated;
use fliess::realization::{ct_bilinear_simulate, simulate_backward, simulate_forward, StateAffineSystem};
use fliess::signals::{discretize, ContinuousInput};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rep = LinearRepresentation::from_row_major(
        2,
        &[vec![-0.5, 0.0, 0.0, -0.2], vec![0.0, 1.0, -1.0, 0.0]],
        &[1.0, 0.0],
        &[1.0, 0.0],
    )?;
    let sys = StateAffineSystem::new(rep.clone());
    let c = SeriesSpec::from_representation(rep.clone());
    let u = ContinuousInput::sinusoid(0.8, 3.0, 1.0)?;

    let reference = ct_bilinear_simulate(&rep, &u, 1.0, 4000)?;
    println!("continuous y(1) = {:.8}", reference.values.last().unwrap());
    for l in [25, 50, 100, 200, 400] {
        let uhat = discretize(&u, l)?;
        let fwd = simulate_forward(&sys, &uhat, l)?;
        let trunc = dt_fliess_truncated(&c, &uhat, l, 8, 1_000_000)?;
        println!("L={l:<4} resolvent={:.8} truncated(J=8)={:.8}", fwd.outputs[l], trunc.value);
    }

    let uhat = discretize(&u, 100)?;
    let fwd = simulate_forward(&sys, &uhat, 100)?;
    let back = simulate_backward(&sys, &uhat, 100, &fwd.states[100])?;
    println!("backward run returns to γ: {:?}", back.states[0].as_slice());
    Ok(())
}
