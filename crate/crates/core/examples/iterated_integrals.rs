//! One word, three ways: quadrature of the nested integral, the exact
//! piecewise-constant integral, and the iterated sum.

use fliess::operators::{iterated_integral, iterated_integral_pc, iterated_sum, iterated_sum_partition, QuadratureControl};
use fliess::signals::{discretize, ContinuousInput};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let u = ContinuousInput::sinusoid(1.0, 20.0, 0.5)?;
    let eta = "x1x0x1".parse()?;
    let exact = iterated_integral(&eta, &u, 0.5, &QuadratureControl::default())?;
    println!("E_{eta}[sin 20t](0.5) = {exact:.12}");
    println!("{:>6} {:>16} {:>16} {:>12}", "L", "S_eta", "pc integral", "|S - E|");
    for l in [16, 32, 64, 128, 256] {
        let uhat = discretize(&u, l)?;
        let s = iterated_sum(&eta, &uhat, l)?;
        let pc = iterated_integral_pc(&eta, &uhat)?;
        println!("{l:>6} {s:>16.12} {pc:>16.12} {:>12.3e}", (s - exact).abs());
    }
    // the sum over all partitions of η into step blocks gives the same S_η
    let uhat = discretize(&u, 8)?;
    println!(
        "partition form at L=8: {:.15} vs recursion {:.15}",
        iterated_sum_partition(&eta, &uhat, 8, 10_000)?,
        iterated_sum(&eta, &uhat, 8)?
    );
    Ok(())
}
