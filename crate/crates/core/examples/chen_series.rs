//! Truncated Chen series and the catenation identity P[u # v] = P[v] · P[u].

use fliess::operators::{chen_truncation, ChenTruncation, QuadratureControl};
use fliess::signals::{catenate, ContinuousInput};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ctl = QuadratureControl::default();
    let u = ContinuousInput::constant(0.7, 0.4)?;
    let v = ContinuousInput::constant(-1.3, 0.6)?;
    let uv = catenate(&u, &v, 0.4)?;

    let pu = chen_truncation(&u, 0.4, 3, &ctl, 1000)?;
    let pv = chen_truncation(&v, 0.6, 3, &ctl, 1000)?;
    let puv = chen_truncation(&uv, 1.0, 3, &ctl, 1000)?;
    let product = ChenTruncation::product(&pv, &pu);

    let mut worst = 0.0f64;
    for (w, c) in puv.coefficients.iter() {
        let gap = (c - product.coefficients.coefficient(w)).abs();
        worst = worst.max(gap);
        println!("{w:>10}  {c:+.10}  {:+.10}", product.coefficients.coefficient(w));
    }
    println!("largest coefficient gap: {worst:.2e}");
    Ok(())
}
