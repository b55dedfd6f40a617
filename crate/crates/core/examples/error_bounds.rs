//! A-priori bounds for both growth classes, the two LC formulas, and the
//! convergence classification.

use fliess::algebra::GrowthClass;
use fliess::bounds::{
    classify_convergence, dt_tail_bound, gc_bounds, gc_simplified, lc_bounds, lc_simplified, BoundInputs, BoundMode,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lc = GrowthClass::locally_convergent(1.0, 1.0)?;
    let b = BoundInputs::new(lc, 0, 50, 10, 0.01, 0.5)?;
    for mode in [BoundMode::Statement, BoundMode::ExactSum] {
        let r = lc_bounds(&b, mode)?;
        println!("LC {mode:<10} ê={:.6} e={:.6e} ŝ={} s={}", r.e_hat, r.e_tail, r.s_hat, r.s);
    }
    println!("LC corollary  ê={:.6}", lc_simplified(&b)?);

    let gc = GrowthClass::globally_convergent(1.0, 1.0)?;
    for j in [5, 10, 20, 40] {
        let b = BoundInputs::new(gc, 0, 50, j, 0.04, 2.0)?;
        let r = gc_bounds(&b);
        println!(
            "GC J={j:<3} ê={:.6} e={:.4e} corollary={:.6} discrete tail={:.3e}",
            r.e_hat,
            r.e_tail,
            gc_simplified(&b),
            dt_tail_bound(&gc, 0, 0.04, 50, j)?
        );
    }
    for g in [lc, gc, GrowthClass::factorial_decay(1.0, 1.0)?] {
        let c = classify_convergence(&g, 0);
        println!("{:?}: F_c {}, F̂_c {} {:?}", g.kind, c.continuous, c.discrete, c.discrete_radius);
    }
    Ok(())
}
