//! Words, polynomials, shuffle products and left shifts.

use fliess::algebra::{left_shift, shuffle, Alphabet, LinearRepresentation, Polynomial, SeriesSpec, Word};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a: Word = "x1x0".parse()?;
    let b: Word = "x1".parse()?;
    println!("{a} ⧢ {b} = {}", fmt_poly(&shuffle(&a, &b)));

    // x1^{⧢3} = 3! x1^3
    let x1 = Polynomial::monomial(b.clone(), 1.0);
    let cube = x1.shuffle(&x1).shuffle(&x1);
    println!("x1 ⧢ x1 ⧢ x1 = {}", fmt_poly(&cube));

    let p = Polynomial::from_terms([(Word::empty(), 1.0), (a.clone(), 2.0)]);
    let q = Polynomial::from_terms([(b.clone(), -1.0), ("x0".parse()?, 0.5)]);
    println!("({}) · ({}) = {}", fmt_poly(&p), fmt_poly(&q), fmt_poly(&p.concat_product(&q, None)));

    // x1^{-1}(c) for a rational series: (x1^{-1}c, η) = (c, x1 η)
    let rep = LinearRepresentation::from_row_major(
        2,
        &[vec![0.0, 1.0, -1.0, 0.0], vec![0.5, 0.0, 0.2, 0.3]],
        &[1.0, 0.0],
        &[0.0, 1.0],
    )?;
    let c = SeriesSpec::from_representation(rep);
    let shifted = left_shift(&b, &c)?;
    for w in fliess::algebra::enumerate_words(Alphabet::new(1), 2, 100)? {
        println!(
            "(x1^-1 c, {w}) = {:+.4}   (c, x1{w}) = {:+.4}",
            shifted.coefficient(&w)?,
            c.coefficient(&w.prepend(1))?
        );
    }
    Ok(())
}

fn fmt_poly(p: &Polynomial) -> String {
    p.iter().map(|(w, c)| format!("{c}·{w}")).collect::<Vec<_>>().join(" + ")
}
