//! Group-ring and Laurent arithmetic, and exact determinants.

use foxprim::error::Result;
use foxprim::groupring::{LaurentElement, Matrix, Ring, RingElement};
use foxprim::words::Rank;

fn main() -> Result<()> {
    let rank = Rank::new(2)?;
    let p = RingElement::parse("1 - a + 2ab", rank)?;
    let q = RingElement::parse("b - B", rank)?;
    println!("({p}) * ({q}) = {}", p.ring_mul(&q));
    println!("augmentation of {p}: {}", p.augmentation());
    println!("abelianized: {}", p.abelianize());

    // (1 - x1) divides 1 - x1^3 exactly in Z[A].
    let num = LaurentElement::constant(1).ring_sub(&LaurentElement::var_pow(1, 3));
    let den = LaurentElement::constant(1).ring_sub(&LaurentElement::var(1));
    println!("({num}) / ({den}) = {:?}", num.divide_exact(&den)?.map(|x| x.to_string()));

    let m = Matrix::from_rows(vec![
        vec![LaurentElement::var(1), LaurentElement::constant(1)],
        vec![LaurentElement::constant(1), LaurentElement::var(2)],
    ])?;
    println!("det [[x1, 1], [1, x2]] = {}", m.det()?);
    Ok(())
}
