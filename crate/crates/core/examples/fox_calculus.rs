//! Left and right Fox derivatives, the fundamental formula, Jacobians and
//! the double Jacobian of a commutator.

use foxprim::error::Result;
use foxprim::fox::{chain_rule_check, double_jacobian, jacobian, left_derivatives, linearized_matrix, right_derivatives};
use foxprim::groupring::{Ring, RingElement};
use foxprim::maps::Endomorphism;
use foxprim::words::{parse, Rank};

fn main() -> Result<()> {
    let rank = Rank::new(2)?;
    let u = parse("abAB", rank)?;
    let a = RingElement::from_word(u.clone());

    let left = left_derivatives(&a, rank)?;
    let right = right_derivatives(&a, rank)?;
    for i in 1..=2 {
        println!("d_{i}(u) = {}    d'_{i}(u) = {}", left.get(i), right.get(i));
    }

    // u - 1 = sum_i d_i(u) (x_i - 1)
    let mut sum = RingElement::zero();
    for i in 1..=2 {
        let xi = RingElement::word_minus_one(&parse(if i == 1 { "a" } else { "b" }, rank)?);
        sum = sum.ring_add(&left.get(i).ring_mul(&xi));
    }
    println!("fundamental formula holds: {}", sum == RingElement::word_minus_one(&u));

    let phi = Endomorphism::parse("x1->ab; x2->b")?;
    println!("Jacobian of {phi}:\n{}", jacobian(&phi));
    println!("chain rule on u: {}", chain_rule_check(&phi, &u));

    let d = double_jacobian(&u, rank)?;
    println!("double Jacobian of [x1,x2]:\n{d}");
    println!("abelianized determinant: {}", d.abelianize().det()?);
    println!("linearized matrix:\n{}", linearized_matrix(&u, rank)?);
    Ok(())
}
