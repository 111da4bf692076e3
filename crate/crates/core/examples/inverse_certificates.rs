//! Inverse certificates over ZF_n: the rank-2 certificate for [x1,x2], its
//! block extension to [x1,x2][x3,x4], and the JSON form accepted by
//! `foxprim delta certify --inverse`.

use foxprim::delta::{commutator_inverse, generation_matrix, solve_inverse, symplectic_inverse, verify_inverse_certificate, CommutatorProductSpec};
use foxprim::error::Result;
use foxprim::words::{parse, Rank};

fn main() -> Result<()> {
    let r2 = Rank::new(2)?;
    let u = parse("abAB", r2)?;
    let g = generation_matrix(&u, r2)?;
    println!("generation matrix of {u}:\n{g}");

    let found = solve_inverse(&g, r2, 2)?;
    println!("search over words of length <= 2: {found:?}");

    let m2 = commutator_inverse();
    println!("stored inverse verifies: {}", verify_inverse_certificate(&u, &m2, r2)?);
    println!("{}", serde_json::to_string(&m2.to_json())?);

    let r4 = Rank::new(4)?;
    let u4 = CommutatorProductSpec::symplectic(r4).word();
    let m4 = symplectic_inverse(r4, &m2)?;
    println!("{u4}: block inverse verifies: {}", verify_inverse_certificate(&u4, &m4, r4)?);
    println!("{}", serde_json::to_string(&m4.to_json())?);
    Ok(())
}
