//! Free reduction, the two input syntaxes, cyclic reduction and enumeration.

use foxprim::error::Result;
use foxprim::words::{enumerate_reduced, parse, parse_unranked, reduced_count, Rank};

fn main() -> Result<()> {
    let rank = Rank::new(3)?;

    let w = parse("aBbAcab", rank)?;
    println!("aBbAcab reduces to {w}");

    let verbose = parse_unranked("x1*x2^-1*x3^2")?;
    println!("x1*x2^-1*x3^2 = {} (verbose {})", verbose.to_compact(), verbose.to_verbose());

    let c = parse("bcaB", rank)?;
    let cr = c.cyclic_reduce();
    println!("{c} = {} {} {}^-1", cr.conjugator, cr.core, cr.conjugator);

    let x = parse("ab", rank)?;
    let y = parse("c", rank)?;
    println!("[ab, c] = {}", x.commutator(&y));

    for k in 0..=4 {
        let listed = enumerate_reduced(rank, k).filter(|w| w.len() == k).count();
        println!("reduced words of length {k}: {listed} (closed form {})", reduced_count(rank, k));
    }
    Ok(())
}
