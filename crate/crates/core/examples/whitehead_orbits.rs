//! Whitehead minimization, orbit equivalence with replayable certificates,
//! and the orbit-preservation witness search.

use foxprim::error::Result;
use foxprim::maps::{min_generator_support, orbit_violation_witness, same_orbit, whitehead_minimize, Endomorphism, OrbitOutcome, DEFAULT_BUDGET};
use foxprim::words::{parse, Rank};

fn main() -> Result<()> {
    let r4 = Rank::new(4)?;
    let u = parse("abABcdCD", r4)?;
    let v = parse("abABbcBCcdCD", r4)?;

    let (min, cert) = whitehead_minimize(&v, r4)?;
    println!("{v} minimizes to {min} in {} steps (certificate ok: {})", cert.steps.len(), cert.verify());

    match same_orbit(&u, &v, r4, DEFAULT_BUDGET)? {
        OrbitOutcome::Same(c) => {
            println!("{u} ~ {v}: certificate with {} steps, replay ok: {}", c.steps.len(), c.verify());
            println!("as a single automorphism: {}", c.to_automorphism());
        }
        other => println!("unexpected: {other:?}"),
    }

    let r2 = Rank::new(2)?;
    let outcome = same_orbit(&parse("abAB", r2)?, &parse("aabb", r2)?, r2, DEFAULT_BUDGET)?;
    println!("[a,b] vs a^2 b^2: {outcome:?}");

    let s = min_generator_support(&parse("abAcBC", Rank::new(3)?)?, Rank::new(3)?, DEFAULT_BUDGET)?;
    println!("abAcBC needs at least {} generators (exact: {}, witness {})", s.support, s.exact, s.witness);

    let square = Endomorphism::parse("x1->aa; x2->b")?;
    let w = orbit_violation_witness(&square, &parse("a", r2)?, 4, DEFAULT_BUDGET)?;
    println!("{square} moves the orbit of a outside itself, witness {w:?}");
    Ok(())
}
