//! Delta-primitivity: the free metabelian decision in rank 2, the odd-rank
//! obstruction, and the linearized necessary condition.

use foxprim::delta::{delta_primitive_m2, delta_primitive_necessary, odd_rank_obstruction, weight2_matrix, CommutatorProductSpec};
use foxprim::error::Result;
use foxprim::words::{parse, Rank};

fn main() -> Result<()> {
    let r2 = Rank::new(2)?;
    for w in ["abAB", "baBA", "babABA", "abABabAB", "aabAAB", "ab"] {
        println!("{w}: {:?}", delta_primitive_m2(&parse(w, r2)?, r2)?);
    }

    let r3 = Rank::new(3)?;
    let spec = CommutatorProductSpec::new(r3, vec![1, -2, 1])?;
    println!("{} has weight-2 matrix\n{}", spec.word(), weight2_matrix(&spec));
    println!("odd-rank obstruction applies: {}", odd_rank_obstruction(&spec.word(), r3)?);

    let r4 = Rank::new(4)?;
    for w in ["abABcdCD", "abABcdCDbcBC", "abABacAC"] {
        println!("{w}: linearized condition {}", delta_primitive_necessary(&parse(w, r4)?, r4)?);
    }
    Ok(())
}
