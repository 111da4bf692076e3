//! Primitivity tests and the enumeration of primitive elements of F_2.

use std::collections::BTreeMap;

use foxprim::error::Result;
use foxprim::primitivity::{cmz_necessary_condition, enumerate_primitives_f2, is_primitive};
use foxprim::words::{parse, Rank};

fn main() -> Result<()> {
    let r2 = Rank::new(2)?;
    for w in ["aab", "aabab", "abAB", "aabb", "abaab"] {
        let word = parse(w, r2)?;
        println!("{w}: primitive {}, syllable condition {}", is_primitive(&word, r2)?, cmz_necessary_condition(&word, r2)?);
    }

    let r3 = Rank::new(3)?;
    for w in ["abcAB", "abcABC", "aabcc"] {
        println!("{w} in F_3: primitive {}", is_primitive(&parse(w, r3)?, r3)?);
    }

    let mut by_len = BTreeMap::new();
    for p in enumerate_primitives_f2(10) {
        *by_len.entry(p.len()).or_insert(0usize) += 1;
    }
    println!("cyclically reduced primitives of F_2 by length: {by_len:?}");
    Ok(())
}
