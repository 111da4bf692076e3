//! Deciding whether an endomorphism is an automorphism or a monomorphism.

use foxprim::error::Result;
use foxprim::maps::{fold, nielsen_reduce, Endomorphism};

fn main() -> Result<()> {
    for text in ["x1->ab; x2->b", "x1->aC; x2->cbC; x3->c", "x1->aa; x2->b", "x1->ab; x2->ba", "x1->abA; x2->bab"] {
        let phi = Endomorphism::parse(text)?;
        let (reduced, moves) = nielsen_reduce(phi.images());
        let names: Vec<String> = reduced.iter().map(|w| w.to_string()).collect();
        println!(
            "{phi}: automorphism {}, monomorphism {}, image rank {}, Nielsen-reduced {:?} after {} moves",
            phi.is_automorphism(),
            phi.is_monomorphism(),
            fold(phi.images()).rank(),
            names,
            moves.len()
        );
    }

    let f = Endomorphism::parse("x1->ab; x2->b")?;
    let g = Endomorphism::parse("x1->a; x2->ba")?;
    let fg = f.compose(&g)?;
    println!("{f} after {g} = {fg}");
    Ok(())
}
