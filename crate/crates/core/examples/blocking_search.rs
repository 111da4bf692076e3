//! Blocking verdicts for prefixes, then a small rank-3 search that writes a
//! checkpoint and resumes from it.

use foxprim::checkpoint::Checkpoint;
use foxprim::error::Result;
use foxprim::primitivity::{blocking_search, blocking_verdict, default_candidates, SearchParams, SearchReport};
use foxprim::words::{parse, Rank};

fn main() -> Result<()> {
    let r2 = Rank::new(2)?;
    for g in ["ab", "abAB", "aabb", "aabA"] {
        let o = blocking_verdict(&parse(g, r2)?, r2, 8)?;
        println!("{g}: {} ({} extensions tested)", o.verdict, o.nodes_explored);
    }

    let params = SearchParams { rank: Rank::new(3)?, cand_len: 4, max_len: 7 };
    let candidates = default_candidates(params.rank, params.cand_len);
    let path = std::env::temp_dir().join(format!("foxprim-example-{}.ck", std::process::id()));

    // Stop after the first batch to simulate an interruption.
    let mut saved = false;
    let _ = blocking_search(&params, &candidates, &[], 1, |done| {
        if saved {
            return Err(foxprim::error::Error::Precondition("interrupted".into()));
        }
        Checkpoint { params: params.clone(), completed: done.to_vec() }.save(&path)?;
        saved = true;
        Ok(())
    });

    let partial = Checkpoint::load_for(&path, &params)?;
    println!("checkpoint holds {} of {} candidates", partial.completed.len(), candidates.len());
    let results = blocking_search(&params, &candidates, &partial.completed, 1, |_| Ok(()))?;
    let report = SearchReport::assemble(&params, 1, results);
    println!("{} candidates, survivors {:?}", report.candidates, report.survivors);
    let _ = std::fs::remove_file(&path);
    Ok(())
}
