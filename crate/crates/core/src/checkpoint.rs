//! Binary checkpoints for the blocking search.
//!
//! Layout (little endian):
//!
//! ```text
//! magic "FXCK" | version u8 | rank u16 | cand_len u32 | max_len u32 | count u32
//! count x (len u32 | record bytes)
//! sha256 of everything above (32 bytes)
//! ```
//!
//! A record is: candidate word, verdict tag u8, witness word (tag 0 only),
//! nodes u64. Words are a u16 length followed by u16 letter codes.

use std::fs;
use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::primitivity::{CandidateResult, SearchParams};
use crate::words::{parse_unranked, Letter, Rank, Word};

const MAGIC: &[u8; 4] = b"FXCK";
const VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Checkpoint {
    pub params: SearchParams,
    pub completed: Vec<CandidateResult>,
}

fn put_word(out: &mut Vec<u8>, w: &Word) {
    out.extend_from_slice(&(w.len() as u16).to_le_bytes());
    for l in w.letters() {
        out.extend_from_slice(&(l.code() as u16).to_le_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| Error::Checkpoint("truncated body".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn word(&mut self, rank: Rank) -> Result<Word> {
        let n = self.u16()? as usize;
        let mut letters = Vec::with_capacity(n);
        for _ in 0..n {
            let code = self.u16()? as usize;
            if code >= 2 * rank.get() {
                return Err(Error::Checkpoint(format!("letter code {code} out of range")));
            }
            letters.push(Letter::from_code(code));
        }
        let w = Word::from_letters(letters.iter().copied());
        if w.len() != letters.len() {
            return Err(Error::Checkpoint("stored word is not reduced".into()));
        }
        Ok(w)
    }
}

fn encode_record(r: &CandidateResult) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    put_word(&mut out, &parse_unranked(&r.candidate)?);
    match (r.verdict.as_str(), &r.witness) {
        ("extendable", Some(wit)) => {
            out.push(0);
            put_word(&mut out, &parse_unranked(wit)?);
        }
        ("blocked_up_to", None) => out.push(1),
        ("blocked_proven", None) => out.push(2),
        (v, _) => return Err(Error::Checkpoint(format!("cannot encode verdict '{v}'"))),
    }
    out.extend_from_slice(&r.nodes_explored.to_le_bytes());
    Ok(out)
}

impl Checkpoint {
    pub fn encode(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.extend_from_slice(&(self.params.rank.get() as u16).to_le_bytes());
        out.extend_from_slice(&(self.params.cand_len as u32).to_le_bytes());
        out.extend_from_slice(&(self.params.max_len as u32).to_le_bytes());
        out.extend_from_slice(&(self.completed.len() as u32).to_le_bytes());
        for r in &self.completed {
            let rec = encode_record(r)?;
            out.extend_from_slice(&(rec.len() as u32).to_le_bytes());
            out.extend_from_slice(&rec);
        }
        let digest = Sha256::digest(&out);
        out.extend_from_slice(&digest);
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 32 {
            return Err(Error::Checkpoint("file too short".into()));
        }
        let (body, hash) = bytes.split_at(bytes.len() - 32);
        if Sha256::digest(body).as_slice() != hash {
            return Err(Error::Checkpoint("content hash mismatch".into()));
        }
        let mut rd = Reader { buf: body, pos: 0 };
        if rd.take(4)? != MAGIC {
            return Err(Error::Checkpoint("bad magic".into()));
        }
        let version = rd.u8()?;
        if version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        let rank = Rank::new(rd.u16()? as usize).map_err(|e| Error::Checkpoint(e.to_string()))?;
        let cand_len = rd.u32()? as usize;
        let max_len = rd.u32()? as usize;
        let count = rd.u32()? as usize;
        let mut completed = Vec::with_capacity(count.min(1 << 20));
        for _ in 0..count {
            let len = rd.u32()? as usize;
            let rec = rd.take(len)?;
            let mut r = Reader { buf: rec, pos: 0 };
            let candidate = r.word(rank)?;
            let (verdict, witness) = match r.u8()? {
                0 => ("extendable", Some(r.word(rank)?.to_string())),
                1 => ("blocked_up_to", None),
                2 => ("blocked_proven", None),
                t => return Err(Error::Checkpoint(format!("unknown verdict tag {t}"))),
            };
            let nodes_explored = r.u64()?;
            if r.pos != rec.len() {
                return Err(Error::Checkpoint("trailing bytes in record".into()));
            }
            completed.push(CandidateResult {
                candidate: candidate.to_string(),
                verdict: verdict.to_string(),
                witness,
                bound: max_len,
                nodes_explored,
            });
        }
        if rd.pos != body.len() {
            return Err(Error::Checkpoint("trailing bytes after records".into()));
        }
        Ok(Checkpoint { params: SearchParams { rank, cand_len, max_len }, completed })
    }

    /// Writes atomically via a sibling temporary file.
    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = self.encode()?;
        let tmp = path.with_extension("tmp");
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&bytes)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::decode(&fs::read(path)?)
    }

    /// Loads and checks that the stored parameters match the current run.
    pub fn load_for(path: &Path, params: &SearchParams) -> Result<Self> {
        let cp = Self::load(path)?;
        if cp.params != *params {
            return Err(Error::Checkpoint(format!(
                "parameters differ: checkpoint has rank {} cand-len {} max-len {}, run has rank {} cand-len {} max-len {}",
                cp.params.rank, cp.params.cand_len, cp.params.max_len, params.rank, params.cand_len, params.max_len
            )));
        }
        Ok(cp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        let rank = Rank::new(3).unwrap();
        Checkpoint {
            params: SearchParams { rank, cand_len: 3, max_len: 9 },
            completed: vec![
                CandidateResult { candidate: "a".into(), verdict: "extendable".into(), witness: Some("a".into()), bound: 9, nodes_explored: 1 },
                CandidateResult { candidate: "abAB".into(), verdict: "blocked_up_to".into(), witness: None, bound: 9, nodes_explored: 4242 },
            ],
        }
    }

    #[test]
    fn roundtrip_is_exact() {
        let cp = sample();
        let bytes = cp.encode().unwrap();
        assert_eq!(Checkpoint::decode(&bytes).unwrap(), cp);
        assert_eq!(Checkpoint::decode(&bytes).unwrap().encode().unwrap(), bytes);
    }

    #[test]
    fn corruption_is_detected() {
        let mut bytes = sample().encode().unwrap();
        bytes[10] ^= 1;
        assert!(matches!(Checkpoint::decode(&bytes), Err(Error::Checkpoint(_))));
    }

    #[test]
    fn truncated_body_with_valid_hash_is_rejected() {
        let bytes = sample().encode().unwrap();
        let body = &bytes[..bytes.len() - 32 - 5];
        let mut forged = body.to_vec();
        forged.extend_from_slice(&Sha256::digest(body));
        let err = Checkpoint::decode(&forged).unwrap_err();
        assert!(err.to_string().contains("truncated"), "{err}");
    }

    #[test]
    fn mismatched_rank_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cp.bin");
        sample().save(&path).unwrap();
        let other = SearchParams { rank: Rank::new(4).unwrap(), cand_len: 3, max_len: 9 };
        assert!(Checkpoint::load_for(&path, &other).is_err());
        assert!(Checkpoint::load_for(&path, &sample().params).is_ok());
    }
}
