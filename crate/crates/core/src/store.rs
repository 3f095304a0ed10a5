//! JSONL files carrying documents and scores between pipeline stages.
//!
//! One JSON object per line, in canonical (pmid ascending) order. The
//! serialized field order is fixed, so identical inputs produce
//! byte-identical files.

use std::io::{BufRead, Write};

use crate::ingest::Document;
use crate::metrics::ScoredDocument;
use crate::Result;

pub fn write_documents<'a, W: Write, I>(mut out: W, documents: I) -> Result<()>
where
    I: IntoIterator<Item = &'a Document>,
{
    for doc in documents {
        serde_json::to_writer(&mut out, doc)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_documents<R: BufRead>(reader: R) -> impl Iterator<Item = Result<Document>> {
    reader.lines().filter_map(|line| match line {
        Ok(line) if line.trim().is_empty() => None,
        Ok(line) => Some(serde_json::from_str(&line).map_err(Into::into)),
        Err(e) => Some(Err(e.into())),
    })
}

pub fn write_scored<'a, W: Write, I>(mut out: W, scored: I) -> Result<()>
where
    I: IntoIterator<Item = &'a ScoredDocument>,
{
    for doc in scored {
        serde_json::to_writer(&mut out, doc)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_scored<R: BufRead>(reader: R) -> impl Iterator<Item = Result<ScoredDocument>> {
    reader.lines().filter_map(|line| match line {
        Ok(line) if line.trim().is_empty() => None,
        Ok(line) => Some(serde_json::from_str(&line).map_err(Into::into)),
        Err(e) => Some(Err(e.into())),
    })
}
