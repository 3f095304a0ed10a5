//! Packed-sequence file format.
//!
//! Layout:
//!
//! ```text
//! magic   "PKSQ"                      4 bytes
//! version u16 little-endian           2 bytes
//! seq_len u32 little-endian           4 bytes
//! count   u64 little-endian           8 bytes
//! vocab   SHA-256 of the vocabulary  32 bytes
//! body    count × seq_len × u32 little-endian token ids
//! ```
//!
//! A sidecar `<file>.index.json` maps sequence ranges to source pmid spans.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::pack::PackedSequence;
use crate::{Error, Result};

pub const MAGIC: [u8; 4] = *b"PKSQ";
pub const FORMAT_VERSION: u16 = 1;
pub const HEADER_LEN: u64 = 50;
/// Sequences per index row.
pub const INDEX_GRANULARITY: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PackedHeader {
    pub version: u16,
    pub seq_len: u32,
    pub count: u64,
    pub vocab_digest: [u8; 32],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexRow {
    pub seq_start: u64,
    pub seq_count: u64,
    pub pmid_first: u64,
    pub pmid_last: u64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SequenceIndex {
    pub granularity: u64,
    pub rows: Vec<IndexRow>,
}

pub fn index_path(packed: &Path) -> PathBuf {
    let mut name = packed
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.push_str(".index.json");
    packed.with_file_name(name)
}

pub struct PackedWriter {
    out: BufWriter<File>,
    path: PathBuf,
    seq_len: u32,
    vocab_digest: [u8; 32],
    count: u64,
    // Index state: pmid span of the open row, plus the last pmid seen so
    // windows inside a long document inherit it.
    index: SequenceIndex,
    row_start: u64,
    row_first: Option<u64>,
    row_last: u64,
    carry_pmid: u64,
}

impl PackedWriter {
    pub fn create(path: &Path, seq_len: u32, vocab_digest: [u8; 32]) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(&MAGIC)?;
        out.write_all(&FORMAT_VERSION.to_le_bytes())?;
        out.write_all(&seq_len.to_le_bytes())?;
        out.write_all(&0u64.to_le_bytes())?; // count, patched on finish
        out.write_all(&vocab_digest)?;
        Ok(PackedWriter {
            out,
            path: path.to_path_buf(),
            seq_len,
            vocab_digest,
            count: 0,
            index: SequenceIndex {
                granularity: INDEX_GRANULARITY,
                rows: Vec::new(),
            },
            row_start: 0,
            row_first: None,
            row_last: 0,
            carry_pmid: 0,
        })
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    fn close_row(&mut self) {
        if self.count > self.row_start {
            self.index.rows.push(IndexRow {
                seq_start: self.row_start,
                seq_count: self.count - self.row_start,
                pmid_first: self.row_first.unwrap_or(self.carry_pmid),
                pmid_last: self.row_last,
            });
        }
        self.row_start = self.count;
        self.row_first = None;
    }

    /// Write one sequence and return its pmid span. The span comes from the
    /// sequence's boundaries, with the running pmid carried into windows
    /// that start mid-document.
    pub fn write_sequence(&mut self, seq: &PackedSequence) -> Result<(u64, u64)> {
        let first = seq.boundaries.first().map(|b| b.pmid);
        let last = seq.boundaries.last().map(|b| b.pmid);
        let span_first = if self.carry_pmid != 0 {
            self.carry_pmid
        } else {
            first.unwrap_or(0)
        };
        let span = (span_first, last.unwrap_or(span_first));
        self.write_ids(&seq.token_ids, span)?;
        if let Some(pmid) = last {
            self.carry_pmid = pmid;
        }
        Ok(span)
    }

    /// Write raw token ids with an explicit pmid span (used when routing
    /// sequences between files).
    pub fn write_ids(&mut self, ids: &[u32], pmid_span: (u64, u64)) -> Result<()> {
        if ids.len() != self.seq_len as usize {
            return Err(Error::PackFormat(format!(
                "sequence length {} does not match file seq_len {}",
                ids.len(),
                self.seq_len
            )));
        }
        let mut bytes = Vec::with_capacity(ids.len() * 4);
        for id in ids {
            bytes.extend_from_slice(&id.to_le_bytes());
        }
        self.out.write_all(&bytes)?;
        if self.row_first.is_none() {
            self.row_first = Some(pmid_span.0);
        }
        self.row_last = pmid_span.1;
        self.count += 1;
        if self.count - self.row_start == self.index.granularity {
            self.close_row();
        }
        Ok(())
    }

    /// Patch the sequence count, flush, and write the index sidecar.
    pub fn finish(mut self) -> Result<PackedHeader> {
        self.close_row();
        self.out.flush()?;
        let file = self.out.get_mut();
        file.seek(SeekFrom::Start(10))?;
        file.write_all(&self.count.to_le_bytes())?;
        file.flush()?;

        let index_json = serde_json::to_vec_pretty(&serde_json::to_value(&self.index)?)?;
        std::fs::write(index_path(&self.path), index_json)?;

        Ok(PackedHeader {
            version: FORMAT_VERSION,
            seq_len: self.seq_len,
            count: self.count,
            vocab_digest: self.vocab_digest,
        })
    }
}

fn parse_header<R: Read>(reader: &mut R) -> Result<PackedHeader> {
    let mut header = [0u8; HEADER_LEN as usize];
    reader.read_exact(&mut header).map_err(|_| {
        Error::PackFormat("file too short for a packed-sequence header".to_string())
    })?;
    if header[0..4] != MAGIC {
        return Err(Error::PackFormat(
            "bad magic bytes (not a packed-sequence file)".to_string(),
        ));
    }
    let version = u16::from_le_bytes(header[4..6].try_into().expect("2 bytes"));
    if version != FORMAT_VERSION {
        return Err(Error::PackVersion {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let seq_len = u32::from_le_bytes(header[6..10].try_into().expect("4 bytes"));
    let count = u64::from_le_bytes(header[10..18].try_into().expect("8 bytes"));
    let mut vocab_digest = [0u8; 32];
    vocab_digest.copy_from_slice(&header[18..50]);
    Ok(PackedHeader {
        version,
        seq_len,
        count,
        vocab_digest,
    })
}

/// Read just the header of a packed file.
pub fn read_header(path: &Path) -> Result<PackedHeader> {
    parse_header(&mut File::open(path)?)
}

/// Streaming reader over the token-id arrays of a packed file.
pub struct PackedReader {
    inner: BufReader<File>,
    header: PackedHeader,
    remaining: u64,
}

impl PackedReader {
    pub fn open(path: &Path) -> Result<Self> {
        let mut inner = BufReader::new(File::open(path)?);
        let header = parse_header(&mut inner)?;
        Ok(PackedReader {
            inner,
            remaining: header.count,
            header,
        })
    }

    pub fn header(&self) -> &PackedHeader {
        &self.header
    }

    fn read_one(&mut self) -> Result<Vec<u32>> {
        let n = self.header.seq_len as usize;
        let mut bytes = vec![0u8; n * 4];
        self.inner.read_exact(&mut bytes).map_err(|_| {
            Error::PackFormat("packed file body is shorter than its header claims".to_string())
        })?;
        Ok(bytes
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect())
    }
}

impl Iterator for PackedReader {
    type Item = Result<Vec<u32>>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        Some(self.read_one())
    }
}

pub fn read_index(packed: &Path) -> Result<SequenceIndex> {
    let bytes = std::fs::read(index_path(packed))?;
    Ok(serde_json::from_slice(&bytes)?)
}
