//! WordPiece vocabulary.
//!
//! File format: plain text, one token per line, id = line number starting
//! at 0. The five special tokens `[PAD]`, `[UNK]`, `[CLS]`, `[SEP]`, and
//! `[MASK]` must all be present.

use std::collections::HashMap;

use crate::digest::sha256_bytes;
use crate::{Error, Result};

pub const PAD_TOKEN: &str = "[PAD]";
pub const UNK_TOKEN: &str = "[UNK]";
pub const CLS_TOKEN: &str = "[CLS]";
pub const SEP_TOKEN: &str = "[SEP]";
pub const MASK_TOKEN: &str = "[MASK]";

#[derive(Debug, Clone)]
pub struct Vocabulary {
    tokens: Vec<String>,
    ids: HashMap<String, u32>,
    pub pad_id: u32,
    pub unk_id: u32,
    pub cls_id: u32,
    pub sep_id: u32,
    pub mask_id: u32,
    /// SHA-256 of the vocabulary file contents; stored in packed-file
    /// headers so a sequence file can be tied back to its vocabulary.
    pub digest: [u8; 32],
}

impl Vocabulary {
    /// Parse vocabulary file bytes (one token per line).
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let digest = sha256_bytes(bytes);
        let text = std::str::from_utf8(bytes)
            .map_err(|_| Error::Vocab("vocabulary file is not UTF-8".to_string()))?;
        let tokens: Vec<String> = text.lines().map(|l| l.to_string()).collect();
        Self::build(tokens, digest)
    }

    /// Build from an in-memory token list. The digest matches what
    /// [`Vocabulary::from_bytes`] would compute for the equivalent file
    /// (one token per line, trailing newline).
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        let mut file = tokens.join("\n");
        file.push('\n');
        let digest = sha256_bytes(file.as_bytes());
        Self::build(tokens, digest)
    }

    fn build(tokens: Vec<String>, digest: [u8; 32]) -> Result<Self> {
        let mut ids = HashMap::with_capacity(tokens.len());
        for (i, token) in tokens.iter().enumerate() {
            if ids.insert(token.clone(), i as u32).is_some() {
                return Err(Error::Vocab(format!(
                    "duplicate token {token:?} at line {i}"
                )));
            }
        }
        let special = |name: &str| -> Result<u32> {
            ids.get(name)
                .copied()
                .ok_or_else(|| Error::Vocab(format!("missing special token {name}")))
        };
        Ok(Vocabulary {
            pad_id: special(PAD_TOKEN)?,
            unk_id: special(UNK_TOKEN)?,
            cls_id: special(CLS_TOKEN)?,
            sep_id: special(SEP_TOKEN)?,
            mask_id: special(MASK_TOKEN)?,
            ids,
            tokens,
            digest,
        })
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.ids.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(|s| s.as_str())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_and_indexes_by_line() {
        let vocab = Vocabulary::from_bytes(b"[PAD]\n[UNK]\n[CLS]\n[SEP]\n[MASK]\nprotein\n##ase\n")
            .unwrap();
        assert_eq!(vocab.len(), 7);
        assert_eq!(vocab.id("protein"), Some(5));
        assert_eq!(vocab.id("##ase"), Some(6));
        assert_eq!(vocab.token(5), Some("protein"));
        assert_eq!(vocab.pad_id, 0);
        assert_eq!(vocab.mask_id, 4);
    }

    #[test]
    fn missing_special_token_is_an_error() {
        let err = Vocabulary::from_bytes(b"[PAD]\n[UNK]\n[CLS]\n[SEP]\nword\n").unwrap_err();
        assert!(err.to_string().contains("[MASK]"));
    }

    #[test]
    fn duplicate_token_is_an_error() {
        let err =
            Vocabulary::from_bytes(b"[PAD]\n[UNK]\n[CLS]\n[SEP]\n[MASK]\nrepeat\nrepeat\n")
                .unwrap_err();
        assert!(err.to_string().contains("repeat"));
    }

    #[test]
    fn from_tokens_digest_matches_file_form() {
        let tokens = vec![
            "[PAD]".to_string(),
            "[UNK]".to_string(),
            "[CLS]".to_string(),
            "[SEP]".to_string(),
            "[MASK]".to_string(),
            "cell".to_string(),
        ];
        let by_tokens = Vocabulary::from_tokens(tokens.clone()).unwrap();
        let file = format!("{}\n", tokens.join("\n"));
        let by_bytes = Vocabulary::from_bytes(file.as_bytes()).unwrap();
        assert_eq!(by_tokens.digest, by_bytes.digest);
    }
}
