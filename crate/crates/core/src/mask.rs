//! Masked-language-modeling corruption of packed sequences.
//!
//! Provided as a utility for downstream trainers; the persisted dataset is
//! never masked, so dynamic masking stays possible and the static variant
//! is reproducible by pre-applying this op.

use serde::{Deserialize, Serialize};

use crate::pack::PackedSequence;
use crate::rng::DetRng;
use crate::vocab::Vocabulary;

/// A masked position and the token id it originally held.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskLabel {
    pub position: u32,
    pub original_id: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskedSequence {
    pub input_ids: Vec<u32>,
    /// Labels at strictly increasing positions; none of them is a
    /// class-marker, separator, or pad position.
    pub labels: Vec<MaskLabel>,
}

/// Fraction of maskable positions that get labeled.
pub const MASK_RATE_NUM: u64 = 15;
pub const MASK_RATE_DEN: u64 = 100;
/// Of the labeled positions: 80% become the mask token, 10% a random
/// vocabulary id, 10% stay unchanged.
pub const REPLACE_WITH_MASK: f64 = 0.8;
pub const REPLACE_WITH_RANDOM: f64 = 0.9; // cumulative

/// Corrupt one sequence for MLM training.
///
/// Maskable positions are those not holding the class-marker, separator, or
/// pad token. Exactly ⌊0.15 · maskable⌋ of them are chosen without
/// replacement by a generator keyed on `(seed, seq_index)`, so the same
/// sequence index always masks identically.
pub fn mask_tokens(
    seq: &PackedSequence,
    seed: u64,
    seq_index: u64,
    vocab: &Vocabulary,
) -> MaskedSequence {
    let mut maskable: Vec<u32> = seq
        .token_ids
        .iter()
        .enumerate()
        .filter(|&(_, &id)| id != vocab.cls_id && id != vocab.sep_id && id != vocab.pad_id)
        .map(|(pos, _)| pos as u32)
        .collect();

    let k = (maskable.len() as u64 * MASK_RATE_NUM / MASK_RATE_DEN) as usize;
    let mut rng = DetRng::new(seed, seq_index);

    // Partial Fisher-Yates: the first k entries are a uniform sample
    // without replacement.
    let m = maskable.len();
    for i in 0..k {
        let j = i + rng.below((m - i) as u64) as usize;
        maskable.swap(i, j);
    }
    let mut chosen = maskable[..k].to_vec();
    chosen.sort_unstable();

    let mut input_ids = seq.token_ids.clone();
    let mut labels = Vec::with_capacity(k);
    for pos in chosen {
        let original_id = input_ids[pos as usize];
        let roll = rng.unit();
        if roll < REPLACE_WITH_MASK {
            input_ids[pos as usize] = vocab.mask_id;
        } else if roll < REPLACE_WITH_RANDOM {
            input_ids[pos as usize] = rng.below(vocab.len() as u64) as u32;
        }
        labels.push(MaskLabel { position: pos, original_id });
    }
    MaskedSequence { input_ids, labels }
}
