//! Packing token streams into fixed-length training sequences.
//!
//! Documents arrive in canonical (pmid) order. Their tokens form one content
//! stream with a separator token between consecutive documents; the stream
//! is cut into windows of `seq_len − 2` tokens and each window is emitted as
//! `[CLS] window [SEP]`. The final partial window is dropped by default or
//! padded on request. Raw mode (`frame = false`) reproduces plain
//! concatenation: no separators, no framing, windows of `seq_len`.

use serde::{Deserialize, Serialize};

use crate::quantile::Quantile;
use crate::rng::{streams, DetRng};
use crate::vocab::Vocabulary;
use crate::{Error, Result};

/// Where a document's tokens begin inside a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocBoundary {
    pub offset: u32,
    pub pmid: u64,
}

/// A fixed-length token-id sequence with provenance offsets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackedSequence {
    pub token_ids: Vec<u32>,
    /// Document starts inside this sequence, offsets strictly increasing.
    pub boundaries: Vec<DocBoundary>,
}

#[derive(Debug, Clone, Copy)]
pub struct PackOptions {
    pub seq_len: u32,
    /// Frame each sequence with `[CLS]`/`[SEP]` and separate documents with
    /// `[SEP]`. Disabled for literal raw concatenation.
    pub frame: bool,
    /// Pad the final partial window instead of dropping it.
    pub pad_final: bool,
}

impl Default for PackOptions {
    fn default() -> Self {
        PackOptions {
            seq_len: 512,
            frame: true,
            pad_final: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackStats {
    pub documents: u64,
    pub document_tokens: u64,
    pub separators: u64,
    pub sequences: u64,
    pub dropped_tokens: u64,
    pub pad_tokens: u64,
}

impl PackStats {
    /// Content-stream length: document tokens plus separators.
    pub fn content_tokens(&self) -> u64 {
        self.document_tokens + self.separators
    }
}

/// Streaming packer. Feed documents in canonical order with
/// [`Packer::push_document`]; every full window is returned as soon as it
/// completes, so memory stays bounded by one sequence.
pub struct Packer {
    opts: PackOptions,
    cls_id: u32,
    sep_id: u32,
    pad_id: u32,
    window: Vec<u32>,
    window_boundaries: Vec<DocBoundary>,
    any_doc: bool,
    stats: PackStats,
}

impl Packer {
    pub fn new(opts: PackOptions, vocab: &Vocabulary) -> Result<Self> {
        if opts.seq_len < 8 {
            return Err(Error::InvalidArgument(format!(
                "seq_len must be at least 8, got {}",
                opts.seq_len
            )));
        }
        Ok(Packer {
            opts,
            cls_id: vocab.cls_id,
            sep_id: vocab.sep_id,
            pad_id: vocab.pad_id,
            window: Vec::with_capacity(opts.seq_len as usize),
            window_boundaries: Vec::new(),
            any_doc: false,
            stats: PackStats::default(),
        })
    }

    fn window_cap(&self) -> usize {
        if self.opts.frame {
            self.opts.seq_len as usize - 2
        } else {
            self.opts.seq_len as usize
        }
    }

    fn emit(&mut self) -> PackedSequence {
        let mut token_ids = Vec::with_capacity(self.opts.seq_len as usize);
        if self.opts.frame {
            token_ids.push(self.cls_id);
        }
        token_ids.append(&mut self.window);
        if self.opts.frame {
            token_ids.push(self.sep_id);
        }
        self.stats.sequences += 1;
        PackedSequence {
            token_ids,
            boundaries: std::mem::take(&mut self.window_boundaries),
        }
    }

    fn push_token(&mut self, id: u32, done: &mut Vec<PackedSequence>) {
        self.window.push(id);
        if self.window.len() == self.window_cap() {
            let seq = self.emit();
            done.push(seq);
        }
    }

    /// Append one document to the stream. Returns the sequences completed by
    /// this document (possibly several when the document spans windows).
    pub fn push_document(&mut self, pmid: u64, tokens: &[u32]) -> Vec<PackedSequence> {
        let mut done = Vec::new();
        if self.any_doc && self.opts.frame {
            self.stats.separators += 1;
            self.push_token(self.sep_id, &mut done);
        }
        self.any_doc = true;
        self.stats.documents += 1;
        self.stats.document_tokens += tokens.len() as u64;
        if let Some((&first, rest)) = tokens.split_first() {
            let frame_offset = u32::from(self.opts.frame);
            self.window_boundaries.push(DocBoundary {
                offset: self.window.len() as u32 + frame_offset,
                pmid,
            });
            self.push_token(first, &mut done);
            for &id in rest {
                self.push_token(id, &mut done);
            }
        }
        done
    }

    /// Close the stream. With `pad_final` the remaining partial window is
    /// padded and returned; otherwise its tokens are counted as dropped.
    pub fn finish(mut self) -> (Option<PackedSequence>, PackStats) {
        if self.window.is_empty() {
            return (None, self.stats);
        }
        if self.opts.pad_final {
            let cap = self.window_cap();
            self.stats.pad_tokens = (cap - self.window.len()) as u64;
            while self.window.len() < cap {
                self.window.push(self.pad_id);
            }
            let seq = self.emit();
            (Some(seq), self.stats)
        } else {
            self.stats.dropped_tokens = self.window.len() as u64;
            (None, self.stats)
        }
    }
}

/// Pack a whole document iterator at once.
pub fn pack<I>(
    documents: I,
    opts: PackOptions,
    vocab: &Vocabulary,
) -> Result<(Vec<PackedSequence>, PackStats)>
where
    I: IntoIterator<Item = (u64, Vec<u32>)>,
{
    let mut packer = Packer::new(opts, vocab)?;
    let mut sequences = Vec::new();
    for (pmid, tokens) in documents {
        sequences.extend(packer.push_document(pmid, &tokens));
    }
    let (last, stats) = packer.finish();
    sequences.extend(last);
    Ok((sequences, stats))
}

/// Sorted sequence indices assigned to the validation holdout:
/// ⌊ratio·n⌋ of them, drawn by a seeded permutation.
pub fn validation_indices(n: u64, ratio: Quantile, seed: u64) -> Result<Vec<u64>> {
    if ratio.is_one() {
        return Err(Error::InvalidArgument(
            "validation ratio must be below 1".to_string(),
        ));
    }
    let k = ratio.rank_floor(n) as usize;
    let mut indices: Vec<u64> = (0..n).collect();
    DetRng::new(seed, streams::SPLIT).shuffle(&mut indices);
    let mut chosen = indices[..k].to_vec();
    chosen.sort_unstable();
    Ok(chosen)
}

/// Split sequences into (train, validation). Both halves preserve the
/// canonical input order; the split is disjoint and exhaustive.
pub fn split_validation(
    sequences: Vec<PackedSequence>,
    ratio: Quantile,
    seed: u64,
) -> Result<(Vec<PackedSequence>, Vec<PackedSequence>)> {
    let chosen = validation_indices(sequences.len() as u64, ratio, seed)?;
    let mut train = Vec::with_capacity(sequences.len() - chosen.len());
    let mut validation = Vec::with_capacity(chosen.len());
    let mut next = chosen.iter().copied().peekable();
    for (i, seq) in sequences.into_iter().enumerate() {
        if next.peek() == Some(&(i as u64)) {
            next.next();
            validation.push(seq);
        } else {
            train.push(seq);
        }
    }
    Ok((train, validation))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::test_support::tiny_vocab;
    use crate::vocab::Vocabulary;
    use proptest::prelude::*;

    fn vocab() -> Vocabulary {
        tiny_vocab(&["a", "b", "c", "d"])
    }

    fn doc(pmid: u64, len: usize) -> (u64, Vec<u32>) {
        // Arbitrary non-special ids; content value does not matter here.
        (pmid, (0..len).map(|i| 5 + (i % 4) as u32).collect())
    }

    /// Naive reference packer: materialize the whole content stream, chunk
    /// it, frame each chunk.
    fn naive_pack(
        documents: &[(u64, Vec<u32>)],
        opts: PackOptions,
        vocab: &Vocabulary,
    ) -> (Vec<Vec<u32>>, u64) {
        let mut stream: Vec<u32> = Vec::new();
        for (i, (_, tokens)) in documents.iter().enumerate() {
            if i > 0 && opts.frame {
                stream.push(vocab.sep_id);
            }
            stream.extend_from_slice(tokens);
        }
        let cap = if opts.frame {
            opts.seq_len as usize - 2
        } else {
            opts.seq_len as usize
        };
        let full = stream.len() / cap;
        let mut sequences = Vec::with_capacity(full);
        for w in 0..full {
            let mut ids = Vec::with_capacity(opts.seq_len as usize);
            if opts.frame {
                ids.push(vocab.cls_id);
            }
            ids.extend_from_slice(&stream[w * cap..(w + 1) * cap]);
            if opts.frame {
                ids.push(vocab.sep_id);
            }
            sequences.push(ids);
        }
        (sequences, (stream.len() % cap) as u64)
    }

    #[test]
    fn exact_fit_two_docs() {
        // 254 + 1 separator + 255 = 510 content tokens = exactly one window.
        let v = vocab();
        let (seqs, stats) =
            pack(vec![doc(1, 254), doc(2, 255)], PackOptions::default(), &v).unwrap();
        assert_eq!(seqs.len(), 1);
        assert_eq!(stats.sequences, 1);
        assert_eq!(stats.dropped_tokens, 0);
        assert_eq!(stats.content_tokens(), 510);
        let seq = &seqs[0];
        assert_eq!(seq.token_ids.len(), 512);
        assert_eq!(seq.token_ids[0], v.cls_id);
        assert_eq!(seq.token_ids[511], v.sep_id);
        assert_eq!(
            seq.boundaries,
            vec![
                DocBoundary { offset: 1, pmid: 1 },
                DocBoundary {
                    offset: 256,
                    pmid: 2
                }
            ]
        );
    }

    #[test]
    fn partial_window_dropped() {
        // 300 + 1 + 300 = 601 → one sequence, 91 tokens dropped.
        let v = vocab();
        let (seqs, stats) =
            pack(vec![doc(1, 300), doc(2, 300)], PackOptions::default(), &v).unwrap();
        assert_eq!(seqs.len(), 1);
        assert_eq!(stats.dropped_tokens, 91);
    }

    #[test]
    fn partial_window_padded_on_request() {
        let v = vocab();
        let opts = PackOptions {
            pad_final: true,
            ..PackOptions::default()
        };
        let (seqs, stats) = pack(vec![doc(1, 300), doc(2, 300)], opts, &v).unwrap();
        assert_eq!(seqs.len(), 2);
        assert_eq!(stats.dropped_tokens, 0);
        assert_eq!(stats.pad_tokens, 510 - 91);
        let last = &seqs[1];
        assert_eq!(last.token_ids.len(), 512);
        assert_eq!(last.token_ids[0], v.cls_id);
        assert_eq!(*last.token_ids.last().unwrap(), v.sep_id);
        assert_eq!(last.token_ids[510 - 91], v.pad_id);
    }

    #[test]
    fn long_document_spans_sequences() {
        let v = vocab();
        let (seqs, stats) = pack(vec![doc(7, 1200)], PackOptions::default(), &v).unwrap();
        assert_eq!(seqs.len(), 2);
        assert_eq!(stats.dropped_tokens, 1200 - 2 * 510);
        assert_eq!(seqs[0].boundaries, vec![DocBoundary { offset: 1, pmid: 7 }]);
        assert!(seqs[1].boundaries.is_empty(), "continuation window has no start");
    }

    #[test]
    fn raw_mode_has_no_frames_or_separators() {
        let v = vocab();
        let opts = PackOptions {
            seq_len: 8,
            frame: false,
            pad_final: false,
        };
        let (seqs, stats) = pack(vec![doc(1, 10), doc(2, 7)], opts, &v).unwrap();
        // Stream is 17 tokens, windows of 8 → 2 sequences, 1 dropped.
        assert_eq!(seqs.len(), 2);
        assert_eq!(stats.separators, 0);
        assert_eq!(stats.dropped_tokens, 1);
        assert_eq!(seqs[0].token_ids.len(), 8);
        assert_ne!(seqs[0].token_ids[0], v.cls_id);
        assert_eq!(seqs[1].boundaries, vec![DocBoundary { offset: 2, pmid: 2 }]);
    }

    #[test]
    fn seq_len_minimum_enforced() {
        assert!(Packer::new(
            PackOptions {
                seq_len: 7,
                ..PackOptions::default()
            },
            &vocab()
        )
        .is_err());
    }

    #[test]
    fn boundary_offsets_in_range_and_increasing() {
        let v = vocab();
        let docs: Vec<_> = (1..=60).map(|p| doc(p, 37)).collect();
        let (seqs, _) = pack(docs, PackOptions::default(), &v).unwrap();
        for seq in &seqs {
            let mut last = 0u32;
            for b in &seq.boundaries {
                assert!(b.offset >= 1 && b.offset < 511);
                assert!(b.offset > last || last == 0);
                last = b.offset;
            }
        }
    }

    proptest! {
        /// Sequence count equals ⌊stream/(seq_len−2)⌋ and output matches the
        /// naive reference packer token-for-token; the conservation equation
        /// holds; content windows concatenate to the stream prefix.
        #[test]
        fn matches_naive_packer(
            lens in proptest::collection::vec(0usize..700, 1..40),
            seq_len in 8u32..64,
            frame in any::<bool>(),
        ) {
            let v = vocab();
            let docs: Vec<(u64, Vec<u32>)> = lens
                .iter()
                .enumerate()
                .map(|(i, &len)| doc(i as u64 + 1, len))
                .collect();
            let opts = PackOptions { seq_len, frame, pad_final: false };
            let (seqs, stats) = pack(docs.clone(), opts, &v).unwrap();
            let (expected, expected_dropped) = naive_pack(&docs, opts, &v);

            prop_assert_eq!(seqs.len(), expected.len());
            prop_assert_eq!(stats.dropped_tokens, expected_dropped);
            for (got, want) in seqs.iter().zip(&expected) {
                prop_assert_eq!(&got.token_ids, want);
            }

            // Conservation: stream = sequences · cap + dropped.
            let cap = if frame { seq_len as u64 - 2 } else { seq_len as u64 };
            prop_assert_eq!(
                stats.content_tokens(),
                stats.sequences * cap + stats.dropped_tokens
            );
            prop_assert!(stats.dropped_tokens < cap);

            // Order preservation: content windows reproduce the stream prefix.
            let mut stream: Vec<u32> = Vec::new();
            for (i, (_, tokens)) in docs.iter().enumerate() {
                if i > 0 && frame {
                    stream.push(v.sep_id);
                }
                stream.extend_from_slice(tokens);
            }
            let mut rebuilt: Vec<u32> = Vec::new();
            for seq in &seqs {
                let content = if frame {
                    &seq.token_ids[1..seq.token_ids.len() - 1]
                } else {
                    &seq.token_ids[..]
                };
                rebuilt.extend_from_slice(content);
            }
            prop_assert_eq!(&stream[..rebuilt.len()], &rebuilt[..]);
        }
    }

    #[test]
    fn split_validation_sizes() {
        let v = vocab();
        let docs: Vec<_> = (1..=200).map(|p| doc(p, 255)).collect();
        let (seqs, _) = pack(docs, PackOptions::default(), &v).unwrap();
        assert_eq!(seqs.len(), 100);
        let ratio: Quantile = "0.05".parse().unwrap();
        let (train, valid) = split_validation(seqs.clone(), ratio, 11).unwrap();
        assert_eq!(valid.len(), 5);
        assert_eq!(train.len(), 95);
    }

    #[test]
    fn split_ratio_zero_keeps_everything() {
        let v = vocab();
        let (seqs, _) = pack(vec![doc(1, 2000)], PackOptions::default(), &v).unwrap();
        let (train, valid) =
            split_validation(seqs.clone(), Quantile::ZERO, 1).unwrap();
        assert!(valid.is_empty());
        assert_eq!(train.len(), seqs.len());
    }

    #[test]
    fn split_is_deterministic_disjoint_exhaustive_and_ordered() {
        let v = vocab();
        let docs: Vec<_> = (1..=120).map(|p| doc(p, 100)).collect();
        let (seqs, _) = pack(docs, PackOptions::default(), &v).unwrap();
        let ratio: Quantile = "0.25".parse().unwrap();
        let (train_a, valid_a) = split_validation(seqs.clone(), ratio, 5).unwrap();
        let (train_b, valid_b) = split_validation(seqs.clone(), ratio, 5).unwrap();
        assert_eq!(train_a, train_b);
        assert_eq!(valid_a, valid_b);

        // Different seeds give different assignments.
        let (_, valid_c) = split_validation(seqs.clone(), ratio, 6).unwrap();
        assert_ne!(valid_a, valid_c);

        // Disjoint and exhaustive: merging back (train is ordered, valid is
        // ordered) reproduces the original sequence list as a set and count.
        assert_eq!(train_a.len() + valid_a.len(), seqs.len());
        let mut seen = std::collections::HashSet::new();
        for s in train_a.iter().chain(valid_a.iter()) {
            assert!(seen.insert(s.token_ids.clone()), "duplicate across splits");
        }

        // Internal order preserved: train is a subsequence of the input.
        let mut it = seqs.iter();
        for t in &train_a {
            assert!(it.any(|s| s == t), "train order broken");
        }
    }

    #[test]
    fn split_rejects_ratio_one() {
        assert!(validation_indices(10, Quantile::ONE, 0).is_err());
    }
}
