//! Greedy longest-match WordPiece tokenization.

use rayon::prelude::*;

use crate::vocab::Vocabulary;

/// Tokenize `text` against `vocab`.
///
/// The text is lowercased and pre-split on whitespace and punctuation
/// (every non-alphanumeric, non-whitespace character is its own word).
/// Each word is then decomposed greedily, longest piece first: the first
/// piece is matched raw and continuations are matched with the `##` prefix.
/// A word with no valid decomposition becomes a single unknown token.
pub fn tokenize(text: &str, vocab: &Vocabulary) -> Vec<u32> {
    let lowered = text.to_lowercase();
    let mut out = Vec::new();
    let mut piece_buf = String::new();
    for word in split_words(&lowered) {
        wordpiece(word, vocab, &mut piece_buf, &mut out);
    }
    out
}

/// Tokenize a batch in parallel. Output order matches input order, so the
/// result is independent of the worker count.
pub fn tokenize_batch<S: AsRef<str> + Sync>(texts: &[S], vocab: &Vocabulary) -> Vec<Vec<u32>> {
    texts
        .par_iter()
        .map(|text| tokenize(text.as_ref(), vocab))
        .collect()
}

/// Split on whitespace; punctuation-like characters (anything neither
/// alphanumeric nor whitespace) become single-character words.
fn split_words(text: &str) -> impl Iterator<Item = &str> {
    let bytes = text.char_indices();
    let mut words = Vec::new();
    let mut start: Option<usize> = None;
    for (idx, ch) in bytes {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                words.push(&text[s..idx]);
            }
        } else if ch.is_alphanumeric() {
            if start.is_none() {
                start = Some(idx);
            }
        } else {
            if let Some(s) = start.take() {
                words.push(&text[s..idx]);
            }
            words.push(&text[idx..idx + ch.len_utf8()]);
        }
    }
    if let Some(s) = start {
        words.push(&text[s..]);
    }
    words.into_iter()
}

fn wordpiece(word: &str, vocab: &Vocabulary, piece_buf: &mut String, out: &mut Vec<u32>) {
    if word.is_empty() {
        return;
    }
    // Whole-word hit is the common case.
    if let Some(id) = vocab.id(word) {
        out.push(id);
        return;
    }
    // Character boundaries; boundaries[i]..boundaries[j] is a char-aligned slice.
    let mut boundaries: Vec<usize> = word.char_indices().map(|(i, _)| i).collect();
    boundaries.push(word.len());
    let nchars = boundaries.len() - 1;

    let mark = out.len();
    let mut start = 0;
    let mut is_first = true;
    while start < nchars {
        let mut matched = None;
        let mut end = nchars;
        while end > start {
            piece_buf.clear();
            if !is_first {
                piece_buf.push_str("##");
            }
            piece_buf.push_str(&word[boundaries[start]..boundaries[end]]);
            if let Some(id) = vocab.id(piece_buf) {
                matched = Some((id, end));
                break;
            }
            end -= 1;
        }
        match matched {
            Some((id, end)) => {
                out.push(id);
                start = end;
                is_first = false;
            }
            None => {
                // No decomposition: the whole word collapses to one unknown.
                out.truncate(mark);
                out.push(vocab.unk_id);
                return;
            }
        }
    }
}
