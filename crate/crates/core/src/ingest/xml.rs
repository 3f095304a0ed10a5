//! Event-driven reader for baseline archives.
//!
//! Records live at `PubmedArticle`; the fields we read are
//!
//! - `MedlineCitation/PMID`
//! - `MedlineCitation/Article/Language` (repeatable)
//! - `MedlineCitation/Article/ArticleTitle`
//! - `MedlineCitation/Article/Abstract/AbstractText` (repeatable)
//! - `MedlineCitation/Article/Journal/ISSN` (`IssnType` in {Print, Electronic})
//! - `MedlineCitation/Article/Journal/Title`
//! - `MedlineCitation/MedlineJournalInfo/ISSNLinking`
//!
//! Everything else is skipped. Title and abstract capture includes text
//! inside inline markup (`<i>`, `<sub>`, ...). Only the element path is
//! tracked, so memory stays bounded by one record regardless of file size.

use std::io::BufRead;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::RawRecord;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Seg {
    MedlineCitation,
    Pmid,
    Article,
    Language,
    ArticleTitle,
    Abstract,
    AbstractText,
    Journal,
    Issn,
    JournalTitle,
    MedlineJournalInfo,
    IssnLinking,
    Other,
}

fn seg_for(name: &[u8]) -> Seg {
    match name {
        b"MedlineCitation" => Seg::MedlineCitation,
        b"PMID" => Seg::Pmid,
        b"Article" => Seg::Article,
        b"Language" => Seg::Language,
        b"ArticleTitle" => Seg::ArticleTitle,
        b"Abstract" => Seg::Abstract,
        b"AbstractText" => Seg::AbstractText,
        b"Journal" => Seg::Journal,
        b"ISSN" => Seg::Issn,
        b"Title" => Seg::JournalTitle,
        b"MedlineJournalInfo" => Seg::MedlineJournalInfo,
        b"ISSNLinking" => Seg::IssnLinking,
        _ => Seg::Other,
    }
}

// Paths are relative to the PubmedArticle element.
const PMID_PATH: &[Seg] = &[Seg::MedlineCitation, Seg::Pmid];
const LANGUAGE_PATH: &[Seg] = &[Seg::MedlineCitation, Seg::Article, Seg::Language];
const TITLE_PATH: &[Seg] = &[Seg::MedlineCitation, Seg::Article, Seg::ArticleTitle];
const ABSTRACT_TEXT_PATH: &[Seg] = &[
    Seg::MedlineCitation,
    Seg::Article,
    Seg::Abstract,
    Seg::AbstractText,
];
const ISSN_PATH: &[Seg] = &[Seg::MedlineCitation, Seg::Article, Seg::Journal, Seg::Issn];
const JOURNAL_TITLE_PATH: &[Seg] = &[
    Seg::MedlineCitation,
    Seg::Article,
    Seg::Journal,
    Seg::JournalTitle,
];
const ISSN_LINKING_PATH: &[Seg] = &[
    Seg::MedlineCitation,
    Seg::MedlineJournalInfo,
    Seg::IssnLinking,
];

// ISSN candidate priority: print before electronic before linking;
// candidates with an unrecognized IssnType sort last.
const PRIORITY_PRINT: u8 = 0;
const PRIORITY_ELECTRONIC: u8 = 1;
const PRIORITY_LINKING: u8 = 2;
const PRIORITY_UNTYPED: u8 = 3;

#[derive(Default)]
struct Builder {
    pmid_text: Option<String>,
    title: String,
    title_seen: bool,
    segments: Vec<String>,
    languages: Vec<String>,
    issns: Vec<(u8, String)>,
    journal_title: String,
    journal_title_seen: bool,
    // Scratch buffers for single-element captures.
    pmid_buf: String,
    lang_buf: String,
    issn_buf: String,
    issn_priority: u8,
    linking_buf: String,
}

impl Builder {
    fn finish(mut self, position: u64) -> Result<RawRecord> {
        let pmid = self
            .pmid_text
            .as_deref()
            .and_then(|s| s.parse::<u64>().ok())
            .filter(|&p| p > 0)
            .ok_or_else(|| match self.pmid_text {
                Some(text) => Error::record(position, format!("invalid PMID {text:?}")),
                None => Error::record(position, "missing PMID"),
            })?;
        self.issns.sort_by_key(|(priority, _)| *priority);
        Ok(RawRecord {
            pmid,
            title: self.title_seen.then_some(self.title),
            abstract_segments: self.segments,
            language_codes: self.languages,
            issn_candidates: self.issns.into_iter().map(|(_, raw)| raw).collect(),
            journal_title: self.journal_title_seen.then_some(self.journal_title),
        })
    }
}

/// Streaming record iterator. Yields `Ok(RawRecord)` per complete article;
/// the first error fuses the stream.
pub struct RecordReader<R: BufRead> {
    reader: Reader<R>,
    buf: Vec<u8>,
    path: Vec<Seg>,
    in_record: bool,
    builder: Builder,
    done: bool,
}

impl<R: BufRead> RecordReader<R> {
    pub fn new(inner: R) -> Self {
        RecordReader {
            reader: Reader::from_reader(inner),
            buf: Vec::with_capacity(4096),
            path: Vec::with_capacity(16),
            in_record: false,
            builder: Builder::default(),
            done: false,
        }
    }

    /// Byte offset of the reader, used in error reports.
    pub fn byte_position(&self) -> u64 {
        self.reader.buffer_position() as u64
    }

    fn issn_priority(start: &BytesStart<'_>) -> Result<u8> {
        let attr = start
            .try_get_attribute("IssnType")
            .map_err(|e| Error::Table(e.to_string()))?;
        Ok(match attr {
            Some(attr) => match attr.value.as_ref() {
                b"Print" => PRIORITY_PRINT,
                b"Electronic" => PRIORITY_ELECTRONIC,
                _ => PRIORITY_UNTYPED,
            },
            None => PRIORITY_UNTYPED,
        })
    }

    fn on_start(&mut self, start: &BytesStart<'_>) -> Result<()> {
        let seg = seg_for(start.local_name().as_ref());
        if !self.in_record {
            if start.local_name().as_ref() == b"PubmedArticle" {
                self.in_record = true;
                self.path.clear();
                self.builder = Builder::default();
            }
            return Ok(());
        }
        self.path.push(seg);
        let path = self.path.as_slice();
        if path == ABSTRACT_TEXT_PATH {
            self.builder.segments.push(String::new());
        } else if path == TITLE_PATH {
            self.builder.title_seen = true;
        } else if path == JOURNAL_TITLE_PATH {
            self.builder.journal_title_seen = true;
        } else if path == ISSN_PATH {
            self.builder.issn_priority = Self::issn_priority(start)?;
            self.builder.issn_buf.clear();
        } else if path == LANGUAGE_PATH {
            self.builder.lang_buf.clear();
        } else if path == PMID_PATH {
            self.builder.pmid_buf.clear();
        } else if path == ISSN_LINKING_PATH {
            self.builder.linking_buf.clear();
        }
        Ok(())
    }

    fn on_text(&mut self, text: &str) {
        if !self.in_record {
            return;
        }
        let path = self.path.as_slice();
        let builder = &mut self.builder;
        if path == PMID_PATH {
            builder.pmid_buf.push_str(text);
        } else if path == LANGUAGE_PATH {
            builder.lang_buf.push_str(text);
        } else if path == ISSN_PATH {
            builder.issn_buf.push_str(text);
        } else if path == ISSN_LINKING_PATH {
            builder.linking_buf.push_str(text);
        } else if path.starts_with(ABSTRACT_TEXT_PATH) {
            if let Some(segment) = builder.segments.last_mut() {
                segment.push_str(text);
            }
        } else if path.starts_with(TITLE_PATH) {
            builder.title.push_str(text);
        } else if path.starts_with(JOURNAL_TITLE_PATH) {
            builder.journal_title.push_str(text);
        }
    }

    /// Returns a completed record when this End closes the record root.
    fn on_end(&mut self) -> Result<Option<RawRecord>> {
        if !self.in_record {
            return Ok(None);
        }
        if self.path.is_empty() {
            // Closing PubmedArticle itself.
            self.in_record = false;
            let builder = std::mem::take(&mut self.builder);
            return builder.finish(self.byte_position()).map(Some);
        }
        let popped = self.path.pop().expect("path non-empty");
        let builder = &mut self.builder;
        match popped {
            Seg::Pmid if self.path.as_slice() == &PMID_PATH[..1] => {
                if builder.pmid_text.is_none() {
                    builder.pmid_text = Some(builder.pmid_buf.trim().to_string());
                }
            }
            Seg::Language if self.path.as_slice() == &LANGUAGE_PATH[..2] => {
                builder.languages.push(builder.lang_buf.trim().to_string());
            }
            Seg::Issn if self.path.as_slice() == &ISSN_PATH[..3] => {
                let value = builder.issn_buf.trim().to_string();
                if !value.is_empty() {
                    builder.issns.push((builder.issn_priority, value));
                }
            }
            Seg::IssnLinking if self.path.as_slice() == &ISSN_LINKING_PATH[..2] => {
                let value = builder.linking_buf.trim().to_string();
                if !value.is_empty() {
                    builder.issns.push((PRIORITY_LINKING, value));
                }
            }
            _ => {}
        }
        Ok(None)
    }

    fn read_next(&mut self) -> Result<Option<RawRecord>> {
        // The event borrows the buffer, so keep it outside `self` while the
        // record handlers take `&mut self`.
        let mut buf = std::mem::take(&mut self.buf);
        let result = self.event_loop(&mut buf);
        buf.clear();
        self.buf = buf;
        result
    }

    fn event_loop(&mut self, buf: &mut Vec<u8>) -> Result<Option<RawRecord>> {
        loop {
            buf.clear();
            match self.reader.read_event_into(buf) {
                Ok(Event::Start(start)) => self.on_start(&start)?,
                Ok(Event::Empty(start)) => {
                    // Self-closing element: only an empty AbstractText is
                    // meaningful (it contributes an empty segment).
                    if self.in_record {
                        self.path.push(seg_for(start.local_name().as_ref()));
                        if self.path.as_slice() == ABSTRACT_TEXT_PATH {
                            self.builder.segments.push(String::new());
                        }
                        self.path.pop();
                    }
                }
                Ok(Event::Text(text)) => {
                    let text = text
                        .unescape()
                        .map_err(|e| Error::xml(self.byte_position(), e.to_string()))?;
                    self.on_text(&text);
                }
                Ok(Event::CData(cdata)) => {
                    let bytes = cdata.into_inner();
                    let text = String::from_utf8_lossy(&bytes);
                    self.on_text(&text);
                }
                Ok(Event::End(_)) => {
                    if let Some(record) = self.on_end()? {
                        return Ok(Some(record));
                    }
                }
                Ok(Event::Eof) => {
                    if self.in_record {
                        return Err(Error::xml(
                            self.byte_position(),
                            "unexpected end of file inside a record",
                        ));
                    }
                    return Ok(None);
                }
                Ok(_) => {} // declarations, comments, PIs, doctype
                Err(e) => return Err(Error::xml(self.byte_position(), e.to_string())),
            }
        }
    }
}

impl<R: BufRead> Iterator for RecordReader<R> {
    type Item = Result<RawRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.read_next() {
            Ok(Some(record)) => Some(Ok(record)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}
