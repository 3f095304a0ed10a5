//! Deterministic synthetic baseline corpus for tests and benchmarks.
//!
//! Record content is a pure function of `(seed, pmid)`, so the same corpus
//! can be split across any number of files, regenerated lazily, or streamed
//! without materializing it. The generated records exercise the whole filter
//! cascade: non-English languages, missing abstracts, missing or hyphenated
//! ISSNs, structured abstracts, inline markup, and entities.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use flate2::write::GzEncoder;
use flate2::Compression;

use crate::rng::DetRng;
use crate::vocab::{Vocabulary, CLS_TOKEN, MASK_TOKEN, PAD_TOKEN, SEP_TOKEN, UNK_TOKEN};

/// Word stock for titles and abstracts.
pub const WORDS: &[&str] = &[
    "protein", "kinase", "receptor", "cell", "tumor", "gene", "expression", "binding",
    "inhibitor", "pathway", "signal", "membrane", "clinical", "patient", "treatment",
    "therapy", "dose", "response", "trial", "cohort", "risk", "factor", "disease",
    "infection", "immune", "antibody", "antigen", "serum", "plasma", "tissue", "liver",
    "renal", "cardiac", "neural", "cortex", "synapse", "enzyme", "substrate", "catalysis",
    "mutation", "variant", "allele", "genome", "sequence", "transcription", "translation",
    "regulation", "apoptosis", "proliferation", "differentiation", "metabolism", "glucose",
    "insulin", "lipid", "cholesterol", "oxidative", "stress", "inflammation", "cytokine",
    "chemokine", "marker", "biopsy", "imaging", "resonance", "ultrasound", "surgery",
    "resection", "survival", "mortality", "incidence", "prevalence", "screening",
    "diagnosis", "prognosis", "outcome", "placebo", "randomized", "blind", "control",
    "baseline", "followup", "analysis", "regression", "model", "estimate", "interval",
    "significance", "correlation", "association", "exposure", "toxicity", "efficacy",
    "safety", "adverse", "event", "biomarker", "assay", "culture", "vitro", "vivo",
    "murine", "primate", "pediatric", "adult", "elderly", "female", "male",
];

/// Suffixes that make decomposable out-of-vocabulary words; the vocabulary
/// carries their `##` continuation pieces.
const SUFFIXES: &[&str] = &["ase", "osis", "itis"];

/// Number of synthetic journals. Each journal has a print and an electronic
/// ISSN; linking equals print.
pub const JOURNAL_COUNT: u64 = 40;

fn pool_issn(k: u64) -> String {
    // Seven digits plus a final digit or X.
    let body = 1_000_000 + k * 13 % 9_000_000;
    let last = if k % 8 == 7 {
        "X".to_string()
    } else {
        ((k * 7) % 10).to_string()
    };
    format!("{body:07}{last}")
}

/// (print, electronic, linking) normalized ISSNs of journal `j`.
pub fn journal_issns(j: u64) -> (String, String, String) {
    let print = pool_issn(3 * j);
    let electronic = pool_issn(3 * j + 1);
    (print.clone(), electronic, print)
}

fn hyphenate(issn: &str) -> String {
    format!("{}-{}", &issn[..4], &issn[4..])
}

#[derive(Debug, Clone, Copy)]
pub struct SynthConfig {
    pub records: u64,
    pub seed: u64,
    pub start_pmid: u64,
    /// Every n-th record re-emits the previous pmid (0 = no duplicates).
    pub duplicate_every: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            records: 1000,
            seed: 0x5eed,
            start_pmid: 1,
            duplicate_every: 0,
        }
    }
}

fn push_sentence(out: &mut String, rng: &mut DetRng, words: usize, allow_markup: bool) {
    for i in 0..words {
        if i > 0 {
            if rng.below(12) == 0 {
                out.push_str(", ");
            } else {
                out.push(' ');
            }
        }
        let roll = rng.below(100);
        if roll < 4 {
            out.push_str("qzqzqz"); // undecomposable, tokenizes to [UNK]
        } else if roll < 12 {
            let base = WORDS[rng.below(WORDS.len() as u64) as usize];
            let suffix = SUFFIXES[rng.below(SUFFIXES.len() as u64) as usize];
            out.push_str(base);
            out.push_str(suffix);
        } else if allow_markup && roll < 15 {
            out.push_str("<i>");
            out.push_str(WORDS[rng.below(WORDS.len() as u64) as usize]);
            out.push_str("</i>");
        } else if allow_markup && roll < 17 {
            out.push_str("A &amp; B");
        } else {
            out.push_str(WORDS[rng.below(WORDS.len() as u64) as usize]);
        }
    }
    out.push('.');
}

/// One `PubmedArticle` element. Content depends only on `(seed, pmid)`.
pub fn record_xml(seed: u64, pmid: u64) -> String {
    let mut rng = DetRng::new(seed, pmid);
    let mut xml = String::with_capacity(1024);

    let language = match rng.below(20) {
        0 => "fre",
        1 => "deu",
        _ => "eng",
    };
    let has_abstract = rng.below(20) != 0;
    let has_issn = rng.below(12) != 0;
    let journal = rng.below(JOURNAL_COUNT);
    let (print, electronic, linking) = journal_issns(journal);

    xml.push_str("<PubmedArticle>\n  <MedlineCitation Status=\"MEDLINE\" Owner=\"NLM\">\n");
    xml.push_str(&format!("    <PMID Version=\"1\">{pmid}</PMID>\n"));
    xml.push_str("    <Article PubModel=\"Print\">\n      <Journal>\n");
    if has_issn {
        if rng.below(10) < 7 {
            let raw = if rng.below(10) < 7 {
                hyphenate(&print)
            } else {
                print.clone()
            };
            xml.push_str(&format!(
                "        <ISSN IssnType=\"Print\">{raw}</ISSN>\n"
            ));
        }
        if rng.below(10) < 5 {
            xml.push_str(&format!(
                "        <ISSN IssnType=\"Electronic\">{}</ISSN>\n",
                hyphenate(&electronic)
            ));
        }
    }
    xml.push_str(
        "        <JournalIssue CitedMedium=\"Print\"><Volume>12</Volume></JournalIssue>\n",
    );
    xml.push_str(&format!(
        "        <Title>Journal of {} {}</Title>\n",
        WORDS[(journal as usize * 3) % WORDS.len()],
        WORDS[(journal as usize * 7 + 1) % WORDS.len()]
    ));
    xml.push_str("      </Journal>\n");

    let mut title = String::new();
    let title_words = 3 + rng.below(5) as usize;
    push_sentence(&mut title, &mut rng, title_words, false);
    xml.push_str(&format!("      <ArticleTitle>{title}</ArticleTitle>\n"));

    if has_abstract {
        xml.push_str("      <Abstract>\n");
        let segments = 1 + rng.below(3);
        for s in 0..segments {
            let mut body = String::new();
            let body_words = 12 + rng.below(30) as usize;
            push_sentence(&mut body, &mut rng, body_words, true);
            if segments > 1 {
                let label = ["BACKGROUND", "METHODS", "RESULTS"][s as usize % 3];
                xml.push_str(&format!(
                    "        <AbstractText Label=\"{label}\">{body}</AbstractText>\n"
                ));
            } else {
                xml.push_str(&format!("        <AbstractText>{body}</AbstractText>\n"));
            }
        }
        xml.push_str("      </Abstract>\n");
    }

    xml.push_str(
        "      <AuthorList><Author><LastName>Doe</LastName><Initials>J</Initials></Author></AuthorList>\n",
    );
    xml.push_str(&format!("      <Language>{language}</Language>\n"));
    xml.push_str("    </Article>\n    <MedlineJournalInfo>\n      <Country>England</Country>\n");
    if has_issn && rng.below(10) < 8 {
        xml.push_str(&format!(
            "      <ISSNLinking>{}</ISSNLinking>\n",
            hyphenate(&linking)
        ));
    }
    xml.push_str("    </MedlineJournalInfo>\n  </MedlineCitation>\n");
    xml.push_str(&format!(
        "  <PubmedData><ArticleIdList><ArticleId IdType=\"pubmed\">{pmid}</ArticleId></ArticleIdList></PubmedData>\n"
    ));
    xml.push_str("</PubmedArticle>\n");
    xml
}

const XML_PROLOG: &str = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<PubmedArticleSet>\n";
const XML_EPILOG: &str = "</PubmedArticleSet>\n";

fn pmid_at(cfg: &SynthConfig, index: u64) -> u64 {
    let pmid = cfg.start_pmid + index;
    if cfg.duplicate_every > 0 && index > 0 && index % cfg.duplicate_every == 0 {
        pmid - 1
    } else {
        pmid
    }
}

/// Write one archive containing `cfg.records` records.
pub fn write_synth_xml<W: Write>(mut out: W, cfg: &SynthConfig) -> std::io::Result<()> {
    out.write_all(XML_PROLOG.as_bytes())?;
    for i in 0..cfg.records {
        out.write_all(record_xml(cfg.seed, pmid_at(cfg, i)).as_bytes())?;
    }
    out.write_all(XML_EPILOG.as_bytes())
}

/// Write a corpus split across `files` archives (gzip when `gzip` is set).
/// Pmids run consecutively across files.
pub fn synth_files(
    dir: &Path,
    files: u32,
    records_per_file: u64,
    seed: u64,
    gzip: bool,
) -> crate::Result<Vec<PathBuf>> {
    let mut paths = Vec::with_capacity(files as usize);
    for f in 0..files {
        let cfg = SynthConfig {
            records: records_per_file,
            seed,
            start_pmid: 1 + u64::from(f) * records_per_file,
            duplicate_every: 0,
        };
        let name = if gzip {
            format!("baseline{:04}.xml.gz", f + 1)
        } else {
            format!("baseline{:04}.xml", f + 1)
        };
        let path = dir.join(name);
        let file = BufWriter::new(File::create(&path)?);
        if gzip {
            let mut enc = GzEncoder::new(file, Compression::fast());
            write_synth_xml(&mut enc, &cfg)?;
            enc.finish()?;
        } else {
            write_synth_xml(file, &cfg)?;
        }
        paths.push(path);
    }
    Ok(paths)
}

/// Journal metrics covering most of the synthetic journal pool, in the
/// semicolon-delimited export layout. About a third of SJR values are zero
/// or empty, reproducing the zero-heavy regime of real SJR tables.
pub fn write_journal_csv<W: Write>(mut out: W, seed: u64) -> std::io::Result<()> {
    writeln!(
        out,
        "Rank;Sourceid;Title;Type;Issn;SJR;SJR Best Quartile;H index;Country"
    )?;
    let mut rng = DetRng::new(seed, 0xc5);
    let mut rank = 0;
    for j in 0..JOURNAL_COUNT {
        // ~15% of journals are missing from the table entirely.
        if rng.below(100) < 15 {
            continue;
        }
        rank += 1;
        let (print, electronic, _) = journal_issns(j);
        let h_index = rng.below(400);
        let sjr = match rng.below(10) {
            0 | 1 => String::new(),
            2 => "0,000".to_string(),
            _ => format!("{},{:03}", rng.below(90), rng.below(1000)),
        };
        writeln!(
            out,
            "{rank};{};Journal of {} {};journal;{print}, {electronic};{sjr};Q1;{h_index};England",
            28_000 + j,
            WORDS[(j as usize * 3) % WORDS.len()],
            WORDS[(j as usize * 7 + 1) % WORDS.len()],
        )?;
    }
    // Rows with unusable ISSNs, to be skipped and counted.
    writeln!(out, "{};999;Broken Journal;journal;n/a;1,000;Q4;12;Nowhere", rank + 1)?;
    Ok(())
}

/// WordPiece vocabulary covering the generator's word stock plus the
/// continuation pieces and punctuation it emits.
pub fn vocab_tokens() -> Vec<String> {
    let mut tokens: Vec<String> = [PAD_TOKEN, UNK_TOKEN, CLS_TOKEN, SEP_TOKEN, MASK_TOKEN]
        .iter()
        .map(|s| s.to_string())
        .collect();
    tokens.extend(WORDS.iter().map(|w| w.to_string()));
    tokens.extend(SUFFIXES.iter().map(|s| format!("##{s}")));
    tokens.extend([".", ",", "&", "a", "b"].iter().map(|s| s.to_string()));
    tokens
}

pub fn synth_vocab() -> Vocabulary {
    Vocabulary::from_tokens(vocab_tokens()).expect("generator vocabulary is valid")
}

/// Lazily generated XML byte stream: a whole corpus without a file.
pub struct SynthXmlReader {
    cfg: SynthConfig,
    index: u64,
    buf: Vec<u8>,
    pos: usize,
    stage: Stage,
}

#[derive(PartialEq)]
enum Stage {
    Prolog,
    Records,
    Epilog,
    Done,
}

impl SynthXmlReader {
    pub fn new(cfg: SynthConfig) -> Self {
        SynthXmlReader {
            cfg,
            index: 0,
            buf: Vec::new(),
            pos: 0,
            stage: Stage::Prolog,
        }
    }

    fn refill(&mut self) {
        self.pos = 0;
        self.buf.clear();
        match self.stage {
            Stage::Prolog => {
                self.buf.extend_from_slice(XML_PROLOG.as_bytes());
                self.stage = Stage::Records;
            }
            Stage::Records => {
                if self.index < self.cfg.records {
                    let pmid = pmid_at(&self.cfg, self.index);
                    self.buf
                        .extend_from_slice(record_xml(self.cfg.seed, pmid).as_bytes());
                    self.index += 1;
                } else {
                    self.buf.extend_from_slice(XML_EPILOG.as_bytes());
                    self.stage = Stage::Epilog;
                }
            }
            Stage::Epilog => {
                self.stage = Stage::Done;
            }
            Stage::Done => {}
        }
    }
}

impl Read for SynthXmlReader {
    fn read(&mut self, out: &mut [u8]) -> std::io::Result<usize> {
        while self.pos == self.buf.len() {
            if self.stage == Stage::Done {
                return Ok(0);
            }
            self.refill();
        }
        let n = (self.buf.len() - self.pos).min(out.len());
        out[..n].copy_from_slice(&self.buf[self.pos..self.pos + n]);
        self.pos += n;
        Ok(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{filter_record, parse_records, FilterOptions};
    use std::io::BufReader;

    #[test]
    fn generation_is_deterministic() {
        let cfg = SynthConfig {
            records: 50,
            ..SynthConfig::default()
        };
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_synth_xml(&mut a, &cfg).unwrap();
        write_synth_xml(&mut b, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn streaming_reader_matches_file_form() {
        let cfg = SynthConfig {
            records: 30,
            ..SynthConfig::default()
        };
        let mut file_bytes = Vec::new();
        write_synth_xml(&mut file_bytes, &cfg).unwrap();
        let mut streamed = Vec::new();
        SynthXmlReader::new(cfg).read_to_end(&mut streamed).unwrap();
        assert_eq!(file_bytes, streamed);
    }

    #[test]
    fn corpus_parses_and_filters_with_mixed_verdicts() {
        let cfg = SynthConfig {
            records: 400,
            ..SynthConfig::default()
        };
        let mut bytes = Vec::new();
        write_synth_xml(&mut bytes, &cfg).unwrap();
        let records: Vec<_> = parse_records(BufReader::new(bytes.as_slice()))
            .collect::<crate::Result<Vec<_>>>()
            .unwrap();
        assert_eq!(records.len(), 400);
        let opts = FilterOptions::default();
        let kept = records
            .iter()
            .filter(|r| filter_record(r, &opts).is_kept())
            .count();
        assert!(kept > 250, "most records survive ({kept}/400)");
        assert!(kept < 400, "some records are rejected ({kept}/400)");
    }

    #[test]
    fn vocab_covers_generated_text_reasonably() {
        let vocab = synth_vocab();
        let cfg = SynthConfig {
            records: 100,
            ..SynthConfig::default()
        };
        let mut bytes = Vec::new();
        write_synth_xml(&mut bytes, &cfg).unwrap();
        let opts = FilterOptions::default();
        let mut total = 0u64;
        let mut unk = 0u64;
        for record in parse_records(BufReader::new(bytes.as_slice())) {
            if let crate::ingest::FilterOutcome::Kept(doc) = filter_record(&record.unwrap(), &opts)
            {
                for id in crate::tokenize::tokenize(&doc.text, &vocab) {
                    total += 1;
                    if id == vocab.unk_id {
                        unk += 1;
                    }
                }
            }
        }
        assert!(total > 1000);
        let unk_rate = unk as f64 / total as f64;
        assert!(unk_rate < 0.10, "unk rate {unk_rate} too high");
        assert!(unk_rate > 0.0, "generator should emit some unknowns");
    }

    #[test]
    fn journal_table_loads() {
        let mut csv = Vec::new();
        write_journal_csv(&mut csv, 1).unwrap();
        let table = crate::metrics::JournalTable::load(csv.as_slice()).unwrap();
        assert!(table.len() > 30, "most journals covered: {}", table.len());
        assert_eq!(table.stats.rows_skipped, 1);
    }

    #[test]
    fn duplicates_reuse_previous_pmid() {
        let cfg = SynthConfig {
            records: 10,
            duplicate_every: 3,
            ..SynthConfig::default()
        };
        let mut bytes = Vec::new();
        write_synth_xml(&mut bytes, &cfg).unwrap();
        let pmids: Vec<u64> = parse_records(BufReader::new(bytes.as_slice()))
            .map(|r| r.unwrap().pmid)
            .collect();
        assert_eq!(pmids, vec![1, 2, 3, 3, 5, 6, 6, 8, 9, 9]);
    }
}
