//! Triplet extraction: find `(place, relation phrase, place)` statements in
//! running text.
//!
//! The extractor is deliberately shallow. It does not parse; it segments text
//! into sentences, tokenizes them, spots gazetteer names with a greedy
//! longest-match scan, and then accepts a pair of neighbouring entities when
//! the tokens between them look like a copular closeness statement:
//!
//! * no third entity in between (only adjacent pairs are considered),
//! * the gap is at most [`MAX_GAP_TOKENS`] tokens,
//! * the gap contains a phrase from the relation lexicon,
//! * everything before that phrase is a linking verb, article or one of a
//!   few adverbs.
//!
//! The last rule is what separates "New York is near Boston" from "Deutsche
//! Bank invested 10 million dollars in Brazil": both contain a lexicon
//! phrase between two entities, but "invested 10 million dollars" is not
//! permissible gap content.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PipelineError, Result};
use crate::gazetteer::{normalize_name, Gazetteer};
use crate::lexicon::RelationLexicon;

/// Maximum number of tokens between two entities for a pair to be considered.
pub const MAX_GAP_TOKENS: usize = 8;

/// Longest entity name the spotter will try, in tokens.
pub const MAX_NAME_TOKENS: usize = 6;

/// Words that end in a period without ending a sentence.
const ABBREVIATIONS: [&str; 4] = ["Mr.", "St.", "Dr.", "Mt."];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    /// Lowercased token text.
    pub text: String,
    /// Byte offset of the token in its sentence.
    pub start: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EntitySpan {
    /// First token index of the span.
    pub start: usize,
    /// One past the last token index.
    pub end: usize,
    pub poi: u32,
}

/// One extracted statement, located by document and sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationTriplet {
    pub poi_a: u32,
    /// Index into the relation lexicon.
    pub relation: usize,
    pub poi_b: u32,
    pub doc_id: String,
    pub sentence_index: usize,
    /// Token index of the first entity, used for ordering within a sentence.
    pub span_start: usize,
}

// ---------------------------------------------------------------------------
// sentence segmentation and tokenization
// ---------------------------------------------------------------------------

/// Splits text into sentences on `.`, `!` or `?` followed by whitespace and
/// an uppercase letter (or end of text). A short abbreviation list keeps
/// "Mt. Blanc" together.
pub fn segment_sentences(text: &str) -> Vec<String> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut sentences = Vec::new();
    let mut sent_start = 0usize;
    let mut i = 0;
    while i < chars.len() {
        let (pos, ch) = chars[i];
        if ch == '.' || ch == '!' || ch == '?' {
            let end_byte = pos + ch.len_utf8();
            let mut is_abbreviation = false;
            if ch == '.' {
                let mut j = i;
                while j > 0 && chars[j - 1].1.is_alphanumeric() {
                    j -= 1;
                }
                let word = &text[chars[j].0..end_byte];
                is_abbreviation = ABBREVIATIONS.contains(&word);
            }
            if !is_abbreviation {
                let mut k = i + 1;
                let mut saw_whitespace = false;
                while k < chars.len() && chars[k].1.is_whitespace() {
                    saw_whitespace = true;
                    k += 1;
                }
                let split = if k >= chars.len() {
                    true
                } else {
                    saw_whitespace && chars[k].1.is_uppercase()
                };
                if split {
                    let s = text[sent_start..end_byte].trim();
                    if !s.is_empty() {
                        sentences.push(s.to_string());
                    }
                    sent_start = if k < chars.len() { chars[k].0 } else { text.len() };
                    i = k;
                    continue;
                }
            }
        }
        i += 1;
    }
    if sent_start < text.len() {
        let s = text[sent_start..].trim();
        if !s.is_empty() {
            sentences.push(s.to_string());
        }
    }
    sentences
}

/// Lowercased word tokens with byte offsets. Punctuation becomes its own
/// single-character token; an apostrophe between letters stays inside the
/// word, so "d'hiver" is one token.
pub fn tokenize(sentence: &str) -> Vec<Token> {
    let chars: Vec<(usize, char)> = sentence.char_indices().collect();
    let n = chars.len();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < n {
        let (pos, ch) = chars[i];
        if ch.is_whitespace() {
            i += 1;
            continue;
        }
        if ch.is_alphanumeric() {
            let start = pos;
            let mut j = i + 1;
            loop {
                if j < n {
                    let c = chars[j].1;
                    if c.is_alphanumeric() {
                        j += 1;
                        continue;
                    }
                    if (c == '\'' || c == '\u{2019}') && j + 1 < n && chars[j + 1].1.is_alphanumeric()
                    {
                        j += 2;
                        continue;
                    }
                }
                break;
            }
            let end = if j < n { chars[j].0 } else { sentence.len() };
            tokens.push(Token {
                text: sentence[start..end].to_lowercase(),
                start,
            });
            i = j;
        } else {
            let end = pos + ch.len_utf8();
            tokens.push(Token {
                text: sentence[pos..end].to_string(),
                start: pos,
            });
            i += 1;
        }
    }
    tokens
}

// ---------------------------------------------------------------------------
// entity spotting and relation matching
// ---------------------------------------------------------------------------

/// Greedy longest-match scan over normalized tokens. At each position the
/// longest gazetteer name wins and the scan continues after it, so spans
/// never overlap.
pub fn spot_entities(norm_tokens: &[String], gazetteer: &Gazetteer) -> Vec<EntitySpan> {
    let max_n = gazetteer.max_name_tokens().min(MAX_NAME_TOKENS);
    let mut spans = Vec::new();
    let mut i = 0;
    while i < norm_tokens.len() {
        let mut matched = None;
        let hi = max_n.min(norm_tokens.len() - i);
        for n in (1..=hi).rev() {
            let key = norm_tokens[i..i + n].join(" ");
            if let Some(poi) = gazetteer.resolve(&key) {
                matched = Some((n, poi.id));
                break;
            }
        }
        match matched {
            Some((n, id)) => {
                spans.push(EntitySpan {
                    start: i,
                    end: i + n,
                    poi: id,
                });
                i += n;
            }
            None => i += 1,
        }
    }
    spans
}

#[derive(Debug, Clone, Copy)]
pub struct SentenceMatch {
    pub poi_a: u32,
    pub relation: usize,
    pub poi_b: u32,
    pub span_start: usize,
}

/// Applies the gap rule to each adjacent entity pair of a sentence.
pub fn match_relations(
    norm_tokens: &[String],
    entities: &[EntitySpan],
    lexicon: &RelationLexicon,
) -> Vec<SentenceMatch> {
    let mut matches = Vec::new();
    for pair in entities.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if a.poi == b.poi {
            continue;
        }
        let gap = &norm_tokens[a.end..b.start];
        if gap.len() > MAX_GAP_TOKENS {
            continue;
        }
        if let Some(relation) = find_relation_in_gap(gap, lexicon) {
            matches.push(SentenceMatch {
                poi_a: a.poi,
                relation,
                poi_b: b.poi,
                span_start: a.start,
            });
        }
    }
    matches
}

/// Finds the relation phrase for a gap, if the gap qualifies: the earliest
/// matching position wins, longer phrases beat shorter ones at the same
/// position, and every token before the phrase must be permissible filler.
fn find_relation_in_gap(gap: &[String], lexicon: &RelationLexicon) -> Option<usize> {
    for pos in 0..gap.len() {
        if pos > 0 && !lexicon.is_allowed_gap_filler(&gap[pos - 1]) {
            return None;
        }
        let mut best: Option<(usize, usize)> = None;
        for (k, relation) in lexicon.relations().iter().enumerate() {
            let t = &relation.tokens;
            if pos + t.len() <= gap.len() && gap[pos..pos + t.len()] == t[..] {
                match best {
                    Some((len, _)) if t.len() <= len => {}
                    _ => best = Some((t.len(), k)),
                }
            }
        }
        if let Some((_, k)) = best {
            return Some(k);
        }
    }
    None
}

// ---------------------------------------------------------------------------
// document and corpus level
// ---------------------------------------------------------------------------

pub fn extract_document(
    doc: &Document,
    gazetteer: &Gazetteer,
    lexicon: &RelationLexicon,
) -> Vec<RelationTriplet> {
    let mut triplets = Vec::new();
    for (sentence_index, sentence) in segment_sentences(&doc.text).iter().enumerate() {
        let tokens = tokenize(sentence);
        let norm: Vec<String> = tokens.iter().map(|t| normalize_name(&t.text)).collect();
        let entities = spot_entities(&norm, gazetteer);
        for m in match_relations(&norm, &entities, lexicon) {
            triplets.push(RelationTriplet {
                poi_a: m.poi_a,
                relation: m.relation,
                poi_b: m.poi_b,
                doc_id: doc.id.clone(),
                sentence_index,
                span_start: m.span_start,
            });
        }
    }
    triplets
}

/// Runs extraction over all documents (in parallel), then sorts by
/// `(doc_id, sentence_index, span_start)` and drops exact duplicates, so the
/// result is independent of scheduling.
pub fn extract_corpus(
    docs: &[Document],
    gazetteer: &Gazetteer,
    lexicon: &RelationLexicon,
) -> Vec<RelationTriplet> {
    let mut triplets: Vec<RelationTriplet> = docs
        .par_iter()
        .map(|d| extract_document(d, gazetteer, lexicon))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    triplets.sort_by(|x, y| {
        (
            &x.doc_id,
            x.sentence_index,
            x.span_start,
            x.poi_a,
            x.relation,
            x.poi_b,
        )
            .cmp(&(
                &y.doc_id,
                y.sentence_index,
                y.span_start,
                y.poi_a,
                y.relation,
                y.poi_b,
            ))
    });
    let mut seen = BTreeSet::new();
    triplets.retain(|t| {
        seen.insert((
            t.doc_id.clone(),
            t.sentence_index,
            t.poi_a,
            t.relation,
            t.poi_b,
        ))
    });
    triplets
}

/// Loads a corpus from a JSONL file (`{"id": ..., "text": ...}` per line) or
/// from a directory of `.txt` files read in name order. Unreadable documents
/// are skipped with a warning; only an entirely unreadable corpus is an
/// error. Returns the documents and the number skipped.
pub fn load_corpus(path: &Path) -> Result<(Vec<Document>, usize)> {
    let mut docs = Vec::new();
    let mut skipped = 0usize;
    if path.is_dir() {
        let mut names: Vec<std::path::PathBuf> = std::fs::read_dir(path)
            .map_err(|e| PipelineError::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|ext| ext == "txt"))
            .collect();
        names.sort();
        for file in names {
            let id = file
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            match std::fs::read_to_string(&file) {
                Ok(text) if !text.trim().is_empty() => docs.push(Document { id, text }),
                Ok(_) => {
                    eprintln!("warning: skipping empty document {id}");
                    skipped += 1;
                }
                Err(e) => {
                    eprintln!("warning: skipping unreadable document {id}: {e}");
                    skipped += 1;
                }
            }
        }
    } else {
        let file = std::fs::File::open(path).map_err(|e| PipelineError::io(path, e))?;
        for (lineno, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| PipelineError::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<Document>(&line) {
                Ok(doc) if !doc.text.trim().is_empty() => docs.push(doc),
                Ok(doc) => {
                    eprintln!("warning: skipping empty document {}", doc.id);
                    skipped += 1;
                }
                Err(e) => {
                    eprintln!(
                        "warning: {}:{}: skipping malformed document: {e}",
                        path.display(),
                        lineno + 1
                    );
                    skipped += 1;
                }
            }
        }
    }
    if docs.is_empty() {
        return Err(PipelineError::Invalid(format!(
            "no readable documents in {}",
            path.display()
        )));
    }
    Ok((docs, skipped))
}

// ---------------------------------------------------------------------------
// triplet persistence
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct TripletRow {
    poi_a: String,
    relation: String,
    poi_b: String,
    doc_id: String,
    sentence_index: usize,
}

pub fn write_triplets(
    path: &Path,
    triplets: &[RelationTriplet],
    gazetteer: &Gazetteer,
    lexicon: &RelationLexicon,
) -> Result<()> {
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| PipelineError::io(path, e))?,
    );
    for t in triplets {
        let row = TripletRow {
            poi_a: gazetteer.poi(t.poi_a).name.clone(),
            relation: lexicon.relation(t.relation).surface.clone(),
            poi_b: gazetteer.poi(t.poi_b).name.clone(),
            doc_id: t.doc_id.clone(),
            sentence_index: t.sentence_index,
        };
        serde_json::to_writer(&mut out, &row).map_err(|e| PipelineError::Invalid(e.to_string()))?;
        out.write_all(b"\n").map_err(|e| PipelineError::io(path, e))?;
    }
    Ok(())
}

pub fn read_triplets(
    path: &Path,
    gazetteer: &Gazetteer,
    lexicon: &RelationLexicon,
) -> Result<Vec<RelationTriplet>> {
    let file = std::fs::File::open(path).map_err(|e| PipelineError::io(path, e))?;
    let mut triplets = Vec::new();
    for (lineno, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| PipelineError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row: TripletRow = serde_json::from_str(&line).map_err(|e| PipelineError::Parse {
            path: path.to_path_buf(),
            line: lineno + 1,
            msg: e.to_string(),
        })?;
        let resolve = |name: &str| -> Result<u32> {
            gazetteer
                .resolve(&normalize_name(name))
                .map(|p| p.id)
                .ok_or_else(|| PipelineError::Parse {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    msg: format!("unknown place name {name:?}"),
                })
        };
        let relation = lexicon
            .index_of(&row.relation)
            .ok_or_else(|| PipelineError::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                msg: format!("unknown relation {:?}", row.relation),
            })?;
        triplets.push(RelationTriplet {
            poi_a: resolve(&row.poi_a)?,
            relation,
            poi_b: resolve(&row.poi_b)?,
            doc_id: row.doc_id,
            sentence_index: row.sentence_index,
            span_start: 0,
        });
    }
    Ok(triplets)
}
