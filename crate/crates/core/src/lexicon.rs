//! Relation phrases and the small closed word lists used by the extractor.
//!
//! The relation lexicon is ordered; a relation's position in the file is its
//! index everywhere downstream (feature sets, model files, scores).

use std::collections::HashSet;
use std::path::Path;

use crate::error::{PipelineError, Result};
use crate::gazetteer::normalize_name;

/// Words allowed between two entities before the relation phrase, besides
/// linking verbs: articles and a few intensifying adverbs.
pub const FILLER_WORDS: [&str; 7] = ["the", "a", "an", "just", "right", "very", "quite"];

pub const DEFAULT_RELATIONS: [&str; 6] = ["near", "next to", "close to", "at", "in", "close by"];
pub const DEFAULT_VERBS: [&str; 6] = ["is", "was", "lies", "sits", "stands", "located"];

#[derive(Debug, Clone)]
pub struct Relation {
    /// Surface form as written in the lexicon file.
    pub surface: String,
    /// Normalized token sequence matched against sentence tokens.
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RelationLexicon {
    relations: Vec<Relation>,
    verbs: HashSet<String>,
    filler: HashSet<String>,
}

impl RelationLexicon {
    pub fn new(relation_phrases: &[&str], verbs: &[&str]) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut relations = Vec::new();
        for phrase in relation_phrases {
            let normalized = normalize_name(phrase);
            if normalized.is_empty() || !seen.insert(normalized.clone()) {
                continue;
            }
            relations.push(Relation {
                surface: phrase.trim().to_string(),
                tokens: normalized.split(' ').map(str::to_string).collect(),
            });
        }
        if relations.is_empty() {
            return Err(PipelineError::Config(
                "relation lexicon is empty".to_string(),
            ));
        }
        Ok(RelationLexicon {
            relations,
            verbs: verbs.iter().map(|v| normalize_name(v)).collect(),
            filler: FILLER_WORDS.iter().map(|w| w.to_string()).collect(),
        })
    }

    pub fn default_set() -> Self {
        Self::new(&DEFAULT_RELATIONS, &DEFAULT_VERBS).expect("default lexicon is non-empty")
    }

    /// Loads relation phrases and linking verbs from two line-oriented files
    /// (`#` starts a comment line in both).
    pub fn load(relations_path: &Path, verbs_path: &Path) -> Result<Self> {
        let relations = read_phrase_lines(relations_path)?;
        let verbs = read_phrase_lines(verbs_path)?;
        let relation_refs: Vec<&str> = relations.iter().map(String::as_str).collect();
        let verb_refs: Vec<&str> = verbs.iter().map(String::as_str).collect();
        Self::new(&relation_refs, &verb_refs)
    }

    /// Number of known relations; the normalizer in pair scoring.
    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn relation(&self, index: usize) -> &Relation {
        &self.relations[index]
    }

    pub fn index_of(&self, surface: &str) -> Option<usize> {
        let needle = normalize_name(surface);
        self.relations
            .iter()
            .position(|r| r.tokens.join(" ") == needle)
    }

    pub fn is_verb(&self, token: &str) -> bool {
        self.verbs.contains(token)
    }

    /// True for tokens tolerated between the first entity and the relation
    /// phrase: linking verbs, articles, a few adverbs.
    pub fn is_allowed_gap_filler(&self, token: &str) -> bool {
        self.verbs.contains(token) || self.filler.contains(token)
    }
}

fn read_phrase_lines(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    Ok(text
        .lines()
        .map(|l| l.trim_end_matches('\r').trim())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_order_defines_relation_indices() {
        let lex = RelationLexicon::default_set();
        assert_eq!(lex.len(), 6);
        assert_eq!(lex.index_of("near"), Some(0));
        assert_eq!(lex.index_of("next to"), Some(1));
        assert_eq!(lex.index_of("close by"), Some(5));
        assert_eq!(lex.index_of("beside"), None);
        assert_eq!(lex.relation(2).tokens, vec!["close", "to"]);
    }

    #[test]
    fn duplicate_phrases_keep_first_position() {
        let lex = RelationLexicon::new(&["near", "NEAR", "at"], &["is"]).unwrap();
        assert_eq!(lex.len(), 2);
        assert_eq!(lex.index_of("at"), Some(1));
    }

    #[test]
    fn gap_filler_covers_verbs_articles_and_adverbs() {
        let lex = RelationLexicon::default_set();
        for tok in ["is", "lies", "the", "right", "very"] {
            assert!(lex.is_allowed_gap_filler(tok), "{tok}");
        }
        for tok in ["invested", "dollars", "overlooks", "10"] {
            assert!(!lex.is_allowed_gap_filler(tok), "{tok}");
        }
    }

    #[test]
    fn empty_lexicon_is_rejected() {
        assert!(RelationLexicon::new(&[], &["is"]).is_err());
    }
}
