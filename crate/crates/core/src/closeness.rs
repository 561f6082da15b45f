//! Pair scoring: how strongly a pair of places is tied together by the
//! statements written about it.
//!
//! For every observed pair, the relations seen for that pair give a prior,
//! the per-relation mixtures give likelihoods of the pair's feature vector,
//! and Bayes' rule turns those into posteriors. A pair's weight is the sum
//! of its posteriors, each normalized by the best posterior that relation
//! achieves anywhere, scaled by the lexicon size. The scored pairs form an
//! undirected relationship graph over the places.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{PipelineError, Result};
use crate::features::FeatureVector;
use crate::gazetteer::{normalize_name, Gazetteer};
use crate::lexicon::RelationLexicon;
use crate::mixture::RelationModel;

/// All statements observed about one unordered pair of places. The vector
/// is measured from the lower to the higher id; `relations` is a multiset
/// of lexicon indices, sorted.
#[derive(Debug, Clone)]
pub struct PairObservation {
    pub poi_a: u32,
    pub poi_b: u32,
    pub relations: Vec<usize>,
    pub vector: FeatureVector,
}

#[derive(Debug, Clone)]
pub struct ScoredPair {
    pub poi_a: u32,
    pub poi_b: u32,
    /// Posterior per distinct relation of this pair.
    pub posteriors: BTreeMap<usize, f64>,
    pub w: f64,
    pub vector: FeatureVector,
    pub relations: Vec<usize>,
}

/// Relative frequency of each distinct relation within the pair's multiset.
pub fn relation_priors(relations: &[usize]) -> BTreeMap<usize, f64> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &r in relations {
        *counts.entry(r).or_default() += 1;
    }
    let total = relations.len() as f64;
    counts
        .into_iter()
        .map(|(k, c)| (k, c as f64 / total))
        .collect()
}

/// Normalizes log-space scores `ln(prior) + ln(likelihood)` into posteriors.
/// Shifting all scores by a constant leaves the result unchanged.
pub fn posteriors_from_log_scores(scores: &[(usize, f64)]) -> BTreeMap<usize, f64> {
    let max = scores
        .iter()
        .map(|(_, s)| *s)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        // every score underflowed; fall back to a uniform posterior
        let u = 1.0 / scores.len() as f64;
        return scores.iter().map(|(k, _)| (*k, u)).collect();
    }
    let unnormalized: Vec<(usize, f64)> = scores
        .iter()
        .map(|(k, s)| (*k, (s - max).exp()))
        .collect();
    let total: f64 = unnormalized.iter().map(|(_, e)| e).sum();
    unnormalized
        .into_iter()
        .map(|(k, e)| (k, e / total))
        .collect()
}

/// Bayes posteriors over the pair's distinct relations, using each
/// relation's trained density at the pair's feature vector.
pub fn pair_posteriors(
    pair: &PairObservation,
    models: &BTreeMap<usize, RelationModel>,
) -> BTreeMap<usize, f64> {
    let priors = relation_priors(&pair.relations);
    let scores: Vec<(usize, f64)> = priors
        .iter()
        .map(|(&k, &prior)| {
            let model = models
                .get(&k)
                .expect("pair scoring requires a model for every observed relation");
            (k, prior.ln() + model.log_density(pair.vector))
        })
        .collect();
    posteriors_from_log_scores(&scores)
}

/// Best posterior each relation achieves across all pairs observing it.
pub fn posterior_maxima(
    posteriors_per_pair: &[BTreeMap<usize, f64>],
) -> BTreeMap<usize, f64> {
    let mut maxima: BTreeMap<usize, f64> = BTreeMap::new();
    for posteriors in posteriors_per_pair {
        for (&k, &p) in posteriors {
            let entry = maxima.entry(k).or_insert(f64::NEG_INFINITY);
            if p > *entry {
                *entry = p;
            }
        }
    }
    maxima
}

/// The pair weight: mean over the lexicon of the pair's max-normalized
/// posteriors. Lies in `[0, 1]`.
pub fn closeness_score(
    posteriors: &BTreeMap<usize, f64>,
    maxima: &BTreeMap<usize, f64>,
    lexicon_size: usize,
) -> f64 {
    let mut sum = 0.0;
    for (k, &p) in posteriors {
        let max = maxima.get(k).copied().unwrap_or(0.0);
        if max > 0.0 {
            sum += p / max;
        }
    }
    sum / lexicon_size as f64
}

/// Scores every pair. Observations of relations without a trained model are
/// dropped (with a warning per relation); pairs left with no usable relation
/// are skipped entirely.
pub fn score_pairs(
    pairs: &[PairObservation],
    models: &BTreeMap<usize, RelationModel>,
    lexicon: &RelationLexicon,
) -> Vec<ScoredPair> {
    let mut missing_warned: BTreeSet<usize> = BTreeSet::new();
    let mut usable: Vec<PairObservation> = Vec::new();
    for pair in pairs {
        let kept: Vec<usize> = pair
            .relations
            .iter()
            .copied()
            .filter(|k| {
                let have = models.contains_key(k);
                if !have && missing_warned.insert(*k) {
                    eprintln!(
                        "warning: no model for relation {:?}; its observations are ignored",
                        lexicon.relation(*k).surface
                    );
                }
                have
            })
            .collect();
        if kept.is_empty() {
            eprintln!(
                "warning: pair ({}, {}) has no modelled relation, skipping",
                pair.poi_a, pair.poi_b
            );
            continue;
        }
        usable.push(PairObservation {
            relations: kept,
            ..pair.clone()
        });
    }

    let posteriors_per_pair: Vec<BTreeMap<usize, f64>> = usable
        .iter()
        .map(|p| pair_posteriors(p, models))
        .collect();
    let maxima = posterior_maxima(&posteriors_per_pair);

    usable
        .into_iter()
        .zip(posteriors_per_pair)
        .map(|(pair, posteriors)| {
            let w = closeness_score(&posteriors, &maxima, lexicon.len());
            ScoredPair {
                poi_a: pair.poi_a,
                poi_b: pair.poi_b,
                posteriors,
                w,
                vector: pair.vector,
                relations: pair.relations,
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// relationship graph
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct HEdge {
    pub poi_a: u32,
    pub poi_b: u32,
    pub w: f64,
    pub distance_m: f64,
    pub relations: Vec<usize>,
}

/// Undirected graph of scored pairs, edges sorted by `(poi_a, poi_b)`.
#[derive(Debug, Clone, Default)]
pub struct RelationshipGraph {
    pub edges: Vec<HEdge>,
}

impl RelationshipGraph {
    pub fn node_ids(&self) -> BTreeSet<u32> {
        self.edges
            .iter()
            .flat_map(|e| [e.poi_a, e.poi_b])
            .collect()
    }
}

pub fn build_relationship_graph(scored: &[ScoredPair]) -> RelationshipGraph {
    let mut edges: Vec<HEdge> = scored
        .iter()
        .map(|s| HEdge {
            poi_a: s.poi_a,
            poi_b: s.poi_b,
            w: s.w,
            distance_m: s.vector.distance_m,
            relations: s.relations.clone(),
        })
        .collect();
    edges.sort_by_key(|e| (e.poi_a, e.poi_b));
    RelationshipGraph { edges }
}

#[derive(Serialize, Deserialize)]
struct HEdgeRow {
    poi_i: String,
    poi_j: String,
    w: f64,
    d_m: f64,
    relations: Vec<String>,
}

pub fn write_relationship_graph(
    path: &Path,
    graph: &RelationshipGraph,
    gazetteer: &Gazetteer,
    lexicon: &RelationLexicon,
) -> Result<()> {
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| PipelineError::io(path, e))?,
    );
    for e in &graph.edges {
        let row = HEdgeRow {
            poi_i: gazetteer.poi(e.poi_a).name.clone(),
            poi_j: gazetteer.poi(e.poi_b).name.clone(),
            w: e.w,
            d_m: e.distance_m,
            relations: e
                .relations
                .iter()
                .map(|&k| lexicon.relation(k).surface.clone())
                .collect(),
        };
        serde_json::to_writer(&mut out, &row).map_err(|e| PipelineError::Invalid(e.to_string()))?;
        out.write_all(b"\n").map_err(|e| PipelineError::io(path, e))?;
    }
    Ok(())
}

pub fn read_relationship_graph(
    path: &Path,
    gazetteer: &Gazetteer,
    lexicon: &RelationLexicon,
) -> Result<RelationshipGraph> {
    let file = std::fs::File::open(path).map_err(|e| PipelineError::io(path, e))?;
    let mut edges = Vec::new();
    for (lineno, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| PipelineError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row: HEdgeRow = serde_json::from_str(&line).map_err(|e| PipelineError::Parse {
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
        let mut relations = Vec::new();
        for surface in &row.relations {
            relations.push(lexicon.index_of(surface).ok_or_else(|| {
                PipelineError::Parse {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    msg: format!("unknown relation {surface:?}"),
                }
            })?);
        }
        edges.push(HEdge {
            poi_a: resolve(&row.poi_i)?,
            poi_b: resolve(&row.poi_j)?,
            w: row.w,
            distance_m: row.d_m,
            relations,
        });
    }
    edges.sort_by_key(|e| (e.poi_a, e.poi_b));
    Ok(RelationshipGraph { edges })
}
