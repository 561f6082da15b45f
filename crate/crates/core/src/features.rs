//! Turns extracted triplets into 2-D feature vectors: straight-line distance
//! in metres and compass orientation in degrees, measured from the first
//! place of the triplet to the second.
//!
//! Two groupings are produced from the same pass. Per-relation sets keep one
//! vector per triplet in extraction order and feed model training. Per-pair
//! observations merge both orientations of a pair under the lower-id-first
//! direction and carry the multiset of relations seen for that pair; they
//! feed the scoring stage.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::closeness::PairObservation;
use crate::error::{PipelineError, Result};
use crate::extract::RelationTriplet;
use crate::gazetteer::{normalize_name, Gazetteer};
use crate::geo::{self, Coord, CoordMode};
use crate::lexicon::RelationLexicon;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub distance_m: f64,
    pub orientation_deg: f64,
}

/// One triplet's worth of features, tagged with the pair it came from.
#[derive(Debug, Clone)]
pub struct FeatureRow {
    pub relation: usize,
    pub vector: FeatureVector,
    pub poi_a: u32,
    pub poi_b: u32,
}

#[derive(Debug, Clone)]
pub struct FeatureExtraction {
    /// Per-triplet rows in triplet order.
    pub rows: Vec<FeatureRow>,
    /// Per-pair observations, sorted by `(poi_a, poi_b)`.
    pub pairs: Vec<PairObservation>,
    /// Triplets dropped because the two places share coordinates.
    pub skipped: usize,
}

pub fn feature_vector(mode: CoordMode, from: Coord, to: Coord) -> Result<FeatureVector> {
    let orientation_deg = geo::bearing(mode, from, to)?;
    Ok(FeatureVector {
        distance_m: geo::distance(mode, from, to),
        orientation_deg,
    })
}

pub fn build_features(
    triplets: &[RelationTriplet],
    gazetteer: &Gazetteer,
    mode: CoordMode,
) -> FeatureExtraction {
    let mut rows = Vec::new();
    let mut skipped = 0usize;
    let mut relation_multisets: BTreeMap<(u32, u32), Vec<usize>> = BTreeMap::new();

    for t in triplets {
        let a = gazetteer.poi(t.poi_a);
        let b = gazetteer.poi(t.poi_b);
        match feature_vector(mode, a.coord, b.coord) {
            Ok(vector) => {
                rows.push(FeatureRow {
                    relation: t.relation,
                    vector,
                    poi_a: t.poi_a,
                    poi_b: t.poi_b,
                });
                let key = (t.poi_a.min(t.poi_b), t.poi_a.max(t.poi_b));
                relation_multisets.entry(key).or_default().push(t.relation);
            }
            Err(_) => {
                eprintln!(
                    "warning: dropping triplet ({}, {}): coincident coordinates",
                    a.name, b.name
                );
                skipped += 1;
            }
        }
    }

    let mut pairs = Vec::new();
    for ((lo, hi), mut relations) in relation_multisets {
        relations.sort_unstable();
        let vector = feature_vector(mode, gazetteer.poi(lo).coord, gazetteer.poi(hi).coord)
            .expect("coincident pairs were dropped above");
        pairs.push(PairObservation {
            poi_a: lo,
            poi_b: hi,
            relations,
            vector,
        });
    }

    FeatureExtraction {
        rows,
        pairs,
        skipped,
    }
}

/// Groups per-triplet vectors by relation index for training.
pub fn sets_by_relation(rows: &[FeatureRow]) -> BTreeMap<usize, Vec<FeatureVector>> {
    let mut sets: BTreeMap<usize, Vec<FeatureVector>> = BTreeMap::new();
    for row in rows {
        sets.entry(row.relation).or_default().push(row.vector);
    }
    sets
}

pub fn write_features_csv(
    path: &Path,
    rows: &[FeatureRow],
    gazetteer: &Gazetteer,
    lexicon: &RelationLexicon,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(["relation", "distance_m", "orientation_deg", "poi_a", "poi_b"])
        .map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record([
            lexicon.relation(row.relation).surface.as_str(),
            &row.vector.distance_m.to_string(),
            &row.vector.orientation_deg.to_string(),
            gazetteer.poi(row.poi_a).name.as_str(),
            gazetteer.poi(row.poi_b).name.as_str(),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| PipelineError::io(path, e))?;
    Ok(())
}

pub fn read_features_csv(
    path: &Path,
    gazetteer: &Gazetteer,
    lexicon: &RelationLexicon,
) -> Result<Vec<FeatureRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let parse_err = |msg: String| PipelineError::Parse {
            path: path.to_path_buf(),
            line: i + 2,
            msg,
        };
        if record.len() != 5 {
            return Err(parse_err(format!("expected 5 columns, found {}", record.len())));
        }
        let relation = lexicon
            .index_of(&record[0])
            .ok_or_else(|| parse_err(format!("unknown relation {:?}", &record[0])))?;
        let distance_m: f64 = record[1]
            .parse()
            .map_err(|_| parse_err(format!("bad distance {:?}", &record[1])))?;
        let orientation_deg: f64 = record[2]
            .parse()
            .map_err(|_| parse_err(format!("bad orientation {:?}", &record[2])))?;
        let resolve = |name: &str| {
            gazetteer
                .resolve(&normalize_name(name))
                .map(|p| p.id)
                .ok_or_else(|| parse_err(format!("unknown place name {name:?}")))
        };
        rows.push(FeatureRow {
            relation,
            vector: FeatureVector {
                distance_m,
                orientation_deg,
            },
            poi_a: resolve(&record[3])?,
            poi_b: resolve(&record[4])?,
        });
    }
    Ok(rows)
}

fn csv_error(path: &Path, e: csv::Error) -> PipelineError {
    PipelineError::Invalid(format!("{}: {e}", path.display()))
}
