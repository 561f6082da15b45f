//! Experimental harness: photo-derived vertex popularity, seeded start/target
//! sampling, and the two evaluation protocols.
//!
//! Setting i sweeps the weight scaling factor alpha over pairs whose
//! straight-line distance is a fixed fraction band of the network extent.
//! Setting ii fixes alpha at 1 and varies the distance band over five
//! brackets. Both report per-pair raw rows plus per-configuration means, and
//! both are bit-reproducible for a fixed seed.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write as _};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::closeness::RelationshipGraph;
use crate::error::{PipelineError, Result};
use crate::geo::{self, Coord, CoordMode, EARTH_RADIUS_M};
use crate::network::{enrich, RoadGraph};
use crate::routing::{dij_g, dij_g_star, dij_h_star, RoutePath, RouteResult};

/// Vertices within this straight-line distance of a photo are credited.
pub const PHOTO_RADIUS_M: f64 = 20.0;

/// Upper bound on rejection-sampling draws before giving up on a bracket.
pub const MAX_SAMPLE_DRAWS: u64 = 1_000_000;

#[derive(Debug, Clone)]
pub struct Photo {
    pub id: String,
    pub coord: Coord,
}

/// Loads a photos TSV: `id, lat, lon`, `#` comments allowed.
pub fn load_photos(path: &Path, mode: CoordMode) -> Result<Vec<Photo>> {
    let file = File::open(path).map_err(|e| PipelineError::io(path, e))?;
    let mut photos = Vec::new();
    for (line_no, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| PipelineError::io(path, e))?;
        let line_no = line_no + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(PipelineError::Parse {
                path: path.to_path_buf(),
                line: line_no,
                msg: format!("expected 3 tab-separated fields, got {}", fields.len()),
            });
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim().parse::<f64>().map_err(|_| PipelineError::Parse {
                path: path.to_path_buf(),
                line: line_no,
                msg: format!("invalid coordinate {s:?}"),
            })
        };
        let lat = parse(fields[1])?;
        let lon = parse(fields[2])?;
        if !lat.is_finite() || !lon.is_finite() {
            return Err(PipelineError::Parse {
                path: path.to_path_buf(),
                line: line_no,
                msg: "non-finite coordinate".into(),
            });
        }
        if mode == CoordMode::Geodesic && (lat.abs() > 90.0 || lon.abs() > 180.0) {
            return Err(PipelineError::Parse {
                path: path.to_path_buf(),
                line: line_no,
                msg: format!("coordinate ({lat}, {lon}) out of range"),
            });
        }
        photos.push(Photo {
            id: fields[0].trim().to_string(),
            coord: Coord { lat, lon },
        });
    }
    Ok(photos)
}

pub fn write_photos_tsv(path: &Path, photos: &[Photo]) -> Result<()> {
    let file = File::create(path).map_err(|e| PipelineError::io(path, e))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "# id\tlat\tlon").map_err(|e| PipelineError::io(path, e))?;
    for photo in photos {
        writeln!(out, "{}\t{}\t{}", photo.id, photo.coord.lat, photo.coord.lon)
            .map_err(|e| PipelineError::io(path, e))?;
    }
    Ok(())
}

/// Per-vertex photo counts, indexed by internal vertex index.
#[derive(Debug, Clone)]
pub struct PopularityIndex {
    counts: Vec<u32>,
}

impl PopularityIndex {
    pub fn count(&self, vertex: usize) -> u32 {
        self.counts[vertex]
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }
}

fn project(mode: CoordMode, c: Coord, cos_ref: f64) -> (f64, f64) {
    match mode {
        CoordMode::Planar => (c.lon, c.lat),
        CoordMode::Geodesic => (
            EARTH_RADIUS_M * c.lon.to_radians() * cos_ref,
            EARTH_RADIUS_M * c.lat.to_radians(),
        ),
    }
}

/// Counts, for every vertex, the photos within `radius` metres. A photo close
/// to several vertices credits all of them.
///
/// Vertices are bucketed on a square grid of `radius` cell size; each photo
/// only examines its own and the eight surrounding cells before the exact
/// distance test, so construction is near linear in vertices plus photos.
pub fn build_popularity_index(
    graph: &RoadGraph,
    photos: &[Photo],
    radius: f64,
) -> PopularityIndex {
    let mode = graph.mode();
    let cos_ref = match mode {
        CoordMode::Planar => 1.0,
        CoordMode::Geodesic => {
            let mean_lat: f64 = graph
                .vertices()
                .iter()
                .map(|v| v.coord.lat)
                .sum::<f64>()
                / graph.vertex_count() as f64;
            mean_lat.to_radians().cos()
        }
    };
    let cell = |x: f64, y: f64| -> (i64, i64) {
        ((x / radius).floor() as i64, (y / radius).floor() as i64)
    };

    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (idx, vertex) in graph.vertices().iter().enumerate() {
        let (x, y) = project(mode, vertex.coord, cos_ref);
        buckets.entry(cell(x, y)).or_default().push(idx);
    }

    let mut counts = vec![0u32; graph.vertex_count()];
    for photo in photos {
        let (px, py) = project(mode, photo.coord, cos_ref);
        let (cx, cy) = cell(px, py);
        for dx in -1..=1 {
            for dy in -1..=1 {
                let Some(list) = buckets.get(&(cx + dx, cy + dy)) else {
                    continue;
                };
                for &idx in list {
                    let d = geo::distance(mode, photo.coord, graph.vertex(idx).coord);
                    if d <= radius {
                        counts[idx] += 1;
                    }
                }
            }
        }
    }
    PopularityIndex { counts }
}

/// Sum of vertex popularity over a path, each vertex counted once even when
/// the path revisits it.
pub fn path_popularity(index: &PopularityIndex, path: &RoutePath) -> u64 {
    let distinct: BTreeSet<usize> = path.vertices.iter().copied().collect();
    distinct.iter().map(|&v| index.count(v) as u64).sum()
}

/// Draws start/target vertex pairs whose straight-line distance falls in
/// `[lo_frac, hi_frac]` of the network extent, by seeded rejection sampling.
pub fn sample_pairs(
    graph: &RoadGraph,
    lo_frac: f64,
    hi_frac: f64,
    n_pairs: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(usize, usize)>> {
    let extent = graph.extent_m();
    let lo = lo_frac * extent;
    let hi = hi_frac * extent;
    let n = graph.vertex_count();
    let mut pairs = Vec::with_capacity(n_pairs);
    let mut draws = 0u64;
    while pairs.len() < n_pairs {
        draws += 1;
        if draws > MAX_SAMPLE_DRAWS {
            return Err(PipelineError::SamplingExhausted { draws: draws - 1 });
        }
        let s = rng.gen_range(0..n);
        let t = rng.gen_range(0..n);
        if s == t {
            continue;
        }
        let d = geo::distance(graph.mode(), graph.vertex(s).coord, graph.vertex(t).coord);
        if d >= lo && d <= hi {
            pairs.push((s, t));
        }
    }
    Ok(pairs)
}

/// Positive when the candidate path is more enriched (lower er) than the
/// baseline.
pub fn enrichment_gain(baseline_er: f64, candidate_er: f64) -> f64 {
    (baseline_er - candidate_er) / baseline_er * 100.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Setting {
    I,
    II,
}

impl std::fmt::Display for Setting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Setting::I => "i",
            Setting::II => "ii",
        })
    }
}

impl std::str::FromStr for Setting {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "i" => Ok(Setting::I),
            "ii" => Ok(Setting::II),
            other => Err(PipelineError::Config(format!(
                "unknown setting {other:?}, expected i or ii"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub n_pairs: usize,
    pub alpha_grid: Vec<f64>,
    pub beta: f64,
    /// Setting i distance band, as fractions of the network extent.
    pub extent_fraction: (f64, f64),
    /// Setting ii distance brackets, as fractions of the network extent.
    pub brackets: Vec<(f64, f64)>,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_pairs: 100,
            alpha_grid: vec![0.2, 0.4, 0.6, 0.8, 1.0],
            beta: 1.6,
            extent_fraction: (0.3, 0.5),
            brackets: vec![(0.1, 0.2), (0.2, 0.3), (0.3, 0.4), (0.4, 0.5), (0.5, 0.6)],
            seed: 42,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_pairs == 0 {
            return Err(PipelineError::Config("n_pairs must be positive".into()));
        }
        if self.beta <= 1.0 {
            return Err(PipelineError::Config(format!(
                "beta must exceed 1, got {}",
                self.beta
            )));
        }
        for &alpha in &self.alpha_grid {
            if !(0.0..=1.0).contains(&alpha) {
                return Err(PipelineError::Config(format!(
                    "alpha grid value {alpha} outside [0, 1]"
                )));
            }
        }
        let check_band = |lo: f64, hi: f64| -> Result<()> {
            if !(0.0 < lo && lo < hi && hi < 1.0) {
                return Err(PipelineError::Config(format!(
                    "distance band ({lo}, {hi}) must satisfy 0 < lo < hi < 1"
                )));
            }
            Ok(())
        };
        check_band(self.extent_fraction.0, self.extent_fraction.1)?;
        for &(lo, hi) in &self.brackets {
            check_band(lo, hi)?;
        }
        for pair in self.brackets.windows(2) {
            if pair[1].0 < pair[0].1 {
                return Err(PipelineError::Config(format!(
                    "brackets ({}, {}) and ({}, {}) overlap",
                    pair[0].0, pair[0].1, pair[1].0, pair[1].1
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalRow {
    pub setting: String,
    /// Alpha value (setting i) or distance bracket label (setting ii).
    pub param: String,
    pub alpha: f64,
    pub pair_index: usize,
    pub s: u32,
    pub t: u32,
    pub algorithm: String,
    pub length_m: f64,
    pub cost: f64,
    pub er: f64,
    pub popularity: u64,
    pub dlength_pct: f64,
    pub dpop_pct: f64,
    pub er_gain_pct: f64,
    pub fallback: bool,
}

#[derive(Debug, Clone)]
pub struct AggregateRow {
    pub setting: String,
    pub param: String,
    pub algorithm: String,
    pub alpha: f64,
    pub n_pairs: usize,
    pub mean_dlength_pct: f64,
    pub mean_dpop_pct: f64,
    pub mean_er_gain_pct: f64,
    pub status: String,
}

#[derive(Debug, Clone, Default)]
pub struct MetricsReport {
    pub raw: Vec<EvalRow>,
    pub aggregate: Vec<AggregateRow>,
}

const ALGORITHMS: [&str; 3] = ["dij-g", "dij-g-star", "dij-h-star"];

fn pair_rows(
    setting: Setting,
    param: &str,
    alpha: f64,
    pair_index: usize,
    endpoints: (u32, u32),
    index: &PopularityIndex,
    results: &[RouteResult; 3],
) -> Vec<EvalRow> {
    let base = &results[0];
    let base_pop = path_popularity(index, &base.path);
    results
        .iter()
        .map(|result| {
            let popularity = path_popularity(index, &result.path);
            EvalRow {
                setting: setting.to_string(),
                param: param.to_string(),
                alpha,
                pair_index,
                s: endpoints.0,
                t: endpoints.1,
                algorithm: result.algorithm.to_string(),
                length_m: result.length_m,
                cost: result.cost,
                er: result.er,
                popularity,
                dlength_pct: (result.length_m - base.length_m) / base.length_m * 100.0,
                dpop_pct: (popularity as f64 - base_pop as f64) / (base_pop.max(1) as f64)
                    * 100.0,
                er_gain_pct: enrichment_gain(base.er, result.er),
                fallback: result.fallback,
            }
        })
        .collect()
}

fn aggregate_group(
    raw: &[EvalRow],
    setting: Setting,
    param: &str,
    alpha: f64,
    n_pairs: usize,
) -> Vec<AggregateRow> {
    ALGORITHMS
        .iter()
        .map(|&algorithm| {
            let mut n = 0usize;
            let mut sums = [0.0f64; 3];
            for row in raw {
                if row.param == param && row.algorithm == algorithm {
                    n += 1;
                    sums[0] += row.dlength_pct;
                    sums[1] += row.dpop_pct;
                    sums[2] += row.er_gain_pct;
                }
            }
            let (means, status) = if n == 0 {
                ([f64::NAN; 3], "no_pairs".to_string())
            } else {
                (
                    [sums[0] / n as f64, sums[1] / n as f64, sums[2] / n as f64],
                    "ok".to_string(),
                )
            };
            AggregateRow {
                setting: setting.to_string(),
                param: param.to_string(),
                algorithm: algorithm.to_string(),
                alpha,
                n_pairs: if n == 0 { n_pairs } else { n },
                mean_dlength_pct: means[0],
                mean_dpop_pct: means[1],
                mean_er_gain_pct: means[2],
                status,
            }
        })
        .collect()
}

fn route_pairs(
    enriched: &crate::network::EnrichedGraph<'_>,
    relationships: &RelationshipGraph,
    pairs: &[(usize, usize)],
    beta: f64,
) -> Result<Vec<[RouteResult; 3]>> {
    let routed: Vec<Result<[RouteResult; 3]>> = pairs
        .par_iter()
        .map(|&(s, t)| {
            let g = dij_g(enriched, s, t)?;
            let gs = dij_g_star(enriched, s, t)?;
            let hs = dij_h_star(enriched, relationships, s, t, beta)?;
            Ok([g, gs, hs])
        })
        .collect();
    routed.into_iter().collect()
}

/// Setting i: one pair sample reused across the whole alpha grid.
pub fn run_setting_i(
    graph: &RoadGraph,
    relationships: &RelationshipGraph,
    poi_vertex: &std::collections::BTreeMap<u32, usize>,
    index: &PopularityIndex,
    config: &ExperimentConfig,
) -> Result<MetricsReport> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let pairs = sample_pairs(
        graph,
        config.extent_fraction.0,
        config.extent_fraction.1,
        config.n_pairs,
        &mut rng,
    )?;

    let mut report = MetricsReport::default();
    for &alpha in &config.alpha_grid {
        let enriched = enrich(graph, relationships, poi_vertex, alpha)?;
        let routed = route_pairs(&enriched, relationships, &pairs, config.beta)?;
        let param = alpha.to_string();
        let group_start = report.raw.len();
        for (pair_index, results) in routed.iter().enumerate() {
            let (s, t) = pairs[pair_index];
            report.raw.extend(pair_rows(
                Setting::I,
                &param,
                alpha,
                pair_index,
                (graph.vertex(s).id, graph.vertex(t).id),
                index,
                results,
            ));
        }
        report.aggregate.extend(aggregate_group(
            &report.raw[group_start..],
            Setting::I,
            &param,
            alpha,
            config.n_pairs,
        ));
    }
    Ok(report)
}

/// Setting ii: alpha fixed at 1, pairs drawn per distance bracket. A bracket
/// that cannot be filled is reported as `no_pairs` rather than fabricated.
pub fn run_setting_ii(
    graph: &RoadGraph,
    relationships: &RelationshipGraph,
    poi_vertex: &std::collections::BTreeMap<u32, usize>,
    index: &PopularityIndex,
    config: &ExperimentConfig,
) -> Result<MetricsReport> {
    config.validate()?;
    let alpha = 1.0;
    let enriched = enrich(graph, relationships, poi_vertex, alpha)?;
    let mut report = MetricsReport::default();
    for (bracket_index, &(lo, hi)) in config.brackets.iter().enumerate() {
        let param = format!(
            "{}-{}",
            (lo * 100.0).round() as i64,
            (hi * 100.0).round() as i64
        );
        let mut rng = ChaCha8Rng::seed_from_u64(
            config.seed.wrapping_add(1 + bracket_index as u64),
        );
        let pairs = match sample_pairs(graph, lo, hi, config.n_pairs, &mut rng) {
            Ok(pairs) => pairs,
            Err(PipelineError::SamplingExhausted { draws }) => {
                eprintln!(
                    "warning: bracket {param} exhausted after {draws} draws, reported as no_pairs"
                );
                report.aggregate.extend(aggregate_group(
                    &[],
                    Setting::II,
                    &param,
                    alpha,
                    0,
                ));
                continue;
            }
            Err(other) => return Err(other),
        };
        let routed = route_pairs(&enriched, relationships, &pairs, config.beta)?;
        let group_start = report.raw.len();
        for (pair_index, results) in routed.iter().enumerate() {
            let (s, t) = pairs[pair_index];
            report.raw.extend(pair_rows(
                Setting::II,
                &param,
                alpha,
                pair_index,
                (graph.vertex(s).id, graph.vertex(t).id),
                index,
                results,
            ));
        }
        report.aggregate.extend(aggregate_group(
            &report.raw[group_start..],
            Setting::II,
            &param,
            alpha,
            config.n_pairs,
        ));
    }
    Ok(report)
}

/// Aggregate CSV: one row per (parameter point, algorithm); empty mean cells
/// for groups without pairs.
pub fn write_report_csv(path: &Path, report: &MetricsReport) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| {
        PipelineError::Invalid(format!("cannot write {}: {e}", path.display()))
    })?;
    writer
        .write_record([
            "setting",
            "param",
            "algorithm",
            "alpha",
            "n_pairs",
            "mean_dlength_pct",
            "mean_dpop_pct",
            "mean_er_gain_pct",
            "status",
        ])
        .map_err(|e| PipelineError::Invalid(format!("csv write failed: {e}")))?;
    for row in &report.aggregate {
        let mean = |v: f64| -> String {
            if v.is_nan() {
                String::new()
            } else {
                v.to_string()
            }
        };
        writer
            .write_record([
                row.setting.clone(),
                row.param.clone(),
                row.algorithm.clone(),
                row.alpha.to_string(),
                row.n_pairs.to_string(),
                mean(row.mean_dlength_pct),
                mean(row.mean_dpop_pct),
                mean(row.mean_er_gain_pct),
                row.status.clone(),
            ])
            .map_err(|e| PipelineError::Invalid(format!("csv write failed: {e}")))?;
    }
    writer
        .flush()
        .map_err(|e| PipelineError::io(path, e))
}

/// Raw per-pair rows as JSONL, one row per (pair, algorithm).
pub fn write_rows_jsonl(path: &Path, report: &MetricsReport) -> Result<()> {
    let file = File::create(path).map_err(|e| PipelineError::io(path, e))?;
    let mut out = BufWriter::new(file);
    for row in &report.raw {
        let line = serde_json::to_string(row)
            .map_err(|e| PipelineError::Invalid(format!("row serialization failed: {e}")))?;
        writeln!(out, "{line}").map_err(|e| PipelineError::io(path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closeness::HEdge;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn planar(vertices: Vec<(u32, f64, f64)>, edges: Vec<(u32, u32, Option<f64>)>) -> RoadGraph {
        let vertices = vertices
            .into_iter()
            .map(|(id, x, y)| (id, Coord { lat: y, lon: x }))
            .collect();
        RoadGraph::from_parts(CoordMode::Planar, vertices, edges).unwrap()
    }

    fn photo(id: &str, x: f64, y: f64) -> Photo {
        Photo {
            id: id.into(),
            coord: Coord { lat: y, lon: x },
        }
    }

    #[test]
    fn photo_credits_all_vertices_within_radius() {
        let g = planar(
            vec![(0, 0.0, 0.0), (1, 25.0, 0.0), (2, 500.0, 500.0)],
            vec![(0, 1, None)],
        );
        // 10 m from vertex 0, 15 m from vertex 1, far from vertex 2.
        let index = build_popularity_index(&g, &[photo("a", 10.0, 0.0)], PHOTO_RADIUS_M);
        assert_eq!(index.count(0), 1);
        assert_eq!(index.count(1), 1);
        assert_eq!(index.count(2), 0);
    }

    #[test]
    fn photo_outside_radius_counts_nowhere() {
        let g = planar(vec![(0, 0.0, 0.0), (1, 100.0, 0.0)], vec![(0, 1, None)]);
        let index = build_popularity_index(&g, &[photo("a", 25.0, 0.0)], PHOTO_RADIUS_M);
        assert_eq!(index.counts(), &[0, 0]);
    }

    #[test]
    fn radius_boundary_is_inclusive() {
        let g = planar(vec![(0, 0.0, 0.0), (1, 1000.0, 0.0)], vec![(0, 1, None)]);
        let index = build_popularity_index(&g, &[photo("a", 20.0, 0.0)], PHOTO_RADIUS_M);
        assert_eq!(index.count(0), 1);
    }

    #[test]
    fn geodesic_index_uses_great_circle_distance() {
        let vertices = vec![
            (0, Coord { lat: 48.8600, lon: 2.3500 }),
            (1, Coord { lat: 48.8610, lon: 2.3500 }),
        ];
        let g = RoadGraph::from_parts(CoordMode::Geodesic, vertices, vec![(0, 1, None)]).unwrap();
        // About 11 m north of vertex 0, far from vertex 1.
        let near = Photo {
            id: "a".into(),
            coord: Coord { lat: 48.8601, lon: 2.3500 },
        };
        let index = build_popularity_index(&g, &[near], PHOTO_RADIUS_M);
        assert_eq!(index.count(0), 1);
        assert_eq!(index.count(1), 0);
    }

    #[test]
    fn path_popularity_counts_each_vertex_once() {
        let g = planar(
            vec![(0, 0.0, 0.0), (1, 30.0, 0.0), (2, 60.0, 0.0)],
            vec![(0, 1, None), (1, 2, None)],
        );
        let photos = vec![
            photo("a", 0.0, 5.0),
            photo("b", 0.0, -5.0),
            photo("c", 0.0, 10.0),
            photo("d", 60.0, 5.0),
            photo("e", 60.0, -5.0),
        ];
        let index = build_popularity_index(&g, &photos, PHOTO_RADIUS_M);
        let path = RoutePath {
            vertices: vec![0, 1, 2, 1, 0],
            edges: vec![0, 1, 1, 0],
        };
        assert_eq!(path_popularity(&index, &path), 5);
        let empty = RoutePath {
            vertices: vec![],
            edges: vec![],
        };
        assert_eq!(path_popularity(&index, &empty), 0);
    }

    proptest! {
        #[test]
        fn grid_bucketing_matches_exhaustive_counting(
            vertex_coords in proptest::collection::vec((0.0f64..200.0, 0.0f64..200.0), 1..12),
            photo_coords in proptest::collection::vec((-10.0f64..210.0, -10.0f64..210.0), 0..20),
        ) {
            let vertices: Vec<(u32, f64, f64)> = vertex_coords
                .iter()
                .enumerate()
                .map(|(i, &(x, y))| (i as u32, x, y))
                .collect();
            let edges = if vertices.len() > 1 {
                vec![(0, 1, Some(1.0))]
            } else {
                vec![]
            };
            let g = planar(vertices, edges);
            let photos: Vec<Photo> = photo_coords
                .iter()
                .enumerate()
                .map(|(i, &(x, y))| photo(&i.to_string(), x, y))
                .collect();
            let index = build_popularity_index(&g, &photos, PHOTO_RADIUS_M);
            for (idx, vertex) in g.vertices().iter().enumerate() {
                let expected = photos
                    .iter()
                    .filter(|p| geo::distance(CoordMode::Planar, p.coord, vertex.coord) <= PHOTO_RADIUS_M)
                    .count() as u32;
                prop_assert_eq!(index.count(idx), expected);
            }
        }

        #[test]
        fn adding_photos_never_decreases_counts(
            base in proptest::collection::vec((0.0f64..100.0, 0.0f64..100.0), 0..10),
            extra in proptest::collection::vec((0.0f64..100.0, 0.0f64..100.0), 0..10),
        ) {
            let g = planar(
                vec![(0, 0.0, 0.0), (1, 50.0, 50.0), (2, 100.0, 100.0)],
                vec![(0, 1, Some(1.0))],
            );
            let to_photos = |coords: &[(f64, f64)], offset: usize| -> Vec<Photo> {
                coords
                    .iter()
                    .enumerate()
                    .map(|(i, &(x, y))| photo(&(offset + i).to_string(), x, y))
                    .collect()
            };
            let before = build_popularity_index(&g, &to_photos(&base, 0), PHOTO_RADIUS_M);
            let mut all = to_photos(&base, 0);
            all.extend(to_photos(&extra, base.len()));
            let after = build_popularity_index(&g, &all, PHOTO_RADIUS_M);
            for v in 0..3 {
                prop_assert!(after.count(v) >= before.count(v));
            }
        }
    }

    #[test]
    fn sampled_pairs_respect_the_distance_band() {
        let g = planar(
            (0..11).map(|i| (i, i as f64 * 100.0, 0.0)).collect(),
            (0..10).map(|i| (i, i + 1, None)).collect(),
        );
        // Extent 1000 m; band 250..550 m.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pairs = sample_pairs(&g, 0.25, 0.55, 50, &mut rng).unwrap();
        assert_eq!(pairs.len(), 50);
        for &(s, t) in &pairs {
            let d = geo::distance(CoordMode::Planar, g.vertex(s).coord, g.vertex(t).coord);
            assert!((250.0..=550.0).contains(&d), "distance {d} out of band");
            assert_ne!(s, t);
        }
        let mut rng2 = ChaCha8Rng::seed_from_u64(7);
        let again = sample_pairs(&g, 0.25, 0.55, 50, &mut rng2).unwrap();
        assert_eq!(pairs, again);
    }

    #[test]
    fn impossible_band_exhausts_sampling() {
        let g = planar(
            vec![(0, 0.0, 0.0), (1, 100.0, 0.0)],
            vec![(0, 1, None)],
        );
        // Only pair distance is 100% of extent; band asks for 40..60%.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let err = sample_pairs(&g, 0.4, 0.6, 1, &mut rng).unwrap_err();
        assert!(matches!(err, PipelineError::SamplingExhausted { .. }));
    }

    #[test]
    fn enrichment_gain_hand_values() {
        assert_eq!(enrichment_gain(1.0, 0.5), 50.0);
        assert_eq!(enrichment_gain(0.7, 0.7), 0.0);
        assert!((enrichment_gain(0.8, 1.0) - -25.0).abs() < 1e-12);
    }

    fn eval_fixture() -> (RoadGraph, RelationshipGraph, BTreeMap<u32, usize>, Vec<Photo>) {
        let g = planar(
            (0..6).map(|i| (i, i as f64 * 100.0, 0.0)).collect(),
            (0..5).map(|i| (i, i + 1, None)).collect(),
        );
        let h = RelationshipGraph {
            edges: vec![HEdge {
                poi_a: 1,
                poi_b: 2,
                w: 0.5,
                distance_m: 200.0,
                relations: vec![0],
            }],
        };
        let mapping: BTreeMap<u32, usize> = [(1, 2), (2, 4)].into();
        let photos = vec![photo("a", 200.0, 5.0), photo("b", 300.0, -5.0)];
        (g, h, mapping, photos)
    }

    #[test]
    fn setting_i_report_is_consistent_and_reproducible() {
        let (g, h, mapping, photos) = eval_fixture();
        let index = build_popularity_index(&g, &photos, PHOTO_RADIUS_M);
        let config = ExperimentConfig {
            n_pairs: 4,
            alpha_grid: vec![0.0, 1.0],
            extent_fraction: (0.15, 0.85),
            seed: 11,
            ..ExperimentConfig::default()
        };
        let report = run_setting_i(&g, &h, &mapping, &index, &config).unwrap();
        assert_eq!(report.raw.len(), 2 * 4 * 3);
        assert_eq!(report.aggregate.len(), 2 * 3);

        for row in &report.raw {
            if row.algorithm == "dij-g" {
                assert_eq!(row.dlength_pct, 0.0);
                assert_eq!(row.dpop_pct, 0.0);
                assert_eq!(row.er_gain_pct, 0.0);
            }
            assert!(row.dlength_pct >= 0.0, "no algorithm beats dij-g on length");
        }

        // Means must be recomputable from the raw rows.
        for agg in &report.aggregate {
            let rows: Vec<&EvalRow> = report
                .raw
                .iter()
                .filter(|r| r.param == agg.param && r.algorithm == agg.algorithm)
                .collect();
            assert_eq!(rows.len(), agg.n_pairs);
            let mean: f64 =
                rows.iter().map(|r| r.dlength_pct).sum::<f64>() / rows.len() as f64;
            assert_eq!(mean, agg.mean_dlength_pct);
        }

        let again = run_setting_i(&g, &h, &mapping, &index, &config).unwrap();
        for (a, b) in report.raw.iter().zip(&again.raw) {
            assert_eq!(a.length_m, b.length_m);
            assert_eq!(a.cost, b.cost);
            assert_eq!(a.popularity, b.popularity);
        }
    }

    #[test]
    fn setting_ii_flags_empty_brackets() {
        let (g, h, mapping, photos) = eval_fixture();
        let index = build_popularity_index(&g, &photos, PHOTO_RADIUS_M);
        // Vertex distances are multiples of 100 m on a 500 m extent, so no
        // pair lands in the 225..275 m band of the second bracket.
        let config = ExperimentConfig {
            n_pairs: 3,
            brackets: vec![(0.3, 0.42), (0.45, 0.55)],
            seed: 5,
            ..ExperimentConfig::default()
        };
        let report = run_setting_ii(&g, &h, &mapping, &index, &config).unwrap();
        let flagged: Vec<&AggregateRow> = report
            .aggregate
            .iter()
            .filter(|r| r.status == "no_pairs")
            .collect();
        assert_eq!(flagged.len(), 3, "one flagged row per algorithm");
        assert!(flagged.iter().all(|r| r.param == "45-55"));
        assert!(report
            .raw
            .iter()
            .all(|r| r.param != "45-55"));
        let ok_rows: Vec<&EvalRow> = report.raw.iter().filter(|r| r.param == "30-42").collect();
        assert_eq!(ok_rows.len(), 3 * 3);
        assert!(report.raw.iter().all(|r| r.alpha == 1.0));
    }

    #[test]
    fn report_files_are_written() {
        let (g, h, mapping, photos) = eval_fixture();
        let index = build_popularity_index(&g, &photos, PHOTO_RADIUS_M);
        let config = ExperimentConfig {
            n_pairs: 2,
            alpha_grid: vec![0.5],
            extent_fraction: (0.15, 0.85),
            seed: 3,
            ..ExperimentConfig::default()
        };
        let report = run_setting_i(&g, &h, &mapping, &index, &config).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let csv_path = dir.path().join("report.csv");
        let jsonl_path = dir.path().join("rows.jsonl");
        write_report_csv(&csv_path, &report).unwrap();
        write_rows_jsonl(&jsonl_path, &report).unwrap();
        let csv_text = std::fs::read_to_string(&csv_path).unwrap();
        assert!(csv_text.starts_with("setting,param,algorithm,alpha,n_pairs"));
        assert_eq!(csv_text.lines().count(), 1 + report.aggregate.len());
        let jsonl_text = std::fs::read_to_string(&jsonl_path).unwrap();
        assert_eq!(jsonl_text.lines().count(), report.raw.len());
        let first: serde_json::Value = serde_json::from_str(jsonl_text.lines().next().unwrap()).unwrap();
        assert_eq!(first["setting"], "i");
        assert_eq!(first["algorithm"], "dij-g");
    }

    #[test]
    fn photo_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("photos.tsv");
        let photos = vec![photo("p1", 12.5, -3.25), photo("p2", 0.125, 99.0)];
        write_photos_tsv(&path, &photos).unwrap();
        let back = load_photos(&path, CoordMode::Planar).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].id, "p1");
        assert_eq!(back[0].coord.lon, 12.5);
        assert_eq!(back[1].coord.lat, 99.0);
    }
}
