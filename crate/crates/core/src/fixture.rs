//! Seeded synthetic city: a planar grid road network with a corridor of
//! named PoIs, a corpus of sentences asserting closeness relations between
//! them, a gazetteer (including decoy entries), and photo clusters around the
//! PoIs. The bundle is the desk-scale stand-in for a real city dataset and
//! drives the end-to-end tests and the evaluation trends.
//!
//! Layout: vertices form a `rows x cols` grid at `spacing_m` intervals in
//! planar coordinates, vertex id `row * cols + col`. PoIs sit on the middle
//! row every fourth column. Adjacent PoI pairs are described with "next to",
//! "at" and "near"; pairs two and three columns apart add "near" and
//! "close to" at larger distances, giving every trained relation both a
//! distance spread and two opposite orientations.

use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{PipelineError, Result};
use crate::evaluation::{write_photos_tsv, Photo};
use crate::extract::Document;
use crate::geo::{Coord, CoordMode};
use crate::lexicon::{DEFAULT_RELATIONS, DEFAULT_VERBS};
use crate::network::{write_edges_tsv, write_nodes_tsv, RoadGraph};

pub const NODES_FILE: &str = "nodes.tsv";
pub const EDGES_FILE: &str = "edges.tsv";
pub const GAZETTEER_FILE: &str = "gazetteer.tsv";
pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const PHOTOS_FILE: &str = "photos.tsv";
pub const RELATIONS_FILE: &str = "relations.txt";
pub const VERBS_FILE: &str = "verbs.txt";

const POI_NAMES: [&str; 11] = [
    "Old Mill",
    "Stone Bridge",
    "Clock Tower",
    "Rose Garden",
    "Iron Gate",
    "Corn Exchange",
    "Salt Market",
    "Glass Chapel",
    "Copper Fountain",
    "King's Arch",
    "Harbor Steps",
];

const VERB_CHOICES: [&str; 5] = ["is", "was", "lies", "sits", "stands"];

const FILLER_SENTENCES: [&str; 10] = [
    "Rain swept the empty boulevard before sunrise.",
    "The evening crowd thinned out slowly.",
    "A street musician counted her coins.",
    "Fresh posters covered last week's announcements.",
    "The number nine tram ran late again.",
    "Pigeons scattered as the bells rang.",
    "Two cyclists argued about the quickest way home.",
    "The bakery sold out before nine.",
    "Fog lifted from the river around noon.",
    "Lanterns came on one by one.",
];

const DISTRACTOR_SENTENCES: [&str; 3] = [
    "Deutsche Bank invested 10 million dollars in Brazil.",
    "Deutsche Bank analysts toured Brazil in March.",
    "Visitors from Brazil photographed the waterfront all afternoon.",
];

#[derive(Debug, Clone)]
pub struct FixtureConfig {
    pub rows: usize,
    pub cols: usize,
    pub spacing_m: f64,
    pub photos_per_poi: usize,
    pub background_photos: usize,
    pub docs: usize,
    pub seed: u64,
}

impl Default for FixtureConfig {
    fn default() -> Self {
        FixtureConfig {
            rows: 50,
            cols: 50,
            spacing_m: 100.0,
            photos_per_poi: 150,
            background_photos: 300,
            docs: 40,
            seed: 42,
        }
    }
}

impl FixtureConfig {
    fn validate(&self) -> Result<()> {
        if self.rows < 2 || self.cols < 10 {
            return Err(PipelineError::Config(
                "fixture grid needs at least 2 rows and 10 columns".into(),
            ));
        }
        if !(self.spacing_m.is_finite() && self.spacing_m > 0.0) {
            return Err(PipelineError::Config(format!(
                "grid spacing must be positive, got {}",
                self.spacing_m
            )));
        }
        if self.docs == 0 {
            return Err(PipelineError::Config("docs must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug)]
pub struct FixtureBundle {
    pub graph: RoadGraph,
    /// Gazetteer rows as written to disk: name, lat, lon, population.
    pub gazetteer_rows: Vec<(String, f64, f64, u64)>,
    pub documents: Vec<Document>,
    pub photos: Vec<Photo>,
    /// Corridor PoI names in west-to-east order.
    pub poi_names: Vec<String>,
    /// Number of relation statements planted in the corpus.
    pub planted_statements: usize,
}

struct Statement {
    subject: usize,
    object: usize,
    relation: &'static str,
}

fn corridor_columns(cols: usize) -> Vec<usize> {
    (1..)
        .map(|k| 4 * k)
        .take_while(|&c| c + 5 <= cols)
        .collect()
}

fn adverb_choices(relation: &str) -> &'static [&'static str] {
    match relation {
        "near" => &["", "quite "],
        "next to" => &["", "right "],
        "close to" => &["", "very ", "quite "],
        "at" => &["", "right "],
        _ => &[""],
    }
}

fn render_statement(names: &[String], statement: &Statement, rng: &mut ChaCha8Rng) -> String {
    let verb = VERB_CHOICES[rng.gen_range(0..VERB_CHOICES.len())];
    let adverbs = adverb_choices(statement.relation);
    let adverb = adverbs[rng.gen_range(0..adverbs.len())];
    let subject_article = if rng.gen_bool(0.5) { "The " } else { "" };
    let object_article = if rng.gen_bool(0.5) { "the " } else { "" };
    format!(
        "{}{} {} {}{} {}{}.",
        subject_article,
        names[statement.subject],
        verb,
        adverb,
        statement.relation,
        object_article,
        names[statement.object],
    )
}

/// Generates the full bundle. Everything downstream of the seed is
/// deterministic, including document packing and photo jitter.
pub fn generate(config: &FixtureConfig) -> Result<FixtureBundle> {
    config.validate()?;
    let spacing = config.spacing_m;
    let width = (config.cols - 1) as f64 * spacing;
    let height = (config.rows - 1) as f64 * spacing;

    let mut vertices = Vec::with_capacity(config.rows * config.cols);
    for row in 0..config.rows {
        for col in 0..config.cols {
            let id = (row * config.cols + col) as u32;
            vertices.push((
                id,
                Coord {
                    lat: row as f64 * spacing,
                    lon: col as f64 * spacing,
                },
            ));
        }
    }
    let mut edges = Vec::new();
    for row in 0..config.rows {
        for col in 0..config.cols {
            let id = (row * config.cols + col) as u32;
            if col + 1 < config.cols {
                edges.push((id, id + 1, None));
            }
            if row + 1 < config.rows {
                edges.push((id, id + config.cols as u32, None));
            }
        }
    }
    let graph = RoadGraph::from_parts(CoordMode::Planar, vertices, edges)?;

    let corridor_row = config.rows / 2;
    let columns = corridor_columns(config.cols);
    if columns.len() < 2 {
        return Err(PipelineError::Config(
            "fixture grid too narrow for a PoI corridor".into(),
        ));
    }
    let poi_names: Vec<String> = (0..columns.len())
        .map(|i| {
            POI_NAMES
                .get(i)
                .map(|s| s.to_string())
                .unwrap_or_else(|| format!("Landmark {}", i + 1))
        })
        .collect();
    // PoIs sit near their corridor vertex rather than exactly on it, so
    // pairwise distances and bearings vary continuously instead of repeating
    // a handful of exact values. The offset stays well under half the grid
    // spacing, which keeps nearest-vertex mapping on the intended vertex.
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let jitter_half = 0.15 * spacing;
    let poi_coords: Vec<Coord> = columns
        .iter()
        .map(|&col| Coord {
            lat: corridor_row as f64 * spacing + rng.gen_range(-jitter_half..jitter_half),
            lon: col as f64 * spacing + rng.gen_range(-jitter_half..jitter_half),
        })
        .collect();

    let mut gazetteer_rows: Vec<(String, f64, f64, u64)> = poi_names
        .iter()
        .zip(&poi_coords)
        .enumerate()
        .map(|(i, (name, coord))| (name.clone(), coord.lat, coord.lon, 5000 + 100 * i as u64))
        .collect();
    // Decoys: a lower-population duplicate of the first PoI and two entities
    // that only ever appear in rejected sentences.
    gazetteer_rows.push((poi_names[0].clone(), height, 0.0, 10));
    gazetteer_rows.push(("Deutsche Bank".into(), 0.0, 0.0, 50));
    gazetteer_rows.push(("Brazil".into(), height, width, 99));

    let mut statements = Vec::new();
    let n_pois = columns.len();
    let mut plant = |i: usize, j: usize, relation: &'static str, count: usize| {
        for k in 0..count {
            let (subject, object) = if k % 2 == 0 { (i, j) } else { (j, i) };
            statements.push(Statement {
                subject,
                object,
                relation,
            });
        }
    };
    for i in 0..n_pois - 1 {
        plant(i, i + 1, "next to", 4);
        plant(i, i + 1, "at", 3);
        plant(i, i + 1, "near", 3);
    }
    for i in 0..n_pois.saturating_sub(2) {
        plant(i, i + 2, "near", 4);
        plant(i, i + 2, "close to", 4);
    }
    for i in 0..n_pois.saturating_sub(3) {
        plant(i, i + 3, "near", 2);
    }
    let planted_statements = statements.len();

    let mut sentences: Vec<String> = statements
        .iter()
        .map(|s| render_statement(&poi_names, s, &mut rng))
        .collect();
    sentences.shuffle(&mut rng);

    let mut doc_sentences: Vec<Vec<String>> = vec![Vec::new(); config.docs];
    for (i, doc) in doc_sentences.iter_mut().enumerate() {
        doc.push(FILLER_SENTENCES[i % FILLER_SENTENCES.len()].to_string());
    }
    for (i, sentence) in sentences.into_iter().enumerate() {
        doc_sentences[i % config.docs].push(sentence);
    }
    for (i, distractor) in DISTRACTOR_SENTENCES.iter().enumerate() {
        doc_sentences[i % config.docs].push(distractor.to_string());
    }
    let digits = (config.docs as f64).log10().floor() as usize + 1;
    let documents: Vec<Document> = doc_sentences
        .into_iter()
        .enumerate()
        .map(|(i, sentences)| Document {
            id: format!("city-{:0digits$}", i, digits = digits.max(3)),
            text: sentences.join(" "),
        })
        .collect();

    let jitter = Normal::new(0.0, 30.0)
        .map_err(|e| PipelineError::Invalid(format!("photo jitter setup failed: {e}")))?;
    let mut photos = Vec::with_capacity(n_pois * config.photos_per_poi + config.background_photos);
    for coord in &poi_coords {
        for _ in 0..config.photos_per_poi {
            photos.push(Coord {
                lat: coord.lat + jitter.sample(&mut rng),
                lon: coord.lon + jitter.sample(&mut rng),
            });
        }
    }
    for _ in 0..config.background_photos {
        photos.push(Coord {
            lat: rng.gen_range(0.0..=height),
            lon: rng.gen_range(0.0..=width),
        });
    }
    let photos: Vec<Photo> = photos
        .into_iter()
        .enumerate()
        .map(|(i, coord)| Photo {
            id: format!("p{i:05}"),
            coord,
        })
        .collect();

    Ok(FixtureBundle {
        graph,
        gazetteer_rows,
        documents,
        photos,
        poi_names,
        planted_statements,
    })
}

pub fn write_gazetteer_tsv(path: &Path, rows: &[(String, f64, f64, u64)]) -> Result<()> {
    let file = File::create(path).map_err(|e| PipelineError::io(path, e))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "# name\tlat\tlon\tpopulation").map_err(|e| PipelineError::io(path, e))?;
    for (name, lat, lon, population) in rows {
        writeln!(out, "{name}\t{lat}\t{lon}\t{population}")
            .map_err(|e| PipelineError::io(path, e))?;
    }
    Ok(())
}

pub fn write_corpus_jsonl(path: &Path, documents: &[Document]) -> Result<()> {
    let file = File::create(path).map_err(|e| PipelineError::io(path, e))?;
    let mut out = BufWriter::new(file);
    for document in documents {
        let line = serde_json::to_string(document)
            .map_err(|e| PipelineError::Invalid(format!("document serialization failed: {e}")))?;
        writeln!(out, "{line}").map_err(|e| PipelineError::io(path, e))?;
    }
    Ok(())
}

fn write_lines(path: &Path, lines: &[&str]) -> Result<()> {
    let file = File::create(path).map_err(|e| PipelineError::io(path, e))?;
    let mut out = BufWriter::new(file);
    for line in lines {
        writeln!(out, "{line}").map_err(|e| PipelineError::io(path, e))?;
    }
    Ok(())
}

/// Writes the bundle's data files into `dir` under the canonical names.
pub fn write_bundle(dir: &Path, bundle: &FixtureBundle) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
    write_nodes_tsv(&dir.join(NODES_FILE), &bundle.graph)?;
    write_edges_tsv(&dir.join(EDGES_FILE), &bundle.graph)?;
    write_gazetteer_tsv(&dir.join(GAZETTEER_FILE), &bundle.gazetteer_rows)?;
    write_corpus_jsonl(&dir.join(CORPUS_FILE), &bundle.documents)?;
    write_photos_tsv(&dir.join(PHOTOS_FILE), &bundle.photos)?;
    write_lines(&dir.join(RELATIONS_FILE), &DEFAULT_RELATIONS)?;
    write_lines(&dir.join(VERBS_FILE), &DEFAULT_VERBS)?;
    Ok(())
}
