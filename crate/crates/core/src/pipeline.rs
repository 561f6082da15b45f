//! Configuration resolution and one entry point per CLI subcommand.
//!
//! A run is configured by an optional TOML manifest plus command-line
//! overrides; flags win over manifest values, which win over defaults. All
//! relative paths in a manifest are resolved against the manifest's
//! directory, so a fixture directory is self-contained and relocatable.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::closeness::{
    build_relationship_graph, read_relationship_graph, score_pairs, write_relationship_graph,
    RelationshipGraph,
};
use crate::error::{PipelineError, Result};
use crate::evaluation::{
    build_popularity_index, load_photos, run_setting_i, run_setting_ii, write_report_csv,
    write_rows_jsonl, ExperimentConfig, MetricsReport, Setting, PHOTO_RADIUS_M,
};
use crate::extract::{extract_corpus, load_corpus, read_triplets, write_triplets};
use crate::features::{build_features, sets_by_relation, write_features_csv};
use crate::fixture::{self, FixtureConfig};
use crate::gazetteer::{load_gazetteer, Gazetteer};
use crate::geo::CoordMode;
use crate::lexicon::RelationLexicon;
use crate::mixture::{load_model, save_model, EmConfig, RelationModel};
use crate::network::{enrich, load_graph, map_pois, write_enriched_tsv, RoadGraph};
use crate::routing::{
    dij_g, dij_g_star, dij_h_star, write_routes_geojson, write_routes_jsonl, Algorithm,
    RouteResult,
};

pub const TRIPLETS_FILE: &str = "triplets.jsonl";
pub const FEATURES_FILE: &str = "features.csv";
pub const MODELS_DIR: &str = "models";
pub const HSTAR_FILE: &str = "hstar.jsonl";
pub const ENRICHED_FILE: &str = "enriched.tsv";
pub const ROUTES_FILE: &str = "routes.jsonl";
pub const ROUTES_GEOJSON_FILE: &str = "routes.geojson";
pub const MANIFEST_FILE: &str = "manifest.toml";

pub fn report_csv_file(setting: Setting) -> String {
    format!("report_setting_{setting}.csv")
}

pub fn rows_jsonl_file(setting: Setting) -> String {
    format!("rows_setting_{setting}.jsonl")
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub mode: Option<String>,
    pub seed: Option<u64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub min_samples: Option<usize>,
    pub photo_radius_m: Option<f64>,
    #[serde(default)]
    pub paths: ManifestPaths,
    #[serde(default)]
    pub em: ManifestEm,
    #[serde(default)]
    pub experiment: ManifestExperiment,
    #[serde(default)]
    pub fixture: ManifestFixture,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ManifestPaths {
    pub gazetteer: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub relations: Option<PathBuf>,
    pub verbs: Option<PathBuf>,
    pub nodes: Option<PathBuf>,
    pub edges: Option<PathBuf>,
    pub photos: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ManifestEm {
    pub max_components: Option<usize>,
    pub max_iterations: Option<usize>,
    pub rel_tolerance: Option<f64>,
    pub covariance_floor: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ManifestExperiment {
    pub n_pairs: Option<usize>,
    pub alpha_grid: Option<Vec<f64>>,
    pub extent_fraction: Option<[f64; 2]>,
    pub brackets: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ManifestFixture {
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    pub spacing_m: Option<f64>,
    pub photos_per_poi: Option<usize>,
    pub background_photos: Option<usize>,
    pub docs: Option<usize>,
}

/// Values taken from the command line; `None` means "not given".
#[derive(Debug, Clone, Default)]
pub struct CliOverrides {
    pub manifest: Option<PathBuf>,
    pub mode: Option<CoordMode>,
    pub seed: Option<u64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub mode: CoordMode,
    pub seed: u64,
    pub alpha: f64,
    pub beta: f64,
    pub out_dir: PathBuf,
    pub gazetteer: PathBuf,
    pub corpus: PathBuf,
    pub relations: PathBuf,
    pub verbs: PathBuf,
    pub nodes: PathBuf,
    pub edges: PathBuf,
    pub photos: PathBuf,
    pub min_samples: usize,
    pub photo_radius_m: f64,
    pub em: EmConfig,
    pub experiment: ExperimentConfig,
    pub fixture: FixtureConfig,
}

impl PipelineConfig {
    pub fn resolve(overrides: &CliOverrides) -> Result<Self> {
        let (manifest, base_dir) = match &overrides.manifest {
            Some(path) => {
                if !path.is_file() {
                    return Err(PipelineError::MissingInput { path: path.clone() });
                }
                let text = fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
                let manifest: Manifest = toml::from_str(&text).map_err(|e| {
                    PipelineError::Config(format!("manifest {}: {e}", path.display()))
                })?;
                let base = path
                    .parent()
                    .filter(|p| !p.as_os_str().is_empty())
                    .unwrap_or(Path::new("."))
                    .to_path_buf();
                (manifest, base)
            }
            None => (Manifest::default(), PathBuf::from(".")),
        };

        let mode = match overrides.mode {
            Some(mode) => mode,
            None => match &manifest.mode {
                Some(text) => text.parse()?,
                None => CoordMode::Geodesic,
            },
        };
        let seed = overrides.seed.or(manifest.seed).unwrap_or(42);
        let alpha = overrides.alpha.or(manifest.alpha).unwrap_or(1.0);
        if !(0.0..=1.0).contains(&alpha) {
            return Err(PipelineError::Config(format!(
                "alpha must lie in [0, 1], got {alpha}"
            )));
        }
        let beta = overrides.beta.or(manifest.beta).unwrap_or(1.6);
        if beta <= 1.0 {
            return Err(PipelineError::Config(format!(
                "beta must exceed 1, got {beta}"
            )));
        }
        let min_samples = manifest.min_samples.unwrap_or(5);
        if min_samples == 0 {
            return Err(PipelineError::Config("min_samples must be positive".into()));
        }
        let photo_radius_m = manifest.photo_radius_m.unwrap_or(PHOTO_RADIUS_M);
        if !(photo_radius_m.is_finite() && photo_radius_m > 0.0) {
            return Err(PipelineError::Config(format!(
                "photo_radius_m must be positive, got {photo_radius_m}"
            )));
        }

        let resolve_path = |p: Option<&PathBuf>, default: &str| -> PathBuf {
            let p = p.cloned().unwrap_or_else(|| PathBuf::from(default));
            if p.is_absolute() {
                p
            } else {
                base_dir.join(p)
            }
        };
        let out_dir = match &overrides.out_dir {
            Some(dir) => dir.clone(),
            None => resolve_path(manifest.out_dir.as_ref(), "out"),
        };

        let em = EmConfig {
            max_components: manifest.em.max_components.unwrap_or(8),
            max_iterations: manifest.em.max_iterations.unwrap_or(200),
            rel_tolerance: manifest.em.rel_tolerance.unwrap_or(1e-6),
            covariance_floor: manifest.em.covariance_floor.unwrap_or(1e-6),
            seed,
        };
        if em.max_components == 0 || em.max_iterations == 0 {
            return Err(PipelineError::Config(
                "em.max_components and em.max_iterations must be positive".into(),
            ));
        }
        if !(em.rel_tolerance > 0.0 && em.covariance_floor > 0.0) {
            return Err(PipelineError::Config(
                "em.rel_tolerance and em.covariance_floor must be positive".into(),
            ));
        }

        let defaults = ExperimentConfig::default();
        let experiment = ExperimentConfig {
            n_pairs: manifest.experiment.n_pairs.unwrap_or(defaults.n_pairs),
            alpha_grid: manifest
                .experiment
                .alpha_grid
                .clone()
                .unwrap_or(defaults.alpha_grid),
            beta,
            extent_fraction: manifest
                .experiment
                .extent_fraction
                .map(|[lo, hi]| (lo, hi))
                .unwrap_or(defaults.extent_fraction),
            brackets: manifest
                .experiment
                .brackets
                .clone()
                .map(|b| b.into_iter().map(|[lo, hi]| (lo, hi)).collect())
                .unwrap_or(defaults.brackets),
            seed,
        };
        experiment.validate()?;

        let fixture_defaults = FixtureConfig::default();
        let fixture = FixtureConfig {
            rows: manifest.fixture.rows.unwrap_or(fixture_defaults.rows),
            cols: manifest.fixture.cols.unwrap_or(fixture_defaults.cols),
            spacing_m: manifest
                .fixture
                .spacing_m
                .unwrap_or(fixture_defaults.spacing_m),
            photos_per_poi: manifest
                .fixture
                .photos_per_poi
                .unwrap_or(fixture_defaults.photos_per_poi),
            background_photos: manifest
                .fixture
                .background_photos
                .unwrap_or(fixture_defaults.background_photos),
            docs: manifest.fixture.docs.unwrap_or(fixture_defaults.docs),
            seed,
        };

        Ok(PipelineConfig {
            mode,
            seed,
            alpha,
            beta,
            out_dir,
            gazetteer: resolve_path(manifest.paths.gazetteer.as_ref(), fixture::GAZETTEER_FILE),
            corpus: resolve_path(manifest.paths.corpus.as_ref(), fixture::CORPUS_FILE),
            relations: resolve_path(manifest.paths.relations.as_ref(), fixture::RELATIONS_FILE),
            verbs: resolve_path(manifest.paths.verbs.as_ref(), fixture::VERBS_FILE),
            nodes: resolve_path(manifest.paths.nodes.as_ref(), fixture::NODES_FILE),
            edges: resolve_path(manifest.paths.edges.as_ref(), fixture::EDGES_FILE),
            photos: resolve_path(manifest.paths.photos.as_ref(), fixture::PHOTOS_FILE),
            min_samples,
            photo_radius_m,
            em,
            experiment,
            fixture,
        })
    }

    pub fn out_path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn ensure_out_dir(&self) -> Result<()> {
        fs::create_dir_all(&self.out_dir).map_err(|e| PipelineError::io(&self.out_dir, e))
    }
}

fn require(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(PipelineError::MissingInput {
            path: path.to_path_buf(),
        })
    }
}

fn load_inputs(config: &PipelineConfig) -> Result<(Gazetteer, RelationLexicon)> {
    require(&config.gazetteer)?;
    require(&config.relations)?;
    require(&config.verbs)?;
    let gazetteer = load_gazetteer(&config.gazetteer, config.mode)?;
    let lexicon = RelationLexicon::load(&config.relations, &config.verbs)?;
    Ok((gazetteer, lexicon))
}

fn load_road(config: &PipelineConfig) -> Result<RoadGraph> {
    require(&config.nodes)?;
    require(&config.edges)?;
    load_graph(&config.nodes, &config.edges, config.mode)
}

fn load_hstar(
    config: &PipelineConfig,
    gazetteer: &Gazetteer,
    lexicon: &RelationLexicon,
) -> Result<RelationshipGraph> {
    let path = config.out_path(HSTAR_FILE);
    require(&path)?;
    read_relationship_graph(&path, gazetteer, lexicon)
}

fn model_file_name(index: usize, surface: &str) -> String {
    let slug: String = surface
        .chars()
        .map(|c| if c.is_whitespace() { '-' } else { c })
        .collect();
    format!("model_{index:02}_{slug}.json")
}

fn load_models(
    config: &PipelineConfig,
    lexicon: &RelationLexicon,
) -> Result<BTreeMap<usize, RelationModel>> {
    let dir = config.out_path(MODELS_DIR);
    if !dir.is_dir() {
        return Err(PipelineError::MissingInput { path: dir });
    }
    let mut models = BTreeMap::new();
    for (index, relation) in lexicon.relations().iter().enumerate() {
        let path = dir.join(model_file_name(index, &relation.surface));
        if !path.is_file() {
            continue;
        }
        let model = load_model(&path)?;
        if model.relation != relation.surface {
            return Err(PipelineError::Invalid(format!(
                "model file {} holds relation {:?}, expected {:?}",
                path.display(),
                model.relation,
                relation.surface
            )));
        }
        models.insert(index, model);
    }
    if models.is_empty() {
        return Err(PipelineError::Invalid(format!(
            "no trained models in {}, run the train command first",
            dir.display()
        )));
    }
    Ok(models)
}

/// Generates the synthetic city bundle plus a manifest, making the output
/// directory a self-contained pipeline workspace.
pub fn cmd_gen_fixture(config: &PipelineConfig) -> Result<PathBuf> {
    let bundle = fixture::generate(&config.fixture)?;
    fixture::write_bundle(&config.out_dir, &bundle)?;
    let manifest = Manifest {
        mode: Some(CoordMode::Planar.to_string()),
        seed: Some(config.seed),
        alpha: Some(config.alpha),
        beta: Some(config.beta),
        out_dir: Some(PathBuf::from("out")),
        min_samples: Some(config.min_samples),
        photo_radius_m: Some(config.photo_radius_m),
        paths: ManifestPaths {
            gazetteer: Some(fixture::GAZETTEER_FILE.into()),
            corpus: Some(fixture::CORPUS_FILE.into()),
            relations: Some(fixture::RELATIONS_FILE.into()),
            verbs: Some(fixture::VERBS_FILE.into()),
            nodes: Some(fixture::NODES_FILE.into()),
            edges: Some(fixture::EDGES_FILE.into()),
            photos: Some(fixture::PHOTOS_FILE.into()),
        },
        em: ManifestEm {
            max_components: Some(config.em.max_components),
            max_iterations: Some(config.em.max_iterations),
            rel_tolerance: Some(config.em.rel_tolerance),
            covariance_floor: Some(config.em.covariance_floor),
        },
        experiment: ManifestExperiment {
            n_pairs: Some(config.experiment.n_pairs),
            alpha_grid: Some(config.experiment.alpha_grid.clone()),
            extent_fraction: Some([
                config.experiment.extent_fraction.0,
                config.experiment.extent_fraction.1,
            ]),
            brackets: Some(
                config
                    .experiment
                    .brackets
                    .iter()
                    .map(|&(lo, hi)| [lo, hi])
                    .collect(),
            ),
        },
        fixture: ManifestFixture {
            rows: Some(config.fixture.rows),
            cols: Some(config.fixture.cols),
            spacing_m: Some(config.fixture.spacing_m),
            photos_per_poi: Some(config.fixture.photos_per_poi),
            background_photos: Some(config.fixture.background_photos),
            docs: Some(config.fixture.docs),
        },
    };
    let text = toml::to_string_pretty(&manifest)
        .map_err(|e| PipelineError::Invalid(format!("manifest serialization failed: {e}")))?;
    let manifest_path = config.out_dir.join(MANIFEST_FILE);
    fs::write(&manifest_path, text).map_err(|e| PipelineError::io(&manifest_path, e))?;
    println!(
        "fixture: {} vertices, {} edges, {} PoIs, {} documents ({} planted statements), {} photos",
        bundle.graph.vertex_count(),
        bundle.graph.edge_count(),
        bundle.poi_names.len(),
        bundle.documents.len(),
        bundle.planted_statements,
        bundle.photos.len(),
    );
    println!("wrote bundle to {}", config.out_dir.display());
    Ok(config.out_dir.clone())
}

/// Runs extraction over the corpus and writes the triplets file.
pub fn cmd_extract(config: &PipelineConfig) -> Result<usize> {
    let (gazetteer, lexicon) = load_inputs(config)?;
    require(&config.corpus)?;
    let (documents, skipped_docs) = load_corpus(&config.corpus)?;
    let triplets = extract_corpus(&documents, &gazetteer, &lexicon);
    config.ensure_out_dir()?;
    let out = config.out_path(TRIPLETS_FILE);
    write_triplets(&out, &triplets, &gazetteer, &lexicon)?;

    let mut histogram = vec![0usize; lexicon.len()];
    for t in &triplets {
        histogram[t.relation] += 1;
    }
    println!(
        "extracted {} triplets from {} documents ({} unreadable) -> {}",
        triplets.len(),
        documents.len(),
        skipped_docs,
        out.display()
    );
    for (index, count) in histogram.iter().enumerate() {
        if *count > 0 {
            println!("  {:10} {}", lexicon.relation(index).surface, count);
        }
    }
    Ok(triplets.len())
}

/// Computes feature vectors for the extracted triplets.
pub fn cmd_features(config: &PipelineConfig) -> Result<(usize, usize)> {
    let (gazetteer, lexicon) = load_inputs(config)?;
    let triplets_path = config.out_path(TRIPLETS_FILE);
    require(&triplets_path)?;
    let triplets = read_triplets(&triplets_path, &gazetteer, &lexicon)?;
    let extraction = build_features(&triplets, &gazetteer, config.mode);
    config.ensure_out_dir()?;
    let out = config.out_path(FEATURES_FILE);
    write_features_csv(&out, &extraction.rows, &gazetteer, &lexicon)?;
    println!(
        "features: {} rows over {} PoI pairs ({} skipped) -> {}",
        extraction.rows.len(),
        extraction.pairs.len(),
        extraction.skipped,
        out.display()
    );
    Ok((extraction.rows.len(), extraction.pairs.len()))
}

/// Fits one mixture model per sufficiently observed relation.
pub fn cmd_train(config: &PipelineConfig) -> Result<Vec<(String, usize)>> {
    let (gazetteer, lexicon) = load_inputs(config)?;
    let triplets_path = config.out_path(TRIPLETS_FILE);
    require(&triplets_path)?;
    let triplets = read_triplets(&triplets_path, &gazetteer, &lexicon)?;
    let extraction = build_features(&triplets, &gazetteer, config.mode);
    let sets = sets_by_relation(&extraction.rows);

    let models_dir = config.out_path(MODELS_DIR);
    fs::create_dir_all(&models_dir).map_err(|e| PipelineError::io(&models_dir, e))?;
    let mut trained = Vec::new();
    for (index, vectors) in &sets {
        let surface = &lexicon.relation(*index).surface;
        if vectors.len() < config.min_samples {
            println!(
                "skipping {surface:?}: {} observations, need {}",
                vectors.len(),
                config.min_samples
            );
            continue;
        }
        let model = RelationModel::train(surface, vectors, &config.em);
        let path = models_dir.join(model_file_name(*index, surface));
        save_model(&path, &model)?;
        println!(
            "trained {surface:?}: {} observations, {} components, log-likelihood {:.3}",
            vectors.len(),
            model.mixture.components.len(),
            model.mixture.log_likelihood
        );
        trained.push((surface.clone(), model.mixture.components.len()));
    }
    if trained.is_empty() {
        return Err(PipelineError::Invalid(
            "no relation reached the minimum sample count, nothing trained".into(),
        ));
    }
    Ok(trained)
}

/// Scores every observed pair and writes the relationship graph.
pub fn cmd_score(config: &PipelineConfig) -> Result<usize> {
    let (gazetteer, lexicon) = load_inputs(config)?;
    let triplets_path = config.out_path(TRIPLETS_FILE);
    require(&triplets_path)?;
    let triplets = read_triplets(&triplets_path, &gazetteer, &lexicon)?;
    let extraction = build_features(&triplets, &gazetteer, config.mode);
    let models = load_models(config, &lexicon)?;
    let scored = score_pairs(&extraction.pairs, &models, &lexicon);
    let graph = build_relationship_graph(&scored);
    config.ensure_out_dir()?;
    let out = config.out_path(HSTAR_FILE);
    write_relationship_graph(&out, &graph, &gazetteer, &lexicon)?;

    let mut weights: Vec<f64> = graph.edges.iter().map(|e| e.w).collect();
    weights.sort_by(f64::total_cmp);
    println!(
        "relationship graph: {} edges over {} PoIs -> {}",
        graph.edges.len(),
        graph.node_ids().len(),
        out.display()
    );
    if !weights.is_empty() {
        let q = |f: f64| weights[(f * (weights.len() - 1) as f64).round() as usize];
        println!(
            "  W quantiles: min {:.4}  q25 {:.4}  median {:.4}  q75 {:.4}  max {:.4}",
            q(0.0),
            q(0.25),
            q(0.5),
            q(0.75),
            q(1.0)
        );
    }
    Ok(graph.edges.len())
}

/// Applies the multiplicative cost adjustment and writes the enriched edges.
pub fn cmd_enrich(config: &PipelineConfig) -> Result<()> {
    let (gazetteer, lexicon) = load_inputs(config)?;
    let graph = load_road(config)?;
    let relationships = load_hstar(config, &gazetteer, &lexicon)?;
    let mapping = map_pois(&graph, &gazetteer, relationships.node_ids())?;
    let enriched = enrich(&graph, &relationships, &mapping, config.alpha)?;
    config.ensure_out_dir()?;
    let out = config.out_path(ENRICHED_FILE);
    write_enriched_tsv(&out, &enriched)?;

    let covered = enriched.covering_pairs.iter().filter(|&&n| n > 0).count();
    let total_d: f64 = graph.edges().iter().map(|e| e.length_m).sum();
    let total_c: f64 = enriched.cost.iter().sum();
    println!(
        "enriched {} of {} edges at alpha {} ({} pairs skipped), total c/d {:.4} -> {}",
        covered,
        graph.edge_count(),
        config.alpha,
        enriched.skipped_pairs,
        total_c / total_d,
        out.display()
    );
    Ok(())
}

/// Routes between two vertex ids with the requested algorithms.
pub fn cmd_route(
    config: &PipelineConfig,
    from: u32,
    to: u32,
    algorithms: &[Algorithm],
    geojson: bool,
) -> Result<Vec<RouteResult>> {
    let (gazetteer, lexicon) = load_inputs(config)?;
    let graph = load_road(config)?;
    let relationships = load_hstar(config, &gazetteer, &lexicon)?;
    let mapping = map_pois(&graph, &gazetteer, relationships.node_ids())?;
    let enriched = enrich(&graph, &relationships, &mapping, config.alpha)?;

    let lookup = |id: u32| -> Result<usize> {
        graph.index_of(id).ok_or_else(|| {
            PipelineError::Config(format!("vertex id {id} is not in the road network"))
        })
    };
    let s = lookup(from)?;
    let t = lookup(to)?;

    let mut results = Vec::new();
    for &algorithm in algorithms {
        let result = match algorithm {
            Algorithm::DijG => dij_g(&enriched, s, t)?,
            Algorithm::DijGStar => dij_g_star(&enriched, s, t)?,
            Algorithm::DijHStar => dij_h_star(&enriched, &relationships, s, t, config.beta)?,
        };
        println!(
            "{}: length {:.1} m, cost {:.1}, er {:.4}, {} PoIs{}",
            result.algorithm,
            result.length_m,
            result.cost,
            result.er,
            result.pois.len(),
            if result.fallback { " (fallback)" } else { "" }
        );
        results.push(result);
    }

    config.ensure_out_dir()?;
    let out = config.out_path(ROUTES_FILE);
    write_routes_jsonl(&out, &results, &graph, &gazetteer)?;
    if geojson {
        write_routes_geojson(&config.out_path(ROUTES_GEOJSON_FILE), &results, &graph)?;
    }
    Ok(results)
}

/// Runs one evaluation setting end to end and writes both report files.
pub fn cmd_eval(config: &PipelineConfig, setting: Setting) -> Result<MetricsReport> {
    let (gazetteer, lexicon) = load_inputs(config)?;
    let graph = load_road(config)?;
    let relationships = load_hstar(config, &gazetteer, &lexicon)?;
    require(&config.photos)?;
    let photos = load_photos(&config.photos, config.mode)?;
    let index = build_popularity_index(&graph, &photos, config.photo_radius_m);
    let mapping = map_pois(&graph, &gazetteer, relationships.node_ids())?;

    let report = match setting {
        Setting::I => run_setting_i(&graph, &relationships, &mapping, &index, &config.experiment)?,
        Setting::II => {
            run_setting_ii(&graph, &relationships, &mapping, &index, &config.experiment)?
        }
    };
    config.ensure_out_dir()?;
    let csv_path = config.out_path(&report_csv_file(setting));
    let rows_path = config.out_path(&rows_jsonl_file(setting));
    write_report_csv(&csv_path, &report)?;
    write_rows_jsonl(&rows_path, &report)?;

    println!(
        "setting {}: {} raw rows -> {}",
        setting,
        report.raw.len(),
        rows_path.display()
    );
    for row in &report.aggregate {
        if row.status == "ok" {
            println!(
                "  {:>5}  {:11}  dlen {:+7.2}%  dpop {:+8.2}%  er_gain {:+7.2}%",
                row.param, row.algorithm, row.mean_dlength_pct, row.mean_dpop_pct,
                row.mean_er_gain_pct
            );
        } else {
            println!("  {:>5}  {:11}  {}", row.param, row.algorithm, row.status);
        }
    }
    Ok(report)
}
