//! Gazetteer loading and name resolution.
//!
//! The gazetteer is a TSV file of `name, lat, lon, population` rows (lines
//! starting with `#` are comments). Rows whose names normalize to the same
//! string are collapsed into a single point of interest; the row with the
//! highest population wins, earlier rows win ties. Each surviving entry gets
//! a stable numeric id in order of first appearance, so the same file always
//! produces the same id assignment.

use std::collections::HashMap;
use std::path::Path;

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::error::{PipelineError, Result};
use crate::geo::{Coord, CoordMode};

/// A resolved point of interest.
#[derive(Debug, Clone)]
pub struct Poi {
    pub id: u32,
    /// Display name as spelled in the winning gazetteer row.
    pub name: String,
    /// Normalized name used for matching.
    pub canonical: String,
    pub coord: Coord,
    pub population: u64,
}

#[derive(Debug, Clone)]
pub struct Gazetteer {
    pois: Vec<Poi>,
    by_canonical: HashMap<String, u32>,
    max_name_tokens: usize,
}

impl Gazetteer {
    pub fn len(&self) -> usize {
        self.pois.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pois.is_empty()
    }

    pub fn pois(&self) -> &[Poi] {
        &self.pois
    }

    pub fn poi(&self, id: u32) -> &Poi {
        &self.pois[id as usize]
    }

    /// Looks up a normalized name, e.g. one produced by joining normalized
    /// sentence tokens with single spaces.
    pub fn resolve(&self, canonical: &str) -> Option<&Poi> {
        self.by_canonical
            .get(canonical)
            .map(|&id| &self.pois[id as usize])
    }

    /// Longest gazetteer name, in tokens. Bounds the n-gram window during
    /// entity spotting.
    pub fn max_name_tokens(&self) -> usize {
        self.max_name_tokens
    }

    /// Builds a gazetteer from already-parsed rows; rows are `(name, lat,
    /// lon, population)` in file order.
    pub fn from_rows(rows: Vec<(String, f64, f64, u64)>) -> Self {
        let mut pois: Vec<Poi> = Vec::new();
        let mut by_canonical: HashMap<String, u32> = HashMap::new();
        for (name, lat, lon, population) in rows {
            let canonical = normalize_name(&name);
            if canonical.is_empty() {
                continue;
            }
            match by_canonical.get(&canonical) {
                Some(&id) => {
                    let existing = &mut pois[id as usize];
                    if population > existing.population {
                        existing.name = name;
                        existing.coord = Coord::new(lat, lon);
                        existing.population = population;
                    }
                }
                None => {
                    let id = pois.len() as u32;
                    by_canonical.insert(canonical.clone(), id);
                    pois.push(Poi {
                        id,
                        name,
                        canonical,
                        coord: Coord::new(lat, lon),
                        population,
                    });
                }
            }
        }
        let max_name_tokens = pois
            .iter()
            .map(|p| p.canonical.split(' ').count())
            .max()
            .unwrap_or(0);
        Gazetteer {
            pois,
            by_canonical,
            max_name_tokens,
        }
    }
}

/// Lowercases, strips diacritics, unifies curly apostrophes and collapses
/// whitespace, so that blog spellings and gazetteer rows meet in the middle.
pub fn normalize_name(raw: &str) -> String {
    let stripped: String = raw
        .nfd()
        .filter(|c| !is_combining_mark(*c))
        .map(|c| if c == '\u{2019}' { '\'' } else { c })
        .collect();
    stripped
        .to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Reads a gazetteer TSV. Coordinate bounds are checked in geodesic mode
/// only; planar fixtures use metre coordinates that have no such bounds.
pub fn load_gazetteer(path: &Path, mode: CoordMode) -> Result<Gazetteer> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(PipelineError::Parse {
                path: path.to_path_buf(),
                line: lineno,
                msg: format!("expected 4 tab-separated fields, found {}", fields.len()),
            });
        }
        let parse_f64 = |s: &str, what: &str| -> Result<f64> {
            s.trim().parse::<f64>().map_err(|_| PipelineError::Parse {
                path: path.to_path_buf(),
                line: lineno,
                msg: format!("bad {what} {s:?}"),
            })
        };
        let lat = parse_f64(fields[1], "latitude")?;
        let lon = parse_f64(fields[2], "longitude")?;
        if !lat.is_finite() || !lon.is_finite() {
            return Err(PipelineError::Parse {
                path: path.to_path_buf(),
                line: lineno,
                msg: "coordinates must be finite".into(),
            });
        }
        if mode == CoordMode::Geodesic && !(-90.0..=90.0).contains(&lat) {
            return Err(PipelineError::Parse {
                path: path.to_path_buf(),
                line: lineno,
                msg: format!("latitude {lat} out of [-90, 90]"),
            });
        }
        if mode == CoordMode::Geodesic && !(-180.0..=180.0).contains(&lon) {
            return Err(PipelineError::Parse {
                path: path.to_path_buf(),
                line: lineno,
                msg: format!("longitude {lon} out of [-180, 180]"),
            });
        }
        let population = fields[3]
            .trim()
            .parse::<u64>()
            .map_err(|_| PipelineError::Parse {
                path: path.to_path_buf(),
                line: lineno,
                msg: format!("bad population {:?}", fields[3]),
            })?;
        rows.push((fields[0].trim().to_string(), lat, lon, population));
    }
    Ok(Gazetteer::from_rows(rows))
}
