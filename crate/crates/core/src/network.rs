//! Road network `G = (V, E, d)` and its enriched counterpart `G* = (V, E, c)`.
//!
//! Vertices live in a flat array sorted by external id, so the internal index
//! order coincides with the id order and every id-based tie-break can be done
//! on indices. Edges are undirected and carry a positive length in metres,
//! either taken from the input file or computed from endpoint coordinates.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write as _};
use std::path::Path;

use rayon::prelude::*;

use crate::closeness::RelationshipGraph;
use crate::error::{PipelineError, Result};
use crate::gazetteer::Gazetteer;
use crate::geo::{self, Coord, CoordMode};
use crate::routing::{self, RoutePath};

/// Floor applied to every `1 - alpha * w` factor so that edge costs stay
/// strictly positive even at `alpha = 1`, `w = 1`.
pub const FACTOR_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
pub struct Vertex {
    pub id: u32,
    pub coord: Coord,
}

/// Undirected edge between two internal vertex indices.
#[derive(Debug, Clone, Copy)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub length_m: f64,
}

#[derive(Debug, Clone)]
pub struct RoadGraph {
    mode: CoordMode,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    /// Per vertex: (edge index, neighbour vertex index) pairs, sorted by
    /// neighbour index so traversal order is reproducible.
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl RoadGraph {
    /// Builds a graph from raw vertex and edge lists.
    ///
    /// `edges` entries are `(src id, dst id, explicit length)`; when the
    /// length is absent it is computed from the endpoint coordinates.
    pub fn from_parts(
        mode: CoordMode,
        vertices: Vec<(u32, Coord)>,
        edges: Vec<(u32, u32, Option<f64>)>,
    ) -> Result<Self> {
        if vertices.is_empty() {
            return Err(PipelineError::Invalid("road graph has no vertices".into()));
        }
        let mut sorted = vertices;
        sorted.sort_by_key(|(id, _)| *id);
        for pair in sorted.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(PipelineError::Invalid(format!(
                    "duplicate vertex id {}",
                    pair[0].0
                )));
            }
        }
        let vertices: Vec<Vertex> = sorted
            .into_iter()
            .map(|(id, coord)| Vertex { id, coord })
            .collect();
        let index_of: BTreeMap<u32, usize> = vertices
            .iter()
            .enumerate()
            .map(|(idx, v)| (v.id, idx))
            .collect();

        let mut resolved = Vec::with_capacity(edges.len());
        for (src, dst, explicit) in edges {
            let a = *index_of.get(&src).ok_or_else(|| {
                PipelineError::Invalid(format!("edge references unknown vertex {src}"))
            })?;
            let b = *index_of.get(&dst).ok_or_else(|| {
                PipelineError::Invalid(format!("edge references unknown vertex {dst}"))
            })?;
            if a == b {
                return Err(PipelineError::Invalid(format!(
                    "self-loop at vertex {src}"
                )));
            }
            let length_m = match explicit {
                Some(l) => l,
                None => geo::distance(mode, vertices[a].coord, vertices[b].coord),
            };
            if !length_m.is_finite() || length_m <= 0.0 {
                return Err(PipelineError::Invalid(format!(
                    "edge {src}-{dst} has nonpositive length {length_m}"
                )));
            }
            resolved.push(Edge { a, b, length_m });
        }

        let mut adjacency = vec![Vec::new(); vertices.len()];
        for (edge_idx, edge) in resolved.iter().enumerate() {
            adjacency[edge.a].push((edge_idx, edge.b));
            adjacency[edge.b].push((edge_idx, edge.a));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(edge_idx, neighbour)| (neighbour, edge_idx));
        }

        Ok(RoadGraph {
            mode,
            vertices,
            edges: resolved,
            adjacency,
        })
    }

    pub fn mode(&self) -> CoordMode {
        self.mode
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex(&self, idx: usize) -> &Vertex {
        &self.vertices[idx]
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Internal index for an external vertex id.
    pub fn index_of(&self, id: u32) -> Option<usize> {
        self.vertices
            .binary_search_by_key(&id, |v| v.id)
            .ok()
    }

    pub fn neighbours(&self, idx: usize) -> &[(usize, usize)] {
        &self.adjacency[idx]
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.length_m).collect()
    }

    /// Diagonal of the coordinate bounding box, the network's Euclidean
    /// extent used to scale pair-sampling distance bounds.
    pub fn extent_m(&self) -> f64 {
        let mut min_lat = f64::INFINITY;
        let mut max_lat = f64::NEG_INFINITY;
        let mut min_lon = f64::INFINITY;
        let mut max_lon = f64::NEG_INFINITY;
        for v in &self.vertices {
            min_lat = min_lat.min(v.coord.lat);
            max_lat = max_lat.max(v.coord.lat);
            min_lon = min_lon.min(v.coord.lon);
            max_lon = max_lon.max(v.coord.lon);
        }
        let a = Coord {
            lat: min_lat,
            lon: min_lon,
        };
        let b = Coord {
            lat: max_lat,
            lon: max_lon,
        };
        geo::distance(self.mode, a, b)
    }
}

/// Nearest vertex to a coordinate, ties broken by smallest vertex id.
///
/// Internal indices are in id order, so scanning forward and replacing only
/// on a strictly smaller distance realises the tie-break for free.
pub fn map_poi_to_vertex(graph: &RoadGraph, coord: Coord) -> usize {
    let mut best = 0usize;
    let mut best_dist = f64::INFINITY;
    for (idx, vertex) in graph.vertices().iter().enumerate() {
        let d = geo::distance(graph.mode(), coord, vertex.coord);
        if d < best_dist {
            best = idx;
            best_dist = d;
        }
    }
    best
}

/// Maps every PoI id in `ids` onto its nearest graph vertex.
pub fn map_pois<I>(graph: &RoadGraph, gazetteer: &Gazetteer, ids: I) -> Result<BTreeMap<u32, usize>>
where
    I: IntoIterator<Item = u32>,
{
    let mut mapping = BTreeMap::new();
    for id in ids {
        if id as usize >= gazetteer.len() {
            return Err(PipelineError::Invalid(format!("unknown PoI id {id}")));
        }
        let poi = gazetteer.poi(id);
        if let Entry::Vacant(slot) = mapping.entry(id) {
            slot.insert(map_poi_to_vertex(graph, poi.coord));
        }
    }
    Ok(mapping)
}

/// Road graph with adjusted per-edge costs `c(e) = d(e) * prod(1 - alpha w)`.
#[derive(Debug, Clone)]
pub struct EnrichedGraph<'g> {
    pub graph: &'g RoadGraph,
    /// Adjusted cost per edge, parallel to `graph.edges()`.
    pub cost: Vec<f64>,
    /// Number of PoI-pair shortest paths covering each edge.
    pub covering_pairs: Vec<u32>,
    pub alpha: f64,
    /// PoI id to internal vertex index, for every PoI in the relationship graph.
    pub poi_vertex: BTreeMap<u32, usize>,
    /// Pairs whose endpoints were mutually unreachable and contributed nothing.
    pub skipped_pairs: usize,
}

/// Builds `G*` by discounting every edge on the shortest `d`-path between
/// each related PoI pair.
///
/// All pair paths are computed against the original lengths before any factor
/// is applied, so the result does not depend on pair order. Pairs mapping to
/// the same vertex cover no edges; unreachable pairs are skipped with a
/// warning.
pub fn enrich<'g>(
    graph: &'g RoadGraph,
    relationships: &RelationshipGraph,
    poi_vertex: &BTreeMap<u32, usize>,
    alpha: f64,
) -> Result<EnrichedGraph<'g>> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(PipelineError::Config(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    let lengths = graph.lengths();
    let endpoints: Vec<(usize, usize, f64)> = relationships
        .edges
        .iter()
        .filter_map(|edge| {
            let &sv = poi_vertex.get(&edge.poi_a)?;
            let &tv = poi_vertex.get(&edge.poi_b)?;
            Some((sv, tv, edge.w))
        })
        .collect();
    if endpoints.len() < relationships.edges.len() {
        eprintln!(
            "warning: {} relationship edges reference unmapped PoIs and were ignored",
            relationships.edges.len() - endpoints.len()
        );
    }

    let paths: Vec<Option<RoutePath>> = endpoints
        .par_iter()
        .map(|&(sv, tv, _)| {
            if sv == tv {
                Some(RoutePath::trivial(sv))
            } else {
                routing::dijkstra(graph, &lengths, sv, tv)
            }
        })
        .collect();

    let mut factor = vec![1.0f64; graph.edge_count()];
    let mut covering_pairs = vec![0u32; graph.edge_count()];
    let mut skipped_pairs = 0usize;
    for (path, &(sv, tv, w)) in paths.iter().zip(&endpoints) {
        match path {
            Some(path) => {
                let pair_factor = (1.0 - alpha * w).max(FACTOR_FLOOR);
                for &edge_idx in &path.edges {
                    factor[edge_idx] *= pair_factor;
                    covering_pairs[edge_idx] += 1;
                }
            }
            None => {
                skipped_pairs += 1;
                eprintln!(
                    "warning: no road path between PoI vertices {} and {}, pair skipped",
                    graph.vertex(sv).id,
                    graph.vertex(tv).id
                );
            }
        }
    }

    let cost = lengths
        .iter()
        .zip(&factor)
        .map(|(d, f)| d * f)
        .collect();

    Ok(EnrichedGraph {
        graph,
        cost,
        covering_pairs,
        alpha,
        poi_vertex: poi_vertex.clone(),
        skipped_pairs,
    })
}

/// `er(p) = c(p) / d(p)`: length-normalised cost of a path, 1 when the path
/// avoids every enriched edge, approaching 0 on fully discounted edges.
pub fn enrichment_ratio(path: &RoutePath, enriched: &EnrichedGraph<'_>) -> f64 {
    if path.edges.is_empty() {
        return 1.0;
    }
    let mut cost = 0.0;
    let mut length = 0.0;
    for &edge_idx in &path.edges {
        cost += enriched.cost[edge_idx];
        length += enriched.graph.edges()[edge_idx].length_m;
    }
    cost / length
}

fn parse_f64(field: &str, path: &Path, line: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| PipelineError::Parse {
        path: path.to_path_buf(),
        line,
        msg: format!("invalid number {field:?}"),
    })
}

fn parse_u32(field: &str, path: &Path, line: usize) -> Result<u32> {
    field.trim().parse::<u32>().map_err(|_| PipelineError::Parse {
        path: path.to_path_buf(),
        line,
        msg: format!("invalid vertex id {field:?}"),
    })
}

/// Loads a road graph from a nodes TSV (`id, lat, lon`) and an edges TSV
/// (`src, dst[, length_m]`). Lines starting with `#` are comments.
pub fn load_graph(nodes_path: &Path, edges_path: &Path, mode: CoordMode) -> Result<RoadGraph> {
    let nodes_file = File::open(nodes_path).map_err(|e| PipelineError::io(nodes_path, e))?;
    let mut vertices = Vec::new();
    for (line_no, line) in BufReader::new(nodes_file).lines().enumerate() {
        let line = line.map_err(|e| PipelineError::io(nodes_path, e))?;
        let line_no = line_no + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(PipelineError::Parse {
                path: nodes_path.to_path_buf(),
                line: line_no,
                msg: format!("expected 3 tab-separated fields, got {}", fields.len()),
            });
        }
        let id = parse_u32(fields[0], nodes_path, line_no)?;
        let lat = parse_f64(fields[1], nodes_path, line_no)?;
        let lon = parse_f64(fields[2], nodes_path, line_no)?;
        if !lat.is_finite() || !lon.is_finite() {
            return Err(PipelineError::Parse {
                path: nodes_path.to_path_buf(),
                line: line_no,
                msg: "non-finite coordinate".into(),
            });
        }
        if mode == CoordMode::Geodesic && (lat.abs() > 90.0 || lon.abs() > 180.0) {
            return Err(PipelineError::Parse {
                path: nodes_path.to_path_buf(),
                line: line_no,
                msg: format!("coordinate ({lat}, {lon}) out of range"),
            });
        }
        vertices.push((id, Coord { lat, lon }));
    }

    let edges_file = File::open(edges_path).map_err(|e| PipelineError::io(edges_path, e))?;
    let mut edges = Vec::new();
    for (line_no, line) in BufReader::new(edges_file).lines().enumerate() {
        let line = line.map_err(|e| PipelineError::io(edges_path, e))?;
        let line_no = line_no + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 && fields.len() != 3 {
            return Err(PipelineError::Parse {
                path: edges_path.to_path_buf(),
                line: line_no,
                msg: format!("expected 2 or 3 tab-separated fields, got {}", fields.len()),
            });
        }
        let src = parse_u32(fields[0], edges_path, line_no)?;
        let dst = parse_u32(fields[1], edges_path, line_no)?;
        let explicit = if fields.len() == 3 && !fields[2].trim().is_empty() {
            Some(parse_f64(fields[2], edges_path, line_no)?)
        } else {
            None
        };
        edges.push((src, dst, explicit));
    }

    RoadGraph::from_parts(mode, vertices, edges)
}

pub fn write_nodes_tsv(path: &Path, graph: &RoadGraph) -> Result<()> {
    let file = File::create(path).map_err(|e| PipelineError::io(path, e))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "# id\tlat\tlon").map_err(|e| PipelineError::io(path, e))?;
    for v in graph.vertices() {
        writeln!(out, "{}\t{}\t{}", v.id, v.coord.lat, v.coord.lon)
            .map_err(|e| PipelineError::io(path, e))?;
    }
    Ok(())
}

pub fn write_edges_tsv(path: &Path, graph: &RoadGraph) -> Result<()> {
    let file = File::create(path).map_err(|e| PipelineError::io(path, e))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "# src\tdst\tlength_m").map_err(|e| PipelineError::io(path, e))?;
    for e in graph.edges() {
        writeln!(
            out,
            "{}\t{}\t{}",
            graph.vertex(e.a).id,
            graph.vertex(e.b).id,
            e.length_m
        )
        .map_err(|e| PipelineError::io(path, e))?;
    }
    Ok(())
}

/// Writes the enriched edge list: `src, dst, d_m, c, n_covering_pairs`.
pub fn write_enriched_tsv(path: &Path, enriched: &EnrichedGraph<'_>) -> Result<()> {
    let file = File::create(path).map_err(|e| PipelineError::io(path, e))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "# src\tdst\td_m\tc\tn_covering_pairs").map_err(|e| PipelineError::io(path, e))?;
    let graph = enriched.graph;
    for (idx, e) in graph.edges().iter().enumerate() {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            graph.vertex(e.a).id,
            graph.vertex(e.b).id,
            e.length_m,
            enriched.cost[idx],
            enriched.covering_pairs[idx],
        )
        .map_err(|e| PipelineError::io(path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closeness::HEdge;

    fn planar(vertices: Vec<(u32, f64, f64)>, edges: Vec<(u32, u32, Option<f64>)>) -> RoadGraph {
        let vertices = vertices
            .into_iter()
            .map(|(id, x, y)| (id, Coord { lat: y, lon: x }))
            .collect();
        RoadGraph::from_parts(CoordMode::Planar, vertices, edges).unwrap()
    }

    fn line_graph(n: u32, spacing: f64) -> RoadGraph {
        let vertices = (0..n).map(|i| (i, i as f64 * spacing, 0.0)).collect();
        let edges = (0..n - 1).map(|i| (i, i + 1, None)).collect();
        planar(vertices, edges)
    }

    fn hstar(edges: Vec<(u32, u32, f64)>) -> RelationshipGraph {
        let edges = edges
            .into_iter()
            .map(|(a, b, w)| HEdge {
                poi_a: a,
                poi_b: b,
                w,
                distance_m: 1.0,
                relations: vec![0],
            })
            .collect();
        RelationshipGraph { edges }
    }

    #[test]
    fn square_graph_computes_lengths_from_coordinates() {
        let g = planar(
            vec![(0, 0.0, 0.0), (1, 100.0, 0.0), (2, 100.0, 100.0), (3, 0.0, 100.0)],
            vec![(0, 1, None), (1, 2, None), (2, 3, None), (3, 0, None)],
        );
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edge_count(), 4);
        for e in g.edges() {
            assert_eq!(e.length_m, 100.0);
        }
    }

    #[test]
    fn explicit_length_overrides_computed() {
        let g = planar(
            vec![(0, 0.0, 0.0), (1, 100.0, 0.0)],
            vec![(0, 1, Some(250.0))],
        );
        assert_eq!(g.edges()[0].length_m, 250.0);
    }

    #[test]
    fn vertices_are_sorted_by_id() {
        let g = planar(
            vec![(5, 0.0, 0.0), (1, 10.0, 0.0), (3, 20.0, 0.0)],
            vec![(5, 1, None)],
        );
        let ids: Vec<u32> = g.vertices().iter().map(|v| v.id).collect();
        assert_eq!(ids, vec![1, 3, 5]);
        assert_eq!(g.index_of(3), Some(1));
        assert_eq!(g.index_of(2), None);
    }

    #[test]
    fn dangling_edge_is_rejected() {
        let err = RoadGraph::from_parts(
            CoordMode::Planar,
            vec![(0, Coord { lat: 0.0, lon: 0.0 })],
            vec![(0, 9, None)],
        )
        .unwrap_err();
        assert!(err.to_string().contains("unknown vertex 9"));
    }

    #[test]
    fn zero_length_and_self_loop_are_rejected() {
        let coincident = RoadGraph::from_parts(
            CoordMode::Planar,
            vec![(0, Coord { lat: 0.0, lon: 0.0 }), (1, Coord { lat: 0.0, lon: 0.0 })],
            vec![(0, 1, None)],
        );
        assert!(coincident.is_err());
        let looped = RoadGraph::from_parts(
            CoordMode::Planar,
            vec![(0, Coord { lat: 0.0, lon: 0.0 })],
            vec![(0, 0, None)],
        );
        assert!(looped.is_err());
    }

    #[test]
    fn duplicate_vertex_id_is_rejected() {
        let err = RoadGraph::from_parts(
            CoordMode::Planar,
            vec![(0, Coord { lat: 0.0, lon: 0.0 }), (0, Coord { lat: 1.0, lon: 0.0 })],
            vec![],
        )
        .unwrap_err();
        assert!(err.to_string().contains("duplicate vertex id 0"));
    }

    #[test]
    fn poi_mapping_prefers_smaller_id_on_ties() {
        // Vertices 3 and 7 both sit 50 m from the query point.
        let g = planar(
            vec![(7, 100.0, 0.0), (3, 0.0, 0.0), (1, 500.0, 500.0)],
            vec![(3, 7, None)],
        );
        let idx = map_poi_to_vertex(&g, Coord { lat: 0.0, lon: 50.0 });
        assert_eq!(g.vertex(idx).id, 3);
    }

    #[test]
    fn poi_coincident_with_vertex_maps_to_it() {
        let g = line_graph(4, 100.0);
        let idx = map_poi_to_vertex(&g, Coord { lat: 0.0, lon: 200.0 });
        assert_eq!(g.vertex(idx).id, 2);
    }

    #[test]
    fn enrich_discounts_every_edge_on_the_pair_path() {
        // A-B-C line with PoIs at A and C: one shortest path, both edges scaled.
        let g = line_graph(3, 100.0);
        let mapping: BTreeMap<u32, usize> = [(10, 0), (11, 2)].into();
        let enriched = enrich(&g, &hstar(vec![(10, 11, 0.4)]), &mapping, 0.5).unwrap();
        for idx in 0..2 {
            assert!((enriched.cost[idx] - 80.0).abs() < 1e-12);
            assert_eq!(enriched.covering_pairs[idx], 1);
        }
    }

    #[test]
    fn factors_from_distinct_pairs_multiply() {
        let g = line_graph(4, 100.0);
        // Pairs (0,3) and (1,2) both cover the middle edge.
        let mapping: BTreeMap<u32, usize> = [(20, 0), (21, 1), (22, 2), (23, 3)].into();
        let h = hstar(vec![(20, 23, 0.5), (21, 22, 0.25)]);
        let enriched = enrich(&g, &h, &mapping, 1.0).unwrap();
        let middle = g
            .edges()
            .iter()
            .position(|e| e.a == 1 && e.b == 2)
            .unwrap();
        assert!((enriched.cost[middle] - 100.0 * 0.5 * 0.75).abs() < 1e-12);
        assert_eq!(enriched.covering_pairs[middle], 2);
        let outer = g.edges().iter().position(|e| e.a == 0).unwrap();
        assert!((enriched.cost[outer] - 50.0).abs() < 1e-12);
        assert_eq!(enriched.covering_pairs[outer], 1);
    }

    #[test]
    fn alpha_zero_leaves_costs_bitwise_equal() {
        let g = line_graph(5, 137.5);
        let mapping: BTreeMap<u32, usize> = [(1, 0), (2, 4)].into();
        let enriched = enrich(&g, &hstar(vec![(1, 2, 0.9)]), &mapping, 0.0).unwrap();
        for (idx, e) in g.edges().iter().enumerate() {
            assert_eq!(enriched.cost[idx], e.length_m);
        }
    }

    #[test]
    fn full_weight_factor_is_clamped_positive() {
        let g = line_graph(2, 100.0);
        let mapping: BTreeMap<u32, usize> = [(1, 0), (2, 1)].into();
        let enriched = enrich(&g, &hstar(vec![(1, 2, 1.0)]), &mapping, 1.0).unwrap();
        assert!(enriched.cost[0] > 0.0);
        assert!((enriched.cost[0] - 100.0 * FACTOR_FLOOR).abs() < 1e-15);
    }

    #[test]
    fn unreachable_pair_is_skipped() {
        let g = planar(
            vec![(0, 0.0, 0.0), (1, 100.0, 0.0), (2, 5000.0, 0.0), (3, 5100.0, 0.0)],
            vec![(0, 1, None), (2, 3, None)],
        );
        let mapping: BTreeMap<u32, usize> = [(1, 0), (2, 2)].into();
        let enriched = enrich(&g, &hstar(vec![(1, 2, 0.8)]), &mapping, 1.0).unwrap();
        assert_eq!(enriched.skipped_pairs, 1);
        for (idx, e) in g.edges().iter().enumerate() {
            assert_eq!(enriched.cost[idx], e.length_m);
        }
    }

    #[test]
    fn enrichment_ratio_of_untouched_path_is_one() {
        let g = line_graph(4, 100.0);
        let mapping = BTreeMap::new();
        let enriched = enrich(&g, &hstar(vec![]), &mapping, 1.0).unwrap();
        let path = routing::dijkstra(&g, &g.lengths(), 0, 3).unwrap();
        assert_eq!(enrichment_ratio(&path, &enriched), 1.0);
    }

    #[test]
    fn enrichment_ratio_matches_hand_computation() {
        // Two-edge path with costs (80, 100) against lengths (100, 100).
        let g = line_graph(3, 100.0);
        let mapping: BTreeMap<u32, usize> = [(1, 0), (2, 1)].into();
        let enriched = enrich(&g, &hstar(vec![(1, 2, 0.2)]), &mapping, 1.0).unwrap();
        let path = routing::dijkstra(&g, &g.lengths(), 0, 2).unwrap();
        assert!((enrichment_ratio(&path, &enriched) - 0.9).abs() < 1e-12);
    }

    #[test]
    fn extent_is_bounding_box_diagonal() {
        let g = planar(
            vec![(0, 0.0, 0.0), (1, 300.0, 400.0), (2, 100.0, 100.0)],
            vec![(0, 1, None)],
        );
        assert!((g.extent_m() - 500.0).abs() < 1e-9);
    }

    #[test]
    fn graph_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = planar(
            vec![(0, 0.0, 0.0), (1, 123.25, 0.0), (2, 123.25, 77.5)],
            vec![(0, 1, None), (1, 2, Some(99.125))],
        );
        let nodes = dir.path().join("nodes.tsv");
        let edges = dir.path().join("edges.tsv");
        write_nodes_tsv(&nodes, &g).unwrap();
        write_edges_tsv(&edges, &g).unwrap();
        let back = load_graph(&nodes, &edges, CoordMode::Planar).unwrap();
        assert_eq!(back.vertex_count(), 3);
        assert_eq!(back.edges()[0].length_m, g.edges()[0].length_m);
        assert_eq!(back.edges()[1].length_m, 99.125);
    }

    #[test]
    fn geodesic_mode_rejects_out_of_range_nodes() {
        let dir = tempfile::tempdir().unwrap();
        let nodes = dir.path().join("nodes.tsv");
        std::fs::write(&nodes, "0\t95.0\t10.0\n").unwrap();
        let edges = dir.path().join("edges.tsv");
        std::fs::write(&edges, "").unwrap();
        assert!(load_graph(&nodes, &edges, CoordMode::Geodesic).is_err());
        assert!(load_graph(&nodes, &edges, CoordMode::Planar).is_ok());
    }
}
