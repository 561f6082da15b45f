//! Shortest-path engine and the three route algorithms compared in the
//! experiments: `dij_g` (plain distances), `dij_g_star` (enriched costs) and
//! `dij_h_star` (PoI hopping through the relationship graph, restricted to a
//! query ellipse).
//!
//! Determinism contract: on equal tentative cost the predecessor with the
//! smaller vertex id wins, and the heap breaks cost ties by vertex id. Given
//! the same graph the reported path is therefore reproducible bit for bit.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::path::Path;

use serde_json::json;

use crate::closeness::RelationshipGraph;
use crate::error::{PipelineError, Result};
use crate::gazetteer::Gazetteer;
use crate::geo::{self, Coord, CoordMode};
use crate::network::{enrichment_ratio, EnrichedGraph, RoadGraph};

/// A walk through the road graph: `vertices` has one more entry than `edges`,
/// and edge `i` connects `vertices[i]` to `vertices[i + 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutePath {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

impl RoutePath {
    /// Zero-length path standing at a single vertex.
    pub fn trivial(vertex: usize) -> Self {
        RoutePath {
            vertices: vec![vertex],
            edges: Vec::new(),
        }
    }

    pub fn length_m(&self, graph: &RoadGraph) -> f64 {
        let mut sum = 0.0;
        for &edge_idx in &self.edges {
            sum += graph.edges()[edge_idx].length_m;
        }
        sum
    }

    pub fn cost(&self, enriched: &EnrichedGraph<'_>) -> f64 {
        let mut sum = 0.0;
        for &edge_idx in &self.edges {
            sum += enriched.cost[edge_idx];
        }
        sum
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    DijG,
    DijGStar,
    DijHStar,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Algorithm::DijG => "dij-g",
            Algorithm::DijGStar => "dij-g-star",
            Algorithm::DijHStar => "dij-h-star",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for Algorithm {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dij-g" => Ok(Algorithm::DijG),
            "dij-g-star" => Ok(Algorithm::DijGStar),
            "dij-h-star" => Ok(Algorithm::DijHStar),
            other => Err(PipelineError::Config(format!(
                "unknown algorithm {other:?}, expected dij-g, dij-g-star or dij-h-star"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RouteResult {
    pub algorithm: Algorithm,
    pub path: RoutePath,
    pub length_m: f64,
    pub cost: f64,
    pub er: f64,
    /// PoI ids visited in hop order; empty for dij_g and dij_g_star.
    pub pois: Vec<u32>,
    /// True when dij_h_star could not use the relationship graph and fell
    /// back to a plain enriched-cost search.
    pub fallback: bool,
}

/// Min-heap entry ordered by cost, then vertex, with the comparison reversed
/// so `BinaryHeap::pop` yields the smallest.
#[derive(Debug, Clone, Copy)]
struct HeapEntry<V> {
    cost: f64,
    vertex: V,
}

impl<V: Ord> PartialEq for HeapEntry<V> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<V: Ord> Eq for HeapEntry<V> {}

impl<V: Ord> PartialOrd for HeapEntry<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<V: Ord> Ord for HeapEntry<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

/// Dijkstra from `source` to `target` under the given per-edge weights.
///
/// Weights must be strictly positive and finite. Returns `None` when the
/// target is unreachable; `source == target` yields the trivial path.
pub fn dijkstra(
    graph: &RoadGraph,
    weights: &[f64],
    source: usize,
    target: usize,
) -> Option<RoutePath> {
    debug_assert_eq!(weights.len(), graph.edge_count());
    debug_assert!(weights.iter().all(|w| w.is_finite() && *w > 0.0));
    if source == target {
        return Some(RoutePath::trivial(source));
    }

    let n = graph.vertex_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred_vertex = vec![usize::MAX; n];
    let mut pred_edge = vec![usize::MAX; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(HeapEntry {
        cost: 0.0,
        vertex: source,
    });

    while let Some(HeapEntry { cost, vertex: u }) = heap.pop() {
        if settled[u] {
            continue;
        }
        settled[u] = true;
        if u == target {
            break;
        }
        for &(edge_idx, v) in graph.neighbours(u) {
            if settled[v] {
                continue;
            }
            let next = cost + weights[edge_idx];
            if next < dist[v] {
                dist[v] = next;
                pred_vertex[v] = u;
                pred_edge[v] = edge_idx;
                heap.push(HeapEntry {
                    cost: next,
                    vertex: v,
                });
            } else if next == dist[v] && u < pred_vertex[v] {
                pred_vertex[v] = u;
                pred_edge[v] = edge_idx;
            }
        }
    }

    if !settled[target] {
        return None;
    }
    let mut vertices = vec![target];
    let mut edges = Vec::new();
    let mut cursor = target;
    while cursor != source {
        edges.push(pred_edge[cursor]);
        cursor = pred_vertex[cursor];
        vertices.push(cursor);
    }
    vertices.reverse();
    edges.reverse();
    Some(RoutePath { vertices, edges })
}

fn no_route(graph: &RoadGraph, s: usize, t: usize) -> PipelineError {
    PipelineError::NoRoute {
        from: graph.vertex(s).id,
        to: graph.vertex(t).id,
    }
}

fn build_result(
    algorithm: Algorithm,
    path: RoutePath,
    enriched: &EnrichedGraph<'_>,
    pois: Vec<u32>,
    fallback: bool,
) -> RouteResult {
    let length_m = path.length_m(enriched.graph);
    let cost = path.cost(enriched);
    let er = enrichment_ratio(&path, enriched);
    RouteResult {
        algorithm,
        path,
        length_m,
        cost,
        er,
        pois,
        fallback,
    }
}

/// Baseline shortest path under the original distances.
pub fn dij_g(enriched: &EnrichedGraph<'_>, s: usize, t: usize) -> Result<RouteResult> {
    let graph = enriched.graph;
    let path = dijkstra(graph, &graph.lengths(), s, t).ok_or_else(|| no_route(graph, s, t))?;
    Ok(build_result(Algorithm::DijG, path, enriched, Vec::new(), false))
}

/// Shortest path under the adjusted costs of the enriched graph.
pub fn dij_g_star(enriched: &EnrichedGraph<'_>, s: usize, t: usize) -> Result<RouteResult> {
    let graph = enriched.graph;
    let path = dijkstra(graph, &enriched.cost, s, t).ok_or_else(|| no_route(graph, s, t))?;
    Ok(build_result(Algorithm::DijGStar, path, enriched, Vec::new(), false))
}

/// Restricts the relationship graph to PoIs inside the query ellipse: P is
/// kept iff `dist(s, P) + dist(P, t) <= beta * dist(s, t)`.
pub fn ellipse_filter(
    relationships: &RelationshipGraph,
    poi_coord: &BTreeMap<u32, Coord>,
    s: Coord,
    t: Coord,
    beta: f64,
    mode: CoordMode,
) -> Result<BTreeSet<u32>> {
    if beta <= 1.0 {
        return Err(PipelineError::Config(format!(
            "detour factor beta must exceed 1, got {beta}"
        )));
    }
    let baseline = geo::distance(mode, s, t);
    if baseline <= 0.0 {
        return Err(PipelineError::Invalid(
            "ellipse filter requires distinct start and target".into(),
        ));
    }
    let bound = beta * baseline;
    let mut kept = BTreeSet::new();
    for id in relationships.node_ids() {
        let Some(&coord) = poi_coord.get(&id) else {
            continue;
        };
        let focal_sum = geo::distance(mode, s, coord) + geo::distance(mode, coord, t);
        if focal_sum <= bound {
            kept.insert(id);
        }
    }
    Ok(kept)
}

/// Dijkstra inside the ellipse-restricted relationship graph, over H* edge
/// distances. Ties prefer the smaller predecessor PoI id.
fn hop_sequence(
    relationships: &RelationshipGraph,
    kept: &BTreeSet<u32>,
    entry: u32,
    exit: u32,
) -> Option<Vec<u32>> {
    if entry == exit {
        return Some(vec![entry]);
    }
    let mut adjacency: BTreeMap<u32, Vec<(u32, f64)>> = BTreeMap::new();
    for edge in &relationships.edges {
        if kept.contains(&edge.poi_a) && kept.contains(&edge.poi_b) {
            adjacency
                .entry(edge.poi_a)
                .or_default()
                .push((edge.poi_b, edge.distance_m));
            adjacency
                .entry(edge.poi_b)
                .or_default()
                .push((edge.poi_a, edge.distance_m));
        }
    }
    for list in adjacency.values_mut() {
        list.sort_by_key(|e| e.0);
    }

    let mut dist: BTreeMap<u32, f64> = BTreeMap::new();
    let mut pred: BTreeMap<u32, u32> = BTreeMap::new();
    let mut settled: BTreeSet<u32> = BTreeSet::new();
    let mut heap = BinaryHeap::new();
    dist.insert(entry, 0.0);
    heap.push(HeapEntry {
        cost: 0.0,
        vertex: entry,
    });
    while let Some(HeapEntry { cost, vertex: u }) = heap.pop() {
        if !settled.insert(u) {
            continue;
        }
        if u == exit {
            break;
        }
        let Some(neighbours) = adjacency.get(&u) else {
            continue;
        };
        for &(v, w) in neighbours {
            if settled.contains(&v) {
                continue;
            }
            let next = cost + w;
            let current = dist.get(&v).copied().unwrap_or(f64::INFINITY);
            if next < current {
                dist.insert(v, next);
                pred.insert(v, u);
                heap.push(HeapEntry {
                    cost: next,
                    vertex: v,
                });
            } else if next == current && pred.get(&v).is_some_and(|&p| u < p) {
                pred.insert(v, u);
            }
        }
    }

    if !settled.contains(&exit) {
        return None;
    }
    let mut sequence = vec![exit];
    let mut cursor = exit;
    while cursor != entry {
        cursor = pred[&cursor];
        sequence.push(cursor);
    }
    sequence.reverse();
    Some(sequence)
}

/// PoI-hopping route: restrict H* to the query ellipse, hop from the PoI
/// nearest `s` to the PoI nearest `t` along relationship edges, and stitch
/// the hops together with enriched-cost searches in the road graph.
///
/// Falls back to `dij_g_star` (with the `fallback` flag set) when the ellipse
/// retains no PoI or entry and exit are disconnected in the restricted graph.
pub fn dij_h_star(
    enriched: &EnrichedGraph<'_>,
    relationships: &RelationshipGraph,
    s: usize,
    t: usize,
    beta: f64,
) -> Result<RouteResult> {
    let graph = enriched.graph;
    if s == t {
        return Ok(build_result(
            Algorithm::DijHStar,
            RoutePath::trivial(s),
            enriched,
            Vec::new(),
            false,
        ));
    }
    let mode = graph.mode();
    let s_coord = graph.vertex(s).coord;
    let t_coord = graph.vertex(t).coord;
    let poi_coord: BTreeMap<u32, Coord> = enriched
        .poi_vertex
        .iter()
        .map(|(&id, &vertex)| (id, graph.vertex(vertex).coord))
        .collect();

    let kept = ellipse_filter(relationships, &poi_coord, s_coord, t_coord, beta, mode)?;
    let fallback = |enriched: &EnrichedGraph<'_>| -> Result<RouteResult> {
        let base = dij_g_star(enriched, s, t)?;
        Ok(RouteResult {
            algorithm: Algorithm::DijHStar,
            fallback: true,
            ..base
        })
    };
    if kept.is_empty() {
        eprintln!(
            "warning: query ellipse retains no PoI, falling back to enriched-cost search"
        );
        return fallback(enriched);
    }

    let nearest = |target: Coord| -> u32 {
        let mut best = u32::MAX;
        let mut best_dist = f64::INFINITY;
        for &id in &kept {
            let d = geo::distance(mode, target, poi_coord[&id]);
            if d < best_dist {
                best = id;
                best_dist = d;
            }
        }
        best
    };
    let entry = nearest(s_coord);
    let exit = nearest(t_coord);

    let Some(sequence) = hop_sequence(relationships, &kept, entry, exit) else {
        eprintln!(
            "warning: PoIs {entry} and {exit} are disconnected in the restricted \
             relationship graph, falling back to enriched-cost search"
        );
        return fallback(enriched);
    };

    let mut waypoints = vec![s];
    for &poi in &sequence {
        waypoints.push(enriched.poi_vertex[&poi]);
    }
    waypoints.push(t);

    let mut vertices = vec![s];
    let mut edges = Vec::new();
    for pair in waypoints.windows(2) {
        let (from, to) = (pair[0], pair[1]);
        let segment =
            dijkstra(graph, &enriched.cost, from, to).ok_or_else(|| no_route(graph, from, to))?;
        vertices.extend_from_slice(&segment.vertices[1..]);
        edges.extend_from_slice(&segment.edges);
    }
    let path = RoutePath { vertices, edges };
    Ok(build_result(Algorithm::DijHStar, path, enriched, sequence, false))
}

/// One JSON object per route: algorithm, vertex ids, PoI names, metrics.
pub fn write_routes_jsonl(
    path: &Path,
    results: &[RouteResult],
    graph: &RoadGraph,
    gazetteer: &Gazetteer,
) -> Result<()> {
    let file = File::create(path).map_err(|e| PipelineError::io(path, e))?;
    let mut out = BufWriter::new(file);
    for result in results {
        let vertices: Vec<u32> = result
            .path
            .vertices
            .iter()
            .map(|&idx| graph.vertex(idx).id)
            .collect();
        let pois: Vec<String> = result
            .pois
            .iter()
            .map(|&id| {
                if (id as usize) < gazetteer.len() {
                    gazetteer.poi(id).name.clone()
                } else {
                    format!("poi-{id}")
                }
            })
            .collect();
        let row = json!({
            "algorithm": result.algorithm.to_string(),
            "vertices": vertices,
            "pois": pois,
            "d_m": result.length_m,
            "cost": result.cost,
            "er": result.er,
            "fallback": result.fallback,
        });
        writeln!(out, "{row}").map_err(|e| PipelineError::io(path, e))?;
    }
    Ok(())
}

/// GeoJSON FeatureCollection with one LineString per route, for plotting.
pub fn write_routes_geojson(path: &Path, results: &[RouteResult], graph: &RoadGraph) -> Result<()> {
    let features: Vec<serde_json::Value> = results
        .iter()
        .map(|result| {
            let mut coordinates: Vec<[f64; 2]> = result
                .path
                .vertices
                .iter()
                .map(|&idx| {
                    let c = graph.vertex(idx).coord;
                    [c.lon, c.lat]
                })
                .collect();
            if coordinates.len() == 1 {
                coordinates.push(coordinates[0]);
            }
            json!({
                "type": "Feature",
                "geometry": {"type": "LineString", "coordinates": coordinates},
                "properties": {
                    "algorithm": result.algorithm.to_string(),
                    "d_m": result.length_m,
                    "cost": result.cost,
                    "er": result.er,
                },
            })
        })
        .collect();
    let collection = json!({"type": "FeatureCollection", "features": features});
    let text = serde_json::to_string_pretty(&collection)
        .map_err(|e| PipelineError::Invalid(format!("geojson serialization failed: {e}")))?;
    std::fs::write(path, text + "\n").map_err(|e| PipelineError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closeness::HEdge;
    use crate::network::{enrich, map_poi_to_vertex};
    use proptest::prelude::*;

    fn planar(vertices: Vec<(u32, f64, f64)>, edges: Vec<(u32, u32, Option<f64>)>) -> RoadGraph {
        let vertices = vertices
            .into_iter()
            .map(|(id, x, y)| (id, Coord { lat: y, lon: x }))
            .collect();
        RoadGraph::from_parts(CoordMode::Planar, vertices, edges).unwrap()
    }

    fn hstar(edges: Vec<(u32, u32, f64, f64)>) -> RelationshipGraph {
        let edges = edges
            .into_iter()
            .map(|(a, b, w, d)| HEdge {
                poi_a: a,
                poi_b: b,
                w,
                distance_m: d,
                relations: vec![0],
            })
            .collect();
        RelationshipGraph { edges }
    }

    #[test]
    fn line_path_is_reconstructed_in_order() {
        let g = planar(
            (0..5).map(|i| (i, i as f64 * 100.0, 0.0)).collect(),
            (0..4).map(|i| (i, i + 1, None)).collect(),
        );
        let path = dijkstra(&g, &g.lengths(), 0, 4).unwrap();
        assert_eq!(path.vertices, vec![0, 1, 2, 3, 4]);
        assert_eq!(path.edges.len(), 4);
        assert_eq!(path.length_m(&g), 400.0);
    }

    #[test]
    fn two_cheap_hops_beat_one_expensive_edge() {
        let g = planar(
            vec![(0, 0.0, 0.0), (1, 1.0, 0.0), (2, 2.0, 0.0)],
            vec![(0, 1, Some(1.0)), (1, 2, Some(1.0)), (0, 2, Some(3.0))],
        );
        let path = dijkstra(&g, &g.lengths(), 0, 2).unwrap();
        assert_eq!(path.vertices, vec![0, 1, 2]);
        assert_eq!(path.length_m(&g), 2.0);
    }

    #[test]
    fn source_equals_target_gives_trivial_path() {
        let g = planar(vec![(0, 0.0, 0.0), (1, 1.0, 0.0)], vec![(0, 1, None)]);
        let path = dijkstra(&g, &g.lengths(), 1, 1).unwrap();
        assert_eq!(path.vertices, vec![1]);
        assert!(path.edges.is_empty());
        assert_eq!(path.length_m(&g), 0.0);
    }

    #[test]
    fn unreachable_target_returns_none() {
        let g = planar(
            vec![(0, 0.0, 0.0), (1, 1.0, 0.0), (2, 100.0, 0.0), (3, 101.0, 0.0)],
            vec![(0, 1, None), (2, 3, None)],
        );
        assert!(dijkstra(&g, &g.lengths(), 0, 3).is_none());
    }

    #[test]
    fn equal_cost_ties_prefer_smaller_predecessor_id() {
        // Diamond with two cost-2 routes; the one through vertex 1 must win.
        let edges = vec![
            (2, 3, Some(1.0)),
            (0, 2, Some(1.0)),
            (1, 3, Some(1.0)),
            (0, 1, Some(1.0)),
        ];
        let g = planar(
            vec![(0, 0.0, 0.0), (1, 1.0, 1.0), (2, 1.0, -1.0), (3, 2.0, 0.0)],
            edges,
        );
        let path = dijkstra(&g, &g.lengths(), 0, 3).unwrap();
        assert_eq!(path.vertices, vec![0, 1, 3]);
    }

    #[test]
    fn ellipse_keeps_and_drops_the_hand_examples() {
        let h = hstar(vec![(0, 1, 0.5, 1.0)]);
        let coords: BTreeMap<u32, Coord> = [
            (0, Coord { lat: 2.0, lon: 2.0 }),
            (1, Coord { lat: 3.0, lon: 0.0 }),
        ]
        .into();
        let s = Coord { lat: 0.0, lon: 0.0 };
        let t = Coord { lat: 0.0, lon: 4.0 };
        let kept = ellipse_filter(&h, &coords, s, t, 1.6, CoordMode::Planar).unwrap();
        assert!(kept.contains(&0), "focal sum 2*sqrt(8) = 5.657 is within 6.4");
        assert!(!kept.contains(&1), "focal sum 3 + 5 = 8 exceeds 6.4");
    }

    #[test]
    fn huge_beta_keeps_every_poi() {
        let h = hstar(vec![(0, 1, 0.5, 1.0), (1, 2, 0.5, 1.0)]);
        let coords: BTreeMap<u32, Coord> = [
            (0, Coord { lat: 50.0, lon: 0.0 }),
            (1, Coord { lat: -80.0, lon: 3.0 }),
            (2, Coord { lat: 0.5, lon: 0.5 }),
        ]
        .into();
        let s = Coord { lat: 0.0, lon: 0.0 };
        let t = Coord { lat: 0.0, lon: 1.0 };
        let kept = ellipse_filter(&h, &coords, s, t, 1e6, CoordMode::Planar).unwrap();
        assert_eq!(kept.len(), 3);
    }

    #[test]
    fn coincident_query_endpoints_are_rejected() {
        let h = hstar(vec![]);
        let s = Coord { lat: 1.0, lon: 1.0 };
        assert!(ellipse_filter(&h, &BTreeMap::new(), s, s, 1.6, CoordMode::Planar).is_err());
        let t = Coord { lat: 1.0, lon: 2.0 };
        assert!(ellipse_filter(&h, &BTreeMap::new(), s, t, 1.0, CoordMode::Planar).is_err());
    }

    /// Corridor fixture: a direct edge is shorter, but the enriched corridor
    /// is cheaper under c, so the two searches disagree.
    fn corridor() -> (RoadGraph, RelationshipGraph, BTreeMap<u32, usize>) {
        let g = planar(
            vec![(0, 0.0, 0.0), (1, 100.0, 0.0), (2, 200.0, 0.0), (3, 300.0, 0.0)],
            vec![
                (0, 1, None),
                (1, 2, None),
                (2, 3, None),
                (0, 3, Some(250.0)),
            ],
        );
        let h = hstar(vec![(40, 41, 0.9, 100.0)]);
        let mapping: BTreeMap<u32, usize> = [(40, 1), (41, 2)].into();
        (g, h, mapping)
    }

    #[test]
    fn enriched_search_takes_the_discounted_corridor() {
        let (g, h, mapping) = corridor();
        let enriched = enrich(&g, &h, &mapping, 1.0).unwrap();
        let base = dij_g(&enriched, 0, 3).unwrap();
        assert_eq!(base.path.vertices, vec![0, 3]);
        assert_eq!(base.length_m, 250.0);
        assert_eq!(base.er, 1.0);

        let star = dij_g_star(&enriched, 0, 3).unwrap();
        assert_eq!(star.path.vertices, vec![0, 1, 2, 3]);
        assert!((star.cost - 210.0).abs() < 1e-9);
        assert!(star.length_m >= base.length_m);
        assert!(star.cost <= base.cost);
        assert!(star.er < 1.0);
    }

    #[test]
    fn alpha_zero_makes_both_searches_agree_exactly() {
        let (g, h, mapping) = corridor();
        let enriched = enrich(&g, &h, &mapping, 0.0).unwrap();
        let base = dij_g(&enriched, 0, 3).unwrap();
        let star = dij_g_star(&enriched, 0, 3).unwrap();
        assert_eq!(base.path, star.path);
        assert_eq!(base.cost, star.cost);
    }

    #[test]
    fn hop_route_visits_corridor_pois_in_order() {
        // 6-vertex line; PoIs at vertices 1, 2, 3 chained in H*.
        let g = planar(
            (0..6).map(|i| (i, i as f64 * 100.0, 0.0)).collect(),
            (0..5).map(|i| (i, i + 1, None)).collect(),
        );
        let h = hstar(vec![(30, 31, 0.5, 100.0), (31, 32, 0.5, 100.0)]);
        let mapping: BTreeMap<u32, usize> = [(30, 1), (31, 2), (32, 3)].into();
        let enriched = enrich(&g, &h, &mapping, 1.0).unwrap();
        let result = dij_h_star(&enriched, &h, 0, 5, 1.6).unwrap();
        assert_eq!(result.pois, vec![30, 31, 32]);
        assert!(!result.fallback);
        assert_eq!(result.path.vertices, vec![0, 1, 2, 3, 4, 5]);
        for &poi_vertex in mapping.values() {
            assert!(result.path.vertices.contains(&poi_vertex));
        }
    }

    #[test]
    fn single_poi_ellipse_routes_through_it() {
        let g = planar(
            vec![(0, 0.0, 0.0), (1, 100.0, 50.0), (2, 200.0, 0.0)],
            vec![(0, 1, None), (1, 2, None), (0, 2, None)],
        );
        let h = hstar(vec![(7, 8, 0.5, 1000.0)]);
        // Both PoIs land on the hill vertex, so entry equals exit.
        let hill = map_poi_to_vertex(&g, Coord { lat: 50.0, lon: 100.0 });
        let mapping: BTreeMap<u32, usize> = [(7, hill), (8, hill)].into();
        let enriched = enrich(&g, &h, &mapping, 0.5).unwrap();
        let result = dij_h_star(&enriched, &h, 0, 2, 2.0).unwrap();
        assert!(result.path.vertices.contains(&1));
        assert!(!result.fallback);
    }

    #[test]
    fn empty_ellipse_falls_back_to_enriched_search() {
        let g = planar(
            (0..4).map(|i| (i, i as f64 * 100.0, 0.0)).collect(),
            (0..3).map(|i| (i, i + 1, None)).collect(),
        );
        // PoI far off the s-t axis: outside any tight ellipse.
        let h = hstar(vec![(9, 10, 0.5, 100.0)]);
        let far_vertex = 0usize;
        let mapping: BTreeMap<u32, usize> = [(9, far_vertex), (10, far_vertex)].into();
        let enriched = enrich(&g, &h, &mapping, 1.0).unwrap();
        let result = dij_h_star(&enriched, &h, 1, 3, 1.01).unwrap();
        assert!(result.fallback);
        assert_eq!(result.algorithm, Algorithm::DijHStar);
        let star = dij_g_star(&enriched, 1, 3).unwrap();
        assert_eq!(result.path, star.path);
    }

    fn brute_force(graph: &RoadGraph, weights: &[f64], s: usize, t: usize) -> Option<f64> {
        fn go(
            graph: &RoadGraph,
            weights: &[f64],
            u: usize,
            t: usize,
            visited: &mut Vec<bool>,
            acc: f64,
            best: &mut Option<f64>,
        ) {
            if u == t {
                if best.is_none_or(|b| acc < b) {
                    *best = Some(acc);
                }
                return;
            }
            for &(edge_idx, v) in graph.neighbours(u) {
                if !visited[v] {
                    visited[v] = true;
                    go(graph, weights, v, t, visited, acc + weights[edge_idx], best);
                    visited[v] = false;
                }
            }
        }
        let mut best = None;
        let mut visited = vec![false; graph.vertex_count()];
        visited[s] = true;
        go(graph, weights, s, t, &mut visited, 0.0, &mut best);
        best
    }

    proptest! {
        #[test]
        fn dijkstra_matches_exhaustive_enumeration(
            n in 2usize..7,
            edge_bits in proptest::collection::vec(any::<bool>(), 21),
            raw_weights in proptest::collection::vec(0.1f64..10.0, 21),
        ) {
            let mut edges = Vec::new();
            let mut k = 0;
            for a in 0..n {
                for b in (a + 1)..n {
                    if edge_bits[k] {
                        edges.push((a as u32, b as u32, Some(raw_weights[k])));
                    }
                    k += 1;
                }
            }
            let vertices = (0..n).map(|i| (i as u32, i as f64, 0.0)).collect();
            let g = planar(vertices, edges);
            let weights = g.lengths();
            let fast = dijkstra(&g, &weights, 0, n - 1).map(|p| {
                let mut sum = 0.0;
                for &e in &p.edges {
                    sum += weights[e];
                }
                sum
            });
            let slow = brute_force(&g, &weights, 0, n - 1);
            prop_assert_eq!(fast, slow);
        }
    }
}
