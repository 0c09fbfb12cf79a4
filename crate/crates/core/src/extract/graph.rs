//! Squared-distance point graph and the deterministic shortest path search.
//!
//! The contour pipeline searches an implicit graph: with the default radius
//! almost every pair of points is connected, so neighbours are enumerated on
//! the fly instead of stored. [`PointGraph`] is the explicit form of the same
//! graph, used when the stages are run one by one.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use super::{ExtractConfig, ExtractError};
use crate::types::PixelPoint;

/// Largest squared distance `d2` with `sqrt(d2) < radius`, or `None` when
/// even distance 0 fails. Equivalent to the float test for every integer
/// `d2`, because `sqrt` is monotone.
fn max_dist_sq(radius: f64) -> Option<u64> {
    let within = |d2: u64| libm::sqrt(d2 as f64) < radius;
    if !within(0) {
        return None;
    }
    let mut d2 = (radius * radius).min(u64::MAX as f64 / 2.0) as u64;
    while !within(d2) {
        d2 -= 1;
    }
    while within(d2 + 1) {
        d2 += 1;
    }
    Some(d2)
}

/// Neighbour enumeration shared by the stored and the implicit graph.
trait Adjacency {
    fn nodes(&self) -> &[PixelPoint];
    fn for_each_neighbor(&self, i: usize, f: impl FnMut(usize, u64));
}

/// Undirected graph over pixel points. Every edge costs the squared
/// Euclidean distance between its endpoints. Adjacency is stored in
/// compressed rows, each row sorted by neighbour index.
#[derive(Debug, Clone, PartialEq)]
pub struct PointGraph {
    nodes: Vec<PixelPoint>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    costs: Vec<u64>,
}

impl PointGraph {
    /// Connects every pair of distinct points closer than `radius`
    /// (strictly). Repeated points are dropped, keeping the first.
    pub fn connect(points: &[PixelPoint], radius: f64) -> Self {
        let nodes = dedup_keep_first(points);
        let n = nodes.len();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        let mut costs = Vec::new();
        offsets.push(0);

        let limit = if radius > 0.0 { max_dist_sq(radius) } else { None };
        let Some(limit) = limit.filter(|_| n > 1) else {
            offsets.resize(n + 1, 0);
            return Self {
                nodes,
                offsets,
                targets,
                costs,
            };
        };

        let cell = libm::ceil(radius).clamp(1.0, f64::from(u32::MAX)) as u64;
        let min_x = nodes.iter().map(|p| p.x).min().unwrap_or(0);
        let min_y = nodes.iter().map(|p| p.y).min().unwrap_or(0);
        let max_x = nodes.iter().map(|p| p.x).max().unwrap_or(0);
        let max_y = nodes.iter().map(|p| p.y).max().unwrap_or(0);
        let gw = (u64::from(max_x - min_x) / cell + 1) as usize;
        let gh = (u64::from(max_y - min_y) / cell + 1) as usize;
        let cell_of = |p: &PixelPoint| {
            (
                (u64::from(p.x - min_x) / cell) as usize,
                (u64::from(p.y - min_y) / cell) as usize,
            )
        };
        let mut bins: Vec<Vec<u32>> = vec![Vec::new(); gw * gh];
        for (i, p) in nodes.iter().enumerate() {
            let (cx, cy) = cell_of(p);
            bins[cy * gw + cx].push(i as u32);
        }
        let mut row = Vec::new();
        for (i, p) in nodes.iter().enumerate() {
            let (cx, cy) = cell_of(p);
            row.clear();
            for by in cy.saturating_sub(1)..=(cy + 1).min(gh - 1) {
                for bx in cx.saturating_sub(1)..=(cx + 1).min(gw - 1) {
                    for &j in &bins[by * gw + bx] {
                        let d2 = p.dist_sq(nodes[j as usize]);
                        if j as usize != i && d2 <= limit {
                            row.push((j, d2));
                        }
                    }
                }
            }
            row.sort_unstable();
            targets.extend(row.iter().map(|&(j, _)| j));
            costs.extend(row.iter().map(|&(_, c)| c));
            offsets.push(targets.len());
        }
        Self {
            nodes,
            offsets,
            targets,
            costs,
        }
    }

    pub fn nodes(&self) -> &[PixelPoint] {
        &self.nodes
    }

    pub fn node_index(&self, p: PixelPoint) -> Option<usize> {
        self.nodes.iter().position(|&q| q == p)
    }

    /// `(neighbour, cost)` pairs of node `i`, ordered by neighbour index.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, u64)> + '_ {
        let range = self.offsets[i]..self.offsets[i + 1];
        self.targets[range.clone()]
            .iter()
            .zip(&self.costs[range])
            .map(|(&j, &c)| (j as usize, c))
    }

    /// Each undirected edge once, as `(i, j, cost)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        (0..self.nodes.len()).flat_map(move |i| {
            self.neighbors(i)
                .filter(move |&(j, _)| j > i)
                .map(move |(j, c)| (i, j, c))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn cost(&self, i: usize, j: usize) -> Option<u64> {
        let range = self.offsets[i]..self.offsets[i + 1];
        self.targets[range.clone()]
            .binary_search(&(j as u32))
            .ok()
            .map(|k| self.costs[range.start + k])
    }
}

impl Adjacency for PointGraph {
    fn nodes(&self) -> &[PixelPoint] {
        &self.nodes
    }

    fn for_each_neighbor(&self, i: usize, mut f: impl FnMut(usize, u64)) {
        for (j, c) in self.neighbors(i) {
            f(j, c);
        }
    }
}

/// The graph of [`PointGraph::connect`] without stored edges.
struct RadiusGraph {
    nodes: Vec<PixelPoint>,
    limit: Option<u64>,
}

impl Adjacency for RadiusGraph {
    fn nodes(&self) -> &[PixelPoint] {
        &self.nodes
    }

    fn for_each_neighbor(&self, i: usize, mut f: impl FnMut(usize, u64)) {
        let Some(limit) = self.limit else { return };
        let p = self.nodes[i];
        for (j, &q) in self.nodes.iter().enumerate() {
            let d2 = p.dist_sq(q);
            if j != i && d2 <= limit {
                f(j, d2);
            }
        }
    }
}

fn dedup_keep_first(points: &[PixelPoint]) -> Vec<PixelPoint> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by_key(|&i| (points[i], i));
    let mut keep = vec![false; points.len()];
    for (k, &i) in order.iter().enumerate() {
        if k == 0 || points[order[k - 1]] != points[i] {
            keep[i] = true;
        }
    }
    points
        .iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(p, _)| *p)
        .collect()
}

/// `override` when set, else `|e1 - e2| - 1`.
pub fn connection_radius(e1: PixelPoint, e2: PixelPoint, config: &ExtractConfig) -> f64 {
    config
        .connection_radius_override
        .unwrap_or_else(|| e1.dist(e2) - 1.0)
}

pub(crate) fn checked_radius(points: &[PixelPoint], e1: PixelPoint, e2: PixelPoint, config: &ExtractConfig) -> Result<f64, ExtractError> {
    for e in [e1, e2] {
        if !points.contains(&e) {
            return Err(ExtractError::PointNotInGraph(e));
        }
    }
    let radius = connection_radius(e1, e2, config);
    if radius.is_nan() || radius <= 0.0 {
        return Err(ExtractError::DegenerateExtremities { radius });
    }
    Ok(radius)
}

pub fn build_graph(
    points: &[PixelPoint],
    e1: PixelPoint,
    e2: PixelPoint,
    config: &ExtractConfig,
) -> Result<PointGraph, ExtractError> {
    let radius = checked_radius(points, e1, e2, config)?;
    Ok(PointGraph::connect(points, radius))
}

/// [`shortest_path`] over the graph [`build_graph`] would return for
/// `radius`, without storing its edges.
pub(crate) fn radius_path(points: &[PixelPoint], radius: f64, from: PixelPoint, to: PixelPoint) -> Result<Vec<PixelPoint>, ExtractError> {
    let graph = RadiusGraph {
        nodes: dedup_keep_first(points),
        limit: max_dist_sq(radius),
    };
    search(&graph, from, to, Frontier::Scan)
}

type Label = (u64, u32);

/// Minimum-cost path from `from` to `to`, both included.
///
/// Ties on total cost go to the path with fewer hops; remaining ties go to
/// the lexicographically smallest point sequence.
pub fn shortest_path(graph: &PointGraph, from: PixelPoint, to: PixelPoint) -> Result<Vec<PixelPoint>, ExtractError> {
    search(graph, from, to, Frontier::Heap)
}

/// How the next node to settle is found. Both settle nodes in the same
/// order (label, then index); the scan suits dense graphs.
#[derive(Clone, Copy)]
enum Frontier {
    Heap,
    Scan,
}

fn settle<G: Adjacency>(graph: &G, src: usize, dst: usize, frontier: Frontier) -> (Vec<Option<Label>>, Vec<bool>) {
    let n = graph.nodes().len();
    let mut best: Vec<Option<Label>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    best[src] = Some((0, 0));
    heap.push(Reverse(((0u64, 0u32), src)));
    loop {
        let next = match frontier {
            Frontier::Heap => loop {
                match heap.pop() {
                    Some(Reverse((_, u))) if done[u] => continue,
                    Some(Reverse((label, u))) => break Some((label, u)),
                    None => break None,
                }
            },
            Frontier::Scan => (0..n)
                .filter(|&i| !done[i])
                .filter_map(|i| best[i].map(|l| (l, i)))
                .min(),
        };
        let Some(((cost, hops), u)) = next else { break };
        done[u] = true;
        if u == dst {
            break;
        }
        graph.for_each_neighbor(u, |v, c| {
            let cand = (cost + c, hops + 1);
            if !done[v] && best[v].is_none_or(|b| cand < b) {
                best[v] = Some(cand);
                if let Frontier::Heap = frontier {
                    heap.push(Reverse((cand, v)));
                }
            }
        });
    }
    (best, done)
}

fn search<G: Adjacency>(graph: &G, from: PixelPoint, to: PixelPoint, frontier: Frontier) -> Result<Vec<PixelPoint>, ExtractError> {
    let nodes = graph.nodes();
    let src = nodes
        .iter()
        .position(|&q| q == from)
        .ok_or(ExtractError::PointNotInGraph(from))?;
    let dst = nodes
        .iter()
        .position(|&q| q == to)
        .ok_or(ExtractError::PointNotInGraph(to))?;
    if src == dst {
        return Ok(vec![from]);
    }
    let (best, done) = settle(graph, src, dst, frontier);
    if !done[dst] {
        return Err(ExtractError::Disconnected { from, to });
    }

    // Edge u -> v is tight when it realises v's optimal label. Mark nodes
    // that reach dst through tight edges, then walk forward greedily.
    let tight = |u: usize, v: usize, c: u64| -> bool {
        match (best[u], best[v]) {
            (Some((cu, hu)), Some(lv)) => done[u] && done[v] && (cu + c, hu + 1) == lv,
            _ => false,
        }
    };
    let n = nodes.len();
    let mut reaches = vec![false; n];
    reaches[dst] = true;
    let mut stack = vec![dst];
    while let Some(v) = stack.pop() {
        graph.for_each_neighbor(v, |u, c| {
            if !reaches[u] && tight(u, v, c) {
                reaches[u] = true;
                stack.push(u);
            }
        });
    }

    let mut path = vec![from];
    let mut cur = src;
    while cur != dst {
        let mut next: Option<usize> = None;
        graph.for_each_neighbor(cur, |v, c| {
            if reaches[v] && tight(cur, v, c) && next.is_none_or(|w| nodes[v] < nodes[w]) {
                next = Some(v);
            }
        });
        cur = next.expect("tight successor exists on an optimal path");
        path.push(nodes[cur]);
    }
    Ok(path)
}
