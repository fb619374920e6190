//! Finite weighted graphs `(G, μ)`.
//!
//! A [`WeightedGraph`] stores symmetric positive conductances in CSR form with
//! neighbours sorted by id, the vertex masses `μ_x = Σ_y μ(x,y)`, optional
//! integer coordinates, and the *frontier*: the vertices at which this finite
//! piece was cut out of the infinite graph it models. Distances to the
//! frontier define the audit windows used everywhere else in the crate.

use std::collections::VecDeque;
use std::ops::Deref;

use serde::Serialize;

use crate::error::{Error, Result};

pub type VertexId = usize;

/// Sentinel distance for vertices a truncated BFS did not reach.
pub const UNREACHED: u64 = u64::MAX;

/// Integer coordinates, `dim` entries per vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coordinates {
    dim: usize,
    values: Vec<i64>,
}

impl Coordinates {
    pub fn new(dim: usize, values: Vec<i64>) -> Self {
        assert!(dim > 0 && values.len().is_multiple_of(dim));
        Self { dim, values }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, v: VertexId) -> &[i64] {
        &self.values[v * self.dim..(v + 1) * self.dim]
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct WeightedGraph {
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
    weights: Vec<f64>,
    mass: Vec<f64>,
    coords: Option<Coordinates>,
    frontier: Vec<VertexId>,
}

impl WeightedGraph {
    /// Builds a graph from undirected edges `(u, v, μ(u,v))`.
    ///
    /// Rejects self-loops, repeated edges, non-positive or non-finite weights,
    /// isolated vertices and disconnected graphs.
    pub fn from_edges<I>(vertex_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (VertexId, VertexId, f64)>,
    {
        if vertex_count == 0 {
            return Err(Error::InvalidParameter("graph needs at least one vertex".into()));
        }
        let mut adjacency: Vec<Vec<(VertexId, f64)>> = vec![Vec::new(); vertex_count];
        for (u, v, w) in edges {
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::InvalidVertex {
                    vertex: u.max(v),
                    count: vertex_count,
                });
            }
            if u == v {
                return Err(Error::InvalidEdge { u, v, reason: "self-loop".into() });
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidEdge {
                    u,
                    v,
                    reason: format!("conductance must be positive and finite, got {w}"),
                });
            }
            adjacency[u].push((v, w));
            adjacency[v].push((u, w));
        }

        let mut offsets = Vec::with_capacity(vertex_count + 1);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        let mut mass = Vec::with_capacity(vertex_count);
        offsets.push(0);
        for (x, list) in adjacency.iter_mut().enumerate() {
            list.sort_by_key(|&(y, _)| y);
            if let Some(pair) = list.windows(2).find(|p| p[0].0 == p[1].0) {
                return Err(Error::InvalidEdge {
                    u: x,
                    v: pair[0].0,
                    reason: "repeated edge".into(),
                });
            }
            if list.is_empty() && vertex_count > 1 {
                return Err(Error::Disconnected { components: count_components(&adjacency) });
            }
            let mut total = 0.0;
            for &(y, w) in list.iter() {
                targets.push(y);
                weights.push(w);
                total += w;
            }
            mass.push(total);
            offsets.push(targets.len());
        }
        if vertex_count == 1 {
            return Err(Error::InvalidParameter("a single vertex carries no edges".into()));
        }

        let components = count_components(&adjacency);
        if components != 1 {
            return Err(Error::Disconnected { components });
        }

        Ok(Self {
            offsets,
            targets,
            weights,
            mass,
            coords: None,
            frontier: Vec::new(),
        })
    }

    pub fn with_coordinates(mut self, coords: Coordinates) -> Self {
        assert_eq!(coords.len(), self.vertex_count());
        self.coords = Some(coords);
        self
    }

    /// Marks the vertices where the finite piece was truncated.
    pub fn with_frontier(mut self, mut frontier: Vec<VertexId>) -> Result<Self> {
        frontier.sort_unstable();
        frontier.dedup();
        for &v in &frontier {
            self.check_vertex(v)?;
        }
        self.frontier = frontier;
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.mass.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn coordinates(&self) -> Option<&Coordinates> {
        self.coords.as_ref()
    }

    pub fn frontier(&self) -> &[VertexId] {
        &self.frontier
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::InvalidVertex {
                vertex: v,
                count: self.vertex_count(),
            })
        }
    }

    /// Neighbours of `x` with their conductances, sorted by id.
    pub fn neighbors(&self, x: VertexId) -> impl Iterator<Item = (VertexId, f64)> + '_ {
        let range = self.offsets[x]..self.offsets[x + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    pub fn degree(&self, x: VertexId) -> usize {
        self.offsets[x + 1] - self.offsets[x]
    }

    /// `μ_x`.
    pub fn mass(&self, x: VertexId) -> f64 {
        self.mass[x]
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    /// `μ(x,y)`, or `None` when `x` and `y` are not adjacent.
    pub fn conductance(&self, x: VertexId, y: VertexId) -> Option<f64> {
        let range = self.offsets[x]..self.offsets[x + 1];
        self.targets[range.clone()]
            .binary_search(&y)
            .ok()
            .map(|i| self.weights[range.start + i])
    }

    /// `p(x,y) = μ(x,y) / μ_x`.
    pub fn transition(&self, x: VertexId, y: VertexId) -> f64 {
        self.conductance(x, y).map_or(0.0, |w| w / self.mass[x])
    }

    /// Undirected edges `(u, v, w)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, f64)> + '_ {
        (0..self.vertex_count()).flat_map(move |u| {
            self.neighbors(u)
                .filter(move |&(v, _)| v > u)
                .map(move |(v, w)| (u, v, w))
        })
    }

    /// Same topology, each edge weight replaced by `f(u, v, w)` (`u < v`, called
    /// in [`edges`](Self::edges) order).
    pub fn map_weights<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(VertexId, VertexId, f64) -> f64,
    {
        let edges: Vec<_> = self.edges().map(|(u, v, w)| (u, v, f(u, v, w))).collect();
        let mut g = Self::from_edges(self.vertex_count(), edges)?;
        g.coords = self.coords.clone();
        g.frontier = self.frontier.clone();
        Ok(g)
    }

    /// BFS distances from `source`, stopping after `max_radius` layers.
    /// Unreached vertices get [`UNREACHED`].
    pub fn distances_from(&self, source: VertexId, max_radius: Option<u64>) -> Vec<u64> {
        let mut dist = vec![UNREACHED; self.vertex_count()];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(x) = queue.pop_front() {
            let d = dist[x];
            if max_radius.is_some_and(|m| d >= m) {
                continue;
            }
            for (y, _) in self.neighbors(x) {
                if dist[y] == UNREACHED {
                    dist[y] = d + 1;
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// Vertices within distance `max_radius` of `source`, in BFS order, with
    /// their distances.
    pub fn bfs_layers(&self, source: VertexId, max_radius: u64) -> Vec<(VertexId, u64)> {
        let mut seen = vec![false; self.vertex_count()];
        seen[source] = true;
        let mut order = vec![(source, 0)];
        let mut head = 0;
        while head < order.len() {
            let (x, d) = order[head];
            head += 1;
            if d >= max_radius {
                continue;
            }
            for (y, _) in self.neighbors(x) {
                if !seen[y] {
                    seen[y] = true;
                    order.push((y, d + 1));
                }
            }
        }
        order
    }

    /// Closed ball `B(x, r) = {y : d(x,y) <= r}`.
    pub fn ball(&self, center: VertexId, r: u64) -> Result<VertexSet> {
        self.check_vertex(center)?;
        let ids = self.bfs_layers(center, r).into_iter().map(|(v, _)| v);
        VertexSet::new(self, ids)
    }

    /// `V(x, r) = μ(B(x, r))`.
    pub fn ball_measure(&self, center: VertexId, r: u64) -> Result<f64> {
        self.check_vertex(center)?;
        Ok(self
            .bfs_layers(center, r)
            .iter()
            .map(|&(v, _)| self.mass[v])
            .sum())
    }

    /// `μ(A) = Σ_{x∈A} μ_x`; zero for the empty set.
    pub fn measure(&self, set: &VertexSet) -> f64 {
        set.ids.iter().map(|&x| self.mass[x]).sum()
    }

    /// `½ Σ_{x,y} (f(x) - f(y))² μ(x,y)`, i.e. one term per undirected edge.
    pub fn energy(&self, f: &[f64]) -> f64 {
        assert_eq!(f.len(), self.vertex_count());
        self.edges()
            .map(|(u, v, w)| {
                let d = f[u] - f[v];
                d * d * w
            })
            .sum()
    }

    /// Energy restricted to the edges with both endpoints in `set`.
    pub fn energy_within(&self, f: &[f64], set: &VertexSet) -> f64 {
        let mask = set.mask(self.vertex_count());
        let mut total = 0.0;
        for &u in set.ids() {
            for (v, w) in self.neighbors(u) {
                if v > u && mask[v] {
                    let d = f[u] - f[v];
                    total += d * d * w;
                }
            }
        }
        total
    }

    /// The Markov operator `P f(x) = Σ_y p(x,y) f(y)`.
    pub fn walk_step(&self, f: &[f64]) -> ScalarField {
        assert_eq!(f.len(), self.vertex_count());
        let values = (0..self.vertex_count())
            .map(|x| self.average_at(f, x))
            .collect();
        ScalarField {
            kind: FieldKind::Generic,
            values,
        }
    }

    /// `P f(x)` at a single vertex.
    pub fn average_at(&self, f: &[f64], x: VertexId) -> f64 {
        let s: f64 = self.neighbors(x).map(|(y, w)| w * f[y]).sum();
        s / self.mass[x]
    }

    /// `p₀ = min_{x~y} p(x,y)` over both orientations of every edge.
    pub fn p0_constant(&self) -> f64 {
        (0..self.vertex_count())
            .flat_map(|x| self.neighbors(x).map(move |(_, w)| (x, w)))
            .map(|(x, w)| w / self.mass[x])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn eccentricity(&self, x: VertexId) -> u64 {
        self.distances_from(x, None)
            .into_iter()
            .max()
            .unwrap_or(0)
    }

    /// Distance from `x` to the nearest frontier vertex, or the eccentricity of
    /// `x` when no frontier is recorded. Balls of radius `< reach(x)` avoid the
    /// truncation, so quantities computed on them coincide with those of the
    /// infinite graph.
    pub fn reach(&self, x: VertexId) -> u64 {
        let dist = self.distances_from(x, None);
        if self.frontier.is_empty() {
            dist.into_iter().max().unwrap_or(0)
        } else {
            self.frontier.iter().map(|&b| dist[b]).min().unwrap_or(0)
        }
    }

    /// Approximate graph centre by the double-sweep heuristic: the midpoint of
    /// a BFS path between two far-apart vertices.
    pub fn approximate_center(&self) -> VertexId {
        let farthest = |dist: &[u64]| -> VertexId {
            let max = dist.iter().copied().max().unwrap_or(0);
            dist.iter().position(|&d| d == max).unwrap_or(0)
        };
        let a = farthest(&self.distances_from(0, None));
        let dist_a = self.distances_from(a, None);
        let b = farthest(&dist_a);
        // walk back from b towards a, stopping half way
        let half = dist_a[b] / 2;
        let mut v = b;
        while dist_a[v] > half {
            v = self
                .neighbors(v)
                .map(|(y, _)| y)
                .find(|&y| dist_a[y] + 1 == dist_a[v])
                .expect("BFS parent exists");
        }
        v
    }
}

fn count_components(adjacency: &[Vec<(VertexId, f64)>]) -> usize {
    let n = adjacency.len();
    let mut seen = vec![false; n];
    let mut components = 0;
    let mut stack = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(x) = stack.pop() {
            for &(y, _) in &adjacency[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    components
}

/// A sorted set of vertices with its cached measure `μ(A)`.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexSet {
    ids: Vec<VertexId>,
    measure: f64,
}

impl VertexSet {
    pub fn new<I>(g: &WeightedGraph, ids: I) -> Result<Self>
    where
        I: IntoIterator<Item = VertexId>,
    {
        let mut ids: Vec<_> = ids.into_iter().collect();
        ids.sort_unstable();
        ids.dedup();
        for &v in &ids {
            g.check_vertex(v)?;
        }
        let measure = ids.iter().map(|&v| g.mass(v)).sum();
        Ok(Self { ids, measure })
    }

    pub fn singleton(g: &WeightedGraph, v: VertexId) -> Result<Self> {
        Self::new(g, [v])
    }

    /// All vertices not in `self`.
    pub fn complement(&self, g: &WeightedGraph) -> Self {
        let mask = self.mask(g.vertex_count());
        let ids: Vec<_> = (0..g.vertex_count()).filter(|&v| !mask[v]).collect();
        let measure = ids.iter().map(|&v| g.mass(v)).sum();
        Self { ids, measure }
    }

    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.ids.binary_search(&v).is_ok()
    }

    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for &v in &self.ids {
            mask[v] = true;
        }
        mask
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small.ids.iter().all(|&v| !large.contains(v))
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.ids.iter().all(|&v| other.contains(v))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    Potential,
    ExitTime,
    HeatKernelRow,
    Generic,
}

/// A real function on the vertices of a graph.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    kind: FieldKind,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(kind: FieldKind, values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "field entry {i} is not finite ({})",
                values[i]
            )));
        }
        Ok(Self { kind, values })
    }

    pub fn zeros(kind: FieldKind, n: usize) -> Self {
        Self {
            kind,
            values: vec![0.0; n],
        }
    }

    pub fn constant(kind: FieldKind, n: usize, c: f64) -> Self {
        assert!(c.is_finite());
        Self {
            kind,
            values: vec![c; n],
        }
    }

    pub fn indicator(kind: FieldKind, n: usize, set: &VertexSet) -> Self {
        let mut f = Self::zeros(kind, n);
        for &v in set.ids() {
            f.values[v] = 1.0;
        }
        f
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Deref for ScalarField {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> WeightedGraph {
        WeightedGraph::from_edges(n, (0..n - 1).map(|i| (i, i + 1, 1.0))).unwrap()
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(matches!(
            WeightedGraph::from_edges(2, [(0, 0, 1.0)]),
            Err(Error::InvalidEdge { .. })
        ));
        assert!(matches!(
            WeightedGraph::from_edges(2, [(0, 1, 0.0)]),
            Err(Error::InvalidEdge { .. })
        ));
        assert!(matches!(
            WeightedGraph::from_edges(2, [(0, 1, 1.0), (1, 0, 2.0)]),
            Err(Error::InvalidEdge { .. })
        ));
        assert!(matches!(
            WeightedGraph::from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)]),
            Err(Error::Disconnected { components: 2 })
        ));
        assert!(matches!(
            WeightedGraph::from_edges(3, [(0, 5, 1.0)]),
            Err(Error::InvalidVertex { vertex: 5, .. })
        ));
    }

    #[test]
    fn masses_are_incident_sums() {
        let g = WeightedGraph::from_edges(3, [(0, 1, 2.0), (1, 2, 0.5)]).unwrap();
        assert_eq!(g.masses(), &[2.0, 2.5, 0.5]);
        assert_eq!(g.conductance(1, 0), Some(2.0));
        assert_eq!(g.conductance(0, 2), None);
        assert_eq!(g.edges().count(), 2);
    }

    #[test]
    fn ball_radius_zero_is_center() {
        let g = path(5);
        let b = g.ball(2, 0).unwrap();
        assert_eq!(b.ids(), &[2]);
        assert_eq!(g.ball(2, 1).unwrap().ids(), &[1, 2, 3]);
        assert!(g.ball(7, 1).is_err());
    }

    #[test]
    fn energy_examples() {
        let g = path(3);
        assert_eq!(g.energy(&[1.0, 1.0, 1.0]), 0.0);
        assert!((g.energy(&[1.0, 0.5, 0.0]) - 0.5).abs() < 1e-15);
        let single = WeightedGraph::from_edges(2, [(0, 1, 3.5)]).unwrap();
        assert_eq!(single.energy(&[1.0, 0.0]), 3.5);
    }

    #[test]
    fn walk_step_preserves_constants() {
        let g = path(6);
        let pf = g.walk_step(&[1.0; 6]);
        assert!(pf.iter().all(|&v| (v - 1.0).abs() < 1e-15));
        let mut delta = vec![0.0; 6];
        delta[2] = 1.0;
        let pf = g.walk_step(&delta);
        assert_eq!(pf[1], 0.5);
        assert_eq!(pf[3], 0.5);
        assert_eq!(pf[2], 0.0);
    }

    #[test]
    fn p0_on_short_path() {
        // middle vertex has p = 1/2, endpoints have p = 1
        assert_eq!(path(3).p0_constant(), 0.5);
    }

    #[test]
    fn reach_uses_frontier_when_present() {
        let g = path(9);
        assert_eq!(g.reach(4), 4);
        let g = g.with_frontier(vec![8]).unwrap();
        assert_eq!(g.reach(4), 4);
        assert_eq!(g.reach(0), 8);
    }

    #[test]
    fn double_sweep_finds_path_middle() {
        assert_eq!(path(9).approximate_center(), 4);
    }

    #[test]
    fn scalar_field_rejects_nan() {
        assert!(ScalarField::new(FieldKind::Generic, vec![0.0, f64::NAN]).is_err());
    }
}
