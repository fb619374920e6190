//! Graph families with known exponents, and transformations of graphs.
//!
//! Fractal families are built by exact integer coordinate recursion, so
//! shared vertices are identified by comparing integer tuples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Coordinates, VertexId, WeightedGraph};

/// Largest graph any generator will produce.
pub const MAX_VERTICES: usize = 5_000_000;

/// Nearest-neighbour box `{0, .., side-1}^d` with unit conductances. Ids are
/// row-major with the first coordinate varying fastest; the box faces form the
/// frontier.
pub fn lattice(d: usize, side: usize) -> Result<WeightedGraph> {
    if !(1..=3).contains(&d) {
        return Err(Error::InvalidParameter(format!("lattice dimension must be 1, 2 or 3, got {d}")));
    }
    if side < 2 {
        return Err(Error::InvalidParameter(format!("lattice side must be at least 2, got {side}")));
    }
    let n = side
        .checked_pow(d as u32)
        .filter(|&n| n <= MAX_VERTICES)
        .ok_or_else(|| Error::InvalidParameter(format!("{side}^{d} vertices exceeds {MAX_VERTICES}")))?;

    let stride: Vec<usize> = (0..d).map(|axis| side.pow(axis as u32)).collect();
    let mut coords = Vec::with_capacity(n * d);
    let mut edges = Vec::with_capacity(n * d);
    let mut frontier = Vec::new();
    for id in 0..n {
        let mut on_face = false;
        for &step in &stride {
            let c = (id / step) % side;
            coords.push(c as i64);
            on_face |= c == 0 || c == side - 1;
            if c + 1 < side {
                edges.push((id, id + step, 1.0));
            }
        }
        if on_face {
            frontier.push(id);
        }
    }
    WeightedGraph::from_edges(n, edges)?
        .with_coordinates(Coordinates::new(d, coords))
        .with_frontier(frontier)
}

/// Id of the central vertex of [`lattice`]`(d, side)`.
pub fn lattice_center(d: usize, side: usize) -> VertexId {
    let mid = side / 2;
    (0..d).map(|axis| mid * side.pow(axis as u32)).sum()
}

/// Graphical Sierpiński gasket of the given level with unit conductances.
///
/// Vertices are the points `(i, j)`, `i + j <= 2^level`, of the recursive
/// triangle with corners `(0,0)`, `(2^level, 0)` and `(0, 2^level)`; ids are
/// sorted by `(j, i)`, so the corner `(0,0)` is vertex 0. The other two
/// corners form the frontier: the level-`L` gasket is the ball of radius
/// `2^L` about the origin corner of the one-sided infinite gasket, attached
/// to the rest of it only through those corners.
pub fn sierpinski_gasket(level: u32) -> Result<WeightedGraph> {
    if !(1..=10).contains(&level) {
        return Err(Error::InvalidParameter(format!("gasket level must be in 1..=10, got {level}")));
    }
    let mut unit_triangles = vec![(0i64, 0i64)];
    for step in 0..level {
        let size = 1i64 << step;
        let mut next = Vec::with_capacity(unit_triangles.len() * 3);
        for (di, dj) in [(0, 0), (size, 0), (0, size)] {
            next.extend(unit_triangles.iter().map(|&(i, j)| (i + di, j + dj)));
        }
        unit_triangles = next;
    }

    let mut points: Vec<(i64, i64)> = unit_triangles
        .iter()
        .flat_map(|&(i, j)| [(i, j), (i + 1, j), (i, j + 1)])
        .collect();
    points.sort_unstable_by_key(|&(i, j)| (j, i));
    points.dedup();
    let id = |p: (i64, i64)| -> VertexId {
        points
            .binary_search_by_key(&(p.1, p.0), |&(i, j)| (j, i))
            .expect("triangle corner is a vertex")
    };

    let edges: Vec<_> = unit_triangles
        .iter()
        .flat_map(|&(i, j)| {
            let (a, b, c) = (id((i, j)), id((i + 1, j)), id((i, j + 1)));
            [(a, b, 1.0), (a, c, 1.0), (b, c, 1.0)]
        })
        .collect();
    let side = 1i64 << level;
    let frontier = vec![id((side, 0)), id((0, side))];
    let coords = points.iter().flat_map(|&(i, j)| [i, j]).collect();
    WeightedGraph::from_edges(points.len(), edges)?
        .with_coordinates(Coordinates::new(2, coords))
        .with_frontier(frontier)
}

/// Ids of the three corners `(0,0)`, `(2^L, 0)`, `(0, 2^L)` of
/// [`sierpinski_gasket`]`(level)`.
pub fn gasket_corners(level: u32) -> [VertexId; 3] {
    let side = 1usize << level;
    let count = (3usize.pow(level + 1) + 3) / 2;
    [0, side, count - 1]
}

/// Graphical Vicsek tree: a plus sign at level 1, and at level `L+1` five
/// level-`L` copies arranged as a plus and glued at their tips. A subtree of
/// `Z²` with unit conductances; the four extreme tips form the frontier.
pub fn vicsek_tree(level: u32) -> Result<WeightedGraph> {
    if !(1..=8).contains(&level) {
        return Err(Error::InvalidParameter(format!("Vicsek level must be in 1..=8, got {level}")));
    }
    let mut centers = vec![(0i64, 0i64)];
    for step in 1..level {
        let span = 2 * 3i64.pow(step - 1);
        let mut next = Vec::with_capacity(centers.len() * 5);
        for (dx, dy) in [(0, 0), (span, 0), (-span, 0), (0, span), (0, -span)] {
            next.extend(centers.iter().map(|&(x, y)| (x + dx, y + dy)));
        }
        centers = next;
    }

    const ARMS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
    let mut points: Vec<(i64, i64)> = centers
        .iter()
        .flat_map(|&(x, y)| std::iter::once((x, y)).chain(ARMS.iter().map(move |&(dx, dy)| (x + dx, y + dy))))
        .collect();
    points.sort_unstable_by_key(|&(x, y)| (y, x));
    points.dedup();
    let id = |p: (i64, i64)| -> VertexId {
        points
            .binary_search_by_key(&(p.1, p.0), |&(x, y)| (y, x))
            .expect("plus arm is a vertex")
    };
    let edges: Vec<_> = centers
        .iter()
        .flat_map(|&(x, y)| ARMS.iter().map(move |&(dx, dy)| ((x, y), (x + dx, y + dy))))
        .map(|(a, b)| (id(a), id(b), 1.0))
        .collect();
    let tip = 3i64.pow(level - 1);
    let frontier = vec![id((tip, 0)), id((-tip, 0)), id((0, tip)), id((0, -tip))];
    let coords = points.iter().flat_map(|&(x, y)| [x, y]).collect();
    WeightedGraph::from_edges(points.len(), edges)?
        .with_coordinates(Coordinates::new(2, coords))
        .with_frontier(frontier)
}

/// Looks a vertex up by its generator coordinates.
pub fn vertex_at(g: &WeightedGraph, point: &[i64]) -> Option<VertexId> {
    let coords = g.coordinates()?;
    (0..coords.len()).find(|&v| coords.get(v) == point)
}

/// Multiplies every edge weight by an independent uniform draw from
/// `[lo, hi]`, edges visited in lexicographic order with a ChaCha8 stream
/// seeded by `seed`.
pub fn perturb_weights(g: &WeightedGraph, lo: f64, hi: f64, seed: u64) -> Result<WeightedGraph> {
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
        return Err(Error::InvalidParameter(format!(
            "perturbation range must satisfy 0 < lo <= hi, got [{lo}, {hi}]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    g.map_weights(|_, _, w| {
        let factor = if lo == hi { lo } else { rng.gen_range(lo..=hi) };
        w * factor
    })
}

/// Replaces every edge of conductance `w` by a path of `k` edges of
/// conductance `k·w` each, so the series conductance of the path is `w`.
/// Original vertices keep their ids; the interior vertices of the path for
/// the `e`-th edge (lexicographic order) get ids `n + e(k-1) ..`.
pub fn subdivide(g: &WeightedGraph, k: usize) -> Result<WeightedGraph> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("subdivision factor must be >= 2, got {k}")));
    }
    let n = g.vertex_count();
    let m = g.edge_count();
    let total = (k - 1)
        .checked_mul(m)
        .and_then(|extra| extra.checked_add(n))
        .filter(|&t| t <= MAX_VERTICES)
        .ok_or_else(|| Error::InvalidParameter(format!("subdividing {m} edges {k}-fold is too large")))?;

    let mut edges = Vec::with_capacity(m * k);
    let mut next = n;
    for (u, v, w) in g.edges() {
        let sub = w * k as f64;
        let mut prev = u;
        for _ in 1..k {
            edges.push((prev, next, sub));
            prev = next;
            next += 1;
        }
        edges.push((prev, v, sub));
    }
    WeightedGraph::from_edges(total, edges)?.with_frontier(g.frontier().to_vec())
}
