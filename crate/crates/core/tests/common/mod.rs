#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subgauss_core::WeightedGraph;

/// Connected graph on `n` vertices: a random spanning tree plus each other
/// pair with probability `extra`, conductances uniform in `[0.5, 3]`.
pub fn random_graph(n: usize, extra: f64, seed: u64) -> WeightedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    let mut linked = std::collections::HashSet::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        linked.insert((u, v));
        edges.push((u, v, rng.gen_range(0.5..3.0)));
    }
    for u in 0..n {
        for v in u + 1..n {
            if !linked.contains(&(u, v)) && rng.gen_bool(extra) {
                edges.push((u, v, rng.gen_range(0.5..3.0)));
            }
        }
    }
    WeightedGraph::from_edges(n, edges).unwrap()
}

pub fn path(n: usize) -> WeightedGraph {
    WeightedGraph::from_edges(n, (0..n - 1).map(|i| (i, i + 1, 1.0))).unwrap()
}

/// Dense `L = D - W` with `D = diag(μ)`.
pub fn laplacian(g: &WeightedGraph) -> DMatrix<f64> {
    let n = g.vertex_count();
    let mut l = DMatrix::zeros(n, n);
    for (u, v, w) in g.edges() {
        l[(u, v)] -= w;
        l[(v, u)] -= w;
        l[(u, u)] += w;
        l[(v, v)] += w;
    }
    l
}

/// Dense transition matrix `p(x,y) = μ(x,y) / μ_x`.
pub fn transition(g: &WeightedGraph) -> DMatrix<f64> {
    let n = g.vertex_count();
    let mut p = DMatrix::zeros(n, n);
    for (u, v, w) in g.edges() {
        p[(u, v)] += w / g.mass(u);
        p[(v, u)] += w / g.mass(v);
    }
    p
}

/// Submatrix on the given rows and columns.
pub fn sub(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Capacity by minimizing the dense quadratic form: fix `f` on `a ∪ b` and
/// solve the normal equations on the rest.
pub fn dense_capacity(g: &WeightedGraph, a: &[usize], b: &[usize]) -> f64 {
    let n = g.vertex_count();
    let l = laplacian(g);
    let free: Vec<usize> = (0..n).filter(|v| !a.contains(v) && !b.contains(v)).collect();
    let mut f = DVector::zeros(n);
    for &v in a {
        f[v] = 1.0;
    }
    if !free.is_empty() {
        let l_ff = sub(&l, &free, &free);
        let l_fa = sub(&l, &free, a);
        let rhs = -(l_fa * DVector::from_element(a.len(), 1.0));
        let x = l_ff.lu().solve(&rhs).expect("Dirichlet block is invertible");
        for (i, &v) in free.iter().enumerate() {
            f[v] = x[i];
        }
    }
    (f.transpose() * &l * &f)[(0, 0)]
}

pub fn dense_solve(a: DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    a.lu().solve(b).expect("nonsingular")
}

/// Dense Green operator on `domain`: `u = L_D⁻¹ (μ f)`, zero elsewhere.
pub fn dense_green(g: &WeightedGraph, domain: &[usize], f: &[f64]) -> Vec<f64> {
    let l = laplacian(g);
    let l_dd = sub(&l, domain, domain);
    let rhs = DVector::from_iterator(domain.len(), domain.iter().map(|&v| g.mass(v) * f[v]));
    let x = dense_solve(l_dd, &rhs);
    let mut u = vec![0.0; g.vertex_count()];
    for (i, &v) in domain.iter().enumerate() {
        u[v] = x[i];
    }
    u
}

pub fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
    let scale = 1.0f64.max(a.abs()).max(b.abs());
    assert!((a - b).abs() <= tol * scale, "{what}: {a} vs {b}");
}
