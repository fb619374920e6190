//! Sparse symmetric operators on vertex subsets, preconditioned conjugate
//! gradients, and a deflated power method for generalized Rayleigh quotients.
//!
//! Reductions are sequential so repeated runs are bit-identical.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{VertexId, VertexSet, WeightedGraph};

const NOT_IN_DOMAIN: usize = usize::MAX;

/// A symmetric positive semidefinite bilinear form on `R^dim`.
pub trait QuadraticForm: Sync {
    fn dim(&self) -> usize;

    /// `y = A x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    fn diagonal(&self) -> Vec<f64>;

    /// `xᵀ A x`.
    fn form(&self, x: &[f64]) -> f64 {
        let mut y = vec![0.0; self.dim()];
        self.apply(x, &mut y);
        dot(x, &y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorMode {
    /// `L f(x) = Σ_y μ(x,y)(f(x) - f(y))` with `f = 0` off the domain.
    Dirichlet,
    /// Graph Laplacian of the subgraph induced on the domain (reflecting
    /// boundary): only edges with both endpoints inside count.
    Neumann,
    /// `f(x) ↦ μ_x f(x)`.
    Mass,
}

/// A graph operator restricted to a vertex subset, stored as local CSR.
#[derive(Clone, Debug)]
pub struct SparseSymOperator {
    ids: Vec<VertexId>,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    diag: Vec<f64>,
    mode: OperatorMode,
}

impl SparseSymOperator {
    pub fn new(g: &WeightedGraph, domain: &VertexSet, mode: OperatorMode) -> Self {
        let ids = domain.ids().to_vec();
        let mut local = vec![NOT_IN_DOMAIN; g.vertex_count()];
        for (i, &v) in ids.iter().enumerate() {
            local[v] = i;
        }
        let mut row_start = Vec::with_capacity(ids.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut diag = Vec::with_capacity(ids.len());
        row_start.push(0);
        for &x in &ids {
            let mut d = 0.0;
            if mode != OperatorMode::Mass {
                for (y, w) in g.neighbors(x) {
                    let j = local[y];
                    if j != NOT_IN_DOMAIN {
                        cols.push(j);
                        vals.push(-w);
                        d += w;
                    }
                }
            }
            diag.push(match mode {
                OperatorMode::Neumann => d,
                OperatorMode::Dirichlet | OperatorMode::Mass => g.mass(x),
            });
            row_start.push(cols.len());
        }
        Self {
            ids,
            row_start,
            cols,
            vals,
            diag,
            mode,
        }
    }

    pub fn mode(&self) -> OperatorMode {
        self.mode
    }

    /// Global ids of the domain, in local index order.
    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    /// Global field → local vector.
    pub fn restrict(&self, global: &[f64]) -> Vec<f64> {
        self.ids.iter().map(|&v| global[v]).collect()
    }

    /// Local vector → global field, zero off the domain.
    pub fn extend(&self, local: &[f64], n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (&v, &x) in self.ids.iter().zip(local) {
            out[v] = x;
        }
        out
    }
}

impl QuadraticForm for SparseSymOperator {
    fn dim(&self) -> usize {
        self.ids.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.ids.len() {
            let mut acc = self.diag[i] * x[i];
            for k in self.row_start[i]..self.row_start[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            y[i] = acc;
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        self.diag.clone()
    }
}

/// `xᵀ A x = Σ_{i∈S} w_i (x_i - x̄_S)²` with `x̄_S` the `w`-weighted mean over
/// the member indices `S`.
#[derive(Clone, Debug)]
pub struct VarianceForm {
    dim: usize,
    members: Vec<usize>,
    weights: Vec<f64>,
    total: f64,
}

impl VarianceForm {
    pub fn new(dim: usize, members: Vec<usize>, weights: Vec<f64>) -> Self {
        assert_eq!(members.len(), weights.len());
        assert!(members.iter().all(|&i| i < dim));
        let total = weights.iter().sum();
        Self {
            dim,
            members,
            weights,
            total,
        }
    }

    fn mean(&self, x: &[f64]) -> f64 {
        let s: f64 = self
            .members
            .iter()
            .zip(&self.weights)
            .map(|(&i, &w)| w * x[i])
            .sum();
        s / self.total
    }
}

impl QuadraticForm for VarianceForm {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        let mean = self.mean(x);
        for (&i, &w) in self.members.iter().zip(&self.weights) {
            y[i] = w * (x[i] - mean);
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim];
        for (&i, &w) in self.members.iter().zip(&self.weights) {
            d[i] = w * (1.0 - w / self.total);
        }
        d
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Gram-Schmidt; drops vectors that are (numerically) dependent.
pub fn orthonormalize(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut u = v.clone();
        project_out(&mut u, &basis);
        let n = norm(&u);
        if n > 1e-12 * norm(v).max(f64::MIN_POSITIVE) {
            u.iter_mut().for_each(|x| *x /= n);
            basis.push(u);
        }
    }
    basis
}

fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for q in basis {
        let c = dot(v, q);
        v.iter_mut().zip(q).for_each(|(x, qi)| *x -= c * qi);
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CgOptions {
    pub rel_tol: f64,
    /// `None` selects [`default_max_iter`].
    pub max_iter: Option<usize>,
    pub jacobi: bool,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_iter: None,
            jacobi: true,
        }
    }
}

impl CgOptions {
    pub fn with_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

/// `max(20·√dim + 200, 2·dim)` iterations.
pub fn default_max_iter(dim: usize) -> usize {
    let sqrt_rule = 20.0 * (dim as f64).sqrt() + 200.0;
    (sqrt_rule as usize).max(2 * dim)
}

#[derive(Clone, Debug)]
pub struct CgSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// True residual `‖b - A x‖ / ‖b‖` of the returned iterate.
    pub relative_residual: f64,
    /// Whether `½ xᵀAx - bᵀx` decreased at every iteration (up to rounding).
    pub objective_monotone: bool,
}

/// Solves `A x = b` for symmetric positive definite `A`, stopping once
/// `‖b - A x‖₂ <= rel_tol · ‖b‖₂`.
pub fn cg_solve(op: &dyn QuadraticForm, rhs: &[f64], rel_tol: f64, max_iter: usize) -> Result<CgSolution> {
    let opts = CgOptions {
        rel_tol,
        max_iter: Some(max_iter),
        jacobi: true,
    };
    cg_solve_deflated(op, rhs, &[], &opts)
}

/// Conjugate gradients on the orthogonal complement of `deflate` (an
/// orthonormal basis of the null space of `op`). The right-hand side is
/// projected onto that complement first.
pub fn cg_solve_deflated(
    op: &dyn QuadraticForm,
    rhs: &[f64],
    deflate: &[Vec<f64>],
    opts: &CgOptions,
) -> Result<CgSolution> {
    let n = op.dim();
    assert_eq!(rhs.len(), n);
    let max_iter = opts.max_iter.unwrap_or_else(|| default_max_iter(n));

    let mut b = rhs.to_vec();
    project_out(&mut b, deflate);
    let b_norm = norm(&b);
    if b_norm == 0.0 {
        return Ok(CgSolution {
            x: vec![0.0; n],
            iterations: 0,
            relative_residual: 0.0,
            objective_monotone: true,
        });
    }
    let inv_diag: Vec<f64> = if opts.jacobi {
        op.diagonal()
            .into_iter()
            .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
            .collect()
    } else {
        vec![1.0; n]
    };
    let precondition = |r: &[f64], z: &mut Vec<f64>| {
        z.clear();
        z.extend(r.iter().zip(&inv_diag).map(|(a, b)| a * b));
        project_out(z, deflate);
    };

    let target = opts.rel_tol * b_norm;
    let mut x = vec![0.0; n];
    let mut r = b.clone();
    let mut z = Vec::with_capacity(n);
    let mut q = vec![0.0; n];
    let mut iterations = 0;
    let mut monotone = true;
    let mut objective = 0.0f64;

    // outer loop restarts from the true residual if the recursive one drifted
    loop {
        precondition(&r, &mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        while norm(&r) > target && iterations < max_iter {
            op.apply(&p, &mut q);
            let pq = dot(&p, &q);
            if pq <= 0.0 {
                break;
            }
            let alpha = rz / pq;
            x.iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
            r.iter_mut().zip(&q).for_each(|(ri, qi)| *ri -= alpha * qi);
            if !deflate.is_empty() {
                project_out(&mut r, deflate);
            }
            iterations += 1;

            // ½xᵀAx - bᵀx = -½ xᵀ(b + r) with r = b - Ax
            let next = -0.5 * x.iter().zip(&b).zip(&r).map(|((xi, bi), ri)| xi * (bi + ri)).sum::<f64>();
            if next > objective + 1e-12 * objective.abs().max(f64::MIN_POSITIVE) {
                monotone = false;
            }
            objective = next;

            precondition(&r, &mut z);
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            p.iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
        }

        let true_res = residual_norm(op, &x, &b, deflate);
        if true_res <= target {
            return Ok(CgSolution {
                x,
                iterations,
                relative_residual: true_res / b_norm,
                objective_monotone: monotone,
            });
        }
        if iterations >= max_iter || norm(&r) > target {
            return Err(Error::NoConvergence {
                iterations,
                residual: true_res / b_norm,
            });
        }
        op.apply(&x, &mut q);
        r.iter_mut().zip(b.iter().zip(&q)).for_each(|(ri, (bi, qi))| *ri = bi - qi);
        project_out(&mut r, deflate);
    }
}

fn residual_norm(op: &dyn QuadraticForm, x: &[f64], b: &[f64], deflate: &[Vec<f64>]) -> f64 {
    let mut ax = vec![0.0; x.len()];
    op.apply(x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    project_out(&mut r, deflate);
    norm(&r)
}

#[derive(Clone, Copy, Debug)]
pub struct RayleighOptions {
    /// Stop when the quotient changes by less than this, relatively.
    pub rel_change: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub solve: CgOptions,
}

impl Default for RayleighOptions {
    fn default() -> Self {
        Self {
            rel_change: 1e-8,
            max_iter: 5000,
            seed: 0x5EED_CAFE,
            solve: CgOptions::with_tol(1e-11),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RayleighResult {
    pub value: f64,
    /// Maximizer, normalized to `den(v, v) = 1` (or unnormalized when the
    /// value is zero).
    pub vector: Vec<f64>,
    pub iterations: usize,
}

/// `max num(f,f) / den(f,f)` over `f ⟂ deflate`, by power iteration on
/// `den⁻¹ num` with conjugate-gradient solves for `den`.
///
/// `den` must be positive definite on the orthogonal complement of
/// `deflate` and both forms must vanish on `deflate`.
pub fn rayleigh_max_deflated(
    num: &dyn QuadraticForm,
    den: &dyn QuadraticForm,
    deflate: &[Vec<f64>],
    opts: &RayleighOptions,
) -> Result<RayleighResult> {
    let n = num.dim();
    assert_eq!(den.dim(), n);
    let basis = orthonormalize(deflate);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    project_out(&mut x, &basis);
    if norm(&x) == 0.0 {
        return Ok(RayleighResult {
            value: 0.0,
            vector: x,
            iterations: 0,
        });
    }

    let mut w = vec![0.0; n];
    let mut previous: Option<f64> = None;
    for iteration in 1..=opts.max_iter {
        num.apply(&x, &mut w);
        project_out(&mut w, &basis);
        if norm(&w) == 0.0 {
            return Ok(RayleighResult {
                value: 0.0,
                vector: x,
                iterations: iteration,
            });
        }
        let mut y = cg_solve_deflated(den, &w, &basis, &opts.solve)?.x;
        project_out(&mut y, &basis);
        let top = num.form(&y);
        let bottom = den.form(&y);
        let value = top / bottom;
        let scale = bottom.sqrt();
        y.iter_mut().for_each(|v| *v /= scale);
        x = y;
        if let Some(prev) = previous {
            if (value - prev).abs() <= opts.rel_change * value.abs() {
                return Ok(RayleighResult {
                    value,
                    vector: x,
                    iterations: iteration,
                });
            }
        }
        previous = Some(value);
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        residual: f64::NAN,
    })
}
