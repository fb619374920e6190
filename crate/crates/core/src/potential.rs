//! Capacities, equilibrium potentials, the Green operator of a domain and
//! mean exit times of the discrete-time walk.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{FieldKind, ScalarField, VertexId, VertexSet, WeightedGraph};
use crate::linalg::{cg_solve_deflated, CgOptions, SparseSymOperator, OperatorMode};

/// Effective conductance between two sets; `Infinite` when they intersect.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Capacity {
    Finite(f64),
    Infinite,
}

impl Capacity {
    pub fn finite(self) -> Option<f64> {
        match self {
            Capacity::Finite(v) => Some(v),
            Capacity::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Capacity::Infinite)
    }
}

impl Serialize for Capacity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Capacity::Finite(v) => s.serialize_f64(*v),
            Capacity::Infinite => s.serialize_str("inf"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CapacityResult {
    pub value: Capacity,
    /// The minimizing potential; `None` for infinite capacity.
    pub potential: Option<ScalarField>,
    /// Relative residual of the Dirichlet solve.
    pub residual: f64,
}

/// The energy minimizer with `f = 1` on `a` and `f = 0` on `b`: harmonic on
/// the remaining vertices.
pub fn equilibrium_potential(g: &WeightedGraph, a: &VertexSet, b: &VertexSet) -> Result<ScalarField> {
    solve_equilibrium(g, a, b, &CgOptions::default()).map(|(f, _)| f)
}

fn solve_equilibrium(
    g: &WeightedGraph,
    a: &VertexSet,
    b: &VertexSet,
    opts: &CgOptions,
) -> Result<(ScalarField, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    if !a.is_disjoint(b) {
        return Err(Error::InfiniteCapacity);
    }
    let n = g.vertex_count();
    let in_a = a.mask(n);
    let in_b = b.mask(n);
    let free = VertexSet::new(g, (0..n).filter(|&v| !in_a[v] && !in_b[v]))?;

    let mut potential = vec![0.0; n];
    for &v in a.ids() {
        potential[v] = 1.0;
    }
    if free.is_empty() {
        return Ok((ScalarField::new(FieldKind::Potential, potential)?, 0.0));
    }

    let op = SparseSymOperator::new(g, &free, OperatorMode::Dirichlet);
    let rhs: Vec<f64> = free
        .ids()
        .iter()
        .map(|&x| g.neighbors(x).filter(|&(y, _)| in_a[y]).map(|(_, w)| w).sum())
        .collect();
    let sol = cg_solve_deflated(&op, &rhs, &[], opts)?;
    for (&v, &x) in free.ids().iter().zip(&sol.x) {
        potential[v] = x;
    }
    Ok((ScalarField::new(FieldKind::Potential, potential)?, sol.relative_residual))
}

/// `Cap(A, B) = inf { E(f,f) : f|_A = 1, f|_B = 0 }`.
pub fn capacity(g: &WeightedGraph, a: &VertexSet, b: &VertexSet) -> Result<CapacityResult> {
    capacity_with(g, a, b, &CgOptions::default())
}

pub fn capacity_with(g: &WeightedGraph, a: &VertexSet, b: &VertexSet, opts: &CgOptions) -> Result<CapacityResult> {
    match solve_equilibrium(g, a, b, opts) {
        Ok((potential, residual)) => Ok(CapacityResult {
            value: Capacity::Finite(g.energy(&potential)),
            potential: Some(potential),
            residual,
        }),
        Err(Error::InfiniteCapacity) => Ok(CapacityResult {
            value: Capacity::Infinite,
            potential: None,
            residual: 0.0,
        }),
        Err(e) => Err(e),
    }
}

/// `Cap(B(x,r), B(x,2r)^c)` with closed graph balls. `B(x, 2r)` must stay
/// clear of the frontier, i.e. `2r < reach(x)`.
pub fn annulus_capacity(g: &WeightedGraph, x: VertexId, r: u64) -> Result<CapacityResult> {
    g.check_vertex(x)?;
    let reach = g.reach(x);
    if 2 * r >= reach {
        return Err(Error::OutOfWindow {
            center: x,
            radius: r,
            reach,
            what: "annulus capacity needs 2r < reach",
        });
    }
    let inner = g.ball(x, r)?;
    let outer = g.ball(x, 2 * r)?.complement(g);
    capacity(g, &inner, &outer)
}

/// The walk's exit domain for "the ball of radius r": the open ball
/// `{y : d(x,y) < r}`, i.e. the closed ball of radius `r - 1` (empty for
/// `r = 0`). This matches the open balls of the cable system, on which `Z`
/// has exit time exactly `r²` from the centre.
pub fn exit_ball(g: &WeightedGraph, x: VertexId, r: u64) -> Result<VertexSet> {
    if r == 0 {
        g.check_vertex(x)?;
        return VertexSet::new(g, []);
    }
    g.ball(x, r - 1)
}

/// Solves `L u = f·μ` on `domain` with `u = 0` outside, where
/// `L u(x) = Σ_y μ(x,y)(u(x) - u(y))`.
pub fn green_apply(g: &WeightedGraph, domain: &VertexSet, f: &[f64]) -> Result<ScalarField> {
    green_apply_with(g, domain, f, &CgOptions::default())
}

pub fn green_apply_with(g: &WeightedGraph, domain: &VertexSet, f: &[f64], opts: &CgOptions) -> Result<ScalarField> {
    let n = g.vertex_count();
    assert_eq!(f.len(), n);
    if domain.len() == n {
        return Err(Error::NoExit);
    }
    if domain.is_empty() {
        return Ok(ScalarField::zeros(FieldKind::Generic, n));
    }
    let op = SparseSymOperator::new(g, domain, OperatorMode::Dirichlet);
    let rhs: Vec<f64> = domain.ids().iter().map(|&x| f[x] * g.mass(x)).collect();
    let sol = cg_solve_deflated(&op, &rhs, &[], opts)?;
    ScalarField::new(FieldKind::Generic, op.extend(&sol.x, n))
}

/// Mean exit time `E(x) = 1 + Σ_y p(x,y) E(y)` on `domain`, zero outside.
pub fn exit_time(g: &WeightedGraph, domain: &VertexSet) -> Result<ScalarField> {
    exit_time_with(g, domain, &CgOptions::default())
}

pub fn exit_time_with(g: &WeightedGraph, domain: &VertexSet, opts: &CgOptions) -> Result<ScalarField> {
    let ones = vec![1.0; g.vertex_count()];
    let u = green_apply_with(g, domain, &ones, opts)?;
    ScalarField::new(FieldKind::ExitTime, u.into_values())
}

/// Default tolerance `1e-9 · max|u|` for [`is_superharmonic`].
pub fn default_superharmonic_tol(u: &[f64]) -> f64 {
    1e-9 * u.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// `u(x) >= P u(x) - tol` for every `x` in `domain`.
pub fn is_superharmonic(g: &WeightedGraph, u: &[f64], domain: &VertexSet, tol: f64) -> bool {
    superharmonic_defect(g, u, domain) >= -tol
}

/// `min_{x∈domain} (u(x) - P u(x))`; `+∞` on an empty domain.
pub fn superharmonic_defect(g: &WeightedGraph, u: &[f64], domain: &VertexSet) -> f64 {
    domain
        .ids()
        .iter()
        .map(|&x| u[x] - g.average_at(u, x))
        .fold(f64::INFINITY, f64::min)
}
