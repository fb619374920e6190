//! Replay of the exit-time lower bound argument on a concrete graph: level
//! sets of the exit time, the truncated log-potential, 1-content bounds, and
//! the mean value inequality for superharmonic functions.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{VertexId, VertexSet, WeightedGraph, UNREACHED};
use crate::inequalities::check_window;
use crate::linalg::CgOptions;
use crate::potential::{capacity_with, exit_ball, exit_time_with, green_apply_with, superharmonic_defect};
use crate::report::{Condition, ConditionReport, Rule, ScaleConstant};

/// Largest level constant tried is `2^MAX_C1_EXPONENT`.
pub const MAX_C1_EXPONENT: u32 = 16;
/// Level sets `F_K` are scanned for `K = 0..=MAX_K`.
pub const MAX_K: u32 = 64;
/// Bound on the mean value ratio.
pub const MEAN_VALUE_BOUND: f64 = 1e4;
/// Lower bound on the content/mass ratio.
pub const CONTENT_RATIO_FLOOR: f64 = 1e-3;

const SOLVE_TOL: f64 = 1e-11;

fn solve_opts() -> CgOptions {
    CgOptions::with_tol(SOLVE_TOL)
}

// ---------------------------------------------------------------------------
// 1-content

/// A finite family of closed balls in the cable metric.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cover {
    pub balls: Vec<(VertexId, f64)>,
}

impl Cover {
    /// `Σ radius`.
    pub fn cost(&self) -> f64 {
        self.balls.iter().map(|&(_, r)| r).sum()
    }

    /// Whether every vertex of `set` and every edge joining two of its
    /// vertices lies inside some ball. An edge `{a,b}` lies in the ball of
    /// radius `ρ` about `c` iff `(d(c,a) + d(c,b) + 1) / 2 <= ρ`.
    pub fn covers(&self, g: &WeightedGraph, set: &VertexSet) -> bool {
        let dists: Vec<(f64, Vec<u64>)> = self
            .balls
            .iter()
            .map(|&(c, rho)| (rho, g.distances_from(c, Some(rho.floor() as u64 + 1))))
            .collect();
        let vertex_ok = |v: VertexId| {
            dists
                .iter()
                .any(|(rho, d)| d[v] != UNREACHED && d[v] as f64 <= *rho)
        };
        let edge_ok = |a: VertexId, b: VertexId| {
            dists.iter().any(|(rho, d)| {
                d[a] != UNREACHED && d[b] != UNREACHED && (d[a] + d[b] + 1) as f64 / 2.0 <= *rho
            })
        };
        set.ids().iter().all(|&v| vertex_ok(v))
            && induced_edges(g, set).iter().all(|&(a, b)| edge_ok(a, b))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContentBounds {
    pub lower: f64,
    pub upper: f64,
    #[serde(skip)]
    pub cover: Cover,
}

fn induced_edges(g: &WeightedGraph, set: &VertexSet) -> Vec<(VertexId, VertexId)> {
    let mask = set.mask(g.vertex_count());
    let mut edges = Vec::new();
    for &a in set.ids() {
        for (b, _) in g.neighbors(a) {
            if b > a && mask[b] {
                edges.push((a, b));
            }
        }
    }
    edges
}

/// Connected components of the subgraph induced on `set`.
pub fn induced_components(g: &WeightedGraph, set: &VertexSet) -> Vec<Vec<VertexId>> {
    let mask = set.mask(g.vertex_count());
    let mut seen = vec![false; g.vertex_count()];
    let mut components = Vec::new();
    for &s in set.ids() {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut component = vec![s];
        let mut head = 0;
        while head < component.len() {
            let v = component[head];
            head += 1;
            for (w, _) in g.neighbors(v) {
                if mask[w] && !seen[w] {
                    seen[w] = true;
                    component.push(w);
                }
            }
        }
        component.sort_unstable();
        components.push(component);
    }
    components
}

/// Bounds on the 1-content of the cable set spanned by `set` (its vertices
/// and the edges between them).
///
/// The lower bound is half the largest ambient diameter of a connected piece.
/// The upper bound is the cheaper of a greedy cover (balls about vertices of
/// `set` with radii `1, 2, 4, …`, each step maximizing newly covered edges
/// per unit radius, ties to the smaller centre and radius) and the best
/// single ball.
pub fn content1_bounds(g: &WeightedGraph, set: &VertexSet) -> Result<ContentBounds> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let ids = set.ids();
    let index_of = |v: VertexId| ids.binary_search(&v).expect("member of set");
    // ambient distances between members
    let dist: Vec<Vec<u64>> = ids
        .par_iter()
        .map(|&c| {
            let d = g.distances_from(c, None);
            ids.iter().map(|&v| d[v]).collect()
        })
        .collect();

    let lower = induced_components(g, set)
        .iter()
        .map(|comp| {
            let idx: Vec<usize> = comp.iter().map(|&v| index_of(v)).collect();
            idx.iter()
                .flat_map(|&i| idx.iter().map(move |&j| (i, j)))
                .map(|(i, j)| dist[i][j])
                .max()
                .unwrap_or(0) as f64
                / 2.0
        })
        .fold(0.0, f64::max);

    let edges: Vec<(usize, usize)> = induced_edges(g, set)
        .into_iter()
        .map(|(a, b)| (index_of(a), index_of(b)))
        .collect();
    let mut touched = vec![false; ids.len()];
    for &(a, b) in &edges {
        touched[a] = true;
        touched[b] = true;
    }

    // best single ball, radius allowed to be a half-integer
    let single = (0..ids.len())
        .map(|c| {
            let v = dist[c].iter().copied().max().unwrap_or(0) as f64;
            let e = edges
                .iter()
                .map(|&(a, b)| (dist[c][a] + dist[c][b] + 1) as f64 / 2.0)
                .fold(0.0, f64::max);
            (c, v.max(e))
        })
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });

    let diameter = dist.iter().flatten().copied().max().unwrap_or(0);
    let mut radii = vec![1u64];
    while *radii.last().unwrap() < diameter.max(1) {
        let next = radii.last().unwrap() * 2;
        radii.push(next);
    }

    let mut balls: Vec<(VertexId, f64)> = Vec::new();
    // isolated vertices cost nothing
    for (i, &v) in ids.iter().enumerate() {
        if !touched[i] {
            balls.push((v, 0.0));
        }
    }
    let mut covered = vec![false; edges.len()];
    let mut remaining = edges.len();
    while remaining > 0 {
        let mut best: Option<(usize, u64, usize)> = None;
        let mut best_score = 0.0;
        for (c, from_c) in dist.iter().enumerate() {
            for &rho in &radii {
                let gain = edges
                    .iter()
                    .zip(&covered)
                    .filter(|(&(a, b), &done)| !done && from_c[a] + from_c[b] < 2 * rho)
                    .count();
                let score = gain as f64 / rho as f64;
                if gain > 0 && score > best_score {
                    best = Some((c, rho, gain));
                    best_score = score;
                }
            }
        }
        let (c, rho, _) = best.expect("some ball covers a remaining edge");
        for (k, &(a, b)) in edges.iter().enumerate() {
            if !covered[k] && dist[c][a] + dist[c][b] < 2 * rho {
                covered[k] = true;
                remaining -= 1;
            }
        }
        balls.push((ids[c], rho as f64));
    }
    let greedy = Cover { balls };
    let cover = if single.1 < greedy.cost() {
        Cover {
            balls: vec![(ids[single.0], single.1)],
        }
    } else {
        greedy
    };
    Ok(ContentBounds {
        lower,
        upper: cover.cost(),
        cover,
    })
}

/// `content lower bound / min(μ(S)^{1/d_f}, μ(S))` for each set, required to
/// stay above [`CONTENT_RATIO_FLOOR`]. Scales are keyed by set size.
pub fn content_mass_check(g: &WeightedGraph, sets: &[VertexSet], d_f: f64) -> Result<ConditionReport> {
    let scales = sets
        .par_iter()
        .map(|s| {
            let bounds = content1_bounds(g, s)?;
            let m = s.measure();
            Ok(ScaleConstant::new(s.len() as u64, bounds.lower / m.powf(1.0 / d_f).min(m)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConditionReport::new(
        Condition::ContentMass,
        Rule::AtLeast,
        CONTENT_RATIO_FLOOR,
        scales,
    ))
}

/// Connected vertex sets grown from uniform random seeds by attaching
/// uniformly chosen boundary vertices.
pub fn random_connected_sets(
    g: &WeightedGraph,
    count: usize,
    min_size: usize,
    max_size: usize,
    seed: u64,
) -> Result<Vec<VertexSet>> {
    if min_size == 0 || min_size > max_size || max_size > g.vertex_count() {
        return Err(Error::InvalidParameter(format!(
            "set sizes {min_size}..={max_size} do not fit a graph of {} vertices",
            g.vertex_count()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let size = rng.gen_range(min_size..=max_size);
        let start = rng.gen_range(0..g.vertex_count());
        let mut inside = vec![false; g.vertex_count()];
        let mut members = vec![start];
        inside[start] = true;
        let mut boundary: Vec<VertexId> = Vec::new();
        while members.len() < size {
            boundary.clear();
            for &v in &members {
                boundary.extend(g.neighbors(v).map(|(w, _)| w).filter(|&w| !inside[w]));
            }
            boundary.sort_unstable();
            boundary.dedup();
            let &next = boundary.choose(&mut rng).expect("connected graph has a boundary");
            inside[next] = true;
            members.push(next);
        }
        out.push(VertexSet::new(g, members)?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// exit-time bounds

/// `max(r², r^{d_w})`.
fn time_scale(r: u64, d_w: f64) -> f64 {
    let r = r as f64;
    (r * r).max(r.powf(d_w))
}

/// Sum of `(log u(a) - log u(b))² μ(a,b)` over edges of `set`.
fn log_energy(g: &WeightedGraph, u: &[f64], set: &VertexSet) -> f64 {
    let logs: Vec<f64> = u.iter().map(|v| if *v > 0.0 { v.ln() } else { 0.0 }).collect();
    g.energy_within(&logs, set)
}

/// Three per-scale normalizations of `u = E^{B(x,r)}`:
/// `‖u‖_∞ / T(r)`, the log-energy of `u` over `B(x,r/2)` times `T(r) / V(x,r)`,
/// and `Σ_{B(x,r/2)} μ/u` times `T(r) / V(x,r)`, with `T(r) = max(r², r^{d_w})`.
pub fn exit_bounds_audit(g: &WeightedGraph, x: VertexId, radii: &[u64], d_w: f64) -> Result<ConditionReport> {
    check_window(g, x, radii, |r| r.saturating_sub(1), "exit time needs r <= reach")?;
    let rows = radii
        .par_iter()
        .map(|&r| {
            if r < 2 {
                return Err(Error::InvalidParameter("exit bounds need r >= 2".into()));
            }
            let u = exit_time_with(g, &exit_ball(g, x, r)?, &solve_opts())?;
            let half = g.ball(x, r / 2)?;
            if half.ids().iter().any(|&v| u[v] <= 0.0) {
                return Err(Error::InvalidParameter(format!("exit time vanishes inside B(x, {})", r / 2)));
            }
            let t = time_scale(r, d_w);
            let v = g.ball_measure(x, r)?;
            let sup = u.max_abs() / t;
            let cacc = log_energy(g, &u, &half) * t / v;
            let avg: f64 = half.ids().iter().map(|&y| g.mass(y) / u[y]).sum::<f64>() * t / v;
            Ok([sup, cacc, avg])
        })
        .collect::<Result<Vec<_>>>()?;
    let part = |condition, k: usize| {
        ConditionReport::spread(
            condition,
            radii
                .iter()
                .zip(&rows)
                .map(|(&r, row)| ScaleConstant::new(r, row[k]))
                .collect(),
        )
    };
    Ok(ConditionReport::all_parts(
        Condition::ExitTimeBounds,
        vec![
            part(Condition::ExitUpper, 0),
            part(Condition::LogCaccioppoli, 1),
            part(Condition::AveragedExitLower, 2),
        ],
    ))
}

// ---------------------------------------------------------------------------
// tentacle argument

/// One replay of the exit-time floor argument at `(center, radius)`.
#[derive(Clone, Debug, Serialize)]
pub struct ProofTrace {
    pub center: VertexId,
    pub radius: u64,
    pub d_w: f64,
    pub d_f: Option<f64>,
    /// `⌊r/2⌋`, `⌊r/18⌋`, `⌊r/36⌋`.
    pub half_radius: u64,
    pub level_radius: u64,
    pub floor_radius: u64,
    /// Level constant: `E = {y ∈ B(x,r/18) : u(y) >= r^{d_w} / C₁}`.
    pub c1: f64,
    pub level: f64,
    pub e_size: usize,
    pub e_measure: f64,
    /// `m(B(x, r/18))`.
    pub level_ball_measure: f64,
    pub content_e: ContentBounds,
    /// Largest `K` in `0..=64` with `F_K` nonempty.
    pub k0: Option<u32>,
    /// `K` used to build `v`: `max(k0, 1)`.
    pub k: u32,
    /// `|F_K|` for `K = 0, 1, …` up to the first empty set.
    pub level_set_sizes: Vec<usize>,
    pub content_f: Option<ContentBounds>,
    /// Whether `F_K` joins `B(x,r/36)` to the outer shell of `B(x,r/18)`
    /// through edges inside `F_K`. `None` when `inf_{B(x,r/36)} u` is not below
    /// the `F_K` level, so nothing is claimed.
    pub f_connects: Option<bool>,
    /// Energy of `v` over the edges of `B(x, r/2)`.
    pub v_energy: f64,
    /// Same energy of `log u`.
    pub log_energy: f64,
    /// `log_energy / K²`.
    pub budget: f64,
    /// `inf_{B(x,r/36)} u / r^{d_w}`.
    pub floor_ratio: f64,
    #[serde(skip)]
    pub u: Vec<f64>,
    #[serde(skip)]
    pub v: Vec<f64>,
    #[serde(skip)]
    pub e_set: VertexSet,
    #[serde(skip)]
    pub f_set: VertexSet,
}

impl ProofTrace {
    /// Names of violated invariants; empty when the trace is consistent.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut bad = Vec::new();
        if self.v.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            bad.push("v leaves [0,1]".to_string());
        }
        if self.e_set.ids().iter().any(|&y| self.v[y] != 1.0) {
            bad.push("v is not 1 on E".to_string());
        }
        if self.f_set.ids().iter().any(|&y| self.v[y] != 0.0) {
            bad.push("v is not 0 on F_K".to_string());
        }
        if self.v_energy > self.budget * (1.0 + 1e-12) {
            bad.push(format!("energy(v) = {} exceeds budget {}", self.v_energy, self.budget));
        }
        if self.e_measure < self.level_ball_measure / 4.0 {
            bad.push("m(E) < m(B(x,r/18)) / 4".to_string());
        }
        if self.v_energy < 0.0 || self.log_energy < 0.0 {
            bad.push("negative energy".to_string());
        }
        if self.k0.is_some_and(|k| k > MAX_K) {
            bad.push("K0 above scan range".to_string());
        }
        if self.content_e.lower > self.content_e.upper {
            bad.push("content bounds of E cross".to_string());
        }
        bad
    }
}

/// Truncated log-potential `clamp(1 + (1 + ln(u/T)) / K, 0, 1)`: equal to 1
/// where `u >= T`, to 0 where `u <= e^{-K-1} T`, and `1/K`-Lipschitz in `ln u`.
pub fn log_potential(u: &[f64], level: f64, k: u32) -> Vec<f64> {
    let cut = f_level(level, k);
    let k = f64::from(k);
    u.iter()
        .map(|&y| {
            if y <= cut {
                0.0
            } else if y >= level {
                1.0
            } else {
                (1.0 + (1.0 + (y / level).ln()) / k).clamp(0.0, 1.0)
            }
        })
        .collect()
}

/// `e^{-K-1} · level`, the threshold defining `F_K`.
fn f_level(level: f64, k: u32) -> f64 {
    (-f64::from(k) - 1.0).exp() * level
}

pub fn tentacle_trace(g: &WeightedGraph, x: VertexId, r: u64, d_w: f64, d_f: f64) -> Result<ProofTrace> {
    trace_inner(g, x, r, d_w, Some(d_f))
}

fn trace_inner(g: &WeightedGraph, x: VertexId, r: u64, d_w: f64, d_f: Option<f64>) -> Result<ProofTrace> {
    check_window(g, x, &[r], |r| r.saturating_sub(1), "exit time needs r <= reach")?;
    if r < 2 {
        return Err(Error::InvalidParameter("trace needs r >= 2".into()));
    }
    let u = exit_time_with(g, &exit_ball(g, x, r)?, &solve_opts())?.into_values();
    let scale = (r as f64).powf(d_w);
    let half_radius = r / 2;
    let level_radius = r / 18;
    let floor_radius = r / 36;
    let level_ball = g.ball(x, level_radius)?;
    let level_ball_measure = level_ball.measure();

    let mut chosen = None;
    for j in 0..=MAX_C1_EXPONENT {
        let c1 = f64::from(1u32 << j);
        let level = scale / c1;
        let e = VertexSet::new(g, level_ball.ids().iter().copied().filter(|&y| u[y] >= level))?;
        if e.measure() >= level_ball_measure / 4.0 {
            chosen = Some((c1, level, e));
            break;
        }
    }
    let (c1, level, e_set) = chosen.ok_or(Error::EmptyLevelSet { radius: r })?;

    let f_set_at = |k: u32| {
        let cut = f_level(level, k);
        VertexSet::new(g, level_ball.ids().iter().copied().filter(|&y| u[y] <= cut))
    };
    let mut level_set_sizes = Vec::new();
    let mut k0 = None;
    for k in 0..=MAX_K {
        let f = f_set_at(k)?;
        level_set_sizes.push(f.len());
        if f.is_empty() {
            break;
        }
        k0 = Some(k);
    }
    let k = k0.unwrap_or(1).max(1);
    let f_set = f_set_at(k)?;

    let floor_ball = g.ball(x, floor_radius)?;
    let floor_inf = floor_ball.ids().iter().map(|&y| u[y]).fold(f64::INFINITY, f64::min);
    let f_connects = match k0 {
        Some(k0) if floor_inf < f_level(level, k0) => {
            Some(joins_shells(g, x, &f_set_at(k0)?, floor_radius, level_radius))
        }
        _ => None,
    };

    let v = log_potential(&u, level, k);
    let half = g.ball(x, half_radius)?;
    let v_energy = g.energy_within(&v, &half);
    let log_energy = log_energy(g, &u, &half);
    let budget = log_energy / f64::from(k * k);
    let content_e = content1_bounds(g, &e_set)?;
    let content_f = if f_set.is_empty() {
        None
    } else {
        Some(content1_bounds(g, &f_set)?)
    };

    Ok(ProofTrace {
        center: x,
        radius: r,
        d_w,
        d_f,
        half_radius,
        level_radius,
        floor_radius,
        c1,
        level,
        e_size: e_set.len(),
        e_measure: e_set.measure(),
        level_ball_measure,
        content_e,
        k0,
        k,
        level_set_sizes,
        content_f,
        f_connects,
        v_energy,
        log_energy,
        budget,
        floor_ratio: floor_inf / scale,
        u,
        v,
        e_set,
        f_set,
    })
}

/// Whether some component of the subgraph induced on `set` meets
/// `B(x, inner)` and reaches distance `outer` from `x`.
fn joins_shells(g: &WeightedGraph, x: VertexId, set: &VertexSet, inner: u64, outer: u64) -> bool {
    let dist = g.distances_from(x, Some(outer));
    induced_components(g, set).iter().any(|comp| {
        comp.iter().any(|&v| dist[v] <= inner) && comp.iter().any(|&v| dist[v] == outer)
    })
}

/// Per-scale `inf_{B(x,r/36)} E^{B(x,r)} / r^{d_w}`, required to have
/// bounded spread.
pub fn exit_floor_audit(g: &WeightedGraph, x: VertexId, radii: &[u64], d_w: f64) -> Result<ConditionReport> {
    Ok(exit_floor_traces(g, x, radii, d_w, None)?.0)
}

/// [`exit_floor_audit`] together with the traces it was computed from.
pub fn exit_floor_traces(
    g: &WeightedGraph,
    x: VertexId,
    radii: &[u64],
    d_w: f64,
    d_f: Option<f64>,
) -> Result<(ConditionReport, Vec<ProofTrace>)> {
    let traces = radii
        .par_iter()
        .map(|&r| trace_inner(g, x, r, d_w, d_f))
        .collect::<Result<Vec<_>>>()?;
    let scales = traces
        .iter()
        .map(|t| ScaleConstant::new(t.radius, t.floor_ratio))
        .collect();
    let mut report = ConditionReport::spread(Condition::ExitFloor, scales);
    let k0s: Vec<String> = traces
        .iter()
        .map(|t| t.k0.map_or("none".to_string(), |k| k.to_string()))
        .collect();
    report = report.with_note(format!("K0 per scale: {}", k0s.join(", ")));
    for t in &traces {
        for v in t.invariant_violations() {
            report = report.with_note(format!("r = {}: {v}", t.radius));
        }
    }
    Ok((report, traces))
}

// ---------------------------------------------------------------------------
// mean value inequality

pub const THETA_1: f64 = 1.0 / 36.0;
pub const THETA_2: f64 = 1.0 / 18.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleKind {
    ExitTime,
    Green,
    Equilibrium,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanValueSample {
    pub r: u64,
    pub kind: SampleKind,
    pub pole: Option<VertexId>,
    /// `None` when `u` vanishes somewhere in `B(x, θ₂ r)`.
    pub ratio: Option<f64>,
    /// `min (u - P u) / max |u|` over the domain.
    pub defect: f64,
}

/// `(m(B₂)⁻¹ Σ_{B₂} μ/u)⁻¹ / inf_{B₁} u` with `B_i = B(x, ⌊θ_i r⌋)`; `None`
/// when `u` is not positive on `B₂`.
/// A sampled function with its kind and pole.
pub type SampledFunction = (SampleKind, Option<VertexId>, Vec<f64>);

pub fn mean_value_ratio(g: &WeightedGraph, x: VertexId, r: u64, u: &[f64]) -> Result<Option<f64>> {
    let outer = g.ball(x, (r as f64 * THETA_2).floor() as u64)?;
    let inner = g.ball(x, (r as f64 * THETA_1).floor() as u64)?;
    if outer.ids().iter().any(|&y| u[y] <= 0.0) {
        return Ok(None);
    }
    let inv: f64 = outer.ids().iter().map(|&y| g.mass(y) / u[y]).sum();
    let harmonic_mean = outer.measure() / inv;
    let inf = inner.ids().iter().map(|&y| u[y]).fold(f64::INFINITY, f64::min);
    Ok(Some(harmonic_mean / inf))
}

/// Poles spread over the domain: for `i = 1..=count`, the smallest-id vertex
/// at distance `⌊i (r-1) / (count+1)⌋` rounded up to at least 1.
fn spread_poles(g: &WeightedGraph, x: VertexId, r: u64, count: usize) -> Vec<VertexId> {
    let dist = g.distances_from(x, Some(r));
    (1..=count)
        .filter_map(|i| {
            let d = ((i as u64 * (r - 1)) / (count as u64 + 1)).max(1);
            dist.iter().position(|&e| e == d)
        })
        .collect()
}

/// Nonnegative superharmonic functions on `B = exit_ball(x, r)`: the exit
/// time, then alternately Green functions `G^B δ_z` and equilibrium
/// potentials of `B(z, r/8) ∩ B` against `B^c`, for poles `z` spread over `B`.
pub fn superharmonic_samples(g: &WeightedGraph, x: VertexId, r: u64, count: usize) -> Result<Vec<SampledFunction>> {
    let domain = exit_ball(g, x, r)?;
    let n = g.vertex_count();
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return Ok(out);
    }
    out.push((SampleKind::ExitTime, None, exit_time_with(g, &domain, &solve_opts())?.into_values()));
    let poles = spread_poles(g, x, r, count - 1);
    let outside = domain.complement(g);
    for (i, &z) in poles.iter().enumerate() {
        if i % 2 == 0 {
            let mut f = vec![0.0; n];
            f[z] = 1.0 / g.mass(z);
            out.push((SampleKind::Green, Some(z), green_apply_with(g, &domain, &f, &solve_opts())?.into_values()));
        } else {
            let a = VertexSet::new(
                g,
                g.ball(z, r / 8)?.ids().iter().copied().filter(|&y| domain.contains(y)),
            )?;
            let potential = capacity_with(g, &a, &outside, &solve_opts())?
                .potential
                .expect("disjoint sets have a potential");
            out.push((SampleKind::Equilibrium, Some(z), potential.into_values()));
        }
    }
    Ok(out)
}

pub fn mean_value_samples(
    g: &WeightedGraph,
    x: VertexId,
    radii: &[u64],
    samples_per_scale: usize,
) -> Result<Vec<MeanValueSample>> {
    check_window(g, x, radii, |r| r.saturating_sub(1), "exit time needs r <= reach")?;
    let per_scale = radii
        .par_iter()
        .map(|&r| {
            if r < 2 {
                return Err(Error::InvalidParameter("mean value audit needs r >= 2".into()));
            }
            let domain = exit_ball(g, x, r)?;
            superharmonic_samples(g, x, r, samples_per_scale)?
                .into_iter()
                .map(|(kind, pole, u)| {
                    let peak = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    let defect = if peak > 0.0 {
                        superharmonic_defect(g, &u, &domain) / peak
                    } else {
                        0.0
                    };
                    Ok(MeanValueSample {
                        r,
                        kind,
                        pole,
                        ratio: mean_value_ratio(g, x, r, &u)?,
                        defect,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_scale.into_iter().flatten().collect())
}

/// Mean value ratios bounded by [`MEAN_VALUE_BOUND`] and every sample
/// superharmonic to `1e-9 · max|u|`.
pub fn mean_value_audit(
    g: &WeightedGraph,
    x: VertexId,
    radii: &[u64],
    superharmonic_samples: usize,
) -> Result<ConditionReport> {
    let samples = mean_value_samples(g, x, radii, superharmonic_samples)?;
    Ok(mean_value_report(&samples))
}

pub fn mean_value_report(samples: &[MeanValueSample]) -> ConditionReport {
    let ratios = samples
        .iter()
        .filter_map(|s| s.ratio.map(|q| ScaleConstant::new(s.r, q)))
        .collect();
    let defects = samples.iter().map(|s| ScaleConstant::new(s.r, s.defect)).collect();
    let skipped = samples.iter().filter(|s| s.ratio.is_none()).count();
    let mut report = ConditionReport::all_parts(
        Condition::MeanValue,
        vec![
            ConditionReport::new(Condition::MeanValue, Rule::AtMost, MEAN_VALUE_BOUND, ratios),
            ConditionReport::new(Condition::Superharmonic, Rule::AtLeast, -1e-9, defects),
        ],
    );
    report = report.with_note(format!("{} samples", samples.len()));
    if skipped > 0 {
        report = report.with_note(format!("{skipped} samples vanish near the centre and were skipped"));
    }
    report
}
