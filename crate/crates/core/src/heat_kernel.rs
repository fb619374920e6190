//! Discrete-time heat kernel `h_n(x,y) = p_n(x,y) / μ_y`, decay fits, and
//! the sub-Gaussian band check.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::{linear_fit, ExponentFit};
use crate::graph::{FieldKind, ScalarField, VertexId, WeightedGraph, UNREACHED};
use crate::inequalities::check_window;
use crate::potential::{exit_ball, exit_time};
use crate::report::{BandSummary, ConditionReport, ScaleConstant};

/// Largest step count in default step lists.
pub const MAX_DEFAULT_STEPS: u64 = 4096;

/// Kernel values below this are treated as underflow.
pub const UNDERFLOW: f64 = 1e-300;

/// `h_n(source, ·)`, or `h_n + h_{n+1}` when `smoothed`.
#[derive(Clone, Debug)]
pub struct HeatKernelRow {
    pub source: VertexId,
    pub n: u64,
    pub smoothed: bool,
    pub field: ScalarField,
}

impl HeatKernelRow {
    /// `Σ_y h(source, y) μ_y`: 1, or 2 when smoothed.
    pub fn total_mass(&self, g: &WeightedGraph) -> f64 {
        self.field.iter().zip(g.masses()).map(|(h, m)| h * m).sum()
    }
}

/// Step-by-step evolution of `h_n(source, ·)`, touching only the vertices
/// the walk can have reached.
#[derive(Clone, Debug)]
pub struct HeatKernelEvolution<'g> {
    g: &'g WeightedGraph,
    source: VertexId,
    n: u64,
    current: Vec<f64>,
    next: Vec<f64>,
    /// Vertices sorted by distance from the source.
    order: Vec<VertexId>,
    /// `layer_end[d]` = number of vertices at distance `<= d`.
    layer_end: Vec<usize>,
    max_mass_error: f64,
    min_value: f64,
}

impl<'g> HeatKernelEvolution<'g> {
    pub fn new(g: &'g WeightedGraph, source: VertexId) -> Result<Self> {
        g.check_vertex(source)?;
        let dist = g.distances_from(source, None);
        let mut order: Vec<VertexId> = (0..g.vertex_count()).collect();
        order.sort_by_key(|&v| (dist[v], v));
        let max_d = dist.iter().copied().filter(|&d| d != UNREACHED).max().unwrap_or(0);
        let mut layer_end = vec![0usize; max_d as usize + 1];
        for &v in &order {
            layer_end[dist[v] as usize] += 1;
        }
        for d in 1..layer_end.len() {
            layer_end[d] += layer_end[d - 1];
        }
        let mut current = vec![0.0; g.vertex_count()];
        current[source] = 1.0 / g.mass(source);
        Ok(Self {
            g,
            source,
            n: 0,
            next: current.clone(),
            current,
            order,
            layer_end,
            max_mass_error: 0.0,
            min_value: 0.0,
        })
    }

    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `h_n(source, ·)` for the current `n`.
    pub fn values(&self) -> &[f64] {
        &self.current
    }

    /// Largest `|Σ_y h_k μ_y - 1|` seen so far.
    pub fn max_mass_error(&self) -> f64 {
        self.max_mass_error
    }

    /// Smallest entry seen so far.
    pub fn min_value(&self) -> f64 {
        self.min_value
    }

    fn support(&self, steps: u64) -> &[VertexId] {
        let d = (steps as usize).min(self.layer_end.len() - 1);
        &self.order[..self.layer_end[d]]
    }

    pub fn step(&mut self) {
        let g = self.g;
        let support_len = self.support(self.n + 1).len();
        let mut mass = 0.0;
        let mut min_value = self.min_value;
        for i in 0..support_len {
            let z = self.order[i];
            let h = g.average_at(&self.current, z);
            self.next[z] = h;
            mass += h * g.mass(z);
            min_value = min_value.min(h);
        }
        std::mem::swap(&mut self.current, &mut self.next);
        self.n += 1;
        self.min_value = min_value;
        self.max_mass_error = self.max_mass_error.max((mass - 1.0).abs());
    }

    pub fn advance_to(&mut self, n: u64) {
        while self.n < n {
            self.step();
        }
    }

    pub fn row(&self) -> HeatKernelRow {
        HeatKernelRow {
            source: self.source,
            n: self.n,
            smoothed: false,
            field: ScalarField::new(FieldKind::HeatKernelRow, self.current.clone())
                .expect("heat kernel entries are finite"),
        }
    }
}

pub fn heat_kernel_row(g: &WeightedGraph, x: VertexId, n: u64) -> Result<HeatKernelRow> {
    let mut evo = HeatKernelEvolution::new(g, x)?;
    evo.advance_to(n);
    Ok(evo.row())
}

/// `h_n + h_{n+1}` from `x`.
pub fn smoothed_row(g: &WeightedGraph, x: VertexId, n: u64) -> Result<HeatKernelRow> {
    let mut evo = HeatKernelEvolution::new(g, x)?;
    evo.advance_to(n);
    let first = evo.values().to_vec();
    evo.step();
    let values = first.iter().zip(evo.values()).map(|(a, b)| a + b).collect();
    Ok(HeatKernelRow {
        source: x,
        n,
        smoothed: true,
        field: ScalarField::new(FieldKind::HeatKernelRow, values)?,
    })
}

/// `(h_n + h_{n+1})(x, y)` for every requested `n` and target `y`, from one
/// evolution. Entry `[i][j]` belongs to `n_list[i]`, `targets[j]`.
pub fn smoothed_values<'g>(
    g: &'g WeightedGraph,
    x: VertexId,
    n_list: &[u64],
    targets: &[VertexId],
) -> Result<(Vec<Vec<f64>>, HeatKernelEvolution<'g>)> {
    for &y in targets {
        g.check_vertex(y)?;
    }
    let mut evo = HeatKernelEvolution::new(g, x)?;
    let mut sorted: Vec<(usize, u64)> = n_list.iter().copied().enumerate().collect();
    sorted.sort_by_key(|&(_, n)| n);
    let mut out = vec![vec![0.0; targets.len()]; n_list.len()];
    for (i, n) in sorted {
        evo.advance_to(n);
        let first: Vec<f64> = targets.iter().map(|&y| evo.values()[y]).collect();
        let mut ahead = evo.clone();
        ahead.step();
        for (j, &y) in targets.iter().enumerate() {
            out[i][j] = first[j] + ahead.values()[y];
        }
        evo = ahead;
    }
    Ok((out, evo))
}

/// Largest `n` with `3 · n^{1/d_w} < reach(x)`.
pub fn mixing_limit(g: &WeightedGraph, x: VertexId, d_w: f64) -> u64 {
    let bound = (g.reach(x) as f64 / 3.0).powf(d_w);
    let mut n = bound.floor() as u64;
    while n > 0 && 3.0 * (n as f64).powf(1.0 / d_w) >= g.reach(x) as f64 {
        n -= 1;
    }
    n
}

/// Dyadic steps `16, 32, …` up to the mixing limit, capped at 4096.
pub fn default_n_list(g: &WeightedGraph, x: VertexId, d_w: f64) -> Vec<u64> {
    let limit = mixing_limit(g, x, d_w).min(MAX_DEFAULT_STEPS);
    std::iter::successors(Some(16u64), |n| Some(n * 2))
        .take_while(|&n| n <= limit)
        .collect()
}

/// Log-log slope of `(h_n + h_{n+1})(x, x)` against `n`. Steps should lie in
/// the mixing window (see [`default_n_list`]).
pub fn on_diagonal_fit(g: &WeightedGraph, x: VertexId, n_list: &[u64]) -> Result<ExponentFit> {
    if n_list.len() < 3 {
        return Err(Error::TooFewPoints(n_list.len()));
    }
    let (values, _) = smoothed_values(g, x, n_list, &[x])?;
    ExponentFit::fit(n_list.to_vec(), values.into_iter().map(|v| v[0]).collect())
}

/// Growth exponent of the mean exit time `E^{B(x,r)}(x)` in `r`.
pub fn walk_dimension_fit(g: &WeightedGraph, x: VertexId, radii: &[u64]) -> Result<ExponentFit> {
    check_window(g, x, radii, |r| r.saturating_sub(1), "exit time needs r <= reach")?;
    if radii.len() < 3 {
        return Err(Error::TooFewPoints(radii.len()));
    }
    let values = radii
        .par_iter()
        .map(|&r| Ok(exit_time(g, &exit_ball(g, x, r)?)?[x]))
        .collect::<Result<Vec<_>>>()?;
    ExponentFit::fit(radii.to_vec(), values)
}

/// One `(n, y)` pair of the band check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BandPoint {
    pub n: u64,
    pub y: VertexId,
    pub d: u64,
    pub xi: f64,
    /// `ln[(h_n + h_{n+1})(x,y) · V(x, ⌊n^{1/d_w}⌋)]`.
    pub s: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandOptions {
    /// Pairs with `ξ` above this are left out of the fit.
    pub xi_max: f64,
    /// Allowed residual band.
    pub threshold: f64,
}

impl Default for BandOptions {
    fn default() -> Self {
        Self {
            xi_max: 16.0,
            threshold: 50f64.ln(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BandCheck {
    pub report: ConditionReport,
    pub points: Vec<BandPoint>,
}

/// `ξ = (d^{d_w} / n)^{1/(d_w - 1)}`.
pub fn band_xi(d: u64, n: u64, d_w: f64) -> f64 {
    ((d as f64).powf(d_w) / n as f64).powf(1.0 / (d_w - 1.0))
}

fn time_radius(n: u64, d_w: f64) -> u64 {
    ((n as f64).powf(1.0 / d_w) + 1e-9).floor() as u64
}

pub fn subgaussian_band_check(
    g: &WeightedGraph,
    x: VertexId,
    d_f: f64,
    d_w: f64,
    n_list: &[u64],
    y_list: &[VertexId],
) -> Result<ConditionReport> {
    Ok(subgaussian_band_check_with(g, x, d_f, d_w, n_list, y_list, &BandOptions::default())?.report)
}

/// Fits `s ≈ a - b ξ` over the pairs with `n >= max(1, d(x,y))`. The volume
/// factor is measured on the graph; `d_f` is only recorded in the notes.
pub fn subgaussian_band_check_with(
    g: &WeightedGraph,
    x: VertexId,
    d_f: f64,
    d_w: f64,
    n_list: &[u64],
    y_list: &[VertexId],
    opts: &BandOptions,
) -> Result<BandCheck> {
    if d_w <= 1.0 {
        return Err(Error::InvalidParameter(format!("d_w must exceed 1, got {d_w}")));
    }
    let dist = g.distances_from(x, None);
    let (values, evo) = smoothed_values(g, x, n_list, y_list)?;

    let mut points = Vec::new();
    let mut underflow_excluded = 0;
    let mut xi_excluded = 0;
    for (i, &n) in n_list.iter().enumerate() {
        let volume = g.ball_measure(x, time_radius(n, d_w))?;
        for (j, &y) in y_list.iter().enumerate() {
            let d = dist[y];
            if n < d.max(1) {
                continue;
            }
            let h = values[i][j];
            if h < UNDERFLOW {
                underflow_excluded += 1;
                continue;
            }
            let xi = band_xi(d, n, d_w);
            if xi > opts.xi_max {
                xi_excluded += 1;
                continue;
            }
            points.push(BandPoint {
                n,
                y,
                d,
                xi,
                s: (h * volume).ln(),
            });
        }
    }
    if points.len() < 3 {
        return Err(Error::TooFewPoints(points.len()));
    }

    let xs: Vec<f64> = points.iter().map(|p| p.xi).collect();
    let ss: Vec<f64> = points.iter().map(|p| p.s).collect();
    let fit = linear_fit(&xs, &ss)?;
    let summary = BandSummary {
        a: fit.intercept,
        b: -fit.slope,
        r_squared: fit.r_squared,
        residual_band: fit.max_residual - fit.min_residual,
        points: points.len(),
        underflow_excluded,
        xi_excluded,
    };
    let mut report = ConditionReport::band(summary, opts.threshold);
    report.scales = points
        .iter()
        .filter(|p| p.y == x)
        .map(|p| ScaleConstant::new(p.n, p.s.exp()))
        .collect();
    report.min = report.scales.iter().map(|s| s.constant).reduce(f64::min);
    report.max = report.scales.iter().map(|s| s.constant).reduce(f64::max);
    let report = report
        .with_note(format!("d_f = {d_f} recorded; volumes are measured on the graph"))
        .with_note(format!(
            "max mass error {:.3e}, min kernel value {:.3e}",
            evo.max_mass_error(),
            evo.min_value()
        ));
    Ok(BandCheck { report, points })
}

/// Distances `0, 1, 2, 3, 4, 6, 8, 12, …` up to `max_d`, each represented
/// by its smallest-id vertex.
pub fn default_band_targets(g: &WeightedGraph, x: VertexId, max_d: u64) -> Vec<VertexId> {
    let dist = g.distances_from(x, Some(max_d));
    let mut wanted = vec![0u64, 1];
    let mut p = 2u64;
    while p <= max_d {
        wanted.push(p);
        if p + p / 2 <= max_d && p >= 2 {
            wanted.push(p + p / 2);
        }
        p *= 2;
    }
    wanted.sort_unstable();
    wanted.dedup();
    wanted
        .into_iter()
        .filter(|&d| d <= max_d)
        .filter_map(|d| dist.iter().position(|&e| e == d))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{lattice, lattice_center};

    #[test]
    fn row_zero_is_normalized_delta() {
        let g = lattice(2, 5).unwrap();
        let row = heat_kernel_row(&g, 12, 0).unwrap();
        assert_eq!(row.field[12], 0.25);
        assert_eq!(row.field.iter().filter(|&&v| v != 0.0).count(), 1);
        assert!((row.total_mass(&g) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn z1_two_steps() {
        let g = lattice(1, 21).unwrap();
        let row = heat_kernel_row(&g, 10, 2).unwrap();
        assert!((row.field[10] - 0.25).abs() < 1e-15);
        assert!((row.field[12] - 0.125).abs() < 1e-15);
    }

    #[test]
    fn smoothed_row_has_mass_two() {
        let g = lattice(2, 9).unwrap();
        let row = smoothed_row(&g, 40, 7).unwrap();
        assert!((row.total_mass(&g) - 2.0).abs() < 1e-12);
        assert!(row.smoothed);
    }

    #[test]
    fn evolution_tracks_invariants() {
        let g = lattice(2, 11).unwrap();
        let mut evo = HeatKernelEvolution::new(&g, lattice_center(2, 11)).unwrap();
        evo.advance_to(200);
        assert!(evo.max_mass_error() < 1e-12);
        assert!(evo.min_value() >= 0.0);
    }

    #[test]
    fn mixing_limit_z1() {
        let g = lattice(1, 61).unwrap();
        // reach 30: 3 √n < 30 ⇔ n < 100.
        assert_eq!(mixing_limit(&g, 30, 2.0), 99);
        assert_eq!(default_n_list(&g, 30, 2.0), vec![16, 32, 64]);
    }

    #[test]
    fn z1_walk_dimension() {
        let g = lattice(1, 257).unwrap();
        let fit = walk_dimension_fit(&g, 128, &[4, 8, 16, 32]).unwrap();
        assert!((fit.exponent - 2.0).abs() < 1e-6);
    }

    #[test]
    fn band_targets_are_at_requested_distances() {
        let g = lattice(1, 101).unwrap();
        let t = default_band_targets(&g, 50, 8);
        let d: Vec<u64> = t.iter().map(|&v| (v as i64 - 50).unsigned_abs()).collect();
        assert_eq!(d, vec![0, 1, 2, 3, 4, 6, 8]);
    }
}
