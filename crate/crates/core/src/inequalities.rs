//! Scale-by-scale audits of volume growth, ellipticity, the Poincaré
//! inequality and the capacity upper bound.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fit::ExponentFit;
use crate::graph::{VertexId, WeightedGraph};
use crate::linalg::{rayleigh_max_deflated, OperatorMode, RayleighOptions, SparseSymOperator, VarianceForm};
use crate::potential::{annulus_capacity, Capacity};
pub use crate::report::hypothesis_gate;
use crate::report::{Condition, ConditionReport, Rule, ScaleConstant};

pub const DYADIC_RADII: [u64; 5] = [4, 8, 16, 32, 64];

/// Log-slope of per-scale constants below which a report gets a trend note.
const TREND_SLOPE: f64 = -0.5;

/// Dyadic radii `{4, …, 64}` with `4r <= reach(x)`.
pub fn default_radii(g: &WeightedGraph, x: VertexId) -> Vec<u64> {
    let reach = g.reach(x);
    DYADIC_RADII.iter().copied().filter(|&r| 4 * r <= reach).collect()
}

/// Dyadic radii `{4, …, 64}` with `2r <= reach(x)`, for exponent fits that
/// need no room for a doubled ball.
pub fn fit_radii(g: &WeightedGraph, x: VertexId) -> Vec<u64> {
    let reach = g.reach(x);
    DYADIC_RADII.iter().copied().filter(|&r| 2 * r <= reach).collect()
}

pub(crate) fn out_of_window(x: VertexId, r: u64, reach: u64, what: &'static str) -> Error {
    Error::OutOfWindow {
        center: x,
        radius: r,
        reach,
        what,
    }
}

/// Fails unless `scale(r) < reach(x)` for every radius.
pub(crate) fn check_window(
    g: &WeightedGraph,
    x: VertexId,
    radii: &[u64],
    scale: impl Fn(u64) -> u64,
    what: &'static str,
) -> Result<()> {
    g.check_vertex(x)?;
    let reach = g.reach(x);
    match radii.iter().find(|&&r| scale(r) >= reach) {
        Some(&r) => Err(out_of_window(x, r, reach, what)),
        None => Ok(()),
    }
}

pub fn volume_fit(g: &WeightedGraph, x: VertexId, radii: &[u64]) -> Result<ExponentFit> {
    check_window(g, x, radii, |r| r, "volume needs r < reach")?;
    let values = radii
        .iter()
        .map(|&r| g.ball_measure(x, r))
        .collect::<Result<Vec<_>>>()?;
    ExponentFit::fit(radii.to_vec(), values)
}

/// Per-scale `V(x,r) / r^{d_f}`, bounded spread.
pub fn volume_scaling_audit(g: &WeightedGraph, x: VertexId, radii: &[u64], d_f: f64) -> Result<ConditionReport> {
    check_window(g, x, radii, |r| r, "volume needs r < reach")?;
    let scales = radii
        .iter()
        .map(|&r| Ok(ScaleConstant::new(r, g.ball_measure(x, r)? / (r as f64).powf(d_f))))
        .collect::<Result<Vec<_>>>()?;
    Ok(with_trend_note(ConditionReport::spread(Condition::Volume, scales), "d_f"))
}

pub fn p0_report(g: &WeightedGraph) -> ConditionReport {
    ConditionReport::new(
        Condition::P0,
        Rule::Positive,
        0.0,
        vec![ScaleConstant::new(0, g.p0_constant())],
    )
}

/// Per-scale `Cap(B(x,r), B(x,2r)^c) · r^{d_w} / V(x,r)`.
pub fn capacity_scaling_audit(g: &WeightedGraph, x: VertexId, radii: &[u64], d_w: f64) -> Result<ConditionReport> {
    check_window(g, x, radii, |r| 2 * r, "annulus capacity needs 2r < reach")?;
    let scales = radii
        .par_iter()
        .map(|&r| {
            let constant = match annulus_capacity(g, x, r)?.value {
                Capacity::Finite(c) => c * (r as f64).powf(d_w) / g.ball_measure(x, r)?,
                Capacity::Infinite => f64::INFINITY,
            };
            Ok(ScaleConstant::new(r, constant))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(with_trend_note(ConditionReport::spread(Condition::CapacityUpper, scales), "d_w"))
}

/// Optimal constant in
/// `Σ_{B(x,r)} (f - f_B)² μ <= C · Σ_{edges of B(x,2r)} (Δf)² μ(edge)`,
/// without the `r^{d_w}` factor.
pub fn poincare_constant(g: &WeightedGraph, x: VertexId, r: u64) -> Result<f64> {
    poincare_constant_with(g, x, r, &RayleighOptions::default())
}

pub fn poincare_constant_with(g: &WeightedGraph, x: VertexId, r: u64, opts: &RayleighOptions) -> Result<f64> {
    check_window(g, x, &[r], |r| 2 * r, "Poincaré inequality needs 2r < reach")?;
    if r == 0 {
        return Ok(0.0);
    }
    let outer = g.ball(x, 2 * r)?;
    let inner = g.ball(x, r)?;
    let den = SparseSymOperator::new(g, &outer, OperatorMode::Neumann);
    let local: Vec<usize> = outer
        .ids()
        .iter()
        .enumerate()
        .filter(|(_, v)| inner.contains(**v))
        .map(|(i, _)| i)
        .collect();
    let weights = inner.ids().iter().map(|&v| g.mass(v)).collect();
    let num = VarianceForm::new(outer.len(), local, weights);
    let ones = vec![1.0; outer.len()];
    Ok(rayleigh_max_deflated(&num, &den, &[ones], opts)?.value)
}

/// Per-scale `poincare_constant(r) / r^{d_w}`.
pub fn poincare_scaling_audit(g: &WeightedGraph, x: VertexId, radii: &[u64], d_w: f64) -> Result<ConditionReport> {
    check_window(g, x, radii, |r| 2 * r, "Poincaré inequality needs 2r < reach")?;
    let scales = radii
        .par_iter()
        .map(|&r| Ok(ScaleConstant::new(r, poincare_constant(g, x, r)? / (r as f64).powf(d_w))))
        .collect::<Result<Vec<_>>>()?;
    Ok(with_trend_note(ConditionReport::spread(Condition::Poincare, scales), "d_w"))
}

/// As [`poincare_scaling_audit`], pooling every `(center, r)` pair into one
/// spread.
pub fn poincare_multi_center_audit(
    g: &WeightedGraph,
    centers: &[VertexId],
    radii: &[u64],
    d_w: f64,
) -> Result<ConditionReport> {
    for &c in centers {
        check_window(g, c, radii, |r| 2 * r, "Poincaré inequality needs 2r < reach")?;
    }
    let pairs: Vec<(VertexId, u64)> = centers
        .iter()
        .flat_map(|&c| radii.iter().map(move |&r| (c, r)))
        .collect();
    let scales = pairs
        .par_iter()
        .map(|&(c, r)| Ok(ScaleConstant::at(c, r, poincare_constant(g, c, r)? / (r as f64).powf(d_w))))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConditionReport::spread(Condition::Poincare, scales))
}

pub fn hypothesis_report(d_f: f64, d_w: f64) -> ConditionReport {
    let report = ConditionReport::gate(d_f, d_w);
    if hypothesis_gate(d_f, d_w) {
        report
    } else if d_w < 2.0 {
        report.with_note(format!("d_w = {d_w} is below 2"))
    } else {
        report.with_note(format!("d_f = {d_f} is not below 1 + d_w = {}", 1.0 + d_w))
    }
}

/// Notes a systematic decay of the constants, which usually means the
/// exponent was chosen too large.
pub(crate) fn with_trend_note(report: ConditionReport, exponent: &str) -> ConditionReport {
    let usable: Vec<&ScaleConstant> = report
        .scales
        .iter()
        .filter(|s| s.r > 0 && s.constant.is_finite() && s.constant > 0.0)
        .collect();
    if usable.len() < 3 {
        return report;
    }
    let x: Vec<f64> = usable.iter().map(|s| (s.r as f64).ln()).collect();
    let y: Vec<f64> = usable.iter().map(|s| s.constant.ln()).collect();
    match crate::fit::linear_fit(&x, &y) {
        Ok(fit) if fit.slope < TREND_SLOPE => report.with_note(format!(
            "constants decay like r^{:.3}; {exponent} looks too large",
            fit.slope
        )),
        _ => report,
    }
}
