//! The full hypothesis/conclusion audit at one centre.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::ExponentFit;
use crate::graph::{VertexId, WeightedGraph, UNREACHED};
use crate::heat_kernel::{default_band_targets, default_n_list, subgaussian_band_check, walk_dimension_fit};
use crate::inequalities::{
    capacity_scaling_audit, default_radii, hypothesis_report, p0_report, poincare_scaling_audit,
    volume_fit, volume_scaling_audit,
};
use crate::proof_trace::{exit_bounds_audit, exit_floor_traces};
use crate::report::{ConditionReport, Verdict};

/// Vertex farthest from the frontier (smallest id on ties); the double-sweep
/// centre when the graph has no frontier.
pub fn auto_center(g: &WeightedGraph) -> VertexId {
    if g.frontier().is_empty() {
        return g.approximate_center();
    }
    let mut dist = vec![UNREACHED; g.vertex_count()];
    let mut queue = VecDeque::new();
    for &b in g.frontier() {
        dist[b] = 0;
        queue.push_back(b);
    }
    while let Some(v) = queue.pop_front() {
        for (w, _) in g.neighbors(v) {
            if dist[w] == UNREACHED {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    let best = dist.iter().copied().max().unwrap_or(0);
    dist.iter().position(|&d| d == best).unwrap_or(0)
}

#[derive(Clone, Debug, Default)]
pub struct AuditConfig {
    /// `None` picks [`auto_center`].
    pub center: Option<VertexId>,
    /// `None` uses [`default_radii`].
    pub radii: Option<Vec<u64>>,
    /// Exponents used by the audits; fitted values are used when absent.
    pub d_f: Option<f64>,
    pub d_w: Option<f64>,
    /// Skip the heat-kernel band check.
    pub skip_heat_kernel: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub center: VertexId,
    pub reach: u64,
    pub radii: Vec<u64>,
    pub d_f: f64,
    pub d_w: f64,
    pub volume_fit: ExponentFit,
    pub walk_dimension_fit: ExponentFit,
    pub volume: ConditionReport,
    pub p0: ConditionReport,
    pub capacity: ConditionReport,
    pub poincare: ConditionReport,
    pub exit_bounds: ConditionReport,
    pub exit_floor: ConditionReport,
    pub hypothesis: ConditionReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heat_kernel: Option<ConditionReport>,
    /// Largest `K0` across the floor traces.
    pub max_k0: Option<u32>,
    pub verdict: Verdict,
}

impl AuditReport {
    pub fn reports(&self) -> Vec<&ConditionReport> {
        let mut all = vec![
            &self.volume,
            &self.p0,
            &self.capacity,
            &self.poincare,
            &self.exit_bounds,
            &self.exit_floor,
            &self.hypothesis,
        ];
        all.extend(self.heat_kernel.as_ref());
        all
    }
}

pub fn run_audit(g: &WeightedGraph, config: &AuditConfig) -> Result<AuditReport> {
    let center = config.center.unwrap_or_else(|| auto_center(g));
    g.check_vertex(center)?;
    let reach = g.reach(center);
    let radii = config.radii.clone().unwrap_or_else(|| default_radii(g, center));
    if radii.len() < 3 {
        return Err(Error::TooFewPoints(radii.len()));
    }

    let volume_fit = volume_fit(g, center, &radii)?;
    let walk_fit = walk_dimension_fit(g, center, &radii)?;
    let d_f = config.d_f.unwrap_or(volume_fit.exponent);
    let d_w = config.d_w.unwrap_or(walk_fit.exponent);

    let (exit_floor, traces) = exit_floor_traces(g, center, &radii, d_w, Some(d_f))?;
    let heat_kernel = if config.skip_heat_kernel {
        None
    } else {
        let n_list = default_n_list(g, center, d_w);
        let targets = default_band_targets(g, center, reach / 2);
        Some(subgaussian_band_check(g, center, d_f, d_w, &n_list, &targets)?)
    };

    let mut report = AuditReport {
        center,
        reach,
        volume: volume_scaling_audit(g, center, &radii, d_f)?,
        p0: p0_report(g),
        capacity: capacity_scaling_audit(g, center, &radii, d_w)?,
        poincare: poincare_scaling_audit(g, center, &radii, d_w)?,
        exit_bounds: exit_bounds_audit(g, center, &radii, d_w)?,
        exit_floor,
        hypothesis: hypothesis_report(d_f, d_w),
        heat_kernel,
        max_k0: traces.iter().filter_map(|t| t.k0).max(),
        radii,
        d_f,
        d_w,
        volume_fit,
        walk_dimension_fit: walk_fit,
        verdict: Verdict::Fail,
    };
    report.verdict = Verdict::from_bool(report.reports().iter().all(|r| r.passes()));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{lattice, lattice_center, sierpinski_gasket};

    #[test]
    fn auto_center_maximizes_reach() {
        let g = lattice(2, 21).unwrap();
        assert_eq!(auto_center(&g), lattice_center(2, 21));
        assert_eq!(auto_center(&sierpinski_gasket(4).unwrap()), 0);
    }

    #[test]
    fn z1_audit_passes() {
        let g = lattice(1, 513).unwrap();
        let report = run_audit(&g, &AuditConfig::default()).unwrap();
        assert_eq!(report.radii, vec![4, 8, 16, 32, 64]);
        assert!(report.verdict.is_pass(), "{report:#?}");
    }
}
