use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use subgauss_core::generators::{lattice, perturb_weights, sierpinski_gasket, subdivide, vicsek_tree};
use subgauss_core::heat_kernel::{
    default_band_targets, default_n_list, on_diagonal_fit, subgaussian_band_check_with, walk_dimension_fit,
    BandOptions, HeatKernelEvolution,
};
use subgauss_core::inequalities::{fit_radii, volume_fit};
use subgauss_core::proof_trace::tentacle_trace;
use subgauss_core::{auto_center, io as graph_io, run_audit, to_stable_json, AuditConfig, WeightedGraph};

use crate::args::{
    AuditArgs, Center, Cli, Command, FamilyParams, Family, FitArgs, FitTarget, GenArgs, GraphSource,
    HeatKernelArgs, TraceArgs,
};

#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            kind: "usage",
            message: message.into(),
        }
    }
}

impl From<subgauss_core::Error> for CliError {
    fn from(err: subgauss_core::Error) -> Self {
        use subgauss_core::Error as E;
        let kind = match &err {
            E::Io(_) => "io",
            E::Parse { .. } => "parse",
            E::InvalidVertex { .. } | E::InvalidParameter(_) | E::OutOfWindow { .. } | E::TooFewPoints(_) => {
                "usage"
            }
            _ => "compute",
        };
        Self {
            kind,
            message: err.to_string(),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(err: io::Error) -> Self {
        Self {
            kind: "io",
            message: err.to_string(),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(err: csv::Error) -> Self {
        Self {
            kind: "io",
            message: err.to_string(),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        Self {
            kind: "io",
            message: err.to_string(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// `Ok(true)` on success, `Ok(false)` when a verdict failed.
pub fn run(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::Gen(args) => gen(args),
        Command::Audit(args) => audit(args),
        Command::Heatkernel(args) => heatkernel(args),
        Command::Trace(args) => trace(args),
        Command::Fit(args) => fit(args),
    }
}

fn build_family(family: Family, p: &FamilyParams) -> CliResult<WeightedGraph> {
    let mut g = match family {
        Family::Lattice => lattice(p.d, p.side)?,
        Family::Sierpinski => sierpinski_gasket(p.level)?,
        Family::Vicsek => vicsek_tree(p.level)?,
    };
    if let Some(bounds) = &p.perturb {
        let [lo, hi] = bounds[..] else {
            return Err(CliError::usage("--perturb takes LO,HI"));
        };
        g = perturb_weights(&g, lo, hi, p.seed)?;
    }
    if let Some(k) = p.subdivide {
        g = subdivide(&g, k)?;
    }
    Ok(g)
}

fn load(source: &GraphSource) -> CliResult<WeightedGraph> {
    match (&source.graph, source.family) {
        (Some(path), None) => Ok(graph_io::load(path)?),
        (None, Some(family)) => build_family(family, &source.params),
        _ => Err(CliError::usage("give either a graph file or --family")),
    }
}

fn resolve(g: &WeightedGraph, center: Center) -> CliResult<usize> {
    match center {
        Center::Auto => Ok(auto_center(g)),
        Center::Id(v) => {
            g.check_vertex(v)?;
            Ok(v)
        }
    }
}

fn open_output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> CliResult<()> {
    let mut out = open_output(path)?;
    writeln!(out, "{}", to_stable_json(value)?)?;
    out.flush()?;
    Ok(())
}

fn gen(args: GenArgs) -> CliResult<bool> {
    let g = build_family(args.family, &args.params)?;
    let out = open_output(args.output.as_deref())?;
    graph_io::write_edge_list(&g, out)?;
    Ok(true)
}

fn audit(args: AuditArgs) -> CliResult<bool> {
    let g = load(&args.source)?;
    let config = AuditConfig {
        center: Some(resolve(&g, args.center)?),
        radii: args.radii,
        d_f: args.df,
        d_w: args.dw,
        skip_heat_kernel: args.no_heat_kernel,
    };
    let report = run_audit(&g, &config)?;
    write_json(&report, args.output.as_deref())?;
    Ok(report.verdict.is_pass())
}

/// Given exponents, or fitted ones from the default radii.
fn exponents(g: &WeightedGraph, x: usize, d_f: Option<f64>, d_w: Option<f64>) -> CliResult<(f64, f64)> {
    let radii = fit_radii(g, x);
    let d_f = match d_f {
        Some(v) => v,
        None => volume_fit(g, x, &radii)?.exponent,
    };
    let d_w = match d_w {
        Some(v) => v,
        None => walk_dimension_fit(g, x, &radii)?.exponent,
    };
    Ok((d_f, d_w))
}

fn heatkernel(args: HeatKernelArgs) -> CliResult<bool> {
    let g = load(&args.graph)?;
    let x = resolve(&g, args.source)?;
    let targets = match args.targets {
        Some(t) => t,
        None => default_band_targets(&g, x, g.reach(x) / 2),
    };
    let mut out = csv::Writer::from_writer(open_output(args.output.as_deref())?);

    if args.band {
        let (d_f, d_w) = exponents(&g, x, args.df, args.dw)?;
        let n_list = args.n_list.unwrap_or_else(|| default_n_list(&g, x, d_w));
        let opts = BandOptions {
            xi_max: args.xi_max,
            ..BandOptions::default()
        };
        let check = subgaussian_band_check_with(&g, x, d_f, d_w, &n_list, &targets, &opts)?;
        for p in &check.points {
            out.serialize(p)?;
        }
        out.flush()?;
        return Ok(check.report.passes());
    }

    let n_list = match args.n_list {
        Some(n) => n,
        None => default_n_list(&g, x, args.dw.unwrap_or(2.0)),
    };
    for &y in &targets {
        g.check_vertex(y)?;
    }
    let dist = g.distances_from(x, None);
    let mut order = n_list.clone();
    order.sort_unstable();
    order.dedup();
    let mut evo = HeatKernelEvolution::new(&g, x)?;
    out.write_record(["n", "y", "d", "h", "h_smoothed"])?;
    for n in order {
        evo.advance_to(n);
        let now: Vec<f64> = targets.iter().map(|&y| evo.values()[y]).collect();
        let mut ahead = evo.clone();
        ahead.step();
        for (&y, h) in targets.iter().zip(now) {
            let smoothed = h + ahead.values()[y];
            out.write_record([
                n.to_string(),
                y.to_string(),
                dist[y].to_string(),
                h.to_string(),
                smoothed.to_string(),
            ])?;
        }
        evo = ahead;
    }
    out.flush()?;
    Ok(true)
}

fn trace(args: TraceArgs) -> CliResult<bool> {
    let g = load(&args.source)?;
    let x = resolve(&g, args.center)?;
    let (d_f, d_w) = exponents(&g, x, args.df, args.dw)?;
    let trace = tentacle_trace(&g, x, args.r, d_w, d_f)?;
    let violations = trace.invariant_violations();
    let mut value = serde_json::to_value(&trace)?;
    if let serde_json::Value::Object(map) = &mut value {
        map.insert("violations".into(), serde_json::to_value(&violations)?);
    }
    write_json(&value, args.output.as_deref())?;
    Ok(violations.is_empty())
}

fn fit(args: FitArgs) -> CliResult<bool> {
    let g = load(&args.source)?;
    let x = resolve(&g, args.center)?;
    let radii = args.radii.unwrap_or_else(|| fit_radii(&g, x));
    let result = match args.what {
        FitTarget::Volume => volume_fit(&g, x, &radii)?,
        FitTarget::Exit => walk_dimension_fit(&g, x, &radii)?,
        FitTarget::Ondiag => {
            let n_list = args.n_list.unwrap_or_else(|| default_n_list(&g, x, args.dw));
            on_diagonal_fit(&g, x, &n_list)?
        }
    };
    write_json(&result, args.output.as_deref())?;
    Ok(true)
}
