//! Per-scale condition reports and their deterministic JSON form.

use serde::Serialize;
use serde_json::Value;

/// Version of the JSON layout written by [`to_stable_json`].
pub const SCHEMA_VERSION: u64 = 1;

/// Default bound on `max / min` of per-scale constants.
pub const DEFAULT_SPREAD: f64 = 50.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Condition {
    #[serde(rename = "V(d_f)")]
    Volume,
    #[serde(rename = "p0")]
    P0,
    #[serde(rename = "PI(d_w)")]
    Poincare,
    #[serde(rename = "Cap(d_w)<=")]
    CapacityUpper,
    #[serde(rename = "HK(d_w)")]
    HeatKernel,
    #[serde(rename = "hypothesis-gate")]
    HypothesisGate,
    #[serde(rename = "exit-upper")]
    ExitUpper,
    #[serde(rename = "log-caccioppoli")]
    LogCaccioppoli,
    #[serde(rename = "averaged-exit-lower")]
    AveragedExitLower,
    #[serde(rename = "exit-time-bounds")]
    ExitTimeBounds,
    #[serde(rename = "exit-floor")]
    ExitFloor,
    #[serde(rename = "mean-value")]
    MeanValue,
    #[serde(rename = "superharmonic")]
    Superharmonic,
    #[serde(rename = "content-mass")]
    ContentMass,
}

/// How a verdict follows from the stored numbers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// Constants finite, positive, and `max / min <= threshold`.
    Spread,
    /// Constants finite and positive.
    Positive,
    /// Every constant `<= threshold`.
    AtMost,
    /// Every constant `>= threshold`.
    AtLeast,
    /// Band summary has `b > 0`, `r² >= MIN_BAND_R_SQUARED` and residual
    /// band `<= threshold`.
    Band,
    /// Every part passes.
    AllParts,
    /// `2 <= d_w` and `d_f < 1 + d_w`.
    Gate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScaleConstant {
    pub r: u64,
    pub constant: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<usize>,
}

impl ScaleConstant {
    pub fn new(r: u64, constant: f64) -> Self {
        Self {
            r,
            constant,
            center: None,
        }
    }

    pub fn at(center: usize, r: u64, constant: f64) -> Self {
        Self {
            r,
            constant,
            center: Some(center),
        }
    }
}

pub const MIN_BAND_R_SQUARED: f64 = 0.9;

/// Linear fit `s ≈ a - b·ξ` of the normalized heat-kernel statistic.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BandSummary {
    pub a: f64,
    pub b: f64,
    pub r_squared: f64,
    /// `max - min` of the fit residuals.
    pub residual_band: f64,
    pub points: usize,
    /// Pairs dropped because the kernel underflowed.
    pub underflow_excluded: usize,
    /// Pairs dropped by the `ξ` cut-off.
    pub xi_excluded: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GateInputs {
    pub d_f: f64,
    pub d_w: f64,
}

pub fn hypothesis_gate(d_f: f64, d_w: f64) -> bool {
    2.0 <= d_w && d_f < 1.0 + d_w
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition: Condition,
    pub rule: Rule,
    pub threshold: f64,
    pub scales: Vec<ScaleConstant>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub parts: Vec<ConditionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band: Option<BandSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gate: Option<GateInputs>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ConditionReport {
    pub fn new(condition: Condition, rule: Rule, threshold: f64, scales: Vec<ScaleConstant>) -> Self {
        let mut report = Self {
            condition,
            rule,
            threshold,
            scales,
            min: None,
            max: None,
            verdict: Verdict::Fail,
            parts: Vec::new(),
            band: None,
            gate: None,
            notes: Vec::new(),
        };
        report.refresh();
        report
    }

    pub fn spread(condition: Condition, scales: Vec<ScaleConstant>) -> Self {
        Self::new(condition, Rule::Spread, DEFAULT_SPREAD, scales)
    }

    pub fn all_parts(condition: Condition, parts: Vec<ConditionReport>) -> Self {
        let mut report = Self::new(condition, Rule::AllParts, 0.0, Vec::new());
        report.parts = parts;
        report.refresh();
        report
    }

    pub fn band(summary: BandSummary, threshold: f64) -> Self {
        let mut report = Self::new(Condition::HeatKernel, Rule::Band, threshold, Vec::new());
        report.band = Some(summary);
        report.refresh();
        report
    }

    pub fn gate(d_f: f64, d_w: f64) -> Self {
        let mut report = Self::new(Condition::HypothesisGate, Rule::Gate, 0.0, Vec::new());
        report.gate = Some(GateInputs { d_f, d_w });
        report.refresh();
        report
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    /// The verdict implied by the stored numbers.
    pub fn evaluate(&self) -> Verdict {
        let constants = || self.scales.iter().map(|s| s.constant);
        let nonempty = !self.scales.is_empty();
        let ok = match self.rule {
            Rule::Spread => {
                nonempty
                    && constants().all(|c| c.is_finite() && c > 0.0)
                    && match (self.min, self.max) {
                        (Some(lo), Some(hi)) => hi / lo <= self.threshold,
                        _ => false,
                    }
            }
            Rule::Positive => nonempty && constants().all(|c| c.is_finite() && c > 0.0),
            Rule::AtMost => nonempty && constants().all(|c| c <= self.threshold),
            Rule::AtLeast => nonempty && constants().all(|c| c >= self.threshold),
            Rule::Band => self.band.as_ref().is_some_and(|b| {
                b.b > 0.0 && b.r_squared >= MIN_BAND_R_SQUARED && b.residual_band <= self.threshold
            }),
            Rule::AllParts => !self.parts.is_empty() && self.parts.iter().all(|p| p.verdict.is_pass()),
            Rule::Gate => self.gate.is_some_and(|g| hypothesis_gate(g.d_f, g.d_w)),
        };
        Verdict::from_bool(ok)
    }

    pub fn passes(&self) -> bool {
        self.verdict.is_pass()
    }

    fn refresh(&mut self) {
        let constants = self.scales.iter().map(|s| s.constant);
        self.min = constants.clone().reduce(f64::min);
        self.max = constants.reduce(f64::max);
        self.verdict = self.evaluate();
    }
}

/// Rounds every float to 12 significant digits. Non-finite floats become
/// `null`, as `serde_json` does.
pub fn round_floats(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
            serde_json::Number::from_f64(rounded).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_floats).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_floats(v))).collect()),
        other => other,
    }
}

/// Pretty JSON with sorted keys, floats at 12 significant digits, and a
/// top-level `"schema"` entry when `value` serializes to an object.
pub fn to_stable_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut v = round_floats(serde_json::to_value(value)?);
    if let Value::Object(map) = &mut v {
        map.insert("schema".into(), Value::from(SCHEMA_VERSION));
    }
    serde_json::to_string_pretty(&v)
}
