//! Declarative scenarios: TOML configuration, orchestrated runs, CSV dumps
//! and the bundled presets.
//!
//! A scenario file looks like
//!
//! ```toml
//! name = "example"
//!
//! [run]                     # every key optional
//! q_over_hbar = 1.0
//! n = 32                    # time intervals / path subintervals
//! m = 33                    # nodes per surface curve
//!
//! [solenoid.main]
//! axis = [0.0, 0.0]
//! radius = 0.5
//! flux = [[1.0, 0.0], [2.0, 3.0]]   # (t, Φ) knots, or a constant
//!
//! [cage.left]
//! kind = "shielded"                  # or "potential"
//! center = [3.0, 0.0, 0.0]
//! radius = 0.5
//!
//! [arm.a]
//! knots = [[x, y, z, t], ...]
//!
//! [strategy.direct]
//! kind = "direct"                    # or "waypoints" with points = [[x, y], ...]
//!
//! [[gauge]]                          # gauge functions for the invariance audit
//! kind = "polynomial"
//! terms = [{ coef = 0.3, powers = [1, 1, 0, 1] }]
//!
//! [[expect]]
//! formula = "surface:direct"         # or audit = "gauge"
//! value = 1.5707963267948966
//! tolerance = 1e-6
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::em::{
    ChiSpec, Event, FieldConfig, GaugeFunction, GaugeState, PotentialCage, Profile, ShieldedCage,
    SolenoidSource,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::{Vec2, Vec3};
use crate::phase::{
    gauge_invariance_audit, phase_decomposition, phase_diff_potentials, phase_electric, phase_field_line,
    phase_loop_static, phase_surface, surface_difference_audit, GaugeAudit, PhaseReport, PhysicalConstants,
    QuadratureSpec, SurfaceDifferenceAudit,
};
use crate::surface::{build_surface, DeformationStrategy, SurfaceMesh};
use crate::worldline::{Interferometer, Worldline};

const PRESETS: [(&str, &str); 3] = [
    ("fig1_magnetic", include_str!("../presets/fig1_magnetic.toml")),
    ("fig2_electric", include_str!("../presets/fig2_electric.toml")),
    ("fig3_electrodynamic", include_str!("../presets/fig3_electrodynamic.toml")),
];

const DEFAULT_TOLERANCE: f64 = 1e-6;
const FORMULA_EQUIVALENCE_FLOOR: f64 = 1e-6;
const AUDITS: [&str; 3] = ["gauge", "surface_difference", "formula_equivalence"];

/// Names of the bundled presets.
pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|p| p.0)
}

/// TOML source of a bundled preset.
pub fn preset_source(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|p| p.0 == name).map(|p| p.1)
}

pub fn load_preset(name: &str) -> Result<Scenario> {
    let src = preset_source(name).ok_or_else(|| Error::InvalidArgument(format!("unknown preset `{name}`")))?;
    load_scenario(src)
}

// ---------------------------------------------------------------------------
// Schema
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    #[serde(default)]
    description: String,
    #[serde(default)]
    run: RawRun,
    #[serde(default)]
    solenoid: BTreeMap<String, RawSolenoid>,
    #[serde(default)]
    cage: BTreeMap<String, RawCage>,
    #[serde(default)]
    arm: BTreeMap<String, RawArm>,
    #[serde(default)]
    strategy: BTreeMap<String, RawStrategy>,
    #[serde(default)]
    gauge: Vec<ChiSpec>,
    #[serde(default)]
    expect: Vec<Expectation>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawRun {
    q_over_hbar: Option<f64>,
    n: Option<usize>,
    m: Option<usize>,
    order: Option<usize>,
    line_pieces: Option<usize>,
    execution: Option<Execution>,
    reference_strategy: Option<String>,
    field_line_path: Option<Vec<[f64; 3]>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolenoid {
    axis: [f64; 2],
    radius: f64,
    flux: RawProfile,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawProfile {
    Constant(f64),
    Knots(Vec<[f64; 2]>),
}

impl RawProfile {
    fn build(&self) -> Result<Profile> {
        match self {
            Self::Constant(v) => Profile::new(vec![(0.0, *v)]),
            Self::Knots(k) => Profile::new(k.iter().map(|p| (p[0], p[1])).collect()),
        }
    }
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum RawCage {
    Shielded { center: [f64; 3], radius: f64 },
    Potential { center: [f64; 3], inner_radius: f64, outer_radius: f64, potential: RawProfile },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArm {
    knots: Vec<[f64; 4]>,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum RawStrategy {
    Direct,
    Waypoints { points: Vec<[f64; 2]> },
}

/// Declared expected value of a formula (or a term of it), or a required
/// audit pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub term: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

impl Expectation {
    fn target(&self) -> String {
        match (&self.formula, &self.term, &self.audit) {
            (Some(f), Some(t), _) => format!("{f}.{t}"),
            (Some(f), None, _) => f.clone(),
            (None, _, Some(a)) => format!("audit:{a}"),
            _ => "?".into(),
        }
    }
}

/// Validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub config: FieldConfig,
    pub interferometer: Interferometer,
    pub strategies: Vec<(String, DeformationStrategy)>,
    /// Strategy every other one is compared against in the surface audit.
    pub reference_strategy: Option<String>,
    pub gauges: Vec<ChiSpec>,
    pub constants: PhysicalConstants,
    pub quadrature: QuadratureSpec,
    pub field_line_path: Option<Vec<Vec3>>,
    pub expectations: Vec<Expectation>,
}

fn parse_error(text: &str, err: toml::de::Error) -> Error {
    let offset = err.span().map(|s| s.start).unwrap_or(0).min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    Error::Parse { line, column, message: err.message().trim().to_string() }
}

/// Parse and validate a scenario.
///
/// Syntax and schema errors come back as [`Error::Parse`] with a position;
/// every geometric or semantic problem is listed in one
/// [`Error::InvalidConfig`].
pub fn load_scenario(text: &str) -> Result<Scenario> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| parse_error(text, e))?;
    let mut issues = Vec::new();

    if raw.name.trim().is_empty() {
        issues.push("name must be nonempty".to_string());
    }

    let mut solenoids = Vec::new();
    for (name, s) in &raw.solenoid {
        match s.flux.build() {
            Ok(flux) => solenoids.push(SolenoidSource::new(name, Vec2::new(s.axis[0], s.axis[1]), s.radius, flux)),
            Err(e) => issues.push(format!("solenoid.{name}: {e}")),
        }
    }
    let mut shielded = Vec::new();
    let mut potential = Vec::new();
    for (name, c) in &raw.cage {
        match c {
            RawCage::Shielded { center, radius } => {
                shielded.push(ShieldedCage::new(name, Vec3::from(*center), *radius))
            }
            RawCage::Potential { center, inner_radius, outer_radius, potential: p } => match p.build() {
                Ok(profile) => potential.push(PotentialCage::new(
                    name,
                    Vec3::from(*center),
                    *inner_radius,
                    *outer_radius,
                    profile,
                )),
                Err(e) => issues.push(format!("cage.{name}: {e}")),
            },
        }
    }
    let config = FieldConfig { solenoids, shielded_cages: shielded, potential_cages: potential };
    issues.extend(config.validate());

    for label in raw.arm.keys() {
        if label != "a" && label != "b" {
            issues.push(format!("unknown arm `{label}` (expected `a` and `b`)"));
        }
    }
    let mut arm = |label: &str| match raw.arm.get(label) {
        None => {
            issues.push(format!("missing [arm.{label}]"));
            None
        }
        Some(a) => Worldline::from_knots(&a.knots).map_err(|e| issues.push(format!("arm.{label}: {e}"))).ok(),
    };
    let (a, b) = (arm("a"), arm("b"));
    let interferometer = match (a, b) {
        (Some(a), Some(b)) => Interferometer::new(a, b).map_err(|e| issues.push(e.to_string())).ok(),
        _ => None,
    };

    let run = &raw.run;
    let mut quadrature = QuadratureSpec::default();
    quadrature.n = run.n.unwrap_or(quadrature.n);
    quadrature.m = run.m.unwrap_or(quadrature.m);
    quadrature.order = run.order.unwrap_or(quadrature.order);
    quadrature.line_pieces = run.line_pieces.unwrap_or(quadrature.line_pieces);
    quadrature.execution = run.execution.unwrap_or_default();
    issues.extend(check_quadrature(&quadrature));
    let constants = PhysicalConstants { q_over_hbar: run.q_over_hbar.unwrap_or(1.0) };
    if !constants.q_over_hbar.is_finite() {
        issues.push("run.q_over_hbar must be finite".into());
    }

    let strategies: Vec<(String, DeformationStrategy)> = raw
        .strategy
        .iter()
        .map(|(name, s)| {
            let strat = match s {
                RawStrategy::Direct => DeformationStrategy::Direct,
                RawStrategy::Waypoints { points } => {
                    DeformationStrategy::ViaWaypoints(points.iter().map(|p| Vec2::new(p[0], p[1])).collect())
                }
            };
            (name.clone(), strat)
        })
        .collect();
    if let Some(interf) = &interferometer {
        for (name, s) in &strategies {
            if let Err(e) = build_surface(interf, s, &config, 2, 2) {
                issues.push(format!("strategy.{name}: {e}"));
            }
        }
    }
    if let Some(r) = &run.reference_strategy {
        if !raw.strategy.contains_key(r) {
            issues.push(format!("run.reference_strategy `{r}` is not a declared strategy"));
        }
    }

    for (i, g) in raw.gauge.iter().enumerate() {
        if let Err(e) = GaugeState::from_spec(g.clone()) {
            issues.push(format!("gauge[{i}]: {e}"));
        }
    }

    let mut formulas: Vec<String> =
        ["potential_difference", "loop_static", "electric", "decomposition", "field_line"].map(String::from).into();
    formulas.extend(raw.strategy.keys().map(|s| format!("surface:{s}")));
    for (i, e) in raw.expect.iter().enumerate() {
        match (&e.formula, &e.audit) {
            (Some(f), None) => {
                if !formulas.contains(f) {
                    issues.push(format!("expect[{i}]: unknown formula `{f}`"));
                }
                if !e.value.is_some_and(f64::is_finite) {
                    issues.push(format!("expect[{i}]: a formula expectation needs a finite `value`"));
                }
            }
            (None, Some(a)) => {
                if !AUDITS.contains(&a.as_str()) {
                    issues.push(format!("expect[{i}]: unknown audit `{a}`"));
                }
                if e.term.is_some() || e.value.is_some() {
                    issues.push(format!("expect[{i}]: audit expectations take no `term` or `value`"));
                }
            }
            _ => issues.push(format!("expect[{i}]: set exactly one of `formula` and `audit`")),
        }
        if e.tolerance.is_nan() || e.tolerance < 0.0 {
            issues.push(format!("expect[{i}]: tolerance must be nonnegative"));
        }
    }

    match interferometer {
        Some(interferometer) if issues.is_empty() => Ok(Scenario {
            name: raw.name,
            description: raw.description,
            config,
            interferometer,
            strategies,
            reference_strategy: run.reference_strategy.clone(),
            gauges: raw.gauge,
            constants,
            quadrature,
            field_line_path: run.field_line_path.as_ref().map(|p| p.iter().map(|v| Vec3::from(*v)).collect()),
            expectations: raw.expect,
        }),
        _ => Err(Error::InvalidConfig(issues)),
    }
}

fn check_quadrature(q: &QuadratureSpec) -> Vec<String> {
    let mut out = Vec::new();
    if q.n < 2 || q.m < 2 {
        out.push(format!("grid needs N ≥ 2 and M ≥ 2, got N={}, M={}", q.n, q.m));
    }
    if !(1..=64).contains(&q.order) {
        out.push(format!("quadrature order must be in 1..=64, got {}", q.order));
    }
    if q.line_pieces == 0 {
        out.push("line_pieces must be positive".into());
    }
    out
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

/// Result of one formula or audit; precondition failures are `skipped`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Outcome<T> {
    Ok { result: T },
    Skipped { reason: String },
    Error { message: String },
}

impl<T> Outcome<T> {
    fn from_result(r: Result<T>) -> Self {
        match r {
            Ok(result) => Self::Ok { result },
            Err(Error::StructureViolation(reason)) => Self::Skipped { reason },
            Err(e) => Self::Error { message: e.to_string() },
        }
    }

    pub fn ok(&self) -> Option<&T> {
        match self {
            Self::Ok { result } => Some(result),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceDifferenceEntry {
    pub first: String,
    pub second: String,
    pub outcome: Outcome<SurfaceDifferenceAudit>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceCheck {
    pub first: String,
    pub second: String,
    pub difference: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Audits {
    pub gauge: Outcome<GaugeAudit>,
    pub surface_difference: Vec<SurfaceDifferenceEntry>,
    pub formula_equivalence: Vec<EquivalenceCheck>,
}

impl Audits {
    fn passed(&self, name: &str) -> std::result::Result<bool, String> {
        match name {
            "gauge" => match &self.gauge {
                Outcome::Ok { result } => Ok(result.passed),
                Outcome::Skipped { reason } => Err(format!("skipped: {reason}")),
                Outcome::Error { message } => Err(message.clone()),
            },
            "surface_difference" => {
                if self.surface_difference.is_empty() {
                    return Err("needs at least two strategies".into());
                }
                Ok(self.surface_difference.iter().all(|e| e.outcome.ok().is_some_and(|a| a.passed)))
            }
            "formula_equivalence" => {
                if self.formula_equivalence.is_empty() {
                    return Err("no pair of formulas completed".into());
                }
                Ok(self.formula_equivalence.iter().all(|c| c.passed))
            }
            _ => Err(format!("unknown audit `{name}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectationResult {
    pub target: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub actual: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Everything a run produces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub q_over_hbar: f64,
    pub quadrature: QuadratureSpec,
    pub formulas: BTreeMap<String, Outcome<PhaseReport>>,
    pub audits: Audits,
    pub expectations: Vec<ExpectationResult>,
    /// All declared expectations hold.
    pub passed: bool,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn formula(&self, name: &str) -> Option<&PhaseReport> {
        self.formulas.get(name).and_then(Outcome::ok)
    }
}

impl Scenario {
    /// Override the surface grid (`n` time intervals, `m` curve nodes).
    pub fn set_grid(&mut self, n: usize, m: usize) -> Result<()> {
        let q = QuadratureSpec { n, m, ..self.quadrature };
        let issues = check_quadrature(&q);
        if !issues.is_empty() {
            return Err(Error::InvalidArgument(issues.join("; ")));
        }
        self.quadrature = q;
        Ok(())
    }

    pub fn strategy(&self, name: &str) -> Option<&DeformationStrategy> {
        self.strategies.iter().find(|s| s.0 == name).map(|s| &s.1)
    }

    /// The reference strategy: the declared one, else the first direct one,
    /// else the first.
    pub fn reference(&self) -> Option<&str> {
        self.reference_strategy
            .as_deref()
            .or_else(|| self.strategies.iter().find(|s| s.1 == DeformationStrategy::Direct).map(|s| s.0.as_str()))
            .or_else(|| self.strategies.first().map(|s| s.0.as_str()))
    }

    pub fn mesh(&self, strategy: &str) -> Result<SurfaceMesh> {
        let s = self
            .strategy(strategy)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown strategy `{strategy}`")))?;
        build_surface(&self.interferometer, s, &self.config, self.quadrature.n, self.quadrature.m)
    }

    pub fn gauge_functions(&self) -> Vec<Arc<dyn GaugeFunction>> {
        self.gauges.iter().map(|g| Arc::new(g.clone()) as Arc<dyn GaugeFunction>).collect()
    }

    /// Run every formula and audit; failures are recorded per item.
    pub fn run(&self) -> RunReport {
        let (interf, cfg, k, q) = (&self.interferometer, &self.config, &self.constants, &self.quadrature);
        let base = GaugeState::base();
        let mut formulas = BTreeMap::new();
        formulas.insert(
            "potential_difference".to_string(),
            Outcome::from_result(phase_diff_potentials(interf, cfg, &base, k, q)),
        );
        formulas.insert("loop_static".into(), Outcome::from_result(phase_loop_static(interf, cfg, k)));
        formulas.insert("electric".into(), Outcome::from_result(phase_electric(interf, cfg, k, q)));
        formulas.insert("decomposition".into(), Outcome::from_result(phase_decomposition(interf, cfg, &base, k, q)));
        formulas.insert(
            "field_line".into(),
            Outcome::from_result(phase_field_line(interf, cfg, k, q, self.field_line_path.as_deref())),
        );
        let meshes: Vec<(&str, Result<SurfaceMesh>)> =
            self.strategies.iter().map(|(name, _)| (name.as_str(), self.mesh(name))).collect();
        for (name, mesh) in &meshes {
            let report = mesh.clone().and_then(|m| phase_surface(&m, cfg, k, q));
            formulas.insert(format!("surface:{name}"), Outcome::from_result(report));
        }

        let gauge = if self.gauges.is_empty() {
            Outcome::Skipped { reason: "no gauge functions declared".into() }
        } else {
            Outcome::from_result(gauge_invariance_audit(interf, cfg, &self.gauge_functions(), k, q))
        };
        let mut surface_difference = Vec::new();
        if let Some(reference) = self.reference() {
            let first = meshes.iter().find(|m| m.0 == reference).map(|m| &m.1);
            for (name, second) in meshes.iter().filter(|m| m.0 != reference) {
                let outcome = match (first, second) {
                    (Some(Ok(a)), Ok(b)) => Outcome::from_result(surface_difference_audit(a, b, cfg, k, q)),
                    (Some(Err(e)), _) | (_, Err(e)) => Outcome::Error { message: e.to_string() },
                    (None, _) => Outcome::Error { message: format!("unknown strategy `{reference}`") },
                };
                surface_difference.push(SurfaceDifferenceEntry {
                    first: reference.to_string(),
                    second: name.to_string(),
                    outcome,
                });
            }
        }
        let formula_equivalence = equivalence_checks(&formulas);
        let audits = Audits { gauge, surface_difference, formula_equivalence };

        let expectations: Vec<ExpectationResult> =
            self.expectations.iter().map(|e| check_expectation(e, &formulas, &audits)).collect();
        let passed = expectations.iter().all(|e| e.passed);
        RunReport {
            scenario: self.name.clone(),
            q_over_hbar: k.q_over_hbar,
            quadrature: *q,
            formulas,
            audits,
            expectations,
            passed,
        }
    }
}

fn equivalence_checks(formulas: &BTreeMap<String, Outcome<PhaseReport>>) -> Vec<EquivalenceCheck> {
    let mut pairs: Vec<(&str, &str)> = Vec::new();
    for name in formulas.keys().filter(|n| n.as_str() != "potential_difference") {
        pairs.push(("potential_difference", name));
    }
    pairs.push(("decomposition", "field_line"));
    pairs
        .into_iter()
        .filter_map(|(a, b)| {
            let (ra, rb) = (formulas.get(a)?.ok()?, formulas.get(b)?.ok()?);
            let difference = (ra.total - rb.total).abs();
            let tolerance = FORMULA_EQUIVALENCE_FLOOR.max(ra.error_estimate + rb.error_estimate);
            Some(EquivalenceCheck {
                first: a.to_string(),
                second: b.to_string(),
                difference,
                tolerance,
                passed: difference <= tolerance,
            })
        })
        .collect()
}

fn check_expectation(
    e: &Expectation,
    formulas: &BTreeMap<String, Outcome<PhaseReport>>,
    audits: &Audits,
) -> ExpectationResult {
    let mut result = ExpectationResult {
        target: e.target(),
        expected: e.value,
        actual: None,
        tolerance: e.tolerance,
        passed: false,
        note: None,
    };
    if let Some(audit) = &e.audit {
        match audits.passed(audit) {
            Ok(p) => result.passed = p,
            Err(note) => result.note = Some(note),
        }
        return result;
    }
    let name = e.formula.as_deref().unwrap_or_default();
    let actual = match formulas.get(name) {
        Some(Outcome::Ok { result: r }) => match &e.term {
            None => Ok(r.total),
            Some(t) => r.terms.get(t).copied().ok_or_else(|| format!("no term `{t}` in `{name}`")),
        },
        Some(Outcome::Skipped { reason }) => Err(format!("skipped: {reason}")),
        Some(Outcome::Error { message }) => Err(message.clone()),
        None => Err(format!("unknown formula `{name}`")),
    };
    match actual {
        Ok(v) => {
            result.actual = Some(v);
            result.passed = e.value.is_some_and(|x| (v - x).abs() <= e.tolerance);
        }
        Err(note) => result.note = Some(note),
    }
    result
}

// ---------------------------------------------------------------------------
// Dumps
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DumpKind {
    Fields,
    Mesh,
    Worldlines,
}

impl FromStr for DumpKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fields" => Ok(Self::Fields),
            "mesh" => Ok(Self::Mesh),
            "worldlines" => Ok(Self::Worldlines),
            other => Err(Error::InvalidArgument(format!(
                "unknown dump kind `{other}` (expected fields, mesh or worldlines)"
            ))),
        }
    }
}

/// Sampled range of one coordinate: `n` evenly spaced values from `lo` to
/// `hi` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSampling {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl AxisSampling {
    pub fn fixed(v: f64) -> Self {
        Self { lo: v, hi: v, n: 1 }
    }

    fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| {
            if self.n == 1 {
                self.lo
            } else {
                self.lo + (self.hi - self.lo) * i as f64 / (self.n - 1) as f64
            }
        })
    }
}

/// Spacetime sampling grid for field dumps, written as
/// `x=lo:hi:n,y=lo:hi:n,z=v,t=v`; omitted coordinates default to 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampling {
    pub x: AxisSampling,
    pub y: AxisSampling,
    pub z: AxisSampling,
    pub t: AxisSampling,
}

impl FromStr for Sampling {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let bad = |why: String| Error::InvalidArgument(format!("invalid sampling spec `{spec}`: {why}"));
        let mut axes = [None; 4];
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, val) = part.split_once('=').ok_or_else(|| bad(format!("`{part}` is not key=value")))?;
            let slot = ["x", "y", "z", "t"]
                .iter()
                .position(|k| *k == key.trim())
                .ok_or_else(|| bad(format!("unknown coordinate `{key}`")))?;
            if axes[slot].is_some() {
                return Err(bad(format!("coordinate `{key}` given twice")));
            }
            let num = |s: &str| {
                s.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| bad(format!("bad number `{s}`")))
            };
            let fields: Vec<&str> = val.split(':').collect();
            axes[slot] = Some(match fields.as_slice() {
                [v] => AxisSampling::fixed(num(v)?),
                [lo, hi, n] => {
                    let n: usize = n.trim().parse().map_err(|_| bad(format!("bad count `{n}`")))?;
                    if n == 0 {
                        return Err(bad("count must be positive".into()));
                    }
                    AxisSampling { lo: num(lo)?, hi: num(hi)?, n }
                }
                _ => return Err(bad(format!("`{val}` is neither a value nor lo:hi:n"))),
            });
        }
        let [x, y, z, t] = axes.map(|a| a.unwrap_or(AxisSampling::fixed(0.0)));
        Ok(Self { x, y, z, t })
    }
}

impl Scenario {
    /// Default field sampling: a 21 × 21 grid over the arms' bounding box
    /// (padded by 1) in the plane z = 0, at the middle of the run.
    pub fn default_sampling(&self) -> Sampling {
        let knots = self.interferometer.arm_a().knots().iter().chain(self.interferometer.arm_b().knots());
        let (mut lo, mut hi) = (Vec3::repeat(f64::INFINITY), Vec3::repeat(f64::NEG_INFINITY));
        for k in knots {
            lo = lo.inf(&k.pos);
            hi = hi.sup(&k.pos);
        }
        let (t0, t1) = self.interferometer.time_range();
        Sampling {
            x: AxisSampling { lo: lo.x - 1.0, hi: hi.x + 1.0, n: 21 },
            y: AxisSampling { lo: lo.y - 1.0, hi: hi.y + 1.0, n: 21 },
            z: AxisSampling::fixed(0.0),
            t: AxisSampling::fixed(0.5 * (t0 + t1)),
        }
    }

    /// CSV dump. Fields are sampled in the base gauge, `x` varying fastest;
    /// rows at events where the fields are undefined (solenoid axes) hold
    /// NaN. Meshes use `strategy` or the reference strategy.
    pub fn dump(&self, what: DumpKind, sampling: Option<&Sampling>, strategy: Option<&str>) -> Result<String> {
        match what {
            DumpKind::Fields => Ok(self.dump_fields(sampling.copied().unwrap_or_else(|| self.default_sampling()))),
            DumpKind::Mesh => {
                let name = strategy
                    .or_else(|| self.reference())
                    .ok_or_else(|| Error::InvalidArgument("scenario declares no strategy".into()))?;
                Ok(self.mesh(name)?.to_csv())
            }
            DumpKind::Worldlines => {
                let mut out = String::from("arm,x,y,z,t\n");
                for (label, arm) in [("a", self.interferometer.arm_a()), ("b", self.interferometer.arm_b())] {
                    for k in arm.knots() {
                        let _ = writeln!(out, "{label},{},{},{},{}", k.pos.x, k.pos.y, k.pos.z, k.t);
                    }
                }
                Ok(out)
            }
        }
    }

    fn dump_fields(&self, s: Sampling) -> String {
        let gauge = GaugeState::base();
        let mut out = String::from("x,y,z,t,Ex,Ey,Ez,Bx,By,Bz,A_abs,V\n");
        for t in s.t.values() {
            for z in s.z.values() {
                for y in s.y.values() {
                    for x in s.x.values() {
                        let ev = Event::new(x, y, z, t);
                        let row = match self.config.sample(&gauge, &ev) {
                            Ok(f) => [f.e.x, f.e.y, f.e.z, f.b.x, f.b.y, f.b.z, f.a.norm(), f.v],
                            Err(_) => [f64::NAN; 8],
                        };
                        let _ = write!(out, "{x},{y},{z},{t}");
                        for v in row {
                            let _ = write!(out, ",{v}");
                        }
                        out.push('\n');
                    }
                }
            }
        }
        out
    }
}
