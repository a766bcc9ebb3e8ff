//! Configuration-driven experiments producing a JSON report and CSV tables.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{debug, info};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::asymptotics::{
    adm_mass, default_radii, green_function_radial, log_spaced, mass_regular_term_check, GreenOptions,
    LebrunAleProfile, MassOptions,
};
use crate::bubble::{bubble_jet, energy_expansion_check, modified_max_bk, sobolev_quotient};
use crate::geometry::{Coordinate, GeometryKind, RadialGeometry};
use crate::pohozaev::{pohozaev_report, refinement_study, BallQuadrature, FlatEquation};
use crate::solver::transform::transform_identity_check;
use crate::solver::{
    classify_wall, continuation_in_p, multi_start_count, solve_bvp, transform_n_to_2, ContinuationOptions,
    KFamily, Problem, RadialSolution, ScanEvidence, ShotKind, SolveOutcome, SolverOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Curvature,
    Mass,
    Green,
    Solve,
    Continue,
    Count,
    Transform,
    Pohozaev,
    Energy,
    Classify,
    Sweep,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Curvature => "curvature",
            ExperimentKind::Mass => "mass",
            ExperimentKind::Green => "green",
            ExperimentKind::Solve => "solve",
            ExperimentKind::Continue => "continue",
            ExperimentKind::Count => "count",
            ExperimentKind::Transform => "transform",
            ExperimentKind::Pohozaev => "pohozaev",
            ExperimentKind::Energy => "energy",
            ExperimentKind::Classify => "classify",
            ExperimentKind::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub kind: GeometryKind,
    pub n_or_gamma: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinate: Option<Coordinate>,
}

impl GeometryConfig {
    pub fn build(&self) -> crate::Result<RadialGeometry> {
        let g = match self.kind {
            GeometryKind::LebrunAle => RadialGeometry::lebrun_ale(self.n_or_gamma)?,
            GeometryKind::LebrunCompact => RadialGeometry::lebrun_compact(self.n_or_gamma)?,
            GeometryKind::Football => RadialGeometry::football(self.n_or_gamma)?,
        };
        match self.coordinate {
            Some(c) => g.with_coordinate(c),
            None => Ok(g),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_grid: Option<Vec<f64>>,
    pub options: SolverOptions,
    pub continuation: ContinuationOptions,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            p: 3.0,
            p_grid: None,
            options: SolverOptions::default(),
            continuation: ContinuationOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurvatureConfig {
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    /// Relative finite-difference step of the numerical curvature.
    pub step: f64,
}

impl Default for CurvatureConfig {
    fn default() -> Self {
        Self {
            points: 50,
            lower: None,
            upper: None,
            step: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct MassConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    pub options: MassOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransformConfig {
    pub points: usize,
    pub identity_samples: usize,
    pub identity_points: usize,
}

impl Default for TransformConfig {
    fn default() -> Self {
        Self {
            points: 2001,
            identity_samples: 20,
            identity_points: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PohozaevConfig {
    pub radius: f64,
    pub points: usize,
    pub levels: usize,
}

impl Default for PohozaevConfig {
    fn default() -> Self {
        Self {
            radius: 1.0,
            points: 101,
            levels: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyConfig {
    pub lambdas: Vec<f64>,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        Self {
            lambdas: vec![20.0, 40.0, 80.0, 160.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// `a` in `K_a(s) = 1 + a·exp(-s²)`.
    BumpAmplitude,
    /// The exponent `p`, with the configured curvature.
    Exponent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRange {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<SweepRange>,
}

impl SweepConfig {
    pub fn parameter_values(&self) -> Vec<f64> {
        if let Some(v) = &self.values {
            return v.clone();
        }
        match self.range {
            Some(SweepRange { count: 0, .. }) | None => Vec::new(),
            Some(SweepRange { start, count: 1, .. }) => vec![start],
            Some(SweepRange { start, stop, count }) => (0..count)
                .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<OutputFormat>,
    /// Seed of the randomized identity checks.
    pub seed: u64,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: vec![OutputFormat::Json, OutputFormat::Csv],
            seed: 0,
        }
    }
}

fn default_k() -> KFamily {
    KFamily::Constant { value: 1.0 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub geometry: GeometryConfig,
    #[serde(default = "default_k")]
    pub k_family: KFamily,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub curvature: CurvatureConfig,
    #[serde(default)]
    pub mass: MassConfig,
    #[serde(default)]
    pub green: GreenOptions,
    #[serde(default)]
    pub transform: TransformConfig,
    #[serde(default)]
    pub pohozaev: PohozaevConfig,
    #[serde(default)]
    pub energy: EnergyConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl ExperimentError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) => 2,
            ExperimentError::Numeric(_) => 3,
            ExperimentError::Io(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentError::Config(_) => "config",
            ExperimentError::Numeric(_) => "numeric",
            ExperimentError::Io(_) => "io",
        }
    }

    /// Machine-readable form written on failure.
    pub fn to_json(&self, config_hash: Option<&str>) -> Value {
        json!({
            "status": "error",
            "kind": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
            "config_hash": config_hash,
        })
    }
}

fn numeric(e: crate::Error) -> ExperimentError {
    ExperimentError::Numeric(e.to_string())
}

fn config(e: crate::Error) -> ExperimentError {
    ExperimentError::Config(e.to_string())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        serde_json::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExperimentError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// SHA-256 of the canonical serialization (defaults filled in).
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("configs always serialize");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    /// Rejects combinations the experiments cannot run.
    pub fn validate(&self) -> Result<RadialGeometry, ExperimentError> {
        let geom = self.geometry.build().map_err(config)?;
        self.k_family.validate().map_err(config)?;
        let kind = geom.kind();
        let need = |ok: bool, what: &str| -> Result<(), ExperimentError> {
            if ok {
                Ok(())
            } else {
                Err(ExperimentError::Config(format!(
                    "experiment {} needs {what}",
                    self.experiment.name()
                )))
            }
        };
        let compact = kind == GeometryKind::LebrunCompact;
        let check_p = |p: f64| -> Result<(), ExperimentError> {
            if !(p > 1.0 && p <= 3.0) {
                return Err(ExperimentError::Config(format!("exponent {p} is outside (1, 3]")));
            }
            if kind == GeometryKind::LebrunAle && p != 3.0 {
                return Err(ExperimentError::Config("the ALE metric only supports p = 3".into()));
            }
            Ok(())
        };
        match self.experiment {
            ExperimentKind::Curvature => need(self.curvature.points >= 1, "at least one sample point")?,
            ExperimentKind::Mass => need(geom.is_lebrun(), "a LeBrun geometry")?,
            ExperimentKind::Green => need(compact, "the compactified LeBrun geometry")?,
            ExperimentKind::Energy => {
                need(compact, "the compactified LeBrun geometry")?;
                need(self.energy.lambdas.len() >= 4, "at least four concentration values")?;
            }
            ExperimentKind::Pohozaev => {
                need(compact, "the compactified LeBrun geometry")?;
                check_p(self.solver.p)?;
                need(self.pohozaev.radius > 0.0, "a positive radius")?;
                need(self.pohozaev.points >= 3 && self.pohozaev.levels >= 2, "points >= 3 and levels >= 2")?;
            }
            ExperimentKind::Transform => {
                need(geom.is_lebrun(), "a LeBrun geometry")?;
                need(self.solver.p == 3.0, "p = 3")?;
            }
            ExperimentKind::Classify => need(geom.is_lebrun(), "a LeBrun geometry")?,
            ExperimentKind::Solve | ExperimentKind::Count => check_p(self.solver.p)?,
            ExperimentKind::Continue => {
                let grid = self
                    .solver
                    .p_grid
                    .as_ref()
                    .ok_or_else(|| ExperimentError::Config("experiment continue needs solver.p_grid".into()))?;
                need(!grid.is_empty(), "a non-empty p_grid")?;
                need(grid.windows(2).all(|w| w[1] > w[0]), "an increasing p_grid")?;
                grid.iter().try_for_each(|&p| check_p(p))?;
            }
            ExperimentKind::Sweep => {
                let sweep = self
                    .sweep
                    .as_ref()
                    .ok_or_else(|| ExperimentError::Config("experiment sweep needs a sweep section".into()))?;
                need(geom.is_lebrun(), "a LeBrun geometry")?;
                need(
                    sweep.values.is_some() != sweep.range.is_some(),
                    "exactly one of sweep.values and sweep.range",
                )?;
                match sweep.parameter {
                    SweepParameter::BumpAmplitude => check_p(self.solver.p)?,
                    SweepParameter::Exponent => sweep.parameter_values().iter().try_for_each(|&p| check_p(p))?,
                }
            }
        }
        Ok(geom)
    }
}

/// A CSV table with pre-formatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, ExperimentError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let io = |e: csv::Error| ExperimentError::Io(std::io::Error::other(e));
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| ExperimentError::Io(std::io::Error::other(e.to_string())))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Shortest round-trip decimal; empty for missing values.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub experiment: ExperimentKind,
    pub results: Value,
    pub tables: Vec<Table>,
    /// Recoverable failures (sweep rows, continuation steps); any entry makes the run unsuccessful.
    pub failures: Vec<String>,
}

impl RunOutput {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            0
        } else {
            3
        }
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("results always serialize")
}

/// Validates and runs the configured experiment.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput, ExperimentError> {
    let geom = cfg.validate()?;
    info!("running {} on {:?}", cfg.experiment.name(), geom);
    let mut out = RunOutput {
        experiment: cfg.experiment,
        results: Value::Null,
        tables: Vec::new(),
        failures: Vec::new(),
    };
    match cfg.experiment {
        ExperimentKind::Curvature => run_curvature(cfg, &geom, &mut out)?,
        ExperimentKind::Mass => run_mass(cfg, &geom, &mut out)?,
        ExperimentKind::Green => run_green(cfg, &geom, &mut out)?,
        ExperimentKind::Solve => run_solve(cfg, &geom, &mut out)?,
        ExperimentKind::Continue => run_continue(cfg, &geom, &mut out)?,
        ExperimentKind::Count => run_count(cfg, &geom, &mut out)?,
        ExperimentKind::Transform => run_transform(cfg, &geom, &mut out)?,
        ExperimentKind::Pohozaev => run_pohozaev(cfg, &geom, &mut out)?,
        ExperimentKind::Energy => run_energy(cfg, &geom, &mut out)?,
        ExperimentKind::Classify => run_classify(cfg, &geom, &mut out)?,
        ExperimentKind::Sweep => run_sweep(cfg, &geom, &mut out)?,
    }
    Ok(out)
}

fn default_curvature_range(geom: &RadialGeometry) -> (f64, f64) {
    match geom.coordinate() {
        Coordinate::HatR => (0.1, 50.0),
        Coordinate::S => (0.02, 10.0),
        Coordinate::T => (0.01, 10.0),
        Coordinate::Theta => (0.1, std::f64::consts::PI - 0.1),
    }
}

fn run_curvature(cfg: &ExperimentConfig, geom: &RadialGeometry, out: &mut RunOutput) -> Result<(), ExperimentError> {
    let c = cfg.curvature;
    let (dlo, dhi) = default_curvature_range(geom);
    let (lo, hi) = (c.lower.unwrap_or(dlo), c.upper.unwrap_or(dhi));
    let xs = if geom.coordinate() == Coordinate::Theta || c.points == 1 {
        (0..c.points)
            .map(|i| lo + (hi - lo) * i as f64 / (c.points.max(2) - 1) as f64)
            .collect::<Vec<_>>()
    } else {
        log_spaced(lo, hi, c.points)
    };
    let mut table = Table::new("curvature", &["x", "closed_form", "numeric", "difference"]);
    let (mut max_abs, mut max_rel, mut max_closed): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for &x in &xs {
        let closed = geom.scalar_curvature(x).map_err(numeric)?;
        let num = geom.numeric_scalar_curvature(x, c.step).map_err(numeric)?;
        let d = num - closed;
        max_abs = max_abs.max(d.abs());
        max_closed = max_closed.max(closed.abs());
        if closed != 0.0 {
            max_rel = max_rel.max((d / closed).abs());
        }
        table.push(vec![fmt_f64(x), fmt_f64(closed), fmt_f64(num), fmt_f64(d)]);
    }
    out.results = json!({
        "coordinate": geom.coordinate().to_string(),
        "points": xs.len(),
        "lower": lo,
        "upper": hi,
        "max_abs_difference": max_abs,
        "max_relative_difference": max_rel,
        "max_abs_closed_form": max_closed,
    });
    out.tables.push(table);
    Ok(())
}

fn run_mass(cfg: &ExperimentConfig, geom: &RadialGeometry, out: &mut RunOutput) -> Result<(), ExperimentError> {
    let radii = cfg.mass.radii.clone().unwrap_or_else(default_radii);
    let n = geom.order() as f64;
    let expected = -2.0 * (n - 2.0);
    let mut table = Table::new("mass", &["r", "flux", "residual"]);
    let (estimate, extra) = if geom.kind() == GeometryKind::LebrunAle {
        let profile = LebrunAleProfile::new(*geom).map_err(numeric)?;
        (adm_mass(&profile, &radii, &cfg.mass.options).map_err(numeric)?, Value::Null)
    } else {
        let g = RadialGeometry::lebrun_compact(geom.order()).map_err(numeric)?;
        let check = mass_regular_term_check(&g, &radii, &cfg.green, &cfg.mass.options).map_err(numeric)?;
        let extra = json!({
            "route": "conformal_blowup",
            "implied_regular_term": check.implied_regular_term,
            "expected_regular_term": expected / 12.0,
            "regular_term_s": check.regular_term_s,
        });
        (check.mass, extra)
    };
    for ((r, m), res) in estimate.radii.iter().zip(&estimate.flux).zip(estimate.residuals()) {
        table.push(vec![fmt_f64(*r), fmt_f64(*m), fmt_f64(res)]);
    }
    let error = estimate.extrapolated - expected;
    out.results = json!({
        "estimate": to_value(&estimate),
        "expected": expected,
        "error": error,
        "relative_error": if expected != 0.0 { (error / expected).abs() } else { f64::NAN },
        "blowup": extra,
    });
    if !estimate.accepted {
        out.failures.push(format!("mass fit residual {} above tolerance", estimate.fit_residual));
    }
    out.tables.push(table);
    Ok(())
}

fn run_green(cfg: &ExperimentConfig, geom: &RadialGeometry, out: &mut RunOutput) -> Result<(), ExperimentError> {
    let g = RadialGeometry::lebrun_compact(geom.order()).map_err(numeric)?;
    let green = green_function_radial(&g, &cfg.green).map_err(numeric)?;
    let n = g.order() as f64;
    let mut table = Table::new("green", &["s", "psi", "exact", "relative_error"]);
    let mut worst: f64 = 0.0;
    for s in log_spaced(0.01, 100.0, 201) {
        let psi = green.psi(s).map_err(numeric)?;
        let exact = s.powi(-2) + n;
        let rel = (psi - exact).abs() / exact;
        worst = worst.max(rel);
        table.push(vec![fmt_f64(s), fmt_f64(psi), fmt_f64(exact), fmt_f64(rel)]);
    }
    out.results = json!({
        "order": green.order,
        "leading_coefficient": green.leading_coefficient,
        "regular_term_s": green.regular_term_s,
        "log_term_indicator": green.log_term_indicator,
        "max_relative_error": worst,
    });
    out.tables.push(table);
    Ok(())
}

fn solution_table(sol: &RadialSolution) -> Table {
    let g = sol.geometry;
    let mut table = Table::new("solution", &["coordinate", "t", "s", "u", "v", "residual"]);
    let n = g.order() as f64;
    for k in 0..sol.grid.len() {
        let x = sol.grid[k];
        let (t, s) = match g.coordinate() {
            Coordinate::T => (x, (x.exp_m1() / n).sqrt()),
            _ => (f64::NAN, f64::NAN),
        };
        table.push(vec![
            fmt_f64(x),
            fmt_f64(t),
            fmt_f64(s),
            fmt_f64(sol.u_values[k]),
            fmt_f64(sol.v_values[k]),
            fmt_f64(sol.residuals[k]),
        ]);
    }
    table
}

fn scan_table(ev: &ScanEvidence) -> Table {
    let mut table = Table::new(
        "scan",
        &["slope", "kind", "objective", "terminal_x", "terminal_value", "terminal_derivative", "crossing"],
    );
    for s in &ev.shots {
        table.push(vec![
            fmt_f64(s.slope),
            to_value(&s.kind).as_str().unwrap_or_default().to_string(),
            fmt_f64(s.objective),
            fmt_f64(s.terminal_x),
            fmt_f64(s.terminal_value),
            fmt_f64(s.terminal_derivative),
            fmt_opt(s.crossing),
        ]);
    }
    table
}

fn evidence_summary(ev: &ScanEvidence) -> Value {
    json!({
        "shots": ev.shots.len(),
        "brackets": ev.brackets.len(),
        "zero_crossing": ev.count(ShotKind::ZeroCrossing),
        "divergent": ev.count(ShotKind::Divergent),
        "near_regular": ev.count(ShotKind::NearRegular),
        "failures": ev.failures.len(),
    })
}

fn wall_value(cfg: &ExperimentConfig, geom: &RadialGeometry) -> Value {
    if geom.is_lebrun() {
        to_value(&classify_wall(&cfg.k_family, geom.order()))
    } else {
        Value::Null
    }
}

fn solve_once(cfg: &ExperimentConfig, geom: &RadialGeometry) -> Result<SolveOutcome, ExperimentError> {
    solve_bvp(geom, &cfg.k_family, cfg.solver.p, &cfg.solver.options).map_err(numeric)
}

fn run_solve(cfg: &ExperimentConfig, geom: &RadialGeometry, out: &mut RunOutput) -> Result<(), ExperimentError> {
    match solve_once(cfg, geom)? {
        SolveOutcome::Found(sol) => {
            out.results = json!({
                "found": true,
                "accepted": sol.accepted(),
                "solution": to_value(&sol.summary()),
                "wall": wall_value(cfg, geom),
            });
            out.tables.push(solution_table(&sol));
        }
        SolveOutcome::NotFound(ev) => {
            out.results = json!({
                "found": false,
                "evidence": evidence_summary(&ev),
                "wall": wall_value(cfg, geom),
            });
            out.tables.push(scan_table(&ev));
        }
    }
    Ok(())
}

fn run_continue(cfg: &ExperimentConfig, geom: &RadialGeometry, out: &mut RunOutput) -> Result<(), ExperimentError> {
    let grid = cfg.solver.p_grid.clone().unwrap_or_default();
    let c = continuation_in_p(geom, &cfg.k_family, &grid, &cfg.solver.options, &cfg.solver.continuation)
        .map_err(numeric)?;
    let mut table = Table::new(
        "continuation",
        &["p", "slope", "max_u", "argmax", "min_u", "residual_sup", "error"],
    );
    for s in &c.report.steps {
        match &s.solution {
            Some(sol) => table.push(vec![
                fmt_f64(s.p),
                fmt_f64(sol.slope),
                fmt_f64(sol.max_u),
                fmt_f64(sol.argmax),
                fmt_f64(sol.min_u),
                fmt_f64(sol.residual_sup),
                String::new(),
            ]),
            None => {
                let msg = s.error.clone().unwrap_or_default();
                out.failures.push(format!("p = {}: {msg}", s.p));
                table.push(vec![
                    fmt_f64(s.p),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    msg,
                ]);
            }
        }
    }
    out.results = json!({ "report": to_value(&c.report), "wall": wall_value(cfg, geom) });
    out.tables.push(table);
    Ok(())
}

fn run_count(cfg: &ExperimentConfig, geom: &RadialGeometry, out: &mut RunOutput) -> Result<(), ExperimentError> {
    let problem = Problem::new(geom, &cfg.k_family, cfg.solver.p).map_err(config)?;
    let count = multi_start_count(&problem, &cfg.solver.options.slope_grid(), &cfg.solver.options)
        .map_err(numeric)?;
    out.results = json!({
        "count": count.count,
        "rejected": count.rejected,
        "evidence": evidence_summary(&count.evidence),
        "solutions": count.solutions.iter().map(|s| to_value(&s.summary())).collect::<Vec<_>>(),
        "wall": wall_value(cfg, geom),
    });
    out.tables.push(scan_table(&count.evidence));
    Ok(())
}

fn run_transform(cfg: &ExperimentConfig, geom: &RadialGeometry, out: &mut RunOutput) -> Result<(), ExperimentError> {
    let n = geom.order();
    let identity = transform_identity_check(n, cfg.output.seed, cfg.transform.identity_samples, cfg.transform.identity_points)
        .map_err(numeric)?;
    let solved = match solve_once(cfg, geom)? {
        SolveOutcome::Found(sol) => {
            let tr = transform_n_to_2(&sol, &cfg.k_family, n, cfg.transform.points).map_err(numeric)?;
            let mut table = Table::new("transform", &["t", "s2", "v2", "k2"]);
            for i in 0..tr.t.len() {
                table.push(vec![
                    fmt_f64(tr.t[i]),
                    fmt_f64(tr.v2_samples[i].0),
                    fmt_f64(tr.v2_samples[i].1),
                    fmt_f64(tr.k2_samples[i]),
                ]);
            }
            out.tables.push(table);
            json!({
                "found": true,
                "solution_residual_sup": sol.residual_sup,
                "residual_n_sup": tr.residual_n_sup,
                "residual_2_sup": tr.residual_2_sup,
                "residual_ratio": tr.residual_2_sup / tr.residual_n_sup,
                "max_residual_difference": tr.max_residual_difference,
            })
        }
        SolveOutcome::NotFound(ev) => {
            out.failures.push("no solution on O(-n) to transform".into());
            json!({ "found": false, "evidence": evidence_summary(&ev) })
        }
    };
    out.results = json!({ "identity": to_value(&identity), "solution": solved });
    Ok(())
}

fn run_pohozaev(cfg: &ExperimentConfig, geom: &RadialGeometry, out: &mut RunOutput) -> Result<(), ExperimentError> {
    // exact bubble on the flat cone first
    let eq = FlatEquation {
        potential: 0.0,
        curvature: 8.0,
        p: 3.0,
    };
    let bubble = |r: f64| bubble_jet(8.0, r);
    let mut worst: f64 = 0.0;
    for r in log_spaced(0.1, 5.0, 10) {
        let rep = pohozaev_report(&eq, &bubble, r, geom.gamma_order(), BallQuadrature::Adaptive { tol: 1e-12 })
            .map_err(numeric)?;
        worst = worst.max(rep.relative_residual());
    }
    let pc = cfg.pohozaev;
    let solved = match solve_once(cfg, geom)? {
        SolveOutcome::Found(sol) => {
            let study = refinement_study(&sol, pc.radius, pc.points, pc.levels).map_err(numeric)?;
            let mut table = Table::new(
                "pohozaev",
                &[
                    "points",
                    "boundary_p",
                    "coefficient_deviation",
                    "potential_volume",
                    "potential_boundary",
                    "curvature_gradient",
                    "exponent_deficit",
                    "curvature_boundary",
                    "residual",
                    "scale",
                ],
            );
            for (m, rep) in study.points.iter().zip(&study.reports) {
                let mut row = vec![m.to_string(), fmt_f64(rep.boundary_p)];
                row.extend(rep.terms.as_array().iter().map(|v| fmt_f64(*v)));
                row.push(fmt_f64(rep.residual));
                row.push(fmt_f64(rep.scale));
                table.push(row);
            }
            out.tables.push(table);
            to_value(&study)
        }
        SolveOutcome::NotFound(ev) => {
            out.failures.push("no solution for the Pohozaev check".into());
            json!({ "found": false, "evidence": evidence_summary(&ev) })
        }
    };
    out.results = json!({ "bubble_max_relative_residual": worst, "solution": solved });
    Ok(())
}

fn run_energy(cfg: &ExperimentConfig, geom: &RadialGeometry, out: &mut RunOutput) -> Result<(), ExperimentError> {
    let rep = energy_expansion_check(geom, &cfg.k_family, &cfg.energy.lambdas).map_err(numeric)?;
    let mut table = Table::new("energy", &["lambda", "J", "fitted"]);
    for (l, j) in rep.lambdas.iter().zip(&rep.energies) {
        let fitted = rep.fit.limit + rep.fit.coefficient / (l * l);
        table.push(vec![fmt_f64(*l), fmt_f64(*j), fmt_f64(fitted)]);
    }
    let q = sobolev_quotient(4).map_err(numeric)?;
    out.results = json!({
        "expansion": to_value(&rep),
        "sobolev_quotient": q,
        "modified_maximum": modified_max_bk(&cfg.k_family, geom),
        "wall": wall_value(cfg, geom),
    });
    out.tables.push(table);
    Ok(())
}

fn run_classify(cfg: &ExperimentConfig, geom: &RadialGeometry, out: &mut RunOutput) -> Result<(), ExperimentError> {
    let w = classify_wall(&cfg.k_family, geom.order());
    let mut table = Table::new("classify", &["label", "margin"]);
    table.push(vec![
        to_value(&w.label).as_str().unwrap_or_default().to_string(),
        fmt_f64(w.margin),
    ]);
    out.results = to_value(&w);
    out.tables.push(table);
    Ok(())
}

struct SweepRow {
    value: f64,
    cells: Vec<String>,
    error: Option<String>,
}

fn sweep_row(cfg: &ExperimentConfig, geom: &RadialGeometry, parameter: SweepParameter, value: f64) -> SweepRow {
    let attempt = || -> crate::Result<Vec<String>> {
        let (k, p) = match parameter {
            SweepParameter::BumpAmplitude => (KFamily::bump(value)?, cfg.solver.p),
            SweepParameter::Exponent => (cfg.k_family.clone(), value),
        };
        let wall = classify_wall(&k, geom.order());
        let problem = Problem::new(geom, &k, p)?;
        let count = multi_start_count(&problem, &cfg.solver.options.slope_grid(), &cfg.solver.options)?;
        let best = count.solutions.first();
        Ok(vec![
            fmt_f64(wall.margin),
            to_value(&wall.label).as_str().unwrap_or_default().to_string(),
            count.count.to_string(),
            fmt_opt(best.map(|s| s.max_u)),
            fmt_opt(best.map(|s| s.residual_sup)),
            count.evidence.brackets.len().to_string(),
        ])
    };
    match attempt() {
        Ok(cells) => SweepRow {
            value,
            cells,
            error: None,
        },
        Err(e) => SweepRow {
            value,
            cells: vec![String::new(); 6],
            error: Some(e.to_string()),
        },
    }
}

fn run_sweep(cfg: &ExperimentConfig, geom: &RadialGeometry, out: &mut RunOutput) -> Result<(), ExperimentError> {
    let sweep = cfg.sweep.as_ref().expect("validated");
    let values = sweep.parameter_values();
    debug!("sweeping {} values", values.len());
    let rows: Vec<SweepRow> = values
        .par_iter()
        .map(|&v| sweep_row(cfg, geom, sweep.parameter, v))
        .collect();
    let mut table = Table::new(
        "sweep",
        &["parameter", "margin", "label", "count", "max_u", "residual_sup", "brackets", "error"],
    );
    for row in &rows {
        let mut cells = vec![fmt_f64(row.value)];
        cells.extend(row.cells.iter().cloned());
        cells.push(row.error.clone().unwrap_or_default());
        if let Some(e) = &row.error {
            out.failures.push(format!("parameter {}: {e}", row.value));
        }
        table.push(cells);
    }
    out.results = json!({
        "parameter": to_value(&sweep.parameter),
        "rows": rows.len(),
        "failed_rows": rows.iter().filter(|r| r.error.is_some()).count(),
    });
    out.tables.push(table);
    Ok(())
}

/// Full JSON report: inputs, results, failures and timing.
pub fn report_json(cfg: &ExperimentConfig, out: &RunOutput, seconds: f64) -> Value {
    json!({
        "status": if out.failures.is_empty() { "ok" } else { "partial_failure" },
        "experiment": out.experiment.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "config_hash": cfg.hash(),
        "config": to_value(cfg),
        "results": out.results,
        "failures": out.failures,
        "exit_code": out.exit_code(),
        "timings": { "seconds": seconds },
    })
}

/// Writes `report.json` and one CSV per table into `dir`, as configured.
pub fn write_outputs(dir: &Path, cfg: &ExperimentConfig, out: &RunOutput, seconds: f64) -> Result<Vec<PathBuf>, ExperimentError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if cfg.output.formats.contains(&OutputFormat::Json) {
        let path = dir.join("report.json");
        let mut text = serde_json::to_string_pretty(&report_json(cfg, out, seconds)).expect("report serializes");
        text.push('\n');
        std::fs::write(&path, text)?;
        written.push(path);
    }
    if cfg.output.formats.contains(&OutputFormat::Csv) {
        for t in &out.tables {
            let path = dir.join(format!("{}.csv", t.name));
            std::fs::write(&path, t.to_csv()?)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Runs and writes outputs, timing the run. Failures are also written as `error.json`.
pub fn execute(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutput, ExperimentError> {
    let start = Instant::now();
    let result = run(cfg);
    match result {
        Ok(out) => {
            write_outputs(dir, cfg, &out, start.elapsed().as_secs_f64())?;
            Ok(out)
        }
        Err(e) => {
            write_error(dir, &e, Some(&cfg.hash()));
            Err(e)
        }
    }
}

/// Best-effort `error.json`; the caller reports the error either way.
pub fn write_error(dir: &Path, e: &ExperimentError, hash: Option<&str>) {
    if std::fs::create_dir_all(dir).is_ok() {
        let text = serde_json::to_string_pretty(&e.to_json(hash)).expect("error serializes");
        let _ = std::fs::write(dir.join("error.json"), text + "\n");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(text).unwrap()
    }

    #[test]
    fn defaults_fill_in() {
        let c = parse(r#"{"experiment": "classify", "geometry": {"kind": "lebrun_compact", "n_or_gamma": 3}}"#);
        assert_eq!(c.k_family, KFamily::Constant { value: 1.0 });
        assert_eq!(c.solver.p, 3.0);
        let out = run(&c).unwrap();
        assert_eq!(out.results["label"], "Minus");
        assert_eq!(out.results["margin"], -1.0);
    }

    #[test]
    fn rejects_inconsistent_configs() {
        let bad = [
            r#"{"experiment": "transform", "geometry": {"kind": "football", "n_or_gamma": 2}}"#,
            r#"{"experiment": "green", "geometry": {"kind": "lebrun_ale", "n_or_gamma": 2}}"#,
            r#"{"experiment": "continue", "geometry": {"kind": "lebrun_compact", "n_or_gamma": 2}}"#,
            r#"{"experiment": "solve", "geometry": {"kind": "lebrun_ale", "n_or_gamma": 2}, "solver": {"p": 2.0}}"#,
            r#"{"experiment": "sweep", "geometry": {"kind": "lebrun_compact", "n_or_gamma": 2}}"#,
        ];
        for b in bad {
            let e = run(&parse(b)).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{b}: {e}");
        }
        let e = ExperimentConfig::from_json(r#"{"experiment": "mass", "geometry": {}}"#).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let e = ExperimentConfig::from_json(r#"{"experiment": "mass", "geometry": {"kind": "lebrun_ale", "n_or_gamma": 2}, "typo": 1}"#)
            .unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = parse(r#"{"experiment": "classify", "geometry": {"kind": "lebrun_compact", "n_or_gamma": 3}}"#);
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.geometry.n_or_gamma = 4;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn empty_sweep_is_header_only() {
        let c = parse(
            r#"{"experiment": "sweep", "geometry": {"kind": "lebrun_compact", "n_or_gamma": 3},
                "sweep": {"parameter": "bump_amplitude", "values": []}}"#,
        );
        let out = run(&c).unwrap();
        assert_eq!(out.exit_code(), 0);
        assert_eq!(
            out.tables[0].to_csv().unwrap(),
            "parameter,margin,label,count,max_u,residual_sup,brackets,error\n"
        );
    }

    #[test]
    fn float_formatting_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.0, 1e-300, 12345.678] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(f64::NAN), "");
    }
}
