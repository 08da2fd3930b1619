//! Run configuration: a JSON object whose fields may be overridden by flags.

use std::path::{Path, PathBuf};

use hermite_gabor::hermite::{GridCapacity, GridSpec};
use hermite_gabor::{covolume, KernelMethod, LatticeMatrix};
use serde::{Deserialize, Serialize};

/// Lattice point budget the validator checks against.
pub const POINT_BUDGET: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Hermite,
    Norm,
    Bounds,
    Certify,
    Scan,
    Glgrid,
    Covariance,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Hermite => "hermite",
            Command::Norm => "norm",
            Command::Bounds => "bounds",
            Command::Certify => "certify",
            Command::Scan => "scan",
            Command::Glgrid => "glgrid",
            Command::Covariance => "covariance",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Explicit time-frequency region `[-x, x] × [-xi, xi]` at `step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub x_half_width: f64,
    pub xi_half_width: f64,
    pub step: f64,
}

impl std::str::FromStr for RegionSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let v: Vec<f64> = s
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad region '{s}': {e}")))
            .collect::<Result<_, _>>()?;
        match v.as_slice() {
            [x, xi, step] => Ok(RegionSpec { x_half_width: *x, xi_half_width: *xi, step: *step }),
            _ => Err(format!("region '{s}' must be 'x_half_width,xi_half_width,step'")),
        }
    }
}

/// Every field is optional; absent fields take command defaults.
///
/// Integer fields are signed so that a negative value reaches the validator
/// as a diagnostic instead of a parse failure.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub window_degree: Option<i64>,
    pub matrix: Option<LatticeMatrix>,
    pub step: Option<f64>,
    pub half_width: Option<f64>,
    pub galerkin_dim: Option<i64>,
    pub truncation_radius: Option<f64>,
    pub region: Option<RegionSpec>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub kernel: Option<KernelMethod>,
    pub t_list: Option<Vec<f64>>,
    pub d_list: Option<Vec<i64>>,
    pub det_max: Option<f64>,
    pub steps: Option<i64>,
    pub dilation: Option<f64>,
    pub field_output: Option<PathBuf>,
    pub seed: Option<u64>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($field:ident),* $(,)?) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field.clone(); } )*
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }

    /// `top` wins wherever it sets a field.
    pub fn overlay(mut self, top: &RunConfig) -> RunConfig {
        overlay!(self, top; command, window_degree, matrix, step, half_width, galerkin_dim,
            truncation_radius, region, output, format, kernel, t_list, d_list, det_max, steps,
            dilation, field_output, seed);
        self
    }

    pub fn degree(&self) -> usize {
        self.window_degree.unwrap_or(0).max(0) as usize
    }

    pub fn galerkin(&self) -> usize {
        self.galerkin_dim.unwrap_or(hermite_gabor::frameop::DEFAULT_K as i64).max(1) as usize
    }

    pub fn degrees(&self) -> Vec<usize> {
        match &self.d_list {
            Some(list) => list.iter().map(|d| (*d).max(0) as usize).collect(),
            None => vec![self.degree()],
        }
    }

    pub fn t_values(&self) -> Vec<f64> {
        self.t_list.clone().unwrap_or_else(hermite_gabor::scan::default_t_list)
    }

    pub fn matrix_or_identity(&self) -> LatticeMatrix {
        self.matrix.unwrap_or_else(LatticeMatrix::identity)
    }

    /// Window grid: the default grid for the degree, with step and half-width overrides.
    pub fn grid(&self, degree: usize) -> hermite_gabor::Result<GridSpec> {
        let cap = GridCapacity::new(degree);
        let base = GridSpec::for_capacity(cap)?;
        if self.step.is_none() && self.half_width.is_none() {
            return Ok(base);
        }
        let grid = GridSpec::new(
            self.half_width.unwrap_or(base.half_width()),
            self.step.unwrap_or(base.step()),
            cap,
        )?;
        grid.check_support(degree, 1.0, 0.0)?;
        Ok(grid)
    }
}

/// Category of a validation finding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DiagnosticKind {
    Field,
    Capacity,
    Nyquist,
    Budget,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.kind {
            DiagnosticKind::Field => "field",
            DiagnosticKind::Capacity => "capacity",
            DiagnosticKind::Nyquist => "nyquist",
            DiagnosticKind::Budget => "budget",
        };
        write!(f, "{kind}: {}", self.message)
    }
}

/// Problems that would stop `config` from running; empty means runnable.
pub fn validate(config: &RunConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut field = |msg: String| out.push(Diagnostic { kind: DiagnosticKind::Field, message: msg });

    let positive = |v: Option<f64>| v.is_none_or(|x| x.is_finite() && x > 0.0);
    for (name, v) in [
        ("step", config.step),
        ("half_width", config.half_width),
        ("truncation_radius", config.truncation_radius),
        ("det_max", config.det_max),
        ("dilation", config.dilation),
    ] {
        if !positive(v) {
            field(format!("{name} must be positive, got {}", v.unwrap()));
        }
    }
    if let Some(d) = config.window_degree {
        if d < 0 {
            field(format!("window_degree must be nonnegative, got {d}"));
        }
    }
    if let Some(k) = config.galerkin_dim {
        if k <= 0 {
            field(format!("galerkin_dim must be positive, got {k}"));
        }
    }
    if let Some(s) = config.steps {
        if s <= 0 {
            field(format!("steps must be positive, got {s}"));
        }
    }
    if let Some(list) = &config.d_list {
        if list.is_empty() || list.iter().any(|d| *d < 0) {
            field("d_list must be a nonempty list of nonnegative degrees".into());
        }
    }
    if let Some(ts) = &config.t_list {
        if ts.is_empty() || ts.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            field("t_list must be a nonempty list of positive values".into());
        } else if ts.windows(2).any(|w| w[1] >= w[0]) {
            field("t_list must be strictly descending".into());
        }
    }
    if let Some(r) = &config.region {
        if !(positive(Some(r.x_half_width)) && positive(Some(r.xi_half_width)) && positive(Some(r.step))) {
            field("region half-widths and step must be positive".into());
        }
    }

    if let Some(cmd) = config.command {
        let needs_matrix = matches!(cmd, Command::Norm | Command::Bounds | Command::Certify | Command::Covariance);
        if needs_matrix && config.matrix.is_none() {
            field(format!("{} needs a matrix", cmd.name()));
        }
        if cmd == Command::Glgrid {
            if config.det_max.is_none() {
                field("glgrid needs det_max".into());
            }
            if config.steps.is_none() {
                field("glgrid needs steps".into());
            }
        }
        if cmd == Command::Covariance && config.dilation.is_none() {
            field("covariance needs dilation".into());
        }
    }

    let degrees_ok = config.window_degree.is_none_or(|d| d >= 0)
        && config.d_list.as_ref().is_none_or(|l| l.iter().all(|d| *d >= 0));
    let k_ok = config.galerkin_dim.is_none_or(|k| k > 0);
    // the checks below need sane inputs; other field problems do not hide them
    let sizes_ok = positive(config.step) && positive(config.half_width) && positive(config.truncation_radius);
    if !degrees_ok || !k_ok || !sizes_ok {
        return out;
    }

    let k = config.galerkin();
    for d in config.degrees() {
        if matches!(config.command, Some(Command::Bounds | Command::Scan | Command::Covariance) | None) && k <= d {
            out.push(Diagnostic {
                kind: DiagnosticKind::Field,
                message: format!("galerkin_dim {k} must exceed window degree {d}"),
            });
        }
        grid_diagnostics(config, d, &mut out);
    }
    budget_diagnostics(config, &mut out);
    out
}

fn grid_diagnostics(config: &RunConfig, d: usize, out: &mut Vec<Diagnostic>) {
    if config.step.is_none() && config.half_width.is_none() {
        return;
    }
    let cap = GridCapacity::new(d);
    let base = match GridSpec::for_capacity(cap) {
        Ok(g) => g,
        Err(e) => {
            out.push(Diagnostic { kind: DiagnosticKind::Capacity, message: e.to_string() });
            return;
        }
    };
    let step = config.step.unwrap_or(base.step());
    let half_width = config.half_width.unwrap_or(base.half_width());
    match GridSpec::new(half_width, step, cap) {
        Err(hermite_gabor::Error::Nyquist { available, required }) => out.push(Diagnostic {
            kind: DiagnosticKind::Nyquist,
            message: format!("step {step} resolves frequencies up to {available}, degree {d} needs {required:.4}"),
        }),
        Err(e) => out.push(Diagnostic { kind: DiagnosticKind::Field, message: e.to_string() }),
        Ok(g) => {
            if let Err(e) = g.check_support(d, 1.0, 0.0) {
                out.push(Diagnostic { kind: DiagnosticKind::Capacity, message: e.to_string() });
            }
        }
    }
}

fn budget_diagnostics(config: &RunConfig, out: &mut Vec<Diagnostic>) {
    let Some(cmd) = config.command else { return };
    let m = config.matrix_or_identity();
    let k = config.galerkin();
    let d_max = config.degrees().into_iter().max().unwrap_or(0);
    let radius = config
        .truncation_radius
        .unwrap_or_else(|| hermite_gabor::frameop::default_truncation_radius(k, d_max));
    let dets: Vec<f64> = match cmd {
        Command::Bounds | Command::Covariance => vec![covolume(&m)],
        Command::Scan => config.t_values().iter().map(|t| t * t * covolume(&m)).collect(),
        _ => return,
    };
    // the phase-space disc of radius r holds about r²/(2|det M|) lattice points
    for det in dets {
        let estimate = radius * radius / (2.0 * det);
        if estimate > POINT_BUDGET {
            out.push(Diagnostic {
                kind: DiagnosticKind::Budget,
                message: format!("about {estimate:.3e} lattice points at |det| = {det:.3e} exceed the budget {POINT_BUDGET:e}"),
            });
        }
    }
}
