//! Pipeline dispatch, artifact rendering and atomic persistence.

use std::io::Write;
use std::path::{Path, PathBuf};

use hermite_gabor::certify::{ambiguity, certificate, certificate_on_region, certificate_region, certificate_step};
use hermite_gabor::hermite::hermite_operator_residual;
use hermite_gabor::scan::{self, SqrtLawRow};
use hermite_gabor::{box_norm, frameop, hermite_window, GaborSystemSpec, Region, VectorWindow};
use serde::{Deserialize, Serialize};

use crate::config::{validate, Command, Diagnostic, DiagnosticKind, Format, RunConfig};

/// The only environment variable read: default directory for artifacts.
pub const OUTPUT_DIR_VAR: &str = "OUTPUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Precondition(String),
    #[error("{0}")]
    Resource(String),
    #[error("invalid configuration:\n{}", render_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 2 for precondition and IO failures, 3 for budget and convergence failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Resource(_) => 3,
            CliError::Invalid(diags) if diags.iter().all(|d| d.kind == DiagnosticKind::Budget) => 3,
            _ => 2,
        }
    }
}

impl From<hermite_gabor::Error> for CliError {
    fn from(e: hermite_gabor::Error) -> Self {
        if e.is_resource() {
            CliError::Resource(e.to_string())
        } else {
            CliError::Precondition(e.to_string())
        }
    }
}

fn render_diagnostics(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n")
}

/// Rendered output of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub text: String,
    pub extension: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub artifact: Artifact,
    pub summary: String,
}

/// Covariance report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub d: usize,
    pub b: f64,
    #[serde(rename = "K")]
    pub galerkin_dim: usize,
    pub deviation: f64,
}

/// Hermite basis report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermiteReport {
    pub d: usize,
    pub half_width: f64,
    pub step: f64,
    pub count: usize,
    pub orthonormality_defect: f64,
    pub operator_residual: Vec<f64>,
}

fn default_format(cmd: Command) -> Format {
    match cmd {
        Command::Hermite | Command::Scan | Command::Glgrid => Format::Csv,
        _ => Format::Json,
    }
}

fn json<T: Serialize>(value: &T) -> Result<Artifact, CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Precondition(e.to_string()))?;
    text.push('\n');
    Ok(Artifact { text, extension: "json" })
}

fn csv(write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<Artifact, CliError> {
    let mut buf = Vec::new();
    write(&mut buf).map_err(|e| CliError::Precondition(e.to_string()))?;
    Ok(Artifact { text: String::from_utf8(buf).expect("csv writers emit ascii"), extension: "csv" })
}

fn window(config: &RunConfig) -> Result<VectorWindow, CliError> {
    let d = config.degree();
    Ok(hermite_window(d, config.grid(d)?)?)
}

fn system(config: &RunConfig) -> Result<GaborSystemSpec, CliError> {
    let mut spec = GaborSystemSpec::new(window(config)?, config.matrix_or_identity(), config.galerkin())?;
    if let Some(r) = config.truncation_radius {
        spec = spec.with_radius(r)?;
    }
    if let Some(k) = config.kernel {
        spec = spec.with_kernel(k);
    }
    Ok(spec)
}

fn region(config: &RunConfig) -> Result<Option<Region>, CliError> {
    config
        .region
        .map(|r| Region::symmetric(r.x_half_width, r.xi_half_width, r.step).map_err(CliError::from))
        .transpose()
}

fn require_single_format(cmd: Command, format: Format, allowed: Format) -> Result<(), CliError> {
    if format != allowed {
        return Err(CliError::Precondition(format!("{} only emits {:?}", cmd.name(), allowed).to_lowercase()));
    }
    Ok(())
}

/// Validates `config` and runs its command; nothing is written here.
pub fn execute(config: &RunConfig) -> Result<Outcome, CliError> {
    let cmd = config
        .command
        .ok_or_else(|| CliError::Precondition("no command given (set \"command\" in the config)".into()))?;
    let diags = validate(config);
    if !diags.is_empty() {
        return Err(CliError::Invalid(diags));
    }
    let format = config.format.unwrap_or_else(|| default_format(cmd));

    match cmd {
        Command::Norm => {
            let m = config.matrix_or_identity();
            let value = box_norm(&m);
            let summary = format!("box norm of {m} is {value}");
            // without an explicit format the bare number is printed
            let artifact = match config.format {
                None => Artifact { text: format!("{value}\n"), extension: "txt" },
                Some(Format::Json) => json(&serde_json::json!({ "matrix": m, "box_norm": value }))?,
                Some(Format::Csv) => Artifact { text: format!("box_norm\n{value:.16e}\n"), extension: "csv" },
            };
            Ok(Outcome { artifact, summary })
        }
        Command::Hermite => {
            let d = config.degree();
            let w = window(config)?;
            let grid = *w.grid();
            let artifact = match format {
                Format::Csv => csv(|out| {
                    write!(out, "x")?;
                    for n in 0..=d {
                        write!(out, ",h{n}")?;
                    }
                    writeln!(out)?;
                    for (j, x) in grid.points().enumerate() {
                        write!(out, "{x:.16e}")?;
                        for comp in w.samples() {
                            write!(out, ",{:.16e}", comp[j].re)?;
                        }
                        writeln!(out)?;
                    }
                    Ok(())
                })?,
                Format::Json => json(&HermiteReport {
                    d,
                    half_width: grid.half_width(),
                    step: grid.step(),
                    count: grid.count(),
                    orthonormality_defect: w.orthonormality_defect(),
                    operator_residual: (0..=d).map(|n| hermite_operator_residual(n, &grid)).collect(),
                })?,
            };
            let summary = format!(
                "h_0..h_{d} on {} points, step {}, orthonormality defect {:.3e}",
                grid.count(),
                grid.step(),
                w.orthonormality_defect()
            );
            Ok(Outcome { artifact, summary })
        }
        Command::Bounds => {
            require_single_format(cmd, format, Format::Json)?;
            let spec = system(config)?;
            let fb = frameop::frame_bounds(&spec)?;
            let summary = format!(
                "A_est {:.6} B_est {:.6} B/A {:.6} K {} converged {}",
                fb.a_est,
                fb.b_est,
                fb.tightness(),
                fb.galerkin_dim,
                fb.converged
            );
            Ok(Outcome { artifact: json(&fb)?, summary })
        }
        Command::Certify => {
            require_single_format(cmd, format, Format::Json)?;
            let w = window(config)?;
            let m = config.matrix_or_identity();
            let chosen = region(config)?;
            let cert = match chosen {
                Some(r) => certificate_on_region(&w, &m, r)?,
                None => certificate(&w, &m)?,
            };
            if let Some(path) = &config.field_output {
                let r = match chosen {
                    Some(r) => r,
                    None => certificate_region(&w, certificate_step(box_norm(&m)))?,
                };
                write_field(&ambiguity(&w, r)?.field, path)?;
            }
            let summary = format!(
                "R {:.6} valid {} A_cert {:.6} B_cert {:.6} eps_disc {:.3e}",
                cert.ratio, cert.valid, cert.a_cert, cert.b_cert, cert.eps_disc
            );
            Ok(Outcome { artifact: json(&cert)?, summary })
        }
        Command::Scan => {
            let m0 = config.matrix_or_identity();
            let rows: Vec<SqrtLawRow> = scan::sqrt_law_probe(&config.degrees(), &m0, &config.t_values(), config.galerkin())?;
            let summary = rows
                .iter()
                .map(|row| match row.c_emp {
                    Some(c) => format!("d={} C_emp={c:.6}", row.d),
                    None => format!("d={} C_emp=NaN", row.d),
                })
                .collect::<Vec<_>>()
                .join(" ");
            let artifact = match format {
                Format::Csv => {
                    let records: Vec<_> = rows.iter().flat_map(|r| r.records.iter().copied()).collect();
                    csv(|out| scan::write_scan_csv(&records, out))?
                }
                Format::Json => json(&rows)?,
            };
            Ok(Outcome { artifact, summary })
        }
        Command::Glgrid => {
            let d = config.degree();
            let det_max = config.det_max.expect("validated");
            let steps = config.steps.expect("validated") as usize;
            let rows = scan::gl_grid(d, det_max, steps)?;
            let guaranteed = rows.iter().filter(|r| r.frame_guaranteed).count();
            let summary = format!("{guaranteed} of {} determinants below 1/(d+1) = {:.6}", rows.len(), 1.0 / (d + 1) as f64);
            let artifact = match format {
                Format::Csv => csv(|out| scan::write_gl_csv(&rows, out))?,
                Format::Json => json(&rows)?,
            };
            Ok(Outcome { artifact, summary })
        }
        Command::Covariance => {
            require_single_format(cmd, format, Format::Json)?;
            let d = config.degree();
            let b = config.dilation.expect("validated");
            let k = config.galerkin();
            let deviation = scan::dilation_covariance_check(d, &config.matrix_or_identity(), b, k)?;
            let report = CovarianceReport { d, b, galerkin_dim: k, deviation };
            Ok(Outcome { artifact: json(&report)?, summary: format!("relative bound deviation {deviation:.3e} at b = {b}") })
        }
    }
}

fn write_field(field: &hermite_gabor::SampledField, path: &Path) -> Result<(), CliError> {
    let binary = path.extension().is_some_and(|e| e == "bin");
    write_atomic(path, |file| if binary { field.write_binary(file) } else { field.write_csv(file) })
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut std::fs::File) -> std::io::Result<()>) -> Result<(), CliError> {
    let io = |source| CliError::Io { path: path.to_path_buf(), source };
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(parent).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(parent).map_err(io)?;
    fill(tmp.as_file_mut()).map_err(io)?;
    tmp.as_file_mut().flush().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Artifact path: `output` if set, else `$OUTPUT_DIR/<command>.<ext>`, else none (stdout).
pub fn destination(config: &RunConfig, artifact: &Artifact, output_dir: Option<PathBuf>) -> Option<PathBuf> {
    if let Some(p) = &config.output {
        return Some(p.clone());
    }
    let cmd = config.command?;
    output_dir.map(|dir| dir.join(format!("{}.{}", cmd.name(), artifact.extension)))
}

/// Prints to stdout, ignoring a reader that has gone away.
pub fn emit(text: &str) {
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush());
}

/// Runs `config` end to end and returns the process exit code.
pub fn run(config: &RunConfig) -> i32 {
    let outcome = match execute(config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let dir = std::env::var_os(OUTPUT_DIR_VAR).map(PathBuf::from);
    match destination(config, &outcome.artifact, dir) {
        Some(path) => {
            if let Err(e) = write_atomic(&path, |f| f.write_all(outcome.artifact.text.as_bytes())) {
                eprintln!("error: {e}");
                return e.exit_code();
            }
            emit(&format!("{} (wrote {})\n", outcome.summary, path.display()));
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(outcome.artifact.text.as_bytes()).and_then(|_| stdout.flush()) {
                Ok(()) => {}
                // a closed reader (e.g. `| head`) is not an error of the run
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => return 0,
                Err(e) => {
                    eprintln!("error: cannot write to stdout: {e}");
                    return 2;
                }
            }
            eprintln!("{}", outcome.summary);
        }
    }
    0
}
