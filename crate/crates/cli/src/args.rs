//! Flag definitions and their mapping onto [`RunConfig`].

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use hermite_gabor::{KernelMethod, LatticeMatrix};

use crate::config::{validate, Command, Format, RegionSpec, RunConfig};
use crate::run::{emit, run, CliError};

#[derive(Debug, Parser)]
#[command(name = "hgabor", version, about = "Frame bounds and certificates for Hermite Gabor systems")]
pub struct Cli {
    /// JSON config file; flags override its fields.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub action: Action,
}

#[derive(Debug, Subcommand)]
pub enum Action {
    /// Sample h_0..h_d on the window grid.
    Hermite(Overrides),
    /// Box norm of a lattice matrix.
    Norm(Overrides),
    /// Galerkin frame-bound estimates.
    Bounds(Overrides),
    /// Oscillation certificate for the Hermite window.
    Certify(Overrides),
    /// Tightness scan over t·M and the C_emp estimate per degree.
    Scan(Overrides),
    /// Determinant ladder of the 1/(d+1) criterion.
    Glgrid(Overrides),
    /// Dilation covariance check.
    Covariance(Overrides),
    /// Run the command named in the config file.
    Run(Overrides),
    /// List capacity, Nyquist, budget and field problems without running.
    Validate {
        /// Command to validate for; defaults to the config's command.
        #[arg(long = "for", value_enum)]
        target: Option<Command>,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// Window degree d.
    #[arg(long = "d", visible_alias = "window-degree", allow_negative_numbers = true)]
    pub window_degree: Option<i64>,
    /// Lattice matrix as "m11,m12,m21,m22".
    #[arg(long, allow_hyphen_values = true)]
    pub matrix: Option<LatticeMatrix>,
    /// Grid step of the window samples.
    #[arg(long, allow_negative_numbers = true)]
    pub step: Option<f64>,
    /// Half-width of the window grid.
    #[arg(long, allow_negative_numbers = true)]
    pub half_width: Option<f64>,
    /// Galerkin dimension K.
    #[arg(short = 'K', long = "k", visible_alias = "galerkin-dim", allow_negative_numbers = true)]
    pub galerkin_dim: Option<i64>,
    /// Lattice truncation radius.
    #[arg(long = "radius", visible_alias = "truncation-radius", allow_negative_numbers = true)]
    pub truncation_radius: Option<f64>,
    /// Certificate region as "x_half_width,xi_half_width,step".
    #[arg(long)]
    pub region: Option<RegionSpec>,
    /// Artifact path; defaults to $OUTPUT_DIR/<command>.<ext>, else stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Cross-ambiguity kernel: closed-form or quadrature.
    #[arg(long, value_parser = parse_kernel)]
    pub kernel: Option<KernelMethod>,
    /// Descending scale factors for scan.
    #[arg(long, value_delimiter = ',')]
    pub t_list: Option<Vec<f64>>,
    /// Window degrees for scan.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub d_list: Option<Vec<i64>>,
    #[arg(long, allow_negative_numbers = true)]
    pub det_max: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub steps: Option<i64>,
    /// Dilation factor for covariance.
    #[arg(long = "b", visible_alias = "dilation", allow_negative_numbers = true)]
    pub dilation: Option<f64>,
    /// Export the ambiguity field of certify (".bin" for binary, CSV otherwise).
    #[arg(long = "field")]
    pub field_output: Option<PathBuf>,
    /// Seed for randomized harnesses; the pipelines themselves are deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
}

fn parse_kernel(s: &str) -> Result<KernelMethod, String> {
    serde_json::from_value(serde_json::Value::String(s.into()))
        .map_err(|_| format!("unknown kernel '{s}' (expected closed-form or quadrature)"))
}

impl Overrides {
    fn into_config(self, command: Option<Command>) -> RunConfig {
        RunConfig {
            command,
            window_degree: self.window_degree,
            matrix: self.matrix,
            step: self.step,
            half_width: self.half_width,
            galerkin_dim: self.galerkin_dim,
            truncation_radius: self.truncation_radius,
            region: self.region,
            output: self.output,
            format: self.format,
            kernel: self.kernel,
            t_list: self.t_list,
            d_list: self.d_list,
            det_max: self.det_max,
            steps: self.steps,
            dilation: self.dilation,
            field_output: self.field_output,
            seed: self.seed,
        }
    }
}

/// Defaults, then the config file, then flags.
pub fn resolve(file: Option<RunConfig>, action: Action) -> (RunConfig, bool) {
    let (flags, validate_only) = match action {
        Action::Hermite(o) => (o.into_config(Some(Command::Hermite)), false),
        Action::Norm(o) => (o.into_config(Some(Command::Norm)), false),
        Action::Bounds(o) => (o.into_config(Some(Command::Bounds)), false),
        Action::Certify(o) => (o.into_config(Some(Command::Certify)), false),
        Action::Scan(o) => (o.into_config(Some(Command::Scan)), false),
        Action::Glgrid(o) => (o.into_config(Some(Command::Glgrid)), false),
        Action::Covariance(o) => (o.into_config(Some(Command::Covariance)), false),
        Action::Run(o) => (o.into_config(None), false),
        Action::Validate { target, overrides } => (overrides.into_config(target), true),
    };
    let mut merged = file.unwrap_or_default().overlay(&flags);
    merged.seed.get_or_insert(0);
    (merged, validate_only)
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let file = match cli.config.as_deref().map(RunConfig::load).transpose() {
        Ok(f) => f,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    let (config, validate_only) = resolve(file, cli.action);
    if validate_only {
        return report(&config);
    }
    run(&config)
}

fn report(config: &RunConfig) -> i32 {
    let diags = validate(config);
    if config.format == Some(Format::Json) {
        emit(&format!("{}\n", serde_json::to_string_pretty(&diags).expect("diagnostics serialize")));
    } else {
        for d in &diags {
            emit(&format!("{d}\n"));
        }
    }
    if diags.is_empty() {
        eprintln!("configuration is runnable");
        0
    } else {
        let code = CliError::Invalid(diags).exit_code();
        eprintln!("configuration has problems");
        code
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("hgabor").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_file() {
        let file = RunConfig { window_degree: Some(3), galerkin_dim: Some(32), ..Default::default() };
        let cli = parse(&["bounds", "--d", "1", "--matrix", "0.5,0,0,0.5"]);
        let (c, v) = resolve(Some(file), cli.action);
        assert!(!v);
        assert_eq!(c.command, Some(Command::Bounds));
        assert_eq!(c.window_degree, Some(1));
        assert_eq!(c.galerkin_dim, Some(32));
        assert_eq!(c.seed, Some(0));
    }

    #[test]
    fn negative_values_reach_the_validator() {
        let cli = parse(&["validate", "-K", "-4", "--matrix", "-1,0,0,1"]);
        let (c, v) = resolve(None, cli.action);
        assert!(v);
        assert_eq!(c.galerkin_dim, Some(-4));
        assert_eq!(c.matrix.unwrap().entries(), [-1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn lists_and_kernel_parse() {
        let cli = parse(&["scan", "--t-list", "0.5,0.25", "--d-list", "0,1", "--kernel", "quadrature"]);
        let (c, _) = resolve(None, cli.action);
        assert_eq!(c.t_list, Some(vec![0.5, 0.25]));
        assert_eq!(c.d_list, Some(vec![0, 1]));
        assert_eq!(c.kernel, Some(KernelMethod::Quadrature));
    }

    #[test]
    fn run_keeps_file_command() {
        let file = RunConfig { command: Some(Command::Glgrid), ..Default::default() };
        let (c, _) = resolve(Some(file), parse(&["run"]).action);
        assert_eq!(c.command, Some(Command::Glgrid));
    }
}
