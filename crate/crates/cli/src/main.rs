use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wcomp_cli::{analyze, load_spec, load_thresholds, to_json, write_json, write_profiles, CriterionId, RunConfig};
use wcomp_core::functions::FunctionSpec;
use wcomp_core::spaces::SpaceSpec;
use wcomp_core::Error;

#[derive(Parser)]
#[command(name = "wcomp", version, about = "Boundedness, compactness and Schatten-class evidence for weighted composition operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Matrix truncation plus kernel, pointwise and Schatten criteria.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Claimed norm bound for the pointwise check (default: σ_max of the truncation).
        #[arg(long)]
        norm_bound: Option<f64>,
        /// δ of the two-region bound; enables adelta_bound_check together with --c-delta.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        c_delta: Option<f64>,
        /// Order of the moment matrix for gram_moments.
        #[arg(long, default_value_t = 64)]
        gram_order: usize,
    },
    /// Julia–Carathéodory quotients, their grid sup and Ahern–Clark sums.
    Boundary {
        #[command(flatten)]
        common: Common,
    },
    /// Schatten norms of the truncation and the area-integral test.
    Schatten {
        #[command(flatten)]
        common: Common,
    },
    /// Carleson-box masses of the pullback measure at the probe angles.
    Carleson {
        #[command(flatten)]
        common: Common,
        /// Box sizes δ (comma separated); default 2^-1, …, 2^-7.
        #[arg(long, value_delimiter = ',')]
        deltas: Vec<f64>,
        /// Boundary or angular samples per box evaluation.
        #[arg(long, default_value_t = 1 << 16)]
        samples: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceArg {
    Hardy,
    Bergman,
}

#[derive(Args)]
struct Common {
    /// Weight h: inline JSON spec or path to one (default: the constant 1).
    #[arg(long)]
    h: Option<String>,
    /// Symbol φ: inline JSON spec or path to one.
    #[arg(long)]
    phi: String,
    #[arg(long, value_enum, default_value = "hardy")]
    space: SpaceArg,
    /// Bergman weight α > −1.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    alpha: f64,
    /// Truncation order N.
    #[arg(long, default_value_t = 1024)]
    trunc: usize,
    /// Probe grid depth J.
    #[arg(long, default_value_t = 10)]
    grid_levels: usize,
    /// Schatten exponent.
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// Boundary probe angles in radians (comma separated).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    zeta: Vec<f64>,
    /// Criteria to run (comma separated); overrides the subcommand default.
    #[arg(long, value_delimiter = ',')]
    criteria: Vec<String>,
    /// JSON report path; the report goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for per-criterion CSV profiles.
    #[arg(long)]
    profiles_out: Option<PathBuf>,
    /// JSON file overriding verdict thresholds.
    #[arg(long)]
    thresholds: Option<PathBuf>,
    /// Include wall-clock seconds per stage (makes reports non-reproducible).
    #[arg(long)]
    timings: bool,
}

fn config_from(common: &Common, defaults: &[CriterionId], matrix_summary: bool) -> Result<RunConfig, Error> {
    let (h, h_source) = match &common.h {
        Some(arg) => load_spec(arg, false)?,
        None => (FunctionSpec::constant(1.0), None),
    };
    let (phi, phi_source) = load_spec(&common.phi, true)?;
    let space = match common.space {
        SpaceArg::Hardy => SpaceSpec::Hardy,
        SpaceArg::Bergman => SpaceSpec::bergman(common.alpha)?,
    };
    let mut c = RunConfig::new(h, phi, space);
    c.h_source = h_source;
    c.phi_source = phi_source;
    c.trunc = common.trunc;
    c.grid_levels = common.grid_levels;
    c.p = common.p;
    if !common.zeta.is_empty() {
        c.zeta = common.zeta.clone();
    }
    c.criteria = if common.criteria.is_empty() {
        defaults.to_vec()
    } else {
        common.criteria.iter().map(|s| s.parse()).collect::<Result<_, _>>()?
    };
    c.matrix_summary = matrix_summary;
    if let Some(path) = &common.thresholds {
        c.thresholds = load_thresholds(path)?;
        c.thresholds_source = Some(path.display().to_string());
    }
    c.out = common.out.as_ref().map(|p| p.display().to_string());
    c.profiles_out = common.profiles_out.as_ref().map(|p| p.display().to_string());
    c.timings = common.timings;
    Ok(c)
}

fn run(cli: Cli) -> Result<(), Error> {
    use CriterionId::*;
    let config = match &cli.command {
        Command::Analyze { common, norm_bound, delta, c_delta, gram_order } => {
            let mut c = config_from(common, &RunConfig::new(FunctionSpec::constant(1.0), FunctionSpec::identity(), SpaceSpec::Hardy).criteria, true)?;
            c.norm_bound = *norm_bound;
            c.delta = *delta;
            c.c_delta = *c_delta;
            c.gram_order = *gram_order;
            if delta.is_some() && c_delta.is_some() && common.criteria.is_empty() {
                c.criteria.push(AdeltaBoundCheck);
            }
            c
        }
        Command::Boundary { common } => config_from(common, &[SupJcRatio, JcQuotientProbe, AhernClark], false)?,
        Command::Schatten { common } => config_from(common, &[SchattenNorm, SchattenIntegral], true)?,
        Command::Carleson { common, deltas, samples } => {
            let mut c = config_from(common, &[CarlesonBoxMeasure], false)?;
            if !deltas.is_empty() {
                c.carleson_deltas = deltas.clone();
            }
            c.carleson_samples = *samples;
            c
        }
    };
    let report = analyze(&config)?;
    if let Some(dir) = &config.profiles_out {
        write_profiles(&report, dir.as_ref())?;
    }
    match &config.out {
        Some(path) => {
            write_json(&report, path.as_ref())?;
            for e in &report.criteria {
                let status = match (&e.report, &e.skip_reason) {
                    (Some(r), _) => r.verdict.label().to_string(),
                    (None, Some(s)) => format!("SKIPPED ({})", s.kind),
                    (None, None) => "SKIPPED".into(),
                };
                println!("{:<24} {status}", e.criterion.name());
            }
        }
        None => print!("{}", to_json(&report)?),
    }
    Ok(())
}

fn error_object(kind: &str, message: &str, e: Option<&Error>) -> String {
    let mut obj = serde_json::json!({ "kind": kind, "message": message });
    if let Some(Error::SelfMapGate { max_modulus }) = e {
        obj["max_modulus"] = serde_json::json!(max_modulus);
    }
    serde_json::json!({ "error": obj }).to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) => {
            eprintln!("{}", error_object("usage", e.to_string().trim(), None));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_object(e.kind(), &e.to_string(), Some(&e)));
            ExitCode::from(1)
        }
    }
}
