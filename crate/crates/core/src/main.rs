//! Command-line frontend: catalog validation, marginal-threshold searches,
//! parameter-space sweeps, and report generation.
//!
//! Exit codes: 0 success, 1 analysis failure (validation or correctability
//! check failed), 2 usage or configuration error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use photon_fusion::bsm::{catalog, classify_patterns, custom_scheme, export_scheme, BsmScheme};
use photon_fusion::circuit::parse_circuit;
use photon_fusion::config::SweepConfig;
use photon_fusion::fbqc::{EncodingMode, FusionNetwork};
use photon_fusion::loss::{LossParams, DEFAULT_LAYER_LENGTH_UM};
use photon_fusion::report::{slice_to_csv, slice_to_svg, thresholds_to_csv, thresholds_to_json};
use photon_fusion::sweep::{
    joint_check, marginal_threshold, sweep_slices, threshold_records, Axis,
};

#[derive(Parser)]
#[command(
    name = "photon-fusion",
    about = "Lossy linear-optical fusion simulator and loss-threshold analysis",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// TOML configuration file (defaults are used when omitted).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads (0 = all available cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Random seed. Reserved: the current pipeline is fully deterministic
    /// and does not consume randomness.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
    Svg,
}

#[derive(Subcommand)]
enum Command {
    /// Check the configuration and re-derive the scheme catalog, verifying
    /// every detection pattern classifies and success probabilities match.
    Validate {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Bisect the marginal loss threshold along one axis (other axes ideal).
    Threshold {
        #[command(flatten)]
        common: CommonOpts,
        /// Catalog scheme name (e.g. "boosted-phi+").
        #[arg(long, conflicts_with = "circuit")]
        scheme: Option<String>,
        /// Circuit description file defining a custom scheme instead.
        #[arg(long)]
        circuit: Option<PathBuf>,
        #[arg(long)]
        network: Option<String>,
        #[arg(long)]
        encoding: Option<String>,
        /// Loss axis: p_eff, bs_loss_db or prop_loss_db_per_cm (all three
        /// when omitted).
        #[arg(long)]
        axis: Option<String>,
    },
    /// Sample every configured scheme over the three two-axis loss slices and
    /// write per-slice CSV grids (and SVG maps of the correctable region).
    Sweep {
        #[command(flatten)]
        common: CommonOpts,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Output format; may be repeated (default: csv and svg).
        #[arg(long, value_enum)]
        format: Vec<OutputFormat>,
    },
    /// Write the full marginal-threshold table (all configured schemes,
    /// networks, encodings and axes) with element and layer counts.
    Report {
        #[command(flatten)]
        common: CommonOpts,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Output format; may be repeated (default: csv and json).
        #[arg(long, value_enum)]
        format: Vec<OutputFormat>,
    },
    /// Evaluate one scheme at a single simultaneous loss coordinate and
    /// report whether the network stays error-correctable (exit 1 if not).
    JointCheck {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, default_value = "boosted-phi+")]
        scheme: String,
        #[arg(long, default_value = "six_ring")]
        network: String,
        #[arg(long, default_value = "shor_2_2")]
        encoding: String,
        #[arg(long, default_value_t = 1.0)]
        p_gen: f64,
        #[arg(long, default_value_t = 1.0)]
        p_det: f64,
        #[arg(long, default_value_t = 0.0)]
        bs_loss_db: f64,
        #[arg(long, default_value_t = 0.0)]
        prop_loss_db_per_cm: f64,
        #[arg(long, default_value_t = DEFAULT_LAYER_LENGTH_UM)]
        layer_length_um: f64,
    },
    /// Print a scheme's layout and detection-pattern classification table.
    Describe {
        /// Catalog scheme name.
        #[arg(long, conflicts_with = "circuit")]
        scheme: Option<String>,
        /// Circuit description file defining a custom scheme instead.
        #[arg(long)]
        circuit: Option<PathBuf>,
    },
}

/// Usage/config errors exit 2; analysis errors exit 1.
enum CliError {
    Usage(String),
    Analysis(String),
}

impl CliError {
    fn usage(e: impl std::fmt::Display) -> Self {
        CliError::Usage(e.to_string())
    }

    fn analysis(e: impl std::fmt::Display) -> Self {
        CliError::Analysis(e.to_string())
    }
}

fn load_config(common: &CommonOpts) -> Result<SweepConfig, CliError> {
    let mut config = match &common.config {
        Some(path) => SweepConfig::from_path(path).map_err(CliError::usage)?,
        None => SweepConfig::default(),
    };
    if let Some(workers) = common.workers {
        config.workers = workers;
    }
    config.validate().map_err(CliError::usage)?;
    Ok(config)
}

fn resolve_scheme(
    scheme: &Option<String>,
    circuit: &Option<PathBuf>,
) -> Result<BsmScheme, CliError> {
    match (scheme, circuit) {
        (Some(name), None) => photon_fusion::bsm::catalog_scheme(name)
            .map_err(CliError::analysis)?
            .ok_or_else(|| CliError::Usage(format!("unknown scheme '{name}'"))),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            let layout = parse_circuit(&text).map_err(CliError::usage)?;
            let stem = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("custom");
            custom_scheme(stem, layout).map_err(CliError::analysis)
        }
        _ => Err(CliError::Usage(
            "exactly one of --scheme or --circuit is required".to_string(),
        )),
    }
}

fn parse_networks(arg: &Option<String>) -> Result<Vec<FusionNetwork>, CliError> {
    match arg {
        Some(s) => Ok(vec![FusionNetwork::parse(s).map_err(CliError::usage)?]),
        None => Ok(FusionNetwork::ALL.to_vec()),
    }
}

fn parse_encodings(arg: &Option<String>) -> Result<Vec<EncodingMode>, CliError> {
    match arg {
        Some(s) => Ok(vec![EncodingMode::parse(s).map_err(CliError::usage)?]),
        None => Ok(EncodingMode::ALL.to_vec()),
    }
}

fn ensure_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Analysis(format!("cannot write {}: {e}", path.display())))
}

/// File-name-safe scheme identifier.
fn slug(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

fn run_validate(common: &CommonOpts) -> Result<(), CliError> {
    let config = load_config(common)?;
    println!(
        "config ok: {} scheme(s), {} network(s), {} encoding(s)",
        config.schemes.len(),
        config.networks.len(),
        config.encodings.len()
    );
    let schemes = catalog().map_err(CliError::analysis)?;
    for name in &config.schemes {
        let scheme = schemes
            .iter()
            .find(|s| &s.name == name)
            .ok_or_else(|| CliError::Usage(format!("unknown scheme '{name}'")))?;
        let classes = classify_patterns(scheme).map_err(CliError::analysis)?;
        let p_succ = photon_fusion::bsm::success_probability_from(&classes);
        if (p_succ - scheme.p_succ_lossless).abs() > 1e-9 {
            return Err(CliError::Analysis(format!(
                "scheme {name}: recomputed p_succ {p_succ} differs from cataloged {}",
                scheme.p_succ_lossless
            )));
        }
        println!(
            "scheme {name}: {} patterns classified, p_succ {:.6}, failure basis {:?}",
            classes.len(),
            p_succ,
            scheme.failure_basis
        );
    }
    println!("validate: ok");
    Ok(())
}

fn run_threshold(
    common: &CommonOpts,
    scheme: &Option<String>,
    circuit: &Option<PathBuf>,
    network: &Option<String>,
    encoding: &Option<String>,
    axis: &Option<String>,
) -> Result<(), CliError> {
    let config = load_config(common)?;
    let scheme = resolve_scheme(scheme, circuit)?;
    let networks = parse_networks(network)?;
    let encodings = parse_encodings(encoding)?;
    let axes = match axis {
        Some(s) => vec![Axis::parse(s).map_err(CliError::usage)?],
        None => Axis::ALL.to_vec(),
    };
    println!(
        "scheme {} (ancilla {}, p_succ {:.6})",
        scheme.name,
        scheme.ancilla.label(),
        scheme.p_succ_lossless
    );
    for &network in &networks {
        for &encoding in &encodings {
            for &axis in &axes {
                let threshold = marginal_threshold(
                    &scheme,
                    network,
                    encoding,
                    axis,
                    config.bisection_tolerance,
                    config.layer_length_um,
                )
                .map_err(CliError::analysis)?;
                match threshold {
                    Some(value) => println!(
                        "{network} / {encoding} / {axis}: threshold {value:.6} {}",
                        axis.units()
                    ),
                    None => println!(
                        "{network} / {encoding} / {axis}: not correctable even without loss"
                    ),
                }
            }
        }
    }
    Ok(())
}

fn run_sweep(common: &CommonOpts, out: &Path, formats: &[OutputFormat]) -> Result<(), CliError> {
    let config = load_config(common)?;
    let formats = if formats.is_empty() {
        vec![OutputFormat::Csv, OutputFormat::Svg]
    } else {
        formats.to_vec()
    };
    if formats.contains(&OutputFormat::Json) {
        return Err(CliError::Usage(
            "sweep emits csv and svg; use the report command for json".to_string(),
        ));
    }
    ensure_dir(out)?;
    let slices = sweep_slices(&config).map_err(CliError::analysis)?;
    let mut written = 0usize;
    for slice in &slices {
        let base = format!(
            "slice_{}_{}_vs_{}",
            slug(&slice.grid.scheme),
            slice.grid.x_axis.name(),
            slice.grid.y_axis.name()
        );
        if formats.contains(&OutputFormat::Csv) {
            let csv = slice_to_csv(slice).map_err(CliError::analysis)?;
            write_file(&out.join(format!("{base}.csv")), &csv)?;
            written += 1;
        }
        if formats.contains(&OutputFormat::Svg) {
            for (i, a) in slice.assessments.iter().enumerate() {
                let svg = slice_to_svg(slice, i);
                let path = out.join(format!(
                    "{base}_{}_{}.svg",
                    a.network.name(),
                    a.encoding.name()
                ));
                write_file(&path, &svg)?;
                written += 1;
            }
        }
    }
    println!(
        "sweep: wrote {written} file(s) for {} slice(s) to {}",
        slices.len(),
        out.display()
    );
    Ok(())
}

fn run_report(common: &CommonOpts, out: &Path, formats: &[OutputFormat]) -> Result<(), CliError> {
    let config = load_config(common)?;
    let formats = if formats.is_empty() {
        vec![OutputFormat::Csv, OutputFormat::Json]
    } else {
        formats.to_vec()
    };
    if formats.contains(&OutputFormat::Svg) {
        return Err(CliError::Usage(
            "report emits csv and json; use the sweep command for svg".to_string(),
        ));
    }
    ensure_dir(out)?;
    let records = threshold_records(&config).map_err(CliError::analysis)?;
    if formats.contains(&OutputFormat::Csv) {
        let csv = thresholds_to_csv(&records).map_err(CliError::analysis)?;
        write_file(&out.join("thresholds.csv"), &csv)?;
    }
    if formats.contains(&OutputFormat::Json) {
        let json = thresholds_to_json(&records).map_err(CliError::analysis)?;
        write_file(&out.join("thresholds.json"), &json)?;
    }
    println!(
        "report: {} threshold record(s) written to {}",
        records.len(),
        out.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_joint_check(
    common: &CommonOpts,
    scheme: &str,
    network: &str,
    encoding: &str,
    params: LossParams,
) -> Result<(), CliError> {
    let _ = load_config(common)?;
    let scheme = resolve_scheme(&Some(scheme.to_string()), &None)?;
    let network = FusionNetwork::parse(network).map_err(CliError::usage)?;
    let encoding = EncodingMode::parse(encoding).map_err(CliError::usage)?;
    params.validate().map_err(CliError::usage)?;
    let check = joint_check(&scheme, network, encoding, &params).map_err(CliError::analysis)?;
    println!(
        "scheme {} / {network} / {encoding}: p_loss {:.6}, erasure {:.6} \
         (threshold {:.4}) -> {}",
        check.scheme,
        check.p_loss,
        check.assessment.effective_erasure,
        network.threshold_p_er(),
        if check.assessment.correctable {
            "correctable"
        } else {
            "NOT correctable"
        }
    );
    if check.assessment.correctable {
        Ok(())
    } else {
        Err(CliError::Analysis(
            "joint loss point is not error-correctable".to_string(),
        ))
    }
}

fn run_describe(scheme: &Option<String>, circuit: &Option<PathBuf>) -> Result<(), CliError> {
    let scheme = resolve_scheme(scheme, circuit)?;
    let text = export_scheme(&scheme).map_err(CliError::analysis)?;
    print!("{text}");
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Validate { common } => run_validate(common),
        Command::Threshold {
            common,
            scheme,
            circuit,
            network,
            encoding,
            axis,
        } => run_threshold(common, scheme, circuit, network, encoding, axis),
        Command::Sweep {
            common,
            out,
            format,
        } => run_sweep(common, out, format),
        Command::Report {
            common,
            out,
            format,
        } => run_report(common, out, format),
        Command::JointCheck {
            common,
            scheme,
            network,
            encoding,
            p_gen,
            p_det,
            bs_loss_db,
            prop_loss_db_per_cm,
            layer_length_um,
        } => run_joint_check(
            common,
            scheme,
            network,
            encoding,
            LossParams {
                p_gen: *p_gen,
                p_det: *p_det,
                bs_loss_db: *bs_loss_db,
                prop_loss_db_per_cm: *prop_loss_db_per_cm,
                layer_length_um: *layer_length_um,
            },
        ),
        Command::Describe { scheme, circuit } => run_describe(scheme, circuit),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Analysis(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
