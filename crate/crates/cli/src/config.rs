//! Flag parsing plus the optional `key=value` config file. Flags override
//! file entries; unknown keys are rejected.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PulseShapeArg {
    Gaussian,
    Rectangular,
}

impl From<PulseShapeArg> for qndsim::Shape {
    fn from(v: PulseShapeArg) -> Self {
        match v {
            PulseShapeArg::Gaussian => qndsim::Shape::Gaussian,
            PulseShapeArg::Rectangular => qndsim::Shape::Rectangular,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepModeArg {
    Symmetric,
    Asymmetric,
}

/// Numeric/grid/tolerance options shared by every command. All of them may
/// also come from the config file.
#[derive(Debug, Clone, Args)]
pub struct CommonOpts {
    /// Plain-text config file with `key=value` lines (`#` comments)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output format for the data artifact
    #[arg(long, global = true)]
    pub format: Option<OutputFormat>,
    /// Output path; stdout when omitted. Relative paths resolve against
    /// $QNDSIM_OUT_DIR when that is set.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Convergence tolerance for one-photon probability quadrature
    #[arg(long, global = true)]
    pub tol_1d: Option<f64>,
    /// Convergence tolerance for two-photon probability quadrature
    #[arg(long, global = true)]
    pub tol_2d: Option<f64>,
    /// Tolerance on |P_suc - target| in the duration root-finder
    #[arg(long, global = true)]
    pub tol_root: Option<f64>,
    /// Grid override: lower edge
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub grid_lo: Option<f64>,
    /// Grid override: upper edge
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub grid_hi: Option<f64>,
    /// Grid override: point count (must be 1 mod 4)
    #[arg(long, global = true)]
    pub grid_n: Option<usize>,
}

#[derive(Debug, Parser)]
#[command(
    name = "qndsim",
    about = "One- and two-photon scattering on a two-sided atom-cavity system and the heralded photon-arrival figures of merit",
    version
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One-photon detection probabilities per pulse duration
    Transmittance {
        /// Comma-separated pulse durations in 1/Gamma
        #[arg(long, value_delimiter = ',', required = true)]
        d: Vec<f64>,
        #[arg(long, value_enum, default_value = "gaussian")]
        shape: PulseShapeArg,
    },
    /// QND efficiency and success probability for one duration pair
    Metrics {
        #[arg(long)]
        d_signal: f64,
        #[arg(long)]
        d_ancilla: f64,
    },
    /// Metrics across a list of durations
    Sweep {
        #[arg(long, value_enum, default_value = "symmetric")]
        mode: SweepModeArg,
        /// Comma-separated signal durations in 1/Gamma (ascending)
        #[arg(long, value_delimiter = ',', required = true)]
        d: Vec<f64>,
        /// Ancilla duration for the asymmetric mode
        #[arg(long, default_value_t = 40.0)]
        d_ancilla: f64,
    },
    /// Heralded signal pulse shape at a detection coordinate
    Shape {
        #[arg(long)]
        d_signal: f64,
        #[arg(long)]
        d_ancilla: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        x_detect: f64,
        #[arg(long, value_enum, default_value = "rectangular")]
        shape: PulseShapeArg,
    },
    /// Finite-kappa propagation compared against the effective kernel
    OracleCheck {
        #[arg(long)]
        d: f64,
        #[arg(long, default_value_t = 10.0)]
        kappa_over_g: f64,
        /// Wavenumber cutoff; default max(20/d, 2)
        #[arg(long)]
        k_cutoff: Option<f64>,
        /// Mode count; default sized for dk = 0.1/d
        #[arg(long)]
        n_modes: Option<usize>,
    },
}

/// Fully resolved run options after merging flags, config file, defaults.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub tol_1d: f64,
    pub tol_2d: f64,
    pub tol_root: f64,
    pub grid_lo: Option<f64>,
    pub grid_hi: Option<f64>,
    pub grid_n: Option<usize>,
}

#[derive(Debug, Default)]
struct FileConfig {
    format: Option<OutputFormat>,
    out: Option<PathBuf>,
    out_dir: Option<PathBuf>,
    tol_1d: Option<f64>,
    tol_2d: Option<f64>,
    tol_root: Option<f64>,
    grid_lo: Option<f64>,
    grid_hi: Option<f64>,
    grid_n: Option<usize>,
}

fn parse_file(path: &Path) -> Result<FileConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let mut cfg = FileConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value, got `{raw}`", lineno + 1))?;
        let (key, value) = (key.trim(), value.trim());
        let parse_f64 = |v: &str| -> Result<f64, String> {
            v.parse::<f64>().map_err(|_| format!("line {}: bad number `{v}`", lineno + 1))
        };
        match key {
            "format" => {
                cfg.format = Some(match value {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    other => return Err(format!("line {}: unknown format `{other}`", lineno + 1)),
                })
            }
            "out" => cfg.out = Some(PathBuf::from(value)),
            "out_dir" => cfg.out_dir = Some(PathBuf::from(value)),
            "tol_1d" => cfg.tol_1d = Some(parse_f64(value)?),
            "tol_2d" => cfg.tol_2d = Some(parse_f64(value)?),
            "tol_root" => cfg.tol_root = Some(parse_f64(value)?),
            "grid_lo" => cfg.grid_lo = Some(parse_f64(value)?),
            "grid_hi" => cfg.grid_hi = Some(parse_f64(value)?),
            "grid_n" => {
                cfg.grid_n = Some(
                    value
                        .parse::<usize>()
                        .map_err(|_| format!("line {}: bad count `{value}`", lineno + 1))?,
                )
            }
            other => return Err(format!("line {}: unknown key `{other}`", lineno + 1)),
        }
    }
    Ok(cfg)
}

/// Merge precedence: flag > config file > built-in default. The output
/// directory env var applies to relative output paths.
pub fn resolve(common: &CommonOpts) -> Result<Resolved, String> {
    let file = match &common.config {
        Some(path) => parse_file(path)?,
        None => FileConfig::default(),
    };
    let out = common.out.clone().or(file.out);
    let out_dir = std::env::var_os("QNDSIM_OUT_DIR").map(PathBuf::from).or(file.out_dir);
    let out = out.map(|p| {
        if p.is_relative() {
            if let Some(dir) = &out_dir {
                return dir.join(p);
            }
        }
        p
    });
    let positive = |name: &str, v: f64| -> Result<f64, String> {
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(format!("{name} must be positive, got {v}"))
        }
    };
    Ok(Resolved {
        format: common.format.or(file.format).unwrap_or(OutputFormat::Csv),
        out,
        tol_1d: positive("tol_1d", common.tol_1d.or(file.tol_1d).unwrap_or(1e-6))?,
        tol_2d: positive("tol_2d", common.tol_2d.or(file.tol_2d).unwrap_or(1e-3))?,
        tol_root: positive("tol_root", common.tol_root.or(file.tol_root).unwrap_or(1e-4))?,
        grid_lo: common.grid_lo.or(file.grid_lo),
        grid_hi: common.grid_hi.or(file.grid_hi),
        grid_n: common.grid_n.or(file.grid_n),
    })
}
