//! Command-line front end.
//!
//! Every subcommand starts from an optional TOML config, applies flag
//! overrides on top, resolves the result into a `SweepSpec`, and writes
//! either to `--out` (data file plus manifest) or to stdout.
//!
//! Exit codes: 0 success, 2 usage or config error, 3 numeric or physicality
//! error, 4 I/O error.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ofdm_cvqkd::config::{ConfigFile, OutputFormat, ProtocolKind, Study};
use ofdm_cvqkd::constellation::{Constellation, FourthMomentConvention};
use ofdm_cvqkd::output::{emit_to_files, write_rows_csv, write_study};
use ofdm_cvqkd::pipeline::{run_study, StudyOutput};
use ofdm_cvqkd::security::{null_key_threshold, skr_protocol, Detection};
use ofdm_cvqkd::{Error, Result, SweepSpec, TupleCounting};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "ofdm-cvqkd",
    version,
    about = "Modulation noise and key rates of OFDM multi-carrier CV-QKD"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Per-quadrature moments of a constellation.
    Moments(Common),
    /// Worst-subcarrier noise against N, or the per-subcarrier budget.
    Noise {
        #[command(flatten)]
        common: Common,
        /// Emit every subcarrier instead of the worst one.
        #[arg(long)]
        per_k: bool,
    },
    /// Monte Carlo check of the closed-form noise.
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Symbols to simulate per (N, mu).
        #[arg(long)]
        symbols: Option<usize>,
        #[arg(long)]
        samples_per_symbol: Option<usize>,
    },
    /// Key rate at one operating point per distance.
    Skr {
        #[command(flatten)]
        common: Common,
        /// Excess noise (SNU); defaults to the single-carrier value.
        #[arg(long)]
        eps: Option<f64>,
        /// Also report the null-key excess-noise threshold.
        #[arg(long)]
        threshold: bool,
    },
    /// Runs the study named in the config.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        study: Option<StudyArg>,
    },
    /// Best carrier count per distance.
    Optimize(Common),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ProtocolArg {
    Qpsk,
    Qam,
    #[value(name = "256qam")]
    Qam256,
    Gaussian,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum StudyArg {
    NoiseVsN,
    Budget,
    RatioVsMu,
    SkrVsDistance,
    Gain,
    OptimizeN,
    Oracle,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum DetectionArg {
    Homodyne,
    Heterodyne,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CountingArg {
    Combinations,
    Ordered,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ConventionArg {
    Raw,
    VarianceOfSquare,
}

/// Flags shared by every subcommand; each overrides the config value.
#[derive(Args, Debug, Default)]
pub struct Common {
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,

    #[arg(long, value_enum)]
    pub protocol: Option<ProtocolArg>,
    /// Maxwell-Boltzmann shaping parameter.
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long)]
    pub clip_sigmas: Option<f64>,
    #[arg(long, value_enum)]
    pub fourth_moment: Option<ConventionArg>,

    /// Modulation indices, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub mu: Option<Vec<f64>>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// Disable intermodulation terms.
    #[arg(long)]
    pub no_intermod: bool,
    #[arg(long, value_enum)]
    pub counting: Option<CountingArg>,

    /// Carrier counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Carrier counts 1..=N.
    #[arg(long, conflicts_with = "n")]
    pub n_max: Option<usize>,
    /// Distances in km, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub l: Option<Vec<f64>>,

    #[arg(long)]
    pub v_a: Option<f64>,
    #[arg(long)]
    pub eps_single: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub v_ele: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, value_enum)]
    pub detection: Option<DetectionArg>,
    #[arg(long)]
    pub untrusted: bool,

    #[arg(long)]
    pub seed: Option<u64>,
    /// Run on one thread.
    #[arg(long)]
    pub sequential: bool,
}

impl Common {
    fn config_file(&self) -> Result<ConfigFile> {
        let mut f = match &self.config {
            Some(p) => ConfigFile::from_path(p)?,
            None => ConfigFile::default(),
        };
        if let Some(p) = self.protocol {
            let kind = match p {
                ProtocolArg::Qpsk => ProtocolKind::Qpsk,
                ProtocolArg::Qam => ProtocolKind::Qam,
                ProtocolArg::Qam256 => ProtocolKind::Qam256,
                ProtocolArg::Gaussian => ProtocolKind::Gaussian,
            };
            if self.config.is_some() && kind != f.protocol.kind {
                // protocol-specific keys of the file no longer apply
                f.protocol = Default::default();
            }
            f.protocol.kind = kind;
        }
        set(&mut f.protocol.nu, self.nu);
        set(&mut f.protocol.levels, self.levels);
        set(&mut f.protocol.clip_sigmas, self.clip_sigmas);
        set(
            &mut f.protocol.fourth_moment,
            self.fourth_moment.map(|c| match c {
                ConventionArg::Raw => FourthMomentConvention::RawFourthMoment,
                ConventionArg::VarianceOfSquare => FourthMomentConvention::VarianceOfSquare,
            }),
        );

        if let Some(mu) = &self.mu {
            f.modulator.mu = mu.first().copied();
            f.sweep.mu_values = Some(mu.clone());
        }
        set(&mut f.modulator.kappa, self.kappa);
        set(&mut f.modulator.theta, self.theta);
        if self.no_intermod {
            f.modulator.intermod = Some(false);
        }
        set(
            &mut f.modulator.counting,
            self.counting.map(|c| match c {
                CountingArg::Combinations => TupleCounting::Combinations,
                CountingArg::Ordered => TupleCounting::Ordered,
            }),
        );

        if let Some(n) = &self.n {
            f.sweep.n_values = Some(n.clone());
            f.sweep.n_range = None;
        }
        if let Some(n) = self.n_max {
            f.sweep.n_values = None;
            f.sweep.n_range = Some([1, n]);
        }
        set(&mut f.sweep.l_values_km, self.l.clone());

        set(&mut f.channel.v_a, self.v_a);
        set(&mut f.channel.eps_single, self.eps_single);
        set(&mut f.channel.alpha_db_per_km, self.alpha);
        set(&mut f.channel.eta, self.eta);
        set(&mut f.channel.v_ele, self.v_ele);
        set(&mut f.channel.beta, self.beta);
        set(
            &mut f.channel.detection,
            self.detection.map(|d| match d {
                DetectionArg::Homodyne => Detection::Homodyne,
                DetectionArg::Heterodyne => Detection::HeterodyneNoSwitch,
            }),
        );
        if self.untrusted {
            f.channel.trusted_detector = Some(false);
        }
        set(&mut f.sweep.seed, self.seed);
        if self.sequential {
            f.sweep.parallel = Some(false);
        }
        set(&mut f.output.path, self.out.clone());
        set(
            &mut f.output.format,
            self.format.map(|x| match x {
                FormatArg::Csv => OutputFormat::Csv,
                FormatArg::Json => OutputFormat::Json,
            }),
        );
        Ok(f)
    }
}

fn set<T>(slot: &mut Option<T>, value: Option<T>) {
    if value.is_some() {
        *slot = value;
    }
}

fn study_of(s: StudyArg) -> Study {
    match s {
        StudyArg::NoiseVsN => Study::NoiseVsN,
        StudyArg::Budget => Study::Budget,
        StudyArg::RatioVsMu => Study::RatioVsMu,
        StudyArg::SkrVsDistance => Study::SkrVsDistance,
        StudyArg::Gain => Study::Gain,
        StudyArg::OptimizeN => Study::OptimizeN,
        StudyArg::Oracle => Study::Oracle,
    }
}

#[derive(Serialize)]
struct MomentsRow {
    protocol: String,
    convention: FourthMomentConvention,
    sigma1_sq: f64,
    sigma2_sq: f64,
}

#[derive(Serialize)]
struct SkrRow {
    protocol: String,
    backend: &'static str,
    l_km: f64,
    transmittance: f64,
    v_a: f64,
    eps: f64,
    i_ab: f64,
    chi_be: f64,
    r_k: f64,
    threshold: Option<f64>,
}

fn emit_rows<T: Serialize>(rows: &[T], format: OutputFormat, out: &mut dyn Write) -> Result<()> {
    match format {
        OutputFormat::Csv => write_rows_csv(rows, out),
        OutputFormat::Json => ofdm_cvqkd::output::write_rows_json(rows, out),
    }
}

fn finish(
    command: &str,
    spec: &SweepSpec,
    study: &StudyOutput,
    stdout: &mut dyn Write,
) -> Result<()> {
    match &spec.output.path {
        Some(path) => {
            let (data, manifest) = emit_to_files(command, spec, study, path)?;
            writeln!(stdout, "wrote {} ({} rows)", data.display(), study.len())?;
            writeln!(stdout, "wrote {}", manifest.display())?;
            Ok(())
        }
        None => write_study(study, spec.output.format, stdout),
    }
}

fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Moments(common) => {
            let spec = common.config_file()?.resolve()?;
            let c: Constellation = spec.constellation;
            let m = c.moments()?;
            let rows = [MomentsRow {
                protocol: c.protocol.label(),
                convention: c.fourth_moment_convention,
                sigma1_sq: m.sigma1_sq,
                sigma2_sq: m.sigma2_sq,
            }];
            emit_rows(&rows, spec.output.format, stdout)
        }
        Command::Noise { common, per_k } => {
            let mut f = common.config_file()?;
            f.sweep.study = Some(if per_k {
                Study::Budget
            } else {
                Study::NoiseVsN
            });
            let spec = f.resolve()?;
            finish("noise", &spec, &run_study(&spec)?, stdout)
        }
        Command::Oracle {
            common,
            symbols,
            samples_per_symbol,
        } => {
            let mut f = common.config_file()?;
            f.sweep.study = Some(Study::Oracle);
            set(&mut f.sweep.n_symbols, symbols);
            set(&mut f.sweep.samples_per_symbol, samples_per_symbol);
            if common.n.is_none()
                && common.n_max.is_none()
                && f.sweep.n_values.is_none()
                && f.sweep.n_range.is_none()
            {
                f.sweep.n_values = Some(vec![8]);
            }
            let spec = f.resolve()?;
            let out = run_study(&spec)?;
            if let StudyOutput::Oracle(rows) = &out {
                let passed = rows.iter().filter(|r| r.pass).count();
                writeln!(
                    stderr,
                    "oracle: {passed}/{} subcarriers within tolerance",
                    rows.len()
                )?;
            }
            finish("oracle", &spec, &out, stdout)
        }
        Command::Skr {
            common,
            eps,
            threshold,
        } => {
            let spec = common.config_file()?.resolve()?;
            let eps = eps.unwrap_or(spec.eps_single);
            let mut rows = Vec::new();
            for &l in &spec.l_values_km {
                let ch = spec.channel.at_distance(l);
                let p = skr_protocol(&spec.constellation, spec.v_a, eps, &ch)?;
                let thr = if threshold {
                    Some(null_key_threshold(spec.v_a, &ch)?)
                } else {
                    None
                };
                rows.push(SkrRow {
                    protocol: spec.constellation.protocol.label(),
                    backend: p.backend.label(),
                    l_km: l,
                    transmittance: p.params.transmittance,
                    v_a: spec.v_a,
                    eps,
                    i_ab: p.i_ab,
                    chi_be: p.chi_be,
                    r_k: p.r_k,
                    threshold: thr,
                });
            }
            match &spec.output.path {
                Some(path) => {
                    let mut file = std::fs::File::create(path)?;
                    emit_rows(&rows, spec.output.format, &mut file)?;
                    writeln!(stdout, "wrote {}", path.display())?;
                    Ok(())
                }
                None => emit_rows(&rows, spec.output.format, stdout),
            }
        }
        Command::Sweep { common, study } => {
            let mut f = common.config_file()?;
            if let Some(s) = study {
                f.sweep.study = Some(study_of(s));
            }
            let spec = f.resolve()?;
            finish("sweep", &spec, &run_study(&spec)?, stdout)
        }
        Command::Optimize(common) => {
            let mut f = common.config_file()?;
            f.sweep.study = Some(Study::OptimizeN);
            let spec = f.resolve()?;
            finish("optimize", &spec, &run_study(&spec)?, stdout)
        }
    }
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// Entry point used by the binary.
pub fn cli_main<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = run(args, &mut stdout.lock(), &mut stderr.lock());
    if let Err(e) = std::io::stdout().flush() {
        eprintln!("error: {}", Error::from(e));
        return 4;
    }
    code
}
