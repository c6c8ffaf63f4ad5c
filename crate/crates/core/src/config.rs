//! TOML run configuration.
//!
//! ```toml
//! [protocol]
//! kind = "qpsk"            # qpsk | qam | 256qam | gaussian
//!
//! [modulator]
//! mu = 0.01
//! kappa = 0.98
//! theta = 0.06283185307179587
//!
//! [channel]
//! v_a = 0.45
//! eps_single = 0.007
//!
//! [sweep]
//! study = "noise-vs-n"
//! n_range = [1, 100]
//! l_values_km = [5, 10, 25]
//!
//! [output]
//! path = "noise.csv"
//! ```
//!
//! Every section and key is optional; unknown keys are rejected. Anything
//! left out resolves to a protocol-specific default, and the resolved
//! [`SweepSpec`] is what gets written into the run manifest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::constellation::{
    Constellation, FourthMomentConvention, Protocol, QAM256_LEVELS, QAM256_NU,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::intermod::{IndexRule, TupleCounting};
use crate::noise_model::{IntermodOptions, ModulatorConfig};
use crate::security::{ChannelDetector, Detection};

/// Largest N searched when no grid is configured.
pub const DEFAULT_MAX_N: usize = 512;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolKind {
    #[default]
    Qpsk,
    Qam,
    #[serde(rename = "256qam")]
    Qam256,
    Gaussian,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Study {
    /// Worst-subcarrier noise and null-key threshold per N.
    #[default]
    NoiseVsN,
    /// Per-subcarrier noise budget at each N.
    Budget,
    /// Worst-subcarrier ε_mod / A² against μ.
    RatioVsMu,
    /// Single and total key rate per (N, L).
    SkrVsDistance,
    /// Total rate over the single-carrier rate per (N, L).
    Gain,
    /// Best N per L.
    OptimizeN,
    /// Monte Carlo check of the closed-form noise.
    Oracle,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub protocol: ProtocolSection,
    #[serde(default)]
    pub modulator: ModulatorSection,
    #[serde(default)]
    pub channel: ChannelSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    #[serde(default)]
    pub kind: ProtocolKind,
    pub levels: Option<usize>,
    pub nu: Option<f64>,
    pub clip_sigmas: Option<f64>,
    pub fourth_moment: Option<FourthMomentConvention>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulatorSection {
    pub mu: Option<f64>,
    pub kappa: Option<f64>,
    pub theta: Option<f64>,
    pub a_sig: Option<f64>,
    pub delta_f: Option<f64>,
    pub intermod: Option<bool>,
    pub counting: Option<TupleCounting>,
    pub m_excludes_k: Option<bool>,
    pub w_excludes_k: Option<bool>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub v_a: Option<f64>,
    pub eps_single: Option<f64>,
    pub alpha_db_per_km: Option<f64>,
    pub eta: Option<f64>,
    pub v_ele: Option<f64>,
    pub beta: Option<f64>,
    pub detection: Option<Detection>,
    pub trusted_detector: Option<bool>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub study: Option<Study>,
    pub n_values: Option<Vec<usize>>,
    pub n_range: Option<[usize; 2]>,
    pub l_values_km: Option<Vec<f64>>,
    pub mu_values: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub samples_per_symbol: Option<usize>,
    pub n_symbols: Option<usize>,
    pub parallel: Option<bool>,
    pub exact_total: Option<bool>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

/// Per-protocol parameter block used for anything not configured.
#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolDefaults {
    pub v_a: f64,
    pub eps_single: f64,
    pub eta: f64,
    pub v_ele: f64,
    pub l_values_km: Vec<f64>,
}

pub fn protocol_defaults(kind: ProtocolKind) -> ProtocolDefaults {
    match kind {
        // no detector figures are quoted for QPSK; the QAM values stand in
        ProtocolKind::Qpsk => ProtocolDefaults {
            v_a: 0.45,
            eps_single: 0.007,
            eta: 0.56,
            v_ele: 0.15,
            l_values_km: vec![5.0, 10.0, 25.0],
        },
        ProtocolKind::Qam | ProtocolKind::Qam256 => ProtocolDefaults {
            v_a: 5.0,
            eps_single: 0.03,
            eta: 0.56,
            v_ele: 0.15,
            l_values_km: vec![25.0, 50.0, 100.0],
        },
        ProtocolKind::Gaussian => ProtocolDefaults {
            v_a: 5.0,
            eps_single: 0.03,
            eta: 0.56,
            v_ele: 0.1,
            l_values_km: vec![50.0, 100.0, 150.0],
        },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub format: OutputFormat,
}

/// Fully resolved run description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub study: Study,
    pub constellation: Constellation,
    /// `n_total` is overridden per grid point.
    pub modulator: ModulatorConfig,
    pub v_a: f64,
    pub eps_single: f64,
    /// `distance_km` is overridden per grid point.
    pub channel: ChannelDetector,
    pub n_values: Vec<usize>,
    pub l_values_km: Vec<f64>,
    pub mu_values: Vec<f64>,
    pub seed: u64,
    pub samples_per_symbol: Option<usize>,
    pub n_symbols: usize,
    pub execution: Execution,
    pub exact_total: bool,
    pub output: OutputSpec,
    /// Caveats recorded in the manifest.
    pub notes: Vec<String>,
}

impl SweepSpec {
    /// Defaults for `kind` with everything else unset.
    pub fn for_protocol(kind: ProtocolKind) -> Result<Self> {
        ConfigFile {
            protocol: ProtocolSection {
                kind,
                ..Default::default()
            },
            ..Default::default()
        }
        .resolve()
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        ConfigFile::from_toml_str(text)?.resolve()
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        ConfigFile::from_path(path)?.resolve()
    }

    pub fn validate(&self) -> Result<()> {
        self.constellation.validate()?;
        if self.n_values.is_empty() {
            return Err(Error::Config("sweep needs at least one N".into()));
        }
        if self.n_values.contains(&0) {
            return Err(Error::Config("every N must be >= 1".into()));
        }
        let needs_l = matches!(
            self.study,
            Study::NoiseVsN | Study::SkrVsDistance | Study::Gain | Study::OptimizeN
        );
        if needs_l && self.l_values_km.is_empty() {
            return Err(Error::Config("sweep needs at least one distance".into()));
        }
        if self.mu_values.is_empty() {
            return Err(Error::Config("sweep needs at least one mu".into()));
        }
        for &mu in &self.mu_values {
            ModulatorConfig {
                mu,
                ..self.modulator
            }
            .validate()?;
        }
        self.modulator.validate()?;
        if !(self.v_a.is_finite() && self.v_a > 0.0) {
            return Err(Error::param(format!("v_a must be > 0, got {}", self.v_a)));
        }
        if !(self.eps_single.is_finite() && self.eps_single >= 0.0) {
            return Err(Error::param(format!(
                "eps_single must be >= 0, got {}",
                self.eps_single
            )));
        }
        for &l in &self.l_values_km {
            self.channel.at_distance(l).validate()?;
        }
        self.channel.validate()?;
        Ok(())
    }
}

impl ConfigFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file; a relative output path is taken relative to it.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut file = Self::from_toml_str(&text)?;
        if let (Some(out), Some(dir)) = (&file.output.path, path.parent()) {
            if out.is_relative() {
                file.output.path = Some(dir.join(out));
            }
        }
        Ok(file)
    }

    pub fn resolve(&self) -> Result<SweepSpec> {
        let kind = self.protocol.kind;
        let d = protocol_defaults(kind);
        let mut notes = Vec::new();

        let protocol = match kind {
            ProtocolKind::Qpsk => Protocol::Qpsk,
            ProtocolKind::Qam | ProtocolKind::Qam256 => {
                let levels = match (kind, self.protocol.levels) {
                    (ProtocolKind::Qam256, Some(l)) if l != QAM256_LEVELS => {
                        return Err(Error::Config(format!(
                            "256qam has {QAM256_LEVELS} levels per quadrature, got {l}"
                        )))
                    }
                    (_, Some(l)) => l,
                    (_, None) => QAM256_LEVELS,
                };
                Protocol::Qam {
                    levels,
                    nu: self.protocol.nu.unwrap_or(QAM256_NU),
                }
            }
            ProtocolKind::Gaussian => Protocol::GaussianClipped {
                clip_sigmas: self.protocol.clip_sigmas.unwrap_or(3.0),
            },
        };
        let p = &self.protocol;
        let misplaced = match protocol {
            Protocol::Qpsk => p.levels.is_some() || p.nu.is_some() || p.clip_sigmas.is_some(),
            Protocol::Qam { .. } => p.clip_sigmas.is_some(),
            Protocol::GaussianClipped { .. } => p.levels.is_some() || p.nu.is_some(),
        };
        if misplaced {
            return Err(Error::Config(format!(
                "[protocol] key does not apply to {}",
                protocol.label()
            )));
        }
        let constellation = Constellation::with_convention(
            protocol,
            p.fourth_moment.unwrap_or(protocol.default_convention()),
        )?;

        let m = &self.modulator;
        let base = ModulatorConfig::practical(1, m.mu.unwrap_or(0.01));
        let modulator = ModulatorConfig {
            kappa: m.kappa.unwrap_or(base.kappa),
            theta: m.theta.unwrap_or(base.theta),
            a_sig: m.a_sig.unwrap_or(base.a_sig),
            delta_f: m.delta_f.unwrap_or(base.delta_f),
            intermod: IntermodOptions {
                enabled: m.intermod.unwrap_or(true),
                counting: m.counting.unwrap_or_default(),
                rule: IndexRule {
                    m_excludes_k: m.m_excludes_k.unwrap_or(IndexRule::default().m_excludes_k),
                    w_excludes_k: m.w_excludes_k.unwrap_or(IndexRule::default().w_excludes_k),
                },
            },
            ..base
        };

        let c = &self.channel;
        if kind == ProtocolKind::Qpsk && (c.eta.is_none() || c.v_ele.is_none()) {
            notes.push(
                "qpsk detector efficiency / electronic noise defaulted to the 256qam values".into(),
            );
        }
        if protocol.is_discrete() {
            notes.push("discrete-protocol key rates use the gaussian-equivalent backend".into());
        }
        let channel = ChannelDetector {
            distance_km: 0.0,
            alpha_db_per_km: c.alpha_db_per_km.unwrap_or(0.2),
            eta: c.eta.unwrap_or(d.eta),
            v_ele: c.v_ele.unwrap_or(d.v_ele),
            beta: c.beta.unwrap_or(0.95),
            detection: c.detection.unwrap_or_default(),
            trusted_detector: c.trusted_detector.unwrap_or(true),
        };

        let s = &self.sweep;
        let n_values = match (&s.n_values, s.n_range) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "give either n_values or n_range, not both".into(),
                ))
            }
            (Some(v), None) => v.clone(),
            (None, Some([lo, hi])) => {
                if lo == 0 || lo > hi {
                    return Err(Error::Config(format!("bad n_range [{lo}, {hi}]")));
                }
                (lo..=hi).collect()
            }
            (None, None) => (1..=DEFAULT_MAX_N).collect(),
        };

        let spec = SweepSpec {
            study: s.study.unwrap_or_default(),
            constellation,
            modulator,
            v_a: c.v_a.unwrap_or(d.v_a),
            eps_single: c.eps_single.unwrap_or(d.eps_single),
            channel,
            n_values,
            l_values_km: s.l_values_km.clone().unwrap_or(d.l_values_km),
            mu_values: s.mu_values.clone().unwrap_or(vec![modulator.mu]),
            seed: s.seed.unwrap_or(0),
            samples_per_symbol: s.samples_per_symbol,
            n_symbols: s.n_symbols.unwrap_or(100_000),
            execution: if s.parallel.unwrap_or(true) {
                Execution::Parallel
            } else {
                Execution::Sequential
            },
            exact_total: s.exact_total.unwrap_or(false),
            output: OutputSpec {
                path: self.output.path.clone(),
                format: self.output.format.unwrap_or_default(),
            },
            notes,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_resolves_to_qpsk_defaults() {
        let s = SweepSpec::from_toml_str("").unwrap();
        assert_eq!(s.constellation, Constellation::qpsk());
        assert_eq!(s.v_a, 0.45);
        assert_eq!(s.eps_single, 0.007);
        assert_eq!(s.n_values.len(), DEFAULT_MAX_N);
        assert_eq!(s.l_values_km, vec![5.0, 10.0, 25.0]);
        assert_eq!(s.channel.alpha_db_per_km, 0.2);
        assert!(!s.notes.is_empty());
    }

    #[test]
    fn full_config() {
        let s = SweepSpec::from_toml_str(
            r#"
            [protocol]
            kind = "256qam"
            nu = 0.05
            [modulator]
            mu = 0.02
            counting = "ordered"
            [channel]
            v_a = 4.0
            detection = "homodyne"
            trusted_detector = false
            [sweep]
            study = "optimize-n"
            n_range = [10, 20]
            l_values_km = [30]
            seed = 7
            parallel = false
            [output]
            path = "out.csv"
            format = "json"
            "#,
        )
        .unwrap();
        assert_eq!(
            s.constellation.protocol,
            Protocol::Qam {
                levels: 16,
                nu: 0.05
            }
        );
        assert_eq!(s.modulator.intermod.counting, TupleCounting::Ordered);
        assert_eq!(s.n_values, (10..=20).collect::<Vec<_>>());
        assert_eq!(s.channel.detection, Detection::Homodyne);
        assert!(!s.channel.trusted_detector);
        assert_eq!(s.execution, Execution::Sequential);
        assert_eq!(s.output.format, OutputFormat::Json);
        assert_eq!(s.study, Study::OptimizeN);
    }

    #[test]
    fn rejections() {
        for bad in [
            "[modulator]\nmuu = 0.1",
            "[channel]\neps = 0.1",
            "[sweep]\nn_values = [1]\nn_range = [1, 2]",
            "[sweep]\nn_values = []",
            "[sweep]\nn_values = [0, 1]",
            "[sweep]\nn_range = [5, 2]",
            "[protocol]\nkind = \"qpsk\"\nnu = 0.1",
            "[protocol]\nkind = \"8psk\"",
            "[modulator]\nmu = 0.9",
            "[channel]\nbeta = 1.5",
            "[sweep]\nl_values_km = [-5]",
            "not toml at all [",
        ] {
            let err = SweepSpec::from_toml_str(bad).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{bad}: {err}");
        }
    }
}
