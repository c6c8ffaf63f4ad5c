//! Per-subcarrier quadrature distributions and their moments.
//!
//! Three families are supported: QPSK (binary ±1 per quadrature), square
//! M-QAM with Maxwell–Boltzmann shaping (per-quadrature levels on an
//! equispaced odd grid normalized into [−1, 1]), and a Gaussian normalized so
//! that `clip_sigmas` standard deviations map onto amplitude 1.
//!
//! Two definitions of the fourth-order statistic σ2² are in circulation and
//! both are exposed through [`FourthMomentConvention`]:
//!
//! * `RawFourthMoment`: σ2² = E[x⁴]
//! * `VarianceOfSquare`: σ2² = Var(x²) = E[x⁴] − E[x²]²
//!
//! The per-protocol defaults are QPSK → raw (σ2² = 1), QAM and Gaussian →
//! variance of the square.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Levels per quadrature of 256QAM (16 × 16 grid).
pub const QAM256_LEVELS: usize = 16;

/// Maxwell–Boltzmann shaping parameter used for 256QAM.
pub const QAM256_NU: f64 = 0.04;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Protocol {
    Qpsk,
    Qam { levels: usize, nu: f64 },
    GaussianClipped { clip_sigmas: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FourthMomentConvention {
    RawFourthMoment,
    VarianceOfSquare,
}

impl Protocol {
    pub fn default_convention(&self) -> FourthMomentConvention {
        match self {
            Protocol::Qpsk => FourthMomentConvention::RawFourthMoment,
            Protocol::Qam { .. } | Protocol::GaussianClipped { .. } => {
                FourthMomentConvention::VarianceOfSquare
            }
        }
    }

    /// Short label used in output files.
    pub fn label(&self) -> String {
        match self {
            Protocol::Qpsk => "qpsk".into(),
            Protocol::Qam { levels, .. } => format!("{}qam", levels * levels),
            Protocol::GaussianClipped { .. } => "gaussian".into(),
        }
    }

    pub fn is_discrete(&self) -> bool {
        !matches!(self, Protocol::GaussianClipped { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constellation {
    pub protocol: Protocol,
    pub fourth_moment_convention: FourthMomentConvention,
}

/// Second and fourth-order statistics of one quadrature amplitude.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
}

impl Constellation {
    /// Builds a constellation with the protocol's default σ2² convention.
    pub fn new(protocol: Protocol) -> Result<Self> {
        Self::with_convention(protocol, protocol.default_convention())
    }

    pub fn with_convention(protocol: Protocol, convention: FourthMomentConvention) -> Result<Self> {
        let c = Constellation {
            protocol,
            fourth_moment_convention: convention,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn qpsk() -> Self {
        Constellation {
            protocol: Protocol::Qpsk,
            fourth_moment_convention: FourthMomentConvention::RawFourthMoment,
        }
    }

    pub fn qam256(nu: f64) -> Result<Self> {
        Self::new(Protocol::Qam {
            levels: QAM256_LEVELS,
            nu,
        })
    }

    /// Gaussian normalized from (−3σ, 3σ) into (−1, 1).
    pub fn gaussian() -> Self {
        Constellation {
            protocol: Protocol::GaussianClipped { clip_sigmas: 3.0 },
            fourth_moment_convention: FourthMomentConvention::VarianceOfSquare,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.protocol {
            Protocol::Qpsk => Ok(()),
            Protocol::Qam { levels, nu } => {
                if levels < 2 {
                    return Err(Error::param(format!(
                        "QAM needs at least 2 levels, got {levels}"
                    )));
                }
                if !(nu.is_finite() && nu >= 0.0) {
                    return Err(Error::param(format!(
                        "QAM shaping nu must be >= 0, got {nu}"
                    )));
                }
                Ok(())
            }
            Protocol::GaussianClipped { clip_sigmas } => {
                if !(clip_sigmas.is_finite() && clip_sigmas > 0.0) {
                    return Err(Error::param(format!(
                        "clip-sigmas must be > 0, got {clip_sigmas}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Discrete support and probabilities for QPSK and QAM, `None` for the
    /// continuous Gaussian.
    pub fn support(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self.protocol {
            Protocol::Qpsk => Some((vec![-1.0, 1.0], vec![0.5, 0.5])),
            Protocol::Qam { levels, nu } => {
                let x = qam_levels(levels);
                let w: Vec<f64> = x.iter().map(|&xi| (-nu * xi * xi).exp()).collect();
                let z: f64 = w.iter().sum();
                Some((x, w.into_iter().map(|wi| wi / z).collect()))
            }
            Protocol::GaussianClipped { .. } => None,
        }
    }

    /// σ1² and σ2² under the configured convention.
    pub fn moments(&self) -> Result<Moments> {
        self.validate()?;
        let (m2, m4) = match self.protocol {
            Protocol::GaussianClipped { clip_sigmas } => {
                let var = 1.0 / (clip_sigmas * clip_sigmas);
                (var, 3.0 * var * var)
            }
            _ => {
                let (x, p) = self.support().expect("discrete protocol");
                let m2: f64 = x.iter().zip(&p).map(|(xi, pi)| pi * xi * xi).sum();
                let m4: f64 = x.iter().zip(&p).map(|(xi, pi)| pi * xi.powi(4)).sum();
                (m2, m4)
            }
        };
        let sigma2_sq = match self.fourth_moment_convention {
            FourthMomentConvention::RawFourthMoment => m4,
            // Σ (x² − E x²)² ρ written as E[x⁴] − E[x²]², clamped against rounding
            FourthMomentConvention::VarianceOfSquare => (m4 - m2 * m2).max(0.0),
        };
        Ok(Moments {
            sigma1_sq: m2,
            sigma2_sq,
        })
    }

    /// A reusable sampler for this constellation's marginal.
    pub fn sampler(&self) -> Result<QuadratureSampler> {
        self.validate()?;
        let kind = match self.protocol {
            Protocol::Qpsk => SamplerKind::Binary,
            Protocol::Qam { .. } => {
                let (levels, p) = self.support().expect("discrete protocol");
                let index = WeightedIndex::new(&p)
                    .map_err(|e| Error::param(format!("bad QAM weights: {e}")))?;
                SamplerKind::Discrete { levels, index }
            }
            Protocol::GaussianClipped { clip_sigmas } => SamplerKind::Gaussian(
                Normal::new(0.0, 1.0 / clip_sigmas)
                    .map_err(|e| Error::param(format!("bad Gaussian width: {e}")))?,
            ),
        };
        Ok(QuadratureSampler { kind })
    }
}

/// Equispaced levels (2i − L + 1)/(L − 1), i = 0..L; for L = 16 these are the
/// odd multiples ±1/15, ±3/15, …, ±15/15.
pub fn qam_levels(levels: usize) -> Vec<f64> {
    let span = (levels - 1) as f64;
    (0..levels)
        .map(|i| (2.0 * i as f64 - span) / span)
        .collect()
}

#[derive(Clone, Debug)]
enum SamplerKind {
    Binary,
    Discrete {
        levels: Vec<f64>,
        index: WeightedIndex<f64>,
    },
    Gaussian(Normal<f64>),
}

/// Draws i.i.d. quadrature amplitudes in [−1, 1].
#[derive(Clone, Debug)]
pub struct QuadratureSampler {
    kind: SamplerKind,
}

impl QuadratureSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            SamplerKind::Binary => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            SamplerKind::Discrete { levels, index } => levels[index.sample(rng)],
            SamplerKind::Gaussian(normal) => normal.sample(rng).clamp(-1.0, 1.0),
        }
    }
}

/// One draw from `c`'s marginal. Prefer [`Constellation::sampler`] in loops.
pub fn sample_quadrature<R: Rng + ?Sized>(c: &Constellation, rng: &mut R) -> Result<f64> {
    Ok(c.sampler()?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn qpsk_moments_are_unity() {
        let m = Constellation::qpsk().moments().unwrap();
        assert_eq!(m.sigma1_sq, 1.0);
        assert_eq!(m.sigma2_sq, 1.0);
        let vos = Constellation::with_convention(
            Protocol::Qpsk,
            FourthMomentConvention::VarianceOfSquare,
        )
        .unwrap();
        assert_eq!(vos.moments().unwrap().sigma2_sq, 0.0);
    }

    #[test]
    fn gaussian_moments() {
        let m = Constellation::gaussian().moments().unwrap();
        assert!((m.sigma1_sq - 1.0 / 9.0).abs() < 1e-15);
        assert!((m.sigma2_sq - 2.0 / 81.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_qam_closed_form() {
        // Σ_{odd j ≤ 15} j² = 680, Σ j⁴ = 103496 over 8 positive levels
        let m = Constellation::qam256(0.0).unwrap().moments().unwrap();
        let m2 = 680.0 / 8.0 / 225.0;
        let m4 = 103_496.0 / 8.0 / 50_625.0;
        assert!((m.sigma1_sq - m2).abs() < 1e-14);
        assert!((m.sigma2_sq - (m4 - m2 * m2)).abs() < 1e-14);
        assert!((m.sigma1_sq - 0.3778).abs() < 1e-4);
        assert!((m.sigma2_sq - 0.1128).abs() < 1e-4);
    }

    #[test]
    fn shaped_qam_matches_quoted_values() {
        let m = Constellation::qam256(QAM256_NU).unwrap().moments().unwrap();
        assert!((m.sigma1_sq - 0.37).abs() < 0.01, "{m:?}");
        assert!((m.sigma2_sq - 0.11).abs() < 0.01, "{m:?}");
    }

    #[test]
    fn levels_and_weights() {
        let c = Constellation::qam256(QAM256_NU).unwrap();
        let (x, p) = c.support().unwrap();
        assert_eq!(x.len(), 16);
        assert!(x.iter().all(|v| (-1.0..=1.0).contains(v)));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((x[0] + 1.0).abs() < 1e-15 && (x[8] - 1.0 / 15.0).abs() < 1e-15);
        let mean: f64 = x.iter().zip(&p).map(|(a, b)| a * b).sum();
        assert!(mean.abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Constellation::qam256(-0.1).is_err());
        assert!(Constellation::new(Protocol::GaussianClipped { clip_sigmas: 0.0 }).is_err());
        assert!(Constellation::new(Protocol::GaussianClipped { clip_sigmas: -2.0 }).is_err());
        assert!(Constellation::new(Protocol::Qam { levels: 1, nu: 0.0 }).is_err());
    }

    #[test]
    fn nu_monotonicity() {
        let mut last = f64::INFINITY;
        for i in 0..20 {
            let nu = i as f64 * 0.25;
            let s1 = Constellation::qam256(nu)
                .unwrap()
                .moments()
                .unwrap()
                .sigma1_sq;
            assert!(s1 < last, "nu={nu}");
            last = s1;
        }
    }

    #[test]
    fn qpsk_draws_are_balanced() {
        let s = Constellation::qpsk().sampler().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let mut plus = 0usize;
        for _ in 0..n {
            let x = s.sample(&mut rng);
            assert!(x == 1.0 || x == -1.0);
            plus += (x > 0.0) as usize;
        }
        // binomial sd = sqrt(n)/2 ≈ 158
        assert!((plus as f64 - n as f64 / 2.0).abs() < 4.0 * 158.2);
    }

    #[test]
    fn gaussian_draws_stay_clipped() {
        let s = Constellation::gaussian().sampler().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200_000 {
            let x = s.sample(&mut rng);
            assert!((-1.0..=1.0).contains(&x));
        }
    }
}
