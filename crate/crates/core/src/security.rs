//! Asymptotic per-subcarrier secret key rate `R = β I(A:B) − χ(B:E)`.
//!
//! Entanglement-based picture: Alice holds one arm of a two-mode squeezed
//! vacuum of variance `V = V_A + 1`; the other arm crosses a lossy channel
//! with transmittance `T` and channel-input-referred excess noise `ε`.
//! A trusted detector is a beam splitter of transmittance `η` mixing Bob's
//! mode with one arm (F0) of an EPR pair of variance `ν` whose other arm (G)
//! is also outside Eve's control. Eve's information is
//! `χ(B:E) = S(AB) − S(AFG | m_B)`, both entropies read off symplectic
//! eigenvalues of explicit covariance matrices.
//!
//! With an untrusted detector its loss and electronic noise are folded into
//! the channel and Bob's detector becomes ideal.
//!
//! Discrete constellations are evaluated with the same Gaussian machinery at
//! equal `(V_A, ε)`; such rates carry [`Backend::GaussianEquivalent`].

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::constellation::Constellation;
use crate::error::{Error, Result};

/// Tolerance on symplectic eigenvalues below 1.
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// Below this detector loss `1 − η` the noise source would need a huge
/// EPR variance; electronic noise is then modelled as an equivalent loss.
pub const EQUIVALENT_LOSS_CUTOFF: f64 = 1e-6;

/// Upper end of the excess-noise bracket searched by [`null_key_threshold`].
pub const THRESHOLD_BRACKET: f64 = 1.0;

/// Bisection stops once the bracket is narrower than this (SNU).
pub const THRESHOLD_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Detection {
    Homodyne,
    #[default]
    HeterodyneNoSwitch,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelDetector {
    pub distance_km: f64,
    pub alpha_db_per_km: f64,
    pub eta: f64,
    pub v_ele: f64,
    pub beta: f64,
    pub detection: Detection,
    pub trusted_detector: bool,
}

impl ChannelDetector {
    /// α = 0.2 dB/km, η = 0.56, v_ele = 0.15, β = 0.95, heterodyne, trusted.
    pub fn new(distance_km: f64) -> Self {
        ChannelDetector {
            distance_km,
            alpha_db_per_km: 0.2,
            eta: 0.56,
            v_ele: 0.15,
            beta: 0.95,
            detection: Detection::HeterodyneNoSwitch,
            trusted_detector: true,
        }
    }

    /// Ideal detector over a lossless link.
    pub fn lossless() -> Self {
        ChannelDetector {
            eta: 1.0,
            v_ele: 0.0,
            beta: 1.0,
            ..Self::new(0.0)
        }
    }

    pub fn at_distance(self, distance_km: f64) -> Self {
        ChannelDetector {
            distance_km,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.distance_km.is_finite() && self.distance_km >= 0.0) {
            return Err(Error::param(format!(
                "distance must be >= 0 km, got {}",
                self.distance_km
            )));
        }
        if !(self.alpha_db_per_km.is_finite() && self.alpha_db_per_km >= 0.0) {
            return Err(Error::param(format!(
                "fiber loss must be >= 0 dB/km, got {}",
                self.alpha_db_per_km
            )));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::param(format!(
                "eta must lie in (0, 1], got {}",
                self.eta
            )));
        }
        if !(self.v_ele.is_finite() && self.v_ele >= 0.0) {
            return Err(Error::param(format!(
                "v_ele must be >= 0, got {}",
                self.v_ele
            )));
        }
        if !(self.beta >= 0.0 && self.beta <= 1.0) {
            return Err(Error::param(format!(
                "beta must lie in [0, 1], got {}",
                self.beta
            )));
        }
        if self.transmittance_unchecked() <= 0.0 {
            return Err(Error::param("channel transmittance underflows to zero"));
        }
        Ok(())
    }

    fn transmittance_unchecked(&self) -> f64 {
        10f64.powf(-self.alpha_db_per_km * self.distance_km / 10.0)
    }

    pub fn transmittance(&self) -> Result<f64> {
        transmittance(self)
    }
}

/// `T = 10^(−αL/10)`.
pub fn transmittance(ch: &ChannelDetector) -> Result<f64> {
    ch.validate()?;
    Ok(ch.transmittance_unchecked())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    /// Gaussian modulation analysed as such.
    Gaussian,
    /// Discrete constellation analysed as if it were Gaussian.
    GaussianEquivalent,
}

impl Backend {
    pub fn label(self) -> &'static str {
        match self {
            Backend::Gaussian => "gaussian",
            Backend::GaussianEquivalent => "gaussian-equivalent",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkrParams {
    pub v_a: f64,
    pub eps: f64,
    pub transmittance: f64,
    pub channel: ChannelDetector,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkrPoint {
    /// Subcarrier index, when the point belongs to one.
    pub k: Option<usize>,
    pub i_ab: f64,
    pub chi_be: f64,
    pub r_k: f64,
    pub backend: Backend,
    pub params: SkrParams,
}

impl SkrPoint {
    pub fn with_k(self, k: usize) -> Self {
        SkrPoint { k: Some(k), ..self }
    }
}

/// `g(ν) = ((ν+1)/2) log2((ν+1)/2) − ((ν−1)/2) log2((ν−1)/2)`, zero at ν ≤ 1.
pub fn entropy_g(nu: f64) -> f64 {
    let x = (nu - 1.0) / 2.0;
    if x <= 0.0 {
        return 0.0;
    }
    (x + 1.0) * (x + 1.0).log2() - x * x.log2()
}

/// Symplectic eigenvalues of a `2n × 2n` covariance matrix in
/// `(x1, p1, x2, p2, …)` ordering, ascending. Each is the modulus of an
/// eigenvalue pair of `γ^½ Ω γ^½`.
pub fn symplectic_eigenvalues(gamma: &DMatrix<f64>) -> Result<Vec<f64>> {
    let dim = gamma.nrows();
    if dim == 0 || !dim.is_multiple_of(2) || gamma.ncols() != dim {
        return Err(Error::param(format!(
            "covariance matrix must be 2n x 2n, got {}x{}",
            dim,
            gamma.ncols()
        )));
    }
    let sym = (gamma + gamma.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let min_eig = eig.eigenvalues.min();
    if min_eig <= 0.0 {
        return Err(Error::Unphysical(min_eig));
    }
    let sqrt_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let root = &eig.eigenvectors * sqrt_diag * eig.eigenvectors.transpose();
    let mut omega = DMatrix::zeros(dim, dim);
    for i in 0..dim / 2 {
        omega[(2 * i, 2 * i + 1)] = 1.0;
        omega[(2 * i + 1, 2 * i)] = -1.0;
    }
    let k = &root * omega * &root;
    let ktk = k.transpose() * &k;
    let mut sq: Vec<f64> = SymmetricEigen::new((&ktk + ktk.transpose()) * 0.5)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    sq.sort_by(f64::total_cmp);
    // eigenvalues of KᵀK come in equal pairs ν²
    let nus: Vec<f64> = sq
        .chunks(2)
        .map(|p| ((p[0] + p[1]) / 2.0).max(0.0).sqrt())
        .collect();
    if let Some(&low) = nus.first() {
        if low < 1.0 - PHYSICALITY_TOL {
            return Err(Error::Unphysical(low));
        }
    }
    Ok(nus)
}

/// von Neumann entropy (bits) of a Gaussian state.
pub fn gaussian_entropy(gamma: &DMatrix<f64>) -> Result<f64> {
    Ok(symplectic_eigenvalues(gamma)?
        .into_iter()
        .map(entropy_g)
        .sum())
}

fn validate_inputs(v_a: f64, eps: f64, ch: &ChannelDetector) -> Result<f64> {
    if !(v_a.is_finite() && v_a > 0.0) {
        return Err(Error::param(format!(
            "modulation variance must be > 0, got {v_a}"
        )));
    }
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::param(format!(
            "excess noise must be >= 0, got {eps}"
        )));
    }
    transmittance(ch)
}

/// Places `block` (2x2) at mode pair (i, j) and its transpose at (j, i).
fn set_block(m: &mut DMatrix<f64>, i: usize, j: usize, a: f64, d: f64) {
    m[(2 * i, 2 * j)] = a;
    m[(2 * i + 1, 2 * j + 1)] = d;
    m[(2 * j, 2 * i)] = a;
    m[(2 * j + 1, 2 * i + 1)] = d;
}

/// Rate for a Gaussian-modulated state.
pub fn skr_gaussian(v_a: f64, eps: f64, ch: &ChannelDetector) -> Result<SkrPoint> {
    let t_phys = validate_inputs(v_a, eps, ch)?;
    let (t, e, eta, v_el) = if ch.trusted_detector {
        (t_phys, eps, ch.eta, ch.v_ele)
    } else {
        let det_noise = match ch.detection {
            Detection::HeterodyneNoSwitch => 2.0 * ch.v_ele,
            Detection::Homodyne => ch.v_ele,
        };
        let t = ch.eta * t_phys;
        (t, eps + det_noise / t, 1.0, 0.0)
    };
    let het = ch.detection == Detection::HeterodyneNoSwitch;

    // Detector as beam splitter η plus an EPR(ν) noise source.
    let (eta, nu) = if v_el == 0.0 {
        (eta, 1.0)
    } else if 1.0 - eta < EQUIVALENT_LOSS_CUTOFF {
        // electronic noise alone: the equivalent pure-loss detector
        let eta_eq = if het {
            2.0 / (2.0 + 2.0 * v_el)
        } else {
            1.0 / (1.0 + v_el)
        };
        (eta_eq, 1.0)
    } else if het {
        (eta, 1.0 + 2.0 * v_el / (1.0 - eta))
    } else {
        (eta, 1.0 + v_el / (1.0 - eta))
    };

    let v = v_a + 1.0;
    let b = t * (v - 1.0) + 1.0 + t * e;
    let c = (t * (v * v - 1.0)).sqrt();

    // AB state, modes (A, B)
    let mut g_ab = DMatrix::zeros(4, 4);
    set_block(&mut g_ab, 0, 0, v, v);
    set_block(&mut g_ab, 1, 1, b, b);
    set_block(&mut g_ab, 0, 1, c, -c);
    let s_ab = gaussian_entropy(&g_ab)?;

    // After the detector beam splitter, modes (A, B', F', G)
    let (se, ce) = (eta.sqrt(), (1.0 - eta).sqrt());
    let nz = (nu * nu - 1.0).max(0.0).sqrt();
    let vb = eta * b + (1.0 - eta) * nu;
    let vf = (1.0 - eta) * b + eta * nu;
    let mut g = DMatrix::zeros(8, 8);
    set_block(&mut g, 0, 0, v, v);
    set_block(&mut g, 1, 1, vb, vb);
    set_block(&mut g, 2, 2, vf, vf);
    set_block(&mut g, 3, 3, nu, nu);
    set_block(&mut g, 0, 1, se * c, -se * c);
    set_block(&mut g, 0, 2, -ce * c, ce * c);
    let bf = se * ce * (nu - b);
    set_block(&mut g, 1, 2, bf, bf);
    set_block(&mut g, 1, 3, ce * nz, -ce * nz);
    set_block(&mut g, 2, 3, se * nz, -se * nz);

    // Condition (A, F', G) on Bob's measurement of B'.
    let keep = [0usize, 1, 4, 5, 6, 7];
    let meas = [2usize, 3];
    let g_r = g.select_rows(&keep).select_columns(&keep);
    let sigma = g.select_rows(&keep).select_columns(&meas);
    let g_m = g.select_rows(&meas).select_columns(&meas);
    let cond = if het {
        let inv = (g_m + DMatrix::identity(2, 2))
            .try_inverse()
            .ok_or_else(|| Error::param("singular heterodyne block"))?;
        &g_r - &sigma * inv * sigma.transpose()
    } else {
        let mut pi = DMatrix::zeros(2, 2);
        pi[(0, 0)] = 1.0 / vb;
        &g_r - &sigma * pi * sigma.transpose()
    };
    let s_cond = gaussian_entropy(&cond)?;
    let chi_be = (s_ab - s_cond).max(0.0);

    // Bob's outcome variance, unconditioned and given Alice's heterodyne.
    let vacuum = if het { 1.0 } else { 0.0 };
    let v_y = vb + vacuum;
    let v_y_a = vb - eta * c * c / (v + 1.0) + vacuum;
    let mut i_ab = (v_y / v_y_a).log2();
    if !het {
        i_ab *= 0.5;
    }
    let i_ab = i_ab.max(0.0);

    Ok(SkrPoint {
        k: None,
        i_ab,
        chi_be,
        r_k: (ch.beta * i_ab - chi_be).max(0.0),
        backend: Backend::Gaussian,
        params: SkrParams {
            v_a,
            eps,
            transmittance: t_phys,
            channel: *ch,
        },
    })
}

/// Rate for a given constellation; discrete ones use the Gaussian-equivalent
/// backend and are labelled so.
pub fn skr_protocol(
    protocol: &Constellation,
    v_a: f64,
    eps: f64,
    ch: &ChannelDetector,
) -> Result<SkrPoint> {
    protocol.validate()?;
    let mut p = skr_gaussian(v_a, eps, ch)?;
    if protocol.protocol.is_discrete() {
        p.backend = Backend::GaussianEquivalent;
    }
    Ok(p)
}

/// Excess noise at which the rate first vanishes, by bisection on
/// `[0, THRESHOLD_BRACKET]`.
pub fn null_key_threshold(v_a: f64, ch: &ChannelDetector) -> Result<f64> {
    let rate = |eps: f64| skr_gaussian(v_a, eps, ch).map(|p| p.r_k);
    if rate(0.0)? <= 0.0 {
        return Ok(0.0);
    }
    if rate(THRESHOLD_BRACKET)? > 0.0 {
        return Err(Error::NoCrossing(THRESHOLD_BRACKET));
    }
    let (mut lo, mut hi) = (0.0, THRESHOLD_BRACKET);
    while hi - lo > THRESHOLD_TOL {
        let mid = 0.5 * (lo + hi);
        if rate(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
