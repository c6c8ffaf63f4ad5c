//! Closed-form modulation noise of an OFDM IQ modulator.
//!
//! For subcarrier `k` with modulation variance `V_A` (SNU):
//!
//! ```text
//! ε_iq      = V_A/4 · (κ² + 1 − 2κ cos θ)
//! ε_third_m = V_A μ⁴/32 · F · { (M1 + M2)² σ2² + 2 (M1 − M2)² σ1⁴ }
//! ε_third_w = V_A μ⁴/32 · F · 2 (W1² + W2² + W3²) σ1⁴
//! ε_mod     = ε_iq + ε_third_m + ε_third_w,      F = 1 + 2κ cos θ + κ²
//! ε_multi   = ε_mod + ε_single
//! ```
//!
//! The X and P quadratures are assumed to carry equal noise, so `ε_mod` is
//! used as a symmetric channel-input-referred excess noise.

use serde::{Deserialize, Serialize};

use crate::constellation::Moments;
use crate::error::{Error, Result};
use crate::exec::{map_range, Execution};
use crate::intermod::{
    count_intermod_with, count_table_with, IndexRule, IntermodCounts, TupleCounting,
};

/// Largest modulation index accepted as "small signal".
pub const MAX_MU: f64 = 0.5;

/// How (and whether) third-order products enter the model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntermodOptions {
    pub enabled: bool,
    pub counting: TupleCounting,
    pub rule: IndexRule,
}

impl Default for IntermodOptions {
    fn default() -> Self {
        IntermodOptions {
            enabled: true,
            counting: TupleCounting::default(),
            rule: IndexRule::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulatorConfig {
    /// Number of subcarriers `N`.
    pub n_total: usize,
    /// Modulation index shared by all subcarriers.
    pub mu: f64,
    /// Gain imbalance.
    pub kappa: f64,
    /// Quadrature skew (rad).
    pub theta: f64,
    /// Field amplitude, arbitrary units.
    pub a_sig: f64,
    /// Subcarrier spacing (Hz).
    pub delta_f: f64,
    pub intermod: IntermodOptions,
}

impl ModulatorConfig {
    /// κ = 0.98, θ = π/50 at the given `N` and `μ`.
    pub fn practical(n_total: usize, mu: f64) -> Self {
        ModulatorConfig {
            n_total,
            mu,
            kappa: 0.98,
            theta: std::f64::consts::PI / 50.0,
            a_sig: 1.0,
            delta_f: 1.0e6,
            intermod: IntermodOptions::default(),
        }
    }

    /// Balanced IQ arms and no intermodulation: zero modulation noise.
    pub fn ideal(n_total: usize, mu: f64) -> Self {
        ModulatorConfig {
            kappa: 1.0,
            theta: 0.0,
            intermod: IntermodOptions {
                enabled: false,
                ..IntermodOptions::default()
            },
            ..Self::practical(n_total, mu)
        }
    }

    pub fn with_n(self, n_total: usize) -> Self {
        ModulatorConfig { n_total, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_total == 0 {
            return Err(Error::param("carrier count N must be >= 1"));
        }
        if !(self.mu > 0.0 && self.mu <= MAX_MU) {
            return Err(Error::param(format!(
                "modulation index must lie in (0, {MAX_MU}], got {}",
                self.mu
            )));
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(Error::param(format!(
                "gain imbalance must be > 0, got {}",
                self.kappa
            )));
        }
        if self.theta.is_nan() || self.theta.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::param(format!(
                "|theta| must be < pi/2, got {}",
                self.theta
            )));
        }
        if !(self.a_sig > 0.0 && self.delta_f > 0.0) {
            return Err(Error::param("a_sig and delta_f must be > 0"));
        }
        Ok(())
    }

    /// κ² + 1 − 2κ cos θ
    pub fn iq_factor(&self) -> f64 {
        self.kappa * self.kappa + 1.0 - 2.0 * self.kappa * self.theta.cos()
    }

    /// 1 + 2κ cos θ + κ²
    pub fn intermod_factor(&self) -> f64 {
        1.0 + 2.0 * self.kappa * self.theta.cos() + self.kappa * self.kappa
    }

    fn check_k(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.n_total {
            return Err(Error::IndexOutOfRange {
                k,
                n_total: self.n_total,
            });
        }
        Ok(())
    }
}

/// Decomposed excess noise of one subcarrier, in SNU.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseBudget {
    pub k: usize,
    pub eps_iq: f64,
    pub eps_third_m: f64,
    pub eps_third_w: f64,
    pub eps_mod: f64,
    pub eps_single: Option<f64>,
    pub eps_multi: Option<f64>,
}

/// Modulation noise of subcarrier `k` from precomputed (ordered) counts.
pub fn budget_from_counts(
    cfg: &ModulatorConfig,
    counts: &IntermodCounts,
    moments: Moments,
    v_a: f64,
) -> NoiseBudget {
    let eps_iq = v_a / 4.0 * cfg.iq_factor();
    let (eps_third_m, eps_third_w) = if cfg.intermod.enabled {
        let c = counts.under(cfg.intermod.counting);
        let (m1, m2) = (c.m1 as f64, c.m2 as f64);
        let (w1, w2, w3) = (c.w1 as f64, c.w2 as f64, c.w3 as f64);
        let s1_4 = moments.sigma1_sq * moments.sigma1_sq;
        let pre = v_a * cfg.mu.powi(4) / 32.0 * cfg.intermod_factor();
        (
            pre * ((m1 + m2).powi(2) * moments.sigma2_sq + 2.0 * (m1 - m2).powi(2) * s1_4),
            pre * 2.0 * (w1 * w1 + w2 * w2 + w3 * w3) * s1_4,
        )
    } else {
        (0.0, 0.0)
    };
    NoiseBudget {
        k: counts.k,
        eps_iq,
        eps_third_m,
        eps_third_w,
        eps_mod: eps_iq + eps_third_m + eps_third_w,
        eps_single: None,
        eps_multi: None,
    }
}

fn check_v_a(v_a: f64) -> Result<()> {
    if !(v_a.is_finite() && v_a > 0.0) {
        return Err(Error::param(format!(
            "modulation variance must be > 0, got {v_a}"
        )));
    }
    Ok(())
}

/// Modulation-noise budget of subcarrier `k`; `eps_single`/`eps_multi` unset.
pub fn eps_mod(cfg: &ModulatorConfig, k: usize, moments: Moments, v_a: f64) -> Result<NoiseBudget> {
    cfg.validate()?;
    cfg.check_k(k)?;
    check_v_a(v_a)?;
    let counts = count_intermod_with(cfg.n_total, k, cfg.intermod.rule)?;
    Ok(budget_from_counts(cfg, &counts, moments, v_a))
}

/// `ε_mod(k) / A_sig²`, with `V_A = 4 A_sig² μ² σ1²` substituted so the
/// result does not depend on the field amplitude.
pub fn eps_mod_ratio(cfg: &ModulatorConfig, k: usize, moments: Moments) -> Result<f64> {
    let v_a_per_a2 = 4.0 * cfg.mu * cfg.mu * moments.sigma1_sq;
    Ok(eps_mod(cfg, k, moments, v_a_per_a2)?.eps_mod)
}

/// Adds the single-carrier excess noise.
pub fn eps_multi(budget: NoiseBudget, eps_single: f64) -> Result<NoiseBudget> {
    if !(eps_single.is_finite() && eps_single >= 0.0) {
        return Err(Error::param(format!(
            "eps_single must be >= 0, got {eps_single}"
        )));
    }
    Ok(NoiseBudget {
        eps_single: Some(eps_single),
        eps_multi: Some(budget.eps_mod + eps_single),
        ..budget
    })
}

/// Budgets for every subcarrier `1..=N`.
pub fn budget_table(
    cfg: &ModulatorConfig,
    moments: Moments,
    v_a: f64,
    exec: Execution,
) -> Result<Vec<NoiseBudget>> {
    cfg.validate()?;
    check_v_a(v_a)?;
    let table = count_table_with(cfg.n_total, cfg.intermod.rule, exec)?;
    Ok(table
        .iter()
        .map(|c| budget_from_counts(cfg, c, moments, v_a))
        .collect())
}

/// The subcarrier with the largest `ε_mod`; ties go to the smallest `k`.
pub fn worst_subcarrier(
    cfg: &ModulatorConfig,
    moments: Moments,
    v_a: f64,
) -> Result<(usize, NoiseBudget)> {
    worst_subcarrier_with(cfg, moments, v_a, Execution::default())
}

pub fn worst_subcarrier_with(
    cfg: &ModulatorConfig,
    moments: Moments,
    v_a: f64,
    exec: Execution,
) -> Result<(usize, NoiseBudget)> {
    let table = budget_table(cfg, moments, v_a, exec)?;
    let worst = pick_worst(&table);
    Ok((worst.k, worst))
}

pub(crate) fn pick_worst(table: &[NoiseBudget]) -> NoiseBudget {
    let mut best = table[0];
    for b in &table[1..] {
        if b.eps_mod > best.eps_mod {
            best = *b;
        }
    }
    best
}

/// Worst-subcarrier budgets for each `N` in `n_values`, in input order.
pub fn worst_over_n(
    base: &ModulatorConfig,
    n_values: &[usize],
    moments: Moments,
    v_a: f64,
    exec: Execution,
) -> Result<Vec<NoiseBudget>> {
    let rows = map_range(exec, n_values.len(), |i| {
        let cfg = base.with_n(n_values[i]);
        // inner tables stay sequential; the sweep is the parallel axis
        worst_subcarrier_with(&cfg, moments, v_a, Execution::Sequential).map(|(_, b)| b)
    });
    rows.into_iter().collect()
}
