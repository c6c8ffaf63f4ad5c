//! Figure-level studies over (N, L, μ) grids.
//!
//! Every study is a pure function of a [`SweepSpec`]; grid points run through
//! [`map_range`] so rows come back in grid order whatever the scheduling.
//! The total rate is the worst-subcarrier bound `N · R_{k_worst}`.

use serde::{Deserialize, Serialize};

use crate::config::{Study, SweepSpec};
use crate::constellation::{Constellation, Moments};
use crate::error::{Error, Result};
use crate::exec::{map_range, Execution};
use crate::intermod::count_table_with;
use crate::noise_model::{
    budget_from_counts, budget_table, eps_mod, pick_worst, worst_over_n, ModulatorConfig,
    NoiseBudget,
};
use crate::security::{null_key_threshold, skr_protocol, Backend, ChannelDetector};
use crate::waveform_oracle::{measure_noise, WaveformRun};

fn backend_of(c: &Constellation) -> Backend {
    if c.protocol.is_discrete() {
        Backend::GaussianEquivalent
    } else {
        Backend::Gaussian
    }
}

/// Worst-subcarrier noise at one (N, L).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseRow {
    pub protocol: String,
    pub backend: String,
    pub n: usize,
    pub l_km: f64,
    pub k_worst: usize,
    pub eps_iq: f64,
    pub eps_third_m: f64,
    pub eps_third_w: f64,
    pub eps_mod: f64,
    pub eps_multi: f64,
    pub threshold: f64,
    pub r_kworst: f64,
}

/// One subcarrier's budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetRow {
    pub protocol: String,
    pub n: usize,
    pub k: usize,
    pub m1: u64,
    pub m2: u64,
    pub w1: u64,
    pub w2: u64,
    pub w3: u64,
    pub eps_iq: f64,
    pub eps_third_m: f64,
    pub eps_third_w: f64,
    pub eps_mod: f64,
    pub eps_multi: f64,
}

/// Worst-subcarrier `ε_mod / A_sig²` at one (N, μ).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub protocol: String,
    pub n: usize,
    pub mu: f64,
    pub k_worst: usize,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub protocol: String,
    pub backend: String,
    pub n: usize,
    pub l_km: f64,
    pub transmittance: f64,
    pub v_a: f64,
    pub k_worst: usize,
    pub eps_mod: f64,
    pub eps_multi: f64,
    pub i_ab: f64,
    pub chi_be: f64,
    pub r_kworst: f64,
    pub r_total: f64,
    pub r_single: f64,
    /// Undefined where the single-carrier rate is zero.
    pub gain: Option<f64>,
    /// `Σ_k R_k`, when requested.
    pub r_total_exact: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimumRow {
    pub protocol: String,
    pub backend: String,
    pub l_km: f64,
    /// `None` when every rate on the grid is zero.
    pub n_opt: Option<usize>,
    pub r_total: f64,
    pub gain: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub optimal_n_per_l: Vec<OptimumRow>,
}

/// Measured against predicted noise for one subcarrier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub protocol: String,
    pub n: usize,
    pub mu: f64,
    pub k: usize,
    pub analytic: f64,
    pub measured: f64,
    pub standard_error: f64,
    pub rel_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Where the rate first vanishes along the N grid at one distance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub l_km: f64,
    pub last_positive_n: Option<usize>,
    pub first_null_n: usize,
}

struct Context {
    moments: Moments,
    protocol: String,
    backend: Backend,
}

fn context(spec: &SweepSpec) -> Result<Context> {
    spec.validate()?;
    Ok(Context {
        moments: spec.constellation.moments()?,
        protocol: spec.constellation.protocol.label(),
        backend: backend_of(&spec.constellation),
    })
}

fn channel_at(spec: &SweepSpec, l: f64) -> ChannelDetector {
    spec.channel.at_distance(l)
}

fn worst_budgets(spec: &SweepSpec, moments: Moments) -> Result<Vec<NoiseBudget>> {
    worst_over_n(
        &spec.modulator,
        &spec.n_values,
        moments,
        spec.v_a,
        spec.execution,
    )
}

/// Worst-subcarrier noise and the null-key threshold for every (N, L).
pub fn run_noise_vs_n(spec: &SweepSpec) -> Result<Vec<NoiseRow>> {
    let ctx = context(spec)?;
    let worst = worst_budgets(spec, ctx.moments)?;
    let thresholds: Vec<f64> = spec
        .l_values_km
        .iter()
        .map(|&l| null_key_threshold(spec.v_a, &channel_at(spec, l)))
        .collect::<Result<_>>()?;
    let n_l = spec.l_values_km.len();
    let rows = map_range(spec.execution, worst.len() * n_l, |idx| {
        let (i, j) = (idx / n_l, idx % n_l);
        let b = &worst[i];
        let l = spec.l_values_km[j];
        let eps_multi = b.eps_mod + spec.eps_single;
        let p = skr_protocol(
            &spec.constellation,
            spec.v_a,
            eps_multi,
            &channel_at(spec, l),
        )?;
        Ok(NoiseRow {
            protocol: ctx.protocol.clone(),
            backend: ctx.backend.label().into(),
            n: spec.n_values[i],
            l_km: l,
            k_worst: b.k,
            eps_iq: b.eps_iq,
            eps_third_m: b.eps_third_m,
            eps_third_w: b.eps_third_w,
            eps_mod: b.eps_mod,
            eps_multi,
            threshold: thresholds[j],
            r_kworst: p.r_k,
        })
    });
    rows.into_iter().collect()
}

/// The null-key crossing along the N grid at each distance; `None` where
/// the rate never vanishes.
pub fn null_key_crossings(rows: &[NoiseRow], l_values_km: &[f64]) -> Vec<Option<Crossing>> {
    l_values_km
        .iter()
        .map(|&l| {
            let mut at_l: Vec<&NoiseRow> = rows.iter().filter(|r| r.l_km == l).collect();
            at_l.sort_by_key(|r| r.n);
            let first = at_l.iter().position(|r| r.r_kworst <= 0.0)?;
            Some(Crossing {
                l_km: l,
                last_positive_n: first.checked_sub(1).map(|i| at_l[i].n),
                first_null_n: at_l[first].n,
            })
        })
        .collect()
}

/// Full per-subcarrier budgets for every N.
pub fn run_budget(spec: &SweepSpec) -> Result<Vec<BudgetRow>> {
    let ctx = context(spec)?;
    let mut out = Vec::new();
    for &n in &spec.n_values {
        let cfg = spec.modulator.with_n(n);
        let counts = count_table_with(n, cfg.intermod.rule, spec.execution)?;
        for c in &counts {
            let b = budget_from_counts(&cfg, c, ctx.moments, spec.v_a);
            let shown = c.under(cfg.intermod.counting);
            out.push(BudgetRow {
                protocol: ctx.protocol.clone(),
                n,
                k: c.k,
                m1: shown.m1,
                m2: shown.m2,
                w1: shown.w1,
                w2: shown.w2,
                w3: shown.w3,
                eps_iq: b.eps_iq,
                eps_third_m: b.eps_third_m,
                eps_third_w: b.eps_third_w,
                eps_mod: b.eps_mod,
                eps_multi: b.eps_mod + spec.eps_single,
            });
        }
    }
    Ok(out)
}

/// Worst-subcarrier ratio `ε_mod / A_sig²` for each (N, μ).
pub fn run_ratio_vs_mu(spec: &SweepSpec) -> Result<Vec<RatioRow>> {
    let ctx = context(spec)?;
    let n_mu = spec.mu_values.len();
    let rows = map_range(spec.execution, spec.n_values.len() * n_mu, |idx| {
        let n = spec.n_values[idx / n_mu];
        let mu = spec.mu_values[idx % n_mu];
        let cfg = ModulatorConfig {
            mu,
            ..spec.modulator.with_n(n)
        };
        let v_a = 4.0 * mu * mu * ctx.moments.sigma1_sq;
        let table = budget_table(&cfg, ctx.moments, v_a, Execution::Sequential)?;
        let w = pick_worst(&table);
        Ok(RatioRow {
            protocol: ctx.protocol.clone(),
            n,
            mu,
            k_worst: w.k,
            ratio: w.eps_mod,
        })
    });
    rows.into_iter().collect()
}

fn r_single(spec: &SweepSpec, l: f64) -> Result<f64> {
    Ok(skr_protocol(
        &spec.constellation,
        spec.v_a,
        spec.eps_single,
        &channel_at(spec, l),
    )?
    .r_k)
}

/// Gain `N R_kworst / R_single`, computed so an equal-noise point gives `N`
/// exactly.
fn gain(n: usize, r_kworst: f64, r_single: f64) -> Option<f64> {
    (r_single > 0.0).then(|| n as f64 * (r_kworst / r_single))
}

fn exact_total(spec: &SweepSpec, moments: Moments, n: usize, ch: &ChannelDetector) -> Result<f64> {
    let cfg = spec.modulator.with_n(n);
    let table = budget_table(&cfg, moments, spec.v_a, Execution::Sequential)?;
    let mut sum = 0.0;
    for b in &table {
        sum += skr_protocol(
            &spec.constellation,
            spec.v_a,
            b.eps_mod + spec.eps_single,
            ch,
        )?
        .r_k;
    }
    Ok(sum)
}

/// Single-subcarrier and total rates for every (N, L).
pub fn run_skr_vs_distance(spec: &SweepSpec) -> Result<SweepResult> {
    let ctx = context(spec)?;
    let worst = worst_budgets(spec, ctx.moments)?;
    let singles: Vec<f64> = spec
        .l_values_km
        .iter()
        .map(|&l| r_single(spec, l))
        .collect::<Result<_>>()?;
    let n_l = spec.l_values_km.len();
    let rows = map_range(spec.execution, worst.len() * n_l, |idx| {
        let (i, j) = (idx / n_l, idx % n_l);
        let n = spec.n_values[i];
        let l = spec.l_values_km[j];
        let b = &worst[i];
        let ch = channel_at(spec, l);
        let eps_multi = b.eps_mod + spec.eps_single;
        let p = skr_protocol(&spec.constellation, spec.v_a, eps_multi, &ch)?;
        let r_total_exact = if spec.exact_total {
            Some(exact_total(spec, ctx.moments, n, &ch)?)
        } else {
            None
        };
        Ok(SweepRow {
            protocol: ctx.protocol.clone(),
            backend: p.backend.label().into(),
            n,
            l_km: l,
            transmittance: p.params.transmittance,
            v_a: spec.v_a,
            k_worst: b.k,
            eps_mod: b.eps_mod,
            eps_multi,
            i_ab: p.i_ab,
            chi_be: p.chi_be,
            r_kworst: p.r_k,
            r_total: n as f64 * p.r_k,
            r_single: singles[j],
            gain: gain(n, p.r_k, singles[j]),
            r_total_exact,
        })
    });
    let rows: Vec<SweepRow> = rows.into_iter().collect::<Result<_>>()?;
    let optimal_n_per_l = optimum_from_rows(&rows, &spec.l_values_km, &ctx);
    Ok(SweepResult {
        rows,
        optimal_n_per_l,
    })
}

/// Same grid as [`run_skr_vs_distance`]; the gain column is the quantity of
/// interest.
pub fn run_gain(spec: &SweepSpec) -> Result<SweepResult> {
    run_skr_vs_distance(spec)
}

fn optimum_from_rows(rows: &[SweepRow], l_values_km: &[f64], ctx: &Context) -> Vec<OptimumRow> {
    l_values_km
        .iter()
        .map(|&l| {
            let mut best: Option<&SweepRow> = None;
            for r in rows.iter().filter(|r| r.l_km == l) {
                let better = match best {
                    None => r.r_total > 0.0,
                    Some(b) => r.r_total > b.r_total || (r.r_total == b.r_total && r.n < b.n),
                };
                if better {
                    best = Some(r);
                }
            }
            OptimumRow {
                protocol: ctx.protocol.clone(),
                backend: ctx.backend.label().into(),
                l_km: l,
                n_opt: best.map(|b| b.n),
                r_total: best.map_or(0.0, |b| b.r_total),
                gain: best.and_then(|b| b.gain),
            }
        })
        .collect()
}

/// Exhaustive argmax of the total rate over the N grid at each distance;
/// ties go to the smallest N.
pub fn optimize_n(spec: &SweepSpec) -> Result<Vec<OptimumRow>> {
    let spec = SweepSpec {
        exact_total: false,
        ..spec.clone()
    };
    Ok(run_skr_vs_distance(&spec)?.optimal_n_per_l)
}

/// Runs the waveform oracle for every (N, μ) and compares each subcarrier
/// with the closed form, passing within `max(10 %, 3 SE)`.
pub fn run_oracle(spec: &SweepSpec) -> Result<Vec<OracleRow>> {
    let ctx = context(spec)?;
    let mut out = Vec::new();
    for &n in &spec.n_values {
        for &mu in &spec.mu_values {
            let cfg = ModulatorConfig {
                mu,
                ..spec.modulator.with_n(n)
            };
            let mut run = WaveformRun::new(cfg, spec.constellation, spec.n_symbols, spec.seed);
            if let Some(s) = spec.samples_per_symbol {
                run.samples_per_symbol = s;
            }
            run.execution = spec.execution;
            out.extend(compare_with_oracle(&run, &ctx.protocol)?);
        }
    }
    Ok(out)
}

/// Relative tolerance of the oracle comparison.
pub const ORACLE_REL_TOL: f64 = 0.10;

/// Standard errors allowed in the oracle comparison.
pub const ORACLE_SE_TOL: f64 = 3.0;

pub fn compare_with_oracle(run: &WaveformRun, protocol: &str) -> Result<Vec<OracleRow>> {
    let moments = run.constellation.moments()?;
    let measured = measure_noise(run)?;
    let cfg = &run.cfg;
    // ⟨X²⟩ = 4 A² μ² σ1² in field units
    let v_a = 4.0 * cfg.a_sig * cfg.a_sig * cfg.mu * cfg.mu * moments.sigma1_sq;
    (1..=cfg.n_total)
        .map(|k| {
            let analytic = eps_mod(cfg, k, moments, v_a)?.eps_mod;
            let m = measured.per_k_delta_var[k - 1];
            let se = measured.standard_errors[k - 1];
            let tolerance = (ORACLE_REL_TOL * analytic).max(ORACLE_SE_TOL * se);
            let rel_error = if analytic > 0.0 {
                (m - analytic) / analytic
            } else {
                f64::NAN
            };
            Ok(OracleRow {
                protocol: protocol.to_string(),
                n: cfg.n_total,
                mu: cfg.mu,
                k,
                analytic,
                measured: m,
                standard_error: se,
                rel_error,
                tolerance,
                pass: (m - analytic).abs() <= tolerance,
            })
        })
        .collect()
}

/// Any study's rows, for uniform emission.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StudyOutput {
    Noise(Vec<NoiseRow>),
    Budget(Vec<BudgetRow>),
    Ratio(Vec<RatioRow>),
    Sweep(Vec<SweepRow>),
    Optimum(Vec<OptimumRow>),
    Oracle(Vec<OracleRow>),
}

impl StudyOutput {
    pub fn len(&self) -> usize {
        match self {
            StudyOutput::Noise(r) => r.len(),
            StudyOutput::Budget(r) => r.len(),
            StudyOutput::Ratio(r) => r.len(),
            StudyOutput::Sweep(r) => r.len(),
            StudyOutput::Optimum(r) => r.len(),
            StudyOutput::Oracle(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Dispatches on `spec.study`.
pub fn run_study(spec: &SweepSpec) -> Result<StudyOutput> {
    Ok(match spec.study {
        Study::NoiseVsN => StudyOutput::Noise(run_noise_vs_n(spec)?),
        Study::Budget => StudyOutput::Budget(run_budget(spec)?),
        Study::RatioVsMu => StudyOutput::Ratio(run_ratio_vs_mu(spec)?),
        Study::SkrVsDistance => StudyOutput::Sweep(run_skr_vs_distance(spec)?.rows),
        Study::Gain => StudyOutput::Sweep(run_gain(spec)?.rows),
        Study::OptimizeN => {
            let rows = optimize_n(spec)?;
            if rows.iter().all(|r| r.n_opt.is_none()) {
                return Err(Error::NoOptimum);
            }
            StudyOutput::Optimum(rows)
        }
        Study::Oracle => StudyOutput::Oracle(run_oracle(spec)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ProtocolKind;

    fn qpsk(n_values: Vec<usize>, l: Vec<f64>) -> SweepSpec {
        SweepSpec {
            n_values,
            l_values_km: l,
            ..SweepSpec::for_protocol(ProtocolKind::Qpsk).unwrap()
        }
    }

    #[test]
    fn noise_grows_with_n() {
        let rows = run_noise_vs_n(&qpsk((1..=100).collect(), vec![25.0])).unwrap();
        assert_eq!(rows.len(), 100);
        for w in rows.windows(2) {
            assert!(w[1].eps_multi >= w[0].eps_multi);
        }
        assert_eq!(rows[0].eps_mod, rows[0].eps_iq);
    }

    #[test]
    fn crossing_brackets_the_zero() {
        let spec = qpsk((1..=200).collect(), vec![25.0]);
        let rows = run_noise_vs_n(&spec).unwrap();
        let c = null_key_crossings(&rows, &spec.l_values_km)[0].unwrap();
        let last = c.last_positive_n.unwrap();
        assert_eq!(last + 1, c.first_null_n);
        let at = |n: usize| rows.iter().find(|r| r.n == n).unwrap();
        assert!(at(last).r_kworst > 0.0 && at(last).eps_multi < at(last).threshold);
        assert_eq!(at(c.first_null_n).r_kworst, 0.0);
    }

    #[test]
    fn ideal_modulator_gain_is_n() {
        let mut spec = qpsk(vec![1, 2, 7, 60], vec![5.0, 10.0]);
        spec.modulator = ModulatorConfig::ideal(1, spec.modulator.mu);
        let res = run_gain(&spec).unwrap();
        for r in &res.rows {
            assert_eq!(r.gain, Some(r.n as f64));
            assert_eq!(r.r_total, r.n as f64 * r.r_kworst);
        }
        let opt = optimize_n(&spec).unwrap();
        assert!(opt.iter().all(|o| o.n_opt == Some(60)));
    }

    #[test]
    fn gain_at_one_carrier_is_below_one() {
        let res = run_gain(&qpsk(vec![1], vec![5.0])).unwrap();
        let g = res.rows[0].gain.unwrap();
        assert!(g <= 1.0 && g > 0.9);
    }

    #[test]
    fn undefined_gain_beyond_cutoff() {
        let mut spec = qpsk(vec![1, 2], vec![50.0]);
        spec.eps_single = 0.3;
        let res = run_gain(&spec).unwrap();
        assert!(res
            .rows
            .iter()
            .all(|r| r.gain.is_none() && r.r_total == 0.0));
        assert!(res.optimal_n_per_l[0].n_opt.is_none());
        spec.study = Study::OptimizeN;
        assert!(run_study(&spec).is_err());
    }

    #[test]
    fn exact_total_dominates_bound() {
        let mut spec = qpsk(vec![10, 40], vec![5.0]);
        spec.exact_total = true;
        for r in run_skr_vs_distance(&spec).unwrap().rows {
            assert!(r.r_total_exact.unwrap() >= r.r_total - 1e-12);
        }
    }

    #[test]
    fn parallel_matches_sequential() {
        let mut spec = qpsk((1..=80).collect(), vec![5.0, 25.0]);
        let a = run_skr_vs_distance(&spec).unwrap();
        spec.execution = Execution::Sequential;
        assert_eq!(a, run_skr_vs_distance(&spec).unwrap());
    }

    #[test]
    fn budget_and_ratio_shapes() {
        let mut spec = qpsk(vec![3, 5], vec![]);
        spec.study = Study::Budget;
        let b = run_budget(&spec).unwrap();
        assert_eq!(b.len(), 8);
        spec.study = Study::RatioVsMu;
        spec.mu_values = vec![0.01, 0.05];
        let r = run_ratio_vs_mu(&spec).unwrap();
        assert_eq!(r.len(), 4);
        assert!(r[1].ratio > r[0].ratio);
    }
}
