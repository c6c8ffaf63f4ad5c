//! Waveform-level Monte Carlo check of the closed-form noise model.
//!
//! One OFDM symbol is synthesized at baseband from the IQ-modulator field
//!
//! ```text
//! E(t) = 2A { G1 sin[Σ γ_k cos(ω_k t + φ_k)] + j G2 sin[Σ γ_k sin(ω_k t + φ_k)] }
//! G1 = (1 + κ e^{jθ})/2,  G2 = (1 + κ e^{−jθ})/2,  γ_k e^{jφ_k} = μ (I_k + j Q_k)
//! ```
//!
//! and each subcarrier is recovered by projecting onto the DFT grid at ±f_k:
//! `X = Re(a₊ + a₋)`, `P = Im(a₊ − a₋)`, which returns `2 A μ I_k` for an
//! ideal modulator. The extra noise is `ΔX = X − 2 A μ I_k`, so IQ imbalance
//! shows up as noise exactly as in the analytic model.
//!
//! Batches of symbols draw from their own ChaCha stream `(seed, batch)`, so a
//! run is bit-reproducible whatever the thread schedule.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bessel::jacobi_anger_terms;
use crate::constellation::{Constellation, QuadratureSampler};
use crate::error::{Error, Result};
use crate::exec::{map_range, Execution};
use crate::noise_model::ModulatorConfig;

/// Symbols per reproducible RNG stream.
pub const BATCH_SYMBOLS: usize = 1024;

/// Fewest symbols for which a variance is reported.
pub const MIN_REPORTED_SYMBOLS: usize = 1000;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WaveformRun {
    pub cfg: ModulatorConfig,
    pub constellation: Constellation,
    pub samples_per_symbol: usize,
    pub n_symbols: usize,
    pub rng_seed: u64,
    pub bessel_truncation_order: usize,
    #[serde(default)]
    pub execution: Execution,
}

impl WaveformRun {
    /// Defaults: 8N samples per symbol (at least 16), truncation order 8.
    pub fn new(
        cfg: ModulatorConfig,
        constellation: Constellation,
        n_symbols: usize,
        rng_seed: u64,
    ) -> Self {
        WaveformRun {
            samples_per_symbol: (8 * cfg.n_total).max(16),
            cfg,
            constellation,
            n_symbols,
            rng_seed,
            bessel_truncation_order: 8,
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.cfg.validate()?;
        self.constellation.validate()?;
        if self.samples_per_symbol < 4 * self.cfg.n_total {
            return Err(Error::param(format!(
                "samples_per_symbol {} < 4N = {}",
                self.samples_per_symbol,
                4 * self.cfg.n_total
            )));
        }
        if self.n_symbols == 0 {
            return Err(Error::param("n_symbols must be >= 1"));
        }
        if self.bessel_truncation_order == 0 {
            return Err(Error::param("bessel truncation order must be >= 1"));
        }
        Ok(())
    }

    /// Sample instants within one symbol of duration 1/Δf.
    pub fn sample_times(&self) -> Vec<f64> {
        let dt = 1.0 / (self.samples_per_symbol as f64 * self.cfg.delta_f);
        (0..self.samples_per_symbol)
            .map(|j| j as f64 * dt)
            .collect()
    }

    fn gains(&self) -> (Complex64, Complex64) {
        let k = self.cfg.kappa;
        let th = self.cfg.theta;
        (
            (Complex64::new(1.0, 0.0) + Complex64::from_polar(k, th)) / 2.0,
            (Complex64::new(1.0, 0.0) + Complex64::from_polar(k, -th)) / 2.0,
        )
    }
}

/// cos/sin of ω_k t_j for k = 1..=N over one symbol.
struct Grid {
    n: usize,
    s: usize,
    /// [j * n + k]
    cos_jk: Vec<f64>,
    sin_jk: Vec<f64>,
    /// [k * s + j]
    cos_kj: Vec<f64>,
    sin_kj: Vec<f64>,
}

impl Grid {
    fn new(n: usize, s: usize) -> Self {
        let mut g = Grid {
            n,
            s,
            cos_jk: vec![0.0; n * s],
            sin_jk: vec![0.0; n * s],
            cos_kj: vec![0.0; n * s],
            sin_kj: vec![0.0; n * s],
        };
        for k in 0..n {
            for j in 0..s {
                // reduce k·j mod s before scaling to keep the phase exact
                let phase = 2.0 * PI * (((k + 1) * j) % s) as f64 / s as f64;
                let (sn, cs) = phase.sin_cos();
                g.cos_jk[j * n + k] = cs;
                g.sin_jk[j * n + k] = sn;
                g.cos_kj[k * s + j] = cs;
                g.sin_kj[k * s + j] = sn;
            }
        }
        g
    }

    #[allow(clippy::needless_range_loop)]
    fn synthesize(&self, run: &WaveformRun, symbol: &[Complex64], out: &mut [Complex64]) {
        let (g1, g2) = run.gains();
        let amp = 2.0 * run.cfg.a_sig;
        let mu = run.cfg.mu;
        for j in 0..self.s {
            let c = &self.cos_jk[j * self.n..(j + 1) * self.n];
            let sn = &self.sin_jk[j * self.n..(j + 1) * self.n];
            let mut i_s = 0.0;
            let mut q_s = 0.0;
            for k in 0..self.n {
                let (i, q) = (symbol[k].re, symbol[k].im);
                i_s += i * c[k] - q * sn[k];
                q_s += i * sn[k] + q * c[k];
            }
            out[j] = amp * (g1 * (mu * i_s).sin() + Complex64::i() * g2 * (mu * q_s).sin());
        }
    }

    /// Returns (a₊, a₋) for subcarrier index `k0` (0-based).
    fn project(&self, field: &[Complex64], k0: usize) -> (Complex64, Complex64) {
        let c = &self.cos_kj[k0 * self.s..(k0 + 1) * self.s];
        let sn = &self.sin_kj[k0 * self.s..(k0 + 1) * self.s];
        let mut u = Complex64::new(0.0, 0.0);
        let mut v = Complex64::new(0.0, 0.0);
        for j in 0..self.s {
            u += field[j] * c[j];
            v += field[j] * sn[j];
        }
        let scale = 1.0 / self.s as f64;
        let ju = Complex64::i() * v;
        ((u - ju) * scale, (u + ju) * scale)
    }

    fn quadratures(&self, field: &[Complex64], k0: usize) -> (f64, f64) {
        let (ap, am) = self.project(field, k0);
        ((ap + am).re, (ap - am).im)
    }
}

fn check_symbol(run: &WaveformRun, symbol: &[Complex64]) -> Result<()> {
    if symbol.len() != run.cfg.n_total {
        return Err(Error::param(format!(
            "symbol has {} subcarrier draws, expected {}",
            symbol.len(),
            run.cfg.n_total
        )));
    }
    Ok(())
}

/// Complex baseband field of one symbol; `symbol[k−1] = I_k + j Q_k`.
pub fn synthesize_field(run: &WaveformRun, symbol: &[Complex64]) -> Result<Vec<Complex64>> {
    run.validate()?;
    check_symbol(run, symbol)?;
    let grid = Grid::new(run.cfg.n_total, run.samples_per_symbol);
    let mut out = vec![Complex64::new(0.0, 0.0); run.samples_per_symbol];
    grid.synthesize(run, symbol, &mut out);
    Ok(out)
}

/// Recovered `(X_k, P_k)` of subcarrier `k` (1-based).
pub fn demodulate_subcarrier(
    field: &[Complex64],
    run: &WaveformRun,
    k: usize,
) -> Result<(f64, f64)> {
    if field.len() != run.samples_per_symbol {
        return Err(Error::param(format!(
            "field has {} samples, expected {}",
            field.len(),
            run.samples_per_symbol
        )));
    }
    if k == 0 || k > run.cfg.n_total {
        return Err(Error::IndexOutOfRange {
            k,
            n_total: run.cfg.n_total,
        });
    }
    if 2 * k >= run.samples_per_symbol {
        return Err(Error::param(format!(
            "subcarrier {k} is above Nyquist for {} samples",
            run.samples_per_symbol
        )));
    }
    let s = run.samples_per_symbol;
    let mut u = Complex64::new(0.0, 0.0);
    let mut v = Complex64::new(0.0, 0.0);
    for (j, e) in field.iter().enumerate() {
        let (sn, cs) = (2.0 * PI * ((k * j) % s) as f64 / s as f64).sin_cos();
        u += e * cs;
        v += e * sn;
    }
    let ap = (u - Complex64::i() * v) / s as f64;
    let am = (u + Complex64::i() * v) / s as f64;
    Ok(((ap + am).re, (ap - am).im))
}

/// Truncated Jacobi–Anger evaluation of the same field, keeping Bessel
/// orders `|p| ≤ truncation` on every subcarrier.
pub fn bessel_series_field(
    run: &WaveformRun,
    symbol: &[Complex64],
    truncation: usize,
) -> Result<Vec<Complex64>> {
    if truncation < 1 {
        return Err(Error::param("truncation order must be >= 1"));
    }
    run.validate()?;
    check_symbol(run, symbol)?;
    let p_max = truncation as i32;
    let terms: Vec<(Vec<f64>, f64)> = symbol
        .iter()
        .map(|c| {
            let gamma = run.cfg.mu * c.norm();
            (jacobi_anger_terms(gamma, truncation), c.arg())
        })
        .collect();
    let (g1, g2) = run.gains();
    let amp = 2.0 * run.cfg.a_sig;
    let s = run.samples_per_symbol;
    let out = (0..s)
        .map(|j| {
            // e^{jx cos ψ} = Σ j^p J_p(x) e^{jpψ},  e^{jx sin ψ} = Σ J_p(x) e^{jpψ}
            let mut prod_i = Complex64::new(1.0, 0.0);
            let mut prod_q = Complex64::new(1.0, 0.0);
            for (k0, (jp, phi)) in terms.iter().enumerate() {
                let psi = 2.0 * PI * (((k0 + 1) * j) % s) as f64 / s as f64 + phi;
                let mut sum_i = Complex64::new(0.0, 0.0);
                let mut sum_q = Complex64::new(0.0, 0.0);
                for p in -p_max..=p_max {
                    let e = Complex64::from_polar(jp[(p + p_max) as usize], p as f64 * psi);
                    sum_q += e;
                    sum_i += Complex64::i().powi(p) * e;
                }
                prod_i *= sum_i;
                prod_q *= sum_q;
            }
            amp * (g1 * prod_i.im + Complex64::i() * g2 * prod_q.im)
        })
        .collect();
    Ok(out)
}

/// Monte Carlo estimate of the per-subcarrier extra noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasuredNoise {
    pub n_symbols: usize,
    /// ⟨ΔX_k²⟩ in field units, element `k − 1`.
    pub per_k_delta_var: Vec<f64>,
    /// ⟨ΔP_k²⟩ in field units.
    pub per_k_delta_var_p: Vec<f64>,
    /// ⟨X_k²⟩ as measured.
    pub per_k_signal_var: Vec<f64>,
    /// Standard errors of `per_k_delta_var`.
    pub standard_errors: Vec<f64>,
    pub standard_errors_p: Vec<f64>,
}

impl MeasuredNoise {
    pub fn n_total(&self) -> usize {
        self.per_k_delta_var.len()
    }

    /// ΔX variances rescaled to SNU through the measured signal variance.
    pub fn delta_var_snu(&self, v_a: f64) -> Vec<f64> {
        self.per_k_delta_var
            .iter()
            .zip(&self.per_k_signal_var)
            .map(|(d, s)| d / s * v_a)
            .collect()
    }
}

#[derive(Clone, Default)]
struct Accumulator {
    dx2: Vec<f64>,
    dx4: Vec<f64>,
    dp2: Vec<f64>,
    dp4: Vec<f64>,
    x2: Vec<f64>,
    count: usize,
}

impl Accumulator {
    fn new(n: usize) -> Self {
        Accumulator {
            dx2: vec![0.0; n],
            dx4: vec![0.0; n],
            dp2: vec![0.0; n],
            dp4: vec![0.0; n],
            x2: vec![0.0; n],
            count: 0,
        }
    }

    fn merge(&mut self, other: &Accumulator) {
        for (dst, src) in [
            (&mut self.dx2, &other.dx2),
            (&mut self.dx4, &other.dx4),
            (&mut self.dp2, &other.dp2),
            (&mut self.dp4, &other.dp4),
            (&mut self.x2, &other.x2),
        ] {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
        self.count += other.count;
    }
}

#[allow(clippy::needless_range_loop)]
fn run_batch(
    run: &WaveformRun,
    grid: &Grid,
    sampler: &QuadratureSampler,
    batch: usize,
    len: usize,
) -> Accumulator {
    let n = run.cfg.n_total;
    let mut rng = ChaCha8Rng::seed_from_u64(run.rng_seed);
    rng.set_stream(batch as u64);
    let mut acc = Accumulator::new(n);
    let mut symbol = vec![Complex64::new(0.0, 0.0); n];
    let mut field = vec![Complex64::new(0.0, 0.0); run.samples_per_symbol];
    let scale = 2.0 * run.cfg.a_sig * run.cfg.mu;
    for _ in 0..len {
        for c in symbol.iter_mut() {
            let i = sampler.sample(&mut rng);
            let q = sampler.sample(&mut rng);
            *c = Complex64::new(i, q);
        }
        grid.synthesize(run, &symbol, &mut field);
        for k0 in 0..n {
            let (x, p) = grid.quadratures(&field, k0);
            let dx = x - scale * symbol[k0].re;
            let dp = p - scale * symbol[k0].im;
            acc.dx2[k0] += dx * dx;
            acc.dx4[k0] += dx * dx * dx * dx;
            acc.dp2[k0] += dp * dp;
            acc.dp4[k0] += dp * dp * dp * dp;
            acc.x2[k0] += x * x;
        }
    }
    acc.count = len;
    acc
}

/// Runs the Monte Carlo over `run.n_symbols` symbols.
pub fn measure_noise(run: &WaveformRun) -> Result<MeasuredNoise> {
    run.validate()?;
    if run.n_symbols < MIN_REPORTED_SYMBOLS {
        return Err(Error::param(format!(
            "need at least {MIN_REPORTED_SYMBOLS} symbols for a variance estimate, got {}",
            run.n_symbols
        )));
    }
    let n = run.cfg.n_total;
    let grid = Grid::new(n, run.samples_per_symbol);
    let sampler = run.constellation.sampler()?;
    let n_batches = run.n_symbols.div_ceil(BATCH_SYMBOLS);
    let parts = map_range(run.execution, n_batches, |b| {
        let len = BATCH_SYMBOLS.min(run.n_symbols - b * BATCH_SYMBOLS);
        run_batch(run, &grid, &sampler, b, len)
    });
    let mut total = Accumulator::new(n);
    for p in &parts {
        total.merge(p);
    }
    let m = total.count as f64;
    let se = |s2: &[f64], s4: &[f64]| -> Vec<f64> {
        s2.iter()
            .zip(s4)
            .map(|(a, b)| {
                let mean = a / m;
                let var = (b / m - mean * mean).max(0.0) * m / (m - 1.0);
                (var / m).sqrt()
            })
            .collect()
    };
    Ok(MeasuredNoise {
        n_symbols: total.count,
        per_k_delta_var: total.dx2.iter().map(|v| v / m).collect(),
        per_k_delta_var_p: total.dp2.iter().map(|v| v / m).collect(),
        per_k_signal_var: total.x2.iter().map(|v| v / m).collect(),
        standard_errors: se(&total.dx2, &total.dx4),
        standard_errors_p: se(&total.dp2, &total.dp4),
    })
}

/// Writes `sample,t,re,im` for one synthesized symbol.
pub fn write_time_series_csv<W: Write>(
    run: &WaveformRun,
    field: &[Complex64],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sample", "t", "re", "im"])?;
    for (j, (t, e)) in run.sample_times().iter().zip(field).enumerate() {
        w.write_record([
            j.to_string(),
            t.to_string(),
            e.re.to_string(),
            e.im.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `bin,freq_hz,re,im` of the symbol's DFT (bins in −S/2..S/2).
pub fn write_spectrum_csv<W: Write>(run: &WaveformRun, field: &[Complex64], out: W) -> Result<()> {
    let s = field.len() as i64;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bin", "freq_hz", "re", "im"])?;
    for bin in (-s / 2)..(s - s / 2) {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, e) in field.iter().enumerate() {
            let idx = (bin * j as i64).rem_euclid(s);
            acc += e * Complex64::from_polar(1.0, -2.0 * PI * idx as f64 / s as f64);
        }
        acc /= s as f64;
        w.write_record([
            bin.to_string(),
            (bin as f64 * run.cfg.delta_f).to_string(),
            acc.re.to_string(),
            acc.im.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ideal_run(n: usize, mu: f64) -> WaveformRun {
        WaveformRun::new(
            ModulatorConfig::ideal(n, mu),
            Constellation::qpsk(),
            2000,
            11,
        )
    }

    #[test]
    fn vanishing_drive_gives_vanishing_field() {
        let run = ideal_run(1, 1e-9);
        let f = synthesize_field(&run, &[Complex64::new(1.0, -1.0)]).unwrap();
        assert!(f.iter().all(|e| e.norm() < 1e-8));
    }

    #[test]
    fn ideal_field_matches_linear_superposition() {
        let mu = 0.01;
        let run = ideal_run(4, mu);
        let sym = [
            Complex64::new(1.0, -1.0),
            Complex64::new(-0.3, 0.5),
            Complex64::new(0.2, 0.9),
            Complex64::new(-1.0, -0.1),
        ];
        let f = synthesize_field(&run, &sym).unwrap();
        let s = run.samples_per_symbol;
        for (j, e) in f.iter().enumerate() {
            let mut lin = Complex64::new(0.0, 0.0);
            for (k0, c) in sym.iter().enumerate() {
                lin += 2.0
                    * mu
                    * c
                    * Complex64::from_polar(1.0, 2.0 * PI * ((k0 + 1) * j) as f64 / s as f64);
            }
            // residual is the cubic term, at most 2·√2·(μ Σ|c_k|)³/6
            assert!((e - lin).norm() < 1e-4, "j={j}");
        }
    }

    #[test]
    fn field_is_odd_in_symbol() {
        let run = WaveformRun::new(
            ModulatorConfig::practical(3, 0.05),
            Constellation::qpsk(),
            2000,
            1,
        );
        let sym = [
            Complex64::new(1.0, -1.0),
            Complex64::new(-1.0, -1.0),
            Complex64::new(1.0, 1.0),
        ];
        let neg: Vec<_> = sym.iter().map(|c| -c).collect();
        let a = synthesize_field(&run, &sym).unwrap();
        let b = synthesize_field(&run, &neg).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x + y).norm() < 1e-15);
        }
    }

    #[test]
    fn single_tone_demodulation() {
        let mu = 0.01;
        let run = ideal_run(8, mu);
        let mut sym = vec![Complex64::new(0.0, 0.0); 8];
        sym[2] = Complex64::new(1.0, 0.0);
        let f = synthesize_field(&run, &sym).unwrap();
        let (x, p) = demodulate_subcarrier(&f, &run, 3).unwrap();
        assert!((x / (2.0 * mu) - 1.0).abs() < mu * mu);
        assert!(p.abs() < 1e-15);
        // fast path agrees
        let grid = Grid::new(8, run.samples_per_symbol);
        let (xg, pg) = grid.quadratures(&f, 2);
        assert!((x - xg).abs() < 1e-15 && (p - pg).abs() < 1e-15);
        // a pure tone in a linear modulator leaves other bins empty; with
        // sin() the cubic term sits at 3·f_3, off the 1..=8 grid except bin... none
        let lin = WaveformRun::new(
            ModulatorConfig::ideal(8, 1e-6),
            Constellation::qpsk(),
            2000,
            0,
        );
        let f = synthesize_field(&lin, &sym).unwrap();
        for k in 1..=8 {
            if k == 3 {
                continue;
            }
            let (x, p) = demodulate_subcarrier(&f, &lin, k).unwrap();
            assert!(x.abs() < 1e-18 && p.abs() < 1e-18, "k={k}");
        }
    }

    #[test]
    fn demodulation_errors() {
        let run = ideal_run(4, 0.01);
        let f = vec![Complex64::new(0.0, 0.0); run.samples_per_symbol];
        assert!(demodulate_subcarrier(&f, &run, 0).is_err());
        assert!(demodulate_subcarrier(&f, &run, 5).is_err());
        assert!(demodulate_subcarrier(&f[1..], &run, 1).is_err());
        assert!(synthesize_field(&run, &[Complex64::new(1.0, 1.0)]).is_err());
        let mut tight = run.clone();
        tight.samples_per_symbol = 15;
        assert!(synthesize_field(&tight, &[Complex64::new(1.0, 1.0); 4]).is_err());
    }

    #[test]
    fn bessel_truncation_converges() {
        let mut run = WaveformRun::new(
            ModulatorConfig::practical(3, 0.01),
            Constellation::qpsk(),
            2000,
            0,
        );
        let sym = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(-0.6, 0.8),
        ];
        let direct = synthesize_field(&run, &sym).unwrap();
        let s1 = bessel_series_field(&run, &sym, 1).unwrap();
        let dev1 = direct
            .iter()
            .zip(&s1)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(dev1 <= 1e-5 * run.cfg.a_sig, "{dev1}");

        // γ = 0.5 on every carrier
        run.cfg.mu = 0.5;
        let mut last = f64::INFINITY;
        for order in 1..=8 {
            let s = bessel_series_field(&run, &sym, order).unwrap();
            let dev = direct_dev(&run, &sym, &s);
            assert!(dev < last || dev < 1e-15, "order {order}: {dev} !< {last}");
            last = dev;
        }
        assert!(last < 1e-9, "{last}");
        assert!(bessel_series_field(&run, &sym, 0).is_err());
    }

    fn direct_dev(run: &WaveformRun, sym: &[Complex64], s: &[Complex64]) -> f64 {
        let direct = synthesize_field(run, sym).unwrap();
        direct
            .iter()
            .zip(s)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn reproducible_and_schedule_independent() {
        let mut run = WaveformRun::new(
            ModulatorConfig::practical(4, 0.05),
            Constellation::qam256(0.04).unwrap(),
            3000,
            99,
        );
        let a = measure_noise(&run).unwrap();
        let b = measure_noise(&run).unwrap();
        assert_eq!(a, b);
        run.execution = Execution::Sequential;
        assert_eq!(a, measure_noise(&run).unwrap());
        run.rng_seed = 100;
        assert_ne!(a, measure_noise(&run).unwrap());
    }

    #[test]
    fn too_few_symbols_rejected() {
        let mut run = ideal_run(2, 0.01);
        run.n_symbols = 999;
        assert!(measure_noise(&run).is_err());
    }

    #[test]
    fn dumps_have_one_row_per_sample() {
        let run = ideal_run(2, 0.01);
        let f =
            synthesize_field(&run, &[Complex64::new(1.0, 1.0), Complex64::new(-1.0, 1.0)]).unwrap();
        let mut ts = Vec::new();
        write_time_series_csv(&run, &f, &mut ts).unwrap();
        assert_eq!(
            String::from_utf8(ts).unwrap().lines().count(),
            run.samples_per_symbol + 1
        );
        let mut sp = Vec::new();
        write_spectrum_csv(&run, &f, &mut sp).unwrap();
        let text = String::from_utf8(sp).unwrap();
        assert_eq!(text.lines().count(), run.samples_per_symbol + 1);
        // bin +1 carries 2μ(1 + j) for the ideal modulator
        let row = text.lines().find(|l| l.starts_with("1,")).unwrap();
        let re: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
        assert!((re - 0.02).abs() < 1e-5);
    }
}
