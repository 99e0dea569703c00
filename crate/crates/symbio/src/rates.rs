//! Achievable-rate computations: primary rate (Monte Carlo and semi-closed
//! form), secondary MMSE-SIC sum rate in its two equivalent forms, the
//! waveform-level validation path, and the massive-BD asymptotics.

use num_complex::Complex64;

use crate::channel::{BdSymbolModel, ChannelRealization, ChannelRng, SystemParams};
use crate::error::{Error, Result};
use crate::numerics::{
    bessel_i0, expint_ei, logdet_pd, solve_hermitian_pd, ComplexVector, HermitianMatrix,
};

pub const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// How a rate value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateMethod {
    MonteCarlo,
    ClosedForm,
    Asymptotic,
}

/// Primary rate decomposition: direct-link SNR non-centrality `lambda`,
/// Gaussian variance parameter `Sigma`, and the backscatter rate gain
/// `delta_rs = -Ei(-lambda/2 Sigma) log2 e`.
#[derive(Debug, Clone)]
pub struct RateReport {
    pub primary_rate_bps_hz: f64,
    pub secondary_sum_rate_bps_hz: f64,
    pub lambda: f64,
    pub sigma_param: f64,
    pub delta_rs: f64,
    pub method: RateMethod,
    /// Set when `Sigma = 0` was handled as the exact `Ei(-inf) = 0` limit.
    pub sigma_zero_limit: bool,
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub n_trials: u64,
}

fn check_unit(wd: &ComplexVector) -> Result<()> {
    if (wd.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::Validation(format!(
            "beamformer must be unit norm, got ||wd|| = {}",
            wd.norm()
        )));
    }
    Ok(())
}

/// Equivalent SIMO channel `h_eq(c) = h_d + sum_j sqrt(alpha) h_j g_j c_j`.
pub fn equivalent_channel(
    real: &ChannelRealization,
    c: &[Complex64],
    alpha: f64,
) -> Result<ComplexVector> {
    if c.len() != real.num_bds() {
        return Err(Error::Validation(format!(
            "expected {} BD symbols, got {}",
            real.num_bds(),
            c.len()
        )));
    }
    let mut heq = real.hd.clone();
    let sa = alpha.sqrt();
    for (j, &cj) in c.iter().enumerate() {
        heq.axpy(sa * real.h[j] * cj, &real.g[j]);
    }
    Ok(heq)
}

/// Instantaneous primary SNR `p |wd^H h_eq|^2 / sigma^2`.
pub fn primary_snr(
    wd: &ComplexVector,
    heq: &ComplexVector,
    params: &SystemParams,
) -> Result<f64> {
    check_unit(wd)?;
    Ok(params.p * wd.dot(heq).norm_sqr() / params.sigma2)
}

/// Expected primary rate `E_c[log2(1 + r_s(c))]` by Monte Carlo over the BD
/// symbols. Deterministic per seed.
pub fn primary_rate_mc(
    wd: &ComplexVector,
    real: &ChannelRealization,
    params: &SystemParams,
    n_trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    check_unit(wd)?;
    if n_trials == 0 {
        return Err(Error::Validation("n_trials must be >= 1".into()));
    }
    let j = real.num_bds();
    let a = wd.dot(&real.hd);
    // wd^H h_eq(c) = a + sum_j b_j c_j with b_j = sqrt(alpha) h_j wd^H g_j.
    let b: Vec<Complex64> = (0..j)
        .map(|i| params.alpha.sqrt() * real.h[i] * wd.dot(&real.g[i]))
        .collect();
    let snr_scale = params.p / params.sigma2;

    if j == 0 || params.alpha == 0.0 || b.iter().all(|z| z.norm_sqr() == 0.0) {
        // No randomness left; the expectation is exact.
        let rate = (1.0 + snr_scale * a.norm_sqr()).log2();
        return Ok(McEstimate {
            mean: rate,
            std_err: 0.0,
            n_trials,
        });
    }

    let mut rng = ChannelRng::from_seed(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n_trials {
        let c = rng.bd_symbols(j, params.bd_symbol_model);
        let mut s = a;
        for (bi, ci) in b.iter().zip(&c) {
            s += bi * ci;
        }
        let rate = (1.0 + snr_scale * s.norm_sqr()).log2();
        sum += rate;
        sum_sq += rate * rate;
    }
    let n = n_trials as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0).max(1.0)).max(0.0);
    Ok(McEstimate {
        mean,
        std_err: (var / n).sqrt(),
        n_trials,
    })
}

/// The non-centrality and variance parameters of the instantaneous-SNR
/// distribution under CSCG BD symbols:
/// `lambda = p |wd^H h_d|^2 / sigma^2`,
/// `Sigma = sum_j p alpha |h_j|^2 |wd^H g_j|^2 / (2 sigma^2)`.
pub fn snr_distribution_params(
    wd: &ComplexVector,
    real: &ChannelRealization,
    params: &SystemParams,
) -> Result<(f64, f64)> {
    check_unit(wd)?;
    let lambda = params.p * wd.dot(&real.hd).norm_sqr() / params.sigma2;
    let sigma: f64 = (0..real.num_bds())
        .map(|j| {
            params.p * params.alpha * real.h[j].norm_sqr() * wd.dot(&real.g[j]).norm_sqr()
                / (2.0 * params.sigma2)
        })
        .sum();
    Ok((lambda, sigma))
}

/// Semi-closed-form primary rate `R_s = log2 lambda - Ei(-lambda/2 Sigma)
/// log2 e`, valid for CSCG BD symbols at high direct-link SNR.
pub fn primary_rate_closed(
    wd: &ComplexVector,
    real: &ChannelRealization,
    params: &SystemParams,
) -> Result<RateReport> {
    if params.bd_symbol_model != BdSymbolModel::Cscg {
        return Err(Error::Validation(
            "closed-form primary rate requires CSCG BD symbols".into(),
        ));
    }
    let (lambda, sigma) = snr_distribution_params(wd, real, params)?;
    if lambda <= 0.0 {
        return Err(Error::DegenerateBeam(
            "wd is orthogonal to the direct link (lambda = 0)".into(),
        ));
    }
    if sigma == 0.0 {
        // Exact Ei(-inf) = 0 limit, covers J = 0 / alpha = 0 uniformly.
        return Ok(RateReport {
            primary_rate_bps_hz: lambda.log2(),
            secondary_sum_rate_bps_hz: 0.0,
            lambda,
            sigma_param: 0.0,
            delta_rs: 0.0,
            method: RateMethod::ClosedForm,
            sigma_zero_limit: true,
        });
    }
    let delta_rs = -expint_ei(-lambda / (2.0 * sigma))? * LOG2_E;
    Ok(RateReport {
        primary_rate_bps_hz: lambda.log2() + delta_rs,
        secondary_sum_rate_bps_hz: 0.0,
        lambda,
        sigma_param: sigma,
        delta_rs,
        method: RateMethod::ClosedForm,
        sigma_zero_limit: false,
    })
}

/// Log of `I0(z)` robust against overflow of `e^z`.
fn ln_i0(z: f64) -> Result<f64> {
    if z < 600.0 {
        Ok(bessel_i0(z)?.ln())
    } else {
        // I0(z) ~ e^z / sqrt(2 pi z) (1 + 1/8z + 9/128z^2 + ...)
        let corr = 1.0 + 1.0 / (8.0 * z) + 9.0 / (128.0 * z * z);
        Ok(z - 0.5 * (2.0 * std::f64::consts::PI * z).ln() + corr.ln())
    }
}

/// Noncentral chi-square (2 dof) PDF of the instantaneous primary SNR:
/// `f(x) = (1/2 Sigma) e^{-(x + lambda)/2 Sigma} I0(sqrt(x lambda)/Sigma)`.
pub fn chi2_pdf(x: f64, lambda: f64, sigma_param: f64) -> Result<f64> {
    if sigma_param <= 0.0 {
        return Err(Error::Numeric(format!(
            "Sigma must be > 0, got {sigma_param}"
        )));
    }
    if x < 0.0 || lambda < 0.0 {
        return Err(Error::Numeric(
            "chi2_pdf requires x >= 0 and lambda >= 0".into(),
        ));
    }
    let z = (x * lambda).sqrt() / sigma_param;
    let log_f = -(x + lambda) / (2.0 * sigma_param) + ln_i0(z)?
        - (2.0 * sigma_param).ln();
    Ok(log_f.exp())
}

fn residual_interference(
    real: &ChannelRealization,
    params: &SystemParams,
    rank: usize,
) -> HermitianMatrix {
    let kpa = params.k as f64 * params.p * params.alpha;
    let mut b = HermitianMatrix::identity(params.m).scale(params.sigma2);
    for &i in &real.sic_order[rank + 1..] {
        b.add_outer(kpa * real.h[i].norm_sqr(), &real.g[i]);
    }
    b
}

/// Linear MMSE beamformer for the BD at position `rank` (0-based) of the SIC
/// order: `w = (K p alpha sum_{later} |h_i|^2 g_i g_i^H + sigma^2 I)^{-1}
/// sqrt(K p alpha) h_j g_j`. Returned unnormalized.
pub fn mmse_sic_beamformer(
    real: &ChannelRealization,
    params: &SystemParams,
    rank: usize,
) -> Result<ComplexVector> {
    if rank >= real.num_bds() {
        return Err(Error::Validation(format!(
            "rank {rank} out of range (J = {})",
            real.num_bds()
        )));
    }
    let j = real.sic_order[rank];
    let b = residual_interference(real, params, rank);
    let kpa = params.k as f64 * params.p * params.alpha;
    let rhs = real.g[j].scale(kpa.sqrt() * real.h[j]);
    solve_hermitian_pd(&b, &rhs)
}

/// Post-MMSE SINR of the BD at SIC position `rank`:
/// `gamma = K p alpha |h_j|^2 g_j^H B^{-1} g_j` with `B` the residual
/// interference-plus-noise covariance.
pub fn sic_sinr(real: &ChannelRealization, params: &SystemParams, rank: usize) -> Result<f64> {
    if rank >= real.num_bds() {
        return Err(Error::Validation(format!(
            "rank {rank} out of range (J = {})",
            real.num_bds()
        )));
    }
    let j = real.sic_order[rank];
    let b = residual_interference(real, params, rank);
    let x = solve_hermitian_pd(&b, &real.g[j])?;
    let kpa = params.k as f64 * params.p * params.alpha;
    Ok(kpa * real.h[j].norm_sqr() * real.g[j].dot(&x).re)
}

/// SINR achieved by an explicit beamformer `w` at SIC position `rank`.
pub fn sinr_of_beamformer(
    real: &ChannelRealization,
    params: &SystemParams,
    rank: usize,
    w: &ComplexVector,
) -> Result<f64> {
    let j = real.sic_order[rank];
    let b = residual_interference(real, params, rank);
    let kpa = params.k as f64 * params.p * params.alpha;
    let signal = kpa * real.h[j].norm_sqr() * w.dot(&real.g[j]).norm_sqr();
    Ok(signal / b.quadratic_form(w))
}

/// Secondary sum rate via the SIC chain: `(1/K) sum_j log2(1 + gamma_j)`.
pub fn bd_sum_rate_sinr(real: &ChannelRealization, params: &SystemParams) -> Result<f64> {
    let mut acc = 0.0;
    for rank in 0..real.num_bds() {
        acc += (1.0 + sic_sinr(real, params, rank)?).log2();
    }
    Ok(acc / params.k as f64)
}

/// Secondary sum rate via the log-det form:
/// `(1/K) log2 det(I + (K p alpha / sigma^2) sum_j |h_j|^2 g_j g_j^H)`.
pub fn bd_sum_rate_logdet(real: &ChannelRealization, params: &SystemParams) -> Result<f64> {
    let mut a = HermitianMatrix::identity(params.m);
    let c = params.k as f64 * params.p * params.alpha / params.sigma2;
    for j in 0..real.num_bds() {
        a.add_outer(c * real.h[j].norm_sqr(), &real.g[j]);
    }
    Ok(logdet_pd(&a)? / params.k as f64)
}

/// Massive-BD secondary sum rate:
/// `R_BD -> (M/K) log2(1 + J K p alpha beta_h beta_g / sigma^2)`.
pub fn bd_sum_rate_asymptotic(params: &SystemParams) -> f64 {
    let snr = params.j as f64 * params.k as f64 * params.p * params.alpha * params.beta_h
        * params.beta_g
        / params.sigma2;
    params.m as f64 / params.k as f64 * (1.0 + snr).log2()
}

/// Massive-BD primary rate for a fixed beamformer:
/// `R_s -> log2(p |wd^H h_d|^2 / sigma^2)
///        - Ei(-|wd^H h_d|^2 / (J alpha beta_h beta_g)) log2 e`.
pub fn primary_rate_asymptotic(
    wd: &ComplexVector,
    hd: &ComplexVector,
    params: &SystemParams,
) -> Result<f64> {
    check_unit(wd)?;
    if params.j == 0 {
        return Err(Error::Validation("asymptotic rate requires J >= 1".into()));
    }
    let coupling = wd.dot(hd).norm_sqr();
    if coupling == 0.0 {
        return Err(Error::DegenerateBeam(
            "wd is orthogonal to the direct link".into(),
        ));
    }
    let direct = (params.p * coupling / params.sigma2).log2();
    let denom = params.j as f64 * params.alpha * params.beta_h * params.beta_g;
    if denom == 0.0 {
        return Ok(direct);
    }
    Ok(direct - expint_ei(-coupling / denom)? * LOG2_E)
}

/// Asymptotic primary rate as a function of the secondary sum rate:
/// `R_s = log2 gamma - Ei(-K gamma / (2^{(K/M) R_BD} - 1)) log2 e`,
/// with the exact `R_BD = 0` limit `log2 gamma`.
pub fn rs_given_rbd(gamma: f64, rbd: f64, k: u32, m: usize) -> Result<f64> {
    if gamma <= 0.0 {
        return Err(Error::Validation(format!("gamma must be > 0, got {gamma}")));
    }
    if rbd < 0.0 {
        return Err(Error::Validation(format!("R_BD must be >= 0, got {rbd}")));
    }
    if rbd == 0.0 {
        return Ok(gamma.log2());
    }
    let denom = (2.0f64).powf(k as f64 / m as f64 * rbd) - 1.0;
    let arg = -(k as f64) * gamma / denom;
    Ok(gamma.log2() - expint_ei(arg)? * LOG2_E)
}

/// Waveform-level secondary observation for one BD symbol block.
#[derive(Debug, Clone)]
pub struct BdObservation {
    /// `Yhat(n) v(n)`: the simulated matched-filter output of the K-symbol
    /// block after perfect primary cancellation.
    pub simulated: ComplexVector,
    /// The large-K model `sqrt(K p alpha) sum_j h_j g_j c_j + Z v`, built
    /// from the same noise draw.
    pub model: ComplexVector,
}

/// Simulate one BD symbol block: generate the primary waveform and noise,
/// apply perfect primary cancellation and the temporal matched filter
/// `v = s^* / ||s||`, and return both the simulated output and the large-K
/// model built from the same noise.
pub fn simulate_bd_observation(
    real: &ChannelRealization,
    params: &SystemParams,
    c: &[Complex64],
    seed: u64,
) -> Result<BdObservation> {
    let k = params.k as usize;
    let mut rng = ChannelRng::from_seed(seed);
    let s = rng.cscg_vector(k, 1.0);
    let mut z = Vec::with_capacity(k);
    for _ in 0..k {
        z.push(rng.cscg_vector(params.m, params.sigma2));
    }
    simulate_bd_observation_with(real, params, c, &s, &z)
}

/// As [`simulate_bd_observation`] but with caller-supplied primary waveform
/// `s` (length K) and per-symbol noise columns `z` (K vectors of length M).
pub fn simulate_bd_observation_with(
    real: &ChannelRealization,
    params: &SystemParams,
    c: &[Complex64],
    s: &ComplexVector,
    z: &[ComplexVector],
) -> Result<BdObservation> {
    let j = real.num_bds();
    if c.len() != j {
        return Err(Error::Validation(format!(
            "expected {j} BD symbols, got {}",
            c.len()
        )));
    }
    let k = params.k as usize;
    if s.len() != k || z.len() != k {
        return Err(Error::Validation(
            "waveform and noise must have K columns".into(),
        ));
    }
    let s_norm = s.norm();
    if s_norm == 0.0 {
        return Err(Error::Validation("primary waveform is zero".into()));
    }
    let sqrt_pa = (params.p * params.alpha).sqrt();

    // Spatial signature sum_j h_j g_j c_j.
    let mut sig = ComplexVector::zeros(params.m);
    for i in 0..j {
        sig.axpy(real.h[i] * c[i], &real.g[i]);
    }

    // Matched-filtered noise Z v with v = s^*/||s||.
    let mut zv = ComplexVector::zeros(params.m);
    for kk in 0..k {
        let vk = s[kk].conj() / s_norm;
        zv.axpy(vk, &z[kk]);
    }

    // Yhat v = sqrt(p alpha) (sum_j h_j g_j c_j) s^T v + Z v,
    // and s^T v = ||s||.
    let mut simulated = sig.scale(Complex64::new(sqrt_pa * s_norm, 0.0));
    simulated = simulated.add(&zv);

    let kpa_sqrt = (params.k as f64 * params.p * params.alpha).sqrt();
    let mut model = sig.scale(Complex64::new(kpa_sqrt, 0.0));
    model = model.add(&zv);

    Ok(BdObservation { simulated, model })
}
