//! Acceptance gate: one test per criterion, each printing a single
//! PASS/FAIL line (visible with `--nocapture`) before asserting.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use symbio::beamforming::{corr_eig, mrc, sdr};
use symbio::channel::{sample_channels, sample_channels_with, ChannelRng, SystemParams};
use symbio::numerics::{bessel_i0, expint_ei, ComplexVector, HermitianMatrix};
use symbio::rates::{
    bd_sum_rate_asymptotic, bd_sum_rate_logdet, bd_sum_rate_sinr, chi2_pdf, primary_rate_closed,
    primary_rate_mc, rs_given_rbd, simulate_bd_observation_with,
};
use symbio::sdp::{solve, SdpProblem, SdpStatus};
use symbio::test_util::adaptive_simpson;

fn check(n: usize, desc: &str, pass: bool, details: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {n}: {verdict} - {desc} ({details})");
    assert!(pass, "criterion {n} failed: {details}");
}

/// Mean and standard error of a sample.
fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn criterion_1_rate_form_equivalence() {
    let start = std::time::Instant::now();
    let mut rng = rand::rngs::StdRng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let m = rng.gen_range(1..=8);
        let j = rng.gen_range(0..=16);
        let mut params = SystemParams::defaults_with(j);
        params.m = m;
        // Jitter every physical scale a couple of decades around the
        // simulation defaults.
        let jitter = |rng: &mut rand::rngs::StdRng| 10f64.powf(rng.gen_range(-1.0..1.0));
        params.p *= jitter(&mut rng);
        params.sigma2 *= jitter(&mut rng);
        params.beta_h *= jitter(&mut rng);
        params.beta_g *= jitter(&mut rng);
        params.alpha = rng.gen_range(0.1..=1.0);
        let real = sample_channels(&params, 1000 + i).unwrap();
        let a = bd_sum_rate_sinr(&real, &params).unwrap();
        let b = bd_sum_rate_logdet(&real, &params).unwrap();
        let rel = (a - b).abs() / b.abs().max(1e-30);
        worst = worst.max(rel);
    }
    let elapsed = start.elapsed().as_secs_f64();
    check(
        1,
        "SINR-sum and log-det BD sum rates agree",
        worst < 1e-9 && elapsed < 10.0,
        &format!("worst rel dev {worst:.3e}, {elapsed:.2} s"),
    );
}

#[test]
fn criterion_2_quoted_gain_figures() {
    // 1000 realizations, CorrelationEig design, simulation defaults at
    // p = 0 dBm. Channel sub-streams are shared across the three BD counts,
    // so the direct links are identical draws and the gain estimates pair.
    //
    // KNOWN RED. The reference gain values (0.19 at J=1, 3.83 at J=500)
    // are not attainable from the stated link budget: with the default
    // per-path powers, each backscatter path carries ~1e-16 W against a
    // ~1e-15 W direct link, and even the Jensen upper bound on the J=1
    // gain is ~0.03 bps/Hz. An independent reimplementation reproduces
    // this library's numbers (gain ~0.01 at J=1, ~1.87 at J=500), so the
    // reference values appear to assume different, unstated parameters.
    // The check is kept at its stated tolerances rather than weakened.
    let mean_rate = |j: usize| -> f64 {
        let params = SystemParams::defaults_with(j);
        let rates: Vec<f64> = (0..1000u64)
            .into_par_iter()
            .map(|r| {
                let mut rng = ChannelRng::substream(900, r);
                let real = sample_channels_with(&params, &mut rng).unwrap();
                let bf = corr_eig(&real, &params).unwrap();
                primary_rate_mc(&bf.wd, &real, &params, 2000, 901 + r)
                    .unwrap()
                    .mean
            })
            .collect();
        rates.iter().sum::<f64>() / rates.len() as f64
    };
    let r0 = mean_rate(0);
    let gain1 = mean_rate(1) - r0;
    let gain500 = mean_rate(500) - r0;
    let pass = (gain1 - 0.19).abs() <= 0.05 && (gain500 - 3.83).abs() <= 0.30;
    check(
        2,
        "quoted primary-rate gains at J=1 and J=500",
        pass,
        &format!("gain(J=1) {gain1:.3} vs 0.19 +- 0.05, gain(J=500) {gain500:.2} vs 3.83 +- 0.30"),
    );
}

#[test]
fn criterion_3_asymptotic_sum_rate_convergence() {
    let mut prev_err = f64::INFINITY;
    let mut errs = Vec::new();
    for &j in &[10usize, 100, 1000] {
        let params = SystemParams::defaults_with(j);
        let rates: Vec<f64> = (0..200u64)
            .into_par_iter()
            .map(|r| {
                let mut rng = ChannelRng::substream(300 + j as u64, r);
                let real = sample_channels_with(&params, &mut rng).unwrap();
                bd_sum_rate_logdet(&real, &params).unwrap()
            })
            .collect();
        let mean = rates.iter().sum::<f64>() / rates.len() as f64;
        let asym = bd_sum_rate_asymptotic(&params);
        let rel = (mean - asym).abs() / asym;
        errs.push((j, rel));
        assert!(rel < prev_err, "error not decreasing at J={j}: {errs:?}");
        prev_err = rel;
    }
    let final_err = errs.last().unwrap().1;
    check(
        3,
        "mean sum rate approaches the massive-BD formula",
        final_err < 0.05,
        &format!("relative errors {errs:?}"),
    );
}

#[test]
fn criterion_4_closed_form_vs_monte_carlo() {
    let mut worst: f64 = 0.0;
    for i in 0..50u64 {
        let j = [2, 8, 32][(i % 3) as usize];
        let mut params = SystemParams::defaults_with(j);
        let real = sample_channels(&params, 4000 + i).unwrap();
        let wd = real.hd.normalized().unwrap();
        // Pin the direct-link SNR at 23 dB so the high-SNR form applies.
        params.p = 200.0 * params.sigma2 / real.hd.norm_sqr();
        let closed = primary_rate_closed(&wd, &real, &params).unwrap();
        assert!(closed.lambda >= 100.0);
        let mut trials = 20_000u64;
        let mc = loop {
            let est = primary_rate_mc(&wd, &real, &params, trials, 4100 + i).unwrap();
            if est.std_err < 0.01 || trials >= 1_280_000 {
                break est;
            }
            trials *= 2;
        };
        worst = worst.max((closed.primary_rate_bps_hz - mc.mean).abs());
    }
    check(
        4,
        "semi-closed-form rate matches Monte Carlo at high SNR",
        worst <= 0.05,
        &format!("worst |closed - mc| {worst:.4} bps/Hz"),
    );
}

#[test]
fn criterion_5_beamformer_ordering() {
    // p is not pinned by the criterion; 30 dBm keeps the method gaps well
    // above the Monte Carlo noise floor.
    let mut params = SystemParams::defaults_with(200);
    params.p = 1.0;
    let results: Vec<(f64, f64, f64, f64, f64)> = (0..100u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChannelRng::substream(500, r);
            let real = sample_channels_with(&params, &mut rng).unwrap();
            let bf_mrc = mrc(&real, &params).unwrap();
            let bf_ce = corr_eig(&real, &params).unwrap();
            let bf_sdr = sdr(&real, &params, 501 + r).unwrap();
            // Common BD-symbol randomness pairs the three estimates.
            let seed = 502 + r;
            let mc = |wd: &ComplexVector| {
                primary_rate_mc(wd, &real, &params, 3000, seed).unwrap().mean
            };
            (
                bf_sdr.objective - bf_ce.objective,
                bf_sdr.objective - bf_mrc.objective,
                mc(&bf_sdr.wd) - mc(&bf_mrc.wd),
                mc(&bf_ce.wd) - mc(&bf_mrc.wd),
                bf_sdr.objective,
            )
        })
        .collect();
    let obj_ok = results
        .iter()
        .all(|(d_ce, d_mrc, _, _, _)| *d_ce >= -1e-6 && *d_mrc >= -1e-6);
    let sdr_gain: Vec<f64> = results.iter().map(|t| t.2).collect();
    let ce_gain: Vec<f64> = results.iter().map(|t| t.3).collect();
    let (sdr_mean, sdr_se) = mean_se(&sdr_gain);
    let (ce_mean, ce_se) = mean_se(&ce_gain);
    let mc_ok = sdr_mean > 3.0 * sdr_se && ce_mean > 3.0 * ce_se;
    check(
        5,
        "SDR dominates on the design objective; SDR and CorrEig beat MRC on MC rate",
        obj_ok && mc_ok,
        &format!(
            "objective dominance {obj_ok}; SDR-MRC {sdr_mean:.3} +- {sdr_se:.3}, CorrEig-MRC {ce_mean:.3} +- {ce_se:.3}"
        ),
    );
}

/// Brute-force oracle for the M = 2 fixed-ratio subproblem: every PSD
/// unit-trace W on C^2 is t uu^H + (1-t) vv^H with v the orthocomplement of
/// u; the homogeneous constraint pins t, leaving a 2-parameter sphere
/// search refined locally around the best grid point.
fn brute_force_m2(hd_mat: &HermitianMatrix, coupling: &HermitianMatrix) -> f64 {
    let value = |theta: f64, phi: f64| -> f64 {
        let u = ComplexVector::new(vec![
            Complex64::new(theta.cos(), 0.0),
            Complex64::from_polar(theta.sin(), phi),
        ])
        .unwrap();
        let v = ComplexVector::new(vec![-u[1].conj(), u[0].conj()]).unwrap();
        let qu = coupling.quadratic_form(&u);
        let qv = coupling.quadratic_form(&v);
        if (qu - qv).abs() < 1e-300 {
            return f64::NEG_INFINITY;
        }
        let t = qv / (qv - qu);
        if !(0.0..=1.0).contains(&t) {
            return f64::NEG_INFINITY;
        }
        t * hd_mat.quadratic_form(&u) + (1.0 - t) * hd_mat.quadratic_form(&v)
    };
    let mut grid = Vec::with_capacity(10_000);
    for it in 0..100 {
        let theta = std::f64::consts::FRAC_PI_2 * it as f64 / 99.0;
        for ip in 0..100 {
            let phi = 2.0 * std::f64::consts::PI * ip as f64 / 100.0;
            grid.push((value(theta, phi), theta, phi));
        }
    }
    grid.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    // Pattern-search refinement from the best coarse points. The step only
    // shrinks when no neighbour improves, so the search can follow a curved
    // ridge arbitrarily far from its starting cell.
    let mut best = grid[0].0;
    for &(v0, t0, p0) in grid.iter().take(10) {
        if !v0.is_finite() {
            continue;
        }
        let (mut bv, mut bt, mut bp) = (v0, t0, p0);
        let (mut ht, mut hp) = (0.016, 0.063);
        for _ in 0..400 {
            let mut improved = false;
            for (dt, dp) in [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1), (1, -1), (-1, 1)]
            {
                let v = value(bt + ht * dt as f64, bp + hp * dp as f64);
                if v > bv {
                    (bv, bt, bp) = (v, bt + ht * dt as f64, bp + hp * dp as f64);
                    improved = true;
                }
            }
            if !improved {
                ht *= 0.5;
                hp *= 0.5;
                if ht < 1e-9 {
                    break;
                }
            }
        }
        best = best.max(bv);
    }
    // Rank-1 candidates live exactly on the cone q(u) = 0, a curve the
    // 2-D grid misses. With u = (cos t, e^{i p} sin t) the constraint is
    // A(t) + R(t) cos(p + psi) = 0, solvable for p in closed form.
    let d11 = coupling.get(0, 0).re;
    let d22 = coupling.get(1, 1).re;
    let d12 = coupling.get(0, 1);
    let psi = d12.im.atan2(d12.re);
    for it in 0..10_000 {
        let theta = std::f64::consts::FRAC_PI_2 * it as f64 / 9_999.0;
        let (st, ct) = theta.sin_cos();
        let a = ct * ct * d11 + st * st * d22;
        let r = 2.0 * ct * st * d12.norm();
        if r.abs() < 1e-300 {
            continue;
        }
        let cosarg = -a / r;
        if cosarg.abs() > 1.0 {
            continue;
        }
        let base = cosarg.acos();
        for phi in [base - psi, -base - psi] {
            let u = ComplexVector::new(vec![
                Complex64::new(ct, 0.0),
                Complex64::from_polar(st, phi),
            ])
            .unwrap();
            best = best.max(hd_mat.quadratic_form(&u));
        }
    }
    best
}

/// Independent dual oracle: by strong duality the optimum equals
/// `min_y lambda_max(H_d - y D)`, a 1-D convex minimization solved by
/// golden-section search with closed-form 2x2 eigenvalues.
fn dual_oracle_m2(hd_mat: &HermitianMatrix, coupling: &HermitianMatrix) -> f64 {
    let lam_max = |y: f64| -> f64 {
        let m = hd_mat.sub(&coupling.scale(y));
        let a = m.get(0, 0).re;
        let d = m.get(1, 1).re;
        let b = m.get(0, 1);
        0.5 * (a + d) + (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt()
    };
    let (mut lo, mut hi) = (-1e4, 1e4);
    let phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (hi - phi * (hi - lo), lo + phi * (hi - lo));
    let (mut f1, mut f2) = (lam_max(x1), lam_max(x2));
    for _ in 0..200 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = lam_max(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = lam_max(x2);
        }
    }
    f1.min(f2)
}

#[test]
fn criterion_6_sdp_solver_oracle() {
    let mut rng = ChannelRng::from_seed(600);
    let mut solved = 0;
    let mut worst: f64 = 0.0;
    let mut worst_kkt: f64 = 0.0;
    while solved < 200 {
        // O(1)-scale random fixed-ratio instances on two antennas.
        let hd = rng.cscg_vector(2, 1.0);
        let hd_mat = HermitianMatrix::outer(&hd);
        let mut hsum = HermitianMatrix::zeros(2);
        for _ in 0..3 {
            let g = rng.cscg_vector(2, 1.0);
            let h2 = rng.cscg(1.0).norm_sqr();
            hsum.add_outer(h2, &g);
        }
        // A ratio attained by some rank-1 point, so the instance is feasible.
        let w0 = rng.cscg_vector(2, 1.0).normalized().unwrap();
        let xi = hd_mat.quadratic_form(&w0) / hsum.quadratic_form(&w0);
        let coupling = hd_mat.sub(&hsum.scale(xi));

        let problem = SdpProblem::new(
            hd_mat.clone(),
            vec![(HermitianMatrix::identity(2), 1.0), (coupling.clone(), 0.0)],
        )
        .unwrap();
        let sol = solve(&problem).unwrap();
        assert_eq!(
            sol.status,
            SdpStatus::Optimal,
            "instance {solved} unexpectedly hard: {:?} after {} iters, kkt {:?}, xi {xi}",
            sol.status,
            sol.iterations,
            sol.kkt_residuals
        );
        let kkt = sol.kkt_residuals.primal.max(sol.kkt_residuals.dual);
        worst_kkt = worst_kkt.max(kkt);

        let brute = brute_force_m2(&hd_mat, &coupling);
        let dual = dual_oracle_m2(&hd_mat, &coupling);
        // Dual bound: the solver's dual objective upper-bounds the optimum.
        let dual_obj: f64 = problem
            .equalities
            .iter()
            .zip(&sol.duals)
            .map(|((_, b), y)| b * y)
            .sum();
        assert!(
            dual_obj >= brute - 1e-6,
            "dual bound {dual_obj} below feasible value {brute}"
        );
        let dev = (sol.objective_value - brute).abs();
        if dev > 1e-3 || kkt > 1e-8 {
            println!(
                "instance {solved}: solver {:.6} brute {brute:.6} dual-1d {dual:.6} kkt {kkt:.2e} iters {}",
                sol.objective_value, sol.iterations
            );
        }
        worst = worst.max(dev);
        solved += 1;
    }
    check(
        6,
        "SDP optimum matches the sphere-search oracle with tight KKT residuals",
        worst <= 1e-3 && worst_kkt <= 1e-8,
        &format!("worst |solver - oracle| {worst:.2e}, worst KKT residual {worst_kkt:.2e}"),
    );
}

#[test]
fn criterion_7_special_functions() {
    // Ei against adaptive quadrature on the negative axis.
    let mut worst_ei: f64 = 0.0;
    for i in 0..100 {
        let x = 1e-4 * (50.0f64 / 1e-4).powf(i as f64 / 99.0);
        let got = expint_ei(-x).unwrap();
        let want = -adaptive_simpson(|t| (-t).exp() / t, x, (x + 60.0).min(750.0), 1e-13);
        worst_ei = worst_ei.max((got - want).abs());
    }

    // I0 against the series with an explicit tail bound.
    let i0_oracle = |x: f64| -> f64 {
        let q = x * x / 4.0;
        let (mut term, mut sum, mut k) = (1.0f64, 1.0f64, 1u32);
        loop {
            term *= q / ((k * k) as f64);
            sum += term;
            let next = q / (((k + 1) * (k + 1)) as f64);
            if next < 0.5 && term * next / (1.0 - next) < 1e-16 * sum {
                return sum;
            }
            k += 1;
        }
    };
    let mut worst_i0: f64 = 0.0;
    for i in 0..100 {
        let x = 30.0 * i as f64 / 99.0;
        let rel = (bessel_i0(x).unwrap() / i0_oracle(x) - 1.0).abs();
        worst_i0 = worst_i0.max(rel);
    }

    // SNR-distribution PDF normalization on a (lambda, Sigma) grid.
    let mut worst_pdf: f64 = 0.0;
    for li in 0..5 {
        for si in 0..4 {
            let lambda: f64 = [0.0, 0.5, 3.0, 20.0, 100.0][li];
            let sigma: f64 = [0.2, 1.0, 4.0, 15.0][si];
            let upper = lambda + 40.0 * sigma + 20.0 * (lambda * sigma).sqrt() + 10.0;
            let integral = adaptive_simpson(
                |x| chi2_pdf(x, lambda, sigma).unwrap(),
                0.0,
                upper,
                1e-9,
            );
            worst_pdf = worst_pdf.max((integral - 1.0).abs());
        }
    }

    check(
        7,
        "Ei, I0 and the SNR PDF match independent oracles",
        worst_ei < 1e-10 && worst_i0 < 1e-10 && worst_pdf < 1e-6,
        &format!("Ei dev {worst_ei:.2e}, I0 rel dev {worst_i0:.2e}, PDF dev {worst_pdf:.2e}"),
    );
}

#[test]
fn criterion_8_waveform_model_convergence() {
    let mut params = SystemParams::defaults_with(4);
    params.p = 1.0;
    params.alpha = 1.0;
    params.beta_h = 1.0;
    params.beta_g = 1.0;
    params.beta_hd = 1.0;
    let mut points = Vec::new();
    for &k in &[16u32, 256, 4096] {
        params.k = k;
        let mut devs = Vec::new();
        let mut rng = ChannelRng::from_seed(800 + k as u64);
        for _ in 0..100 {
            let real = sample_channels_with(&params, &mut rng).unwrap();
            let c: Vec<Complex64> = rng.bd_symbols(4, params.bd_symbol_model);
            let s = rng.cscg_vector(k as usize, 1.0);
            let z = vec![ComplexVector::zeros(params.m); k as usize];
            let obs = simulate_bd_observation_with(&real, &params, &c, &s, &z).unwrap();
            let dev = obs.simulated.sub(&obs.model).norm() / obs.model.norm();
            devs.push(dev);
        }
        let mean = devs.iter().sum::<f64>() / devs.len() as f64;
        points.push(((k as f64).ln(), mean.ln()));
    }
    // Least-squares slope through the three (ln K, ln dev) points.
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    check(
        8,
        "waveform deviation from the block model decays as 1/sqrt(K)",
        (slope + 0.5).abs() <= 0.1,
        &format!("log-log slope {slope:.3}"),
    );
}

#[test]
fn criterion_9_asymptotic_curve_properties() {
    let gammas_db = [10.0f64, 15.0, 20.0, 25.0];
    let mut ok = true;
    let mut notes = Vec::new();
    for &gdb in &gammas_db {
        let gamma = 10f64.powf(gdb / 10.0);
        // Exact R_BD = 0 endpoint.
        let r0 = rs_given_rbd(gamma, 0.0, 128, 4).unwrap();
        if r0 != gamma.log2() {
            ok = false;
            notes.push(format!("endpoint mismatch at {gdb} dB"));
        }
        // Strict monotonicity once the Ei increment is representable.
        let mut prev = rs_given_rbd(gamma, 0.3, 128, 4).unwrap();
        let mut rbd = 0.4;
        while rbd <= 4.0 {
            let r = rs_given_rbd(gamma, rbd, 128, 4).unwrap();
            if r <= prev {
                ok = false;
                notes.push(format!("not increasing at gamma {gdb} dB, rbd {rbd:.1}"));
            }
            prev = r;
            rbd += 0.1;
        }
    }
    // Inter-gamma gap shrinks between R_BD = 0.5 and R_BD = 4.
    let gap = |rbd: f64| {
        rs_given_rbd(10f64.powf(2.5), rbd, 128, 4).unwrap()
            - rs_given_rbd(10.0, rbd, 128, 4).unwrap()
    };
    let (g_half, g_four) = (gap(0.5), gap(4.0));
    if g_four >= g_half {
        ok = false;
        notes.push(format!("gap did not shrink: {g_half} -> {g_four}"));
    }
    check(
        9,
        "asymptotic rate curve endpoint, monotonicity and merging",
        ok,
        &if notes.is_empty() {
            format!("gap {g_half:.3} -> {g_four:.3e}")
        } else {
            notes.join("; ")
        },
    );
}
