//! Minimal dense semidefinite solver for the fixed-search-parameter
//! beamforming subproblem: maximize a linear functional of a Hermitian PSD
//! matrix under a unit-trace constraint plus homogeneous linear equalities.
//!
//! Complex problems are solved on the real symmetric embedding
//! `[[Re, -Im], [Im, Re]]` of doubled dimension and folded back.

mod ipm;

use num_complex::Complex64;

use crate::channel::ChannelRng;
use crate::error::{Error, Result};
use crate::numerics::{herm_eig, ComplexVector, HermitianMatrix};

use ipm::{solve_real, IpmStatus, Rm};

/// `maximize Tr(W C)` subject to `Tr(W A_i) = b_i`, `W >= 0`.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub objective: HermitianMatrix,
    pub equalities: Vec<(HermitianMatrix, f64)>,
}

impl SdpProblem {
    pub fn new(objective: HermitianMatrix, equalities: Vec<(HermitianMatrix, f64)>) -> Result<Self> {
        let dim = objective.dim();
        if equalities.iter().any(|(a, _)| a.dim() != dim) {
            return Err(Error::Validation(
                "all constraint matrices must match the objective dimension".into(),
            ));
        }
        Ok(Self {
            objective,
            equalities,
        })
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    MaxIter,
}

/// KKT residuals at exit, all relative to the problem scale.
#[derive(Debug, Clone, Copy)]
pub struct KktResiduals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub w: HermitianMatrix,
    pub objective_value: f64,
    pub duals: Vec<f64>,
    pub kkt_residuals: KktResiduals,
    pub status: SdpStatus,
    pub iterations: usize,
}

/// Real symmetric embedding `[[Re H, -Im H], [Im H, Re H]]` of a Hermitian
/// matrix. Eigenvalues of the embedding are those of `H`, doubled in
/// multiplicity; traces scale by 2.
pub fn complex_to_real_embedding(h: &HermitianMatrix) -> (Vec<f64>, usize) {
    let n = h.dim();
    let m = 2 * n;
    let mut e = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = h.get(i, j);
            e[i * m + j] = z.re;
            e[i * m + (n + j)] = -z.im;
            e[(n + i) * m + j] = z.im;
            e[(n + i) * m + (n + j)] = z.re;
        }
    }
    (e, m)
}

/// Fold a real `2n x 2n` solution back to an `n x n` Hermitian matrix,
/// averaging the two embedded copies.
fn fold_embedding(x: &Rm, n: usize) -> HermitianMatrix {
    let mut w = HermitianMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let re = 0.5 * (x.get(i, j) + x.get(n + i, n + j));
            let im = 0.5 * (x.get(n + i, j) - x.get(i, n + j));
            w.set(i, j, Complex64::new(re, im));
        }
    }
    w.symmetrize();
    w
}

/// Search for a dual improving ray proving infeasibility: a homogeneous
/// equality whose matrix is definite, combined with the unit-trace
/// constraint, makes `Tr(W A) = 0` impossible for PSD unit-trace `W`. The
/// returned multipliers `y` satisfy `sum y_i A_i >= 0` and `b^T y < 0`,
/// verified numerically before being reported.
fn find_infeasibility_ray(problem: &SdpProblem) -> Option<Vec<f64>> {
    let trace_idx = problem.equalities.iter().position(|(a, b)| {
        if *b <= 0.0 {
            return false;
        }
        let n = a.dim();
        let kappa = a.trace() / n as f64;
        if kappa <= 0.0 {
            return false;
        }
        let dev = a.sub(&HermitianMatrix::identity(n).scale(kappa)).frobenius_norm();
        dev <= 1e-12 * a.frobenius_norm()
    })?;
    let kappa = problem.equalities[trace_idx].0.trace() / problem.dim() as f64;

    for (i, (a, b)) in problem.equalities.iter().enumerate() {
        if i == trace_idx || *b != 0.0 {
            continue;
        }
        let (vals, _) = herm_eig(a).ok()?;
        let (lam_min, lam_max) = (vals[0], vals[vals.len() - 1]);
        let scale = lam_min.abs().max(lam_max.abs());
        if scale == 0.0 {
            continue;
        }
        let coeff = if lam_min > 1e-10 * scale {
            // A positive definite: y_i A_i dominates |y_t| kappa I.
            Some(2.0 * kappa / lam_min)
        } else if lam_max < -1e-10 * scale {
            Some(2.0 * kappa / lam_max)
        } else {
            None
        };
        if let Some(coeff) = coeff {
            let mut y = vec![0.0; problem.equalities.len()];
            y[trace_idx] = -1.0;
            y[i] = coeff;
            // Verify the certificate before trusting it.
            let mut combo = problem.equalities[trace_idx].0.scale(y[trace_idx]);
            combo = combo.add(&a.scale(coeff));
            let (cvals, _) = herm_eig(&combo).ok()?;
            let b_dot: f64 = problem
                .equalities
                .iter()
                .zip(&y)
                .map(|((_, b), yi)| b * yi)
                .sum();
            if cvals[0] >= -1e-9 * combo.frobenius_norm().max(1.0) && b_dot < 0.0 {
                return Some(y);
            }
        }
    }
    None
}

/// Solve the SDP. On `Optimal` the KKT residuals are certified below
/// `1e-8` (primal, dual) and `1e-7` (relative gap).
pub fn solve(problem: &SdpProblem) -> Result<SdpSolution> {
    let n = problem.dim();
    if problem.equalities.is_empty() {
        return Err(Error::Validation(
            "problem must have at least one equality constraint".into(),
        ));
    }

    if let Some(y) = find_infeasibility_ray(problem) {
        return Ok(SdpSolution {
            w: HermitianMatrix::zeros(n),
            objective_value: f64::NEG_INFINITY,
            duals: y,
            kkt_residuals: KktResiduals {
                primal: f64::NAN,
                dual: f64::NAN,
                gap: f64::NAN,
            },
            status: SdpStatus::Infeasible,
            iterations: 0,
        });
    }

    // Scale objective and constraints to O(1).
    let c_scale = problem.objective.frobenius_norm().max(1e-300);
    let (c_emb, nn) = complex_to_real_embedding(&problem.objective.scale(1.0 / c_scale));
    let c_real = Rm::from_vec(c_emb, nn);

    let mut a_scales = Vec::with_capacity(problem.equalities.len());
    let mut cons_real = Vec::with_capacity(problem.equalities.len());
    for (a, b) in &problem.equalities {
        let s = a.frobenius_norm().max(1e-300);
        a_scales.push(s);
        let (e, _) = complex_to_real_embedding(&a.scale(1.0 / s));
        // Embedded traces double: Tr(E(W) E(A)) = 2 Tr(W A).
        cons_real.push((Rm::from_vec(e, nn), 2.0 * b / s));
    }

    let res = solve_real(&c_real, &cons_real, nn);
    let w = fold_embedding(&res.x, n);
    let objective_value = problem.objective.trace_product(&w);

    let status = match res.status {
        IpmStatus::Optimal => SdpStatus::Optimal,
        IpmStatus::MaxIter => SdpStatus::MaxIter,
    };
    if status == SdpStatus::MaxIter {
        return Ok(SdpSolution {
            w,
            objective_value,
            duals: res.y,
            kkt_residuals: KktResiduals {
                primal: res.primal_residual,
                dual: res.dual_residual,
                gap: res.rel_gap,
            },
            status,
            iterations: res.iterations,
        });
    }

    // Least-norm polish: project the folded solution onto the equality
    // constraints. The update sum_k mu_k A_k solves the Gram system
    // G mu = b - A(w) and removes the residual the interior-point iteration
    // leaves when it stalls near a face of the cone.
    let w = {
        let m = problem.equalities.len();
        let mut gram = vec![0.0; m * m];
        let mut rhs = vec![0.0; m];
        for (i, (ai, bi)) in problem.equalities.iter().enumerate() {
            rhs[i] = bi - ai.trace_product(&w);
            for (k, (ak, _)) in problem.equalities.iter().enumerate() {
                gram[i * m + k] = ai.trace_product(ak);
            }
        }
        match ipm::solve_dense(&mut gram, &mut rhs, m) {
            Some(mu) => {
                let mut polished = w;
                for ((a, _), mu_k) in problem.equalities.iter().zip(&mu) {
                    polished = polished.add(&a.scale(*mu_k));
                }
                polished
            }
            None => w,
        }
    };
    let objective_value = problem.objective.trace_product(&w);

    // Report residuals of the folded complex solution against the original
    // problem data.
    let primal = problem
        .equalities
        .iter()
        .map(|(a, b)| (a.trace_product(&w) - b).abs() / (1.0 + b.abs()))
        .fold(0.0f64, f64::max);
    // Duals of the scaled embedded problem map back by s_i / c_scale (the
    // factor 2 of the embedding cancels between objective and constraints).
    let duals: Vec<f64> = res
        .y
        .iter()
        .zip(&a_scales)
        .map(|(y, s)| y * c_scale / s)
        .collect();
    let mut slack = HermitianMatrix::zeros(n).sub(&problem.objective);
    for ((a, _), y) in problem.equalities.iter().zip(&duals) {
        slack = slack.add(&a.scale(*y));
    }
    let (slack_vals, _) = herm_eig(&slack)?;
    let dual = (-slack_vals[0]).max(0.0) / (1.0 + problem.objective.frobenius_norm());
    let dual_obj: f64 = problem
        .equalities
        .iter()
        .zip(&duals)
        .map(|((_, b), y)| b * y)
        .sum();
    let gap = (dual_obj - objective_value).abs() / (1.0 + objective_value.abs());

    Ok(SdpSolution {
        w,
        objective_value,
        duals,
        kkt_residuals: KktResiduals { primal, dual, gap },
        status,
        iterations: res.iterations,
    })
}

/// Best-scoring unit vector among the deterministic top eigenvector of `W`
/// and `n_draws` samples from `CN(0, W)` (Gaussian randomization).
/// Deterministic per seed; score ties resolve to the deterministic
/// candidate.
pub fn extract_rank1<F: Fn(&ComplexVector) -> f64>(
    w: &HermitianMatrix,
    n_draws: usize,
    scorer: F,
    seed: u64,
) -> Result<ComplexVector> {
    let n = w.dim();
    if w.frobenius_norm() == 0.0 {
        return Err(Error::Numeric("cannot extract a direction from W = 0".into()));
    }
    let (vals, vecs) = herm_eig(w)?;
    let top = vecs[n - 1].clone();
    let mut best = top.clone();
    let mut best_score = scorer(&best);

    // Sample v = sum_k sqrt(max(lambda_k, 0)) u_k zeta_k, zeta ~ CN(0, 1).
    let mut rng = ChannelRng::from_seed(seed);
    for _ in 0..n_draws {
        let mut v = ComplexVector::zeros(n);
        for k in 0..n {
            let lam = vals[k].max(0.0);
            if lam == 0.0 {
                continue;
            }
            let zeta = rng.cscg(1.0);
            v.axpy(zeta * lam.sqrt(), &vecs[k]);
        }
        let Ok(v) = v.normalized() else { continue };
        let score = scorer(&v);
        if score > best_score {
            best_score = score;
            best = v;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn herm(entries: &[(f64, f64)], dim: usize) -> HermitianMatrix {
        HermitianMatrix::new(
            entries.iter().map(|&(re, im)| Complex64::new(re, im)).collect(),
            dim,
        )
        .unwrap()
    }

    fn trace_constraint(dim: usize) -> (HermitianMatrix, f64) {
        (HermitianMatrix::identity(dim), 1.0)
    }

    #[test]
    fn top_eigenvalue_problem() {
        // C = diag(3, 1), Tr(W) = 1 -> W = diag(1, 0), value 3  [TRIVIAL]
        let c = herm(&[(3.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)], 2);
        let sol = solve(&SdpProblem::new(c, vec![trace_constraint(2)]).unwrap()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.objective_value - 3.0).abs() < 1e-6);
        assert!((sol.w.get(0, 0).re - 1.0).abs() < 1e-5);
        assert!(sol.kkt_residuals.primal < 1e-8);
        assert!(sol.kkt_residuals.dual < 1e-8);
        assert!(sol.kkt_residuals.gap < 1e-7);
    }

    #[test]
    fn objective_pinned_by_constraint() {
        // Tr(W C) = 0 with C indefinite forces the optimum to 0  [TRIVIAL]
        let c = herm(&[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (-1.0, 0.0)], 2);
        let problem =
            SdpProblem::new(c.clone(), vec![trace_constraint(2), (c.clone(), 0.0)]).unwrap();
        let sol = solve(&problem).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!(sol.objective_value.abs() < 1e-7);
    }

    #[test]
    fn infeasible_definite_constraint() {
        // Tr(W A) = 0 with A = I is impossible under Tr(W) = 1.
        let c = HermitianMatrix::identity(2);
        let problem = SdpProblem::new(
            c,
            vec![trace_constraint(2), (HermitianMatrix::identity(2), 0.0)],
        )
        .unwrap();
        let sol = solve(&problem).unwrap();
        assert_eq!(sol.status, SdpStatus::Infeasible);
        // The reported ray satisfies b^T y < 0 with sum y_i A_i >= 0.
        let b_dot: f64 = problem
            .equalities
            .iter()
            .zip(&sol.duals)
            .map(|((_, b), y)| b * y)
            .sum();
        assert!(b_dot < 0.0);
    }

    #[test]
    fn embedding_spectrum() {
        // H = [[0, -i], [i, 0]] has eigenvalues +-1; embedding doubles them  [TRIVIAL]
        let h = herm(&[(0.0, 0.0), (0.0, -1.0), (0.0, 1.0), (0.0, 0.0)], 2);
        let (e, m) = complex_to_real_embedding(&h);
        assert_eq!(m, 4);
        let (vals, _) = crate::numerics::sym_eig(&e, m).unwrap();
        let want = [-1.0, -1.0, 1.0, 1.0];
        for (v, w) in vals.iter().zip(want) {
            assert!((v - w).abs() < 1e-12);
        }
    }

    #[test]
    fn embedding_doubles_multiplicity_random() {
        // [DERIVED] eigensolver oracle on a random Hermitian matrix
        let mut rng = ChannelRng::from_seed(3);
        let n = 4;
        let mut h = HermitianMatrix::zeros(n);
        for _ in 0..6 {
            let v = rng.cscg_vector(n, 1.0);
            h.add_outer(rng.cscg(1.0).re, &v);
        }
        let (hv, _) = herm_eig(&h).unwrap();
        let (e, m) = complex_to_real_embedding(&h);
        let (ev, _) = crate::numerics::sym_eig(&e, m).unwrap();
        for (i, lam) in hv.iter().enumerate() {
            assert!((ev[2 * i] - lam).abs() < 1e-9 * h.frobenius_norm());
            assert!((ev[2 * i + 1] - lam).abs() < 1e-9 * h.frobenius_norm());
        }
    }

    #[test]
    fn extract_rank1_cases() {
        // exactly rank 1 -> its eigenvector direction  [TRIVIAL]
        let mut rng = ChannelRng::from_seed(8);
        let x = rng.cscg_vector(3, 1.0);
        let w = HermitianMatrix::outer(&x);
        let c_mat = w.clone();
        let v = extract_rank1(&w, 50, |v| c_mat.quadratic_form(v), 1).unwrap();
        let xn = x.normalized().unwrap();
        assert!(v.dot(&xn).norm() > 1.0 - 1e-9);

        // isotropic W: deterministic per seed  [TRIVIAL]
        let w = HermitianMatrix::identity(3).scale(1.0 / 3.0);
        let score = |v: &ComplexVector| v[0].norm_sqr();
        let a = extract_rank1(&w, 20, score, 7).unwrap();
        let b = extract_rank1(&w, 20, score, 7).unwrap();
        assert_eq!(a.as_slice(), b.as_slice());

        assert!(extract_rank1(&HermitianMatrix::zeros(2), 5, |_| 0.0, 0).is_err());
    }

    #[test]
    fn extract_rank1_near_rank1_recovery() {
        // eigs (1, 1e-6, ...) -> recovers >= 99.9% of Tr(W C)  [DERIVED]
        let mut rng = ChannelRng::from_seed(21);
        let x = rng.cscg_vector(4, 1.0).normalized().unwrap();
        let y = rng.cscg_vector(4, 1.0).normalized().unwrap();
        let mut w = HermitianMatrix::outer(&x);
        w.add_outer(1e-6, &y);
        let c_mat = {
            let mut c = HermitianMatrix::outer(&x);
            let z = rng.cscg_vector(4, 1.0);
            c.add_outer(0.3, &z);
            c
        };
        let v = extract_rank1(&w, 100, |v| c_mat.quadratic_form(v), 2).unwrap();
        let achieved = c_mat.quadratic_form(&v);
        let target = c_mat.trace_product(&w);
        assert!(achieved >= 0.999 * target, "{achieved} vs {target}");
    }

    #[test]
    fn scale_covariance() {
        // scaling C by c > 0 scales the optimum by c, same argmax.
        let mut rng = ChannelRng::from_seed(15);
        let mut c = HermitianMatrix::zeros(3);
        for _ in 0..4 {
            let v = rng.cscg_vector(3, 1.0);
            c.add_outer(rng.cscg(1.0).re.abs() + 0.1, &v);
        }
        let p1 = SdpProblem::new(c.clone(), vec![trace_constraint(3)]).unwrap();
        let p2 = SdpProblem::new(c.scale(37.0), vec![trace_constraint(3)]).unwrap();
        let s1 = solve(&p1).unwrap();
        let s2 = solve(&p2).unwrap();
        assert_eq!(s1.status, SdpStatus::Optimal);
        assert!((s2.objective_value / (37.0 * s1.objective_value) - 1.0).abs() < 1e-6);
        assert!(s1.w.sub(&s2.w).frobenius_norm() < 1e-5);
    }

    #[test]
    fn psd_solution_and_kkt() {
        // Random constrained instance: W PSD, residuals tight, weak duality.
        let mut rng = ChannelRng::from_seed(33);
        let mut c = HermitianMatrix::zeros(4);
        for _ in 0..5 {
            let v = rng.cscg_vector(4, 1.0);
            c.add_outer(rng.cscg(1.0).re, &v);
        }
        // Indefinite homogeneous constraint keeps the problem feasible.
        let mut d = HermitianMatrix::zeros(4);
        let v = rng.cscg_vector(4, 1.0);
        d.add_outer(1.0, &v);
        let u = rng.cscg_vector(4, 1.0);
        d.add_outer(-1.3, &u);
        let problem =
            SdpProblem::new(c, vec![trace_constraint(4), (d, 0.0)]).unwrap();
        let sol = solve(&problem).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        let (wvals, _) = herm_eig(&sol.w).unwrap();
        assert!(wvals[0] >= -1e-9);
        assert!(sol.kkt_residuals.primal <= 1e-8);
        assert!(sol.kkt_residuals.dual <= 1e-8);
        assert!(sol.kkt_residuals.gap <= 1e-7);
        // Weak duality.
        let dual_obj: f64 = problem
            .equalities
            .iter()
            .zip(&sol.duals)
            .map(|((_, b), y)| b * y)
            .sum();
        assert!(dual_obj >= sol.objective_value - 1e-6 * (1.0 + sol.objective_value.abs()));
    }
}
