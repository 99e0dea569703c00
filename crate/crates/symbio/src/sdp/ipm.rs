//! Dense primal-dual path-following interior-point solver for small real
//! symmetric SDPs in the form
//!
//! ```text
//! maximize    <C, X>
//! subject to  <A_i, X> = b_i,   X >= 0 (PSD)
//! ```
//!
//! HKM search direction with a Mehrotra predictor-corrector, dense
//! factorizations throughout. Dimensions here never exceed a few tens, so
//! there is no sparsity or blocking machinery.

use crate::numerics::sym_eig;

const MAX_ITER: usize = 200;
const STEP_FRACTION: f64 = 0.98;
const TOL_FEAS: f64 = 1e-10;
const TOL_GAP: f64 = 1e-9;
// When the iteration stalls near the boundary, accept the point anyway if
// every residual is below this looser threshold.
const TOL_ACCEPT: f64 = 1e-8;

/// Row-major dense real symmetric matrix helpers on `Vec<f64>`.
#[derive(Debug, Clone)]
pub(crate) struct Rm {
    pub data: Vec<f64>,
    pub n: usize,
}

impl Rm {
    pub fn zeros(n: usize) -> Self {
        Self {
            data: vec![0.0; n * n],
            n,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_vec(data: Vec<f64>, n: usize) -> Self {
        assert_eq!(data.len(), n * n);
        Self { data, n }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            data: self.data.iter().map(|x| x * c).collect(),
            n: self.n,
        }
    }

    pub fn add_scaled(&mut self, c: f64, other: &Self) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.data[i * n + k];
                if aik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += aik * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn inner(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn symmetrize(&mut self) {
        let n = self.n;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (self.data[i * n + j] + self.data[j * n + i]);
                self.data[i * n + j] = avg;
                self.data[j * n + i] = avg;
            }
        }
    }

    /// Cholesky factor (lower), or None if not positive definite.
    pub fn cholesky(&self) -> Option<Rm> {
        let n = self.n;
        let mut l = Rm::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let mut sum = self.get(i, j);
                for k in 0..j {
                    sum -= l.get(i, k) * l.get(j, k);
                }
                if i == j {
                    if sum <= 0.0 || !sum.is_finite() {
                        return None;
                    }
                    l.data[i * n + i] = sum.sqrt();
                } else {
                    l.data[i * n + j] = sum / l.get(j, j);
                }
            }
        }
        Some(l)
    }

    /// Inverse via Cholesky; caller guarantees positive definiteness.
    pub fn inverse_pd(&self) -> Option<Rm> {
        let n = self.n;
        let l = self.cholesky()?;
        // Solve L Z = I, then L^T X = Z.
        let mut inv = Rm::zeros(n);
        for col in 0..n {
            let mut y = vec![0.0; n];
            for i in 0..n {
                let mut sum = if i == col { 1.0 } else { 0.0 };
                for k in 0..i {
                    sum -= l.get(i, k) * y[k];
                }
                y[i] = sum / l.get(i, i);
            }
            for i in (0..n).rev() {
                let mut sum = y[i];
                for k in (i + 1)..n {
                    sum -= l.get(k, i) * y[k];
                }
                y[i] = sum / l.get(i, i);
                inv.data[i * n + col] = y[i];
            }
        }
        inv.symmetrize();
        Some(inv)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let (vals, _) = sym_eig(&self.data, self.n).expect("eigensolver failed");
        vals[0]
    }
}

/// Largest step `alpha` in `[0, 1]` such that `X + alpha D` stays PSD, times
/// the boundary fraction.
fn max_step(x: &Rm, d: &Rm) -> f64 {
    let l = match x.cholesky() {
        Some(l) => l,
        None => return 0.0,
    };
    let n = x.n;
    // W = L^{-1} D L^{-T}
    let mut w = Rm::zeros(n);
    // First solve L Y = D (columns), then L W^T = Y^T; exploit symmetry loosely.
    let mut y = vec![0.0; n * n];
    for col in 0..n {
        for i in 0..n {
            let mut sum = d.get(i, col);
            for k in 0..i {
                sum -= l.get(i, k) * y[k * n + col];
            }
            y[i * n + col] = sum / l.get(i, i);
        }
    }
    for row in 0..n {
        for i in 0..n {
            let mut sum = y[row * n + i];
            for k in 0..i {
                sum -= l.get(i, k) * w.data[row * n + k];
            }
            w.data[row * n + i] = sum / l.get(i, i);
        }
    }
    w.symmetrize();
    let lam_min = w.min_eigenvalue();
    if lam_min >= 0.0 {
        1.0
    } else {
        (STEP_FRACTION / (-lam_min)).min(1.0)
    }
}

/// Solve a small dense linear system by partial-pivot Gaussian elimination.
pub(crate) fn solve_dense(a: &mut [f64], b: &mut [f64], m: usize) -> Option<Vec<f64>> {
    for col in 0..m {
        let piv = (col..m)
            .max_by(|&i, &j| a[i * m + col].abs().partial_cmp(&a[j * m + col].abs()).unwrap())?;
        if a[piv * m + col].abs() < 1e-300 {
            return None;
        }
        if piv != col {
            for k in 0..m {
                a.swap(col * m + k, piv * m + k);
            }
            b.swap(col, piv);
        }
        for row in (col + 1)..m {
            let f = a[row * m + col] / a[col * m + col];
            for k in col..m {
                a[row * m + k] -= f * a[col * m + k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; m];
    for i in (0..m).rev() {
        let mut sum = b[i];
        for k in (i + 1)..m {
            sum -= a[i * m + k] * x[k];
        }
        x[i] = sum / a[i * m + i];
    }
    Some(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum IpmStatus {
    Optimal,
    MaxIter,
}

#[derive(Debug)]
pub(crate) struct IpmResult {
    pub x: Rm,
    pub y: Vec<f64>,
    pub status: IpmStatus,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub rel_gap: f64,
}

/// Run the predictor-corrector loop. Inputs are assumed pre-scaled to O(1)
/// magnitudes by the caller.
pub(crate) fn solve_real(c: &Rm, constraints: &[(Rm, f64)], n: usize) -> IpmResult {
    let m = constraints.len();
    let mut x = Rm::identity(n);
    let mut s = Rm::identity(n);
    let mut y = vec![0.0; m];

    let b_norm = 1.0 + constraints.iter().map(|(_, b)| b * b).sum::<f64>().sqrt();
    let c_norm = 1.0 + c.norm();

    let mut status = IpmStatus::MaxIter;
    let mut iterations = 0;
    let (mut rp_norm, mut rd_norm, mut gap_rel) = (f64::MAX, f64::MAX, f64::MAX);

    for iter in 0..MAX_ITER {
        iterations = iter;
        let mu = x.inner(&s) / n as f64;

        // Residuals.
        let rp: Vec<f64> = constraints
            .iter()
            .map(|(a, b)| b - a.inner(&x))
            .collect();
        // Rd = sum y_i A_i - C - S (zero at dual feasibility).
        let mut rd = c.scaled(-1.0);
        for (i, (a, _)) in constraints.iter().enumerate() {
            rd.add_scaled(y[i], a);
        }
        rd.add_scaled(-1.0, &s);

        rp_norm = rp.iter().map(|r| r * r).sum::<f64>().sqrt() / b_norm;
        rd_norm = rd.norm() / c_norm;
        let obj = c.inner(&x);
        gap_rel = x.inner(&s) / (1.0 + obj.abs());
        let dual_gap = (constraints
            .iter()
            .zip(&y)
            .map(|((_, b), yi)| b * yi)
            .sum::<f64>()
            - obj)
            .abs()
            / (1.0 + obj.abs());

        if rp_norm < TOL_FEAS && rd_norm < TOL_FEAS && gap_rel.min(dual_gap) < TOL_GAP {
            status = IpmStatus::Optimal;
            break;
        }

        let s_inv = match s.inverse_pd() {
            Some(v) => v,
            None => break,
        };

        // Schur complement M_ik = Tr(A_i X A_k S^{-1}) and the direction
        // solve, shared by predictor and corrector.
        let xa: Vec<Rm> = constraints.iter().map(|(a, _)| x.matmul(a)).collect();
        let asinv: Vec<Rm> = constraints.iter().map(|(a, _)| a.matmul(&s_inv)).collect();
        let mut schur = vec![0.0; m * m];
        for i in 0..m {
            for k in 0..m {
                schur[i * m + k] = asinv[i].inner(&xa[k]);
            }
        }

        let direction = |rc: &Rm, rp: &[f64], rd: &Rm| -> Option<(Rm, Vec<f64>, Rm)> {
            // q_i = <A_i, (Rc - X Rd) S^{-1}>
            let mut t = rc.clone();
            t.add_scaled(-1.0, &x.matmul(rd));
            let tsinv = t.matmul(&s_inv);
            let mut rhs = vec![0.0; m];
            for i in 0..m {
                rhs[i] = constraints[i].0.inner(&tsinv) - rp[i];
            }
            // M dy = q - rp, then dS = sum dy A + Rd, dX = (Rc - X dS) S^{-1}.
            let mut a_copy = schur.clone();
            let dy = solve_dense(&mut a_copy, &mut rhs, m)?;
            let mut ds = rd.clone();
            for i in 0..m {
                ds.add_scaled(dy[i], &constraints[i].0);
            }
            let mut dx = rc.clone();
            dx.add_scaled(-1.0, &x.matmul(&ds));
            let mut dx = dx.matmul(&s_inv);
            dx.symmetrize();
            Some((dx, dy, ds))
        };

        // Predictor (affine scaling): Rc = -X S.
        let xs = x.matmul(&s);
        let rc_aff = xs.scaled(-1.0);
        let (dx_aff, _dy_aff, ds_aff) = match direction(&rc_aff, &rp, &rd) {
            Some(v) => v,
            None => break,
        };
        let ap = max_step(&x, &dx_aff);
        let ad = max_step(&s, &ds_aff);
        let mut x_aff = x.clone();
        x_aff.add_scaled(ap, &dx_aff);
        let mut s_aff = s.clone();
        s_aff.add_scaled(ad, &ds_aff);
        let mu_aff = x_aff.inner(&s_aff) / n as f64;
        let sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);

        // Corrector: Rc = sigma mu I - X S - dX_aff dS_aff.
        let mut rc = Rm::identity(n).scaled(sigma * mu);
        rc.add_scaled(-1.0, &xs);
        rc.add_scaled(-1.0, &dx_aff.matmul(&ds_aff));
        let (dx, dy, ds) = match direction(&rc, &rp, &rd) {
            Some(v) => v,
            None => break,
        };
        let mut ap = max_step(&x, &dx);
        let mut ad = max_step(&s, &ds);
        let (mut dx, mut dy, mut ds) = (dx, dy, ds);
        if ap < 1e-12 && ad < 1e-12 {
            // The corrector direction hit the boundary immediately; retry
            // with a pure centering direction before giving up.
            let mut rc = Rm::identity(n).scaled(mu);
            rc.add_scaled(-1.0, &xs);
            match direction(&rc, &rp, &rd) {
                Some(v) => (dx, dy, ds) = v,
                None => break,
            }
            ap = max_step(&x, &dx);
            ad = max_step(&s, &ds);
            if ap < 1e-12 && ad < 1e-12 {
                break;
            }
        }
        x.add_scaled(ap, &dx);
        for i in 0..m {
            y[i] += ad * dy[i];
        }
        s.add_scaled(ad, &ds);
        x.symmetrize();
        s.symmetrize();
    }

    if status == IpmStatus::MaxIter {
        // Recompute the residuals at the final point; a stalled iterate that
        // already satisfies the looser acceptance tolerance is still optimal.
        let rp: Vec<f64> = constraints.iter().map(|(a, b)| b - a.inner(&x)).collect();
        let mut rd = c.scaled(-1.0);
        for (i, (a, _)) in constraints.iter().enumerate() {
            rd.add_scaled(y[i], a);
        }
        rd.add_scaled(-1.0, &s);
        rp_norm = rp.iter().map(|r| r * r).sum::<f64>().sqrt() / b_norm;
        rd_norm = rd.norm() / c_norm;
        let obj = c.inner(&x);
        gap_rel = x.inner(&s) / (1.0 + obj.abs());
        let dual_gap = (constraints
            .iter()
            .zip(&y)
            .map(|((_, b), yi)| b * yi)
            .sum::<f64>()
            - obj)
            .abs()
            / (1.0 + obj.abs());
        if rp_norm < TOL_ACCEPT && rd_norm < TOL_ACCEPT && gap_rel.min(dual_gap) < TOL_ACCEPT {
            status = IpmStatus::Optimal;
        }
    }

    IpmResult {
        x,
        y,
        status,
        iterations,
        primal_residual: rp_norm,
        dual_residual: rd_norm,
        rel_gap: gap_rel,
    }
}
