//! Linear-algebra kernels: symmetric sparse solve with Dirichlet
//! elimination (banded LDLᵀ, no pivoting) and the smallest eigenpairs of
//! local generalized symmetric problems (dense, via Cholesky reduction).

use nalgebra::{DMatrix, DVector};

use crate::error::{DamError, Result};
use crate::fem::SparseMatrix;

/// A symmetric system with a set of constrained dofs and their values.
#[derive(Debug)]
pub struct LinearSystem<'a> {
    pub matrix: &'a SparseMatrix,
    pub rhs: Vec<f64>,
    pub dirichlet: Vec<(usize, f64)>,
}

/// Factored reduced operator for repeated solves against changing
/// right-hand sides. The Dirichlet dofs are eliminated; free dofs keep
/// their relative order so the band structure of the lexicographic
/// numbering is preserved.
pub struct DirichletSolver {
    n_full: usize,
    free: Vec<usize>,
    dirichlet: Vec<(usize, f64)>,
    /// Σ · lift, used to correct the reduced right-hand side.
    sigma_lift: Vec<f64>,
    bandwidth: usize,
    /// Lower band of L (unit diagonal implicit): band[i*(bw+1)+d] is the
    /// entry (i, i-bw+d); D stored separately.
    band: Vec<f64>,
    diag: Vec<f64>,
    pub min_abs_pivot: f64,
    matrix: SparseMatrix,
}

impl DirichletSolver {
    pub fn new(matrix: &SparseMatrix, dirichlet: &[(usize, f64)]) -> Result<Self> {
        let n_full = matrix.n;
        let mut constrained = vec![false; n_full];
        let mut lift = vec![0.0; n_full];
        for &(d, v) in dirichlet {
            constrained[d] = true;
            lift[d] = v;
        }
        let free: Vec<usize> = (0..n_full).filter(|&i| !constrained[i]).collect();
        let mut full_to_free = vec![None; n_full];
        for (k, &i) in free.iter().enumerate() {
            full_to_free[i] = Some(k);
        }
        let sigma_lift = matrix.matvec(&lift);

        let n = free.len();
        if n == 0 {
            return Err(DamError::InvalidArgument(
                "all dofs constrained".to_string(),
            ));
        }
        let mut bandwidth = 0usize;
        for (k, &i) in free.iter().enumerate() {
            let (cols, _) = matrix.row(i);
            for &j in cols {
                if let Some(kj) = full_to_free[j] {
                    if kj < k {
                        bandwidth = bandwidth.max(k - kj);
                    }
                }
            }
        }

        // dense band of the reduced matrix
        let width = bandwidth + 1;
        let mut band = vec![0.0; n * width];
        let mut diag = vec![0.0; n];
        for (k, &i) in free.iter().enumerate() {
            let (cols, vals) = matrix.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if let Some(kj) = full_to_free[j] {
                    if kj == k {
                        diag[k] = v;
                    } else if kj < k {
                        band[k * width + (bandwidth - (k - kj))] = v;
                    }
                }
            }
        }

        // in-place banded LDL^T: band holds L (unit diagonal), diag holds D
        let mut min_abs_pivot = f64::MAX;
        for i in 0..n {
            let lo = i.saturating_sub(bandwidth);
            for j in lo..i {
                let mut sum = band[i * width + (bandwidth - (i - j))];
                let klo = lo.max(j.saturating_sub(bandwidth));
                for k in klo..j {
                    sum -= band[i * width + (bandwidth - (i - k))]
                        * diag[k]
                        * band[j * width + (bandwidth - (j - k))];
                }
                band[i * width + (bandwidth - (i - j))] = sum / diag[j];
            }
            let mut d = diag[i];
            for k in lo..i {
                let l = band[i * width + (bandwidth - (i - k))];
                d -= l * l * diag[k];
            }
            if d == 0.0 || !d.is_finite() {
                return Err(DamError::Solver {
                    msg: format!("zero pivot at reduced dof {i}"),
                    residual: f64::NAN,
                });
            }
            diag[i] = d;
            min_abs_pivot = min_abs_pivot.min(d.abs());
        }

        Ok(Self {
            n_full,
            free,
            dirichlet: dirichlet.to_vec(),
            sigma_lift,
            bandwidth,
            band,
            diag,
            min_abs_pivot,
            matrix: matrix.clone(),
        })
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    /// Nodal lift vector: Dirichlet values at constrained dofs, 0 elsewhere.
    pub fn lift(&self) -> Vec<f64> {
        let mut lift = vec![0.0; self.n_full];
        for &(d, v) in &self.dirichlet {
            lift[d] = v;
        }
        lift
    }

    /// Solve Σ p = rhs with the stored constraints; returns the full nodal
    /// vector with exact Dirichlet values. Checks the reduced residual.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(rhs.len(), self.n_full);
        let n = self.free.len();
        let bw = self.bandwidth;
        let width = bw + 1;
        let mut x: Vec<f64> = self
            .free
            .iter()
            .map(|&i| rhs[i] - self.sigma_lift[i])
            .collect();
        let reduced_rhs = x.clone();

        // forward: L z = rhs (band row i is contiguous)
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let row = &self.band[i * width + (bw - (i - lo))..i * width + bw];
            let s: f64 = row.iter().zip(&x[lo..i]).map(|(l, xk)| l * xk).sum();
            x[i] -= s;
        }
        // diagonal
        for i in 0..n {
            x[i] /= self.diag[i];
        }
        // backward: Lᵀ x = z, swept by rows of L so the band is read
        // contiguously: once x[k] is final, subtract its column influence
        for k in (0..n).rev() {
            let xk = x[k];
            if xk != 0.0 {
                let lo = k.saturating_sub(bw);
                let row = &self.band[k * width + (bw - (k - lo))..k * width + bw];
                for (l, xi) in row.iter().zip(&mut x[lo..k]) {
                    *xi -= l * xk;
                }
            }
        }

        // residual contract on the reduced system
        let mut full = self.lift();
        for (k, &i) in self.free.iter().enumerate() {
            full[i] = x[k];
        }
        let ax = self.matrix.matvec(&full);
        let mut res2 = 0.0;
        let mut rhs2 = 0.0;
        for (k, &i) in self.free.iter().enumerate() {
            let r = ax[i] - (reduced_rhs[k] + self.sigma_lift[i]);
            res2 += r * r;
            let b = reduced_rhs[k] + self.sigma_lift[i];
            rhs2 += b * b;
        }
        let rel = res2.sqrt() / rhs2.sqrt().max(f64::MIN_POSITIVE);
        if !rel.is_finite() || rel > 1e-10 {
            return Err(DamError::Solver {
                msg: "reduced solve residual too large".to_string(),
                residual: rel,
            });
        }
        Ok(full)
    }
}

/// One-shot convenience wrapper.
pub fn solve_dirichlet(system: &LinearSystem) -> Result<Vec<f64>> {
    DirichletSolver::new(system.matrix, &system.dirichlet)?.solve(&system.rhs)
}

/// Ascending eigenpairs of a generalized symmetric problem.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    /// Column k is the M-orthonormal eigenvector of values[k].
    pub vectors: DMatrix<f64>,
}

/// L smallest eigenpairs of K ψ = σ M ψ with K PSD and M SPD, computed
/// densely through the Cholesky reduction M = C Cᵀ,
/// B = C⁻¹ K C⁻ᵀ, ψ = C⁻ᵀ v. Local neighborhood problems stay small
/// enough that the dense path is the whole story.
pub fn smallest_eigenpairs(k: &SparseMatrix, m: &SparseMatrix, l: usize) -> Result<EigenPairs> {
    let n = k.n;
    if m.n != n {
        return Err(DamError::InvalidArgument(
            "matrix dimensions differ".to_string(),
        ));
    }
    if l == 0 || l > n {
        return Err(DamError::InvalidArgument(format!(
            "requested {l} eigenpairs of a {n}-dof problem"
        )));
    }
    let kd = to_dense(k);
    let md = to_dense(m);
    // Equilibrate the pencil: with D = diag(M)^{-1/2}, the scaled mass DMD
    // has unit diagonal, which keeps the Cholesky factor well conditioned
    // for high-contrast weights (otherwise the reduction can lose the
    // Neumann kernel entirely).
    let mut scale = DVector::zeros(n);
    for i in 0..n {
        let d = md[(i, i)];
        if d <= 0.0 {
            return Err(DamError::InvalidArgument(
                "mass matrix not SPD".to_string(),
            ));
        }
        scale[i] = 1.0 / d.sqrt();
    }
    let mut ks = kd.clone();
    let mut ms = md.clone();
    for i in 0..n {
        for j in 0..n {
            let s = scale[i] * scale[j];
            ks[(i, j)] *= s;
            ms[(i, j)] *= s;
        }
    }
    let chol = ms
        .clone()
        .cholesky()
        .ok_or_else(|| DamError::InvalidArgument("mass matrix not SPD".to_string()))?;
    let c = chol.l();
    // B = C^-1 K C^-T, symmetrized against roundoff
    let y = c
        .solve_lower_triangular(&ks)
        .ok_or_else(|| DamError::Solver {
            msg: "singular Cholesky factor".to_string(),
            residual: f64::NAN,
        })?;
    let b = c
        .solve_lower_triangular(&y.transpose())
        .ok_or_else(|| DamError::Solver {
            msg: "singular Cholesky factor".to_string(),
            residual: f64::NAN,
        })?;
    let b = (&b + b.transpose()) * 0.5;
    let eig = b.clone().symmetric_eigen();

    // Order by the Rayleigh quotient of each computed vector rather than the
    // solver's eigenvalue array: on badly spread spectra the two can
    // disagree enough to misplace the Neumann kernel.
    let quotients: Vec<f64> = (0..n)
        .map(|idx| {
            let v = eig.eigenvectors.column(idx);
            v.dot(&(&b * v)) / v.dot(&v)
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &bb| quotients[a].partial_cmp(&quotients[bb]).unwrap());

    let mut values = Vec::with_capacity(l);
    let mut vectors = DMatrix::zeros(n, l);
    let ct = c.transpose();
    for (col, &idx) in order.iter().take(l).enumerate() {
        let v: DVector<f64> = eig.eigenvectors.column(idx).into_owned();
        let mut psi = ct.solve_upper_triangular(&v).ok_or_else(|| DamError::Solver {
            msg: "singular Cholesky factor".to_string(),
            residual: f64::NAN,
        })?;
        // undo the equilibration: ψ = D ψ'
        for i in 0..n {
            psi[i] *= scale[i];
        }
        // Rayleigh-quotient update: the quotient is second-order accurate in
        // the eigenvector error, unlike the value carried through the
        // ill-conditioned Cholesky transform.
        let kpsi = &kd * &psi;
        let mpsi = &md * &psi;
        let sigma = psi.dot(&kpsi) / psi.dot(&mpsi);
        values.push(sigma);
        vectors.set_column(col, &psi);
    }
    // refinement can swap tightly clustered pairs: restore ascending order
    let mut perm: Vec<usize> = (0..l).collect();
    perm.sort_by(|&a, &bb| values[a].partial_cmp(&values[bb]).unwrap());
    if perm.iter().enumerate().any(|(i, &p)| i != p) {
        let old_vals = values.clone();
        let old_vecs = vectors.clone();
        for (i, &p) in perm.iter().enumerate() {
            values[i] = old_vals[p];
            vectors.set_column(i, &old_vecs.column(p));
        }
    }

    // Backward-error contract: ‖Kψ − σMψ‖ small against (‖K‖ + σ‖M‖)‖ψ‖,
    // which stays meaningful for near-kernel pairs where ‖Kψ‖ ≈ 0. The
    // tolerance budgets for the condition number of the Cholesky factor of M,
    // which amplifies the dense eigensolver's O(eps) backward error when the
    // coefficient is high-contrast.
    let k_scale = kd.norm();
    let m_scale = md.norm();
    for (col, &sigma) in values.iter().enumerate() {
        let psi = vectors.column(col).into_owned();
        let kpsi = &kd * &psi;
        let mpsi = &md * &psi;
        let res = (&kpsi - sigma * &mpsi).norm();
        let denom = ((k_scale + sigma.abs() * m_scale) * psi.norm()).max(f64::MIN_POSITIVE);
        if res > 1e-4 * denom {
            return Err(DamError::Solver {
                msg: format!("eigenpair {col} residual too large"),
                residual: res / denom,
            });
        }
    }

    Ok(EigenPairs {
        values,
        vectors,
    })
}

pub fn to_dense(m: &SparseMatrix) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(m.n, m.n);
    for i in 0..m.n {
        let (cols, vals) = m.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            d[(i, j)] += v;
        }
    }
    d
}
