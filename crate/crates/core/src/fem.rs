//! Q1 finite element assembly on the structured fine grid: the fine
//! matrices A, M, M_Γ0, M_Γ∪Γ0 and the characteristics transport vector.
//!
//! Element permeability is constant, so the 2x2 Gauss rule used everywhere
//! is exact for every polynomial integrand except the composed transport
//! term, where it is an approximation.

use crate::grid::{Boundary, FineMesh};
use crate::permeability::PermeabilityField;

const GP: f64 = 0.577_350_269_189_625_76; // 1/sqrt(3)

/// Symmetric sparse matrix in CSR form, both triangles stored.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseMatrix {
    /// Build from triplets, summing duplicates. Entry order is normalized,
    /// so identical triplet multisets give bit-identical matrices.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx: Vec<usize> = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut cur_row = 0usize;
        for (r, c, v) in triplets {
            debug_assert!(r < n && c < n);
            while cur_row < r {
                cur_row += 1;
                row_ptr[cur_row] = col_idx.len();
            }
            if col_idx.len() > row_ptr[cur_row] && *col_idx.last().unwrap() == c {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
            }
        }
        while cur_row < n {
            cur_row += 1;
            row_ptr[cur_row] = col_idx.len();
        }
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            let mut s = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                s += v * x[c];
            }
            y[i] = s;
        }
    }

    /// Largest relative asymmetry |a_ij - a_ji| / max|a|.
    pub fn asymmetry(&self) -> f64 {
        let scale = self
            .values
            .iter()
            .fold(0.0f64, |m, &v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if j > i {
                    worst = worst.max((v - self.get(j, i)).abs());
                }
            }
        }
        worst / scale
    }

    /// Linear combination Σ c_k B_k of structurally compatible matrices.
    pub fn linear_combination(terms: &[(f64, &SparseMatrix)]) -> SparseMatrix {
        let n = terms[0].1.n;
        let mut triplets = Vec::new();
        for &(c, m) in terms {
            assert_eq!(m.n, n);
            for i in 0..n {
                let (cols, vals) = m.row(i);
                for (&j, &v) in cols.iter().zip(vals) {
                    triplets.push((i, j, c * v));
                }
            }
        }
        SparseMatrix::from_triplets(n, triplets)
    }

    /// Coordinate-format text dump for debugging.
    pub fn dump_coo(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                writeln!(out, "{i} {j} {v:.16e}")?;
            }
        }
        Ok(())
    }
}

/// Q1 shape functions on the reference square [-1,1]^2, corner order
/// (-,-), (+,-), (+,+), (-,+).
#[inline]
pub fn shape(xi: f64, eta: f64) -> [f64; 4] {
    [
        0.25 * (1.0 - xi) * (1.0 - eta),
        0.25 * (1.0 + xi) * (1.0 - eta),
        0.25 * (1.0 + xi) * (1.0 + eta),
        0.25 * (1.0 - xi) * (1.0 + eta),
    ]
}

#[inline]
fn shape_grad(xi: f64, eta: f64) -> [(f64, f64); 4] {
    [
        (-0.25 * (1.0 - eta), -0.25 * (1.0 - xi)),
        (0.25 * (1.0 - eta), -0.25 * (1.0 + xi)),
        (0.25 * (1.0 + eta), 0.25 * (1.0 + xi)),
        (-0.25 * (1.0 + eta), 0.25 * (1.0 - xi)),
    ]
}

const GAUSS_2X2: [(f64, f64); 4] = [(-GP, -GP), (GP, -GP), (GP, GP), (-GP, GP)];

fn element_stiffness(hx: f64, hy: f64, kappa: f64) -> [[f64; 4]; 4] {
    let det = hx * hy / 4.0;
    let mut ke = [[0.0; 4]; 4];
    for &(xi, eta) in &GAUSS_2X2 {
        let g = shape_grad(xi, eta);
        for a in 0..4 {
            let (dxa, dya) = (g[a].0 * 2.0 / hx, g[a].1 * 2.0 / hy);
            for b in 0..4 {
                let (dxb, dyb) = (g[b].0 * 2.0 / hx, g[b].1 * 2.0 / hy);
                ke[a][b] += kappa * (dxa * dxb + dya * dyb) * det;
            }
        }
    }
    ke
}

fn element_mass(hx: f64, hy: f64, kappa: f64) -> [[f64; 4]; 4] {
    let det = hx * hy / 4.0;
    let mut me = [[0.0; 4]; 4];
    for &(xi, eta) in &GAUSS_2X2 {
        let n = shape(xi, eta);
        for a in 0..4 {
            for b in 0..4 {
                me[a][b] += kappa * n[a] * n[b] * det;
            }
        }
    }
    me
}

/// Stiffness A with a_ij = ∫ κ ∇φ_i·∇φ_j.
pub fn assemble_stiffness(mesh: &FineMesh, kappa: &PermeabilityField) -> SparseMatrix {
    let mut triplets = Vec::with_capacity(16 * mesh.n_elements());
    for e in 0..mesh.n_elements() {
        let nodes = mesh.element_nodes(e);
        let ke = element_stiffness(mesh.hx, mesh.hy, kappa.at(e));
        for a in 0..4 {
            for b in 0..4 {
                triplets.push((nodes[a], nodes[b], ke[a][b]));
            }
        }
    }
    SparseMatrix::from_triplets(mesh.n_nodes(), triplets)
}

/// Weighted mass M with m_ij = ∫ κ φ_i φ_j.
pub fn assemble_weighted_mass(mesh: &FineMesh, kappa: &PermeabilityField) -> SparseMatrix {
    let mut triplets = Vec::with_capacity(16 * mesh.n_elements());
    for e in 0..mesh.n_elements() {
        let nodes = mesh.element_nodes(e);
        let me = element_mass(mesh.hx, mesh.hy, kappa.at(e));
        for a in 0..4 {
            for b in 0..4 {
                triplets.push((nodes[a], nodes[b], me[a][b]));
            }
        }
    }
    SparseMatrix::from_triplets(mesh.n_nodes(), triplets)
}

/// Seepage boundary mass M_Γ0 with m_ij = ∫_{Γ0} φ_i φ_j.
pub fn assemble_boundary_mass_seepage(mesh: &FineMesh) -> SparseMatrix {
    let mut triplets = Vec::new();
    for be in &mesh.boundary_edges {
        if be.tag != Boundary::Air {
            continue;
        }
        let h = be.length;
        let block = [[h / 3.0, h / 6.0], [h / 6.0, h / 3.0]];
        for a in 0..2 {
            for b in 0..2 {
                triplets.push((be.nodes[a], be.nodes[b], block[a][b]));
            }
        }
    }
    SparseMatrix::from_triplets(mesh.n_nodes(), triplets)
}

/// Signed flux boundary mass M_Γ∪Γ0 with m_ij = ∫_{Γ∪Γ0} κ (e2·n) φ_i φ_j.
/// The weight is +κ on the top, -κ on the bottom and 0 on lateral edges;
/// κ is taken from the unique adjacent element.
pub fn assemble_boundary_flux_mass(mesh: &FineMesh, kappa: &PermeabilityField) -> SparseMatrix {
    let mut triplets = Vec::new();
    for be in &mesh.boundary_edges {
        if be.tag == Boundary::Water || be.normal_e2 == 0.0 {
            continue;
        }
        let w = be.normal_e2 * kappa.at(be.element);
        let h = be.length;
        let block = [[w * h / 3.0, w * h / 6.0], [w * h / 6.0, w * h / 3.0]];
        for a in 0..2 {
            for b in 0..2 {
                triplets.push((be.nodes[a], be.nodes[b], block[a][b]));
            }
        }
    }
    SparseMatrix::from_triplets(mesh.n_nodes(), triplets)
}

/// Foot of the characteristic through x: (x1, x2 + g δt), clamped to the
/// domain in x2 (constant extension of θκ beyond the top).
#[inline]
pub fn characteristic_foot(x: (f64, f64), g: f64, dt: f64) -> (f64, f64) {
    (x.0, (x.1 + g * dt).clamp(0.0, 1.0))
}

/// Evaluate the nodal field θ at a point by bilinear interpolation on the
/// element containing it.
pub fn interpolate_nodal(mesh: &FineMesh, theta: &[f64], x: f64, y: f64) -> f64 {
    let e = mesh.element_containing(x, y);
    let i = e % mesh.nx;
    let j = e / mesh.nx;
    let xi = 2.0 * (x / mesh.hx - i as f64) - 1.0;
    let eta = 2.0 * (y / mesh.hy - j as f64) - 1.0;
    let n = shape(xi, eta);
    let nodes = mesh.element_nodes(e);
    (0..4).map(|a| n[a] * theta[nodes[a]]).sum()
}

/// Transport right-hand side of the characteristics scheme:
/// b_i = (1/δt) ∫ (θ_prev κ)(Φ(x)) φ_i(x) dx with 2x2 Gauss quadrature,
/// bilinear interpolation of θ_prev and element lookup of κ at the foot.
pub fn assemble_transport_rhs(
    mesh: &FineMesh,
    kappa: &PermeabilityField,
    theta_prev: &[f64],
    g: f64,
    dt: f64,
) -> Vec<f64> {
    let mut b = vec![0.0; mesh.n_nodes()];
    let det = mesh.hx * mesh.hy / 4.0;
    for e in 0..mesh.n_elements() {
        let i = e % mesh.nx;
        let j = e / mesh.nx;
        let (x0, y0) = (i as f64 * mesh.hx, j as f64 * mesh.hy);
        let nodes = mesh.element_nodes(e);
        for &(xi, eta) in &GAUSS_2X2 {
            let xq = x0 + 0.5 * (xi + 1.0) * mesh.hx;
            let yq = y0 + 0.5 * (eta + 1.0) * mesh.hy;
            let foot = characteristic_foot((xq, yq), g, dt);
            let ef = mesh.element_containing(foot.0, foot.1);
            let theta = interpolate_nodal(mesh, theta_prev, foot.0, foot.1);
            let val = theta * kappa.at(ef) * det / dt;
            let n = shape(xi, eta);
            for a in 0..4 {
                b[nodes[a]] += val * n[a];
            }
        }
    }
    b
}
