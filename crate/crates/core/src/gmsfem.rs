//! Spectrally enriched multiscale coarse space: κ-harmonic partition of
//! unity, local Neumann eigenproblems weighted by κ̃, and the coarse
//! operators built from the prolongation R0.
//!
//! Basis functions and coarse matrices depend only on the meshes and the
//! permeability, so they are built once and reused across every time and
//! fixed-point iteration.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{DamError, Result};
use crate::fem::SparseMatrix;
use crate::grid::{CoarseMesh, FineMesh, Neighborhood};
use crate::numerics::smallest_eigenpairs;
use crate::permeability::PermeabilityField;

/// κ-harmonic partition of unity: one fine nodal field per coarse node,
/// supported in its neighborhood ωi.
#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    pub chi: Vec<Vec<f64>>,
}

/// Solve the local Dirichlet problems (bilinear hat data on each coarse
/// cell boundary) and assemble the cell solutions into the χi fields.
pub fn build_partition_of_unity(
    fine: &FineMesh,
    coarse: &CoarseMesh,
    kappa: &PermeabilityField,
) -> Result<PartitionOfUnity> {
    let rx = coarse.ratio_x;
    let ry = coarse.ratio_y;
    let n_loc = (rx + 1) * (ry + 1);
    let mut chi = vec![vec![0.0; fine.n_nodes()]; coarse.n_nodes()];

    for cj in 0..coarse.ny {
        for ci in 0..coarse.nx {
            // local node (a, b) -> global fine node
            let global = |a: usize, b: usize| fine.node_index(ci * rx + a, cj * ry + b);
            let local = |a: usize, b: usize| b * (rx + 1) + a;

            // cell stiffness
            let mut a_loc = DMatrix::zeros(n_loc, n_loc);
            for fj in 0..ry {
                for fi in 0..rx {
                    let e = fine.element_index(ci * rx + fi, cj * ry + fj);
                    let ke = q1_stiffness(fine.hx, fine.hy, kappa.at(e));
                    let ln = [
                        local(fi, fj),
                        local(fi + 1, fj),
                        local(fi + 1, fj + 1),
                        local(fi, fj + 1),
                    ];
                    for p in 0..4 {
                        for q in 0..4 {
                            a_loc[(ln[p], ln[q])] += ke[p][q];
                        }
                    }
                }
            }

            let is_boundary =
                |a: usize, b: usize| a == 0 || a == rx || b == 0 || b == ry;
            let interior: Vec<usize> = (0..n_loc)
                .filter(|&l| {
                    let (a, b) = (l % (rx + 1), l / (rx + 1));
                    !is_boundary(a, b)
                })
                .collect();
            let mut loc_to_int = vec![usize::MAX; n_loc];
            for (k, &l) in interior.iter().enumerate() {
                loc_to_int[l] = k;
            }

            let ni = interior.len();
            let corners = [
                coarse.node_index(ci, cj),
                coarse.node_index(ci + 1, cj),
                coarse.node_index(ci + 1, cj + 1),
                coarse.node_index(ci, cj + 1),
            ];

            let lu = if ni > 0 {
                let mut a_ii = DMatrix::zeros(ni, ni);
                for (p, &lp) in interior.iter().enumerate() {
                    for (q, &lq) in interior.iter().enumerate() {
                        a_ii[(p, q)] = a_loc[(lp, lq)];
                    }
                }
                Some(a_ii.lu())
            } else {
                None
            };

            for (c, &cn) in corners.iter().enumerate() {
                // bilinear hat data of this corner on the cell
                let data = |a: usize, b: usize| -> f64 {
                    let s = a as f64 / rx as f64;
                    let t = b as f64 / ry as f64;
                    match c {
                        0 => (1.0 - s) * (1.0 - t),
                        1 => s * (1.0 - t),
                        2 => s * t,
                        _ => (1.0 - s) * t,
                    }
                };
                let mut values = vec![0.0; n_loc];
                for b in 0..=ry {
                    for a in 0..=rx {
                        if is_boundary(a, b) {
                            values[local(a, b)] = data(a, b);
                        }
                    }
                }
                if let Some(lu) = &lu {
                    // rhs = -A_ib g_b
                    let mut rhs = DVector::zeros(ni);
                    for (p, &lp) in interior.iter().enumerate() {
                        let mut s = 0.0;
                        for l in 0..n_loc {
                            if loc_to_int[l] == usize::MAX {
                                s += a_loc[(lp, l)] * values[l];
                            }
                        }
                        rhs[p] = -s;
                    }
                    let x = lu.solve(&rhs).ok_or_else(|| DamError::Solver {
                        msg: "singular local partition-of-unity system".to_string(),
                        residual: f64::NAN,
                    })?;
                    for (p, &lp) in interior.iter().enumerate() {
                        values[lp] = x[p];
                    }
                }
                for b in 0..=ry {
                    for a in 0..=rx {
                        chi[cn][global(a, b)] = values[local(a, b)];
                    }
                }
            }
        }
    }
    Ok(PartitionOfUnity { chi })
}

fn q1_stiffness(hx: f64, hy: f64, kappa: f64) -> [[f64; 4]; 4] {
    // closed-form Q1 stiffness on a hx × hy rectangle (exact 2x2 Gauss)
    let rx = hy / hx / 6.0;
    let ry = hx / hy / 6.0;
    let kxx = [
        [2.0, -2.0, -1.0, 1.0],
        [-2.0, 2.0, 1.0, -1.0],
        [-1.0, 1.0, 2.0, -2.0],
        [1.0, -1.0, -2.0, 2.0],
    ];
    let kyy = [
        [2.0, 1.0, -1.0, -2.0],
        [1.0, 2.0, -2.0, -1.0],
        [-1.0, -2.0, 2.0, 1.0],
        [-2.0, -1.0, 1.0, 2.0],
    ];
    let mut ke = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            ke[a][b] = kappa * (rx * kxx[a][b] + ry * kyy[a][b]);
        }
    }
    ke
}

/// Element-wise spectral weight κ̃ = κ Σ_j H² |∇χ_j|², with the χ gradients
/// evaluated at element centroids and a small positive floor.
pub fn compute_weight(
    fine: &FineMesh,
    coarse: &CoarseMesh,
    kappa: &PermeabilityField,
    pu: &PartitionOfUnity,
) -> Vec<f64> {
    let h2 = coarse.hx * coarse.hy;
    let mut weight = vec![0.0; fine.n_elements()];
    for cj in 0..coarse.ny {
        for ci in 0..coarse.nx {
            let corners = [
                coarse.node_index(ci, cj),
                coarse.node_index(ci + 1, cj),
                coarse.node_index(ci + 1, cj + 1),
                coarse.node_index(ci, cj + 1),
            ];
            for fj in cj * coarse.ratio_y..(cj + 1) * coarse.ratio_y {
                for fi in ci * coarse.ratio_x..(ci + 1) * coarse.ratio_x {
                    let e = fine.element_index(fi, fj);
                    let nodes = fine.element_nodes(e);
                    let mut grad2 = 0.0;
                    for &cn in &corners {
                        let v: Vec<f64> = nodes.iter().map(|&n| pu.chi[cn][n]).collect();
                        // Q1 gradient at the centroid
                        let gx = (-v[0] + v[1] + v[2] - v[3]) / (2.0 * fine.hx);
                        let gy = (-v[0] - v[1] + v[2] + v[3]) / (2.0 * fine.hy);
                        grad2 += gx * gx + gy * gy;
                    }
                    weight[e] = kappa.at(e) * h2 * grad2;
                }
            }
        }
    }
    let max = weight.iter().cloned().fold(0.0f64, f64::max);
    let floor = 1e-14 * max.max(f64::MIN_POSITIVE);
    for w in &mut weight {
        *w = w.max(floor);
    }
    weight
}

/// One multiscale basis function: a sparse fine nodal field supported in
/// the neighborhood of its coarse node.
#[derive(Debug, Clone)]
pub struct BasisColumn {
    pub coarse_node: usize,
    /// Enrichment level: index of the eigenvector used (0 = first).
    pub level: usize,
    pub nodes: Vec<usize>,
    pub values: Vec<f64>,
}

impl BasisColumn {
    pub fn dot(&self, v: &[f64]) -> f64 {
        self.nodes
            .iter()
            .zip(&self.values)
            .map(|(&n, &x)| x * v[n])
            .sum()
    }
}

/// The GMsFEM coarse space: columns of R0 grouped by coarse node with
/// ascending enrichment level, plus the per-node eigenvalues.
#[derive(Debug, Clone)]
pub struct CoarseSpace {
    pub n_fine: usize,
    pub columns: Vec<BasisColumn>,
    /// Eigenvalues per coarse node, ascending, as many as were computed.
    pub eigenvalues: Vec<Vec<f64>>,
}

impl CoarseSpace {
    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    /// Sub-space keeping at most `li` eigenvectors per coarse node
    /// (boundary nodes store a single one). Columns are shared, so spaces
    /// for growing `li` are nested by construction.
    pub fn truncated(&self, li: usize) -> CoarseSpace {
        CoarseSpace {
            n_fine: self.n_fine,
            columns: self
                .columns
                .iter()
                .filter(|c| c.level < li)
                .cloned()
                .collect(),
            eigenvalues: self.eigenvalues.clone(),
        }
    }

    /// R0ᵀ v.
    pub fn restrict(&self, v: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.columns.iter().map(|c| c.dot(v)))
    }

    /// R0 p0 + lift.
    pub fn prolong(&self, p0: &DVector<f64>, lift: &[f64]) -> Vec<f64> {
        let mut p = lift.to_vec();
        for (c, &w) in self.columns.iter().zip(p0.iter()) {
            for (&n, &x) in c.nodes.iter().zip(&c.values) {
                p[n] += w * x;
            }
        }
        p
    }

    /// S0 = R0ᵀ Σ R0 (dense, symmetric).
    pub fn coarse_matrix(&self, sigma: &SparseMatrix) -> DMatrix<f64> {
        let dim = self.dim();
        let mut s0 = DMatrix::zeros(dim, dim);
        let mut scratch = vec![0.0; self.n_fine];
        for b in 0..dim {
            let col = &self.columns[b];
            let mut touched = Vec::with_capacity(col.nodes.len() * 9);
            for (&n, &x) in col.nodes.iter().zip(&col.values) {
                if x == 0.0 {
                    continue;
                }
                let (cols, vals) = sigma.row(n);
                for (&j, &v) in cols.iter().zip(vals) {
                    if scratch[j] == 0.0 {
                        touched.push(j);
                    }
                    scratch[j] += v * x;
                }
            }
            for a in 0..dim {
                let s = self.columns[a].dot_dense(&scratch);
                s0[(a, b)] = s;
            }
            for &t in &touched {
                scratch[t] = 0.0;
            }
        }
        // symmetrize against roundoff in the two accumulation orders
        for a in 0..dim {
            for b in a + 1..dim {
                let v = 0.5 * (s0[(a, b)] + s0[(b, a)]);
                s0[(a, b)] = v;
                s0[(b, a)] = v;
            }
        }
        s0
    }

    /// Degenerate coarse space: R0 = identity on the free fine dofs.
    pub fn identity(n_fine: usize, dirichlet_nodes: &[usize]) -> CoarseSpace {
        let mut constrained = vec![false; n_fine];
        for &d in dirichlet_nodes {
            constrained[d] = true;
        }
        let columns = (0..n_fine)
            .filter(|&n| !constrained[n])
            .map(|n| BasisColumn {
                coarse_node: n,
                level: 0,
                nodes: vec![n],
                values: vec![1.0],
            })
            .collect();
        CoarseSpace {
            n_fine,
            columns,
            eigenvalues: Vec::new(),
        }
    }
}

impl BasisColumn {
    fn dot_dense(&self, scratch: &[f64]) -> f64 {
        self.nodes
            .iter()
            .zip(&self.values)
            .map(|(&n, &x)| x * scratch[n])
            .sum()
    }
}

/// Local Neumann matrices of a neighborhood: the κ-weighted stiffness and
/// the κ̃-weighted mass, both on the neighborhood's own node numbering.
pub fn neighborhood_matrices(
    fine: &FineMesh,
    w: &Neighborhood,
    kappa: &PermeabilityField,
    weight: &[f64],
) -> (SparseMatrix, SparseMatrix) {
    let n_loc = w.nodes.len();
    let mut local_of = std::collections::HashMap::new();
    for (l, &n) in w.nodes.iter().enumerate() {
        local_of.insert(n, l);
    }
    let mut kt = Vec::new();
    let mut mt = Vec::new();
    for &e in &w.elements {
        let nodes = fine.element_nodes(e);
        let ln: Vec<usize> = nodes.iter().map(|n| local_of[n]).collect();
        let ke = q1_stiffness(fine.hx, fine.hy, kappa.at(e));
        let me = q1_mass(fine.hx, fine.hy, weight[e]);
        for p in 0..4 {
            for q in 0..4 {
                kt.push((ln[p], ln[q], ke[p][q]));
                mt.push((ln[p], ln[q], me[p][q]));
            }
        }
    }
    (
        SparseMatrix::from_triplets(n_loc, kt),
        SparseMatrix::from_triplets(n_loc, mt),
    )
}

/// Build the enriched coarse space: per neighborhood, solve the local
/// κ-stiffness / κ̃-mass Neumann eigenproblem, keep the smallest `li`
/// eigenvectors (one at boundary coarse nodes), multiply by χi and zero
/// the Γa rows.
pub fn build_spectral_basis(
    fine: &FineMesh,
    coarse: &CoarseMesh,
    kappa: &PermeabilityField,
    weight: &[f64],
    li: usize,
    pu: &PartitionOfUnity,
    dirichlet_nodes: &[usize],
) -> Result<CoarseSpace> {
    if li == 0 {
        return Err(DamError::InvalidArgument(
            "need at least one basis function per coarse node".to_string(),
        ));
    }
    let mut constrained = vec![false; fine.n_nodes()];
    for &d in dirichlet_nodes {
        constrained[d] = true;
    }

    let per_node: Vec<(Vec<BasisColumn>, Vec<f64>)> = coarse
        .neighborhoods
        .par_iter()
        .map(|w| -> Result<(Vec<BasisColumn>, Vec<f64>)> {
            let n_loc = w.nodes.len();
            let count = if coarse.is_interior_node(w.coarse_node) {
                li
            } else {
                1
            };
            if count > n_loc {
                return Err(DamError::InvalidArgument(format!(
                    "{count} basis functions requested on a {n_loc}-dof neighborhood"
                )));
            }
            let (k_loc, m_loc) = neighborhood_matrices(fine, w, kappa, weight);
            let eig = smallest_eigenpairs(&k_loc, &m_loc, count)?;

            let chi = &pu.chi[w.coarse_node];
            let mut cols = Vec::with_capacity(count);
            for level in 0..count {
                let mut values: Vec<f64> = (0..n_loc)
                    .map(|l| {
                        let n = w.nodes[l];
                        if constrained[n] {
                            0.0
                        } else {
                            chi[n] * eig.vectors[(l, level)]
                        }
                    })
                    .collect();
                // deterministic sign: largest-magnitude entry positive
                let mut best = 0usize;
                for (l, v) in values.iter().enumerate() {
                    if v.abs() > values[best].abs() {
                        best = l;
                    }
                }
                if values[best] < 0.0 {
                    for v in &mut values {
                        *v = -*v;
                    }
                }
                cols.push(BasisColumn {
                    coarse_node: w.coarse_node,
                    level,
                    nodes: w.nodes.clone(),
                    values,
                });
            }
            Ok((cols, eig.values))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut columns = Vec::new();
    let mut eigenvalues = Vec::with_capacity(per_node.len());
    for (cols, vals) in per_node {
        columns.extend(cols);
        eigenvalues.push(vals);
    }
    Ok(CoarseSpace {
        n_fine: fine.n_nodes(),
        columns,
        eigenvalues,
    })
}

fn q1_mass(hx: f64, hy: f64, weight: f64) -> [[f64; 4]; 4] {
    let c = weight * hx * hy / 36.0;
    let m = [
        [4.0, 2.0, 1.0, 2.0],
        [2.0, 4.0, 2.0, 1.0],
        [1.0, 2.0, 4.0, 2.0],
        [2.0, 1.0, 2.0, 4.0],
    ];
    let mut me = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            me[a][b] = c * m[a][b];
        }
    }
    me
}
