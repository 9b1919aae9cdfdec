//! Structured rectangular fine and coarse grids on the unit square,
//! with tagged boundary edges and coarse-node neighborhoods.
//!
//! Node numbering is lexicographic by (j, i): node (i, j) has index
//! `j * (nx + 1) + i`. Element (i, j) has index `j * nx + i` and its
//! corner nodes are listed counterclockwise starting at the lower left.

use crate::error::{DamError, Result};

/// Boundary tags of the dam domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Γa: part of the boundary in contact with water (Dirichlet head data).
    Water,
    /// Γ0: part in contact with open air (seepage face).
    Air,
    /// Γ: impervious bottom.
    Impervious,
}

/// One boundary edge: its two endpoint nodes, the adjacent element and tag.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub element: usize,
    pub tag: Boundary,
    /// Outward normal dotted with e2: +1 on top, -1 on bottom, 0 lateral.
    pub normal_e2: f64,
    pub length: f64,
}

/// Boundary layout of the domain.
///
/// * `wet_left` / `wet_right`: heights of the Γa segments on the lateral
///   sides; water occupies `{0}×[0, wet_left]` and `{1}×[0, wet_right]`.
/// * `head_left` / `head_right`: water levels used for the Dirichlet data
///   `p = head - x2` on the corresponding segment (normally equal to the
///   segment heights).
/// * `top_dirichlet`: when true, the whole top side is a Dirichlet boundary
///   with `p = 0` instead of a seepage face (fully wetted configuration).
#[derive(Debug, Clone, Copy)]
pub struct BoundarySpec {
    pub wet_left: f64,
    pub wet_right: f64,
    pub head_left: f64,
    pub head_right: f64,
    pub top_dirichlet: bool,
}

impl BoundarySpec {
    /// Default dam of the experiments: Γa = {0}×[0,3/5] ∪ {1}×[0,2/5].
    pub fn dam(head_left: f64, head_right: f64) -> Self {
        Self {
            wet_left: head_left,
            wet_right: head_right,
            head_left,
            head_right,
            top_dirichlet: false,
        }
    }

    /// Fully wetted configuration: water on both whole lateral sides with
    /// head 1 and Dirichlet p = 0 on the top.
    pub fn fully_wetted() -> Self {
        Self {
            wet_left: 1.0,
            wet_right: 1.0,
            head_left: 1.0,
            head_right: 1.0,
            top_dirichlet: true,
        }
    }
}

impl Default for BoundarySpec {
    fn default() -> Self {
        Self::dam(0.6, 0.4)
    }
}

/// Structured Q1 fine mesh of D = [0,1]².
#[derive(Debug, Clone)]
pub struct FineMesh {
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
    pub boundary: BoundarySpec,
    pub boundary_edges: Vec<BoundaryEdge>,
}

impl FineMesh {
    pub fn n_nodes(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    pub fn n_elements(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn node_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= self.nx && j <= self.ny);
        j * (self.nx + 1) + i
    }

    #[inline]
    pub fn element_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    #[inline]
    pub fn node_coords(&self, n: usize) -> (f64, f64) {
        let i = n % (self.nx + 1);
        let j = n / (self.nx + 1);
        (i as f64 * self.hx, j as f64 * self.hy)
    }

    /// Corner nodes of element (i, j), counterclockwise from lower left.
    #[inline]
    pub fn element_nodes(&self, e: usize) -> [usize; 4] {
        let i = e % self.nx;
        let j = e / self.nx;
        let n0 = self.node_index(i, j);
        [n0, n0 + 1, n0 + self.nx + 2, n0 + self.nx + 1]
    }

    /// Element containing the point, clamping ties/outside points inward.
    #[inline]
    pub fn element_containing(&self, x: f64, y: f64) -> usize {
        let i = ((x / self.hx) as usize).min(self.nx - 1);
        let j = ((y / self.hy) as usize).min(self.ny - 1);
        self.element_index(i, j)
    }

    /// Fine nodes incident to at least one boundary edge with the tag.
    /// Junction nodes belong to the node sets of both adjacent tags.
    pub fn boundary_nodes(&self, tag: Boundary) -> Vec<usize> {
        let mut marked = vec![false; self.n_nodes()];
        for be in &self.boundary_edges {
            if be.tag == tag {
                marked[be.nodes[0]] = true;
                marked[be.nodes[1]] = true;
            }
        }
        (0..self.n_nodes()).filter(|&n| marked[n]).collect()
    }

    /// Dirichlet (Γa) nodes with prescribed hydrostatic values `head - x2`.
    /// At junctions the Dirichlet tag wins, so every node incident to a
    /// Water edge is constrained.
    pub fn dirichlet_values(&self) -> Vec<(usize, f64)> {
        let mut value = vec![f64::NAN; self.n_nodes()];
        for be in &self.boundary_edges {
            if be.tag != Boundary::Water {
                continue;
            }
            for &n in &be.nodes {
                let (x, y) = self.node_coords(n);
                let head = if x == 0.0 && be.normal_e2 == 0.0 {
                    self.boundary.head_left
                } else if be.normal_e2 == 0.0 {
                    self.boundary.head_right
                } else {
                    // top edge of the fully wetted configuration: p = 0
                    y
                };
                value[n] = head - y;
            }
        }
        (0..self.n_nodes())
            .filter(|&n| !value[n].is_nan())
            .map(|n| (n, value[n]))
            .collect()
    }
}

/// Build the fine mesh with boundary edges tagged by edge-midpoint
/// membership in the closed wet segments (Dirichlet wins at junctions).
pub fn build_fine_mesh(nx: usize, ny: usize, boundary: BoundarySpec) -> Result<FineMesh> {
    if nx == 0 || ny == 0 {
        return Err(DamError::InvalidArgument(format!(
            "element counts must be positive, got {nx}x{ny}"
        )));
    }
    let hx = 1.0 / nx as f64;
    let hy = 1.0 / ny as f64;
    let mut mesh = FineMesh {
        nx,
        ny,
        hx,
        hy,
        boundary,
        boundary_edges: Vec::with_capacity(2 * (nx + ny)),
    };
    // bottom (Γ) and top
    for i in 0..nx {
        mesh.boundary_edges.push(BoundaryEdge {
            nodes: [mesh.node_index(i, 0), mesh.node_index(i + 1, 0)],
            element: mesh.element_index(i, 0),
            tag: Boundary::Impervious,
            normal_e2: -1.0,
            length: hx,
        });
        mesh.boundary_edges.push(BoundaryEdge {
            nodes: [mesh.node_index(i, ny), mesh.node_index(i + 1, ny)],
            element: mesh.element_index(i, ny - 1),
            tag: if boundary.top_dirichlet {
                Boundary::Water
            } else {
                Boundary::Air
            },
            normal_e2: 1.0,
            length: hx,
        });
    }
    // lateral sides
    for j in 0..ny {
        let mid = (j as f64 + 0.5) * hy;
        mesh.boundary_edges.push(BoundaryEdge {
            nodes: [mesh.node_index(0, j), mesh.node_index(0, j + 1)],
            element: mesh.element_index(0, j),
            tag: if mid <= boundary.wet_left {
                Boundary::Water
            } else {
                Boundary::Air
            },
            normal_e2: 0.0,
            length: hy,
        });
        mesh.boundary_edges.push(BoundaryEdge {
            nodes: [mesh.node_index(nx, j), mesh.node_index(nx, j + 1)],
            element: mesh.element_index(nx - 1, j),
            tag: if mid <= boundary.wet_right {
                Boundary::Water
            } else {
                Boundary::Air
            },
            normal_e2: 0.0,
            length: hy,
        });
    }
    Ok(mesh)
}

/// Neighborhood ωi of a coarse node: the union of coarse cells touching it.
#[derive(Debug, Clone)]
pub struct Neighborhood {
    pub coarse_node: usize,
    /// Fine elements covered by ωi.
    pub elements: Vec<usize>,
    /// Fine nodes of ωi, ascending; the local dof numbering of ωi.
    pub nodes: Vec<usize>,
}

impl Neighborhood {
    /// Local index of a fine node, if it belongs to ωi.
    pub fn local_of(&self, node: usize) -> Option<usize> {
        self.nodes.binary_search(&node).ok()
    }
}

/// Structured coarse mesh nested in a fine mesh.
#[derive(Debug, Clone)]
pub struct CoarseMesh {
    pub nx: usize,
    pub ny: usize,
    /// Fine elements per coarse cell in each direction.
    pub ratio_x: usize,
    pub ratio_y: usize,
    pub hx: f64,
    pub hy: f64,
    pub neighborhoods: Vec<Neighborhood>,
}

impl CoarseMesh {
    pub fn n_nodes(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    pub fn node_ij(&self, n: usize) -> (usize, usize) {
        (n % (self.nx + 1), n / (self.nx + 1))
    }

    /// Interior coarse nodes receive the full enrichment in the sweep;
    /// boundary coarse nodes keep one basis function.
    pub fn is_interior_node(&self, n: usize) -> bool {
        let (i, j) = self.node_ij(n);
        i > 0 && i < self.nx && j > 0 && j < self.ny
    }
}

/// Build the coarse mesh and enumerate the neighborhoods ωi.
pub fn build_coarse_mesh(fine: &FineMesh, nx: usize, ny: usize) -> Result<CoarseMesh> {
    if nx == 0 || ny == 0 {
        return Err(DamError::InvalidArgument(format!(
            "coarse element counts must be positive, got {nx}x{ny}"
        )));
    }
    if fine.nx % nx != 0 || fine.ny % ny != 0 {
        return Err(DamError::InvalidArgument(format!(
            "fine mesh {}x{} does not nest in coarse mesh {}x{}",
            fine.nx, fine.ny, nx, ny
        )));
    }
    let ratio_x = fine.nx / nx;
    let ratio_y = fine.ny / ny;
    let mut neighborhoods = Vec::with_capacity((nx + 1) * (ny + 1));
    for cj in 0..=ny {
        for ci in 0..=nx {
            let mut elements = Vec::new();
            let mut nodes = Vec::new();
            // coarse cells touching node (ci, cj)
            for kj in cj.saturating_sub(1)..cj.min(ny - 1) + 1 {
                for ki in ci.saturating_sub(1)..ci.min(nx - 1) + 1 {
                    for fj in kj * ratio_y..(kj + 1) * ratio_y {
                        for fi in ki * ratio_x..(ki + 1) * ratio_x {
                            elements.push(fine.element_index(fi, fj));
                        }
                    }
                }
            }
            let ilo = ci.saturating_sub(1) * ratio_x;
            let ihi = (ci.min(nx - 1) + 1) * ratio_x;
            let jlo = cj.saturating_sub(1) * ratio_y;
            let jhi = (cj.min(ny - 1) + 1) * ratio_y;
            for fj in jlo..=jhi {
                for fi in ilo..=ihi {
                    nodes.push(fine.node_index(fi, fj));
                }
            }
            elements.sort_unstable();
            nodes.sort_unstable();
            neighborhoods.push(Neighborhood {
                coarse_node: neighborhoods.len(),
                elements,
                nodes,
            });
        }
    }
    Ok(CoarseMesh {
        nx,
        ny,
        ratio_x,
        ratio_y,
        hx: 1.0 / nx as f64,
        hy: 1.0 / ny as f64,
        neighborhoods,
    })
}
