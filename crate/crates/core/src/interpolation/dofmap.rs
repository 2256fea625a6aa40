use crate::elements::LocalSpace;

/// Global numbering over an `nx × ny` cell grid.
///
/// Blocks in order: vertices, horizontal edges, vertical edges, cell
/// interiors. Edge nodes are numbered in increasing coordinate order.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    nx: usize,
    ny: usize,
    per_edge: usize,
    per_cell: usize,
    base_h: usize,
    base_v: usize,
    base_c: usize,
    n_dofs: usize,
    boundary: Vec<bool>,
    /// Global dof to position among free (non-boundary) dofs.
    free_index: Vec<Option<usize>>,
    n_free: usize,
}

impl DofMap {
    pub fn new(nx: usize, ny: usize, space: &LocalSpace) -> Self {
        let p = space.p();
        let per_edge = p - 1;
        let per_cell = space.dimension() - 4 * p;
        let base_h = (nx + 1) * (ny + 1);
        let base_v = base_h + nx * (ny + 1) * per_edge;
        let base_c = base_v + (nx + 1) * ny * per_edge;
        let n_dofs = base_c + nx * ny * per_cell;
        let mut boundary = vec![false; n_dofs];
        for j in 0..=ny {
            for i in 0..=nx {
                if i == 0 || i == nx || j == 0 || j == ny {
                    boundary[j * (nx + 1) + i] = true;
                }
            }
        }
        for i in 0..nx {
            for j in [0, ny] {
                for k in 0..per_edge {
                    boundary[base_h + (j * nx + i) * per_edge + k] = true;
                }
            }
        }
        for j in 0..ny {
            for i in [0, nx] {
                for k in 0..per_edge {
                    boundary[base_v + (j * (nx + 1) + i) * per_edge + k] = true;
                }
            }
        }
        let mut free_index = vec![None; n_dofs];
        let mut n_free = 0;
        for (g, &b) in boundary.iter().enumerate() {
            if !b {
                free_index[g] = Some(n_free);
                n_free += 1;
            }
        }
        Self { nx, ny, per_edge, per_cell, base_h, base_v, base_c, n_dofs, boundary, free_index, n_free }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    /// Number of non-boundary dofs.
    pub fn n_free(&self) -> usize {
        self.n_free
    }

    pub fn is_boundary(&self, g: usize) -> bool {
        self.boundary[g]
    }

    pub fn free_index(&self, g: usize) -> Option<usize> {
        self.free_index[g]
    }

    /// Global dofs of cell `(i, j)` in the element's local order:
    /// vertices `(-1,-1), (1,-1), (-1,1), (1,1)`, then bottom, top, left and
    /// right edge nodes, then interior nodes.
    pub fn cell_dofs(&self, i: usize, j: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(4 + 4 * self.per_edge + self.per_cell);
        let v = |a: usize, b: usize| b * (self.nx + 1) + a;
        out.extend([v(i, j), v(i + 1, j), v(i, j + 1), v(i + 1, j + 1)]);
        let h = |a: usize, b: usize| self.base_h + (b * self.nx + a) * self.per_edge;
        let vv = |a: usize, b: usize| self.base_v + (b * (self.nx + 1) + a) * self.per_edge;
        for start in [h(i, j), h(i, j + 1), vv(i, j), vv(i + 1, j)] {
            out.extend(start..start + self.per_edge);
        }
        let c = self.base_c + (j * self.nx + i) * self.per_cell;
        out.extend(c..c + self.per_cell);
        out
    }
}
