use faer::Mat;

use crate::elements::{
    assembly_points, gauss_legendre_rule, gauss_lobatto_points, LocalSpace, QuadratureRule,
};
use crate::error::Result;
use crate::linalg::DenseLu;

/// Topological entity a local node belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeEntity {
    /// Corner `0..4` in the order `(-1,-1), (1,-1), (-1,1), (1,1)`.
    Vertex(usize),
    /// Edge `0..4` (bottom, top, left, right) and position along it.
    Edge(usize, usize),
    Interior(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalNode {
    pub xi: f64,
    pub eta: f64,
    pub entity: NodeEntity,
}

/// Reference element: a local space with its Gauss-Lobatto nodal basis and
/// the precomputed local interpolation maps.
#[derive(Debug, Clone)]
pub struct Element {
    space: LocalSpace,
    gl: Vec<f64>,
    nodes: Vec<LocalNode>,
    /// Column `k` holds the monomial coefficients of nodal shape function `k`.
    shape: Mat<f64>,
    /// Maps vertex values, edge moments and interior moments to nodal values.
    vec_to_nodal: Mat<f64>,
    /// Maps values at the equidistant nodes to nodal values.
    eq_to_nodal: Mat<f64>,
    moment_rule: QuadratureRule,
    cell_rule: QuadratureRule,
}

/// Gauss points per direction for interpolation moments. One rule for all
/// degrees keeps `π_p` and `π_{p+1}` consistent; it is exact to degree 19.
const MOMENT_POINTS: usize = 10;

/// Lagrange-type node set for the local space over 1-D points `pts[0..=p]`.
pub(crate) fn lagrange_nodes(space: &LocalSpace, pts: &[f64]) -> Vec<LocalNode> {
    let p = space.p();
    let mut nodes = vec![
        LocalNode { xi: -1.0, eta: -1.0, entity: NodeEntity::Vertex(0) },
        LocalNode { xi: 1.0, eta: -1.0, entity: NodeEntity::Vertex(1) },
        LocalNode { xi: -1.0, eta: 1.0, entity: NodeEntity::Vertex(2) },
        LocalNode { xi: 1.0, eta: 1.0, entity: NodeEntity::Vertex(3) },
    ];
    for e in 0..4 {
        for k in 1..p {
            let t = pts[k];
            let (xi, eta) = match e {
                0 => (t, -1.0),
                1 => (t, 1.0),
                2 => (-1.0, t),
                _ => (1.0, t),
            };
            nodes.push(LocalNode { xi, eta, entity: NodeEntity::Edge(e, k - 1) });
        }
    }
    for (m, (i, j)) in space.interior_indices().into_iter().enumerate() {
        nodes.push(LocalNode { xi: pts[i + 1], eta: pts[j + 1], entity: NodeEntity::Interior(m) });
    }
    nodes
}

fn vandermonde(space: &LocalSpace, nodes: &[LocalNode]) -> Mat<f64> {
    let n = space.dimension();
    let mut v = Mat::zeros(n, n);
    for (r, node) in nodes.iter().enumerate() {
        let b = space.eval_basis(node.xi, node.eta);
        for c in 0..n {
            v[(r, c)] = b.values[c];
        }
    }
    v
}

impl Element {
    pub fn new(space: LocalSpace) -> Result<Self> {
        let p = space.p();
        let n = space.dimension();
        let gl = gauss_lobatto_points(p)?;
        let nodes = lagrange_nodes(&space, &gl);
        let v_gl = vandermonde(&space, &nodes);
        let shape = DenseLu::new(&v_gl, "Gauss-Lobatto nodal basis")?.inverse();

        let eq: Vec<f64> = (0..=p).map(|i| -1.0 + 2.0 * i as f64 / p as f64).collect();
        let v_eq = vandermonde(&space, &lagrange_nodes(&space, &eq));
        let eq_inv = DenseLu::new(&v_eq, "equidistant interpolation")?.inverse();
        let eq_to_nodal = &v_gl * &eq_inv;

        let moment_rule = gauss_legendre_rule(MOMENT_POINTS)?;
        let cell_rule = gauss_legendre_rule(assembly_points(p))?;
        let mut el = Self {
            space,
            gl,
            nodes,
            shape,
            vec_to_nodal: Mat::zeros(0, 0),
            eq_to_nodal,
            moment_rule,
            cell_rule,
        };
        let mut a = Mat::zeros(n, n);
        for c in 0..n {
            let (ea, eb) = el.space.monomials()[c];
            let col = el.vec_functionals(|x, y| x.powi(ea as i32) * y.powi(eb as i32));
            for r in 0..n {
                a[(r, c)] = col[r];
            }
        }
        let a_inv = DenseLu::new(&a, "vertex-edge-cell interpolation")?.inverse();
        el.vec_to_nodal = &v_gl * &a_inv;
        Ok(el)
    }

    pub fn space(&self) -> &LocalSpace {
        &self.space
    }

    pub fn p(&self) -> usize {
        self.space.p()
    }

    pub fn dimension(&self) -> usize {
        self.space.dimension()
    }

    /// Gauss-Lobatto points of degree `p`.
    pub fn gl_points(&self) -> &[f64] {
        &self.gl
    }

    pub fn nodes(&self) -> &[LocalNode] {
        &self.nodes
    }

    /// Quadrature rule per direction used for assembly and norms.
    pub fn cell_rule(&self) -> &QuadratureRule {
        &self.cell_rule
    }

    /// Monomial coefficients of the nodal shape functions (one per column).
    pub fn shape_matrix(&self) -> &Mat<f64> {
        &self.shape
    }

    /// Nodal shape functions and reference derivatives at `(ξ, η)`.
    pub fn shape_at(&self, xi: f64, eta: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let b = self.space.eval_basis(xi, eta);
        (self.apply(&b.values), self.apply(&b.d_xi), self.apply(&b.d_eta))
    }

    /// Reference second derivatives `∂ξξ`, `∂ηη` of the nodal shape functions.
    pub fn shape_second_at(&self, xi: f64, eta: f64) -> (Vec<f64>, Vec<f64>) {
        let (a, b) = self.space.eval_second(xi, eta);
        (self.apply(&a), self.apply(&b))
    }

    fn apply(&self, mono: &[f64]) -> Vec<f64> {
        let n = mono.len();
        (0..n).map(|k| (0..n).map(|m| mono[m] * self.shape[(m, k)]).sum()).collect()
    }

    /// Nodal values of the polynomial with the given monomial coefficients.
    pub fn nodal_from_monomial(&self, mono: &[f64]) -> Vec<f64> {
        self.nodes
            .iter()
            .map(|nd| {
                let b = self.space.eval_basis(nd.xi, nd.eta);
                b.values.iter().zip(mono).map(|(a, c)| a * c).sum()
            })
            .collect()
    }

    /// Monomial coefficients of the local function with the given nodal values.
    pub fn monomial_from_nodal(&self, nodal: &[f64]) -> Vec<f64> {
        let n = nodal.len();
        (0..n).map(|m| (0..n).map(|k| self.shape[(m, k)] * nodal[k]).sum()).collect()
    }

    /// Vertex values, edge moments against `t^k` (`k ≤ p-2`) and interior
    /// moments against `ξ^i η^j` over the interior index set, for a function
    /// on the reference square.
    pub fn vec_functionals(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let p = self.p();
        let mut out = Vec::with_capacity(self.dimension());
        for (x, y) in [(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)] {
            out.push(f(x, y));
        }
        for e in 0..4 {
            let point = |t: f64| match e {
                0 => (t, -1.0),
                1 => (t, 1.0),
                2 => (-1.0, t),
                _ => (1.0, t),
            };
            let vals: Vec<f64> = self.moment_rule.nodes.iter().map(|&t| {
                let (x, y) = point(t);
                f(x, y)
            }).collect();
            for k in 0..p.saturating_sub(1) {
                out.push(
                    self.moment_rule
                        .nodes
                        .iter()
                        .zip(&self.moment_rule.weights)
                        .zip(&vals)
                        .map(|((&t, &w), &v)| w * v * t.powi(k as i32))
                        .sum(),
                );
            }
        }
        let interior = self.space.interior_indices();
        if !interior.is_empty() {
            let r = &self.moment_rule;
            let mut moments = vec![0.0; interior.len()];
            for (a, &xq) in r.nodes.iter().enumerate() {
                for (b, &yq) in r.nodes.iter().enumerate() {
                    let w = r.weights[a] * r.weights[b] * f(xq, yq);
                    for (m, &(i, j)) in interior.iter().enumerate() {
                        moments[m] += w * xq.powi(i as i32) * yq.powi(j as i32);
                    }
                }
            }
            out.extend(moments);
        }
        out
    }

    /// Nodal values of the local vertex-edge-cell interpolant of `f`.
    pub fn vec_interpolate(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        mat_vec(&self.vec_to_nodal, &self.vec_functionals(f))
    }

    /// Nodal values of the local equidistant Lagrange interpolant of `f`.
    pub fn eq_interpolate(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let p = self.p();
        let eq: Vec<f64> = (0..=p).map(|i| -1.0 + 2.0 * i as f64 / p as f64).collect();
        let vals: Vec<f64> = lagrange_nodes(&self.space, &eq).iter().map(|n| f(n.xi, n.eta)).collect();
        mat_vec(&self.eq_to_nodal, &vals)
    }
}

fn mat_vec(a: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum()).collect()
}
