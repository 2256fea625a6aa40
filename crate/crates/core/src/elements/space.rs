use crate::error::{config, Result};

/// Largest supported polynomial degree.
pub const MAX_DEGREE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    /// `Q_p`: all `ξ^a η^b` with `a, b ≤ p`.
    Full,
    /// `Q_p⊕`: `P_p` plus two edge bubbles.
    Serendipity,
    /// Any other nonincreasing interior exponent list.
    General,
}

impl SpaceKind {
    pub fn name(self) -> &'static str {
        match self {
            SpaceKind::Full => "full",
            SpaceKind::Serendipity => "serendipity",
            SpaceKind::General => "general",
        }
    }
}

impl std::str::FromStr for SpaceKind {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(SpaceKind::Full),
            "serendipity" => Ok(SpaceKind::Serendipity),
            other => config(format!("unknown space kind `{other}`")),
        }
    }
}

/// A local polynomial space `Q_p♣` on the reference square.
///
/// The span is `{1,ξ}×{1,…,η^p} ∪ {1,…,ξ^p}×{1,η}` (the vertex/edge block,
/// `4p` monomials) plus the interior block `ξ²η²·span{ξ^i η^j : j ≤ s_i}`
/// for `i = 0..p-2`. Negative `s_i` contribute nothing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalSpace {
    p: usize,
    kind: SpaceKind,
    s_list: Vec<i32>,
    monomials: Vec<(usize, usize)>,
}

/// Values and first derivatives of every basis function at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisValues {
    pub values: Vec<f64>,
    pub d_xi: Vec<f64>,
    pub d_eta: Vec<f64>,
}

impl LocalSpace {
    pub fn new(p: usize, kind: SpaceKind) -> Result<Self> {
        check_degree(p)?;
        let s_list: Vec<i32> = match kind {
            SpaceKind::Full => vec![p as i32 - 2; p.saturating_sub(1)],
            SpaceKind::Serendipity => (0..p.saturating_sub(1)).map(|i| p as i32 - 4 - i as i32).collect(),
            SpaceKind::General => {
                return config("use LocalSpace::general for explicit exponent lists")
            }
        };
        Ok(Self::build(p, kind, s_list))
    }

    pub fn full(p: usize) -> Result<Self> {
        Self::new(p, SpaceKind::Full)
    }

    pub fn serendipity(p: usize) -> Result<Self> {
        Self::new(p, SpaceKind::Serendipity)
    }

    /// A space with an explicit interior exponent list `s_0 ≥ … ≥ s_{p-2}`.
    pub fn general(p: usize, s_list: Vec<i32>) -> Result<Self> {
        check_degree(p)?;
        if s_list.len() != p.saturating_sub(1) {
            return config(format!("s-list for p={p} needs {} entries", p.saturating_sub(1)));
        }
        if s_list.windows(2).any(|w| w[0] < w[1]) {
            return config("s-list must be nonincreasing");
        }
        if s_list.iter().any(|&s| s > p as i32 - 2) {
            return config("s-list entries must not exceed p-2");
        }
        Ok(Self::build(p, SpaceKind::General, s_list))
    }

    fn build(p: usize, kind: SpaceKind, s_list: Vec<i32>) -> Self {
        let mut monomials = Vec::new();
        for a in 0..=1 {
            for b in 0..=p {
                monomials.push((a, b));
            }
        }
        for a in 2..=p {
            for b in 0..=1 {
                monomials.push((a, b));
            }
        }
        for (i, &s) in s_list.iter().enumerate() {
            if s >= 0 {
                for j in 0..=s as usize {
                    monomials.push((2 + i, 2 + j));
                }
            }
        }
        Self { p, kind, s_list, monomials }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn s_list(&self) -> &[i32] {
        &self.s_list
    }

    /// `4p` plus the number of interior monomials.
    pub fn dimension(&self) -> usize {
        self.monomials.len()
    }

    /// Exponent pairs `(a, b)` of `ξ^a η^b`, vertex/edge block first.
    pub fn monomials(&self) -> &[(usize, usize)] {
        &self.monomials
    }

    /// Interior index pairs `(i, j)`, meaning the monomial `ξ^{2+i} η^{2+j}`.
    pub fn interior_indices(&self) -> Vec<(usize, usize)> {
        self.monomials[4 * self.p..].iter().map(|&(a, b)| (a - 2, b - 2)).collect()
    }

    pub fn contains_monomial(&self, a: usize, b: usize) -> bool {
        self.monomials.contains(&(a, b))
    }

    /// Monomial basis values and first derivatives at `(ξ, η)`.
    pub fn eval_basis(&self, xi: f64, eta: f64) -> BasisValues {
        let n = self.dimension();
        let mut out = BasisValues { values: vec![0.0; n], d_xi: vec![0.0; n], d_eta: vec![0.0; n] };
        self.eval_into(xi, eta, &mut out.values, &mut out.d_xi, &mut out.d_eta);
        out
    }

    pub(crate) fn eval_into(&self, xi: f64, eta: f64, v: &mut [f64], dx: &mut [f64], dy: &mut [f64]) {
        let (px, dpx, _) = powers(self.p, xi);
        let (py, dpy, _) = powers(self.p, eta);
        for (k, &(a, b)) in self.monomials.iter().enumerate() {
            v[k] = px[a] * py[b];
            dx[k] = dpx[a] * py[b];
            dy[k] = px[a] * dpy[b];
        }
    }

    /// Pure second derivatives `∂ξξ` and `∂ηη` of every basis monomial.
    pub fn eval_second(&self, xi: f64, eta: f64) -> (Vec<f64>, Vec<f64>) {
        let (px, _, d2x) = powers(self.p, xi);
        let (py, _, d2y) = powers(self.p, eta);
        self.monomials
            .iter()
            .map(|&(a, b)| (d2x[a] * py[b], px[a] * d2y[b]))
            .unzip()
    }
}

fn check_degree(p: usize) -> Result<()> {
    if p == 0 || p > MAX_DEGREE {
        return config(format!("polynomial degree p={p} outside 1..={MAX_DEGREE}"));
    }
    Ok(())
}

/// `t^k`, `k t^{k-1}`, `k(k-1) t^{k-2}` for `k = 0..=p`.
fn powers(p: usize, t: f64) -> ([f64; MAX_DEGREE + 1], [f64; MAX_DEGREE + 1], [f64; MAX_DEGREE + 1]) {
    let mut v = [0.0; MAX_DEGREE + 1];
    let mut d = [0.0; MAX_DEGREE + 1];
    let mut s = [0.0; MAX_DEGREE + 1];
    v[0] = 1.0;
    for k in 1..=p {
        v[k] = v[k - 1] * t;
        d[k] = k as f64 * v[k - 1];
        if k >= 2 {
            s[k] = (k * (k - 1)) as f64 * v[k - 2];
        }
    }
    (v, d, s)
}
