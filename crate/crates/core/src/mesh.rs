//! Tensor-product S-type layer-adapted meshes.
//!
//! The layer sits at `x = 0` (exponential, width `O(ε ln N)`) and at
//! `y = 0, 1` (characteristic, width `O(√ε ln N)`). Cell `(i, j)` is
//! `[x_i, x_{i+1}] × [y_j, y_{j+1}]`.

use std::fmt;
use std::str::FromStr;

use crate::error::{config, Error, Result};

/// Mesh-generating function `φ` with `φ(0) = 0`, `φ(1/2) = ln N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshFamily {
    Shishkin,
    BakhvalovS,
    PolynomialS { m: f64 },
    ModifiedBakhvalovS,
}

impl MeshFamily {
    fn q(n: usize) -> f64 {
        0.5 * (1.0 + 1.0 / (n as f64).ln())
    }

    /// `φ(t)` for `t ∈ [0, 1/2]`.
    pub fn phi(&self, t: f64, n: usize) -> f64 {
        let ln_n = (n as f64).ln();
        match *self {
            MeshFamily::Shishkin => 2.0 * t * ln_n,
            MeshFamily::BakhvalovS => -(1.0 - 2.0 * t * (1.0 - 1.0 / n as f64)).ln(),
            MeshFamily::PolynomialS { m } => (2.0 * t).powf(m) * ln_n,
            MeshFamily::ModifiedBakhvalovS => t / (Self::q(n) - t),
        }
    }

    /// `φ'(t)`.
    pub fn dphi(&self, t: f64, n: usize) -> f64 {
        let ln_n = (n as f64).ln();
        match *self {
            MeshFamily::Shishkin => 2.0 * ln_n,
            MeshFamily::BakhvalovS => {
                let a = 2.0 * (1.0 - 1.0 / n as f64);
                a / (1.0 - a * t)
            }
            MeshFamily::PolynomialS { m } => 2.0 * m * (2.0 * t).powf(m - 1.0) * ln_n,
            MeshFamily::ModifiedBakhvalovS => {
                let q = Self::q(n);
                q / ((q - t) * (q - t))
            }
        }
    }

    /// Mesh-characterising function `ψ = e^{-φ}`.
    pub fn psi(&self, t: f64, n: usize) -> f64 {
        (-self.phi(t, n)).exp()
    }

    /// `ψ'(t) = -φ'(t) ψ(t)`.
    pub fn dpsi(&self, t: f64, n: usize) -> f64 {
        -self.dphi(t, n) * self.psi(t, n)
    }

    /// Analytic bound on `max |ψ'|` over `[0, 1/2]`.
    ///
    /// Shishkin `2 ln N`, Bakhvalov-S `2`, modified Bakhvalov-S `3/(2q)`;
    /// the polynomial family reports its exact maximum.
    pub fn max_abs_psi_prime(&self, n: usize) -> f64 {
        let ln_n = (n as f64).ln();
        match *self {
            MeshFamily::Shishkin => 2.0 * ln_n,
            MeshFamily::BakhvalovS => 2.0,
            MeshFamily::ModifiedBakhvalovS => 1.5 / Self::q(n),
            MeshFamily::PolynomialS { m } => {
                // |ψ'| = 2m (ln N)^{1/m} u^{1-1/m} e^{-u} with u = (2t)^m ln N ∈ [0, ln N].
                if m < 1.0 {
                    return f64::INFINITY;
                }
                let u = ((m - 1.0) / m).min(ln_n);
                2.0 * m * ln_n.powf(1.0 / m) * u.powf(1.0 - 1.0 / m) * (-u).exp()
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            MeshFamily::Shishkin => "shishkin".into(),
            MeshFamily::BakhvalovS => "bakhvalov-s".into(),
            MeshFamily::PolynomialS { m } => format!("poly-s:{m}"),
            MeshFamily::ModifiedBakhvalovS => "mod-bakhvalov-s".into(),
        }
    }
}

impl fmt::Display for MeshFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for MeshFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shishkin" => Ok(MeshFamily::Shishkin),
            "bakhvalov-s" => Ok(MeshFamily::BakhvalovS),
            "mod-bakhvalov-s" => Ok(MeshFamily::ModifiedBakhvalovS),
            "poly-s" => Ok(MeshFamily::PolynomialS { m: 1.0 }),
            _ => match s.strip_prefix("poly-s:").map(str::parse::<f64>) {
                Some(Ok(m)) if m > 0.0 && m.is_finite() => Ok(MeshFamily::PolynomialS { m }),
                _ => config(format!("unknown mesh family `{s}`")),
            },
        }
    }
}

/// Parameters of an S-type mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshSpec {
    /// Cells per direction, divisible by 4.
    pub n: usize,
    pub epsilon: f64,
    pub sigma: f64,
    /// Lower bound of the convection coefficient.
    pub beta: f64,
    pub family: MeshFamily,
}

impl MeshSpec {
    pub fn new(family: MeshFamily, n: usize, epsilon: f64, sigma: f64, beta: f64) -> Self {
        Self { n, epsilon, sigma, beta, family }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 4 || self.n % 4 != 0 {
            return config(format!("N = {} must be at least 4 and divisible by 4", self.n));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return config(format!("epsilon = {} must lie in (0, 1]", self.epsilon));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return config(format!("sigma = {} must be positive", self.sigma));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return config(format!("beta = {} must be positive", self.beta));
        }
        if let MeshFamily::PolynomialS { m } = self.family {
            if !(m > 0.0) {
                return config("polynomial S-mesh needs m > 0");
            }
        }
        Ok(())
    }

    /// `λ_x = min(σε/β ln N, 1/2)` and whether the cap binds.
    pub fn lambda_x(&self) -> (f64, bool) {
        let raw = self.sigma * self.epsilon / self.beta * (self.n as f64).ln();
        if raw >= 0.5 {
            (0.5, true)
        } else {
            (raw, false)
        }
    }

    /// `λ_y = min(σ√ε ln N, 1/4)` and whether the cap binds.
    pub fn lambda_y(&self) -> (f64, bool) {
        let raw = self.sigma * self.epsilon.sqrt() * (self.n as f64).ln();
        if raw >= 0.25 {
            (0.25, true)
        } else {
            (raw, false)
        }
    }
}

/// Subregions of the unit square.
///
/// `Ω11` is coarse in both directions, `Ω12` is the exponential layer
/// strip `[0,λ_x] × [λ_y, 1-λ_y]`, `Ω21` covers the characteristic layers
/// away from `x = 0`, `Ω22` the corners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionTag {
    Omega11,
    Omega12,
    Omega21,
    Omega22,
}

/// A tensor-product mesh of the unit square.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorMesh {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub lambda_x: f64,
    pub lambda_y: f64,
    pub capped_x: bool,
    pub capped_y: bool,
    /// `hx[i] = x[i+1] - x[i]`, the width of cell column `i`.
    pub hx: Vec<f64>,
    /// `ky[j] = y[j+1] - y[j]`.
    pub ky: Vec<f64>,
    /// Generating family when built by [`build_stype_mesh`].
    pub family: Option<MeshFamily>,
}

impl TensorMesh {
    /// Mesh from explicit node arrays; both must run strictly from 0 to 1.
    pub fn from_nodes(x: Vec<f64>, y: Vec<f64>, lambda_x: f64, lambda_y: f64) -> Result<Self> {
        for (name, v) in [("x", &x), ("y", &y)] {
            if v.len() < 2 || v[0] != 0.0 || *v.last().unwrap() != 1.0 {
                return config(format!("{name} nodes must run from 0 to 1"));
            }
            if v.windows(2).any(|w| !(w[1] > w[0])) {
                return config(format!("{name} nodes must be strictly increasing"));
            }
        }
        let hx = x.windows(2).map(|w| w[1] - w[0]).collect();
        let ky = y.windows(2).map(|w| w[1] - w[0]).collect();
        Ok(Self { x, y, lambda_x, lambda_y, capped_x: false, capped_y: false, hx, ky, family: None })
    }

    /// Uniform `n × n` mesh, identical to an S-type mesh with both caps bound.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return config("uniform mesh needs n >= 1");
        }
        let nodes: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let mut m = Self::from_nodes(nodes.clone(), nodes, 0.5, 0.25)?;
        m.capped_x = true;
        m.capped_y = true;
        Ok(m)
    }

    pub fn nx(&self) -> usize {
        self.x.len() - 1
    }

    pub fn ny(&self) -> usize {
        self.y.len() - 1
    }

    pub fn cell_count(&self) -> usize {
        self.nx() * self.ny()
    }

    /// Region of cell `(i, j)`, decided by its midpoint.
    pub fn region(&self, i: usize, j: usize) -> RegionTag {
        let xm = 0.5 * (self.x[i] + self.x[i + 1]);
        let ym = 0.5 * (self.y[j] + self.y[j + 1]);
        let fine_x = xm < self.lambda_x;
        let middle_y = ym > self.lambda_y && ym < 1.0 - self.lambda_y;
        match (fine_x, middle_y) {
            (false, true) => RegionTag::Omega11,
            (true, true) => RegionTag::Omega12,
            (false, false) => RegionTag::Omega21,
            (true, false) => RegionTag::Omega22,
        }
    }

    /// Index of the cell column containing `x` (closed on the right at 1).
    pub fn locate_x(&self, x: f64) -> usize {
        locate(&self.x, x)
    }

    pub fn locate_y(&self, y: f64) -> usize {
        locate(&self.y, y)
    }

    /// Text dump: header line, then x nodes, then y nodes, one `index value` per line.
    pub fn dump(&self, family: &str, n: usize, eps: f64, sigma: f64) -> String {
        let mut s = format!(
            "# stype {family} N={n} eps={eps:e} sigma={sigma} lambda_x={:.17e} lambda_y={:.17e}\n",
            self.lambda_x, self.lambda_y
        );
        s.push_str("# x\n");
        for (i, v) in self.x.iter().enumerate() {
            s.push_str(&format!("{i} {v:.17e}\n"));
        }
        s.push_str("# y\n");
        for (j, v) in self.y.iter().enumerate() {
            s.push_str(&format!("{j} {v:.17e}\n"));
        }
        s
    }
}

pub(crate) fn locate(nodes: &[f64], t: f64) -> usize {
    let n = nodes.len() - 1;
    match nodes.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
        Ok(k) => k.min(n - 1),
        Err(k) => k.saturating_sub(1).min(n - 1),
    }
}

/// Builds the S-type mesh described by `spec`.
pub fn build_stype_mesh(spec: &MeshSpec) -> Result<TensorMesh> {
    spec.validate()?;
    let n = spec.n;
    let nf = n as f64;
    let (lx, capped_x) = spec.lambda_x();
    let (ly, capped_y) = spec.lambda_y();
    let fam = spec.family;

    let mut x = vec![0.0; n + 1];
    for i in 0..=n / 2 {
        x[i] = if capped_x {
            lx * 2.0 * i as f64 / nf
        } else {
            spec.sigma * spec.epsilon / spec.beta * fam.phi(i as f64 / nf, n)
        };
    }
    for i in n / 2..=n {
        x[i] = 1.0 - 2.0 * (1.0 - lx) * (1.0 - i as f64 / nf);
    }
    x[n / 2] = lx;
    x[n] = 1.0;

    let se = spec.sigma * spec.epsilon.sqrt();
    let fine_y = |j: usize| {
        if capped_y {
            ly * 4.0 * j as f64 / nf
        } else {
            se * fam.phi(2.0 * j as f64 / nf, n)
        }
    };
    let mut y = vec![0.0; n + 1];
    for j in 0..=n / 4 {
        y[j] = fine_y(j);
    }
    for j in n / 4..=3 * n / 4 {
        y[j] = 0.5 + (1.0 - 2.0 * ly) * (2.0 * j as f64 / nf - 1.0);
    }
    for j in 3 * n / 4..=n {
        y[j] = 1.0 - fine_y(n - j);
    }
    y[n / 4] = ly;
    y[3 * n / 4] = 1.0 - ly;
    y[n] = 1.0;

    let mut mesh = TensorMesh::from_nodes(x, y, lx, ly)
        .map_err(|e| Error::Numerical(format!("S-type mesh construction: {e}")))?;
    mesh.capped_x = capped_x;
    mesh.capped_y = capped_y;
    mesh.family = Some(fam);
    Ok(mesh)
}

/// Outcome of the numerical S-type assumption checks.
#[derive(Debug, Clone, PartialEq)]
pub struct STypeReport {
    /// `max φ'` over `[0, 1/2]`.
    pub max_dphi: f64,
    /// `min_i φ((i+1)/N) - φ(i/N)`, `i < N/2`.
    pub min_increment: f64,
    /// Sampled `max |ψ'|`.
    pub max_abs_psi_prime: f64,
    /// `max φ' ≤ C N`.
    pub a1: bool,
    /// `min increment ≥ C_low / N`.
    pub a2: bool,
    /// `max |ψ'| ≤ C (N / ln N)^{1/2}`.
    pub a3: bool,
    pub constant: f64,
    pub lower_constant: f64,
}

/// Thresholds for [`check_stype_assumptions`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct STypeConstants {
    /// Upper constant in the `max φ'` and `max |ψ'|` bounds.
    pub upper: f64,
    /// Lower constant in the minimal-increment bound.
    pub lower: f64,
}

impl Default for STypeConstants {
    fn default() -> Self {
        Self { upper: 10.0, lower: 1.0 }
    }
}

/// Evaluates the S-type mesh assumptions on a fine grid of `t ∈ [0, 1/2]`.
pub fn check_stype_assumptions(family: MeshFamily, n: usize, c: STypeConstants) -> STypeReport {
    const SAMPLES: usize = 20_000;
    let nf = n as f64;
    let mut max_dphi = 0.0f64;
    let mut max_psi = 0.0f64;
    for k in 0..=SAMPLES {
        let t = 0.5 * k as f64 / SAMPLES as f64;
        let d = family.dphi(t, n);
        max_dphi = max_dphi.max(if d.is_nan() { f64::INFINITY } else { d });
        let dp = family.dpsi(t, n).abs();
        max_psi = max_psi.max(if dp.is_nan() { f64::INFINITY } else { dp });
    }
    let min_increment = (0..n / 2)
        .map(|i| family.phi((i + 1) as f64 / nf, n) - family.phi(i as f64 / nf, n))
        .fold(f64::INFINITY, f64::min);
    STypeReport {
        max_dphi,
        min_increment,
        max_abs_psi_prime: max_psi,
        a1: max_dphi <= c.upper * nf,
        a2: min_increment >= c.lower / nf,
        a3: max_psi <= c.upper * (nf / nf.ln()).sqrt(),
        constant: c.upper,
        lower_constant: c.lower,
    }
}

/// Macro mesh of `2 × 2` blocks of fine cells.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroMesh {
    /// Fine mesh the macro cells aggregate.
    pub fine: TensorMesh,
    /// Macro nodes `x[2k]`.
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl MacroMesh {
    pub fn nx(&self) -> usize {
        self.x.len() - 1
    }

    pub fn ny(&self) -> usize {
        self.y.len() - 1
    }

    pub fn cell_count(&self) -> usize {
        self.nx() * self.ny()
    }

    /// Fine cells of macro cell `(mi, mj)`.
    pub fn children(&self, mi: usize, mj: usize) -> [(usize, usize); 4] {
        let (i, j) = (2 * mi, 2 * mj);
        [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)]
    }

    /// Macro cell containing fine cell `(i, j)`.
    pub fn parent(&self, i: usize, j: usize) -> (usize, usize) {
        (i / 2, j / 2)
    }
}

/// Pairs consecutive fine cells in each direction.
pub fn build_macro_mesh(mesh: &TensorMesh) -> Result<MacroMesh> {
    let (nx, ny) = (mesh.nx(), mesh.ny());
    if nx % 8 != 0 || ny % 8 != 0 {
        return config(format!("macro mesh needs N divisible by 8, got {nx} x {ny}"));
    }
    let x: Vec<f64> = mesh.x.iter().step_by(2).copied().collect();
    let y: Vec<f64> = mesh.y.iter().step_by(2).copied().collect();
    let crosses = |nodes: &[f64], t: f64| nodes.windows(2).any(|w| w[0] < t && t < w[1]);
    if crosses(&x, mesh.lambda_x) || crosses(&y, mesh.lambda_y) || crosses(&y, 1.0 - mesh.lambda_y) {
        return Err(Error::Numerical("macro cell straddles a transition line".into()));
    }
    Ok(MacroMesh { fine: mesh.clone(), x, y })
}

#[cfg(test)]
mod tests {
    use super::*;

    const FAMILIES: [MeshFamily; 5] = [
        MeshFamily::Shishkin,
        MeshFamily::BakhvalovS,
        MeshFamily::PolynomialS { m: 1.0 },
        MeshFamily::PolynomialS { m: 2.0 },
        MeshFamily::ModifiedBakhvalovS,
    ];

    #[test]
    fn phi_endpoints() {
        for fam in FAMILIES {
            for n in [4, 8, 16, 64, 1024] {
                assert!(fam.phi(0.0, n).abs() < 1e-12);
                assert!((fam.phi(0.5, n) - (n as f64).ln()).abs() < 1e-12, "{fam} {n}");
                assert!((fam.psi(0.5, n) - 1.0 / n as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shishkin_example() {
        let m = build_stype_mesh(&MeshSpec::new(MeshFamily::Shishkin, 8, 1e-2, 2.5, 1.0)).unwrap();
        let lx = 2.5e-2 * 8f64.ln();
        assert!((m.lambda_x - lx).abs() < 1e-15);
        assert!((lx - 0.051986).abs() < 1e-6);
        for i in 0..4 {
            assert!((m.hx[i] - lx / 4.0).abs() < 1e-15);
        }
        assert!(!m.capped_x);
    }

    #[test]
    fn caps_bind_for_large_eps() {
        for fam in FAMILIES {
            let m = build_stype_mesh(&MeshSpec::new(fam, 8, 0.5, 2.5, 1.0)).unwrap();
            assert!(m.capped_x && m.capped_y);
            assert_eq!(m.lambda_x, 0.5);
            assert_eq!(m.lambda_y, 0.25);
            for i in 0..=8 {
                assert!((m.x[i] - i as f64 / 8.0).abs() < 1e-15);
                assert!((m.y[i] - i as f64 / 8.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn bakhvalov_coarse_width() {
        let m = build_stype_mesh(&MeshSpec::new(MeshFamily::BakhvalovS, 16, 1e-6, 5.5, 1.0)).unwrap();
        let lx = 5.5e-6 * 16f64.ln();
        assert!((m.x[8] - lx).abs() < 1e-18);
        assert!((m.x[9] - m.x[8] - 2.0 * (1.0 - lx) / 16.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(build_stype_mesh(&MeshSpec::new(MeshFamily::Shishkin, 10, 1e-2, 2.5, 1.0)).is_err());
        assert!(build_stype_mesh(&MeshSpec::new(MeshFamily::Shishkin, 8, 0.0, 2.5, 1.0)).is_err());
        assert!(build_stype_mesh(&MeshSpec::new(MeshFamily::Shishkin, 8, 1e-2, -1.0, 1.0)).is_err());
    }

    #[test]
    fn assumption_examples() {
        let c = STypeConstants::default();
        let s = check_stype_assumptions(MeshFamily::Shishkin, 64, c);
        assert!(s.a1 && s.a2 && s.a3);
        assert!((s.max_dphi - 2.0 * 64f64.ln()).abs() < 1e-12);
        let p = check_stype_assumptions(MeshFamily::PolynomialS { m: 2.0 }, 64, c);
        assert!(!p.a2);
        for n in [8, 16, 64, 256, 4096] {
            let b = check_stype_assumptions(MeshFamily::BakhvalovS, n, c);
            assert!(b.a1 && b.a2 && b.a3, "N={n}");
            assert!(b.max_abs_psi_prime <= 2.0);
        }
    }

    #[test]
    fn analytic_psi_bound_dominates_samples() {
        let c = STypeConstants::default();
        for fam in FAMILIES {
            for n in [8, 64, 512] {
                let r = check_stype_assumptions(fam, n, c);
                assert!(r.max_abs_psi_prime <= fam.max_abs_psi_prime(n) * (1.0 + 1e-6), "{fam} {n}");
            }
        }
    }

    #[test]
    fn macro_mesh_counts() {
        let m = build_stype_mesh(&MeshSpec::new(MeshFamily::Shishkin, 8, 1e-6, 2.5, 1.0)).unwrap();
        let mm = build_macro_mesh(&m).unwrap();
        assert_eq!(mm.cell_count(), 16);
        let in_omega12 = (0..mm.nx())
            .flat_map(|mi| (0..mm.ny()).map(move |mj| (mi, mj)))
            .filter(|&(mi, mj)| {
                let (i, j) = mm.children(mi, mj)[0];
                m.region(i, j) == RegionTag::Omega12
            })
            .count();
        assert_eq!(in_omega12, 4);
        let m12 = build_stype_mesh(&MeshSpec::new(MeshFamily::Shishkin, 12, 1e-6, 2.5, 1.0)).unwrap();
        assert!(build_macro_mesh(&m12).is_err());
    }

    #[test]
    fn family_parsing() {
        assert_eq!("poly-s:2".parse::<MeshFamily>().unwrap(), MeshFamily::PolynomialS { m: 2.0 });
        assert_eq!("bakhvalov-s".parse::<MeshFamily>().unwrap(), MeshFamily::BakhvalovS);
        assert!("poly-s:-1".parse::<MeshFamily>().is_err());
        assert!("foo".parse::<MeshFamily>().is_err());
        for fam in FAMILIES {
            assert_eq!(fam.name().parse::<MeshFamily>().unwrap(), fam);
        }
    }
}
