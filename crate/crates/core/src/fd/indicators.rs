//! Pointwise indicators `M¹ … M⁷` for the upwind solution.
//!
//! `M¹–M³` live on `i ∈ 0..=N`, `j ∈ 1..=M` and use discrete `y`-derivatives;
//! `M⁴–M⁷` live on `i ∈ 1..=N`, `j ∈ 0..=M` and use discrete `x`-derivatives.
//! Second differences at boundary nodes repeat the adjacent interior value,
//! which is the one-sided three-point second difference. `D̃_x` at `i = 0` and
//! `i = N` is the difference over the adjacent cell. `M²` is zero on the first
//! interior row.

use super::{FDField, FDGrid};

/// Which weights multiply the discrete derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndicatorForm {
    /// Weights carrying the `|ln ε|` factors.
    Full,
    /// The same terms with the `|ln ε|` factors dropped.
    Modified,
}

/// One indicator on its index range `i ∈ i0..i0+ni`, `j ∈ j0..j0+nj`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorArray {
    pub i0: usize,
    pub j0: usize,
    pub ni: usize,
    pub nj: usize,
    pub values: Vec<f64>,
}

impl IndicatorArray {
    fn new(i0: usize, j0: usize, ni: usize, nj: usize) -> Self {
        Self { i0, j0, ni, nj, values: vec![0.0; ni * nj] }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(j - self.j0) * self.ni + (i - self.i0)]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[(j - self.j0) * self.ni + (i - self.i0)] = v;
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// `(i, j, value)` for every entry.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.values.iter().enumerate().map(move |(k, &v)| (self.i0 + k % self.ni, self.j0 + k / self.ni, v))
    }
}

/// Indicator arrays in both forms and their aggregates.
#[derive(Debug, Clone)]
pub struct IndicatorReport {
    /// `M¹ … M⁷` at index `k-1`, full weights.
    pub full: Vec<IndicatorArray>,
    /// `M¹ … M⁷` with the `|ln ε|` factors dropped.
    pub modified: Vec<IndicatorArray>,
    /// Sum of the maxima of the seven full-form indicators.
    pub eta: f64,
    /// Sum of the maxima of the seven modified indicators.
    pub eta_modified: f64,
    /// Sum of the maxima of modified `M¹, M³, M⁴, M⁷`.
    pub eta_tilde: f64,
}

impl IndicatorReport {
    pub fn arrays(&self, form: IndicatorForm) -> &[IndicatorArray] {
        match form {
            IndicatorForm::Full => &self.full,
            IndicatorForm::Modified => &self.modified,
        }
    }

    /// `max M^k` for `k = 1..=7`.
    pub fn maxima(&self, form: IndicatorForm) -> [f64; 7] {
        let a = self.arrays(form);
        std::array::from_fn(|k| a[k].max())
    }

    /// `(M_x, M_y)`: maxima over `k ∈ {4,5,6,7}` and over `k ∈ {1,3}`.
    pub fn directional(&self, form: IndicatorForm) -> (f64, f64) {
        let m = self.maxima(form);
        (m[3].max(m[4]).max(m[5]).max(m[6]), m[0].max(m[2]))
    }
}

struct Derivs<'a> {
    u: &'a FDField,
    g: &'a FDGrid,
}

impl Derivs<'_> {
    fn d2y(&self, i: usize, j: usize) -> f64 {
        let m = self.g.m();
        let j = j.clamp(1, m - 1);
        let (u, g) = (self.u, self.g);
        ((u.at(i, j + 1) - u.at(i, j)) / g.k(j + 1) - (u.at(i, j) - u.at(i, j - 1)) / g.k(j)) / g.kbar(j)
    }

    fn d2x(&self, i: usize, j: usize) -> f64 {
        let n = self.g.n();
        let i = i.clamp(1, n - 1);
        let (u, g) = (self.u, self.g);
        ((u.at(i + 1, j) - u.at(i, j)) / g.h(i + 1) - (u.at(i, j) - u.at(i - 1, j)) / g.h(i)) / g.hbar(i)
    }

    fn dmy(&self, i: usize, j: usize) -> f64 {
        (self.u.at(i, j) - self.u.at(i, j - 1)) / self.g.k(j)
    }

    fn dmx(&self, i: usize, j: usize) -> f64 {
        (self.u.at(i, j) - self.u.at(i - 1, j)) / self.g.h(i)
    }

    fn dtx(&self, i: usize, j: usize) -> f64 {
        let (u, g) = (self.u, self.g);
        let n = g.n();
        match i {
            0 => (u.at(1, j) - u.at(0, j)) / g.h(1),
            _ if i == n => (u.at(n, j) - u.at(n - 1, j)) / g.h(n),
            _ => (u.at(i + 1, j) - u.at(i, j)) / g.hbar(i),
        }
    }
}

/// All seven indicators of `u` in both forms, with `C = 1`.
pub fn compute_indicators(u: &FDField, epsilon: f64) -> IndicatorReport {
    let g = &u.grid;
    let d = Derivs { u, g };
    let (n, m) = (g.n(), g.m());
    let l = epsilon.ln().abs();
    let lk = (2.0 + epsilon / g.kappa_k()).ln();
    let se = epsilon.sqrt();

    let y_array = || IndicatorArray::new(0, 1, n + 1, m);
    let x_array = || IndicatorArray::new(1, 0, n, m + 1);
    let mut full: Vec<IndicatorArray> = (0..7).map(|k| if k < 3 { y_array() } else { x_array() }).collect();
    let mut modified = full.clone();

    for j in 1..=m {
        let kj = g.k(j);
        let w1_full = (se * kj).min(kj * kj * (l + lk));
        let w1_mod = (se * kj).min(kj * kj * lk);
        for i in 0..=n {
            let d2 = d.d2y(i, j - 1).abs().min(d.d2y(i, j).abs());
            let m2 = if j == 1 { 0.0 } else { se * kj * kj * ((d.d2y(i, j) - d.d2y(i, j - 1)) / kj).abs() };
            let m3 = kj * kj * (1.0 + d.dmy(i, j).powi(2));
            full[0].set(i, j, w1_full * d2);
            modified[0].set(i, j, w1_mod * d2);
            for arr in [&mut full, &mut modified] {
                arr[1].set(i, j, m2);
                arr[2].set(i, j, m3);
            }
        }
    }
    for j in 0..=m {
        for i in 1..=n {
            let hi = g.h(i);
            let m4 = epsilon * hi * d.d2x(i - 1, j).abs().max(d.d2x(i, j).abs());
            let m5 = hi * hi * (1.0 + d.dmx(i, j).powi(2));
            let m6 = hi * d.dtx(i - 1, j).abs().max(d.dtx(i, j).abs());
            let m7 = hi * (1.0 + d.dmx(i, j).abs());
            for (arr, w) in [(&mut full, 1.0 + l), (&mut modified, 1.0)] {
                arr[3].set(i, j, w * m4);
                arr[4].set(i, j, m5);
                arr[5].set(i, j, w * m6);
                arr[6].set(i, j, w * m7);
            }
        }
    }
    let sum = |a: &[IndicatorArray], ks: &[usize]| ks.iter().map(|&k| a[k - 1].max()).sum::<f64>();
    let all = [1, 2, 3, 4, 5, 6, 7];
    IndicatorReport {
        eta: sum(&full, &all),
        eta_modified: sum(&modified, &all),
        eta_tilde: sum(&modified, &[1, 3, 4, 7]),
        full,
        modified,
    }
}
