use crate::error::{Error, Result};

const MAX_NEWTON: usize = 100;

/// A one-dimensional quadrature rule on `[-1,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integral over `[-1,1]` of `f`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }

    /// The same rule mapped affinely onto `[a,b]`.
    pub fn mapped(&self, a: f64, b: f64) -> QuadratureRule {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        QuadratureRule {
            nodes: self.nodes.iter().map(|t| mid + half * t).collect(),
            weights: self.weights.iter().map(|w| w * half).collect(),
        }
    }
}

/// Points per direction used for assembly and norm quadrature at degree `p`.
pub fn assembly_points(p: usize) -> usize {
    (p + 2).max(6)
}

/// Legendre polynomial `L_n` and its first two derivatives at `t`.
///
/// Uses the three-term recurrence together with
/// `L'_{k+1} = L'_{k-1} + (2k+1) L_k`, which stays valid at `t = ±1`.
pub fn legendre(n: usize, t: f64) -> (f64, f64, f64) {
    if n == 0 {
        return (1.0, 0.0, 0.0);
    }
    let (mut l0, mut l1) = (1.0, t);
    let (mut d0, mut d1) = (0.0, 1.0);
    let (mut s0, mut s1) = (0.0, 0.0);
    for k in 1..n {
        let kf = k as f64;
        let l2 = ((2.0 * kf + 1.0) * t * l1 - kf * l0) / (kf + 1.0);
        let d2 = d0 + (2.0 * kf + 1.0) * l1;
        let s2 = s0 + (2.0 * kf + 1.0) * d1;
        (l0, l1) = (l1, l2);
        (d0, d1) = (d1, d2);
        (s0, s1) = (s1, s2);
    }
    (l1, d1, s1)
}

/// Gauss-Legendre rule with `n` points, by Newton iteration on `L_n`
/// from Chebyshev initial guesses.
pub fn gauss_legendre_rule(n: usize) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::Config("Gauss rule needs at least one point".into()));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut converged = false;
        for _ in 0..MAX_NEWTON {
            let (l, d, _) = legendre(n, t);
            let dt = l / d;
            t -= dt;
            if dt.abs() <= 1e-16 * t.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numerical(format!(
                "Gauss-Legendre Newton iteration did not converge (n = {n})"
            )));
        }
        let (_, d, _) = legendre(n, t);
        let w = 2.0 / ((1.0 - t * t) * d * d);
        // Descending guesses: node i is the i-th largest.
        nodes[n - 1 - i] = t;
        nodes[i] = -t;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(QuadratureRule { nodes, weights })
}

/// The `p+1` Gauss-Lobatto points: `±1` and the roots of `L_p'`.
///
/// Interior roots are bracketed by consecutive Gauss-Legendre nodes of
/// degree `p` (interlacing) and found by Newton steps that fall back to
/// bisection whenever a step leaves the bracket.
pub fn gauss_lobatto_points(p: usize) -> Result<Vec<f64>> {
    if p == 0 {
        return Err(Error::Config("Gauss-Lobatto points need p >= 1".into()));
    }
    let gauss = gauss_legendre_rule(p)?.nodes;
    let mut pts = Vec::with_capacity(p + 1);
    pts.push(-1.0);
    for k in 0..p - 1 {
        let (mut a, mut b) = (gauss[k], gauss[k + 1]);
        let fa = legendre(p, a).1;
        let mut t = {
            let theta = std::f64::consts::PI * (p - 1 - k) as f64 / p as f64;
            let guess = theta.cos();
            if guess > a && guess < b {
                guess
            } else {
                0.5 * (a + b)
            }
        };
        let mut converged = false;
        for _ in 0..MAX_NEWTON {
            let (_, d, s) = legendre(p, t);
            if d == 0.0 {
                converged = true;
                break;
            }
            if (d > 0.0) == (fa > 0.0) {
                a = t;
            } else {
                b = t;
            }
            let mut next = t - d / s;
            if !(next > a && next < b) {
                next = 0.5 * (a + b);
            }
            let step = (next - t).abs();
            t = next;
            if step <= 1e-16 || b - a <= 1e-16 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numerical(format!(
                "Gauss-Lobatto root search did not converge (p = {p})"
            )));
        }
        pts.push(t);
    }
    pts.push(1.0);
    // Exact symmetry about 0.
    for i in 0..pts.len() / 2 {
        let j = pts.len() - 1 - i;
        let v = 0.5 * (pts[j] - pts[i]);
        pts[i] = -v;
        pts[j] = v;
    }
    if pts.len() % 2 == 1 {
        pts[p / 2] = 0.0;
    }
    Ok(pts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_rule() {
        let r = gauss_legendre_rule(1).unwrap();
        assert_eq!(r.nodes, vec![0.0]);
        assert!((r.weights[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn two_point_rule() {
        let r = gauss_legendre_rule(2).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!((r.nodes[0] + s).abs() < 1e-15 && (r.nodes[1] - s).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-15 && (r.weights[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exactness_degree() {
        for n in 1..=12 {
            let r = gauss_legendre_rule(n).unwrap();
            assert!((r.weights.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for k in 0..2 * n {
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                let q = r.integrate(|t| t.powi(k as i32));
                assert!((q - exact).abs() < 1e-13, "n={n} k={k} q={q}");
            }
            for &t in &r.nodes {
                assert!(legendre(n, t).0.abs() <= 1e-14);
            }
        }
        let r6 = gauss_legendre_rule(6).unwrap();
        assert!((r6.integrate(|t| t.powi(10)) - 2.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn lobatto_small_cases() {
        assert_eq!(gauss_lobatto_points(1).unwrap(), vec![-1.0, 1.0]);
        assert_eq!(gauss_lobatto_points(2).unwrap(), vec![-1.0, 0.0, 1.0]);
        let p3 = gauss_lobatto_points(3).unwrap();
        let s = 1.0 / 5f64.sqrt();
        assert!((p3[1] + s).abs() < 1e-15 && (p3[2] - s).abs() < 1e-15);
    }

    #[test]
    fn lobatto_roots_and_symmetry() {
        for p in 1..=10 {
            let pts = gauss_lobatto_points(p).unwrap();
            assert_eq!(pts.len(), p + 1);
            for w in pts.windows(2) {
                assert!(w[0] < w[1]);
            }
            for i in 0..=p {
                assert_eq!(pts[i], -pts[p - i]);
            }
            for &t in &pts[1..p] {
                assert!(legendre(p, t).1.abs() <= 1e-13, "p={p} t={t}");
            }
        }
    }

    #[test]
    fn legendre_derivatives_at_endpoint() {
        // L_n'(1) = n(n+1)/2, L_n''(1) = (n-1)n(n+1)(n+2)/8
        for n in 0..9usize {
            let (v, d, s) = legendre(n, 1.0);
            let nf = n as f64;
            assert!((v - 1.0).abs() < 1e-14);
            assert!((d - nf * (nf + 1.0) / 2.0).abs() < 1e-12);
            assert!((s - (nf - 1.0) * nf * (nf + 1.0) * (nf + 2.0) / 8.0).abs() < 1e-10);
        }
    }
}
