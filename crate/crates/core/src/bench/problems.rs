//! Manufactured test problems with closed-form solutions.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use crate::fem::{Coef, ExactFn, Problem};

/// `X(x) = cos(πx/2) - (e^{-x/ε} - e^{-1/ε}) / (1 - e^{-1/ε})` with `X'`, `X''`.
fn layer_x(eps: f64, x: f64) -> [f64; 3] {
    let d = -(-1.0 / eps).exp_m1();
    let e = (-x / eps).exp();
    let tail = (-1.0 / eps).exp();
    let (s, c) = (FRAC_PI_2 * x).sin_cos();
    [
        c - (e - tail) / d,
        -FRAC_PI_2 * s + e / (eps * d),
        -FRAC_PI_2 * FRAC_PI_2 * c - e / (eps * eps * d),
    ]
}

/// `Y(y) = (1 - e^{-y/√ε})(1 - e^{-(1-y)/√ε}) / (1 - e^{-1/√ε})` with `Y'`, `Y''`.
fn layer_y(eps: f64, y: f64) -> [f64; 3] {
    let s = eps.sqrt();
    let d = -(-1.0 / s).exp_m1();
    let ea = (-y / s).exp();
    let eb = (-(1.0 - y) / s).exp();
    let (a, a1, a2) = (-(-y / s).exp_m1(), ea / s, -ea / (s * s));
    let (b, b1, b2) = (-(-(1.0 - y) / s).exp_m1(), -eb / s, -eb / (s * s));
    [a * b / d, (a1 * b + a * b1) / d, (a2 * b + 2.0 * a1 * b1 + a * b2) / d]
}

/// The product solution `u = X(x) Y(y)` shared by both examples.
pub fn exact_solution(eps: f64) -> ExactFn {
    Arc::new(move |x, y| {
        let [xv, x1, x2] = layer_x(eps, x);
        let [yv, y1, y2] = layer_y(eps, y);
        [xv * yv, x1 * yv, xv * y1, x2 * yv, xv * y2]
    })
}

fn manufactured(name: &str, eps: f64, beta: f64, gamma: f64, b: Coef, b_x: Coef, c: Coef) -> Problem {
    let exact = exact_solution(eps);
    let (ex, bb, cc) = (exact.clone(), b.clone(), c.clone());
    let f: Coef = Arc::new(move |x, y| {
        let [u, ux, _, uxx, uyy] = ex(x, y);
        -eps * (uxx + uyy) - bb(x, y) * ux + cc(x, y) * u
    });
    Problem { name: name.into(), epsilon: eps, beta, gamma, b, b_x, c, f, exact: Some(exact) }
}

/// `-εΔu - (2-x) u_x + 3/2 u = f`; `β = 1`, `γ = 1`.
pub fn problem_example1(eps: f64) -> Problem {
    manufactured(
        "example1",
        eps,
        1.0,
        1.0,
        Arc::new(|x, _| 2.0 - x),
        Arc::new(|_, _| -1.0),
        Arc::new(|_, _| 1.5),
    )
}

/// `-εΔu - u_x + 1/2 u = f`; `β = 1`, `γ = 1/2`. With constant `b` the
/// divergence and non-divergence forms coincide.
pub fn problem_example2(eps: f64) -> Problem {
    manufactured(
        "example2",
        eps,
        1.0,
        0.5,
        Arc::new(|_, _| 1.0),
        Arc::new(|_, _| 0.0),
        Arc::new(|_, _| 0.5),
    )
}

/// Characteristic-layer template `e^{-y/√ε}` with derivatives.
pub fn layer_template_y(eps: f64) -> ExactFn {
    let s = eps.sqrt();
    Arc::new(move |_, y| {
        let e = (-y / s).exp();
        [e, 0.0, -e / s, 0.0, e / (s * s)]
    })
}

/// Exponential-layer template `e^{-x/ε}` with derivatives.
pub fn layer_template_x(eps: f64) -> ExactFn {
    Arc::new(move |x, _| {
        let e = (-x / eps).exp();
        [e, -e / eps, 0.0, e / (eps * eps), 0.0]
    })
}
