use serde::Serialize;

use crate::error::{config, Result};

/// `(order, ln_order)` for consecutive pairs of `(N, e_N)`.
///
/// `order = log2(e_N / e_2N)`, `ln_order = ln(e_N / e_2N) / ln[(N^{-1} ln N) / ((2N)^{-1} ln 2N)]`.
/// Entry `k` belongs to the row of the smaller `N`. Errors must be positive
/// and `N` must double.
pub fn estimated_orders(errors: &[(usize, f64)]) -> Result<Vec<(f64, f64)>> {
    if let Some(&(n, e)) = errors.iter().find(|(_, e)| !(*e > 0.0)) {
        return config(format!("error {e} at N = {n} is not positive"));
    }
    errors
        .windows(2)
        .map(|w| {
            let ((n1, e1), (n2, e2)) = (w[0], w[1]);
            if n2 != 2 * n1 {
                return config(format!("N values {n1}, {n2} do not double"));
            }
            let ratio = (e1 / e2).ln();
            let (a, b) = (n1 as f64, n2 as f64);
            let scale = ((a.ln() / a) / (b.ln() / b)).ln();
            Ok((ratio / std::f64::consts::LN_2, ratio / scale))
        })
        .collect()
}

/// One CSV row: a single norm value at one `N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRecord {
    #[serde(rename = "N")]
    pub n: usize,
    pub dofs: usize,
    pub method: String,
    pub space: String,
    pub p: usize,
    pub norm: String,
    pub value: f64,
    pub order: Option<f64>,
    pub ln_order: Option<f64>,
    /// Seconds spent on this `N`; not serialised so output stays deterministic.
    #[serde(skip)]
    pub wall_time: f64,
}

/// Fills `order` and `ln_order` of records sharing a norm, in row order.
pub fn fill_orders(records: &mut [ErrorRecord]) -> Result<()> {
    let mut norms: Vec<String> = records.iter().map(|r| r.norm.clone()).collect();
    norms.dedup();
    norms.sort();
    norms.dedup();
    for norm in norms {
        let idx: Vec<usize> = (0..records.len()).filter(|&k| records[k].norm == norm).collect();
        for w in idx.windows(2) {
            let (a, b) = (&records[w[0]], &records[w[1]]);
            if b.n == 2 * a.n && a.value > 0.0 && b.value > 0.0 {
                let o = estimated_orders(&[(a.n, a.value), (b.n, b.value)])?[0];
                records[w[0]].order = Some(o.0);
                records[w[0]].ln_order = Some(o.1);
            }
        }
    }
    Ok(())
}
