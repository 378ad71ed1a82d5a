//! Gauss-Legendre rules and tensor-product box integration.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use gauss_quad::legendre::GaussLegendre;

type RuleCache = Mutex<HashMap<usize, &'static [(f64, f64)]>>;

/// Nodes and weights on `[-1, 1]`, cached per order.
pub(crate) fn gauss_rule(order: usize) -> &'static [(f64, f64)] {
    static RULES: OnceLock<RuleCache> = OnceLock::new();
    let mut rules = RULES
        .get_or_init(Default::default)
        .lock()
        .expect("rule cache");
    rules.entry(order).or_insert_with(|| {
        let rule = GaussLegendre::new(order.try_into().expect("positive order"));
        Box::leak(rule.as_node_weight_pairs().to_vec().into_boxed_slice())
    })
}

/// `∫ g` over the box `[lo, hi]` (dimension `lo.len() ≤ 3`), each axis split into
/// `panels` equal pieces with an `order`-point rule on each.
pub(crate) fn integrate_box(
    lo: &[f64],
    hi: &[f64],
    panels: usize,
    order: usize,
    mut g: impl FnMut(&[f64]) -> f64,
) -> f64 {
    let dim = lo.len();
    if dim == 0 {
        return g(&[]);
    }
    let rule = gauss_rule(order);
    // 1-D abscissae and weights per axis.
    let axes: Vec<Vec<(f64, f64)>> = (0..dim)
        .map(|a| {
            let width = (hi[a] - lo[a]) / panels as f64;
            (0..panels)
                .flat_map(|p| {
                    let mid = lo[a] + (p as f64 + 0.5) * width;
                    rule.iter()
                        .map(move |(x, w)| (mid + 0.5 * width * x, 0.5 * width * w))
                })
                .collect()
        })
        .collect();
    let mut y = [0.0; 3];
    let mut total = 0.0;
    match dim {
        1 => {
            for &(x0, w0) in &axes[0] {
                y[0] = x0;
                total += w0 * g(&y[..1]);
            }
        }
        2 => {
            for &(x0, w0) in &axes[0] {
                for &(x1, w1) in &axes[1] {
                    y[0] = x0;
                    y[1] = x1;
                    total += w0 * w1 * g(&y[..2]);
                }
            }
        }
        _ => {
            for &(x0, w0) in &axes[0] {
                for &(x1, w1) in &axes[1] {
                    for &(x2, w2) in &axes[2] {
                        y[0] = x0;
                        y[1] = x1;
                        y[2] = x2;
                        total += w0 * w1 * w2 * g(&y[..3]);
                    }
                }
            }
        }
    }
    total
}

/// `∫ |y|^{α−n}` over the axis-aligned cube with centre `center` and side `h`.
///
/// Uses `div(y|y|^{α−n}) = α|y|^{α−n}`, which turns the integral into smooth face integrals
/// even when the cube contains the origin.
pub(crate) fn cell_integral_power(center: &[f64], h: f64, alpha: f64) -> f64 {
    let n = center.len();
    if n == 1 {
        let prim = |y: f64| y.signum() * y.abs().powf(alpha) / alpha;
        return prim(center[0] + 0.5 * h) - prim(center[0] - 0.5 * h);
    }
    let e = 0.5 * (alpha - n as f64);
    let mut total = 0.0;
    for axis in 0..n {
        for side in [-0.5, 0.5] {
            let plane = center[axis] + side * h;
            let normal_dot = plane * side.signum();
            if plane == 0.0 {
                continue;
            }
            let (mut lo, mut hi) = (Vec::with_capacity(n - 1), Vec::with_capacity(n - 1));
            for b in (0..n).filter(|&b| b != axis) {
                lo.push(center[b] - 0.5 * h);
                hi.push(center[b] + 0.5 * h);
            }
            let face = integrate_box(&lo, &hi, 2, 12, |u| {
                let r2: f64 = u.iter().map(|v| v * v).sum::<f64>() + plane * plane;
                r2.powf(e)
            });
            total += normal_dot * face;
        }
    }
    total / alpha
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exactness() {
        let v = integrate_box(&[0.0, -1.0], &[2.0, 1.0], 1, 4, |y| {
            y[0].powi(3) * y[1] * y[1]
        });
        assert!((v - 4.0 * 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn power_cell_matches_polar_disc_bound() {
        // The unit-side square around the origin lies between the inscribed and
        // circumscribed discs; for α = 1 in the plane ∫_{B_R} |y|^{-1} = 2πR.
        let v = cell_integral_power(&[0.0, 0.0], 1.0, 1.0);
        assert!(
            v > 2.0 * std::f64::consts::PI * 0.5
                && v < 2.0 * std::f64::consts::PI * 0.5f64.hypot(0.5)
        );
        // Closed form: 4 asinh(1) for the unit square.
        assert!((v - 4.0 * 1f64.asinh()).abs() < 1e-10);
    }

    #[test]
    fn power_cell_off_origin_matches_tensor_rule() {
        let c = [1.0, 2.0, -1.0];
        let a = cell_integral_power(&c, 1.0, 1.5);
        let b = integrate_box(&[0.5, 1.5, -1.5], &[1.5, 2.5, -0.5], 4, 10, |y| {
            (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).powf(-0.75)
        });
        assert!((a - b).abs() < 1e-10 * b);
    }

    #[test]
    fn one_dimensional_closed_form() {
        let v = cell_integral_power(&[0.0], 2.0, 0.5);
        assert!((v - 4.0).abs() < 1e-14);
    }
}
