//! Closed-form solutions of the boundary problem and finite-difference residuals.

use serde::Serialize;

use crate::error::{invalid, Result};

/// Fourth-order central second difference along `axis`.
fn second_difference(u: &impl Fn(&[f64]) -> f64, x: &[f64], axis: usize, step: f64) -> f64 {
    let mut y = x.to_vec();
    let mut at = |k: f64| {
        y[axis] = x[axis] + k * step;
        u(&y)
    };
    (-at(2.0) + 16.0 * at(1.0) - 30.0 * at(0.0) + 16.0 * at(-1.0) - at(-2.0)) / (12.0 * step * step)
}

/// Fourth-order central first difference along `axis`.
fn first_difference(u: &impl Fn(&[f64]) -> f64, x: &[f64], axis: usize, step: f64) -> f64 {
    let mut y = x.to_vec();
    let mut at = |k: f64| {
        y[axis] = x[axis] + k * step;
        u(&y)
    };
    (-at(2.0) + 8.0 * at(1.0) - 8.0 * at(-1.0) + at(-2.0)) / (12.0 * step)
}

/// `|Δ_h u(x)|` relative to `max_i |∂_i² u(x)|`.
fn relative_laplacian(u: &impl Fn(&[f64]) -> f64, x: &[f64], step: f64) -> f64 {
    let parts: Vec<f64> = (0..x.len())
        .map(|a| second_difference(u, x, a, step))
        .collect();
    let scale = parts.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let lap: f64 = parts.iter().sum();
    if scale == 0.0 {
        lap.abs()
    } else {
        lap.abs() / scale
    }
}

/// `u(x′, x_n) = (ε/(|x′−x′₀|² + (x_n + a)²))^{(n−2)/2}` with `ε = (n−2)a/b`, a positive
/// solution of `Δu = 0`, `−∂_{x_n}u = b u^{n/(n−2)}` on `x_n = 0`. The singularity sits at
/// `(x′₀, −a)`, below the boundary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bubble {
    pub n: usize,
    pub b: f64,
    pub center: Vec<f64>,
    pub a: f64,
    pub eps: f64,
}

pub fn oracle_bubble(n: usize, b: f64, center: &[f64], a: f64) -> Result<Bubble> {
    if n < 3 {
        return Err(invalid(format!("the bubble needs n >= 3, got {n}")));
    }
    if !(b > 0.0) {
        return Err(invalid(format!("the bubble needs b > 0, got {b}")));
    }
    if !(a > 0.0) {
        return Err(invalid(format!(
            "singularity at x_n = {} is not below the boundary",
            -a
        )));
    }
    if center.len() != n - 1 {
        return Err(invalid("boundary centre must have n - 1 coordinates"));
    }
    Ok(Bubble {
        n,
        b,
        center: center.to_vec(),
        a,
        eps: (n as f64 - 2.0) * a / b,
    })
}

impl Bubble {
    pub fn rho(&self) -> f64 {
        self.n as f64 / (self.n as f64 - 2.0)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let tangential: f64 = x[..self.n - 1]
            .iter()
            .zip(&self.center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let t = x[self.n - 1] + self.a;
        (self.eps / (tangential + t * t)).powf(0.5 * (self.n as f64 - 2.0))
    }

    /// Relative harmonicity defect at an interior point.
    pub fn interior_residual(&self, x: &[f64], step: f64) -> f64 {
        relative_laplacian(&|y: &[f64]| self.value(y), x, step)
    }

    /// `|−∂_{x_n}u − b u^ρ| / (b u^ρ)` at the boundary point `(x′, 0)`.
    pub fn boundary_residual(&self, x_tangential: &[f64], step: f64) -> f64 {
        let mut x = x_tangential.to_vec();
        x.push(0.0);
        let dn = first_difference(&|y: &[f64]| self.value(y), &x, self.n - 1, step);
        let target = self.b * self.value(&x).powf(self.rho());
        (-dn - target).abs() / target
    }
}

/// `u(x′, x_n) = −bA^ρ x_n + A` for `A > 0`, `b < 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearSolution {
    pub amplitude: f64,
    pub b: f64,
    pub rho: f64,
}

pub fn oracle_linear(amplitude: f64, b: f64, rho: f64) -> Result<LinearSolution> {
    if !(amplitude > 0.0 && b < 0.0 && rho > 1.0) {
        return Err(invalid(format!(
            "the affine solution needs A > 0, b < 0, rho > 1 (got {amplitude}, {b}, {rho})"
        )));
    }
    Ok(LinearSolution { amplitude, b, rho })
}

impl LinearSolution {
    pub fn slope(&self) -> f64 {
        -self.b * self.amplitude.powf(self.rho)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.slope() * x[x.len() - 1] + self.amplitude
    }

    /// Absolute harmonicity defect `|Δ_h u|`.
    pub fn interior_residual(&self, x: &[f64], step: f64) -> f64 {
        let u = |y: &[f64]| self.value(y);
        (0..x.len())
            .map(|a| second_difference(&u, x, a, step))
            .sum::<f64>()
            .abs()
    }

    /// `|−∂_{x_n}u − b u^ρ|` at `(x′, 0)`.
    pub fn boundary_residual(&self, x_tangential: &[f64], step: f64) -> f64 {
        let mut x = x_tangential.to_vec();
        x.push(0.0);
        let dn = first_difference(&|y: &[f64]| self.value(y), &x, x.len() - 1, step);
        (-dn - self.b * self.value(&x).abs().powf(self.rho)).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bubble_reference_value() {
        let u = oracle_bubble(3, 1.0, &[0.0, 0.0], 1.0).unwrap();
        assert_eq!(u.eps, 1.0);
        assert!((u.value(&[0.0, 0.0, 0.0]) - 1.0).abs() < 1e-15);
        assert!(oracle_bubble(3, 1.0, &[0.0, 0.0], -1.0).is_err());
        assert!(oracle_bubble(3, 1.0, &[0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn bubble_residuals() {
        let u = oracle_bubble(3, 2.0, &[0.3, -0.1], 0.7).unwrap();
        for k in 0..20 {
            let s = k as f64 * 0.37;
            let x = [s.sin(), (1.3 * s).cos(), 0.2 + 0.1 * k as f64];
            assert!(u.interior_residual(&x, 1e-3) < 1e-6);
            assert!(u.boundary_residual(&x[..2], 1e-3) < 1e-6);
        }
        let u5 = oracle_bubble(5, 1.5, &[0.0; 4], 1.0).unwrap();
        assert!(u5.boundary_residual(&[0.2, 0.1, 0.0, -0.3], 1e-3) < 1e-6);
    }

    #[test]
    fn affine_solutions() {
        let u = oracle_linear(1.0, -1.0, 2.0).unwrap();
        assert!((u.value(&[0.0, 0.0, 2.0]) - 3.0).abs() < 1e-15);
        let v = oracle_linear(2.0, -0.5, 3.0).unwrap();
        assert!((v.slope() - 4.0).abs() < 1e-15);
        assert!(v.boundary_residual(&[0.1, 0.2], 1e-2) < 1e-12);
        assert!(v.interior_residual(&[0.1, 0.2, 0.3], 1e-2) < 1e-10);
        assert!(oracle_linear(1.0, 1.0, 2.0).is_err());
    }
}
