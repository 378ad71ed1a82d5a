//! Neumann layer potential over the whole boundary hyperplane (no periodization).
//!
//! `N g(x′, t) = c ∫ g(y) (|x′ − y|² + t²)^{(2−n)/2} dy` with `c = Γ((n−2)/2)/(2π^{n/2})`,
//! the kernel whose Fourier transform in `x′` is `e^{−2π|ξ|t}/(2π|ξ|)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use statrs::function::gamma::gamma;

use super::riesz::{riesz_potential, PotentialMethod};
use crate::error::{Error, Result};
use crate::fft::Convolution;
use crate::grid::{GridSpec, SampledFunction};
use crate::quad::integrate_box;

const NEAR: i64 = 4;

struct HeightKernels {
    value: Convolution,
    gradient: Vec<Convolution>,
}

/// Free-space Neumann layer acting on densities sampled on a non-periodic boundary grid.
pub struct FreeSpaceLayer {
    grid: GridSpec,
    constant: f64,
    cache: Mutex<HashMap<u64, Arc<HeightKernels>>>,
}

impl FreeSpaceLayer {
    pub fn new(grid: &GridSpec) -> Result<Self> {
        if grid.periodic() {
            return Err(Error::InvalidGrid(
                "the free-space layer needs a non-periodic grid".into(),
            ));
        }
        let n = grid.dim() as f64 + 1.0;
        if n < 3.0 {
            return Err(Error::InvalidGrid(
                "the half-space must have dimension at least 3".into(),
            ));
        }
        let constant = gamma((n - 2.0) / 2.0) / (2.0 * std::f64::consts::PI.powf(n / 2.0));
        Ok(Self {
            grid: grid.clone(),
            constant,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Half-space dimension.
    pub fn n(&self) -> usize {
        self.grid.dim() + 1
    }

    /// `N g` on the boundary, i.e. `I_1 g` on `ℝ^{n−1}`.
    pub fn trace(&self, density: &SampledFunction) -> Result<SampledFunction> {
        self.grid.check_same(density.grid())?;
        riesz_potential(density, 1.0, PotentialMethod::Quadrature)
    }

    fn kernels(&self, height: f64) -> Result<Arc<HeightKernels>> {
        if !(height > 0.0 && height.is_finite()) {
            return Err(Error::InvalidHeights(format!(
                "height {height} must be positive"
            )));
        }
        if let Some(k) = self
            .cache
            .lock()
            .expect("kernel cache")
            .get(&height.to_bits())
        {
            return Ok(k.clone());
        }
        let built = Arc::new(self.build(height));
        self.cache
            .lock()
            .expect("kernel cache")
            .insert(height.to_bits(), built.clone());
        Ok(built)
    }

    fn build(&self, t: f64) -> HeightKernels {
        let d = self.grid.dim();
        let n = d as f64 + 1.0;
        let m = self.grid.points_per_axis();
        let h = self.grid.spacing();
        let c = self.constant;
        let cell = h.powi(d as i32);
        let panels = ((2.0 * h / t).ceil() as usize).clamp(2, 16);
        // Component `comp`: 0 is the potential, 1..=d tangential derivatives, d+1 the normal one.
        let kernel = move |comp: usize, y: &[f64]| {
            let r2: f64 = y.iter().map(|v| v * v).sum::<f64>() + t * t;
            match comp {
                0 => c * r2.powf(-(n - 2.0) / 2.0),
                k if k <= d => -(n - 2.0) * c * y[k - 1] * r2.powf(-n / 2.0),
                _ => -(n - 2.0) * c * t * r2.powf(-n / 2.0),
            }
        };
        let table = |comp: usize| {
            Convolution::new(m, d, move |o| {
                let centre: Vec<f64> = o.iter().map(|&v| v as f64 * h).collect();
                if o.iter().all(|v| v.abs() <= NEAR) {
                    let lo: Vec<f64> = centre.iter().map(|v| v - 0.5 * h).collect();
                    let hi: Vec<f64> = centre.iter().map(|v| v + 0.5 * h).collect();
                    integrate_box(&lo, &hi, panels, 8, |y| kernel(comp, y))
                } else {
                    cell * kernel(comp, &centre)
                }
            })
        };
        HeightKernels {
            value: table(0),
            gradient: (1..=d + 1).map(table).collect(),
        }
    }

    /// `N g(·, t)` for `t > 0`.
    pub fn value_at(&self, density: &SampledFunction, t: f64) -> Result<Vec<f64>> {
        self.grid.check_same(density.grid())?;
        Ok(self.kernels(t)?.value.apply(density.values()))
    }

    /// `∇N g(·, t)`: tangential components first, then `∂_t`.
    pub fn gradient_at(&self, density: &SampledFunction, t: f64) -> Result<Vec<Vec<f64>>> {
        self.grid.check_same(density.grid())?;
        let k = self.kernels(t)?;
        Ok(k.gradient
            .iter()
            .map(|c| c.apply(density.values()))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, sample};

    fn bump(x: &[f64]) -> f64 {
        let r2 = x[0] * x[0] + x[1] * x[1];
        if r2 < 0.25 {
            (1.0 - 4.0 * r2).powi(3)
        } else {
            0.0
        }
    }

    #[test]
    fn rejects_periodic_and_low_dimension() {
        assert!(FreeSpaceLayer::new(&make_grid(2, 1.0, 8, true).unwrap()).is_err());
        assert!(FreeSpaceLayer::new(&make_grid(1, 1.0, 8, false).unwrap()).is_err());
    }

    #[test]
    fn constant_matches_poisson_normalization() {
        let layer = FreeSpaceLayer::new(&make_grid(2, 1.0, 8, false).unwrap()).unwrap();
        assert!((layer.constant - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-15);
    }

    #[test]
    fn harmonic_and_continuous_to_trace() {
        let g = make_grid(2, 2.0, 64, false).unwrap();
        let f = sample(&g, bump).unwrap();
        let layer = FreeSpaceLayer::new(&g).unwrap();
        let h = g.spacing();
        let trace = layer.trace(&f).unwrap();
        let near = layer.value_at(&f, 0.25 * h).unwrap();
        let k = g.node_index(&[0.0, 0.0]).unwrap();
        // u(0, t) ≈ u(0, 0) − t g(0) since ∂_t u → −g.
        let expect = trace.values()[k] - 0.25 * h * f.values()[k];
        assert!(
            (near[k] - expect).abs() < 0.005 * expect,
            "{} vs {expect}",
            near[k]
        );
        // Normal derivative tends to −g.
        let dn = layer.gradient_at(&f, 0.05 * h).unwrap();
        assert!((dn[2][k] + f.values()[k]).abs() < 0.05);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let g = make_grid(2, 2.0, 32, false).unwrap();
        let f = sample(&g, bump).unwrap();
        let layer = FreeSpaceLayer::new(&g).unwrap();
        let t = 0.5;
        let dt = 1e-4;
        let up = layer.value_at(&f, t + dt).unwrap();
        let down = layer.value_at(&f, t - dt).unwrap();
        let grad = layer.gradient_at(&f, t).unwrap();
        for k in [100, 500, 528] {
            let fd = (up[k] - down[k]) / (2.0 * dt);
            assert!((fd - grad[2][k]).abs() < 1e-6 * grad[2][k].abs().max(1e-3));
        }
    }
}
