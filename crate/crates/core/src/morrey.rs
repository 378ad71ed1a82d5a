//! Morrey-Lorentz norms over cube families.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{relation, Result};
use crate::grid::{Cube, CubeFamily, SampledFunction};
use crate::lorentz::{LorentzParams, Profile};

/// `(p, κ, λ)` for `M^λ_{pκ}`: local Lorentz space `L^{pκ}`, global exponent `λ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MorreyParams {
    p: f64,
    kappa: f64,
    lambda: f64,
}

impl MorreyParams {
    pub fn new(p: f64, kappa: f64, lambda: f64) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(relation(format!("p >= 1 (got p = {p})")));
        }
        if !(lambda >= p && lambda.is_finite()) {
            return Err(relation(format!(
                "p <= lambda < inf (got p = {p}, lambda = {lambda})"
            )));
        }
        LorentzParams::new(p, kappa)?;
        Ok(Self { p, kappa, lambda })
    }

    pub fn weak(p: f64, lambda: f64) -> Result<Self> {
        Self::new(p, f64::INFINITY, lambda)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn local(&self) -> LorentzParams {
        LorentzParams::new(self.p, self.kappa).expect("validated")
    }
}

/// Norm value and the cube that attains it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MorreyNorm {
    pub value: f64,
    pub argmax: Option<Cube>,
}

/// `|Q|^{1/λ−1/p}‖fχ_Q‖*_{pκ}` for every cube of the family, in family order.
pub fn morrey_profile(
    f: &SampledFunction,
    params: MorreyParams,
    cubes: &CubeFamily,
) -> Result<Vec<f64>> {
    cubes.check_grid(f.grid())?;
    let grid = f.grid();
    let local = params.local();
    let weight = f.weight();
    let exponent = 1.0 / params.lambda - 1.0 / params.p;
    Ok(cubes
        .cubes()
        .par_iter()
        .map_init(Vec::new, |buf, q| {
            buf.clear();
            q.for_each_node(grid, |k| buf.push(f.values()[k].abs()));
            let norm = Profile::from_abs(buf, weight).quasinorm(local);
            q.measure(grid).powf(exponent) * norm
        })
        .collect())
}

pub(crate) fn argmax(values: &[f64]) -> Option<(usize, f64)> {
    values
        .iter()
        .copied()
        .enumerate()
        .fold(None, |best, (i, v)| match best {
            Some((_, b)) if b >= v => best,
            _ => Some((i, v)),
        })
}

pub fn morrey_lorentz_norm(
    f: &SampledFunction,
    params: MorreyParams,
    cubes: &CubeFamily,
) -> Result<MorreyNorm> {
    let profile = morrey_profile(f, params, cubes)?;
    let (i, value) = argmax(&profile).expect("family checked nonempty");
    Ok(MorreyNorm {
        value,
        argmax: (value > 0.0).then(|| cubes.cubes()[i]),
    })
}

pub fn weak_morrey_norm(
    f: &SampledFunction,
    p: f64,
    lambda: f64,
    cubes: &CubeFamily,
) -> Result<MorreyNorm> {
    morrey_lorentz_norm(f, MorreyParams::weak(p, lambda)?, cubes)
}

/// Exponent triple `(q, d, μ)` of `M^μ_{qd}` as used by the product inequality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MorreyTriple {
    pub q: f64,
    pub d: f64,
    pub mu: f64,
}

impl MorreyTriple {
    fn params(&self) -> Result<MorreyParams> {
        MorreyParams::new(self.q, self.d, self.mu)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeakHolder {
    pub lhs: f64,
    pub rhs_without_c: f64,
    pub ratio: f64,
}

/// `‖fg‖_{M^{μ3}_{q3 d3}}` against `‖f‖_{M^{μ1}_{q1 d1}}‖g‖_{M^{μ2}_{q2 d2}}`.
pub fn weak_holder_check(
    f: &SampledFunction,
    g: &SampledFunction,
    e1: MorreyTriple,
    e2: MorreyTriple,
    e3: MorreyTriple,
    cubes: &CubeFamily,
) -> Result<WeakHolder> {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(1.0);
    if !close(1.0 / e3.q, 1.0 / e1.q + 1.0 / e2.q) {
        return Err(relation("1/q3 = 1/q1 + 1/q2"));
    }
    if !close(1.0 / e3.mu, 1.0 / e1.mu + 1.0 / e2.mu) {
        return Err(relation("1/mu3 = 1/mu1 + 1/mu2"));
    }
    if 1.0 / e3.d > 1.0 / e1.d + 1.0 / e2.d + 1e-12 {
        return Err(relation("1/d3 <= 1/d1 + 1/d2"));
    }
    let fg = f.zip_with(g, |a, b| a * b)?;
    let lhs = morrey_lorentz_norm(&fg, e3.params()?, cubes)?.value;
    let rhs = morrey_lorentz_norm(f, e1.params()?, cubes)?.value
        * morrey_lorentz_norm(g, e2.params()?, cubes)?.value;
    let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    Ok(WeakHolder {
        lhs,
        rhs_without_c: rhs,
        ratio,
    })
}
