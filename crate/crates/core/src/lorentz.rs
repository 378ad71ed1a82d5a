//! Distribution functions, decreasing rearrangements and Lorentz quasinorms.
//!
//! A sampled function is a discrete measure space: every node carries the weight `h^dim`.
//! Its rearrangement is a step function, so every `t`-integral below is either closed form
//! per step or a smooth Gauss-Legendre integral in `log t`.

use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use serde::Serialize;

use crate::error::{invalid, relation, Result};
use crate::grid::SampledFunction;

/// Lorentz exponents `(p, d)`; `d = ∞` is the weak space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LorentzParams {
    p: f64,
    d: f64,
}

impl LorentzParams {
    pub fn new(p: f64, d: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(relation(format!("p >= 1 (got p = {p})")));
        }
        if d.is_nan() || d < 1.0 {
            return Err(relation(format!("d >= 1 (got d = {d})")));
        }
        if p.is_infinite() && d.is_finite() {
            return Err(relation(
                "p = inf requires d = inf (L^{inf,d} = {0} for finite d)",
            ));
        }
        Ok(Self { p, d })
    }

    pub fn weak(p: f64) -> Result<Self> {
        Self::new(p, f64::INFINITY)
    }

    pub fn strong(p: f64) -> Result<Self> {
        Self::new(p, p)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn d(&self) -> f64 {
        self.d
    }
}

/// Which Lorentz functional to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NormKind {
    /// Built from `f*`.
    Rearrangement,
    /// Built from `f♮(t) = (1/t)∫₀ᵗ f*`.
    Natural,
}

/// Right-continuous step function: `levels[i]` on `[breakpoints[i], breakpoints[i+1])`,
/// zero from the last breakpoint on.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    levels: Vec<f64>,
}

impl StepFunction {
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn eval(&self, t: f64) -> f64 {
        if self.levels.is_empty() || t >= *self.breakpoints.last().expect("nonempty") {
            return 0.0;
        }
        let i = self.breakpoints.partition_point(|&b| b <= t);
        self.levels[i.saturating_sub(1)]
    }

    pub fn integral(&self) -> f64 {
        self.levels
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(v, w)| v * (w[1] - w[0]))
            .sum()
    }
}

/// Distinct nonzero levels of `|f|` in decreasing order with the mass carried by each.
#[derive(Clone, Debug, Default, PartialEq)]
pub(crate) struct Profile {
    levels: Vec<f64>,
    masses: Vec<f64>,
}

impl Profile {
    /// `abs` must hold absolute values; it is sorted in place.
    pub(crate) fn from_abs(abs: &mut [f64], weight: f64) -> Self {
        abs.sort_unstable_by(|a, b| b.total_cmp(a));
        let mut levels = Vec::new();
        let mut masses: Vec<f64> = Vec::new();
        for &v in abs.iter().take_while(|&&v| v > 0.0) {
            if levels.last() == Some(&v) {
                *masses.last_mut().expect("paired") += weight;
            } else {
                levels.push(v);
                masses.push(weight);
            }
        }
        Self { levels, masses }
    }

    pub(crate) fn of(f: &SampledFunction) -> Self {
        let mut abs: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
        Self::from_abs(&mut abs, f.weight())
    }

    /// Cumulative masses `T_i`.
    fn cumulative(&self) -> Vec<f64> {
        self.masses
            .iter()
            .scan(0.0, |acc, m| {
                *acc += m;
                Some(*acc)
            })
            .collect()
    }

    /// `self / levels[0]` and `levels[0]`, so that powers of tiny or huge levels stay finite.
    fn unit(&self) -> Option<(Self, f64)> {
        let top = self.levels[0];
        (top != 1.0).then(|| {
            let levels = self.levels.iter().map(|v| v / top).collect();
            (
                Self {
                    levels,
                    masses: self.masses.clone(),
                },
                top,
            )
        })
    }

    pub(crate) fn rearrangement(&self) -> StepFunction {
        let mut breakpoints = vec![0.0];
        breakpoints.extend(self.cumulative());
        StepFunction {
            breakpoints,
            levels: self.levels.clone(),
        }
    }

    pub(crate) fn distribution(&self) -> StepFunction {
        let t = self.cumulative();
        let k = self.levels.len();
        let mut breakpoints = vec![0.0];
        breakpoints.extend(self.levels.iter().rev());
        // On [u_{j-1}, u_j) the measure of {|f| > s} is the mass of all levels >= u_j.
        let levels = (0..k).map(|j| t[k - 1 - j]).collect();
        StepFunction {
            breakpoints,
            levels,
        }
    }

    pub(crate) fn quasinorm(&self, params: LorentzParams) -> f64 {
        let (p, d) = (params.p, params.d);
        if self.levels.is_empty() {
            return 0.0;
        }
        if p.is_infinite() {
            return self.levels[0];
        }
        let t = self.cumulative();
        if d.is_infinite() {
            return self
                .levels
                .iter()
                .zip(&t)
                .map(|(v, ti)| v * ti.powf(1.0 / p))
                .fold(0.0, f64::max);
        }
        if let Some((unit, top)) = self.unit() {
            return top * unit.quasinorm(params);
        }
        let e = d / p;
        let mut prev = 0.0;
        let mut sum = 0.0;
        for (v, ti) in self.levels.iter().zip(&t) {
            let cur = ti.powf(e);
            sum += v.powf(d) * (cur - prev);
            prev = cur;
        }
        sum.powf(1.0 / d)
    }

    /// Same quantity through the distribution function, `d ∫ d_f(s)^{d/p} s^{d-1} ds`.
    pub(crate) fn quasinorm_via_distribution(&self, params: LorentzParams) -> f64 {
        let (p, d) = (params.p, params.d);
        if self.levels.is_empty() {
            return 0.0;
        }
        if p.is_infinite() {
            return self.levels[0];
        }
        let dist = self.distribution();
        let s = &dist.breakpoints;
        if d.is_infinite() {
            return dist
                .levels
                .iter()
                .enumerate()
                .map(|(j, dj)| s[j + 1] * dj.powf(1.0 / p))
                .fold(0.0, f64::max);
        }
        if let Some((unit, top)) = self.unit() {
            return top * unit.quasinorm_via_distribution(params);
        }
        let sum: f64 = dist
            .levels
            .iter()
            .enumerate()
            .map(|(j, dj)| dj.powf(d / p) * (s[j + 1].powf(d) - s[j].powf(d)))
            .sum();
        sum.powf(1.0 / d)
    }

    pub(crate) fn natural_norm(&self, params: LorentzParams) -> Result<f64> {
        let (p, d) = (params.p, params.d);
        if p <= 1.0 {
            return Err(relation(format!(
                "p > 1 for the natural norm (got p = {p})"
            )));
        }
        if self.levels.is_empty() {
            return Ok(0.0);
        }
        if p.is_infinite() {
            return Ok(self.levels[0]);
        }
        let t = self.cumulative();
        let c: Vec<f64> = self
            .levels
            .iter()
            .zip(&self.masses)
            .scan(0.0, |acc, (v, m)| {
                *acc += v * m;
                Some(*acc)
            })
            .collect();
        if d.is_infinite() {
            // t^{1/p} f♮(t) has no interior maximum on a step, so the sup sits on a breakpoint.
            return Ok(t
                .iter()
                .zip(&c)
                .map(|(ti, ci)| ci * ti.powf(1.0 / p - 1.0))
                .fold(0.0, f64::max));
        }
        if let Some((unit, top)) = self.unit() {
            return Ok(top * unit.natural_norm(params)?);
        }
        let e = d / p;
        let k = self.levels.len();
        let mut sum = self.levels[0].powf(d) * t[0].powf(e) / e;
        for i in 1..k {
            let v = self.levels[i];
            let a = c[i - 1] - v * t[i - 1];
            sum += log_segment_integral(t[i - 1], t[i], |tt| tt.powf(e) * (v + a / tt).powf(d));
        }
        sum += c[k - 1].powf(d) * t[k - 1].powf(e - d) / (d - e);
        Ok((e * sum).powf(1.0 / d))
    }

    pub(crate) fn norm(&self, params: LorentzParams, kind: NormKind) -> Result<f64> {
        match kind {
            NormKind::Rearrangement => Ok(self.quasinorm(params)),
            NormKind::Natural => self.natural_norm(params),
        }
    }
}

fn gauss_rule(points: usize) -> &'static [(f64, f64)] {
    static SHORT: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    static LONG: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    let cell = if points <= 6 { &SHORT } else { &LONG };
    cell.get_or_init(|| {
        let n = if points <= 6 { 6 } else { 16 };
        GaussLegendre::new(n.try_into().expect("nonzero"))
            .as_node_weight_pairs()
            .to_vec()
    })
}

/// `∫_a^b g(t) dt/t` for smooth `g` with `0 < a < b`, integrating in `u = log t`.
fn log_segment_integral(a: f64, b: f64, g: impl Fn(f64) -> f64) -> f64 {
    let (la, lb) = (a.ln(), b.ln());
    let len = lb - la;
    let (rule, pieces) = if len < 0.05 {
        (gauss_rule(6), 1)
    } else {
        (gauss_rule(16), (len / 0.5).ceil() as usize)
    };
    let step = len / pieces as f64;
    let mut total = 0.0;
    for k in 0..pieces {
        let lo = la + k as f64 * step;
        let mid = lo + 0.5 * step;
        let s: f64 = rule
            .iter()
            .map(|(x, w)| w * g((mid + 0.5 * step * x).exp()))
            .sum();
        total += 0.5 * step * s;
    }
    total
}

/// `d_f(s) = |{|f| > s}|` as an exact step function.
pub fn distribution_function(f: &SampledFunction) -> StepFunction {
    Profile::of(f).distribution()
}

/// `f*` as an exact step function.
pub fn decreasing_rearrangement(f: &SampledFunction) -> StepFunction {
    Profile::of(f).rearrangement()
}

/// `‖f‖*_{pd}`.
pub fn lorentz_quasinorm(f: &SampledFunction, params: LorentzParams) -> f64 {
    Profile::of(f).quasinorm(params)
}

/// `‖f‖*_{pd}` evaluated through `d_f` instead of `f*`.
pub fn lorentz_quasinorm_via_distribution(f: &SampledFunction, params: LorentzParams) -> f64 {
    Profile::of(f).quasinorm_via_distribution(params)
}

/// `‖f‖♮_{pd}`, a norm for `p > 1`.
pub fn lorentz_norm_natural(f: &SampledFunction, params: LorentzParams) -> Result<f64> {
    Profile::of(f).natural_norm(params)
}

pub fn lorentz_norm(f: &SampledFunction, params: LorentzParams, kind: NormKind) -> Result<f64> {
    Profile::of(f).norm(params, kind)
}

/// Both sides of a one-sided inequality `lhs ≤ rhs`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl InequalityCheck {
    pub fn new(lhs: f64, rhs: f64, slack: f64) -> Self {
        Self {
            lhs,
            rhs,
            pass: lhs <= rhs * (1.0 + slack) + f64::MIN_POSITIVE,
        }
    }

    pub fn ratio(&self) -> f64 {
        if self.rhs > 0.0 {
            self.lhs / self.rhs
        } else {
            0.0
        }
    }
}

/// Exponents of the product inequality `‖fg‖_{r,s} ≤ r/(r−1)‖f‖_{p1,z1}‖g‖_{p2,z2}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HolderExponents {
    pub p1: f64,
    pub z1: f64,
    pub p2: f64,
    pub z2: f64,
    pub r: f64,
    pub s: f64,
}

impl HolderExponents {
    pub fn validate(&self) -> Result<()> {
        if self.r.is_nan() || self.r <= 1.0 {
            return Err(relation(format!("r > 1 (got r = {})", self.r)));
        }
        if ((1.0 / self.r) - (1.0 / self.p1 + 1.0 / self.p2)).abs() > 1e-12 {
            return Err(relation(format!(
                "1/r = 1/p1 + 1/p2 (got 1/{} vs 1/{} + 1/{})",
                self.r, self.p1, self.p2
            )));
        }
        if 1.0 / self.z1 + 1.0 / self.z2 < 1.0 / self.s - 1e-12 {
            return Err(relation(format!(
                "1/z1 + 1/z2 >= 1/s (got z1 = {}, z2 = {}, s = {})",
                self.z1, self.z2, self.s
            )));
        }
        Ok(())
    }
}

/// Product inequality with the constant `r/(r−1)`.
pub fn holder_check(
    f: &SampledFunction,
    g: &SampledFunction,
    e: HolderExponents,
    kind: NormKind,
) -> Result<InequalityCheck> {
    e.validate()?;
    let fg = f.zip_with(g, |a, b| a * b)?;
    let lhs = lorentz_norm(&fg, LorentzParams::new(e.r, e.s)?, kind)?;
    let nf = lorentz_norm(f, LorentzParams::new(e.p1, e.z1)?, kind)?;
    let ng = lorentz_norm(g, LorentzParams::new(e.p2, e.z2)?, kind)?;
    Ok(InequalityCheck::new(lhs, e.r / (e.r - 1.0) * nf * ng, 1e-9))
}

/// `|A|^{1/p−1}∫_A|f| ≤ (p/(p−1))^{1/k'}‖f‖*_{L^{pk}(A)}` on the set of nodes `values`
/// (the restriction of `f` to `A`), each of weight `weight`.
pub fn embedding_check(values: &[f64], weight: f64, p: f64, k: f64) -> Result<InequalityCheck> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(relation(format!("1 < p < inf (got p = {p})")));
    }
    if values.is_empty() {
        return Err(invalid("empty set"));
    }
    let measure = values.len() as f64 * weight;
    let mass: f64 = values.iter().map(|v| v.abs()).sum::<f64>() * weight;
    let lhs = measure.powf(1.0 / p - 1.0) * mass;
    let mut abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    let norm = Profile::from_abs(&mut abs, weight).quasinorm(LorentzParams::new(p, k)?);
    let k_conj_inv = 1.0 - 1.0 / k;
    Ok(InequalityCheck::new(
        lhs,
        (p / (p - 1.0)).powf(k_conj_inv) * norm,
        1e-9,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, sample, sample_excluding};

    fn indicator_unit() -> SampledFunction {
        let g = make_grid(1, 2.0, 64, false).unwrap();
        sample(&g, |x| if (0.0..1.0).contains(&x[0]) { 1.0 } else { 0.0 }).unwrap()
    }

    #[test]
    fn indicator_distribution_and_rearrangement() {
        let f = indicator_unit();
        let d = distribution_function(&f);
        assert_eq!(d.eval(0.0), 1.0);
        assert_eq!(d.eval(0.999), 1.0);
        assert_eq!(d.eval(1.0), 0.0);
        let r = decreasing_rearrangement(&f);
        assert_eq!(r.eval(0.5), 1.0);
        assert_eq!(r.eval(1.0), 0.0);
    }

    #[test]
    fn indicator_norm_is_one() {
        let f = indicator_unit();
        for p in [1.0, 1.5, 2.0, 4.0] {
            for d in [1.0, 2.0, p, f64::INFINITY] {
                let n = lorentz_quasinorm(&f, LorentzParams::new(p, d).unwrap());
                assert!((n - 1.0).abs() < 1e-12, "p={p} d={d} n={n}");
            }
        }
    }

    #[test]
    fn linear_profile() {
        let g = make_grid(1, 1.0, 2048, false)
            .unwrap()
            .with_lower(&[0.0])
            .unwrap();
        let f = sample(&g, |x| x[0]).unwrap();
        let d = distribution_function(&f);
        for s in [0.1, 0.7, 1.3, 1.9] {
            assert!((d.eval(s) - (2.0 - s)).abs() <= g.spacing() + 1e-12);
        }
    }

    fn inverse_sqrt() -> SampledFunction {
        let g = make_grid(1, 1.0, 4096, false).unwrap();
        sample_excluding(
            &g,
            |x| if x[0] > 0.0 { x[0].powf(-0.5) } else { 0.0 },
            |x| x[0] == 0.0,
        )
        .unwrap()
    }

    #[test]
    fn inverse_sqrt_distribution() {
        let f = inverse_sqrt();
        let h = f.grid().spacing();
        let d = distribution_function(&f);
        for s in [0.5f64, 1.5, 3.0, 10.0, 30.0] {
            let exact = (s.powi(-2)).min(1.0);
            assert!((d.eval(s) - exact).abs() <= 2.0 * h, "s={s}");
        }
    }

    #[test]
    fn inverse_sqrt_rearrangement() {
        let f = inverse_sqrt();
        let h = f.grid().spacing();
        let r = decreasing_rearrangement(&f);
        // Away from t = 0 the step error of a t^{-1/2} profile is below 2h^{1/2}.
        let start = h.powf(1.0 / 3.0);
        let mut t = start;
        while t < 1.0 - 2.0 * h {
            assert!((r.eval(t) - t.powf(-0.5)).abs() <= 2.0 * h.sqrt(), "t={t}");
            t += 0.013;
        }
        let weak = lorentz_quasinorm(&f, LorentzParams::weak(2.0).unwrap());
        assert!((weak - 1.0).abs() <= 3.0 * h.sqrt());
    }

    #[test]
    fn equimeasurable() {
        let g = make_grid(2, 1.0, 32, false).unwrap();
        let f = sample(&g, |x| (3.0 * x[0]).sin() * x[1]).unwrap();
        let r = decreasing_rearrangement(&f);
        assert!((r.integral() - f.abs().integral()).abs() < 1e-12);
    }

    #[test]
    fn routes_agree() {
        let g = make_grid(2, 1.0, 32, false).unwrap();
        let f = sample(&g, |x| {
            (-(x[0] * x[0] + 2.0 * x[1] * x[1])).exp() * (1.0 + x[0])
        })
        .unwrap();
        for p in [1.0, 1.5, 3.0] {
            for d in [1.0, 2.5, f64::INFINITY] {
                let par = LorentzParams::new(p, d).unwrap();
                let a = lorentz_quasinorm(&f, par);
                let b = lorentz_quasinorm_via_distribution(&f, par);
                assert!((a - b).abs() <= 1e-10 * a, "p={p} d={d}");
            }
        }
    }

    #[test]
    fn scaling() {
        // f(γx) on a grid with spacing h/γ has the same samples, so only the weight changes.
        let g = make_grid(1, 1.0, 256, false).unwrap();
        let f = sample(&g, |x| (-(4.0 * x[0] * x[0])).exp()).unwrap();
        for gamma in [0.5, 2.0] {
            let gs = make_grid(1, 1.0 / gamma, 256, false).unwrap();
            let fs = SampledFunction::new(gs, f.values().to_vec()).unwrap();
            for (p, d) in [(2.0, 2.0), (1.5, f64::INFINITY), (4.0, 1.0)] {
                let par = LorentzParams::new(p, d).unwrap();
                let ratio =
                    lorentz_quasinorm(&fs, par) * gamma.powf(1.0 / p) / lorentz_quasinorm(&f, par);
                assert!((ratio - 1.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn natural_norm_of_indicator() {
        let f = indicator_unit();
        for p in [1.5, 2.0, 4.0] {
            let weak = lorentz_norm_natural(&f, LorentzParams::weak(p).unwrap()).unwrap();
            assert!((weak - 1.0).abs() < 1e-12);
            for d in [1.0, 2.0, 3.0] {
                let n = lorentz_norm_natural(&f, LorentzParams::new(p, d).unwrap()).unwrap();
                let exact = (p / (p - 1.0)).powf(1.0 / d);
                assert!(
                    (n - exact).abs() < 1e-12 * exact,
                    "p={p} d={d}: {n} vs {exact}"
                );
            }
        }
        assert!(lorentz_norm_natural(&f, LorentzParams::new(1.0, 2.0).unwrap()).is_err());
        let zero = SampledFunction::zeros(f.grid());
        assert_eq!(
            lorentz_norm_natural(&zero, LorentzParams::new(2.0, 2.0).unwrap()).unwrap(),
            0.0
        );
    }

    #[test]
    fn natural_norm_matches_lp_for_two_steps() {
        // f* = 2 on [0,1), 1 on [1,2): check against a brute-force quadrature of f♮.
        let g = make_grid(1, 2.0, 4, false).unwrap();
        let f = SampledFunction::new(g, vec![2.0, 1.0, 0.0, 0.0]).unwrap();
        let (p, d) = (2.0, 3.0);
        let nat = lorentz_norm_natural(&f, LorentzParams::new(p, d).unwrap()).unwrap();
        let sharp = |t: f64| {
            if t < 1.0 {
                2.0
            } else if t < 2.0 {
                (2.0 + (t - 1.0)) / t
            } else {
                3.0 / t
            }
        };
        let n = 2_000_000;
        let (lo, hi) = (-12.0f64, 12.0f64);
        let du = (hi - lo) / n as f64;
        let brute: f64 = (0..n)
            .map(|i| {
                let t = (lo + (i as f64 + 0.5) * du).exp();
                (t.powf(1.0 / p) * sharp(t)).powf(d) * du
            })
            .sum::<f64>();
        let brute = (d / p * brute).powf(1.0 / d);
        assert!((nat - brute).abs() < 1e-6 * brute, "{nat} vs {brute}");
    }

    #[test]
    fn holder_indicator_example() {
        let f = indicator_unit();
        let e = HolderExponents {
            p1: 4.0,
            z1: 4.0,
            p2: 4.0,
            z2: 4.0,
            r: 2.0,
            s: 2.0,
        };
        let c = holder_check(&f, &f, e, NormKind::Rearrangement).unwrap();
        assert!((c.lhs - 1.0).abs() < 1e-12 && (c.rhs - 2.0).abs() < 1e-12 && c.pass);
        let c = holder_check(&f, &f, e, NormKind::Natural).unwrap();
        assert!(c.pass);
        let bad = HolderExponents {
            p1: 2.0,
            z1: f64::INFINITY,
            p2: 2.0,
            z2: f64::INFINITY,
            r: 1.0,
            s: f64::INFINITY,
        };
        assert!(holder_check(&f, &f, bad, NormKind::Natural).is_err());
    }

    #[test]
    fn embedding_on_indicator_is_tight_for_k_one() {
        let c = embedding_check(&[1.0; 10], 0.1, 2.0, 1.0).unwrap();
        assert!((c.lhs - c.rhs).abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_params() {
        assert!(LorentzParams::new(f64::INFINITY, 2.0).is_err());
        assert!(LorentzParams::new(0.5, 2.0).is_err());
        assert!(LorentzParams::new(f64::INFINITY, f64::INFINITY).is_ok());
    }

    #[test]
    fn extreme_magnitudes_are_homogeneous() {
        let f = indicator_unit();
        for c in [1e-90, 1e90] {
            let g = f.scaled(c);
            for kind in [NormKind::Rearrangement, NormKind::Natural] {
                let params = LorentzParams::new(1.5, 4.0).unwrap();
                let ratio = lorentz_norm(&g, params, kind).unwrap()
                    / lorentz_norm(&f, params, kind).unwrap();
                assert!((ratio / c - 1.0).abs() < 1e-12, "{c} {kind:?}");
            }
            let params = LorentzParams::new(2.0, 3.0).unwrap();
            assert!((lorentz_quasinorm_via_distribution(&g, params) / c - 1.0).abs() < 1e-12);
        }
    }
}
