//! Randomized nested cube families witnessing that `M_α` is unbounded from `M^λ_{pκ}` to
//! `M^μ_{rν}` when `r/μ > p/λ`.
//!
//! Stage `d` holds `2^{nd}` closed cubes `Q_{d,j}` of side `s^{N−d}`, `s = 2/(1−δ)`. Each
//! `Q_{d,j}` splits, per axis, into two child intervals of relative length `(1−δ)/2` and a gap
//! of relative length `δ`. The seed picks per axis whether the gap lies wholly between the
//! children or half between them and half at one end; the children never touch. The product of
//! the in-between intervals is the deleted middle `P_{d,j}`, a cube of side `δ s^{N−d}` when
//! the gap is not split.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, relation, Result};
use crate::grid::{Cube, CubeFamily, GridSpec, SampledFunction};
use crate::maximal::fractional_maximal;
use crate::morrey::weak_morrey_norm;

const MAX_DEPTH: usize = 6;
const MAX_NODES: usize = 1 << 22;

/// Root in `(0, 1)` of `(2/(1−δ))^{1/μ}(1−δ)^{1/r} = 1`, by bisection.
pub fn solve_delta(r: f64, mu: f64) -> Result<f64> {
    if !(r > 1.0 && r < mu && mu.is_finite()) {
        return Err(relation(format!(
            "1 < r < mu < inf (got r = {r}, mu = {mu})"
        )));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if key_residual(mid, r, mu) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `log[(2/(1−δ))^{1/μ}(1−δ)^{1/r}]`, decreasing in `δ`.
pub fn key_residual(delta: f64, r: f64, mu: f64) -> f64 {
    (2.0f64.ln() - (1.0 - delta).ln()) / mu + (1.0 - delta).ln() / r
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CantorCube {
    pub lower: Vec<f64>,
    pub side: f64,
    /// Index of the enclosing cube one stage up.
    pub parent: Option<usize>,
}

impl CantorCube {
    pub fn measure(&self) -> f64 {
        self.side.powi(self.lower.len() as i32)
    }

    pub fn contains_cube(&self, other: &CantorCube, slack: f64) -> bool {
        self.lower
            .iter()
            .zip(&other.lower)
            .all(|(a, b)| *b >= a - slack && b + other.side <= a + self.side + slack)
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        self.lower
            .iter()
            .zip(x)
            .all(|(a, v)| *v >= *a && *v <= a + self.side)
    }
}

/// Deleted box between the children of `Q_{d,parent}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Middle {
    pub lower: Vec<f64>,
    pub widths: Vec<f64>,
    pub parent: usize,
}

impl Middle {
    pub fn is_cube(&self) -> bool {
        self.widths
            .iter()
            .all(|w| (w - self.widths[0]).abs() <= 1e-12 * self.widths[0])
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CantorFamily {
    pub n: usize,
    pub depth: usize,
    pub delta: f64,
    pub seed: u64,
    /// `stages[d]` lists the cubes `Q_{d,j}`.
    pub stages: Vec<Vec<CantorCube>>,
    /// `middles[d]` lists the deleted middles `P_{d,j}`, one per `Q_{d,j}`, for `d < N`.
    pub middles: Vec<Vec<Middle>>,
}

pub fn build_cantor(n: usize, depth: usize, delta: f64, seed: u64) -> Result<CantorFamily> {
    if !(1..=2).contains(&n) {
        return Err(invalid(format!("dimension must be 1 or 2, got {n}")));
    }
    if depth > MAX_DEPTH {
        return Err(invalid(format!(
            "depth {depth} exceeds the limit {MAX_DEPTH}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    let ratio = 2.0 / (1.0 - delta);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let root = CantorCube {
        lower: vec![0.0; n],
        side: ratio.powi(depth as i32),
        parent: None,
    };
    let mut stages = vec![vec![root]];
    let mut middles = Vec::with_capacity(depth);
    for _ in 0..depth {
        let parents = stages.last().expect("root stage");
        let mut children = Vec::with_capacity(parents.len() << n);
        let mut holes = Vec::with_capacity(parents.len());
        for (pi, q) in parents.iter().enumerate() {
            let child = q.side / ratio;
            let gap = delta * q.side;
            // Per axis: offsets of the two child intervals and of the gap.
            let mut axes = Vec::with_capacity(n);
            for a in 0..n {
                let base = q.lower[a];
                let (pre, mid) = match rng.random_range(0..3u8) {
                    0 => (0.0, gap),
                    1 => (0.5 * gap, 0.5 * gap),
                    _ => (0.0, 0.5 * gap),
                };
                let first = base + pre;
                axes.push(([first, first + child + mid], (first + child, mid)));
            }
            holes.push(Middle {
                lower: axes.iter().map(|(_, hole)| hole.0).collect(),
                widths: axes.iter().map(|(_, hole)| hole.1).collect(),
                parent: pi,
            });
            for mask in 0..(1usize << n) {
                children.push(CantorCube {
                    lower: (0..n).map(|a| axes[a].0[(mask >> a) & 1]).collect(),
                    side: child,
                    parent: Some(pi),
                });
            }
        }
        middles.push(holes);
        stages.push(children);
    }
    Ok(CantorFamily {
        n,
        depth,
        delta,
        seed,
        stages,
        middles,
    })
}

impl CantorFamily {
    /// `s = 2/(1−δ)`.
    pub fn ratio(&self) -> f64 {
        2.0 / (1.0 - self.delta)
    }

    pub fn side(&self) -> f64 {
        self.stages[0][0].side
    }

    /// Largest deviation of `|E_d ∩ Q_{l,j}|/|Q_{l,j}|` from `(1−δ)^{n(d−l)}`, measured by
    /// geometric containment.
    pub fn measure_identity_defect(&self) -> f64 {
        let slack = 1e-9 * self.side();
        let mut worst: f64 = 0.0;
        for l in 0..=self.depth {
            for d in l..=self.depth {
                let expect = (1.0 - self.delta).powi((self.n * (d - l)) as i32);
                for q in &self.stages[l] {
                    let inside: f64 = self.stages[d]
                        .iter()
                        .filter(|c| q.contains_cube(c, slack))
                        .map(CantorCube::measure)
                        .sum();
                    worst = worst.max((inside / q.measure() - expect).abs());
                }
            }
        }
        worst
    }

    /// True when every `Q_{d+1,j}` lies in exactly one `Q_{d,i}`, namely its recorded parent.
    pub fn is_nested(&self) -> bool {
        let slack = 1e-9 * self.side();
        self.stages.windows(2).all(|pair| {
            pair[1].iter().all(|c| {
                let holders: Vec<usize> = pair[0]
                    .iter()
                    .enumerate()
                    .filter(|(_, q)| q.contains_cube(c, slack))
                    .map(|(i, _)| i)
                    .collect();
                holders.len() == 1 && Some(holders[0]) == c.parent
            })
        })
    }

    /// Grid with unit spacing on `[0, s^N]^n`; requires an integer ratio `s`.
    pub fn grid(&self) -> Result<GridSpec> {
        let s = self.ratio();
        if (s - s.round()).abs() > 1e-9 {
            return Err(invalid(format!(
                "side ratio {s} is not an integer, so the stages do not align with a unit grid"
            )));
        }
        let integral = |v: &f64| (v - v.round()).abs() <= 1e-9;
        let aligned = self
            .stages
            .iter()
            .flatten()
            .all(|q| q.lower.iter().all(integral))
            && self
                .middles
                .iter()
                .flatten()
                .all(|p| p.lower.iter().chain(&p.widths).all(integral));
        if !aligned {
            return Err(invalid("split gaps fall between grid nodes"));
        }
        let m = (s.round() as usize).pow(self.depth as u32);
        if m.pow(self.n as u32) > MAX_NODES {
            return Err(invalid(format!(
                "{m}^{} nodes exceed the grid limit",
                self.n
            )));
        }
        GridSpec::new(self.n, 0.5 * m as f64, m, false)?.with_lower(&vec![0.0; self.n])
    }

    fn grid_cube(&self, q: &CantorCube) -> Cube {
        let lower: Vec<usize> = q.lower.iter().map(|v| v.round() as usize).collect();
        Cube::new(&lower, q.side.round() as usize)
    }

    /// Indicator of `E_N`, sampled at cell centres.
    pub fn indicator(&self, grid: &GridSpec) -> Result<SampledFunction> {
        let mut values = vec![0.0; grid.len()];
        for q in &self.stages[self.depth] {
            self.grid_cube(q).for_each_node(grid, |k| values[k] = 1.0);
        }
        SampledFunction::new(grid.clone(), values)
    }

    /// Sets `value` on the nodes whose cells lie in `middle`.
    fn fill_middle(&self, grid: &GridSpec, middle: &Middle, value: f64, values: &mut [f64]) {
        let ranges: Vec<(usize, usize)> = (0..self.n)
            .map(|a| {
                let lo = middle.lower[a].round() as usize;
                (lo, lo + middle.widths[a].round() as usize)
            })
            .collect();
        let mut idx = [0usize; 3];
        let mut visit = |idx: &[usize]| values[grid.flatten(&idx[..self.n])] = value;
        if self.n == 1 {
            for i in ranges[0].0..ranges[0].1 {
                visit(&[i]);
            }
        } else {
            for i in ranges[0].0..ranges[0].1 {
                for j in ranges[1].0..ranges[1].1 {
                    idx[0] = i;
                    idx[1] = j;
                    visit(&idx);
                }
            }
        }
    }

    /// Single-cell-resolving dyadic family on [`Self::grid`] together with every `Q_{l,j}`.
    pub fn cube_family(&self, grid: &GridSpec) -> Result<CubeFamily> {
        let mut family = CubeFamily::point_scale(grid, 2)?;
        let own: Vec<Cube> = self
            .stages
            .iter()
            .flatten()
            .map(|q| self.grid_cube(q))
            .collect();
        family.extend(&CubeFamily::from_cubes(grid, own)?)?;
        Ok(family)
    }
}

/// `[s^{1/λ}(1−δ)^{1/p}]^{n(N−l)}` maximized over `l ≤ N`; the `l = N` term is `1`.
pub fn indicator_norm(family: &CantorFamily, p: f64, lambda: f64) -> f64 {
    let factor = family.ratio().powf(1.0 / lambda) * (1.0 - family.delta).powf(1.0 / p);
    (0..=family.depth)
        .map(|l| factor.powi((family.n * (family.depth - l)) as i32))
        .fold(0.0, f64::max)
}

/// `‖g‖_{M^λ_{p∞}}` on the grid for `g = |Q_{N,j}|^{−1/λ}χ_{E_N}`.
pub fn indicator_norm_on_grid(family: &CantorFamily, p: f64, lambda: f64) -> Result<f64> {
    let grid = family.grid()?;
    let scale = family.stages[family.depth][0].measure().powf(-1.0 / lambda);
    let g = family.indicator(&grid)?.scaled(scale);
    Ok(weak_morrey_norm(&g, p, lambda, &family.cube_family(&grid)?)?.value)
}

/// `1 + B 2^{nN}(1 − (1−δ)^{n(N−1)})`, `B = δ^{n/μ}(1−δ)ⁿ/(1−(1−δ)ⁿ)`.
pub fn closed_form_bound(n: usize, delta: f64, mu: f64, depth: usize) -> f64 {
    let nf = n as f64;
    let t = (1.0 - delta).powi(n as i32);
    let b = delta.powf(nf / mu) * t / (1.0 - t);
    if depth == 0 {
        return 1.0;
    }
    1.0 + b * 2f64.powi((n * depth) as i32) * (1.0 - t.powi(depth as i32 - 1))
}

#[derive(Clone, Debug)]
pub struct MaximalLowerBound {
    /// `χ_{E_N} + Σ_l [s^{1/μ}(1−δ)]^{n(N−l)} χ_{F_l}`.
    pub minorant: SampledFunction,
    pub maximal: SampledFunction,
    /// `min (M_α χ_{E_N} − minorant)` over the grid.
    pub domination_margin: f64,
    pub closed_form: f64,
}

/// Minorant of `M_α χ_{E_N}` on the family grid, checked against the computed maximal
/// function. Needs `α/n ≥ 1/μ`, which makes `|Q_{l,j}|^{α/n}` dominate `s^{n(N−l)/μ}`.
pub fn maximal_lower_bound(
    family: &CantorFamily,
    alpha: f64,
    mu: f64,
) -> Result<MaximalLowerBound> {
    let nf = family.n as f64;
    if !(alpha / nf >= 1.0 / mu - 1e-12 && alpha < nf) {
        return Err(relation(format!(
            "1/mu <= alpha/n < 1 (got alpha = {alpha}, n = {}, mu = {mu})",
            family.n
        )));
    }
    let grid = family.grid()?;
    let level = family.ratio().powf(1.0 / mu) * (1.0 - family.delta);
    let indicator = family.indicator(&grid)?;
    let mut values = indicator.values().to_vec();
    for (l, holes) in family.middles.iter().enumerate() {
        let value = level.powi((family.n * (family.depth - l)) as i32);
        for middle in holes {
            family.fill_middle(&grid, middle, value, &mut values);
        }
    }
    let minorant = SampledFunction::new(grid.clone(), values)?;
    let maximal = fractional_maximal(&indicator, alpha, &family.cube_family(&grid)?)?.values;
    let domination_margin = maximal
        .values()
        .iter()
        .zip(minorant.values())
        .map(|(m, u)| m - u)
        .fold(f64::INFINITY, f64::min);
    Ok(MaximalLowerBound {
        minorant,
        maximal,
        domination_margin,
        closed_form: closed_form_bound(family.n, family.delta, mu, family.depth),
    })
}

/// Exponents `(r, μ, p, λ)` of the target and source weak Morrey spaces.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SharpnessConfig {
    pub r: f64,
    pub mu: f64,
    pub p: f64,
    pub lambda: f64,
}

impl SharpnessConfig {
    /// Midpoint of `1/μ < α/n < 1/λ`, or `n/μ` when that window is empty.
    pub fn alpha(&self, n: usize) -> (f64, bool) {
        let nf = n as f64;
        if 1.0 / self.mu < 1.0 / self.lambda {
            (0.5 * nf * (1.0 / self.mu + 1.0 / self.lambda), false)
        } else {
            (nf / self.mu, true)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DivergenceRow {
    pub depth: usize,
    pub norm_analytic: f64,
    pub norm_grid: f64,
    pub maximal_norm: f64,
    pub closed_form: f64,
    pub ratio: f64,
    pub minorant_dominated: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DivergenceReport {
    pub config: SharpnessConfig,
    pub n: usize,
    pub delta: f64,
    pub alpha: f64,
    /// Set when `1/μ < α/n < 1/λ` is empty and `α = n/μ` was used instead.
    pub alpha_window_empty: bool,
    pub rows: Vec<DivergenceRow>,
    pub strictly_increasing: bool,
}

/// Measured `‖M_α g_N‖_{M^μ_{r∞}}/‖g_N‖_{M^λ_{p∞}}` per depth. Rejects `r/μ ≤ p/λ`, where the
/// operator is bounded.
pub fn divergence_report(
    config: SharpnessConfig,
    n: usize,
    depths: impl IntoIterator<Item = usize>,
    seed: u64,
) -> Result<DivergenceReport> {
    if !(config.r / config.mu > config.p / config.lambda) {
        return Err(relation(format!(
            "r/mu > p/lambda is required; r/mu = {} <= p/lambda = {} is the bounded regime",
            config.r / config.mu,
            config.p / config.lambda
        )));
    }
    measure_ratios(config, n, depths, seed)
}

/// The table of [`divergence_report`] without the regime check.
pub fn measure_ratios(
    config: SharpnessConfig,
    n: usize,
    depths: impl IntoIterator<Item = usize>,
    seed: u64,
) -> Result<DivergenceReport> {
    let delta = solve_delta(config.r, config.mu)?;
    let (alpha, alpha_window_empty) = config.alpha(n);
    let mut rows = Vec::new();
    for depth in depths {
        let family = build_cantor(n, depth, delta, seed.wrapping_add(depth as u64))?;
        let grid = family.grid()?;
        let cubes = family.cube_family(&grid)?;
        let g = family.indicator(&grid)?;
        let norm_grid = weak_morrey_norm(&g, config.p, config.lambda, &cubes)?.value;
        let bound = maximal_lower_bound(&family, alpha, config.mu)?;
        let maximal_norm = weak_morrey_norm(&bound.maximal, config.r, config.mu, &cubes)?.value;
        rows.push(DivergenceRow {
            depth,
            norm_analytic: indicator_norm(&family, config.p, config.lambda),
            norm_grid,
            maximal_norm,
            closed_form: bound.closed_form,
            ratio: maximal_norm / norm_grid,
            minorant_dominated: bound.domination_margin >= -1e-12,
        });
    }
    let strictly_increasing = rows.windows(2).all(|w| w[1].ratio > w[0].ratio);
    Ok(DivergenceReport {
        config,
        n,
        delta,
        alpha,
        alpha_window_empty,
        rows,
        strictly_increasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_roots() {
        assert!((solve_delta(2.0, 4.0).unwrap() - 0.5).abs() < 1e-12);
        assert!((solve_delta(2.0, 3.0).unwrap() - 0.75).abs() < 1e-12);
        let d = solve_delta(1.7, 5.3).unwrap();
        assert!(key_residual(d, 1.7, 5.3).abs() < 1e-10);
        // Closed form 1 − δ = 2^{−r/(μ−r)}.
        assert!((1.0 - d - 2f64.powf(-1.7 / 3.6)).abs() < 1e-12);
        assert!(solve_delta(4.0, 4.0).is_err());
    }

    #[test]
    fn family_counts_and_measures() {
        let f = build_cantor(2, 3, 0.5, 7).unwrap();
        assert_eq!(f.stages[3].len(), 64);
        assert!((f.side() - 64.0).abs() < 1e-12);
        assert!((f.stages[3][0].side - 1.0).abs() < 1e-12);
        assert!(f.measure_identity_defect() < 1e-12);
        assert!(f.is_nested());
        let e3: f64 = f.stages[3].iter().map(CantorCube::measure).sum();
        assert!((e3 / 64f64.powi(2) - 1.0 / 64.0).abs() < 1e-15);
        let other = build_cantor(2, 3, 0.5, 8).unwrap();
        assert_eq!(other.stages[3].len(), 64);
        assert_ne!(f.stages[3], other.stages[3]);
        assert!(build_cantor(3, 2, 0.5, 0).is_err());
        assert!(build_cantor(2, 7, 0.5, 0).is_err());
    }

    #[test]
    fn indicator_norms_agree() {
        let f = build_cantor(2, 3, 0.5, 1).unwrap();
        let analytic = indicator_norm(&f, 2.0, 8.0);
        assert!((analytic - 1.0).abs() < 1e-15);
        let grid = indicator_norm_on_grid(&f, 2.0, 8.0).unwrap();
        assert!((grid / analytic - 1.0).abs() < 0.02, "{grid}");
        // Small δ with the same exponents: the per-level factor exceeds one.
        let small = build_cantor(2, 3, 0.05, 1).unwrap();
        assert!(indicator_norm(&small, 2.0, 8.0) > 1.0);
    }

    #[test]
    fn minorant_is_dominated() {
        let delta = solve_delta(2.0, 4.0).unwrap();
        let f = build_cantor(2, 3, delta, 3).unwrap();
        let cfg = SharpnessConfig {
            r: 2.0,
            mu: 4.0,
            p: 1.2,
            lambda: 3.0,
        };
        let (alpha, empty) = cfg.alpha(2);
        assert!(!empty);
        let b = maximal_lower_bound(&f, alpha, 4.0).unwrap();
        assert!(b.domination_margin >= -1e-12, "{}", b.domination_margin);
        assert!(maximal_lower_bound(&f, 0.2, 4.0).is_err());
    }

    #[test]
    fn closed_form_values() {
        assert!((closed_form_bound(2, 0.5, 4.0, 4) - 60.40).abs() < 0.01);
        assert_eq!(closed_form_bound(2, 0.5, 4.0, 1), 1.0);
    }

    #[test]
    fn bounded_regime_is_rejected() {
        let cfg = SharpnessConfig {
            r: 2.0,
            mu: 4.0,
            p: 4.0,
            lambda: 8.0,
        };
        assert!(divergence_report(cfg, 2, 1..=2, 0).is_err());
    }
}
