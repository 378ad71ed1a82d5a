//! Subcommand bodies. Each returns the JSON summary and whether its assertion held.

use std::path::Path;

use serde_json::{json, Value};

use super::{
    read_field, write_field, CertificateMode, CorpusAction, CorpusArgs, LayerArgs, LayerOp,
    LorentzKind, MaximalArgs, MaximalKind, Model, NormArgs, Report, RieszArgs, RieszMethod,
    SharpnessArgs, SolveArgs, Space, Suite, VerifyArgs, ZeroMode,
};
use crate::bvp::{
    energy_scaling_exponent, oracle_bubble, oracle_linear, positivity_check, symmetry_check,
    BVProblem, BoundaryMap, Exponents, LayerModel, PicardOptions, Solver,
};
use crate::corpus;
use crate::error::{invalid, relation, Error, Result};
use crate::grid::{make_grid, sample, Cube, GridSpec, SampledFunction};
use crate::lorentz::{
    lorentz_norm, lorentz_norm_natural, lorentz_quasinorm, LorentzParams, NormKind,
};
use crate::maximal::{fractional_maximal, sharp_maximal};
use crate::morrey::{morrey_lorentz_norm, MorreyParams};
use crate::potential::{
    grad_n, neumann_layer_n, normal_derivative_n, riesz_potential, riesz_transform, single_layer_d,
    PotentialMethod, SpectralField, TransformMethod, ZeroModePolicy,
};
use crate::sharpness::{divergence_report, SharpnessConfig};

fn cube_json(q: &Cube, grid: &GridSpec) -> Value {
    json!({
        "lower": &q.lower()[..grid.dim()],
        "cells": q.cells(),
        "side": q.side(grid),
        "center": q.center(grid),
    })
}

fn argmax_json(f: &SampledFunction) -> Value {
    let (k, v) = f
        .values()
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (k, &v)| {
            if v > best.1 {
                (k, v)
            } else {
                best
            }
        });
    let g = f.grid();
    json!({ "node": &g.unflatten(k)[..g.dim()], "point": g.point(k), "value": v })
}

pub(super) fn norm(a: &NormArgs) -> Result<Report> {
    let (f, source) = a.input.load()?;
    let d = a.d.unwrap_or(a.p);
    let summary = match a.space {
        Space::Lorentz => {
            let params = LorentzParams::new(a.p, d)?;
            let kind = match a.kind {
                LorentzKind::Rearrangement => NormKind::Rearrangement,
                LorentzKind::Natural => NormKind::Natural,
            };
            json!({
                "command": "norm",
                "space": "lorentz",
                "params": { "p": a.p, "d": d, "kind": format!("{kind:?}").to_lowercase() },
                "input": source,
                "value": lorentz_norm(&f, params, kind)?,
            })
        }
        Space::Morrey | Space::WeakMorrey => {
            let lambda = a
                .lambda
                .ok_or_else(|| invalid("Morrey norms need --lambda"))?;
            let kappa = match a.space {
                Space::WeakMorrey => f64::INFINITY,
                _ => a.kappa.unwrap_or(a.p),
            };
            let params = MorreyParams::new(a.p, kappa, lambda)?;
            let cubes = a.family.family(f.grid())?;
            let n = morrey_lorentz_norm(&f, params, &cubes)?;
            json!({
                "command": "norm",
                "space": if a.space == Space::WeakMorrey { "weak-morrey" } else { "morrey" },
                "params": { "p": a.p, "kappa": kappa, "lambda": lambda },
                "input": source,
                "cubes": cubes.len(),
                "value": n.value,
                "argmax": n.argmax.map(|q| cube_json(&q, f.grid())),
            })
        }
    };
    Ok(Report {
        summary,
        pass: true,
    })
}

pub(super) fn maximal(a: &MaximalArgs) -> Result<Report> {
    let (f, source) = a.input.load()?;
    let cubes = a.family.family(f.grid())?;
    let result = match a.kind {
        MaximalKind::Fractional => fractional_maximal(&f, a.alpha, &cubes)?,
        MaximalKind::Sharp => sharp_maximal(&f, &cubes)?,
    };
    if let Some(path) = &a.output {
        write_field(path, &result.values)?;
    }
    let summary = json!({
        "command": "maximal",
        "kind": if a.kind == MaximalKind::Sharp { "sharp" } else { "fractional" },
        "alpha": a.alpha,
        "input": source,
        "cubes": cubes.len(),
        "max": result.max(),
        "argmax": argmax_json(&result.values),
    });
    Ok(Report {
        summary,
        pass: true,
    })
}

pub(super) fn riesz(a: &RieszArgs) -> Result<Report> {
    let (f, source) = a.input.load()?;
    let dim = f.grid().dim() as f64;
    let (u, mut summary) = match (a.transform, a.alpha) {
        (Some(j), None) => {
            let method = match a.method.unwrap_or(RieszMethod::Spectral) {
                RieszMethod::Spectral => TransformMethod::Spectral,
                RieszMethod::Pv => TransformMethod::PvQuadrature,
                other => {
                    return Err(invalid(format!(
                        "{other:?} is a potential method, not a transform method"
                    )))
                }
            };
            if j == 0 {
                return Err(invalid("transform components are numbered from 1"));
            }
            let u = riesz_transform(&f, j - 1, method)?;
            (
                u,
                json!({ "command": "riesz", "transform": j, "method": format!("{method:?}") }),
            )
        }
        (None, Some(alpha)) => {
            let method = match a.method.unwrap_or(RieszMethod::Quadrature) {
                RieszMethod::Quadrature => PotentialMethod::Quadrature,
                RieszMethod::HedbergSplit => PotentialMethod::HedbergSplit,
                other => {
                    return Err(invalid(format!(
                        "{other:?} is a transform method, not a potential method"
                    )))
                }
            };
            let u = riesz_potential(&f, alpha, method)?;
            (
                u,
                json!({ "command": "riesz", "alpha": alpha, "method": format!("{method:?}") }),
            )
        }
        _ => return Err(invalid("give exactly one of --alpha and --transform")),
    };
    summary["input"] = source;
    summary["max_abs"] = json!(u.max_abs());
    summary["integral"] = json!(u.integral());
    if let (Some(p), Some(lambda), Some(alpha)) = (a.p, a.lambda, a.alpha) {
        // Target exponents from δ/n = 1/λ − 1/μ and r/μ = p/λ.
        let inv_mu = 1.0 / lambda - alpha / dim;
        if !(inv_mu > 0.0) {
            return Err(relation(format!(
                "alpha/n < 1/lambda (got alpha = {alpha}, lambda = {lambda})"
            )));
        }
        let mu = 1.0 / inv_mu;
        let r = mu * p / lambda;
        let kappa = a.kappa.unwrap_or(p);
        let nu = a.nu.unwrap_or(f64::INFINITY);
        let cubes = a.family.family(f.grid())?;
        let source_norm =
            morrey_lorentz_norm(&f, MorreyParams::new(p, kappa, lambda)?, &cubes)?.value;
        let target_norm = morrey_lorentz_norm(&u, MorreyParams::new(r, nu, mu)?, &cubes)?.value;
        summary["bound"] = json!({
            "source": { "p": p, "kappa": kappa, "lambda": lambda, "norm": source_norm },
            "target": { "r": r, "nu": nu, "mu": mu, "norm": target_norm },
            "ratio": if source_norm > 0.0 { target_norm / source_norm } else { 0.0 },
        });
    }
    if let Some(path) = &a.output {
        write_field(path, &u)?;
    }
    Ok(Report {
        summary,
        pass: true,
    })
}

fn write_layers(
    path: &Path,
    grid: &GridSpec,
    heights: &[f64],
    fields: &[SpectralField],
) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Format(e.to_string()))?;
    let mut header = vec!["height".to_string()];
    header.extend((1..=grid.dim()).map(|a| format!("x{a}")));
    if fields.len() == 1 {
        header.push("value".into());
    } else {
        header.extend((1..=fields.len()).map(|c| format!("component{c}")));
    }
    w.write_record(&header)
        .map_err(|e| Error::Format(e.to_string()))?;
    for (j, t) in heights.iter().enumerate() {
        let layers: Vec<SampledFunction> =
            fields.iter().map(|f| f.layer(j)).collect::<Result<_>>()?;
        for k in 0..grid.len() {
            let mut row = vec![t.to_string()];
            row.extend(grid.point(k).iter().map(|x| x.to_string()));
            row.extend(layers.iter().map(|l| l.values()[k].to_string()));
            w.write_record(&row)
                .map_err(|e| Error::Format(e.to_string()))?;
        }
    }
    w.flush()?;
    Ok(())
}

pub(super) fn layer(a: &LayerArgs) -> Result<Report> {
    let (f, source) = a.input.load()?;
    let policy = match a.zero_mode {
        ZeroMode::Strict => ZeroModePolicy::StrictReject,
        ZeroMode::Drop => ZeroModePolicy::DropZeroMode,
    };
    let fields = match a.operator {
        LayerOp::D => vec![single_layer_d(&f, &a.heights)?],
        LayerOp::N => vec![neumann_layer_n(&f, &a.heights, policy)?],
        LayerOp::GradN => grad_n(&f, &a.heights, policy)?,
    };
    let per_height: Vec<Value> = a
        .heights
        .iter()
        .enumerate()
        .map(|(j, t)| {
            let max: Vec<f64> = fields
                .iter()
                .map(|fl| Ok(fl.layer(j)?.max_abs()))
                .collect::<Result<_>>()?;
            Ok(json!({ "height": t, "max_abs": max }))
        })
        .collect::<Result<_>>()?;
    let mut summary = json!({
        "command": "layer",
        "operator": format!("{:?}", a.operator).to_lowercase(),
        "input": source,
        "layers": per_height,
    });
    if a.operator != LayerOp::D {
        // Neumann data recovery: −∂_n N f at height 0 against f with the mean removed.
        let dn = normal_derivative_n(&f, &[0.0], policy)?.layer(0)?;
        let m = crate::potential::mean(&f);
        let defect = dn
            .values()
            .iter()
            .zip(f.values())
            .fold(0.0f64, |acc, (d, v)| acc.max((d + v - m).abs()));
        summary["neumann_recovery_defect"] = json!(defect);
    }
    if let Some(path) = &a.csv {
        write_layers(path, f.grid(), &a.heights, &fields)?;
    }
    Ok(Report {
        summary,
        pass: true,
    })
}

/// `c`, `bump:AMP[:WIDTH]`, `corpus:NAME[:SCALE]`, or a file path.
pub(super) fn parse_field(spec: &str, grid: &GridSpec) -> Result<SampledFunction> {
    if let Ok(c) = spec.trim().parse::<f64>() {
        return Ok(SampledFunction::constant(grid, c));
    }
    if let Some(rest) = spec.strip_prefix("bump:") {
        let mut parts = rest.split(':');
        let amp: f64 = parse_number(parts.next(), spec)?;
        let width: f64 = parts
            .next()
            .map_or(Ok(0.5), |s| parse_number(Some(s), spec))?;
        if !(width > 0.0) {
            return Err(invalid(format!("bump width must be positive in {spec:?}")));
        }
        return sample(grid, |x| {
            amp * (-x.iter().map(|v| v * v).sum::<f64>() / (width * width)).exp()
        });
    }
    if let Some(rest) = spec.strip_prefix("corpus:") {
        let (name, scale) = match rest.rsplit_once(':') {
            Some((n, s)) => (n, parse_number(Some(s), spec)?),
            None => (rest, 1.0),
        };
        return Ok(corpus::load(name, grid)?.scaled(scale));
    }
    let f = read_field(Path::new(spec))?;
    f.grid().check_same(grid)?;
    Ok(f)
}

fn parse_number(s: Option<&str>, spec: &str) -> Result<f64> {
    s.and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| invalid(format!("cannot read a number in field spec {spec:?}")))
}

fn calibration_probes(grid: &GridSpec, f: &SampledFunction) -> Result<Vec<SampledFunction>> {
    let r2 = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
    let mut probes = Vec::new();
    if f.max_abs() > 0.0 {
        probes.push(f.clone());
    }
    probes.push(sample(grid, |x| (-4.0 * r2(x)).exp())?);
    probes.push(sample(grid, |x| x[0] * (-4.0 * r2(x)).exp())?);
    probes.push(sample(grid, |x| {
        (-(x[0] - 0.5).powi(2) - 2.0 * r2(&x[1..])).exp()
    })?);
    Ok(probes)
}

pub(super) fn solve(a: &SolveArgs) -> Result<Report> {
    let n = a.dim + 1;
    let exponents = match a.mu {
        Some(mu) => Exponents::new(n, a.rho, mu)?,
        None => Exponents::centred(n, a.rho)?,
    };
    let (grid, model) = match a.model {
        Model::FreeSpace => (
            make_grid(a.dim, a.half_width, a.points, false)?,
            LayerModel::FreeSpace,
        ),
        Model::Periodic => (
            make_grid(a.dim, a.half_width, a.points, true)?,
            LayerModel::Periodic {
                policy: ZeroModePolicy::DropZeroMode,
                dealias: false,
            },
        ),
    };
    if !(a.tol > 0.0) {
        return Err(invalid(format!(
            "tolerance must be positive, got {}",
            a.tol
        )));
    }
    let problem = BVProblem::new(
        exponents,
        parse_field(&a.f, &grid)?,
        parse_field(&a.v, &grid)?,
        parse_field(&a.b, &grid)?,
    )?;
    let solver = Solver::new(&grid, exponents, model)?;
    let (calibration, certificate) = match a.certificate {
        CertificateMode::Auto => {
            let cal = solver.calibrate(&problem, &calibration_probes(&grid, &problem.f)?)?;
            let cert = cal
                .certificate(a.rho)
                .for_data(cal.data_size(&solver, &problem.f)?);
            (Some(cal), Some(cert))
        }
        CertificateMode::Off => (None, None),
    };
    let options = PicardOptions {
        max_iter: a.max_iter,
        tol: a.tol,
        keep_iterates: false,
        certificate,
    };
    let state = solver.solve(&problem, &options)?;
    if let Some(path) = &a.output {
        write_field(path, &state.trace)?;
    }
    if let Some(path) = &a.csv {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Format(e.to_string()))?;
        w.write_record(["step", "a_norm", "difference"])
            .map_err(|e| Error::Format(e.to_string()))?;
        for (k, an) in state.a_history.iter().enumerate() {
            let diff = if k == 0 {
                String::new()
            } else {
                state.diff_history[k - 1].to_string()
            };
            w.write_record([k.to_string(), an.total.to_string(), diff])
                .map_err(|e| Error::Format(e.to_string()))?;
        }
        w.flush()?;
    }
    let summary = json!({
        "command": "solve",
        "exponents": exponents,
        "model": format!("{:?}", a.model),
        "grid": { "dim": a.dim, "half_width": a.half_width, "points": a.points },
        "data": { "f": a.f, "V": a.v, "b": a.b },
        "calibration": calibration,
        "certificate": certificate,
        "certified": certificate.is_some_and(|c| c.valid()),
        "iterations": state.iterations,
        "converged": state.converged,
        "diff_history": state.diff_history,
        "theta_emp": state.theta_emp(),
        "defect": state.defect,
        "solution_norm": state.solution_norm(),
        "warnings": state.warnings,
    });
    Ok(Report {
        summary,
        pass: state.converged,
    })
}

pub(super) fn sharpness(a: &SharpnessArgs) -> Result<Report> {
    if a.depth == 0 {
        return Err(invalid("depth must be at least 1"));
    }
    let config = SharpnessConfig {
        r: a.r,
        mu: a.mu,
        p: a.p,
        lambda: a.lambda,
    };
    let report = divergence_report(config, a.n, 1..=a.depth, a.seed)?;
    if let Some(path) = &a.csv {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Format(e.to_string()))?;
        for row in &report.rows {
            w.serialize(row).map_err(|e| Error::Format(e.to_string()))?;
        }
        w.flush()?;
    }
    let pass = report.strictly_increasing;
    let mut summary = serde_json::to_value(&report).map_err(|e| Error::Format(e.to_string()))?;
    summary["command"] = json!("sharpness");
    summary["final_ratio"] = json!(report.rows.last().map(|r| r.ratio));
    Ok(Report { summary, pass })
}

struct Check {
    suite: &'static str,
    name: &'static str,
    value: f64,
    threshold: f64,
}

impl Check {
    fn pass(&self) -> bool {
        self.value.is_finite() && self.value <= self.threshold
    }
}

fn oracle_checks(out: &mut Vec<Check>) -> Result<()> {
    let bubble = oracle_bubble(3, 1.5, &[0.2, -0.4], 0.8)?;
    let linear = oracle_linear(1.3, -0.7, 3.0)?;
    let points: Vec<[f64; 3]> = (0..20)
        .map(|k| {
            let s = k as f64 * 0.37;
            [s.sin(), (1.3 * s).cos(), 0.1 + 0.15 * k as f64]
        })
        .collect();
    let worst = |g: &dyn Fn(&[f64; 3]) -> f64| points.iter().map(g).fold(0.0, f64::max);
    out.push(Check {
        suite: "oracles",
        name: "bubble interior residual",
        value: worst(&|x| bubble.interior_residual(x, 1e-3)),
        threshold: 1e-6,
    });
    out.push(Check {
        suite: "oracles",
        name: "bubble boundary residual",
        value: worst(&|x| bubble.boundary_residual(&x[..2], 1e-3)),
        threshold: 1e-6,
    });
    out.push(Check {
        suite: "oracles",
        name: "affine residual",
        value: worst(&|x| {
            linear
                .interior_residual(x, 1e-2)
                .max(linear.boundary_residual(&x[..2], 1e-2))
        }),
        threshold: 1e-8,
    });

    let grid = make_grid(2, 2.0, 16, false)?;
    let e = Exponents::new(3, 3.0, 2.1)?;
    let edge = grid.lower()[0] + 0.5 * grid.spacing();
    let cut = |f: &dyn Fn(&[f64]) -> f64| {
        sample(&grid, |x| {
            if x[0] < edge || x[1] < edge {
                0.0
            } else {
                f(x)
            }
        })
    };
    let bump = |x: &[f64]| (-4.0 * (x[0] * x[0] + x[1] * x[1])).exp();
    let problem = BVProblem::new(
        e,
        cut(&|x| 0.5 * bump(x))?,
        cut(&|x| 0.3 * bump(x))?,
        cut(&|x| 0.2 * bump(x))?,
    )?;
    let solver = Solver::new(&grid, e, LayerModel::FreeSpace)?;
    let options = PicardOptions {
        tol: 1e-9,
        ..Default::default()
    };
    let state = solver.solve(&problem, &options)?;
    out.push(Check {
        suite: "oracles",
        name: "quarter-turn symmetry defect",
        value: symmetry_check(&state.trace, BoundaryMap::QuarterTurn)?.symmetric,
        threshold: 5.0 * options.tol,
    });
    let pos = positivity_check(&solver, &problem, &state, options.tol)?;
    out.push(Check {
        suite: "oracles",
        name: "negative part of iterates",
        value: (-pos.min_iterate).max(0.0),
        threshold: 5.0 * options.tol,
    });
    let scaling = energy_scaling_exponent(
        &problem,
        2.0,
        &PicardOptions {
            keep_iterates: false,
            ..Default::default()
        },
    )?;
    out.push(Check {
        suite: "oracles",
        name: "critical energy ratio defect",
        value: (scaling.ratio - 1.0).abs(),
        threshold: 0.02,
    });
    Ok(())
}

fn layer_checks(out: &mut Vec<Check>) -> Result<()> {
    let grid = make_grid(2, 0.5, 32, true)?;
    let f = sample(&grid, |x| {
        (2.0 * std::f64::consts::PI * (x[0] + 2.0 * x[1])).cos()
            + 0.4 * (6.0 * std::f64::consts::PI * x[1]).sin()
    })?;
    let heights = [0.05, 0.3];
    let policy = ZeroModePolicy::StrictReject;
    let d = single_layer_d(&f, &heights)?;
    let dn = normal_derivative_n(&f, &heights, policy)?;
    let (mut normal, mut commute): (f64, f64) = (0.0, 0.0);
    for j in 0..heights.len() {
        let dl = d.layer(j)?;
        normal = normal.max(max_diff(&dn.layer(j)?, &dl, 1.0));
        for axis in 0..2 {
            let a = single_layer_d(
                &riesz_transform(&f, axis, TransformMethod::Spectral)?,
                &heights,
            )?
            .layer(j)?;
            let b = riesz_transform(&dl, axis, TransformMethod::Spectral)?;
            commute = commute.max(max_diff(&a, &b, -1.0));
        }
    }
    let recovery = max_diff(&normal_derivative_n(&f, &[0.0], policy)?.layer(0)?, &f, 1.0);
    out.push(Check {
        suite: "layer",
        name: "d_n N f + D f",
        value: normal,
        threshold: 1e-12,
    });
    out.push(Check {
        suite: "layer",
        name: "D S_j f - S_j D f",
        value: commute,
        threshold: 1e-12,
    });
    out.push(Check {
        suite: "layer",
        name: "Neumann data recovery",
        value: recovery,
        threshold: 1e-12,
    });
    Ok(())
}

fn max_diff(a: &SampledFunction, b: &SampledFunction, sign: f64) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .fold(0.0, |m, (x, y)| m.max((x + sign * y).abs()))
}

fn lorentz_checks(out: &mut Vec<Check>) -> Result<()> {
    let mut worst: f64 = 0.0;
    for (_, f) in corpus::load_all(&corpus::reference_grid())? {
        for p in [1.5, 2.0, 4.0] {
            for d in [1.0, 2.0, p, f64::INFINITY] {
                let params = LorentzParams::new(p, d)?;
                let star = lorentz_quasinorm(&f, params);
                let natural = lorentz_norm_natural(&f, params)?;
                worst = worst
                    .max(star / natural - 1.0)
                    .max(natural / (p / (p - 1.0) * star) - 1.0);
            }
        }
    }
    out.push(Check {
        suite: "lorentz",
        name: "rearrangement sandwich excess",
        value: worst.max(0.0),
        threshold: 1e-9,
    });
    Ok(())
}

fn riesz_checks(out: &mut Vec<Check>) -> Result<()> {
    let grid = make_grid(2, 2.0, 128, false)?;
    let f = sample(&grid, |x| f64::from(x[0] * x[0] + x[1] * x[1] < 1.0))?;
    let u = riesz_potential(&f, 1.0, PotentialMethod::Quadrature)?;
    let centre = grid
        .node_index(&[0.0, 0.0])
        .ok_or_else(|| invalid("origin is not a node"))?;
    out.push(Check {
        suite: "riesz",
        name: "I_1 of the unit disc at 0, relative error",
        value: (u.values()[centre] - 1.0).abs(),
        threshold: 0.01,
    });
    Ok(())
}

pub(super) fn verify(a: &VerifyArgs) -> Result<Report> {
    let mut checks = Vec::new();
    let all = a.suite == Suite::All;
    if all || a.suite == Suite::Oracles {
        oracle_checks(&mut checks)?;
    }
    if all || a.suite == Suite::Layer {
        layer_checks(&mut checks)?;
    }
    if all || a.suite == Suite::Lorentz {
        lorentz_checks(&mut checks)?;
    }
    if all || a.suite == Suite::Riesz {
        riesz_checks(&mut checks)?;
    }
    if all || a.suite == Suite::Corpus {
        let ok = corpus::verify_frozen(corpus::CORPUS_VERSION).is_ok();
        checks.push(Check {
            suite: "corpus",
            name: "frozen digests",
            value: f64::from(u8::from(!ok)),
            threshold: 0.0,
        });
    }
    for c in &checks {
        eprintln!(
            "{:<4} {:<8} {:<42} {:>10.3e} <= {:.1e}",
            if c.pass() { "PASS" } else { "FAIL" },
            c.suite,
            c.name,
            c.value,
            c.threshold
        );
    }
    if let Some(path) = &a.csv {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Format(e.to_string()))?;
        w.write_record(["suite", "check", "value", "threshold", "pass"])
            .map_err(|e| Error::Format(e.to_string()))?;
        for c in &checks {
            w.write_record([
                c.suite,
                c.name,
                &c.value.to_string(),
                &c.threshold.to_string(),
                &c.pass().to_string(),
            ])
            .map_err(|e| Error::Format(e.to_string()))?;
        }
        w.flush()?;
    }
    let pass = checks.iter().all(Check::pass);
    let rows: Vec<Value> = checks
        .iter()
        .map(|c| json!({ "suite": c.suite, "check": c.name, "value": c.value, "threshold": c.threshold, "pass": c.pass() }))
        .collect();
    Ok(Report {
        summary: json!({ "command": "verify", "suite": format!("{:?}", a.suite).to_lowercase(), "checks": rows, "pass": pass }),
        pass,
    })
}

pub(super) fn corpus(a: &CorpusArgs) -> Result<Report> {
    let summary = match &a.action {
        CorpusAction::List => json!({
            "command": "corpus list",
            "version": corpus::CORPUS_VERSION,
            "entries": corpus::listing()?,
        }),
        CorpusAction::Load {
            name,
            version,
            grid,
            output,
        } => {
            if *version != corpus::CORPUS_VERSION {
                return Err(Error::Corpus(format!(
                    "corpus version {version} requested, this build provides version {}",
                    corpus::CORPUS_VERSION
                )));
            }
            let e = corpus::entry(name)?;
            let f = e.sample(&grid.grid()?)?;
            if let Some(path) = output {
                write_field(path, &f)?;
            }
            json!({
                "command": "corpus load",
                "version": version,
                "name": e.name,
                "seed": e.seed,
                "shape": e.shape,
                "hash": e.hash()?,
                "points": f.grid().len(),
                "max_abs": f.max_abs(),
                "integral": f.integral(),
            })
        }
        CorpusAction::Verify { version } => {
            corpus::verify_frozen(*version)?;
            json!({ "command": "corpus verify", "version": version, "entries": corpus::entries().len(), "pass": true })
        }
    };
    Ok(Report {
        summary,
        pass: true,
    })
}
