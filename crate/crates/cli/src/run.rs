//! Mode dispatch and report assembly.

use std::time::Instant;

use dbar_core::expr::Expr;
use dbar_core::forms::{EvalPoint, OneForm};
use dbar_core::kernel::{
    decompose_inverse_product, exponent_choice, exponents_integrable, hm_bound, integrability_exponents,
    kernel_expr, kernel_g_derivative, IndexSet,
};
use dbar_core::operator_t::{residual_dbar, SolveOptions, SolveReport};
use dbar_core::quadrature::QuadratureSuite;
use dbar_core::verification::{
    approach_points, convergence_study, default_catalog, distance_sequence, lemma_bound_area, lemma_bound_boundary,
    monotone_bounded, pointwise, solve, stokes_catalog, stokes_check_with, supnorm_study, Operator, MONOTONE_FACTOR,
};
use dbar_core::{Error, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{mode_name, Mode, RunConfig};
use crate::output::{Cell, Table};

/// Result of one run before it is written out.
pub struct Outcome {
    pub result: Value,
    pub table: Table,
    /// `None` outside the checking modes.
    pub passed: Option<bool>,
}

#[derive(Serialize)]
pub struct Report<'a> {
    pub mode: &'static str,
    pub config: &'a RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub passed: Option<bool>,
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_seconds: Option<f64>,
}

pub fn run(config: &RunConfig) -> Result<(Outcome, Option<f64>), Error> {
    let start = Instant::now();
    let outcome = match config.mode()? {
        Mode::Identities => identities(config),
        Mode::Exponents => exponents(config),
        Mode::Solve => solve_mode(config, false),
        Mode::Verify => solve_mode(config, true),
        Mode::Bounds => bounds(config),
        Mode::Stokes => stokes(config),
        Mode::Supnorm => supnorm(config),
        Mode::Convergence => convergence(config),
    }?;
    let elapsed = config.record_timing.then(|| start.elapsed().as_secs_f64());
    Ok((outcome, elapsed))
}

pub fn report<'a>(config: &'a RunConfig, outcome: &Outcome, elapsed: Option<f64>) -> Result<Report<'a>, Error> {
    Ok(Report {
        mode: mode_name(config.mode()?),
        config,
        passed: outcome.passed,
        result: outcome.result.clone(),
        elapsed_seconds: elapsed,
    })
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn opts(config: &RunConfig) -> SolveOptions {
    SolveOptions {
        allow_large: config.allow_large,
        record_timing: config.record_timing,
    }
}

fn operator_name(op: Operator) -> &'static str {
    match op {
        Operator::T => "t",
        Operator::TTilde => "ttilde",
    }
}

fn rng(config: &RunConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(config.seed.unwrap_or(0))
}

fn random_unit(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> C64 {
    C64::from_polar(rng.random_range(lo..hi), rng.random_range(0.0..std::f64::consts::TAU))
}

fn identities(config: &RunConfig) -> Result<Outcome, Error> {
    let n = config.n.unwrap_or(4);
    if !(1..=8).contains(&n) {
        return Err(Error::Validation(format!("identities need 1 <= n <= 8, got {n}")));
    }
    let samples = config.samples.unwrap_or(1000).max(1);
    let tol = config.tolerances.identity.unwrap_or(1e-9);
    let mut rng = rng(config);

    let mut decomposition: f64 = 0.0;
    for _ in 0..samples {
        let m = rng.random_range(1..=n);
        let a: Vec<C64> = (0..m).map(|_| random_unit(&mut rng, 0.1, 10.0)).collect();
        let sum: C64 = decompose_inverse_product(&a)?.iter().sum();
        let exact = a.iter().product::<C64>().inv();
        decomposition = decomposition.max((sum - exact).norm() / exact.norm());
    }

    let set = IndexSet::new((0..n).collect())?;
    let mut derivative: f64 = 0.0;
    let mut cases = 0usize;
    let per_case = samples.div_ceil(n << n).clamp(1, 20);
    for k in 0..n {
        for mask in 0u32..(1 << n) {
            if mask & (1 << k) != 0 {
                continue;
            }
            let j: Vec<usize> = (0..n).filter(|v| mask & (1 << v) != 0).collect();
            for _ in 0..per_case {
                let z: Vec<C64> = (0..n).map(|_| random_unit(&mut rng, 0.0, 1.0)).collect();
                let zeta: Vec<C64> = z.iter().map(|w| w + random_unit(&mut rng, 0.1, 1.0)).collect();
                let oracle = kernel_expr(&z, &set, k)?.d_bar_stack(&j).eval(&zeta)?;
                let got = kernel_g_derivative(&zeta, &z, &set, k, &j)?;
                derivative = derivative.max((got - oracle).norm() / oracle.norm());
                cases += 1;
            }
        }
    }

    let mut bound: f64 = 0.0;
    if n >= 2 {
        for m in 0..n {
            let choice = exponent_choice(n, m)?;
            let j: Vec<usize> = (0..m).collect();
            let fact: f64 = (1..=m).map(|x| x as f64).product();
            for _ in 0..samples {
                let z: Vec<C64> = (0..n).map(|_| random_unit(&mut rng, 0.0, 1.0)).collect();
                let zeta: Vec<C64> = z.iter().map(|w| w + random_unit(&mut rng, 0.01, 3.0)).collect();
                let lhs = kernel_g_derivative(&zeta, &z, &set, n - 1, &j)?.norm();
                bound = bound.max(lhs / (fact * hm_bound(&zeta, &z, m, &choice)?));
            }
        }
    }

    let rows = [
        ("decomposition", samples, decomposition, tol),
        ("kernel_derivative", cases, derivative, tol),
        ("derivative_bound", if n >= 2 { samples * n } else { 0 }, bound, 1.0),
    ];
    let passed = rows.iter().all(|(_, _, v, t)| v.is_finite() && v <= t);
    let mut table = Table::new(&["check", "cases", "max_value", "tolerance", "pass"]);
    let mut result = Vec::new();
    for (name, cases, v, t) in rows {
        table.push(vec![Cell::text(name), Cell::int(cases), Cell::real(v), Cell::real(t), Cell::bool(v <= t)]);
        result.push(json!({"check": name, "cases": cases, "max_value": v, "tolerance": t, "pass": v <= t}));
    }
    Ok(Outcome {
        result: json!({"n": n, "checks": result}),
        table,
        passed: Some(passed),
    })
}

fn exponents(config: &RunConfig) -> Result<Outcome, Error> {
    let n = config
        .n
        .or_else(|| (!config.domains.is_empty()).then_some(config.domains.len()))
        .ok_or_else(|| Error::Validation("n is required in exponents mode".into()))?;
    let mut table = Table::new(&["m", "k", "parts", "satisfies_system", "exponents", "integrable"]);
    let mut rows = Vec::new();
    for m in 0..n {
        let choice = exponent_choice(n, m)?;
        let parts = format!(
            "({})",
            choice.parts.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
        );
        let exps = integrability_exponents(&choice);
        let exps_text = exps.iter().map(|(_, a)| a.to_string()).collect::<Vec<_>>().join(";");
        let ok = choice.satisfies_system();
        let integrable = exponents_integrable(&choice);
        table.push(vec![
            Cell::int(m),
            Cell::int(choice.k as usize),
            Cell::text(&parts),
            Cell::bool(ok),
            Cell::text(&exps_text),
            Cell::bool(integrable),
        ]);
        rows.push(json!({
            "m": m,
            "k": choice.k,
            "parts": choice.parts,
            "satisfies_system": ok,
            "exponents": exps.iter().map(|(role, a)| json!({"role": role, "alpha": a.to_string()})).collect::<Vec<_>>(),
            "integrable": integrable,
        }));
    }
    Ok(Outcome {
        result: json!({"n": n, "rows": rows}),
        table,
        passed: None,
    })
}

fn max_error(values: &[C64], u: &Expr, points: &[EvalPoint]) -> Result<f64, Error> {
    let mut worst: f64 = 0.0;
    for (v, p) in values.iter().zip(points) {
        worst = worst.max((v - u.eval(p)?).norm());
    }
    Ok(worst)
}

fn solve_mode(config: &RunConfig, verify: bool) -> Result<Outcome, Error> {
    let omega = config.omega()?;
    let n = omega.arity();
    let (f, u) = config.form(n)?;
    let suite = config.suite(&omega)?;
    let points = config.points(&omega)?;
    let ops = config.operator.operators();
    let opts = opts(config);
    let want_residual = verify || config.fd_step.is_some();
    let h = config.fd_step()?;

    let mut reports: Vec<SolveReport> = Vec::new();
    let mut checks = Vec::new();
    let mut passed = true;
    let tol = &config.tolerances;
    let mut check = |name: String, value: f64, limit: Option<f64>| {
        let ok = limit.is_none_or(|t| value <= t);
        passed &= ok;
        checks.push(json!({"check": name, "value": value, "tolerance": limit, "pass": ok}));
    };
    for &op in &ops {
        let report = solve(op, &f, &points, &suite, opts)?;
        if let Some(u) = &u {
            let e = max_error(&report.values(), u, &points)?;
            check(format!("{}_error", operator_name(op)), e, tol.error.or(verify.then_some(1e-4)));
        }
        if want_residual {
            let solver = pointwise(op, &f, &suite, opts)?;
            let r = residual_dbar(&f, &*solver, &omega, &points, h)?;
            check(format!("{}_residual", operator_name(op)), r, tol.residual.or(verify.then_some(1e-3)));
        }
        reports.push(report);
    }
    if reports.len() == 2 {
        let gap = reports[0]
            .values()
            .iter()
            .zip(reports[1].values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        check("agreement".into(), gap, tol.agreement.or(verify.then_some(1e-3)));
    }

    let mut table = Table::new(&["operator", "point", "set", "sign", "re", "im"]);
    for r in &reports {
        for (i, p) in r.points.iter().enumerate() {
            table.push(vec![
                Cell::text(&r.operator),
                Cell::int(i),
                Cell::text("value"),
                Cell::int(1),
                Cell::real(p.value.re),
                Cell::real(p.value.im),
            ]);
            for t in &p.terms {
                table.push(vec![
                    Cell::text(&r.operator),
                    Cell::int(i),
                    Cell::text(&t.set),
                    Cell::signed(t.sign.into()),
                    Cell::real(t.value.re),
                    Cell::real(t.value.im),
                ]);
            }
        }
    }
    let any_finite_fail = reports
        .iter()
        .flat_map(|r| r.values())
        .any(|v| !(v.re.is_finite() && v.im.is_finite()));
    if any_finite_fail {
        return Err(Error::Numerical("non-finite solution value".into()));
    }
    Ok(Outcome {
        result: json!({"reports": to_value(&reports), "checks": checks}),
        table,
        passed: verify.then_some(passed),
    })
}

fn bounds(config: &RunConfig) -> Result<Outcome, Error> {
    let omega = config.omega()?;
    let probes = config.probes.clone().unwrap_or_default();
    let growth = config.tolerances.growth.unwrap_or(MONOTONE_FACTOR);
    let distances = distance_sequence(probes.distances[0], probes.distances[1], probes.count);
    let mut table = Table::new(&["factor", "kind", "alpha", "distance", "value"]);
    let mut series = Vec::new();
    let mut passed = true;
    for (j, d) in omega.factors().iter().enumerate() {
        let z = approach_points(d, probes.theta, &distances);
        let mut record = |kind: &str, alpha: f64, values: Vec<f64>| {
            let ok = monotone_bounded(&values, growth);
            passed &= ok;
            for (dist, v) in distances.iter().zip(&values) {
                table.push(vec![Cell::int(j + 1), Cell::text(kind), Cell::real(alpha), Cell::real(*dist), Cell::real(*v)]);
            }
            series.push(json!({
                "factor": j + 1, "kind": kind, "alpha": alpha, "distances": distances, "values": values,
                "monotone_bounded": ok,
            }));
        };
        for &alpha in &probes.solid_alpha {
            record("solid", alpha, lemma_bound_area(d, alpha, &z)?);
        }
        for &alpha in &probes.boundary_alpha {
            record("boundary", alpha, lemma_bound_boundary(d, alpha, &z, probes.boundary_nodes)?);
        }
    }
    Ok(Outcome {
        result: json!({"growth_factor": growth, "series": series}),
        table,
        passed: Some(passed),
    })
}

fn stokes(config: &RunConfig) -> Result<Outcome, Error> {
    let tol = config.tolerances.identity.unwrap_or(1e-6);
    let cases: Vec<(String, dbar_core::forms::ProductDomain, QuadratureSuite, Expr, Expr)> = match &config.stokes {
        Some(pair) => {
            let omega = config.omega()?;
            let n = omega.arity();
            let suite = config.suite(&omega)?;
            let f = dbar_core::expr::parse(&pair.f, n)?;
            let g = dbar_core::expr::parse(&pair.g, n)?;
            vec![(format!("{} / {}", pair.f, pair.g), omega, suite, f, g)]
        }
        None => stokes_catalog()?
            .into_iter()
            .map(|c| {
                let suite = QuadratureSuite::uniform(c.omega.clone(), c.sizes)?;
                Ok((c.name, c.omega, suite, c.f, c.g))
            })
            .collect::<Result<_, Error>>()?,
    };
    let mut table = Table::new(&["case", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "diff", "pass"]);
    let mut rows = Vec::new();
    let mut passed = true;
    let o = opts(config);
    for (name, omega, suite, f, g) in &cases {
        let r = stokes_check_with(f, g, omega, suite, o)?;
        let ok = r.diff <= tol * (1.0 + r.lhs.norm());
        passed &= ok;
        table.push(vec![
            Cell::text(name),
            Cell::real(r.lhs.re),
            Cell::real(r.lhs.im),
            Cell::real(r.rhs.re),
            Cell::real(r.rhs.im),
            Cell::real(r.diff),
            Cell::bool(ok),
        ]);
        rows.push(json!({"case": name, "result": to_value(&r), "pass": ok}));
    }
    Ok(Outcome {
        result: json!({"tolerance": tol, "cases": rows}),
        table,
        passed: Some(passed),
    })
}

fn supnorm(config: &RunConfig) -> Result<Outcome, Error> {
    let omega = config.omega()?;
    let n = omega.arity();
    let catalog: Vec<(String, OneForm)> = match &config.catalog {
        Some(list) => list
            .iter()
            .map(|cs| {
                let refs: Vec<&str> = cs.iter().map(String::as_str).collect();
                if refs.len() != n {
                    return Err(Error::Validation(format!("catalog form has {} components, arity is {n}", refs.len())));
                }
                Ok((cs.join(" | "), OneForm::parse(&refs)?))
            })
            .collect::<Result<_, Error>>()?,
        None if n == 2 => default_catalog()?,
        None => return Err(Error::Validation("the built-in catalog is for two factors".into())),
    };
    let suite = config.suite(&omega)?;
    let points = config.points(&omega)?;
    let mut table = Table::new(&["operator", "form", "norm_f", "norm_tf", "ratio"]);
    let mut tables = Vec::new();
    let mut passed = true;
    for op in config.operator.operators() {
        let t = supnorm_study(&catalog, op, &suite, &points, opts(config))?;
        passed &= t.max_ratio.is_none_or(f64::is_finite);
        for row in &t.rows {
            table.push(vec![
                Cell::text(operator_name(op)),
                Cell::text(&row.label),
                Cell::real(row.norm_f),
                Cell::real(row.norm_tf),
                row.ratio.map_or(Cell::text(""), Cell::real),
            ]);
        }
        tables.push(to_value(&t));
    }
    Ok(Outcome {
        result: json!({"tables": tables}),
        table,
        passed: Some(passed),
    })
}

fn convergence(config: &RunConfig) -> Result<Outcome, Error> {
    let omega = config.omega()?;
    let n = omega.arity();
    let p = config
        .potential
        .as_ref()
        .ok_or_else(|| Error::Validation("potential is required in convergence mode".into()))?;
    let u = dbar_core::expr::parse(p, n)?;
    let suites: Vec<QuadratureSuite> = if config.suites.is_empty() {
        let base = config.suite(&omega)?;
        vec![base.clone(), base.doubled()?]
    } else {
        config
            .suites
            .iter()
            .map(|q| config.suite_for(&omega, Some(q)))
            .collect::<Result<_, _>>()?
    };
    let points = config.points(&omega)?;
    let h = config.fd_step()?;
    let mut table = Table::new(&["operator", "nr", "ntheta", "nboundary", "max_error", "residual", "holomorphic_defect"]);
    let mut studies = Vec::new();
    let mut passed = true;
    for op in config.operator.operators() {
        let rows = convergence_study(&u, op, &suites, &points, h, opts(config))?;
        if let Some(last) = rows.last() {
            passed &= config.tolerances.error.is_none_or(|t| last.max_error <= t);
            passed &= config.tolerances.residual.is_none_or(|t| last.residual <= t);
        }
        for r in &rows {
            let s = r.sizes[0];
            table.push(vec![
                Cell::text(operator_name(op)),
                Cell::int(s.nr),
                Cell::int(s.ntheta),
                Cell::int(s.nboundary),
                Cell::real(r.max_error),
                Cell::real(r.residual),
                Cell::real(r.holomorphic_defect),
            ]);
        }
        studies.push(json!({"operator": op, "rows": to_value(&rows)}));
    }
    let checked = config.tolerances.error.is_some() || config.tolerances.residual.is_some();
    Ok(Outcome {
        result: json!({"fd_step": h, "studies": studies}),
        table,
        passed: checked.then_some(passed),
    })
}
