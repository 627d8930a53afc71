//! Numerical checks: uniform-bound probes for weakly singular integrals, the
//! iterated Stokes identity, sup-norm ratios and convergence tables.

use std::f64::consts::PI;

use serde::Serialize;

use crate::exec::{chunked_sum, map_slice, pairwise_slice};
use crate::expr::{Expr, Program};
use crate::forms::{manufacture_form, sup_norm, sup_norm_expr, EvalPoint, OneForm, ProductDomain};
use crate::geometry::{boundary_rule_about, PolarFan, StarDomain};
use crate::kernel::IndexSet;
use crate::operator_t::{fd_dbar, residual_dbar, SolveOptions, SolveReport, TSolver};
use crate::operator_ttilde::{solve_ttilde, TTildeSolver};
use crate::quadrature::{QuadratureSuite, RuleSizes};
use crate::{Error, Result, C64};

/// Growth factor allowed over the running maximum in bound probes.
pub const MONOTONE_FACTOR: f64 = 1.1;

/// Which solution operator to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Operator {
    T,
    TTilde,
}

/// Applies `op` at every point.
pub fn solve(op: Operator, f: &OneForm, points: &[EvalPoint], suite: &QuadratureSuite, opts: SolveOptions) -> Result<SolveReport> {
    match op {
        Operator::T => crate::operator_t::solve_t(f, points, suite, opts),
        Operator::TTilde => solve_ttilde(f, points, suite, opts),
    }
}

/// Pointwise solver borrowed from a quadrature suite.
pub type Evaluator<'a> = Box<dyn Fn(&[C64]) -> Result<C64> + Sync + 'a>;

/// Boxed pointwise evaluator of `op`.
pub fn pointwise<'a>(op: Operator, f: &OneForm, suite: &'a QuadratureSuite, opts: SolveOptions) -> Result<Evaluator<'a>> {
    Ok(match op {
        Operator::T => {
            let s = TSolver::new(f, suite, opts)?;
            Box::new(move |z: &[C64]| s.value(z))
        }
        Operator::TTilde => {
            let s = TTildeSolver::new(f, suite, opts)?;
            Box::new(move |z: &[C64]| s.value(z))
        }
    })
}

fn angular_count(d: &StarDomain, z: C64) -> usize {
    let dist = d.distance_to_boundary(z).max(1e-12);
    ((64.0 * d.r_bound() / dist).ceil() as usize).clamp(512, 1 << 20)
}

fn check_inside(d: &StarDomain, z_list: &[C64]) -> Result<()> {
    for z in z_list {
        if !d.contains(*z, 0.0) || d.distance_to_boundary(*z) <= 0.0 {
            return Err(Error::validation(format!("probe point {z} is not inside the domain")));
        }
    }
    Ok(())
}

/// `∫_D |dζ̄∧dζ| / |ζ−z|^α = 2∫_D dA/|ζ−z|^α` for each `z`, in polar
/// coordinates about `z` with the radial integral done exactly on each ray.
pub fn lemma_bound_area(d: &StarDomain, alpha: f64, z_list: &[C64]) -> Result<Vec<f64>> {
    if !(alpha < 2.0) {
        return Err(Error::validation(format!("solid probe needs alpha < 2, got {alpha}")));
    }
    check_inside(d, z_list)?;
    let p = 2.0 - alpha;
    z_list
        .iter()
        .map(|&z| {
            let fan = PolarFan::new(d, z, angular_count(d, z))?;
            let per_ray: Vec<C64> = fan
                .rays
                .iter()
                .map(|ray| {
                    let s: f64 = ray.intervals.iter().map(|(a, b)| b.powf(p) - a.powf(p)).sum();
                    C64::new(s / p, 0.0)
                })
                .collect();
            Ok(2.0 * fan.dphi * pairwise_slice(&per_ray).re)
        })
        .collect()
}

/// `∮_{∂D} |dζ| / |ζ−z|^α` for each `z`, with the node count scaled by
/// `1/dist(z, ∂D)`.
pub fn lemma_bound_boundary(d: &StarDomain, alpha: f64, z_list: &[C64], n: usize) -> Result<Vec<f64>> {
    if !(alpha < 1.0) {
        return Err(Error::validation(format!("boundary probe needs alpha < 1, got {alpha}")));
    }
    check_inside(d, z_list)?;
    z_list
        .iter()
        .map(|&z| {
            let rule = boundary_rule_about(d, z, n)?;
            let terms: Vec<C64> = rule
                .nodes
                .iter()
                .zip(&rule.tangents)
                .map(|(w, t)| C64::new(t.norm() / (w - z).norm().powf(alpha), 0.0))
                .collect();
            Ok(pairwise_slice(&terms).re)
        })
        .collect()
}

/// Points at the given distances from the boundary, on the inward normal at
/// the boundary point with polar angle `theta`.
pub fn approach_points(d: &StarDomain, theta: f64, distances: &[f64]) -> Vec<C64> {
    let b = d.boundary_point(theta);
    let t = d.boundary_tangent(theta);
    let outward = -C64::i() * t / t.norm();
    distances.iter().map(|&h| b - outward * h).collect()
}

/// Geometric sequence of `count` distances from `from` down to `to`.
pub fn distance_sequence(from: f64, to: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![from];
    }
    let ratio = (to / from).powf(1.0 / (count - 1) as f64);
    (0..count).map(|k| from * ratio.powi(k as i32)).collect()
}

/// True if each value is at most `factor` times the running maximum of the
/// values before it.
pub fn monotone_bounded(values: &[f64], factor: f64) -> bool {
    let mut running = f64::NEG_INFINITY;
    for &v in values {
        if !v.is_finite() || (running.is_finite() && v > factor * running) {
            return false;
        }
        running = running.max(v);
    }
    true
}

/// Both sides of the iterated Stokes identity
/// `∫_Ω ∂ⁿf/∂ζ̄₁⋯∂ζ̄ₙ · g = Σ_J (−1)^{|J|} ∫_{D_J × ∂D_{J^c}} f·∂^{|J|}g/∂ζ̄_J`
/// for smooth `f`, `g`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StokesResult {
    pub lhs: C64,
    pub rhs: C64,
    pub diff: f64,
}

/// Iterated Stokes identity on the center rules of `suite`.
pub fn stokes_check(f: &Expr, g: &Expr, omega: &ProductDomain, suite: &QuadratureSuite) -> Result<StokesResult> {
    stokes_check_with(f, g, omega, suite, SolveOptions::default())
}

pub fn stokes_check_with(
    f: &Expr,
    g: &Expr,
    omega: &ProductDomain,
    suite: &QuadratureSuite,
    opts: SolveOptions,
) -> Result<StokesResult> {
    let n = omega.arity();
    if suite.arity() != n || suite.omega() != omega {
        return Err(Error::validation("quadrature suite was built for a different domain"));
    }
    if f.min_arity() > n || g.min_arity() > n {
        return Err(Error::validation("expression arity exceeds the domain arity"));
    }
    if n > 3 && !opts.allow_large {
        return Err(Error::CostGuard(format!("Stokes check over {n} factors")));
    }
    let all: Vec<usize> = (0..n).collect();
    let lhs_integrand = f.d_bar_stack(&all).mul(g.clone());
    let lhs = tensor_integral(suite, &lhs_integrand.compile(), (1u32 << n) - 1)?;
    let mut rhs = C64::new(0.0, 0.0);
    for mask in 0u32..(1 << n) {
        let j: Vec<usize> = (0..n).filter(|v| mask & (1 << v) != 0).collect();
        let integrand = f.clone().mul(g.d_bar_stack(&j));
        let sign = if j.len().is_multiple_of(2) { 1.0 } else { -1.0 };
        rhs += sign * tensor_integral(suite, &integrand.compile(), mask)?;
    }
    Ok(StokesResult {
        lhs,
        rhs,
        diff: (lhs - rhs).norm(),
    })
}

/// Tensor quadrature of `h` with solid factors in `solid_mask` (measure
/// `dζ̄∧dζ`) and boundary factors elsewhere (measure `dζ`).
fn tensor_integral(suite: &QuadratureSuite, h: &Program, solid_mask: u32) -> Result<C64> {
    let n = suite.arity();
    if h.is_zero() {
        return Ok(C64::new(0.0, 0.0));
    }
    let two_i = C64::new(0.0, 2.0);
    let axes: Vec<(Vec<C64>, Vec<C64>)> = (0..n)
        .map(|v| {
            if solid_mask & (1 << v) != 0 {
                let r = suite.area_rule(v);
                (r.nodes.clone(), r.weights.iter().map(|w| two_i * w).collect())
            } else {
                let r = suite.boundary_rule(v);
                (r.nodes.clone(), r.tangents.clone())
            }
        })
        .collect();
    let (first_nodes, first_weights) = &axes[0];
    let total = chunked_sum(
        first_nodes.len(),
        || (vec![C64::new(0.0, 0.0); n], vec![Vec::new(); n]),
        |(vars, bufs), i| {
            vars[0] = first_nodes[i];
            first_weights[i] * tensor_rest(&axes[1..], 1, vars, h, &mut bufs[1..])
        },
    );
    if total.re.is_finite() && total.im.is_finite() {
        Ok(total)
    } else {
        Err(Error::numerical("non-finite Stokes integral"))
    }
}

fn tensor_rest(axes: &[(Vec<C64>, Vec<C64>)], var: usize, vars: &mut [C64], h: &Program, bufs: &mut [Vec<C64>]) -> C64 {
    if axes.is_empty() {
        return h.eval(vars);
    }
    let (buf, rest) = bufs.split_first_mut().unwrap();
    let mut local = std::mem::take(buf);
    local.clear();
    let (nodes, weights) = &axes[0];
    for (x, w) in nodes.iter().zip(weights) {
        vars[var] = *x;
        local.push(w * tensor_rest(&axes[1..], var + 1, vars, h, rest));
    }
    let s = pairwise_slice(&local);
    *buf = local;
    s
}

/// A smooth pair for [`stokes_check`].
#[derive(Clone, Debug)]
pub struct StokesCase {
    pub name: String,
    pub omega: ProductDomain,
    pub sizes: RuleSizes,
    pub f: Expr,
    pub g: Expr,
}

/// Polynomial pairs in `(ζ, ζ̄)` on products of disks and ellipses, up to three factors.
pub fn stokes_catalog() -> Result<Vec<StokesCase>> {
    let c = |re, im| C64::new(re, im);
    let disk = StarDomain::disk(c(0.0, 0.0), 1.0)?;
    let shifted = StarDomain::disk(c(0.5, -0.25), 0.75)?;
    let ellipse = StarDomain::ellipse(c(0.0, 0.0), 1.5, 1.0)?;
    let ellipse2 = StarDomain::ellipse(c(0.2, 0.1), 1.0, 0.8)?;
    let parse = |t: &str, n| crate::expr::parse(t, n).map_err(Error::from);
    let mut out = Vec::new();
    let mut push = |name: &str, factors: Vec<StarDomain>, sizes: RuleSizes, f: &str, g: &str| -> Result<()> {
        let n = factors.len();
        out.push(StokesCase {
            name: name.to_string(),
            omega: ProductDomain::new(factors)?,
            sizes,
            f: parse(f, n)?,
            g: parse(g, n)?,
        });
        Ok(())
    };
    let s1 = RuleSizes::new(16, 48);
    let s2 = RuleSizes::new(12, 40);
    let s3 = RuleSizes::new(6, 24);
    push("disk: conj(z1) / 1", vec![disk.clone()], s1, "conj(z1)", "1")?;
    push("disk: constant f", vec![disk.clone()], s1, "1", "z1^2*conj(z1) + 3")?;
    push("disk: mixed monomials", vec![disk.clone()], s1, "conj(z1)^2*z1", "z1^3 + conj(z1)*z1^2")?;
    push("ellipse: quadratic pair", vec![ellipse.clone()], s1, "conj(z1)^2 + z1", "(1+2i)*z1*conj(z1) - 2")?;
    push("bidisk: symmetric product", vec![disk.clone(), disk.clone()], s2, "conj(z1)*conj(z2)", "z1*z2")?;
    push(
        "disk x ellipse: mixed",
        vec![shifted.clone(), ellipse.clone()],
        s2,
        "conj(z1)^2*conj(z2) + z2",
        "z1*conj(z2) + conj(z1)*z2^2",
    )?;
    push(
        "ellipse x ellipse: cubic",
        vec![ellipse.clone(), ellipse2.clone()],
        s2,
        "conj(z1)*z1*conj(z2)^2",
        "1 + z1^2 - (0.5-1i)*conj(z2)",
    )?;
    push(
        "tridisk: triple product",
        vec![disk.clone(), disk.clone(), disk.clone()],
        s3,
        "conj(z1)*conj(z2)*conj(z3)",
        "z1*z2 + conj(z3)",
    )?;
    push(
        "disk x ellipse x disk: mixed",
        vec![disk.clone(), ellipse2.clone(), shifted.clone()],
        s3,
        "conj(z1)*conj(z2)^2*conj(z3) + z1",
        "z3*conj(z1) + 2*z2",
    )?;
    Ok(out)
}

/// One row of a sup-norm study.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupnormRow {
    pub label: String,
    pub norm_f: f64,
    pub norm_tf: f64,
    /// `None` for the zero form.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupnormTable {
    pub operator: Operator,
    pub sizes: Vec<RuleSizes>,
    pub rows: Vec<SupnormRow>,
    pub max_ratio: Option<f64>,
}

/// `‖f‖` and `‖Tf‖` over `points` for every form in the catalog.
pub fn supnorm_study(
    catalog: &[(String, OneForm)],
    op: Operator,
    suite: &QuadratureSuite,
    points: &[EvalPoint],
    opts: SolveOptions,
) -> Result<SupnormTable> {
    if catalog.is_empty() {
        return Err(Error::validation("sup-norm study needs a non-empty catalog"));
    }
    let rows = map_slice(catalog, |(label, f)| -> Result<SupnormRow> {
        let norm_f = sup_norm(f, points)?;
        if norm_f == 0.0 {
            return Ok(SupnormRow {
                label: label.clone(),
                norm_f,
                norm_tf: 0.0,
                ratio: None,
            });
        }
        let u = pointwise(op, f, suite, opts)?;
        let mut norm_tf: f64 = 0.0;
        for p in points {
            norm_tf = norm_tf.max(u(p)?.norm());
        }
        Ok(SupnormRow {
            label: label.clone(),
            norm_f,
            norm_tf,
            ratio: Some(norm_tf / norm_f),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let max_ratio = rows.iter().filter_map(|r| r.ratio).reduce(f64::max);
    Ok(SupnormTable {
        operator: op,
        sizes: suite.sizes().to_vec(),
        rows,
        max_ratio,
    })
}

/// Twenty manufactured forms whose sup norms on the unit bidisk span four decades.
pub fn default_catalog() -> Result<Vec<(String, OneForm)>> {
    let shapes = [
        "conj(z1)*conj(z2)",
        "conj(z1)^2",
        "conj(z2)^3*z1",
        "exp(conj(z1))*conj(z2)",
        "sin(conj(z1) + conj(z2))",
        "conj(z1)^2*conj(z2)^2",
        "cos(conj(z2))*z1^2",
        "conj(z1)*z2 + conj(z2)*z1",
        "exp(conj(z1)*conj(z2))",
        "conj(z1)^3 - 2*conj(z2)",
    ];
    let mut out = Vec::with_capacity(20);
    for (i, scale_exp) in (0..20).map(|i| (i, -2.0 + 4.0 * i as f64 / 19.0)) {
        let shape = shapes[i % shapes.len()];
        let scale = 10f64.powf(scale_exp);
        let u = crate::expr::parse(shape, 2)?.mul(Expr::real(scale));
        out.push((format!("{scale:.3e} * ({shape})"), manufacture_form(&u, 2)?));
    }
    Ok(out)
}

/// One row of a convergence study.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub sizes: Vec<RuleSizes>,
    /// `max |Tf − u|` over the points.
    pub max_error: f64,
    /// `max |FD ∂̄(Tf) − f|`.
    pub residual: f64,
    /// `max |FD ∂̄(Tf − u)|`: zero when `Tf` and `u` differ by a holomorphic function.
    pub holomorphic_defect: f64,
}

/// Errors against the potential `u` and finite-difference residuals for each suite.
pub fn convergence_study(
    u: &Expr,
    op: Operator,
    suites: &[QuadratureSuite],
    points: &[EvalPoint],
    h: f64,
    opts: SolveOptions,
) -> Result<Vec<ConvergenceRow>> {
    suites
        .iter()
        .map(|suite| {
            let n = suite.arity();
            let f = manufacture_form(u, n)?;
            let solver = pointwise(op, &f, suite, opts)?;
            let solver = &*solver;
            let max_error = map_slice(points, |p| -> Result<f64> { Ok((solver(p)? - u.eval(p)?).norm()) })
                .into_iter()
                .try_fold(0.0f64, |acc, r| r.map(|x| acc.max(x)))?;
            let residual = residual_dbar(&f, solver, suite.omega(), points, h)?;
            let diff = |p: &[C64]| -> Result<C64> { Ok(solver(p)? - u.eval(p)?) };
            let defect = map_slice(points, |p| -> Result<f64> {
                let mut worst: f64 = 0.0;
                for k in 0..n {
                    worst = worst.max(fd_dbar(&diff, p, k, h)?.norm());
                }
                Ok(worst)
            })
            .into_iter()
            .try_fold(0.0f64, |acc, r| r.map(|x| acc.max(x)))?;
            Ok(ConvergenceRow {
                sizes: suite.sizes().to_vec(),
                max_error,
                residual,
                holomorphic_defect: defect,
            })
        })
        .collect()
}

/// Residual of `op` for the potential `u` at each finite-difference step.
pub fn fd_step_study(
    u: &Expr,
    op: Operator,
    suite: &QuadratureSuite,
    points: &[EvalPoint],
    steps: &[f64],
    opts: SolveOptions,
) -> Result<Vec<(f64, f64)>> {
    let f = manufacture_form(u, suite.arity())?;
    let solver = pointwise(op, &f, suite, opts)?;
    steps
        .iter()
        .map(|&h| Ok((h, residual_dbar(&f, &*solver, suite.omega(), points, h)?)))
        .collect()
}

/// `sup|u|` helper for reports.
pub fn sup_abs(u: &Expr, points: &[EvalPoint]) -> Result<f64> {
    sup_norm_expr(u, points)
}

/// Index sets of size `s` in `n` variables, 1-based labels.
pub fn index_set_labels(n: usize, s: usize) -> Vec<String> {
    IndexSet::all_of_size(n, s).iter().map(|x| x.label()).collect()
}

/// Area of the unit disk, for probe normalisations.
pub const UNIT_DISK_AREA: f64 = PI;

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn unit() -> StarDomain {
        StarDomain::disk(c(0.0, 0.0), 1.0).unwrap()
    }

    #[test]
    fn area_probe_examples() {
        let d = unit();
        let v = lemma_bound_area(&d, 0.0, &[c(0.3, 0.2)]).unwrap();
        assert!((v[0] - 2.0 * PI).abs() < 1e-10);
        let v = lemma_bound_area(&d, 1.0, &[c(0.0, 0.0)]).unwrap();
        assert!((v[0] - 4.0 * PI).abs() < 0.01 * 4.0 * PI);
        assert!(lemma_bound_area(&d, 2.0, &[c(0.0, 0.0)]).is_err());
        let interior = lemma_bound_area(&d, 5.0 / 3.0, &[c(0.0, 0.0), c(0.5, 0.0)]).unwrap();
        let edge = lemma_bound_area(&d, 5.0 / 3.0, &[c(0.999, 0.0)]).unwrap();
        assert!(edge[0].is_finite() && edge[0] <= 1.1 * interior[0].max(interior[1]));
    }

    #[test]
    fn boundary_probe_examples() {
        let d = unit();
        let v = lemma_bound_boundary(&d, 0.0, &[c(0.3, 0.0)], 64).unwrap();
        assert!((v[0] - 2.0 * PI).abs() < 1e-8);
        let v = lemma_bound_boundary(&d, 0.5, &[c(0.0, 0.0)], 64).unwrap();
        assert!((v[0] - 2.0 * PI).abs() < 1e-6);
        assert!(lemma_bound_boundary(&d, 1.0, &[c(0.0, 0.0)], 64).is_err());
    }

    #[test]
    fn approach_points_have_requested_distance() {
        let e = StarDomain::ellipse(c(0.0, 0.0), 2.0, 1.0).unwrap();
        let pts = approach_points(&e, 0.7, &[0.1, 0.01]);
        assert!((e.distance_to_boundary(pts[0]) - 0.1).abs() < 1e-6);
        assert!((e.distance_to_boundary(pts[1]) - 0.01).abs() < 1e-8);
    }

    #[test]
    fn monotone_rule() {
        assert!(monotone_bounded(&[1.0, 1.05, 1.1, 1.0], 1.1));
        assert!(!monotone_bounded(&[1.0, 1.2], 1.1));
        assert!(!monotone_bounded(&[1.0, f64::INFINITY], 1.1));
    }

    #[test]
    fn stokes_one_variable_examples() {
        let omega = ProductDomain::unit_polydisk(1).unwrap();
        let suite = QuadratureSuite::uniform(omega.clone(), RuleSizes::new(8, 16)).unwrap();
        let f = crate::expr::parse("conj(z1)", 1).unwrap();
        let r = stokes_check(&f, &Expr::one(), &omega, &suite).unwrap();
        assert!((r.lhs - c(0.0, 2.0 * PI)).norm() < 1e-12);
        assert!((r.rhs - c(0.0, 2.0 * PI)).norm() < 1e-12);
        let g = crate::expr::parse("z1^2 + conj(z1)", 1).unwrap();
        let r = stokes_check(&Expr::one(), &g, &omega, &suite).unwrap();
        assert!(r.lhs.norm() == 0.0 && r.diff < 1e-12);
    }

    #[test]
    fn supnorm_homogeneity_and_zero_form() {
        let omega = ProductDomain::unit_polydisk(2).unwrap();
        let suite = QuadratureSuite::uniform(omega.clone(), RuleSizes::new(6, 8)).unwrap();
        let pts = crate::forms::SamplePlan::random(3, 0.05, 3).resolve(&omega).unwrap();
        let f = manufacture_form(&crate::expr::parse("exp(conj(z1))*conj(z2)", 2).unwrap(), 2).unwrap();
        let catalog: Vec<(String, OneForm)> = [1e-3, 1.0, 1e3]
            .iter()
            .map(|a| (format!("{a}"), f.scaled(C64::new(*a, 0.0))))
            .chain(std::iter::once(("zero".to_string(), OneForm::zero(2))))
            .collect();
        let t = supnorm_study(&catalog, Operator::T, &suite, &pts, SolveOptions::default()).unwrap();
        let r0 = t.rows[0].ratio.unwrap();
        for row in &t.rows[1..3] {
            assert!((row.ratio.unwrap() - r0).abs() <= 1e-10 * r0);
        }
        assert_eq!(t.rows[3].ratio, None);
    }

    #[test]
    fn catalog_spans_four_decades() {
        let omega = ProductDomain::unit_polydisk(2).unwrap();
        let pts = crate::forms::SamplePlan::random(50, 0.05, 9).resolve(&omega).unwrap();
        let norms: Vec<f64> = default_catalog()
            .unwrap()
            .iter()
            .map(|(_, f)| sup_norm(f, &pts).unwrap())
            .collect();
        let lo = norms.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = norms.iter().cloned().fold(0.0, f64::max);
        assert_eq!(norms.len(), 20);
        assert!(hi / lo >= 1e4, "{lo} .. {hi}");
    }
}
