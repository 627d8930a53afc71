//! The solution operator
//! `Tf = Σ_{s=1}^n (−1)^{s−1} Σ_{i₁<…<i_s} T^{i₁}⋯T^{i_s}(∂^{s−1}f_{i_s}/∂z̄_{i₁}⋯∂z̄_{i_{s−1}})`
//! built from slice transforms `T^k`, the one-variable Cauchy transform in
//! `z_k` with the other coordinates frozen.

use std::time::Instant;

use serde::Serialize;

use crate::exec::map_slice;
use crate::expr::{Expr, Program};
use crate::forms::{EvalPoint, OneForm, ProductDomain};
use crate::kernel::IndexSet;
use crate::quadrature::{QuadratureSuite, RuleSizes};
use crate::{Error, Result, C64};

/// Largest nesting depth evaluated without `allow_large`.
pub const MAX_NESTING: usize = 3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveOptions {
    /// Permit nesting deeper than [`MAX_NESTING`].
    pub allow_large: bool,
    /// Record wall-clock time in reports.
    pub record_timing: bool,
}

/// `T^k g (z)` for a 0-based variable `k`.
pub fn slice_transform(k: usize, g: &Expr, z: &[C64], suite: &QuadratureSuite) -> Result<C64> {
    if k >= suite.arity() {
        return Err(Error::validation(format!("slice variable {} exceeds arity", k + 1)));
    }
    suite.iterated_cauchy(z, &[k], &g.compile())
}

/// `T^{i₁}⋯T^{i_s} g (z)` with `i₁` outermost.
pub fn iterated_slice(set: &IndexSet, g: &Expr, z: &[C64], suite: &QuadratureSuite) -> Result<C64> {
    iterated_slice_ordered(set.indices(), g, z, suite, SolveOptions::default())
}

/// Iterated slice transform with an explicit nesting order.
pub fn iterated_slice_ordered(
    order: &[usize],
    g: &Expr,
    z: &[C64],
    suite: &QuadratureSuite,
    opts: SolveOptions,
) -> Result<C64> {
    guard(order.len(), suite, opts)?;
    suite.iterated_cauchy(z, order, &g.compile())
}

fn guard(depth: usize, suite: &QuadratureSuite, opts: SolveOptions) -> Result<()> {
    if depth > MAX_NESTING && !opts.allow_large {
        let per: f64 = suite
            .sizes()
            .iter()
            .take(depth)
            .map(|s| (s.nr * s.ntheta) as f64)
            .product();
        return Err(Error::CostGuard(format!(
            "{depth}-fold nested quadrature needs about {per:.3e} evaluations per point"
        )));
    }
    Ok(())
}

/// One summand of the solution formula.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Term {
    /// 1-based index set, e.g. `"1,2"`.
    pub set: String,
    pub sign: i8,
    pub integrand: String,
    pub value: C64,
}

/// Value of an operator at one point with its term breakdown.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointSolution {
    pub point: EvalPoint,
    pub value: C64,
    pub terms: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    pub operator: String,
    pub sizes: Vec<RuleSizes>,
    /// `Some(false)` marks data that is not `∂̄`-closed.
    pub closed: Option<bool>,
    pub points: Vec<PointSolution>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_seconds: Option<f64>,
}

impl SolveReport {
    pub fn values(&self) -> Vec<C64> {
        self.points.iter().map(|p| p.value).collect()
    }
}

struct Summand {
    set: IndexSet,
    sign: i8,
    integrand: Expr,
    program: Program,
}

/// Precomputed derivative stacks for [`solve_t`].
pub struct TSolver<'a> {
    suite: &'a QuadratureSuite,
    summands: Vec<Summand>,
    opts: SolveOptions,
}

impl<'a> TSolver<'a> {
    pub fn new(f: &OneForm, suite: &'a QuadratureSuite, opts: SolveOptions) -> Result<Self> {
        let n = suite.arity();
        if f.arity() != n {
            return Err(Error::validation(format!(
                "form arity {} differs from domain arity {n}",
                f.arity()
            )));
        }
        guard(n, suite, opts)?;
        let mut summands = Vec::new();
        for s in 1..=n {
            let sign = if s % 2 == 1 { 1 } else { -1 };
            for set in IndexSet::all_of_size(n, s) {
                let idx = set.indices();
                let integrand = f.component(idx[s - 1]).d_bar_stack(&idx[..s - 1]);
                let program = integrand.compile();
                summands.push(Summand {
                    set,
                    sign,
                    integrand,
                    program,
                });
            }
        }
        Ok(TSolver { suite, summands, opts })
    }

    /// Terms as `(set, sign, integrand)` in evaluation order.
    pub fn term_list(&self) -> Vec<(String, i8, String)> {
        self.summands
            .iter()
            .map(|t| (t.set.label(), t.sign, t.integrand.to_string()))
            .collect()
    }

    pub fn eval(&self, z: &[C64]) -> Result<PointSolution> {
        let all: Vec<usize> = (0..self.suite.arity()).collect();
        self.suite.check_point(z, &all)?;
        let mut terms = Vec::with_capacity(self.summands.len());
        let mut value = C64::new(0.0, 0.0);
        for t in &self.summands {
            let v = if t.program.is_zero() {
                C64::new(0.0, 0.0)
            } else {
                self.suite.iterated_cauchy(z, t.set.indices(), &t.program)?
            };
            value += f64::from(t.sign) * v;
            terms.push(Term {
                set: t.set.label(),
                sign: t.sign,
                integrand: t.integrand.to_string(),
                value: v,
            });
        }
        Ok(PointSolution {
            point: z.to_vec(),
            value,
            terms,
        })
    }

    pub fn value(&self, z: &[C64]) -> Result<C64> {
        Ok(self.eval(z)?.value)
    }

    pub fn options(&self) -> SolveOptions {
        self.opts
    }
}

/// `Tf` at every point.
pub fn solve_t(f: &OneForm, points: &[EvalPoint], suite: &QuadratureSuite, opts: SolveOptions) -> Result<SolveReport> {
    let start = Instant::now();
    let solver = TSolver::new(f, suite, opts)?;
    let solved = map_slice(points, |p| solver.eval(p));
    let points = solved.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SolveReport {
        operator: "t".into(),
        sizes: suite.sizes().to_vec(),
        closed: None,
        points,
        elapsed_seconds: opts.record_timing.then(|| start.elapsed().as_secs_f64()),
    })
}

/// Central Wirtinger stencil `½[(u(z+h) − u(z−h))/2h + i(u(z+ih) − u(z−ih))/2h]` in `z_k`.
pub fn fd_dbar(u: &(impl Fn(&[C64]) -> Result<C64> + ?Sized), z: &[C64], k: usize, h: f64) -> Result<C64> {
    let mut p = z.to_vec();
    let mut at = |shift: C64| {
        p[k] = z[k] + shift;
        u(&p)
    };
    let dx = (at(C64::new(h, 0.0))? - at(C64::new(-h, 0.0))?) / (2.0 * h);
    let dy = (at(C64::new(0.0, h))? - at(C64::new(0.0, -h))?) / (2.0 * h);
    Ok(0.5 * (dx + C64::i() * dy))
}

/// Central Wirtinger stencil for `∂/∂z_k`.
pub fn fd_dz(u: &(impl Fn(&[C64]) -> Result<C64> + ?Sized), z: &[C64], k: usize, h: f64) -> Result<C64> {
    let mut p = z.to_vec();
    let mut at = |shift: C64| {
        p[k] = z[k] + shift;
        u(&p)
    };
    let dx = (at(C64::new(h, 0.0))? - at(C64::new(-h, 0.0))?) / (2.0 * h);
    let dy = (at(C64::new(0.0, h))? - at(C64::new(0.0, -h))?) / (2.0 * h);
    Ok(0.5 * (dx - C64::i() * dy))
}

/// `max_{points,k} |FD ∂u/∂z̄_k − f_k|` for the solver `u`.
pub fn residual_dbar(
    f: &OneForm,
    solver: &(dyn Fn(&[C64]) -> Result<C64> + Sync),
    omega: &ProductDomain,
    points: &[EvalPoint],
    h: f64,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::validation(format!("finite-difference step must be positive, got {h}")));
    }
    if f.arity() != omega.arity() {
        return Err(Error::validation("form and domain differ in arity"));
    }
    for p in points {
        if !omega.contains(p, 10.0 * h) {
            return Err(Error::validation(format!(
                "point {p:?} is closer than 10h = {} to the boundary",
                10.0 * h
            )));
        }
    }
    let per_point = map_slice(points, |p| -> Result<f64> {
        let mut worst: f64 = 0.0;
        for k in 0..f.arity() {
            let fd = fd_dbar(solver, p, k, h)?;
            worst = worst.max((fd - f.component(k).eval(p)?).norm());
        }
        Ok(worst)
    });
    per_point
        .into_iter()
        .try_fold(0.0f64, |acc, r| r.map(|x| acc.max(x)))
}
