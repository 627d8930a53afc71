//! The derivative-free operator `T̃f = Σ_s (−1)^{s−1} Σ_I T^{[I]}f` with
//!
//! ```text
//! T^{[I]}f(z) = (−2πi)^{−s} Σ_k Σ_{J ⊆ I∖{i_k}} (−1)^{|J|}
//!               ∫_{D_J × ∂D_B × D_{i_k}} f_{i_k} · ∂^{|J|} g^{k,I} / ∂ζ̄_J ,   B = I∖({i_k} ∪ J).
//! ```
//!
//! Only the components of `f` enter, never their derivatives, so the operator
//! is defined for continuous data that need not be `∂̄`-closed.

use std::time::Instant;

use crate::exec::map_slice;
use crate::expr::Program;
use crate::forms::{closedness_residual, EvalPoint, OneForm};
use crate::kernel::{big_g_unchecked, kernel_derivative, IndexSet};
use crate::operator_t::{slice_transform, PointSolution, SolveOptions, SolveReport, Term, MAX_NESTING};
use crate::quadrature::{minus_two_pi_i_pow, QuadratureSuite};
use crate::{Error, Result, C64};

/// Closedness residual below which data is reported as `∂̄`-closed.
pub const CLOSED_TOL: f64 = 1e-10;

fn guard(s: usize, opts: SolveOptions) -> Result<()> {
    if s > MAX_NESTING && !opts.allow_large {
        return Err(Error::CostGuard(format!(
            "bracket over {s} variables couples {s} solid factors"
        )));
    }
    Ok(())
}

fn check_form(f: &OneForm, suite: &QuadratureSuite) -> Result<()> {
    if f.arity() != suite.arity() {
        return Err(Error::validation(format!(
            "form arity {} differs from domain arity {}",
            f.arity(),
            suite.arity()
        )));
    }
    Ok(())
}

/// One `(k, J)` summand of a bracket, integrated over its mixed product.
fn bracket_piece(
    set: &IndexSet,
    k: usize,
    jmask: u32,
    f_k: &Program,
    z: &[C64],
    suite: &QuadratureSuite,
) -> Result<C64> {
    let idx = set.indices();
    let mut solid = Vec::new();
    let mut boundary = Vec::new();
    for (p, &v) in idx.iter().enumerate() {
        if p != k && jmask & (1 << p) != 0 {
            solid.push(v);
        } else if p != k {
            boundary.push(v);
        }
    }
    solid.push(idx[k]);
    let s = idx.len();
    suite.mixed_integral(z, &solid, &boundary, |vars| {
        let mut a = [C64::new(0.0, 0.0); 8];
        for (slot, &v) in a.iter_mut().zip(idx) {
            *slot = vars[v] - z[v];
        }
        let a = &a[..s];
        let g = big_g_unchecked(a);
        kernel_derivative(a, k, jmask, g) * f_k.eval(vars)
    })
}

/// `T^{[I]}f(z)`.
pub fn t_bracket(set: &IndexSet, f: &OneForm, z: &[C64], suite: &QuadratureSuite) -> Result<C64> {
    t_bracket_with(set, f, z, suite, SolveOptions::default())
}

pub fn t_bracket_with(
    set: &IndexSet,
    f: &OneForm,
    z: &[C64],
    suite: &QuadratureSuite,
    opts: SolveOptions,
) -> Result<C64> {
    check_form(f, suite)?;
    if set.largest() >= suite.arity() {
        return Err(Error::validation(format!(
            "index set ({}) exceeds arity {}",
            set.label(),
            suite.arity()
        )));
    }
    let programs: Vec<Program> = f.components().iter().map(|c| c.compile()).collect();
    bracket(set, &programs, z, suite, opts)
}

fn bracket(set: &IndexSet, programs: &[Program], z: &[C64], suite: &QuadratureSuite, opts: SolveOptions) -> Result<C64> {
    let s = set.len();
    guard(s, opts)?;
    if s > 8 {
        return Err(Error::validation("brackets are limited to 8 variables"));
    }
    suite.check_point(z, set.indices())?;
    let mut total = C64::new(0.0, 0.0);
    for k in 0..s {
        let f_k = &programs[set.indices()[k]];
        if f_k.is_zero() {
            continue;
        }
        for jmask in 0u32..(1 << s) {
            if jmask & (1 << k) != 0 {
                continue;
            }
            let sign = if jmask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            total += sign * bracket_piece(set, k, jmask, f_k, z, suite)?;
        }
    }
    Ok(total / minus_two_pi_i_pow(s))
}

/// Precompiled components for repeated `T̃` evaluation.
pub struct TTildeSolver<'a> {
    suite: &'a QuadratureSuite,
    programs: Vec<Program>,
    sets: Vec<IndexSet>,
    opts: SolveOptions,
}

impl<'a> TTildeSolver<'a> {
    pub fn new(f: &OneForm, suite: &'a QuadratureSuite, opts: SolveOptions) -> Result<Self> {
        check_form(f, suite)?;
        let n = suite.arity();
        guard(n, opts)?;
        let sets = (1..=n).flat_map(|s| IndexSet::all_of_size(n, s)).collect();
        Ok(TTildeSolver {
            suite,
            programs: f.components().iter().map(|c| c.compile()).collect(),
            sets,
            opts,
        })
    }

    pub fn eval(&self, z: &[C64]) -> Result<PointSolution> {
        let all: Vec<usize> = (0..self.suite.arity()).collect();
        self.suite.check_point(z, &all)?;
        let mut value = C64::new(0.0, 0.0);
        let mut terms = Vec::with_capacity(self.sets.len());
        for set in &self.sets {
            let sign: i8 = if set.len() % 2 == 1 { 1 } else { -1 };
            let v = bracket(set, &self.programs, z, self.suite, self.opts)?;
            value += f64::from(sign) * v;
            terms.push(Term {
                set: set.label(),
                sign,
                integrand: format!("[{}]", set.label()),
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
}

/// `T̃f` at every point; the report flags data that is not `∂̄`-closed.
pub fn solve_ttilde(
    f: &OneForm,
    points: &[EvalPoint],
    suite: &QuadratureSuite,
    opts: SolveOptions,
) -> Result<SolveReport> {
    let start = Instant::now();
    let solver = TTildeSolver::new(f, suite, opts)?;
    let closed = closedness_residual(f, points)? <= CLOSED_TOL;
    let solved = map_slice(points, |p| solver.eval(p));
    let points = solved.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SolveReport {
        operator: "ttilde".into(),
        sizes: suite.sizes().to_vec(),
        closed: Some(closed),
        points,
        elapsed_seconds: opts.record_timing.then(|| start.elapsed().as_secs_f64()),
    })
}

/// Two-variable formula written out term by term:
///
/// ```text
/// T¹f₁ + T²f₂ − (2πi)^{−2} [ ∮_{∂D₁}∫_{D₂} conj(a₁) f₂ / (a₂|a|²) + ∫_{D₁}∮_{∂D₂} conj(a₂) f₁ / (a₁|a|²)
///                            − ∫∫ conj(a₁) f₁ / |a|⁴ − ∫∫ conj(a₂) f₂ / |a|⁴ ]
/// ```
pub fn ttilde_dim2_explicit(f: &OneForm, z: &[C64], suite: &QuadratureSuite) -> Result<C64> {
    if suite.arity() != 2 || f.arity() != 2 {
        return Err(Error::validation("the explicit formula is for two variables"));
    }
    let f1 = f.component(0).compile();
    let f2 = f.component(1).compile();
    let t1 = slice_transform(0, f.component(0), z, suite)?;
    let t2 = slice_transform(1, f.component(1), z, suite)?;
    let off = |v: &[C64]| (v[0] - z[0], v[1] - z[1]);
    let b1 = suite.mixed_integral(z, &[1], &[0], |v| {
        let (a1, a2) = off(v);
        a1.conj() * f2.eval(v) / (a2 * (a1.norm_sqr() + a2.norm_sqr()))
    })?;
    let b2 = suite.mixed_integral(z, &[0], &[1], |v| {
        let (a1, a2) = off(v);
        a2.conj() * f1.eval(v) / (a1 * (a1.norm_sqr() + a2.norm_sqr()))
    })?;
    let s1 = suite.mixed_integral(z, &[0, 1], &[], |v| {
        let (a1, a2) = off(v);
        a1.conj() * f1.eval(v) / (a1.norm_sqr() + a2.norm_sqr()).powi(2)
    })?;
    let s2 = suite.mixed_integral(z, &[0, 1], &[], |v| {
        let (a1, a2) = off(v);
        a2.conj() * f2.eval(v) / (a1.norm_sqr() + a2.norm_sqr()).powi(2)
    })?;
    let two_pi_i = C64::new(0.0, 2.0 * std::f64::consts::PI);
    Ok(t1 + t2 - (b1 + b2 - s1 - s2) / (two_pi_i * two_pi_i))
}
