//! Complex expressions in `z₁…zₙ` and their conjugates.
//!
//! Variables are stored 0-based (`Var(0)` is `z1`). Trees are immutable and
//! share subtrees through [`Arc`], so derivative stacks stay cheap to clone.

mod diff;
mod parse;
mod program;

use std::fmt;
use std::sync::Arc;

use crate::{Error, Result, C64};

pub use parse::{parse, ParseError};
pub use program::Program;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(C64),
    Var(usize),
    Conj(Arc<Expr>),
    Neg(Arc<Expr>),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    Pow(Arc<Expr>, i32),
    Exp(Arc<Expr>),
    Sin(Arc<Expr>),
    Cos(Arc<Expr>),
}

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn zero() -> Self {
        Expr::Const(ZERO)
    }

    pub fn one() -> Self {
        Expr::Const(ONE)
    }

    pub fn constant(c: C64) -> Self {
        Expr::Const(c)
    }

    pub fn real(x: f64) -> Self {
        Expr::Const(C64::new(x, 0.0))
    }

    /// Variable `z_{index+1}`.
    pub fn var(index: usize) -> Self {
        Expr::Var(index)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == ZERO)
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == ONE)
    }

    fn as_const(&self) -> Option<C64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn conj(self) -> Self {
        match self {
            Expr::Const(c) => Expr::Const(c.conj()),
            Expr::Conj(e) => Arc::unwrap_or_clone(e),
            e => Expr::Conj(Arc::new(e)),
        }
    }

    pub fn neg(self) -> Self {
        match self {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(e) => Arc::unwrap_or_clone(e),
            e => Expr::Neg(Arc::new(e)),
        }
    }

    pub fn add(self, rhs: Self) -> Self {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::Const(a + b),
            (Some(a), _) if a == ZERO => rhs,
            (_, Some(b)) if b == ZERO => self,
            _ => Expr::Add(Arc::new(self), Arc::new(rhs)),
        }
    }

    pub fn sub(self, rhs: Self) -> Self {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::Const(a - b),
            (Some(a), _) if a == ZERO => rhs.neg(),
            (_, Some(b)) if b == ZERO => self,
            _ => Expr::Sub(Arc::new(self), Arc::new(rhs)),
        }
    }

    pub fn mul(self, rhs: Self) -> Self {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::Const(a * b),
            (Some(a), _) | (_, Some(a)) if a == ZERO => Expr::zero(),
            (Some(a), _) if a == ONE => rhs,
            (_, Some(b)) if b == ONE => self,
            _ => Expr::Mul(Arc::new(self), Arc::new(rhs)),
        }
    }

    pub fn div(self, rhs: Self) -> Self {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) if b != ZERO => Expr::Const(a / b),
            (Some(a), _) if a == ZERO => Expr::zero(),
            (_, Some(b)) if b == ONE => self,
            _ => Expr::Div(Arc::new(self), Arc::new(rhs)),
        }
    }

    pub fn pow(self, n: i32) -> Self {
        match (n, self.as_const()) {
            (0, _) => Expr::one(),
            (1, _) => self,
            (_, Some(c)) if n > 0 || c != ZERO => Expr::Const(c.powi(n)),
            _ => Expr::Pow(Arc::new(self), n),
        }
    }

    pub fn exp(self) -> Self {
        match self.as_const() {
            Some(c) => Expr::Const(c.exp()),
            None => Expr::Exp(Arc::new(self)),
        }
    }

    pub fn sin(self) -> Self {
        match self.as_const() {
            Some(c) => Expr::Const(c.sin()),
            None => Expr::Sin(Arc::new(self)),
        }
    }

    pub fn cos(self) -> Self {
        match self.as_const() {
            Some(c) => Expr::Const(c.cos()),
            None => Expr::Cos(Arc::new(self)),
        }
    }

    /// Number of variables the expression needs: one more than the largest index.
    pub fn min_arity(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(k) => k + 1,
            Expr::Conj(e) | Expr::Neg(e) | Expr::Pow(e, _) | Expr::Exp(e) | Expr::Sin(e) | Expr::Cos(e) => {
                e.min_arity()
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.min_arity().max(b.min_arity())
            }
        }
    }

    /// True if the expression contains no conjugation (hence is holomorphic).
    pub fn is_conj_free(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => true,
            Expr::Conj(_) => false,
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Exp(e) | Expr::Sin(e) | Expr::Cos(e) => e.is_conj_free(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.is_conj_free() && b.is_conj_free()
            }
        }
    }

    /// Number of tree nodes, counting shared subtrees once per use.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Conj(e) | Expr::Neg(e) | Expr::Pow(e, _) | Expr::Exp(e) | Expr::Sin(e) | Expr::Cos(e) => {
                1 + e.size()
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Evaluates at `point`; division by zero and non-finite results are errors.
    pub fn eval(&self, point: &[C64]) -> Result<C64> {
        if point.len() < self.min_arity() {
            return Err(Error::validation(format!(
                "expression uses {} variables, point has {}",
                self.min_arity(),
                point.len()
            )));
        }
        let v = self.eval_inner(point)?;
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::numerical(format!("non-finite value {v} in {self}")))
        }
    }

    fn eval_inner(&self, p: &[C64]) -> Result<C64> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(k) => p[*k],
            Expr::Conj(e) => e.eval_inner(p)?.conj(),
            Expr::Neg(e) => -e.eval_inner(p)?,
            Expr::Add(a, b) => a.eval_inner(p)? + b.eval_inner(p)?,
            Expr::Sub(a, b) => a.eval_inner(p)? - b.eval_inner(p)?,
            Expr::Mul(a, b) => a.eval_inner(p)? * b.eval_inner(p)?,
            Expr::Div(a, b) => {
                let d = b.eval_inner(p)?;
                if d == ZERO {
                    return Err(Error::numerical(format!("division by zero in {self}")));
                }
                a.eval_inner(p)? / d
            }
            Expr::Pow(e, n) => {
                let b = e.eval_inner(p)?;
                if *n < 0 && b == ZERO {
                    return Err(Error::numerical(format!("division by zero in {self}")));
                }
                b.powi(*n)
            }
            Expr::Exp(e) => e.eval_inner(p)?.exp(),
            Expr::Sin(e) => e.eval_inner(p)?.sin(),
            Expr::Cos(e) => e.eval_inner(p)?.cos(),
        })
    }

    pub fn compile(&self) -> Program {
        Program::new(self)
    }
}

fn fmt_real(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:?}")
    }
}

#[allow(clippy::redundant_guards)]
fn fmt_const(c: C64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match (c.re, c.im) {
        (re, im) if im == 0.0 => {
            if re < 0.0 || (re == 0.0 && re.is_sign_negative()) {
                write!(f, "(-{})", fmt_real(-re))
            } else {
                write!(f, "{}", fmt_real(re))
            }
        }
        (re, im) => {
            let sign = if im < 0.0 { '-' } else { '+' };
            let re_text = if re < 0.0 {
                format!("-{}", fmt_real(-re))
            } else {
                fmt_real(re)
            };
            write!(f, "({re_text}{sign}{}i)", fmt_real(im.abs()))
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => fmt_const(*c, f),
            Expr::Var(k) => write!(f, "z{}", k + 1),
            Expr::Conj(e) => write!(f, "conj({e})"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(e, n) => write!(f, "pow({e}, {n})"),
            Expr::Exp(e) => write!(f, "exp({e})"),
            Expr::Sin(e) => write!(f, "sin({e})"),
            Expr::Cos(e) => write!(f, "cos({e})"),
        }
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add(self, rhs)
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul(self, rhs)
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::div(self, rhs)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}
