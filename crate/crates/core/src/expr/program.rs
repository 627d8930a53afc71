//! Postfix bytecode for evaluating an [`Expr`] inside quadrature loops.

use super::Expr;
use crate::C64;

#[derive(Clone, Copy, Debug)]
enum Op {
    Const(C64),
    Var(usize),
    Conj,
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Pow(i32),
    Exp,
    Sin,
    Cos,
}

const STACK: usize = 32;

/// Compiled expression. Evaluation is unchecked: division by zero yields
/// non-finite values, which callers detect on the accumulated result.
#[derive(Clone, Debug)]
pub struct Program {
    ops: Vec<Op>,
    depth: usize,
    arity: usize,
    constant: Option<C64>,
}

impl Program {
    pub fn new(e: &Expr) -> Self {
        let mut ops = Vec::new();
        let depth = emit(e, &mut ops);
        let constant = match e {
            Expr::Const(c) => Some(*c),
            _ => None,
        };
        Program {
            ops,
            depth,
            arity: e.min_arity(),
            constant,
        }
    }

    pub fn min_arity(&self) -> usize {
        self.arity
    }

    /// `Some(c)` when the expression is the constant `c`.
    pub fn as_constant(&self) -> Option<C64> {
        self.constant
    }

    pub fn is_zero(&self) -> bool {
        self.constant == Some(C64::new(0.0, 0.0))
    }

    #[inline]
    pub fn eval(&self, vars: &[C64]) -> C64 {
        if let Some(c) = self.constant {
            return c;
        }
        if self.depth <= STACK {
            let mut stack = [C64::new(0.0, 0.0); STACK];
            run(&self.ops, vars, &mut stack)
        } else {
            let mut stack = vec![C64::new(0.0, 0.0); self.depth];
            run(&self.ops, vars, &mut stack)
        }
    }
}

#[inline]
fn run(ops: &[Op], vars: &[C64], stack: &mut [C64]) -> C64 {
    let mut sp = 0usize;
    for op in ops {
        match *op {
            Op::Const(c) => {
                stack[sp] = c;
                sp += 1;
            }
            Op::Var(k) => {
                stack[sp] = vars[k];
                sp += 1;
            }
            Op::Conj => stack[sp - 1] = stack[sp - 1].conj(),
            Op::Neg => stack[sp - 1] = -stack[sp - 1],
            Op::Pow(n) => stack[sp - 1] = stack[sp - 1].powi(n),
            Op::Exp => stack[sp - 1] = stack[sp - 1].exp(),
            Op::Sin => stack[sp - 1] = stack[sp - 1].sin(),
            Op::Cos => stack[sp - 1] = stack[sp - 1].cos(),
            Op::Add | Op::Sub | Op::Mul | Op::Div => {
                sp -= 1;
                let b = stack[sp];
                let a = &mut stack[sp - 1];
                match *op {
                    Op::Add => *a += b,
                    Op::Sub => *a -= b,
                    Op::Mul => *a *= b,
                    _ => *a /= b,
                }
            }
        }
    }
    stack[0]
}

/// Appends postfix code for `e` and returns the stack depth it needs.
fn emit(e: &Expr, ops: &mut Vec<Op>) -> usize {
    let unary = |a: &Expr, op: Op, ops: &mut Vec<Op>| {
        let d = emit(a, ops);
        ops.push(op);
        d
    };
    match e {
        Expr::Const(c) => {
            ops.push(Op::Const(*c));
            1
        }
        Expr::Var(k) => {
            ops.push(Op::Var(*k));
            1
        }
        Expr::Conj(a) => unary(a, Op::Conj, ops),
        Expr::Neg(a) => unary(a, Op::Neg, ops),
        Expr::Pow(a, n) => unary(a, Op::Pow(*n), ops),
        Expr::Exp(a) => unary(a, Op::Exp, ops),
        Expr::Sin(a) => unary(a, Op::Sin, ops),
        Expr::Cos(a) => unary(a, Op::Cos, ops),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
            let da = emit(a, ops);
            let db = emit(b, ops);
            ops.push(match e {
                Expr::Add(..) => Op::Add,
                Expr::Sub(..) => Op::Sub,
                Expr::Mul(..) => Op::Mul,
                _ => Op::Div,
            });
            da.max(db + 1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn matches_tree_evaluation() {
        let e = parse("exp(conj(z1))*z2 - sin(z1/z2)^3 + cos(conj(z2)) / (1 + z1)", 2).unwrap();
        let p = e.compile();
        let pt = [C64::new(0.3, -0.7), C64::new(-0.2, 0.5)];
        assert!((p.eval(&pt) - e.eval(&pt).unwrap()).norm() < 1e-15);
    }

    #[test]
    fn deep_expression_uses_heap_stack() {
        // Right-nested sums need one stack slot per level.
        let mut e = Expr::var(0);
        for _ in 0..40 {
            e = Expr::var(0).add(e.conj());
        }
        let p = e.compile();
        let z = [C64::new(0.1, 0.2)];
        assert!((p.eval(&z) - e.eval(&z).unwrap()).norm() < 1e-13);
    }
}
