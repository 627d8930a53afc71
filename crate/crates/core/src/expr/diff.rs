//! Wirtinger derivatives.
//!
//! `∂/∂z̄_j` and `∂/∂z_j` are computed together through the duality
//! `∂̄_j conj(e) = conj(∂_j e)`. Every non-conjugation node is holomorphic in
//! its arguments, so the chain rule is one-sided.

use super::Expr;

#[derive(Clone, Copy)]
enum Wrt {
    Z(usize),
    ZBar(usize),
}

impl Wrt {
    fn dual(self) -> Self {
        match self {
            Wrt::Z(j) => Wrt::ZBar(j),
            Wrt::ZBar(j) => Wrt::Z(j),
        }
    }
}

fn derive(e: &Expr, w: Wrt) -> Expr {
    match e {
        Expr::Const(_) => Expr::zero(),
        Expr::Var(k) => match w {
            Wrt::Z(j) if j == *k => Expr::one(),
            _ => Expr::zero(),
        },
        Expr::Conj(a) => derive(a, w.dual()).conj(),
        Expr::Neg(a) => derive(a, w).neg(),
        Expr::Add(a, b) => derive(a, w).add(derive(b, w)),
        Expr::Sub(a, b) => derive(a, w).sub(derive(b, w)),
        Expr::Mul(a, b) => {
            let da = derive(a, w);
            let db = derive(b, w);
            da.mul((**b).clone()).add((**a).clone().mul(db))
        }
        Expr::Div(a, b) => {
            let da = derive(a, w);
            let db = derive(b, w);
            if db.is_zero() {
                return da.div((**b).clone());
            }
            let num = da.mul((**b).clone()).sub((**a).clone().mul(db));
            num.div((**b).clone().pow(2))
        }
        Expr::Pow(a, n) => {
            let da = derive(a, w);
            if da.is_zero() {
                return Expr::zero();
            }
            Expr::real(*n as f64).mul((**a).clone().pow(n - 1)).mul(da)
        }
        Expr::Exp(a) => chain(e.clone(), derive(a, w)),
        Expr::Sin(a) => chain((**a).clone().cos(), derive(a, w)),
        Expr::Cos(a) => chain((**a).clone().sin().neg(), derive(a, w)),
    }
}

fn chain(outer: Expr, inner: Expr) -> Expr {
    if inner.is_zero() {
        Expr::zero()
    } else {
        outer.mul(inner)
    }
}

impl Expr {
    /// `∂/∂z̄_j` with `j` 0-based.
    pub fn d_bar(&self, j: usize) -> Expr {
        derive(self, Wrt::ZBar(j))
    }

    /// `∂/∂z_j` with `j` 0-based.
    pub fn d_z(&self, j: usize) -> Expr {
        derive(self, Wrt::Z(j))
    }

    /// `∂^m/∂z̄_{j₁}…∂z̄_{j_m}` applied in the given order.
    pub fn d_bar_stack(&self, indices: &[usize]) -> Expr {
        indices.iter().fold(self.clone(), |e, &j| e.d_bar(j))
    }
}
