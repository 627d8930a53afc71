#![allow(dead_code)]

use dbar_core::expr::Expr;
use dbar_core::C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Uniform point in the disk of radius `r`.
pub fn in_disk(rng: &mut ChaCha8Rng, r: f64) -> C64 {
    loop {
        let w = c(rng.random_range(-r..r), rng.random_range(-r..r));
        if w.norm() < r {
            return w;
        }
    }
}

fn small_constant(rng: &mut ChaCha8Rng) -> Expr {
    Expr::constant(c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
}

/// Random expression in `z1..zn` that stays bounded on the unit polydisk:
/// divisions are by `3 + (something of modulus < 1)`, exponentials take
/// bounded arguments.
pub fn random_expr(rng: &mut ChaCha8Rng, n: usize, depth: usize) -> Expr {
    if depth == 0 || rng.random_bool(0.2) {
        return match rng.random_range(0..4) {
            0 => small_constant(rng),
            1 => Expr::var(rng.random_range(0..n)).conj(),
            _ => Expr::var(rng.random_range(0..n)),
        };
    }
    let sub = |rng: &mut ChaCha8Rng| random_expr(rng, n, depth - 1);
    match rng.random_range(0..10) {
        0 | 1 => sub(rng).add(sub(rng)),
        2 => sub(rng).sub(sub(rng)),
        3 | 4 => sub(rng).mul(sub(rng)),
        5 => sub(rng).conj(),
        6 => sub(rng).pow(rng.random_range(2..4)),
        7 => {
            let v = Expr::var(rng.random_range(0..n));
            let w = Expr::var(rng.random_range(0..n)).conj();
            sub(rng).div(Expr::real(3.0).add(v.mul(w)))
        }
        8 => Expr::var(rng.random_range(0..n)).mul(small_constant(rng)).exp().mul(sub(rng)),
        _ => {
            let inner = Expr::var(rng.random_range(0..n)).conj().add(Expr::var(rng.random_range(0..n)));
            if rng.random_bool(0.5) {
                inner.sin().mul(sub(rng))
            } else {
                inner.cos().mul(sub(rng))
            }
        }
    }
}

/// Fourth-order Wirtinger stencil in variable `k`; `bar` selects `∂/∂z̄`.
pub fn fd4(e: &Expr, z: &[C64], k: usize, h: f64, bar: bool) -> C64 {
    let at = |shift: C64| {
        let mut p = z.to_vec();
        p[k] += shift;
        e.eval(&p).unwrap()
    };
    let d = |dir: C64| {
        (8.0 * (at(dir * h) - at(-dir * h)) - (at(dir * 2.0 * h) - at(-dir * 2.0 * h))) / (12.0 * h)
    };
    let dx = d(c(1.0, 0.0));
    let dy = d(c(0.0, 1.0));
    if bar {
        0.5 * (dx + C64::i() * dy)
    } else {
        0.5 * (dx - C64::i() * dy)
    }
}

/// `g^{k,I}` as a symbolic expression in `ζ` with `z` frozen.
pub fn symbolic_kernel(z: &[C64], set: &[usize], k: usize) -> Expr {
    let a: Vec<Expr> = set.iter().map(|&v| Expr::var(v).sub(Expr::constant(z[v]))).collect();
    let mut g = Expr::zero();
    for skip in 0..a.len() {
        let mut term = Expr::one();
        for (l, al) in a.iter().enumerate() {
            if l != skip {
                term = term.mul(al.clone().mul(al.clone().conj()));
            }
        }
        g = g.add(term);
    }
    let mut num = Expr::one();
    for (l, al) in a.iter().enumerate() {
        if l != k {
            num = num.mul(al.clone().conj());
        }
    }
    num.div(a[k].clone().mul(g))
}
