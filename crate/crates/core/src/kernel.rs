//! Algebraic layer of the solution formulas.
//!
//! With offsets `aₗ = ζₗ − zₗ` over an index set `I = (i₁ < … < i_s)`:
//!
//! * `G = Σₖ Πₗ≠ₖ |aₗ|²`,
//! * `1/(a₁⋯a_s) = Σₖ Πₗ≠ₖ conj(aₗ) / (aₖ·G)`,
//! * `g^{k,I} = Πₗ≠ₖ conj(aₗ) / (aₖ·G)` and its `ζ̄_J` derivatives for `J ⊆ I∖{iₖ}`,
//! * integer exponents `k, k₁…kₙ` for the bound `G^k ≥ Π bᵥ^{kᵥ}`.
//!
//! All variable indices are 0-based; the distinguished index `k` is a
//! position within `I`.

use num_rational::Ratio;
use serde::Serialize;

use crate::expr::Expr;
use crate::{Error, Result, C64};

/// Strictly increasing, non-empty list of 0-based variable indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::validation("index set must be non-empty"));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::validation(format!(
                "index set {indices:?} must be strictly increasing"
            )));
        }
        Ok(IndexSet(indices))
    }

    /// Validates against an arity.
    pub fn within(indices: Vec<usize>, n: usize) -> Result<Self> {
        let set = Self::new(indices)?;
        if set.largest() >= n {
            return Err(Error::validation(format!(
                "index {} out of range for arity {n}",
                set.largest() + 1
            )));
        }
        Ok(set)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn largest(&self) -> usize {
        *self.0.last().unwrap()
    }

    /// Position of variable `v` in the set.
    pub fn position(&self, v: usize) -> Option<usize> {
        self.0.iter().position(|&i| i == v)
    }

    /// All `s`-element subsets of `{0..n}`, lexicographically.
    pub fn all_of_size(n: usize, s: usize) -> Vec<IndexSet> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(s);
        fn rec(start: usize, n: usize, s: usize, cur: &mut Vec<usize>, out: &mut Vec<IndexSet>) {
            if cur.len() == s {
                out.push(IndexSet(cur.clone()));
                return;
            }
            for v in start..n {
                if n - v < s - cur.len() {
                    break;
                }
                cur.push(v);
                rec(v + 1, n, s, cur, out);
                cur.pop();
            }
        }
        if s >= 1 && s <= n {
            rec(0, n, s, &mut cur, &mut out);
        }
        out
    }

    /// 1-based label such as `"1,3"`.
    pub fn label(&self) -> String {
        self.0
            .iter()
            .map(|i| (i + 1).to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// `G` without validation; `a` may be empty (returns 0).
pub(crate) fn big_g_unchecked(a: &[C64]) -> f64 {
    let m = a.len();
    if m == 1 {
        return 1.0;
    }
    let mut prefix = 1.0;
    let mut suffix = vec![1.0; m + 1];
    for i in (0..m).rev() {
        suffix[i] = suffix[i + 1] * a[i].norm_sqr();
    }
    let mut g = 0.0;
    for i in 0..m {
        g += prefix * suffix[i + 1];
        prefix *= a[i].norm_sqr();
    }
    g
}

pub fn big_g(a: &[C64]) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::validation("G needs at least one argument"));
    }
    Ok(big_g_unchecked(a))
}

/// Terms `Πₗ≠ₖ conj(aₗ) / (aₖ·G)`, which sum to `1/(a₁⋯aₘ)`.
pub fn decompose_inverse_product(a: &[C64]) -> Result<Vec<C64>> {
    if a.is_empty() {
        return Err(Error::validation("decomposition needs at least one factor"));
    }
    if let Some(i) = a.iter().position(|x| *x == C64::new(0.0, 0.0)) {
        return Err(Error::validation(format!("factor {} is zero", i + 1)));
    }
    let m = a.len();
    let g = big_g_unchecked(a);
    let mut suffix = vec![C64::new(1.0, 0.0); m + 1];
    for i in (0..m).rev() {
        suffix[i] = suffix[i + 1] * a[i].conj();
    }
    let mut prefix = C64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        out.push(prefix * suffix[i + 1] / (a[i] * g));
        prefix *= a[i].conj();
    }
    Ok(out)
}

fn offsets(zeta: &[C64], z: &[C64], set: &IndexSet) -> Result<Vec<C64>> {
    if zeta.len() != z.len() {
        return Err(Error::validation("ζ and z must have the same arity"));
    }
    if set.largest() >= z.len() {
        return Err(Error::validation(format!(
            "index set ({}) exceeds arity {}",
            set.label(),
            z.len()
        )));
    }
    Ok(set.indices().iter().map(|&i| zeta[i] - z[i]).collect())
}

/// `g^{k,I}(ζ, z)` with `k` a position in `I`.
pub fn kernel_g(zeta: &[C64], z: &[C64], k: usize, set: &IndexSet) -> Result<C64> {
    kernel_g_derivative(zeta, z, set, k, &[])
}

/// `∂^m g^{k,I}/∂ζ̄_{j₁}…∂ζ̄_{j_m}` for the variables `J` (0-based, not
/// containing `I[k]`).
pub fn kernel_g_derivative(zeta: &[C64], z: &[C64], set: &IndexSet, k: usize, j: &[usize]) -> Result<C64> {
    if k >= set.len() {
        return Err(Error::validation(format!(
            "distinguished position {k} outside index set ({})",
            set.label()
        )));
    }
    let mut mask = 0u32;
    for &v in j {
        let Some(p) = set.position(v) else {
            return Err(Error::validation(format!(
                "derivative variable {} not in index set ({})",
                v + 1,
                set.label()
            )));
        };
        if p == k {
            return Err(Error::validation("derivative in the distinguished variable"));
        }
        if mask & (1 << p) != 0 {
            return Err(Error::validation("repeated derivative variable"));
        }
        mask |= 1 << p;
    }
    let a = offsets(zeta, z, set)?;
    let g = big_g_unchecked(&a);
    if !(g > 0.0) || (j.is_empty() && a[k] == C64::new(0.0, 0.0)) {
        return Err(Error::numerical(format!(
            "singular kernel configuration at offsets {a:?}"
        )));
    }
    let v = kernel_derivative(&a, k, mask, g);
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::numerical(format!("kernel derivative overflow at offsets {a:?}")))
    }
}

/// Closed form of the kernel derivative from offsets, with `J` given as a
/// bitmask over positions and `G` precomputed.
#[inline]
pub(crate) fn kernel_derivative(a: &[C64], k: usize, jmask: u32, g: f64) -> C64 {
    let m = jmask.count_ones() as i32;
    if m == 0 {
        let mut num = C64::new(1.0, 0.0);
        for (l, al) in a.iter().enumerate() {
            if l != k {
                num *= al.conj();
            }
        }
        return num / (a[k] * g);
    }
    let mut num = C64::new(factorial(m as u32), 0.0);
    for (l, al) in a.iter().enumerate() {
        let r2 = al.norm_sqr();
        if l == k {
            num *= al.conj() * r2.powi(m - 1);
        } else if jmask & (1 << l) != 0 {
            num *= r2.powi(m - 1);
        } else {
            num *= al.conj() * r2.powi(m);
        }
    }
    num / g.powi(m + 1)
}

pub(crate) fn factorial(m: u32) -> f64 {
    (1..=m).map(f64::from).product()
}

/// Integers `(k, k₁…kₙ)` with `Σ kⱼ = k` used to bound `G^{m+1}` from below.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExponentChoice {
    pub n: usize,
    pub m: usize,
    pub k: u64,
    pub parts: Vec<u64>,
}

impl ExponentChoice {
    /// The inequality system, in integer arithmetic:
    /// `kⱼ(m+1) > k` for `j ≤ m`, `kⱼ > 0` for `m < j < n`,
    /// `2(m+1)kₙ > k` and `Σ kⱼ = k`.
    pub fn satisfies_system(&self) -> bool {
        let (n, m, k) = (self.n, self.m as u64, self.k);
        if self.parts.len() != n || n < 2 || self.m >= n {
            return false;
        }
        let sum: u64 = self.parts.iter().sum();
        sum == k
            && self.parts[..self.m].iter().all(|&kj| kj * (m + 1) > k)
            && self.parts[self.m..n - 1].iter().all(|&kj| kj > 0)
            && 2 * (m + 1) * self.parts[n - 1] > k
    }

    /// Exponents `k_v(m+1)/k` applied to each term `b_v` of `G`.
    pub fn denominator_powers(&self) -> Vec<Ratio<i64>> {
        let m1 = self.m as i64 + 1;
        self.parts
            .iter()
            .map(|&kv| Ratio::new(kv as i64 * m1, self.k as i64))
            .collect()
    }
}

/// `k = 4(n−1)(m+1)`, `kⱼ = 4(n−1)+1` for `j ≤ m`, `kⱼ = 1` for `m < j < n`,
/// `kₙ = k − Σ`.
pub fn exponent_choice(n: usize, m: usize) -> Result<ExponentChoice> {
    if n < 2 || m >= n {
        return Err(Error::validation(format!(
            "exponent choice needs n >= 2 and 0 <= m <= n-1, got n={n}, m={m}"
        )));
    }
    let nn = n as u64;
    let k = 4 * (nn - 1) * (m as u64 + 1);
    let mut parts = vec![4 * (nn - 1) + 1; m];
    parts.extend(std::iter::repeat_n(1, n - 1 - m));
    let used: u64 = parts.iter().sum();
    parts.push(k - used);
    let choice = ExponentChoice { n, m, k, parts };
    if !choice.satisfies_system() {
        return Err(Error::numerical(format!(
            "exponent choice {choice:?} violates the bound system"
        )));
    }
    Ok(choice)
}

/// Both sides of `(Σ bⱼ)^k ≥ Π bⱼ^{kⱼ}`.
pub fn weighted_bound(b: &[f64], parts: &[u64], k: u64) -> Result<(f64, f64)> {
    if b.len() != parts.len() {
        return Err(Error::validation("weights and parts differ in length"));
    }
    if parts.iter().sum::<u64>() != k {
        return Err(Error::validation(format!(
            "parts {parts:?} do not sum to k={k}"
        )));
    }
    if b.iter().any(|x| !(*x >= 0.0)) {
        return Err(Error::validation("weights must be non-negative"));
    }
    let sum: f64 = b.iter().sum();
    let lhs = sum.powf(k as f64);
    let rhs = b.iter().zip(parts).map(|(x, &p)| x.powf(p as f64)).product();
    Ok((lhs, rhs))
}

/// Role of a variable in a kernel derivative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    /// Differentiated, integrated over the solid domain.
    Derivative,
    /// Integrated over the boundary curve.
    Boundary,
    /// The distinguished variable, integrated over the solid domain.
    Distinguished,
}

/// Power of `|aᵥ|` in the numerator of the derivative closed form.
fn numerator_power(role: Role, m: i64) -> i64 {
    match role {
        Role::Derivative => 2 * (m - 1),
        Role::Boundary => 2 * m + 1,
        Role::Distinguished => 2 * m - 1,
    }
}

/// Canonical roles: the first `m` variables are differentiated, the last is
/// distinguished, the rest are boundary variables.
pub fn canonical_roles(n: usize, m: usize) -> Vec<Role> {
    (0..n)
        .map(|v| {
            if v == n - 1 {
                Role::Distinguished
            } else if v < m {
                Role::Derivative
            } else {
                Role::Boundary
            }
        })
        .collect()
}

/// Singularity exponent `αᵥ` of `H_m ~ Π |aᵥ|^{−αᵥ}` for every variable,
/// in exact rationals. Integrability needs `αᵥ < 2` on solid factors and
/// `αᵥ < 1` on boundary factors.
pub fn integrability_exponents(choice: &ExponentChoice) -> Vec<(Role, Ratio<i64>)> {
    let m = choice.m as i64;
    let k = choice.k as i64;
    canonical_roles(choice.n, choice.m)
        .into_iter()
        .zip(&choice.parts)
        .map(|(role, &kv)| {
            let denom = Ratio::new(2 * (m + 1) * (k - kv as i64), k);
            (role, denom - numerator_power(role, m))
        })
        .collect()
}

/// True when every exponent from [`integrability_exponents`] is integrable.
pub fn exponents_integrable(choice: &ExponentChoice) -> bool {
    integrability_exponents(choice).iter().all(|(role, alpha)| {
        let limit = if *role == Role::Boundary { 1 } else { 2 };
        *alpha < Ratio::from_integer(limit)
    })
}

/// `H_m` for the canonical roles, with `|∂^m g| ≤ m!·H_m`.
pub fn hm_bound(zeta: &[C64], z: &[C64], m: usize, choice: &ExponentChoice) -> Result<f64> {
    let n = choice.n;
    if zeta.len() != n || z.len() != n {
        return Err(Error::validation(format!(
            "configuration arity differs from exponent choice n={n}"
        )));
    }
    if choice.m != m {
        return Err(Error::validation(format!(
            "exponent choice was built for m={}, not m={m}",
            choice.m
        )));
    }
    let a: Vec<C64> = zeta.iter().zip(z).map(|(x, y)| x - y).collect();
    let r2: Vec<f64> = a.iter().map(|x| x.norm_sqr()).collect();
    if r2.iter().filter(|x| **x == 0.0).count() > 0 {
        return Err(Error::numerical("H_m is singular when some offset vanishes"));
    }
    let mi = m as i64;
    let roles = canonical_roles(n, m);
    let mut num = 1.0;
    for (role, x) in roles.iter().zip(&r2) {
        num *= x.powf(numerator_power(*role, mi) as f64 / 2.0);
    }
    let total_log: f64 = r2.iter().map(|x| x.ln()).sum();
    let mut log_den = 0.0;
    for (v, p) in choice.denominator_powers().iter().enumerate() {
        let log_bv = total_log - r2[v].ln();
        log_den += (*p.numer() as f64 / *p.denom() as f64) * log_bv;
    }
    let h = num * (-log_den).exp();
    if h.is_finite() {
        Ok(h)
    } else {
        Err(Error::numerical("H_m overflow"))
    }
}

/// `g^{k,I}` as an expression in `ζ` with `z` frozen, for symbolic
/// differentiation.
pub fn kernel_expr(z: &[C64], set: &IndexSet, k: usize) -> Result<Expr> {
    if k >= set.len() || set.largest() >= z.len() {
        return Err(Error::validation(format!(
            "position {k} or index set ({}) does not fit arity {}",
            set.label(),
            z.len()
        )));
    }
    let a: Vec<Expr> = set
        .indices()
        .iter()
        .map(|&v| Expr::var(v).sub(Expr::constant(z[v])))
        .collect();
    let modulus2 = |e: &Expr| e.clone().mul(e.clone().conj());
    let mut g = Expr::zero();
    for skip in 0..a.len() {
        let term = a
            .iter()
            .enumerate()
            .filter(|(l, _)| *l != skip)
            .fold(Expr::one(), |t, (_, al)| t.mul(modulus2(al)));
        g = g.add(term);
    }
    let num = a
        .iter()
        .enumerate()
        .filter(|(l, _)| *l != k)
        .fold(Expr::one(), |t, (_, al)| t.mul(al.clone().conj()));
    Ok(num.div(a[k].clone().mul(g)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn big_g_examples() {
        assert_eq!(big_g(&[c(1.0, 0.0), c(0.0, 1.0)]).unwrap(), 2.0);
        assert_eq!(big_g(&[c(2.0, 0.0)]).unwrap(), 1.0);
        assert_eq!(big_g(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]).unwrap(), 49.0);
        assert!(big_g(&[]).is_err());
    }

    #[test]
    fn decomposition_examples() {
        let t = decompose_inverse_product(&[c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        assert!((t[0] - c(0.0, -0.5)).norm() < 1e-15);
        assert!((t[1] - c(0.0, -0.5)).norm() < 1e-15);
        assert!((t[0] + t[1] - c(0.0, -1.0)).norm() < 1e-15);
        assert_eq!(decompose_inverse_product(&[c(2.0, 0.0)]).unwrap(), vec![c(0.5, 0.0)]);
        assert!(decompose_inverse_product(&[c(1.0, 0.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn kernel_examples() {
        let set = IndexSet::new(vec![0]).unwrap();
        let v = kernel_g(&[c(0.5, 0.5)], &[c(0.0, 0.0)], 0, &set).unwrap();
        assert!((v - 1.0 / c(0.5, 0.5)).norm() < 1e-15);

        let set = IndexSet::new(vec![0, 1]).unwrap();
        let zeta = [c(1.0, 0.0), c(0.0, 1.0)];
        let z = [c(0.0, 0.0); 2];
        assert!((kernel_g(&zeta, &z, 1, &set).unwrap() - c(0.0, -0.5)).norm() < 1e-15);
        let d = kernel_g_derivative(&zeta, &z, &set, 1, &[0]).unwrap();
        assert!((d - c(0.0, -0.25)).norm() < 1e-15);
        assert!(kernel_g_derivative(&zeta, &z, &set, 1, &[1]).is_err());
        assert!(kernel_g(&z, &z, 0, &set).is_err());
    }

    #[test]
    fn three_variable_first_derivative() {
        // ∂/∂ζ̄₁ of g^{3,123} = conj(a₂)|a₂|²conj(a₃)/G².
        let set = IndexSet::new(vec![0, 1, 2]).unwrap();
        let zeta = [c(0.3, -0.4), c(-0.2, 0.7), c(0.9, 0.1)];
        let z = [c(0.1, 0.1), c(0.0, -0.1), c(-0.3, 0.2)];
        let a: Vec<C64> = zeta.iter().zip(&z).map(|(x, y)| x - y).collect();
        let g = big_g(&a).unwrap();
        let want = a[1].conj() * a[1].norm_sqr() * a[2].conj() / (g * g);
        let got = kernel_g_derivative(&zeta, &z, &set, 2, &[0]).unwrap();
        assert!((got - want).norm() < 1e-12 * want.norm());
    }

    #[test]
    fn exponent_instances() {
        let parts = |n, m| exponent_choice(n, m).unwrap();
        assert_eq!((parts(3, 1).k, parts(3, 1).parts), (16, vec![9, 1, 6]));
        assert_eq!((parts(3, 2).k, parts(3, 2).parts), (24, vec![9, 9, 6]));
        assert_eq!((parts(3, 0).k, parts(3, 0).parts), (8, vec![1, 1, 6]));
        assert_eq!((parts(2, 0).k, parts(2, 0).parts), (4, vec![1, 3]));
        assert!(exponent_choice(1, 0).is_err());
        assert!(exponent_choice(3, 3).is_err());
        for n in 2..=12 {
            for m in 0..n {
                let ch = exponent_choice(n, m).unwrap();
                assert!(ch.satisfies_system());
                assert!(exponents_integrable(&ch));
            }
        }
    }

    #[test]
    fn integrability_values() {
        let ch = exponent_choice(3, 1).unwrap();
        let e = integrability_exponents(&ch);
        assert_eq!(e[0], (Role::Derivative, Ratio::new(7, 4)));
        assert_eq!(e[1], (Role::Boundary, Ratio::new(3, 4)));
        assert_eq!(e[2], (Role::Distinguished, Ratio::new(3, 2)));
    }

    #[test]
    fn weighted_bound_examples() {
        assert_eq!(weighted_bound(&[1.0, 1.0], &[2, 1], 3).unwrap(), (8.0, 1.0));
        assert!(weighted_bound(&[1.0, 1.0], &[2, 2], 3).is_err());
        // |ζ−z|² ≥ |a₁|^{4/3}|a₂|^{2/3}: cube of both sides is the k=3 instance.
        let (x, y) = (0.7f64, 1.9f64);
        let (lhs, rhs) = weighted_bound(&[x * x, y * y], &[2, 1], 3).unwrap();
        assert!(lhs >= rhs);
        assert!(x * x + y * y >= x.powf(4.0 / 3.0) * y.powf(2.0 / 3.0));
    }

    #[test]
    fn hm_unit_offsets() {
        for (n, m) in [(2, 0), (2, 1), (3, 1), (4, 2)] {
            let ch = exponent_choice(n, m).unwrap();
            let z = vec![c(0.0, 0.0); n];
            let zeta: Vec<C64> = (0..n).map(|j| C64::from_polar(1.0, j as f64)).collect();
            let h = hm_bound(&zeta, &z, m, &ch).unwrap();
            assert!((h - 1.0).abs() < 1e-12);
            let set = IndexSet::new((0..n).collect()).unwrap();
            let j: Vec<usize> = (0..m).collect();
            let d = kernel_g_derivative(&zeta, &z, &set, n - 1, &j).unwrap();
            assert!(d.norm() <= factorial(m as u32) * h * (1.0 + 1e-12));
        }
    }

    #[test]
    fn subsets_enumeration() {
        let s = IndexSet::all_of_size(3, 2);
        let labels: Vec<String> = s.iter().map(|x| x.label()).collect();
        assert_eq!(labels, vec!["1,2", "1,3", "2,3"]);
        assert!(IndexSet::new(vec![1, 0]).is_err());
        assert!(IndexSet::within(vec![0, 3], 3).is_err());
    }
}
