//! Per-point product quadrature over several factors of `Ω`.
//!
//! Solid factors are integrated on polar fans centered at the evaluation
//! point. When two or more solid factors meet at a joint singularity the
//! radial box is split into pyramids (Duffy's transformation), which turns the
//! corner singularity of the kernels into a smooth integrand. Boundary
//! factors use a uniform rule refined by the distance to the boundary.

use std::f64::consts::PI;

use serde::Serialize;

use crate::cauchy1d::{near_singular, CauchyRule, INTERIOR_MARGIN};
use crate::exec::{chunked_sum, pairwise_slice};
use crate::expr::Program;
use crate::forms::ProductDomain;
use crate::gauss;
use crate::geometry::{area_rule, boundary_rule, boundary_rule_about, AreaRule, BoundaryRule, PolarFan};
use crate::{Error, Result, C64};

/// Node counts for one factor: radial and angular counts for solid
/// integrals, and the base node count for boundary integrals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RuleSizes {
    pub nr: usize,
    pub ntheta: usize,
    pub nboundary: usize,
}

impl RuleSizes {
    pub fn new(nr: usize, ntheta: usize) -> Self {
        RuleSizes {
            nr,
            ntheta,
            nboundary: 4 * ntheta,
        }
    }

    pub fn doubled(self) -> Self {
        RuleSizes {
            nr: 2 * self.nr,
            ntheta: 2 * self.ntheta,
            nboundary: 2 * self.nboundary,
        }
    }

    /// Defaults by arity: `(64, 64)` up to two factors, `(16, 24)` for three, `(8, 12)` beyond.
    pub fn default_for(n: usize) -> Self {
        match n {
            0..=2 => Self::new(64, 64),
            3 => Self::new(16, 24),
            _ => Self::new(8, 12),
        }
    }

    fn validate(&self, factor: usize) -> Result<()> {
        if self.nr < 2 || self.ntheta < 4 || self.nboundary < 8 {
            return Err(Error::validation(format!(
                "factor {}: rule sizes (nr={}, ntheta={}, nboundary={}) below minimum (2, 4, 8)",
                factor + 1,
                self.nr,
                self.ntheta,
                self.nboundary
            )));
        }
        Ok(())
    }
}

/// Rule sizes and center rules for every factor of a product domain.
#[derive(Clone, Debug)]
pub struct QuadratureSuite {
    omega: ProductDomain,
    sizes: Vec<RuleSizes>,
    area: Vec<AreaRule>,
    boundary: Vec<BoundaryRule>,
}

impl QuadratureSuite {
    pub fn new(omega: ProductDomain, sizes: Vec<RuleSizes>) -> Result<Self> {
        if sizes.len() != omega.arity() {
            return Err(Error::validation(format!(
                "{} rule sizes given for {} factors",
                sizes.len(),
                omega.arity()
            )));
        }
        let mut area = Vec::with_capacity(sizes.len());
        let mut boundary = Vec::with_capacity(sizes.len());
        for (j, (d, s)) in omega.factors().iter().zip(&sizes).enumerate() {
            s.validate(j)?;
            area.push(area_rule(d, s.nr, s.ntheta)?);
            boundary.push(boundary_rule(d, s.nboundary)?);
        }
        Ok(QuadratureSuite {
            omega,
            sizes,
            area,
            boundary,
        })
    }

    pub fn uniform(omega: ProductDomain, sizes: RuleSizes) -> Result<Self> {
        let n = omega.arity();
        Self::new(omega, vec![sizes; n])
    }

    pub fn with_defaults(omega: ProductDomain) -> Result<Self> {
        let s = RuleSizes::default_for(omega.arity());
        Self::uniform(omega, s)
    }

    /// Same domain with every node count doubled.
    pub fn doubled(&self) -> Result<Self> {
        Self::new(self.omega.clone(), self.sizes.iter().map(|s| s.doubled()).collect())
    }

    pub fn omega(&self) -> &ProductDomain {
        &self.omega
    }

    pub fn arity(&self) -> usize {
        self.omega.arity()
    }

    pub fn sizes(&self) -> &[RuleSizes] {
        &self.sizes
    }

    /// Center-polar area rule of factor `j`.
    pub fn area_rule(&self, j: usize) -> &AreaRule {
        &self.area[j]
    }

    /// Uniform boundary rule of factor `j`.
    pub fn boundary_rule(&self, j: usize) -> &BoundaryRule {
        &self.boundary[j]
    }

    /// Checks that `z` has the right arity and that the listed coordinates
    /// keep the interior margin.
    pub fn check_point(&self, z: &[C64], vars: &[usize]) -> Result<()> {
        if z.len() != self.arity() {
            return Err(Error::validation(format!(
                "point has {} coordinates, domain has arity {}",
                z.len(),
                self.arity()
            )));
        }
        for &v in vars {
            let w = z[v];
            if !(w.re.is_finite() && w.im.is_finite()) {
                return Err(Error::validation(format!("coordinate z{} is not finite", v + 1)));
            }
            if !self.omega.factor(v).contains(w, INTERIOR_MARGIN) {
                return Err(near_singular(v, w, INTERIOR_MARGIN));
            }
        }
        Ok(())
    }

    /// Rule for the slice transform in variable `j` at `z_j`.
    pub fn cauchy_rule(&self, j: usize, zj: C64) -> Result<CauchyRule> {
        let s = self.sizes[j];
        CauchyRule::about(self.omega.factor(j), zj, s.nr, s.ntheta).map_err(|e| match e {
            Error::NearSingular { point, margin, .. } => Error::NearSingular { factor: j, point, margin },
            e => e,
        })
    }

    /// `T^{v₁}⋯T^{v_s} g (z)`, nesting with `order[0]` outermost.
    pub fn iterated_cauchy(&self, z: &[C64], order: &[usize], g: &Program) -> Result<C64> {
        self.check_point(z, order)?;
        let mut seen = vec![false; self.arity()];
        for &v in order {
            if v >= self.arity() || std::mem::replace(&mut seen[v], true) {
                return Err(Error::validation(format!("invalid slice order {order:?}")));
            }
        }
        if g.min_arity() > self.arity() {
            return Err(Error::validation("integrand arity exceeds the domain arity"));
        }
        if order.is_empty() {
            return finite(g.eval(z));
        }
        let rules = order
            .iter()
            .map(|&v| self.cauchy_rule(v, z[v]))
            .collect::<Result<Vec<_>>>()?;
        if let Some(c) = g.as_constant() {
            // Tensor sum of a constant factorizes.
            let mut acc = c;
            for r in &rules {
                acc *= pairwise_slice(&r.weights);
            }
            return finite(acc);
        }
        let first = &rules[0];
        let total = chunked_sum(
            first.len(),
            || (z.to_vec(), vec![Vec::new(); rules.len()]),
            |(vars, bufs), i| {
                vars[order[0]] = first.nodes[i];
                first.weights[i] * nested(&rules[1..], &order[1..], vars, g, &mut bufs[1..])
            },
        );
        finite(total)
    }

    /// `∫ F(ζ) Π_{v∈solid} dζ̄_v∧dζ_v Π_{t∈boundary} dζ_t` with the remaining
    /// coordinates frozen at `z`. The integrand receives the full coordinate
    /// vector and may be singular where the solid coordinates meet `z`.
    pub fn mixed_integral<F>(&self, z: &[C64], solid: &[usize], boundary: &[usize], integrand: F) -> Result<C64>
    where
        F: Fn(&[C64]) -> C64 + Sync,
    {
        let all: Vec<usize> = solid.iter().chain(boundary).copied().collect();
        self.check_point(z, &all)?;
        let mut seen = vec![false; self.arity()];
        for &v in &all {
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::validation(format!("variable z{} integrated twice", v + 1)));
            }
        }
        let solids = solid
            .iter()
            .map(|&v| {
                let fan = PolarFan::new(self.omega.factor(v), z[v], self.sizes[v].ntheta)?;
                Ok(SolidAxis { var: v, fan })
            })
            .collect::<Result<Vec<_>>>()?;
        let bounds = boundary
            .iter()
            .map(|&v| {
                let rule = boundary_rule_about(self.omega.factor(v), z[v], self.sizes[v].nboundary)?;
                Ok(BoundaryAxis { var: v, rule })
            })
            .collect::<Result<Vec<_>>>()?;
        let nr = solid.iter().map(|&v| self.sizes[v].nr).max().unwrap_or(1);
        let duffy = DuffyRule::new(solid.len(), nr);

        let mut radix: Vec<usize> = bounds.iter().map(|b| b.rule.len()).collect();
        radix.extend(solids.iter().map(|s| s.fan.rays.len()));
        let outer: usize = radix.iter().product();
        let q = solids.len();
        let solid_scale = solids
            .iter()
            .fold(C64::new(1.0, 0.0), |acc, s| acc * C64::new(0.0, 2.0) * s.fan.dphi);

        let total = chunked_sum(
            outer,
            || OuterScratch {
                vars: z.to_vec(),
                digits: vec![0; radix.len()],
                buf: Vec::new(),
                iv: vec![0; q],
            },
            |sc, o| {
                let mut rest = o;
                for (d, r) in sc.digits.iter_mut().zip(&radix).rev() {
                    *d = rest % r;
                    rest /= r;
                }
                let mut weight = solid_scale;
                for (b, &j) in bounds.iter().zip(&sc.digits) {
                    sc.vars[b.var] = b.rule.nodes[j];
                    weight *= b.rule.tangents[j];
                }
                let rays: Vec<&crate::geometry::Ray> = solids
                    .iter()
                    .zip(&sc.digits[bounds.len()..])
                    .map(|(s, &j)| &s.fan.rays[j])
                    .collect();
                sc.buf.clear();
                sc.iv.iter_mut().for_each(|x| *x = 0);
                loop {
                    let mut t0 = [0.0f64; MAX_SOLID];
                    let mut len = [0.0f64; MAX_SOLID];
                    for (a, ray) in rays.iter().enumerate() {
                        let (lo, hi) = ray.intervals[sc.iv[a]];
                        t0[a] = lo;
                        len[a] = hi - lo;
                    }
                    for (x, w) in duffy.iter() {
                        let mut wt = w;
                        for a in 0..q {
                            let rho = t0[a] + len[a] * x[a];
                            sc.vars[solids[a].var] = z[solids[a].var] + rays[a].dir * rho;
                            wt *= len[a] * rho;
                        }
                        sc.buf.push(integrand(&sc.vars) * wt);
                    }
                    // Advance the interval odometer.
                    let mut a = 0;
                    while a < q {
                        sc.iv[a] += 1;
                        if sc.iv[a] < rays[a].intervals.len() {
                            break;
                        }
                        sc.iv[a] = 0;
                        a += 1;
                    }
                    if a == q {
                        break;
                    }
                }
                weight * pairwise_slice(&sc.buf)
            },
        );
        finite(total)
    }
}

/// Most solid factors a mixed integral may couple.
pub const MAX_SOLID: usize = 8;

struct SolidAxis {
    var: usize,
    fan: PolarFan,
}

struct BoundaryAxis {
    var: usize,
    rule: BoundaryRule,
}

struct OuterScratch {
    vars: Vec<C64>,
    digits: Vec<usize>,
    buf: Vec<C64>,
    iv: Vec<usize>,
}

fn finite(v: C64) -> Result<C64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::numerical(format!("quadrature produced {v}")))
    }
}

fn nested(rules: &[CauchyRule], order: &[usize], vars: &mut [C64], g: &Program, bufs: &mut [Vec<C64>]) -> C64 {
    if rules.is_empty() {
        return g.eval(vars);
    }
    let (buf, rest) = bufs.split_first_mut().unwrap();
    let mut local = std::mem::take(buf);
    local.clear();
    let r = &rules[0];
    for i in 0..r.len() {
        vars[order[0]] = r.nodes[i];
        local.push(r.weights[i] * nested(&rules[1..], &order[1..], vars, g, rest));
    }
    let s = pairwise_slice(&local);
    *buf = local;
    s
}

/// Tensor Gauss–Legendre rule on `[0,1]^q` split into `q` pyramids
/// `{x : x_p = max_i x_i}`, each mapped from the unit cube by
/// `x_p = u`, `x_i = u·v_i` with Jacobian `u^{q−1}`.
#[derive(Clone, Debug)]
pub struct DuffyRule {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl DuffyRule {
    pub fn new(dim: usize, n: usize) -> Self {
        if dim == 0 {
            return DuffyRule {
                dim,
                points: Vec::new(),
                weights: vec![1.0],
            };
        }
        assert!(dim <= MAX_SOLID, "at most {MAX_SOLID} coupled solid factors");
        let (x, w) = gauss::legendre_unit(n);
        let cube = n.pow(dim as u32 - 1);
        let mut points = Vec::with_capacity(dim * dim * n * cube);
        let mut weights = Vec::with_capacity(dim * n * cube);
        for p in 0..dim {
            for (u, wu) in x.iter().zip(&w) {
                for c in 0..cube {
                    let mut rest = c;
                    let mut wt = wu * u.powi(dim as i32 - 1);
                    let mut vs = [0.0f64; MAX_SOLID];
                    for slot in vs.iter_mut().take(dim - 1) {
                        let j = rest % n;
                        rest /= n;
                        *slot = x[j];
                        wt *= w[j];
                    }
                    let mut k = 0;
                    for i in 0..dim {
                        if i == p {
                            points.push(*u);
                        } else {
                            points.push(u * vs[k]);
                            k += 1;
                        }
                    }
                    weights.push(wt);
                }
            }
        }
        DuffyRule { dim, points, weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        let d = self.dim;
        self.weights
            .iter()
            .enumerate()
            .map(move |(i, &w)| (&self.points[i * d..(i + 1) * d], w))
    }
}

/// Sum of `Π weights` over a [`DuffyRule`]; equals the cube volume 1.
pub fn duffy_volume(rule: &DuffyRule) -> f64 {
    rule.iter().map(|(_, w)| w).sum()
}

/// Cost in integrand evaluations of a mixed integral, for cost guards and reports.
pub fn mixed_cost(suite: &QuadratureSuite, solid: &[usize], boundary: &[usize]) -> f64 {
    let nr = solid.iter().map(|&v| suite.sizes[v].nr).max().unwrap_or(1) as f64;
    let q = solid.len() as i32;
    let mut cost = if q == 0 { 1.0 } else { q as f64 * nr.powi(q) };
    for &v in solid {
        cost *= suite.sizes[v].ntheta as f64;
    }
    for &v in boundary {
        cost *= suite.sizes[v].nboundary as f64;
    }
    cost
}

/// `(−2πi)^s`.
pub fn minus_two_pi_i_pow(s: usize) -> C64 {
    C64::new(0.0, -2.0 * PI).powi(s as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Expr};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn bidisk(sizes: RuleSizes) -> QuadratureSuite {
        QuadratureSuite::uniform(ProductDomain::unit_polydisk(2).unwrap(), sizes).unwrap()
    }

    #[test]
    fn duffy_rule_integrates_polynomials() {
        for dim in 1..=3 {
            let r = DuffyRule::new(dim, 6);
            assert!((duffy_volume(&r) - 1.0).abs() < 1e-13);
            // ∫ x₁²x_d over the cube = 1/3 · 1/2 (or 1/4 when dim = 1).
            let want = if dim == 1 { 0.25 } else { 1.0 / 6.0 };
            let got: f64 = r.iter().map(|(x, w)| w * x[0] * x[0] * x[dim - 1]).sum();
            assert!((got - want).abs() < 1e-13, "dim {dim}: {got}");
        }
    }

    #[test]
    fn duffy_handles_corner_singularity() {
        // ∫∫_{[0,1]²} 1/√(x²+y²) = 2·asinh(1).
        let r = DuffyRule::new(2, 12);
        let got: f64 = r.iter().map(|(x, w)| w / (x[0] * x[0] + x[1] * x[1]).sqrt()).sum();
        assert!((got - 2.0 * 1f64.asinh()).abs() < 1e-13);
    }

    #[test]
    fn iterated_constant_and_separable() {
        let s = bidisk(RuleSizes::new(16, 32));
        let z = [c(0.3, 0.1), c(-0.2, 0.4)];
        let one = Expr::one().compile();
        let v = s.iterated_cauchy(&z, &[0, 1], &one).unwrap();
        assert!((v - z[0].conj() * z[1].conj()).norm() < 1e-13);
        let g = parse("conj(z1) + z2*z1", 2).unwrap().compile();
        let a = s.iterated_cauchy(&z, &[0, 1], &g).unwrap();
        let b = s.iterated_cauchy(&z, &[1, 0], &g).unwrap();
        assert!((a - b).norm() < 1e-13 * a.norm().max(1.0));
    }

    #[test]
    fn mixed_integral_single_solid_is_area() {
        let s = bidisk(RuleSizes::new(16, 32));
        let z = [c(0.5, 0.2), c(0.0, 0.0)];
        let v = s.mixed_integral(&z, &[0], &[], |_| c(1.0, 0.0)).unwrap();
        assert!((v - c(0.0, 2.0 * PI)).norm() < 1e-12);
        let v = s.mixed_integral(&z, &[], &[1], |p| p[1].conj()).unwrap();
        assert!((v - c(0.0, 2.0 * PI)).norm() < 1e-12);
    }

    #[test]
    fn mixed_integral_joint_singularity() {
        // ∫∫ dA₁dA₂ / (|a₁|²+|a₂|²) over the bidisk at z = 0 equals
        // (2π)²∫₀¹∫₀¹ r s /(r²+s²) dr ds = 2π² ln 2, times (2i)².
        let s = bidisk(RuleSizes::new(24, 16));
        let z = [c(0.0, 0.0), c(0.0, 0.0)];
        let v = s
            .mixed_integral(&z, &[0, 1], &[], |p| c(1.0 / (p[0].norm_sqr() + p[1].norm_sqr()), 0.0))
            .unwrap();
        let want = c(-8.0 * PI * PI * 2f64.ln(), 0.0);
        assert!((v - want).norm() < 1e-10 * want.norm(), "{v} vs {want}");
    }

    #[test]
    fn near_boundary_point_is_rejected() {
        let s = bidisk(RuleSizes::new(8, 8));
        let z = [c(0.9999, 0.0), c(0.0, 0.0)];
        let g = Expr::one().compile();
        match s.iterated_cauchy(&z, &[0], &g) {
            Err(Error::NearSingular { factor, .. }) => assert_eq!(factor, 0),
            other => panic!("{other:?}"),
        }
    }
}
