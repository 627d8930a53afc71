//! One-variable solid Cauchy transform
//! `Tf(z) = −(1/2πi)∫_D f(ζ)/(ζ−z) dζ̄∧dζ = −(1/π)∫_D f(ζ)/(ζ−z) dA`
//! and the boundary Cauchy integral `(1/2πi)∮ g(ζ)/(ζ−z) dζ`.

use std::f64::consts::PI;

use crate::exec::pairwise_sum;
use crate::geometry::{local_area_rule, AreaRule, BoundaryRule, StarDomain};
use crate::{Error, Result, C64};

/// Default interior margin for evaluation points.
pub const INTERIOR_MARGIN: f64 = 1e-3;

pub(crate) fn near_singular(factor: usize, z: C64, margin: f64) -> Error {
    Error::NearSingular {
        factor,
        point: z.to_string(),
        margin,
    }
}

fn check_interior(d: &StarDomain, z: C64) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::validation(format!("evaluation point {z} is not finite")));
    }
    if d.contains(z, INTERIOR_MARGIN) {
        Ok(())
    } else {
        Err(near_singular(0, z, INTERIOR_MARGIN))
    }
}

fn finite(v: C64, what: &str) -> Result<C64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::numerical(format!("{what} produced {v}")))
    }
}

/// `(1/2πi)Σ g(ζ)·dζ/(ζ − z)` over `rule`.
pub fn boundary_cauchy(
    d: &StarDomain,
    g: impl Fn(C64) -> C64 + Sync,
    z: C64,
    rule: &BoundaryRule,
) -> Result<C64> {
    check_interior(d, z)?;
    let s = pairwise_sum(rule.len(), |j| g(rule.nodes[j]) * rule.tangents[j] / (rule.nodes[j] - z));
    finite(s / C64::new(0.0, 2.0 * PI), "boundary Cauchy integral")
}

/// `∫_D dζ̄∧dζ/(ζ − z)`, via the Cauchy–Pompeiu formula applied to `conj(ζ)`.
pub fn singular_moment(d: &StarDomain, z: C64, rule: &BoundaryRule) -> Result<C64> {
    let b = boundary_cauchy(d, |w| w.conj(), z, rule)?;
    Ok(C64::new(0.0, 2.0 * PI) * (b - z.conj()))
}

/// Solid transform on a center-polar rule with the kernel singularity
/// subtracted: `−(1/2πi)[Σ (f(ζ)−f(z))·2i·w/(ζ−z) + f(z)·M(z)]`.
///
/// Converges only at second order in the node spacing; see [`cauchy_transform`].
pub fn cauchy_transform_subtracted(
    d: &StarDomain,
    f: impl Fn(C64) -> C64 + Sync,
    z: C64,
    arule: &AreaRule,
    brule: &BoundaryRule,
) -> Result<C64> {
    check_interior(d, z)?;
    let fz = finite(f(z), "integrand")?;
    let moment = singular_moment(d, z, brule)?;
    let two_i = C64::new(0.0, 2.0);
    let s = pairwise_sum(arule.len(), |j| {
        let zeta = arule.nodes[j];
        let diff = zeta - z;
        if diff == C64::new(0.0, 0.0) {
            C64::new(0.0, 0.0)
        } else {
            (f(zeta) - fz) * two_i * arule.weights[j] / diff
        }
    });
    let total = -(s + fz * moment) / C64::new(0.0, 2.0 * PI);
    finite(total, "Cauchy transform")
}

/// Quadrature for `T` at a fixed point `z`: `Tf(z) ≈ Σ weights·f(nodes)`.
///
/// Nodes lie on a polar fan centered at `z` with Gauss–Legendre nodes along
/// each ray, so the polar Jacobian cancels the `1/(ζ − z)` kernel and the
/// integrand seen by the rule is smooth.
#[derive(Clone, Debug)]
pub struct CauchyRule {
    pub point: C64,
    pub nodes: Vec<C64>,
    pub weights: Vec<C64>,
}

impl CauchyRule {
    pub fn about(d: &StarDomain, z: C64, n_rho: usize, n_theta: usize) -> Result<Self> {
        check_interior(d, z)?;
        let local = local_area_rule(d, z, n_rho, n_theta)?;
        let scale = -1.0 / PI;
        Ok(CauchyRule {
            point: z,
            weights: local.over_offset.iter().map(|w| w * scale).collect(),
            nodes: local.nodes,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn apply(&self, f: impl Fn(C64) -> C64 + Sync) -> Result<C64> {
        let s = pairwise_sum(self.len(), |j| self.weights[j] * f(self.nodes[j]));
        finite(s, "Cauchy transform")
    }
}

/// `Tf(z)` with `n_rho × n_theta` nodes on the polar fan about `z`.
pub fn cauchy_transform(
    d: &StarDomain,
    f: impl Fn(C64) -> C64 + Sync,
    z: C64,
    n_rho: usize,
    n_theta: usize,
) -> Result<C64> {
    CauchyRule::about(d, z, n_rho, n_theta)?.apply(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{area_rule, boundary_rule};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn unit() -> StarDomain {
        StarDomain::disk(c(0.0, 0.0), 1.0).unwrap()
    }

    #[test]
    fn boundary_cauchy_oracles() {
        let d = unit();
        let r = boundary_rule(&d, 256).unwrap();
        let v = boundary_cauchy(&d, |_| c(1.0, 0.0), c(0.3, 0.1), &r).unwrap();
        assert!((v - 1.0).norm() < 1e-8);
        let v = boundary_cauchy(&d, |w| w, c(0.5, 0.0), &r).unwrap();
        assert!((v - 0.5).norm() < 1e-8);
        let v = boundary_cauchy(&d, |w| w.conj(), c(0.0, 0.4), &r).unwrap();
        assert!(v.norm() < 1e-8);
        assert!(matches!(
            boundary_cauchy(&d, |w| w, c(0.9995, 0.0), &r),
            Err(Error::NearSingular { .. })
        ));
    }

    #[test]
    fn singular_moment_oracles() {
        let d = unit();
        let r = boundary_rule(&d, 256).unwrap();
        assert!(singular_moment(&d, c(0.0, 0.0), &r).unwrap().norm() < 1e-12);
        let v = singular_moment(&d, c(0.5, 0.0), &r).unwrap();
        assert!((v - c(0.0, -PI)).norm() < 1e-8);
        assert!(singular_moment(&d, c(1.5, 0.0), &r).is_err());
    }

    #[test]
    fn transform_oracles() {
        let d = unit();
        type Case = (fn(C64) -> C64, C64, C64);
        let cases: [Case; 3] = [
            (|_| c(1.0, 0.0), c(0.3, 0.2), c(0.3, -0.2)),
            (|w| w.conj(), c(0.0, 0.5), c(-0.125, 0.0)),
            (|w| w, c(0.6, 0.0), c(-0.64, 0.0)),
        ];
        for (f, z, want) in cases {
            let v = cauchy_transform(&d, f, z, 32, 64).unwrap();
            assert!((v - want).norm() < 1e-12, "{v} vs {want}");
        }
        assert_eq!(cauchy_transform(&d, |_| c(0.0, 0.0), c(0.1, 0.1), 8, 8).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn subtracted_route_converges() {
        let d = unit();
        let z = c(0.0, 0.5);
        let want = c(-0.125, 0.0);
        let mut last = f64::INFINITY;
        for n in [32, 64, 128] {
            let a = area_rule(&d, n, n).unwrap();
            let b = boundary_rule(&d, 4 * n).unwrap();
            let v = cauchy_transform_subtracted(&d, |w| w.conj(), z, &a, &b).unwrap();
            let err = (v - want).norm();
            assert!(err < last);
            last = err;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn nan_integrand_is_numerical_failure() {
        let d = unit();
        let r = cauchy_transform(&d, |_| c(f64::NAN, 0.0), c(0.0, 0.0), 8, 8);
        assert!(matches!(r, Err(Error::Numerical(_))));
    }
}
