//! Planar factor domains and their quadrature rules.
//!
//! A [`StarDomain`] is star-shaped about its center with a truncated Fourier
//! radial function `r(θ) = a₀ + Σ aₖ cos kθ + bₖ sin kθ`. Area integrals use
//! the convention `dζ̄∧dζ = 2i·dA`; boundaries are traversed counterclockwise.

use std::f64::consts::PI;

use serde::Serialize;

use crate::{gauss, Error, Result, C64};

pub type ComplexPoint = C64;

/// Sup-norm tolerance for Fourier representations of non-polynomial radial functions.
pub const FOURIER_TOL: f64 = 1e-10;

/// Trapezoid nodes per unit of `max|ζ'|/dist(z, ∂D)` for boundary rules about a point.
const BOUNDARY_REFINE: f64 = 28.0;

/// Hard cap on refined boundary rules.
const MAX_BOUNDARY_NODES: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Shape {
    Disk { radius: f64 },
    Ellipse { a: f64, b: f64 },
    Star,
}

#[derive(Clone, Debug)]
pub struct StarDomain {
    center: C64,
    a0: f64,
    harmonics: Vec<(f64, f64)>,
    shape: Shape,
    r_min: f64,
    r_bound: f64,
    convex: bool,
    perimeter: f64,
    max_speed: f64,
}

impl PartialEq for StarDomain {
    fn eq(&self, other: &Self) -> bool {
        self.center == other.center && self.a0 == other.a0 && self.harmonics == other.harmonics
    }
}

fn check_finite(z: C64, what: &str) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(format!("{what} must be finite, got {z}")))
    }
}

impl StarDomain {
    /// Disk of the given radius.
    pub fn disk(center: C64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::validation(format!(
                "disk radius must be positive, got {radius}"
            )));
        }
        Self::build(center, radius, Vec::new(), Shape::Disk { radius })
    }

    /// Ellipse `x²/a² + y²/b² = 1` about `center`, with the radial function
    /// `ab/√(b²cos²θ + a²sin²θ)` expanded to [`FOURIER_TOL`].
    pub fn ellipse(center: C64, a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::validation(format!(
                "ellipse axes must be positive, got a={a}, b={b}"
            )));
        }
        if a == b {
            return Self::build(center, a, Vec::new(), Shape::Ellipse { a, b });
        }
        let exact = |t: f64| a * b / (b * b * t.cos().powi(2) + a * a * t.sin().powi(2)).sqrt();
        let (a0, harmonics) = fourier_fit(exact, FOURIER_TOL)?;
        let d = Self::build(center, a0, harmonics, Shape::Ellipse { a, b })?;
        let m = 8192;
        for j in 0..m {
            let t = 2.0 * PI * (j as f64 + 0.5) / m as f64;
            if (d.radius(t) - exact(t)).abs() > FOURIER_TOL {
                return Err(Error::validation(format!(
                    "ellipse ({a}, {b}) cannot be represented to {FOURIER_TOL:e}"
                )));
            }
        }
        Ok(d)
    }

    /// General star-shaped domain from Fourier coefficients `a₀, [(aₖ, bₖ)]`.
    pub fn star(center: C64, a0: f64, harmonics: Vec<(f64, f64)>) -> Result<Self> {
        if harmonics.is_empty() {
            return Self::disk(center, a0);
        }
        Self::build(center, a0, harmonics, Shape::Star)
    }

    fn build(center: C64, a0: f64, harmonics: Vec<(f64, f64)>, shape: Shape) -> Result<Self> {
        check_finite(center, "domain center")?;
        if !a0.is_finite() || harmonics.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(Error::validation("radial coefficients must be finite"));
        }
        let k = harmonics.len();
        let r_bound = a0 + harmonics.iter().map(|(a, b)| a.abs() + b.abs()).sum::<f64>();
        let mut d = StarDomain {
            center,
            a0,
            harmonics,
            shape,
            r_min: 0.0,
            r_bound,
            convex: true,
            perimeter: 0.0,
            max_speed: 0.0,
        };
        let m = 4096.max(32 * (k + 1));
        let mut r_min = f64::INFINITY;
        let mut convex = true;
        let mut perimeter = 0.0;
        let mut max_speed: f64 = 0.0;
        for j in 0..m {
            let t = 2.0 * PI * j as f64 / m as f64;
            let (r, r1, r2) = d.radial_jet(t);
            r_min = r_min.min(r);
            // Signed curvature numerator of a polar curve.
            if r * r + 2.0 * r1 * r1 - r * r2 < -1e-12 * r * r {
                convex = false;
            }
            let speed = (r * r + r1 * r1).sqrt();
            perimeter += speed;
            max_speed = max_speed.max(speed);
        }
        if !(r_min > 0.0) {
            return Err(Error::validation(format!(
                "radial function must stay positive (min {r_min:e})"
            )));
        }
        d.r_min = r_min;
        d.convex = convex;
        d.perimeter = perimeter * 2.0 * PI / m as f64;
        d.max_speed = max_speed;
        Ok(d)
    }

    pub fn center(&self) -> C64 {
        self.center
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn coefficients(&self) -> (f64, &[(f64, f64)]) {
        (self.a0, &self.harmonics)
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    /// Upper bound on `r(θ)`.
    pub fn r_bound(&self) -> f64 {
        self.r_bound
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    /// Exact area `½∫r² dθ` of the Fourier domain.
    pub fn area(&self) -> f64 {
        PI * self.a0 * self.a0
            + 0.5 * PI * self.harmonics.iter().map(|(a, b)| a * a + b * b).sum::<f64>()
    }

    pub fn radius(&self, theta: f64) -> f64 {
        self.radial_jet(theta).0
    }

    /// `r, r′, r″` at `theta`.
    pub fn radial_jet(&self, theta: f64) -> (f64, f64, f64) {
        let mut r = self.a0;
        let mut r1 = 0.0;
        let mut r2 = 0.0;
        if self.harmonics.is_empty() {
            return (r, r1, r2);
        }
        let step = C64::from_polar(1.0, theta);
        let mut rot = step;
        for (k, (a, b)) in self.harmonics.iter().enumerate() {
            let kf = (k + 1) as f64;
            let (c, s) = (rot.re, rot.im);
            r += a * c + b * s;
            r1 += kf * (b * c - a * s);
            r2 -= kf * kf * (a * c + b * s);
            rot *= step;
        }
        (r, r1, r2)
    }

    pub fn boundary_point(&self, theta: f64) -> C64 {
        self.center + C64::from_polar(self.radius(theta), theta)
    }

    /// `dζ/dθ` of the counterclockwise boundary parametrization.
    pub fn boundary_tangent(&self, theta: f64) -> C64 {
        let (r, r1, _) = self.radial_jet(theta);
        C64::new(r1, r) * C64::from_polar(1.0, theta)
    }

    /// True iff `|z − c| ≤ r(arg(z − c)) − margin`.
    pub fn contains(&self, z: C64, margin: f64) -> bool {
        let w = z - self.center;
        let theta = if w == C64::new(0.0, 0.0) { 0.0 } else { w.arg() };
        w.norm() <= self.radius(theta) - margin
    }

    /// Euclidean distance from `z` to the boundary curve.
    pub fn distance_to_boundary(&self, z: C64) -> f64 {
        let m = 1024.max(64 * (self.harmonics.len() + 1));
        let dt = 2.0 * PI / m as f64;
        let dist = |t: f64| (self.boundary_point(t) - z).norm();
        let (mut best_t, mut best) = (0.0, f64::INFINITY);
        for j in 0..m {
            let t = j as f64 * dt;
            let d = dist(t);
            if d < best {
                best = d;
                best_t = t;
            }
        }
        // Golden-section refinement on the bracketing cell.
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut lo, mut hi) = (best_t - dt, best_t + dt);
        let mut x1 = hi - g * (hi - lo);
        let mut x2 = lo + g * (hi - lo);
        let (mut f1, mut f2) = (dist(x1), dist(x2));
        for _ in 0..80 {
            if f1 < f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = dist(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = dist(x2);
            }
        }
        best.min(f1).min(f2)
    }

    /// Copy of the domain rotated by `phi` about its center.
    pub fn rotated(&self, phi: f64) -> Result<Self> {
        let harmonics = self
            .harmonics
            .iter()
            .enumerate()
            .map(|(k, &(a, b))| {
                // r_new(θ) = r(θ − φ)
                let kp = (k + 1) as f64 * phi;
                let (c, s) = (kp.cos(), kp.sin());
                (a * c - b * s, a * s + b * c)
            })
            .collect();
        let shape = match self.shape {
            Shape::Disk { radius } => Shape::Disk { radius },
            _ => Shape::Star,
        };
        Self::build(self.center, self.a0, harmonics, shape)
    }

    /// Copy of the domain translated by `shift`.
    pub fn translated(&self, shift: C64) -> Result<Self> {
        Self::build(
            self.center + shift,
            self.a0,
            self.harmonics.clone(),
            self.shape.clone(),
        )
    }

    fn outside_measure(&self, p: C64) -> f64 {
        let w = p - self.center;
        let theta = if w == C64::new(0.0, 0.0) { 0.0 } else { w.arg() };
        w.norm() - self.radius(theta)
    }

    /// Parameter intervals `[t₀, t₁]` along the ray `z + t·dir` (t ≥ 0) that lie
    /// inside the domain. `z` must be inside; the first interval starts at 0.
    pub fn ray_intervals(&self, z: C64, dir: C64) -> Vec<(f64, f64)> {
        let w = z - self.center;
        if self.harmonics.is_empty() {
            let b = (dir.conj() * w).re;
            let disc = (b * b + self.a0 * self.a0 - w.norm_sqr()).max(0.0);
            let sq = disc.sqrt();
            // Stable root of t² + 2bt + |w|² − R² = 0.
            let t = if b <= 0.0 {
                sq - b
            } else {
                (self.a0 * self.a0 - w.norm_sqr()).max(0.0) / (sq + b)
            };
            return vec![(0.0, t)];
        }
        let t_hi = w.norm() + self.r_bound + self.r_min;
        let f = |t: f64| self.outside_measure(z + dir * t);
        if self.convex {
            return vec![(0.0, bisect(&f, 0.0, t_hi))];
        }
        let steps = ((t_hi / self.r_min) * 8.0 * (self.harmonics.len() + 1) as f64).ceil() as usize;
        let dt = t_hi / steps as f64;
        let mut out = Vec::new();
        let mut inside = true;
        let mut start = 0.0;
        let mut prev = 0.0;
        for j in 1..=steps {
            let t = j as f64 * dt;
            let now_inside = f(t) < 0.0;
            if now_inside != inside {
                let root = bisect(&f, prev, t);
                if inside {
                    out.push((start, root));
                } else {
                    start = root;
                }
                inside = now_inside;
            }
            prev = t;
        }
        if inside {
            out.push((start, t_hi));
        }
        out
    }
}

/// Root of `f` on `[lo, hi]` with `f(lo) < 0 ≤ f(hi)`, to floating-point resolution.
fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Real Fourier coefficients of a smooth periodic function, truncated so the
/// discarded tail is below `tol / 10`.
fn fourier_fit(r: impl Fn(f64) -> f64, tol: f64) -> Result<(f64, Vec<(f64, f64)>)> {
    let mut m = 64usize;
    loop {
        let samples: Vec<f64> = (0..m).map(|j| r(2.0 * PI * j as f64 / m as f64)).collect();
        let a0 = samples.iter().sum::<f64>() / m as f64;
        let half = m / 2;
        let coeffs: Vec<(f64, f64)> = (1..half)
            .map(|k| {
                let (mut a, mut b) = (0.0, 0.0);
                for (j, v) in samples.iter().enumerate() {
                    let t = 2.0 * PI * ((k * j) % m) as f64 / m as f64;
                    a += v * t.cos();
                    b += v * t.sin();
                }
                (2.0 * a / m as f64, 2.0 * b / m as f64)
            })
            .collect();
        let upper_tail: f64 = coeffs[half / 2..].iter().map(|(a, b)| a.abs() + b.abs()).sum();
        if upper_tail < 1e-3 * tol * a0.abs().max(1.0) {
            let mut k = coeffs.len();
            let mut tail = 0.0;
            while k > 0 {
                let (a, b) = coeffs[k - 1];
                if tail + a.abs() + b.abs() > 0.1 * tol {
                    break;
                }
                tail += a.abs() + b.abs();
                k -= 1;
            }
            return Ok((a0, coeffs[..k].to_vec()));
        }
        if m >= 1 << 15 {
            return Err(Error::validation(
                "radial function not resolvable by a Fourier series of manageable length",
            ));
        }
        m *= 2;
    }
}

/// Area quadrature: `Σ weights·f(nodes) ≈ ∫_D f dA`.
#[derive(Clone, Debug)]
pub struct AreaRule {
    pub nodes: Vec<C64>,
    pub weights: Vec<f64>,
}

/// Boundary quadrature: `Σ tangents·g(nodes) ≈ ∮_{∂D} g dζ`.
#[derive(Clone, Debug)]
pub struct BoundaryRule {
    pub nodes: Vec<C64>,
    pub tangents: Vec<C64>,
}

impl AreaRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

impl BoundaryRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Center-polar tensor rule: Gauss–Legendre in ρ ∈ [0,1], trapezoid in θ.
pub fn area_rule(d: &StarDomain, n_rho: usize, n_theta: usize) -> Result<AreaRule> {
    if n_rho < 2 || n_theta < 4 {
        return Err(Error::validation(format!(
            "area rule needs n_rho >= 2 and n_theta >= 4, got ({n_rho}, {n_theta})"
        )));
    }
    if !(d.r_min > 0.0) {
        return Err(Error::validation("degenerate domain"));
    }
    let (x, w) = gauss::legendre_unit(n_rho);
    let dt = 2.0 * PI / n_theta as f64;
    let mut nodes = Vec::with_capacity(n_rho * n_theta);
    let mut weights = Vec::with_capacity(n_rho * n_theta);
    for (rho, wr) in x.iter().zip(&w) {
        for j in 0..n_theta {
            let t = j as f64 * dt;
            let r = d.radius(t);
            nodes.push(d.center + C64::from_polar(rho * r, t));
            weights.push(wr * dt * rho * r * r);
        }
    }
    Ok(AreaRule { nodes, weights })
}

/// Uniform trapezoid rule on the counterclockwise boundary.
pub fn boundary_rule(d: &StarDomain, n_theta: usize) -> Result<BoundaryRule> {
    if n_theta < 8 {
        return Err(Error::validation(format!(
            "boundary rule needs n_theta >= 8, got {n_theta}"
        )));
    }
    let dt = 2.0 * PI / n_theta as f64;
    let (nodes, tangents) = (0..n_theta)
        .map(|j| {
            let t = j as f64 * dt;
            (d.boundary_point(t), d.boundary_tangent(t) * dt)
        })
        .unzip();
    Ok(BoundaryRule { nodes, tangents })
}

/// Boundary rule with at least `n` nodes, refined so that the trapezoid rule
/// resolves integrands that are nearly singular at the interior point `z`.
pub fn boundary_rule_about(d: &StarDomain, z: C64, n: usize) -> Result<BoundaryRule> {
    let dist = d.distance_to_boundary(z);
    if !(dist > 0.0) {
        return Err(Error::NearSingular {
            factor: 0,
            point: z.to_string(),
            margin: 0.0,
        });
    }
    let wanted = (BOUNDARY_REFINE * d.max_speed / dist).ceil() as usize;
    let count = n.max(wanted).min(MAX_BOUNDARY_NODES).div_ceil(4) * 4;
    boundary_rule(d, count.max(8))
}

/// A ray of a [`PolarFan`]: unit direction and inside intervals.
#[derive(Clone, Debug)]
pub struct Ray {
    pub dir: C64,
    pub intervals: Vec<(f64, f64)>,
}

/// Directions `φⱼ = 2π(j + ½)/n` about an interior point with the parts of
/// each ray lying in the domain.
#[derive(Clone, Debug)]
pub struct PolarFan {
    pub origin: C64,
    pub dphi: f64,
    pub rays: Vec<Ray>,
}

impl PolarFan {
    pub fn new(d: &StarDomain, origin: C64, n_theta: usize) -> Result<Self> {
        if n_theta < 4 {
            return Err(Error::validation(format!(
                "polar fan needs n_theta >= 4, got {n_theta}"
            )));
        }
        check_finite(origin, "evaluation point")?;
        if !d.contains(origin, 0.0) {
            return Err(Error::validation(format!(
                "polar fan origin {origin} lies outside the domain"
            )));
        }
        let dphi = 2.0 * PI / n_theta as f64;
        let rays = (0..n_theta)
            .map(|j| {
                let dir = C64::from_polar(1.0, (j as f64 + 0.5) * dphi);
                Ray {
                    dir,
                    intervals: d.ray_intervals(origin, dir),
                }
            })
            .collect();
        Ok(PolarFan { origin, dphi, rays })
    }
}

/// Area rule in polar coordinates about an interior point `z`.
#[derive(Clone, Debug)]
pub struct LocalAreaRule {
    pub nodes: Vec<C64>,
    /// Area weights (`dA`).
    pub weights: Vec<f64>,
    /// `weight / (node − z)`, formed without division.
    pub over_offset: Vec<C64>,
}

pub fn local_area_rule(d: &StarDomain, z: C64, n_rho: usize, n_theta: usize) -> Result<LocalAreaRule> {
    if n_rho < 2 {
        return Err(Error::validation(format!("n_rho must be >= 2, got {n_rho}")));
    }
    let fan = PolarFan::new(d, z, n_theta)?;
    let (x, w) = gauss::legendre_unit(n_rho);
    let mut out = LocalAreaRule {
        nodes: Vec::with_capacity(n_rho * n_theta),
        weights: Vec::with_capacity(n_rho * n_theta),
        over_offset: Vec::with_capacity(n_rho * n_theta),
    };
    for ray in &fan.rays {
        for &(t0, t1) in &ray.intervals {
            let len = t1 - t0;
            for (xi, wi) in x.iter().zip(&w) {
                let rho = t0 + len * xi;
                let q = len * wi * fan.dphi;
                out.nodes.push(z + ray.dir * rho);
                out.weights.push(q * rho);
                out.over_offset.push(ray.dir.conj() * q);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn disk_construction() {
        let d = StarDomain::disk(c(0.0, 0.0), 1.0).unwrap();
        for t in [0.0, 1.0, 2.5, 6.0] {
            assert_eq!(d.radius(t), 1.0);
        }
        assert!(d.contains(c(0.0, 0.0), 0.0));
        let d = StarDomain::disk(c(1.0, 2.0), 0.5).unwrap();
        assert!(d.contains(c(1.0, 2.0), 0.0));
        assert!(!d.contains(c(0.0, 0.0), 0.0));
        assert!(StarDomain::disk(c(0.0, 0.0), -1.0).is_err());
        assert!(StarDomain::disk(c(0.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn ellipse_axis_endpoints() {
        let d = StarDomain::ellipse(c(0.0, 0.0), 2.0, 1.0).unwrap();
        assert_abs_diff_eq!(d.radius(0.0), 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(d.radius(PI / 2.0), 1.0, epsilon = 1e-10);
        let unit = StarDomain::ellipse(c(0.0, 0.0), 1.0, 1.0).unwrap();
        assert_eq!(unit.radius(0.3), 1.0);
        assert!(StarDomain::ellipse(c(0.0, 0.0), 0.0, 1.0).is_err());
        assert!(StarDomain::ellipse(c(0.0, 0.0), 1.0, -2.0).is_err());
        assert!(d.is_convex());
    }

    #[test]
    fn non_positive_radial_function_rejected() {
        assert!(StarDomain::star(c(0.0, 0.0), 1.0, vec![(1.5, 0.0)]).is_err());
        assert!(StarDomain::star(c(0.0, 0.0), 1.0, vec![(0.0, 0.3)]).is_ok());
    }

    #[test]
    fn area_rule_sums() {
        let d = StarDomain::disk(c(0.0, 0.0), 1.0).unwrap();
        let r = area_rule(&d, 64, 64).unwrap();
        assert_eq!(r.len(), 64 * 64);
        assert!(r.weights.iter().all(|w| *w > 0.0));
        assert_abs_diff_eq!(r.weights.iter().sum::<f64>(), PI, epsilon = 1e-10);

        let e = StarDomain::ellipse(c(0.0, 0.0), 2.0, 1.0).unwrap();
        let r = area_rule(&e, 64, 128).unwrap();
        assert_abs_diff_eq!(r.weights.iter().sum::<f64>(), 2.0 * PI, epsilon = 1e-8);
        assert!(area_rule(&d, 1, 64).is_err());
        assert!(area_rule(&d, 4, 3).is_err());
    }

    #[test]
    fn boundary_rule_closure_and_winding() {
        let d = StarDomain::disk(c(0.0, 0.0), 1.0).unwrap();
        let b = boundary_rule(&d, 64).unwrap();
        let s: C64 = b.tangents.iter().sum();
        assert!(s.norm() < 1e-12);
        let wind: C64 = b.tangents.iter().zip(&b.nodes).map(|(t, z)| t / z).sum::<C64>()
            / C64::new(0.0, 2.0 * PI);
        assert!((wind - 1.0).norm() < 1e-10);
        assert!(boundary_rule(&d, 7).is_err());
    }

    #[test]
    fn ellipse_perimeter() {
        // Independent oracle: polyline length of the exact ellipse.
        let (a, b) = (2.0f64, 1.0f64);
        let m = 200_000;
        let poly: f64 = (0..m)
            .map(|j| {
                let t0 = 2.0 * PI * j as f64 / m as f64;
                let t1 = 2.0 * PI * (j + 1) as f64 / m as f64;
                (C64::new(a * t1.cos(), b * t1.sin()) - C64::new(a * t0.cos(), b * t0.sin())).norm()
            })
            .sum();
        assert_abs_diff_eq!(poly, 9.688448, epsilon = 1e-6);
        let e = StarDomain::ellipse(c(0.0, 0.0), a, b).unwrap();
        let r = boundary_rule(&e, 128).unwrap();
        let len: f64 = r.tangents.iter().map(|t| t.norm()).sum();
        assert_abs_diff_eq!(len, poly, epsilon = 1e-6);
    }

    #[test]
    fn containment_margin() {
        let d = StarDomain::disk(c(0.0, 0.0), 1.0).unwrap();
        assert!(d.contains(c(0.0, 0.0), 0.0));
        assert!(!d.contains(c(2.0, 0.0), 0.0));
        assert!(!d.contains(c(0.95, 0.0), 0.1));
        assert!(d.contains(c(0.85, 0.0), 0.1));
    }

    #[test]
    fn ray_intervals_disk_and_ellipse() {
        let d = StarDomain::disk(c(0.0, 0.0), 1.0).unwrap();
        let iv = d.ray_intervals(c(0.5, 0.0), c(1.0, 0.0));
        assert_abs_diff_eq!(iv[0].1, 0.5, epsilon = 1e-15);
        let iv = d.ray_intervals(c(0.5, 0.0), c(-1.0, 0.0));
        assert_abs_diff_eq!(iv[0].1, 1.5, epsilon = 1e-15);
        let e = StarDomain::ellipse(c(0.0, 0.0), 2.0, 1.0).unwrap();
        let iv = e.ray_intervals(c(0.0, 0.0), c(1.0, 0.0));
        assert_eq!(iv.len(), 1);
        assert_abs_diff_eq!(iv[0].1, 2.0, epsilon = 1e-10);
    }

    #[test]
    fn nonconvex_star_ray_reenters() {
        // Five-petal flower; a ray from near one petal tip crosses a neighbouring petal.
        let d = StarDomain::star(c(0.0, 0.0), 1.0, vec![(0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.45, 0.0)]).unwrap();
        assert!(!d.is_convex());
        let z = c(1.3, 0.0);
        assert!(d.contains(z, 0.0));
        let mut total = 0.0;
        let n = 4000;
        for j in 0..n {
            let dir = C64::from_polar(1.0, 2.0 * PI * (j as f64 + 0.5) / n as f64);
            let iv = d.ray_intervals(z, dir);
            assert_eq!(iv[0].0, 0.0);
            total += iv.iter().map(|(a, b)| 0.5 * (b * b - a * a)).sum::<f64>();
        }
        total *= 2.0 * PI / n as f64;
        assert!((total - d.area()).abs() < 1e-3 * d.area(), "{total} vs {}", d.area());
    }

    #[test]
    fn local_rule_integrates_area_exactly() {
        let e = StarDomain::ellipse(c(0.3, -0.2), 2.0, 1.0).unwrap();
        let r = local_area_rule(&e, c(1.0, 0.4), 16, 128).unwrap();
        assert_abs_diff_eq!(r.weights.iter().sum::<f64>(), 2.0 * PI, epsilon = 1e-9);
    }

    #[test]
    fn rotation_permutes_nodes() {
        let d = StarDomain::star(c(0.5, 0.5), 1.0, vec![(0.1, 0.05), (0.0, 0.08)]).unwrap();
        let n_theta = 16;
        let phi = 2.0 * PI * 3.0 / n_theta as f64;
        let rd = d.rotated(phi).unwrap();
        let a = area_rule(&d, 4, n_theta).unwrap();
        let b = area_rule(&rd, 4, n_theta).unwrap();
        for (i, z) in a.nodes.iter().enumerate() {
            let (ir, j) = (i / n_theta, i % n_theta);
            let rotated = d.center() + (z - d.center()) * C64::from_polar(1.0, phi);
            let k = ir * n_theta + (j + 3) % n_theta;
            assert!((rotated - b.nodes[k]).norm() < 1e-13);
        }
    }

    #[test]
    fn distance_to_boundary_of_disk() {
        let d = StarDomain::disk(c(0.0, 0.0), 1.0).unwrap();
        assert_abs_diff_eq!(d.distance_to_boundary(c(0.3, 0.4)), 0.5, epsilon = 1e-10);
    }
}
