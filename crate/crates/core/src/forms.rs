//! `(0,1)` forms `f = Σ f_j dz̄_j` on product domains `Ω = D₁ × … × Dₙ`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::{parse, Expr};
use crate::geometry::StarDomain;
use crate::{Error, Result, C64};

/// A point `(z₁, …, zₙ)` of `ℂⁿ`.
pub type EvalPoint = Vec<C64>;

#[derive(Clone, Debug, PartialEq)]
pub struct ProductDomain {
    factors: Vec<StarDomain>,
}

impl ProductDomain {
    pub fn new(factors: Vec<StarDomain>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::validation("product domain needs at least one factor"));
        }
        Ok(ProductDomain { factors })
    }

    /// `n` copies of the unit disk.
    pub fn unit_polydisk(n: usize) -> Result<Self> {
        let d = StarDomain::disk(C64::new(0.0, 0.0), 1.0)?;
        Self::new(vec![d; n])
    }

    pub fn arity(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[StarDomain] {
        &self.factors
    }

    pub fn factor(&self, j: usize) -> &StarDomain {
        &self.factors[j]
    }

    pub fn contains(&self, z: &[C64], margin: f64) -> bool {
        z.len() == self.arity() && self.factors.iter().zip(z).all(|(d, w)| d.contains(*w, margin))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OneForm {
    arity: usize,
    components: Vec<Expr>,
}

impl OneForm {
    pub fn new(components: Vec<Expr>) -> Result<Self> {
        let arity = components.len();
        if arity == 0 {
            return Err(Error::validation("a form needs at least one component"));
        }
        for (j, c) in components.iter().enumerate() {
            if c.min_arity() > arity {
                return Err(Error::validation(format!(
                    "component {} uses z{} but the form has arity {arity}",
                    j + 1,
                    c.min_arity()
                )));
            }
        }
        Ok(OneForm { arity, components })
    }

    pub fn parse(texts: &[&str]) -> Result<Self> {
        let n = texts.len();
        let components = texts.iter().map(|t| parse(t, n)).collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(components)
    }

    pub fn zero(n: usize) -> Self {
        OneForm {
            arity: n,
            components: vec![Expr::zero(); n],
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn component(&self, j: usize) -> &Expr {
        &self.components[j]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Expr::is_zero)
    }

    /// `α·f`.
    pub fn scaled(&self, alpha: C64) -> Self {
        let components = self
            .components
            .iter()
            .map(|c| Expr::constant(alpha).mul(c.clone()))
            .collect();
        OneForm {
            arity: self.arity,
            components,
        }
    }

    /// `α·f + β·g`.
    pub fn combine(alpha: C64, f: &OneForm, beta: C64, g: &OneForm) -> Result<Self> {
        if f.arity != g.arity {
            return Err(Error::validation("forms differ in arity"));
        }
        let components = f
            .components
            .iter()
            .zip(&g.components)
            .map(|(a, b)| {
                Expr::constant(alpha)
                    .mul(a.clone())
                    .add(Expr::constant(beta).mul(b.clone()))
            })
            .collect();
        Ok(OneForm {
            arity: f.arity,
            components,
        })
    }
}

/// Evaluation points, given explicitly or drawn uniformly inside `Ω` with an
/// interior margin from a seeded generator.
#[derive(Clone, Debug, PartialEq)]
pub enum SamplePlan {
    Points(Vec<EvalPoint>),
    Random { count: usize, margin: f64, seed: u64 },
}

/// Default interior margin for sample plans.
pub const DEFAULT_MARGIN: f64 = 1e-2;

impl SamplePlan {
    pub fn random(count: usize, margin: f64, seed: u64) -> Self {
        SamplePlan::Random { count, margin, seed }
    }

    pub fn resolve(&self, omega: &ProductDomain) -> Result<Vec<EvalPoint>> {
        match self {
            SamplePlan::Points(points) => {
                for p in points {
                    if p.len() != omega.arity() {
                        return Err(Error::validation(format!(
                            "point has {} coordinates, domain has arity {}",
                            p.len(),
                            omega.arity()
                        )));
                    }
                    if !omega.contains(p, 0.0) {
                        return Err(Error::validation(format!("point {p:?} lies outside the domain")));
                    }
                }
                Ok(points.clone())
            }
            &SamplePlan::Random { count, margin, seed } => {
                if !(margin >= 0.0) {
                    return Err(Error::validation("sample margin must be non-negative"));
                }
                for (j, d) in omega.factors().iter().enumerate() {
                    if d.r_min() <= margin {
                        return Err(Error::validation(format!(
                            "margin {margin} leaves no interior in factor {}",
                            j + 1
                        )));
                    }
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let points = (0..count)
                    .map(|_| omega.factors().iter().map(|d| sample_in(d, margin, &mut rng)).collect())
                    .collect();
                Ok(points)
            }
        }
    }
}

fn sample_in(d: &StarDomain, margin: f64, rng: &mut ChaCha8Rng) -> C64 {
    let r = d.r_bound();
    loop {
        let w = C64::new(rng.random_range(-r..r), rng.random_range(-r..r));
        let z = d.center() + w;
        if d.contains(z, margin) {
            return z;
        }
    }
}

/// `f_j = ∂u/∂z̄_j`.
pub fn manufacture_form(u: &Expr, n: usize) -> Result<OneForm> {
    if u.min_arity() > n {
        return Err(Error::validation(format!(
            "potential uses z{} but arity is {n}",
            u.min_arity()
        )));
    }
    OneForm::new((0..n).map(|j| u.d_bar(j)).collect())
}

/// `max |∂f_j/∂z̄_i − ∂f_i/∂z̄_j|` over points and pairs `i < j`.
pub fn closedness_residual(f: &OneForm, points: &[EvalPoint]) -> Result<f64> {
    let n = f.arity();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((f.component(j).d_bar(i), f.component(i).d_bar(j)));
        }
    }
    let mut worst: f64 = 0.0;
    for p in points {
        for (a, b) in &pairs {
            worst = worst.max((a.eval(p)? - b.eval(p)?).norm());
        }
    }
    Ok(worst)
}

/// `max_j max_points |f_j|`.
pub fn sup_norm(f: &OneForm, points: &[EvalPoint]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for c in f.components() {
        worst = worst.max(sup_norm_expr(c, points)?);
    }
    Ok(worst)
}

pub fn sup_norm_expr(e: &Expr, points: &[EvalPoint]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in points {
        worst = worst.max(e.eval(p)?.norm());
    }
    Ok(worst)
}
