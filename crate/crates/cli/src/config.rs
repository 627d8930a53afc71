//! JSON run configuration.

use dbar_core::expr::parse;
use dbar_core::forms::{manufacture_form, EvalPoint, OneForm, ProductDomain, SamplePlan, DEFAULT_MARGIN};
use dbar_core::geometry::StarDomain;
use dbar_core::quadrature::{QuadratureSuite, RuleSizes};
use dbar_core::verification::Operator;
use dbar_core::{Error, C64};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Identities,
    Exponents,
    Solve,
    Verify,
    Bounds,
    Stokes,
    Supnorm,
    Convergence,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorChoice {
    #[default]
    T,
    Ttilde,
    Both,
}

impl OperatorChoice {
    pub fn operators(self) -> Vec<Operator> {
        match self {
            OperatorChoice::T => vec![Operator::T],
            OperatorChoice::Ttilde => vec![Operator::TTilde],
            OperatorChoice::Both => vec![Operator::T, Operator::TTilde],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Constant(f64),
    Harmonic([f64; 2]),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum DomainConfig {
    Disk { center: C64, radius: f64 },
    Ellipse { center: C64, a: f64, b: f64 },
    Star { center: C64, coeffs: Vec<Coefficient> },
}

impl DomainConfig {
    pub fn build(&self) -> Result<StarDomain, Error> {
        match self {
            DomainConfig::Disk { center, radius } => StarDomain::disk(*center, *radius),
            DomainConfig::Ellipse { center, a, b } => StarDomain::ellipse(*center, *a, *b),
            DomainConfig::Star { center, coeffs } => {
                let Some(Coefficient::Constant(a0)) = coeffs.first() else {
                    return Err(Error::Validation("star coeffs must start with the constant term a0".into()));
                };
                let harmonics = coeffs[1..]
                    .iter()
                    .map(|c| match c {
                        Coefficient::Harmonic([a, b]) => Ok((*a, *b)),
                        Coefficient::Constant(_) => {
                            Err(Error::Validation("star harmonics must be [a_k, b_k] pairs".into()))
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                StarDomain::star(*center, *a0, harmonics)
            }
        }
    }
}

/// Rule sizes for one factor; `nboundary` defaults to `4·ntheta`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub nr: usize,
    pub ntheta: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nboundary: Option<usize>,
}

impl QuadratureConfig {
    fn sizes(&self) -> RuleSizes {
        let mut s = RuleSizes::new(self.nr, self.ntheta);
        if let Some(nb) = self.nboundary {
            s.nboundary = nb;
        }
        s
    }
}

/// One size set for every factor, or one per factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QuadratureChoice {
    Uniform(QuadratureConfig),
    PerFactor(Vec<QuadratureConfig>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EvalPointsConfig {
    Explicit(Vec<Vec<C64>>),
    Random {
        count: usize,
        #[serde(default = "default_margin")]
        margin: f64,
        #[serde(default)]
        seed: u64,
    },
}

fn default_margin() -> f64 {
    DEFAULT_MARGIN
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// `max |Tf − u|` against the potential.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<f64>,
    /// Finite-difference `∂̄` residual.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    /// `max |T̃f − Tf|` when both operators run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agreement: Option<f64>,
    /// Relative identity error (identities and Stokes modes).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity: Option<f64>,
    /// Growth factor for bound probes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default)]
    pub format: Format,
}

/// Probe settings for the bounds mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    #[serde(default = "default_solid")]
    pub solid_alpha: Vec<f64>,
    #[serde(default = "default_boundary")]
    pub boundary_alpha: Vec<f64>,
    #[serde(default = "default_distances")]
    pub distances: [f64; 2],
    #[serde(default = "default_count")]
    pub count: usize,
    /// Polar angle of the boundary point approached.
    #[serde(default)]
    pub theta: f64,
    #[serde(default = "default_boundary_nodes")]
    pub boundary_nodes: usize,
}

fn default_solid() -> Vec<f64> {
    vec![1.0 / 3.0, 5.0 / 3.0]
}
fn default_boundary() -> Vec<f64> {
    vec![0.5, 0.75]
}
fn default_distances() -> [f64; 2] {
    [1e-1, 1e-3]
}
fn default_count() -> usize {
    11
}
fn default_boundary_nodes() -> usize {
    256
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            solid_alpha: default_solid(),
            boundary_alpha: default_boundary(),
            distances: default_distances(),
            count: default_count(),
            theta: 0.0,
            boundary_nodes: default_boundary_nodes(),
        }
    }
}

/// A Stokes pair `(f, g)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StokesPair {
    pub f: String,
    pub g: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub domains: Vec<DomainConfig>,
    /// Arity for the exponents and identities modes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<String>>,
    #[serde(default)]
    pub operator: OperatorChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureChoice>,
    /// Suites for the convergence mode.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub suites: Vec<QuadratureChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval_points: Option<EvalPointsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<ProbeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stokes: Option<StokesPair>,
    /// Forms for the supnorm mode, each a list of components.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog: Option<Vec<Vec<String>>>,
    /// Random samples for the identities mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub allow_large: bool,
    #[serde(default)]
    pub record_timing: bool,
}

fn missing(field: &str, mode: Mode) -> Error {
    Error::Validation(format!("{field} is required in {} mode", mode_name(mode)))
}

pub fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Identities => "identities",
        Mode::Exponents => "exponents",
        Mode::Solve => "solve",
        Mode::Verify => "verify",
        Mode::Bounds => "bounds",
        Mode::Stokes => "stokes",
        Mode::Supnorm => "supnorm",
        Mode::Convergence => "convergence",
    }
}

impl RunConfig {
    pub fn mode(&self) -> Result<Mode, Error> {
        self.mode.ok_or_else(|| Error::Validation("mode is not set".into()))
    }

    pub fn omega(&self) -> Result<ProductDomain, Error> {
        if self.domains.is_empty() {
            return Err(missing("domains", self.mode()?));
        }
        ProductDomain::new(self.domains.iter().map(DomainConfig::build).collect::<Result<_, _>>()?)
    }

    pub fn suite_for(&self, omega: &ProductDomain, choice: Option<&QuadratureChoice>) -> Result<QuadratureSuite, Error> {
        let n = omega.arity();
        let sizes = match choice {
            None => vec![RuleSizes::default_for(n); n],
            Some(QuadratureChoice::Uniform(q)) => vec![q.sizes(); n],
            Some(QuadratureChoice::PerFactor(list)) => {
                if list.len() != n {
                    return Err(Error::Validation(format!(
                        "quadrature lists {} factors, domain has {n}",
                        list.len()
                    )));
                }
                list.iter().map(QuadratureConfig::sizes).collect()
            }
        };
        QuadratureSuite::new(omega.clone(), sizes)
    }

    pub fn suite(&self, omega: &ProductDomain) -> Result<QuadratureSuite, Error> {
        self.suite_for(omega, self.quadrature.as_ref())
    }

    pub fn points(&self, omega: &ProductDomain) -> Result<Vec<EvalPoint>, Error> {
        let plan = match &self.eval_points {
            None => SamplePlan::random(10, DEFAULT_MARGIN, self.seed.unwrap_or(0)),
            Some(EvalPointsConfig::Explicit(points)) => SamplePlan::Points(points.clone()),
            Some(EvalPointsConfig::Random { count, margin, seed }) => SamplePlan::random(*count, *margin, *seed),
        };
        plan.resolve(omega)
    }

    /// The datum `f` and, when a potential is given, the potential itself.
    pub fn form(&self, n: usize) -> Result<(OneForm, Option<dbar_core::expr::Expr>), Error> {
        match (&self.potential, &self.components) {
            (Some(_), Some(_)) => Err(Error::Validation("give either potential or components, not both".into())),
            (Some(p), None) => {
                let u = parse(p, n)?;
                Ok((manufacture_form(&u, n)?, Some(u)))
            }
            (None, Some(cs)) => {
                if cs.len() != n {
                    return Err(Error::Validation(format!(
                        "{} components given for {n} domains",
                        cs.len()
                    )));
                }
                let exprs = cs.iter().map(|c| parse(c, n)).collect::<Result<Vec<_>, _>>()?;
                Ok((OneForm::new(exprs)?, None))
            }
            (None, None) => Err(missing("potential or components", self.mode()?)),
        }
    }

    pub fn fd_step(&self) -> Result<f64, Error> {
        let h = self.fd_step.unwrap_or(1e-4);
        if h > 0.0 && h.is_finite() {
            Ok(h)
        } else {
            Err(Error::Validation(format!("fd_step must be positive, got {h}")))
        }
    }
}

/// Applies `key=value` overrides to top-level scalar fields. Values are read
/// as JSON, falling back to a plain string.
pub fn apply_overrides(config: &mut serde_json::Value, overrides: &[String]) -> Result<(), Error> {
    let obj = config
        .as_object_mut()
        .ok_or_else(|| Error::Validation("config must be a JSON object".into()))?;
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| Error::Validation(format!("override {item:?} is not key=value")))?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
        if value.is_object() || value.is_array() {
            return Err(Error::Validation(format!("override {key} must be a scalar")));
        }
        if obj.get(key).is_some_and(|v| v.is_object() || v.is_array()) {
            return Err(Error::Validation(format!("{key} is not a scalar field")));
        }
        obj.insert(key.to_string(), value);
    }
    Ok(())
}
