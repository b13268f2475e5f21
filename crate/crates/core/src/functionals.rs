//! Constraint functionals `T`: isometry invariant, monotone, positively
//! homogeneous set functions with optional diameter control
//! `diam ≤ K T^t |Ω|^{(1-tτ)/m}`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analytic::{omega, AnalyticBody};
use crate::error::{Error, Result};
use crate::geometry::{hausdorff_distance, BodyUnion, ConvexBody};
use crate::inequalities::{digest, InequalityCertificate, GEOMETRIC_TOLERANCE};
use crate::sampling;

/// Evaluator of a user-supplied functional on polygons.
pub type Evaluator = Arc<dyn Fn(&ConvexBody) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Measure,
    Perimeter,
    Moment,
    Product(Vec<Kind>),
    Custom(Evaluator),
}

impl Kind {
    fn eval(&self, b: &ConvexBody) -> f64 {
        match self {
            Kind::Measure => b.measure(),
            Kind::Perimeter => b.perimeter(),
            Kind::Moment => b.moment(),
            Kind::Product(fs) => fs.iter().map(|f| f.eval(b)).product(),
            Kind::Custom(f) => f(b),
        }
    }

    fn eval_union(&self, u: &BodyUnion) -> f64 {
        match self {
            Kind::Measure => u.measure(),
            Kind::Perimeter => u.perimeter(),
            Kind::Moment => u.moment(),
            Kind::Product(fs) => fs.iter().map(|f| f.eval_union(u)).product(),
            Kind::Custom(f) => u.components().iter().map(|b| f(b)).sum(),
        }
    }

    fn eval_analytic(&self, a: &AnalyticBody) -> Option<f64> {
        let v = a.functionals();
        match self {
            Kind::Measure => Some(v.measure),
            Kind::Perimeter => Some(v.perimeter),
            Kind::Moment => Some(v.moment),
            Kind::Product(fs) => fs.iter().map(|f| f.eval_analytic(a)).product(),
            Kind::Custom(_) => None,
        }
    }
}

/// Constants `(K, t)` of the diameter bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiameterConstants {
    pub k: f64,
    pub t: f64,
}

#[derive(Clone)]
pub struct SetFunctional {
    name: String,
    tau: f64,
    dim: usize,
    kind: Kind,
    diameter_constants: Option<DiameterConstants>,
    extremal: Option<AnalyticBody>,
}

impl fmt::Debug for SetFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SetFunctional")
            .field("name", &self.name)
            .field("tau", &self.tau)
            .field("dim", &self.dim)
            .field("diameter_constants", &self.diameter_constants)
            .field("extremal", &self.extremal)
            .finish()
    }
}

/// `T*` and how it was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalConstants {
    pub t_star: f64,
    pub attained_by: String,
    pub estimate: bool,
}

impl SetFunctional {
    /// `measure`, `perimeter` or `moment` in dimension `dim`.
    pub fn builtin(name: &str, dim: usize) -> Result<Self> {
        let m = dim as f64;
        let ball = AnalyticBody::unit_ball(dim)?;
        let f = match name {
            "measure" => Self {
                name: name.into(),
                tau: m,
                dim,
                kind: Kind::Measure,
                diameter_constants: None,
                extremal: None,
            },
            "perimeter" => {
                if dim < 2 {
                    return Err(Error::UnsupportedDimension(dim));
                }
                Self {
                    name: name.into(),
                    tau: m - 1.0,
                    dim,
                    kind: Kind::Perimeter,
                    diameter_constants: Some(DiameterConstants {
                        k: m.powf(2.0 - m) / omega(dim - 1),
                        t: m - 1.0,
                    }),
                    extremal: Some(ball),
                }
            }
            "moment" => Self {
                name: name.into(),
                tau: m + 2.0,
                dim,
                kind: Kind::Moment,
                diameter_constants: Some(DiameterConstants {
                    k: 4.0 * (m * (m + 1.0).powi(2) * (m + 2.0)).sqrt(),
                    t: 0.5,
                }),
                extremal: Some(ball),
            },
            other => return Err(Error::UnknownFunctional(other.into())),
        };
        Ok(f)
    }

    /// Polygon functional from a closure.
    pub fn custom(name: &str, tau: f64, eval: Evaluator) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tau must be positive, got {tau}"
            )));
        }
        Ok(Self {
            name: name.into(),
            tau,
            dim: 2,
            kind: Kind::Custom(eval),
            diameter_constants: None,
            extremal: None,
        })
    }

    /// Attach diameter constants; requires `t ≥ 1/τ` and `K > 0`.
    pub fn with_diameter_constants(mut self, k: f64, t: f64) -> Result<Self> {
        if !(k > 0.0) || !(t * self.tau >= 1.0 - 1e-12) {
            return Err(Error::InvalidConfig(format!(
                "diameter constants need K > 0 and t >= 1/tau (K={k}, t={t}, tau={})",
                self.tau
            )));
        }
        self.diameter_constants = Some(DiameterConstants { k, t });
        Ok(self)
    }

    pub fn with_extremal(mut self, body: AnalyticBody) -> Self {
        self.extremal = Some(body);
        self
    }

    /// Product `T₁T₂`: degrees add, `t = t₁t₂/(t₁+t₂)`, `K = max(K₁, K₂)`.
    pub fn product(a: &Self, b: &Self) -> Result<Self> {
        if a.dim != b.dim {
            return Err(Error::InvalidConfig(format!(
                "dimension mismatch {} vs {}",
                a.dim, b.dim
            )));
        }
        let mut parts = Vec::new();
        for f in [a, b] {
            match &f.kind {
                Kind::Product(p) => parts.extend(p.iter().cloned()),
                k => parts.push(k.clone()),
            }
        }
        let diameter_constants = match (a.diameter_constants, b.diameter_constants) {
            (Some(x), Some(y)) if a.extremal.is_some() && a.extremal == b.extremal => {
                Some(DiameterConstants {
                    k: x.k.max(y.k),
                    t: x.t * y.t / (x.t + y.t),
                })
            }
            _ => None,
        };
        let extremal = if a.extremal.is_some() && a.extremal == b.extremal {
            a.extremal.clone()
        } else {
            None
        };
        Ok(Self {
            name: format!("{}*{}", a.name, b.name),
            tau: a.tau + b.tau,
            dim: a.dim,
            kind: Kind::Product(parts),
            diameter_constants,
            extremal,
        })
    }

    /// Parse `perimeter`, `moment`, `measure` or `*`-separated products.
    pub fn parse(expr: &str, dim: usize) -> Result<Self> {
        let mut parts = expr.split('*').map(str::trim);
        let first = parts
            .next()
            .filter(|s| !s.is_empty())
            .ok_or_else(|| Error::UnknownFunctional(expr.into()))?;
        let mut f = Self::builtin(first, dim)?;
        for p in parts {
            f = Self::product(&f, &Self::builtin(p, dim)?)?;
        }
        Ok(f)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn diameter_constants(&self) -> Option<DiameterConstants> {
        self.diameter_constants
    }

    pub fn extremal_body(&self) -> Option<&AnalyticBody> {
        self.extremal.as_ref()
    }

    pub fn eval(&self, body: &ConvexBody) -> f64 {
        self.kind.eval(body)
    }

    pub fn eval_union(&self, u: &BodyUnion) -> f64 {
        self.kind.eval_union(u)
    }

    pub fn eval_analytic(&self, body: &AnalyticBody) -> Option<f64> {
        self.kind.eval_analytic(body)
    }

    /// Scale factor `α` with `T(αΩ) = c`.
    pub fn restoring_scale(&self, current: f64, c: f64) -> f64 {
        (c / current).powf(1.0 / self.tau)
    }

    /// `T*`, the infimum of `T` over unit-measure convex bodies, when known
    /// in closed form.
    pub fn t_star(&self) -> Result<FunctionalConstants> {
        if matches!(self.kind, Kind::Measure) {
            return Ok(FunctionalConstants {
                t_star: 1.0,
                attained_by: "every unit-measure body".into(),
                estimate: false,
            });
        }
        let body = self.extremal.as_ref().ok_or_else(|| {
            Error::MissingEstimate(format!(
                "no extremal body known for {}; estimate T* with the optimizer",
                self.name
            ))
        })?;
        let meas = body.functionals().measure;
        let value = self
            .eval_analytic(body)
            .ok_or_else(|| Error::MissingEstimate(self.name.clone()))?;
        let m = self.dim as f64;
        Ok(FunctionalConstants {
            t_star: value / meas.powf(self.tau / m),
            attained_by: match body {
                AnalyticBody::Ball { .. } => "unit-measure ball".into(),
                other => format!("{other:?}"),
            },
            estimate: false,
        })
    }

    /// Right-hand side of the diameter bound for a body with the given
    /// values of `T` and measure.
    pub fn diameter_bound(&self, t_value: f64, measure: f64) -> Option<f64> {
        let d = self.diameter_constants?;
        let m = self.dim as f64;
        Some(d.k * t_value.powf(d.t) * measure.powf((1.0 - d.t * self.tau) / m))
    }
}

/// Perturbation certificate `|T(A) − T(B)| ≤ 2τ 3^τ ε/ρ(A) · T(A)` with
/// `ε = d^H(A, B) ≤ ρ(A)/2`.
pub fn hausdorff_perturbation_bound(
    f: &SetFunctional,
    a: &ConvexBody,
    b: &ConvexBody,
) -> Result<InequalityCertificate> {
    let eps = hausdorff_distance(a, b);
    let rho = a.inradius();
    if eps > 0.5 * rho {
        return Err(Error::HypothesisViolated(format!(
            "d_H = {eps} exceeds half the inradius {rho}"
        )));
    }
    let ta = f.eval(a);
    let tau = f.tau();
    let lhs = (ta - f.eval(b)).abs();
    let rhs = 2.0 * tau * 3f64.powf(tau) * eps / rho * ta;
    Ok(InequalityCertificate::new(
        &format!("functional-stability-{}", f.name()),
        lhs,
        rhs,
        GEOMETRIC_TOLERANCE * ta.max(1.0),
        digest(&[a, b], &[tau]),
    ))
}

/// Worst observed slack of one hypothesis over the random sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub hypothesis: String,
    pub tested: usize,
    pub violations: usize,
    pub worst_slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub functional: String,
    pub samples: usize,
    pub seed: u64,
    pub checks: Vec<HypothesisCheck>,
}

impl HypothesisReport {
    pub fn check(&self, name: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.hypothesis == name)
    }

    pub fn violations(&self) -> usize {
        self.checks.iter().map(|c| c.violations).sum()
    }
}

struct Tally {
    name: &'static str,
    tested: usize,
    violations: usize,
    worst: f64,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            tested: 0,
            violations: 0,
            worst: f64::INFINITY,
        }
    }

    /// Record a slack; negative beyond `tol` is a violation.
    fn add(&mut self, slack: f64, tol: f64) {
        self.tested += 1;
        self.worst = self.worst.min(slack);
        if slack < -tol {
            self.violations += 1;
        }
    }

    fn finish(self) -> HypothesisCheck {
        HypothesisCheck {
            hypothesis: self.name.into(),
            tested: self.tested,
            violations: self.violations,
            worst_slack: self.worst,
        }
    }
}

const REL_TOL: f64 = 1e-9;

/// Randomized test of invariance, homogeneity, monotonicity, positivity,
/// the diameter bound and `T ≥ T*` on unit-measure bodies.
pub fn check_hypotheses(f: &SetFunctional, samples: usize, seed: u64) -> Result<HypothesisReport> {
    if samples == 0 {
        return Err(Error::InvalidConfig("samples must be >= 1".into()));
    }
    let t_star = f.t_star().ok().map(|c| c.t_star);
    let mut isometry = Tally::new("isometry");
    let mut homogeneity = Tally::new("homogeneity");
    let mut monotone = Tally::new("monotonicity");
    let mut positive = Tally::new("positivity");
    let mut diameter = Tally::new("diameter-bound");
    let mut lower = Tally::new("t-star");
    for i in 0..samples {
        let mut r = sampling::substream(seed, i as u64);
        let body = sampling::random_body(&mut r);
        let t = f.eval(&body);
        // zero counts as a violation, hence the strictly negative tolerance
        positive.add(t, -f64::MIN_POSITIVE);
        let (angle, shift) = sampling::rigid_motion(&mut r);
        let moved = body.rotate(angle).translate(shift);
        isometry.add(REL_TOL - ((f.eval(&moved) - t) / t).abs(), 0.0);
        let alpha = 10f64.powf(rand::Rng::gen_range(&mut r, -1.0..1.0));
        let scaled = body.scale(alpha)?;
        let want = alpha.powf(f.tau()) * t;
        homogeneity.add(REL_TOL - ((f.eval(&scaled) - want) / want).abs(), 0.0);
        let inner = sampling::nested_inside(&body, &mut r);
        monotone.add(t - f.eval(&inner), REL_TOL * t);
        if let Some(bound) = f.diameter_bound(t, body.measure()) {
            diameter.add(bound - body.diameter(), REL_TOL * bound);
        }
        if let Some(ts) = t_star {
            let ratio = t / body.measure().powf(f.tau() / f.dim() as f64);
            lower.add(ratio - ts, REL_TOL * ts);
        }
    }
    let mut checks = vec![
        isometry.finish(),
        homogeneity.finish(),
        monotone.finish(),
        positive.finish(),
    ];
    if diameter.tested > 0 {
        checks.push(diameter.finish());
    }
    if lower.tested > 0 {
        checks.push(lower.finish());
    }
    Ok(HypothesisReport {
        functional: f.name().into(),
        samples,
        seed,
        checks,
    })
}
