//! Shape optimization for Dirichlet eigenvalues under geometric constraints.
//!
//! A convex component is described by support heights `h_i` on `N` uniform
//! directions, generated from Fourier modes `j = 2..=J` around the unit
//! disc (mode 1 is a translation and is left out). Heights are pushed
//! towards discrete convexity `h_{i-1} + h_{i+1} ≥ 2 h_i cos(2π/N)` by
//! cyclic projection and then snapped to the support heights of the
//! intersection polygon, so every candidate is an actual convex body.
//!
//! Spectra are computed on unit-measure copies of each component; the
//! constraint is then restored exactly through homogeneity. The search is a
//! Hooke-Jeeves pattern search with a halving step.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::rc::Rc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{check_hypotheses, SetFunctional};
use crate::geometry::{best_fit_disc, hausdorff_distance, BodyUnion, ConvexBody, Vec2};
pub use crate::inequalities::{ThresholdEstimates, ThresholdMethod};
use crate::sampling;
use crate::spectral::{eigenvalues, SolverConfig};

pub const DIRECTIONS: usize = 64;
/// Hard cap on eigensolver calls per run.
pub const MAX_EVALUATIONS: usize = 2000;

/// Unit vectors at angles `2πi/n`.
pub fn directions(n: usize) -> Vec<Vec2> {
    (0..n)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / n as f64;
            Vec2::new(a.cos(), a.sin())
        })
        .collect()
}

/// `h_{i-1} + h_{i+1} − 2 h_i cos(2π/N)` for every `i`.
pub fn convexity_defects(h: &[f64]) -> Vec<f64> {
    let n = h.len();
    let c = (2.0 * PI / n as f64).cos();
    (0..n)
        .map(|i| h[(i + n - 1) % n] + h[(i + 1) % n] - 2.0 * c * h[i])
        .collect()
}

/// Cyclic projection onto the discrete convexity cone. Returns the number
/// of sweeps used.
pub fn project_convex(h: &mut [f64]) -> usize {
    let n = h.len();
    let c = (2.0 * PI / n as f64).cos();
    let norm2 = 2.0 + 4.0 * c * c;
    for sweep in 0..200 {
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let (p, q) = ((i + n - 1) % n, (i + 1) % n);
            let g = h[p] + h[q] - 2.0 * c * h[i];
            if g < 0.0 {
                worst = worst.min(g);
                let s = g / norm2;
                h[p] -= s;
                h[q] -= s;
                h[i] += 2.0 * c * s;
            }
        }
        if worst > -1e-12 {
            return sweep + 1;
        }
    }
    200
}

/// The polygon `∩ {x : x·u_i ≤ h_i}` for uniform directions `u_i`.
pub fn body_from_heights(h: &[f64]) -> Result<ConvexBody> {
    let dirs = directions(h.len());
    let r = 4.0 * h.iter().fold(0.0f64, |a, b| a.max(b.abs())) + 1.0;
    let mut poly = vec![
        Vec2::new(-r, -r),
        Vec2::new(r, -r),
        Vec2::new(r, r),
        Vec2::new(-r, r),
    ];
    for (u, &hi) in dirs.iter().zip(h) {
        let mut out = Vec::with_capacity(poly.len() + 1);
        for i in 0..poly.len() {
            let a = poly[i];
            let b = poly[(i + 1) % poly.len()];
            let (da, db) = (a.dot(u) - hi, b.dot(u) - hi);
            if da <= 0.0 {
                out.push(a);
            }
            if (da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0) {
                out.push(a + (b - a) * (da / (da - db)));
            }
        }
        if out.len() < 3 {
            return Err(Error::InvalidBody("empty support-height polygon".into()));
        }
        poly = out;
    }
    ConvexBody::from_points(&poly)
}

/// Support heights of `body` on `n` uniform directions.
pub fn support_heights(body: &ConvexBody, n: usize) -> Vec<f64> {
    directions(n).iter().map(|u| body.support(*u)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProblemKind {
    /// `inf λ_k` over convex bodies with `T = c`.
    Ik,
    /// `inf λ_k` over unions with `|Ω| ≤ 1`, `𝒫 ≤ c`.
    Jk,
    /// `inf λ_k` over unions with `|Ω| = c`.
    Mk,
    /// `inf λ_k` over unions with `𝒫 = c`.
    Pk,
    /// `inf λ_k + T` over convex bodies.
    Hk,
    /// `inf λ_k` over convex bodies with `T ≤ 1`.
    Lk,
    /// `inf λ_k T^{2/τ}` over convex bodies.
    Nk,
    /// Same objective as `Hk`.
    Tk,
}

impl std::str::FromStr for ProblemKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "Ik" | "ik" => Self::Ik,
            "Jk" | "jk" => Self::Jk,
            "Mk" | "mk" => Self::Mk,
            "Pk" | "pk" => Self::Pk,
            "Hk" | "hk" => Self::Hk,
            "Lk" | "lk" => Self::Lk,
            "Nk" | "nk" => Self::Nk,
            "Tk" | "tk" => Self::Tk,
            other => return Err(Error::InvalidConfig(format!("unknown problem {other}"))),
        })
    }
}

impl ProblemKind {
    pub fn is_union(self) -> bool {
        matches!(self, Self::Jk | Self::Mk | Self::Pk)
    }

    pub fn needs_c(self) -> bool {
        matches!(self, Self::Ik | Self::Jk | Self::Mk | Self::Pk)
    }

    fn penalized(self) -> bool {
        matches!(self, Self::Hk | Self::Tk)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationalProblem {
    pub kind: ProblemKind,
    pub k: usize,
    pub c: Option<f64>,
    /// Functional name, e.g. `perimeter` or `perimeter*moment`.
    pub functional: String,
    pub dim: usize,
    pub components: usize,
}

impl VariationalProblem {
    pub fn new(kind: ProblemKind, functional: &str, k: usize, c: Option<f64>) -> Self {
        let functional = match kind {
            ProblemKind::Jk | ProblemKind::Pk => "perimeter",
            ProblemKind::Mk => "measure",
            _ => functional,
        };
        Self {
            kind,
            k,
            c,
            functional: functional.into(),
            dim: 2,
            components: 1,
        }
    }

    pub fn ik(functional: &str, k: usize, c: f64) -> Self {
        Self::new(ProblemKind::Ik, functional, k, Some(c))
    }

    pub fn hk(functional: &str, k: usize) -> Self {
        Self::new(ProblemKind::Hk, functional, k, None)
    }

    pub fn union(kind: ProblemKind, k: usize, c: f64, components: usize) -> Self {
        Self {
            components,
            ..Self::new(kind, "perimeter", k, Some(c))
        }
    }

    pub fn with_components(mut self, n: usize) -> Self {
        self.components = n;
        self
    }

    /// Check the descriptor and build its functional.
    pub fn validate(&self) -> Result<SetFunctional> {
        self.check_shape()?;
        SetFunctional::parse(&self.functional, self.dim)
    }

    fn check_shape(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be >= 1".into()));
        }
        if self.dim != 2 {
            return Err(Error::UnsupportedDimension(self.dim));
        }
        match (self.kind.needs_c(), self.c) {
            (true, None) => return Err(Error::InvalidConfig(format!("{:?} needs c", self.kind))),
            (true, Some(c)) if !(c > 0.0 && c.is_finite()) => {
                return Err(Error::InvalidConfig(format!("c must be positive, got {c}")))
            }
            _ => {}
        }
        if self.components == 0 || (!self.kind.is_union() && self.components != 1) {
            return Err(Error::InvalidConfig(format!(
                "{:?} allows {} components",
                self.kind,
                if self.kind.is_union() {
                    "1..=k"
                } else {
                    "exactly 1"
                }
            )));
        }
        if self.kind.is_union() && self.components > self.k {
            return Err(Error::InvalidConfig("components must not exceed k".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub directions: usize,
    /// Highest Fourier mode `J`.
    pub modes: usize,
    /// Solver used inside the search (count is set from `k`).
    pub search_solver: SolverConfig,
    /// Solver for the reported value.
    pub final_solver: SolverConfig,
    pub max_evaluations: usize,
    pub initial_step: f64,
    pub min_step: f64,
    pub restarts: usize,
    /// Amplitude of random initial mode coefficients.
    pub init_amplitude: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            directions: DIRECTIONS,
            modes: 6,
            search_solver: SolverConfig::new(24.0, 1),
            final_solver: SolverConfig::new(64.0, 1),
            max_evaluations: 500,
            initial_step: 0.25,
            min_step: 2e-3,
            restarts: 1,
            init_amplitude: 0.3,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.directions < 8 {
            return Err(Error::InvalidConfig("need at least 8 directions".into()));
        }
        if self.modes < 2 || 2 * self.modes >= self.directions {
            return Err(Error::InvalidConfig(format!(
                "modes must lie in 2..{}",
                self.directions / 2
            )));
        }
        if self.max_evaluations == 0 || self.max_evaluations > MAX_EVALUATIONS {
            return Err(Error::InvalidConfig(format!(
                "max_evaluations must lie in 1..={MAX_EVALUATIONS}"
            )));
        }
        if !(self.initial_step > 0.0 && self.min_step > 0.0 && self.min_step <= self.initial_step) {
            return Err(Error::InvalidConfig("bad step sizes".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be >= 1".into()));
        }
        self.search_solver.validate()?;
        self.final_solver.validate()
    }

    fn coeffs_per_component(&self) -> usize {
        2 * (self.modes - 1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationRun {
    pub problem: VariationalProblem,
    pub minimizer: BodyUnion,
    /// Objective at the final solver resolution.
    pub value: f64,
    /// Objective at the search resolution.
    pub search_value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub seed: u64,
    /// `(iteration, value)` for every accepted step.
    pub history: Vec<(usize, f64)>,
    pub diagnostics: BTreeMap<String, f64>,
    /// Search parameters of the minimizer, usable as a warm start.
    pub parameters: Vec<f64>,
}

impl OptimizationRun {
    /// The single component of a convex-body run.
    pub fn body(&self) -> &ConvexBody {
        &self.minimizer.components()[0]
    }

    pub fn history_csv(&self) -> String {
        let mut s = String::from("iteration,value\n");
        for (i, v) in &self.history {
            s.push_str(&format!("{i},{v:.16e}\n"));
        }
        s
    }
}

/// Spectrum and functionals of one unit-measure component.
struct Component {
    body: ConvexBody,
    eigs: Vec<f64>,
    t_value: f64,
    perimeter: f64,
}

/// Evaluated candidate: objective and the actual areas of the kept
/// components (zero for dropped ones).
struct Candidate {
    value: f64,
    areas: Vec<f64>,
}

struct Objective<'a> {
    problem: &'a VariationalProblem,
    functional: &'a SetFunctional,
    solver: SolverConfig,
    cos: Vec<Vec<f64>>,
    sin: Vec<Vec<f64>>,
    ncoef: usize,
    size_vars: bool,
    cache: HashMap<Vec<u64>, Option<Rc<Component>>>,
    evaluations: usize,
}

impl<'a> Objective<'a> {
    fn new(
        problem: &'a VariationalProblem,
        functional: &'a SetFunctional,
        cfg: &OptimizerConfig,
        solver: SolverConfig,
    ) -> Self {
        let n = cfg.directions;
        let modes = 2..=cfg.modes;
        let angle = |i: usize| 2.0 * PI * i as f64 / n as f64;
        let cos = modes
            .clone()
            .map(|j| (0..n).map(|i| (j as f64 * angle(i)).cos()).collect())
            .collect();
        let sin = modes
            .map(|j| (0..n).map(|i| (j as f64 * angle(i)).sin()).collect())
            .collect();
        Self {
            problem,
            functional,
            solver: SolverConfig {
                count: problem.k,
                ..solver
            },
            cos,
            sin,
            ncoef: cfg.coeffs_per_component(),
            size_vars: problem.kind.is_union() && problem.components > 1,
            cache: HashMap::new(),
            evaluations: 0,
        }
    }

    fn block(&self) -> usize {
        self.ncoef + usize::from(self.size_vars)
    }

    fn dimension(&self) -> usize {
        self.problem.components * self.block() + usize::from(self.problem.kind.penalized())
    }

    /// Step scale per coordinate: mode `j` moves by `2/j²`, sizes by 1.
    fn weights(&self) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.dimension());
        for _ in 0..self.problem.components {
            if self.size_vars {
                w.push(1.0);
            }
            for j in 2..2 + self.ncoef / 2 {
                let s = 2.0 / (j * j) as f64;
                w.push(s);
                w.push(s);
            }
        }
        if self.problem.kind.penalized() {
            w.push(1.0);
        }
        w
    }

    fn heights(&self, coef: &[f64]) -> Vec<f64> {
        let n = self.cos[0].len();
        let mut h = vec![1.0; n];
        for (m, pair) in coef.chunks(2).enumerate() {
            for i in 0..n {
                h[i] += pair[0] * self.cos[m][i] + pair[1] * self.sin[m][i];
            }
        }
        project_convex(&mut h);
        h
    }

    fn unit_body(&self, coef: &[f64]) -> Result<ConvexBody> {
        let b = body_from_heights(&self.heights(coef))?;
        let b = b.scale(b.measure().powf(-0.5))?;
        Ok(b.translate(-b.centroid()))
    }

    fn component(&mut self, coef: &[f64]) -> Option<Rc<Component>> {
        let key: Vec<u64> = coef.iter().map(|c| c.to_bits()).collect();
        if let Some(hit) = self.cache.get(&key) {
            return hit.clone();
        }
        self.evaluations += 1;
        let comp = self.unit_body(coef).ok().and_then(|body| {
            let eigs = eigenvalues(&body, &self.solver).ok()?.eigenvalues;
            Some(Rc::new(Component {
                t_value: self.functional.eval(&body),
                perimeter: body.perimeter(),
                eigs,
                body,
            }))
        });
        self.cache.insert(key, comp.clone());
        comp
    }

    fn split<'x>(&self, x: &'x [f64], i: usize) -> (Option<f64>, &'x [f64]) {
        let b = &x[i * self.block()..(i + 1) * self.block()];
        if self.size_vars {
            (Some(b[0]), &b[1..])
        } else {
            (None, b)
        }
    }

    fn components(&mut self, x: &[f64]) -> Option<Vec<(f64, Rc<Component>)>> {
        (0..self.problem.components)
            .map(|i| {
                let (w, coef) = self.split(x, i);
                let coef = coef.to_vec();
                self.component(&coef).map(|c| (w.unwrap_or(0.0).exp(), c))
            })
            .collect()
    }

    fn evaluate(&mut self, x: &[f64]) -> Candidate {
        let infeasible = Candidate {
            value: f64::INFINITY,
            areas: vec![],
        };
        let Some(comps) = self.components(x) else {
            return infeasible;
        };
        let k = self.problem.k;
        let kind = self.problem.kind;
        if kind.is_union() {
            return union_value(kind, k, self.problem.c.unwrap_or(1.0), &comps);
        }
        let comp = &comps[0].1;
        let lam = comp.eigs[k - 1];
        let tau = self.functional.tau();
        let t = comp.t_value;
        let (value, scale) = match kind {
            ProblemKind::Ik => {
                let a = self.functional.restoring_scale(t, self.problem.c.unwrap());
                (lam / (a * a), a)
            }
            ProblemKind::Lk => {
                let a = self.functional.restoring_scale(t, 1.0);
                (lam / (a * a), a)
            }
            ProblemKind::Nk => (lam * t.powf(2.0 / tau), 1.0),
            _ => {
                let s = x[x.len() - 1].exp();
                (lam / (s * s) + s.powf(tau) * t, s)
            }
        };
        Candidate {
            value,
            areas: vec![scale * scale],
        }
    }

    /// Assemble the actual minimizer for parameters `x`.
    fn realize(&mut self, x: &[f64]) -> Result<(BodyUnion, Candidate)> {
        let cand = self.evaluate(x);
        if !cand.value.is_finite() {
            return Err(Error::SolverNoConvergence(
                "minimizer could not be evaluated".into(),
            ));
        }
        let comps = self.components(x).expect("evaluated above");
        let mut bodies = Vec::new();
        for ((_, c), &area) in comps.iter().zip(&cand.areas) {
            if area > 0.0 {
                bodies.push(c.body.scale(area.sqrt())?);
            }
        }
        Ok((lay_out(bodies)?, cand))
    }
}

/// Union objective. Components that do not contribute to `λ_1..λ_k` are
/// dropped and the remainder rescaled, which can only lower `λ_k`.
fn union_value(kind: ProblemKind, k: usize, c: f64, comps: &[(f64, Rc<Component>)]) -> Candidate {
    let mut keep: Vec<bool> = vec![true; comps.len()];
    loop {
        let (mut meas, mut per) = (0.0, 0.0);
        for ((a, comp), &on) in comps.iter().zip(&keep) {
            if on {
                meas += a;
                per += comp.perimeter * a.sqrt();
            }
        }
        // β scales lengths, so areas scale by β²
        let beta = match kind {
            ProblemKind::Jk => (1.0 / meas.sqrt()).min(c / per),
            ProblemKind::Mk => (c / meas).sqrt(),
            _ => c / per,
        };
        let b2 = beta * beta;
        let mut all: Vec<(f64, usize)> = Vec::new();
        for (i, ((a, comp), &on)) in comps.iter().zip(&keep).enumerate() {
            if on {
                all.extend(comp.eigs.iter().map(|l| (l / (a * b2), i)));
            }
        }
        all.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut used = vec![false; comps.len()];
        for &(_, i) in &all[..k] {
            used[i] = true;
        }
        if used == keep {
            let areas = comps
                .iter()
                .zip(&keep)
                .map(|((a, _), &on)| if on { a * b2 } else { 0.0 })
                .collect();
            return Candidate {
                value: all[k - 1].0,
                areas,
            };
        }
        keep = used;
    }
}

/// Place components left to right with clear gaps, centred at the origin.
fn lay_out(bodies: Vec<ConvexBody>) -> Result<BodyUnion> {
    if bodies.len() == 1 {
        return Ok(BodyUnion::single(bodies.into_iter().next().unwrap()));
    }
    let gap = 0.1 * bodies.iter().map(|b| b.diameter()).fold(0.0, f64::max);
    let mut cursor = 0.0;
    let mut placed = Vec::new();
    for b in bodies {
        let xmin = b
            .vertices()
            .iter()
            .map(|v| v.x)
            .fold(f64::INFINITY, f64::min);
        let xmax = b
            .vertices()
            .iter()
            .map(|v| v.x)
            .fold(f64::NEG_INFINITY, f64::max);
        let c = b.centroid();
        placed.push(b.translate(Vec2::new(cursor - xmin, -c.y)));
        cursor += xmax - xmin + gap;
    }
    BodyUnion::new(placed)
}

struct SearchResult {
    x: Vec<f64>,
    value: f64,
    history: Vec<(usize, f64)>,
    iterations: usize,
}

/// Hooke-Jeeves pattern search. Coordinates are polled in index order,
/// `+` before `−`; the first improvement along a coordinate is taken.
fn pattern_search(
    obj: &mut Objective<'_>,
    x0: Vec<f64>,
    cfg: &OptimizerConfig,
    budget_start: usize,
) -> SearchResult {
    let w = obj.weights();
    let mut x = x0;
    let mut f = obj.evaluate(&x).value;
    let mut history = vec![(0, f)];
    let mut iterations = 0;
    let mut step = cfg.initial_step;
    let budget = |o: &Objective<'_>| o.evaluations - budget_start < cfg.max_evaluations;
    // size-only moves hit the cache, so also cap the number of polls
    let mut polls = 0;
    let max_polls = 20 * cfg.max_evaluations;
    let better = |new: f64, old: f64| new < old - 1e-12 * old.abs();
    while step >= cfg.min_step && budget(obj) && polls < max_polls {
        let base = x.clone();
        let fbase = f;
        'coords: for d in 0..x.len() {
            for sign in [1.0, -1.0] {
                if !budget(obj) {
                    break 'coords;
                }
                polls += 1;
                let mut y = x.clone();
                y[d] += sign * step * w[d];
                let fy = obj.evaluate(&y).value;
                if better(fy, f) {
                    x = y;
                    f = fy;
                    continue 'coords;
                }
            }
        }
        if better(f, fbase) {
            iterations += 1;
            history.push((iterations, f));
            if budget(obj) {
                let p: Vec<f64> = x.iter().zip(&base).map(|(a, b)| 2.0 * a - b).collect();
                let fp = obj.evaluate(&p).value;
                if better(fp, f) {
                    x = p;
                    f = fp;
                    iterations += 1;
                    history.push((iterations, f));
                }
            }
        } else {
            step *= 0.5;
        }
    }
    SearchResult {
        x,
        value: f,
        history,
        iterations,
    }
}

fn initial_point(
    obj: &Objective<'_>,
    cfg: &OptimizerConfig,
    seed: u64,
    restart: usize,
) -> Vec<f64> {
    let mut r = sampling::substream(seed, restart as u64);
    let w = obj.weights();
    let mut x: Vec<f64> = w
        .iter()
        .map(|wi| r.gen_range(-1.0..1.0) * cfg.init_amplitude * wi)
        .collect();
    if obj.size_vars {
        for i in 0..obj.problem.components {
            x[i * obj.block()] = 0.0;
        }
    }
    if obj.problem.kind.penalized() {
        let last = x.len() - 1;
        x[last] = 0.0;
    }
    x
}

fn hypotheses_ok(f: &SetFunctional, seed: u64) -> Result<()> {
    let report = check_hypotheses(f, 16, seed)?;
    for h in ["isometry", "homogeneity", "positivity"] {
        if let Some(c) = report.check(h) {
            if c.violations > 0 {
                return Err(Error::HypothesisFailed(format!(
                    "{} fails {h} on {} of {} samples",
                    f.name(),
                    c.violations,
                    c.tested
                )));
            }
        }
    }
    Ok(())
}

/// Minimize `problem` from `restarts` seeded starts (or from `warm`), and
/// re-evaluate the best point with the final solver.
pub fn optimize(
    problem: &VariationalProblem,
    cfg: &OptimizerConfig,
    seed: u64,
    warm: Option<&[f64]>,
) -> Result<OptimizationRun> {
    let functional = problem.validate()?;
    optimize_with(problem, &functional, cfg, seed, warm)
}

/// [`optimize`] with an explicit functional, e.g. a custom one. The
/// functional is first spot-checked for isometry invariance, homogeneity
/// and positivity.
pub fn optimize_with(
    problem: &VariationalProblem,
    functional: &SetFunctional,
    cfg: &OptimizerConfig,
    seed: u64,
    warm: Option<&[f64]>,
) -> Result<OptimizationRun> {
    cfg.validate()?;
    problem.check_shape()?;
    if functional.dim() != problem.dim {
        return Err(Error::InvalidConfig(
            "functional dimension differs from the problem".into(),
        ));
    }
    hypotheses_ok(functional, seed)?;
    let functional = functional.clone();
    let mut obj = Objective::new(problem, &functional, cfg, cfg.search_solver);
    let mut best: Option<SearchResult> = None;
    let mut starts: Vec<Vec<f64>> = Vec::new();
    if let Some(w) = warm {
        if w.len() != obj.dimension() {
            return Err(Error::InvalidConfig(format!(
                "warm start has {} parameters, expected {}",
                w.len(),
                obj.dimension()
            )));
        }
        starts.push(w.to_vec());
    }
    for r in 0..cfg.restarts {
        starts.push(initial_point(&obj, cfg, seed, r));
    }
    if warm.is_some() {
        starts.truncate(1);
    }
    for x0 in starts {
        let before = obj.evaluations;
        let res = pattern_search(&mut obj, x0, cfg, before);
        if best.as_ref().is_none_or(|b| res.value < b.value) {
            best = Some(res);
        }
    }
    let best = best.expect("at least one start");
    if !best.value.is_finite() {
        return Err(Error::SolverNoConvergence(
            "no feasible candidate found".into(),
        ));
    }
    let evaluations = obj.evaluations;
    let mut fin = Objective::new(problem, &functional, cfg, cfg.final_solver);
    let (minimizer, cand) = fin.realize(&best.x)?;
    let diagnostics = diagnostics(problem, &functional, &minimizer, cand.value);
    Ok(OptimizationRun {
        problem: problem.clone(),
        minimizer,
        value: cand.value,
        search_value: best.value,
        iterations: best.iterations,
        evaluations,
        seed,
        history: best.history,
        diagnostics,
        parameters: best.x,
    })
}

fn constraint_residual(p: &VariationalProblem, f: &SetFunctional, u: &BodyUnion) -> f64 {
    let rel = |v: f64, c: f64| ((v - c) / c).abs();
    match p.kind {
        ProblemKind::Ik => rel(f.eval_union(u), p.c.unwrap()),
        ProblemKind::Lk => (f.eval_union(u) - 1.0).max(0.0),
        ProblemKind::Mk => rel(u.measure(), p.c.unwrap()),
        ProblemKind::Pk => rel(u.perimeter(), p.c.unwrap()),
        ProblemKind::Jk => {
            let c = p.c.unwrap();
            (u.measure() - 1.0)
                .max(0.0)
                .max((u.perimeter() - c) / c)
                .max(0.0)
        }
        _ => 0.0,
    }
}

fn diagnostics(
    p: &VariationalProblem,
    f: &SetFunctional,
    u: &BodyUnion,
    value: f64,
) -> BTreeMap<String, f64> {
    let mut d = BTreeMap::new();
    let main = u
        .components()
        .iter()
        .max_by(|a, b| a.measure().total_cmp(&b.measure()))
        .expect("nonempty union");
    let (dh, _, _) = best_fit_disc(main, None);
    d.insert("components".into(), u.components().len() as f64);
    d.insert("measure".into(), u.measure());
    d.insert("perimeter".into(), u.perimeter());
    d.insert("functional".into(), f.eval_union(u));
    d.insert("inradius".into(), u.inradius());
    d.insert("diameter".into(), u.diameter());
    d.insert("hausdorff_to_disc".into(), dh);
    d.insert("hausdorff_to_disc_rel".into(), dh / main.diameter());
    d.insert("constraint_residual".into(), constraint_residual(p, f, u));
    d.insert("inradius_reference".into(), 2f64.powf(-1.5) / value.sqrt());
    d
}

pub fn minimize_ik(
    functional: &str,
    k: usize,
    c: f64,
    cfg: &OptimizerConfig,
    seed: u64,
) -> Result<OptimizationRun> {
    optimize(&VariationalProblem::ik(functional, k, c), cfg, seed, None)
}

pub fn minimize_jk(
    k: usize,
    c: f64,
    components: usize,
    cfg: &OptimizerConfig,
    seed: u64,
) -> Result<OptimizationRun> {
    best_over_component_counts(ProblemKind::Jk, k, c, components, cfg, seed)
}

pub fn minimize_hk(
    functional: &str,
    k: usize,
    cfg: &OptimizerConfig,
    seed: u64,
) -> Result<OptimizationRun> {
    optimize(&VariationalProblem::hk(functional, k), cfg, seed, None)
}

/// Union problems started from every component count `components, …, 1`;
/// the lowest final value wins (earlier count on ties).
pub fn best_over_component_counts(
    kind: ProblemKind,
    k: usize,
    c: f64,
    components: usize,
    cfg: &OptimizerConfig,
    seed: u64,
) -> Result<OptimizationRun> {
    let mut best: Option<OptimizationRun> = None;
    for n in (1..=components).rev() {
        let run = optimize(&VariationalProblem::union(kind, k, c, n), cfg, seed, None)?;
        if best.as_ref().is_none_or(|b| run.value < b.value) {
            best = Some(run);
        }
    }
    best.ok_or_else(|| Error::InvalidConfig("components must be >= 1".into()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JkPoint {
    pub c: f64,
    /// Reported value after the envelope pass.
    pub value: f64,
    /// Value of the run at this `c` alone.
    pub raw_value: f64,
    pub regime: String,
    pub minimizer: BodyUnion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JkCurve {
    pub k: usize,
    pub points: Vec<JkPoint>,
}

impl JkCurve {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("c,J_k,regime_label\n");
        for p in &self.points {
            s.push_str(&format!("{:.16e},{:.16e},{}\n", p.c, p.value, p.regime));
        }
        s
    }
}

/// Regime of `c` given threshold estimates.
pub fn regime_label(c: f64, est: Option<&ThresholdEstimates>) -> &'static str {
    match est {
        None => "unlabelled",
        Some(e) if c >= e.mu_k => "measure-bound",
        Some(e) if c <= e.pi_k.powf(-0.5) => "perimeter-bound",
        Some(_) => "intermediate",
    }
}

/// `J_k` along an increasing grid, warm-started from the previous point.
///
/// Reported values are made monotone and `c²J_k` nondecreasing by
/// transferring minimizers between neighbours: a minimizer at `c_i` is
/// feasible at `c_{i+1}`, and one at `c_{i+1}` shrunk by `c_i/c_{i+1}` is
/// feasible at `c_i`.
pub fn jk_curve(
    k: usize,
    c_grid: &[f64],
    components: usize,
    cfg: &OptimizerConfig,
    seed: u64,
    thresholds: Option<&ThresholdEstimates>,
) -> Result<JkCurve> {
    if c_grid.is_empty() || c_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidConfig(
            "c grid must be strictly increasing".into(),
        ));
    }
    let mut runs: Vec<OptimizationRun> = Vec::new();
    for n in (1..=components).rev() {
        let mut prev: Option<Vec<f64>> = None;
        for (i, &c) in c_grid.iter().enumerate() {
            let p = VariationalProblem::union(ProblemKind::Jk, k, c, n);
            let run = optimize(&p, cfg, seed.wrapping_add(i as u64), prev.as_deref())?;
            prev = Some(run.parameters.clone());
            match runs.get_mut(i) {
                Some(r) if run.value >= r.value => {}
                Some(r) => *r = run,
                None => runs.push(run),
            }
        }
    }
    let raw: Vec<f64> = runs.iter().map(|r| r.value).collect();
    let mut vals = raw.clone();
    let mut bodies: Vec<BodyUnion> = runs.iter().map(|r| r.minimizer.clone()).collect();
    for i in 1..vals.len() {
        if vals[i - 1] < vals[i] {
            vals[i] = vals[i - 1];
            bodies[i] = bodies[i - 1].clone();
        }
    }
    for i in (0..vals.len() - 1).rev() {
        let (c0, c1) = (c_grid[i], c_grid[i + 1]);
        let r = c1 / c0;
        let mut cand = vals[i + 1] * r * r;
        if cand < vals[i] {
            while c0 * c0 * cand > c1 * c1 * vals[i + 1] {
                cand = cand.next_down();
            }
            vals[i] = cand;
            bodies[i] = bodies[i + 1].scale(c0 / c1)?;
        }
    }
    let points = c_grid
        .iter()
        .zip(vals.iter().zip(&raw))
        .zip(bodies)
        .map(|((&c, (&value, &raw_value)), minimizer)| JkPoint {
            c,
            value,
            raw_value,
            regime: regime_label(c, thresholds).into(),
            minimizer,
        })
        .collect();
    Ok(JkCurve { k, points })
}

/// `n(τ) = (τ/2)^{2/(τ+2)} + (2/τ)^{τ/(τ+2)}`.
pub fn n_tau(tau: f64) -> f64 {
    (tau / 2.0).powf(2.0 / (tau + 2.0)) + (2.0 / tau).powf(tau / (tau + 2.0))
}

/// Optimal penalized scale `t(Ω) = (2λ_k/(τT))^{1/(τ+2)}`.
pub fn penalized_scale(lambda: f64, t_value: f64, tau: f64) -> f64 {
    (2.0 * lambda / (tau * t_value)).powf(1.0 / (tau + 2.0))
}

/// Rotation and reflection aligned Hausdorff distance after matching
/// centroids.
pub fn aligned_hausdorff(a: &ConvexBody, b: &ConvexBody) -> f64 {
    let a0 = a.translate(-a.centroid());
    let b0 = b.translate(-b.centroid());
    let mirror = ConvexBody::from_points(
        &b0.vertices()
            .iter()
            .map(|v| Vec2::new(-v.x, v.y))
            .collect::<Vec<_>>(),
    )
    .expect("reflection of a valid body");
    let mut best = f64::INFINITY;
    for cand in [&b0, &mirror] {
        let f = |th: f64| hausdorff_distance(&a0, &cand.rotate(th));
        let steps = 360;
        let (mut th_best, mut v_best) = (0.0, f(0.0));
        for i in 1..steps {
            let th = 2.0 * PI * i as f64 / steps as f64;
            let v = f(th);
            if v < v_best {
                v_best = v;
                th_best = th;
            }
        }
        let (mut lo, mut hi) = (
            th_best - 2.0 * PI / steps as f64,
            th_best + 2.0 * PI / steps as f64,
        );
        for _ in 0..40 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if f(m1) < f(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        best = best.min(v_best).min(f(0.5 * (lo + hi)));
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub tau: f64,
    pub n_tau: f64,
    /// `N_k = λ_k(Ω*) T(Ω*)^{2/τ}` from the constrained run.
    pub n_k: f64,
    pub predicted: f64,
    pub direct: f64,
    pub relative_gap: f64,
    pub scale: f64,
    /// Aligned `d^H(t(Ω*)Ω*, H_k minimizer) / diam(H_k minimizer)`.
    pub shape_gap: f64,
}

/// Compare a direct penalized run with the value and minimizer predicted
/// from a constrained `T = 1` run.
pub fn penalized_equivalence(
    constrained: &OptimizationRun,
    penalized: &OptimizationRun,
) -> Result<EquivalenceReport> {
    let (pc, pp) = (&constrained.problem, &penalized.problem);
    if !matches!(pc.kind, ProblemKind::Ik | ProblemKind::Lk)
        || !pp.kind.penalized()
        || pc.k != pp.k
        || pc.functional != pp.functional
    {
        return Err(Error::MismatchedRuns(
            "need an I_k/L_k run and an H_k run with the same k and functional".into(),
        ));
    }
    let f = SetFunctional::parse(&pc.functional, pc.dim)?;
    let tau = f.tau();
    let body = constrained.body();
    let t_value = f.eval(body);
    let lambda = constrained.value;
    let n_k = lambda * t_value.powf(2.0 / tau);
    let predicted = n_tau(tau) * n_k.powf(tau / (tau + 2.0));
    let scale = penalized_scale(lambda, t_value, tau);
    let rescaled = body.scale(scale)?;
    let target = penalized.body();
    Ok(EquivalenceReport {
        tau,
        n_tau: n_tau(tau),
        n_k,
        predicted,
        direct: penalized.value,
        relative_gap: (penalized.value - predicted).abs() / predicted,
        scale,
        shape_gap: aligned_hausdorff(&rescaled, target) / target.diameter(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceEntry {
    pub k: usize,
    pub value: f64,
    /// `d^H` to the ball `α_c D` after optimal translation.
    pub hausdorff_to_ball: f64,
    pub measure: f64,
    pub measure_lower_bound: f64,
    pub diameter: f64,
    pub diameter_upper_bound: Option<f64>,
    pub inradius: f64,
    pub inradius_reference: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub functional: String,
    pub c: f64,
    pub ball_radius: f64,
    pub entries: Vec<ConvergenceEntry>,
    /// Number of `k` with `d^H_{k+1} > d^H_k`.
    pub inversions: usize,
    pub largest_inversion: f64,
    pub max_distance: f64,
    /// At most one inversion, smaller than 10% of the largest distance.
    pub trend_ok: bool,
    /// Measure and diameter bounds hold within `allowance` for every `k`.
    pub bounds_ok: bool,
    pub allowance: f64,
}

/// Distances of constrained minimizers to the rescaled extremal ball, and
/// the finite-k measure and diameter bounds.
pub fn convergence_diagnostics(
    runs: &[OptimizationRun],
    allowance: f64,
) -> Result<ConvergenceReport> {
    let first = runs
        .first()
        .ok_or_else(|| Error::MismatchedRuns("no runs".into()))?;
    let p0 = &first.problem;
    if p0.kind != ProblemKind::Ik {
        return Err(Error::MismatchedRuns("runs must be I_k runs".into()));
    }
    for (i, r) in runs.iter().enumerate() {
        let p = &r.problem;
        if p.kind != p0.kind || p.functional != p0.functional || p.c != p0.c || p.k != p0.k + i {
            return Err(Error::MismatchedRuns(format!(
                "run {i} does not continue the sequence (k = {}, functional {}, c {:?})",
                p.k, p.functional, p.c
            )));
        }
    }
    let f = SetFunctional::parse(&p0.functional, p0.dim)?;
    let c = p0.c.unwrap();
    let tau = f.tau();
    let m = p0.dim as f64;
    let ball = f
        .extremal_body()
        .ok_or_else(|| Error::MissingEstimate(format!("{} has no extremal body", f.name())))?;
    let t_d = f
        .eval_analytic(ball)
        .expect("analytic evaluation of the ball");
    let alpha = (c / t_d).powf(1.0 / tau);
    let radius = alpha * ball.inradius();
    let meas_bound = (m / (m + 2.0)).powf(m / 2.0) * (c / t_d).powf(m / tau);
    let diam_bound = f.diameter_constants().map(|d| {
        d.k * ((m + 2.0) / m).powf((d.t * tau - 1.0) / 2.0)
            * c.powf(1.0 / tau)
            * t_d.powf((d.t * tau - 1.0) / tau)
    });
    let entries: Vec<ConvergenceEntry> = runs
        .iter()
        .map(|r| {
            let b = r.body();
            ConvergenceEntry {
                k: r.problem.k,
                value: r.value,
                hausdorff_to_ball: best_fit_disc(b, Some(radius)).0,
                measure: b.measure(),
                measure_lower_bound: meas_bound,
                diameter: b.diameter(),
                diameter_upper_bound: diam_bound,
                inradius: b.inradius(),
                inradius_reference: 2f64.powf(-1.5) / r.value.sqrt(),
            }
        })
        .collect();
    let d: Vec<f64> = entries.iter().map(|e| e.hausdorff_to_ball).collect();
    let max_distance = d.iter().copied().fold(0.0, f64::max);
    let rises: Vec<f64> = d
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&x| x > 0.0)
        .collect();
    let largest_inversion = rises.iter().copied().fold(0.0, f64::max);
    let trend_ok = rises.len() <= 1 && largest_inversion < 0.1 * max_distance;
    let bounds_ok = entries.iter().all(|e| {
        e.measure >= e.measure_lower_bound * (1.0 - allowance)
            && e.diameter_upper_bound
                .is_none_or(|u| e.diameter <= u * (1.0 + allowance))
    });
    Ok(ConvergenceReport {
        functional: f.name().into(),
        c,
        ball_radius: radius,
        entries,
        inversions: rises.len(),
        largest_inversion,
        max_distance,
        trend_ok,
        bounds_ok,
        allowance,
    })
}

/// `μ_k` and `π_k`: closed forms for `k = 1` (disc) and `μ_2` (two equal
/// discs), optimizer estimates over unions of up to `k` components
/// otherwise.
pub fn estimate_thresholds(
    k: usize,
    cfg: &OptimizerConfig,
    seed: u64,
) -> Result<ThresholdEstimates> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be >= 1".into()));
    }
    let closed_mu = match k {
        1 => Some(2.0 * PI.sqrt()),
        2 => Some(2.0 * (2.0 * PI).sqrt()),
        _ => None,
    };
    let closed_pi = (k == 1).then(|| 1.0 / (4.0 * PI));
    let (mu_k, mu_method) = match closed_mu {
        Some(v) => (v, ThresholdMethod::ClosedForm),
        None => {
            let run = best_over_component_counts(ProblemKind::Mk, k, 1.0, k, cfg, seed)?;
            (run.minimizer.perimeter(), ThresholdMethod::Optimizer)
        }
    };
    let (pi_k, pi_method) = match closed_pi {
        Some(v) => (v, ThresholdMethod::ClosedForm),
        None => {
            let run = best_over_component_counts(ProblemKind::Pk, k, 1.0, k, cfg, seed)?;
            (run.minimizer.measure(), ThresholdMethod::Optimizer)
        }
    };
    Ok(ThresholdEstimates {
        k,
        mu_k,
        pi_k,
        mu_method,
        pi_method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn heights_roundtrip() {
        let sq =
            ConvexBody::from_coords(&[[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]]).unwrap();
        let h = support_heights(&sq, 64);
        assert!(convexity_defects(&h).iter().all(|&g| g >= -1e-12));
        let back = body_from_heights(&h).unwrap();
        assert!(hausdorff_distance(&sq, &back) < 1e-12);
    }

    #[test]
    fn projection_and_snap() {
        let mut r = sampling::rng(3);
        let mut h: Vec<f64> = (0..64).map(|_| 1.0 + r.gen_range(-0.3..0.3)).collect();
        let worst = |h: &[f64]| convexity_defects(h).into_iter().fold(0.0, f64::min);
        let before = worst(&h);
        project_convex(&mut h);
        assert!(worst(&h) > 0.1 * before);
        let b = body_from_heights(&h).unwrap();
        // snapped heights are exactly convex
        assert!(worst(&support_heights(&b, 64)) > -1e-12);
        // snapping returns the same body
        let again = body_from_heights(&support_heights(&b, 64)).unwrap();
        assert!(hausdorff_distance(&b, &again) < 1e-9);
    }

    #[test]
    fn penalized_constants() {
        assert_relative_eq!(n_tau(2.0), 2.0, epsilon = 1e-15);
        assert_relative_eq!(
            n_tau(1.0),
            0.5f64.powf(2.0 / 3.0) + 2f64.powf(1.0 / 3.0),
            epsilon = 1e-15
        );
        assert_relative_eq!(n_tau(1.0), 1.88988, epsilon = 1e-5);
        assert_relative_eq!(n_tau(4.0), n_tau(1.0), epsilon = 1e-14);
        let t = penalized_scale(2.0 * PI * PI, 4.0, 1.0);
        assert_relative_eq!(t, 2.1450, epsilon = 1e-4);
    }

    #[test]
    fn problem_validation() {
        assert!(VariationalProblem::ik("perimeter", 0, 1.0)
            .validate()
            .is_err());
        assert!(VariationalProblem::ik("perimeter", 1, -1.0)
            .validate()
            .is_err());
        assert!(
            VariationalProblem::new(ProblemKind::Ik, "perimeter", 1, None)
                .validate()
                .is_err()
        );
        assert!(VariationalProblem::union(ProblemKind::Jk, 1, 2.0, 2)
            .validate()
            .is_err());
        assert!(VariationalProblem::ik("perimeter", 1, 2.0)
            .with_components(2)
            .validate()
            .is_err());
        assert!(VariationalProblem::hk("moment", 2).validate().is_ok());
        assert!("Qk".parse::<ProblemKind>().is_err());
    }

    #[test]
    fn union_value_drops_idle_components() {
        let disc = sampling::regular_polygon(64, 1.0);
        let eigs = eigenvalues(&disc, &SolverConfig::new(24.0, 2))
            .unwrap()
            .eigenvalues;
        let comp = Rc::new(Component {
            t_value: disc.perimeter(),
            perimeter: disc.perimeter(),
            eigs,
            body: disc,
        });
        // k = 1: the small component is idle and gets dropped
        let c = union_value(
            ProblemKind::Mk,
            1,
            1.0,
            &[(1.0, comp.clone()), (0.01, comp.clone())],
        );
        assert_eq!(c.areas[1], 0.0);
        assert_relative_eq!(c.areas[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(c.value, comp.eigs[0], epsilon = 1e-12);
        // k = 2 with two equal discs: both kept, each of area 1/2
        let c = union_value(
            ProblemKind::Mk,
            2,
            1.0,
            &[(1.0, comp.clone()), (1.0, comp.clone())],
        );
        assert_relative_eq!(c.value, 2.0 * comp.eigs[0], epsilon = 1e-12);
    }

    #[test]
    fn aligned_distance_ignores_rigid_motion() {
        let b = sampling::random_body(&mut sampling::rng(5));
        let moved = b.rotate(1.234).translate(Vec2::new(3.0, -2.0));
        assert!(aligned_hausdorff(&b, &moved) < 1e-6);
    }
}
