//! Machine-checkable certificates for the geometric and spectral
//! inequalities, and a seeded randomized suite that runs all of them.
//!
//! Every inequality is normalized to `lhs ≤ rhs`; `slack = rhs − lhs`.
//! A certificate passes when `slack ≥ −tolerance_used`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytic::{box_eigenvalues, constants, omega};
use crate::error::{Error, Result};
use crate::functionals::{hausdorff_perturbation_bound, SetFunctional};
use crate::geometry::{hausdorff_distance, ConvexBody, Vec2};
use crate::sampling;
use crate::spectral::{eigenvalues, SolverConfig, SpectralResult, SOLVER_RELATIVE_ERROR};

/// Relative round-off allowance for purely geometric certificates.
pub const GEOMETRIC_TOLERANCE: f64 = 1e-9;

/// Relative allowance for certificates involving computed eigenvalues.
pub const SPECTRAL_ALLOWANCE: f64 = 2.0 * SOLVER_RELATIVE_ERROR;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityCertificate {
    pub id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub inputs_digest: String,
    pub tolerance_used: f64,
    /// Set when an input is an optimizer estimate rather than exact.
    #[serde(default)]
    pub estimate: bool,
}

impl InequalityCertificate {
    pub fn new(id: &str, lhs: f64, rhs: f64, tolerance: f64, inputs_digest: String) -> Self {
        Self {
            id: id.into(),
            lhs,
            rhs,
            slack: rhs - lhs,
            inputs_digest,
            tolerance_used: tolerance,
            estimate: false,
        }
    }

    fn geometric(id: &str, lhs: f64, rhs: f64, inputs_digest: String) -> Self {
        let scale = lhs.abs().max(rhs.abs()).max(1.0);
        Self::new(id, lhs, rhs, GEOMETRIC_TOLERANCE * scale, inputs_digest)
    }

    pub fn passes(&self) -> bool {
        self.slack >= -self.tolerance_used
    }
}

/// SHA-256 (hex) of the vertex coordinates of `bodies` followed by `params`.
pub fn digest(bodies: &[&ConvexBody], params: &[f64]) -> String {
    let mut h = Sha256::new();
    for b in bodies {
        h.update((b.vertices().len() as u64).to_le_bytes());
        for v in b.vertices() {
            h.update(v.x.to_le_bytes());
            h.update(v.y.to_le_bytes());
        }
    }
    for p in params {
        h.update(p.to_le_bytes());
    }
    hex(&h.finalize())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Short identifier of a body for tabular output.
pub fn body_digest(b: &ConvexBody) -> String {
    digest(&[b], &[])[..16].to_string()
}

const M: f64 = 2.0;

/// The four inradius/diameter/perimeter relations for planar convex bodies.
pub fn check_inradius_bounds(body: &ConvexBody) -> Vec<InequalityCertificate> {
    let d = digest(&[body], &[]);
    let (area, per, rho, diam) = (
        body.measure(),
        body.perimeter(),
        body.inradius(),
        body.diameter(),
    );
    let (w1, w2) = (omega(1), omega(2));
    vec![
        InequalityCertificate::geometric(
            "diameter-inradius",
            diam,
            2.0 * M / w1 * rho.powf(1.0 - M) * area,
            d.clone(),
        ),
        InequalityCertificate::geometric(
            "inradius-diameter",
            2f64.powf(M - 1.0) / (M * w2) * diam.powf(1.0 - M) * area,
            rho,
            d.clone(),
        ),
        InequalityCertificate::geometric("inradius-perimeter", area / per, rho, d.clone()),
        InequalityCertificate::geometric(
            "perimeter-diameter",
            per,
            M * w2 * (0.5 * diam).powf(M - 1.0),
            d,
        ),
    ]
}

/// Perturbation bounds for each functional in `functionals` and for
/// `λ_k`, with `ε = d^H(a, b) ≤ ρ(a)/2`.
pub fn check_stability(
    a: &ConvexBody,
    b: &ConvexBody,
    k: usize,
    cfg: &SolverConfig,
    functionals: &[SetFunctional],
) -> Result<Vec<InequalityCertificate>> {
    let mut out = functionals
        .iter()
        .map(|f| hausdorff_perturbation_bound(f, a, b))
        .collect::<Result<Vec<_>>>()?;
    let cfg = SolverConfig { count: k, ..*cfg };
    let la = eigenvalues(a, &cfg)?.lambda(k);
    let lb = eigenvalues(b, &cfg)?.lambda(k);
    out.push(eigenvalue_perturbation(a, b, k, la, lb)?);
    Ok(out)
}

/// `|λ_k(A) − λ_k(B)| ≤ 16ε/ρ(A) λ_k(A)` from given eigenvalues.
pub fn eigenvalue_perturbation(
    a: &ConvexBody,
    b: &ConvexBody,
    k: usize,
    la: f64,
    lb: f64,
) -> Result<InequalityCertificate> {
    let eps = hausdorff_distance(a, b);
    let rho = a.inradius();
    if eps > 0.5 * rho {
        return Err(Error::HypothesisViolated(format!(
            "d_H = {eps} exceeds half the inradius {rho}"
        )));
    }
    Ok(InequalityCertificate::new(
        &format!("eigenvalue-stability-k{k}"),
        (la - lb).abs(),
        16.0 * eps / rho * la,
        SPECTRAL_ALLOWANCE * la.max(lb),
        digest(&[a, b], &[k as f64]),
    ))
}

/// Lower bound `λ_k ≥ m C_m/(m+2) (k/|Ω|)^{2/m}` for every computed `k`.
pub fn check_li_yau(
    spectrum: &SpectralResult,
    measure: f64,
    dim: usize,
) -> Result<Vec<InequalityCertificate>> {
    li_yau_for(&spectrum.eigenvalues, measure, dim, SPECTRAL_ALLOWANCE)
}

/// Li-Yau certificates for an exact or computed eigenvalue list with the
/// given relative allowance.
pub fn li_yau_for(
    eigs: &[f64],
    measure: f64,
    dim: usize,
    rel_allowance: f64,
) -> Result<Vec<InequalityCertificate>> {
    let c = constants(dim)?;
    let m = dim as f64;
    let d = hex(&Sha256::digest(
        eigs.iter()
            .chain([measure].iter())
            .flat_map(|x| x.to_le_bytes())
            .collect::<Vec<u8>>(),
    ));
    Ok(eigs
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let k = (i + 1) as f64;
            let rhs = m * c.weyl / (m + 2.0) * (k / measure).powf(2.0 / m);
            let tol = (rel_allowance * l).max(GEOMETRIC_TOLERANCE * l.max(1.0));
            InequalityCertificate::new(&format!("li-yau-k{}", i + 1), rhs, l, tol, d.clone())
        })
        .collect())
}

/// `𝒥(Ω) ≥ m/(m+2) ω_m^{-2/m} |Ω|^{(m+2)/m}`.
pub fn check_moment_isoperimetric(body: &ConvexBody) -> InequalityCertificate {
    let bound = M / (M + 2.0) * omega(2).powf(-2.0 / M) * body.measure().powf((M + 2.0) / M);
    InequalityCertificate::geometric(
        "moment-isoperimetric",
        bound,
        body.moment(),
        digest(&[body], &[]),
    )
}

/// Diameter controlled by perimeter (`diam ≤ 𝒫/2` in the plane) and by
/// the moment (`diam ≤ K 𝒥^{1/2} |Ω|^{-1/2}`).
pub fn check_diameter_bounds(body: &ConvexBody) -> Vec<InequalityCertificate> {
    let d = digest(&[body], &[]);
    let k = 4.0 * (M * (M + 1.0).powi(2) * (M + 2.0)).sqrt();
    vec![
        InequalityCertificate::geometric(
            "diameter-perimeter",
            body.diameter(),
            M.powf(2.0 - M) / omega(1)
                * body.perimeter().powf(M - 1.0)
                * body.measure().powf(2.0 - M),
            d.clone(),
        ),
        InequalityCertificate::geometric(
            "diameter-moment",
            body.diameter(),
            k * body.moment().sqrt() / body.measure().sqrt(),
            d,
        ),
    ]
}

/// `λ₁ ≥ (2ρ)^{-2}` for convex bodies.
pub fn check_convex_lambda1(body: &ConvexBody, spectrum: &SpectralResult) -> InequalityCertificate {
    let l1 = spectrum.eigenvalues[0];
    InequalityCertificate::new(
        "convex-lambda1",
        (2.0 * body.inradius()).powi(-2),
        l1,
        SPECTRAL_ALLOWANCE * l1,
        digest(&[body], &[l1]),
    )
}

/// `T(Ω)/|Ω|^{τ/m} ≥ T*`.
pub fn check_normalized_bound(
    f: &SetFunctional,
    body: &ConvexBody,
) -> Result<InequalityCertificate> {
    let ts = f.t_star()?;
    let ratio = f.eval(body) / body.measure().powf(f.tau() / f.dim() as f64);
    let mut c = InequalityCertificate::geometric(
        &format!("normalized-{}", f.name()),
        ts.t_star,
        ratio,
        digest(&[body], &[f.tau()]),
    );
    c.estimate = ts.estimate;
    Ok(c)
}

/// Side `a = (2m)^{-1/(m-1)}` of the unit-perimeter cube.
pub fn unit_perimeter_side(dim: usize) -> f64 {
    (2.0 * dim as f64).powf(-1.0 / (dim as f64 - 1.0))
}

/// `λ_k(Q_a) ≤ 4π² m k^{2/m} / a²` for the unit-perimeter cube, one `k`.
pub fn check_cube_counting(dim: usize, k: usize) -> Result<InequalityCertificate> {
    Ok(check_cube_counting_upto(dim, k)?.pop().expect("k >= 1"))
}

/// The counting bound for every `k ≤ kmax`, from one lattice enumeration.
pub fn check_cube_counting_upto(dim: usize, kmax: usize) -> Result<Vec<InequalityCertificate>> {
    if dim != 2 && dim != 3 {
        return Err(Error::UnsupportedDimension(dim));
    }
    if kmax == 0 || kmax > crate::analytic::MAX_COUNT {
        return Err(Error::InvalidConfig(format!(
            "k must lie in 1..=10000, got {kmax}"
        )));
    }
    let a = unit_perimeter_side(dim);
    let m = dim as f64;
    let eigs = box_eigenvalues(&vec![a; dim], kmax)?;
    Ok(eigs
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let k = (i + 1) as f64;
            let rhs = 4.0 * PI * PI * m * k.powf(2.0 / m) / (a * a);
            InequalityCertificate::geometric(
                &format!("cube-counting-m{dim}-k{}", i + 1),
                l,
                rhs,
                hex(&Sha256::digest(
                    [dim as f64, a, k].map(f64::to_le_bytes).concat(),
                )),
            )
        })
        .collect())
}

/// Estimates of `μ_k` (least perimeter among measure-minimizers) and `π_k`
/// (least measure among perimeter-minimizers).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimates {
    pub k: usize,
    pub mu_k: f64,
    pub pi_k: f64,
    pub mu_method: ThresholdMethod,
    pub pi_method: ThresholdMethod,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdMethod {
    ClosedForm,
    Optimizer,
}

/// `μ_k ≥ m ω_m^{1/m}`, `π_k ≤ m^{-m/(m-1)} ω_m^{-1/(m-1)}` and
/// `π_k ≥ (2m)^{-m/(m-1)} (m+2)^{-m/2} ω_m^{-1}`.
pub fn check_thresholds(
    dim: usize,
    est: Option<&ThresholdEstimates>,
) -> Result<Vec<InequalityCertificate>> {
    let est = est.ok_or_else(|| Error::MissingEstimate("threshold estimates".into()))?;
    if dim != 2 {
        return Err(Error::UnsupportedDimension(dim));
    }
    let m = dim as f64;
    let w = omega(dim);
    let d = hex(&Sha256::digest(
        [est.k as f64, est.mu_k, est.pi_k]
            .map(f64::to_le_bytes)
            .concat(),
    ));
    let k = est.k;
    let mut out = vec![
        InequalityCertificate::geometric(
            &format!("threshold-perimeter-lower-k{k}"),
            m * w.powf(1.0 / m),
            est.mu_k,
            d.clone(),
        ),
        InequalityCertificate::geometric(
            &format!("threshold-measure-upper-k{k}"),
            est.pi_k,
            m.powf(-m / (m - 1.0)) * w.powf(-1.0 / (m - 1.0)),
            d.clone(),
        ),
        InequalityCertificate::geometric(
            &format!("threshold-measure-lower-k{k}"),
            (2.0 * m).powf(-m / (m - 1.0)) * (m + 2.0).powf(-m / 2.0) / w,
            est.pi_k,
            d,
        ),
    ];
    out[0].estimate = est.mu_method == ThresholdMethod::Optimizer;
    out[1].estimate = est.pi_method == ThresholdMethod::Optimizer;
    out[2].estimate = est.pi_method == ThresholdMethod::Optimizer;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteKind {
    Geometry,
    Spectral,
    All,
}

impl std::str::FromStr for SuiteKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geometry" => Ok(Self::Geometry),
            "spectral" => Ok(Self::Spectral),
            "all" => Ok(Self::All),
            other => Err(Error::InvalidConfig(format!("unknown suite {other}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub kind: SuiteKind,
    pub samples: usize,
    pub seed: u64,
    /// Bodies (evenly spread over the sample) that also get eigenvalue
    /// checks.
    pub spectral_samples: usize,
    pub solver: SolverConfig,
    /// Largest `k` for the cube counting bound.
    pub cube_k: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            kind: SuiteKind::All,
            samples: 1000,
            seed: 42,
            spectral_samples: 100,
            solver: SolverConfig::new(64.0, 4),
            cube_k: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteRow {
    pub body_digest: String,
    pub certificate: InequalityCertificate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub id: String,
    pub count: usize,
    pub min_slack: f64,
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub rows: Vec<SuiteRow>,
}

/// Catalogue id without the per-k suffix, e.g. `li-yau-k3` → `li-yau`.
pub fn family(id: &str) -> &str {
    match id.rfind("-k") {
        Some(i) => &id[..i],
        None => id,
    }
}

impl SuiteReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| !r.certificate.passes()).count()
    }

    /// Per inequality family: count, worst slack and violations.
    pub fn summary(&self) -> Vec<SuiteSummary> {
        let mut map: BTreeMap<String, SuiteSummary> = BTreeMap::new();
        for r in &self.rows {
            let id = family(&r.certificate.id).to_string();
            let e = map.entry(id.clone()).or_insert(SuiteSummary {
                id,
                count: 0,
                min_slack: f64::INFINITY,
                violations: 0,
            });
            e.count += 1;
            e.min_slack = e.min_slack.min(r.certificate.slack);
            e.violations += usize::from(!r.certificate.passes());
        }
        map.into_values().collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("inequality_id,body_digest,lhs,rhs,slack,tolerance,pass\n");
        for r in &self.rows {
            let c = &r.certificate;
            let _ = writeln!(
                s,
                "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                c.id,
                r.body_digest,
                c.lhs,
                c.rhs,
                c.slack,
                c.tolerance_used,
                c.passes()
            );
        }
        s
    }
}

/// Vertex jitter of `a` with Hausdorff distance at most `fraction · ρ(a)`.
pub fn perturb<R: Rng>(a: &ConvexBody, fraction: f64, r: &mut R) -> ConvexBody {
    let delta = fraction * a.inradius();
    loop {
        let pts: Vec<Vec2> = a
            .vertices()
            .iter()
            .map(|v| {
                let th = r.gen_range(0.0..2.0 * PI);
                let len = delta * r.gen::<f64>().sqrt();
                v + len * Vec2::new(th.cos(), th.sin())
            })
            .collect();
        if let Ok(b) = ConvexBody::from_points(&pts) {
            return b;
        }
    }
}

fn geometric_rows(
    body: &ConvexBody,
    seed: u64,
    index: u64,
    fns: &[SetFunctional],
) -> Vec<SuiteRow> {
    let bd = body_digest(body);
    let mut certs = check_inradius_bounds(body);
    certs.extend(check_diameter_bounds(body));
    certs.push(check_moment_isoperimetric(body));
    for f in fns {
        if let Ok(c) = check_normalized_bound(f, body) {
            certs.push(c);
        }
    }
    let mut r = sampling::substream(seed ^ 0x9e37_79b9_7f4a_7c15, index);
    let frac = r.gen_range(0.0..0.49);
    let b = perturb(body, frac, &mut r);
    for f in fns {
        if let Ok(c) = hausdorff_perturbation_bound(f, body, &b) {
            certs.push(c);
        }
    }
    certs
        .into_iter()
        .map(|certificate| SuiteRow {
            body_digest: bd.clone(),
            certificate,
        })
        .collect()
}

fn spectral_rows(
    body: &ConvexBody,
    seed: u64,
    index: u64,
    solver: &SolverConfig,
) -> Result<Vec<SuiteRow>> {
    let bd = body_digest(body);
    let spectrum = eigenvalues(body, solver)?;
    let mut certs = check_li_yau(&spectrum, body.measure(), 2)?;
    certs.push(check_convex_lambda1(body, &spectrum));
    let mut r = sampling::substream(seed ^ 0x51ec_7a11, index);
    let frac = r.gen_range(0.0..0.49);
    let b = perturb(body, frac, &mut r);
    let specb = eigenvalues(&b, solver)?;
    for k in 1..=solver.count {
        certs.push(eigenvalue_perturbation(
            body,
            &b,
            k,
            spectrum.lambda(k),
            specb.lambda(k),
        )?);
    }
    Ok(certs
        .into_iter()
        .map(|certificate| SuiteRow {
            body_digest: bd.clone(),
            certificate,
        })
        .collect())
}

/// Run every registered check on `cfg.samples` seeded random bodies.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    if cfg.samples == 0 {
        return Err(Error::InvalidConfig("samples must be >= 1".into()));
    }
    cfg.solver.validate()?;
    let fns: Vec<SetFunctional> = ["measure", "perimeter", "moment", "perimeter*moment"]
        .iter()
        .map(|n| SetFunctional::parse(n, 2))
        .collect::<Result<_>>()?;
    let bodies = sampling::random_bodies(cfg.seed, cfg.samples);
    let mut rows = Vec::new();
    if cfg.kind != SuiteKind::Spectral {
        let per_body = crate::par_map(bodies.len(), |i| {
            geometric_rows(&bodies[i], cfg.seed, i as u64, &fns)
        });
        rows.extend(per_body.into_iter().flatten());
        for dim in [2, 3] {
            for c in check_cube_counting_upto(dim, cfg.cube_k)? {
                rows.push(SuiteRow {
                    body_digest: format!("cube-m{dim}"),
                    certificate: c,
                });
            }
        }
    }
    if cfg.kind != SuiteKind::Geometry && cfg.spectral_samples > 0 {
        let n = cfg.spectral_samples.min(bodies.len());
        let stride = bodies.len() / n;
        let per_body = crate::par_map(n, |j| {
            let i = j * stride;
            spectral_rows(&bodies[i], cfg.seed, i as u64, &cfg.solver)
        });
        for r in per_body {
            rows.extend(r?);
        }
    }
    Ok(SuiteReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::ball_eigenvalues;
    use approx::assert_relative_eq;

    fn square() -> ConvexBody {
        ConvexBody::from_coords(&[[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]]).unwrap()
    }

    fn get<'a>(v: &'a [InequalityCertificate], id: &str) -> &'a InequalityCertificate {
        v.iter().find(|c| c.id == id).unwrap()
    }

    #[test]
    fn inradius_bounds_unit_square() {
        let c = check_inradius_bounds(&square());
        assert_relative_eq!(get(&c, "diameter-inradius").rhs, 4.0, epsilon = 1e-12);
        assert_relative_eq!(
            get(&c, "inradius-diameter").lhs,
            1.0 / (PI * 2f64.sqrt()),
            epsilon = 1e-12
        );
        assert_relative_eq!(get(&c, "inradius-diameter").lhs, 0.2251, epsilon = 1e-4);
        assert_relative_eq!(get(&c, "inradius-perimeter").lhs, 0.25, epsilon = 1e-15);
        assert_relative_eq!(
            get(&c, "perimeter-diameter").rhs,
            PI * 2f64.sqrt(),
            epsilon = 1e-12
        );
        assert!(c.iter().all(|x| x.passes() && x.slack > 0.0));
    }

    #[test]
    fn disc_polygons() {
        let mut last = f64::INFINITY;
        for n in [16, 64, 256] {
            let d = sampling::regular_polygon(n, 1.0);
            // tangential polygons have |Ω| = ρ𝒫/2, so the slack is exactly ρ/2
            let c15 = get(&check_inradius_bounds(&d), "inradius-perimeter").slack;
            assert_relative_eq!(c15, 0.5 * d.inradius(), epsilon = 1e-12);
            let c39 = check_moment_isoperimetric(&d).slack;
            assert!(c39 >= 0.0 && c39 < last);
            last = c39;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn moment_and_diameter_square() {
        let c = check_moment_isoperimetric(&square());
        assert_relative_eq!(c.lhs, 1.0 / (2.0 * PI), epsilon = 1e-14);
        assert_relative_eq!(c.rhs, 1.0 / 6.0, epsilon = 1e-14);
        let d = check_diameter_bounds(&square());
        assert_relative_eq!(get(&d, "diameter-perimeter").rhs, 2.0, epsilon = 1e-14);
        assert_relative_eq!(get(&d, "diameter-moment").rhs, 13.857, epsilon = 1e-3);
    }

    #[test]
    fn stability_square() {
        let a = square();
        let b = a.scale(1.1).unwrap();
        let la = 2.0 * PI * PI;
        let c = eigenvalue_perturbation(&a, &b, 1, la, la / 1.21).unwrap();
        assert_relative_eq!(c.lhs, 3.426, epsilon = 1e-3);
        assert_relative_eq!(c.rhs, 44.66, epsilon = 1e-2);
        let z = eigenvalue_perturbation(&a, &a, 1, la, la).unwrap();
        assert_eq!(z.lhs, 0.0);
        assert!(eigenvalue_perturbation(&a, &a.scale(3.0).unwrap(), 1, la, la).is_err());
    }

    #[test]
    fn li_yau_examples() {
        let disc = ball_eigenvalues(2, PI.powf(-0.5), 1).unwrap();
        let c = &li_yau_for(&disc, 1.0, 2, 0.0).unwrap()[0];
        assert_relative_eq!(c.lhs, 2.0 * PI, epsilon = 1e-12);
        assert_relative_eq!(c.slack, 11.885, epsilon = 1e-3);
        let cube = box_eigenvalues(&[1.0, 1.0], 1000).unwrap();
        assert!(li_yau_for(&cube, 1.0, 2, 0.0)
            .unwrap()
            .iter()
            .all(|c| c.slack >= 0.0));
    }

    #[test]
    fn cube_counting() {
        let c = check_cube_counting(2, 1).unwrap();
        assert_relative_eq!(c.lhs, 32.0 * PI * PI, epsilon = 1e-9);
        assert_relative_eq!(c.rhs, 128.0 * PI * PI, epsilon = 1e-9);
        assert!(check_cube_counting(2, 100).unwrap().passes());
        assert!(check_cube_counting(3, 1).unwrap().passes());
        assert!(check_cube_counting(4, 1).is_err());
    }

    #[test]
    fn thresholds_closed_forms() {
        assert!(matches!(
            check_thresholds(2, None),
            Err(Error::MissingEstimate(_))
        ));
        let k1 = ThresholdEstimates {
            k: 1,
            mu_k: 2.0 * PI.sqrt(),
            pi_k: 1.0 / (4.0 * PI),
            mu_method: ThresholdMethod::ClosedForm,
            pi_method: ThresholdMethod::ClosedForm,
        };
        let c = check_thresholds(2, Some(&k1)).unwrap();
        assert!(c.iter().all(|x| x.passes()));
        assert!(c[0].slack.abs() < 1e-12 && c[1].slack.abs() < 1e-12);
        assert_relative_eq!(c[2].lhs, 1.0 / (64.0 * PI), epsilon = 1e-15);
    }

    #[test]
    fn small_suite_is_deterministic() {
        let cfg = SuiteConfig {
            samples: 20,
            spectral_samples: 2,
            solver: SolverConfig::new(32.0, 2),
            cube_k: 50,
            ..SuiteConfig::default()
        };
        let a = run_suite(&cfg).unwrap();
        assert_eq!(a.violations(), 0);
        assert_eq!(a.to_csv(), run_suite(&cfg).unwrap().to_csv());
        let ids: Vec<String> = a.summary().into_iter().map(|s| s.id).collect();
        for want in [
            "functional-stability-perimeter",
            "eigenvalue-stability",
            "convex-lambda1",
            "diameter-inradius",
            "li-yau",
            "moment-isoperimetric",
            "cube-counting-m2",
        ] {
            assert!(ids.iter().any(|i| i == want), "{want} missing from {ids:?}");
        }
    }
}
