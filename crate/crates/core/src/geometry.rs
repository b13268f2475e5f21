//! Convex polygons in the plane.
//!
//! A [`ConvexBody`] is stored as its vertex list in counterclockwise order,
//! starting from the lexicographically smallest vertex. The polygon stands for
//! the open interior; none of the functionals distinguish open from closed.
//! Every body carries its [`GeometricSummary`], computed once at construction.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;

/// Vertices closer than this in the max norm are merged.
pub const VERTEX_MERGE_TOL: f64 = 1e-12;
/// Hulls with smaller area are rejected.
pub const MIN_AREA: f64 = 1e-14;
/// Half-plane membership slack used by [`ConvexBody::contains`].
pub const CONTAINS_TOL: f64 = 1e-12;
/// Minimum gap between the closures of union components.
pub const MIN_COMPONENT_GAP: f64 = 1e-9;

#[inline]
pub fn cross(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Scalar geometric data of a body.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometricSummary {
    pub measure: f64,
    pub perimeter: f64,
    /// Second moment `∫|x - c|² dx` about the centroid `c`.
    pub moment: f64,
    pub inradius: f64,
    pub diameter: f64,
    pub centroid: [f64; 2],
}

/// Open convex polygon with strictly convex, canonically ordered vertices.
/// JSON form: `{"type":"polygon","vertices":[[x,y],...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "PolygonJson", into = "PolygonJson")]
pub struct ConvexBody {
    vertices: Vec<Vec2>,
    summary: GeometricSummary,
    incenter: Vec2,
}

impl PartialEq for ConvexBody {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices
    }
}

impl ConvexBody {
    /// Convex hull of `points`, canonicalized.
    pub fn from_points(points: &[Vec2]) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::DegenerateInput(format!(
                "need at least 3 points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::DegenerateInput("non-finite coordinate".into()));
        }
        let hull = convex_hull(points);
        if hull.len() < 3 {
            return Err(Error::DegenerateInput(
                "hull has fewer than 3 vertices".into(),
            ));
        }
        let area = shoelace(&hull);
        if area < MIN_AREA {
            return Err(Error::DegenerateInput(format!(
                "hull area {area:e} is zero"
            )));
        }
        Ok(Self::from_canonical(hull))
    }

    /// Convenience wrapper taking `[x, y]` pairs.
    pub fn from_coords(points: &[[f64; 2]]) -> Result<Self> {
        let pts: Vec<Vec2> = points.iter().map(|p| Vec2::new(p[0], p[1])).collect();
        Self::from_points(&pts)
    }

    fn from_canonical(vertices: Vec<Vec2>) -> Self {
        let (measure, centroid) = area_centroid(&vertices);
        let perimeter = perimeter_of(&vertices);
        let moment = moment_about(&vertices, centroid);
        let (incenter, inradius) = chebyshev_center(&vertices, centroid);
        let diameter = diameter_of(&vertices);
        Self {
            summary: GeometricSummary {
                measure,
                perimeter,
                moment,
                inradius,
                diameter,
                centroid: [centroid.x, centroid.y],
            },
            vertices,
            incenter,
        }
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn coords(&self) -> Vec<[f64; 2]> {
        self.vertices.iter().map(|v| [v.x, v.y]).collect()
    }

    pub fn summary(&self) -> &GeometricSummary {
        &self.summary
    }

    pub fn measure(&self) -> f64 {
        self.summary.measure
    }

    pub fn perimeter(&self) -> f64 {
        self.summary.perimeter
    }

    pub fn moment(&self) -> f64 {
        self.summary.moment
    }

    pub fn inradius(&self) -> f64 {
        self.summary.inradius
    }

    pub fn diameter(&self) -> f64 {
        self.summary.diameter
    }

    pub fn centroid(&self) -> Vec2 {
        Vec2::new(self.summary.centroid[0], self.summary.centroid[1])
    }

    /// Center of a largest inscribed disc.
    pub fn incenter(&self) -> Vec2 {
        self.incenter
    }

    /// Homothety about the centroid.
    pub fn scale(&self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::NonPositiveScale(alpha));
        }
        if alpha == 1.0 {
            return Ok(self.clone());
        }
        let c = self.centroid();
        let pts: Vec<Vec2> = self.vertices.iter().map(|v| c + (v - c) * alpha).collect();
        Self::from_points(&pts)
    }

    pub fn translate(&self, t: Vec2) -> Self {
        let pts: Vec<Vec2> = self.vertices.iter().map(|v| v + t).collect();
        Self::from_points(&pts).expect("translation preserves a valid hull")
    }

    /// Rotation by `angle` radians about the origin.
    pub fn rotate(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let pts: Vec<Vec2> = self
            .vertices
            .iter()
            .map(|v| Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y))
            .collect();
        Self::from_points(&pts).expect("rotation preserves a valid hull")
    }

    /// Support function `h(u) = max_x x·u`.
    pub fn support(&self, u: Vec2) -> f64 {
        self.vertices
            .iter()
            .map(|v| v.dot(&u))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Edge half-planes `n·x <= c` with unit outward normals, one per edge
    /// `v[i] -> v[i+1]`.
    pub fn half_planes(&self) -> Vec<(Vec2, f64)> {
        edge_half_planes(&self.vertices)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let e = b - a;
            // signed distance to the edge line, positive inside
            cross(e, p - a) / e.norm() >= -CONTAINS_TOL
        })
    }

    /// Euclidean distance from `p` to the body (0 inside).
    pub fn distance_to(&self, p: Vec2) -> f64 {
        if self.contains(p) {
            return 0.0;
        }
        let n = self.vertices.len();
        (0..n)
            .map(|i| point_segment_distance(p, self.vertices[i], self.vertices[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance along the ray `p + s·dir` (unit `dir`, `p` inside) to the
    /// boundary.
    pub fn ray_exit(&self, p: Vec2, dir: Vec2) -> f64 {
        let n = self.vertices.len();
        let mut best = f64::INFINITY;
        for i in 0..n {
            let a = self.vertices[i];
            let e = self.vertices[(i + 1) % n] - a;
            let normal = Vec2::new(e.y, -e.x);
            let denom = normal.dot(&dir);
            if denom > 0.0 {
                let s = normal.dot(&(a - p)) / denom;
                if s < best {
                    best = s;
                }
            }
        }
        best
    }

    /// Minkowski sum with the disc of radius `eps`; each corner arc is
    /// replaced by `arc_segments` chords, so the result contains the body and
    /// is contained in its open `eps`-neighbourhood closure.
    pub fn epsilon_neighborhood(&self, eps: f64, arc_segments: usize) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::DegenerateInput(format!(
                "eps must be positive, got {eps}"
            )));
        }
        if arc_segments < 2 {
            return Err(Error::DegenerateInput("arc_segments must be >= 2".into()));
        }
        let n = self.vertices.len();
        let normals: Vec<Vec2> = (0..n)
            .map(|i| {
                let e = self.vertices[(i + 1) % n] - self.vertices[i];
                Vec2::new(e.y, -e.x).normalize()
            })
            .collect();
        let mut pts = Vec::with_capacity(n * (arc_segments + 1));
        for i in 0..n {
            let v = self.vertices[i];
            let n_in = normals[(i + n - 1) % n];
            let n_out = normals[i];
            let a0 = n_in.y.atan2(n_in.x);
            let mut sweep = n_out.y.atan2(n_out.x) - a0;
            while sweep < 0.0 {
                sweep += std::f64::consts::TAU;
            }
            for s in 0..=arc_segments {
                let a = a0 + sweep * s as f64 / arc_segments as f64;
                pts.push(v + Vec2::new(a.cos(), a.sin()) * eps);
            }
        }
        Self::from_points(&pts)
    }
}

/// `a ⊆ b` for convex bodies: every vertex of `a` lies in `b`.
pub fn nested(a: &ConvexBody, b: &ConvexBody) -> bool {
    a.vertices.iter().all(|v| b.contains(*v))
}

/// Hausdorff distance between two convex polygons. Exact: the distance to a
/// convex set is convex, so each one-sided supremum sits at a vertex.
pub fn hausdorff_distance(a: &ConvexBody, b: &ConvexBody) -> f64 {
    let ab = a
        .vertices
        .iter()
        .map(|v| b.distance_to(*v))
        .fold(0.0, f64::max);
    let ba = b
        .vertices
        .iter()
        .map(|v| a.distance_to(*v))
        .fold(0.0, f64::max);
    ab.max(ba)
}

/// Hausdorff distance between a convex polygon and the disc of radius `r`
/// centred at `center`. Uses `d = max(R_max - r, r - r_min)` where `R_max` is
/// the farthest vertex and `r_min` the nearest edge line (center inside).
pub fn hausdorff_to_disc(body: &ConvexBody, center: Vec2, r: f64) -> f64 {
    let far = body
        .vertices
        .iter()
        .map(|v| (v - center).norm())
        .fold(0.0, f64::max);
    // min_u h(u) - center·u is the distance from the centre to the nearest edge line
    let near = body
        .half_planes()
        .iter()
        .map(|(n, c)| c - n.dot(&center))
        .fold(f64::INFINITY, f64::min);
    (far - r).max(r - near).max(0.0)
}

/// Minimise [`hausdorff_to_disc`] over the centre (and the radius, when
/// `radius` is `None`). Returns `(distance, center, radius)`.
pub fn best_fit_disc(body: &ConvexBody, radius: Option<f64>) -> (f64, Vec2, f64) {
    let eval = |c: Vec2| -> (f64, f64) {
        let far = body
            .vertices
            .iter()
            .map(|v| (v - c).norm())
            .fold(0.0, f64::max);
        let near = body
            .half_planes()
            .iter()
            .map(|(n, off)| off - n.dot(&c))
            .fold(f64::INFINITY, f64::min);
        match radius {
            Some(r) => ((far - r).max(r - near).max(0.0), r),
            None => (0.5 * (far - near).max(0.0), 0.5 * (far + near)),
        }
    };
    let mut c = body.centroid();
    let (mut best, _) = eval(c);
    let mut step = 0.1 * body.diameter();
    let dirs = [
        Vec2::new(1.0, 0.0),
        Vec2::new(-1.0, 0.0),
        Vec2::new(0.0, 1.0),
        Vec2::new(0.0, -1.0),
        Vec2::new(1.0, 1.0) / 2f64.sqrt(),
        Vec2::new(-1.0, 1.0) / 2f64.sqrt(),
        Vec2::new(1.0, -1.0) / 2f64.sqrt(),
        Vec2::new(-1.0, -1.0) / 2f64.sqrt(),
    ];
    while step > 1e-12 * body.diameter().max(1.0) {
        let mut improved = false;
        for d in &dirs {
            let cand = c + d * step;
            let (v, _) = eval(cand);
            if v < best {
                best = v;
                c = cand;
                improved = true;
                break;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    let (d, r) = eval(c);
    (d, c, r)
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename = "polygon")]
struct PolygonJson {
    vertices: Vec<[f64; 2]>,
}

impl From<ConvexBody> for PolygonJson {
    fn from(b: ConvexBody) -> Self {
        Self {
            vertices: b.coords(),
        }
    }
}

impl TryFrom<PolygonJson> for ConvexBody {
    type Error = Error;
    fn try_from(p: PolygonJson) -> Result<Self> {
        Self::from_coords(&p.vertices)
    }
}

/// Finite disjoint union of convex bodies.
/// JSON form: `{"type":"union","components":[polygon, ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "UnionJson", into = "UnionJson")]
pub struct BodyUnion {
    components: Vec<ConvexBody>,
}

impl BodyUnion {
    pub fn new(components: Vec<ConvexBody>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::DegenerateInput("union needs a component".into()));
        }
        for i in 0..components.len() {
            for j in i + 1..components.len() {
                let gap = polygon_gap(&components[i], &components[j]);
                if gap <= MIN_COMPONENT_GAP {
                    return Err(Error::DegenerateInput(format!(
                        "components {i} and {j} are not separated (gap {gap:e})"
                    )));
                }
            }
        }
        Ok(Self { components })
    }

    pub fn single(body: ConvexBody) -> Self {
        Self {
            components: vec![body],
        }
    }

    pub fn components(&self) -> &[ConvexBody] {
        &self.components
    }

    pub fn measure(&self) -> f64 {
        self.components.iter().map(|b| b.measure()).sum()
    }

    pub fn perimeter(&self) -> f64 {
        self.components.iter().map(|b| b.perimeter()).sum()
    }

    pub fn centroid(&self) -> Vec2 {
        let m = self.measure();
        self.components
            .iter()
            .map(|b| b.centroid() * b.measure())
            .fold(Vec2::zeros(), |a, b| a + b)
            / m
    }

    /// Second moment about the centroid of the union (parallel-axis sum).
    pub fn moment(&self) -> f64 {
        let c = self.centroid();
        self.components
            .iter()
            .map(|b| b.moment() + b.measure() * (b.centroid() - c).norm_squared())
            .sum()
    }

    pub fn diameter(&self) -> f64 {
        let pts: Vec<Vec2> = self
            .components
            .iter()
            .flat_map(|b| b.vertices().iter().copied())
            .collect();
        diameter_of(&pts)
    }

    pub fn inradius(&self) -> f64 {
        self.components
            .iter()
            .map(|b| b.inradius())
            .fold(0.0, f64::max)
    }

    /// Homothety of the whole union about its centroid.
    pub fn scale(&self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::NonPositiveScale(alpha));
        }
        let c = self.centroid();
        let comps = self
            .components
            .iter()
            .map(|b| {
                let pts: Vec<Vec2> = b.vertices().iter().map(|v| c + (v - c) * alpha).collect();
                ConvexBody::from_points(&pts)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { components: comps })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename = "union")]
struct UnionJson {
    components: Vec<ConvexBody>,
}

impl From<BodyUnion> for UnionJson {
    fn from(u: BodyUnion) -> Self {
        Self {
            components: u.components,
        }
    }
}

impl TryFrom<UnionJson> for BodyUnion {
    type Error = Error;
    fn try_from(u: UnionJson) -> Result<Self> {
        Self::new(u.components)
    }
}

/// Minimum distance between two convex polygons (0 if they intersect).
pub fn polygon_gap(a: &ConvexBody, b: &ConvexBody) -> f64 {
    if polygons_intersect(a, b) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for (p, q) in [(a, b), (b, a)] {
        let n = q.vertices.len();
        for v in &p.vertices {
            for i in 0..n {
                best = best.min(point_segment_distance(
                    *v,
                    q.vertices[i],
                    q.vertices[(i + 1) % n],
                ));
            }
        }
    }
    best
}

fn polygons_intersect(a: &ConvexBody, b: &ConvexBody) -> bool {
    for poly in [a, b] {
        for (n, _) in poly.half_planes() {
            let (amin, amax) = project(a, n);
            let (bmin, bmax) = project(b, n);
            if amax < bmin || bmax < amin {
                return false;
            }
        }
    }
    true
}

fn project(p: &ConvexBody, n: Vec2) -> (f64, f64) {
    p.vertices
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            let d = v.dot(&n);
            (lo.min(d), hi.max(d))
        })
}

pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let e = b - a;
    let len2 = e.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&e) / len2).clamp(0.0, 1.0);
    (p - (a + e * t)).norm()
}

/// Andrew's monotone chain. Output is counterclockwise, strictly convex and
/// starts at the lexicographically smallest point.
fn convex_hull(points: &[Vec2]) -> Vec<Vec2> {
    let mut pts: Vec<Vec2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    let mut uniq: Vec<Vec2> = Vec::with_capacity(pts.len());
    for p in pts {
        if uniq.iter().rev().take(4).any(|q: &Vec2| {
            (q.x - p.x).abs() <= VERTEX_MERGE_TOL && (q.y - p.y).abs() <= VERTEX_MERGE_TOL
        }) {
            continue;
        }
        uniq.push(p);
    }
    if uniq.len() < 3 {
        return uniq;
    }
    let mut lower: Vec<Vec2> = Vec::new();
    for &p in &uniq {
        while lower.len() >= 2
            && cross(
                lower[lower.len() - 1] - lower[lower.len() - 2],
                p - lower[lower.len() - 2],
            ) <= 0.0
        {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Vec2> = Vec::new();
    for &p in uniq.iter().rev() {
        while upper.len() >= 2
            && cross(
                upper[upper.len() - 1] - upper[upper.len() - 2],
                p - upper[upper.len() - 2],
            ) <= 0.0
        {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    // merge near-duplicate neighbours that survived (close points whose sort
    // order separated them)
    let mut out: Vec<Vec2> = Vec::with_capacity(lower.len());
    for p in lower {
        if let Some(q) = out.last() {
            if (q - p).amax() <= VERTEX_MERGE_TOL {
                continue;
            }
        }
        out.push(p);
    }
    while out.len() > 1 && (out[0] - out[out.len() - 1]).amax() <= VERTEX_MERGE_TOL {
        out.pop();
    }
    out
}

fn shoelace(v: &[Vec2]) -> f64 {
    let n = v.len();
    let o = v[0];
    let mut twice = 0.0;
    for i in 1..n - 1 {
        twice += cross(v[i] - o, v[i + 1] - o);
    }
    0.5 * twice
}

fn area_centroid(v: &[Vec2]) -> (f64, Vec2) {
    let n = v.len();
    let o = v[0];
    let mut area = 0.0;
    let mut acc = Vec2::zeros();
    for i in 1..n - 1 {
        let a = v[i] - o;
        let b = v[i + 1] - o;
        let t = 0.5 * cross(a, b);
        area += t;
        acc += (a + b) * (t / 3.0);
    }
    (area, o + acc / area)
}

fn perimeter_of(v: &[Vec2]) -> f64 {
    let n = v.len();
    (0..n).map(|i| (v[(i + 1) % n] - v[i]).norm()).sum()
}

/// `∫|x - c|²` over the polygon by the closed-form triangle moments of the
/// fan from `c`.
fn moment_about(v: &[Vec2], c: Vec2) -> f64 {
    let n = v.len();
    let mut total = 0.0;
    for i in 0..n {
        let a = v[i] - c;
        let b = v[(i + 1) % n] - c;
        let area = 0.5 * cross(a, b);
        total += area / 6.0 * (a.norm_squared() + b.norm_squared() + a.dot(&b));
    }
    total
}

pub(crate) fn diameter_of(v: &[Vec2]) -> f64 {
    let mut best = 0.0f64;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            best = best.max((v[i] - v[j]).norm_squared());
        }
    }
    best.sqrt()
}

fn edge_half_planes(v: &[Vec2]) -> Vec<(Vec2, f64)> {
    let n = v.len();
    (0..n)
        .map(|i| {
            let e = v[(i + 1) % n] - v[i];
            let normal = Vec2::new(e.y, -e.x).normalize();
            (normal, normal.dot(&v[i]))
        })
        .collect()
}

/// Largest inscribed disc: maximise `r` subject to `n_i·x + r <= c_i`.
///
/// Active-set simplex on the three unknowns `(x, y, r)` starting from the
/// interior point `start` with `r = 0`; entering and leaving choices use the
/// smallest index among ties so the walk is deterministic and cannot cycle.
fn chebyshev_center(v: &[Vec2], start: Vec2) -> (Vec2, f64) {
    type V3 = nalgebra::Vector3<f64>;
    let planes = edge_half_planes(v);
    let rows: Vec<(V3, f64)> = planes
        .iter()
        .map(|(n, c)| (V3::new(n.x, n.y, 1.0), *c))
        .collect();
    let g = V3::new(0.0, 0.0, 1.0);
    let mut z = V3::new(start.x, start.y, 0.0);
    // make the start feasible even if `start` sits on the boundary
    let slack0 = rows
        .iter()
        .map(|(a, c)| c - a.dot(&z))
        .fold(f64::INFINITY, f64::min);
    if slack0 < 0.0 {
        z.z = slack0;
    }
    let mut work: Vec<usize> = Vec::new();
    let eps = 1e-13;
    let max_iter = 20 * rows.len() + 50;
    for _ in 0..max_iter {
        // direction: projection of g onto the null space of the working rows
        let dir = match work.len() {
            0 => g,
            1 => {
                let a = rows[work[0]].0;
                g - a * (g.dot(&a) / a.norm_squared())
            }
            2 => {
                let d = rows[work[0]].0.cross(&rows[work[1]].0);
                let dn = d.norm_squared();
                if dn < 1e-24 {
                    V3::zeros()
                } else {
                    d * (d.dot(&g) / dn)
                }
            }
            _ => V3::zeros(),
        };
        if dir.norm() < 1e-12 {
            // stationary on the working set: check multipliers
            let mults = multipliers(&rows, &work, g);
            let worst = mults
                .iter()
                .enumerate()
                .filter(|(_, &m)| m < -1e-12)
                .min_by(|a, b| work[a.0].cmp(&work[b.0]));
            match worst {
                None => break,
                Some((pos, _)) => {
                    work.remove(pos);
                    continue;
                }
            }
        }
        let mut step = f64::INFINITY;
        let mut enter = None;
        for (j, (a, c)) in rows.iter().enumerate() {
            if work.contains(&j) {
                continue;
            }
            let ad = a.dot(&dir);
            if ad > eps {
                let s = ((c - a.dot(&z)) / ad).max(0.0);
                if s < step - 1e-15 {
                    step = s;
                    enter = Some(j);
                }
            }
        }
        let Some(j) = enter else { break };
        z += dir * step;
        work.push(j);
        if work.len() > 3 {
            work.remove(0);
        }
    }
    let r = rows
        .iter()
        .map(|(a, c)| c - a.xy().dot(&z.xy()))
        .fold(f64::INFINITY, f64::min);
    (Vec2::new(z.x, z.y), r)
}

fn multipliers(
    rows: &[(nalgebra::Vector3<f64>, f64)],
    work: &[usize],
    g: nalgebra::Vector3<f64>,
) -> Vec<f64> {
    if work.is_empty() {
        return Vec::new();
    }
    let m = nalgebra::DMatrix::from_fn(3, work.len(), |i, j| rows[work[j]].0[i]);
    let rhs = nalgebra::DVector::from_column_slice(g.as_slice());
    let svd = m.svd(true, true);
    match svd.solve(&rhs, 1e-14) {
        Ok(sol) => sol.iter().copied().collect(),
        Err(_) => vec![0.0; work.len()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    pub(crate) fn unit_square() -> ConvexBody {
        ConvexBody::from_coords(&[[0.5, 0.5], [-0.5, 0.5], [-0.5, -0.5], [0.5, -0.5]]).unwrap()
    }

    #[test]
    fn square_is_canonical() {
        let sq = unit_square();
        assert_eq!(
            sq.coords(),
            vec![[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]]
        );
        let s = sq.summary();
        assert_relative_eq!(s.measure, 1.0, epsilon = 1e-15);
        assert_relative_eq!(s.perimeter, 4.0, epsilon = 1e-15);
        assert_relative_eq!(s.moment, 1.0 / 6.0, epsilon = 1e-15);
        assert_relative_eq!(s.inradius, 0.5, epsilon = 1e-14);
        assert_relative_eq!(s.diameter, 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn collinear_points_are_rejected() {
        let r = ConvexBody::from_coords(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]);
        assert!(matches!(r, Err(Error::DegenerateInput(_))));
        let r = ConvexBody::from_coords(&[[0.0, 0.0], [1.0, 1.0]]);
        assert!(matches!(r, Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn interior_and_collinear_points_dropped() {
        let b = ConvexBody::from_coords(&[
            [0.0, 0.0],
            [1.0, 0.0],
            [2.0, 0.0],
            [2.0, 2.0],
            [0.0, 2.0],
            [1.0, 1.0],
        ])
        .unwrap();
        assert_eq!(b.vertices().len(), 4);
    }

    #[test]
    fn circle_hull_area_below_pi() {
        let pts: Vec<[f64; 2]> = (0..100)
            .map(|i| {
                let a = 2.0 * std::f64::consts::PI * (i as f64 * 0.61803398875).fract();
                [a.cos(), a.sin()]
            })
            .collect();
        let b = ConvexBody::from_coords(&pts).unwrap();
        assert_eq!(b.vertices().len(), 100);
        assert!(b.measure() < std::f64::consts::PI);
        assert!(b.measure() > 3.0);
    }

    #[test]
    fn scaling_degrees() {
        let sq = unit_square();
        let s2 = sq.scale(2.0).unwrap();
        assert_relative_eq!(s2.measure(), 4.0, max_relative = 1e-14);
        assert_relative_eq!(s2.perimeter(), 8.0, max_relative = 1e-14);
        assert_relative_eq!(s2.moment(), 16.0 / 6.0, max_relative = 1e-14);
        assert_eq!(sq.scale(1.0).unwrap(), sq);
        assert_relative_eq!(
            sq.scale(0.5).unwrap().diameter(),
            sq.diameter() / 2.0,
            max_relative = 1e-14
        );
        assert!(matches!(sq.scale(0.0), Err(Error::NonPositiveScale(_))));
        assert!(matches!(sq.scale(-1.0), Err(Error::NonPositiveScale(_))));
    }

    #[test]
    fn hausdorff_examples() {
        let sq = unit_square();
        let big = sq.scale(1.1).unwrap();
        assert_relative_eq!(
            hausdorff_distance(&sq, &big),
            0.05 * 2f64.sqrt(),
            max_relative = 1e-12
        );
        assert_eq!(hausdorff_distance(&sq, &sq), 0.0);
        let t = Vec2::new(0.3, -0.2);
        assert_relative_eq!(
            hausdorff_distance(&sq, &sq.translate(t)),
            t.norm(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn epsilon_neighborhood_square() {
        let sq = unit_square();
        let nb = sq.epsilon_neighborhood(0.1, 8).unwrap();
        assert_eq!(nb.vertices().len(), 36);
        let a = nb.measure();
        assert!(a > 1.4 && a <= 1.4 + std::f64::consts::PI * 0.01, "{a}");
        assert!(nested(&sq, &sq.epsilon_neighborhood(0.05, 4).unwrap()));
        let tiny = sq.epsilon_neighborhood(1e-6, 4).unwrap();
        assert!(hausdorff_distance(&sq, &tiny) <= 1e-6 + 1e-15);
    }

    #[test]
    fn containment() {
        let sq = unit_square();
        assert!(sq.contains(sq.centroid()));
        assert!(nested(&sq, &sq.scale(1.1).unwrap()));
        assert!(!nested(&sq, &sq.translate(Vec2::new(3.0, 0.0))));
    }

    #[test]
    fn inradius_of_regular_polygons_and_triangles() {
        for n in [3usize, 4, 5, 6, 17, 64, 256] {
            let pts: Vec<[f64; 2]> = (0..n)
                .map(|i| {
                    let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                    [a.cos(), a.sin()]
                })
                .collect();
            let b = ConvexBody::from_coords(&pts).unwrap();
            let apothem = (std::f64::consts::PI / n as f64).cos();
            assert_relative_eq!(b.inradius(), apothem, max_relative = 1e-12);
        }
        // 3-4-5 right triangle: r = (a + b - c) / 2 = 1
        let t = ConvexBody::from_coords(&[[0.0, 0.0], [3.0, 0.0], [0.0, 4.0]]).unwrap();
        assert_relative_eq!(t.inradius(), 1.0, max_relative = 1e-12);
        // thin rectangle
        let r =
            ConvexBody::from_coords(&[[0.0, 0.0], [1.0, 0.0], [1.0, 0.01], [0.0, 0.01]]).unwrap();
        assert_relative_eq!(r.inradius(), 0.005, max_relative = 1e-12);
    }

    #[test]
    fn union_rejects_touching_components() {
        let a = unit_square();
        let b = a.translate(Vec2::new(1.0, 0.0));
        assert!(BodyUnion::new(vec![a.clone(), b]).is_err());
        let c = a.translate(Vec2::new(1.5, 0.0));
        let u = BodyUnion::new(vec![a, c]).unwrap();
        assert_relative_eq!(u.measure(), 2.0, max_relative = 1e-14);
        assert_relative_eq!(u.perimeter(), 8.0, max_relative = 1e-14);
        // parallel axis: 2·(1/6) + 2·0.75²
        assert_relative_eq!(u.moment(), 2.0 / 6.0 + 2.0 * 0.5625, max_relative = 1e-13);
    }

    #[test]
    fn best_fit_disc_of_polygonal_disc() {
        let n = 256;
        let pts: Vec<[f64; 2]> = (0..n)
            .map(|i| {
                let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                [2.0 + a.cos(), -1.0 + a.sin()]
            })
            .collect();
        let b = ConvexBody::from_coords(&pts).unwrap();
        let (d, c, r) = best_fit_disc(&b, None);
        assert!(d < 1e-4);
        assert!((c - Vec2::new(2.0, -1.0)).norm() < 1e-6);
        assert!((r - 1.0).abs() < 1e-4);
    }
}
