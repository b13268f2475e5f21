//! Balls, cubes and rectangular boxes in dimension `m` with closed-form
//! functionals and Dirichlet spectra. These are the reference bodies against
//! which the polygon numerics are checked.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bessel;
use crate::error::{Error, Result};

pub const MAX_DIM: usize = 10;
/// Upper limit on the number of eigenvalues a spectrum call may request.
pub const MAX_COUNT: usize = 10_000;

/// Volume of the unit ball and the Weyl constant `C_m = 4π² ω_m^{-2/m}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionConstants {
    pub dim: usize,
    pub omega: f64,
    pub weyl: f64,
}

/// `Γ(m/2 + 1)` for integer `m >= 0`.
fn gamma_half_plus_one(m: usize) -> f64 {
    if m % 2 == 0 {
        (1..=m / 2).map(|k| k as f64).product()
    } else {
        // Γ(k + 1/2) = (2k)! / (4^k k!) √π with k = (m + 1) / 2
        let mut g = PI.sqrt();
        let mut s = 0.5;
        while s < m as f64 / 2.0 + 1.0 - 1e-9 {
            g *= s;
            s += 1.0;
        }
        g
    }
}

pub fn constants(dim: usize) -> Result<DimensionConstants> {
    if !(1..=MAX_DIM).contains(&dim) {
        return Err(Error::UnsupportedDimension(dim));
    }
    let m = dim as f64;
    let omega = PI.powf(m / 2.0) / gamma_half_plus_one(dim);
    Ok(DimensionConstants {
        dim,
        omega,
        weyl: 4.0 * PI * PI * omega.powf(-2.0 / m),
    })
}

/// Unit-ball volume `ω_m`. Panics outside `1..=MAX_DIM`; use [`constants`]
/// for fallible access.
pub fn omega(dim: usize) -> f64 {
    constants(dim).expect("dimension in range").omega
}

/// Reference body. JSON form: `{"type":"ball","dim":2,"radius":1.0}`,
/// `{"type":"cube","dim":3,"side":0.25}`, `{"type":"rectangle","sides":[1,2]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum AnalyticBody {
    Ball { dim: usize, radius: f64 },
    Cube { dim: usize, side: f64 },
    Rectangle { sides: Vec<f64> },
}

/// Measure, perimeter (surface area) and centroidal second moment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticFunctionals {
    pub measure: f64,
    pub perimeter: f64,
    pub moment: f64,
}

impl AnalyticBody {
    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        Self::Ball { dim, radius }.validated()
    }

    pub fn cube(dim: usize, side: f64) -> Result<Self> {
        Self::Cube { dim, side }.validated()
    }

    pub fn rectangle(sides: Vec<f64>) -> Result<Self> {
        Self::Rectangle { sides }.validated()
    }

    /// Ball of unit measure in dimension `dim`.
    pub fn unit_ball(dim: usize) -> Result<Self> {
        let w = constants(dim)?.omega;
        Self::ball(dim, w.powf(-1.0 / dim as f64))
    }

    pub fn validated(self) -> Result<Self> {
        let dim = self.dim();
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        let ok = match &self {
            Self::Ball { radius, .. } => *radius > 0.0 && radius.is_finite(),
            Self::Cube { side, .. } => *side > 0.0 && side.is_finite(),
            Self::Rectangle { sides } => sides.iter().all(|s| *s > 0.0 && s.is_finite()),
        };
        if !ok {
            return Err(Error::InvalidBody("parameters must be positive".into()));
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Ball { dim, .. } | Self::Cube { dim, .. } => *dim,
            Self::Rectangle { sides } => sides.len(),
        }
    }

    /// Side lengths for boxes, `None` for balls.
    pub fn sides(&self) -> Option<Vec<f64>> {
        match self {
            Self::Ball { .. } => None,
            Self::Cube { dim, side } => Some(vec![*side; *dim]),
            Self::Rectangle { sides } => Some(sides.clone()),
        }
    }

    pub fn functionals(&self) -> AnalyticFunctionals {
        match self {
            Self::Ball { dim, radius } => {
                let m = *dim as f64;
                let w = omega(*dim);
                AnalyticFunctionals {
                    measure: w * radius.powf(m),
                    perimeter: m * w * radius.powf(m - 1.0),
                    moment: m * w * radius.powf(m + 2.0) / (m + 2.0),
                }
            }
            _ => {
                let sides = self.sides().expect("box");
                let measure: f64 = sides.iter().product();
                let perimeter: f64 = 2.0 * sides.iter().map(|s| measure / s).sum::<f64>();
                let moment = measure * sides.iter().map(|s| s * s).sum::<f64>() / 12.0;
                AnalyticFunctionals {
                    measure,
                    perimeter,
                    moment,
                }
            }
        }
    }

    pub fn inradius(&self) -> f64 {
        match self {
            Self::Ball { radius, .. } => *radius,
            _ => {
                0.5 * self
                    .sides()
                    .unwrap()
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Self::Ball { radius, .. } => 2.0 * radius,
            _ => self
                .sides()
                .unwrap()
                .iter()
                .map(|s| s * s)
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// First `count` Dirichlet eigenvalues.
    pub fn eigenvalues(&self, count: usize) -> Result<Vec<f64>> {
        match self {
            Self::Ball { dim, radius } => ball_eigenvalues(*dim, *radius, count),
            _ => box_eigenvalues(&self.sides().unwrap(), count),
        }
    }
}

/// Dirichlet eigenvalues of the ball of the given radius, with multiplicity,
/// nondecreasing. Supported dimensions: 2 and 3.
pub fn ball_eigenvalues(dim: usize, radius: f64, count: usize) -> Result<Vec<f64>> {
    if dim != 2 && dim != 3 {
        return Err(Error::UnsupportedDimension(dim));
    }
    check_count(count)?;
    if !(radius > 0.0) {
        return Err(Error::InvalidBody("radius must be positive".into()));
    }
    // unit-radius zeros; N(x) ~ x²/4 (dim 2) and ~ 2x³/(9π) (dim 3)
    let mut limit = match dim {
        2 => 2.0 * (count as f64).sqrt() + 10.0,
        _ => (4.5 * PI * count as f64).cbrt() + 10.0,
    };
    loop {
        let mut vals: Vec<f64> = Vec::new();
        let mut n = 0usize;
        loop {
            let zeros = if dim == 2 {
                bessel::bessel_j_zeros(n, limit)
            } else {
                bessel::spherical_j_zeros(n, limit)
            };
            if zeros.is_empty() {
                break;
            }
            let mult = if dim == 2 {
                if n == 0 {
                    1
                } else {
                    2
                }
            } else {
                2 * n + 1
            };
            for z in zeros {
                let lam = (z / radius).powi(2);
                vals.extend(std::iter::repeat(lam).take(mult));
            }
            n += 1;
        }
        if vals.len() >= count {
            vals.sort_by(f64::total_cmp);
            vals.truncate(count);
            return Ok(vals);
        }
        limit *= 1.3;
    }
}

/// Dirichlet eigenvalues `π² Σ (k_i / a_i)²` of a box, with multiplicity,
/// nondecreasing.
pub fn box_eigenvalues(sides: &[f64], count: usize) -> Result<Vec<f64>> {
    check_count(count)?;
    if sides.is_empty() || sides.len() > MAX_DIM {
        return Err(Error::UnsupportedDimension(sides.len()));
    }
    if sides.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::InvalidBody("sides must be positive".into()));
    }
    let inv2: Vec<f64> = sides.iter().map(|a| 1.0 / (a * a)).collect();
    let ground: f64 = inv2.iter().sum();
    let mut bound = ground * 4.0;
    loop {
        let mut vals = Vec::new();
        enumerate_lattice(&inv2, 0, 0.0, bound / (PI * PI), &mut vals);
        if vals.len() >= count {
            vals.sort_by(f64::total_cmp);
            vals.truncate(count);
            return Ok(vals.into_iter().map(|v| PI * PI * v).collect());
        }
        bound *= 2.0;
    }
}

fn enumerate_lattice(inv2: &[f64], axis: usize, acc: f64, bound: f64, out: &mut Vec<f64>) {
    if axis == inv2.len() {
        out.push(acc);
        return;
    }
    let rest: f64 = inv2[axis + 1..].iter().sum();
    let mut k = 1u64;
    loop {
        let v = acc + (k * k) as f64 * inv2[axis];
        if v + rest > bound {
            break;
        }
        enumerate_lattice(inv2, axis + 1, v, bound, out);
        k += 1;
    }
}

fn check_count(count: usize) -> Result<()> {
    if count == 0 || count > MAX_COUNT {
        return Err(Error::InvalidConfig(format!(
            "eigenvalue count must be in 1..={MAX_COUNT}, got {count}"
        )));
    }
    Ok(())
}

/// Leading Weyl term `C_m (k / |Ω|)^{2/m}`.
pub fn weyl_prediction(dim: usize, measure: f64, k: usize) -> Result<f64> {
    let c = constants(dim)?;
    Ok(c.weyl * (k as f64 / measure).powf(2.0 / dim as f64))
}

/// Side of the cube with unit perimeter, `(2m)^{-1/(m-1)}`.
pub fn unit_perimeter_cube_side(dim: usize) -> f64 {
    (2.0 * dim as f64).powf(-1.0 / (dim as f64 - 1.0))
}
