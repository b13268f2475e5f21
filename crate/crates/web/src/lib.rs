//! Browser bindings for a click-to-draw polygon demo. Every function takes
//! the clicked points as a JSON array `[[x, y], ...]`, builds their convex
//! hull, and returns JSON.

use eigenshape::inequalities::{
    check_inradius_bounds, check_moment_isoperimetric, InequalityCertificate,
};
use eigenshape::spectral::{eigenvalues, SolverConfig};
use eigenshape::{ConvexBody, GeometricSummary};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Analysis {
    hull: Vec<[f64; 2]>,
    summary: GeometricSummary,
    certificates: Vec<InequalityCertificate>,
}

#[derive(Serialize)]
struct Spectrum {
    eigenvalues: Vec<f64>,
    /// `λ_k |Ω|`, the scale-free form.
    normalized: Vec<f64>,
    /// `π j_{0,1}²`, the Faber-Krahn value of `λ_1 |Ω|`.
    faber_krahn: f64,
}

fn hull(points_json: &str) -> Result<ConvexBody, String> {
    let pts: Vec<[f64; 2]> = serde_json::from_str(points_json).map_err(|e| e.to_string())?;
    ConvexBody::from_coords(&pts).map_err(|e| e.to_string())
}

fn json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

/// Hull, geometric summary and the purely geometric certificates.
pub fn analyze_points(points_json: &str) -> Result<String, String> {
    let body = hull(points_json)?;
    let mut certificates = check_inradius_bounds(&body);
    certificates.push(check_moment_isoperimetric(&body));
    json(&Analysis {
        hull: body.coords(),
        summary: *body.summary(),
        certificates,
    })
}

/// First `k` Dirichlet eigenvalues. The body is solved at unit measure on
/// a coarse extrapolated grid, so expect about a percent of error.
pub fn spectrum_of_points(points_json: &str, k: usize) -> Result<String, String> {
    let body = hull(points_json)?;
    let area = body.measure();
    let unit = body.scale(area.powf(-0.5)).map_err(|e| e.to_string())?;
    let cfg = SolverConfig::new(32.0, k.clamp(1, 12));
    let res = eigenvalues(&unit, &cfg).map_err(|e| e.to_string())?;
    let j01 = 2.404_825_557_695_773_f64;
    json(&Spectrum {
        eigenvalues: res.eigenvalues.iter().map(|l| l / area).collect(),
        normalized: res.eigenvalues.clone(),
        faber_krahn: std::f64::consts::PI * j01 * j01,
    })
}

/// Vertices of the outer parallel body at distance `eps`.
pub fn neighborhood_of_points(points_json: &str, eps: f64) -> Result<String, String> {
    let body = hull(points_json)?;
    let n = body
        .epsilon_neighborhood(eps, 24)
        .map_err(|e| e.to_string())?;
    json(&n.coords())
}

#[wasm_bindgen]
pub fn analyze(points_json: &str) -> Result<String, JsError> {
    analyze_points(points_json).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn spectrum(points_json: &str, k: usize) -> Result<String, JsError> {
    spectrum_of_points(points_json, k).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn neighborhood(points_json: &str, eps: f64) -> Result<String, JsError> {
    neighborhood_of_points(points_json, eps).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: &str = "[[0,0],[1,0],[1,1],[0,1],[0.5,0.5]]";

    #[test]
    fn analysis_takes_the_hull() {
        let v: serde_json::Value = serde_json::from_str(&analyze_points(SQUARE).unwrap()).unwrap();
        assert_eq!(v["hull"].as_array().unwrap().len(), 4);
        assert_eq!(v["summary"]["measure"].as_f64(), Some(1.0));
        assert!(analyze_points("[[0,0],[1,1]]").is_err());
        assert!(analyze_points("nope").is_err());
    }

    #[test]
    fn spectrum_of_square() {
        let v: serde_json::Value =
            serde_json::from_str(&spectrum_of_points(SQUARE, 2).unwrap()).unwrap();
        let l1 = v["eigenvalues"][0].as_f64().unwrap();
        assert!((l1 - 2.0 * std::f64::consts::PI.powi(2)).abs() < 0.05);
    }

    #[test]
    fn neighborhood_grows() {
        let pts: Vec<[f64; 2]> =
            serde_json::from_str(&neighborhood_of_points(SQUARE, 0.1).unwrap()).unwrap();
        let b = ConvexBody::from_coords(&pts).unwrap();
        assert!(b.measure() > 1.0 + 4.0 * 0.1);
    }
}
