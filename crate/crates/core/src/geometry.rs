//! Polar geometry on E = [0, π)^{d−2} × [0, 2π).

use crate::error::{Error, Result};
use crate::quad;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::sync::{Mutex, OnceLock};

/// A direction in E: d−1 angles, the first d−2 in [0, π), the last in [0, 2π).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    coords: Vec<f64>,
}

impl Direction {
    /// Validates every coordinate against its half-open interval.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidDimension(1));
        }
        let last = coords.len() - 1;
        for (i, &a) in coords.iter().enumerate() {
            let limit = if i == last { TAU } else { PI };
            if !(a >= 0.0 && a < limit) || !a.is_finite() {
                return Err(Error::AngleOutOfDomain { value: a, limit });
            }
        }
        Ok(Direction { coords })
    }

    /// d = 2 convenience constructor; wraps the angle into [0, 2π).
    pub fn angle(a: f64) -> Self {
        let mut a = a.rem_euclid(TAU);
        if a >= TAU {
            a = 0.0;
        }
        Direction { coords: vec![a] }
    }

    /// The all-zero direction in dimension `d`, the placeholder for empty cells.
    pub fn zero(d: u32) -> Self {
        Direction { coords: vec![0.0; d as usize - 1] }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Ambient dimension d (one more than the number of angles).
    pub fn dimension(&self) -> u32 {
        self.coords.len() as u32 + 1
    }

    /// The final angular coordinate, ranging over [0, 2π).
    pub fn azimuth(&self) -> f64 {
        *self.coords.last().expect("direction is never empty")
    }
}

static GAMMA_CACHE: OnceLock<Mutex<HashMap<u32, f64>>> = OnceLock::new();

/// γ_d = ∫_E ∏_{j=1}^{d−2} (sin x_j)^{d−1−j} dx.
///
/// Exact constants for d = 2 (2π) and d = 3 (4π); adaptive quadrature of the
/// separable product otherwise, cached per dimension.
pub fn gamma_d(d: u32) -> Result<f64> {
    match d {
        0 | 1 => Err(Error::InvalidDimension(d)),
        2 => Ok(TAU),
        3 => Ok(4.0 * PI),
        _ => {
            let cache = GAMMA_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
            if let Some(&v) = cache.lock().unwrap().get(&d) {
                return Ok(v);
            }
            let mut v = TAU;
            for j in 1..=(d - 2) {
                let p = (d - 1 - j) as i32;
                v *= quad::integrate(|t| t.sin().powi(p), 0.0, PI, 1e-12, quad::DEFAULT_BUDGET)?;
            }
            cache.lock().unwrap().insert(d, v);
            Ok(v)
        }
    }
}

/// Density of the base measure ν with respect to Lebesgue measure on E:
/// h_d(x) = γ_d^{−1} ∏_{j=1}^{d−2} (sin x_j)^{d−1−j}. Integrates to one over E.
pub fn base_density(x: &Direction) -> Result<f64> {
    let d = x.dimension();
    let g = gamma_d(d)?;
    let mut p = 1.0;
    for (i, &xi) in x.coords()[..(d as usize - 2)].iter().enumerate() {
        p *= xi.sin().powi(d as i32 - 2 - i as i32);
    }
    Ok(p / g)
}

/// The polar map P_d(x, y): component i < d is y cos(x_i) ∏_{j<i} sin(x_j),
/// component d is y ∏_{j<d} sin(x_j). The output has Euclidean norm y.
pub fn polar_to_cartesian(x: &Direction, y: f64) -> Vec<f64> {
    let coords = x.coords();
    let d = coords.len() + 1;
    let mut out = Vec::with_capacity(d);
    let mut sin_prod = 1.0;
    for &a in coords {
        out.push(y * sin_prod * a.cos());
        sin_prod *= a.sin();
    }
    out.push(y * sin_prod);
    out
}

/// Inverse of [`polar_to_cartesian`]. Angles land in the canonical half-open
/// boxes; values that would hit exactly π or 2π wrap to 0.
pub fn cartesian_to_polar(point: &[f64]) -> Result<(Direction, f64)> {
    let d = point.len();
    if d < 2 {
        return Err(Error::InvalidDimension(d as u32));
    }
    let y = point.iter().map(|v| v * v).sum::<f64>().sqrt();
    if y == 0.0 {
        return Err(Error::UndefinedDirection);
    }
    let mut coords = Vec::with_capacity(d - 1);
    for i in 0..d - 2 {
        let tail = point[i + 1..].iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut a = tail.atan2(point[i]);
        if a >= PI {
            a = 0.0;
        }
        coords.push(a);
    }
    let mut az = point[d - 1].atan2(point[d - 2]);
    if az < 0.0 {
        az += TAU;
    }
    if az >= TAU {
        az = 0.0;
    }
    coords.push(az);
    Ok((Direction { coords }, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direction_validation() {
        assert!(Direction::new(vec![]).is_err());
        assert!(Direction::new(vec![TAU]).is_err());
        assert!(Direction::new(vec![PI, 1.0]).is_err());
        assert!(Direction::new(vec![3.0, 6.0]).is_ok());
        assert_eq!(Direction::angle(-PI).azimuth(), PI);
    }

    #[test]
    fn gamma_small_dimensions() {
        assert_eq!(gamma_d(2).unwrap(), TAU);
        assert_eq!(gamma_d(3).unwrap(), 4.0 * PI);
        assert!(gamma_d(1).is_err());
    }

    #[test]
    fn gamma_d4_matches_closed_form() {
        // 2 π^{d/2} / Γ(d/2) = 2π² for d = 4.
        let v = gamma_d(4).unwrap();
        assert!((v - 2.0 * PI * PI).abs() <= 1e-10 * v, "got {v}");
        // Cached second call returns the identical value.
        assert_eq!(gamma_d(4).unwrap(), v);
    }

    #[test]
    fn base_density_integrates_to_one_d3() {
        // ∫ h_3 over E = (1/4π) ∫ sin x1 dx1 dx2 = 1.
        let v = quad::integrate(
            |x1| base_density(&Direction::new(vec![x1.min(PI - 1e-15), 0.0]).unwrap()).unwrap(),
            0.0,
            PI,
            1e-11,
            quad::DEFAULT_BUDGET,
        )
        .unwrap()
            * TAU;
        assert!((v - 1.0).abs() < 1e-9, "got {v}");
    }

    #[test]
    fn polar_axis_points() {
        let p = polar_to_cartesian(&Direction::angle(0.0), 2.0);
        assert!((p[0] - 2.0).abs() < 1e-15 && p[1].abs() < 1e-15);
        let q = polar_to_cartesian(&Direction::angle(PI / 2.0), 1.0);
        assert!(q[0].abs() < 1e-15 && (q[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cartesian_axis_points() {
        let (x, y) = cartesian_to_polar(&[0.0, -1.0]).unwrap();
        assert!((x.azimuth() - 3.0 * PI / 2.0).abs() < 1e-15);
        assert!((y - 1.0).abs() < 1e-15);
        let (x, y) = cartesian_to_polar(&[1.0, 1.0]).unwrap();
        assert!((x.azimuth() - PI / 4.0).abs() < 1e-15);
        assert!((y - 2.0f64.sqrt()).abs() < 1e-15);
        assert!(cartesian_to_polar(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn boundary_angles_wrap() {
        let (x, _) = cartesian_to_polar(&[-1.0, 0.0, 0.0]).unwrap();
        // First angle would be exactly π: wraps to 0 by convention.
        assert_eq!(x.coords()[0], 0.0);
    }
}
