use frontier_core::geometry::{
    base_density, cartesian_to_polar, gamma_d, polar_to_cartesian, Direction,
};
use proptest::prelude::*;
use std::f64::consts::{PI, TAU};

/// Determinant by Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
fn det(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut sign = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())
            .unwrap();
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            sign = -sign;
        }
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= factor * m[col][k];
            }
        }
    }
    sign * (0..n).map(|i| m[i][i]).product::<f64>()
}

/// Numeric Jacobian determinant of the polar map at (x, y) by central
/// differences over the d coordinates (d−1 angles plus the radius).
fn numeric_polar_jacobian(angles: &[f64], y: f64) -> f64 {
    let d = angles.len() + 1;
    let h = 1e-6;
    let eval = |a: &[f64], r: f64| polar_to_cartesian(&Direction::new(a.to_vec()).unwrap(), r);
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(d);
    for i in 0..angles.len() {
        let mut hi = angles.to_vec();
        let mut lo = angles.to_vec();
        hi[i] += h;
        lo[i] -= h;
        let up = eval(&hi, y);
        let dn = eval(&lo, y);
        cols.push(up.iter().zip(&dn).map(|(u, v)| (u - v) / (2.0 * h)).collect());
    }
    let up = eval(angles, y + h);
    let dn = eval(angles, y - h);
    cols.push(up.iter().zip(&dn).map(|(u, v)| (u - v) / (2.0 * h)).collect());
    // Columns are the partial derivatives; transpose into rows for elimination.
    let rows: Vec<Vec<f64>> = (0..d).map(|r| (0..d).map(|c| cols[c][r]).collect()).collect();
    det(rows)
}

#[test]
fn polar_jacobian_matches_gamma_h_density() {
    // |det DP_d| = y^{d−1} γ_d h_d(x), the change of variables behind the
    // polar base measure.
    let cases: [(Vec<f64>, f64); 5] = [
        (vec![0.7], 1.3),
        (vec![2.9], 0.4),
        (vec![1.1, 0.6], 2.0),
        (vec![0.4, 5.2], 0.8),
        (vec![1.5, 2.0, 3.1], 1.1),
    ];
    for (angles, y) in cases {
        let d = angles.len() as u32 + 1;
        let x = Direction::new(angles.clone()).unwrap();
        let expected =
            y.powi(d as i32 - 1) * gamma_d(d).unwrap() * base_density(&x).unwrap();
        let numeric = numeric_polar_jacobian(&angles, y).abs();
        assert!(
            (numeric - expected).abs() <= 1e-6 * expected.max(1.0),
            "d={d}: numeric {numeric} vs expected {expected}"
        );
    }
}

#[test]
fn norm_of_polar_point_is_radius() {
    let x = Direction::new(vec![0.9, 2.2, 4.4]).unwrap();
    let p = polar_to_cartesian(&x, 3.7);
    let norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!((norm - 3.7).abs() < 1e-12);
}

proptest! {
    #[test]
    fn d2_round_trip(a in 0.0..TAU, y in 1e-6..10.0f64) {
        let x = Direction::angle(a);
        let p = polar_to_cartesian(&x, y);
        let (x2, y2) = cartesian_to_polar(&p).unwrap();
        prop_assert!((x2.azimuth() - x.azimuth()).abs() < 1e-12 || (x2.azimuth() - x.azimuth()).abs() > TAU - 1e-12);
        prop_assert!((y2 - y).abs() < 1e-12 * y.max(1.0));
    }

    #[test]
    fn d3_round_trip(a1 in 1e-9..(PI - 1e-9), a2 in 0.0..TAU, y in 1e-6..10.0f64) {
        let x = Direction::new(vec![a1, a2]).unwrap();
        let p = polar_to_cartesian(&x, y);
        let (x2, y2) = cartesian_to_polar(&p).unwrap();
        prop_assert!((y2 - y).abs() < 1e-12 * y.max(1.0));
        let q = polar_to_cartesian(&x2, y2);
        for (u, v) in p.iter().zip(&q) {
            prop_assert!((u - v).abs() < 1e-10 * y.max(1.0));
        }
    }

    #[test]
    fn d4_round_trip_through_cartesian(a1 in 1e-9..(PI - 1e-9), a2 in 1e-9..(PI - 1e-9), a3 in 0.0..TAU, y in 0.1..5.0f64) {
        let x = Direction::new(vec![a1, a2, a3]).unwrap();
        let p = polar_to_cartesian(&x, y);
        let (x2, y2) = cartesian_to_polar(&p).unwrap();
        let q = polar_to_cartesian(&x2, y2);
        for (u, v) in p.iter().zip(&q) {
            prop_assert!((u - v).abs() < 1e-10);
        }
    }
}
