//! The Dirichlet smoothing kernel and the ν-integral weights κ_{n,r}.

use crate::error::{Error, Result};
use crate::geometry::Direction;
use crate::partition::Partition;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Dirichlet kernel of harmonic order m (ℓ_n = 2m harmonics):
/// K(x, t) = 1 + 2 Σ_{j=1}^{m} cos(j(x − t)).
///
/// This is the unique cosine-sum normalization with ∫_E K(x, t) h_2(t) dt = 1,
/// which the estimator relies on. On the diagonal K(x, x) = ℓ_n + 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelSpec {
    m: u32,
}

impl KernelSpec {
    pub fn new(m: u32) -> Self {
        KernelSpec { m }
    }

    /// Harmonic order m.
    pub fn order(&self) -> u32 {
        self.m
    }

    /// ℓ_n = 2m, the number of non-constant basis functions.
    pub fn harmonics(&self) -> u32 {
        2 * self.m
    }

    /// K(x, t).
    pub fn eval(&self, x: f64, t: f64) -> f64 {
        let u = x - t;
        let mut v = 1.0;
        for j in 1..=self.m {
            v += 2.0 * (j as f64 * u).cos();
        }
        v
    }

    /// Exact ν-integral over an arc: ∫_a^b K(x, t) dt / 2π
    /// = (b − a)/2π + (1/π) Σ_j [sin(j(x − a)) − sin(j(x − b))]/j.
    pub fn cell_integral(&self, x: f64, a: f64, b: f64) -> f64 {
        let mut v = (b - a) / TAU;
        for j in 1..=self.m {
            let jf = j as f64;
            v += ((jf * (x - a)).sin() - (jf * (x - b)).sin()) / (PI * jf);
        }
        v
    }

    /// Sup-norm ‖K(x,·)‖_E = ℓ + 1 (attained on the diagonal).
    pub fn sup_norm(&self) -> f64 {
        (self.harmonics() + 1) as f64
    }

    /// L2 norm ‖K(x,·)‖₂ = (ℓ + 1)^{1/2} under ν (Parseval).
    pub fn l2_norm(&self) -> f64 {
        self.sup_norm().sqrt()
    }
}

/// Kernel weights at one query direction: κ_{n,r}(x) = k_n ∫_{I_r} K(x, t) ν(dt),
/// their norm κ_n(x) = (Σ_r κ²)^{1/2} and the renormalized w_{n,r} = κ_{n,r}/κ_n.
#[derive(Debug, Clone)]
pub struct WeightTable {
    pub kappa: Vec<f64>,
    pub kappa_n: f64,
    pub w: Vec<f64>,
    /// Asymptotic proxy k_n^{1/2} ‖K(x,·)‖₂ = (k_n (ℓ+1))^{1/2}.
    pub kappa_n_asymptotic: f64,
}

/// Builds the weight table for a query direction.
///
/// For d = 3 the kernel acts on the azimuth and is constant in colatitude, so
/// the cell ν-integral factorizes into (band mass 1/k1) × (arc integral).
pub fn weight_table(spec: &KernelSpec, partition: &Partition, x: &Direction) -> Result<WeightTable> {
    if x.dimension() != partition.dimension() {
        return Err(Error::InvalidDimension(x.dimension()));
    }
    let k_n = partition.k_n();
    let k2 = partition.azimuth_cells();
    let az = x.azimuth();
    let mut arc = Vec::with_capacity(k2);
    for i in 0..k2 {
        let (a, b) = partition.cell_azimuth_bounds(i);
        arc.push(spec.cell_integral(az, a, b));
    }
    let mut kappa = Vec::with_capacity(k_n);
    for r in 0..k_n {
        // k_n · ν-integral = k2 · arc integral in both dimensions.
        kappa.push(k2 as f64 * arc[r % k2]);
    }
    let kappa_n = kappa.iter().map(|v| v * v).sum::<f64>().sqrt();
    if kappa_n == 0.0 {
        return Err(Error::DegenerateWeights(az));
    }
    let w = kappa.iter().map(|v| v / kappa_n).collect();
    Ok(WeightTable {
        kappa,
        kappa_n,
        w,
        kappa_n_asymptotic: (k_n as f64).sqrt() * spec.l2_norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::build_partition;

    #[test]
    fn diagonal_value() {
        let k = KernelSpec::new(7);
        assert_eq!(k.eval(1.234, 1.234), 15.0);
        assert_eq!(k.harmonics(), 14);
    }

    #[test]
    fn order_zero_is_flat() {
        let k = KernelSpec::new(0);
        assert_eq!(k.eval(0.1, 5.0), 1.0);
        let ci = k.cell_integral(2.0, 0.0, PI);
        assert!((ci - 0.5).abs() < 1e-15);
    }

    #[test]
    fn order_one_at_pi() {
        let k = KernelSpec::new(1);
        assert!((k.eval(PI, 0.0) - (-1.0)).abs() < 1e-12);
    }

    #[test]
    fn matches_sine_quotient_closed_form() {
        // K(x, t) = sin((ℓ+1)(x−t)/2) / sin((x−t)/2) for ℓ = 2m.
        let k = KernelSpec::new(5);
        let l = k.harmonics() as f64;
        for &u in &[0.3, 1.1, 2.9, 4.2, 6.0] {
            let quotient = ((l + 1.0) * u / 2.0).sin() / (u / 2.0).sin();
            assert!((k.eval(u, 0.0) - quotient).abs() < 1e-10, "u = {u}");
        }
    }

    #[test]
    fn full_circle_integral_is_one() {
        for m in [0, 1, 7, 16] {
            let k = KernelSpec::new(m);
            let v = k.cell_integral(1.7, 0.0, TAU);
            assert!((v - 1.0).abs() < 1e-14, "m = {m}: {v}");
        }
    }

    #[test]
    fn flat_weights_for_order_zero() {
        let p = build_partition(9, 2).unwrap();
        let t = weight_table(&KernelSpec::new(0), &p, &Direction::angle(0.4)).unwrap();
        for &k in &t.kappa {
            assert!((k - 1.0).abs() < 1e-13);
        }
        assert!((t.kappa_n - 3.0).abs() < 1e-13);
        for &w in &t.w {
            assert!((w - 1.0 / 3.0).abs() < 1e-13);
        }
    }

    #[test]
    fn weights_normalized() {
        let p = build_partition(20, 2).unwrap();
        let t = weight_table(&KernelSpec::new(7), &p, &Direction::angle(2.13)).unwrap();
        let s: f64 = t.w.iter().map(|w| w * w).sum();
        assert!((s - 1.0).abs() < 1e-12);
        let s1: f64 = t.kappa.iter().sum::<f64>();
        assert!((s1 - 20.0).abs() < 1e-11, "partition of unity times k_n: {s1}");
    }

    #[test]
    fn sphere_weights_repeat_over_bands() {
        let p = build_partition(8, 3).unwrap();
        let x = Direction::new(vec![1.0, 2.5]).unwrap();
        let t = weight_table(&KernelSpec::new(2), &p, &x).unwrap();
        let k2 = p.azimuth_cells();
        for i in 0..k2 {
            assert_eq!(t.kappa[i], t.kappa[k2 + i]);
        }
        let s: f64 = t.kappa.iter().sum::<f64>();
        assert!((s - 8.0).abs() < 1e-12);
    }
}
