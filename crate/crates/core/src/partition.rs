//! Equiprobable partitions of E under the base measure ν.

use crate::error::{Error, Result};
use crate::geometry::Direction;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// A partition of E into k_n half-open cells of equal ν-measure 1/k_n.
///
/// d = 2: equidistant arcs I_r = [2π(r−1)/k, 2πr/k). d = 3: a product grid,
/// colatitude bands cut by inverse CDF of the sin weight (arccos(1 − 2i/k1))
/// times equidistant azimuthal arcs, with k_n = k1·k2 and cells indexed
/// row-major by (band, arc).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Partition {
    d: u32,
    k_n: usize,
    azimuth_cuts: Vec<f64>,
    colat_cuts: Vec<f64>,
    nu: Vec<f64>,
}

/// Builds the equiprobable partition for dimension d ∈ {2, 3}.
pub fn build_partition(k_n: usize, d: u32) -> Result<Partition> {
    if k_n == 0 {
        return Err(Error::InvalidPartition(k_n));
    }
    match d {
        2 => Ok(Partition {
            d,
            k_n,
            azimuth_cuts: cuts(k_n, TAU),
            colat_cuts: Vec::new(),
            nu: vec![1.0 / k_n as f64; k_n],
        }),
        3 => {
            let k1 = largest_divisor_at_most_sqrt(k_n);
            let k2 = k_n / k1;
            let colat_cuts = (0..=k1)
                .map(|i| (1.0 - 2.0 * i as f64 / k1 as f64).clamp(-1.0, 1.0).acos())
                .collect();
            Ok(Partition {
                d,
                k_n,
                azimuth_cuts: cuts(k2, TAU),
                colat_cuts,
                nu: vec![1.0 / k_n as f64; k_n],
            })
        }
        _ => Err(Error::UnsupportedDimension(d)),
    }
}

fn cuts(k: usize, limit: f64) -> Vec<f64> {
    (0..=k).map(|i| limit * i as f64 / k as f64).collect()
}

fn largest_divisor_at_most_sqrt(k: usize) -> usize {
    let mut best = 1;
    let mut i = 1;
    while i * i <= k {
        if k.is_multiple_of(i) {
            best = i;
        }
        i += 1;
    }
    best
}

impl Partition {
    pub fn k_n(&self) -> usize {
        self.k_n
    }

    pub fn dimension(&self) -> u32 {
        self.d
    }

    /// Exact per-cell base measures; all equal to 1/k_n by construction.
    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    /// ν_n = min_r ν_{n,r}.
    pub fn nu_min(&self) -> f64 {
        1.0 / self.k_n as f64
    }

    /// Number of azimuthal arcs (k_n itself for d = 2).
    pub fn azimuth_cells(&self) -> usize {
        self.azimuth_cuts.len() - 1
    }

    /// Number of colatitude bands (1 for d = 2).
    pub fn colat_cells(&self) -> usize {
        if self.d == 2 { 1 } else { self.colat_cuts.len() - 1 }
    }

    /// Azimuthal bounds [a, b) of cell r.
    pub fn cell_azimuth_bounds(&self, r: usize) -> (f64, f64) {
        let i = r % self.azimuth_cells();
        (self.azimuth_cuts[i], self.azimuth_cuts[i + 1])
    }

    /// Colatitude bounds of cell r (None for d = 2).
    pub fn cell_colat_bounds(&self, r: usize) -> Option<(f64, f64)> {
        if self.d == 2 {
            None
        } else {
            let i = r / self.azimuth_cells();
            Some((self.colat_cuts[i], self.colat_cuts[i + 1]))
        }
    }

    /// The cell containing `x`. Cells are left-closed, so an angle exactly on
    /// a cut belongs to the cell starting there.
    pub fn cell_index(&self, x: &Direction) -> Result<usize> {
        if x.dimension() != self.d {
            return Err(Error::InvalidDimension(x.dimension()));
        }
        let az = x.azimuth();
        if !(0.0..TAU).contains(&az) {
            return Err(Error::AngleOutOfDomain { value: az, limit: TAU });
        }
        let k2 = self.azimuth_cells();
        let i2 = self.azimuth_cuts[1..k2].partition_point(|&c| c <= az);
        if self.d == 2 {
            return Ok(i2);
        }
        let colat = x.coords()[0];
        let k1 = self.colat_cells();
        let i1 = self.colat_cuts[1..k1].partition_point(|&c| c <= colat);
        Ok(i1 * k2 + i2)
    }
}
