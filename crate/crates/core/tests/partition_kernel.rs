use frontier_core::geometry::{base_density, Direction};
use frontier_core::kernel::{weight_table, KernelSpec};
use frontier_core::partition::build_partition;
use frontier_core::quad;
use proptest::prelude::*;
use std::f64::consts::{PI, TAU};

#[test]
fn d3_cells_are_equiprobable_under_nu() {
    // ν(I_r) by quadrature of h_3 over each cell must be 1/8.
    let p = build_partition(8, 3).unwrap();
    assert_eq!(p.k_n(), 8);
    for r in 0..8 {
        let (a, b) = p.cell_azimuth_bounds(r);
        let (c, d) = p.cell_colat_bounds(r).unwrap();
        let colat_part = quad::integrate(
            |x1| {
                base_density(&Direction::new(vec![x1.clamp(1e-15, PI - 1e-15), 0.0]).unwrap())
                    .unwrap()
            },
            c,
            d,
            1e-11,
            quad::DEFAULT_BUDGET,
        )
        .unwrap();
        let mass = colat_part * (b - a);
        assert!((mass - 0.125).abs() < 1e-10, "cell {r}: {mass}");
    }
}

#[test]
fn cell_integral_matches_adaptive_quadrature() {
    let spec = KernelSpec::new(7);
    let (a, b) = (0.0, PI / 10.0);
    let x = 1.0;
    let exact = spec.cell_integral(x, a, b);
    let numeric =
        quad::integrate(|t| spec.eval(x, t) / TAU, a, b, 1e-13, quad::DEFAULT_BUDGET).unwrap();
    assert!((exact - numeric).abs() < 1e-12, "{exact} vs {numeric}");
}

#[test]
fn kappa_n_tracks_asymptotic_proxy() {
    // κ_n(x) ≈ (k_n (ℓ_n+1))^{1/2} when cells resolve the kernel.
    let p = build_partition(20, 2).unwrap();
    let spec = KernelSpec::new(7);
    let wt = weight_table(&spec, &p, &Direction::angle(0.0)).unwrap();
    let proxy = (20.0f64 * 15.0).sqrt();
    let ratio = wt.kappa_n / proxy;
    assert!(
        (0.8..=1.2).contains(&ratio),
        "kappa_n(0) = {}, proxy = {proxy}, ratio = {ratio}",
        wt.kappa_n
    );
    assert!((wt.kappa_n_asymptotic - proxy).abs() < 1e-12);
}

#[test]
fn kernel_oscillation_shrinks_with_finer_cells() {
    // Refining an equidistant partition cannot increase the largest kernel
    // oscillation over a cell.
    let spec = KernelSpec::new(5);
    let x = 0.37;
    let osc_max = |k: usize| -> f64 {
        let p = build_partition(k, 2).unwrap();
        let mut worst = 0.0f64;
        for r in 0..k {
            let (a, b) = p.cell_azimuth_bounds(r);
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for i in 0..=256 {
                let t = a + (b - a) * i as f64 / 256.0;
                let v = spec.eval(x, t);
                lo = lo.min(v);
                hi = hi.max(v);
            }
            worst = worst.max(hi - lo);
        }
        worst
    };
    let coarse = osc_max(10);
    let mid = osc_max(20);
    let fine = osc_max(40);
    assert!(mid <= coarse + 1e-9, "{mid} > {coarse}");
    assert!(fine <= mid + 1e-9, "{fine} > {mid}");
    assert!(fine < 0.6 * coarse, "oscillation should shrink markedly: {fine} vs {coarse}");
}

#[test]
fn weights_shift_with_the_partition() {
    // Both the kernel and the equidistant partition are invariant under a
    // shift by a whole cell, so the weight vector rotates.
    let p = build_partition(12, 2).unwrap();
    let spec = KernelSpec::new(4);
    let x = 0.81;
    let shift = TAU / 12.0;
    let w0 = weight_table(&spec, &p, &Direction::angle(x)).unwrap();
    let w1 = weight_table(&spec, &p, &Direction::angle(x + shift)).unwrap();
    for r in 0..12 {
        let rotated = w1.kappa[(r + 1) % 12];
        assert!((w0.kappa[r] - rotated).abs() < 1e-11, "cell {r}");
    }
    assert!((w0.kappa_n - w1.kappa_n).abs() < 1e-11);
}

proptest! {
    #[test]
    fn partition_of_unity(k in 1usize..120, m in 0u32..16, a in 0.0..TAU) {
        let p = build_partition(k, 2).unwrap();
        let spec = KernelSpec::new(m);
        let total: f64 = (0..k)
            .map(|r| {
                let (lo, hi) = p.cell_azimuth_bounds(r);
                spec.cell_integral(a, lo, hi)
            })
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-12, "sum = {}", total);
    }

    #[test]
    fn weight_norms(k in 2usize..80, m in 0u32..10, a in 0.0..TAU) {
        let p = build_partition(k, 2).unwrap();
        let spec = KernelSpec::new(m);
        let wt = weight_table(&spec, &p, &Direction::angle(a)).unwrap();
        let wsq: f64 = wt.w.iter().map(|w| w * w).sum();
        prop_assert!((wsq - 1.0).abs() < 1e-12);
        let ksum: f64 = wt.kappa.iter().sum();
        // κ sums to k_n because the cell integrals sum to one.
        prop_assert!((ksum - k as f64).abs() < 1e-9 * k as f64);
    }

    #[test]
    fn cell_lookup_is_consistent(k in 1usize..200, a in 0.0..TAU) {
        let p = build_partition(k, 2).unwrap();
        let r = p.cell_index(&Direction::angle(a)).unwrap();
        let (lo, hi) = p.cell_azimuth_bounds(r);
        prop_assert!(lo <= a && (a < hi || (r == k - 1 && a < TAU)));
    }
}
