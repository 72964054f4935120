use std::f64::consts::PI;

use proptest::prelude::*;
use rotstar::gravity::{
    elliptic_k, integrate_nodes, potential_at, weighted_norm, AxisymGrid, DensityField, KernelTable,
};
use rotstar::maclaurin::{ellipsoid_coeffs, semi_axes};
use rotstar::radial::{LaneEmdenSolver, PolytropeParams};
use rotstar::scf::seed_density;

fn ball(grid: AxisymGrid, sub: usize) -> DensityField {
    DensityField::cell_average(
        grid,
        sub,
        |r, z| if r * r + z * z <= 1.0 { 1.0 } else { 0.0 },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn elliptic_k_matches_midpoint_quadrature(k in 0.0f64..0.99) {
        let n = 20000;
        let h = 0.5 * PI / n as f64;
        let direct: f64 = (0..n)
            .map(|i| {
                let t = (i as f64 + 0.5) * h;
                h / (1.0 - k * k * t.sin().powi(2)).sqrt()
            })
            .sum();
        prop_assert!((elliptic_k(k).unwrap() - direct).abs() < 1e-9);
    }

    #[test]
    fn convolution_is_self_adjoint(
        c1 in 0.2f64..1.0, w1 in 0.2f64..0.6, c2 in 0.0f64..1.0, w2 in 0.2f64..0.6,
    ) {
        let grid = AxisymGrid::new(24, 24, 2.0, 2.0).unwrap();
        let table = KernelTable::new(grid);
        let rho = DensityField::from_fn(grid, |r, z| (-((r - c1).powi(2) + z * z) / (w1 * w1)).exp());
        let sigma = DensityField::from_fn(grid, |r, z| (-(r * r + (z - c2).powi(2)) / (w2 * w2)).exp() * (1.0 + r));
        let u_rho = table.potential(&rho);
        let u_sigma = table.potential(&sigma);
        let a = integrate_nodes(&grid, &u_rho.values.iter().zip(&sigma.values).map(|(u, s)| u * s).collect::<Vec<_>>());
        let b = integrate_nodes(&grid, &u_sigma.values.iter().zip(&rho.values).map(|(u, s)| u * s).collect::<Vec<_>>());
        prop_assert!((a - b).abs() < 1e-6 * a.abs());
    }
}

#[test]
fn ball_far_field_and_exterior_point() {
    let grid = AxisymGrid::new(48, 48, 1.5, 1.5).unwrap();
    let rho = ball(grid, 32);
    let m = rho.mass();
    for (r, z) in [(3.0f64, 0.0f64), (0.0, 3.0), (2.1213, 2.1213), (5.0, 4.0)] {
        let d = (r * r + z * z).sqrt();
        let u = potential_at(&rho, r, z);
        assert!((u - m / d).abs() < 1e-3 * m / d, "({r}, {z})");
    }
    let u = potential_at(&rho, 0.0, 2.0);
    assert!((u - 4.0 * PI / 3.0 / 2.0).abs() < 1e-3);
}

#[test]
fn potential_is_positive_and_decays_outside() {
    let grid = AxisymGrid::new(32, 32, 2.0, 2.0).unwrap();
    let pot = KernelTable::new(grid).potential(&ball(grid, 8));
    assert!(pot.values.iter().all(|u| *u > 0.0));
    let along: Vec<f64> = (17..=32).map(|i| pot.at(i, 0)).collect();
    assert!(along.windows(2).all(|w| w[1] < w[0]));
    let up: Vec<f64> = (17..=32).map(|k| pot.at(0, k)).collect();
    assert!(up.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn maclaurin_spheroid_interior() {
    let e = 2.0;
    let (a, c) = semi_axes(e);
    let k = ellipsoid_coeffs(a, a, c, 1e-12).unwrap();
    let grid = AxisymGrid::new(64, 64, 1.5, 1.5).unwrap();
    let inside = |r: f64, z: f64| (r / a).powi(2) + (z / c).powi(2) <= 1.0;
    let rho = DensityField::cell_average(grid, 32, |r, z| if inside(r, z) { 1.0 } else { 0.0 });
    let pot = KernelTable::new(grid).potential(&rho);
    let mut worst: f64 = 0.0;
    for kz in 0..=grid.nz {
        for i in 0..=grid.nr {
            let (r, z) = (grid.r(i), grid.z(kz));
            if inside(r, z) {
                let exact = k.potential([r, 0.0, z]);
                worst = worst.max((pot.at(i, kz) - exact).abs() / exact);
            }
        }
    }
    assert!(worst < 1e-2, "{worst}");
}

#[test]
fn weighted_norm_is_stable_under_refinement() {
    let radial = LaneEmdenSolver::default()
        .solve(&PolytropeParams::new(1.5, 1.0).unwrap())
        .unwrap();
    let extent = 1.5 * radial.radius;
    let norm = |n: usize| {
        let grid = AxisymGrid::new(n, n, extent, extent).unwrap();
        weighted_norm(&grid, &seed_density(grid, &radial).values, 4.0)
    };
    let (coarse, fine) = (norm(64), norm(128));
    assert!(fine.is_finite() && fine > 0.0);
    assert!((coarse - fine).abs() < 1e-2 * fine, "{coarse} vs {fine}");
}
