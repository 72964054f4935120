//! Non-rotating star from the self-consistent field iteration, checked against
//! the radial Lane-Emden solution with the same mass.

use std::time::Instant;

use rotstar::gravity::{AxisymGrid, KernelTable};
use rotstar::radial::{LaneEmdenSolver, PolytropeParams};
use rotstar::rotation::RotationProfile;
use rotstar::scf::{scf_solve, seed_density, ScfOptions};

fn main() -> rotstar::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let gamma: f64 = args.get(1).map_or(Ok(2.0), |s| s.parse()).unwrap_or(2.0);
    let n: usize = args.get(2).map_or(Ok(128), |s| s.parse()).unwrap_or(128);

    let radial = LaneEmdenSolver::default().solve(&PolytropeParams::new(gamma, 1.0)?)?;
    let extent = 1.25 * radial.radius;
    let grid = AxisymGrid::new(n, n, extent, extent)?;
    let t0 = Instant::now();
    let table = KernelTable::new(grid);
    let profile = RotationProfile::power_decay(1.0, 2.0)?;
    let opts = ScfOptions::default();
    let state = scf_solve(
        &table,
        &seed_density(grid, &radial),
        0.0,
        gamma,
        radial.mass,
        &profile,
        &opts,
    )?;
    let oracle = seed_density(grid, &radial);
    let peak = oracle.values.iter().cloned().fold(0.0, f64::max);
    let err = state
        .rho
        .values
        .iter()
        .zip(&oracle.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        / peak;
    println!(
        "gamma {gamma}, grid {n}x{n}, radius {:.7}, mass {:.7}",
        radial.radius, radial.mass
    );
    println!(
        "iterations {}  alpha {:.6}  sup-rel density error {err:.3e}",
        state.iterations, state.alpha
    );
    println!(
        "support r {:.4} z {:.4}  max rho {:.6}  f1 {:.2e}  f2 {:.2e}  ({:?})",
        state.diagnostics.support_r,
        state.diagnostics.support_z,
        state.diagnostics.max_rho,
        state.residuals.f1_sup,
        state.residuals.f2_mass,
        t0.elapsed()
    );
    Ok(())
}
