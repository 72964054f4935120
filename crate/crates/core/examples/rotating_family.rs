//! Family of rotating gamma = 1.5 stars continued in kappa from the
//! non-rotating polytrope with the power-decay profile (p = 2).
//!
//! Usage: `rotating_family [n] [step0] [kappa_max]`. On the 64 x 64 grid the
//! compact branch turns back near kappa = 0.592; a larger `kappa_max` shows the
//! iteration stalling there.

use std::time::Instant;

use rotstar::continuation::{continue_family, static_seed, ContinuationParams, Limits};
use rotstar::gravity::{AxisymGrid, KernelTable};
use rotstar::radial::{LaneEmdenSolver, PolytropeParams};
use rotstar::rotation::RotationProfile;
use rotstar::scf::ScfOptions;

fn main() -> rotstar::Result<()> {
    env_logger::init();
    let args: Vec<String> = std::env::args().collect();
    let arg = |i: usize, d: f64| args.get(i).and_then(|s| s.parse().ok()).unwrap_or(d);
    let n = arg(1, 64.0) as usize;
    let step0 = arg(2, 0.025);
    let kappa_max = arg(3, 0.55);

    let gamma = 1.5;
    let radial = LaneEmdenSolver::default().solve(&PolytropeParams::new(gamma, 1.0)?)?;
    let extent = 4.0 * radial.radius;
    let grid = AxisymGrid::new(n, n, extent, extent)?;
    let t0 = Instant::now();
    let table = KernelTable::new(grid);
    let profile = RotationProfile::power_decay(1.0, 2.0)?;
    let mut opts = ScfOptions::default();
    let seed = static_seed(&table, gamma, 1.0, &profile, &opts)?;
    opts.eps_boundary = 1e-4 * seed.alpha.abs();
    let params = ContinuationParams {
        kappa_max,
        step0,
        step_min: 1e-3 * step0,
        limits: Limits::default(),
    };
    let run = continue_family(&table, &seed, &profile, &params, &opts)?;

    println!("kappa      alpha       max_rho    support_r  support_z  iters");
    for r in &run.records {
        println!(
            "{:<10.4} {:<11.6} {:<10.6} {:<10.4} {:<10.4} {}",
            r.kappa, r.alpha, r.max_rho, r.support_r, r.support_z, r.scf_iters
        );
    }
    println!(
        "{} records, termination {}: {} ({:?})",
        run.records.len(),
        run.termination.kind,
        run.termination.detail,
        t0.elapsed()
    );
    Ok(())
}
