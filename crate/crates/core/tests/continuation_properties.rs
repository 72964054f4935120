use rotstar::continuation::{
    continue_family, format_family_csv, static_seed, ContinuationParams, FamilyRun, Limits,
    TerminationKind, FAMILY_HEADER,
};
use rotstar::gravity::{AxisymGrid, KernelTable};
use rotstar::radial::{LaneEmdenSolver, PolytropeParams};
use rotstar::rotation::RotationProfile;
use rotstar::scf::ScfOptions;

fn run(step0: f64, kappa_max: f64) -> FamilyRun {
    let le = LaneEmdenSolver::default()
        .solve(&PolytropeParams::new(1.5, 1.0).unwrap())
        .unwrap();
    let ext = 3.0 * le.radius;
    let grid = AxisymGrid::new(32, 32, ext, ext).unwrap();
    let table = KernelTable::new(grid);
    let profile = RotationProfile::power_decay(1.0, 2.0).unwrap();
    let mut opts = ScfOptions::default();
    let seed = static_seed(&table, 1.5, 1.0, &profile, &opts).unwrap();
    opts.eps_boundary = 1e-4 * seed.alpha.abs();
    let params = ContinuationParams {
        kappa_max,
        step0,
        step_min: 1e-3 * step0,
        limits: Limits::default(),
    };
    continue_family(&table, &seed, &profile, &params, &opts).unwrap()
}

fn max_jump(run: &FamilyRun) -> f64 {
    run.states
        .windows(2)
        .map(|w| {
            w[0].rho
                .values
                .iter()
                .zip(&w[1].rho.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

#[test]
fn consecutive_states_approach_each_other_as_the_step_shrinks() {
    let jumps: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|h| max_jump(&run(*h, 0.4)))
        .collect();
    assert!(
        jumps[1] < 0.75 * jumps[0] && jumps[2] < 0.75 * jumps[1],
        "{jumps:?}"
    );
}

#[test]
fn records_are_ordered_and_valid() {
    let r = run(0.1, 0.4);
    assert_eq!(r.termination.kind, TerminationKind::MaxKappaReached);
    assert_eq!(r.records.len(), 5);
    assert!(r.records.windows(2).all(|w| w[1].kappa > w[0].kappa));
    for s in &r.states {
        assert!(s.residuals.f2_mass / s.mass_target <= 1e-8);
        assert!(s.kappa * s.kappa * 0.5 + s.alpha < 0.0);
        assert!(s.rho.values.iter().all(|v| *v >= 0.0));
    }
    let csv = format_family_csv(&r.records, Some(&r.termination));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], FAMILY_HEADER);
    assert_eq!(lines.len(), r.records.len() + 2);
    assert_eq!(*lines.last().unwrap(), "# termination=MaxKappaReached");
    assert!(lines[1..=r.records.len()]
        .iter()
        .all(|l| l.split(',').count() == 9));
}
