//! Radial polytropes: radius and mass for several gamma, the gamma = 2 closed
//! form, and the mass-scaling law `M(lambda^beta a) = lambda^(beta - 3) M(a)`.

use std::f64::consts::PI;

use rotstar::radial::{mass_exponent, rescale, LaneEmdenSolver, PolytropeParams};

fn main() -> rotstar::Result<()> {
    let solver = LaneEmdenSolver::default();

    let p = solver.solve(&PolytropeParams::new(2.0, 1.0)?)?;
    println!(
        "gamma 2: R = {:.12} (exact {:.12}), M = {:.12} (exact {:.12})",
        p.radius,
        PI.sqrt() / 2.0,
        p.mass,
        PI.sqrt() / 2.0
    );

    println!("\ngamma    R            M            dlnM/dlna");
    for gamma in [1.25, 4.0 / 3.0, 1.5, 1.8, 2.0] {
        let p = solver.solve(&PolytropeParams::new(gamma, 1.0)?)?;
        println!(
            "{gamma:<8.4} {:<12.8} {:<12.8} {:+.6}",
            p.radius,
            p.mass,
            mass_exponent(gamma)?
        );
    }

    match solver.solve(&PolytropeParams::new(7.0 / 6.0, 1.0)?) {
        Err(e) => println!("\ngamma 7/6: {e}"),
        Ok(p) => println!("\ngamma 7/6: unexpected radius {}", p.radius),
    }

    let base = solver.solve(&PolytropeParams::new(1.5, 1.0)?)?;
    let scaled = rescale(&base, 1.3)?;
    let fresh = solver.solve(&PolytropeParams::new(1.5, scaled.central_value)?)?;
    println!(
        "\nrescaled gamma 1.5 by 1.3: R {:.10} vs {:.10}, M {:.10} vs {:.10}",
        scaled.radius, fresh.radius, scaled.mass, fresh.mass
    );
    Ok(())
}
