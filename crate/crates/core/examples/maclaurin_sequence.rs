//! The Maclaurin sequence: `omega^2` against ellipticity, its maximum, and the
//! boundary equipotential check.

use std::f64::consts::PI;

use rotstar::maclaurin::{boundary_residual, maclaurin_family, omega2_from_coeffs, omega2_reduced};

fn main() -> rotstar::Result<()> {
    let tol = 1e-12;
    let family = maclaurin_family(1.0, 10.0, 19, tol)?;
    println!("e        a          c          omega2/pi     residual");
    for m in &family.members {
        println!(
            "{:<8.3} {:<10.6} {:<10.6} {:<13.8} {:.2e}",
            m.e,
            m.a,
            m.c,
            m.omega2 / PI,
            boundary_residual(m.e, 32, tol)?
        );
    }

    let fine = maclaurin_family(2.0, 3.5, 1501, tol)?;
    let best = fine.members[fine.argmax];
    println!(
        "\nmax omega2 = {:.6} pi at e = {:.3}",
        best.omega2 / PI,
        best.e
    );

    let e = 4.0;
    println!(
        "two routes at e = {e}: {:.15} and {:.15}",
        omega2_reduced(e, tol)?,
        omega2_from_coeffs(e, tol)?
    );
    Ok(())
}
