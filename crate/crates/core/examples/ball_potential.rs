//! Potential of a homogeneous unit ball on the cylindrical grid, compared with
//! the shell-theorem closed form, at two resolutions.

use std::f64::consts::PI;
use std::time::Instant;

use rotstar::gravity::{AxisymGrid, DensityField, KernelTable};

fn exact(r: f64, z: f64) -> f64 {
    let d2 = r * r + z * z;
    if d2 <= 1.0 {
        2.0 * PI - 2.0 * PI / 3.0 * d2
    } else {
        4.0 * PI / 3.0 / d2.sqrt()
    }
}

fn main() -> rotstar::Result<()> {
    for n in [32, 64, 128] {
        let grid = AxisymGrid::new(n, n, 2.0, 2.0)?;
        let t0 = Instant::now();
        let table = KernelTable::new(grid);
        let built = t0.elapsed();
        let rho =
            DensityField::cell_average(
                grid,
                64,
                |r, z| {
                    if r * r + z * z <= 1.0 {
                        1.0
                    } else {
                        0.0
                    }
                },
            );
        let t1 = Instant::now();
        let u = table.potential(&rho);
        let solved = t1.elapsed();
        let mut worst: f64 = 0.0;
        for k in 0..=n {
            for i in 0..=n {
                let e = exact(grid.r(i), grid.z(k));
                worst = worst.max((u.at(i, k) - e).abs() / e);
            }
        }
        println!(
            "{n:>4}x{n:<4} mass {:.8} (exact {:.8})  max rel err {worst:.3e}  U(0,0) {:.6}  table {:?}  solve {:?}",
            rho.mass(),
            4.0 * PI / 3.0,
            u.at(0, 0),
            built,
            solved
        );
    }
    Ok(())
}
