//! Newtonian potential of axisymmetric, z-even densities on a cylindrical grid.
//!
//! For an axisymmetric source the azimuthal integral of `1/|x - x'|` reduces to
//! the ring kernel
//!
//! ```text
//! G(r, r', dz) = 4 K(k) / sqrt((r + r')^2 + dz^2),   k^2 = 4 r r' / ((r + r')^2 + dz^2)
//! ```
//!
//! so that `U(r, z) = int int G(r, r', z - z') rho(r', z') r' dr' dz'`. Each node
//! owns the cell `[r - dr/2, r + dr/2] x [z - dz/2, z + dz/2]` (clipped at the
//! axis) and the density is taken constant over it. Cell integrals of the kernel
//! are tabulated once per grid for every target radius, source column and
//! vertical offset; the mirror source below the midplane is folded in at
//! evaluation time.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};

/// Uniform cylindrical grid over `0 <= r <= rmax`, `0 <= z <= zmax`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisymGrid {
    pub nr: usize,
    pub nz: usize,
    pub dr: f64,
    pub dz: f64,
}

impl AxisymGrid {
    pub fn new(nr: usize, nz: usize, rmax: f64, zmax: f64) -> Result<Self> {
        if nr < 2 || nz < 2 {
            return Err(invalid(format!(
                "grid needs at least 2x2 cells, got {nr}x{nz}"
            )));
        }
        if !(rmax > 0.0 && zmax > 0.0) || !rmax.is_finite() || !zmax.is_finite() {
            return Err(invalid(format!(
                "grid extents must be positive, got {rmax}, {zmax}"
            )));
        }
        Ok(Self {
            nr,
            nz,
            dr: rmax / nr as f64,
            dz: zmax / nz as f64,
        })
    }

    pub fn rmax(&self) -> f64 {
        self.nr as f64 * self.dr
    }

    pub fn zmax(&self) -> f64 {
        self.nz as f64 * self.dz
    }

    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.dr
    }

    pub fn z(&self, k: usize) -> f64 {
        k as f64 * self.dz
    }

    /// Number of nodes, `(nr + 1) (nz + 1)`.
    pub fn len(&self) -> usize {
        (self.nr + 1) * (self.nz + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Storage index of node `(i, k)`; rows of constant `z` are contiguous.
    pub fn index(&self, i: usize, k: usize) -> usize {
        k * (self.nr + 1) + i
    }

    /// `(i, k)` of a storage index.
    pub fn node(&self, idx: usize) -> (usize, usize) {
        (idx % (self.nr + 1), idx / (self.nr + 1))
    }

    /// Radial extent of the cell owned by column `j`.
    pub fn cell_r(&self, j: usize) -> (f64, f64) {
        let r = self.r(j);
        ((r - 0.5 * self.dr).max(0.0), r + 0.5 * self.dr)
    }

    /// `int r' dr'` over the cell of column `j`.
    fn radial_moment(&self, j: usize) -> f64 {
        let (lo, hi) = self.cell_r(j);
        0.5 * (hi * hi - lo * lo)
    }

    /// Volume in full space attributed to node `(i, k)`, counting the mirror
    /// image for `k > 0`.
    pub fn volume(&self, i: usize, k: usize) -> f64 {
        let mirror = if k == 0 { 1.0 } else { 2.0 };
        2.0 * PI * self.radial_moment(i) * self.dz * mirror
    }

    /// Whether `(i, k)` lies on the outer boundary `r = rmax` or `z = zmax`.
    pub fn is_outer(&self, i: usize, k: usize) -> bool {
        i == self.nr || k == self.nz
    }
}

/// Density sampled at grid nodes; represents a z-even function.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    pub grid: AxisymGrid,
    pub values: Vec<f64>,
}

/// Potential sampled at grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    pub grid: AxisymGrid,
    pub values: Vec<f64>,
}

impl DensityField {
    pub fn new(grid: AxisymGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid(format!(
                "density has {} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(invalid(format!(
                "density values must be finite and >= 0, found {v}"
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: AxisymGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    /// Samples `f(r, z)` at the nodes, clamping negative values to zero.
    pub fn from_fn(grid: AxisymGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|idx| {
                let (i, k) = grid.node(idx);
                f(grid.r(i), grid.z(k)).max(0.0)
            })
            .collect();
        Self { grid, values }
    }

    /// Volume average of `f` over each node's cell using `sub x sub` midpoints,
    /// weighted by `r`. Resolves sharp edges such as the surface of a
    /// homogeneous body.
    pub fn cell_average(grid: AxisymGrid, sub: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        let sub = sub.max(1);
        let values = (0..grid.len())
            .map(|idx| {
                let (i, k) = grid.node(idx);
                let (rlo, rhi) = grid.cell_r(i);
                let (zlo, zhi) = (grid.z(k) - 0.5 * grid.dz, grid.z(k) + 0.5 * grid.dz);
                let mut num = 0.0;
                let mut den = 0.0;
                for a in 0..sub {
                    let r = rlo + (rhi - rlo) * (a as f64 + 0.5) / sub as f64;
                    for b in 0..sub {
                        let z = zlo + (zhi - zlo) * (b as f64 + 0.5) / sub as f64;
                        num += r * f(r, z.abs());
                        den += r;
                    }
                }
                (num / den).max(0.0)
            })
            .collect();
        Self { grid, values }
    }

    pub fn at(&self, i: usize, k: usize) -> f64 {
        self.values[self.grid.index(i, k)]
    }

    /// Total mass in full space.
    pub fn mass(&self) -> f64 {
        integrate_nodes(&self.grid, &self.values)
    }
}

impl PotentialField {
    pub fn at(&self, i: usize, k: usize) -> f64 {
        self.values[self.grid.index(i, k)]
    }
}

/// `sum_nodes volume * f`, the full-space integral of a z-even node field.
pub fn integrate_nodes(grid: &AxisymGrid, values: &[f64]) -> f64 {
    let mut total = 0.0;
    for k in 0..=grid.nz {
        for i in 0..=grid.nr {
            let v = values[grid.index(i, k)];
            if v != 0.0 {
                total += grid.volume(i, k) * v;
            }
        }
    }
    total
}

/// Complete elliptic integral of the first kind, `K(k) = int_0^{pi/2} (1 - k^2 sin^2)^-1/2`,
/// by the arithmetic-geometric mean.
pub fn elliptic_k(k: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&k) {
        return Err(invalid(format!("elliptic K needs 0 <= k < 1, got {k}")));
    }
    Ok(k_of_m(k * k))
}

/// `K` as a function of the parameter `m = k^2`.
fn k_of_m(m: f64) -> f64 {
    let mut a = 1.0;
    let mut b = (1.0 - m).sqrt();
    for _ in 0..40 {
        if (a - b).abs() <= 1e-15 * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    PI / (a + b)
}

fn ring_kernel(r: f64, rp: f64, zeta: f64) -> f64 {
    let sum = r + rp;
    let d2 = sum * sum + zeta * zeta;
    let m = 4.0 * r * rp / d2;
    4.0 * k_of_m(m) / d2.sqrt()
}

const NEAR_K2: f64 = 0.999 * 0.999;
const GAUSS2: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];

/// Radial extent of the cell centred on radius `rc`, clipped at the axis.
fn cell_bounds(grid: &AxisymGrid, rc: f64) -> (f64, f64) {
    ((rc - 0.5 * grid.dr).max(0.0), rc + 0.5 * grid.dr)
}

fn moment_at(grid: &AxisymGrid, rc: f64) -> f64 {
    let (lo, hi) = cell_bounds(grid, rc);
    0.5 * (hi * hi - lo * lo)
}

/// `int int G(r, r', zeta) r' dr' dzeta` over the cell centred on radius `rc`
/// with the vertical extent `[zeta_c - dz/2, zeta_c + dz/2]`.
///
/// Cells near the target, or where the kernel's modulus exceeds 0.999, are
/// split into 4x4 sub-cells with a 2x2 Gauss rule each; sub-cell nodes never
/// coincide with the target. Other cells use the midpoint value.
fn cell_integral(grid: &AxisymGrid, r: f64, zeta_c: f64, rc: f64) -> f64 {
    let zeta_c = zeta_c.abs();
    let sum = r + rc;
    let d2 = sum * sum + zeta_c * zeta_c;
    let near_k = d2 > 0.0 && 4.0 * r * rc / d2 > NEAR_K2;
    let close = (r - rc).abs() <= 2.5 * grid.dr && zeta_c <= 2.5 * grid.dz;
    if !(near_k || close) {
        return ring_kernel(r, rc, zeta_c) * moment_at(grid, rc) * grid.dz;
    }
    const SUB: usize = 4;
    let (rlo, rhi) = cell_bounds(grid, rc);
    let hr = (rhi - rlo) / SUB as f64;
    let hz = grid.dz / SUB as f64;
    let zlo = zeta_c - 0.5 * grid.dz;
    let mut acc = 0.0;
    for a in 0..SUB {
        let rm = rlo + (a as f64 + 0.5) * hr;
        for b in 0..SUB {
            let zc = zlo + (b as f64 + 0.5) * hz;
            for gr in GAUSS2 {
                let rp = rm + 0.5 * hr * gr;
                for gz in GAUSS2 {
                    let zeta = zc + 0.5 * hz * gz;
                    acc += ring_kernel(r, rp, zeta) * rp;
                }
            }
        }
    }
    acc * 0.25 * hr * hz
}

/// Interaction of the target cell at `r` with the source cell at `rc`: the
/// mean of the two point-to-cell integrals, each scaled to the target. The
/// resulting convolution is self-adjoint under the cell volumes.
fn pair_integral(grid: &AxisymGrid, r: f64, zeta_c: f64, rc: f64) -> f64 {
    let forward = cell_integral(grid, r, zeta_c, rc);
    let backward = cell_integral(grid, rc, zeta_c, r);
    0.5 * (forward + moment_at(grid, rc) / moment_at(grid, r) * backward)
}

/// Cell-integrated ring kernel for every (target radius, source column,
/// vertical offset) triple of a grid. Immutable once built.
#[derive(Debug, Clone)]
pub struct KernelTable {
    grid: AxisymGrid,
    offsets: usize,
    table: Vec<f64>,
}

impl KernelTable {
    pub fn new(grid: AxisymGrid) -> Self {
        let nr1 = grid.nr + 1;
        let offsets = 2 * grid.nz + 1;
        let table: Vec<f64> = (0..nr1 * nr1)
            .into_par_iter()
            .flat_map_iter(|ij| {
                let (i, j) = (ij / nr1, ij % nr1);
                let r = grid.r(i);
                (0..offsets).map(move |m| pair_integral(&grid, r, m as f64 * grid.dz, grid.r(j)))
            })
            .collect();
        Self {
            grid,
            offsets,
            table,
        }
    }

    pub fn grid(&self) -> &AxisymGrid {
        &self.grid
    }

    fn row(&self, i: usize, j: usize) -> &[f64] {
        let start = (i * (self.grid.nr + 1) + j) * self.offsets;
        &self.table[start..start + self.offsets]
    }

    /// Potential of `rho` at every node. Targets are evaluated in parallel; each
    /// target's sum is sequential, so results do not depend on thread count.
    pub fn potential(&self, rho: &DensityField) -> PotentialField {
        PotentialField {
            grid: self.grid,
            values: self.potential_values(&rho.grid, &rho.values),
        }
    }

    /// Same as [`KernelTable::potential`] for a raw node field.
    pub fn potential_values(&self, grid: &AxisymGrid, values: &[f64]) -> Vec<f64> {
        assert_eq!(
            grid, &self.grid,
            "density grid does not match the kernel table"
        );
        let g = &self.grid;
        let (nr1, nz1) = (g.nr + 1, g.nz + 1);
        // Column-major copy with the half weight of the midplane row folded in,
        // plus the occupied k-range of each column.
        let mut cols = vec![0.0; nr1 * nz1];
        let mut ranges = Vec::new();
        for j in 0..nr1 {
            let mut lo = usize::MAX;
            let mut hi = 0;
            for k in 0..nz1 {
                let v = values[g.index(j, k)];
                if v != 0.0 {
                    cols[j * nz1 + k] = if k == 0 { 0.5 * v } else { v };
                    lo = lo.min(k);
                    hi = k;
                }
            }
            if lo != usize::MAX {
                ranges.push((j, lo, hi));
            }
        }
        (0..g.len())
            .into_par_iter()
            .map(|idx| {
                let (i, k) = g.node(idx);
                let mut acc = 0.0;
                for &(j, lo, hi) in &ranges {
                    let row = self.row(i, j);
                    let col = &cols[j * nz1..(j + 1) * nz1];
                    let mut s = 0.0;
                    for kp in lo..=hi {
                        let direct = if kp <= k { row[k - kp] } else { row[kp - k] };
                        s += col[kp] * (direct + row[k + kp]);
                    }
                    acc += s;
                }
                acc
            })
            .collect()
    }
}

/// Potential of `rho` at every node, building a kernel table for its grid.
pub fn potential(rho: &DensityField) -> PotentialField {
    KernelTable::new(rho.grid).potential(rho)
}

/// Potential of `rho` at an arbitrary point `(r, z)` by a direct sum over
/// source cells using the same cell quadrature as [`KernelTable`], the point
/// standing for a grid-sized cell centred on it.
pub fn potential_at(rho: &DensityField, r: f64, z: f64) -> f64 {
    let g = &rho.grid;
    let z = z.abs();
    let mut acc = 0.0;
    for j in 0..=g.nr {
        for kp in 0..=g.nz {
            let v = rho.at(j, kp);
            if v == 0.0 {
                continue;
            }
            let w = if kp == 0 { 0.5 } else { 1.0 };
            let zp = g.z(kp);
            let rc = g.r(j);
            acc += w * v * (pair_integral(g, r, z - zp, rc) + pair_integral(g, r, z + zp, rc));
        }
    }
    acc
}

/// Weighted sup norm `max (1 + r^2 + z^2)^(s/2) |f|` over the nodes.
pub fn weighted_norm(grid: &AxisymGrid, values: &[f64], s: f64) -> f64 {
    values
        .iter()
        .enumerate()
        .map(|(idx, v)| {
            let (i, k) = grid.node(idx);
            let (r, z) = (grid.r(i), grid.z(k));
            (1.0 + r * r + z * z).powf(0.5 * s) * v.abs()
        })
        .fold(0.0, f64::max)
}

/// Writes the text grid dump: a `# nr nz dr dz` header line followed by one
/// `r z rho U` row per node, `z` varying slowest.
pub fn write_grid_dump(path: &Path, rho: &DensityField, pot: &PotentialField) -> Result<()> {
    fs::write(path, format_grid_dump(rho, pot)?)?;
    Ok(())
}

pub fn format_grid_dump(rho: &DensityField, pot: &PotentialField) -> Result<String> {
    if rho.grid != pot.grid {
        return Err(invalid("density and potential live on different grids"));
    }
    let g = &rho.grid;
    let mut out = String::with_capacity(g.len() * 100);
    writeln!(out, "# {} {} {:.16e} {:.16e}", g.nr, g.nz, g.dr, g.dz).unwrap();
    for k in 0..=g.nz {
        for i in 0..=g.nr {
            let idx = g.index(i, k);
            writeln!(
                out,
                "{:.16e} {:.16e} {:.16e} {:.16e}",
                g.r(i),
                g.z(k),
                rho.values[idx],
                pot.values[idx]
            )
            .unwrap();
        }
    }
    Ok(out)
}

/// Reads a grid dump written by [`write_grid_dump`].
pub fn read_grid_dump(path: &Path) -> Result<(DensityField, PotentialField)> {
    let text = fs::read_to_string(path)?;
    let bad = |msg: String| Error::Format {
        path: path.to_path_buf(),
        msg,
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let fields: Vec<&str> = header
        .strip_prefix('#')
        .ok_or_else(|| bad("missing `#` header".into()))?
        .split_whitespace()
        .collect();
    if fields.len() != 4 {
        return Err(bad("header must be `# nr nz dr dz`".into()));
    }
    let nr: usize = fields[0].parse().map_err(|e| bad(format!("nr: {e}")))?;
    let nz: usize = fields[1].parse().map_err(|e| bad(format!("nz: {e}")))?;
    let dr: f64 = fields[2].parse().map_err(|e| bad(format!("dr: {e}")))?;
    let dz: f64 = fields[3].parse().map_err(|e| bad(format!("dz: {e}")))?;
    let grid = AxisymGrid { nr, nz, dr, dz };
    let mut rho = Vec::with_capacity(grid.len());
    let mut pot = Vec::with_capacity(grid.len());
    for (n, line) in lines.enumerate() {
        let cols: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(format!("row {}: {e}", n + 1)))?;
        if cols.len() != 4 {
            return Err(bad(format!("row {}: expected 4 columns", n + 1)));
        }
        rho.push(cols[2]);
        pot.push(cols[3]);
    }
    if rho.len() != grid.len() {
        return Err(bad(format!(
            "expected {} rows, found {}",
            grid.len(),
            rho.len()
        )));
    }
    Ok((
        DensityField::new(grid, rho)?,
        PotentialField { grid, values: pot },
    ))
}
