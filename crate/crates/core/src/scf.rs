//! Mass-constrained self-consistent field iteration for
//! `rho = [U(rho) + kappa^2 j + alpha]_+^(1/(gamma-1))`, `int rho = M`.
//!
//! Each sweep computes the potential of the current density, solves for the
//! `alpha` that gives the new density the target mass, and under-relaxes.

use log::warn;

use crate::error::{invalid, Error, Result};
use crate::gravity::{weighted_norm, AxisymGrid, DensityField, KernelTable, PotentialField};
use crate::radial::RadialProfile;
use crate::rotation::RotationProfile;

/// Controls for [`scf_solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScfOptions {
    /// Under-relaxation weight in (0, 1].
    pub relax: f64,
    /// Convergence when `max |rho_new - rho| <= tol * max rho`.
    pub tol: f64,
    pub max_iter: usize,
    /// Mass tolerance of the alpha solve, relative to the target mass.
    pub mass_tol: f64,
    /// Required gap in `kappa^2 j_inf + alpha < -eps_boundary`.
    pub eps_boundary: f64,
    /// Exponent of the weighted norm reported in the diagnostics.
    pub norm_exponent: f64,
}

impl Default for ScfOptions {
    fn default() -> Self {
        Self {
            relax: 0.5,
            tol: 1e-8,
            max_iter: 500,
            mass_tol: 1e-12,
            eps_boundary: 1e-4,
            norm_exponent: 4.0,
        }
    }
}

impl ScfOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.relax > 0.0 && self.relax <= 1.0) {
            return Err(invalid(format!(
                "relax must lie in (0, 1], got {}",
                self.relax
            )));
        }
        if !(self.tol > 0.0) || !(self.mass_tol > 0.0) || !(self.eps_boundary > 0.0) {
            return Err(invalid("tol, mass_tol and eps_boundary must be positive"));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter must be positive"));
        }
        if !(self.norm_exponent >= 0.0) {
            return Err(invalid("norm exponent must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Diagnostics {
    /// Largest node radius with positive density.
    pub support_r: f64,
    /// Largest node height with positive density.
    pub support_z: f64,
    pub max_rho: f64,
    /// Weighted sup norm of the density.
    pub norm_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Residuals {
    /// Sup over nodes of `rho - [U + kappa^2 j + alpha]_+^q`.
    pub f1_sup: f64,
    /// `|int rho - M|`.
    pub f2_mass: f64,
}

/// A converged rotating star.
#[derive(Debug, Clone, PartialEq)]
pub struct StarState {
    pub rho: DensityField,
    /// Potential of `rho`.
    pub potential: PotentialField,
    pub alpha: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub mass_target: f64,
    pub diagnostics: Diagnostics,
    pub residuals: Residuals,
    pub iterations: usize,
}

/// Solves `g(alpha) = M` for `alpha <= alpha_max`, where
/// `g(alpha) = sum_nodes volume * [effective + alpha]_+^(1/(gamma-1))`.
///
/// `g` is nondecreasing, so a safeguarded Newton iteration inside the bracket
/// `[-max effective, alpha_max]` always converges. A zero target mass returns
/// `-max effective`, the largest alpha for which the bracket vanishes everywhere.
pub fn solve_alpha(
    grid: &AxisymGrid,
    effective: &[f64],
    gamma: f64,
    mass: f64,
    alpha_max: f64,
    mass_tol: f64,
) -> Result<f64> {
    if effective.len() != grid.len() {
        return Err(invalid("effective field does not match the grid"));
    }
    if !(gamma > 1.0) || !(mass >= 0.0) {
        return Err(invalid(format!(
            "need gamma > 1 and mass >= 0, got {gamma}, {mass}"
        )));
    }
    let top = effective.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(invalid("effective field must be finite"));
    }
    if mass == 0.0 {
        return Ok(-top);
    }
    let q = 1.0 / (gamma - 1.0);
    // Only nodes that can be positive somewhere in the bracket matter.
    let active: Vec<(f64, f64)> = effective
        .iter()
        .enumerate()
        .filter(|(_, e)| **e + alpha_max > 0.0)
        .map(|(idx, e)| {
            let (i, k) = grid.node(idx);
            (grid.volume(i, k), *e)
        })
        .collect();
    let g = |alpha: f64| -> (f64, f64) {
        let mut val = 0.0;
        let mut der = 0.0;
        for &(w, e) in &active {
            let x = e + alpha;
            if x > 0.0 {
                let p = pow(x, q);
                val += w * p;
                der += w * q * p / x;
            }
        }
        (val, der)
    };
    let (g_max, _) = g(alpha_max);
    if g_max < mass - mass_tol {
        return Err(Error::BoundaryHit {
            target: mass,
            attainable: g_max,
            alpha_max,
        });
    }
    if (g_max - mass).abs() <= mass_tol {
        return Ok(alpha_max);
    }
    let mut lo = -top;
    let mut hi = alpha_max;
    let mut alpha = 0.5 * (lo + hi);
    for _ in 0..400 {
        let (val, der) = g(alpha);
        let miss = val - mass;
        if miss.abs() <= mass_tol {
            return Ok(alpha);
        }
        if miss < 0.0 {
            lo = alpha;
        } else {
            hi = alpha;
        }
        let newton = if der > 0.0 {
            alpha - miss / der
        } else {
            f64::NAN
        };
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if next == alpha || hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
            return Ok(next);
        }
        alpha = next;
    }
    Ok(alpha)
}

#[inline]
fn pow(x: f64, q: f64) -> f64 {
    if q == 1.0 {
        x
    } else if q == 2.0 {
        x * x
    } else if q == 3.0 {
        x * x * x
    } else {
        x.powf(q)
    }
}

fn centrifugal(grid: &AxisymGrid, profile: &RotationProfile, kappa: f64) -> Vec<f64> {
    let k2 = kappa * kappa;
    let by_column: Vec<f64> = (0..=grid.nr).map(|i| k2 * profile.j(grid.r(i))).collect();
    (0..grid.len())
        .map(|idx| by_column[grid.node(idx).0])
        .collect()
}

fn bracket_image(effective: &[f64], alpha: f64, q: f64) -> Vec<f64> {
    effective
        .iter()
        .map(|e| {
            let x = e + alpha;
            if x > 0.0 {
                pow(x, q)
            } else {
                0.0
            }
        })
        .collect()
}

fn touches_outer(grid: &AxisymGrid, values: &[f64]) -> bool {
    values.iter().enumerate().any(|(idx, v)| {
        *v > 0.0 && {
            let (i, k) = grid.node(idx);
            grid.is_outer(i, k)
        }
    })
}

fn check_gamma(gamma: f64) {
    if !(gamma > 1.2 && gamma < 2.0) {
        warn!("gamma = {gamma} lies outside (6/5, 2); the rotating-star theory does not cover it");
    } else if (gamma - 4.0 / 3.0).abs() < 1e-12 {
        warn!("gamma = 4/3: the non-rotating mass is independent of the central value, the family is not locally a curve");
    }
}

/// Self-consistent field solve at fixed rotation intensity `kappa`.
///
/// `init` is rescaled to the target mass before the first sweep. On
/// convergence the returned density is the image of the last iterate under the
/// fixed-point map, with alpha re-solved so the mass constraint holds exactly.
pub fn scf_solve(
    table: &KernelTable,
    init: &DensityField,
    kappa: f64,
    gamma: f64,
    mass: f64,
    profile: &RotationProfile,
    opts: &ScfOptions,
) -> Result<StarState> {
    opts.validate()?;
    if init.grid != *table.grid() {
        return Err(invalid(
            "initial density grid does not match the kernel table",
        ));
    }
    if !(gamma > 1.0) {
        return Err(invalid(format!("gamma must exceed 1, got {gamma}")));
    }
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(invalid(format!("target mass must be positive, got {mass}")));
    }
    check_gamma(gamma);
    let init_mass = init.mass();
    if !(init_mass > 0.0) {
        return Err(Error::InvalidInit("initial density has no mass".into()));
    }
    let grid = *table.grid();
    let q = 1.0 / (gamma - 1.0);
    let cent = centrifugal(&grid, profile, kappa);
    let alpha_max = -kappa * kappa * profile.j_infinity() - opts.eps_boundary;
    let mass_tol = opts.mass_tol * mass;

    let mut rho: Vec<f64> = init.values.iter().map(|v| v * mass / init_mass).collect();
    let mut converged = None;
    let mut change = f64::INFINITY;
    for iter in 1..=opts.max_iter {
        let u = table.potential_values(&grid, &rho);
        let eff: Vec<f64> = u.iter().zip(&cent).map(|(a, b)| a + b).collect();
        let alpha = solve_alpha(&grid, &eff, gamma, mass, alpha_max, mass_tol)?;
        let image = bracket_image(&eff, alpha, q);
        if touches_outer(&grid, &image) {
            return Err(Error::SupportOverflow { iteration: iter });
        }
        let top = rho.iter().cloned().fold(0.0, f64::max);
        change = 0.0;
        for (r, t) in rho.iter_mut().zip(&image) {
            let next = (1.0 - opts.relax) * *r + opts.relax * t;
            change = f64::max(change, (next - *r).abs());
            *r = next;
        }
        change /= top;
        if change <= opts.tol {
            converged = Some(iter);
            break;
        }
    }
    let iterations = converged.ok_or(Error::NonConvergence {
        iterations: opts.max_iter,
        change,
    })?;

    let u = table.potential_values(&grid, &rho);
    let eff: Vec<f64> = u.iter().zip(&cent).map(|(a, b)| a + b).collect();
    let alpha = solve_alpha(&grid, &eff, gamma, mass, alpha_max, mass_tol)?;
    let image = bracket_image(&eff, alpha, q);
    if touches_outer(&grid, &image) {
        return Err(Error::SupportOverflow {
            iteration: iterations + 1,
        });
    }
    let rho = DensityField {
        grid,
        values: image,
    };
    let potential = table.potential(&rho);
    let mut state = StarState {
        rho,
        potential,
        alpha,
        kappa,
        gamma,
        mass_target: mass,
        diagnostics: Diagnostics::default(),
        residuals: Residuals::default(),
        iterations,
    };
    state.diagnostics = diagnostics(&state, opts.norm_exponent);
    let (f1_sup, f2_mass) = residual_f(&state, profile);
    state.residuals = Residuals { f1_sup, f2_mass };
    Ok(state)
}

/// `(sup |F1|, |F2|)` of a state whose potential is that of its density.
pub fn residual_f(state: &StarState, profile: &RotationProfile) -> (f64, f64) {
    let grid = state.rho.grid;
    let q = 1.0 / (state.gamma - 1.0);
    let cent = centrifugal(&grid, profile, state.kappa);
    let f1 = state
        .rho
        .values
        .iter()
        .zip(state.potential.values.iter().zip(&cent))
        .map(|(rho, (u, c))| {
            let x = u + c + state.alpha;
            let image = if x > 0.0 { pow(x, q) } else { 0.0 };
            (rho - image).abs()
        })
        .fold(0.0, f64::max);
    let f2 = (state.rho.mass() - state.mass_target).abs();
    (f1, f2)
}

/// Support extents, peak density and weighted norm of a state's density.
pub fn diagnostics(state: &StarState, norm_exponent: f64) -> Diagnostics {
    density_diagnostics(&state.rho, norm_exponent)
}

pub fn density_diagnostics(rho: &DensityField, norm_exponent: f64) -> Diagnostics {
    let grid = rho.grid;
    let mut d = Diagnostics::default();
    for (idx, v) in rho.values.iter().enumerate() {
        if *v > 0.0 {
            let (i, k) = grid.node(idx);
            d.support_r = d.support_r.max(grid.r(i));
            d.support_z = d.support_z.max(grid.z(k));
            d.max_rho = d.max_rho.max(*v);
        }
    }
    d.norm_s = weighted_norm(&grid, &rho.values, norm_exponent);
    d
}

/// Samples the spherical density `u_+^q` of a radial solution onto the grid.
pub fn seed_density(grid: AxisymGrid, profile: &RadialProfile) -> DensityField {
    DensityField::from_fn(grid, |r, z| profile.density_at((r * r + z * z).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::{LaneEmdenSolver, PolytropeParams};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn grid() -> AxisymGrid {
        AxisymGrid::new(16, 16, 2.0, 2.0).unwrap()
    }

    #[test]
    fn alpha_for_constant_plateau() {
        let g = grid();
        let c = 0.7;
        let mut eff = vec![-1e6; g.len()];
        let mut volume = 0.0;
        for k in 0..4 {
            for i in 0..5 {
                eff[g.index(i, k)] = c;
                volume += g.volume(i, k);
            }
        }
        let gamma = 1.5;
        let m = 2.3;
        let alpha = solve_alpha(&g, &eff, gamma, m, 10.0, 1e-13).unwrap();
        assert_abs_diff_eq!(alpha, (m / volume).powf(gamma - 1.0) - c, epsilon = 1e-10);
    }

    #[test]
    fn zero_mass_convention() {
        let g = grid();
        let eff: Vec<f64> = (0..g.len()).map(|i| (i as f64).sin()).collect();
        let top = eff.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(solve_alpha(&g, &eff, 1.5, 0.0, 0.0, 1e-12).unwrap(), -top);
    }

    #[test]
    fn unreachable_mass_hits_boundary() {
        let g = grid();
        let eff = vec![1.0; g.len()];
        let err = solve_alpha(&g, &eff, 2.0, 1.0, -1.5, 1e-12).unwrap_err();
        assert!(matches!(err, Error::BoundaryHit { .. }));
    }

    #[test]
    fn mass_is_monotone_in_alpha() {
        let g = grid();
        let eff: Vec<f64> = (0..g.len())
            .map(|idx| {
                let (i, k) = g.node(idx);
                1.0 - g.r(i).powi(2) - 0.5 * g.z(k).powi(2)
            })
            .collect();
        let mass = |alpha: f64| {
            let v = bracket_image(&eff, alpha, 2.0);
            crate::gravity::integrate_nodes(&g, &v)
        };
        let mut last = 0.0;
        for s in 0..40 {
            let a = -1.0 + 0.05 * s as f64;
            let m = mass(a);
            assert!(m >= last);
            last = m;
        }
        assert!(mass(0.1) > mass(0.0));
    }

    #[test]
    fn zero_init_is_rejected() {
        let g = grid();
        let table = KernelTable::new(g);
        let profile = RotationProfile::power_decay(1.0, 2.0).unwrap();
        let err = scf_solve(
            &table,
            &DensityField::zeros(g),
            0.0,
            2.0,
            1.0,
            &profile,
            &ScfOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidInit(_)));
    }

    #[test]
    fn options_validation() {
        let mut o = ScfOptions {
            relax: 1.5,
            ..ScfOptions::default()
        };
        assert!(o.validate().is_err());
        o.relax = 1.0;
        o.max_iter = 0;
        assert!(o.validate().is_err());
    }

    #[test]
    fn empty_diagnostics() {
        let g = grid();
        let d = density_diagnostics(&DensityField::zeros(g), 4.0);
        assert_eq!(d, Diagnostics::default());
    }

    #[test]
    fn static_gamma2_star_coarse() {
        let g = AxisymGrid::new(32, 32, 1.2, 1.2).unwrap();
        let table = KernelTable::new(g);
        let radial = LaneEmdenSolver::default()
            .solve(&PolytropeParams::new(2.0, 1.0).unwrap())
            .unwrap();
        let profile = RotationProfile::power_decay(1.0, 2.0).unwrap();
        let m = PI.sqrt() / 2.0;
        let state = scf_solve(
            &table,
            &seed_density(g, &radial),
            0.0,
            2.0,
            m,
            &profile,
            &ScfOptions::default(),
        )
        .unwrap();
        assert!((state.alpha + 1.0).abs() < 5e-2, "alpha {}", state.alpha);
        assert!(state.residuals.f2_mass <= 1e-8 * m);
    }
}
