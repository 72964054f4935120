//! Natural continuation of rotating stars in the rotation intensity `kappa`,
//! starting from the non-rotating polytrope, with classification of how the
//! family ends.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;

use log::{info, warn};

use crate::error::{invalid, Error, Result};
use crate::gravity::KernelTable;
use crate::radial::{LaneEmdenSolver, PolytropeParams};
use crate::rotation::RotationProfile;
use crate::scf::{scf_solve, seed_density, ScfOptions, StarState};

/// Exact header of the family CSV.
pub const FAMILY_HEADER: &str =
    "kappa,alpha,max_rho,support_r,support_z,norm_s,f1_sup,f2_mass,scf_iters";

/// Scalar summary of one converged state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyRecord {
    pub kappa: f64,
    pub alpha: f64,
    pub max_rho: f64,
    pub support_r: f64,
    pub support_z: f64,
    pub norm_s: f64,
    pub f1_sup: f64,
    pub f2_mass: f64,
    pub scf_iters: usize,
}

impl From<&StarState> for FamilyRecord {
    fn from(s: &StarState) -> Self {
        Self {
            kappa: s.kappa,
            alpha: s.alpha,
            max_rho: s.diagnostics.max_rho,
            support_r: s.diagnostics.support_r,
            support_z: s.diagnostics.support_z,
            norm_s: s.diagnostics.norm_s,
            f1_sup: s.residuals.f1_sup,
            f2_mass: s.residuals.f2_mass,
            scf_iters: s.iterations,
        }
    }
}

impl FamilyRecord {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            self.kappa,
            self.alpha,
            self.max_rho,
            self.support_r,
            self.support_z,
            self.norm_s,
            self.f1_sup,
            self.f2_mass,
            self.scf_iters
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationKind {
    /// The support reached the configured fraction of the grid radius.
    SupportBlowup,
    /// The peak density exceeded the configured multiple of the seed's.
    DensityBlowup,
    /// `kappa^2 j_inf + alpha` came within the gap of zero, or the mass could
    /// no longer be reached inside the validity region.
    BoundaryProximity,
    MaxKappaReached,
    /// The step fell below the minimum without a classified event.
    ConvergenceFailure,
}

impl fmt::Display for TerminationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::SupportBlowup => "SupportBlowup",
            Self::DensityBlowup => "DensityBlowup",
            Self::BoundaryProximity => "BoundaryProximity",
            Self::MaxKappaReached => "MaxKappaReached",
            Self::ConvergenceFailure => "ConvergenceFailure",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Termination {
    pub kind: TerminationKind,
    pub detail: String,
}

/// Grid-limited surrogates for an unbounded support or density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub support_frac: f64,
    pub rho_factor: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            support_frac: 0.95,
            rho_factor: 50.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationParams {
    pub kappa_max: f64,
    pub step0: f64,
    pub step_min: f64,
    pub limits: Limits,
}

impl ContinuationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.step0 >= self.step_min && self.step_min > 0.0) {
            return Err(invalid(format!(
                "need step0 >= step_min > 0, got {} and {}",
                self.step0, self.step_min
            )));
        }
        if !(self.kappa_max >= 0.0) {
            return Err(invalid("kappa_max must be >= 0"));
        }
        let l = &self.limits;
        if !(l.support_frac > 0.0 && l.support_frac < 1.0) {
            return Err(invalid(format!(
                "support_frac must lie in (0, 1), got {}",
                l.support_frac
            )));
        }
        if !(l.rho_factor > 1.0) {
            return Err(invalid(format!(
                "rho_factor must exceed 1, got {}",
                l.rho_factor
            )));
        }
        Ok(())
    }
}

/// Records, converged states and termination of a continuation run.
#[derive(Debug, Clone)]
pub struct FamilyRun {
    pub records: Vec<FamilyRecord>,
    pub states: Vec<StarState>,
    pub termination: Termination,
}

/// Advances `kappa` from the seed in steps of `step0`, warm-starting every
/// solve from the previous density and halving the step after a failed solve.
///
/// After each converged state the checks run in the order support, density,
/// validity gap; the first that fires ends the run. The run also ends when the
/// next step would pass `kappa_max` or the step drops below `step_min`; in the
/// latter case a failure caused by the support leaving the grid or by the
/// unreachable mass constraint is reported as support blow-up or boundary
/// proximity respectively, anything else as a convergence failure.
pub fn continue_family(
    table: &KernelTable,
    seed: &StarState,
    profile: &RotationProfile,
    params: &ContinuationParams,
    opts: &ScfOptions,
) -> Result<FamilyRun> {
    params.validate()?;
    opts.validate()?;
    if seed.kappa != 0.0 {
        return Err(invalid("the seed must be the non-rotating state"));
    }
    let grid = *table.grid();
    let seed_peak = seed.diagnostics.max_rho;
    let j_inf = profile.j_infinity();

    let mut records = vec![FamilyRecord::from(seed)];
    let mut states = vec![seed.clone()];
    let mut step = params.step0;

    let termination = loop {
        let current = states.last().unwrap();
        let kappa = current.kappa + step;
        if kappa > params.kappa_max * (1.0 + 1e-12) {
            break Termination {
                kind: TerminationKind::MaxKappaReached,
                detail: format!(
                    "next kappa {kappa} would exceed kappa_max {}",
                    params.kappa_max
                ),
            };
        }
        match scf_solve(
            table,
            &current.rho,
            kappa,
            seed.gamma,
            seed.mass_target,
            profile,
            opts,
        ) {
            Ok(state) => {
                info!(
                    "kappa {kappa:.6}: alpha {:.6}, support ({:.4}, {:.4}), max rho {:.6}, {} sweeps",
                    state.alpha,
                    state.diagnostics.support_r,
                    state.diagnostics.support_z,
                    state.diagnostics.max_rho,
                    state.iterations
                );
                let d = state.diagnostics;
                let gap = kappa * kappa * j_inf + state.alpha;
                let event = if d.support_r > params.limits.support_frac * grid.rmax() {
                    Some((
                        TerminationKind::SupportBlowup,
                        format!(
                            "support radius {} exceeds {} of rmax {}",
                            d.support_r,
                            params.limits.support_frac,
                            grid.rmax()
                        ),
                    ))
                } else if d.max_rho > params.limits.rho_factor * seed_peak {
                    Some((
                        TerminationKind::DensityBlowup,
                        format!(
                            "max density {} exceeds {} times the seed's {}",
                            d.max_rho, params.limits.rho_factor, seed_peak
                        ),
                    ))
                } else if gap > -opts.eps_boundary {
                    Some((
                        TerminationKind::BoundaryProximity,
                        format!(
                            "kappa^2 j_inf + alpha = {gap} within the gap {}",
                            opts.eps_boundary
                        ),
                    ))
                } else {
                    None
                };
                records.push(FamilyRecord::from(&state));
                states.push(state);
                if let Some((kind, detail)) = event {
                    break Termination { kind, detail };
                }
                step = (2.0 * step).min(params.step0);
            }
            Err(err) => {
                step *= 0.5;
                warn!("solve at kappa {kappa} failed ({err}); step halved to {step}");
                if step < params.step_min {
                    let kind = match err {
                        Error::SupportOverflow { .. } => TerminationKind::SupportBlowup,
                        Error::BoundaryHit { .. } => TerminationKind::BoundaryProximity,
                        Error::NonConvergence { .. } => TerminationKind::ConvergenceFailure,
                        other => return Err(other),
                    };
                    break Termination {
                        kind,
                        detail: format!("at kappa {kappa}: {err}; step below step_min"),
                    };
                }
            }
        }
    };
    Ok(FamilyRun {
        records,
        states,
        termination,
    })
}

/// Centered finite-difference slope `dM/da` of the radial mass function at `a0`.
pub fn mass_slope_check(gamma: f64, a0: f64) -> Result<f64> {
    mass_slope_with(gamma, a0, &LaneEmdenSolver::default())
}

pub fn mass_slope_with(gamma: f64, a0: f64, solver: &LaneEmdenSolver) -> Result<f64> {
    if !(gamma > 1.2 && gamma < 2.0 + 1e-12) {
        return Err(invalid(format!(
            "mass slope check needs 6/5 < gamma <= 2, got {gamma}"
        )));
    }
    let h = 1e-2 * a0;
    let hi = solver.solve(&PolytropeParams::new(gamma, a0 + h)?)?;
    let lo = solver.solve(&PolytropeParams::new(gamma, a0 - h)?)?;
    Ok((hi.mass - lo.mass) / (2.0 * h))
}

/// Whether `|dM/da| < 1e-6 M(a0) / a0`, in which case the non-rotating star is
/// not the start of a local curve of mass-constrained solutions.
pub fn mass_slope_is_degenerate(gamma: f64, a0: f64) -> Result<bool> {
    let solver = LaneEmdenSolver::default();
    let slope = mass_slope_with(gamma, a0, &solver)?;
    let m0 = solver.solve(&PolytropeParams::new(gamma, a0)?)?.mass;
    Ok(slope.abs() < 1e-6 * m0 / a0)
}

/// Non-rotating seed: radial solution with central value `a0`, interpolated to
/// the grid and relaxed by the field iteration at `kappa = 0`.
///
/// Refuses to start when the mass slope at `a0` is degenerate.
pub fn static_seed(
    table: &KernelTable,
    gamma: f64,
    a0: f64,
    profile: &RotationProfile,
    opts: &ScfOptions,
) -> Result<StarState> {
    if mass_slope_is_degenerate(gamma, a0)? {
        warn!("dM/da vanishes at gamma = {gamma}: no local curve of rotating stars is guaranteed");
        return Err(invalid(format!(
            "mass slope dM/da is zero at gamma = {gamma}, a = {a0}; refusing to continue"
        )));
    }
    let radial = LaneEmdenSolver::default().solve(&PolytropeParams::new(gamma, a0)?)?;
    let init = seed_density(*table.grid(), &radial);
    scf_solve(table, &init, 0.0, gamma, radial.mass, profile, opts)
}

/// Family CSV text: header, one row per record, `# termination=<kind>` footer.
pub fn format_family_csv(records: &[FamilyRecord], termination: Option<&Termination>) -> String {
    let mut out = String::new();
    writeln!(out, "{FAMILY_HEADER}").unwrap();
    for r in records {
        writeln!(out, "{}", r.to_csv_row()).unwrap();
    }
    if let Some(t) = termination {
        writeln!(out, "# termination={}", t.kind).unwrap();
    }
    out
}

pub fn write_family_csv(
    path: &Path,
    records: &[FamilyRecord],
    termination: Option<&Termination>,
) -> Result<()> {
    fs::write(path, format_family_csv(records, termination))?;
    Ok(())
}
