//! Command-line front end.
//!
//! | exit | meaning |
//! |------|---------|
//! | 0 | success, including any classified continuation stop other than a convergence failure |
//! | 2 | configuration, parameter or I/O error |
//! | 3 | the polytrope has no finite radius |
//! | 4 | the field iteration or the continuation failed to converge |
//! | 5 | the mass cannot be reached inside the validity region |

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use log::info;

use crate::config::RunConfig;
use crate::continuation::{
    continue_family, static_seed, write_family_csv, ContinuationParams, FamilyRecord,
    TerminationKind,
};
use crate::error::{Error, Result};
use crate::gravity::{write_grid_dump, KernelTable};
use crate::maclaurin::{boundary_residual, maclaurin_family};
use crate::radial::{mass_of, PolytropeParams, RadialProfile};
use crate::rotation::RotationProfile;
use crate::scf::{scf_solve, seed_density, ScfOptions, StarState};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NO_RADIUS: i32 = 3;
pub const EXIT_NON_CONVERGENCE: i32 = 4;
pub const EXIT_BOUNDARY: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "rotstar",
    version,
    about = "Equilibria of rotating self-gravitating fluids"
)]
pub struct Cli {
    /// Configuration file of `section.key = value` lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Radial polytrope: prints R and M, writes profile.csv.
    LaneEmden,
    /// Maclaurin sequence: writes maclaurin.csv.
    Maclaurin,
    /// One rotating star at `kappa`: writes grid.dat and family.csv.
    Solve,
    /// Family in kappa from the non-rotating star: writes family.csv and snapshots.
    Continue,
}

/// Exit code of an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NoFiniteRadius { .. } => EXIT_NO_RADIUS,
        Error::NonConvergence { .. }
        | Error::SupportOverflow { .. }
        | Error::QuadratureFailure { .. } => EXIT_NON_CONVERGENCE,
        Error::BoundaryHit { .. } => EXIT_BOUNDARY,
        Error::InvalidParams(_)
        | Error::InvalidInit(_)
        | Error::Config { .. }
        | Error::Format { .. }
        | Error::Io(_) => EXIT_CONFIG,
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: &Cli) -> Result<i32> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    fs::create_dir_all(&cli.out)?;
    match cli.command {
        Command::LaneEmden => cmd_lane_emden(&cfg, &cli.out),
        Command::Maclaurin => cmd_maclaurin(&cfg, &cli.out),
        Command::Solve => cmd_solve(&cfg, &cli.out),
        Command::Continue => cmd_continue(&cfg, &cli.out),
    }
}

fn seed_radial(cfg: &RunConfig) -> Result<RadialProfile> {
    let params =
        PolytropeParams::new(cfg.gamma()?, cfg.central_value()?).map_err(|e| Error::Config {
            key: "gamma".into(),
            msg: e.to_string(),
        })?;
    cfg.radial_solver()?.solve(&params)
}

pub fn cmd_lane_emden(cfg: &RunConfig, out: &Path) -> Result<i32> {
    let profile = seed_radial(cfg)?;
    let mass = mass_of(&profile)?;
    println!("R = {:.17e}", profile.radius);
    println!("M = {:.17e}", mass);
    let mut text = String::from("xi,u,rho\n");
    for (xi, u) in profile.xi.iter().zip(&profile.u) {
        let rho = u.max(0.0).powf(profile.q());
        writeln!(text, "{xi:.16e},{u:.16e},{rho:.16e}").unwrap();
    }
    fs::write(out.join("profile.csv"), text)?;
    Ok(EXIT_OK)
}

pub fn cmd_maclaurin(cfg: &RunConfig, out: &Path) -> Result<i32> {
    let e_min = cfg.get_or("maclaurin.e_min", 1.0)?;
    let e_max = cfg.get_or("maclaurin.e_max", 10.0)?;
    let n = cfg.get_or("maclaurin.n", 91usize)?;
    let tol = cfg.get_or("maclaurin.tol", 1e-12)?;
    let npts = cfg.get_or("maclaurin.boundary_points", 32usize)?;
    let family = maclaurin_family(e_min, e_max, n, tol).map_err(|e| Error::Config {
        key: "maclaurin.e_min".into(),
        msg: e.to_string(),
    })?;
    let mut text = String::from("e,a,c,omega2,boundary_residual\n");
    for m in &family.members {
        let res = boundary_residual(m.e, npts, tol)?;
        writeln!(
            text,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            m.e, m.a, m.c, m.omega2, res
        )
        .unwrap();
    }
    fs::write(out.join("maclaurin.csv"), text)?;
    let best = family.members[family.argmax];
    println!("max omega2 = {:.10e} at e = {:.6}", best.omega2, best.e);
    Ok(EXIT_OK)
}

pub fn cmd_solve(cfg: &RunConfig, out: &Path) -> Result<i32> {
    let radial = seed_radial(cfg)?;
    let gamma = radial.gamma;
    let alpha0 = -radial.mass / radial.radius;
    let grid = cfg.grid(radial.radius)?;
    let opts = cfg.scf_options(alpha0)?;
    let profile = cfg.rotation()?;
    let kappa = cfg.get_or("kappa", 0.0)?;
    if !(kappa >= 0.0) {
        return Err(Error::Config {
            key: "kappa".into(),
            msg: format!("must be >= 0, got {kappa}"),
        });
    }
    let table = KernelTable::new(grid);
    let init = seed_density(grid, &radial);
    let state = scf_solve(&table, &init, kappa, gamma, radial.mass, &profile, &opts)?;
    write_grid_dump(&out.join("grid.dat"), &state.rho, &state.potential)?;
    write_family_csv(&out.join("family.csv"), &[FamilyRecord::from(&state)], None)?;
    println!(
        "alpha = {:.16e}  iterations = {}  support = ({:.6}, {:.6})",
        state.alpha, state.iterations, state.diagnostics.support_r, state.diagnostics.support_z
    );
    Ok(EXIT_OK)
}

/// Everything a continuation run needs, built from a configuration.
pub struct FamilySetup {
    pub table: KernelTable,
    pub profile: RotationProfile,
    pub params: ContinuationParams,
    /// Field-iteration controls with `eps_boundary` resolved against the seed.
    pub opts: ScfOptions,
    pub seed: StarState,
}

/// Builds the grid, kernel table and non-rotating seed described by `cfg`.
pub fn family_setup(cfg: &RunConfig) -> Result<FamilySetup> {
    let radial = seed_radial(cfg)?;
    let grid = cfg.grid(radial.radius)?;
    let profile = cfg.rotation()?;
    let params = cfg.continuation()?;
    let table = KernelTable::new(grid);
    let provisional = cfg.scf_options(-radial.mass / radial.radius)?;
    let seed = static_seed(
        &table,
        radial.gamma,
        radial.central_value,
        &profile,
        &provisional,
    )?;
    let opts = cfg.scf_options(seed.alpha)?;
    info!(
        "seed alpha {:.10}, eps_boundary {:e}",
        seed.alpha, opts.eps_boundary
    );
    Ok(FamilySetup {
        table,
        profile,
        params,
        opts,
        seed,
    })
}

pub fn cmd_continue(cfg: &RunConfig, out: &Path) -> Result<i32> {
    let every = cfg.snapshot_every()?;
    let s = family_setup(cfg)?;
    let run = continue_family(&s.table, &s.seed, &s.profile, &s.params, &s.opts)?;
    write_family_csv(
        &out.join("family.csv"),
        &run.records,
        Some(&run.termination),
    )?;
    if every > 0 {
        for (step, state) in run.states.iter().enumerate().skip(1) {
            if step % every == 0 {
                let path = out.join(format!("snapshot_{step:04}.dat"));
                write_grid_dump(&path, &state.rho, &state.potential)?;
            }
        }
    }
    println!(
        "{} records, termination {}: {}",
        run.records.len(),
        run.termination.kind,
        run.termination.detail
    );
    Ok(match run.termination.kind {
        TerminationKind::ConvergenceFailure => EXIT_NON_CONVERGENCE,
        _ => EXIT_OK,
    })
}
