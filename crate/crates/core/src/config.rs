//! Run configuration: a flat text file of `section.key = value` lines.
//!
//! `#` starts a comment, blank lines are ignored, unknown or repeated keys are
//! rejected. Typed accessors apply the documented defaults.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::continuation::{ContinuationParams, Limits};
use crate::error::{Error, Result};
use crate::gravity::AxisymGrid;
use crate::radial::{central_value_for_mass, LaneEmdenSolver};
use crate::rotation::RotationProfile;
use crate::scf::ScfOptions;

/// Every accepted key.
pub const KEYS: &[&str] = &[
    "gamma",
    "mass",
    "central_value",
    "kappa",
    "radial.step",
    "radial.tol",
    "radial.xi_max",
    "rotation.kind",
    "rotation.omega_bar",
    "rotation.p",
    "rotation.table_path",
    "scf.relax",
    "scf.tol",
    "scf.max_iter",
    "scf.mass_tol",
    "scf.eps_boundary",
    "grid.nr",
    "grid.nz",
    "grid.rmax",
    "grid.zmax",
    "norm.s",
    "continuation.kappa_max",
    "continuation.step0",
    "continuation.step_min",
    "continuation.support_frac",
    "continuation.rho_factor",
    "continuation.snapshot_every",
    "maclaurin.e_min",
    "maclaurin.e_max",
    "maclaurin.n",
    "maclaurin.tol",
    "maclaurin.boundary_points",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
    /// Directory of the config file; relative paths in values resolve against it.
    base: Option<PathBuf>,
}

fn config_err(key: &str, msg: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        msg: msg.into(),
    }
}

impl FromStr for RunConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(config_err(
                    line,
                    format!("line {}: expected `key = value`", n + 1),
                ));
            };
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(config_err(key, format!("line {}: unknown key", n + 1)));
            }
            if value.is_empty() {
                return Err(config_err(key, format!("line {}: missing value", n + 1)));
            }
            if values.insert(key.to_string(), value.to_string()).is_some() {
                return Err(config_err(key, format!("line {}: repeated key", n + 1)));
            }
        }
        Ok(Self { values, base: None })
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| config_err("--config", format!("{}: {e}", path.display())))?;
        let mut cfg: Self = text.parse()?;
        cfg.base = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    /// Sets `key` programmatically, with the same key check as the parser.
    pub fn set(&mut self, key: &str, value: impl ToString) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(config_err(key, "unknown key"));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.values
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| config_err(key, format!("`{v}`: {e}")))
            })
            .transpose()
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)?
            .ok_or_else(|| config_err(key, "required key is missing"))
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn gamma(&self) -> Result<f64> {
        let g: f64 = self.require("gamma")?;
        if !(g > 1.0) || !g.is_finite() {
            return Err(config_err("gamma", format!("must exceed 1, got {g}")));
        }
        Ok(g)
    }

    pub fn radial_solver(&self) -> Result<LaneEmdenSolver> {
        let d = LaneEmdenSolver::default();
        let s = LaneEmdenSolver {
            step: self.get_or("radial.step", d.step)?,
            tol: self.get_or("radial.tol", d.tol)?,
            xi_max: self.get_or("radial.xi_max", d.xi_max)?,
        };
        for (key, v) in [
            ("radial.step", s.step),
            ("radial.tol", s.tol),
            ("radial.xi_max", s.xi_max),
        ] {
            if !(v > 0.0) {
                return Err(config_err(key, format!("must be positive, got {v}")));
            }
        }
        Ok(s)
    }

    /// Central value of the seed polytrope: `central_value` if given, else
    /// derived from `mass`, else 1.
    pub fn central_value(&self) -> Result<f64> {
        match (self.get::<f64>("central_value")?, self.get::<f64>("mass")?) {
            (Some(_), Some(_)) => Err(config_err(
                "mass",
                "give either mass or central_value, not both",
            )),
            (Some(a), None) if !(a > 0.0) => Err(config_err(
                "central_value",
                format!("must be positive, got {a}"),
            )),
            (Some(a), None) => Ok(a),
            (None, Some(m)) => central_value_for_mass(self.gamma()?, m, &self.radial_solver()?)
                .map_err(|e| config_err("mass", e.to_string())),
            (None, None) => Ok(1.0),
        }
    }

    pub fn rotation(&self) -> Result<RotationProfile> {
        let kind: String = self.get_or("rotation.kind", "power_decay".to_string())?;
        let omega_bar = self.get_or("rotation.omega_bar", 1.0)?;
        let wrap =
            |key: &str, r: Result<RotationProfile>| r.map_err(|e| config_err(key, e.to_string()));
        match kind.as_str() {
            "power_decay" => wrap(
                "rotation.p",
                RotationProfile::power_decay(omega_bar, self.get_or("rotation.p", 2.0)?),
            ),
            "gaussian" => wrap("rotation.omega_bar", RotationProfile::gaussian(omega_bar)),
            "table" => {
                let rel: PathBuf = self.require("rotation.table_path")?;
                let path = match &self.base {
                    Some(b) if rel.is_relative() => b.join(rel),
                    _ => rel,
                };
                wrap(
                    "rotation.table_path",
                    RotationProfile::from_table_file(&path),
                )
            }
            other => Err(config_err(
                "rotation.kind",
                format!("`{other}`: expected power_decay, gaussian or table"),
            )),
        }
    }

    /// SCF controls; `eps_boundary` defaults to `1e-4 |alpha0|`.
    pub fn scf_options(&self, alpha0: f64) -> Result<ScfOptions> {
        let d = ScfOptions::default();
        let opts = ScfOptions {
            relax: self.get_or("scf.relax", d.relax)?,
            tol: self.get_or("scf.tol", d.tol)?,
            max_iter: self.get_or("scf.max_iter", d.max_iter)?,
            mass_tol: self.get_or("scf.mass_tol", d.mass_tol)?,
            eps_boundary: self.get_or("scf.eps_boundary", 1e-4 * alpha0.abs())?,
            norm_exponent: self.get_or("norm.s", d.norm_exponent)?,
        };
        opts.validate()
            .map_err(|e| config_err("scf", e.to_string()))?;
        Ok(opts)
    }

    /// Grid; the extents default to twice the seed radius.
    pub fn grid(&self, seed_radius: f64) -> Result<AxisymGrid> {
        let nr = self.get_or("grid.nr", 64usize)?;
        let nz = self.get_or("grid.nz", nr)?;
        let rmax = self.get_or("grid.rmax", 2.0 * seed_radius)?;
        let zmax = self.get_or("grid.zmax", rmax)?;
        AxisymGrid::new(nr, nz, rmax, zmax).map_err(|e| config_err("grid", e.to_string()))
    }

    pub fn continuation(&self) -> Result<ContinuationParams> {
        let d = Limits::default();
        let step0: f64 = self.require("continuation.step0")?;
        let p = ContinuationParams {
            kappa_max: self.require("continuation.kappa_max")?,
            step0,
            step_min: self.get_or("continuation.step_min", 1e-3 * step0)?,
            limits: Limits {
                support_frac: self.get_or("continuation.support_frac", d.support_frac)?,
                rho_factor: self.get_or("continuation.rho_factor", d.rho_factor)?,
            },
        };
        p.validate()
            .map_err(|e| config_err("continuation", e.to_string()))?;
        Ok(p)
    }

    /// Every how many continuation steps a grid snapshot is written; 0 disables.
    pub fn snapshot_every(&self) -> Result<usize> {
        self.get_or("continuation.snapshot_every", 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_defaults() {
        let cfg: RunConfig = "# header\ngamma = 1.5  # inline\n\nscf.relax=0.3\n"
            .parse()
            .unwrap();
        assert_eq!(cfg.gamma().unwrap(), 1.5);
        let o = cfg.scf_options(-2.0).unwrap();
        assert_eq!(o.relax, 0.3);
        assert_eq!(o.eps_boundary, 2e-4);
        assert_eq!(cfg.central_value().unwrap(), 1.0);
    }

    #[test]
    fn rejects_unknown_malformed_and_repeated() {
        let key_of = |text: &str| match text.parse::<RunConfig>() {
            Err(Error::Config { key, .. }) => key,
            other => panic!("expected a config error, got {other:?}"),
        };
        assert_eq!(key_of("gama = 2"), "gama");
        assert_eq!(key_of("gamma 2"), "gamma 2");
        assert_eq!(key_of("gamma = 2\ngamma = 3"), "gamma");
        assert_eq!(key_of("scf.tol ="), "scf.tol");
    }

    #[test]
    fn bad_values_name_the_key() {
        let cfg: RunConfig = "gamma = two".parse().unwrap();
        assert!(matches!(cfg.gamma(), Err(Error::Config { key, .. }) if key == "gamma"));
        let cfg: RunConfig = "gamma = 2\nrotation.kind = spiral".parse().unwrap();
        assert!(matches!(cfg.rotation(), Err(Error::Config { key, .. }) if key == "rotation.kind"));
        let cfg: RunConfig = "gamma = 2\nmass = 1\ncentral_value = 1".parse().unwrap();
        assert!(cfg.central_value().is_err());
    }

    #[test]
    fn mass_sets_central_value() {
        let cfg: RunConfig = "gamma = 2\nmass = 1.7724538509055159".parse().unwrap();
        assert!((cfg.central_value().unwrap() - 2.0).abs() < 1e-9);
    }
}
