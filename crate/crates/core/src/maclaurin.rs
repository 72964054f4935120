//! Potential coefficients of homogeneous ellipsoids and the Maclaurin
//! spheroid family.
//!
//! Inside the ellipsoid `x1^2/a^2 + x2^2/b^2 + x3^2/c^2 <= 1` of unit density the
//! Newtonian potential is `L0 - L1 x1^2 - L2 x2^2 - L3 x3^2`. Spheroids are
//! normalized to `a^2 c = 1`, so `a = e^(1/3)` and `c = e^(-2/3)` with `e = a / c`.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::quad::integrate_semi_infinite;

/// Coefficients of the interior potential of a homogeneous ellipsoid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipsoidCoeffs {
    pub l0: f64,
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
}

impl EllipsoidCoeffs {
    /// Interior potential at `x`.
    pub fn potential(&self, x: [f64; 3]) -> f64 {
        self.l0 - self.l1 * x[0] * x[0] - self.l2 * x[1] * x[1] - self.l3 * x[2] * x[2]
    }
}

pub fn ellipsoid_coeffs(a: f64, b: f64, c: f64, tol: f64) -> Result<EllipsoidCoeffs> {
    if !(a > 0.0 && b > 0.0 && c > 0.0) {
        return Err(invalid(format!(
            "semi-axes must be positive, got ({a}, {b}, {c})"
        )));
    }
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let (a2, b2, c2) = (a * a, b * b, c * c);
    let pre = PI * a * b * c;
    let base = move |s: f64| 1.0 / ((a2 + s) * (b2 + s) * (c2 + s)).sqrt();
    let t = tol / pre;
    Ok(EllipsoidCoeffs {
        l0: pre * integrate_semi_infinite(base, t)?,
        l1: pre * integrate_semi_infinite(|s| base(s) / (a2 + s), t)?,
        l2: pre * integrate_semi_infinite(|s| base(s) / (b2 + s), t)?,
        l3: pre * integrate_semi_infinite(|s| base(s) / (c2 + s), t)?,
    })
}

/// A Maclaurin spheroid with semi-axes `a = b` and `c`, `a^2 c = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spheroid {
    pub e: f64,
    pub a: f64,
    pub c: f64,
    /// Squared angular velocity of the rigid rotation.
    pub omega2: f64,
}

impl Spheroid {
    pub fn new(e: f64, tol: f64) -> Result<Self> {
        let omega2 = maclaurin_omega2(e, tol)?;
        let (a, c) = semi_axes(e);
        Ok(Self { e, a, c, omega2 })
    }
}

/// Semi-axes `(a, c)` of the unit-normalized spheroid with ellipticity `e`.
pub fn semi_axes(e: f64) -> (f64, f64) {
    (e.cbrt(), 1.0 / (e.cbrt() * e.cbrt()))
}

/// `omega^2` from the ellipsoid coefficients: `2 (L1 - (c/a)^2 L3)`.
pub fn omega2_from_coeffs(e: f64, tol: f64) -> Result<f64> {
    check_oblate(e)?;
    let (a, c) = semi_axes(e);
    let k = ellipsoid_coeffs(a, a, c, tol)?;
    Ok(2.0 * (k.l1 - (c * c) / (a * a) * k.l3))
}

/// `omega^2` from the one-dimensional reduced integral in `e` alone.
pub fn omega2_reduced(e: f64, tol: f64) -> Result<f64> {
    check_oblate(e)?;
    let e2 = e * e;
    let integral = integrate_semi_infinite(
        |s| {
            let p = 1.0 + s;
            let q = 1.0 + e2 * s;
            // 1/p - 1/q written without cancellation.
            (e2 - 1.0) * s / (p * p * q * q.sqrt())
        },
        tol / (2.0 * PI),
    )?;
    Ok(2.0 * PI * integral)
}

fn check_oblate(e: f64) -> Result<()> {
    if !(e >= 1.0) || !e.is_finite() {
        return Err(invalid(format!(
            "Maclaurin solutions are oblate: ellipticity must be >= 1, got {e}"
        )));
    }
    Ok(())
}

/// Squared angular velocity of the Maclaurin spheroid with ellipticity `e`.
///
/// Both the coefficient route and the reduced integral are evaluated; the
/// reduced-integral value is returned once they agree within `10 tol`.
pub fn maclaurin_omega2(e: f64, tol: f64) -> Result<f64> {
    let reduced = omega2_reduced(e, tol)?;
    let via_coeffs = omega2_from_coeffs(e, tol)?;
    if (reduced - via_coeffs).abs() > 10.0 * tol {
        return Err(Error::QuadratureFailure {
            lo: 0.0,
            hi: f64::INFINITY,
            tol,
            panels: 0,
        });
    }
    Ok(reduced)
}

/// Sampled Maclaurin sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct MaclaurinFamily {
    pub members: Vec<Spheroid>,
    /// Index of the member with the largest `omega2`.
    pub argmax: usize,
}

/// Samples `n` spheroids with ellipticities evenly spaced on `[e_min, e_max]`.
///
/// A collapsed range `e_min == e_max` yields a single member.
pub fn maclaurin_family(e_min: f64, e_max: f64, n: usize, tol: f64) -> Result<MaclaurinFamily> {
    check_oblate(e_min)?;
    if !(e_max >= e_min) {
        return Err(invalid(format!("empty range [{e_min}, {e_max}]")));
    }
    let es: Vec<f64> = if e_max == e_min {
        vec![e_min]
    } else {
        if n < 2 {
            return Err(invalid("a family needs at least two members"));
        }
        (0..n)
            .map(|i| e_min + (e_max - e_min) * i as f64 / (n - 1) as f64)
            .collect()
    };
    let members = es
        .into_iter()
        .map(|e| Spheroid::new(e, tol))
        .collect::<Result<Vec<_>>>()?;
    let argmax = members.iter().enumerate().fold(0, |best, (i, m)| {
        if m.omega2 > members[best].omega2 {
            i
        } else {
            best
        }
    });
    Ok(MaclaurinFamily { members, argmax })
}

/// Spread (max - min) of `omega^2 rho^2 / 2 + U` over `npts` boundary points of
/// the spheroid, `rho` the distance from the rotation axis.
pub fn boundary_residual(e: f64, npts: usize, tol: f64) -> Result<f64> {
    let omega2 = maclaurin_omega2(e, tol)?;
    let (a, c) = semi_axes(e);
    let k = ellipsoid_coeffs(a, a, c, tol)?;
    let n = npts.max(1);
    let (lo, hi) = (0..n)
        .map(|i| {
            let theta = if n == 1 {
                0.0
            } else {
                0.5 * PI * i as f64 / (n - 1) as f64
            };
            let rho = a * theta.sin();
            let z = c * theta.cos();
            0.5 * omega2 * rho * rho + k.potential([rho, 0.0, z])
        })
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    Ok(hi - lo)
}
