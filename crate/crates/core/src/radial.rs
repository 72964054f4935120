//! Radial Lane-Emden solutions `u'' + (2/xi) u' + 4 pi u_+^q = 0`, `u(0) = a`,
//! `u'(0) = 0`, and the mass function `M(a)` built on them.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

/// Adiabatic exponent and central value of a polytrope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolytropeParams {
    gamma: f64,
    central_value: f64,
}

impl PolytropeParams {
    pub fn new(gamma: f64, central_value: f64) -> Result<Self> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(invalid(format!("gamma must exceed 1, got {gamma}")));
        }
        if !(central_value > 0.0) || !central_value.is_finite() {
            return Err(invalid(format!(
                "central value must be positive, got {central_value}"
            )));
        }
        Ok(Self {
            gamma,
            central_value,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Polytropic exponent `1 / (gamma - 1)`.
    pub fn q(&self) -> f64 {
        1.0 / (self.gamma - 1.0)
    }

    pub fn central_value(&self) -> f64 {
        self.central_value
    }

    /// Inverse length scale `sqrt(4 pi a^(q-1))` of the solution.
    fn scale(&self) -> f64 {
        (4.0 * PI * self.central_value.powf(self.q() - 1.0)).sqrt()
    }
}

/// A radial solution sampled from the center to its first zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub gamma: f64,
    pub central_value: f64,
    /// Strictly increasing radii, `xi[0] = 0`, last entry is the radius.
    pub xi: Vec<f64>,
    pub u: Vec<f64>,
    /// `du/dxi` at each sample.
    pub du: Vec<f64>,
    /// First zero of `u`.
    pub radius: f64,
    /// Total mass `int 4 pi xi^2 u_+^q`, integrated alongside `u`.
    pub mass: f64,
    /// Relative error estimate for `radius` and `mass`.
    pub error_estimate: f64,
}

/// Integration settings for [`solve_lane_emden`].
#[derive(Debug, Clone, Copy)]
pub struct LaneEmdenSolver {
    /// Largest accepted step in `xi`; also bounds the sample spacing.
    pub step: f64,
    /// Local error tolerance (relative to the solution scale) and root tolerance.
    pub tol: f64,
    /// Radius at which the search for a zero is abandoned.
    pub xi_max: f64,
}

impl Default for LaneEmdenSolver {
    fn default() -> Self {
        Self {
            step: 1e-3,
            tol: 1e-12,
            xi_max: 100.0,
        }
    }
}

type State = [f64; 3];

fn rhs(q: f64, xi: f64, y: &State) -> State {
    let src = 4.0 * PI * y[0].max(0.0).powf(q);
    [y[1], -2.0 * y[1] / xi - src, xi * xi * src]
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// One Dormand-Prince step; returns the fifth-order solution and the embedded error.
fn dp_step(q: f64, xi: f64, y: &State, h: f64) -> (State, State) {
    let mut k = [[0.0; 3]; 7];
    for s in 0..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            for c in 0..3 {
                ys[c] += h * A[s][j] * kj[c];
            }
        }
        k[s] = rhs(q, xi + C[s] * h, &ys);
    }
    let mut out = *y;
    let mut err = [0.0; 3];
    for (s, ks) in k.iter().enumerate() {
        for c in 0..3 {
            out[c] += h * B5[s] * ks[c];
            err[c] += h * E[s] * ks[c];
        }
    }
    (out, err)
}

/// Regular-center series through fourth order in `xi`.
fn series(params: &PolytropeParams, xi: f64) -> State {
    let a = params.central_value;
    let q = params.q();
    let s2 = params.scale().powi(2);
    let x2 = xi * xi;
    let u = a * (1.0 - s2 * x2 / 6.0 + q * s2 * s2 * x2 * x2 / 120.0);
    let du = a * (-s2 * xi / 3.0 + q * s2 * s2 * x2 * xi / 30.0);
    let m = 4.0 * PI * a.powf(q) * (x2 * xi / 3.0 - q * s2 * x2 * x2 * xi / 30.0);
    [u, du, m]
}

fn hermite(x0: f64, x1: f64, u0: f64, d0: f64, u1: f64, d1: f64, x: f64) -> (f64, f64) {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let v = (2.0 * t3 - 3.0 * t2 + 1.0) * u0
        + (t3 - 2.0 * t2 + t) * h * d0
        + (-2.0 * t3 + 3.0 * t2) * u1
        + (t3 - t2) * h * d1;
    let dv = ((6.0 * t2 - 6.0 * t) * u0
        + (3.0 * t2 - 4.0 * t + 1.0) * h * d0
        + (-6.0 * t2 + 6.0 * t) * u1
        + (3.0 * t2 - 2.0 * t) * h * d1)
        / h;
    (v, dv)
}

impl LaneEmdenSolver {
    pub fn solve(&self, params: &PolytropeParams) -> Result<RadialProfile> {
        if !(self.step > 0.0) || !(self.tol > 0.0) || !(self.xi_max > 0.0) {
            return Err(invalid("step, tol and xi_max must be positive"));
        }
        let q = params.q();
        let a = params.central_value;
        let s = params.scale();
        let scales = [a, a * s, 4.0 * PI * a.powf(q) / s.powi(3)];

        let xi_start = (1e-3 / s).min(0.5 * self.step);
        let mut xi = xi_start;
        let mut y = series(params, xi);
        let mut samples_xi = vec![0.0, xi];
        let mut samples_u = vec![a, y[0]];
        let mut samples_du = vec![0.0, y[1]];

        let mut h = (1e-2 / s).min(self.step);
        let mut accum_u = 0.0;
        let mut accum_m = 0.0;

        loop {
            if xi >= self.xi_max {
                return Err(Error::NoFiniteRadius {
                    xi_max: self.xi_max,
                });
            }
            let (next, err) = dp_step(q, xi, &y, h);
            let norm = err
                .iter()
                .zip(&scales)
                .map(|(e, sc)| e.abs() / (self.tol * sc))
                .fold(0.0, f64::max);
            if !(norm <= 1.0) {
                let factor = if norm.is_finite() {
                    (0.9 * norm.powf(-0.2)).max(0.2)
                } else {
                    0.2
                };
                h *= factor;
                if h < 1e-14 * xi.max(1e-300) {
                    return Err(invalid("step size underflow in the Lane-Emden integration"));
                }
                continue;
            }
            accum_u += err[0].abs();
            accum_m += err[2].abs();

            if next[0] <= 0.0 {
                // Bisect on the length of the bracketing step.
                let (mut lo, mut hi) = (0.0, h);
                let (mut y_lo, mut y_hi) = (y, next);
                let width = self.tol * xi.max(1.0);
                for _ in 0..200 {
                    if hi - lo <= width {
                        break;
                    }
                    let mid = 0.5 * (lo + hi);
                    let (ym, _) = dp_step(q, xi, &y, mid);
                    if ym[0] > 0.0 {
                        lo = mid;
                        y_lo = ym;
                    } else {
                        hi = mid;
                        y_hi = ym;
                    }
                }
                // Cubic Hermite root on the final bracket.
                let mut root = if y_lo[0] == y_hi[0] {
                    lo
                } else {
                    lo + (hi - lo) * y_lo[0] / (y_lo[0] - y_hi[0])
                };
                for _ in 0..4 {
                    let (v, dv) = hermite(lo, hi, y_lo[0], y_lo[1], y_hi[0], y_hi[1], root);
                    if dv == 0.0 {
                        break;
                    }
                    root = (root - v / dv).clamp(lo, hi);
                }
                let (y_r, _) = if root > 0.0 {
                    dp_step(q, xi, &y, root)
                } else {
                    (y, [0.0; 3])
                };
                let radius = xi + root;
                let mass = y_r[2];
                samples_xi.push(radius);
                samples_u.push(0.0);
                samples_du.push(y_r[1]);
                let err_r = (accum_u / y_r[1].abs() + (hi - lo)) / radius;
                let err_m = accum_m / mass;
                return Ok(RadialProfile {
                    gamma: params.gamma,
                    central_value: a,
                    xi: samples_xi,
                    u: samples_u,
                    du: samples_du,
                    radius,
                    mass,
                    error_estimate: err_r.max(err_m) + self.tol,
                });
            }

            xi += h;
            y = next;
            samples_xi.push(xi);
            samples_u.push(y[0]);
            samples_du.push(y[1]);
            let grow = if norm > 0.0 {
                (0.9 * norm.powf(-0.2)).min(5.0)
            } else {
                5.0
            };
            h = (h * grow).min(self.step);
        }
    }
}

/// Integrates from the regular center out to the first zero of `u`.
///
/// `step` bounds the step length in `xi`, `tol` is the local error tolerance.
pub fn solve_lane_emden(params: &PolytropeParams, step: f64, tol: f64) -> Result<RadialProfile> {
    LaneEmdenSolver {
        step,
        tol,
        ..LaneEmdenSolver::default()
    }
    .solve(params)
}

impl RadialProfile {
    pub fn q(&self) -> f64 {
        1.0 / (self.gamma - 1.0)
    }

    fn check(&self) -> Result<()> {
        let n = self.xi.len();
        if n < 2 || self.u.len() != n || self.du.len() != n {
            return Err(invalid(
                "profile needs at least two samples of xi, u and du",
            ));
        }
        if self.xi.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("profile radii must be strictly increasing"));
        }
        Ok(())
    }

    /// Value of `u` at `xi`, clamped to zero outside the radius.
    ///
    /// Between samples the ODE is advanced from the nearest sample below, so the
    /// result carries the integrator's accuracy rather than an interpolant's.
    pub fn u_at(&self, xi: f64) -> f64 {
        if xi <= 0.0 {
            return self.central_value;
        }
        if xi >= self.radius {
            return 0.0;
        }
        let params = PolytropeParams {
            gamma: self.gamma,
            central_value: self.central_value,
        };
        if xi <= self.xi[1] {
            return series(&params, xi)[0];
        }
        let i = self.xi.partition_point(|&x| x <= xi) - 1;
        let y = [self.u[i], self.du[i], 0.0];
        let h = xi - self.xi[i];
        if h == 0.0 {
            return self.u[i];
        }
        dp_step(self.q(), self.xi[i], &y, h).0[0].max(0.0)
    }

    /// Density `u_+^q` at radius `xi`.
    pub fn density_at(&self, xi: f64) -> f64 {
        self.u_at(xi).max(0.0).powf(self.q())
    }
}

/// Total mass by composite Gauss quadrature of `4 pi xi^2 u_+^q` over the
/// stored samples, with `u` reconstructed by cubic Hermite interpolation.
pub fn mass_of(profile: &RadialProfile) -> Result<f64> {
    profile.check()?;
    const GX: [f64; 4] = [
        -0.861_136_311_594_052_6,
        -0.339_981_043_584_856_3,
        0.339_981_043_584_856_3,
        0.861_136_311_594_052_6,
    ];
    const GW: [f64; 4] = [
        0.347_854_845_137_453_9,
        0.652_145_154_862_546_1,
        0.652_145_154_862_546_1,
        0.347_854_845_137_453_9,
    ];
    let q = profile.q();
    let mut total = 0.0;
    for i in 0..profile.xi.len() - 1 {
        let (x0, x1) = (profile.xi[i], profile.xi[i + 1]);
        let (u0, u1) = (profile.u[i], profile.u[i + 1]);
        if u0 <= 0.0 && u1 <= 0.0 {
            continue;
        }
        let half = 0.5 * (x1 - x0);
        let mid = 0.5 * (x1 + x0);
        let mut part = 0.0;
        for (gx, gw) in GX.iter().zip(&GW) {
            let x = mid + half * gx;
            let (u, _) = hermite(x0, x1, u0, profile.du[i], u1, profile.du[i + 1], x);
            part += gw * x * x * u.max(0.0).powf(q);
        }
        total += part * half;
    }
    Ok(4.0 * PI * total)
}

/// Exponent `(3 gamma - 4) / (2 gamma - 2)` of the mass-scaling law
/// `M(a) ~ a^exponent`.
pub fn mass_exponent(gamma: f64) -> Result<f64> {
    if !(gamma > 1.2 && gamma <= 2.0) {
        return Err(invalid(format!(
            "mass exponent defined for 6/5 < gamma <= 2, got {gamma}"
        )));
    }
    Ok((3.0 * gamma - 4.0) / (2.0 * gamma - 2.0))
}

/// Applies the scaling symmetry `u(x) -> lambda^b u(lambda x)`, `b = (2 gamma - 2) / (2 - gamma)`.
pub fn rescale(profile: &RadialProfile, lambda: f64) -> Result<RadialProfile> {
    profile.check()?;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid(format!("lambda must be positive, got {lambda}")));
    }
    if profile.gamma == 2.0 {
        return Err(invalid("the scaling symmetry is singular at gamma = 2"));
    }
    let b = (2.0 * profile.gamma - 2.0) / (2.0 - profile.gamma);
    let amp = lambda.powf(b);
    let damp = amp * lambda;
    let mut out = RadialProfile {
        gamma: profile.gamma,
        central_value: profile.central_value * amp,
        xi: profile.xi.iter().map(|x| x / lambda).collect(),
        u: profile.u.iter().map(|u| u * amp).collect(),
        du: profile.du.iter().map(|d| d * damp).collect(),
        radius: profile.radius / lambda,
        mass: 0.0,
        error_estimate: profile.error_estimate,
    };
    out.mass = mass_of(&out)?;
    Ok(out)
}

/// Central value whose radial solution carries total mass `mass`.
pub fn central_value_for_mass(gamma: f64, mass: f64, solver: &LaneEmdenSolver) -> Result<f64> {
    if !(mass > 0.0) {
        return Err(invalid(format!("mass must be positive, got {mass}")));
    }
    let exponent = mass_exponent(gamma)?;
    if exponent.abs() < 1e-12 {
        return Err(invalid(
            "at gamma = 4/3 every central value has the same mass; give central_value instead",
        ));
    }
    let unit = solver.solve(&PolytropeParams::new(gamma, 1.0)?)?;
    Ok((mass / unit.mass).powf(1.0 / exponent))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn solve(gamma: f64, a: f64) -> RadialProfile {
        LaneEmdenSolver::default()
            .solve(&PolytropeParams::new(gamma, a).unwrap())
            .unwrap()
    }

    fn closed_form_gamma2(a: f64, r: f64) -> f64 {
        let k = 2.0 * PI.sqrt();
        a * (k * r).sin() / (k * r)
    }

    #[test]
    fn params_validation() {
        assert!(PolytropeParams::new(1.0, 1.0).is_err());
        assert!(PolytropeParams::new(0.5, 1.0).is_err());
        assert!(PolytropeParams::new(1.5, 0.0).is_err());
        let p = PolytropeParams::new(1.5, 2.0).unwrap();
        assert_eq!(p.q(), 2.0);
    }

    #[test]
    fn gamma2_radius_is_independent_of_center() {
        for a in [0.3, 1.0, 7.0] {
            let p = solve(2.0, a);
            assert_abs_diff_eq!(p.radius, PI.sqrt() / 2.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn gamma2_spot_value() {
        let p = solve(2.0, 1.0);
        assert_abs_diff_eq!(p.u_at(0.4), closed_form_gamma2(1.0, 0.4), epsilon = 1e-10);
    }

    #[test]
    fn gamma2_mass() {
        let p = solve(2.0, 1.0);
        assert_abs_diff_eq!(p.mass, PI.sqrt() / 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(mass_of(&p).unwrap(), PI.sqrt() / 2.0, epsilon = 1e-9);
    }

    #[test]
    fn q_at_least_five_has_no_radius() {
        let params = PolytropeParams::new(7.0 / 6.0, 1.0).unwrap();
        let err = solve_lane_emden(&params, 1e-2, 1e-10).unwrap_err();
        assert!(matches!(err, Error::NoFiniteRadius { .. }));
        let params = PolytropeParams::new(1.2, 1.0).unwrap();
        assert!(matches!(
            solve_lane_emden(&params, 1e-2, 1e-10),
            Err(Error::NoFiniteRadius { .. })
        ));
    }

    #[test]
    fn zero_profile_has_zero_mass() {
        let p = RadialProfile {
            gamma: 1.5,
            central_value: 1.0,
            xi: vec![0.0, 0.5, 1.0],
            u: vec![0.0; 3],
            du: vec![0.0; 3],
            radius: 1.0,
            mass: 0.0,
            error_estimate: 0.0,
        };
        assert_eq!(mass_of(&p).unwrap(), 0.0);
    }

    #[test]
    fn malformed_profile_is_rejected() {
        let p = RadialProfile {
            gamma: 1.5,
            central_value: 1.0,
            xi: vec![0.0, 1.0],
            u: vec![1.0],
            du: vec![0.0, 0.0],
            radius: 1.0,
            mass: 0.0,
            error_estimate: 0.0,
        };
        assert!(mass_of(&p).is_err());
    }

    #[test]
    fn exponent_values() {
        assert_abs_diff_eq!(mass_exponent(4.0 / 3.0).unwrap(), 0.0, epsilon = 1e-15);
        assert_eq!(mass_exponent(2.0).unwrap(), 1.0);
        assert_eq!(mass_exponent(1.5).unwrap(), 0.5);
        assert!(mass_exponent(1.1).is_err());
        assert!(mass_exponent(2.5).is_err());
    }

    #[test]
    fn mass_doubling_at_gamma_three_halves() {
        let m1 = solve(1.5, 1.0).mass;
        let m2 = solve(1.5, 2.0).mass;
        assert_abs_diff_eq!(m2 / m1, 2f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn rescale_identity() {
        let p = solve(1.5, 1.0);
        let r = rescale(&p, 1.0).unwrap();
        assert_eq!(r.xi, p.xi);
        assert_eq!(r.u, p.u);
        assert_abs_diff_eq!(r.mass, p.mass, epsilon = 1e-9);
    }

    #[test]
    fn rescale_matches_fresh_solve() {
        let p = solve(1.5, 1.0);
        let r = rescale(&p, 2.0).unwrap();
        assert_abs_diff_eq!(r.central_value, 4.0, epsilon = 1e-14);
        let fresh = solve(1.5, 4.0);
        assert_abs_diff_eq!(r.radius, fresh.radius, epsilon = 1e-9);
        for i in 0..=50 {
            let x = fresh.radius * i as f64 / 50.0;
            assert_abs_diff_eq!(r.u_at(x), fresh.u_at(x), epsilon = 1e-5);
        }
        let slope = (r.mass.ln() - p.mass.ln()) / (r.central_value.ln() - p.central_value.ln());
        assert_abs_diff_eq!(slope, mass_exponent(1.5).unwrap(), epsilon = 1e-6);
    }

    #[test]
    fn rescale_rejects_gamma2() {
        let p = solve(2.0, 1.0);
        assert!(rescale(&p, 2.0).is_err());
        let p = solve(1.5, 1.0);
        assert!(rescale(&p, 0.0).is_err());
    }

    #[test]
    fn halved_step_is_within_error_estimate() {
        let params = PolytropeParams::new(1.5, 1.0).unwrap();
        let a = solve_lane_emden(&params, 1e-2, 1e-11).unwrap();
        let b = solve_lane_emden(&params, 5e-3, 1e-11).unwrap();
        let est = a.error_estimate.max(b.error_estimate);
        assert!((a.radius - b.radius).abs() <= est * a.radius);
        assert!((a.mass - b.mass).abs() <= est * a.mass);
    }

    #[test]
    fn profile_is_monotone() {
        let p = solve(1.8, 0.7);
        assert!(p.u.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(*p.u.last().unwrap(), 0.0);
        assert!(p.mass > 0.0);
    }

    #[test]
    fn central_value_inversion() {
        let solver = LaneEmdenSolver::default();
        let a = central_value_for_mass(1.5, 2.0, &solver).unwrap();
        let p = solver
            .solve(&PolytropeParams::new(1.5, a).unwrap())
            .unwrap();
        assert_abs_diff_eq!(p.mass, 2.0, epsilon = 1e-9);
        assert!(central_value_for_mass(4.0 / 3.0, 1.0, &solver).is_err());
    }
}
