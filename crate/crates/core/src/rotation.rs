//! Squared angular-velocity profiles `omega^2(s)` and their centrifugal
//! potential `j(r) = int_0^r omega^2(s) s ds`.

use std::fs;
use std::path::Path;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum RotationProfile {
    /// `omega^2(s) = omega_bar^2 (1 + s^2)^-p`, `p > 1`.
    PowerDecay { omega_bar: f64, p: f64 },
    /// `omega^2(s) = omega_bar^2 exp(-s^2)`.
    Gaussian { omega_bar: f64 },
    /// Sampled `omega^2` with a power-law tail fitted to the last two samples.
    Tabulated(Table),
}

/// Tabulated `omega^2(s)` and the cumulative `j` at each sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    s: Vec<f64>,
    omega2: Vec<f64>,
    cumulative: Vec<f64>,
    /// Tail `omega^2 ~ C s^-tail_power` beyond the last sample; `None` if it vanishes.
    tail_power: Option<f64>,
}

impl RotationProfile {
    pub fn power_decay(omega_bar: f64, p: f64) -> Result<Self> {
        check_amplitude(omega_bar)?;
        if !(p > 1.0) || !p.is_finite() {
            return Err(invalid(format!(
                "power_decay needs p > 1 for a finite j_inf, got {p}"
            )));
        }
        Ok(Self::PowerDecay { omega_bar, p })
    }

    pub fn gaussian(omega_bar: f64) -> Result<Self> {
        check_amplitude(omega_bar)?;
        Ok(Self::Gaussian { omega_bar })
    }

    /// Builds a profile from samples `(s_i, omega^2_i)`; `s` must start at 0
    /// and increase strictly.
    pub fn tabulated(s: Vec<f64>, omega2: Vec<f64>) -> Result<Self> {
        Ok(Self::Tabulated(Table::new(s, omega2)?))
    }

    /// Reads a two-column `s omega2` text file (whitespace or comma separated,
    /// `#` starts a comment).
    pub fn from_table_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut s = Vec::new();
        let mut w = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .collect();
            let parse = |t: &str| {
                t.parse::<f64>().map_err(|e| Error::Format {
                    path: path.to_path_buf(),
                    msg: format!("line {}: {e}", n + 1),
                })
            };
            if cols.len() != 2 {
                return Err(Error::Format {
                    path: path.to_path_buf(),
                    msg: format!("line {}: expected two columns", n + 1),
                });
            }
            s.push(parse(cols[0])?);
            w.push(parse(cols[1])?);
        }
        Self::tabulated(s, w)
    }

    /// Squared angular velocity at cylindrical radius `s`.
    pub fn omega2(&self, s: f64) -> f64 {
        match self {
            Self::PowerDecay { omega_bar, p } => omega_bar * omega_bar * (1.0 + s * s).powf(-p),
            Self::Gaussian { omega_bar } => omega_bar * omega_bar * (-s * s).exp(),
            Self::Tabulated(t) => t.omega2(s),
        }
    }

    /// Centrifugal potential `j(r)`.
    pub fn j(&self, r: f64) -> f64 {
        let r = r.max(0.0);
        match self {
            Self::PowerDecay { omega_bar, p } => {
                omega_bar * omega_bar / (2.0 * (p - 1.0)) * (1.0 - (1.0 + r * r).powf(1.0 - p))
            }
            Self::Gaussian { omega_bar } => 0.5 * omega_bar * omega_bar * (-(-r * r).exp_m1()),
            Self::Tabulated(t) => t.j(r),
        }
    }

    /// Limit of `j(r)` as `r -> infinity`.
    pub fn j_infinity(&self) -> f64 {
        match self {
            Self::PowerDecay { omega_bar, p } => omega_bar * omega_bar / (2.0 * (p - 1.0)),
            Self::Gaussian { omega_bar } => 0.5 * omega_bar * omega_bar,
            Self::Tabulated(t) => t.j_infinity(),
        }
    }

    /// Exponent `delta` with `j_inf - j(r) = O(r^-delta)`; infinite for
    /// faster-than-power decay.
    pub fn decay_exponent(&self) -> f64 {
        match self {
            Self::PowerDecay { p, .. } => 2.0 * (p - 1.0),
            Self::Gaussian { .. } => f64::INFINITY,
            Self::Tabulated(t) => t.tail_power.map_or(f64::INFINITY, |k| k - 2.0),
        }
    }

    /// Radius beyond which `j_inf - j(r) < tol`.
    pub fn effective_radius(&self, tol: f64) -> f64 {
        let rest = self.j_infinity();
        if rest < tol {
            return 0.0;
        }
        match self {
            Self::PowerDecay { p, .. } => {
                ((rest / tol).powf(1.0 / (p - 1.0)) - 1.0).max(0.0).sqrt()
            }
            Self::Gaussian { .. } => (rest / tol).ln().max(0.0).sqrt(),
            Self::Tabulated(t) => t.effective_radius(tol),
        }
    }
}

fn check_amplitude(omega_bar: f64) -> Result<()> {
    if !(omega_bar >= 0.0) || !omega_bar.is_finite() {
        return Err(invalid(format!(
            "omega_bar must be finite and nonnegative, got {omega_bar}"
        )));
    }
    Ok(())
}

impl Table {
    fn new(s: Vec<f64>, omega2: Vec<f64>) -> Result<Self> {
        if s.len() != omega2.len() || s.len() < 4 {
            return Err(invalid(
                "rotation table needs at least four (s, omega2) rows",
            ));
        }
        if s[0] != 0.0 {
            return Err(invalid("rotation table must start at s = 0"));
        }
        if s.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("rotation table radii must increase strictly"));
        }
        if omega2.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(invalid("rotation table needs finite omega2 >= 0"));
        }
        let n = s.len();
        let (w1, w2) = (omega2[n - 2], omega2[n - 1]);
        let tail_power = if w2 == 0.0 {
            None
        } else {
            if w1 <= 0.0 {
                return Err(invalid("rotation table tail cannot be fitted"));
            }
            let k = -(w2 / w1).ln() / (s[n - 1] / s[n - 2]).ln();
            if !(k > 2.0) {
                return Err(invalid(format!(
                    "rotation table tail decays like s^-{k:.3}; j_inf diverges unless omega2 decays faster than s^-2"
                )));
            }
            Some(k)
        };
        let mut table = Self {
            s,
            omega2,
            cumulative: Vec::new(),
            tail_power,
        };
        let mut cumulative = vec![0.0];
        for i in 0..n - 1 {
            let last = *cumulative.last().unwrap();
            cumulative.push(last + table.segment(i, table.s[i + 1]));
        }
        table.cumulative = cumulative;
        Ok(table)
    }

    /// Cubic through the four samples surrounding segment `i`.
    fn stencil(&self, i: usize) -> usize {
        i.saturating_sub(1).min(self.s.len() - 4)
    }

    fn cubic(&self, i: usize, x: f64) -> f64 {
        let b = self.stencil(i);
        let xs = &self.s[b..b + 4];
        let ys = &self.omega2[b..b + 4];
        let mut v = 0.0;
        for k in 0..4 {
            let mut l = 1.0;
            for m in 0..4 {
                if m != k {
                    l *= (x - xs[m]) / (xs[k] - xs[m]);
                }
            }
            v += l * ys[k];
        }
        v.max(0.0)
    }

    /// `int_{s_i}^{x} omega^2(s) s ds` for `x` within segment `i`.
    fn segment(&self, i: usize, x: f64) -> f64 {
        // Four-point Gauss on the local cubic is exact up to the clamp at zero.
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
        let lo = self.s[i];
        let half = 0.5 * (x - lo);
        let mid = 0.5 * (x + lo);
        GX.iter()
            .zip(&GW)
            .map(|(g, w)| {
                let t = mid + half * g;
                w * t * self.cubic(i, t)
            })
            .sum::<f64>()
            * half
    }

    fn last(&self) -> (f64, f64) {
        let n = self.s.len();
        (self.s[n - 1], self.omega2[n - 1])
    }

    fn omega2(&self, x: f64) -> f64 {
        let (s_end, w_end) = self.last();
        if x >= s_end {
            return match self.tail_power {
                Some(k) => w_end * (x / s_end).powf(-k),
                None => 0.0,
            };
        }
        let i = self.s.partition_point(|&v| v <= x) - 1;
        self.cubic(i, x)
    }

    /// Tail integral `int_{s_end}^{x} omega^2 s ds` of the fitted power law.
    fn tail(&self, x: f64) -> f64 {
        let (s_end, w_end) = self.last();
        match self.tail_power {
            Some(k) => {
                let c = w_end * s_end * s_end / (k - 2.0);
                if x.is_infinite() {
                    c
                } else {
                    c * (1.0 - (x / s_end).powf(2.0 - k))
                }
            }
            None => 0.0,
        }
    }

    fn j(&self, x: f64) -> f64 {
        let (s_end, _) = self.last();
        let n = self.s.len();
        if x >= s_end {
            return self.cumulative[n - 1] + self.tail(x);
        }
        let i = self.s.partition_point(|&v| v <= x) - 1;
        self.cumulative[i] + self.segment(i, x)
    }

    fn j_infinity(&self) -> f64 {
        self.cumulative[self.s.len() - 1] + self.tail(f64::INFINITY)
    }

    fn effective_radius(&self, tol: f64) -> f64 {
        let total = self.j_infinity();
        let (s_end, w_end) = self.last();
        match self.tail_power {
            Some(k) if self.tail(f64::INFINITY) >= tol => {
                // c (x / s_end)^(2-k) = tol
                let c = w_end * s_end * s_end / (k - 2.0);
                s_end * (c / tol).powf(1.0 / (k - 2.0))
            }
            _ => {
                let i = self
                    .cumulative
                    .iter()
                    .position(|&c| total - c < tol)
                    .unwrap_or(self.s.len() - 1);
                self.s[i]
            }
        }
    }
}
