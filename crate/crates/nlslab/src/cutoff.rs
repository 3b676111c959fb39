//! Truncated variance weight for localized virial arguments.
//!
//! `chi_m(r) = m^2 chi(r/m)` where the unit profile is
//!
//! ```text
//! chi(s) = s^2                     s <= 1
//!        = quintic bridge          1 < s < 3
//!        = 3                       s >= 3
//! ```
//!
//! The bridge matches value, slope and curvature at both junctions and has
//! vanishing third derivative at the outer one, so `chi` is C^2 everywhere,
//! piecewise C^infinity, monotone, with `chi'' <= 2` globally. In terms of
//! `t = (s-1)/2` it reads `1 + 4t + 4t^2 - 16t^3 + 14t^4 - 4t^5`.

use serde::{Deserialize, Serialize};

use crate::error::{NlsError, Result};

/// Scaled variance cutoff `chi_m` together with its radial derivatives and
/// Laplacian combinations. Third and fourth derivatives are understood
/// piecewise (the third jumps at the inner junction).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CutoffProfile {
    m: f64,
    dimension: u32,
}

/// Unit-profile derivatives chi^(0..4) at s, piecewise.
fn unit(s: f64) -> [f64; 5] {
    if s <= 1.0 {
        [s * s, 2.0 * s, 2.0, 0.0, 0.0]
    } else if s >= 3.0 {
        [3.0, 0.0, 0.0, 0.0, 0.0]
    } else {
        let t = 0.5 * (s - 1.0);
        let chi = 1.0 + t * (4.0 + t * (4.0 + t * (-16.0 + t * (14.0 - 4.0 * t))));
        // d/ds = (1/2) d/dt, and so on down the chain rule.
        let d1 = (4.0 + t * (8.0 + t * (-48.0 + t * (56.0 - 20.0 * t)))) / 2.0;
        let d2 = (8.0 + t * (-96.0 + t * (168.0 - 80.0 * t))) / 4.0;
        let d3 = (-96.0 + t * (336.0 - 240.0 * t)) / 8.0;
        let d4 = (336.0 - 480.0 * t) / 16.0;
        [chi, d1, d2, d3, d4]
    }
}

impl CutoffProfile {
    pub fn new(m: f64, dimension: u32) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(NlsError::InvalidParameter(format!(
                "cutoff scale must be finite and positive, got {m}"
            )));
        }
        if dimension == 0 {
            return Err(NlsError::InvalidParameter("dimension must be at least 1".into()));
        }
        Ok(CutoffProfile { m, dimension })
    }

    pub fn scale(&self) -> f64 {
        self.m
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    /// Value for `r >= 3m`.
    pub fn plateau(&self) -> f64 {
        3.0 * self.m * self.m
    }

    /// chi_m and its first four radial derivatives at `r`.
    /// chi_m^(k)(r) = m^{2-k} chi^(k)(r/m).
    pub fn derivatives(&self, r: f64) -> [f64; 5] {
        let u = unit(r / self.m);
        let mut out = [0.0; 5];
        let mut scale = self.m * self.m;
        for k in 0..5 {
            out[k] = u[k] * scale;
            scale /= self.m;
        }
        out
    }

    pub fn chi(&self, r: f64) -> f64 {
        self.derivatives(r)[0]
    }

    pub fn d1(&self, r: f64) -> f64 {
        self.derivatives(r)[1]
    }

    pub fn d2(&self, r: f64) -> f64 {
        self.derivatives(r)[2]
    }

    pub fn d3(&self, r: f64) -> f64 {
        self.derivatives(r)[3]
    }

    pub fn d4(&self, r: f64) -> f64 {
        self.derivatives(r)[4]
    }

    /// `Delta chi = chi'' + (N-1) chi' / r`; equals `2N` on the inner core.
    pub fn delta_chi(&self, r: f64) -> f64 {
        let d = self.derivatives(r);
        if r == 0.0 {
            // chi = r^2 near the origin, so Delta chi -> 2N.
            return 2.0 * self.dimension as f64;
        }
        d[2] + (self.dimension as f64 - 1.0) * d[1] / r
    }

    /// `(Delta chi)' = chi''' + (N-1)(chi''/r - chi'/r^2)`, the only
    /// derivative of the Laplacian the localized identity needs.
    pub fn delta_chi_grad(&self, r: f64) -> f64 {
        let d = self.derivatives(r);
        if r == 0.0 {
            return 0.0;
        }
        let nm1 = self.dimension as f64 - 1.0;
        d[3] + nm1 * (d[2] / r - d[1] / (r * r))
    }

    /// `Delta^2 chi`, piecewise (away from the inner junction where the
    /// third derivative jumps):
    /// `chi'''' + 2(N-1) chi'''/r + (N-1)(N-3)(chi''/r^2 - chi'/r^3)`.
    pub fn bilaplacian(&self, r: f64) -> f64 {
        let d = self.derivatives(r);
        if r == 0.0 {
            return 0.0;
        }
        let n = self.dimension as f64;
        d[4] + 2.0 * (n - 1.0) * d[3] / r + (n - 1.0) * (n - 3.0) * (d[2] / (r * r) - d[1] / (r * r * r))
    }
}
