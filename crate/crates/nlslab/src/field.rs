//! Complex radial fields sampled on a [`RadialGrid`], with the norms used
//! throughout the crate.

use num_complex::Complex64;
use std::sync::Arc;

use crate::error::{NlsError, Result};
use crate::grid::RadialGrid;

/// A complex-valued radial profile `u(r)` sampled at the grid nodes.
///
/// The grid is shared behind an `Arc` so fields are cheap to clone and safe
/// to move across threads.
#[derive(Debug, Clone)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    values: Vec<Complex64>,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(NlsError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(NlsError::NonFinite { index });
        }
        Ok(RadialField { grid, values })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        RadialField {
            grid,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Samples a real profile `f(r)` at the nodes.
    ///
    /// Panics if the closure produces a non-finite value; use
    /// [`RadialField::new`] with prebuilt samples to handle that fallibly.
    pub fn from_real_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values: Vec<Complex64> = grid
            .nodes()
            .iter()
            .map(|&r| Complex64::new(f(r), 0.0))
            .collect();
        RadialField::new(grid, values).expect("profile closure produced a non-finite value")
    }

    /// Samples a complex profile `f(r)` at the nodes.
    ///
    /// Panics if the closure produces a non-finite value; use
    /// [`RadialField::new`] with prebuilt samples to handle that fallibly.
    pub fn from_complex_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> Complex64) -> Self {
        let values: Vec<Complex64> = grid.nodes().iter().map(|&r| f(r)).collect();
        RadialField::new(grid, values).expect("profile closure produced a non-finite value")
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Pointwise modulus `|u(r_i)|`.
    pub fn abs_samples(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Returns the field multiplied by a real scalar.
    pub fn scaled(&self, factor: f64) -> Self {
        RadialField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// `integral of |u|^q dx` for real `q >= 1` (the `q`-th power, not the norm).
    pub fn abs_power_integral(&self, q: f64) -> Result<f64> {
        if !(q.is_finite() && q >= 1.0) {
            return Err(NlsError::InvalidParameter(format!(
                "Lebesgue exponent must be finite and >= 1, got {q}"
            )));
        }
        let samples: Vec<f64> = self.values.iter().map(|v| pow_abs(v, q)).collect();
        self.grid.integrate(&samples)
    }

    /// `L^q` norm over `R^N`.
    pub fn lp_norm(&self, q: f64) -> Result<f64> {
        Ok(self.abs_power_integral(q)?.max(0.0).powf(1.0 / q))
    }

    /// `integral of |u|^2 dx` (squared `L^2` norm).
    pub fn mass(&self) -> Result<f64> {
        self.abs_power_integral(2.0)
    }

    /// Radial derivative at the nodes by fourth-order finite differences.
    ///
    /// Radial regularity is used at the origin: `u` extends evenly in `r`, so
    /// `u'(0) = 0` and the node next to the origin can use a centered stencil
    /// with the ghost value `u(-h) = u(h)`. The two outermost nodes use
    /// one-sided fourth-order stencils.
    pub fn radial_derivative(&self) -> Result<Vec<Complex64>> {
        let n = self.values.len();
        if n < 5 {
            return Err(NlsError::GridTooCoarse(format!(
                "derivative stencil needs at least 5 nodes, got {n}"
            )));
        }
        let h = self.grid.spacing();
        let v = &self.values;
        let mut d = vec![Complex64::new(0.0, 0.0); n];
        // u'(0) = 0 by evenness.
        d[0] = Complex64::new(0.0, 0.0);
        // i = 1 with even ghost u_{-1} = u_1.
        d[1] = (-v[3] + v[2] * 8.0 - v[0] * 8.0 + v[1]) / (12.0 * h);
        for i in 2..n - 2 {
            d[i] = (-v[i + 2] + v[i + 1] * 8.0 - v[i - 1] * 8.0 + v[i - 2]) / (12.0 * h);
        }
        // One-sided fourth-order stencils at the outer edge.
        d[n - 2] = (v[n - 1] * 3.0 + v[n - 2] * 10.0 - v[n - 3] * 18.0 + v[n - 4] * 6.0
            - v[n - 5])
            / (12.0 * h);
        d[n - 1] = (v[n - 1] * 25.0 - v[n - 2] * 48.0 + v[n - 3] * 36.0 - v[n - 4] * 16.0
            + v[n - 5] * 3.0)
            / (12.0 * h);
        Ok(d)
    }

    /// `(integral of |du/dr|^2 dx)^{1/2}`, the `L^2` norm of the gradient
    /// (for radial fields `|grad u| = |du/dr|`).
    pub fn gradient_norm(&self) -> Result<f64> {
        Ok(self.gradient_sq()?.max(0.0).sqrt())
    }

    /// `integral of |du/dr|^2 dx`.
    pub fn gradient_sq(&self) -> Result<f64> {
        let d = self.radial_derivative()?;
        let samples: Vec<f64> = d.iter().map(|v| v.norm_sqr()).collect();
        self.grid.integrate(&samples)
    }

    /// Checks that two fields share a grid (same dimension, extent, size).
    pub fn same_grid(&self, other: &RadialField) -> Result<()> {
        if self.grid.as_ref() == other.grid.as_ref() {
            Ok(())
        } else {
            Err(NlsError::GridMismatch(format!(
                "N={} r_max={} nodes={} vs N={} r_max={} nodes={}",
                self.grid.dimension(),
                self.grid.r_max(),
                self.grid.len(),
                other.grid.dimension(),
                other.grid.r_max(),
                other.grid.len()
            )))
        }
    }
}

/// `|v|^q` with a fast path for the even integer powers that dominate the
/// hot loops (q = 2, 4).
fn pow_abs(v: &Complex64, q: f64) -> f64 {
    let n2 = v.norm_sqr();
    if q == 2.0 {
        n2
    } else if q == 4.0 {
        n2 * n2
    } else {
        n2.powf(q / 2.0)
    }
}
