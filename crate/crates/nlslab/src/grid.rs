//! Uniform radial grids on `[0, r_max]` with quadrature against the volume
//! measure `r^{N-1} dr` of `R^N`.
//!
//! Radial integrals of a profile `f(r)` are computed as
//! `sigma_N * sum_i w_i f(r_i)`, where `sigma_N` is the surface area of the
//! unit sphere and the weights `w_i` absorb both the composite rule and the
//! `r^{N-1}` factor. The rule is composite Simpson applied to the weighted
//! integrand (a single 3/8 panel closes the range when the panel count is
//! odd), so:
//!
//! * every weight is nonnegative,
//! * polynomials `f` with `deg f + N - 1 <= 3` integrate exactly
//!   (design order `4 - N` in the bare profile, for `N <= 4`),
//! * smooth profiles that decay before `r_max` are integrated to near machine
//!   precision, because every odd derivative of `f(r) r^{N-1}` vanishes at
//!   `r = 0` for smooth radial `f` and the Euler-Maclaurin boundary terms at
//!   `r_max` are exponentially small.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{NlsError, Result};

/// Surface area of the unit sphere `S^{N-1}`: `2 pi^{N/2} / Gamma(N/2)`.
///
/// `N` is a positive integer, so `Gamma(N/2)` is evaluated by the half-integer
/// recursion from `Gamma(1/2) = sqrt(pi)` and `Gamma(1) = 1`.
pub fn sphere_surface(dimension: u32) -> f64 {
    assert!(dimension >= 1, "dimension must be >= 1");
    let mut gamma = if dimension % 2 == 0 { 1.0 } else { PI.sqrt() };
    // Gamma(N/2) = (N/2 - 1)(N/2 - 2)... down to Gamma(1) or Gamma(1/2).
    let mut x = dimension as f64 / 2.0 - 1.0;
    while x > 0.25 {
        gamma *= x;
        x -= 1.0;
    }
    2.0 * PI.powf(dimension as f64 / 2.0) / gamma
}

/// Uniform radial grid with precomputed quadrature weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadialGrid {
    dimension: u32,
    r_max: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    spacing: f64,
    sphere: f64,
}

impl PartialEq for RadialGrid {
    fn eq(&self, other: &Self) -> bool {
        self.dimension == other.dimension
            && self.r_max == other.r_max
            && self.nodes.len() == other.nodes.len()
    }
}

impl RadialGrid {
    /// Builds a uniform grid with `node_count` nodes, `r_0 = 0` and
    /// `r_{M-1} = r_max`.
    pub fn uniform(dimension: u32, r_max: f64, node_count: usize) -> Result<Self> {
        if dimension < 1 {
            return Err(NlsError::InvalidParameter(
                "dimension must be a positive integer".into(),
            ));
        }
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(NlsError::InvalidParameter(format!(
                "r_max must be finite and positive, got {r_max}"
            )));
        }
        if node_count < 3 {
            return Err(NlsError::GridTooCoarse(format!(
                "need at least 3 nodes, got {node_count}"
            )));
        }
        let spacing = r_max / (node_count - 1) as f64;
        let nodes: Vec<f64> = (0..node_count)
            .map(|i| {
                if i == node_count - 1 {
                    r_max
                } else {
                    i as f64 * spacing
                }
            })
            .collect();
        let weights = weighted_simpson_weights(&nodes, spacing, dimension);
        Ok(RadialGrid {
            dimension,
            r_max,
            nodes,
            weights,
            spacing,
            sphere: sphere_surface(dimension),
        })
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Surface area of the unit sphere in this dimension.
    pub fn sphere_constant(&self) -> f64 {
        self.sphere
    }

    /// Volume of the ball of radius `r_max`: `sigma_N r_max^N / N`.
    pub fn ball_volume(&self) -> f64 {
        self.sphere * self.r_max.powi(self.dimension as i32) / self.dimension as f64
    }

    /// `integral over R^N of f(|x|) dx = sigma_N * sum_i w_i f(r_i)`.
    pub fn integrate(&self, samples: &[f64]) -> Result<f64> {
        if samples.len() != self.nodes.len() {
            return Err(NlsError::LengthMismatch {
                expected: self.nodes.len(),
                got: samples.len(),
            });
        }
        let mut acc = 0.0;
        for (w, f) in self.weights.iter().zip(samples) {
            acc += w * f;
        }
        Ok(self.sphere * acc)
    }

    /// Integral over the exterior region `{ |x| >= r_k }`, where `k = from`.
    ///
    /// The sub-range quadrature is rebuilt with the same composite rule, so
    /// exterior integrals carry the same design order as full ones.
    pub fn integrate_tail(&self, from: usize, samples: &[f64]) -> Result<f64> {
        if samples.len() != self.nodes.len() {
            return Err(NlsError::LengthMismatch {
                expected: self.nodes.len(),
                got: samples.len(),
            });
        }
        if from + 3 > self.nodes.len() {
            return Err(NlsError::GridTooCoarse(format!(
                "tail from node {from} leaves fewer than 3 nodes"
            )));
        }
        let tail_weights = weighted_simpson_weights(&self.nodes[from..], self.spacing, self.dimension);
        let mut acc = 0.0;
        for (w, f) in tail_weights.iter().zip(&samples[from..]) {
            acc += w * f;
        }
        Ok(self.sphere * acc)
    }

    /// Index of the first node with `r_i >= r`, if any.
    pub fn node_at_or_above(&self, r: f64) -> Option<usize> {
        if r <= 0.0 {
            return Some(0);
        }
        if r > self.r_max {
            return None;
        }
        let i = (r / self.spacing).ceil() as usize;
        Some(i.min(self.nodes.len() - 1))
    }
}

/// Composite Simpson coefficients (times the spacing) against the measure
/// `r^{N-1} dr`. When the panel count is odd the last three panels use the
/// 3/8 rule; both pieces are exact for cubic integrands and keep all
/// coefficients positive.
fn weighted_simpson_weights(nodes: &[f64], spacing: f64, dimension: u32) -> Vec<f64> {
    let n = nodes.len();
    debug_assert!(n >= 3);
    let panels = n - 1;
    let mut coeff = vec![0.0_f64; n];
    let simpson_panels = if panels % 2 == 0 {
        panels
    } else if panels == 3 {
        0
    } else {
        panels - 3
    };
    let mut i = 0;
    while i + 2 <= simpson_panels {
        coeff[i] += spacing / 3.0;
        coeff[i + 1] += 4.0 * spacing / 3.0;
        coeff[i + 2] += spacing / 3.0;
        i += 2;
    }
    if simpson_panels < panels {
        // Closing 3/8 panel over the last four nodes.
        let j = simpson_panels;
        debug_assert_eq!(panels - simpson_panels, 3);
        coeff[j] += 3.0 * spacing / 8.0;
        coeff[j + 1] += 9.0 * spacing / 8.0;
        coeff[j + 2] += 9.0 * spacing / 8.0;
        coeff[j + 3] += 3.0 * spacing / 8.0;
    }
    let power = dimension as i32 - 1;
    coeff
        .iter()
        .zip(nodes)
        .map(|(c, r)| {
            if power == 0 {
                *c
            } else {
                c * r.powi(power)
            }
        })
        .collect()
}
