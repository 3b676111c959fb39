//! Dichotomy classification of initial data against the ground-state
//! thresholds.
//!
//! For intercritical exponents (`0 < s_c < 1`, `s_c = N/2 - 2/(p-1)`) the
//! scale-invariant products
//!
//! ```text
//! M[u]^{1-s_c} E[u]^{s_c}          vs  M[Q]^{1-s_c} E[Q]^{s_c}
//! ||u||^{1-s_c} ||grad u||^{s_c}   vs  ||Q||^{1-s_c} ||grad Q||^{s_c}
//! ```
//!
//! split the below-threshold region in two: data starting below the gradient
//! line stays there and scatters, data starting above blows up (granted
//! decay: finite variance or radial symmetry). Negative energy forces
//! blow-up outright. On the threshold itself, or outside the intercritical
//! window, the classification is silent.

use serde::{Deserialize, Serialize};

use crate::error::{NlsError, Result};
use crate::groundstate::SharpConstants;
use crate::invariants::{galilean_reduce, InvariantReport};

/// `s_c = N/2 - 2/(p-1)`: the Sobolev index whose homogeneous norm is
/// invariant under the natural scaling of the equation.
pub fn critical_index(p: f64, dimension: u32) -> f64 {
    dimension as f64 / 2.0 - 2.0 / (p - 1.0)
}

/// Predicted long-time behavior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Category {
    GlobalScattersPredicted,
    BlowupPredicted,
    NegativeEnergyBlowup,
    AtThreshold,
    OutsideTheory,
}

impl std::fmt::Display for Category {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Category::GlobalScattersPredicted => "GLOBAL_SCATTERS_PREDICTED",
            Category::BlowupPredicted => "BLOWUP_PREDICTED",
            Category::NegativeEnergyBlowup => "NEGATIVE_ENERGY_BLOWUP",
            Category::AtThreshold => "AT_THRESHOLD",
            Category::OutsideTheory => "OUTSIDE_THEORY",
        };
        f.write_str(s)
    }
}

/// Hypotheses supplied about the data, plus the tie tolerance deciding when
/// a margin is too small to call.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ClassifyOptions {
    /// Remove the traveling component before comparing (the thresholds are
    /// stated for zero-momentum data).
    pub apply_galilean: bool,
    /// The data is radially symmetric.
    pub radial: bool,
    /// `|x| u` is square-integrable.
    pub finite_variance: bool,
    /// Relative half-width of the "too close to call" band around each
    /// threshold.
    pub tie_tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            apply_galilean: true,
            radial: false,
            finite_variance: false,
            tie_tol: 1e-6,
        }
    }
}

/// The raw quantities behind a verdict.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Witnesses {
    pub mass: f64,
    pub energy: f64,
    pub product_me: Option<f64>,
    pub threshold_me: f64,
    pub grad_product: f64,
    pub threshold_grad: f64,
}

/// Outcome of a classification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdict {
    pub category: Category,
    pub s_c: f64,
    /// `(product_me - threshold) / threshold`; `None` for negative energy.
    pub me_margin: Option<f64>,
    /// `(grad_product - threshold) / threshold`; `None` only when `s_c`
    /// leaves the window and no threshold exists.
    pub grad_margin: Option<f64>,
    /// For blow-up verdicts: whether the supplied hypotheses actually carry
    /// the finite-time conclusion. `None` for non-blow-up verdicts.
    pub blowup_hypothesis_met: Option<bool>,
    pub witnesses: Witnesses,
    pub notes: Vec<String>,
}

/// Whether the supplied decay hypotheses support the finite-time blow-up
/// conclusion. Radial symmetry substitutes for finite variance only in the
/// truncated-variance window `p < 5`.
fn blowup_hypothesis(rep: &InvariantReport, opts: &ClassifyOptions) -> (bool, Vec<String>) {
    let mut notes = Vec::new();
    let radial_ok = opts.radial && rep.p < 5.0;
    if opts.radial && rep.p >= 5.0 && !opts.finite_variance {
        notes.push(
            "radial symmetry alone does not close the truncated-variance argument for p >= 5"
                .to_string(),
        );
    }
    let met = opts.finite_variance || radial_ok;
    if !met {
        notes.push(
            "without finite variance or radial decay the conclusion weakens to gradient growth \
             along a time sequence"
                .to_string(),
        );
    }
    (met, notes)
}

/// Classifies one report against the thresholds of its `(p, N)` pair.
pub fn classify(
    rep: &InvariantReport,
    constants: &SharpConstants,
    opts: &ClassifyOptions,
) -> Result<Verdict> {
    if !(opts.tie_tol.is_finite() && opts.tie_tol >= 0.0) {
        return Err(NlsError::InvalidParameter(format!(
            "tie tolerance must be finite and nonnegative, got {}",
            opts.tie_tol
        )));
    }
    if rep.p != constants.p || rep.dimension != constants.dimension {
        return Err(NlsError::InvalidParameter(format!(
            "constants belong to (p, N) = ({}, {}) but the report is for ({}, {})",
            constants.p, constants.dimension, rep.p, rep.dimension
        )));
    }

    let rep = if opts.apply_galilean && rep.momentum_mag > 0.0 {
        galilean_reduce(rep)?
    } else {
        *rep
    };

    let s_c = critical_index(rep.p, rep.dimension);
    let grad_product =
        rep.grad_sq.max(0.0).powf(s_c / 2.0) * rep.mass.max(0.0).powf((1.0 - s_c) / 2.0);
    let mut witnesses = Witnesses {
        mass: rep.mass,
        energy: rep.energy,
        product_me: rep.product_me,
        threshold_me: constants.threshold_me,
        grad_product,
        threshold_grad: constants.threshold_grad,
    };

    if !(s_c > 0.0 && s_c < 1.0) {
        return Ok(Verdict {
            category: Category::OutsideTheory,
            s_c,
            me_margin: None,
            grad_margin: None,
            blowup_hypothesis_met: None,
            witnesses,
            notes: vec![format!(
                "critical index {s_c} outside the intercritical window (0, 1)"
            )],
        });
    }

    // The gradient line is meaningful for every verdict below, so report
    // its margin unconditionally.
    let grad_margin = (grad_product - constants.threshold_grad) / constants.threshold_grad;

    if rep.negative_energy {
        let (met, notes) = blowup_hypothesis(&rep, opts);
        return Ok(Verdict {
            category: Category::NegativeEnergyBlowup,
            s_c,
            me_margin: None,
            grad_margin: Some(grad_margin),
            blowup_hypothesis_met: Some(met),
            witnesses,
            notes,
        });
    }

    let product_me = rep
        .product_me
        .expect("nonnegative energy in the intercritical window always has a product");
    witnesses.product_me = Some(product_me);
    let me_margin = (product_me - constants.threshold_me) / constants.threshold_me;

    if me_margin.abs() <= opts.tie_tol {
        return Ok(Verdict {
            category: Category::AtThreshold,
            s_c,
            me_margin: Some(me_margin),
            grad_margin: Some(grad_margin),
            blowup_hypothesis_met: None,
            witnesses,
            notes: vec![
                "mass-energy product within the tie band of the threshold; the dichotomy is \
                 silent here"
                    .to_string(),
            ],
        });
    }

    if me_margin > 0.0 {
        return Ok(Verdict {
            category: Category::OutsideTheory,
            s_c,
            me_margin: Some(me_margin),
            grad_margin: Some(grad_margin),
            blowup_hypothesis_met: None,
            witnesses,
            notes: vec![
                "mass-energy product above the ground-state threshold; the dichotomy does not \
                 apply"
                    .to_string(),
            ],
        });
    }

    // Strictly below the mass-energy threshold: the gradient line decides,
    // and the flow cannot cross it.
    if grad_margin.abs() <= opts.tie_tol {
        return Ok(Verdict {
            category: Category::AtThreshold,
            s_c,
            me_margin: Some(me_margin),
            grad_margin: Some(grad_margin),
            blowup_hypothesis_met: None,
            witnesses,
            notes: vec![
                "gradient product within the tie band of a line that is unreachable below the \
                 threshold; the inputs are too noisy to classify"
                    .to_string(),
            ],
        });
    }

    if grad_margin < 0.0 {
        let mut notes = Vec::new();
        if !opts.radial {
            notes.push(
                "global existence follows for any data; the scattering half is proved here \
                 under radial symmetry"
                    .to_string(),
            );
        }
        Ok(Verdict {
            category: Category::GlobalScattersPredicted,
            s_c,
            me_margin: Some(me_margin),
            grad_margin: Some(grad_margin),
            blowup_hypothesis_met: None,
            witnesses,
            notes,
        })
    } else {
        let (met, notes) = blowup_hypothesis(&rep, opts);
        Ok(Verdict {
            category: Category::BlowupPredicted,
            s_c,
            me_margin: Some(me_margin),
            grad_margin: Some(grad_margin),
            blowup_hypothesis_met: Some(met),
            witnesses,
            notes,
        })
    }
}
