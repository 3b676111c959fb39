//! Bulk pipelines over many fields or reports.
//!
//! Each operation comes in two flavors: the default-named one is
//! data-parallel when the `parallel` feature is on (per-element work,
//! order-preserving, so results are bitwise identical to sequential),
//! and the `_seq` twin always runs on one thread.

use crate::classifier::{classify, ClassifyOptions, Verdict};
use crate::error::Result;
use crate::field::RadialField;
use crate::groundstate::SharpConstants;
use crate::invariants::{check_gn, report, InvariantReport};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Invariant reports for a batch of fields.
pub fn reports(fields: &[RadialField], p: f64) -> Vec<Result<InvariantReport>> {
    #[cfg(feature = "parallel")]
    let out = fields.par_iter().map(|u| report(u, p)).collect();
    #[cfg(not(feature = "parallel"))]
    let out = reports_seq(fields, p);
    out
}

pub fn reports_seq(fields: &[RadialField], p: f64) -> Vec<Result<InvariantReport>> {
    fields.iter().map(|u| report(u, p)).collect()
}

/// Relative interpolation margins, one per report. Nonnegative within
/// float error for every field, zero exactly on the extremizer ray.
pub fn gn_margins(reports: &[InvariantReport], constants: &SharpConstants) -> Vec<f64> {
    #[cfg(feature = "parallel")]
    let out = reports
        .par_iter()
        .map(|r| check_gn(r, constants).relative_margin)
        .collect();
    #[cfg(not(feature = "parallel"))]
    let out = gn_margins_seq(reports, constants);
    out
}

pub fn gn_margins_seq(reports: &[InvariantReport], constants: &SharpConstants) -> Vec<f64> {
    reports
        .iter()
        .map(|r| check_gn(r, constants).relative_margin)
        .collect()
}

/// Classifies a batch of reports against one set of sharp constants.
pub fn classify_many(
    reports: &[InvariantReport],
    constants: &SharpConstants,
    opts: &ClassifyOptions,
) -> Vec<Result<Verdict>> {
    #[cfg(feature = "parallel")]
    let out = reports
        .par_iter()
        .map(|r| classify(r, constants, opts))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let out = classify_many_seq(reports, constants, opts);
    out
}

pub fn classify_many_seq(
    reports: &[InvariantReport],
    constants: &SharpConstants,
    opts: &ClassifyOptions,
) -> Vec<Result<Verdict>> {
    reports
        .iter()
        .map(|r| classify(r, constants, opts))
        .collect()
}
