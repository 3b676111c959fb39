//! Conserved quantities of the flow and the sharp inequalities between them.
//!
//! For a field `u` and exponent `p` the report carries
//!
//! ```text
//! M = ||u||_2^2                    (mass)
//! G = ||grad u||_2^2
//! P = ||u||_{p+1}^{p+1}
//! E = G/2 - P/(p+1)                (energy)
//! ```
//!
//! plus the linear-momentum magnitude, which vanishes identically for radial
//! fields: `Im \int conj(u) grad u dx` integrates an odd function over the
//! sphere. Nonzero momenta enter only through [`report_from_scalars`] and are
//! removed by the Galilean reduction `E -> E - P^2/2M`, `G -> G - P^2/M`.

use serde::{Deserialize, Serialize};

use crate::classifier::critical_index;
use crate::error::{NlsError, Result};
use crate::field::RadialField;
use crate::groundstate::SharpConstants;

/// Snapshot of the conserved quantities of one field.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct InvariantReport {
    pub p: f64,
    pub dimension: u32,
    pub mass: f64,
    pub grad_sq: f64,
    /// `||u||_{p+1}^{p+1}`.
    pub power_integral: f64,
    pub energy: f64,
    pub momentum_mag: f64,
    /// `M^{1-s_c} E^{s_c}`; absent when the energy is negative (the
    /// fractional power is undefined there) or `s_c` leaves `(0, 1)`.
    pub product_me: Option<f64>,
    pub negative_energy: bool,
}

/// One-sided check of `||u||_{p+1}^{p+1} <= c ||grad u||^a ||u||^b`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GnCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`; nonnegative for every field, zero on the sharp family.
    pub margin: f64,
    /// Margin relative to the right-hand side.
    pub relative_margin: f64,
}

/// Exterior decay check
/// `||f||_{L^4(r>R)}^4 <= (2 / (sigma_N R^{N-1})) ||f||_{L^2(>R)}^3 ||grad f||_{L^2(>R)}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StraussCheck {
    /// First grid node at or above the requested radius.
    pub radius: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

fn me_product(mass: f64, energy: f64, s_c: f64) -> Option<f64> {
    if !(s_c > 0.0 && s_c < 1.0) || energy < 0.0 {
        None
    } else {
        Some(mass.powf(1.0 - s_c) * energy.powf(s_c))
    }
}

fn validate_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p > 1.0) {
        return Err(NlsError::InvalidParameter(format!(
            "nonlinearity exponent must be finite and > 1, got {p}"
        )));
    }
    Ok(())
}

/// Computes the invariant report of a radial field.
pub fn report(u: &RadialField, p: f64) -> Result<InvariantReport> {
    validate_p(p)?;
    let mass = u.mass()?;
    let grad_sq = u.gradient_sq()?;
    let power_integral = u.abs_power_integral(p + 1.0)?;
    let energy = 0.5 * grad_sq - power_integral / (p + 1.0);
    let dimension = u.grid().dimension();
    let s_c = critical_index(p, dimension);
    Ok(InvariantReport {
        p,
        dimension,
        mass,
        grad_sq,
        power_integral,
        energy,
        momentum_mag: 0.0,
        product_me: me_product(mass, energy, s_c),
        negative_energy: energy < 0.0,
    })
}

/// Builds a report from externally supplied scalars. The power integral is
/// reconstructed from the energy relation `P = (p+1)(G/2 - E)`.
pub fn report_from_scalars(
    p: f64,
    dimension: u32,
    mass: f64,
    energy: f64,
    grad_sq: f64,
    momentum_mag: f64,
) -> Result<InvariantReport> {
    validate_p(p)?;
    for (name, v) in [
        ("mass", mass),
        ("energy", energy),
        ("grad_sq", grad_sq),
        ("momentum_mag", momentum_mag),
    ] {
        if !v.is_finite() {
            return Err(NlsError::InvalidParameter(format!("{name} must be finite, got {v}")));
        }
    }
    if mass < 0.0 || grad_sq < 0.0 || momentum_mag < 0.0 {
        return Err(NlsError::InvalidParameter(
            "mass, grad_sq and momentum_mag must be nonnegative".into(),
        ));
    }
    if dimension == 0 {
        return Err(NlsError::InvalidParameter("dimension must be at least 1".into()));
    }
    let s_c = critical_index(p, dimension);
    Ok(InvariantReport {
        p,
        dimension,
        mass,
        grad_sq,
        power_integral: (p + 1.0) * (0.5 * grad_sq - energy),
        energy,
        momentum_mag,
        product_me: me_product(mass, energy, s_c),
        negative_energy: energy < 0.0,
    })
}

/// Removes the traveling component: in the frame moving with the center of
/// mass, `E' = E - P^2/2M` and `||grad u'||^2 = ||grad u||^2 - P^2/M`.
/// Idempotent; requires positive mass.
pub fn galilean_reduce(rep: &InvariantReport) -> Result<InvariantReport> {
    if !(rep.mass > 0.0) {
        return Err(NlsError::MassNotPositive(format!(
            "cannot remove momentum {} from a field of mass {}",
            rep.momentum_mag, rep.mass
        )));
    }
    let p2 = rep.momentum_mag * rep.momentum_mag;
    let energy = rep.energy - p2 / (2.0 * rep.mass);
    let grad_sq = rep.grad_sq - p2 / rep.mass;
    let s_c = critical_index(rep.p, rep.dimension);
    Ok(InvariantReport {
        grad_sq,
        energy,
        momentum_mag: 0.0,
        product_me: me_product(rep.mass, energy, s_c),
        negative_energy: energy < 0.0,
        ..*rep
    })
}

/// Evaluates the sharp interpolation inequality on a report. The exponents
/// are `a = N(p-1)/2` on the gradient norm and `b = 2 - (N-2)(p-1)/2` on the
/// mass norm.
pub fn check_gn(rep: &InvariantReport, constants: &SharpConstants) -> GnCheck {
    let n = rep.dimension as f64;
    let grad_exp = n * (rep.p - 1.0) / 2.0;
    let mass_exp = 2.0 - (n - 2.0) * (rep.p - 1.0) / 2.0;
    let rhs =
        constants.c_gn * rep.grad_sq.powf(grad_exp / 2.0) * rep.mass.powf(mass_exp / 2.0);
    let margin = rhs - rep.power_integral;
    GnCheck {
        lhs: rep.power_integral,
        rhs,
        margin,
        relative_margin: if rhs > 0.0 { margin / rhs } else { margin },
    }
}

/// Checks the exterior decay inequality at the first node >= `radius`.
///
/// The pointwise bound `f(r)^2 <= 2 r^{1-N} (M_{>r} G_{>r})^{1/2} / sigma_N`
/// (Cauchy-Schwarz on `f^2(r) = -2 \int_r^inf f f'`) integrates to
/// `||f||_{L^4(>R)}^4 <= (2 / (sigma_N R^{N-1})) M_{>R}^{3/2} G_{>R}^{1/2}`.
pub fn check_strauss(u: &RadialField, radius: f64) -> Result<StraussCheck> {
    let grid = u.grid();
    if grid.dimension() < 2 {
        return Err(NlsError::InvalidParameter(
            "exterior decay bound needs dimension >= 2".into(),
        ));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(NlsError::InvalidParameter(format!(
            "exterior radius must be finite and positive, got {radius}"
        )));
    }
    let idx = grid.node_at_or_above(radius).ok_or_else(|| {
        NlsError::InvalidParameter(format!(
            "exterior radius {radius} beyond grid extent {}",
            grid.r_max()
        ))
    })?;
    let r_eff = grid.nodes()[idx];

    let abs = u.abs_samples();
    let sq: Vec<f64> = abs.iter().map(|a| a * a).collect();
    let quart: Vec<f64> = sq.iter().map(|s| s * s).collect();
    let deriv = u.radial_derivative()?;
    let dsq: Vec<f64> = deriv.iter().map(|d| d.norm_sqr()).collect();

    let tail_mass = grid.integrate_tail(idx, &sq)?;
    let tail_grad = grid.integrate_tail(idx, &dsq)?;
    let lhs = grid.integrate_tail(idx, &quart)?;
    let n = grid.dimension() as f64;
    let rhs = 2.0 / (grid.sphere_constant() * r_eff.powf(n - 1.0))
        * tail_mass.powf(1.5)
        * tail_grad.sqrt();
    Ok(StraussCheck {
        radius: r_eff,
        lhs,
        rhs,
        margin: rhs - lhs,
    })
}

/// The coercive combination `8 ||grad u||^2 - 6 ||u||_{L^4}^4` driving the
/// variance convexity argument for the cubic equation on R^3. Zero on the
/// soliton family, positive below threshold, negative on blow-up paths.
pub fn convexity_bound(u: &RadialField) -> Result<f64> {
    let grad_sq = u.gradient_sq()?;
    let l4 = u.abs_power_integral(4.0)?;
    Ok(8.0 * grad_sq - 6.0 * l4)
}

/// The coercivity coefficient `c_delta` in
/// `8 ||grad u||^2 - 6 ||u||_{L^4}^4 >= c_delta ||grad u||^2`, valid for
/// fields with `M E <= (1 - delta) M[Q] E[Q]` below the gradient threshold.
///
/// Writing `y = ||u|| ||grad u|| / (||Q|| ||grad Q||)`, the mass-energy cap
/// forces `3 y^2 - 2 y^3 <= 1 - delta`; the sharp interpolation bound then
/// leaves at least `8 (1 - y)` of the gradient term. The cubic is inverted
/// by bisection on `[0, 1]`.
pub fn convexity_coefficient(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(NlsError::InvalidParameter(format!(
            "coercivity gap must lie in (0, 1], got {delta}"
        )));
    }
    let target = 1.0 - delta;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let g = 3.0 * mid * mid - 2.0 * mid * mid * mid;
        if g < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(8.0 * (1.0 - 0.5 * (lo + hi)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groundstate::solve_ground_state;
    use crate::grid::RadialGrid;
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use std::sync::Arc;

    fn ground_state() -> crate::groundstate::GroundState {
        let grid = Arc::new(RadialGrid::uniform(3, 40.0, 4096).unwrap());
        solve_ground_state(3.0, 1.0, &grid, 1e-12).unwrap()
    }

    #[test]
    fn report_on_gaussian_matches_closed_forms() {
        let grid = Arc::new(RadialGrid::uniform(3, 12.5, 2001).unwrap());
        let u = RadialField::from_real_fn(Arc::new((*grid).clone()), |r| (-r * r).exp());
        let rep = report(&u, 3.0).unwrap();
        let half_pi = std::f64::consts::PI / 2.0;
        assert_relative_eq!(rep.mass, half_pi.powf(1.5), max_relative = 1e-12);
        assert_relative_eq!(rep.grad_sq, 3.0 * half_pi.powf(1.5), max_relative = 1e-8);
        // ||u||_4^4 = (pi/4)^{3/2} for exp(-r^2).
        assert_relative_eq!(
            rep.power_integral,
            (std::f64::consts::PI / 4.0).powf(1.5),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            rep.energy,
            0.5 * rep.grad_sq - 0.25 * rep.power_integral,
            max_relative = 1e-14
        );
        assert_eq!(rep.momentum_mag, 0.0);
        assert!(!rep.negative_energy);
        assert!(rep.product_me.is_some());
    }

    #[test]
    fn scalar_report_reconstructs_power_integral() {
        let gs = ground_state();
        let rep = report(gs.profile(), 3.0).unwrap();
        let scalar = report_from_scalars(3.0, 3, rep.mass, rep.energy, rep.grad_sq, 0.0).unwrap();
        assert_relative_eq!(scalar.power_integral, rep.power_integral, max_relative = 1e-12);
        assert_eq!(scalar.product_me.is_some(), rep.product_me.is_some());
    }

    #[test]
    fn negative_energy_suppresses_product() {
        let rep = report_from_scalars(3.0, 3, 2.0, -0.5, 1.0, 0.0).unwrap();
        assert!(rep.negative_energy);
        assert!(rep.product_me.is_none());
    }

    #[test]
    fn galilean_reduction_undoes_a_boost() {
        // Boosting a zero-momentum state by velocity v shifts
        // P -> v M, G -> G + v^2 M, E -> E + v^2 M / 2.
        let (m, e0, g0, v) = (2.3, 0.7, 1.9, 1.7);
        let boosted = report_from_scalars(
            3.0,
            3,
            m,
            e0 + 0.5 * v * v * m,
            g0 + v * v * m,
            v * m,
        )
        .unwrap();
        let rest = galilean_reduce(&boosted).unwrap();
        assert_relative_eq!(rest.energy, e0, max_relative = 1e-12);
        assert_relative_eq!(rest.grad_sq, g0, max_relative = 1e-12);
        assert_eq!(rest.momentum_mag, 0.0);
        // Idempotent once the momentum is gone.
        let again = galilean_reduce(&rest).unwrap();
        assert_eq!(again.energy, rest.energy);
        assert_eq!(again.grad_sq, rest.grad_sq);
    }

    #[test]
    fn galilean_reduction_needs_mass() {
        let rep = report_from_scalars(3.0, 3, 0.0, 1.0, 1.0, 1.0).unwrap();
        assert!(galilean_reduce(&rep).is_err());
    }

    #[test]
    fn gn_is_sharp_on_the_soliton_scaling_family() {
        let gs = ground_state();
        let constants = crate::groundstate::sharp_constants(&gs);
        for amp in [0.4, 0.9, 1.0, 1.3] {
            let scaled = gs.profile().scaled(amp);
            let rep = report(&scaled, 3.0).unwrap();
            let check = check_gn(&rep, &constants);
            assert!(
                check.relative_margin.abs() < 1e-6,
                "amplitude {amp}: relative margin {:e}",
                check.relative_margin
            );
        }
    }

    #[test]
    fn gn_margin_positive_off_family() {
        let gs = ground_state();
        let constants = crate::groundstate::sharp_constants(&gs);
        let grid = Arc::new(RadialGrid::uniform(3, 40.0, 4096).unwrap());
        let u = RadialField::from_real_fn(grid, |r| 2.0 * (-r * r).exp());
        let rep = report(&u, 3.0).unwrap();
        let check = check_gn(&rep, &constants);
        assert!(check.margin > 0.0);
        assert!(check.relative_margin > 0.01);
    }

    #[test]
    fn exterior_decay_bound_holds_on_profiles() {
        let gs = ground_state();
        for radius in [2.0, 5.0, 10.0, 20.0] {
            let check = check_strauss(gs.profile(), radius).unwrap();
            assert!(
                check.margin >= 0.0,
                "radius {radius}: lhs {:e} rhs {:e}",
                check.lhs,
                check.rhs
            );
        }
        // Oscillatory complex field.
        let grid = Arc::new(RadialGrid::uniform(3, 30.0, 2001).unwrap());
        let u = RadialField::from_complex_fn(grid, |r| {
            Complex64::new((3.0 * r).cos(), (2.0 * r).sin()) * (-0.3 * r * r).exp()
        });
        let check = check_strauss(&u, 4.0).unwrap();
        assert!(check.margin >= 0.0);
    }

    #[test]
    fn exterior_decay_rejects_bad_radius() {
        let gs = ground_state();
        assert!(check_strauss(gs.profile(), -1.0).is_err());
        assert!(check_strauss(gs.profile(), 1e9).is_err());
    }

    #[test]
    fn convexity_bound_vanishes_on_the_soliton() {
        let gs = ground_state();
        let value = convexity_bound(gs.profile()).unwrap();
        // 8 G - 6 L4 = 24 M - 24 M = 0 on the profile.
        assert!(
            value.abs() < 1e-4 * gs.grad_sq(),
            "expected stationarity, got {value:e}"
        );
        // At 0.9 Q: 8 (0.81) (3M) - 6 (0.9)^4 (4M) = 3.6936 M.
        let shrunk = gs.profile().scaled(0.9);
        let v9 = convexity_bound(&shrunk).unwrap();
        assert_relative_eq!(v9, 3.6936 * gs.mass(), max_relative = 1e-4);
    }

    #[test]
    fn coercivity_coefficient_inverts_the_cubic() {
        for delta in [1e-3, 0.0946, 0.3, 0.7, 1.0] {
            let c = convexity_coefficient(delta).unwrap();
            let y = 1.0 - c / 8.0;
            assert_relative_eq!(3.0 * y * y - 2.0 * y * y * y, 1.0 - delta, epsilon = 1e-10);
        }
        assert_relative_eq!(convexity_coefficient(1.0).unwrap(), 8.0, epsilon = 1e-9);
        let small = convexity_coefficient(1e-3).unwrap();
        let large = convexity_coefficient(0.5).unwrap();
        assert!(small < large);
        assert!(convexity_coefficient(0.0).is_err());
        assert!(convexity_coefficient(1.5).is_err());
    }

    #[test]
    fn virial_combination_matches_energy_identity() {
        // 24 E - 4 G = 8 G - 6 L4 is an algebraic identity at p = 3, N = 3.
        let gs = ground_state();
        let u = gs.profile().scaled(1.2);
        let rep = report(&u, 3.0).unwrap();
        let lhs = 24.0 * rep.energy - 4.0 * rep.grad_sq;
        let rhs = convexity_bound(&u).unwrap();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-10);
    }

    mod galilean_properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(256))]

            // Boosting rest-frame scalars by v and reducing recovers them,
            // and the reduction is a projection (applying twice is a no-op).
            #[test]
            fn reduction_inverts_any_boost(
                mass in 1e-3..1e3_f64,
                grad0 in 0.0..1e3_f64,
                efrac in -3.0..1.0_f64,
                v in -20.0..20.0_f64,
            ) {
                let e0 = efrac * 0.5 * grad0;
                let boosted = report_from_scalars(
                    3.0,
                    3,
                    mass,
                    e0 + 0.5 * v * v * mass,
                    grad0 + v * v * mass,
                    (v * mass).abs(),
                ).unwrap();
                let rest = galilean_reduce(&boosted).unwrap();
                prop_assert!((rest.grad_sq - grad0).abs() <= 1e-9 * (grad0 + v * v * mass));
                prop_assert!((rest.energy - e0).abs() <= 1e-9 * (e0.abs() + 0.5 * v * v * mass));
                prop_assert_eq!(rest.momentum_mag, 0.0);
                let again = galilean_reduce(&rest).unwrap();
                prop_assert_eq!(again.energy.to_bits(), rest.energy.to_bits());
                prop_assert_eq!(again.grad_sq.to_bits(), rest.grad_sq.to_bits());
            }
        }
    }
}
