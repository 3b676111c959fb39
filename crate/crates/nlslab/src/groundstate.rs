//! Ground-state profiles of the focusing nonlinearity: the positive, radial,
//! decaying solution `Q` of
//!
//! ```text
//! -lambda Q + Q'' + (N-1) Q'/r + |Q|^{p-1} Q = 0,   Q'(0) = 0,
//! ```
//!
//! found by shooting on the central value `Q(0)`. Larger central values make
//! the profile cross zero; smaller ones make it turn back upward. Bisection
//! on that dichotomy pins `Q(0)`; past the last reliable node the profile is
//! closed with the linearized far-field tail
//! `A exp(-sqrt(lambda) r) / r^{(N-1)/2}` matched by value.
//!
//! The solved profile carries the derived quantities used everywhere else:
//! the squared norms, the sharp interpolation constant of
//! `||u||_{p+1}^{p+1} <= c ||grad u||^{N(p-1)/2} ||u||^{2-(N-2)(p-1)/2}`
//! (attained at `Q`), and the scale-invariant threshold products
//! `M[Q]^{1-s_c} E[Q]^{s_c}` and `||grad Q||^{s_c} ||Q||^{1-s_c}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::classifier::critical_index;
use crate::error::{NlsError, Result};
use crate::field::RadialField;
use crate::grid::RadialGrid;

/// Bisection budget for the shooting parameter.
const MAX_BISECTIONS: usize = 200;
/// Default relative tolerance on the shooting parameter.
pub const DEFAULT_SHOOTING_TOL: f64 = 1e-12;
/// Target sub-step for the RK4 integrator; the grid spacing is subdivided
/// until it drops below this, so coarse grids still integrate accurately.
const TARGET_ODE_STEP: f64 = 4.0e-3;
/// The far-field tail replaces the integrated profile once it has decayed by
/// this factor relative to `Q(0)`; by then the unstable shooting mode has not
/// yet contaminated the trajectory at the default tolerance.
const GRAFT_DECAY: f64 = 1e-6;

/// Solved ground state with its derived constants.
#[derive(Debug, Clone)]
pub struct GroundState {
    profile: RadialField,
    derivative: Vec<f64>,
    p: f64,
    normalization: f64,
    s_c: f64,
    q0: f64,
    mass: f64,
    grad_sq: f64,
    power_integral: f64,
    energy: f64,
    c_gn: f64,
    threshold_me: f64,
    threshold_grad: f64,
    bracket_rel_width: f64,
    graft_radius: Option<f64>,
}

/// Residuals of the two integral identities satisfied by the exact profile,
/// relative to the magnitude of the largest participating term:
///
/// * multiplier `Q`:        `lambda M + G = P`
/// * multiplier `x . grad Q`: `lambda N M / 2 + (N/2 - 1) G = N P / (p+1)`
///
/// with `M = ||Q||_2^2`, `G = ||grad Q||_2^2`, `P = ||Q||_{p+1}^{p+1}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PohozhaevReport {
    pub multiplier_residual: f64,
    pub dilation_residual: f64,
    pub grad_over_mass: f64,
    pub power_over_mass: f64,
}

/// The sharp constants derived from a solved profile, tagged with the
/// exponent/dimension pair they belong to.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SharpConstants {
    pub p: f64,
    pub dimension: u32,
    pub c_gn: f64,
    pub threshold_me: f64,
    pub threshold_grad: f64,
}

/// Serializable summary (the profile itself is persisted separately).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundStateSummary {
    pub p: f64,
    pub dimension: u32,
    pub normalization: f64,
    pub s_c: f64,
    pub q0: f64,
    pub mass: f64,
    pub grad_sq: f64,
    pub power_integral: f64,
    pub energy: f64,
    pub c_gn: f64,
    pub threshold_me: f64,
    pub threshold_grad: f64,
    pub bracket_rel_width: f64,
    pub graft_radius: Option<f64>,
}

impl GroundState {
    pub fn profile(&self) -> &RadialField {
        &self.profile
    }

    /// `dQ/dr` at the nodes, from the shooting integration (not a stencil).
    pub fn derivative(&self) -> &[f64] {
        &self.derivative
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn dimension(&self) -> u32 {
        self.profile.grid().dimension()
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn s_c(&self) -> f64 {
        self.s_c
    }

    pub fn q0(&self) -> f64 {
        self.q0
    }

    /// `M[Q] = ||Q||_2^2`.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// `||grad Q||_2^2`.
    pub fn grad_sq(&self) -> f64 {
        self.grad_sq
    }

    /// `||Q||_{p+1}^{p+1}`.
    pub fn power_integral(&self) -> f64 {
        self.power_integral
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn c_gn(&self) -> f64 {
        self.c_gn
    }

    /// `M[Q]^{1-s_c} E[Q]^{s_c}`.
    pub fn threshold_me(&self) -> f64 {
        self.threshold_me
    }

    /// `||grad Q||^{s_c} ||Q||^{1-s_c}`.
    pub fn threshold_grad(&self) -> f64 {
        self.threshold_grad
    }

    pub fn bracket_rel_width(&self) -> f64 {
        self.bracket_rel_width
    }

    pub fn graft_radius(&self) -> Option<f64> {
        self.graft_radius
    }

    pub fn summary(&self) -> GroundStateSummary {
        GroundStateSummary {
            p: self.p,
            dimension: self.dimension(),
            normalization: self.normalization,
            s_c: self.s_c,
            q0: self.q0,
            mass: self.mass,
            grad_sq: self.grad_sq,
            power_integral: self.power_integral,
            energy: self.energy,
            c_gn: self.c_gn,
            threshold_me: self.threshold_me,
            threshold_grad: self.threshold_grad,
            bracket_rel_width: self.bracket_rel_width,
            graft_radius: self.graft_radius,
        }
    }
}

/// Recomputes the sharp constants from the stored norms.
pub fn sharp_constants(gs: &GroundState) -> SharpConstants {
    SharpConstants {
        p: gs.p,
        dimension: gs.dimension(),
        c_gn: gs.c_gn,
        threshold_me: gs.threshold_me,
        threshold_grad: gs.threshold_grad,
    }
}

/// Evaluates the two integral identities on the solved profile.
pub fn verify_pohozhaev(gs: &GroundState) -> PohozhaevReport {
    let lambda = gs.normalization;
    let n = gs.dimension() as f64;
    let p = gs.p;
    let (m, g, pw) = (gs.mass, gs.grad_sq, gs.power_integral);

    let t1 = lambda * m;
    let multiplier_residual = (t1 + g - pw).abs() / t1.abs().max(g.abs()).max(pw.abs());

    let d1 = lambda * n * m / 2.0;
    let d2 = (n / 2.0 - 1.0) * g;
    let d3 = n * pw / (p + 1.0);
    let dilation_residual = (d1 + d2 - d3).abs() / d1.abs().max(d2.abs()).max(d3.abs());

    PohozhaevReport {
        multiplier_residual,
        dilation_residual,
        grad_over_mass: g / m,
        power_over_mass: pw / m,
    }
}

/// Solves the ground-state profile on the given grid.
///
/// `normalization` is the coefficient `lambda > 0` of the linear term; the
/// scale-invariant constants (`c_gn`, the threshold products) do not depend
/// on it. Rejects exponent/dimension pairs whose critical index
/// `s_c = N/2 - 2/(p-1)` falls outside the open window `(0, 1)`.
pub fn solve_ground_state(
    p: f64,
    normalization: f64,
    grid: &Arc<RadialGrid>,
    tol: f64,
) -> Result<GroundState> {
    if !(p.is_finite() && p > 1.0) {
        return Err(NlsError::InvalidParameter(format!(
            "nonlinearity exponent must be finite and > 1, got {p}"
        )));
    }
    if !(normalization.is_finite() && normalization > 0.0) {
        return Err(NlsError::InvalidParameter(format!(
            "normalization must be finite and positive, got {normalization}"
        )));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(NlsError::InvalidParameter(format!(
            "shooting tolerance must be finite and positive, got {tol}"
        )));
    }
    let dimension = grid.dimension();
    let s_c = critical_index(p, dimension);
    if !(s_c > 0.0 && s_c < 1.0) {
        return Err(NlsError::CriticalIndexOutOfRange { p, dimension, s_c });
    }

    let shooter = Shooter::new(p, dimension, normalization, grid);

    // Zero-energy amplitude of the conserved part: profiles starting at or
    // below it always turn back up, so it brackets Q(0) from below.
    let a_floor = (normalization * (p + 1.0) / 2.0).powf(1.0 / (p - 1.0));
    let mut lo = a_floor;
    let mut hi = None;
    let mut step = a_floor;
    for _ in 0..64 {
        let candidate = lo + step;
        match shooter.classify(candidate) {
            Shot::High => {
                hi = Some(candidate);
                break;
            }
            Shot::Low => lo = candidate,
        }
        step *= 1.5;
    }
    let mut hi = hi.ok_or_else(|| {
        NlsError::BracketNotFound(format!(
            "no zero crossing above the floor amplitude {a_floor}"
        ))
    })?;

    let mut converged = false;
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Floating-point exhaustion: the bracket cannot shrink further.
            break;
        }
        match shooter.classify(mid) {
            Shot::High => hi = mid,
            Shot::Low => lo = mid,
        }
        if (hi - lo) <= tol * hi {
            converged = true;
            break;
        }
    }
    if !converged && (hi - lo) > tol * hi {
        return Err(NlsError::NotConverged(format!(
            "shooting bracket width {:.3e} above tolerance {:.3e} after {MAX_BISECTIONS} bisections",
            (hi - lo) / hi,
            tol
        )));
    }

    let q0 = 0.5 * (lo + hi);
    let (values, derivative, graft_radius) = shooter.trace(q0);

    let profile_values: Vec<Complex64> = values.iter().map(|&q| Complex64::new(q, 0.0)).collect();
    let profile = RadialField::new(grid.clone(), profile_values)?;

    let mass_samples: Vec<f64> = values.iter().map(|q| q * q).collect();
    let mass = grid.integrate(&mass_samples)?;
    let grad_samples: Vec<f64> = derivative.iter().map(|w| w * w).collect();
    let grad_sq = grid.integrate(&grad_samples)?;
    let power_samples: Vec<f64> = values.iter().map(|q| q.abs().powf(p + 1.0)).collect();
    let power_integral = grid.integrate(&power_samples)?;
    let energy = 0.5 * grad_sq - power_integral / (p + 1.0);

    let nd = dimension as f64;
    let grad_exp = nd * (p - 1.0) / 2.0;
    let mass_exp = 2.0 - (nd - 2.0) * (p - 1.0) / 2.0;
    let c_gn = power_integral / (grad_sq.powf(grad_exp / 2.0) * mass.powf(mass_exp / 2.0));
    let threshold_me = mass.powf(1.0 - s_c) * energy.powf(s_c);
    let threshold_grad = grad_sq.powf(s_c / 2.0) * mass.powf((1.0 - s_c) / 2.0);

    Ok(GroundState {
        profile,
        derivative,
        p,
        normalization,
        s_c,
        q0,
        mass,
        grad_sq,
        power_integral,
        energy,
        c_gn,
        threshold_me,
        threshold_grad,
        bracket_rel_width: (hi - lo) / hi,
        graft_radius,
    })
}

/// Outcome of one shot: the profile crossed zero (`High`, central value too
/// large) or turned back upward (`Low`, too small).
#[derive(Debug, Clone, Copy, PartialEq)]
enum Shot {
    High,
    Low,
}

struct Shooter<'a> {
    p: f64,
    lambda: f64,
    dim_minus_one: f64,
    grid: &'a RadialGrid,
    substeps: usize,
}

impl<'a> Shooter<'a> {
    fn new(p: f64, dimension: u32, lambda: f64, grid: &'a RadialGrid) -> Self {
        let substeps = (grid.spacing() / TARGET_ODE_STEP).ceil().max(1.0) as usize;
        Shooter {
            p,
            lambda,
            dim_minus_one: (dimension - 1) as f64,
            grid,
            substeps,
        }
    }

    /// `q'' = lambda q - |q|^{p-1} q - (N-1) q' / r`, as a first-order system.
    #[inline]
    fn rhs(&self, r: f64, q: f64, w: f64) -> (f64, f64) {
        let nonlinear = q.abs().powf(self.p - 1.0) * q;
        (w, self.lambda * q - nonlinear - self.dim_minus_one * w / r)
    }

    #[inline]
    fn rk4(&self, r: f64, h: f64, q: &mut f64, w: &mut f64) {
        let (k1q, k1w) = self.rhs(r, *q, *w);
        let (k2q, k2w) = self.rhs(r + 0.5 * h, *q + 0.5 * h * k1q, *w + 0.5 * h * k1w);
        let (k3q, k3w) = self.rhs(r + 0.5 * h, *q + 0.5 * h * k2q, *w + 0.5 * h * k2w);
        let (k4q, k4w) = self.rhs(r + h, *q + h * k3q, *w + h * k3w);
        *q += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        *w += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
    }

    /// Series start near the origin where the `(N-1)/r` term is singular:
    /// `q = a + c2 r^2 + c4 r^4 + O(r^6)` from radial regularity.
    #[inline]
    fn series(&self, a: f64, r: f64) -> (f64, f64) {
        let n = self.dim_minus_one + 1.0;
        let ap = a.abs().powf(self.p - 1.0);
        let c2 = (self.lambda * a - ap * a) / (2.0 * n);
        let c4 = (self.lambda - self.p * ap) * c2 / (4.0 * (n + 2.0));
        let r2 = r * r;
        (a + c2 * r2 + c4 * r2 * r2, 2.0 * c2 * r + 4.0 * c4 * r * r2)
    }

    /// Integrates outward until the shot classifies itself. An unclassified
    /// arrival at `r_max` is decided by the far-field mismatch against the
    /// linearized tail log-derivative `-sqrt(lambda) - (N-1)/(2r)`.
    fn classify(&self, a: f64) -> Shot {
        let h = self.grid.spacing() / self.substeps as f64;
        let (mut q, mut w) = self.series(a, h);
        let mut r = h;
        let steps = (self.grid.len() - 1) * self.substeps;
        for _ in 1..steps {
            if q <= 0.0 {
                return Shot::High;
            }
            if w > 0.0 || q > a {
                return Shot::Low;
            }
            if !q.is_finite() || !w.is_finite() {
                return Shot::Low;
            }
            self.rk4(r, h, &mut q, &mut w);
            r += h;
        }
        if q <= 0.0 {
            return Shot::High;
        }
        let tail_slope = -self.lambda.sqrt() - self.dim_minus_one / (2.0 * r);
        if w - tail_slope * q > 0.0 {
            Shot::Low
        } else {
            Shot::High
        }
    }

    /// Final integration storing `Q` and `Q'` at the grid nodes, with the
    /// far-field tail grafted past the last reliable node.
    fn trace(&self, a: f64) -> (Vec<f64>, Vec<f64>, Option<f64>) {
        let nodes = self.grid.nodes();
        let n = nodes.len();
        let h = self.grid.spacing() / self.substeps as f64;
        let beta = self.dim_minus_one / 2.0;
        let sqrt_lambda = self.lambda.sqrt();

        let mut values = vec![0.0_f64; n];
        let mut derivative = vec![0.0_f64; n];
        values[0] = a;
        derivative[0] = 0.0;

        let mut graft_index = None;
        let (mut q, mut w) = self.series(a, h);
        let mut r = h;
        let mut sub = 1;
        let mut node = 1;
        loop {
            if sub % self.substeps == 0 {
                values[node] = q;
                derivative[node] = w;
                // Graft once decayed or once the trajectory misbehaves.
                if q <= GRAFT_DECAY * a || q <= 0.0 || w > 0.0 || !q.is_finite() {
                    graft_index = Some(node);
                    break;
                }
                node += 1;
                if node >= n {
                    break;
                }
            }
            self.rk4(r, h, &mut q, &mut w);
            r += h;
            sub += 1;
        }

        let graft_radius = match graft_index {
            Some(i) if i < n => {
                let r_star = nodes[i].max(h);
                let q_star = values[i].max(f64::MIN_POSITIVE);
                // A exp(-sqrt(lambda) r) / r^beta matched by value at r_star.
                let amp = q_star * (sqrt_lambda * r_star).exp() * r_star.powf(beta);
                for j in i..n {
                    let rj = nodes[j].max(h);
                    let tail = amp * (-sqrt_lambda * rj).exp() / rj.powf(beta);
                    values[j] = tail;
                    derivative[j] = tail * (-sqrt_lambda - beta / rj);
                }
                Some(r_star)
            }
            _ => None,
        };

        (values, derivative, graft_radius)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn default_grid() -> Arc<RadialGrid> {
        Arc::new(RadialGrid::uniform(3, 40.0, 4096).unwrap())
    }

    /// Symbolic oracle for the identity ratios: eliminating the power
    /// integral from the two multiplier identities gives
    /// `G/M = lambda * (N(p-1)/2) / ((p+1) - N(p-1)/2)` and `P/M = lambda + G/M`.
    fn expected_ratios(p: f64, n: f64, lambda: f64) -> (f64, f64) {
        let half_np = n * (p - 1.0) / 2.0;
        let grad_over_mass = lambda * half_np / ((p + 1.0) - half_np);
        (grad_over_mass, lambda + grad_over_mass)
    }

    #[test]
    fn cubic_3d_mass_matches_reference() {
        let gs = solve_ground_state(3.0, 1.0, &default_grid(), 1e-12).unwrap();
        // Reference value for the cubic profile on R^3.
        assert_relative_eq!(gs.mass(), 18.94, max_relative = 0.01);
        assert!(gs.energy() > 0.0);
        assert_relative_eq!(gs.s_c(), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn cubic_3d_central_value_regression() {
        // Converged central value from this solver at the default grid;
        // guards against silent regressions of the shooting pipeline.
        let gs = solve_ground_state(3.0, 1.0, &default_grid(), 1e-12).unwrap();
        assert_relative_eq!(gs.q0(), 4.337387, max_relative = 1e-5);
    }

    #[test]
    fn cubic_3d_identity_ratios() {
        let gs = solve_ground_state(3.0, 1.0, &default_grid(), 1e-12).unwrap();
        let rep = verify_pohozhaev(&gs);
        // G = 3 M and P = 4 M for (p, N, lambda) = (3, 3, 1).
        assert_relative_eq!(rep.grad_over_mass, 3.0, max_relative = 1e-6);
        assert_relative_eq!(rep.power_over_mass, 4.0, max_relative = 1e-6);
        assert!(rep.multiplier_residual < 1e-7);
        assert!(rep.dilation_residual < 1e-7);
        // Norm-product corollary: ||Q|| ||grad Q|| = sqrt(3) ||Q||^2.
        let lhs = gs.mass().sqrt() * gs.grad_sq().sqrt();
        assert_relative_eq!(lhs, 3.0_f64.sqrt() * gs.mass(), max_relative = 1e-6);
    }

    #[test]
    fn cubic_3d_sharp_constants() {
        let gs = solve_ground_state(3.0, 1.0, &default_grid(), 1e-12).unwrap();
        let sc = sharp_constants(&gs);
        // Reference value for the sharp interpolation constant on R^3.
        assert_relative_eq!(sc.c_gn, 0.0406, max_relative = 0.02);
        // Closed form from the identity ratios: c = 4 / (3 sqrt(3) ||Q||^2).
        let closed = 4.0 / (3.0 * 3.0_f64.sqrt() * gs.mass());
        assert_relative_eq!(sc.c_gn, closed, max_relative = 1e-6);
        // M E / ||Q||^4 = 1/2 and M E / (M G) = 1/6.
        let me = gs.mass() * gs.energy();
        assert_relative_eq!(me / (gs.mass() * gs.mass()), 0.5, max_relative = 1e-6);
        assert_relative_eq!(me / (gs.mass() * gs.grad_sq()), 1.0 / 6.0, max_relative = 1e-6);
    }

    #[test]
    fn one_dimensional_profile_matches_sech_closed_form() {
        // For N = 1 the profile is known in closed form:
        // Q(r) = (lambda (p+1)/2)^{1/(p-1)} sech^{2/(p-1)}((p-1) sqrt(lambda) r / 2).
        let p = 7.0;
        let lambda = 5.0 / 6.0; // 1 - s_c for s_c = 1/6
        let grid = Arc::new(RadialGrid::uniform(1, 30.0, 3001).unwrap());
        let gs = solve_ground_state(p, lambda, &grid, 1e-12).unwrap();
        let amp = (lambda * (p + 1.0) / 2.0).powf(1.0 / (p - 1.0));
        let rate = (p - 1.0) * lambda.sqrt() / 2.0;
        let q0 = gs.q0();
        let mut worst_inner = 0.0_f64;
        let mut worst_global = 0.0_f64;
        for (i, &r) in grid.nodes().iter().enumerate() {
            let exact = amp * (1.0 / (rate * r).cosh()).powf(2.0 / (p - 1.0));
            let diff = (gs.profile().values()[i].re - exact).abs() / q0;
            worst_global = worst_global.max(diff);
            if r <= 10.0 {
                worst_inner = worst_inner.max(diff);
            }
        }
        assert!(worst_inner < 1e-7, "inner mismatch {worst_inner:e}");
        assert!(worst_global < 1e-5, "global mismatch {worst_global:e}");
        assert_relative_eq!(q0, amp, max_relative = 1e-9);
    }

    #[test]
    fn general_pair_identity_ratios() {
        // (p, N) = (4, 3): s_c = 5/6, solved at normalization 1 - s_c.
        let lambda = 1.0 / 6.0;
        let grid = Arc::new(RadialGrid::uniform(3, 60.0, 4001).unwrap());
        let gs = solve_ground_state(4.0, lambda, &grid, 1e-12).unwrap();
        let rep = verify_pohozhaev(&gs);
        let (g_over_m, p_over_m) = expected_ratios(4.0, 3.0, lambda);
        assert_relative_eq!(rep.grad_over_mass, g_over_m, max_relative = 1e-4);
        assert_relative_eq!(rep.power_over_mass, p_over_m, max_relative = 1e-4);
        assert!(rep.multiplier_residual < 1e-3);
        assert!(rep.dilation_residual < 1e-3);
    }

    #[test]
    fn normalization_scaling_consistency() {
        // Q_lambda(r) = lambda^{1/(p-1)} Q_1(sqrt(lambda) r) maps between
        // normalizations, so M scales by lambda^{-s_c}, G by lambda^{1-s_c},
        // and every scale-invariant constant is unchanged.
        let grid = default_grid();
        let gs1 = solve_ground_state(3.0, 1.0, &grid, 1e-12).unwrap();
        let gs4 = solve_ground_state(3.0, 4.0, &grid, 1e-12).unwrap();
        assert_relative_eq!(gs4.mass(), gs1.mass() / 2.0, max_relative = 1e-6);
        assert_relative_eq!(gs4.grad_sq(), 2.0 * gs1.grad_sq(), max_relative = 1e-6);
        assert_relative_eq!(gs4.c_gn(), gs1.c_gn(), max_relative = 1e-6);
        assert_relative_eq!(gs4.threshold_me(), gs1.threshold_me(), max_relative = 1e-6);
        assert_relative_eq!(gs4.threshold_grad(), gs1.threshold_grad(), max_relative = 1e-6);
    }

    #[test]
    fn rejects_critical_endpoints() {
        let grid = default_grid();
        // Energy-critical: (3, 4) has s_c = 1.
        let g4 = Arc::new(RadialGrid::uniform(4, 20.0, 1001).unwrap());
        assert!(matches!(
            solve_ground_state(3.0, 1.0, &g4, 1e-12),
            Err(NlsError::CriticalIndexOutOfRange { .. })
        ));
        // Mass-subcritical: (2, 3) has s_c = -1/2.
        assert!(matches!(
            solve_ground_state(2.0, 1.0, &grid, 1e-12),
            Err(NlsError::CriticalIndexOutOfRange { .. })
        ));
        // Mass-critical exactly: p = 1 + 4/N.
        let g2 = Arc::new(RadialGrid::uniform(2, 20.0, 1001).unwrap());
        assert!(matches!(
            solve_ground_state(3.0, 1.0, &g2, 1e-12),
            Err(NlsError::CriticalIndexOutOfRange { .. })
        ));
    }

    #[test]
    fn rejects_bad_parameters() {
        let grid = default_grid();
        assert!(solve_ground_state(1.0, 1.0, &grid, 1e-12).is_err());
        assert!(solve_ground_state(3.0, -1.0, &grid, 1e-12).is_err());
        assert!(solve_ground_state(3.0, 1.0, &grid, 0.0).is_err());
    }

    #[test]
    fn unreachable_tolerance_reports_not_converged() {
        // Bisection exhausts floating point well above a 1e-300 relative
        // bracket width.
        let grid = Arc::new(RadialGrid::uniform(3, 40.0, 1024).unwrap());
        assert!(matches!(
            solve_ground_state(3.0, 1.0, &grid, 1e-300),
            Err(NlsError::NotConverged(_))
        ));
    }

    #[test]
    fn residuals_improve_under_refinement() {
        let coarse = Arc::new(RadialGrid::uniform(3, 40.0, 513).unwrap());
        let fine = Arc::new(RadialGrid::uniform(3, 40.0, 2049).unwrap());
        let res = |grid: &Arc<RadialGrid>| {
            let gs = solve_ground_state(3.0, 1.0, grid, 1e-12).unwrap();
            let rep = verify_pohozhaev(&gs);
            rep.multiplier_residual.max(rep.dilation_residual)
        };
        let rc = res(&coarse);
        let rf = res(&fine);
        assert!(rf < rc, "fine {rf:e} should beat coarse {rc:e}");
    }
}
