//! Spectral windows.
//!
//! Every window is a Meyer-type ramp built from one auxiliary polynomial, so
//! the partition identities hold up to rounding rather than up to a
//! discretisation error.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Radicands more negative than this indicate a broken window, not rounding.
const RADICAND_SLACK: f64 = 1e-14;

/// Breakpoints and smoothness of the window bank.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowParams {
    /// Degree of the auxiliary polynomial; odd, at least 3. Degree 2n+1 is C^n.
    pub meyer_degree: u32,
    /// Shear low-pass Ψ̂ equals 1 on [-flat, flat]^d ...
    pub lowpass_flat: f64,
    /// ... and vanishes outside [-cutoff, cutoff]^d.
    pub lowpass_cutoff: f64,
    /// Smooth scaling window φ̂: flat part.
    pub smooth_flat: f64,
    /// Smooth scaling window φ̂: cutoff.
    pub smooth_cutoff: f64,
    /// Radial dyadic low-pass Φ̂: flat radius.
    pub dyadic_flat: f64,
    /// Radial dyadic low-pass Φ̂: cutoff radius.
    pub dyadic_cutoff: f64,
}

impl Default for WindowParams {
    fn default() -> Self {
        WindowParams {
            meyer_degree: 7,
            lowpass_flat: 0.125,
            lowpass_cutoff: 0.25,
            smooth_flat: 0.0625,
            smooth_cutoff: 0.125,
            dyadic_flat: 0.5,
            dyadic_cutoff: 1.0,
        }
    }
}

/// Evaluates the auxiliary ramp of the default degree 7:
/// ν(t) = 35t⁴ − 84t⁵ + 70t⁶ − 20t⁷ on (0,1), clamped outside.
pub fn meyer_aux(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t.powi(4) * (35.0 + t * (-84.0 + t * (70.0 - 20.0 * t)))
    }
}

/// Binomial coefficients C(n+k, k) for k = 0..=n, the weights of the ramp
/// ν(t) = t^{n+1} Σ_k C(n+k,k)(1−t)^k of degree 2n+1.
fn ramp_weights(order: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(order + 1);
    let mut c = 1.0f64;
    for k in 0..=order {
        if k > 0 {
            c = c * (order + k) as f64 / k as f64;
        }
        w.push(c);
    }
    w
}

/// Which low-pass window to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LowpassKind {
    /// Ψ̂, the tensor low-pass of the cone-projected frame.
    ShearGlobal,
    /// Radial Φ̂ of the classical Littlewood-Paley decomposition.
    Dyadic,
    /// Tensor Φ̂ of the smooth frame.
    Smooth,
}

impl FromStr for LowpassKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shear_global" => Ok(LowpassKind::ShearGlobal),
            "dyadic" => Ok(LowpassKind::Dyadic),
            "smooth" => Ok(LowpassKind::Smooth),
            other => Err(Error::UnknownVariant(other.to_string())),
        }
    }
}

impl fmt::Display for LowpassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LowpassKind::ShearGlobal => "shear_global",
            LowpassKind::Dyadic => "dyadic",
            LowpassKind::Smooth => "smooth",
        })
    }
}

/// Closed support interval [lo, hi] of |argument| for a window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Support {
    pub lo: f64,
    pub hi: f64,
}

/// All spectral windows, evaluated pointwise.
#[derive(Clone, Debug)]
pub struct WindowBank {
    params: WindowParams,
    weights: Vec<f64>,
}

impl Default for WindowBank {
    fn default() -> Self {
        WindowBank::new(WindowParams::default()).expect("default window parameters are valid")
    }
}

impl WindowBank {
    pub fn new(params: WindowParams) -> Result<Self> {
        if params.meyer_degree < 3 || params.meyer_degree % 2 == 0 {
            return invalid(format!(
                "meyer_degree must be odd and at least 3, got {}",
                params.meyer_degree
            ));
        }
        let check = |name: &str, flat: f64, cut: f64, lo: f64, hi: f64| -> Result<()> {
            if !(flat >= lo && flat < cut && cut <= hi) {
                return invalid(format!(
                    "{name}: need {lo} <= flat < cutoff <= {hi}, got flat={flat}, cutoff={cut}"
                ));
            }
            Ok(())
        };
        check(
            "lowpass",
            params.lowpass_flat,
            params.lowpass_cutoff,
            0.125,
            0.25,
        )?;
        check(
            "smooth",
            params.smooth_flat,
            params.smooth_cutoff,
            0.0625,
            0.125,
        )?;
        check("dyadic", params.dyadic_flat, params.dyadic_cutoff, 0.5, 1.0)?;
        let order = ((params.meyer_degree - 1) / 2) as usize;
        Ok(WindowBank {
            weights: ramp_weights(order),
            params,
        })
    }

    pub fn params(&self) -> &WindowParams {
        &self.params
    }

    /// The auxiliary ramp ν of the configured degree.
    pub fn aux(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        let s = 1.0 - t;
        let mut acc = 0.0;
        for w in self.weights.iter().rev() {
            acc = acc * s + w;
        }
        acc * t.powi(self.weights.len() as i32)
    }

    /// cos(π/2·ν(t)) for the ramp parameter of |x| on [flat, cutoff].
    fn ramp_down(&self, x: f64, flat: f64, cutoff: f64) -> f64 {
        let a = x.abs();
        if a <= flat {
            1.0
        } else if a >= cutoff {
            0.0
        } else {
            (FRAC_PI_2 * self.aux((a - flat) / (cutoff - flat))).cos()
        }
    }

    /// sqrt(1 − ramp_down²), evaluated as a sine for accuracy.
    fn ramp_up(&self, x: f64, flat: f64, cutoff: f64) -> f64 {
        let a = x.abs();
        if a <= flat {
            0.0
        } else if a >= cutoff {
            1.0
        } else {
            (FRAC_PI_2 * self.aux((a - flat) / (cutoff - flat))).sin()
        }
    }

    /// 1-D scaling window φ̂ of the smooth frame.
    pub fn smooth_phi_hat(&self, omega: f64) -> f64 {
        self.ramp_down(omega, self.params.smooth_flat, self.params.smooth_cutoff)
    }

    /// Radial profile ψ̂₁ with ψ̂₁²(ω) = φ̂²(ω/4) − φ̂²(ω).
    pub fn psi1_hat(&self, omega: f64) -> f64 {
        let outer = self.smooth_phi_hat(omega / 4.0);
        if outer == 0.0 {
            return 0.0;
        }
        let inner = self.smooth_phi_hat(omega);
        if inner == 0.0 {
            outer
        } else if outer == 1.0 {
            self.ramp_up(omega, self.params.smooth_flat, self.params.smooth_cutoff)
        } else {
            // Only reachable with overlapping ramps from custom breakpoints.
            (outer * outer - inner * inner).max(0.0).sqrt()
        }
    }

    /// Closure of the radial sum, sqrt(Σ_{j≥0} ψ̂₁²(4^{-j}ω)) = sqrt(1 − φ̂²(ω)).
    /// The finest scale of a finite frame uses this profile.
    pub fn psi1_tail(&self, omega: f64) -> f64 {
        self.ramp_up(omega, self.params.smooth_flat, self.params.smooth_cutoff)
    }

    /// Shear profile ψ̂₂(ω) = cos(π/2·ν(|ω|)) on [-1,1].
    pub fn psi2_hat(&self, omega: f64) -> f64 {
        self.ramp_down(omega, 0.0, 1.0)
    }

    /// Bump v of the smooth frame. Same profile as ψ̂₂; flat of order
    /// (meyer_degree − 1)/2 at the origin.
    pub fn v(&self, u: f64) -> f64 {
        self.psi2_hat(u)
    }

    /// Tensor low-pass Ψ̂ of the cone-projected frame.
    pub fn shear_lowpass(&self, xi: &[f64]) -> f64 {
        xi.iter()
            .map(|&x| self.ramp_down(x, self.params.lowpass_flat, self.params.lowpass_cutoff))
            .product()
    }

    /// Tensor scaling window Φ̂(ξ) = Π φ̂(ξ_i) of the smooth frame.
    pub fn smooth_big_phi_hat(&self, xi: &[f64]) -> f64 {
        xi.iter().map(|&x| self.smooth_phi_hat(x)).product()
    }

    fn smooth_big_phi_scaled(&self, xi: &[f64], scale: f64) -> f64 {
        xi.iter().map(|&x| self.smooth_phi_hat(x * scale)).product()
    }

    /// Corona window W(ξ) = sqrt(Φ̂²(ξ/4) − Φ̂²(ξ)).
    pub fn w(&self, xi: &[f64]) -> Result<f64> {
        let outer = self.smooth_big_phi_scaled(xi, 0.25);
        if outer == 0.0 {
            return Ok(0.0);
        }
        let inner = self.smooth_big_phi_hat(xi);
        sqrt_checked(outer * outer - inner * inner)
    }

    /// sqrt(1 − Φ̂²(ξ)): all coronas from one scale upward merged.
    pub fn w_tail(&self, xi: &[f64]) -> Result<f64> {
        let inner = self.smooth_big_phi_hat(xi);
        if inner == 0.0 {
            return Ok(1.0);
        }
        if xi.len() == 1 {
            return Ok(self.ramp_up(xi[0], self.params.smooth_flat, self.params.smooth_cutoff));
        }
        sqrt_checked(1.0 - inner * inner)
    }

    /// Radial dyadic low-pass Φ̂.
    pub fn dyadic_big_phi_hat(&self, xi: &[f64]) -> f64 {
        self.ramp_down(
            norm2(xi),
            self.params.dyadic_flat,
            self.params.dyadic_cutoff,
        )
    }

    /// Radial dyadic band window with φ̂²(ξ) = Φ̂²(ξ/2) − Φ̂²(ξ).
    pub fn dyadic_phi_hat(&self, xi: &[f64]) -> f64 {
        let r = norm2(xi);
        let (flat, cut) = (self.params.dyadic_flat, self.params.dyadic_cutoff);
        let outer = self.ramp_down(r / 2.0, flat, cut);
        if outer == 0.0 {
            return 0.0;
        }
        let inner = self.ramp_down(r, flat, cut);
        if inner == 0.0 {
            outer
        } else if outer == 1.0 {
            self.ramp_up(r, flat, cut)
        } else {
            (outer * outer - inner * inner).max(0.0).sqrt()
        }
    }

    /// sqrt(1 − Φ̂²(ξ)), the dyadic analogue of [`WindowBank::w_tail`].
    pub fn dyadic_tail(&self, xi: &[f64]) -> f64 {
        self.ramp_up(
            norm2(xi),
            self.params.dyadic_flat,
            self.params.dyadic_cutoff,
        )
    }

    pub fn eval_lowpass(&self, kind: LowpassKind, xi: &[f64]) -> f64 {
        match kind {
            LowpassKind::ShearGlobal => self.shear_lowpass(xi),
            LowpassKind::Dyadic => self.dyadic_big_phi_hat(xi),
            LowpassKind::Smooth => self.smooth_big_phi_hat(xi),
        }
    }

    pub fn psi1_support(&self) -> Support {
        Support {
            lo: self.params.smooth_flat,
            hi: 4.0 * self.params.smooth_cutoff,
        }
    }

    pub fn psi2_support(&self) -> Support {
        Support { lo: 0.0, hi: 1.0 }
    }

    pub fn lowpass_support(&self, kind: LowpassKind) -> Support {
        match kind {
            LowpassKind::ShearGlobal => Support {
                lo: 0.0,
                hi: self.params.lowpass_cutoff,
            },
            LowpassKind::Dyadic => Support {
                lo: 0.0,
                hi: self.params.dyadic_cutoff,
            },
            LowpassKind::Smooth => Support {
                lo: 0.0,
                hi: self.params.smooth_cutoff,
            },
        }
    }

    /// Support of the radial dyadic band window in |ξ|.
    pub fn dyadic_support(&self) -> Support {
        Support {
            lo: self.params.dyadic_flat,
            hi: 2.0 * self.params.dyadic_cutoff,
        }
    }
}

fn sqrt_checked(r: f64) -> Result<f64> {
    if r < -RADICAND_SLACK {
        return Err(Error::NegativeRadicand(r));
    }
    Ok(r.max(0.0).sqrt())
}

pub(crate) fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn bank() -> WindowBank {
        WindowBank::default()
    }

    #[test]
    fn aux_boundary_and_midpoint() {
        assert_eq!(meyer_aux(0.0), 0.0);
        assert_eq!(meyer_aux(1.0), 1.0);
        assert_abs_diff_eq!(meyer_aux(0.5), 0.5, epsilon = 1e-15);
        assert_eq!(meyer_aux(-3.0), 0.0);
        assert_eq!(meyer_aux(7.0), 1.0);
    }

    #[test]
    fn generic_ramp_matches_degree_seven() {
        let b = bank();
        for i in 0..=100 {
            let t = i as f64 / 100.0;
            assert_abs_diff_eq!(b.aux(t), meyer_aux(t), epsilon = 1e-14);
        }
    }

    #[test]
    fn rejects_even_or_small_degree() {
        for deg in [1, 2, 4] {
            let p = WindowParams {
                meyer_degree: deg,
                ..Default::default()
            };
            assert!(WindowBank::new(p).is_err());
        }
        let p = WindowParams {
            meyer_degree: 3,
            ..Default::default()
        };
        let b = WindowBank::new(p).unwrap();
        // degree 3 is the classical smoothstep 3t² − 2t³
        assert_abs_diff_eq!(b.aux(0.3), 3.0 * 0.09 - 2.0 * 0.027, epsilon = 1e-15);
    }

    #[test]
    fn rejects_breakpoints_outside_support_box() {
        let p = WindowParams {
            smooth_cutoff: 0.2,
            ..Default::default()
        };
        assert!(WindowBank::new(p).is_err());
        let p = WindowParams {
            dyadic_flat: 0.4,
            ..Default::default()
        };
        assert!(WindowBank::new(p).is_err());
    }

    #[test]
    fn psi1_examples() {
        let b = bank();
        assert_eq!(b.psi1_hat(0.0), 0.0);
        assert_eq!(b.psi1_hat(0.6), 0.0);
        let s: f64 = (0..=4)
            .map(|j| b.psi1_hat(0.25 / 4f64.powi(j)).powi(2))
            .sum();
        assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn psi2_examples() {
        let b = bank();
        assert_eq!(b.psi2_hat(1.5), 0.0);
        let s: f64 = [-1.0, 0.0, 1.0]
            .iter()
            .map(|&w| b.psi2_hat(w).powi(2))
            .sum();
        assert_eq!(s, 1.0);
        let s: f64 = [-0.7, 0.3, 1.3]
            .iter()
            .map(|&w| b.psi2_hat(w).powi(2))
            .sum();
        assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn lowpass_examples() {
        let b = bank();
        assert_eq!(b.eval_lowpass(LowpassKind::Smooth, &[0.0, 0.0]), 1.0);
        assert_eq!(b.eval_lowpass(LowpassKind::Smooth, &[0.2, 0.0, 0.0]), 0.0);
        assert_eq!(b.eval_lowpass(LowpassKind::ShearGlobal, &[0.1, 0.1]), 1.0);
        assert_eq!(
            b.eval_lowpass(LowpassKind::ShearGlobal, &[0.1, 0.1, 0.1]),
            1.0
        );
        assert!("curvelet".parse::<LowpassKind>().is_err());
        assert_eq!(
            "dyadic".parse::<LowpassKind>().unwrap(),
            LowpassKind::Dyadic
        );
    }

    #[test]
    fn w_and_v_examples() {
        let b = bank();
        assert_eq!(b.v(0.0), 1.0);
        assert_eq!(b.v(1.2), 0.0);
        let xi = [0.4, 0.1];
        let mut s = b.smooth_big_phi_hat(&xi).powi(2);
        for j in 0..=5 {
            let scaled: Vec<f64> = xi.iter().map(|x| x / 4f64.powi(j)).collect();
            s += b.w(&scaled).unwrap().powi(2);
        }
        assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn v_is_flat_at_origin() {
        // ν starts at t⁴, so v − 1 = O(u⁸) near 0
        let b = bank();
        for &u in &[1e-3, -1e-3, 1e-2] {
            assert!((1.0 - b.v(u)).abs() < 1e-12);
        }
    }

    #[test]
    fn dyadic_window_support_and_positivity() {
        let b = bank();
        assert_eq!(b.dyadic_phi_hat(&[0.49, 0.0]), 0.0);
        assert_eq!(b.dyadic_phi_hat(&[0.0, 2.0]), 0.0);
        assert_eq!(b.dyadic_big_phi_hat(&[0.0, 0.0]), 1.0);
        assert_eq!(b.dyadic_big_phi_hat(&[1.0, 0.0]), 0.0);
        // strictly positive on the Tauberian annulus 3/5 ≤ |ξ| ≤ 5/3
        let mut min = f64::INFINITY;
        for i in 0..=1000 {
            let r = 0.6 + (5.0 / 3.0 - 0.6) * i as f64 / 1000.0;
            min = min.min(b.dyadic_phi_hat(&[r, 0.0]));
        }
        assert!(min > 0.05, "min {min}");
    }

    #[test]
    fn tails_close_the_radial_sums() {
        let b = bank();
        for &w in &[0.01, 0.07, 0.1, 0.3, 2.0, 40.0] {
            let mut s = b.smooth_phi_hat(w).powi(2);
            for j in 0..3 {
                s += b.psi1_hat(w / 4f64.powi(j)).powi(2);
            }
            // tail at scale 3 carries Σ_{j≥3} ψ̂₁²(4^{-j}ω)
            s += b.psi1_tail(w / 64.0).powi(2);
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
        }
    }

    proptest! {
        #[test]
        fn psi1_partition(omega in 0.125f64..50.0, sign in prop::bool::ANY) {
            let b = bank();
            let w = if sign { omega } else { -omega };
            let s: f64 = (0..12).map(|j| b.psi1_hat(w / 4f64.powi(j)).powi(2)).sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
        }

        #[test]
        fn psi2_three_term(omega in -1.0f64..=1.0) {
            let b = bank();
            let s = b.psi2_hat(omega - 1.0).powi(2) + b.psi2_hat(omega).powi(2)
                + b.psi2_hat(omega + 1.0).powi(2);
            prop_assert!((s - 1.0).abs() < 1e-12);
        }

        #[test]
        fn v_shear_partition(u in -1.0f64..=1.0, j in 0u32..6) {
            let b = bank();
            let n = 1i64 << j;
            let s: f64 = (-n..=n).map(|m| b.v(n as f64 * u - m as f64).powi(2)).sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
        }

        #[test]
        fn smooth_telescoping(x in -30.0f64..30.0, y in -30.0f64..30.0, z in -30.0f64..30.0) {
            let b = bank();
            let xi = [x, y, z];
            let mut s = b.smooth_big_phi_hat(&xi).powi(2);
            for j in 0..8 {
                let sc: Vec<f64> = xi.iter().map(|v| v / 4f64.powi(j)).collect();
                s += b.w(&sc).unwrap().powi(2);
            }
            prop_assert!((s - 1.0).abs() < 1e-12);
        }

        #[test]
        fn dyadic_partition(x in -40.0f64..40.0, y in -40.0f64..40.0) {
            let b = bank();
            let xi = [x, y];
            let mut s = b.dyadic_big_phi_hat(&xi).powi(2);
            for nu in 0..9 {
                let sc: Vec<f64> = xi.iter().map(|v| v / 2f64.powi(nu)).collect();
                s += b.dyadic_phi_hat(&sc).powi(2);
            }
            prop_assert!((s - 1.0).abs() < 1e-12);
        }

        #[test]
        fn values_in_unit_interval(x in -3.0f64..3.0, y in -3.0f64..3.0) {
            let b = bank();
            for v in [b.psi1_hat(x), b.psi2_hat(x), b.v(y), b.smooth_phi_hat(x),
                      b.shear_lowpass(&[x, y]), b.dyadic_phi_hat(&[x, y]),
                      b.dyadic_big_phi_hat(&[x, y]), b.w(&[x, y]).unwrap(), b.psi1_tail(x)] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }

        #[test]
        fn supports_respected(x in 0.0f64..10.0) {
            let b = bank();
            if !(0.0625..=0.5).contains(&x) { prop_assert_eq!(b.psi1_hat(x), 0.0); }
            if x > 1.0 { prop_assert_eq!(b.psi2_hat(x), 0.0); prop_assert_eq!(b.v(-x), 0.0); }
            if x > 0.25 { prop_assert_eq!(b.shear_lowpass(&[x, 0.0]), 0.0); }
            if x > 0.125 { prop_assert_eq!(b.smooth_phi_hat(x), 0.0); }
            if !(0.5..=2.0).contains(&x) { prop_assert_eq!(b.dyadic_phi_hat(&[0.0, x]), 0.0); }
        }

        #[test]
        fn lipschitz_on_small_steps(x in -2.0f64..2.0, h in -1e-4f64..1e-4) {
            // ν' ≤ 35/16, so every ramp has slope below π/2·(35/16)/width
            let b = bank();
            let lip = 400.0;
            prop_assert!((b.psi1_hat(x) - b.psi1_hat(x + h)).abs() <= lip * h.abs() + 1e-15);
            prop_assert!((b.psi2_hat(x) - b.psi2_hat(x + h)).abs() <= lip * h.abs() + 1e-15);
            prop_assert!((b.smooth_phi_hat(x) - b.smooth_phi_hat(x + h)).abs() <= lip * h.abs() + 1e-15);
        }
    }
}
