//! Pointwise Yosida operators of the multivalued Heaviside and of the
//! subdifferential of the nonpositivity constraint on the seepage face,
//! plus the α/β fixed-point updates.
//!
//! The closed-form branches below are obtained by inverting the resolvent
//! J = ((1-ωλ)I + λG)⁻¹ branch by branch; the equivalence
//! u ∈ G(y) - ωy  ⟺  u = G_λ^ω(y + λu) is checked by the oracle tests.

use crate::error::{DamError, Result};

fn check_params(omega: f64, lambda: f64) -> Result<()> {
    if omega < 0.0 || lambda < 0.0 || omega * lambda >= 1.0 {
        return Err(DamError::InvalidArgument(format!(
            "need ω, λ ≥ 0 with ωλ < 1 (got ω = {omega}, λ = {lambda})"
        )));
    }
    Ok(())
}

/// Yosida approximation of H - ωI at z, H the multivalued Heaviside.
///
/// Branches of the resolvent inversion: z < 0 maps to the dry branch
/// (H = 0), z ∈ [0, λ] to the vertical segment at the origin, z > λ to
/// the saturated branch (H = 1).
#[inline]
pub fn yosida_heaviside(z: f64, omega: f64, lambda: f64) -> f64 {
    debug_assert!(omega * lambda < 1.0);
    if z < 0.0 {
        -omega * z / (1.0 - omega * lambda)
    } else if z <= lambda {
        z / lambda
    } else {
        (1.0 - omega * z) / (1.0 - omega * lambda)
    }
}

/// Yosida approximation of ∂I_{(-∞,0]} - ωI at z, acting pointwise on the
/// Γ0 traces.
#[inline]
pub fn yosida_indicator_nonpositive(z: f64, omega: f64, lambda: f64) -> f64 {
    debug_assert!(omega * lambda < 1.0);
    if z < 0.0 {
        -omega * z / (1.0 - omega * lambda)
    } else {
        z / lambda
    }
}

/// Checked variants for external callers.
pub fn yosida_heaviside_checked(z: f64, omega: f64, lambda: f64) -> Result<f64> {
    check_params(omega, lambda)?;
    Ok(yosida_heaviside(z, omega, lambda))
}

pub fn yosida_indicator_nonpositive_checked(z: f64, omega: f64, lambda: f64) -> Result<f64> {
    check_params(omega, lambda)?;
    Ok(yosida_indicator_nonpositive(z, omega, lambda))
}

/// β update: β_new(i) = H_λ2^ω2(p(i) + λ2 β_old(i)) at every node.
pub fn update_beta(p: &[f64], beta_old: &[f64], omega2: f64, lambda2: f64) -> Vec<f64> {
    p.iter()
        .zip(beta_old)
        .map(|(&pi, &bi)| yosida_heaviside(pi + lambda2 * bi, omega2, lambda2))
        .collect()
}

/// α update on the Γ0 nodes: α_new = (∂I)_λ1^ω1(p|Γ0 + λ1 α_old).
pub fn update_alpha(p_on_gamma0: &[f64], alpha_old: &[f64], omega1: f64, lambda1: f64) -> Vec<f64> {
    p_on_gamma0
        .iter()
        .zip(alpha_old)
        .map(|(&pi, &ai)| yosida_indicator_nonpositive(pi + lambda1 * ai, omega1, lambda1))
        .collect()
}

/// Saturation recovery θ = β + ω2 p, clipped to [0, 1]; returns the field
/// and the largest pre-clip overshoot as a diagnostic.
pub fn recover_theta(p: &[f64], beta: &[f64], omega2: f64) -> (Vec<f64>, f64) {
    let mut overshoot = 0.0f64;
    let theta = p
        .iter()
        .zip(beta)
        .map(|(&pi, &bi)| {
            let t = bi + omega2 * pi;
            overshoot = overshoot.max(-t).max(t - 1.0);
            t.clamp(0.0, 1.0)
        })
        .collect();
    (theta, overshoot)
}
