//! Upper bound on the X-basis bit error rate from yield bounds, lifted to
//! the Z-basis phase error rate by random sampling without replacement.
//!
//! The bit-error bound expands over photon-number pairs with coefficients
//!
//! `K_{2n,2m}   = e^(-mu_Z) mu_Z^(n+m)   / sqrt((2n)!(2m)!)`
//! `K_{2n+1,2m+1} = e^(-mu_Z) mu_Z^(n+m+1) / sqrt((2n+1)!(2m+1)!)`,
//!
//! keeping the estimated yields `Y_00`, `Y_02`, `Y_20`, `Y_11` explicit and
//! replacing every other even-even yield (both indices >= 2) by 1:
//!
//! `E_X_up = [ (K00 sqrt(Y00) + K02 sqrt(Y02) + K20 sqrt(Y20)
//!             + sum_{n,m>=1} K_{2n,2m})^2
//!           + (K11 sqrt(Y11) + sum_{n,m>=0} K_{2n+1,2m+1} - K11)^2 ] * N_Z/s_Z`.
//!
//! The coefficient lattice is separable: with `S_e = sum_n mu^n/sqrt((2n)!)`
//! and `S_o = sum_n mu^(n+1/2)/sqrt((2n+1)!)`, the full even and odd sums
//! are `e^(-mu) S_e^2` and `e^(-mu) S_o^2`, and the both-indices-positive
//! even sum is `e^(-mu) (S_e - 1)^2`.

use crate::concentration::gamma_sampling;
use crate::decoy::YieldBounds;
use crate::error::{Error, Result};

/// Truncated coefficient sums of the bit-error expansion at one signal
/// intensity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KCoefficients {
    /// `K_{0,0} = e^(-mu)`.
    pub k00: f64,
    /// `K_{0,2} = K_{2,0} = e^(-mu) mu/sqrt(2)`.
    pub k02: f64,
    /// `K_{1,1} = mu e^(-mu)`.
    pub k11: f64,
    /// Full even lattice sum `e^(-mu) S_e^2`.
    pub s_even_total: f64,
    /// Full odd lattice sum `e^(-mu) S_o^2`.
    pub s_odd_total: f64,
    /// Even lattice sum restricted to both indices >= 1:
    /// `e^(-mu) (S_e - 1)^2`.
    pub s_even_interior: f64,
    /// First omitted term across the two one-dimensional series.
    pub tail_bound: f64,
    /// Terms per axis actually used (doubles until the tail drops below
    /// 1e-15).
    pub cutoff: usize,
}

/// One-dimensional series sums `S_e`, `S_o` truncated at `cutoff` terms,
/// plus the first omitted term of each.
fn axis_sums(mu_z: f64, cutoff: usize) -> (f64, f64, f64, f64) {
    // Even axis: a_0 = 1, a_{k+1} = a_k * mu / sqrt((2k+1)(2k+2)).
    let mut a = 1.0;
    let mut s_e = 1.0;
    for k in 0..cutoff {
        let kf = k as f64;
        a *= mu_z / ((2.0 * kf + 1.0) * (2.0 * kf + 2.0)).sqrt();
        s_e += a;
    }
    let a_next = a * mu_z / ((2.0 * cutoff as f64 + 1.0) * (2.0 * cutoff as f64 + 2.0)).sqrt();

    // Odd axis: b_0 = sqrt(mu), b_{k+1} = b_k * mu / sqrt((2k+2)(2k+3)).
    let mut b = mu_z.sqrt();
    let mut s_o = b;
    for k in 0..cutoff {
        let kf = k as f64;
        b *= mu_z / ((2.0 * kf + 2.0) * (2.0 * kf + 3.0)).sqrt();
        s_o += b;
    }
    let b_next = b * mu_z / ((2.0 * cutoff as f64 + 2.0) * (2.0 * cutoff as f64 + 3.0)).sqrt();

    (s_e, s_o, a_next, b_next)
}

/// Computes the coefficient sums, doubling the cutoff until the first
/// omitted series term falls below 1e-15.
pub fn k_coefficients(mu_z: f64, cutoff: usize) -> Result<KCoefficients> {
    if !(mu_z > 0.0) {
        return Err(Error::arg(format!("mu_Z = {mu_z:e} must be positive")));
    }
    if cutoff < 10 {
        return Err(Error::arg(format!("series cutoff {cutoff} must be >= 10")));
    }

    let mut cutoff = cutoff;
    let (s_e, s_o, tail) = loop {
        let (s_e, s_o, a_next, b_next) = axis_sums(mu_z, cutoff);
        let tail = a_next.max(b_next);
        if tail < 1e-15 || cutoff >= 1 << 14 {
            break (s_e, s_o, tail);
        }
        cutoff *= 2;
    };

    let w = (-mu_z).exp();
    Ok(KCoefficients {
        k00: w,
        k02: w * mu_z / std::f64::consts::SQRT_2,
        k11: w * mu_z,
        s_even_total: w * s_e * s_e,
        s_odd_total: w * s_o * s_o,
        s_even_interior: w * (s_e - 1.0) * (s_e - 1.0),
        tail_bound: tail,
        cutoff,
    })
}

/// Upper bound on the X-basis bit error rate, clamped into [0, 0.5] for
/// downstream entropy use.
pub fn ex_upper(yields: &YieldBounds, k: &KCoefficients, n_z: f64, s_z: f64) -> Result<f64> {
    if !(s_z > 0.0) {
        return Err(Error::ZeroSignal { eta: f64::NAN });
    }
    let even = k.k00 * yields.y00_up.sqrt()
        + k.k02 * (yields.y02_up.sqrt() + yields.y20_up.sqrt())
        + k.s_even_interior;
    // The odd bracket is nonnegative: the full odd sum alone is at least
    // K11 (its first term).
    let odd = k.k11 * yields.y11_up.sqrt() + k.s_odd_total - k.k11;
    Ok(((even * even + odd * odd) * n_z / s_z).clamp(0.0, 0.5))
}

/// Upper bound on the phase error rate:
/// `min(0.5, E_X_up + gamma(s_X, s_Z, E_X_up, eps_pp))`.
pub fn eph_upper(e_mu_x: f64, s_x: f64, s_z: f64, eps_pp: f64) -> Result<f64> {
    let gamma = gamma_sampling(s_x, s_z, e_mu_x, eps_pp)?;
    Ok((e_mu_x + gamma).min(0.5))
}
