//! Linear channel-loss model producing the observables a real run would
//! record: the Z-basis detection count `s_Z`, the four X-basis counts
//! `s_AB^X` per decoy intensity pair, and the Z-basis bit error rate.
//!
//! The overall transmittance `eta` covers both channel loss and detector
//! efficiency; each arm to the middle node carries `sqrt(eta)`. A successful
//! detection is exactly one of the two threshold detectors clicking. With
//! signal intensity `mu_Z`, misalignment factor `c = cos(alpha) cos(beta)`
//! and dark count probability `P_d` per detector, the two Z-basis detector
//! intensities are `sqrt(eta) mu_Z (1 +- c)`, which gives
//!
//! `s_Z = N_Z [ (1-P_d)(e^(-lc) + e^(lc)) e^(-l) - 2(1-P_d)^2 e^(-2l) ]`
//!
//! with `l = sqrt(eta) mu_Z`. Bit errors are the successful detections where
//! only the destructive port clicked:
//!
//! `err_Z = N_Z (1-P_d) [ e^(-l(1+c)) - (1-P_d) e^(-2l) ]`.
//!
//! Phase-randomized decoy pairs interfere incoherently, giving
//!
//! `s_AB^X = 2 P_A P_B N_X (1-P_d) [ (P_d-1) e^(-w(mu_A+mu_B))
//!           + e^(-w(mu_A+mu_B)/2) I_0(sqrt(eta mu_A mu_B) cos(alpha)) ]`
//!
//! with `w = sqrt(eta)`. Counts are expected values (real-valued); there is
//! no shot-noise sampling here.

use crate::config::ProtocolConfig;
use crate::error::{Error, Result};

/// Modified Bessel function of the first kind, order zero, to 1e-12
/// relative accuracy.
///
/// Power series `sum_k (x^2/4)^k / (k!)^2` below `x = 15`, the large-argument
/// asymptotic expansion `e^x/sqrt(2 pi x) * sum_k ((2k-1)!!)^2 / (k! (8x)^k)`
/// above.
pub fn bessel_i0(x: f64) -> f64 {
    let x = x.abs();
    if x < 15.0 {
        let q = x * x / 4.0;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..400 {
            let kf = k as f64;
            term *= q / (kf * kf);
            sum += term;
            if term < sum * 1e-17 {
                break;
            }
        }
        sum
    } else {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            let kf = k as f64;
            let next = term * (2.0 * kf - 1.0) * (2.0 * kf - 1.0) / (8.0 * kf * x);
            if next >= term {
                break; // asymptotic series started diverging
            }
            term = next;
            sum += term;
            if term < sum * 1e-17 {
                break;
            }
        }
        x.exp() / (2.0 * std::f64::consts::PI * x).sqrt() * sum
    }
}

/// Simulated sifting-step observables for one transmittance point.
#[derive(Debug, Clone, Copy)]
pub struct Observables {
    /// Pulse pairs where both parties chose the Z basis.
    pub n_z: f64,
    /// Pulse pairs where both parties chose the X basis.
    pub n_x: f64,
    /// Successful Z-basis detections.
    pub s_z: f64,
    /// Successful X-basis detections indexed by the decoy intensity choice
    /// `[alice][bob]`, 0 for `mu_0` and 1 for `mu_1`.
    pub s_x_pairs: [[f64; 2]; 2],
    /// Z-basis bit error rate.
    pub e_mu_z: f64,
}

impl Observables {
    /// Total successful X-basis detections, summed over intensity pairs.
    pub fn s_x_total(&self) -> f64 {
        self.s_x_pairs.iter().flatten().sum()
    }
}

/// Evaluates the channel model at overall transmittance `eta`.
///
/// Both parties choose bases independently, so `N_Z = N P_Z^2` and
/// `N_X = N (1-P_Z)^2`; mismatched rounds are discarded. Fails with
/// [`Error::ZeroSignal`] when no Z-basis detections survive, so the caller
/// can abandon the point with rate zero.
pub fn simulate_observables(config: &ProtocolConfig, eta: f64) -> Result<Observables> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::arg(format!(
            "transmittance eta = {eta:e} outside (0, 1]"
        )));
    }
    config.validate()?;

    let w = eta.sqrt();
    let lam = w * config.mu_z;
    let c = config.alpha.cos() * config.beta.cos();
    let q = 1.0 - config.p_d;

    let n_z = config.n * config.p_z * config.p_z;
    let n_x = config.n * (1.0 - config.p_z) * (1.0 - config.p_z);

    let s_z = n_z
        * (q * ((-lam * c).exp() + (lam * c).exp()) * (-lam).exp()
            - 2.0 * q * q * (-2.0 * lam).exp());
    if !(s_z > 0.0) {
        return Err(Error::ZeroSignal { eta });
    }

    let err_clicks = n_z * q * ((-lam * (1.0 + c)).exp() - q * (-2.0 * lam).exp());
    let e_mu_z = (err_clicks / s_z).clamp(0.0, 1.0);

    let mu = [config.mu_0, config.mu_1];
    let p = [config.p_mu0, 1.0 - config.p_mu0];
    let mut s_x_pairs = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let pair_sum = mu[a] + mu[b];
            s_x_pairs[a][b] = 2.0
                * p[a]
                * p[b]
                * n_x
                * q
                * ((config.p_d - 1.0) * (-w * pair_sum).exp()
                    + (-w * pair_sum / 2.0).exp()
                        * bessel_i0((eta * mu[a] * mu[b]).sqrt() * config.alpha.cos()));
        }
    }

    Ok(Observables {
        n_z,
        n_x,
        s_z,
        s_x_pairs,
        e_mu_z,
    })
}
