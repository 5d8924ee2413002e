//! Statistical-fluctuation models converting observed counts into
//! expectation-value intervals.
//!
//! Four models are provided:
//!
//! * Hoeffding's inequality, half-width `g_H(n, eps) = sqrt(n/2 * ln(1/eps))`
//!   over the trial count `n`;
//! * the multiplicative Chernoff bound, half-widths
//!   `g_C(tau, eps_hat^4/16)` and `g_C(tau, eps^(3/2))` with
//!   `g_C(x, y) = sqrt(2x * ln(1/y))` over the observed count, guarded by a
//!   Hoeffding pre-check of its applicability conditions;
//! * an improved Chernoff bound whose deviation ratios solve
//!   `[e^(-d)/(1-d)^(1-d)]^(tau/(1-d)) = eps` (upper) and
//!   `[e^(d)/(1+d)^(1+d)]^(tau/(1+d)) = eps` (lower), by bisection or by a
//!   closed-form approximation valid for large counts;
//! * Azuma's inequality for dependent trials, half-width
//!   `g_A(n, eps) = sqrt(2n * ln(1/eps))`.
//!
//! [`gamma_sampling`] supplies the random-sampling-without-replacement
//! correction used to lift a bit error rate into a phase error rate.
//!
//! All operations are pure functions; counts are carried as `f64` because the
//! deterministic channel model produces expected (real-valued) counts.

use crate::error::{Error, Result};

/// Selects the statistical-fluctuation model used for interval estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundModel {
    Hoeffding,
    MultChernoff,
    ImprovedChernoff,
    Azuma,
}

impl BoundModel {
    /// Stable lower-case identifier used in CSV columns and reports.
    pub fn name(self) -> &'static str {
        match self {
            BoundModel::Hoeffding => "hoeffding",
            BoundModel::MultChernoff => "mult_chernoff",
            BoundModel::ImprovedChernoff => "improved_chernoff",
            BoundModel::Azuma => "azuma",
        }
    }
}

impl std::fmt::Display for BoundModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for BoundModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hoeffding" => Ok(BoundModel::Hoeffding),
            "mult_chernoff" | "mult-chernoff" => Ok(BoundModel::MultChernoff),
            "improved_chernoff" | "improved-chernoff" => Ok(BoundModel::ImprovedChernoff),
            "azuma" => Ok(BoundModel::Azuma),
            other => Err(Error::arg(format!(
                "unknown bound model '{other}'; expected hoeffding, mult_chernoff, \
                 improved_chernoff or azuma"
            ))),
        }
    }
}

/// Two-sided bound on an expectation value, in count units, together with
/// the failure probabilities that produced each side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectationInterval {
    pub lower: f64,
    pub upper: f64,
    /// Probability that the true expectation lies below `lower`.
    pub eps_lower: f64,
    /// Probability that the true expectation lies above `upper`.
    pub eps_upper: f64,
}

/// Which side of the improved Chernoff equation a deviation ratio solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaSide {
    Upper,
    Lower,
}

fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidProbability { name, value })
    }
}

fn check_counts(observed: f64, n_trials: f64) -> Result<()> {
    if !(n_trials >= 1.0) {
        return Err(Error::arg(format!(
            "trial count {n_trials:e} must be at least 1"
        )));
    }
    if !(observed >= 0.0) {
        return Err(Error::arg(format!(
            "observed count {observed:e} must be nonnegative"
        )));
    }
    if observed > n_trials {
        return Err(Error::ObservedExceedsTrials { observed, n_trials });
    }
    Ok(())
}

/// Hoeffding half-width `sqrt(n/2 * ln(1/eps))` over `n` trials.
fn g_hoeffding(n_trials: f64, eps: f64) -> f64 {
    (n_trials / 2.0 * (1.0 / eps).ln()).sqrt()
}

/// Chernoff/Azuma half-width `sqrt(2x * ln(1/y))`.
fn g_sqrt2(x: f64, y: f64) -> f64 {
    (2.0 * x * (1.0 / y).ln()).sqrt()
}

/// Interval on the expectation of a sum of `n_trials` independent Bernoulli
/// variables whose observed sum is `observed`, by Hoeffding's inequality.
///
/// `upper = observed + g_H(n, eps_hat)`, `lower = observed - g_H(n, eps)`,
/// clamped into `[0, n_trials]`.
pub fn hoeffding_interval(
    observed: f64,
    n_trials: f64,
    eps_hat: f64,
    eps: f64,
) -> Result<ExpectationInterval> {
    check_counts(observed, n_trials)?;
    check_probability("eps_hat", eps_hat)?;
    check_probability("eps", eps)?;
    let upper = (observed + g_hoeffding(n_trials, eps_hat)).min(n_trials);
    let lower = (observed - g_hoeffding(n_trials, eps)).max(0.0);
    Ok(ExpectationInterval {
        lower,
        upper,
        eps_lower: eps,
        eps_upper: eps_hat,
    })
}

/// Interval on the expectation by the multiplicative Chernoff bound.
///
/// A Hoeffding lower bound with failure probability `eps_h` first certifies
/// the applicability conditions `(2/eps_hat_c)^(1/tau*) <= e^(9/32)` and
/// `(1/eps_c)^(1/tau*) < e^(1/3)`; if either fails the estimate is refused
/// with [`Error::ConditionsNotMet`] and the caller falls back or abandons the
/// point. On success,
/// `upper = observed + sqrt(2*observed*ln(16/eps_hat_c^4))` and
/// `lower = observed - sqrt(2*observed*(3/2)*ln(1/eps_c))`, clamped into
/// `[0, n_trials]`. The total failure probability of the pair of bounds is
/// `eps_h + eps_c + eps_hat_c`; the Hoeffding pre-check failure is accounted
/// on the lower side.
pub fn mult_chernoff_interval(
    observed: f64,
    n_trials: f64,
    eps_h: f64,
    eps_c: f64,
    eps_hat_c: f64,
) -> Result<ExpectationInterval> {
    check_counts(observed, n_trials)?;
    check_probability("eps_h", eps_h)?;
    check_probability("eps_c", eps_c)?;
    check_probability("eps_hat_c", eps_hat_c)?;

    let tau_star_lower = observed - g_hoeffding(n_trials, eps_h);
    // Condition (1): ln(2/eps_hat_c) <= 9/32 * tau*; condition (2):
    // ln(1/eps_c) < tau*/3. Both need tau* > 0.
    let need1 = 32.0 / 9.0 * (2.0 / eps_hat_c).ln();
    let need2 = 3.0 * (1.0 / eps_c).ln();
    let required = need1.max(need2);
    if !(tau_star_lower > 0.0) || tau_star_lower < need1 || !(tau_star_lower > need2) {
        return Err(Error::ConditionsNotMet {
            tau_star_lower,
            required,
        });
    }

    let upper = (observed + g_sqrt2(observed, eps_hat_c.powi(4) / 16.0)).min(n_trials);
    let lower = (observed - g_sqrt2(observed, eps_c.powf(1.5))).max(0.0);
    Ok(ExpectationInterval {
        lower,
        upper,
        eps_lower: eps_h + eps_c,
        eps_upper: eps_hat_c,
    })
}

/// `-d - (1-d)*ln(1-d)`, the log-exponent kernel of the upper equation.
///
/// Series fallback below 1e-5 avoids the cancellation of the direct form;
/// the kernel equals `-(d^2/2 + d^3/6 + d^4/12 + ...)`.
fn kernel_upper(d: f64) -> f64 {
    if d < 1e-5 {
        -(d * d / 2.0 + d * d * d / 6.0 + d * d * d * d / 12.0)
    } else {
        -d - (1.0 - d) * (-d).ln_1p()
    }
}

/// `d - (1+d)*ln(1+d)`, the log-exponent kernel of the lower equation;
/// equals `-(d^2/2 - d^3/6 + d^4/12 - ...)`.
fn kernel_lower(d: f64) -> f64 {
    if d < 1e-5 {
        -(d * d / 2.0 - d * d * d / 6.0 + d * d * d * d / 12.0)
    } else {
        d - (1.0 + d) * d.ln_1p()
    }
}

/// Log-space residual of the improved Chernoff defining equation at
/// deviation ratio `d`; the root satisfies `residual = 0`.
pub fn delta_log_residual(observed: f64, eps: f64, side: DeltaSide, d: f64) -> f64 {
    match side {
        DeltaSide::Upper => observed / (1.0 - d) * kernel_upper(d) - eps.ln(),
        DeltaSide::Lower => observed / (1.0 + d) * kernel_lower(d) - eps.ln(),
    }
}

/// Solves the improved Chernoff deviation equations exactly by bisection on
/// the log-transformed equation.
///
/// Brackets are `(1e-12, 1 - 1e-12)` for the upper side and `(1e-12, 1e3)`
/// for the lower side, on which the residual is monotone; bisection runs to
/// a relative tolerance of 1e-13 in the deviation ratio.
pub fn solve_delta_exact(observed: f64, eps: f64, side: DeltaSide) -> Result<f64> {
    if !(observed > 0.0) {
        return Err(Error::arg(format!(
            "exact deviation solve needs observed > 0, got {observed:e}"
        )));
    }
    check_probability("eps", eps)?;

    let (mut lo, mut hi) = match side {
        DeltaSide::Upper => (1e-12, 1.0 - 1e-12),
        DeltaSide::Lower => (1e-12, 1e3),
    };
    let f_lo = delta_log_residual(observed, eps, side, lo);
    let f_hi = delta_log_residual(observed, eps, side, hi);
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(Error::NoSignChange {
            lo,
            hi,
            f_lo,
            f_hi,
        });
    }

    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if delta_log_residual(observed, eps, side, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Closed-form approximation to the improved Chernoff deviation ratio,
///
/// `d = (sqrt((ln eps)^2 - 8*observed*ln eps) - 3 ln eps) / (2(observed + ln eps))`,
///
/// identical for both sides with the respective `eps`. Valid only for
/// `observed >= -6 ln eps`; outside that range the exact solver must be used.
pub fn delta_approx(observed: f64, eps: f64, _side: DeltaSide) -> Result<f64> {
    check_probability("eps", eps)?;
    let le = eps.ln();
    let required = -6.0 * le;
    if !(observed >= required) {
        return Err(Error::ApproxPrecondition { observed, required });
    }
    Ok(((le * le - 8.0 * observed * le).sqrt() - 3.0 * le) / (2.0 * (observed + le)))
}

/// Picks the approximation when its validity condition holds (and it yields
/// a usable ratio), otherwise solves exactly.
fn delta_for(observed: f64, eps: f64, side: DeltaSide) -> Result<f64> {
    if observed >= -6.0 * eps.ln() {
        let d = delta_approx(observed, eps, side)?;
        // Right at the validity boundary the approximation touches d = 1,
        // which is outside the upper equation's domain.
        if side == DeltaSide::Lower || d < 1.0 {
            return Ok(d);
        }
    }
    solve_delta_exact(observed, eps, side)
}

/// Interval on the expectation by the improved Chernoff bound:
/// `upper = observed/(1 - d_up)`, `lower = observed/(1 + d_lo)` with the
/// deviation ratios solved from the defining equations at `eps_hat` (upper)
/// and `eps` (lower).
///
/// A zero observed count has no finite solution for the lower ratio; the
/// interval degenerates to `lower = 0` with `upper = ln(1/eps_hat)`, the
/// limit of the exact upper equation as the count vanishes.
pub fn improved_chernoff_interval(
    observed: f64,
    eps_hat: f64,
    eps: f64,
) -> Result<ExpectationInterval> {
    if !(observed >= 0.0) {
        return Err(Error::arg(format!(
            "observed count {observed:e} must be nonnegative"
        )));
    }
    check_probability("eps_hat", eps_hat)?;
    check_probability("eps", eps)?;

    let (lower, upper) = if observed == 0.0 {
        (0.0, (1.0 / eps_hat).ln())
    } else {
        let upper = match delta_for(observed, eps_hat, DeltaSide::Upper) {
            Ok(d) => observed / (1.0 - d),
            // Root beyond the bracket: the count is within rounding of zero,
            // so the zero-count limit applies, padded to stay conservative.
            Err(Error::NoSignChange { .. }) => (1.0 / eps_hat).ln() + 1024.0 * observed,
            Err(e) => return Err(e),
        };
        let lower = match delta_for(observed, eps, DeltaSide::Lower) {
            Ok(d) => (observed / (1.0 + d)).max(0.0),
            // Root beyond the bracket (counts of a few or less): the lower
            // bound is indistinguishable from zero.
            Err(Error::NoSignChange { .. }) => 0.0,
            Err(e) => return Err(e),
        };
        (lower, upper)
    };
    Ok(ExpectationInterval {
        lower,
        upper,
        eps_lower: eps,
        eps_upper: eps_hat,
    })
}

/// Interval on the expectation of a sum over `n_trials` possibly dependent
/// trials by Azuma's inequality with unit bounded differences:
/// `upper = observed + sqrt(2n * ln(1/eps_hat_a))`,
/// `lower = observed - sqrt(2n * ln(1/eps_a))`, clamped into `[0, n_trials]`.
pub fn azuma_interval(
    observed: f64,
    n_trials: f64,
    eps_hat_a: f64,
    eps_a: f64,
) -> Result<ExpectationInterval> {
    check_counts(observed, n_trials)?;
    check_probability("eps_hat_a", eps_hat_a)?;
    check_probability("eps_a", eps_a)?;
    let upper = (observed + g_sqrt2(n_trials, eps_hat_a)).min(n_trials);
    let lower = (observed - g_sqrt2(n_trials, eps_a)).max(0.0);
    Ok(ExpectationInterval {
        lower,
        upper,
        eps_lower: eps_a,
        eps_upper: eps_hat_a,
    })
}

/// Random-sampling-without-replacement correction
///
/// `gamma = sqrt( (s_X+s_Z)(1-E)E / (s_X s_Z ln 2)
///               * log2( (s_X+s_Z) / (s_X s_Z eps_pp^2 E(1-E)) ) )`.
///
/// A degenerate error rate of exactly 0 (or 1) is regularized by one virtual
/// error, `E = 1/s_X` (respectively `1 - 1/s_X`).
pub fn gamma_sampling(s_x: f64, s_z: f64, error_rate: f64, eps_pp: f64) -> Result<f64> {
    if !(s_x >= 1.0 && s_z >= 1.0) {
        return Err(Error::arg(format!(
            "gamma_sampling needs s_X, s_Z >= 1, got {s_x:e}, {s_z:e}"
        )));
    }
    check_probability("eps_pp", eps_pp)?;
    if !(0.0..=1.0).contains(&error_rate) {
        return Err(Error::arg(format!(
            "error rate {error_rate:e} outside [0, 1]"
        )));
    }
    let e = if error_rate <= 0.0 {
        1.0 / s_x
    } else if error_rate >= 1.0 {
        1.0 - 1.0 / s_x
    } else {
        error_rate
    };

    let total = s_x + s_z;
    let lead = total * (1.0 - e) * e / (s_x * s_z * std::f64::consts::LN_2);
    let log_arg = total / (s_x * s_z * eps_pp * eps_pp * e * (1.0 - e));
    Ok((lead * log_arg.log2()).max(0.0).sqrt())
}
