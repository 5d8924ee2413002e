//! Final key length, the composable security budget, the PLOB reference
//! bound and the single-point evaluation pipeline.
//!
//! The key length for one point is
//!
//! `l = floor( s_Z [1 - h(E_ph_up)] - s_Z f_EC h(E_Z)
//!             - 2 log2(1/(2 eps_PA)) - log2(2/eps_cor) )`,
//!
//! clamped at zero, where `h` is the binary Shannon entropy. The secrecy
//! budget splits `eps_sec` into thirteen equal roles `eps_1`: two sides for
//! each of the four intensity-pair intervals, the two smoothing terms, the
//! sampling correction, the hash collision term and the privacy
//! amplification term, `4(eps_up + eps_low) + 2 eps' + eps'' + nu + eps_PA`.

use crate::channel::{simulate_observables, Observables};
use crate::concentration::{
    azuma_interval, hoeffding_interval, improved_chernoff_interval, mult_chernoff_interval,
    BoundModel, ExpectationInterval,
};
use crate::config::{AzumaTrialCount, RunConfig};
use crate::decoy::{compute_yield_bounds, t_bounds, TBounds, YieldBounds};
use crate::error::{Error, Result};
use crate::phase_error::{eph_upper, ex_upper, k_coefficients};

/// Binary Shannon entropy `h(x) = -x log2 x - (1-x) log2(1-x)`, with
/// `h(0) = h(1) = 0` by continuity.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::EntropyDomain { x });
    }
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-x * x.log2() - (1.0 - x) * (1.0 - x).log2())
}

/// The composable failure-probability decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecurityBudget {
    pub eps_sec: f64,
    pub eps_cor: f64,
    /// The common value of all seven roles, `eps_sec / 13`.
    pub eps1: f64,
}

impl SecurityBudget {
    /// Per-pair interval failure probability, upper side.
    pub fn eps_upper(&self) -> f64 {
        self.eps1
    }
    /// Per-pair interval failure probability, lower side.
    pub fn eps_lower(&self) -> f64 {
        self.eps1
    }
    /// Smoothing parameter of the min-entropy bound.
    pub fn eps_prime(&self) -> f64 {
        self.eps1
    }
    /// Failure probability of the random-sampling correction.
    pub fn eps_double_prime(&self) -> f64 {
        self.eps1
    }
    /// Residual term of the leftover-hash step.
    pub fn nu(&self) -> f64 {
        self.eps1
    }
    /// Privacy amplification failure probability.
    pub fn eps_pa(&self) -> f64 {
        self.eps1
    }

    /// Recomposes `4(eps_up + eps_low) + 2 eps' + eps'' + nu + eps_PA`;
    /// equals `eps_sec` up to floating-point rounding.
    pub fn recomposed(&self) -> f64 {
        4.0 * (self.eps_upper() + self.eps_lower())
            + 2.0 * self.eps_prime()
            + self.eps_double_prime()
            + self.nu()
            + self.eps_pa()
    }
}

/// Splits the secrecy target into the thirteen equal roles.
pub fn epsilon_budget(eps_sec: f64, eps_cor: f64) -> Result<SecurityBudget> {
    for (name, value) in [("eps_sec", eps_sec), ("eps_cor", eps_cor)] {
        if !(value > 0.0 && value < 1.0) {
            return Err(Error::InvalidProbability { name, value });
        }
    }
    Ok(SecurityBudget {
        eps_sec,
        eps_cor,
        eps1: eps_sec / 13.0,
    })
}

/// Extractable key length for one point; zero when the entropy balance goes
/// negative.
pub fn key_length(
    s_z: f64,
    eph_up: f64,
    e_mu_z: f64,
    f_ec: f64,
    budget: &SecurityBudget,
) -> Result<u64> {
    if !(s_z >= 0.0) {
        return Err(Error::arg(format!("s_Z = {s_z:e} must be nonnegative")));
    }
    if !(0.0..=0.5).contains(&eph_up) {
        return Err(Error::arg(format!(
            "phase error bound {eph_up:e} outside [0, 0.5]"
        )));
    }
    let leak_ec = s_z * f_ec * binary_entropy(e_mu_z)?;
    let l = s_z * (1.0 - binary_entropy(eph_up)?)
        - leak_ec
        - 2.0 * (1.0 / (2.0 * budget.eps_pa())).log2()
        - (2.0 / budget.eps_cor).log2();
    Ok(l.floor().max(0.0) as u64)
}

/// Repeaterless secret-key capacity of a lossy channel,
/// `-log2(1 - eta)`.
pub fn plob_bound(eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::PlobDomain { eta });
    }
    Ok(-(-eta).ln_1p() / std::f64::consts::LN_2)
}

/// Why a point produced no key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroRateReason {
    /// The channel model produced no Z-basis detections.
    ZeroSignal,
    /// No X-basis detections to estimate from.
    NoXDetections,
    /// The entropy balance of the length formula went nonpositive.
    ZeroLength,
}

/// Outcome classification of one evaluated point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointStatus {
    Ok,
    ZeroRate(ZeroRateReason),
}

impl PointStatus {
    /// Stable identifier for CSV status columns.
    pub fn name(self) -> &'static str {
        match self {
            PointStatus::Ok => "ok",
            PointStatus::ZeroRate(ZeroRateReason::ZeroSignal) => "zero_signal",
            PointStatus::ZeroRate(ZeroRateReason::NoXDetections) => "no_x_detections",
            PointStatus::ZeroRate(ZeroRateReason::ZeroLength) => "zero_length",
        }
    }
}

/// Everything the pipeline computed on the way to the key length.
/// Fields left unfilled by an early abort are NaN / `None`.
#[derive(Debug, Clone)]
pub struct Diagnostics {
    pub eta: f64,
    pub n_z: f64,
    pub n_x: f64,
    pub s_z: f64,
    pub s_x_total: f64,
    pub e_mu_z: f64,
    pub pair_intervals: Option<[[ExpectationInterval; 2]; 2]>,
    pub t_bounds: Option<TBounds>,
    pub yields: Option<YieldBounds>,
    pub e_mu_x_up: f64,
    pub e_ph_z_up: f64,
    pub leak_ec: f64,
    /// Intensities the estimation formulas were evaluated at (these differ
    /// from the nominal config only during worst-case fluctuation scans).
    pub est_mu_z: f64,
    pub est_mu_0: f64,
    pub est_mu_1: f64,
}

impl Diagnostics {
    pub(crate) fn empty(eta: f64) -> Self {
        Diagnostics {
            eta,
            n_z: f64::NAN,
            n_x: f64::NAN,
            s_z: f64::NAN,
            s_x_total: f64::NAN,
            e_mu_z: f64::NAN,
            pair_intervals: None,
            t_bounds: None,
            yields: None,
            e_mu_x_up: f64::NAN,
            e_ph_z_up: f64::NAN,
            leak_ec: f64::NAN,
            est_mu_z: f64::NAN,
            est_mu_0: f64::NAN,
            est_mu_1: f64::NAN,
        }
    }
}

/// Key length and rate of one evaluated point, with diagnostics.
#[derive(Debug, Clone)]
pub struct KeyRateResult {
    /// Final key length in bits.
    pub length: u64,
    /// `length / N`, bits per pulse pair.
    pub rate: f64,
    pub status: PointStatus,
    pub diag: Diagnostics,
}

/// Builds the per-pair expectation interval under the selected model.
///
/// The independent-sample models act on the Bernoulli set formed by the
/// sifted X-basis detections, so their trial count is `s_X`. Under the
/// multiplicative Chernoff model a pair whose applicability conditions fail
/// falls back to the Hoeffding interval, which the same per-pair failure
/// budget covers. The Azuma trial count is selected by the run config.
fn pair_interval(
    model: BoundModel,
    observed: f64,
    obs: &Observables,
    cfg: &RunConfig,
    eps1: f64,
    p_a: f64,
    p_b: f64,
) -> Result<ExpectationInterval> {
    let s_x = obs.s_x_total();
    match model {
        BoundModel::Hoeffding => hoeffding_interval(observed, s_x, eps1, eps1),
        BoundModel::MultChernoff => {
            match mult_chernoff_interval(observed, s_x, eps1, eps1, eps1) {
                Ok(iv) => Ok(iv),
                Err(Error::ConditionsNotMet { .. }) => {
                    hoeffding_interval(observed, s_x, eps1, eps1)
                }
                Err(e) => Err(e),
            }
        }
        BoundModel::ImprovedChernoff => improved_chernoff_interval(observed, eps1, eps1),
        BoundModel::Azuma => {
            let n_trials = match cfg.azuma_trials {
                AzumaTrialCount::DetectionEvents => s_x,
                AzumaTrialCount::PerSettingPulses => (obs.n_x * p_a * p_b).round(),
                AzumaTrialCount::TotalPulses => cfg.protocol.n,
            };
            azuma_interval(observed, n_trials.max(observed), eps1, eps1)
        }
    }
}

/// Runs the estimation chain (intervals -> T bounds -> yield bounds ->
/// phase error -> key length) on fixed observables, evaluating every
/// intensity-dependent estimation formula at `est = (mu_Z, mu_0, mu_1)`.
pub(crate) fn estimate_point(
    cfg: &RunConfig,
    obs: &Observables,
    budget: &SecurityBudget,
    model: BoundModel,
    est: (f64, f64, f64),
) -> Result<KeyRateResult> {
    let (est_mu_z, est_mu_0, est_mu_1) = est;
    let eta = f64::NAN; // filled by the caller
    let mut diag = Diagnostics::empty(eta);
    diag.n_z = obs.n_z;
    diag.n_x = obs.n_x;
    diag.s_z = obs.s_z;
    diag.s_x_total = obs.s_x_total();
    diag.e_mu_z = obs.e_mu_z;
    diag.est_mu_z = est_mu_z;
    diag.est_mu_0 = est_mu_0;
    diag.est_mu_1 = est_mu_1;

    let n = cfg.protocol.n;
    if diag.s_x_total < 1.0 {
        return Ok(KeyRateResult {
            length: 0,
            rate: 0.0,
            status: PointStatus::ZeroRate(ZeroRateReason::NoXDetections),
            diag,
        });
    }

    let p = [cfg.protocol.p_mu0, 1.0 - cfg.protocol.p_mu0];
    let eps1 = budget.eps1;
    let mut intervals = [[ExpectationInterval {
        lower: 0.0,
        upper: 0.0,
        eps_lower: eps1,
        eps_upper: eps1,
    }; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            intervals[a][b] = pair_interval(
                model,
                obs.s_x_pairs[a][b],
                obs,
                cfg,
                eps1,
                p[a],
                p[b],
            )?;
        }
    }
    diag.pair_intervals = Some(intervals);

    let t = t_bounds(&intervals, [est_mu_0, est_mu_1], p, obs.n_x)?;
    diag.t_bounds = Some(t);
    let yields = compute_yield_bounds(&t, est_mu_0, est_mu_1)?;
    diag.yields = Some(yields);

    let k = k_coefficients(est_mu_z, cfg.series_cutoff)?;
    let e_mu_x = ex_upper(&yields, &k, obs.n_z, obs.s_z)?;
    diag.e_mu_x_up = e_mu_x;
    let e_ph = eph_upper(
        e_mu_x,
        diag.s_x_total,
        obs.s_z,
        budget.eps_double_prime(),
    )?;
    diag.e_ph_z_up = e_ph;
    diag.leak_ec = obs.s_z * cfg.protocol.f_ec * binary_entropy(obs.e_mu_z)?;

    let length = key_length(obs.s_z, e_ph, obs.e_mu_z, cfg.protocol.f_ec, budget)?;
    let status = if length == 0 {
        PointStatus::ZeroRate(ZeroRateReason::ZeroLength)
    } else {
        PointStatus::Ok
    };
    Ok(KeyRateResult {
        length,
        rate: length as f64 / n,
        status,
        diag,
    })
}

/// Evaluates the full pipeline at one channel loss (in dB) under the
/// selected statistical-fluctuation model.
pub fn evaluate_point(cfg: &RunConfig, loss_db: f64, model: BoundModel) -> Result<KeyRateResult> {
    if !(loss_db >= 0.0) {
        return Err(Error::arg(format!("loss {loss_db} dB must be nonnegative")));
    }
    cfg.validate()?;
    let budget = epsilon_budget(cfg.eps_sec, cfg.eps_cor)?;
    let eta = 10f64.powf(-loss_db / 10.0);

    let obs = match simulate_observables(&cfg.protocol, eta) {
        Ok(obs) => obs,
        Err(Error::ZeroSignal { .. }) => {
            return Ok(KeyRateResult {
                length: 0,
                rate: 0.0,
                status: PointStatus::ZeroRate(ZeroRateReason::ZeroSignal),
                diag: Diagnostics::empty(eta),
            });
        }
        Err(e) => return Err(e),
    };

    let p = &cfg.protocol;
    let mut result = estimate_point(cfg, &obs, &budget, model, (p.mu_z, p.mu_0, p.mu_1))?;
    result.diag.eta = eta;
    Ok(result)
}

/// Candidate grid for the optional per-point parameter optimizer.
#[derive(Debug, Clone)]
pub struct OptimizerGrid {
    pub mu_z: Vec<f64>,
    pub p_z: Vec<f64>,
}

impl Default for OptimizerGrid {
    /// Coarse grid over the region where the phase-error expansion keeps
    /// the rate positive: mu_Z from 0.004 to 0.1 (geometric), P_Z from 0.5
    /// to 0.95 in steps of 0.05.
    fn default() -> Self {
        let mu_z = (0..16)
            .map(|i| 0.004 * (0.1f64 / 0.004).powf(i as f64 / 15.0))
            .collect();
        let p_z = (0..10).map(|i| 0.5 + 0.05 * i as f64).collect();
        OptimizerGrid { mu_z, p_z }
    }
}

/// Maximizes the key rate over the optimizer grid at one loss point.
/// Returns the best result together with the achieving `(mu_Z, P_Z)`.
pub fn optimize_point(
    cfg: &RunConfig,
    loss_db: f64,
    model: BoundModel,
    grid: &OptimizerGrid,
) -> Result<(KeyRateResult, f64, f64)> {
    if grid.mu_z.is_empty() || grid.p_z.is_empty() {
        return Err(Error::arg("optimizer grid must be nonempty"));
    }
    let mut best: Option<(KeyRateResult, f64, f64)> = None;
    for &mu_z in &grid.mu_z {
        for &p_z in &grid.p_z {
            let mut candidate = *cfg;
            candidate.protocol.mu_z = mu_z;
            candidate.protocol.p_z = p_z;
            let result = evaluate_point(&candidate, loss_db, model)?;
            let better = match &best {
                None => true,
                Some((b, _, _)) => result.length > b.length,
            };
            if better {
                best = Some((result, mu_z, p_z));
            }
        }
    }
    Ok(best.expect("grid is nonempty"))
}
