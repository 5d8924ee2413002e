//! Worst-case key rate under source intensity fluctuations.
//!
//! Each nominal intensity `mu` is only known to lie in
//! `[mu (1 - delta_mu), mu (1 + delta_mu)]`. The key rate is minimized over
//! a Cartesian grid of candidate triples `(mu_Z, mu_0, mu_1)` spanning those
//! ranges, re-evaluating every estimation-side formula at the candidate
//! intensities. Dependence between detection events (the reason intensity
//! fluctuations void the independence assumption) is absorbed by using
//! Azuma intervals throughout.
//!
//! Candidate evaluations are independent; they run as a parallel map
//! followed by a deterministic minimum.

use rayon::prelude::*;

use crate::channel::simulate_observables;
use crate::concentration::BoundModel;
use crate::config::{ProtocolConfig, RunConfig};
use crate::error::{Error, Result};
use crate::keyrate::{epsilon_budget, estimate_point, Diagnostics, KeyRateResult, PointStatus,
    ZeroRateReason};

/// One candidate intensity triple inside the fluctuation box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityCandidate {
    pub mu_z: f64,
    pub mu_0: f64,
    pub mu_1: f64,
}

/// Cartesian candidate grid over the three fluctuation ranges,
/// `resolution` points per axis including both endpoints.
///
/// `delta_mu = 0` collapses to the single nominal triple. Candidates that
/// break the `mu_1 < mu_0` ordering (possible only for very large
/// `delta_mu`) are dropped.
pub fn intensity_grid(config: &ProtocolConfig, resolution: usize) -> Result<Vec<IntensityCandidate>> {
    config.validate()?;
    if resolution < 2 {
        return Err(Error::arg(format!(
            "grid resolution {resolution} must be >= 2"
        )));
    }
    let delta = config.delta_mu;
    if delta == 0.0 {
        return Ok(vec![IntensityCandidate {
            mu_z: config.mu_z,
            mu_0: config.mu_0,
            mu_1: config.mu_1,
        }]);
    }

    let axis = |mu: f64| -> Vec<f64> {
        let lo = mu * (1.0 - delta);
        let hi = mu * (1.0 + delta);
        (0..resolution)
            .map(|i| lo + (hi - lo) * i as f64 / (resolution - 1) as f64)
            .collect()
    };
    let mu_z_axis = axis(config.mu_z);
    let mu_0_axis = axis(config.mu_0);
    let mu_1_axis = axis(config.mu_1);

    let mut grid = Vec::with_capacity(resolution * resolution * resolution);
    for &mu_z in &mu_z_axis {
        for &mu_0 in &mu_0_axis {
            for &mu_1 in &mu_1_axis {
                if mu_1 < mu_0 {
                    grid.push(IntensityCandidate { mu_z, mu_0, mu_1 });
                }
            }
        }
    }
    Ok(grid)
}

/// Worst-case result: the minimum over the candidate grid and the triple
/// achieving it.
#[derive(Debug, Clone)]
pub struct WorstCaseResult {
    pub result: KeyRateResult,
    pub candidate: IntensityCandidate,
}

/// Minimizes the key length over the intensity-candidate grid at one loss
/// point, with Azuma intervals for the dependent detection events.
///
/// Observables are simulated at the nominal intensities (the fluctuation is
/// an estimation-side uncertainty); setting `fluct_perturb_channel` in the
/// config also re-simulates the channel per candidate for sensitivity
/// studies.
pub fn worst_case_rate(cfg: &RunConfig, loss_db: f64, resolution: usize) -> Result<WorstCaseResult> {
    if !(loss_db >= 0.0) {
        return Err(Error::arg(format!("loss {loss_db} dB must be nonnegative")));
    }
    cfg.validate()?;
    let budget = epsilon_budget(cfg.eps_sec, cfg.eps_cor)?;
    let eta = 10f64.powf(-loss_db / 10.0);

    let candidates = intensity_grid(&cfg.protocol, resolution)?;
    if candidates.is_empty() {
        return Err(Error::arg(
            "fluctuation grid is empty: every candidate broke the mu_1 < mu_0 ordering",
        ));
    }

    let nominal_obs = match simulate_observables(&cfg.protocol, eta) {
        Ok(obs) => Some(obs),
        Err(Error::ZeroSignal { .. }) => None,
        Err(e) => return Err(e),
    };
    let Some(nominal_obs) = nominal_obs else {
        return Ok(WorstCaseResult {
            result: KeyRateResult {
                length: 0,
                rate: 0.0,
                status: PointStatus::ZeroRate(ZeroRateReason::ZeroSignal),
                diag: Diagnostics::empty(eta),
            },
            candidate: candidates[0],
        });
    };

    let evaluated: Vec<Result<KeyRateResult>> = candidates
        .par_iter()
        .map(|cand| {
            let obs = if cfg.fluct_perturb_channel {
                let mut perturbed = cfg.protocol;
                perturbed.mu_z = cand.mu_z;
                perturbed.mu_0 = cand.mu_0;
                perturbed.mu_1 = cand.mu_1;
                match simulate_observables(&perturbed, eta) {
                    Ok(obs) => obs,
                    Err(Error::ZeroSignal { .. }) => {
                        return Ok(KeyRateResult {
                            length: 0,
                            rate: 0.0,
                            status: PointStatus::ZeroRate(ZeroRateReason::ZeroSignal),
                            diag: Diagnostics::empty(eta),
                        })
                    }
                    Err(e) => return Err(e),
                }
            } else {
                nominal_obs
            };
            estimate_point(
                cfg,
                &obs,
                &budget,
                BoundModel::Azuma,
                (cand.mu_z, cand.mu_0, cand.mu_1),
            )
        })
        .collect();

    let mut worst: Option<(usize, KeyRateResult)> = None;
    for (idx, item) in evaluated.into_iter().enumerate() {
        let mut result = item?;
        result.diag.eta = eta;
        let replace = match &worst {
            None => true,
            Some((_, w)) => result.length < w.length,
        };
        if replace {
            worst = Some((idx, result));
        }
    }
    let (idx, result) = worst.expect("candidate list is nonempty");
    Ok(WorstCaseResult {
        result,
        candidate: candidates[idx],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keyrate::evaluate_point;

    #[test]
    fn zero_delta_gives_single_nominal_candidate() {
        let p = ProtocolConfig::default();
        let grid = intensity_grid(&p, 3).unwrap();
        assert_eq!(grid.len(), 1);
        assert_eq!(grid[0].mu_z, p.mu_z);
    }

    #[test]
    fn grid_has_expected_size_and_endpoints() {
        let mut p = ProtocolConfig::default();
        p.delta_mu = 0.1;
        let grid = intensity_grid(&p, 3).unwrap();
        assert_eq!(grid.len(), 27);
        let mu_zs: Vec<f64> = grid.iter().map(|c| c.mu_z).collect();
        let lo = p.mu_z * 0.9;
        let hi = p.mu_z * 1.1;
        assert!(mu_zs.iter().any(|&v| (v - lo).abs() < 1e-15));
        assert!(mu_zs.iter().any(|&v| (v - hi).abs() < 1e-15));
        // Every candidate stays in its fluctuation range.
        for c in &grid {
            assert!(c.mu_z >= lo - 1e-15 && c.mu_z <= hi + 1e-15);
            assert!(c.mu_0 >= p.mu_0 * 0.9 - 1e-15 && c.mu_0 <= p.mu_0 * 1.1 + 1e-15);
            assert!(c.mu_1 >= p.mu_1 * 0.9 - 1e-15 && c.mu_1 <= p.mu_1 * 1.1 + 1e-15);
            assert!(c.mu_1 < c.mu_0);
        }
    }

    #[test]
    fn ordering_violations_are_dropped() {
        let mut p = ProtocolConfig::default();
        p.mu_0 = 0.4;
        p.mu_1 = 0.3;
        p.delta_mu = 0.2; // mu_1 up to 0.36, mu_0 down to 0.32: some clash
        let grid = intensity_grid(&p, 3).unwrap();
        assert!(grid.len() < 27);
        assert!(grid.iter().all(|c| c.mu_1 < c.mu_0));
    }

    #[test]
    fn zero_delta_matches_azuma_evaluate_point_exactly() {
        let mut cfg = RunConfig::default();
        cfg.protocol.n = 1e14;
        cfg.protocol.delta_mu = 0.0;
        let direct = evaluate_point(&cfg, 35.0, BoundModel::Azuma).unwrap();
        let worst = worst_case_rate(&cfg, 35.0, 3).unwrap();
        assert_eq!(direct.length, worst.result.length);
        assert_eq!(direct.rate, worst.result.rate);
    }

    #[test]
    fn worst_case_never_exceeds_nominal_azuma() {
        let mut cfg = RunConfig::default();
        cfg.protocol.n = 1e14;
        cfg.protocol.delta_mu = 0.1;
        let nominal = evaluate_point(&cfg, 35.0, BoundModel::Azuma).unwrap();
        let worst = worst_case_rate(&cfg, 35.0, 3).unwrap();
        assert!(worst.result.length <= nominal.length);
    }

    #[test]
    fn rate_nonincreasing_in_delta() {
        let mut prev = u64::MAX;
        for delta in [0.0, 0.1, 0.2, 0.3] {
            let mut cfg = RunConfig::default();
            cfg.protocol.n = 1e14;
            cfg.protocol.p_d = 1e-8;
            cfg.protocol.delta_mu = delta;
            let worst = worst_case_rate(&cfg, 35.0, 3).unwrap();
            assert!(
                worst.result.length <= prev,
                "length grew when delta_mu rose to {delta}"
            );
            prev = worst.result.length;
        }
    }
}
