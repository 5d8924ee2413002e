//! Command implementations behind the `tfqkd` binary.
//!
//! Each command renders its output into a `String` so reruns can be compared
//! byte for byte; the binary only adds argument parsing, file IO and exit
//! codes. All numeric cells are printed with `{:.16e}` (full double
//! precision, scientific notation); key lengths are integer bit counts and
//! stay plain integers.

use tfqkd::keyrate::{optimize_point, OptimizerGrid};
use tfqkd::{
    bernoulli_coverage, decoy_sandwich_check, evaluate_point, plob_bound, worst_case_rate,
    BoundModel, CoverageReport, KeyRateResult, Result, RunConfig, SandwichReport,
};

/// A loss scan request: grid, model and per-run toggles.
#[derive(Debug, Clone)]
pub struct ScanSpec {
    pub loss_start_db: f64,
    pub loss_end_db: f64,
    pub loss_step_db: f64,
    pub model: BoundModel,
    /// Overrides the config's `delta_mu` when set.
    pub delta_mu: Option<f64>,
    /// Maximize the rate over the (mu_Z, P_Z) grid at every point.
    pub optimize: bool,
}

impl ScanSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.loss_start_db <= self.loss_end_db) {
            return Err(tfqkd::Error::InvalidArgument {
                message: format!(
                    "scan start {} dB must not exceed end {} dB",
                    self.loss_start_db, self.loss_end_db
                ),
            });
        }
        if !(self.loss_step_db > 0.0) {
            return Err(tfqkd::Error::InvalidArgument {
                message: format!("scan step {} dB must be positive", self.loss_step_db),
            });
        }
        Ok(())
    }

    /// The loss grid, inclusive of both ends (up to rounding slack).
    pub fn losses(&self) -> Vec<f64> {
        let n = ((self.loss_end_db - self.loss_start_db) / self.loss_step_db + 1e-9).floor()
            as usize;
        (0..=n)
            .map(|i| self.loss_start_db + i as f64 * self.loss_step_db)
            .collect()
    }

    fn apply_delta(&self, cfg: &RunConfig) -> RunConfig {
        let mut cfg = *cfg;
        if let Some(delta) = self.delta_mu {
            cfg.protocol.delta_mu = delta;
        }
        cfg
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// PLOB reference for a CSV cell; infinite at zero loss (eta = 1).
fn plob_cell(eta: f64) -> f64 {
    match plob_bound(eta) {
        Ok(v) => v,
        Err(_) => f64::INFINITY,
    }
}

fn eta_of(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 10.0)
}

/// Evaluates one scan point, folding any compute failure into an `error`
/// status row instead of aborting the scan.
fn scan_point(cfg: &RunConfig, loss_db: f64, spec: &ScanSpec) -> (Option<KeyRateResult>, String) {
    let outcome = if spec.optimize {
        optimize_point(cfg, loss_db, spec.model, &OptimizerGrid::default()).map(|(r, _, _)| r)
    } else {
        evaluate_point(cfg, loss_db, spec.model)
    };
    match outcome {
        Ok(r) => {
            let status = r.status.name().to_string();
            (Some(r), status)
        }
        Err(_) => (None, "error".to_string()),
    }
}

fn scan_row(loss_db: f64, point: &Option<KeyRateResult>, status: &str) -> String {
    let eta = eta_of(loss_db);
    let (rate, length, e_mu_x, e_ph, s_z, s_x) = match point {
        Some(r) => (
            r.rate,
            r.length,
            r.diag.e_mu_x_up,
            r.diag.e_ph_z_up,
            r.diag.s_z,
            r.diag.s_x_total,
        ),
        None => (f64::NAN, 0, f64::NAN, f64::NAN, f64::NAN, f64::NAN),
    };
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        fmt(loss_db),
        fmt(eta),
        fmt(rate),
        length,
        fmt(plob_cell(eta)),
        fmt(e_mu_x),
        fmt(e_ph),
        fmt(s_z),
        fmt(s_x),
        status
    )
}

pub const SCAN_HEADER: &str =
    "loss_db,eta,key_rate,key_length,plob_bound,E_mu_X_up,E_ph_Z_up,s_Z,s_X_total,status";

/// Key rate versus loss under one fluctuation model. One CSV row per loss
/// point; a failed point keeps its row with an `error` status.
pub fn cmd_scan(cfg: &RunConfig, spec: &ScanSpec) -> Result<String> {
    spec.validate()?;
    let cfg = spec.apply_delta(cfg);
    cfg.validate()?;

    use rayon::prelude::*;
    let rows: Vec<String> = spec
        .losses()
        .par_iter()
        .map(|&loss_db| {
            let (point, status) = scan_point(&cfg, loss_db, spec);
            scan_row(loss_db, &point, &status)
        })
        .collect();

    let mut out = String::from(SCAN_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}

pub const COMPARE_HEADER: &str = "loss_db,eta,plob_bound,rate_hoeffding,rate_mult_chernoff,\
rate_improved_chernoff,status_hoeffding,status_mult_chernoff,status_improved_chernoff";

/// Rate columns for the three independent-sample models side by side.
pub fn cmd_compare(cfg: &RunConfig, spec: &ScanSpec) -> Result<String> {
    spec.validate()?;
    let cfg = spec.apply_delta(cfg);
    cfg.validate()?;
    let models = [
        BoundModel::Hoeffding,
        BoundModel::MultChernoff,
        BoundModel::ImprovedChernoff,
    ];

    use rayon::prelude::*;
    let rows: Vec<String> = spec
        .losses()
        .par_iter()
        .map(|&loss_db| {
            let eta = eta_of(loss_db);
            let mut rates = [f64::NAN; 3];
            let mut statuses = ["error".to_string(), "error".to_string(), "error".to_string()];
            for (k, model) in models.iter().enumerate() {
                let sub = ScanSpec {
                    model: *model,
                    ..spec.clone()
                };
                let (point, status) = scan_point(&cfg, loss_db, &sub);
                if let Some(r) = point {
                    rates[k] = r.rate;
                }
                statuses[k] = status;
            }
            format!(
                "{},{},{},{},{},{},{},{},{}",
                fmt(loss_db),
                fmt(eta),
                fmt(plob_cell(eta)),
                fmt(rates[0]),
                fmt(rates[1]),
                fmt(rates[2]),
                statuses[0],
                statuses[1],
                statuses[2]
            )
        })
        .collect();

    let mut out = String::from(COMPARE_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}

pub const FLUCT_HEADER: &str = "loss_db,eta,key_rate,key_length,plob_bound,E_mu_X_up,\
E_ph_Z_up,s_Z,s_X_total,worst_mu_Z,worst_mu_0,worst_mu_1,status";

/// Worst-case key rate versus loss under intensity fluctuations.
pub fn cmd_fluct(cfg: &RunConfig, spec: &ScanSpec, resolution: usize) -> Result<String> {
    spec.validate()?;
    let cfg = spec.apply_delta(cfg);
    cfg.validate()?;

    use rayon::prelude::*;
    let rows: Vec<String> = spec
        .losses()
        .par_iter()
        .map(|&loss_db| {
            let eta = eta_of(loss_db);
            match worst_case_rate(&cfg, loss_db, resolution) {
                Ok(w) => format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    fmt(loss_db),
                    fmt(eta),
                    fmt(w.result.rate),
                    w.result.length,
                    fmt(plob_cell(eta)),
                    fmt(w.result.diag.e_mu_x_up),
                    fmt(w.result.diag.e_ph_z_up),
                    fmt(w.result.diag.s_z),
                    fmt(w.result.diag.s_x_total),
                    fmt(w.candidate.mu_z),
                    fmt(w.candidate.mu_0),
                    fmt(w.candidate.mu_1),
                    w.result.status.name()
                ),
                Err(_) => format!(
                    "{},{},NaN,0,{},NaN,NaN,NaN,NaN,NaN,NaN,NaN,error",
                    fmt(loss_db),
                    fmt(eta),
                    fmt(plob_cell(eta))
                ),
            }
        })
        .collect();

    let mut out = String::from(FLUCT_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}

/// Monte Carlo coverage run; returns the report plus its text and CSV
/// renderings.
pub fn cmd_validate(
    model: BoundModel,
    n: u64,
    p: f64,
    eps: f64,
    trials: u64,
    seed: u64,
) -> Result<(CoverageReport, String, String)> {
    let report = bernoulli_coverage(model, n, p, eps, trials, seed)?;
    let text = report.render_text();
    let csv = report.render_csv();
    Ok((report, text, csv))
}

/// Decoy sandwich oracle run; returns the report plus its renderings.
pub fn cmd_sandwich(
    matrices: u64,
    seed: u64,
    mu_0: f64,
    mu_1: f64,
) -> Result<(SandwichReport, String, String)> {
    let report = decoy_sandwich_check(matrices, seed, mu_0, mu_1)?;
    let text = report.render_text();
    let csv = report.render_csv();
    Ok((report, text, csv))
}

/// Full single-point diagnostic dump as `key=value` lines.
pub fn cmd_point(cfg: &RunConfig, loss_db: f64, model: BoundModel) -> Result<String> {
    let r = evaluate_point(cfg, loss_db, model)?;
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        out.push_str(k);
        out.push('=');
        out.push_str(&v);
        out.push('\n');
    };
    kv("loss_db", fmt(loss_db));
    kv("eta", fmt(r.diag.eta));
    kv("model", model.name().to_string());
    kv("status", r.status.name().to_string());
    kv("key_length", r.length.to_string());
    kv("key_rate", fmt(r.rate));
    kv("plob_bound", fmt(plob_cell(r.diag.eta)));
    kv("N_Z", fmt(r.diag.n_z));
    kv("N_X", fmt(r.diag.n_x));
    kv("s_Z", fmt(r.diag.s_z));
    kv("s_X_total", fmt(r.diag.s_x_total));
    kv("E_mu_Z", fmt(r.diag.e_mu_z));
    kv("E_mu_X_up", fmt(r.diag.e_mu_x_up));
    kv("E_ph_Z_up", fmt(r.diag.e_ph_z_up));
    kv("leak_EC", fmt(r.diag.leak_ec));
    kv("est_mu_Z", fmt(r.diag.est_mu_z));
    kv("est_mu_0", fmt(r.diag.est_mu_0));
    kv("est_mu_1", fmt(r.diag.est_mu_1));
    if let Some(iv) = r.diag.pair_intervals {
        for a in 0..2 {
            for b in 0..2 {
                kv(&format!("s_{a}{b}_lower"), fmt(iv[a][b].lower));
                kv(&format!("s_{a}{b}_upper"), fmt(iv[a][b].upper));
            }
        }
    }
    if let Some(t) = r.diag.t_bounds {
        for a in 0..2 {
            for b in 0..2 {
                kv(&format!("T_{a}{b}_lower"), fmt(t.pairs[a][b].lower));
                kv(&format!("T_{a}{b}_upper"), fmt(t.pairs[a][b].upper));
            }
        }
    }
    if let Some(y) = r.diag.yields {
        kv("Y00_up", fmt(y.y00_up));
        kv("Y02_up", fmt(y.y02_up));
        kv("Y20_up", fmt(y.y20_up));
        kv("Y11_up", fmt(y.y11_up));
        kv("Y30_up", fmt(y.y30_up));
        kv("Y03_up", fmt(y.y03_up));
        kv("Y40_up", fmt(y.y40_up));
        kv("Y04_up", fmt(y.y04_up));
        kv("Y22_low", fmt(y.y22_low));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loss_grid_inclusive() {
        let spec = ScanSpec {
            loss_start_db: 0.0,
            loss_end_db: 10.0,
            loss_step_db: 2.5,
            model: BoundModel::ImprovedChernoff,
            delta_mu: None,
            optimize: false,
        };
        assert_eq!(spec.losses(), vec![0.0, 2.5, 5.0, 7.5, 10.0]);

        let single = ScanSpec {
            loss_end_db: 0.0,
            ..spec.clone()
        };
        assert_eq!(single.losses(), vec![0.0]);
    }

    #[test]
    fn scan_zero_length_grid_has_one_row() {
        let cfg = RunConfig::default();
        let spec = ScanSpec {
            loss_start_db: 30.0,
            loss_end_db: 30.0,
            loss_step_db: 1.0,
            model: BoundModel::ImprovedChernoff,
            delta_mu: None,
            optimize: false,
        };
        let csv = cmd_scan(&cfg, &spec).unwrap();
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], SCAN_HEADER);
    }

    #[test]
    fn compare_single_point_has_three_rate_columns() {
        let cfg = RunConfig::default();
        let spec = ScanSpec {
            loss_start_db: 30.0,
            loss_end_db: 30.0,
            loss_step_db: 1.0,
            model: BoundModel::ImprovedChernoff,
            delta_mu: None,
            optimize: false,
        };
        let csv = cmd_compare(&cfg, &spec).unwrap();
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1].split(',').count(), 9);
    }

    #[test]
    fn point_dump_is_deterministic() {
        let cfg = RunConfig::default();
        let a = cmd_point(&cfg, 30.0, BoundModel::ImprovedChernoff).unwrap();
        let b = cmd_point(&cfg, 30.0, BoundModel::ImprovedChernoff).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("key_length="));
        assert!(a.contains("Y22_low="));
    }

    #[test]
    fn invalid_spec_rejected() {
        let spec = ScanSpec {
            loss_start_db: 10.0,
            loss_end_db: 0.0,
            loss_step_db: 1.0,
            model: BoundModel::Hoeffding,
            delta_mu: None,
            optimize: false,
        };
        assert!(spec.validate().is_err());
        let spec2 = ScanSpec {
            loss_start_db: 0.0,
            loss_end_db: 1.0,
            loss_step_db: 0.0,
            model: BoundModel::Hoeffding,
            delta_mu: None,
            optimize: false,
        };
        assert!(spec2.validate().is_err());
    }
}
