//! Protocol parameters, run settings and the flat key-value config format.
//!
//! Config files are plain text, one `key = value` per line, `#` comments.
//! Keys match the protocol parameter names (`N`, `P_Z`, `mu_Z`, `mu_0`,
//! `mu_1`, `P_mu0`, `alpha`, `beta`, `P_d`, `f_EC`, `delta_mu`) plus the
//! security keys `eps_sec` and `eps_cor`. A few optional keys select run
//! machinery: `azuma_trials` (`detections` | `per_setting` | `total`),
//! `fluct_resolution`, `fluct_perturb_channel`, `series_cutoff`.

use crate::error::{Error, Result};

/// All protocol and device parameters of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    /// Total pulse-pair count N.
    pub n: f64,
    /// Probability of choosing the Z basis.
    pub p_z: f64,
    /// Signal intensity (mean photon number) in the Z basis.
    pub mu_z: f64,
    /// Stronger decoy intensity.
    pub mu_0: f64,
    /// Weaker decoy intensity.
    pub mu_1: f64,
    /// Probability of picking `mu_0` for a decoy pulse.
    pub p_mu0: f64,
    /// Polarization misalignment angle in radians.
    pub alpha: f64,
    /// Phase misalignment angle in radians.
    pub beta: f64,
    /// Dark count probability per detector per pulse.
    pub p_d: f64,
    /// Error-correction inefficiency, >= 1.
    pub f_ec: f64,
    /// Fractional intensity-fluctuation magnitude, in [0, 1).
    pub delta_mu: f64,
}

/// `arcsin(sqrt(0.02))`: the 2% optical misalignment convention,
/// `sin^2(alpha) = 0.02`.
pub const MISALIGNMENT_2PCT: f64 = 0.14189705460416438;

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            n: 1e12,
            p_z: 0.75,
            mu_z: 0.01,
            mu_0: 0.4,
            mu_1: 1e-5,
            p_mu0: 0.15,
            alpha: MISALIGNMENT_2PCT,
            beta: MISALIGNMENT_2PCT,
            p_d: 1e-7,
            f_ec: 1.16,
            delta_mu: 0.0,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidConfig {
                    message: msg.to_string(),
                })
            }
        };
        check(self.n >= 1.0 && self.n.is_finite(), "N must be >= 1")?;
        check(self.p_z > 0.0 && self.p_z < 1.0, "P_Z must lie in (0, 1)")?;
        check(self.mu_z > 0.0, "mu_Z must be positive")?;
        check(self.mu_0 > 0.0, "mu_0 must be positive")?;
        check(self.mu_1 >= 0.0, "mu_1 must be nonnegative")?;
        check(self.mu_1 < self.mu_0, "mu_1 must be smaller than mu_0")?;
        check(
            self.p_mu0 > 0.0 && self.p_mu0 < 1.0,
            "P_mu0 must lie in (0, 1)",
        )?;
        check(
            (0.0..=1.0).contains(&self.p_d),
            "P_d must lie in [0, 1]",
        )?;
        check(self.f_ec >= 1.0, "f_EC must be >= 1")?;
        check(
            (0.0..1.0).contains(&self.delta_mu),
            "delta_mu must lie in [0, 1)",
        )?;
        check(self.alpha.is_finite() && self.beta.is_finite(), "misalignment angles must be finite")?;
        Ok(())
    }
}

/// Trial count fed to Azuma's inequality for each intensity pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AzumaTrialCount {
    /// The sifted X-basis detection events (the sequence whose per-event
    /// intensity indicators are being summed). Default.
    DetectionEvents,
    /// The pulses sent with the pair's intensity setting, `N_X P_A P_B`.
    PerSettingPulses,
    /// All N pulse pairs.
    TotalPulses,
}

impl std::str::FromStr for AzumaTrialCount {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "detections" => Ok(AzumaTrialCount::DetectionEvents),
            "per_setting" => Ok(AzumaTrialCount::PerSettingPulses),
            "total" => Ok(AzumaTrialCount::TotalPulses),
            other => Err(Error::arg(format!(
                "unknown azuma_trials value '{other}'; expected detections, per_setting or total"
            ))),
        }
    }
}

impl AzumaTrialCount {
    pub fn name(self) -> &'static str {
        match self {
            AzumaTrialCount::DetectionEvents => "detections",
            AzumaTrialCount::PerSettingPulses => "per_setting",
            AzumaTrialCount::TotalPulses => "total",
        }
    }
}

/// A full run configuration: protocol parameters, the security targets and
/// the numeric machinery knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub protocol: ProtocolConfig,
    /// Secrecy target; the composable budget splits it into thirteen equal
    /// roles.
    pub eps_sec: f64,
    /// Correctness target.
    pub eps_cor: f64,
    pub azuma_trials: AzumaTrialCount,
    /// Grid points per intensity axis in the worst-case fluctuation search.
    pub fluct_resolution: usize,
    /// Also substitute candidate intensities into the channel model during
    /// the worst-case search (sensitivity studies only).
    pub fluct_perturb_channel: bool,
    /// Terms per axis in the truncated coefficient series of the phase-error
    /// bound.
    pub series_cutoff: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            protocol: ProtocolConfig::default(),
            eps_sec: 1e-10,
            eps_cor: 1e-12,
            azuma_trials: AzumaTrialCount::DetectionEvents,
            fluct_resolution: 3,
            fluct_perturb_channel: false,
            series_cutoff: 40,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.protocol.validate()?;
        for (name, value) in [("eps_sec", self.eps_sec), ("eps_cor", self.eps_cor)] {
            if !(value > 0.0 && value < 1.0) {
                return Err(Error::InvalidConfig {
                    message: format!("{name} = {value:e} must lie in (0, 1)"),
                });
            }
        }
        if self.fluct_resolution < 2 {
            return Err(Error::InvalidConfig {
                message: "fluct_resolution must be >= 2".to_string(),
            });
        }
        if self.series_cutoff < 10 {
            return Err(Error::InvalidConfig {
                message: "series_cutoff must be >= 10".to_string(),
            });
        }
        Ok(())
    }

    /// Applies a single `key = value` assignment. Shared by the file parser
    /// and command-line `--set` overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::arg(format!("key '{key}': {what} (got '{value}')"));
        let num = || -> Result<f64> {
            value
                .parse::<f64>()
                .map_err(|_| bad("expected a number"))
        };
        match key {
            "N" => self.protocol.n = num()?,
            "P_Z" => self.protocol.p_z = num()?,
            "mu_Z" => self.protocol.mu_z = num()?,
            "mu_0" => self.protocol.mu_0 = num()?,
            "mu_1" => self.protocol.mu_1 = num()?,
            "P_mu0" => self.protocol.p_mu0 = num()?,
            "alpha" => self.protocol.alpha = num()?,
            "beta" => self.protocol.beta = num()?,
            "P_d" => self.protocol.p_d = num()?,
            "f_EC" => self.protocol.f_ec = num()?,
            "delta_mu" => self.protocol.delta_mu = num()?,
            "eps_sec" => self.eps_sec = num()?,
            "eps_cor" => self.eps_cor = num()?,
            "azuma_trials" => self.azuma_trials = value.parse()?,
            "fluct_resolution" => {
                self.fluct_resolution = value
                    .parse::<usize>()
                    .map_err(|_| bad("expected an integer"))?
            }
            "fluct_perturb_channel" => {
                self.fluct_perturb_channel = value
                    .parse::<bool>()
                    .map_err(|_| bad("expected true or false"))?
            }
            "series_cutoff" => {
                self.series_cutoff = value
                    .parse::<usize>()
                    .map_err(|_| bad("expected an integer"))?
            }
            _ => return Err(Error::arg(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }
}

/// Parses the flat key-value config format on top of the built-in defaults.
/// Errors carry the 1-based line number of the offending line.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let stripped = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if stripped.is_empty() {
            continue;
        }
        let (key, value) = stripped.split_once('=').ok_or_else(|| Error::Config {
            line,
            message: format!("expected 'key = value', got '{stripped}'"),
        })?;
        cfg.set(key.trim(), value.trim())
            .map_err(|e| Error::Config {
                line,
                message: e.to_string(),
            })?;
    }
    cfg.validate()?;
    Ok(cfg)
}
