//! Monte Carlo oracles: empirical coverage of the concentration bounds on
//! binomial data, and brute-force sandwich checks for the decoy yield
//! bounds against exactly known Poisson mixtures.
//!
//! Randomness comes from ChaCha8 with an explicit seed; coverage trials are
//! partitioned into fixed-size chunks, each drawing from its own ChaCha
//! stream, so reports are bit-identical across runs and across worker
//! counts.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Binomial;
use rayon::prelude::*;

use crate::concentration::{
    azuma_interval, hoeffding_interval, improved_chernoff_interval, mult_chernoff_interval,
    BoundModel,
};
use crate::decoy::{compute_yield_bounds, TBounds};
use crate::error::{Error, Result};

/// Trials per RNG stream in the coverage harness. Fixed so that results do
/// not depend on how many workers ran them.
const TRIALS_PER_CHUNK: u64 = 512;

/// Empirical coverage of one bound model on Binomial(n, p) data.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub model: BoundModel,
    pub n: u64,
    pub p: f64,
    pub eps_target: f64,
    pub trials: u64,
    pub seed: u64,
    /// Trials where the true mean n*p exceeded the interval's upper end.
    pub violations_upper: u64,
    /// Trials where the true mean fell below the interval's lower end.
    pub violations_lower: u64,
    /// Trials the multiplicative Chernoff bound refused (conditions unmet);
    /// counted separately, never as violations.
    pub conditions_unmet: u64,
    pub pass: bool,
}

impl CoverageReport {
    /// Pass threshold per side: `eps + 3 sqrt(eps/trials)` (three binomial
    /// standard deviations of slack on the rare-event rate).
    pub fn threshold(&self) -> f64 {
        self.eps_target + 3.0 * (self.eps_target / self.trials as f64).sqrt()
    }

    pub fn rate_upper(&self) -> f64 {
        self.violations_upper as f64 / self.trials as f64
    }

    pub fn rate_lower(&self) -> f64 {
        self.violations_lower as f64 / self.trials as f64
    }

    /// Plain-text rendering, one summary line plus detail lines.
    pub fn render_text(&self) -> String {
        format!(
            "coverage {model}: n={n} p={p:e} eps={eps:e} trials={trials} seed={seed}\n\
             violations: upper={vu} ({ru:e}/side) lower={vl} ({rl:e}/side) \
             conditions_unmet={cu}\n\
             threshold per side: {thr:e}\n\
             result: {verdict}\n",
            model = self.model,
            n = self.n,
            p = self.p,
            eps = self.eps_target,
            trials = self.trials,
            seed = self.seed,
            vu = self.violations_upper,
            ru = self.rate_upper(),
            vl = self.violations_lower,
            rl = self.rate_lower(),
            cu = self.conditions_unmet,
            thr = self.threshold(),
            verdict = if self.pass { "PASS" } else { "FAIL" },
        )
    }

    /// CSV rendering: fixed header plus one data row.
    pub fn render_csv(&self) -> String {
        format!(
            "model,n,p,eps,trials,seed,violations_upper,violations_lower,conditions_unmet,\
             threshold,pass\n{},{},{:.16e},{:.16e},{},{},{},{},{},{:.16e},{}\n",
            self.model,
            self.n,
            self.p,
            self.eps_target,
            self.trials,
            self.seed,
            self.violations_upper,
            self.violations_lower,
            self.conditions_unmet,
            self.threshold(),
            self.pass,
        )
    }
}

/// Draws `trials` binomial experiments, builds the model's interval with
/// failure probability `eps` per side around each observation, and counts
/// how often the true mean `n*p` escapes.
pub fn bernoulli_coverage(
    model: BoundModel,
    n: u64,
    p: f64,
    eps: f64,
    trials: u64,
    seed: u64,
) -> Result<CoverageReport> {
    if trials < 1000 {
        return Err(Error::arg(format!(
            "coverage needs at least 1000 trials, got {trials}"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::arg(format!("p = {p:e} outside [0, 1]")));
    }
    if n == 0 {
        return Err(Error::arg("n must be positive"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidProbability {
            name: "eps",
            value: eps,
        });
    }

    let n_chunks = trials.div_ceil(TRIALS_PER_CHUNK);
    let true_mean = n as f64 * p;

    let (violations_upper, violations_lower, conditions_unmet) = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| -> Result<(u64, u64, u64)> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let binomial = Binomial::new(n, p).map_err(|e| Error::arg(e.to_string()))?;
            let chunk_trials =
                TRIALS_PER_CHUNK.min(trials - chunk * TRIALS_PER_CHUNK);

            let mut up = 0u64;
            let mut low = 0u64;
            let mut unmet = 0u64;
            for _ in 0..chunk_trials {
                let x = binomial.sample(&mut rng) as f64;
                let nf = n as f64;
                let interval = match model {
                    BoundModel::Hoeffding => hoeffding_interval(x, nf, eps, eps),
                    BoundModel::MultChernoff => {
                        match mult_chernoff_interval(x, nf, eps, eps, eps) {
                            Err(Error::ConditionsNotMet { .. }) => {
                                unmet += 1;
                                continue;
                            }
                            other => other,
                        }
                    }
                    BoundModel::ImprovedChernoff => improved_chernoff_interval(x, eps, eps),
                    BoundModel::Azuma => azuma_interval(x, nf, eps, eps),
                }?;
                if true_mean > interval.upper {
                    up += 1;
                }
                if true_mean < interval.lower {
                    low += 1;
                }
            }
            Ok((up, low, unmet))
        })
        .try_reduce(
            || (0, 0, 0),
            |a, b| Ok((a.0 + b.0, a.1 + b.1, a.2 + b.2)),
        )?;

    let mut report = CoverageReport {
        model,
        n,
        p,
        eps_target: eps,
        trials,
        seed,
        violations_upper,
        violations_lower,
        conditions_unmet,
        pass: false,
    };
    report.pass =
        report.rate_upper() <= report.threshold() && report.rate_lower() <= report.threshold();
    Ok(report)
}

/// Highest photon number of the truncated yield matrices used by the
/// sandwich oracle. With intensities at most ~1 the Poisson mass beyond 20
/// photons is far below 1e-18, and the truncated world is itself a valid
/// yield assignment.
pub const YIELD_DIM: usize = 21;

/// One sandwich violation, carrying the offending matrix for reproduction.
#[derive(Debug, Clone)]
pub struct SandwichViolation {
    pub matrix_index: u64,
    /// Which bound failed, e.g. `"y11_up"`.
    pub bound: &'static str,
    pub bound_value: f64,
    pub true_value: f64,
    /// Row-major `YIELD_DIM x YIELD_DIM` dump of the yield matrix.
    pub matrix: Vec<f64>,
}

/// Outcome of the decoy sandwich oracle run.
#[derive(Debug, Clone)]
pub struct SandwichReport {
    pub matrices: u64,
    pub seed: u64,
    pub mu_0: f64,
    pub mu_1: f64,
    pub violations: Vec<SandwichViolation>,
    pub pass: bool,
}

impl SandwichReport {
    pub fn render_text(&self) -> String {
        let mut out = format!(
            "decoy sandwich: {} random yield matrices, seed {}, mu_0={:e}, mu_1={:e}\n\
             violations: {}\nresult: {}\n",
            self.matrices,
            self.seed,
            self.mu_0,
            self.mu_1,
            self.violations.len(),
            if self.pass { "PASS" } else { "FAIL" },
        );
        for v in &self.violations {
            out.push_str(&format!(
                "matrix {}: {} = {:e} misses true value {:e}\nmatrix dump: {:?}\n",
                v.matrix_index, v.bound, v.bound_value, v.true_value, v.matrix
            ));
        }
        out
    }

    pub fn render_csv(&self) -> String {
        format!(
            "matrices,seed,mu_0,mu_1,violations,pass\n{},{},{:.16e},{:.16e},{},{}\n",
            self.matrices,
            self.seed,
            self.mu_0,
            self.mu_1,
            self.violations.len(),
            self.pass,
        )
    }
}

/// Exact Poisson-mixture values `T_ab = sum_{n,m} mu_a^n mu_b^m/(n! m!) Y_nm`
/// for the truncated yield matrix.
pub fn exact_t_values(yields: &[[f64; YIELD_DIM]; YIELD_DIM], mu_0: f64, mu_1: f64) -> [[f64; 2]; 2] {
    let weights = |mu: f64| -> [f64; YIELD_DIM] {
        let mut w = [0.0; YIELD_DIM];
        w[0] = 1.0;
        for k in 1..YIELD_DIM {
            w[k] = w[k - 1] * mu / k as f64;
        }
        w
    };
    let w = [weights(mu_0), weights(mu_1)];
    let mut t = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let mut sum = 0.0;
            for (n, row) in yields.iter().enumerate() {
                for (m, &y) in row.iter().enumerate() {
                    sum += w[a][n] * w[b][m] * y;
                }
            }
            t[a][b] = sum;
        }
    }
    t
}

/// Checks every yield bound against one exactly known yield matrix.
/// Returns the violations (empty when the sandwich holds).
pub fn check_matrix(
    yields: &[[f64; YIELD_DIM]; YIELD_DIM],
    mu_0: f64,
    mu_1: f64,
    matrix_index: u64,
) -> Result<Vec<SandwichViolation>> {
    let t = TBounds::exact(exact_t_values(yields, mu_0, mu_1));
    let bounds = compute_yield_bounds(&t, mu_0, mu_1)?;

    // Upper bounds may dip below the truth only by floating-point noise.
    const SLACK: f64 = 1e-12;
    let upper_checks = [
        ("y00_up", bounds.y00_up, yields[0][0]),
        ("y02_up", bounds.y02_up, yields[0][2]),
        ("y20_up", bounds.y20_up, yields[2][0]),
        ("y11_up", bounds.y11_up, yields[1][1]),
        ("y30_up", bounds.y30_up, yields[3][0]),
        ("y03_up", bounds.y03_up, yields[0][3]),
        ("y40_up", bounds.y40_up, yields[4][0]),
        ("y04_up", bounds.y04_up, yields[0][4]),
    ];

    let mut violations = Vec::new();
    let dump = || yields.iter().flatten().copied().collect::<Vec<f64>>();
    for (name, bound, truth) in upper_checks {
        if bound < truth - SLACK {
            violations.push(SandwichViolation {
                matrix_index,
                bound: name,
                bound_value: bound,
                true_value: truth,
                matrix: dump(),
            });
        }
    }
    if bounds.y22_low > yields[2][2] + SLACK {
        violations.push(SandwichViolation {
            matrix_index,
            bound: "y22_low",
            bound_value: bounds.y22_low,
            true_value: yields[2][2],
            matrix: dump(),
        });
    }
    Ok(violations)
}

/// Draws random yield matrices uniform in `[0,1]^(21x21)`, computes their
/// exact T values, runs all yield bounds with zero-width intervals and
/// asserts the sandwich property for each.
pub fn decoy_sandwich_check(
    matrices: u64,
    seed: u64,
    mu_0: f64,
    mu_1: f64,
) -> Result<SandwichReport> {
    if matrices == 0 {
        return Err(Error::arg("need at least one matrix"));
    }
    if !(mu_1 >= 0.0 && mu_1 < mu_0) {
        return Err(Error::arg(format!(
            "need 0 <= mu_1 < mu_0, got mu_0 = {mu_0:e}, mu_1 = {mu_1:e}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = Vec::new();
    for index in 0..matrices {
        let mut yields = [[0.0; YIELD_DIM]; YIELD_DIM];
        for row in yields.iter_mut() {
            for y in row.iter_mut() {
                *y = rng.gen::<f64>();
            }
        }
        violations.extend(check_matrix(&yields, mu_0, mu_1, index)?);
    }

    Ok(SandwichReport {
        matrices,
        seed,
        mu_0,
        mu_1,
        pass: violations.is_empty(),
        violations,
    })
}
