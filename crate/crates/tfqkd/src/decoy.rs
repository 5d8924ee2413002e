//! Two-decoy yield estimation: expectation intervals on the four X-basis
//! counts are rescaled into bounds on the Poisson-mixture values
//!
//! `T_AB = e^(mu_A + mu_B) / (P_A P_B N_X) * s*_AB
//!       = sum_{n,m} mu_A^n mu_B^m / (n! m!) Y_nm`
//!
//! and combined into closed-form upper bounds on the yields `Y_11`, `Y_20`,
//! `Y_02`, `Y_n0`/`Y_0m` for n,m in {3,4} and `Y_00`, plus a lower bound on
//! `Y_22`. Every output is clamped into [0, 1]: the raw formulas can leave
//! that range at high loss, and clamping only loosens an upper bound.
//!
//! Index convention: `pairs[a][b]` refers to Alice choosing intensity
//! `mu_a` and Bob `mu_b`, with index 0 for the stronger decoy `mu_0`.

use crate::concentration::ExpectationInterval;
use crate::error::{Error, Result};

/// Lower/upper bounds on one `T_AB` value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TInterval {
    pub lower: f64,
    pub upper: f64,
}

/// Bounds on all four `T_AB` values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TBounds {
    pub pairs: [[TInterval; 2]; 2],
}

impl TBounds {
    /// Zero-width bounds from exactly known T values (oracle use).
    pub fn exact(values: [[f64; 2]; 2]) -> Self {
        let mk = |v: f64| TInterval { lower: v, upper: v };
        TBounds {
            pairs: [
                [mk(values[0][0]), mk(values[0][1])],
                [mk(values[1][0]), mk(values[1][1])],
            ],
        }
    }
}

/// The yield bounds feeding the phase-error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YieldBounds {
    pub y00_up: f64,
    pub y02_up: f64,
    pub y20_up: f64,
    pub y11_up: f64,
    pub y30_up: f64,
    pub y03_up: f64,
    pub y40_up: f64,
    pub y04_up: f64,
    pub y22_low: f64,
}

/// Rescales the four per-pair expectation intervals into T bounds.
///
/// The map is linear: `T = e^(mu_a + mu_b) / (P_a P_b N_X) * s*`, applied to
/// both interval ends.
pub fn t_bounds(
    s_intervals: &[[ExpectationInterval; 2]; 2],
    mu: [f64; 2],
    p: [f64; 2],
    n_x: f64,
) -> Result<TBounds> {
    if !(n_x > 0.0) || !(p[0] > 0.0) || !(p[1] > 0.0) {
        return Err(Error::arg(format!(
            "t_bounds needs positive N_X and pair probabilities, got N_X = {n_x:e}, \
             P = [{:e}, {:e}]",
            p[0], p[1]
        )));
    }
    let mut pairs = [[TInterval {
        lower: 0.0,
        upper: 0.0,
    }; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let scale = (mu[a] + mu[b]).exp() / (p[a] * p[b] * n_x);
            pairs[a][b] = TInterval {
                lower: scale * s_intervals[a][b].lower,
                upper: scale * s_intervals[a][b].upper,
            };
        }
    }
    Ok(TBounds { pairs })
}

fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// `(e^mu0 - e^mu1)(mu0 - mu1 + mu1 e^mu0 - mu0 e^mu1)`, the constant
/// appearing in the single-sided yield bounds.
fn cross_constant(mu0: f64, mu1: f64) -> f64 {
    (mu0.exp() - mu1.exp()) * (mu0 - mu1 + mu1 * mu0.exp() - mu0 * mu1.exp())
}

/// Upper bound on the single-photon-pair yield `Y_11`:
/// `(T00_up + T11_up - T01_low - T10_low) / (mu0 - mu1)^2`, clamped.
pub fn yield_y11_upper(t: &TBounds, mu0: f64, mu1: f64) -> f64 {
    let gamma_up = t.pairs[0][0].upper + t.pairs[1][1].upper
        - t.pairs[0][1].lower
        - t.pairs[1][0].lower;
    clamp01(gamma_up / ((mu0 - mu1) * (mu0 - mu1)))
}

fn gamma20_low(t: &TBounds, mu0: f64, mu1: f64) -> f64 {
    mu1 * t.pairs[0][0].lower + mu0 * t.pairs[1][1].lower
        - mu0 * t.pairs[0][1].upper
        - mu1 * t.pairs[1][0].upper
}

fn gamma02_low(t: &TBounds, mu0: f64, mu1: f64) -> f64 {
    mu1 * t.pairs[0][0].lower + mu0 * t.pairs[1][1].lower
        - mu1 * t.pairs[0][1].upper
        - mu0 * t.pairs[1][0].upper
}

/// Upper bounds on the two-photon yields `(Y_20, Y_02)`:
/// `2 [cross - Gamma_20_low] / ((mu0 + mu1)(mu0 - mu1)^2)` and the
/// index-swapped analogue, clamped.
pub fn yield_y20_y02_upper(t: &TBounds, mu0: f64, mu1: f64) -> (f64, f64) {
    let denom = (mu0 + mu1) * (mu0 - mu1) * (mu0 - mu1);
    let cross = cross_constant(mu0, mu1);
    let y20 = clamp01(2.0 * (cross - gamma20_low(t, mu0, mu1)) / denom);
    let y02 = clamp01(2.0 * (cross - gamma02_low(t, mu0, mu1)) / denom);
    (y20, y02)
}

/// Direction of the one-sided multiphoton bounds: `AliceN` bounds `Y_n0`
/// (n photons from Alice, vacuum from Bob), `BobM` bounds `Y_0m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultiPhotonSide {
    AliceN,
    BobM,
}

/// Upper bound on `Y_n0` (or `Y_0m`) for order `n >= 2`:
/// `n! [cross - Gamma_low] / ((mu0 - mu1)(mu0^n - mu1^n))`, clamped.
pub fn yield_yn0_y0m_upper(
    t: &TBounds,
    mu0: f64,
    mu1: f64,
    order: u32,
    side: MultiPhotonSide,
) -> Result<f64> {
    if order < 2 {
        return Err(Error::arg(format!(
            "multiphoton yield bound needs order >= 2, got {order}"
        )));
    }
    let gamma = match side {
        MultiPhotonSide::AliceN => gamma20_low(t, mu0, mu1),
        MultiPhotonSide::BobM => gamma02_low(t, mu0, mu1),
    };
    let factorial: f64 = (1..=order).map(f64::from).product();
    let denom = (mu0 - mu1) * (mu0.powi(order as i32) - mu1.powi(order as i32));
    Ok(clamp01(
        factorial * (cross_constant(mu0, mu1) - gamma) / denom,
    ))
}

/// Lower bound on `Y_22`:
/// `4 [Gamma_11_low - (e^mu0 - e^mu1)^2] / (mu0^2 - mu1^2)^2 + 1`, clamped.
pub fn yield_y22_lower(t: &TBounds, mu0: f64, mu1: f64) -> f64 {
    let gamma_low = t.pairs[0][0].lower + t.pairs[1][1].lower
        - t.pairs[0][1].upper
        - t.pairs[1][0].upper;
    let e_diff = mu0.exp() - mu1.exp();
    let denom = (mu0 * mu0 - mu1 * mu1).powi(2);
    clamp01(4.0 * (gamma_low - e_diff * e_diff) / denom + 1.0)
}

/// Upper bound on the vacuum yield `Y_00`, assembled from the already
/// computed multiphoton bounds, clamped.
#[allow(clippy::too_many_arguments)]
pub fn yield_y00_upper(
    t: &TBounds,
    y20_up: f64,
    y02_up: f64,
    y30_up: f64,
    y03_up: f64,
    y40_up: f64,
    y04_up: f64,
    y22_low: f64,
    mu0: f64,
    mu1: f64,
) -> f64 {
    let gamma00_up = mu1 * mu1 * t.pairs[0][0].upper + mu0 * mu0 * t.pairs[1][1].upper
        - mu0 * mu1 * (t.pairs[0][1].lower + t.pairs[1][0].lower);
    let diff = mu0 - mu1;

    let term1 = gamma00_up / (diff * diff);
    let term2 = mu0 * mu1
        * (12.0 * diff * (y20_up + y02_up)
            + 4.0 * (mu0 * mu0 - mu1 * mu1) * (y30_up + y03_up)
            + (mu0.powi(3) - mu1.powi(3)) * (y40_up + y04_up))
        / (24.0 * diff);
    let term3 = mu1 * (24.0 * mu0.exp() - mu0.powi(4) - 4.0 * mu0.powi(3) - 12.0 * mu0 * mu0 - 24.0)
        / (12.0 * diff);
    let term4 = -mu0
        * (24.0 * mu1.exp() - mu1.powi(4) - 4.0 * mu1.powi(3) - 12.0 * mu1 * mu1 - 24.0)
        / (12.0 * diff);
    let term5 = -mu0 * mu0 * mu1 * mu1 * y22_low / 4.0;

    clamp01(term1 + term2 + term3 + term4 + term5)
}

/// Runs the whole chain of yield bounds off one set of T bounds.
pub fn compute_yield_bounds(t: &TBounds, mu0: f64, mu1: f64) -> Result<YieldBounds> {
    let y11_up = yield_y11_upper(t, mu0, mu1);
    let (y20_up, y02_up) = yield_y20_y02_upper(t, mu0, mu1);
    let y30_up = yield_yn0_y0m_upper(t, mu0, mu1, 3, MultiPhotonSide::AliceN)?;
    let y03_up = yield_yn0_y0m_upper(t, mu0, mu1, 3, MultiPhotonSide::BobM)?;
    let y40_up = yield_yn0_y0m_upper(t, mu0, mu1, 4, MultiPhotonSide::AliceN)?;
    let y04_up = yield_yn0_y0m_upper(t, mu0, mu1, 4, MultiPhotonSide::BobM)?;
    let y22_low = yield_y22_lower(t, mu0, mu1);
    let y00_up = yield_y00_upper(
        t, y20_up, y02_up, y30_up, y03_up, y40_up, y04_up, y22_low, mu0, mu1,
    );
    Ok(YieldBounds {
        y00_up,
        y02_up,
        y20_up,
        y11_up,
        y30_up,
        y03_up,
        y40_up,
        y04_up,
        y22_low,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concentration::ExpectationInterval;
    use approx::assert_relative_eq;

    const MU0: f64 = 0.4;
    const MU1: f64 = 1e-5;

    /// T values of a world where every yield equals `y`:
    /// `T_ab = y e^(mu_a + mu_b)`.
    fn constant_world(y: f64, mu0: f64, mu1: f64) -> TBounds {
        let mu = [mu0, mu1];
        let mut v = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                v[a][b] = y * (mu[a] + mu[b]).exp();
            }
        }
        TBounds::exact(v)
    }

    #[test]
    fn t_bounds_is_the_expected_linear_map() {
        let iv = |lower, upper| ExpectationInterval {
            lower,
            upper,
            eps_lower: 1e-10,
            eps_upper: 1e-10,
        };
        let s = [[iv(90.0, 110.0), iv(40.0, 60.0)], [iv(40.0, 60.0), iv(5.0, 15.0)]];
        let t = t_bounds(&s, [MU0, MU0], [0.15, 0.15], 1e6).unwrap();
        // e^0.8 * 100 / 22500 with the interval ends scaled alike.
        let scale = (0.8f64).exp() / (0.15 * 0.15 * 1e6);
        assert_relative_eq!(t.pairs[0][0].upper, scale * 110.0, max_relative = 1e-14);
        assert_relative_eq!(
            scale * 100.0,
            9.8912930155220782e-3,
            max_relative = 1e-12
        );

        // Widening the s-interval widens T proportionally.
        let s2 = [[iv(80.0, 120.0), s[0][1]], [s[1][0], s[1][1]]];
        let t2 = t_bounds(&s2, [MU0, MU0], [0.15, 0.15], 1e6).unwrap();
        assert_relative_eq!(
            t2.pairs[0][0].upper - t.pairs[0][0].upper,
            scale * 10.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn constant_yield_world_collapses_t() {
        // With Y_nm identically y the Poisson mixture sums to y e^(mu_a+mu_b),
        // so a zero-width s-interval at P_a P_b N_X e^-(mu_a+mu_b) y maps to
        // T = y.
        let y = 0.37;
        let mu = [MU0, MU1];
        let p = [0.15, 0.85];
        let n_x = 1e8;
        let mut s = [[ExpectationInterval {
            lower: 0.0,
            upper: 0.0,
            eps_lower: 1e-10,
            eps_upper: 1e-10,
        }; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                let v = p[a] * p[b] * n_x * (-(mu[a] + mu[b])).exp() * y;
                s[a][b].lower = v;
                s[a][b].upper = v;
            }
        }
        let t = t_bounds(&s, mu, p, n_x).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                assert_relative_eq!(t.pairs[a][b].lower, y, max_relative = 1e-12);
                assert_relative_eq!(t.pairs[a][b].upper, y, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn y11_constant_world_frozen() {
        // y = 0.1: raw bound 0.1 (e^mu0 - e^mu1)^2/(mu0-mu1)^2 = 0.15118...,
        // above the true value as an upper bound must be.
        let t = constant_world(0.1, MU0, MU1);
        let y11 = yield_y11_upper(&t, MU0, MU1);
        assert_relative_eq!(y11, 0.15118361956573384, max_relative = 1e-12);
        assert!(y11 >= 0.1);
    }

    #[test]
    fn y11_all_ones_clamps() {
        let t = constant_world(1.0, MU0, MU1);
        assert_eq!(yield_y11_upper(&t, MU0, MU1), 1.0);
    }

    #[test]
    fn y20_symmetry_under_index_swap() {
        // Symmetric T (T01 = T10) makes the two bounds coincide.
        let t = constant_world(0.2, MU0, MU1);
        let (y20, y02) = yield_y20_y02_upper(&t, MU0, MU1);
        assert_relative_eq!(y20, y02, max_relative = 1e-14);

        // Swapping the off-diagonal intervals swaps the bounds.
        let mut v = [[0.31, 0.17], [0.05, 0.02]];
        let t = TBounds::exact(v);
        let (a20, a02) = yield_y20_y02_upper(&t, MU0, MU1);
        v[0][1] = 0.05;
        v[1][0] = 0.17;
        let t_swapped = TBounds::exact(v);
        let (b20, b02) = yield_y20_y02_upper(&t_swapped, MU0, MU1);
        assert_relative_eq!(a20, b02, max_relative = 1e-14);
        assert_relative_eq!(a02, b20, max_relative = 1e-14);
    }

    #[test]
    fn y20_constant_world_bounds_truth() {
        let t = constant_world(0.0, MU0, MU1);
        let (y20, y02) = yield_y20_y02_upper(&t, MU0, MU1);
        assert!(y20 >= 0.0 && y02 >= 0.0);

        let t = constant_world(0.1, MU0, MU1);
        let (y20, y02) = yield_y20_y02_upper(&t, MU0, MU1);
        assert!(y20 >= 0.1 && y02 >= 0.1);
    }

    #[test]
    fn order_two_multiphoton_reduces_to_y20() {
        // (mu0 - mu1)(mu0^2 - mu1^2) = (mu0 + mu1)(mu0 - mu1)^2, so the
        // order-2 formula and the dedicated Y_20 bound agree exactly.
        let t = constant_world(0.23, MU0, MU1);
        let (y20, y02) = yield_y20_y02_upper(&t, MU0, MU1);
        let n2_alice = yield_yn0_y0m_upper(&t, MU0, MU1, 2, MultiPhotonSide::AliceN).unwrap();
        let n2_bob = yield_yn0_y0m_upper(&t, MU0, MU1, 2, MultiPhotonSide::BobM).unwrap();
        assert_relative_eq!(y20, n2_alice, max_relative = 1e-13);
        assert_relative_eq!(y02, n2_bob, max_relative = 1e-13);
    }

    #[test]
    fn multiphoton_constant_world() {
        let t = constant_world(1.0, MU0, MU1);
        for order in [3, 4] {
            for side in [MultiPhotonSide::AliceN, MultiPhotonSide::BobM] {
                assert_eq!(yield_yn0_y0m_upper(&t, MU0, MU1, order, side).unwrap(), 1.0);
            }
        }
        let t = constant_world(0.1, MU0, MU1);
        let y40 = yield_yn0_y0m_upper(&t, MU0, MU1, 4, MultiPhotonSide::AliceN).unwrap();
        assert!(y40 >= 0.1);
        assert!(yield_yn0_y0m_upper(&t, MU0, MU1, 1, MultiPhotonSide::AliceN).is_err());
    }

    #[test]
    fn y22_saturates_at_all_ones() {
        let t = constant_world(1.0, MU0, MU1);
        assert_relative_eq!(yield_y22_lower(&t, MU0, MU1), 1.0, max_relative = 1e-9);
    }

    #[test]
    fn y22_clamps_at_zero_for_empty_t() {
        let t = TBounds::exact([[0.0; 2]; 2]);
        assert_eq!(yield_y22_lower(&t, MU0, MU1), 0.0);
    }

    #[test]
    fn y22_constant_world_is_a_lower_bound() {
        let t = constant_world(0.1, MU0, MU1);
        assert!(yield_y22_lower(&t, MU0, MU1) <= 0.1);
    }

    #[test]
    fn y00_constant_world_bounds_truth() {
        let t = constant_world(0.1, MU0, MU1);
        let y = compute_yield_bounds(&t, MU0, MU1).unwrap();
        assert!(y.y00_up >= 0.1);
        assert!(y.y00_up <= 1.0);
    }

    #[test]
    fn y00_zero_observables_small_mu1() {
        // All-zero T with mu_1 -> 0: every term collapses and claims nothing.
        let t = TBounds::exact([[0.0; 2]; 2]);
        let y = compute_yield_bounds(&t, MU0, 1e-9).unwrap();
        assert!(y.y00_up.abs() < 1e-9);
    }

    #[test]
    fn y00_clamps_above_one() {
        let t = constant_world(25.0, MU0, MU1);
        let y = compute_yield_bounds(&t, MU0, MU1).unwrap();
        assert_eq!(y.y00_up, 1.0);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_t() -> impl Strategy<Value = [[(f64, f64); 2]; 2]> {
            // (lower, width) per pair; T values in a physically plausible range.
            let cell = (0.0f64..2.0, 0.0f64..0.5);
            [[cell.clone(), cell.clone()], [cell.clone(), cell]]
        }

        fn to_bounds(raw: &[[(f64, f64); 2]; 2]) -> TBounds {
            let mk = |(lo, w): (f64, f64)| TInterval {
                lower: lo,
                upper: lo + w,
            };
            TBounds {
                pairs: [
                    [mk(raw[0][0]), mk(raw[0][1])],
                    [mk(raw[1][0]), mk(raw[1][1])],
                ],
            }
        }

        proptest! {
            #[test]
            fn outputs_stay_in_unit_interval(raw in arb_t()) {
                let t = to_bounds(&raw);
                let y = compute_yield_bounds(&t, MU0, MU1).unwrap();
                for v in [
                    y.y00_up, y.y02_up, y.y20_up, y.y11_up, y.y30_up, y.y03_up,
                    y.y40_up, y.y04_up, y.y22_low,
                ] {
                    prop_assert!((0.0..=1.0).contains(&v));
                }
            }

            #[test]
            fn widening_any_interval_never_tightens(
                raw in arb_t(),
                a in 0usize..2,
                b in 0usize..2,
                grow in 0.01f64..0.5,
            ) {
                let t = to_bounds(&raw);
                let y = compute_yield_bounds(&t, MU0, MU1).unwrap();

                let mut wider = t;
                wider.pairs[a][b].lower = (wider.pairs[a][b].lower - grow).max(0.0);
                wider.pairs[a][b].upper += grow;
                let yw = compute_yield_bounds(&wider, MU0, MU1).unwrap();

                let slack = 1e-12;
                prop_assert!(yw.y00_up >= y.y00_up - slack);
                prop_assert!(yw.y02_up >= y.y02_up - slack);
                prop_assert!(yw.y20_up >= y.y20_up - slack);
                prop_assert!(yw.y11_up >= y.y11_up - slack);
                prop_assert!(yw.y30_up >= y.y30_up - slack);
                prop_assert!(yw.y03_up >= y.y03_up - slack);
                prop_assert!(yw.y40_up >= y.y40_up - slack);
                prop_assert!(yw.y04_up >= y.y04_up - slack);
                prop_assert!(yw.y22_low <= y.y22_low + slack);
            }

            #[test]
            fn index_swap_exchanges_sides(raw in arb_t()) {
                let t = to_bounds(&raw);
                let mut swapped = t;
                swapped.pairs[0][1] = t.pairs[1][0];
                swapped.pairs[1][0] = t.pairs[0][1];

                let y = compute_yield_bounds(&t, MU0, MU1).unwrap();
                let ys = compute_yield_bounds(&swapped, MU0, MU1).unwrap();
                prop_assert!((y.y20_up - ys.y02_up).abs() < 1e-12);
                prop_assert!((y.y02_up - ys.y20_up).abs() < 1e-12);
                prop_assert!((y.y30_up - ys.y03_up).abs() < 1e-12);
                prop_assert!((y.y40_up - ys.y04_up).abs() < 1e-12);
                prop_assert!((y.y11_up - ys.y11_up).abs() < 1e-12);
                prop_assert!((y.y22_low - ys.y22_low).abs() < 1e-12);
            }
        }
    }
}
