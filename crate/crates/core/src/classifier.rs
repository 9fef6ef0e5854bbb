//! Predicts how many equilibria a game has, when the weight profile and the
//! system coefficient fall into a regime with a known answer, without running
//! the solver.
//!
//! Every item is a sufficient condition. The two conditions quantified over
//! the whole half-line (the sign of the first branch function's derivative)
//! are checked by dense sampling plus the analytic tail sign, so they are
//! sound up to grid resolution; the solver remains the ground truth and the
//! test suite cross-checks every exact prediction against it.
//!
//! All items additionally require the standing assumption `min sigma > -1`;
//! without it the usual count statements fail (branches can lose stationary
//! points to the second-order condition), so classification reports unknown.

use crate::game_model::NormalizedGame;
use serde::{Deserialize, Serialize};

/// Default small-coefficient threshold for the uniqueness items.
pub const DEFAULT_A_SMALL: f64 = 0.01;

/// Grid size used to certify the sign of the sampled derivative.
pub const QUANTIFIER_SAMPLES: usize = 100_000;

/// Default large-coefficient threshold: past every branch's turning region
/// with an order of magnitude to spare.
pub fn default_a_large(game: &NormalizedGame) -> f64 {
    10.0 * (1.0
        + game
            .sigma()
            .iter()
            .map(|s| (s.abs() + 1.0).sqrt())
            .sum::<f64>())
}

/// Uniform closed-loop bound `sqrt(sigma_max + 1) - sqrt(sigma_max)` over all
/// equilibria, available when the largest normalized weight is positive: that
/// player's gain is real only for `xi^2 >= sigma_max`, which caps
/// `|closed loop| = 1 / (|xi| + sqrt(xi^2 + 1))`.
pub fn acl_bound(game: &NormalizedGame) -> Option<f64> {
    let s = game.sigma()[0];
    (s > 0.0).then(|| (s + 1.0).sqrt() - s.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemStatus {
    Applies,
    NotApplicable,
}

impl ItemStatus {
    pub fn applies(self) -> bool {
        self == ItemStatus::Applies
    }
}

fn status(b: bool) -> ItemStatus {
    if b {
        ItemStatus::Applies
    } else {
        ItemStatus::NotApplicable
    }
}

/// Which sufficient conditions fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemFindings {
    /// Large coefficient: every branch crossed once, `2^n - 1` equilibria.
    pub i: ItemStatus,
    /// Some positive weight: at least one equilibrium at any coefficient.
    pub ii: ItemStatus,
    /// The uniform closed-loop bound of [`acl_bound`] is in force.
    pub iii: ItemStatus,
    /// All weights nonnegative and `|a| < 1`: the unique equilibrium.
    pub iv: ItemStatus,
    /// Mixed signs, dominant positive weight, small `|a|`: unique.
    pub v: ItemStatus,
    /// No positive weights, small `|a|`: unique.
    pub vi: ItemStatus,
    /// All weights zero on the stability boundary: no equilibrium.
    pub vii: ItemStatus,
}

/// Predicted number of equilibria.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountPrediction {
    Exact(usize),
    AtLeast(usize),
    Unknown,
}

/// Thresholds the classification was computed with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub a_large: f64,
    pub a_small: f64,
    pub quantifier_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    /// Whether the standing assumption `min sigma > -1` holds; when it does
    /// not, every item is reported not applicable.
    pub assumption2: bool,
    pub items: ItemFindings,
    pub predicted_count: CountPrediction,
    /// Uniform bound on every equilibrium's `|closed loop|`, when available.
    pub acl_bound: Option<f64>,
    pub thresholds_used: Thresholds,
}

/// Derivative of the all-minus branch function on the positive half-line,
/// written in the cancellation-free offset form: for `x > 0`,
/// `f_1'(x) = -1/(h1 (h1 + x)) - sum_i sigma_i / (h_i (h_i + x))` with
/// `h1 = sqrt(x^2 + 1)` and `h_i = sqrt(x^2 - sigma_i)`. The mirror symmetry
/// of the branch family replicates these values on the negative half-line, so
/// sampling `x > 0` covers both sides.
fn branch_one_derivative(sigma: &[f64], x: f64) -> f64 {
    let h1 = x.hypot(1.0);
    let mut v = -1.0 / (h1 * (h1 + x));
    for &s in sigma {
        if s == 0.0 {
            continue;
        }
        let h = if s < 0.0 {
            x.hypot((-s).sqrt())
        } else {
            let rt = s.sqrt();
            (x - rt).max(0.0).sqrt() * (x + rt).sqrt()
        };
        v -= s / (h * (h + x));
    }
    v
}

/// Samples [`branch_one_derivative`] on a combined log/linear grid over the
/// branch's positive domain and reports (saw positive, saw negative). The
/// analytic tail sign `-sgn(1 + sum sigma)` joins as a virtual sample so a
/// flip beyond the grid still counts.
fn derivative_sign_survey(sigma: &[f64], samples: usize) -> (bool, bool) {
    let s1 = sigma[0];
    let x_lo = if s1 > 0.0 {
        s1.sqrt() * (1.0 + 1e-10)
    } else {
        1e-9
    };
    let x_hi = 100.0 * (1.0 + sigma.iter().map(|s| (s.abs() + 1.0).sqrt()).sum::<f64>());
    let mut saw_pos = false;
    let mut saw_neg = false;
    let mut probe = |x: f64| {
        let v = branch_one_derivative(sigma, x);
        if v > 0.0 {
            saw_pos = true;
        } else if v < 0.0 {
            saw_neg = true;
        }
    };
    let half = samples / 2;
    let (llo, lhi) = (x_lo.ln(), x_hi.ln());
    for j in 0..half {
        let t = j as f64 / (half - 1).max(1) as f64;
        probe((llo + t * (lhi - llo)).exp());
    }
    let rest = samples - half;
    for j in 0..rest {
        let t = j as f64 / (rest - 1).max(1) as f64;
        probe(x_lo + t * (x_hi - x_lo));
    }
    let tail = -(1.0 + sigma.iter().sum::<f64>());
    if tail > 0.0 {
        saw_pos = true;
    } else if tail < 0.0 {
        saw_neg = true;
    }
    (saw_pos, saw_neg)
}

/// Classifies a game against the known count regimes. `a_large` (> 1) is the
/// coefficient size past which all `2^n - 1` equilibria are claimed;
/// `a_small` (in (0, 1]) is the size below which the uniqueness items apply.
pub fn classify(game: &NormalizedGame, a_large: f64, a_small: f64) -> Classification {
    assert!(a_large > 1.0, "a_large must exceed 1");
    assert!(
        a_small > 0.0 && a_small <= 1.0,
        "a_small must lie in (0, 1]"
    );

    let n = game.n();
    let a = game.a();
    let sigma = game.sigma();
    let s1 = sigma[0];
    let s_last = sigma[n - 1];
    let assumption2 = game.assumption2_holds();

    let (item_i, item_ii, item_iii, item_iv, item_v, item_vi, item_vii) = if !assumption2 {
        let na = ItemStatus::NotApplicable;
        (na, na, na, na, na, na, na)
    } else {
        let i = a.abs() >= a_large;
        let ii = s1 > 0.0;
        let iii = s1 > 0.0;
        let iv = s_last >= 0.0 && a.abs() < 1.0;
        let small = a.abs() <= a_small && a.abs() < 1.0;
        let v = n >= 2 && s_last < 0.0 && s1 > 0.0 && s1 > sigma[1] && small && {
            let lhs: f64 = sigma[1..].iter().map(|s| (s1 - s).sqrt()).sum();
            let rhs = (n - 1) as f64 * s1.sqrt() + (s1 + 1.0).sqrt();
            lhs < rhs && {
                let (saw_pos, _) = derivative_sign_survey(sigma, QUANTIFIER_SAMPLES);
                !saw_pos
            }
        };
        let vi = s1 <= 0.0 && small && !iv && {
            let lhs: f64 = sigma[1..].iter().map(|s| (-s).sqrt()).sum::<f64>() - (-s1).sqrt();
            lhs < 1.0 && {
                let (saw_pos, saw_neg) = derivative_sign_survey(sigma, QUANTIFIER_SAMPLES);
                !(saw_pos && saw_neg)
            }
        };
        let vii = sigma.iter().all(|&s| s == 0.0) && a.abs() == 1.0;
        (
            status(i),
            status(ii),
            status(iii),
            status(iv),
            status(v),
            status(vi),
            status(vii),
        )
    };

    let predicted_count = if item_i.applies() {
        CountPrediction::Exact((1usize << n) - 1)
    } else if item_vii.applies() {
        CountPrediction::Exact(0)
    } else if item_iv.applies() || item_v.applies() || item_vi.applies() {
        CountPrediction::Exact(1)
    } else if item_ii.applies() || (a == 0.0 && assumption2) {
        CountPrediction::AtLeast(1)
    } else {
        CountPrediction::Unknown
    };

    Classification {
        assumption2,
        items: ItemFindings {
            i: item_i,
            ii: item_ii,
            iii: item_iii,
            iv: item_iv,
            v: item_v,
            vi: item_vi,
            vii: item_vii,
        },
        predicted_count,
        acl_bound: acl_bound(game),
        thresholds_used: Thresholds {
            a_large,
            a_small,
            quantifier_samples: QUANTIFIER_SAMPLES,
        },
    }
}
