//! Game parameters, validation, and player normalization.
//!
//! A game is given by the open-loop coefficient `a` plus, per player, an
//! input coefficient `b_i != 0`, a state weight `q_i`, and a control weight
//! `r_i > 0`. Each player collapses to the dimensionless weight
//! `sigma_i = b_i^2 q_i / r_i`; the solver wants those nonincreasing, so
//! validation sorts the players by `sigma` (descending, stable) and keeps the
//! permutation for reporting results back in the caller's order.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Raw game parameters in the caller's player order.
///
/// The JSON form is an object with exactly the fields `n`, `a`, `b`, `q`,
/// `r`; unknown fields are rejected so typos fail loudly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpec {
    /// Number of players.
    pub n: usize,
    /// Open-loop state coefficient.
    pub a: f64,
    /// Input coefficients, one per player, all nonzero.
    pub b: Vec<f64>,
    /// State weights, one per player (any sign).
    pub q: Vec<f64>,
    /// Control weights, one per player, all strictly positive.
    pub r: Vec<f64>,
}

impl GameSpec {
    pub fn from_json_str(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("GameSpec serializes")
    }
}

/// Why a [`GameSpec`] was rejected. Player indices are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub enum ValidationError {
    NoPlayers,
    LengthMismatch {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    NonFinite {
        field: &'static str,
        player: Option<usize>,
    },
    ZeroInputCoefficient {
        player: usize,
    },
    NonPositiveControlWeight {
        player: usize,
        value: f64,
    },
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationError::NoPlayers => write!(f, "game must have at least one player"),
            ValidationError::LengthMismatch {
                field,
                expected,
                found,
            } => write!(f, "field `{field}` has {found} entries but n = {expected}"),
            ValidationError::NonFinite {
                field,
                player: Some(p),
            } => write!(f, "field `{field}` is not finite for player {p}"),
            ValidationError::NonFinite {
                field,
                player: None,
            } => write!(f, "field `{field}` is not finite"),
            ValidationError::ZeroInputCoefficient { player } => {
                write!(f, "input coefficient b is zero for player {player}")
            }
            ValidationError::NonPositiveControlWeight { player, value } => write!(
                f,
                "control weight r must be positive, got {value} for player {player}"
            ),
        }
    }
}

impl std::error::Error for ValidationError {}

/// The dimensionless per-player weight `b^2 q / r`.
pub fn sigma_of(b: f64, q: f64, r: f64) -> f64 {
    b * b * q / r
}

/// A validated game with players sorted so `sigma` is nonincreasing.
///
/// All accessors refer to the sorted order; [`NormalizedGame::to_original_order`]
/// maps per-player vectors back to the order the caller supplied.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedGame {
    spec: GameSpec,
    sigma: Vec<f64>,
    /// `perm[i]` = original index of the player now at sorted position `i`.
    perm: Vec<usize>,
    assumption2: bool,
}

impl NormalizedGame {
    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn a(&self) -> f64 {
        self.spec.a
    }

    /// Input coefficients in sorted order.
    pub fn b(&self) -> &[f64] {
        &self.spec.b
    }

    /// State weights in sorted order.
    pub fn q(&self) -> &[f64] {
        &self.spec.q
    }

    /// Control weights in sorted order.
    pub fn r(&self) -> &[f64] {
        &self.spec.r
    }

    /// The weights `b_i^2 q_i / r_i`, nonincreasing.
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// `perm()[i]` is the original (0-based) index of sorted player `i`.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Whether `sigma_N > -1`, the standing condition under which every
    /// stabilizing stationary point automatically has positive second-order
    /// coefficients `r_i + b_i^2 p_i`.
    pub fn assumption2_holds(&self) -> bool {
        self.assumption2
    }

    /// The game as sorted, e.g. for re-serialization.
    pub fn sorted_spec(&self) -> &GameSpec {
        &self.spec
    }

    /// Maps a per-player vector from sorted order back to the caller's order.
    pub fn to_original_order(&self, values: &[f64]) -> Vec<f64> {
        assert_eq!(values.len(), self.spec.n, "per-player vector length");
        let mut out = vec![0.0; values.len()];
        for (sorted_idx, &orig_idx) in self.perm.iter().enumerate() {
            out[orig_idx] = values[sorted_idx];
        }
        out
    }
}

/// Checks a [`GameSpec`] and produces the sorted [`NormalizedGame`].
pub fn validate_game(spec: &GameSpec) -> Result<NormalizedGame, ValidationError> {
    if spec.n == 0 {
        return Err(ValidationError::NoPlayers);
    }
    for (field, len) in [
        ("b", spec.b.len()),
        ("q", spec.q.len()),
        ("r", spec.r.len()),
    ] {
        if len != spec.n {
            return Err(ValidationError::LengthMismatch {
                field,
                expected: spec.n,
                found: len,
            });
        }
    }
    if !spec.a.is_finite() {
        return Err(ValidationError::NonFinite {
            field: "a",
            player: None,
        });
    }
    for i in 0..spec.n {
        for (field, v) in [("b", spec.b[i]), ("q", spec.q[i]), ("r", spec.r[i])] {
            if !v.is_finite() {
                return Err(ValidationError::NonFinite {
                    field,
                    player: Some(i + 1),
                });
            }
        }
        if spec.b[i] == 0.0 {
            return Err(ValidationError::ZeroInputCoefficient { player: i + 1 });
        }
        if spec.r[i] <= 0.0 {
            return Err(ValidationError::NonPositiveControlWeight {
                player: i + 1,
                value: spec.r[i],
            });
        }
    }

    let sigma_orig: Vec<f64> = (0..spec.n)
        .map(|i| sigma_of(spec.b[i], spec.q[i], spec.r[i]))
        .collect();
    let mut perm: Vec<usize> = (0..spec.n).collect();
    // Stable sort: equal sigmas keep the caller's relative order.
    perm.sort_by(|&i, &j| sigma_orig[j].total_cmp(&sigma_orig[i]));

    let sorted = GameSpec {
        n: spec.n,
        a: spec.a,
        b: perm.iter().map(|&i| spec.b[i]).collect(),
        q: perm.iter().map(|&i| spec.q[i]).collect(),
        r: perm.iter().map(|&i| spec.r[i]).collect(),
    };
    let sigma: Vec<f64> = perm.iter().map(|&i| sigma_orig[i]).collect();
    let assumption2 = sigma[spec.n - 1] > -1.0;

    Ok(NormalizedGame {
        spec: sorted,
        sigma,
        perm,
        assumption2,
    })
}
