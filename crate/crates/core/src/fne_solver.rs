//! Finds every stabilizing linear feedback equilibrium of a validated game.
//!
//! Each of the `2^N` sign branches is intersected with the horizontal line at
//! level `a`. Bounded stretches of the branch domain get a dense uniform
//! grid, split at the breakpoints `+-sqrt(sigma_i)` so those always land on
//! sample nodes; the unbounded stretches are rescanned in `u = 1/xi`, which
//! catches roots arbitrarily far out on the flat tails (where the curve
//! decays to zero and small `|a|` games keep their equilibria). Sign changes
//! are bisected and polished with Newton steps on the closed-form derivative;
//! grid points that dip close to the level without crossing trigger an
//! extremum refinement that either certifies a tangential root or splits into
//! two regular brackets.
//!
//! Every root then passes through gain recovery, cost propagation, and the
//! admissibility checks (closed-loop stability and positive second-order
//! coefficients); roots that survive are deduplicated by gain vector, since
//! distinct branches can describe the same equilibrium when a radicand
//! vanishes at the root.

use crate::aux_functions::{all_branches, linspace, BranchCurve, BranchTuple};
use crate::game_model::NormalizedGame;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Residual threshold for an accepted root, times `max(1, |a|)`.
const ACCEPT_RESIDUAL: f64 = 1e-10;
/// Grid dip threshold that triggers extremum refinement, times `max(1, |a|)`.
const TANGENT_BAND: f64 = 1e-6;
/// Fewest samples any sub-segment receives regardless of its length.
const MIN_SEG_POINTS: usize = 64;

/// Tuning knobs for the scan. The defaults resolve every game in the test
/// corpus; they only need touching for adversarial weight vectors.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Bisection width under which a bracketed root is considered located.
    pub xi_abs_tol: f64,
    /// Grid samples per bounded domain stretch (tails use a tenth of this).
    pub scan_points: usize,
    /// Scan radius for the bounded stretches; `None` derives
    /// `2 (|a| + 1 + sum_i sqrt(|sigma_i| + 1))` from the game, which bounds
    /// every crossing of the sloped asymptotes.
    pub xi_max: Option<f64>,
    /// Scaled gain-vector distance under which two candidate solutions merge.
    pub dedup_tol: f64,
    /// How far `|a_cl|` must stay below 1 to count as stable.
    pub stability_margin: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            xi_abs_tol: 1e-12,
            scan_points: 20_000,
            xi_max: None,
            dedup_tol: 1e-9,
            stability_margin: 1e-9,
        }
    }
}

/// Scan radius that provably contains every root not on a flat tail:
/// outside it, each sloped branch sits within `1 + sum sqrt(|sigma_i|)` of an
/// asymptote of slope at least 2.
pub fn auto_xi_max(a: f64, sigma: &[f64]) -> f64 {
    2.0 * (a.abs() + 1.0 + sigma.iter().map(|s| (s.abs() + 1.0).sqrt()).sum::<f64>())
}

/// One located intersection of a branch with the level `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootHit {
    pub xi: f64,
    /// 1-based branch index.
    pub branch: usize,
    /// `|f(xi) - a|` after refinement; at most `1e-10 * max(1, |a|)`.
    pub residual: f64,
    /// True when the root came from an extremum touching the level rather
    /// than a sign change.
    pub tangential: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolverError {
    /// Gain recovery at a `xi` where some player's radicand is negative.
    NegativeRadicand { player: usize, xi: f64 },
    /// Cost propagation for gains whose closed loop is not stable.
    UnstableClosedLoop { a_cl: f64 },
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverError::NegativeRadicand { player, xi } => write!(
                f,
                "player {player} has negative radicand xi^2 - sigma at xi = {xi}"
            ),
            SolverError::UnstableClosedLoop { a_cl } => {
                write!(f, "closed loop {a_cl} is not inside the unit interval")
            }
        }
    }
}

impl std::error::Error for SolverError {}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy)]
struct Hit {
    xi: f64,
    residual: f64,
    tangential: bool,
}

struct ScanCtx<'c> {
    curve: &'c BranchCurve,
    level: f64,
    scale: f64,
    xi_abs_tol: f64,
}

impl ScanCtx<'_> {
    fn g(&self, x: f64) -> f64 {
        self.curve.value(x).map_or(f64::NAN, |v| v - self.level)
    }

    /// Sign of `f - a` approaching zero from the given side, when the branch
    /// is defined there; zero when the limit equals the level exactly.
    fn zero_limit_sign(&self, from_right: bool) -> f64 {
        let (lm, lp) = self
            .curve
            .limits_at_zero()
            .expect("open-at-zero interval has limits");
        sgn(if from_right { lp } else { lm } - self.level)
    }

    /// Newton polish within `[lo, hi]`, keeping only improving steps.
    fn polish(&self, mut x: f64, mut gx: f64, lo: f64, hi: f64) -> (f64, f64) {
        for _ in 0..60 {
            if gx == 0.0 {
                break;
            }
            let d = match self.curve.derivative(x) {
                Some(d) if d.is_finite() && d != 0.0 => d,
                _ => break,
            };
            let x2 = (x - gx / d).clamp(lo, hi);
            if x2 == x || !x2.is_finite() {
                break;
            }
            let g2 = self.g(x2);
            if !(g2.abs() < gx.abs()) {
                break;
            }
            x = x2;
            gx = g2;
        }
        (x, gx)
    }

    /// Bisect a sign change between `x_a` and `x_b` (either order; `x_a` may
    /// be an open boundary that is never evaluated, its sign supplied).
    fn refine_bracket(&self, x_a: f64, x_b: f64, sign_at_a: f64) -> Hit {
        let (mut lo, mut hi, sign_lo) = if x_a <= x_b {
            (x_a, x_b, sign_at_a)
        } else {
            (x_b, x_a, -sign_at_a)
        };
        let mut best: Option<(f64, f64)> = None;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if !(mid > lo && mid < hi) {
                break;
            }
            let gm = self.g(mid);
            if best.is_none_or(|(_, gb)| gm.abs() < gb.abs()) {
                best = Some((mid, gm));
            }
            if gm == 0.0 {
                break;
            }
            if sgn(gm) == sign_lo {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= self.xi_abs_tol.max(1e-14 * mid.abs()) {
                break;
            }
        }
        let (x0, g0) = best.expect("bracket evaluated at least once");
        let (x, g) = self.polish(x0, g0, lo.min(x0), hi.max(x0));
        Hit {
            xi: x,
            residual: g.abs(),
            tangential: false,
        }
    }

    /// Locates the interior extremum between `xa` and `xc` by bisecting the
    /// derivative; `None` when the derivative does not change sign.
    fn refine_extremum(&self, xa: f64, xc: f64) -> Option<f64> {
        let da = sgn(self.curve.derivative(xa)?);
        let dc = sgn(self.curve.derivative(xc)?);
        if da == 0.0 {
            return Some(xa);
        }
        if dc == 0.0 {
            return Some(xc);
        }
        if da == dc {
            return None;
        }
        let (mut lo, mut hi) = (xa, xc);
        for _ in 0..160 {
            let mid = 0.5 * (lo + hi);
            if !(mid > lo && mid < hi) {
                break;
            }
            let dm = sgn(self.curve.derivative(mid).unwrap_or(f64::NAN));
            if dm == 0.0 {
                return Some(mid);
            }
            if dm == da {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }

    /// Evaluated samples of one contiguous stretch: record exact zeros,
    /// bisect sign changes (including against virtual open-at-zero ends),
    /// and chase near-touches through extremum refinement.
    fn process_samples(
        &self,
        xs: &[(f64, f64)],
        lead_sign: Option<f64>,
        trail_sign: Option<f64>,
        out: &mut Vec<Hit>,
    ) {
        let mut prev: Option<(f64, f64)> = lead_sign.filter(|s| *s != 0.0).map(|s| (0.0, s));
        for &(x, g) in xs {
            let s = sgn(g);
            if g == 0.0 {
                out.push(Hit {
                    xi: x,
                    residual: 0.0,
                    tangential: false,
                });
            }
            if let Some((px, ps)) = prev {
                if ps != 0.0 && s != 0.0 && s != ps {
                    out.push(self.refine_bracket(px, x, ps));
                }
            }
            prev = Some((x, s));
        }
        if let Some(ts) = trail_sign.filter(|s| *s != 0.0) {
            if let Some((px, ps)) = prev {
                if ps != 0.0 && ts != ps {
                    out.push(self.refine_bracket(px, 0.0, ps));
                }
            }
        }

        for w in xs.windows(3) {
            let ((xa, ga), (_xb, gb), (xc, gc)) = (w[0], w[1], w[2]);
            let s = sgn(gb);
            if s == 0.0 || sgn(ga) != s || sgn(gc) != s {
                continue;
            }
            if !(gb.abs() <= ga.abs() && gb.abs() <= gc.abs()) {
                continue;
            }
            if gb.abs() > TANGENT_BAND * self.scale {
                continue;
            }
            if let Some(xe) = self.refine_extremum(xa, xc) {
                let ge = self.g(xe);
                if ge.abs() <= ACCEPT_RESIDUAL * self.scale {
                    out.push(Hit {
                        xi: xe,
                        residual: ge.abs(),
                        tangential: true,
                    });
                } else if sgn(ge) != s {
                    // The extremum pokes through: two regular crossings.
                    out.push(self.refine_bracket(xa, xe, s));
                    out.push(self.refine_bracket(xe, xc, sgn(ge)));
                }
            }
        }
    }

    /// Dense scan of `[lo, hi]`, split at interior breakpoints. `lead_sign` /
    /// `trail_sign` carry the one-sided limit sign when the respective end is
    /// an open boundary at zero.
    #[allow(clippy::too_many_arguments)]
    fn scan_bounded(
        &self,
        lo: f64,
        hi: f64,
        breakpoints: &[f64],
        total_points: usize,
        lead_sign: Option<f64>,
        trail_sign: Option<f64>,
        out: &mut Vec<Hit>,
    ) {
        debug_assert!(lo < hi);
        let mut edges = vec![lo];
        edges.extend(breakpoints.iter().copied().filter(|b| *b > lo && *b < hi));
        edges.push(hi);
        let total_len = hi - lo;
        for pair in edges.windows(2) {
            let (e0, e1) = (pair[0], pair[1]);
            if !(e0 < e1) {
                continue;
            }
            let share = (total_points as f64 * (e1 - e0) / total_len).ceil() as usize;
            let n_pts = share.max(MIN_SEG_POINTS) + 2;
            let mut xs: Vec<(f64, f64)> = Vec::with_capacity(n_pts);
            for x in linspace(e0, e1, n_pts) {
                if x == 0.0 {
                    // Open boundary at zero: excluded from the domain.
                    continue;
                }
                xs.push((x, self.g(x)));
            }
            let lead = if e0 == lo { lead_sign } else { None };
            let trail = if e1 == hi { trail_sign } else { None };
            self.process_samples(&xs, lead, trail, out);
        }
    }

    /// Bisect a sign change in `u = 1/|xi|` space; `u_lo` may be zero (the
    /// point at infinity, never evaluated, its sign supplied).
    fn refine_u(&self, side: f64, mut u_lo: f64, mut u_hi: f64, sign_at_lo: f64) -> Hit {
        let mut best: Option<(f64, f64)> = None;
        for _ in 0..300 {
            let mid = 0.5 * (u_lo + u_hi);
            if !(mid > u_lo && mid < u_hi) {
                break;
            }
            let x = side / mid;
            let gm = self.g(x);
            if best.is_none_or(|(_, gb)| gm.abs() < gb.abs()) {
                best = Some((x, gm));
            }
            if gm == 0.0 {
                break;
            }
            if sgn(gm) == sign_at_lo {
                u_lo = mid;
            } else {
                u_hi = mid;
            }
            if u_hi - u_lo <= 1e-15 * u_hi {
                break;
            }
        }
        let (x0, g0) = best.expect("bracket evaluated at least once");
        let x_near = side / u_hi;
        let x_far = if u_lo == 0.0 {
            side * f64::INFINITY
        } else {
            side / u_lo
        };
        let (blo, bhi) = (x_near.min(x_far), x_near.max(x_far));
        let (x, g) = self.polish(x0, g0, blo, bhi);
        Hit {
            xi: x,
            residual: g.abs(),
            tangential: false,
        }
    }

    /// Scans `|xi| in [start_abs, inf)` on one side through `u = 1/|xi|`.
    /// The virtual terminal sign at infinity comes from the asymptote slope
    /// (or, on flat tails, from the sign of `-a`).
    fn scan_tail(&self, side: f64, start_abs: f64, samples: usize, out: &mut Vec<Hit>) {
        let u0 = 1.0 / start_abs;
        let (s_neg, s_pos) = self.curve.slopes();
        let slope = if side > 0.0 { s_pos } else { s_neg };
        let term_sign = if slope != 0.0 { side } else { -sgn(self.level) };

        let mut prev: Option<(f64, f64)> = None;
        for j in 0..samples {
            let u = u0 * (samples - j) as f64 / samples as f64;
            let x = side / u;
            let g = self.g(x);
            let s = sgn(g);
            if g == 0.0 {
                out.push(Hit {
                    xi: x,
                    residual: 0.0,
                    tangential: false,
                });
            }
            if let Some((pu, ps)) = prev {
                if ps != 0.0 && s != 0.0 && s != ps {
                    out.push(self.refine_u(side, u, pu, s));
                }
            }
            prev = Some((u, s));
        }
        if term_sign != 0.0 {
            if let Some((pu, ps)) = prev {
                if ps != 0.0 && term_sign != ps {
                    out.push(self.refine_u(side, 0.0, pu, term_sign));
                }
            }
        }
    }

    /// Records a closed domain endpoint that sits on the level exactly.
    fn check_point(&self, x: f64, out: &mut Vec<Hit>) {
        let g = self.g(x);
        if g.abs() <= ACCEPT_RESIDUAL * self.scale {
            out.push(Hit {
                xi: x,
                residual: g.abs(),
                tangential: false,
            });
        }
    }
}

/// All intersections of one branch with the level `a`, refined and
/// deduplicated, sorted by `xi`.
pub fn find_branch_roots(
    a: f64,
    tau: &BranchTuple,
    game: &NormalizedGame,
    opts: &SolverOptions,
) -> Vec<RootHit> {
    assert!(a.is_finite(), "level must be finite");
    let curve = BranchCurve::new(tau, game.sigma());
    let xi_max = opts.xi_max.unwrap_or_else(|| auto_xi_max(a, game.sigma()));
    assert!(
        xi_max.is_finite() && xi_max > 0.0,
        "xi_max must be positive and finite"
    );
    let ctx = ScanCtx {
        curve: &curve,
        level: a,
        scale: a.abs().max(1.0),
        xi_abs_tol: opts.xi_abs_tol,
    };

    let mut bps: Vec<f64> = game
        .sigma()
        .iter()
        .filter(|&&s| s > 0.0)
        .map(|s| s.sqrt())
        .collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    let neg_bps: Vec<f64> = bps.iter().rev().map(|b| -b).collect();

    let tail_samples = (opts.scan_points / 10).max(1000);
    let mut hits: Vec<Hit> = Vec::new();

    for iv in &curve.domain().intervals {
        if iv.lo == f64::NEG_INFINITY {
            let hi = iv.hi;
            if -xi_max < hi {
                let trail = (!iv.hi_closed).then(|| ctx.zero_limit_sign(false));
                ctx.scan_bounded(
                    -xi_max,
                    hi,
                    &neg_bps,
                    opts.scan_points,
                    None,
                    trail,
                    &mut hits,
                );
            }
            ctx.scan_tail(-1.0, xi_max.max(hi.abs()), tail_samples, &mut hits);
            if iv.hi_closed {
                ctx.check_point(hi, &mut hits);
            }
        } else {
            let lo = iv.lo;
            if lo < xi_max {
                let lead = (!iv.lo_closed).then(|| ctx.zero_limit_sign(true));
                ctx.scan_bounded(lo, xi_max, &bps, opts.scan_points, lead, None, &mut hits);
            }
            ctx.scan_tail(1.0, xi_max.max(lo), tail_samples, &mut hits);
            if iv.lo_closed {
                ctx.check_point(lo, &mut hits);
            }
        }
    }

    hits.sort_by(|p, q| p.xi.total_cmp(&q.xi));
    let mut merged: Vec<Hit> = Vec::new();
    for h in hits {
        if let Some(last) = merged.last_mut() {
            let tol = (4.0 * opts.xi_abs_tol).max(1e-9 * h.xi.abs().max(1.0));
            if (h.xi - last.xi).abs() <= tol {
                let both_tangential = last.tangential && h.tangential;
                if h.residual < last.residual {
                    *last = h;
                }
                last.tangential = both_tangential;
                continue;
            }
        }
        merged.push(h);
    }

    merged
        .into_iter()
        .map(|h| RootHit {
            xi: h.xi,
            branch: tau.index(),
            residual: h.residual,
            tangential: h.tangential,
        })
        .collect()
}

/// Per-player gains at a branch root:
/// `k_i = -(xi + tau_i sqrt(xi^2 - sigma_i)) / b_i`, written through the
/// conjugate when `tau_i` opposes `sign(xi)` so `sigma_i = 0` yields exactly
/// zero and no precision is lost to cancellation.
pub fn recover_gains(
    xi: f64,
    tau: &BranchTuple,
    game: &NormalizedGame,
) -> Result<Vec<f64>, SolverError> {
    assert!(xi.is_finite() && xi != 0.0, "xi must be finite and nonzero");
    assert_eq!(tau.n(), game.n(), "tuple/game size");
    let s = sgn(xi);
    let abs = xi.abs();
    let mut gains = Vec::with_capacity(game.n());
    for i in 0..game.n() {
        let sig = game.sigma()[i];
        let b = game.b()[i];
        let rad = if sig > 0.0 {
            let root = sig.sqrt();
            let t = abs - root;
            if t < -1e-8 * abs.max(1.0) {
                return Err(SolverError::NegativeRadicand { player: i + 1, xi });
            }
            t.max(0.0).sqrt() * (abs + root).sqrt()
        } else {
            abs.hypot((-sig).sqrt())
        };
        let k = if (tau.signs()[i] as f64) * s < 0.0 {
            // Adding 0.0 turns a -0.0 from the sign pattern into plain zero.
            -s * sig / ((abs + rad) * b) + 0.0
        } else {
            -s * (abs + rad) / b
        };
        gains.push(k);
    }
    Ok(gains)
}

/// `a + sum_i b_i k_i`.
pub fn closed_loop(gains: &[f64], game: &NormalizedGame) -> f64 {
    assert_eq!(gains.len(), game.n());
    game.a() + gains.iter().zip(game.b()).map(|(k, b)| k * b).sum::<f64>()
}

/// Stationary per-player costs `p_i = (q_i + k_i^2 r_i) / (1 - a_cl^2)`;
/// the closed loop must be stable for the series to converge.
pub fn solve_costs(gains: &[f64], game: &NormalizedGame) -> Result<Vec<f64>, SolverError> {
    let a_cl = closed_loop(gains, game);
    if !(a_cl.abs() < 1.0) {
        return Err(SolverError::UnstableClosedLoop { a_cl });
    }
    let denom = (1.0 - a_cl) * (1.0 + a_cl);
    Ok((0..game.n())
        .map(|i| (game.q()[i] + gains[i] * gains[i] * game.r()[i]) / denom)
        .collect())
}

/// Admissibility of a candidate gain vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub a_cl: f64,
    /// `|a_cl| <= 1 - stability_margin`.
    pub stable: bool,
    /// Per player: `r_i + b_i^2 p_i > 0`.
    pub second_order: Vec<bool>,
    /// Per player: `b_i k_i / a_cl < 1`; `None` when `a_cl` is zero. On a
    /// stationary point this is equivalent to the second-order condition.
    pub gain_form: Option<Vec<bool>>,
    /// Whether the two forms agree elementwise (vacuously true at
    /// `a_cl = 0`). Expected to hold on solved points only.
    pub forms_agree: bool,
}

impl ConditionReport {
    pub fn admissible(&self) -> bool {
        self.stable && self.second_order.iter().all(|&x| x)
    }
}

pub fn check_conditions(
    gains: &[f64],
    costs: &[f64],
    game: &NormalizedGame,
    opts: &SolverOptions,
) -> ConditionReport {
    assert_eq!(gains.len(), game.n());
    assert_eq!(costs.len(), game.n());
    let a_cl = closed_loop(gains, game);
    let stable = a_cl.abs() <= 1.0 - opts.stability_margin;
    let second_order: Vec<bool> = (0..game.n())
        .map(|i| game.r()[i] + game.b()[i] * game.b()[i] * costs[i] > 0.0)
        .collect();
    let gain_form: Option<Vec<bool>> = (a_cl != 0.0).then(|| {
        (0..game.n())
            .map(|i| game.b()[i] * gains[i] / a_cl < 1.0)
            .collect()
    });
    let forms_agree = gain_form.as_ref().is_none_or(|gf| *gf == second_order);
    ConditionReport {
        a_cl,
        stable,
        second_order,
        gain_form,
        forms_agree,
    }
}

/// One feedback Nash equilibrium, reported in the caller's player order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FneSolution {
    /// Root of the branch equation; `None` for the zero-gain solution of
    /// `a = 0`, whose closed loop is exactly zero.
    pub xi: Option<f64>,
    pub a_cl: f64,
    pub gains: Vec<f64>,
    pub costs: Vec<f64>,
    /// 1-based indices of every branch whose root produced these gains
    /// (several when radicands vanish at the root), sorted.
    pub branches: Vec<usize>,
    pub trivial: bool,
    pub tangential: bool,
}

struct Candidate {
    xi: Option<f64>,
    residual: f64,
    tangential: bool,
    branches: Vec<usize>,
    gains: Vec<f64>,
    costs: Vec<f64>,
    a_cl: f64,
}

fn gains_close(x: &[f64], y: &[f64], tol: f64) -> bool {
    let scale = x.iter().chain(y).fold(1.0f64, |m, v| m.max(v.abs()));
    x.iter().zip(y).all(|(p, q)| (p - q).abs() <= tol * scale)
}

/// Every feedback Nash equilibrium of the game, sorted by `xi` (the zero-gain
/// solution, when present, comes last).
pub fn solve_all_fne(game: &NormalizedGame, opts: &SolverOptions) -> Vec<FneSolution> {
    let a = game.a();
    let root_sigma_max = game.sigma()[0].max(0.0).sqrt();
    let mut cands: Vec<Candidate> = Vec::new();

    let absorb = |cand: Candidate, cands: &mut Vec<Candidate>| {
        for c in cands.iter_mut() {
            if gains_close(&c.gains, &cand.gains, opts.dedup_tol) {
                c.branches.extend_from_slice(&cand.branches);
                c.branches.sort_unstable();
                c.branches.dedup();
                let both_tangential = c.tangential && cand.tangential;
                if cand.residual < c.residual {
                    c.xi = cand.xi;
                    c.residual = cand.residual;
                    c.gains = cand.gains;
                    c.costs = cand.costs;
                    c.a_cl = cand.a_cl;
                }
                c.tangential = both_tangential;
                return;
            }
        }
        cands.push(cand);
    };

    for tau in all_branches(game.n()) {
        for hit in find_branch_roots(a, &tau, game, opts) {
            // A real gain vector needs every per-player radicand nonnegative,
            // i.e. |xi| >= sqrt(sigma_1). Equal-weight cancellation can keep
            // the curve real inside that disc, but those crossings have
            // complex per-player gains and are not strategies.
            if hit.xi.abs() - root_sigma_max < -1e-8 * hit.xi.abs().max(1.0) {
                continue;
            }
            let gains = match recover_gains(hit.xi, &tau, game) {
                Ok(g) => g,
                Err(_) => continue,
            };
            let costs = match solve_costs(&gains, game) {
                Ok(c) => c,
                Err(_) => continue,
            };
            let report = check_conditions(&gains, &costs, game, opts);
            if !report.admissible() {
                continue;
            }
            absorb(
                Candidate {
                    xi: Some(hit.xi),
                    residual: hit.residual,
                    tangential: hit.tangential,
                    branches: vec![hit.branch],
                    gains,
                    costs,
                    a_cl: report.a_cl,
                },
                &mut cands,
            );
        }
    }

    if a == 0.0 {
        // The all-zero strategy closes the loop at exactly zero; it is an
        // equilibrium exactly when every second-order coefficient
        // r_i + b_i^2 q_i stays positive (sigma_i > -1).
        let gains = vec![0.0; game.n()];
        let costs: Vec<f64> = game.q().to_vec();
        let report = check_conditions(&gains, &costs, game, opts);
        if report.second_order.iter().all(|&x| x)
            && !cands
                .iter()
                .any(|c| gains_close(&c.gains, &gains, opts.dedup_tol))
        {
            cands.push(Candidate {
                xi: None,
                residual: 0.0,
                tangential: false,
                branches: Vec::new(),
                gains,
                costs,
                a_cl: 0.0,
            });
        }
    }

    cands.sort_by(|p, q| match (p.xi, q.xi) {
        (Some(x), Some(y)) => x
            .total_cmp(&y)
            .then_with(|| p.branches.first().cmp(&q.branches.first())),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });

    cands
        .into_iter()
        .map(|c| FneSolution {
            xi: c.xi,
            a_cl: c.a_cl,
            gains: game.to_original_order(&c.gains),
            costs: game.to_original_order(&c.costs),
            branches: c.branches,
            trivial: c.xi.is_none(),
            tangential: c.tangential,
        })
        .collect()
}
