//! Sign-branch curves of the equilibrium reduction.
//!
//! For weights `sigma_1 >= ... >= sigma_N`, every stabilizing feedback
//! equilibrium with nonzero closed loop corresponds, through the substitution
//! `xi = (1/a_cl - a_cl) / 2`, to a root of
//!
//! ```text
//! f(xi) = hat_f(xi) + N*xi + sum_i tau_i * sqrt(xi^2 - sigma_i) = a
//! ```
//!
//! for some sign tuple `tau` in `{-1, +1}^N`, where [`hat_f`] inverts the
//! substitution back into `(-1, 0) u (0, 1)`. Fixing the tuple gives one
//! branch curve; intersecting all `2^N` of them with the horizontal line at
//! level `a` enumerates every candidate equilibrium.
//!
//! Branch indexing is binary: branch `ell` (1-based) sets `tau_i = +1`
//! exactly when bit `i - 1` of `ell - 1` is set, player 1 being the least
//! significant bit. So branch 1 is all `-1`, branch `2^N` is all `+1`, and
//! branch 2 flips only player 1.
//!
//! Terms over exactly equal weights combine. A `+1/-1` pair on the same
//! `sigma` cancels identically, so the pair imposes no domain restriction:
//! the combined curve stays real where each square root alone would not.
//! [`BranchCurve`] works throughout with the grouped form, which is also what
//! makes evaluation stable for `|xi|` far beyond the last breakpoint.

use std::io;

/// Inverse of the substitution `xi = (1/v - v) / 2` on `(-1, 0) u (0, 1)`.
///
/// `hat_f(xi) = sign(xi) * (sqrt(xi^2 + 1) - |xi|)` written without
/// cancellation; it maps onto `(-1, 0) u (0, 1)`, has `hat_f(xi) -> +-0` as
/// `xi -> +-inf`, and `|hat_f|` is strictly decreasing in `|xi|`.
///
/// Panics if `xi` is zero or not finite (the substitution excludes a
/// closed loop of exactly zero).
pub fn hat_f(xi: f64) -> f64 {
    assert!(
        xi != 0.0 && xi.is_finite(),
        "hat_f needs finite nonzero xi, got {xi}"
    );
    let s = if xi > 0.0 { 1.0 } else { -1.0 };
    s / (xi.abs() + xi.hypot(1.0))
}

/// A sign tuple `tau in {-1, +1}^N` with its 1-based branch index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BranchTuple {
    index: usize,
    signs: Vec<i8>,
}

impl BranchTuple {
    /// 1-based index within the binary enumeration.
    pub fn index(&self) -> usize {
        self.index
    }

    /// Per-player signs, each -1 or +1; `signs()[i]` belongs to player `i + 1`.
    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn n(&self) -> usize {
        self.signs.len()
    }

    /// Sum of the signs (an integer in `-N ..= N`).
    pub fn sign_sum(&self) -> i64 {
        self.signs.iter().map(|&s| s as i64).sum()
    }
}

/// Branch index out of the valid range `1 ..= 2^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchIndexError {
    pub index: usize,
    pub n: usize,
}

impl std::fmt::Display for BranchIndexError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "branch index {} out of range 1..={} for {} players",
            self.index,
            branch_count(self.n),
            self.n
        )
    }
}

impl std::error::Error for BranchIndexError {}

/// Number of sign branches, `2^n`.
pub fn branch_count(n: usize) -> usize {
    assert!(n >= 1 && n < usize::BITS as usize, "player count {n}");
    1usize << n
}

/// The sign tuple of branch `ell` (1-based) for `n` players.
pub fn branch_tuple(ell: usize, n: usize) -> Result<BranchTuple, BranchIndexError> {
    if ell < 1 || ell > branch_count(n) {
        return Err(BranchIndexError { index: ell, n });
    }
    let bits = ell - 1;
    let signs = (0..n)
        .map(|i| if bits >> i & 1 == 1 { 1i8 } else { -1i8 })
        .collect();
    Ok(BranchTuple { index: ell, signs })
}

/// All `2^n` branches in index order.
pub fn all_branches(n: usize) -> Vec<BranchTuple> {
    assert!(n <= 24, "branch enumeration is exponential in n, got {n}");
    (1..=branch_count(n))
        .map(|ell| branch_tuple(ell, n).expect("index in range"))
        .collect()
}

/// One maximal interval of a branch domain. Infinite ends are open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed {
            x >= self.lo
        } else {
            x > self.lo
        };
        let below = if self.hi_closed {
            x <= self.hi
        } else {
            x < self.hi
        };
        above && below
    }
}

/// Where a branch curve is real-valued: a union of disjoint intervals,
/// sorted ascending. Zero is never included (the substitution excludes it).
#[derive(Debug, Clone, PartialEq)]
pub struct BranchDomain {
    pub intervals: Vec<Interval>,
}

impl BranchDomain {
    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(x))
    }
}

/// Distinct weight values with nonzero net sign coefficient.
#[derive(Debug, Clone, Copy)]
struct Group {
    sigma: f64,
    /// `sqrt(|sigma|)`; for positive sigma this is the breakpoint, for
    /// negative sigma the hypot leg.
    root: f64,
    /// Net sign coefficient, a nonzero integer.
    coeff: f64,
}

impl Group {
    /// `sqrt(xi^2 - sigma)` for `|xi|` in the group's domain, computed
    /// without cancellation on either side of zero sigma.
    fn radical(&self, x_abs: f64) -> f64 {
        if self.sigma > 0.0 {
            let t = (x_abs - self.root).max(0.0);
            t.sqrt() * (x_abs + self.root).sqrt()
        } else {
            x_abs.hypot(self.root)
        }
    }
}

/// One branch curve over a fixed weight vector, preassembled for repeated
/// evaluation.
#[derive(Debug, Clone)]
pub struct BranchCurve {
    tuple: BranchTuple,
    n_f: f64,
    tau_sum: f64,
    groups: Vec<Group>,
    domain: BranchDomain,
}

impl BranchCurve {
    /// Builds the curve for one sign tuple. `sigma` must be nonincreasing and
    /// have the tuple's length.
    pub fn new(tuple: &BranchTuple, sigma: &[f64]) -> Self {
        assert_eq!(tuple.n(), sigma.len(), "tuple/sigma length");
        debug_assert!(
            sigma.windows(2).all(|w| w[0] >= w[1]),
            "sigma must be nonincreasing"
        );

        let mut groups: Vec<Group> = Vec::new();
        let mut i = 0;
        while i < sigma.len() {
            let mut j = i;
            let mut net: i64 = 0;
            while j < sigma.len() && sigma[j] == sigma[i] {
                net += tuple.signs()[j] as i64;
                j += 1;
            }
            if net != 0 {
                groups.push(Group {
                    sigma: sigma[i],
                    root: sigma[i].abs().sqrt(),
                    coeff: net as f64,
                });
            }
            i = j;
        }

        let cutoff = groups
            .iter()
            .filter(|g| g.sigma > 0.0)
            .map(|g| g.root)
            .fold(None, |acc: Option<f64>, r| {
                Some(acc.map_or(r, |m| m.max(r)))
            });
        let domain = match cutoff {
            Some(c) => BranchDomain {
                intervals: vec![
                    Interval {
                        lo: f64::NEG_INFINITY,
                        hi: -c,
                        lo_closed: false,
                        hi_closed: true,
                    },
                    Interval {
                        lo: c,
                        hi: f64::INFINITY,
                        lo_closed: true,
                        hi_closed: false,
                    },
                ],
            },
            None => BranchDomain {
                intervals: vec![
                    Interval {
                        lo: f64::NEG_INFINITY,
                        hi: 0.0,
                        lo_closed: false,
                        hi_closed: false,
                    },
                    Interval {
                        lo: 0.0,
                        hi: f64::INFINITY,
                        lo_closed: false,
                        hi_closed: false,
                    },
                ],
            },
        };

        BranchCurve {
            tuple: tuple.clone(),
            n_f: sigma.len() as f64,
            tau_sum: tuple.sign_sum() as f64,
            groups,
            domain,
        }
    }

    pub fn tuple(&self) -> &BranchTuple {
        &self.tuple
    }

    pub fn domain(&self) -> &BranchDomain {
        &self.domain
    }

    /// Asymptote slopes `(toward -inf, toward +inf)`, i.e.
    /// `(N - sum tau, N + sum tau)`. Exact integers.
    pub fn slopes(&self) -> (f64, f64) {
        (self.n_f - self.tau_sum, self.n_f + self.tau_sum)
    }

    /// One-sided limits `(xi -> 0-, xi -> 0+)` when zero is a boundary point
    /// of the domain, `None` when a positive-sigma group keeps the curve away
    /// from zero. The limits are `-+1 + sum_g coeff_g * sqrt(-sigma_g)`.
    pub fn limits_at_zero(&self) -> Option<(f64, f64)> {
        if self.groups.iter().any(|g| g.sigma > 0.0) {
            return None;
        }
        let t: f64 = self.groups.iter().map(|g| g.coeff * g.root).sum();
        Some((-1.0 + t, 1.0 + t))
    }

    /// Curve value, `None` outside the domain.
    pub fn value(&self, xi: f64) -> Option<f64> {
        if !xi.is_finite() || !self.domain.contains(xi) {
            return None;
        }
        Some(self.raw_value(xi))
    }

    /// Curve derivative, `None` outside the domain. At a closed domain
    /// endpoint the one-sided derivative is `+-inf` and is returned as such.
    pub fn derivative(&self, xi: f64) -> Option<f64> {
        if !xi.is_finite() || !self.domain.contains(xi) {
            return None;
        }
        Some(self.raw_derivative(xi))
    }

    /// Value without the domain check; callers guarantee membership.
    ///
    /// The leading term `(N + sign(xi) * sum tau) * xi` carries an exact
    /// integer slope; everything else is written as an `O(1/xi)` correction
    /// (`hat_f` and each radical's offset from `|xi|`), so flat tails keep
    /// their `-(1 + sum sigma) / (2 xi)` decay instead of cancelling to zero.
    fn raw_value(&self, xi: f64) -> f64 {
        let s = if xi > 0.0 { 1.0 } else { -1.0 };
        let abs = xi.abs();
        let mut v = (self.n_f + s * self.tau_sum) * xi + s / (abs + xi.hypot(1.0));
        for g in &self.groups {
            let rad = g.radical(abs);
            // sqrt(xi^2 - sigma) - |xi|, exact at the breakpoint, stable far out.
            v += g.coeff * (-g.sigma) / (rad + abs);
        }
        v
    }

    fn raw_derivative(&self, xi: f64) -> f64 {
        let s = if xi > 0.0 { 1.0 } else { -1.0 };
        let abs = xi.abs();
        let h = xi.hypot(1.0);
        let mut d = (self.n_f + s * self.tau_sum) - 1.0 / (h * (h + abs));
        for g in &self.groups {
            let rad = g.radical(abs);
            d += g.coeff * s * g.sigma / ((abs + rad) * rad);
        }
        d
    }
}

/// `f` of one branch at one point; `None` off the branch domain.
pub fn f_branch(xi: f64, tau: &BranchTuple, sigma: &[f64]) -> Option<f64> {
    BranchCurve::new(tau, sigma).value(xi)
}

/// Where the branch is real-valued, with equal-sigma cancellation applied.
pub fn branch_domain(tau: &BranchTuple, sigma: &[f64]) -> BranchDomain {
    BranchCurve::new(tau, sigma).domain().clone()
}

/// Asymptote slopes `(toward -inf, toward +inf)` of a branch.
pub fn asymptote_slopes(tau: &BranchTuple) -> (f64, f64) {
    let n = tau.n() as f64;
    let t = tau.sign_sum() as f64;
    (n - t, n + t)
}

/// One-sided limits of the branch at zero, when defined there.
pub fn limits_at_zero(tau: &BranchTuple, sigma: &[f64]) -> Option<(f64, f64)> {
    BranchCurve::new(tau, sigma).limits_at_zero()
}

/// Inclusive uniform grid from `lo` to `hi` with `n >= 2` points.
pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    assert!(n >= 2 && lo < hi, "linspace needs n >= 2 and lo < hi");
    let step = (hi - lo) / (n - 1) as f64;
    let last = n - 1;
    (0..=last).map(move |i| if i == last { hi } else { lo + i as f64 * step })
}

/// One sampled point of one branch curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub xi: f64,
    /// 1-based branch index.
    pub branch: usize,
    /// `None` where the branch is undefined.
    pub value: Option<f64>,
}

/// Samples every branch on a uniform grid, branch-major (all points of
/// branch 1, then branch 2, ...).
pub fn sample_curves(sigma: &[f64], xi_min: f64, xi_max: f64, samples: usize) -> Vec<CurveSample> {
    assert!(xi_min < xi_max, "xi range");
    assert!(samples >= 2, "need at least two samples");
    let n = sigma.len();
    let mut out = Vec::with_capacity(branch_count(n) * samples);
    for tau in all_branches(n) {
        let curve = BranchCurve::new(&tau, sigma);
        for xi in linspace(xi_min, xi_max, samples) {
            out.push(CurveSample {
                xi,
                branch: tau.index(),
                value: curve.value(xi),
            });
        }
    }
    out
}

/// Writes samples as CSV with header `xi,branch,value,defined`; undefined
/// points keep an empty `value` and `defined = 0`.
pub fn write_curves_csv<W: io::Write>(w: &mut W, samples: &[CurveSample]) -> io::Result<()> {
    writeln!(w, "xi,branch,value,defined")?;
    for s in samples {
        match s.value {
            Some(v) => writeln!(w, "{},{},{},1", s.xi, s.branch, v)?,
            None => writeln!(w, "{},{},,0", s.xi, s.branch)?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Literal term-by-term evaluation, tracking the imaginary parts of
    /// negative radicands; defined exactly when they cancel.
    fn naive_value(xi: f64, tau: &BranchTuple, sigma: &[f64]) -> Option<f64> {
        let mut re = hat_f(xi) + sigma.len() as f64 * xi;
        let mut im = 0.0;
        for (&t, &s) in tau.signs().iter().zip(sigma) {
            let rad = xi * xi - s;
            if rad >= 0.0 {
                re += t as f64 * rad.sqrt();
            } else {
                im += t as f64 * (-rad).sqrt();
            }
        }
        (im == 0.0).then_some(re)
    }

    fn tuple_of(signs: &[i8]) -> BranchTuple {
        let bits: usize = signs
            .iter()
            .enumerate()
            .map(|(i, &s)| if s > 0 { 1 << i } else { 0 })
            .sum();
        branch_tuple(bits + 1, signs.len()).unwrap()
    }

    #[test]
    fn hat_f_matches_inverse_substitution() {
        for &v in &[-0.99, -0.5, -0.01, 0.01, 0.3, 0.9999] {
            let xi = (1.0 / v - v) / 2.0;
            assert!((hat_f(xi) - v).abs() <= 1e-14 * v.abs().max(1.0), "v = {v}");
        }
    }

    #[test]
    fn hat_f_is_bounded_and_decreasing() {
        let mut prev = 1.0;
        for i in 1..2000 {
            let xi = i as f64 * 0.05;
            let v = hat_f(xi);
            assert!(v > 0.0 && v < 1.0);
            assert!(v < prev);
            assert_eq!(hat_f(-xi), -v);
            prev = v;
        }
        assert!(hat_f(1e300) > 0.0);
    }

    #[test]
    #[should_panic]
    fn hat_f_rejects_zero() {
        hat_f(0.0);
    }

    #[test]
    fn branch_indexing_is_binary_with_player_one_lowest_bit() {
        assert_eq!(branch_tuple(1, 3).unwrap().signs(), &[-1, -1, -1]);
        assert_eq!(branch_tuple(2, 3).unwrap().signs(), &[1, -1, -1]);
        assert_eq!(branch_tuple(3, 3).unwrap().signs(), &[-1, 1, -1]);
        assert_eq!(branch_tuple(6, 3).unwrap().signs(), &[1, -1, 1]);
        assert_eq!(branch_tuple(7, 3).unwrap().signs(), &[-1, 1, 1]);
        assert_eq!(branch_tuple(8, 3).unwrap().signs(), &[1, 1, 1]);
        assert!(branch_tuple(0, 3).is_err());
        assert!(branch_tuple(9, 3).is_err());
        assert_eq!(all_branches(4).len(), 16);
    }

    #[test]
    fn domain_with_positive_sigma_is_two_closed_rays() {
        let tau = tuple_of(&[1, 1]);
        let d = branch_domain(&tau, &[4.0, 1.0]);
        assert_eq!(d.intervals.len(), 2);
        assert_eq!(d.intervals[0].hi, -2.0);
        assert!(d.intervals[0].hi_closed);
        assert_eq!(d.intervals[1].lo, 2.0);
        assert!(d.intervals[1].lo_closed);
        assert!(d.contains(-2.0) && d.contains(2.0));
        assert!(!d.contains(1.99) && !d.contains(-1.99) && !d.contains(0.0));

        // Mixed signs over distinct sigmas restrict just the same.
        let d2 = branch_domain(&tuple_of(&[1, -1]), &[4.0, 1.0]);
        assert_eq!(&d2, &d);
    }

    #[test]
    fn equal_sigma_cancellation_widens_the_domain() {
        let d = branch_domain(&tuple_of(&[1, -1]), &[1.0, 1.0]);
        assert_eq!(d.intervals.len(), 2);
        assert_eq!(d.intervals[0].hi, 0.0);
        assert!(!d.intervals[0].hi_closed);
        assert_eq!(d.intervals[1].lo, 0.0);
        assert!(!d.intervals[1].lo_closed);
        assert!(d.contains(0.5) && d.contains(-0.5));
        assert!(!d.contains(0.0));

        // Value agrees with dropping the cancelled pair outright.
        let xi = 0.5;
        let got = f_branch(xi, &tuple_of(&[1, -1]), &[1.0, 1.0]).unwrap();
        let want = hat_f(xi) + 2.0 * xi;
        assert!((got - want).abs() < 1e-15);

        // An uncancelled third copy restores the restriction.
        let d3 = branch_domain(&tuple_of(&[1, -1, 1]), &[1.0, 1.0, 1.0]);
        assert_eq!(d3.intervals[1].lo, 1.0);
    }

    #[test]
    fn value_matches_naive_everywhere_defined() {
        let sigmas: &[&[f64]] = &[
            &[0.1, 0.05, 0.0],
            &[0.1, -0.8, -0.9],
            &[2.0, 2.0, -1.5],
            &[0.0, 0.0],
            &[3.0],
        ];
        for sigma in sigmas {
            for tau in all_branches(sigma.len()) {
                let curve = BranchCurve::new(&tau, sigma);
                for i in -400..=400i32 {
                    let xi = i as f64 * 0.025;
                    if xi == 0.0 {
                        assert_eq!(curve.value(0.0), None);
                        continue;
                    }
                    match (curve.value(xi), naive_value(xi, &tau, sigma)) {
                        (Some(v), Some(w)) => {
                            assert!(
                                (v - w).abs() <= 1e-11 * w.abs().max(1.0),
                                "sigma {sigma:?} branch {} xi {xi}: {v} vs {w}",
                                tau.index()
                            );
                        }
                        (None, None) => {}
                        (got, want) => panic!(
                            "definedness mismatch at sigma {sigma:?} branch {} xi {xi}: {got:?} vs {want:?}",
                            tau.index()
                        ),
                    }
                }
            }
        }
    }

    #[test]
    fn value_at_the_breakpoint_is_exact() {
        let sigma = [0.1, 0.05, 0.0];
        let xi = 0.1f64.sqrt();
        for tau in all_branches(3) {
            let v = f_branch(xi, &tau, &sigma).unwrap();
            let w = naive_value(xi, &tau, &sigma).unwrap();
            assert!((v - w).abs() < 1e-12);
        }
    }

    #[test]
    fn slopes_and_limits_match_the_tuple() {
        let tau = tuple_of(&[1, -1, -1]);
        assert_eq!(asymptote_slopes(&tau), (4.0, 2.0));
        // All-negative sigmas leave the curve defined around zero.
        let sigma = [-1.0, -4.0, -4.0];
        // Groups: sigma -1 net +1 root 1; sigma -4 net -2 root 2.
        let (lm, lp) = limits_at_zero(&tau, &sigma).unwrap();
        assert!((lm - (-1.0 + 1.0 - 4.0)).abs() < 1e-15);
        assert!((lp - (1.0 + 1.0 - 4.0)).abs() < 1e-15);
        // Values just off zero approach the limits.
        let eps = 1e-9;
        let curve = BranchCurve::new(&tau, &sigma);
        assert!((curve.value(-eps).unwrap() - lm).abs() < 1e-6);
        assert!((curve.value(eps).unwrap() - lp).abs() < 1e-6);
        // A positive-sigma branch has no limit at zero.
        assert_eq!(limits_at_zero(&tau, &[1.0, -1.0, -1.0]), None);
    }

    #[test]
    fn flat_tail_keeps_its_decay() {
        // All +1 branch decays toward zero from the left like
        // -(1 + sum sigma) / (2 xi); a naive sum would cancel to 0 out here.
        let sigma = [0.1, 0.05, 0.0];
        let tau = tuple_of(&[1, 1, 1]);
        let curve = BranchCurve::new(&tau, &sigma);
        for &xi in &[-1e6, -1e9, -1e12] {
            let v = curve.value(xi).unwrap();
            let want = (1.0 + 0.15) / (2.0 * xi);
            assert!(
                (v - want).abs() <= 1e-6 * want.abs(),
                "xi {xi}: {v} vs {want}"
            );
        }
    }

    #[test]
    fn sample_curves_is_branch_major_and_marks_gaps() {
        let sigma = [1.0];
        let s = sample_curves(&sigma, -2.0, 2.0, 5);
        assert_eq!(s.len(), 10);
        assert_eq!(s[0].branch, 1);
        assert_eq!(s[5].branch, 2);
        assert_eq!(s[0].xi, -2.0);
        assert_eq!(s[4].xi, 2.0);
        // xi = 0 sits inside the forbidden zone of sigma = 1.
        assert_eq!(s[2].xi, 0.0);
        assert!(s[2].value.is_none());
        assert!(s[0].value.is_some());

        let mut buf = Vec::new();
        write_curves_csv(&mut buf, &s).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("xi,branch,value,defined"));
        assert_eq!(text.lines().count(), 11);
        assert!(text.lines().any(|l| l == "0,1,,0"));
        assert!(text
            .lines()
            .all(|l| l.ends_with(",1") || l.ends_with(",0") || l.starts_with("xi")));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn hat_f_round_trips(xi in prop::num::f64::NORMAL.prop_filter("nonzero moderate", |x| x.abs() > 1e-6 && x.abs() < 1e6)) {
            let v = hat_f(xi);
            prop_assert!(v.abs() > 0.0 && v.abs() < 1.0);
            let back = (1.0 / v - v) / 2.0;
            prop_assert!((back - xi).abs() <= 1e-12 * xi.abs().max(1.0));
        }

        #[test]
        fn tuples_are_a_bijection(n in 1usize..=5) {
            let all = all_branches(n);
            prop_assert_eq!(all.len(), 1 << n);
            for (i, t) in all.iter().enumerate() {
                prop_assert_eq!(t.index(), i + 1);
                let bits: usize = t.signs().iter().enumerate()
                    .map(|(k, &s)| if s > 0 { 1 << k } else { 0 })
                    .sum();
                prop_assert_eq!(bits, i);
                prop_assert!(t.signs().iter().all(|&s| s == 1 || s == -1));
            }
        }

        #[test]
        fn branch_ordering_chain_holds(
            mut sigma in proptest::collection::vec(-2.0f64..2.0, 2..=4),
            frac in 0.01f64..20.0,
            neg in proptest::bool::ANY,
        ) {
            sigma.sort_by(|a, b| b.total_cmp(a));
            let n = sigma.len();
            let l = 1 << n;
            // A point where every branch is defined: beyond the worst breakpoint.
            let base = sigma[0].max(0.0).sqrt();
            let xi = if neg { -(base + frac) } else { base + frac };

            let vals: Vec<f64> = all_branches(n).iter()
                .map(|t| f_branch(xi, t, &sigma).unwrap())
                .collect();
            let tol = 1e-12 * vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));

            // f_1 <= f_2 <= f_3 <= f_ell <= f_{L-2} <= f_{L-1} <= f_L for all middle ell.
            prop_assert!(vals[0] <= vals[1] + tol);
            prop_assert!(vals[1] <= vals[2] + tol);
            prop_assert!(vals[l - 3] <= vals[l - 2] + tol);
            prop_assert!(vals[l - 2] <= vals[l - 1] + tol);
            for ell in 3..l.saturating_sub(3) {
                prop_assert!(vals[2] <= vals[ell] + tol, "f_3 <= f_{}", ell + 1);
                prop_assert!(vals[ell] <= vals[l - 3] + tol, "f_{} <= f_(L-2)", ell + 1);
            }
        }

        #[test]
        fn asymptote_agreement_far_out(
            mut sigma in proptest::collection::vec(-3.0f64..3.0, 1..=4),
            branch_bits in 0usize..16,
        ) {
            sigma.sort_by(|a, b| b.total_cmp(a));
            let n = sigma.len();
            let tau = branch_tuple((branch_bits % (1 << n)) + 1, n).unwrap();
            let curve = BranchCurve::new(&tau, &sigma);
            let (s_neg, s_pos) = curve.slopes();
            for xi in [-1e6, 1e6] {
                let slope = if xi < 0.0 { s_neg } else { s_pos };
                let v = curve.value(xi).unwrap();
                prop_assert!(
                    (v - slope * xi).abs() <= 1e-4,
                    "xi {}: {} vs slope {}", xi, v, slope
                );
            }
        }

        #[test]
        fn derivative_matches_finite_differences(
            mut sigma in proptest::collection::vec(-2.0f64..2.0, 1..=4),
            branch_bits in 0usize..16,
            off in 0.05f64..8.0,
            neg in proptest::bool::ANY,
        ) {
            sigma.sort_by(|a, b| b.total_cmp(a));
            let n = sigma.len();
            let tau = branch_tuple((branch_bits % (1 << n)) + 1, n).unwrap();
            let curve = BranchCurve::new(&tau, &sigma);
            let base = sigma[0].max(0.0).sqrt();
            let xi = if neg { -(base + off) } else { base + off };

            let h = 1e-5 * xi.abs().max(1.0);
            let fp = curve.value(xi + h).unwrap();
            let fm = curve.value(xi - h).unwrap();
            let fd = (fp - fm) / (2.0 * h);
            let d = curve.derivative(xi).unwrap();
            prop_assert!(
                (fd - d).abs() <= 1e-6 * d.abs().max(1.0),
                "xi {}: fd {} vs d {}", xi, fd, d
            );
        }

        #[test]
        fn domains_are_sound(
            mut sigma in proptest::collection::vec(-2.0f64..2.0, 1..=4),
            branch_bits in 0usize..16,
            xi in -3.0f64..3.0,
        ) {
            sigma.sort_by(|a, b| b.total_cmp(a));
            let n = sigma.len();
            let tau = branch_tuple((branch_bits % (1 << n)) + 1, n).unwrap();
            let d = branch_domain(&tau, &sigma);

            prop_assert!(!d.contains(0.0));
            prop_assert_eq!(d.intervals.len(), 2);
            prop_assert!(d.intervals[0].hi <= d.intervals[1].lo);
            prop_assert!(d.intervals[0].lo == f64::NEG_INFINITY);
            prop_assert!(d.intervals[1].hi == f64::INFINITY);

            // Definedness agrees with the literal complex-aware evaluation.
            if xi != 0.0 {
                let got = f_branch(xi, &tau, &sigma);
                let want = naive_value(xi, &tau, &sigma);
                prop_assert_eq!(got.is_some(), want.is_some());
                prop_assert_eq!(got.is_some(), d.contains(xi));
            }
        }
    }
}
