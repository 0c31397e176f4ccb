//! Turning a finite run of samples into holds / fails / inconclusive.

use crate::numeric::Real;
use serde::Serialize;
use std::cmp::Ordering;

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Verdict {
    /// Largest observed value; `log2` orders bounds beyond binary64.
    Holds {
        bound: String,
        #[serde(skip)]
        log2: f64,
    },
    Fails { n: usize, value: String, reason: String },
    Inconclusive { reason: String },
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds { .. })
    }
    pub fn fails(&self) -> bool {
        matches!(self, Verdict::Fails { .. })
    }
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Holds { .. } => "holds",
            Verdict::Fails { .. } => "fails",
            Verdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

/// Below this many depths nothing but an infinite sample is conclusive.
pub const MIN_DEPTH: usize = 12;

/// Tolerance for "non-decreasing" between consecutive samples.
const REL_TIE: f64 = 1e-12;

fn nondecreasing(s: &[Real]) -> bool {
    s.windows(2).all(|w| {
        let floor = &w[0] * &Real::from_f64(1.0 - REL_TIE);
        w[1].cmp_mid(&floor) != Ordering::Less
    })
}

/// Classify samples `s_0..s_N` at depths `0..=N`.
///
/// Fails: an infinite sample; or a last-quarter `lo` above
/// `factor * s_0.hi` with the last quarter non-decreasing; or sustained growth (second half
/// non-decreasing, last-quarter gain at least half the third-quarter gain,
/// and `s_N >= 1.25 s_(N/2)`). Holds: not failing and the second-half max
/// within `factor` of the first-quarter min.
pub fn classify_series(samples: &[Real], factor: f64) -> Verdict {
    if let Some(n) = samples.iter().position(|s| s.lo().is_infinite()) {
        return Verdict::Fails { n, value: "inf".into(), reason: "infinite sample".into() };
    }
    let big_n = samples.len().saturating_sub(1);
    if big_n < MIN_DEPTH {
        return Verdict::Inconclusive { reason: format!("sweep depth {big_n} below {MIN_DEPTH}") };
    }
    let mids: Vec<Real> = samples.iter().map(|s| Real::point(s.mid_w())).collect();
    let fac = Real::from_f64(factor);
    let q = big_n / 4;
    let half = big_n / 2;
    let three = (3 * big_n) / 4;

    let argmax = |from: usize| {
        (from..=big_n).max_by(|&a, &b| mids[a].cmp_mid(&mids[b]).then(b.cmp(&a))).unwrap()
    };
    let fail = |n: usize, reason: &str| Verdict::Fails { n, value: samples[n].to_string(), reason: reason.into() };

    let cap = &fac * &Real::point(samples[0].hi());
    let last_quarter_up = nondecreasing(&mids[big_n - q..]);
    if last_quarter_up {
        // a transient spike that settles is not divergence: look at the end
        if samples[big_n - q..].iter().any(|s| Real::point(s.lo()).cmp_mid(&cap) == Ordering::Greater) {
            return fail(argmax(big_n - q), "exceeds divergence factor");
        }
    }
    if nondecreasing(&mids[half..]) {
        let g3 = &mids[three] - &mids[half];
        let g4 = &mids[big_n] - &mids[three];
        let grow = g3.cmp_mid(&Real::zero()) == Ordering::Greater
            && g4.cmp_mid(&(&g3 * &Real::ratio(1, 2))) != Ordering::Less
            && mids[big_n].cmp_mid(&(&mids[half] * &Real::ratio(5, 4))) != Ordering::Less;
        if grow {
            return fail(big_n, "sustained growth");
        }
    }
    let first_min = samples[..=q].iter().map(|s| Real::point(s.lo())).reduce(|a, b| a.min(&b)).unwrap();
    let second_max = samples[half..].iter().map(|s| Real::point(s.hi())).reduce(|a, b| a.max(&b)).unwrap();
    if second_max.cmp_mid(&(&fac * &first_min)) != Ordering::Greater {
        let all_max = samples.iter().map(|s| Real::point(s.hi())).reduce(|a, b| a.max(&b)).unwrap();
        return Verdict::Holds { bound: all_max.to_string(), log2: all_max.hi().log2_approx() };
    }
    Verdict::Inconclusive { reason: "neither bounded nor growing".into() }
}

/// `exists` over a parameter grid: holds if any part holds, fails if all
/// fail.
pub fn any_holds(parts: &[Verdict]) -> Verdict {
    if let Some(v) = parts.iter().find(|v| v.holds()) {
        return v.clone();
    }
    if parts.iter().all(|v| v.fails()) {
        return parts.last().cloned().unwrap_or(Verdict::Inconclusive { reason: "empty grid".into() });
    }
    Verdict::Inconclusive { reason: "no grid point holds, some inconclusive".into() }
}

/// `for all` over a grid: fails if any part fails, holds if all hold.
pub fn all_hold(parts: &[Verdict]) -> Verdict {
    if let Some(v) = parts.iter().find(|v| v.fails()) {
        return v.clone();
    }
    if parts.iter().all(|v| v.holds()) {
        // the largest bound is the honest constant
        let mut best: Option<(f64, Verdict)> = None;
        for v in parts {
            if let Verdict::Holds { log2, .. } = v {
                if best.as_ref().map_or(true, |(x, _)| *log2 > *x) {
                    best = Some((*log2, v.clone()));
                }
            }
        }
        return best.map(|b| b.1).unwrap_or(Verdict::Inconclusive { reason: "empty grid".into() });
    }
    Verdict::Inconclusive { reason: "some grid point inconclusive".into() }
}
