//! Radial weight profiles and exact moment, level-set and median queries
//! over the intervals `(0, x]`.

pub mod json;
pub mod power;
pub mod tail;
pub mod transform;

pub use power::PowerProfile;
pub use tail::{BlockTail, ConstTail, GeometricTail, Monotone, Tail, TailMode, TailModel};
pub use transform::Transform;

use crate::error::{Error, Result};
use crate::numeric::Real;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Enclosure `[lo, hi]`; exact computations give `lo = hi`.
pub type BoundPair = Real;

/// `U`: profile variable `1 - |z|`; `S`: `1 - |z|^2` (dictionary-ready).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Coordinate {
    U,
    S,
}

impl Coordinate {
    pub fn tag(self) -> &'static str {
        match self {
            Coordinate::U => "u",
            Coordinate::S => "s",
        }
    }
}

/// `u -> u(2 - u)`
pub fn u_to_s(u: &Real) -> Real {
    u * &(Real::int(2) - u.clone())
}

/// `s -> 1 - sqrt(1 - s)`
pub fn s_to_u(s: &Real) -> Real {
    Real::one() - (Real::one() - s.clone()).sqrt()
}

/// Map a piece `(hi - len, hi]` from coordinate `from` to the other one,
/// computing the new length without cancellation.
pub fn convert_span(from: Coordinate, hi: &Real, len: &Real) -> (Real, Real) {
    match from {
        Coordinate::U => {
            // s(b) - s(a) = (b - a)(2 - a - b), a = hi - len
            let l2 = len * &(Real::int(2) - hi.clone() * Real::int(2) + len.clone());
            (u_to_s(hi), l2)
        }
        Coordinate::S => {
            // u(b) - u(a) = (b - a) / (sqrt(1 - a) + sqrt(1 - b))
            let lo = hi - len;
            let den = (Real::one() - lo).sqrt() + (Real::one() - hi.clone()).sqrt();
            (s_to_u(hi), len / &den)
        }
    }
}

/// A constant piece of a step profile on `(hi - len, hi]`.
#[derive(Clone, Debug)]
pub struct Piece {
    pub hi: Real,
    pub len: Real,
    pub val: Real,
}

/// Where a scale `x` falls: pieces `idx+1..` lie entirely below `x` and
/// piece `idx` contributes `keep` from its lower end.
#[derive(Clone, Debug)]
pub struct Cut {
    pub idx: usize,
    pub keep: Real,
    pub x: Real,
}

#[derive(Clone, Debug)]
pub struct StepProfile {
    pub coord: Coordinate,
    pieces: Vec<Piece>,
    floor: Real,
    pub tail: Tail,
    /// Non-integrable profiles are constructible but refused by conditions.
    pub integrable: bool,
    suffix: SuffixCache,
}

/// Per-transform sums `sum_(j >= i) len_j phi(v_j) + tail`, for transforms
/// that do not depend on the scale.
type SuffixCache = Arc<Mutex<HashMap<String, Arc<Result<Vec<Real>>>>>>;

fn fresh() -> SuffixCache {
    Arc::new(Mutex::new(HashMap::new()))
}

impl StepProfile {
    /// Build from breakpoints `1 = x_0 > ... > x_K > 0` and values
    /// `v_0..v_{K-1}`, `v_i` held on `(x_{i+1}, x_i]`.
    pub fn new(coord: Coordinate, breakpoints: Vec<Real>, values: Vec<Real>, tail: Tail) -> Result<StepProfile> {
        if breakpoints.len() != values.len() + 1 || values.is_empty() {
            return Err(Error::Malformed("need K+1 breakpoints for K values".into()));
        }
        if breakpoints[0].cmp_mid(&Real::one()) != Ordering::Equal {
            return Err(Error::Malformed("first breakpoint must be 1".into()));
        }
        for w in breakpoints.windows(2) {
            if w[1].cmp_mid(&w[0]) != Ordering::Less {
                return Err(Error::Malformed("breakpoints must strictly decrease".into()));
            }
        }
        let floor = breakpoints.last().unwrap().clone();
        if floor.cmp_mid(&Real::zero()) != Ordering::Greater {
            return Err(Error::Malformed("breakpoints must be positive".into()));
        }
        let pieces = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| Piece { hi: breakpoints[i].clone(), len: &breakpoints[i] - &breakpoints[i + 1], val: v })
            .collect();
        StepProfile::from_pieces(coord, pieces, floor, tail)
    }

    /// Build from pieces listed top-down with exact lengths.
    pub fn from_pieces(coord: Coordinate, pieces: Vec<Piece>, floor: Real, tail: Tail) -> Result<StepProfile> {
        for p in &pieces {
            if !p.val.is_finite() || p.val.cmp_mid(&Real::zero()) != Ordering::Greater {
                return Err(Error::Domain(format!("piece value {} not positive and finite", p.val)));
            }
            if p.len.cmp_mid(&Real::zero()) != Ordering::Greater {
                return Err(Error::Domain("piece length not positive".into()));
            }
        }
        let mut merged: Vec<Piece> = Vec::with_capacity(pieces.len());
        for p in pieces {
            if let Some(last) = merged.last_mut() {
                if let (Some(a), Some(b)) = (last.val.as_rational(), p.val.as_rational()) {
                    if a == b {
                        last.len = &last.len + &p.len;
                        continue;
                    }
                }
            }
            merged.push(p);
        }
        Ok(StepProfile { coord, pieces: merged, floor, tail, integrable: true, suffix: fresh() })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// `x_K`: below this the tail policy answers.
    pub fn floor(&self) -> &Real {
        &self.floor
    }

    pub fn lower(&self, i: usize) -> Real {
        match self.pieces.get(i + 1) {
            Some(p) => p.hi.clone(),
            None => self.floor.clone(),
        }
    }

    /// Breakpoints `x_0 > ... > x_K`.
    pub fn breakpoints(&self) -> Vec<Real> {
        let mut b: Vec<Real> = self.pieces.iter().map(|p| p.hi.clone()).collect();
        b.push(self.floor.clone());
        b
    }

    pub fn values(&self) -> Vec<Real> {
        self.pieces.iter().map(|p| p.val.clone()).collect()
    }

    /// Locate `x` among the pieces.
    pub fn cut(&self, x: &Real) -> Result<Cut> {
        if x.cmp_mid(&self.floor) != Ordering::Greater {
            return Err(Error::BelowCoverage);
        }
        if x.cmp_mid(&self.pieces[0].hi) == Ordering::Greater {
            return Err(Error::Domain(format!("scale {x} exceeds 1")));
        }
        // binary search on decreasing his: first piece whose lower end < x
        let (mut lo, mut hi) = (0usize, self.pieces.len() - 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.lower(mid).cmp_mid(x) == Ordering::Less {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let p = &self.pieces[lo];
        let keep = if x.cmp_mid(&p.hi) == Ordering::Equal { p.len.clone() } else { x - &self.lower(lo) };
        Ok(Cut { idx: lo, keep, x: x.clone() })
    }

    /// `(len, value)` for every materialized part of `(floor, x]`,
    /// shallowest first.
    pub fn clip(&self, cut: &Cut) -> Vec<(Real, Real)> {
        let mut out = Vec::with_capacity(self.pieces.len() - cut.idx);
        out.push((cut.keep.clone(), self.pieces[cut.idx].val.clone()));
        for p in &self.pieces[cut.idx + 1..] {
            out.push((p.len.clone(), p.val.clone()));
        }
        out
    }

    /// Integral of `phi(f)` over `(0, x]`.
    pub fn moment(&self, x: &Real, phi: &Transform) -> Result<BoundPair> {
        let cut = self.cut(x)?;
        self.moment_cut(&cut, phi)
    }

    pub fn moment_cut(&self, cut: &Cut, phi: &Transform) -> Result<BoundPair> {
        if !self.integrable {
            return Err(Error::NonIntegrable);
        }
        let head = &cut.keep * &phi.eval(&self.pieces[cut.idx].val);
        if let Some(sums) = self.suffix_sums(phi) {
            return match sums.as_ref() {
                Ok(v) => Ok(head + v[cut.idx + 1].clone()),
                Err(e) => Err(e.clone()),
            };
        }
        let mut s = head;
        for p in &self.pieces[cut.idx + 1..] {
            s = s + &p.len * &phi.eval(&p.val);
        }
        Ok(s + self.tail.moment(phi)?)
    }

    fn suffix_sums(&self, phi: &Transform) -> Option<Arc<Result<Vec<Real>>>> {
        if !matches!(phi, Transform::Identity | Transform::Power(_) | Transform::Log) {
            return None;
        }
        let key = phi.name();
        if let Some(v) = self.suffix.lock().unwrap().get(&key) {
            return Some(v.clone());
        }
        let sums = self.tail.moment(phi).map(|t| {
            let mut v = vec![t];
            for p in self.pieces.iter().rev() {
                let next = v.last().unwrap() + &(&p.len * &phi.eval(&p.val));
                v.push(next);
            }
            v.reverse();
            v
        });
        let sums = Arc::new(sums);
        self.suffix.lock().unwrap().entry(key).or_insert(sums).clone().into()
    }

    /// Essential infimum and supremum over `(lo, hi]`.
    pub fn ess_bounds(&self, lo: &Real, hi: &Real) -> Result<(Real, Real)> {
        if lo.cmp_mid(hi) != Ordering::Less || lo.cmp_mid(&Real::zero()) == Ordering::Less {
            return Err(Error::Domain("need 0 <= lo < hi".into()));
        }
        let mut inf: Option<Real> = None;
        let mut sup: Option<Real> = None;
        let mut fold = |v: &Real, w: &Real| {
            inf = Some(match &inf {
                None => v.clone(),
                Some(i) => i.min(v),
            });
            sup = Some(match &sup {
                None => w.clone(),
                Some(s) => s.max(w),
            });
        };
        for (i, p) in self.pieces.iter().enumerate() {
            let a = self.lower(i);
            if a.cmp_mid(hi) == Ordering::Less && p.hi.cmp_mid(lo) == Ordering::Greater {
                fold(&p.val, &p.val);
            }
        }
        if lo.cmp_mid(&self.floor) == Ordering::Less {
            let (ti, ts) = self.tail.ess()?;
            fold(&ti, &ts);
        }
        match (inf, sup) {
            (Some(i), Some(s)) => Ok((i, s)),
            _ => Err(Error::Domain("interval meets no piece".into())),
        }
    }

    /// Lower endpoint of the median interval of `f` on `(0, x]`.
    pub fn median(&self, x: &Real) -> Result<Real> {
        let cut = self.cut(x)?;
        let mut parts = self.clip(&cut);
        parts.sort_by(|a, b| b.1.cmp_mid(&a.1));
        let half = x * &Real::ratio(1, 2);
        // smallest value v with |{f > v}| <= x/2
        let mut above = Real::zero();
        let mut i = 0;
        while i < parts.len() {
            let v = parts[i].1.clone();
            let mut j = i;
            let mut block = Real::zero();
            while j < parts.len() && parts[j].1.cmp_mid(&v) == Ordering::Equal {
                block = block + &parts[j].0;
                j += 1;
            }
            let with = &above + &block;
            if with.cmp_mid(&half) == Ordering::Greater {
                return Ok(v);
            }
            above = with;
            i = j;
        }
        // the tail holds the median: its infimum is the safe lower end
        Ok(self.tail.ess()?.0)
    }

    /// Measure of `{t <= x : f(t) > lambda}`.
    pub fn measure_above(&self, x: &Real, lambda: &Real) -> Result<Real> {
        self.moment(x, &Transform::IndicatorAbove(lambda.clone()))
    }

    /// Mass `int f 1{f > lambda}` over `(0, x]`.
    pub fn mass_above(&self, x: &Real, lambda: &Real) -> Result<Real> {
        self.moment(x, &Transform::MassAbove(lambda.clone()))
    }

    /// Direction of `f` in `t` over the whole profile, including the tail.
    pub fn monotone(&self) -> Option<Monotone> {
        let vals: Vec<&Real> = self.pieces.iter().map(|p| &p.val).collect();
        let mut inc = true; // f increasing in t: values non-increasing down the list
        let mut dec = true;
        for w in vals.windows(2) {
            match w[0].cmp_mid(w[1]) {
                Ordering::Less => inc = false,
                Ordering::Greater => dec = false,
                Ordering::Equal => {}
            }
        }
        let tm = self.tail.monotone();
        if let Ok((ti, ts)) = self.tail.ess() {
            let last = vals.last().unwrap();
            if ts.cmp_mid(last) == Ordering::Greater {
                inc = false;
            }
            if ti.cmp_mid(last) == Ordering::Less {
                dec = false;
            }
        }
        match (inc, dec, tm) {
            (true, true, None) => Some(Monotone::Increasing),
            (true, _, Some(Monotone::Increasing)) => Some(Monotone::Increasing),
            (_, true, Some(Monotone::Decreasing)) => Some(Monotone::Decreasing),
            (true, _, None) if self.tail.mode == TailMode::Forbid => Some(Monotone::Increasing),
            (_, true, None) if self.tail.mode == TailMode::Forbid => Some(Monotone::Decreasing),
            _ => None,
        }
    }

    /// Re-express the same radial weight in the other coordinate.
    pub fn convert_coordinate(&self, to: Coordinate) -> StepProfile {
        if to == self.coord {
            return self.clone();
        }
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let (hi, len) = convert_span(self.coord, &p.hi, &p.len);
                Piece { hi, len, val: p.val.clone() }
            })
            .collect();
        let floor = match to {
            Coordinate::S => u_to_s(&self.floor),
            Coordinate::U => s_to_u(&self.floor),
        };
        StepProfile { coord: to, pieces, floor, tail: self.tail.convert(to), integrable: self.integrable, suffix: fresh() }
    }

    /// Same pieces with a different tail policy.
    pub fn with_tail(mut self, tail: Tail) -> StepProfile {
        self.tail = tail;
        self.suffix = fresh();
        self
    }

    /// Keep only the top `n` pieces; the rest is forbidden territory.
    pub fn truncate(&self, n: usize) -> StepProfile {
        let n = n.min(self.pieces.len());
        let pieces = self.pieces[..n].to_vec();
        let floor = self.lower(n - 1);
        StepProfile { coord: self.coord, pieces, floor, tail: Tail::forbid(), integrable: self.integrable, suffix: fresh() }
    }

    /// Attach the spec's geometric tail bound with ratio `rho`.
    pub fn geometric_tail(&self, rho: Real) -> Tail {
        let vals = self.values();
        let vmin = vals.iter().skip(1).fold(vals[0].clone(), |a, b| a.min(b));
        let vmax = vals.iter().skip(1).fold(vals[0].clone(), |a, b| a.max(b));
        let last = self.pieces.last().unwrap();
        Tail::with_model(
            TailMode::GeometricBound,
            Arc::new(GeometricTail { ratio: rho, last_len: last.len.clone(), last_val: last.val.clone(), vmin, vmax }),
        )
    }
}

/// Any profile the condition engine understands.
#[derive(Clone, Debug)]
pub enum Profile {
    Step(StepProfile),
    Power(PowerProfile),
}

impl Profile {
    pub fn coord(&self) -> Coordinate {
        match self {
            Profile::Step(p) => p.coord,
            Profile::Power(_) => Coordinate::S,
        }
    }

    /// Dictionary-ready form.
    pub fn to_s(&self) -> Profile {
        match self {
            Profile::Step(p) => Profile::Step(p.convert_coordinate(Coordinate::S)),
            Profile::Power(p) => Profile::Power(p.clone()),
        }
    }

    pub fn moment(&self, x: &Real, phi: &Transform) -> Result<BoundPair> {
        match self {
            Profile::Step(p) => p.moment(x, phi),
            Profile::Power(p) => p.moment(x, phi),
        }
    }

    pub fn ess_bounds(&self, lo: &Real, hi: &Real) -> Result<(Real, Real)> {
        match self {
            Profile::Step(p) => p.ess_bounds(lo, hi),
            Profile::Power(p) => p.ess_bounds(lo, hi),
        }
    }

    pub fn median(&self, x: &Real) -> Result<Real> {
        match self {
            Profile::Step(p) => p.median(x),
            Profile::Power(p) => Ok(p.median(x)),
        }
    }

    pub fn integrable(&self) -> bool {
        match self {
            Profile::Step(p) => p.integrable,
            Profile::Power(_) => true,
        }
    }

    /// Smallest scale with exact coverage.
    pub fn floor(&self) -> Real {
        match self {
            Profile::Step(p) => p.floor().clone(),
            Profile::Power(_) => Real::zero(),
        }
    }

    pub fn monotone(&self) -> Option<Monotone> {
        match self {
            Profile::Step(p) => p.monotone(),
            Profile::Power(p) => Some(p.monotone()),
        }
    }
}
