//! One number per scale `x` for each condition; all are normalized so the
//! constant profile gives 1 (0 for `P6` and `P8`).

use crate::error::{Error, Result};
use super::concentration::StepCurve;
use crate::maximal;
use crate::numeric::Real;
use crate::profile::{Coordinate, PowerProfile, Profile, StepProfile, Transform};
use std::cmp::Ordering;

/// `(1/x) int_0^x phi(f)`.
pub fn average(p: &Profile, x: &Real, phi: &Transform) -> Result<Real> {
    Ok(p.moment(x, phi)? / x.clone())
}

fn need_integrable(p: &Profile) -> Result<()> {
    if p.integrable() {
        Ok(())
    } else {
        Err(Error::NonIntegrable)
    }
}

/// `P1`: `f_B (avg f^(1-p'))^(p-1)`.
pub fn p1_functional(p: &Profile, x: &Real, exp_p: f64) -> Result<Real> {
    if !(exp_p > 1.0) {
        return Err(Error::Domain(format!("p = {exp_p} must exceed 1")));
    }
    need_integrable(p)?;
    let pp = exp_p / (exp_p - 1.0);
    let a = average(p, x, &Transform::Identity)?;
    let b = average(p, x, &Transform::Power(1.0 - pp))?;
    Ok(a * b.powf(exp_p - 1.0))
}

/// `P2` (reverse Jensen): `f_B / exp(avg log f)`.
pub fn rj_functional(p: &Profile, x: &Real) -> Result<Real> {
    need_integrable(p)?;
    let a = average(p, x, &Transform::Identity)?;
    let g = average(p, x, &Transform::Log)?.exp();
    Ok(a / g)
}

/// `P3` (reverse Hölder): `(avg f^q)^(1/q) / f_B`.
pub fn rh_functional(p: &Profile, x: &Real, q: f64) -> Result<Real> {
    if !(q > 1.0) {
        return Err(Error::Domain(format!("q = {q} must exceed 1")));
    }
    need_integrable(p)?;
    let a = average(p, x, &Transform::Identity)?;
    let b = average(p, x, &Transform::Power(q))?.powf(1.0 / q);
    Ok(b / a)
}

/// `P5`: `f_B / m(f; (0, x])`.
pub fn p5_functional(p: &Profile, x: &Real) -> Result<Real> {
    need_integrable(p)?;
    let a = average(p, x, &Transform::Identity)?;
    Ok(a / p.median(x)?)
}

fn relative(p: &Profile, x: &Real, phi: impl Fn(Real) -> Transform) -> Result<Real> {
    need_integrable(p)?;
    let m = p.moment(x, &Transform::Identity)?;
    let avg = &m / x;
    Ok(p.moment(x, &phi(avg))? / m)
}

/// `P6`: `int f log+(f / f_B) / int f`.
pub fn p6_functional(p: &Profile, x: &Real) -> Result<Real> {
    relative(p, x, Transform::LogPlusRel).map(|v| v.clamp_nonneg())
}

/// `int f log(e + f / f_B) / int f`.
pub fn p6e_functional(p: &Profile, x: &Real) -> Result<Real> {
    relative(p, x, Transform::LogEPlusRel)
}

/// `P7` (`B_inf`): `int M(f 1_(0,x]) / int f`.
pub fn p7_functional(p: &Profile, x: &Real) -> Result<Real> {
    need_integrable(p)?;
    let m = p.moment(x, &Transform::Identity)?;
    let num = match p {
        Profile::Step(s) => maximal::maximal_integral(s, x)?,
        Profile::Power(pp) => pp.maximal_integral(x)?,
    };
    Ok(num / m)
}

/// `B1`: `f_B / essinf_(0,x] f`.
pub fn b1_functional(p: &Profile, x: &Real) -> Result<Real> {
    need_integrable(p)?;
    let a = average(p, x, &Transform::Identity)?;
    let (inf, _) = p.ess_bounds(&Real::zero(), x)?;
    Ok(safe_ratio(a, inf))
}

/// `num / den` for `den >= 0`, infinite when `den` vanishes.
fn safe_ratio(num: Real, den: Real) -> Real {
    if den.is_zero() || den.hi().is_zero() {
        return Real::inf();
    }
    if den.lo().is_zero() || den.lo() < crate::numeric::W::ZERO {
        return Real::interval(num.lo().div(den.hi(), crate::numeric::Dir::Down), crate::numeric::W::INF);
    }
    num / den
}

/// Worst `P8` ratio `f({f > l}) / (l |{f > beta l}|)` over `l > f_B`,
/// with the maximizing `l`.
pub fn p8_worst(p: &Profile, x: &Real, beta: &Real) -> Result<(Real, Real)> {
    need_integrable(p)?;
    match p {
        Profile::Step(s) => p8_step(s, x, beta),
        Profile::Power(pp) => p8_power(pp, x, beta.mid()),
    }
}

fn p8_step(p: &StepProfile, x: &Real, beta: &Real) -> Result<(Real, Real)> {
    p8_curve(&StepCurve::new(p, x)?, p, beta, &TailLevels::new(p)?, None)
}

/// Upper bounds on the tail's mass above `t` and measure above `t`, read
/// off at the materialized values so a sweep pays for them once.
#[derive(Clone, Debug)]
pub struct TailLevels {
    /// Distinct materialized values, descending.
    vals: Vec<Real>,
    mass: Vec<Real>,
    meas: Vec<Real>,
    all_mass: Real,
    floor: Real,
}

impl TailLevels {
    pub fn new(p: &StepProfile) -> Result<TailLevels> {
        let floor = p.floor().clone();
        let all_mass = if floor.is_zero() { Real::zero() } else { p.tail.moment(&Transform::Identity)?.hi_real() };
        let mut vals: Vec<Real> = p.pieces().iter().map(|q| q.val.clone()).collect();
        vals.sort_by(|a, b| b.cmp_mid(a));
        vals.dedup_by(|a, b| a.cmp_mid(b) == Ordering::Equal);
        let sup = if floor.is_zero() { None } else { p.tail.ess().ok().map(|e| e.1) };
        let (mut mass, mut meas) = (Vec::with_capacity(vals.len()), Vec::with_capacity(vals.len()));
        for v in &vals {
            let (m, l) = if floor.is_zero() || sup.as_ref().is_some_and(|s| s.cmp_mid(v) != Ordering::Greater) {
                (Real::zero(), Real::zero())
            } else {
                // a failed tail sum falls back to the whole tail
                let m = p.tail.moment(&Transform::MassAbove(v.clone())).map(|r| r.hi_real());
                let l = p.tail.moment(&Transform::IndicatorAbove(v.clone())).map(|r| r.hi_real());
                (m.unwrap_or_else(|_| all_mass.clone()), l.unwrap_or_else(|_| floor.clone()).min(&floor))
            };
            mass.push(m);
            meas.push(l);
        }
        Ok(TailLevels { vals, mass, meas, all_mass, floor })
    }

    /// `(mass above t, measure above t)` bounds, from the largest
    /// materialized value not above `t`.
    fn above(&self, t: &Real) -> (&Real, &Real) {
        let i = self.vals.partition_point(|v| v.cmp_mid(t) == Ordering::Greater);
        match (self.mass.get(i), self.meas.get(i)) {
            (Some(m), Some(l)) => (m, l),
            _ => (&self.all_mass, &self.floor),
        }
    }
}

/// `P8` worst ratio from a prepared level curve of `p` at scale `curve.x`,
/// over levels up to `cap` when given.
pub fn p8_curve(
    c: &StepCurve,
    p: &StepProfile,
    beta: &Real,
    tail: &TailLevels,
    cap: Option<&Real>,
) -> Result<(Real, Real)> {
    let avg = &c.total / &c.x;
    let exact_tail = p.floor().is_zero();
    let parts = &c.desc;
    let (cum_len, cum_mass) = (&c.cum_len, &c.cum_mass);
    // parts with value > t are a prefix of the sorted list
    let count_above = |t: &Real| parts.partition_point(|(_, v)| v.cmp_mid(t) == Ordering::Greater);
    // candidates carry (l, beta l) so that beta (v / beta) = v stays exact
    let mut cands: Vec<(Real, Real)> = vec![(avg.clone(), beta * &avg)];
    for (_, v) in parts {
        cands.push((v.clone(), beta * v));
        cands.push((v / beta, v.clone()));
    }
    let mut best = Real::zero();
    let mut arg = avg.clone();
    for (l, bl) in cands {
        if l.cmp_mid(&avg) == Ordering::Less || cap.is_some_and(|m| l.cmp_mid(m) == Ordering::Greater) {
            continue;
        }
        let i = count_above(&l);
        if i == 0 {
            continue;
        }
        let j = count_above(&bl);
        let num = &cum_mass[i];
        let den = &cum_len[j];
        let r = if exact_tail {
            num / &(&l * den)
        } else {
            // the tail may add up to its mass above l and its measure above beta l
            let (t_mass, _) = tail.above(&l);
            let (_, t_meas) = tail.above(&bl);
            let lo = num / &(&l * &(den + t_meas));
            let hi = (num + t_mass) / (&l * den);
            lo.hull(&hi)
        };
        if r.cmp_mid(&best) == Ordering::Greater {
            best = r;
            arg = l;
        }
    }
    Ok((best, arg))
}

fn p8_power(p: &PowerProfile, x: &Real, beta: f64) -> Result<(Real, Real)> {
    let avg = average(&Profile::Power(p.clone()), x, &Transform::Identity)?.mid();
    let top = if p.r > 0.0 { 1.0 } else { f64::INFINITY };
    let mut best = Real::zero();
    let mut arg = Real::from_f64(avg);
    for j in 0..640 {
        let lam = avg * (j as f64 / 16.0).exp2();
        if lam >= top {
            break;
        }
        let meas = p.measure_above(x, beta * lam);
        let num = p.mass_above(x, lam)?;
        if num.is_zero() || meas <= 0.0 {
            continue;
        }
        let r = num / Real::from_f64(lam * meas);
        if r.cmp_mid(&best) == Ordering::Greater {
            best = r;
            arg = Real::from_f64(lam);
        }
    }
    Ok((best, arg))
}

/// Top half of the box over an arc of length `ell`, in the profile's own
/// coordinate.
pub fn top_half(coord: Coordinate, ell: &Real) -> (Real, Real) {
    match coord {
        Coordinate::U => (ell * &Real::ratio(1, 2), ell.clone()),
        Coordinate::S => (
            ell * &(Real::one() - ell * &Real::ratio(1, 4)),
            ell * &(Real::int(2) - ell.clone()),
        ),
    }
}

/// `esssup / essinf` over the top half for arc length `ell`.
pub fn ac_ratio(p: &Profile, ell: &Real) -> Result<Real> {
    if ell.cmp_mid(&Real::zero()) != Ordering::Greater || ell.cmp_mid(&Real::one()) == Ordering::Greater {
        return Err(Error::Domain(format!("arc length {ell} outside (0, 1]")));
    }
    let (lo, hi) = top_half(p.coord(), ell);
    let (inf, sup) = p.ess_bounds(&lo, &hi)?;
    if sup.is_inf() {
        return Ok(Real::inf());
    }
    Ok(safe_ratio(sup, inf))
}

/// Arc lengths where a top-half endpoint meets the breakpoint `b`.
pub fn ac_critical(coord: Coordinate, b: &Real) -> [Real; 2] {
    match coord {
        Coordinate::U => [b.clone(), b * &Real::int(2)],
        Coordinate::S => {
            let r = (Real::one() - b.clone()).sqrt();
            [Real::one() - r.clone(), Real::int(2) - Real::int(2) * r]
        }
    }
}

trait HiReal {
    fn hi_real(&self) -> Real;
}

impl HiReal for Real {
    fn hi_real(&self) -> Real {
        if self.is_exact() {
            self.clone()
        } else {
            Real::point(self.hi())
        }
    }
}
