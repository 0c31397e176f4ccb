//! Running averages `y -> (1/y) int_0^y f`, their running maximum from the
//! right (the restricted maximal function), and its integral.

use crate::error::{Error, Result};
use crate::numeric::Real;
use crate::profile::{BoundPair, Monotone, StepProfile, Transform};
use std::cmp::Ordering;

/// On `(c, d]` the average is `(a + b (y - c)) / y`.
#[derive(Clone, Debug)]
pub struct EnvSeg {
    pub c: Real,
    pub d: Real,
    pub len: Real,
    pub a: Real,
    pub b: Real,
}

impl EnvSeg {
    pub fn eval(&self, y: &Real) -> Real {
        (&self.a + &(&self.b * &(y - &self.c))) / y.clone()
    }
    pub fn at_top(&self) -> Real {
        (&self.a + &(&self.b * &self.len)) / self.d.clone()
    }
    pub fn at_bottom(&self) -> Real {
        &self.a / &self.c
    }
    /// Sign of the derivative, `b c - a`.
    pub fn increasing(&self) -> bool {
        (&self.b * &self.c).cmp_mid(&self.a) != Ordering::Less
    }
}

/// Exact piecewise form of the running average on `(floor, x]`,
/// deepest segment first.
#[derive(Clone, Debug)]
pub struct AverageEnvelope {
    pub segs: Vec<EnvSeg>,
    pub x: Real,
    /// `int_0^floor f` (tail enclosure).
    pub base: Real,
}

impl AverageEnvelope {
    pub fn eval(&self, y: &Real) -> Result<Real> {
        for s in &self.segs {
            if y.cmp_mid(&s.c) == Ordering::Greater && y.cmp_mid(&s.d) != Ordering::Greater {
                return Ok(s.eval(y));
            }
        }
        Err(Error::Domain(format!("{y} outside the envelope domain")))
    }

    /// Max of the average over `[t, x]`; monotone segments put it at
    /// endpoints.
    pub fn max_from(&self, t: &Real) -> Result<Real> {
        if t.cmp_mid(&self.x) == Ordering::Greater {
            return Err(Error::Domain("t > x".into()));
        }
        let mut best = self.eval(t)?;
        for s in &self.segs {
            if s.d.cmp_mid(t) == Ordering::Greater {
                best = best.max(&s.at_top());
            }
        }
        Ok(best)
    }
}

pub fn envelope(p: &StepProfile, x: &Real) -> Result<AverageEnvelope> {
    let cut = p.cut(x)?;
    let base = p.tail.moment(&Transform::Identity)?;
    let n = p.pieces().len();
    let mut segs = Vec::with_capacity(n - cut.idx);
    let mut a = base.clone();
    for i in (cut.idx..n).rev() {
        let pc = &p.pieces()[i];
        let c = p.lower(i);
        let (d, len) = if i == cut.idx { (x.clone(), cut.keep.clone()) } else { (pc.hi.clone(), pc.len.clone()) };
        let next = &a + &(&pc.val * &len);
        segs.push(EnvSeg { c, d, len, a: a.clone(), b: pc.val.clone() });
        a = next;
    }
    Ok(AverageEnvelope { segs, x: x.clone(), base })
}

/// One piece of `t -> M(f 1_(0,x])(t)`.
#[derive(Clone, Debug)]
pub enum RunSeg {
    Constant { c: Real, d: Real, m: Real },
    Envelope { c: Real, d: Real, seg: EnvSeg },
}

/// The restricted maximal function on `(floor, x]`, shallowest first, plus
/// its value at the floor.
#[derive(Clone, Debug)]
pub struct RunningMaxProfile {
    pub segs: Vec<RunSeg>,
    pub at_floor: Real,
}

pub fn running_max(env: &AverageEnvelope) -> RunningMaxProfile {
    let mut out = Vec::new();
    let mut m = env.segs.last().map(|s| s.at_top()).unwrap_or_else(Real::zero);
    for s in env.segs.iter().rev() {
        m = m.max(&s.at_top());
        if s.increasing() {
            out.push(RunSeg::Constant { c: s.c.clone(), d: s.d.clone(), m: m.clone() });
            continue;
        }
        let ec = s.at_bottom();
        if ec.cmp_mid(&m) != Ordering::Greater {
            out.push(RunSeg::Constant { c: s.c.clone(), d: s.d.clone(), m: m.clone() });
            continue;
        }
        // crossing where (a + b (t - c)) / t = m
        let num = &s.a - &(&s.b * &s.c);
        let t = (num / (&m - &s.b)).max(&s.c).min(&s.d);
        out.push(RunSeg::Constant { c: t.clone(), d: s.d.clone(), m: m.clone() });
        out.push(RunSeg::Envelope { c: s.c.clone(), d: t, seg: s.clone() });
        m = ec;
    }
    RunningMaxProfile { segs: out, at_floor: m }
}

impl RunningMaxProfile {
    /// Integral over `(floor, x]`.
    pub fn integral(&self) -> Real {
        let mut tot = Real::zero();
        for s in &self.segs {
            tot = tot
                + match s {
                    RunSeg::Constant { c, d, m } => m * &(d - c),
                    RunSeg::Envelope { c, d, seg } => {
                        let k = &seg.a - &(&seg.b * &seg.c);
                        k * (d / c).ln() + &seg.b * &(d - c)
                    }
                };
        }
        tot
    }
}

/// Value of the restricted maximal function at `t`.
pub fn restricted_maximal_at(p: &StepProfile, x: &Real, t: &Real) -> Result<Real> {
    if t.cmp_mid(x) == Ordering::Greater {
        return Err(Error::Domain("t > x".into()));
    }
    envelope(p, x)?.max_from(t)
}

/// `Mf(t)`: running average maximized over all `y` in `[t, 1]`.
pub fn global_maximal_at(p: &StepProfile, t: &Real) -> Result<Real> {
    restricted_maximal_at(p, &Real::one(), t)
}

/// `int_0^x M(f 1_(0,x])`. Profiles with `f` increasing in `t` return the
/// moment itself: the running average is then increasing, so `M` is the
/// constant average over `(0, x]`.
pub fn maximal_integral(p: &StepProfile, x: &Real) -> Result<BoundPair> {
    if !p.integrable {
        return Err(Error::NonIntegrable);
    }
    if p.monotone() == Some(Monotone::Increasing) {
        return p.moment(x, &Transform::Identity);
    }
    let env = envelope(p, x)?;
    let run = running_max(&env);
    let body = run.integral();
    let m = run.at_floor.clone();
    // below the floor: x_K m <= int M <= x_K m + int g 2(1 + log(2g/m)) 1{g > m/2}
    let floor = p.floor().clone();
    let lo = &floor * &m;
    let excess = p.tail.moment(&Transform::MaximalTail(m))?.clamp_nonneg();
    let hi = &lo + &excess;
    Ok(body + lo.hull(&hi))
}
