//! The power weight `|z|^(2r)`, i.e. `f(t) = (1 - t)^r` in the `s` coordinate.

use super::transform::Transform;
use super::{BoundPair, Monotone};
use crate::error::{Error, Result};
use crate::numeric::quad::integrate_graded;
use crate::numeric::Real;
use std::cmp::Ordering;

#[derive(Clone, Debug)]
pub struct PowerProfile {
    pub r: f64,
}

/// Relative slack folded around closed forms evaluated in binary64.
const REL: f64 = 1e-13;

fn widen(v: f64, abs_err: f64) -> Real {
    let e = abs_err + v.abs() * REL + f64::MIN_POSITIVE;
    Real::from_f64_bounds((v - e).next_down(), (v + e).next_up())
}

impl PowerProfile {
    pub fn new(r: f64) -> Result<PowerProfile> {
        if !(r > -1.0) || r == 0.0 || !r.is_finite() {
            return Err(Error::Domain(format!("power exponent r = {r} needs r > -1, r != 0")));
        }
        Ok(PowerProfile { r })
    }

    pub fn value(&self, t: &Real) -> Real {
        (Real::one() - t.clone()).clamp_nonneg().powf(self.r)
    }

    /// `f` increases in `t` exactly when `r < 0`.
    pub fn monotone(&self) -> Monotone {
        if self.r < 0.0 {
            Monotone::Increasing
        } else {
            Monotone::Decreasing
        }
    }

    /// `int_0^x (1-t)^q dt`, exact for small nonnegative integer `q`.
    pub fn power_integral(x: &Real, q: f64) -> Result<Real> {
        let one_minus = Real::one() - x.clone();
        let at_one = one_minus.is_zero();
        if q <= -1.0 && at_one {
            return Err(Error::DivergentMoment(format!("integral of t^{q} near 0")));
        }
        if q.fract() == 0.0 && (0.0..=64.0).contains(&q) && x.is_exact() {
            let k = q as i32 + 1;
            return Ok((Real::one() - one_minus.powi(k)) / Real::int(k as i64));
        }
        let xf = x.mid();
        if q == -1.0 {
            return Ok(widen(-(-xf).ln_1p(), 0.0));
        }
        let v = -((q + 1.0) * (-xf).ln_1p()).exp_m1() / (q + 1.0);
        Ok(widen(v, 0.0))
    }

    pub fn moment(&self, x: &Real, phi: &Transform) -> Result<BoundPair> {
        let r = self.r;
        match phi {
            Transform::Identity => Self::power_integral(x, r),
            Transform::Power(s) => Self::power_integral(x, r * s),
            Transform::Log => {
                // int_0^x r ln(1-t) dt = r(-(1-x) ln(1-x) - x)
                let xf = x.mid();
                let v = if xf >= 1.0 { -1.0 } else { -(1.0 - xf) * (-xf).ln_1p() - xf };
                Ok(widen(r * v, 0.0))
            }
            _ => Ok(self.quad(x, phi)),
        }
    }

    /// Quadrature in `u = 1 - t` on `[1 - x, 1]`, split where the transform
    /// kinks.
    fn quad(&self, x: &Real, phi: &Transform) -> Real {
        let r = self.r;
        let a = 1.0 - x.mid();
        let g = |u: f64| phi.eval_f64(u.powf(r));
        let mut cuts = vec![a];
        for c in phi.thresholds() {
            if c > 0.0 {
                let u = c.powf(1.0 / r);
                if u > a && u < 1.0 {
                    cuts.push(u);
                }
            }
        }
        cuts.push(1.0);
        cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
        let (mut v, mut e) = (0.0, 0.0);
        for w in cuts.windows(2) {
            let (vi, ei) = integrate_graded(&g, w[0], w[1]);
            v += vi;
            e += ei;
        }
        widen(v, e)
    }

    pub fn ess_bounds(&self, lo: &Real, hi: &Real) -> Result<(Real, Real)> {
        if lo.cmp_mid(hi) != Ordering::Less {
            return Err(Error::Domain("need lo < hi".into()));
        }
        let (a, b) = (self.value(lo), self.value(hi));
        let at_one = hi.cmp_mid(&Real::one()) == Ordering::Equal;
        Ok(if self.r > 0.0 {
            (if at_one { Real::zero() } else { b }, a)
        } else {
            (a, if at_one { Real::inf() } else { b })
        })
    }

    /// `f` is monotone and continuous, so the median is `f(x/2)`.
    pub fn median(&self, x: &Real) -> Real {
        self.value(&(x * &Real::ratio(1, 2)))
    }

    /// Mass fraction of the heaviest subset of measure `alpha x`.
    pub fn concentration(&self, x: &Real, alpha: f64) -> Result<Real> {
        let total = self.moment(x, &Transform::Identity)?;
        let ax = x * &Real::from_f64(alpha);
        let top = if self.r > 0.0 {
            Self::power_integral(&ax, self.r)?
        } else {
            total.clone() - Self::power_integral(&(x - &ax), self.r)?
        };
        Ok((top / total).clamp_nonneg().min(&Real::one()))
    }

    /// `|{t <= x : f > lambda}|`, exact interval endpoint.
    pub fn measure_above(&self, x: &Real, lambda: f64) -> f64 {
        let xf = x.mid();
        let t = 1.0 - lambda.powf(1.0 / self.r);
        if self.r > 0.0 {
            t.clamp(0.0, xf)
        } else {
            (xf - t.clamp(0.0, xf)).max(0.0)
        }
    }

    pub fn mass_above(&self, x: &Real, lambda: f64) -> Result<Real> {
        let xf = x.mid();
        let t = (1.0 - lambda.powf(1.0 / self.r)).clamp(0.0, xf);
        let tr = Real::from_f64(t);
        if self.r > 0.0 {
            Self::power_integral(&tr, self.r)
        } else {
            Ok((Self::power_integral(x, self.r)? - Self::power_integral(&tr, self.r)?).clamp_nonneg())
        }
    }

    /// `int_0^x M(f 1_(0,x])`: for `r < 0` the running average increases,
    /// for `r > 0` it decreases and `M(t) = F(t)/t`.
    pub fn maximal_integral(&self, x: &Real) -> Result<Real> {
        if self.r < 0.0 {
            return Self::power_integral(x, self.r);
        }
        let r = self.r;
        let xf = x.mid();
        let g = |t: f64| {
            if t <= 0.0 {
                1.0
            } else {
                -((r + 1.0) * (-t).ln_1p()).exp_m1() / ((r + 1.0) * t)
            }
        };
        let (v, e) = crate::numeric::quad::integrate(&g, 0.0, xf, 64);
        Ok(widen(v, e))
    }
}

impl PowerProfile {
    pub fn describe(&self) -> String {
        format!("(1-t)^{}", self.r)
    }
}
