use crate::numeric::Real;
use std::cmp::Ordering;

/// Pointwise transforms `phi` applied to profile values before integrating.
#[derive(Clone, Debug)]
pub enum Transform {
    Identity,
    Power(f64),
    Log,
    /// `v * log+(v / c)`
    LogPlusRel(Real),
    /// `v * log(e + v / c)`
    LogEPlusRel(Real),
    /// `1{v > lambda}`
    IndicatorAbove(Real),
    /// `v * 1{v > lambda}`
    MassAbove(Real),
    /// `2 v (1 + log(2 v / m)) * 1{v > m / 2}`: dominates the maximal
    /// function's excess over `m` below the materialized depth.
    MaximalTail(Real),
}

fn e_const() -> Real {
    Real::one().exp()
}

impl Transform {
    pub fn eval(&self, v: &Real) -> Real {
        match self {
            Transform::Identity => v.clone(),
            Transform::Power(s) => v.powf(*s),
            Transform::Log => v.ln(),
            Transform::LogPlusRel(c) => {
                let r = v / c;
                if r.cmp_mid(&Real::one()) != Ordering::Greater {
                    return Real::zero();
                }
                (v * &r.ln()).clamp_nonneg()
            }
            Transform::LogEPlusRel(c) => v * &(e_const() + v / c).ln(),
            Transform::IndicatorAbove(l) => {
                if v.cmp_mid(l) == Ordering::Greater {
                    Real::one()
                } else {
                    Real::zero()
                }
            }
            Transform::MassAbove(l) => {
                if v.cmp_mid(l) == Ordering::Greater {
                    v.clone()
                } else {
                    Real::zero()
                }
            }
            Transform::MaximalTail(m) => {
                let half = m * &Real::ratio(1, 2);
                if v.cmp_mid(&half) != Ordering::Greater {
                    return Real::zero();
                }
                let two_v = v * &Real::int(2);
                let lg = (&two_v / m).ln().clamp_nonneg();
                two_v * (Real::one() + lg)
            }
        }
    }

    /// Evaluate on a plain `f64` value (quadrature paths).
    pub fn eval_f64(&self, v: f64) -> f64 {
        match self {
            Transform::Identity => v,
            Transform::Power(s) => v.powf(*s),
            Transform::Log => v.ln(),
            Transform::LogPlusRel(c) => {
                let c = c.mid();
                if v > c {
                    v * (v / c).ln()
                } else {
                    0.0
                }
            }
            Transform::LogEPlusRel(c) => v * (std::f64::consts::E + v / c.mid()).ln(),
            Transform::IndicatorAbove(l) => {
                if v > l.mid() {
                    1.0
                } else {
                    0.0
                }
            }
            Transform::MassAbove(l) => {
                if v > l.mid() {
                    v
                } else {
                    0.0
                }
            }
            Transform::MaximalTail(m) => {
                let m = m.mid();
                if v > m / 2.0 {
                    2.0 * v * (1.0 + (2.0 * v / m).ln())
                } else {
                    0.0
                }
            }
        }
    }

    /// Value thresholds where the transform has a kink or jump.
    pub fn thresholds(&self) -> Vec<f64> {
        match self {
            Transform::LogPlusRel(c) => vec![c.mid()],
            Transform::IndicatorAbove(l) | Transform::MassAbove(l) => vec![l.mid()],
            Transform::MaximalTail(m) => vec![m.mid() / 2.0],
            _ => vec![],
        }
    }

    /// True when `phi(v) >= 0` for every positive `v`.
    pub fn nonneg(&self) -> bool {
        !matches!(self, Transform::Log)
    }

    pub fn name(&self) -> String {
        match self {
            Transform::Identity => "identity".into(),
            Transform::Power(s) => format!("power({s})"),
            Transform::Log => "log".into(),
            Transform::LogPlusRel(c) => format!("logplus_relative({c})"),
            Transform::LogEPlusRel(c) => format!("log_e_plus_relative({c})"),
            Transform::IndicatorAbove(l) => format!("indicator_above({l})"),
            Transform::MassAbove(l) => format!("mass_above({l})"),
            Transform::MaximalTail(m) => format!("maximal_tail({m})"),
        }
    }
}
