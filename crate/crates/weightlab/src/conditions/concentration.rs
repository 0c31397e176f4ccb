//! `K_x(alpha)`: the largest share of `f((0, x])` a set of measure
//! `alpha x` can carry. Greedy on pieces sorted by value.

use crate::error::Result;
use crate::numeric::Real;
use crate::profile::{PowerProfile, Profile, StepProfile, Transform};
use std::cmp::Ordering;

#[derive(Clone, Debug)]
pub enum Concentration {
    Step(StepCurve),
    Power { r: f64, x: Real },
}

/// Parts of `(0, x]` sorted by value, heaviest first, with running length
/// and mass. The tail `(0, floor]` is one part at its mean value: exact for
/// a constant tail, and harmless for the named families, whose tails sit
/// far below any swept scale.
#[derive(Clone, Debug)]
pub struct StepCurve {
    pub x: Real,
    pub total: Real,
    pub desc: Vec<(Real, Real)>,
    pub(crate) cum_len: Vec<Real>,
    pub(crate) cum_mass: Vec<Real>,
    /// Running length and mass from the lightest part up, so small shares
    /// are not differences of large ones.
    asc_len: Vec<Real>,
    asc_mass: Vec<Real>,
}

impl StepCurve {
    pub fn new(p: &StepProfile, x: &Real) -> Result<StepCurve> {
        let cut = p.cut(x)?;
        let total = p.moment_cut(&cut, &Transform::Identity)?;
        let mut desc = p.clip(&cut);
        let floor = p.floor();
        if floor.cmp_mid(&Real::zero()) == Ordering::Greater {
            let mass = p.tail.moment(&Transform::Identity)?;
            desc.push((floor.clone(), mass / floor.clone()));
        }
        desc.sort_by(|a, b| b.1.cmp_mid(&a.1));
        let mut cum_len = vec![Real::zero()];
        let mut cum_mass = vec![Real::zero()];
        for (l, v) in &desc {
            cum_len.push(cum_len.last().unwrap() + l);
            cum_mass.push(cum_mass.last().unwrap() + &(l * v));
        }
        let mut asc_len = vec![Real::zero()];
        let mut asc_mass = vec![Real::zero()];
        for (l, v) in desc.iter().rev() {
            asc_len.push(asc_len.last().unwrap() + l);
            asc_mass.push(asc_mass.last().unwrap() + &(l * v));
        }
        Ok(StepCurve { x: x.clone(), total, desc, cum_len, cum_mass, asc_len, asc_mass })
    }

    /// Heaviest mass on a set of measure `budget`.
    fn top(&self, budget: &Real) -> Real {
        let i = self.cum_len.partition_point(|c| c.cmp_mid(budget) != Ordering::Greater);
        if i > self.desc.len() {
            return self.cum_mass.last().unwrap().clone();
        }
        let i = i - 1;
        let rest = budget - &self.cum_len[i];
        &self.cum_mass[i] + &(rest * &self.desc[i].1)
    }

    /// Lightest mass on a set of measure `budget`.
    fn bottom(&self, budget: &Real) -> Real {
        let n = self.desc.len();
        let i = self.asc_len.partition_point(|c| c.cmp_mid(budget) != Ordering::Greater);
        if i > n {
            return self.asc_mass[n].clone();
        }
        let i = i - 1;
        let rest = budget - &self.asc_len[i];
        &self.asc_mass[i] + &(rest * &self.desc[n - 1 - i].1)
    }

    /// Smallest measure capturing mass `need`.
    fn cover(&self, need: &Real) -> Real {
        let i = self.cum_mass.partition_point(|c| c.cmp_mid(need) == Ordering::Less);
        if i == 0 {
            return Real::zero();
        }
        if i > self.desc.len() {
            return self.cum_len.last().unwrap().clone();
        }
        let j = i - 1;
        let rest = need - &self.cum_mass[j];
        &self.cum_len[j] + &(rest / self.desc[j].1.clone())
    }

    /// Vertices `(alpha, K(alpha))` of the curve.
    pub fn vertices(&self) -> Vec<(Real, Real)> {
        self.cum_len.iter().zip(&self.cum_mass).map(|(l, m)| (l / &self.x, m / &self.total)).collect()
    }
}

impl Concentration {
    pub fn new(p: &Profile, x: &Real) -> Result<Concentration> {
        Ok(match p {
            Profile::Step(s) => Concentration::Step(StepCurve::new(s, x)?),
            Profile::Power(pp) => Concentration::Power { r: pp.r, x: x.clone() },
        })
    }

    /// `K_x(alpha)`.
    pub fn k(&self, alpha: &Real) -> Result<Real> {
        match self {
            Concentration::Step(c) => Ok(c.top(&(alpha * &c.x)) / c.total.clone()),
            Concentration::Power { r, x } => PowerProfile { r: *r }.concentration(x, alpha.mid()),
        }
    }

    /// `L_x(beta) = 1 - K_x(1 - beta)`: the smallest share carried by a set
    /// of measure `beta x`.
    pub fn l(&self, beta: &Real) -> Result<Real> {
        match self {
            Concentration::Step(c) => Ok(c.bottom(&(beta * &c.x)) / c.total.clone()),
            Concentration::Power { .. } => Ok((Real::one() - self.k(&(Real::one() - beta.clone()))?).clamp_nonneg()),
        }
    }

    /// `A_x(beta)`: the smallest measure fraction carrying a `beta` share.
    pub fn inverse(&self, beta: &Real) -> Result<Real> {
        match self {
            Concentration::Step(c) => Ok(c.cover(&(beta * &c.total)) / c.x.clone()),
            Concentration::Power { .. } => {
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                let b = beta.mid();
                for _ in 0..60 {
                    let m = 0.5 * (lo + hi);
                    if self.k(&Real::from_f64(m))?.mid() >= b {
                        hi = m;
                    } else {
                        lo = m;
                    }
                }
                Ok(Real::from_f64_bounds(lo, hi))
            }
        }
    }
}
