//! What lies below the deepest materialized breakpoint.

use super::transform::Transform;
use super::Coordinate;
use crate::error::{Error, Result};
use crate::numeric::{Real, W};
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailMode {
    Forbid,
    ClosedForm,
    GeometricBound,
    Blocks,
}

/// Direction of `f` as a function of `t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Monotone {
    Increasing,
    Decreasing,
}

pub trait TailModel: Send + Sync {
    /// Enclosure of the integral of `phi(f)` over `(0, floor]`.
    fn moment(&self, phi: &Transform) -> Result<Real>;
    /// Bounds on essinf and esssup of `f` over `(0, floor]`.
    fn ess(&self) -> (Real, Real);
    /// Direction of `f` on the tail, if known.
    fn monotone(&self) -> Option<Monotone> {
        None
    }
    /// Same tail measured in another coordinate.
    fn convert(&self, _to: Coordinate) -> Option<Arc<dyn TailModel>> {
        None
    }
}

#[derive(Clone)]
pub struct Tail {
    pub mode: TailMode,
    model: Option<Arc<dyn TailModel>>,
}

impl fmt::Debug for Tail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tail({:?})", self.mode)
    }
}

impl Tail {
    pub fn forbid() -> Tail {
        Tail { mode: TailMode::Forbid, model: None }
    }

    pub fn with_model(mode: TailMode, model: Arc<dyn TailModel>) -> Tail {
        Tail { mode, model: Some(model) }
    }

    pub fn model(&self) -> Option<&Arc<dyn TailModel>> {
        self.model.as_ref()
    }

    pub fn moment(&self, phi: &Transform) -> Result<Real> {
        match &self.model {
            None => Err(Error::BelowCoverage),
            Some(m) => m.moment(phi),
        }
    }

    pub fn ess(&self) -> Result<(Real, Real)> {
        match &self.model {
            None => Err(Error::BelowCoverage),
            Some(m) => Ok(m.ess()),
        }
    }

    pub fn monotone(&self) -> Option<Monotone> {
        self.model.as_ref().and_then(|m| m.monotone())
    }

    pub fn convert(&self, to: Coordinate) -> Tail {
        match &self.model {
            Some(m) => match m.convert(to) {
                Some(c) => Tail { mode: self.mode, model: Some(c) },
                None => Tail::forbid(),
            },
            None => Tail::forbid(),
        }
    }
}

/// `[S, S + t1 / (1 - rho)]` with `S = 0` below the floor: the tail's
/// phi-terms are assumed to decay at ratio `rho` starting from
/// `rho * (last piece's phi-mass)`.
pub struct GeometricTail {
    pub ratio: Real,
    pub last_len: Real,
    pub last_val: Real,
    pub vmin: Real,
    pub vmax: Real,
}

impl TailModel for GeometricTail {
    fn moment(&self, phi: &Transform) -> Result<Real> {
        let t1 = &self.ratio * &(&self.last_len * &phi.eval(&self.last_val));
        let bound = t1 / (Real::one() - self.ratio.clone());
        Ok(if bound.cmp_mid(&Real::zero()).is_ge() {
            Real::zero().hull(&bound)
        } else {
            bound.hull(&Real::zero())
        })
    }
    fn ess(&self) -> (Real, Real) {
        (self.vmin.clone(), self.vmax.clone())
    }
    fn convert(&self, _to: Coordinate) -> Option<Arc<dyn TailModel>> {
        Some(Arc::new(GeometricTail {
            ratio: self.ratio.clone(),
            last_len: self.last_len.clone(),
            last_val: self.last_val.clone(),
            vmin: self.vmin.clone(),
            vmax: self.vmax.clone(),
        }))
    }
}

/// One materialized piece of a block: `(hi, len, value)` on `(hi - len, hi]`.
pub type BlockPiece = (Real, Real, Real);
pub type BlockFn = Arc<dyn Fn(u64) -> Vec<BlockPiece> + Send + Sync>;
pub type ExactFn = Arc<dyn Fn(&Transform, Coordinate) -> Option<Result<Real>> + Send + Sync>;

/// Tail made of the family's remaining blocks `k >= start`. Moments sum a
/// window of `WINDOW` blocks and bound the rest geometrically from the
/// largest ratio among the final terms.
#[derive(Clone)]
pub struct BlockTail {
    pub start: u64,
    pub coord: Coordinate,
    pub block: BlockFn,
    pub inf: Real,
    pub sup: Real,
    pub mono: Option<Monotone>,
    pub exact: Option<ExactFn>,
}

pub const WINDOW: u64 = 64;

/// `log2 |r|` as (exponent, log2 of mantissa); `None` for zero. Kept
/// split so differences of huge exponents stay exact.
fn log2_mag(r: &Real) -> Option<(i128, f64)> {
    let h = r.hi().abs().max(r.lo().abs());
    if h.is_zero() {
        None
    } else {
        Some((h.exponent(), h.mantissa().log2()))
    }
}

fn mag_diff(b: (i128, f64), a: (i128, f64)) -> f64 {
    (b.0 - a.0) as f64 + (b.1 - a.1)
}

impl BlockTail {
    fn term(&self, k: u64, phi: &Transform) -> Real {
        Real::sum(self.block_in_coord(k).into_iter().map(|(_, len, v)| len * phi.eval(&v)))
    }

    fn block_in_coord(&self, k: u64) -> Vec<BlockPiece> {
        (self.block)(k)
    }
}

impl TailModel for BlockTail {
    fn moment(&self, phi: &Transform) -> Result<Real> {
        if let Some(ex) = &self.exact {
            if let Some(r) = ex(phi, self.coord) {
                return r;
            }
        }
        let terms: Vec<Real> = (self.start..self.start + WINDOW).map(|k| self.term(k, phi)).collect();
        if terms.iter().any(|t| !t.is_finite()) {
            return Err(Error::DivergentMoment(format!("{} tail term is infinite", phi.name())));
        }
        let sum = Real::sum(terms.iter().cloned());
        let mags: Vec<Option<(i128, f64)>> = terms.iter().map(log2_mag).collect();
        let tailn = 8;
        let last = &mags[mags.len() - tailn..];
        if last.iter().all(|m| m.is_none()) {
            return Ok(sum);
        }
        let mut worst = f64::NEG_INFINITY;
        for w in last.windows(2) {
            match (w[0], w[1]) {
                (Some(a), Some(b)) => worst = worst.max(mag_diff(b, a)),
                (None, Some(_)) => worst = f64::INFINITY,
                _ => {}
            }
        }
        if worst >= -1e-3 {
            // not decaying: growth over the whole window means divergence
            let first = mags.iter().flatten().next().copied();
            let grew = match (first, mags.last().copied().flatten()) {
                (Some(a), Some(b)) => mag_diff(b, a) >= 0.0,
                _ => false,
            };
            if grew {
                return Err(Error::DivergentMoment(format!("{} tail terms do not decay", phi.name())));
            }
            return Err(Error::Tail(format!("{} tail ratio not below 1", phi.name())));
        }
        let rho = worst.exp2();
        let t_last = terms.last().unwrap();
        let mag = t_last.hi().abs().max(t_last.lo().abs());
        let r = W::from_f64(rho / (1.0 - rho) * (1.0 + 1e-9));
        let rem = mag.mul(r, crate::numeric::Dir::Up);
        let nonneg = terms.iter().all(|t| t.lo() >= W::ZERO);
        let slack = if nonneg { Real::interval(W::ZERO, rem) } else { Real::interval(rem.neg(), rem) };
        Ok(sum + slack)
    }

    fn ess(&self) -> (Real, Real) {
        (self.inf.clone(), self.sup.clone())
    }

    fn monotone(&self) -> Option<Monotone> {
        self.mono
    }

    fn convert(&self, to: Coordinate) -> Option<Arc<dyn TailModel>> {
        if to == self.coord {
            return Some(Arc::new(self.clone()));
        }
        let inner = self.block.clone();
        let from = self.coord;
        let block: BlockFn = Arc::new(move |k| {
            inner(k).into_iter().map(|(hi, len, v)| {
                let (h2, l2) = super::convert_span(from, &hi, &len);
                (h2, l2, v)
            }).collect()
        });
        Some(Arc::new(BlockTail { block, coord: to, ..self.clone() }))
    }
}

/// `f = val` on all of `(0, floor]`.
pub struct ConstTail {
    pub coord: Coordinate,
    pub floor: Real,
    pub val: Real,
}

impl TailModel for ConstTail {
    fn moment(&self, phi: &Transform) -> Result<Real> {
        let v = phi.eval(&self.val);
        if !v.is_finite() {
            return Err(Error::DivergentMoment(format!("{} of the tail value is infinite", phi.name())));
        }
        Ok(&self.floor * &v)
    }
    fn ess(&self) -> (Real, Real) {
        (self.val.clone(), self.val.clone())
    }
    fn convert(&self, to: Coordinate) -> Option<Arc<dyn TailModel>> {
        let floor = match (self.coord, to) {
            (Coordinate::U, Coordinate::S) => super::u_to_s(&self.floor),
            (Coordinate::S, Coordinate::U) => super::s_to_u(&self.floor),
            _ => self.floor.clone(),
        };
        Some(Arc::new(ConstTail { coord: to, floor, val: self.val.clone() }))
    }
}
