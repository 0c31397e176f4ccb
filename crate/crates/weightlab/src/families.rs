//! Named counterexample families with their claimed condition tables.
//!
//! Block families put `f = b_k` on `(2^-k-1, 2^-k-1 (1 + a_k)]` and
//! `f = 1` on the rest of `(2^-k-1, 2^-k]`, in the `s` coordinate.

use crate::error::{Error, Result};
use crate::implication::{build_graph, Context, Node, NODES};
use crate::numeric::{Real, W};
use crate::profile::tail::{ExactFn, WINDOW};
use crate::profile::{
    BlockTail, ConstTail, Coordinate, Monotone, Piece, PowerProfile, Profile, StepProfile, Tail, TailMode, Transform,
};
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize, Serializer};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// Blocks materialized by default: deepest sweep scale plus the tail window.
pub const DEFAULT_DEPTH: u64 = 104;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FamilyId {
    Constant,
    Ex6_1,
    Ex6_2,
    Ex6_3,
    Ex6_4,
    Ex6_5,
    Ex6_6,
    Ex6_7,
    Ex6_8,
    Ex6_9,
    Ex6_10,
    ExCentre(f64),
    ExP4_1,
    ExP4_2,
    ExP4_3,
    ExP4_4,
}

impl FamilyId {
    /// Every family with a fixed id; `ExCentre` at `r = 1` and `r = -1/2`.
    pub fn all() -> Vec<FamilyId> {
        use FamilyId::*;
        vec![
            Constant,
            Ex6_1,
            Ex6_2,
            Ex6_3,
            Ex6_4,
            Ex6_5,
            Ex6_6,
            Ex6_7,
            Ex6_8,
            Ex6_9,
            Ex6_10,
            ExCentre(1.0),
            ExCentre(-0.5),
            ExP4_1,
            ExP4_2,
            ExP4_3,
            ExP4_4,
        ]
    }

    pub fn parse(s: &str) -> Result<FamilyId> {
        let t = s.trim();
        let lower = t.to_ascii_lowercase();
        if let Some(rest) = lower.strip_prefix("excentre") {
            let r = rest.trim().trim_start_matches('(').trim_end_matches(')').trim();
            let r: f64 = r.parse().map_err(|_| Error::Malformed(format!("ExCentre needs r, got {t:?}")))?;
            return Ok(FamilyId::ExCentre(r));
        }
        FamilyId::all()
            .into_iter()
            .find(|f| f.to_string().eq_ignore_ascii_case(t))
            .ok_or_else(|| Error::Malformed(format!("unknown family {t:?}")))
    }

    pub fn uses_b_rule(self) -> bool {
        !matches!(self, FamilyId::Constant | FamilyId::Ex6_9 | FamilyId::Ex6_10 | FamilyId::ExCentre(_))
    }

    fn is_block(self) -> bool {
        self.uses_b_rule() && self != FamilyId::Ex6_8
    }

    pub fn default_rule(self) -> Option<BRule> {
        use FamilyId::*;
        let up = BRule::PolyExp { scale: "1".into(), degree: 2, sign: 1 };
        let down = BRule::PolyExp { scale: "1".into(), degree: 2, sign: -1 };
        Some(match self {
            Ex6_1 | Ex6_5 | ExP4_1 | Ex6_8 => up,
            Ex6_3 | Ex6_4 | ExP4_3 => down,
            // a_k must fall below alpha / 4 well inside a sweep
            ExP4_4 => BRule::PolyExp { scale: "1".into(), degree: 3, sign: -1 },
            Ex6_2 => BRule::Linear { b0: 1.0, step: 1.0 },
            Ex6_6 => BRule::Geometric { b0: 1.0, ratio: 2.0 },
            Ex6_7 => BRule::Geometric { b0: 1.0, ratio: 0.5 },
            ExP4_2 => BRule::Dyadic { step: 1 << 28 },
            _ => return None,
        })
    }

    /// Direction of `f` in `t` when the family is monotone with
    /// `0 < w(0) < inf`.
    pub fn monotone(self) -> Option<Monotone> {
        match self {
            FamilyId::Ex6_8 | FamilyId::Ex6_9 => Some(Monotone::Increasing),
            FamilyId::Ex6_10 => Some(Monotone::Decreasing),
            _ => None,
        }
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyId::Constant => write!(f, "constant"),
            FamilyId::ExCentre(r) => write!(f, "ExCentre({r})"),
            other => write!(f, "{other:?}"),
        }
    }
}

impl Serialize for FamilyId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// The sequence `b_k` where the family leaves it free.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BRule {
    /// `b0 * ratio^k`
    Geometric { b0: f64, ratio: f64 },
    /// `b0 + step * k`
    Linear { b0: f64, step: f64 },
    /// `scale * 2^(sign * k^degree)`; `scale` is a decimal or `"e"`.
    PolyExp {
        #[serde(default = "one_str")]
        scale: String,
        degree: u32,
        sign: i32,
    },
    /// `log2(k + 2)^sign`: arbitrarily slow growth or decay.
    Slow { sign: i32 },
    /// `2^(step (k + 1))`: a huge base keeps `a_k b_k` small from the
    /// first block on.
    Dyadic { step: u64 },
}

fn one_str() -> String {
    "1".into()
}

impl BRule {
    pub fn b(&self, k: u64) -> Result<Real> {
        Ok(match self {
            BRule::Geometric { b0, ratio } => real(*b0)? * real(*ratio)?.powi(k as i32),
            BRule::Linear { b0, step } => real(*b0)? + real(*step)? * Real::int(k as i64),
            BRule::PolyExp { scale, degree, sign } => {
                let scale = if scale == "e" {
                    Real::one().exp()
                } else {
                    Real::parse(scale).ok_or_else(|| Error::Malformed(format!("bad scale {scale:?}")))?
                };
                let e = (k as i128).checked_pow(*degree).ok_or_else(|| Error::Domain("b exponent overflow".into()))?;
                scale * Real::pow2(e * i128::from(sign.signum()))
            }
            BRule::Dyadic { step } => Real::pow2(i128::from(*step) * i128::from(k + 1)),
            BRule::Slow { sign } => {
                let l = log2_exact(k + 2);
                if *sign < 0 {
                    l.recip()
                } else {
                    l
                }
            }
        })
    }
}

fn real(x: f64) -> Result<Real> {
    if x.is_finite() {
        Ok(Real::from_f64(x))
    } else {
        Err(Error::Malformed(format!("non-finite rule parameter {x}")))
    }
}

fn log2_exact(n: u64) -> Real {
    if n.is_power_of_two() {
        Real::int(n.trailing_zeros() as i64)
    } else {
        Real::int(n as i64).ln() / Real::int(2).ln()
    }
}

/// `2^-v` for `v >= 0`. Past `2^119` the exponent is not representable;
/// there `2^-v <= 2^-(2^118) v^-64` (as `v - 2^118 >= v / 2 >= 64 log2 v`)
/// keeps the enclosure decaying in `v`.
fn exp2_neg(v: &Real) -> Real {
    const LIMIT: i128 = 1 << 119;
    if let Some(r) = v.as_rational() {
        if r.is_integer() {
            if let Some(n) = r.numer().to_i128() {
                if (0..=LIMIT).contains(&n) {
                    return Real::pow2(-n);
                }
            }
        }
    }
    if v.lo() >= W::pow2(119) {
        let hi = W::pow2(-(1 << 118)).mul(Real::point(v.lo()).powi(-64).hi(), crate::numeric::Dir::Up);
        return Real::interval(W::ZERO, hi);
    }
    (-(v.clone() * Real::int(2).ln())).exp()
}

/// A family id with its `b` rule and depth.
#[derive(Clone, Debug)]
pub struct NamedFamily {
    pub id: FamilyId,
    pub b_rule: Option<BRule>,
    pub depth: u64,
}

/// JSON form: `{"id": "Ex6_3", "b_rule": {...}, "depth": 64, "r": 0.5}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilySpec {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_rule: Option<BRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
}

impl FamilySpec {
    pub fn from_json(text: &str) -> Result<FamilySpec> {
        serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))
    }

    pub fn family(&self) -> Result<NamedFamily> {
        let id = match (FamilyId::parse(&self.id), self.r) {
            (_, Some(r)) if self.id.eq_ignore_ascii_case("excentre") => FamilyId::ExCentre(r),
            (id, _) => id?,
        };
        let mut f = NamedFamily::new(id);
        if let Some(rule) = &self.b_rule {
            f = f.with_rule(rule.clone());
        }
        if let Some(d) = self.depth {
            f = f.with_depth(d);
        }
        Ok(f)
    }
}

type Ab = Arc<dyn Fn(u64) -> Result<(Real, Real)> + Send + Sync>;

impl NamedFamily {
    pub fn new(id: FamilyId) -> NamedFamily {
        NamedFamily { id, b_rule: id.default_rule(), depth: DEFAULT_DEPTH }
    }

    pub fn with_rule(mut self, rule: BRule) -> NamedFamily {
        self.b_rule = Some(rule);
        self
    }

    pub fn with_depth(mut self, depth: u64) -> NamedFamily {
        self.depth = depth;
        self
    }

    pub fn b(&self, k: u64) -> Result<Real> {
        match &self.b_rule {
            Some(r) => r.b(k),
            None => Err(Error::Domain(format!("{} has no b sequence", self.id))),
        }
    }

    /// `a_k` as a function of `b_k`.
    pub fn a(&self, k: u64) -> Result<Real> {
        a_of(self.id, &self.b(k)?)
    }

    /// Check the rule against the family's stated constraints on `b`.
    pub fn validate(&self) -> Result<()> {
        use FamilyId::*;
        if self.depth < 2 {
            return Err(Error::Domain("depth must be at least 2".into()));
        }
        if !self.id.uses_b_rule() {
            if self.b_rule.is_some() {
                return Err(Error::Domain(format!("{} takes no b rule", self.id)));
            }
            return Ok(());
        }
        let bad = |why: &str| Err(Error::Domain(format!("b rule violates {}: {why}", self.id)));
        let n = self.depth;
        let bs: Vec<Real> = (0..=n).map(|k| self.b(k)).collect::<Result<_>>()?;
        if bs.iter().any(|b| !b.is_finite() || !b.certainly_pos()) {
            return bad("b_k must be positive and finite");
        }
        let up = bs.windows(2).all(|w| w[1].cmp_mid(&w[0]) != Ordering::Less) && bs[n as usize].cmp_mid(&bs[0]).is_gt();
        let down =
            bs.windows(2).all(|w| w[1].cmp_mid(&w[0]) != Ordering::Greater) && bs[n as usize].cmp_mid(&bs[0]).is_lt();
        let b0 = bs[0].cmp_mid(&Real::one());
        match self.id {
            Ex6_1 | Ex6_5 | Ex6_6 | ExP4_1 => {
                if b0.is_lt() || !up {
                    return bad("need b_0 >= 1 and b increasing");
                }
            }
            Ex6_2 => {
                if b0.is_ne() || !up {
                    return bad("need b_0 = 1 and b increasing");
                }
                for k in 1..=n as usize {
                    let lhs = &bs[k] * &Real::int(k as i64);
                    let rhs = &bs[k - 1] * &Real::int(k as i64 + 1);
                    if lhs.cmp_mid(&rhs).is_gt() {
                        return bad("need b_k / b_(k-1) <= (k+1)/k");
                    }
                }
            }
            Ex6_3 | Ex6_4 | ExP4_4 => {
                if b0.is_ne() || !down {
                    return bad("need b_0 = 1 and b decreasing");
                }
            }
            Ex6_7 | ExP4_3 => {
                if b0.is_gt() || !down {
                    return bad("need b_0 <= 1 and b decreasing");
                }
            }
            ExP4_2 => {
                if bs[0].cmp_mid(&Real::one().exp()).is_lt() || !up {
                    return bad("need b_0 >= e and b increasing");
                }
            }
            Ex6_8 => {
                if b0.is_ne() || !up {
                    return bad("need b_0 = 1 and b increasing");
                }
            }
            _ => {}
        }
        if self.id.is_block() {
            for (k, b) in bs.iter().enumerate() {
                let a = a_of(self.id, b)?;
                if a.cmp_mid(&Real::zero()).is_lt() || a.cmp_mid(&Real::one()).is_gt() {
                    return bad(&format!("a_{k} = {a} outside [0, 1]"));
                }
            }
        }
        Ok(())
    }

    pub fn instantiate(&self) -> Result<Profile> {
        self.validate()?;
        let k = self.depth;
        Ok(match self.id {
            FamilyId::ExCentre(r) => Profile::Power(PowerProfile::new(r)?),
            FamilyId::Constant => {
                let floor = Real::pow2(-(k as i128));
                let tail = Tail::with_model(
                    TailMode::ClosedForm,
                    Arc::new(ConstTail { coord: Coordinate::S, floor: floor.clone(), val: Real::one() }),
                );
                Profile::Step(StepProfile::new(Coordinate::S, vec![Real::one(), floor], vec![Real::one()], tail)?)
            }
            FamilyId::Ex6_8 | FamilyId::Ex6_9 | FamilyId::Ex6_10 => Profile::Step(self.dyadic_u()?),
            _ => Profile::Step(self.blocks()?),
        })
    }

    /// `(a_k, b_k)` for `k < depth + WINDOW`, computed once.
    fn ab_table(&self) -> Result<Ab> {
        let n = self.depth + WINDOW;
        let id = self.id;
        let rule = self.b_rule.clone().ok_or_else(|| Error::Domain("missing b rule".into()))?;
        let table: Vec<(Real, Real)> = (0..n)
            .map(|k| {
                let b = rule.b(k)?;
                Ok((a_of(id, &b)?, b))
            })
            .collect::<Result<_>>()?;
        let table = Arc::new(table);
        Ok(Arc::new(move |k| match table.get(k as usize) {
            Some(ab) => Ok(ab.clone()),
            None => {
                let b = rule.b(k)?;
                Ok((a_of(id, &b)?, b))
            }
        }))
    }

    fn blocks(&self) -> Result<StepProfile> {
        let ab = self.ab_table()?;
        let mut pieces = Vec::new();
        for k in 0..self.depth {
            let (a, b) = ab(k)?;
            pieces.extend(block_pieces(k, &a, &b).into_iter().map(|(hi, len, val)| Piece { hi, len, val }));
        }
        let increasing = {
            let (_, b0) = ab(0)?;
            let (_, b1) = ab(1)?;
            b1.cmp_mid(&b0).is_gt()
        };
        let (inf, sup) = if increasing { (Real::one(), Real::inf()) } else { (Real::zero(), Real::one()) };
        let ab2 = ab.clone();
        let block: crate::profile::tail::BlockFn = Arc::new(move |k| match ab2(k) {
            Ok((a, b)) => block_pieces(k, &a, &b),
            Err(_) => vec![(Real::pow2(-(k as i128)), Real::pow2(-(k as i128) - 1), Real::inf())],
        });
        let tail = BlockTail { start: self.depth, coord: Coordinate::S, block, inf, sup, mono: None, exact: None };
        let floor = Real::pow2(-(self.depth as i128));
        StepProfile::from_pieces(Coordinate::S, pieces, floor, Tail::with_model(TailMode::Blocks, Arc::new(tail)))
    }

    /// The `u`-coordinate families with one value per dyadic block.
    fn dyadic_u(&self) -> Result<StepProfile> {
        let id = self.id;
        let n = self.depth + WINDOW;
        let vals: Vec<Real> = match id {
            FamilyId::Ex6_8 => {
                let mut out = vec![Real::one()];
                let mut acc = Real::one();
                for k in 1..n {
                    acc = acc / self.b(k)?;
                    out.push(acc.clone());
                }
                out
            }
            FamilyId::Ex6_9 => (0..n).map(|k| Real::pow2(-(k as i128))).collect(),
            _ => (0..n).map(|k| Real::pow2(k as i128)).collect(),
        };
        let vals = Arc::new(vals);
        let pieces: Vec<Piece> = (0..self.depth)
            .map(|k| Piece {
                hi: Real::pow2(-(k as i128)),
                len: Real::pow2(-(k as i128) - 1),
                val: vals[k as usize].clone(),
            })
            .collect();
        let v2 = vals.clone();
        let block: crate::profile::tail::BlockFn = Arc::new(move |k| {
            let v = v2.get(k as usize).cloned().unwrap_or_else(|| match id {
                FamilyId::Ex6_9 => Real::pow2(-(k as i128)),
                FamilyId::Ex6_10 => Real::pow2(k as i128),
                // beyond the table the product only shrinks
                _ => Real::interval(W::ZERO, v2.last().unwrap().hi()),
            });
            vec![(Real::pow2(-(k as i128)), Real::pow2(-(k as i128) - 1), v)]
        });
        let start = self.depth;
        let (inf, sup, mono) = match id {
            FamilyId::Ex6_10 => (vals[start as usize].clone(), Real::inf(), Monotone::Decreasing),
            _ => (Real::zero(), vals[start as usize].clone(), Monotone::Increasing),
        };
        let exact: Option<ExactFn> = (id == FamilyId::Ex6_9).then(|| {
            let f: ExactFn = Arc::new(move |phi, coord| ex6_9_tail(phi, coord, start));
            f
        });
        let tail = BlockTail { start, coord: Coordinate::U, block, inf, sup, mono: Some(mono), exact };
        let floor = Real::pow2(-(start as i128));
        let mut p = StepProfile::from_pieces(
            Coordinate::U,
            pieces,
            floor,
            Tail::with_model(if exact_available(id) { TailMode::ClosedForm } else { TailMode::Blocks }, Arc::new(tail)),
        )?;
        p.integrable = id != FamilyId::Ex6_10;
        Ok(p)
    }

    pub fn describe(&self) -> String {
        let rule = match &self.b_rule {
            Some(r) => serde_json::to_string(r).unwrap_or_default(),
            None => "none".into(),
        };
        format!("{} depth={} b_rule={}", self.id, self.depth, rule)
    }
}

fn exact_available(id: FamilyId) -> bool {
    id == FamilyId::Ex6_9
}

fn a_of(id: FamilyId, b: &Real) -> Result<Real> {
    use FamilyId::*;
    let one = Real::one();
    Ok(match id {
        Ex6_1 | ExP4_1 => b.recip(),
        Ex6_2 | ExP4_3 => Real::ratio(1, 4),
        Ex6_3 | ExP4_4 => (Real::int(16) - b.ln()).sqrt().recip(),
        Ex6_4 => (Real::int(4) - b.ln()).recip(),
        Ex6_5 => (b.clone() * (one + b.ln())).recip(),
        Ex6_6 => exp2_neg(b),
        Ex6_7 => exp2_neg(&b.recip()),
        ExP4_2 => (b.clone() * (one + b.ln().ln())).recip(),
        _ => return Err(Error::Domain(format!("{id} is not a block family"))),
    })
}

/// Block `k` top-down as `(hi, len, value)`, skipping empty parts.
fn block_pieces(k: u64, a: &Real, b: &Real) -> Vec<(Real, Real, Real)> {
    let half = Real::pow2(-(k as i128) - 1);
    let mut out = Vec::with_capacity(2);
    let one_len = &half * &(Real::one() - a.clone());
    if !one_len.is_zero() {
        out.push((Real::pow2(-(k as i128)), one_len, Real::one()));
    }
    let b_len = &half * a;
    if !b_len.is_zero() {
        out.push((&half + &b_len, b_len, b.clone()));
    }
    out
}

/// `int_0^(2^-K) f^q` for `f = 2^-n` on `u`-blocks, integer `q >= 0`, in
/// either coordinate.
fn ex6_9_tail(phi: &Transform, coord: Coordinate, k: u64) -> Option<Result<Real>> {
    let q = match phi {
        Transform::Identity => 1i128,
        Transform::Power(q) if q.fract() == 0.0 && q.abs() < 64.0 => *q as i128,
        _ => return None,
    };
    if q <= -1 {
        return Some(Err(Error::DivergentMoment(format!("{} tail diverges", phi.name()))));
    }
    let k = k as i128;
    // sum_{n >= K} 2^-(m n) = 2^-(m K) / (1 - 2^-m)
    let geo = |m: i128| Real::pow2(-m * k) / (Real::one() - Real::pow2(-m));
    Some(Ok(match coord {
        Coordinate::U => geo(q + 1) * Real::ratio(1, 2),
        // s-lengths are 2^-n - (3/4) 4^-n
        Coordinate::S => geo(q + 1) - Real::ratio(3, 4) * geo(q + 2),
    }))
}

/// `sum_(k >= n) 2^-k (k + 1) = 2^(1-n) (n + 2)`.
pub fn series_tail(n: u64) -> Real {
    Real::pow2(1 - n as i128) * Real::int(n as i64 + 2)
}

/// `2 + 2 / ln 2`, the constant in `series_tail(n) <= C 2^-n (n + 1)`.
pub fn series_constant() -> Real {
    Real::int(2) + Real::int(2) / Real::int(2).ln()
}

#[derive(Clone, Debug, Serialize)]
pub struct Claim {
    pub holds: bool,
    /// `"claimed"` or `"closure"`.
    pub source: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpectedBehavior {
    pub family: FamilyId,
    pub claims: BTreeMap<Node, Claim>,
}

impl ExpectedBehavior {
    pub fn get(&self, n: Node) -> Option<bool> {
        self.claims.get(&n).map(|c| c.holds)
    }
}

fn claimed(id: FamilyId) -> Vec<(Node, bool)> {
    use FamilyId::*;
    use Node::*;
    let (hold, fail): (&[Node], &[Node]) = match id {
        Constant => (&NODES, &[]),
        Ex6_1 => (&[P1, B1], &[P6, P3, AC]),
        Ex6_2 => (&[P8, P3], &[P5, P2, AC]),
        Ex6_3 => (&[P8, P5, P3], &[P2, AC]),
        Ex6_4 => (&[P8, P2], &[P1, AC]),
        Ex6_5 => (&[P1, P6, B1], &[P3, AC]),
        Ex6_6 => (&[P1, P3, B1], &[P8, AC]),
        Ex6_7 => (&[P1, P8, P3, BpInt], &[B1, AC]),
        Ex6_8 => (&[P7], &[P4, AC]),
        Ex6_9 => (&[AC, P7], &[B1]),
        Ex6_10 => (&[AC], &[P7]),
        ExCentre(r) if r < 0.0 => (&[P1, P3, B1], &[AC]),
        ExCentre(_) => (&[P1, P3], &[AC]),
        ExP4_1 => (&[P1, P4, B1], &[P4a, P6, P3, AC]),
        ExP4_2 => (&[P1, P4a], &[P6, AC]),
        ExP4_3 => (&[P8, P5], &[P4b, AC]),
        ExP4_4 => (&[P8, P4b, P5, P3], &[P2, AC]),
    };
    hold.iter().map(|n| (*n, true)).chain(fail.iter().map(|n| (*n, false))).collect()
}

/// Side conditions the family's claims put in force.
pub fn family_context(id: FamilyId, ac: bool) -> Context {
    let m = id.monotone();
    Context { ac, dec: m == Some(Monotone::Increasing), inc: m == Some(Monotone::Decreasing) }
}

/// Claimed holds / fails, extended forward (holds) and backward (fails)
/// through the implication closure.
pub fn expected_behavior(id: FamilyId) -> ExpectedBehavior {
    let base = claimed(id);
    let ac = base.iter().any(|(n, h)| *n == Node::AC && *h);
    let g = build_graph();
    let ctx = family_context(id, ac);
    let mut claims: BTreeMap<Node, Claim> = BTreeMap::new();
    for (n, h) in &base {
        claims.insert(*n, Claim { holds: *h, source: "claimed" });
    }
    for (n, h) in &base {
        for m in NODES {
            let reach = if *h { g.implies(*n, m, ctx) } else { g.implies(m, *n, ctx) };
            if reach {
                claims.entry(m).or_insert(Claim { holds: *h, source: "closure" });
            }
        }
    }
    if ctx.dec {
        claims.entry(Node::P7).or_insert(Claim { holds: true, source: "closure" });
    }
    ExpectedBehavior { family: id, claims }
}
