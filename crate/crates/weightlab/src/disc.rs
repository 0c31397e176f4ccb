//! Direct polar quadrature over Carleson squares, as an independent check
//! that the one-dimensional reduction of every functional is right.
//!
//! Points are parametrized by `(u, theta)` with `u = 1 - |z|`, so deep
//! pieces near the boundary never pass through `1 - |z|` in binary64.
//! Areas are normalized by `pi`; angles and arc lengths are in turns.

use crate::error::{Error, Result};
use crate::maximal;
use crate::numeric::Real;
use crate::profile::{Coordinate, Profile, StepProfile, Transform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::cmp::Ordering;

/// The square over the arc of length `arc` centred at angle `centre`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CarlesonSquare {
    pub arc: f64,
    pub centre: f64,
}

impl CarlesonSquare {
    pub fn new(arc: f64, centre: f64) -> Result<CarlesonSquare> {
        if !(arc > 0.0 && arc <= 1.0) {
            return Err(Error::Domain(format!("arc length {arc} outside (0, 1]")));
        }
        Ok(CarlesonSquare { arc, centre })
    }

    /// `x = |I| (2 - |I|)`.
    pub fn scale(&self) -> f64 {
        self.arc * (2.0 - self.arc)
    }

    /// `|Q_I| = |I|^2 (2 - |I|)`.
    pub fn area(&self) -> f64 {
        self.arc * self.scale()
    }

    /// `|T_I| = |I|^2 (1 - 3|I|/4)`.
    pub fn top_area(&self) -> f64 {
        self.arc * self.arc * (1.0 - 0.75 * self.arc)
    }
}

/// Node counts for the midpoint product rule.
#[derive(Clone, Copy, Debug)]
pub struct QuadratureSpec {
    pub radial: usize,
    pub angular: usize,
    /// Split radial panels at the breakpoint radii of step profiles.
    pub split: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { radial: 2048, angular: 64, split: true }
    }
}

impl QuadratureSpec {
    pub fn refined(self) -> QuadratureSpec {
        QuadratureSpec { radial: 2 * self.radial, ..self }
    }

    fn check(&self) -> Result<()> {
        if self.radial < 16 || self.angular < 16 {
            return Err(Error::Domain("quadrature needs at least 16 nodes per direction".into()));
        }
        Ok(())
    }
}

/// `u` with `u (2 - u) = s`, without cancellation.
pub fn u_of_s(s: f64) -> f64 {
    s / (1.0 + (1.0 - s).sqrt())
}

/// The profile in binary64, indexed by `s`.
#[derive(Clone, Debug)]
enum Radial {
    /// Pieces `(lo, hi]` with their exact width in `u` and value,
    /// shallowest first, down to the first value outside the normal
    /// binary64 range; below that nothing is materialized. Widths are kept
    /// apart from positions because deep pieces are thinner than the
    /// binary64 spacing at their depth.
    Step(Vec<(f64, f64, f64, f64)>),
    Power(f64),
}

impl Radial {
    fn new(p: &Profile) -> Result<Radial> {
        match p.to_s() {
            Profile::Power(pp) => Ok(Radial::Power(pp.r)),
            Profile::Step(sp) => {
                let mut out = Vec::with_capacity(sp.pieces().len());
                for (i, q) in sp.pieces().iter().enumerate() {
                    let (hi, lo, v) = (q.hi.mid(), sp.lower(i).mid(), q.val.mid());
                    let du = crate::profile::convert_span(Coordinate::S, &q.hi, &q.len).1.mid();
                    if !(v.is_finite() && v >= f64::MIN_POSITIVE) {
                        if i == 0 {
                            return Err(Error::Domain(format!("value {} does not fit binary64", q.val)));
                        }
                        // deeper pieces join the ignored tail
                        break;
                    }
                    if du > 0.0 {
                        out.push((lo, hi, du, v));
                    }
                }
                Ok(Radial::Step(out))
            }
        }
    }

    fn at_s(&self, s: f64) -> f64 {
        match self {
            Radial::Power(r) => (1.0 - s).powf(*r),
            Radial::Step(ps) => {
                // first piece whose lower end is below s
                let i = ps.partition_point(|&(lo, ..)| lo >= s);
                ps.get(i).map_or(f64::NAN, |q| q.3)
            }
        }
    }

    /// `f` at depth `u`; `(1 - u)^(2r)` directly for power weights.
    fn at_u(&self, u: f64) -> f64 {
        match self {
            Radial::Power(r) => (1.0 - u).powf(2.0 * r),
            _ => self.at_s(u * (2.0 - u)),
        }
    }

    /// Radial panels `(start, width)` covering `u` in `(0, top)`, each with
    /// the constant value it carries (if any).
    fn panels(&self, top: f64, split: bool) -> Vec<(f64, f64, Option<f64>)> {
        match (self, split) {
            (Radial::Step(ps), true) => {
                let s_top = top * (2.0 - top);
                let mut out = Vec::new();
                for &(lo, hi, du, v) in ps {
                    if lo >= s_top {
                        continue;
                    }
                    let a = u_of_s(lo);
                    let w = if hi > s_top { top - a } else { du };
                    if w > 0.0 {
                        out.push((a, w, Some(v)));
                    }
                }
                out
            }
            _ => vec![(0.0, top, None)],
        }
    }
}

/// Sum in a fixed pairwise order, so results do not depend on scheduling.
fn pairwise(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise(a) + pairwise(b)
}

/// `int phi(w) dA/pi` over the part of `Q_J` with `u < top`, angular part
/// `arc` in turns around `centre` in radians, and the node count used.
fn square_integral(rad: &Radial, arc: f64, centre: f64, top: f64, phi: &Transform, spec: &QuadratureSpec) -> (f64, usize) {
    let panels = rad.panels(top, spec.split);
    let per = (spec.radial / panels.len().max(1)).max(1);
    let dth = arc / spec.angular as f64;
    let mut radial = Vec::with_capacity(panels.len());
    let mut nodes = 0;
    for &(a, width, val) in &panels {
        let h = width / per as f64;
        let mut row = Vec::with_capacity(per);
        for i in 0..per {
            let u = a + h * (i as f64 + 0.5);
            let w = val.unwrap_or_else(|| rad.at_u(u));
            // angular sweep: w is radial, but the rule visits every node
            let ring: Vec<f64> = (0..spec.angular)
                .map(|j| {
                    let _theta = centre + std::f64::consts::TAU * (dth * (j as f64 + 0.5) - 0.5 * arc);
                    if w.is_nan() {
                        0.0
                    } else {
                        phi.eval_f64(w) * dth
                    }
                })
                .collect();
            // Jacobian r dr dtheta / pi with r = 1 - u and dtheta = 2 pi dturn
            row.push(2.0 * pairwise(&ring) * (1.0 - u) * h);
            nodes += spec.angular;
        }
        radial.push(pairwise(&row));
    }
    (pairwise(&radial), nodes)
}

/// `(1/|Q_I|) int_(Q_I) phi(w)` by the midpoint product rule, with the node
/// count. The tail below the profile's floor is ignored.
pub fn carleson_moment_2d(p: &Profile, sq: &CarlesonSquare, phi: &Transform, spec: &QuadratureSpec) -> Result<(f64, usize)> {
    spec.check()?;
    let rad = Radial::new(p)?;
    let (v, n) = square_integral(&rad, sq.arc, sq.centre, sq.arc, phi, spec);
    Ok((v / sq.area(), n))
}

/// `|Q_I|` by the same rule applied to the constant 1.
pub fn carleson_area_2d(sq: &CarlesonSquare, spec: &QuadratureSpec) -> Result<f64> {
    spec.check()?;
    let rad = Radial::Power(1.0);
    let one = QuadratureSpec { split: false, ..*spec };
    Ok(square_integral(&rad, sq.arc, sq.centre, sq.arc, &Transform::Power(0.0), &one).0)
}

/// Arc lengths `|J|` in `(u, 1]`: log-spaced, plus those whose square ends
/// on a breakpoint radius.
fn candidates(rad: &Radial, u: f64, count: usize, top: f64) -> Vec<f64> {
    let u = u.max(1e-300);
    let mut out: Vec<f64> = (1..=count).map(|i| u * (top / u).powf(i as f64 / count as f64)).collect();
    if let Radial::Step(ps) = rad {
        for &(_, hi, ..) in ps {
            let l = u_of_s(hi);
            if l > u && l <= top {
                out.push(l);
            }
        }
    }
    out.push(top);
    out
}

/// `Mw(z)` for `z` at depth `u = 1 - |z|`: the best average over candidate
/// squares containing `z`.
pub fn maximal_2d_at(p: &Profile, u: f64, theta: f64, count: usize, spec: &QuadratureSpec) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!("depth {u} outside (0, 1)")));
    }
    spec.check()?;
    let rad = Radial::new(p)?;
    let mut best = 0.0f64;
    for l in candidates(&rad, u, count, 1.0) {
        let sq = CarlesonSquare { arc: l, centre: theta };
        let (v, _) = square_integral(&rad, l, theta, l, &Transform::Identity, spec);
        best = best.max(v / sq.area());
    }
    Ok(best)
}

/// Overlap of two arcs on the circle of circumference 1.
fn arc_overlap(a: f64, la: f64, b: f64, lb: f64) -> f64 {
    let mut tot = 0.0;
    for shift in [-1.0, 0.0, 1.0] {
        let lo = a.max(b + shift);
        let hi = (a + la).min(b + shift + lb);
        tot += (hi - lo).max(0.0);
    }
    tot.min(la).min(lb)
}

/// `M(w 1_(Q_I))(z)` two ways for `z` at depth `u` and angle `theta` (in
/// radians) in `Q_I`: the supremum over every square containing `z`, and
/// over squares inside `Q_I` only. Radial weights make them equal.
pub fn restricted_maximal_2d(p: &Profile, sq: &CarlesonSquare, u: f64, theta: f64, count: usize, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    if !(u > 0.0 && u < sq.arc) {
        return Err(Error::Domain(format!("depth {u} outside the square")));
    }
    spec.check()?;
    let rad = Radial::new(p)?;
    // arcs are measured in turns, on the circle of circumference 1
    let turn = 2.0 * std::f64::consts::PI;
    let theta = theta / turn;
    let i_lo = sq.centre / turn - 0.5 * sq.arc;
    if (theta - i_lo).rem_euclid(1.0) > sq.arc {
        return Err(Error::Domain(format!("angle {theta} turns outside the arc")));
    }
    let mut full = 0.0f64;
    let mut inside = 0.0f64;
    let mut ls = candidates(&rad, u, count, 1.0);
    ls.push(sq.arc);
    for l in ls {
        let depth = l.min(sq.arc);
        let (rint, _) = square_integral(&rad, 1.0, 0.0, depth, &Transform::Identity, spec);
        let q_j = l * l * (2.0 - l);
        if l <= sq.arc {
            // some J inside I of this length contains theta
            inside = inside.max(l * rint / q_j);
        }
        let mut offsets: Vec<f64> = (0..=32).map(|k| k as f64 / 32.0).collect();
        offsets.push(((theta - i_lo) / l).clamp(0.0, 1.0));
        offsets.push((1.0 - (i_lo + sq.arc - theta) / l).clamp(0.0, 1.0));
        for o in offsets {
            let ov = arc_overlap(theta - o * l, l, i_lo, sq.arc);
            full = full.max(ov * rint / q_j);
        }
    }
    Ok((full, inside))
}

/// Essential bounds of `w` over `Q_I` from the panel nodes and ends.
pub fn ess_bounds_2d(p: &Profile, sq: &CarlesonSquare, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    spec.check()?;
    let rad = Radial::new(p)?;
    let mut inf = f64::INFINITY;
    let mut sup = 0.0f64;
    for (a, width, val) in rad.panels(sq.arc, spec.split) {
        let per = (spec.radial / 16).max(2);
        let h = width / per as f64;
        for i in 0..=per {
            let w = val.unwrap_or_else(|| rad.at_u(a + h * i as f64));
            if w.is_finite() {
                inf = inf.min(w);
                sup = sup.max(w);
            }
        }
    }
    Ok((inf, sup))
}

/// Normalized area of `{z in Q_I : lo < 1 - |z|^2 <= hi}`: the annulus
/// between radii squared `1 - hi` and `1 - lo`, cut to the sector of `I`.
pub fn annulus_area(arc: &Real, lo: &Real, hi: &Real) -> Real {
    let (r2_in, r2_out) = (Real::one() - hi.clone(), Real::one() - lo.clone());
    arc * &(r2_out - r2_in)
}

/// `w({z in Q_I : 1 - |z|^2 in E})` for `E` a union of intervals inside
/// the materialized part of `(0, x]`, summed over annuli.
pub fn level_set_mass_2d(p: &StepProfile, arc: &Real, e: &[(Real, Real)]) -> Result<Real> {
    let p = p.convert_coordinate(Coordinate::S);
    let mut tot = Real::zero();
    for (a, b) in e {
        if a.cmp_mid(p.floor()) == Ordering::Less {
            return Err(Error::BelowCoverage);
        }
        for (i, q) in p.pieces().iter().enumerate() {
            let lo = p.lower(i).max(a);
            let hi = q.hi.min(b);
            if lo.cmp_mid(&hi) == Ordering::Less {
                tot = tot + &q.val * &annulus_area(arc, &lo, &hi);
            }
        }
    }
    Ok(tot)
}

/// `w({z in Q_I : w(z) > lambda})` over the materialized annuli.
pub fn superlevel_mass_2d(p: &StepProfile, arc: &Real, lambda: &Real) -> Real {
    let p = p.convert_coordinate(Coordinate::S);
    let x = arc * &(Real::int(2) - arc.clone());
    let mut tot = Real::zero();
    for (i, q) in p.pieces().iter().enumerate() {
        let lo = p.lower(i);
        if lo.cmp_mid(&x) != Ordering::Less || q.val.cmp_mid(lambda) != Ordering::Greater {
            continue;
        }
        tot = tot + &q.val * &annulus_area(arc, &lo, &q.hi.min(&x));
    }
    tot
}

/// Lower endpoint of the median of `w` over `Q_I`, from exact annulus
/// areas: the smallest value whose superlevel set covers at most half the
/// square. Falls back to the tail's infimum when the materialized annuli
/// never reach half.
pub fn median_2d(p: &Profile, arc: &Real) -> Result<Real> {
    let x = arc * &(Real::int(2) - arc.clone());
    let sp = match p.to_s() {
        // level sets of a monotone power weight are single annuli
        Profile::Power(pp) => return Ok(pp.value(&(&x * &Real::ratio(1, 2)))),
        Profile::Step(sp) => sp,
    };
    let half = &(arc * &x) * &Real::ratio(1, 2);
    let mut rings: Vec<(Real, Real)> = Vec::new();
    for (i, q) in sp.pieces().iter().enumerate() {
        let lo = sp.lower(i);
        if lo.cmp_mid(&x) != Ordering::Less {
            continue;
        }
        rings.push((annulus_area(arc, &lo, &q.hi.min(&x)), q.val.clone()));
    }
    rings.sort_by(|a, b| b.1.cmp_mid(&a.1));
    let mut above = Real::zero();
    let mut i = 0;
    while i < rings.len() {
        let v = rings[i].1.clone();
        let mut with = above.clone();
        while i < rings.len() && rings[i].1.cmp_mid(&v) == Ordering::Equal {
            with = with + &rings[i].0;
            i += 1;
        }
        if with.cmp_mid(&half) == Ordering::Greater {
            return Ok(v);
        }
        above = with;
    }
    Ok(sp.tail.ess()?.0)
}

/// Median of `w` over `count` area-stratified random points of `Q_I`.
pub fn median_2d_sampled(p: &Profile, sq: &CarlesonSquare, count: usize, seed: u64) -> Result<f64> {
    if count == 0 {
        return Err(Error::Domain("no samples".into()));
    }
    let rad = Radial::new(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = sq.scale();
    // area is linear in s, so equal strata in s are equal in area
    let mut vals: Vec<f64> = (0..count)
        .map(|i| {
            let s = x * (i as f64 + rng.gen::<f64>()) / count as f64;
            let _theta = sq.centre + sq.arc * (rng.gen::<f64>() - 0.5);
            rad.at_s(s)
        })
        .filter(|v| !v.is_nan())
        .collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let n = vals.len();
    // smallest sampled value with at most half the samples strictly above
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && vals[j] == vals[i] {
            j += 1;
        }
        if 2 * j > n {
            return Ok(vals[i]);
        }
        i = j;
    }
    Ok(vals.last().copied().unwrap_or(f64::NAN))
}

/// One comparison of a 2D quantity with its 1D counterpart.
#[derive(Clone, Debug, Serialize)]
pub struct OracleCheck {
    pub name: String,
    pub part: char,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub nodes: usize,
    pub tol: f64,
    pub pass: bool,
}

impl OracleCheck {
    fn new(name: impl Into<String>, part: char, lhs: f64, rhs: f64, nodes: usize, tol: f64) -> OracleCheck {
        let abs_err = (lhs - rhs).abs();
        let rel_err = if rhs == 0.0 { abs_err } else { abs_err / rhs.abs() };
        let pass = rel_err <= tol || (lhs == rhs);
        OracleCheck { name: name.into(), part, lhs, rhs, abs_err, rel_err, nodes, tol, pass }
    }

    fn exact(name: impl Into<String>, part: char, lhs: &Real, rhs: &Real) -> OracleCheck {
        let diff = (lhs.clone() - rhs.clone()).mid().abs();
        // exact, or the same enclosure from the same closed form
        let same = lhs.cmp_mid(rhs) == Ordering::Equal
            && ((lhs.is_exact() && rhs.is_exact()) || (lhs.lo() == rhs.lo() && lhs.hi() == rhs.hi()));
        let mut c = OracleCheck::new(name, part, lhs.mid(), rhs.mid(), 0, 0.0);
        c.abs_err = diff;
        c.rel_err = if rhs.mid() == 0.0 { diff } else { diff / rhs.mid().abs() };
        c.pass = same;
        c
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub profile: String,
    pub arc: f64,
    pub seed: u64,
    pub checks: Vec<OracleCheck>,
    pub pass: bool,
}

/// Tolerances for the quadrature-based checks.
pub const MOMENT_TOL: f64 = 1e-6;
pub const MAXIMAL_TOL: f64 = 1e-4;
pub const EXACT_TOL: f64 = 1e-12;

/// Every dictionary check that applies to `p` on the square of arc `arc`.
pub fn run_oracle(p: &Profile, name: &str, arc: f64, seed: u64, spec: &QuadratureSpec) -> Result<OracleReport> {
    let p = p.to_s();
    let sq = CarlesonSquare::new(arc, 0.25)?;
    let arc_r = Real::from_f64(arc);
    let x = &arc_r * &(Real::int(2) - arc_r.clone());
    let mut checks = Vec::new();

    checks.push(OracleCheck::new("geometry", 'a', carleson_area_2d(&sq, spec)?, sq.area(), spec.radial * spec.angular, 1e-10));
    for phi in [Transform::Identity, Transform::Power(2.0), Transform::Log] {
        let rhs = match p.moment(&x, &phi) {
            Ok(m) => (m / x.clone()).mid(),
            Err(Error::DivergentMoment(_)) => continue,
            Err(e) => return Err(e),
        };
        let (lhs, nodes) = carleson_moment_2d(&p, &sq, &phi, spec)?;
        checks.push(OracleCheck::new(format!("moment {}", phi.name()), 'a', lhs, rhs, nodes, MOMENT_TOL));
        let turned = CarlesonSquare { centre: sq.centre + 0.5, ..sq };
        let (rot, _) = carleson_moment_2d(&p, &turned, &phi, spec)?;
        checks.push(OracleCheck::new(format!("rotation {}", phi.name()), 'a', rot, lhs, nodes, EXACT_TOL));
    }

    let (inf2, sup2) = ess_bounds_2d(&p, &sq, spec)?;
    let (inf1, sup1) = match &p {
        Profile::Step(sp) => sp.ess_bounds(sp.floor(), &x)?,
        Profile::Power(_) => p.ess_bounds(&Real::zero(), &x)?,
    };
    checks.push(OracleCheck::new("ess inf", 'e', inf2, inf1.mid(), 0, EXACT_TOL));
    checks.push(OracleCheck::new("ess sup", 'e', sup2, sup1.mid(), 0, EXACT_TOL));

    checks.push(OracleCheck::exact("median", 'h', &median_2d(&p, &arc_r)?, &p.median(&x)?));

    if let Profile::Step(sp) = &p {
        let t = x.mid() / 4.0;
        if Real::from_f64(t).cmp_mid(sp.floor()) == Ordering::Greater {
            let m2 = maximal_2d_at(&p, u_of_s(t), sq.centre, 1000, spec)?;
            let m1 = maximal::global_maximal_at(sp, &Real::from_f64(t))?.mid();
            checks.push(OracleCheck::new("maximal", 'b', m2, m1, 1000, MAXIMAL_TOL));
        }

        // radial equality of the two restricted maximal forms
        let light = QuadratureSpec { radial: 256, angular: 16, split: true };
        for i in 0..20 {
            let u = arc * (i as f64 + 0.5) / 20.0;
            let th = sq.centre + std::f64::consts::TAU * arc * ((i * 7 % 20) as f64 / 20.0 - 0.475);
            let (full, inside) = restricted_maximal_2d(&p, &sq, u, th, 32, &light)?;
            checks.push(OracleCheck::new(format!("radial equality {i}"), 'c', full, inside, 0, 1e-9));
        }

        // E: the upper half of (0, x] and a band near the bottom of it
        let e = vec![(&x * &Real::ratio(1, 2), x.clone()), (&x * &Real::ratio(1, 16), &x * &Real::ratio(1, 8))];
        if e[1].0.cmp_mid(sp.floor()) == Ordering::Greater {
            let lhs = level_set_mass_2d(sp, &arc_r, &e)?;
            let mut rhs = Real::zero();
            for (a, b) in &e {
                rhs = rhs + sp.moment(b, &Transform::Identity)? - sp.moment(a, &Transform::Identity)?;
            }
            let rhs = &arc_r * &rhs;
            checks.push(OracleCheck::new("level set", 'f', lhs.mid(), rhs.mid(), 0, EXACT_TOL));
        }

        let lambda = p.median(&x)?;
        let lhs = superlevel_mass_2d(sp, &arc_r, &lambda);
        let tail = sp.tail.moment(&Transform::MassAbove(lambda.clone())).unwrap_or_else(|_| Real::zero());
        let rhs = &arc_r * &(sp.mass_above(&x, &lambda)? - tail);
        checks.push(OracleCheck::new("superlevel set", 'g', lhs.mid(), rhs.mid(), 0, EXACT_TOL));
    }

    let pass = checks.iter().all(|c| c.pass);
    Ok(OracleReport { profile: name.to_string(), arc, seed, checks, pass })
}
