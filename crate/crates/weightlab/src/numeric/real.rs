//! Exact rationals that degrade to outward-rounded intervals.

use super::wide::{Dir, W};
use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Rationals whose numerator plus denominator exceed this many bits are
/// demoted to intervals.
pub const EXACT_BITS: u64 = 4096;

/// A real number enclosure: either an exact rational or `[lo, hi]`.
#[derive(Clone, Debug)]
pub enum Real {
    Exact(BigRational),
    Iv(W, W),
}

fn rat_bits(r: &BigRational) -> u64 {
    r.numer().bits() + r.denom().bits()
}

/// Directed conversion of a rational to a wide float.
pub fn rat_to_w(r: &BigRational, dir: Dir) -> W {
    if r.is_zero() {
        return W::ZERO;
    }
    let neg = r.is_negative();
    let n = r.numer().abs();
    let d = r.denom().clone();
    let shift = n.bits() as i128 - d.bits() as i128 - 64;
    let (q, rem) = if shift >= 0 {
        n.div_rem(&(d << (shift as usize)))
    } else {
        (n << ((-shift) as usize)).div_rem(&d)
    };
    let qu = q.to_u128().expect("quotient fits");
    let qf = qu as f64;
    let exact = rem.is_zero() && (qf as u128) == qu;
    // magnitude direction: for negatives the requested direction flips
    let mag_dir = match (neg, dir) {
        (false, d) => d,
        (true, Dir::Up) => Dir::Down,
        (true, Dir::Down) => Dir::Up,
    };
    let qf = if exact {
        qf
    } else {
        match mag_dir {
            Dir::Up => qf.next_up(),
            Dir::Down => qf.next_down(),
        }
    };
    let w = W::new(qf, shift, mag_dir);
    if neg {
        w.neg()
    } else {
        w
    }
}

fn w_to_rat(w: W) -> Option<BigRational> {
    if !w.is_finite() {
        return None;
    }
    if w.is_zero() {
        return Some(BigRational::zero());
    }
    let e = w.exponent();
    if e.abs() > EXACT_BITS as i128 {
        return None;
    }
    // mantissa has 53 significant bits
    let mi = (w.mantissa() * 2f64.powi(52)) as i64;
    let num = BigInt::from(mi);
    let sh = e - 52;
    Some(if sh >= 0 {
        BigRational::from_integer(num << (sh as usize))
    } else {
        BigRational::new(num, BigInt::one() << ((-sh) as usize))
    })
}

impl Real {
    pub fn zero() -> Real {
        Real::Exact(BigRational::zero())
    }
    pub fn one() -> Real {
        Real::Exact(BigRational::one())
    }
    pub fn int(n: i64) -> Real {
        Real::Exact(BigRational::from_integer(BigInt::from(n)))
    }
    pub fn ratio(n: i64, d: i64) -> Real {
        Real::Exact(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }
    pub fn inf() -> Real {
        Real::Iv(W::INF, W::INF)
    }
    /// Unknown nonnegative quantity.
    pub fn nonneg_unbounded() -> Real {
        Real::Iv(W::ZERO, W::INF)
    }

    /// `2^k`, exact when small enough.
    pub fn pow2(k: i128) -> Real {
        if k.unsigned_abs() <= EXACT_BITS as u128 / 2 {
            let one = BigInt::one();
            Real::Exact(if k >= 0 {
                BigRational::from_integer(one << (k as usize))
            } else {
                BigRational::new(one.clone(), one << ((-k) as usize))
            })
        } else {
            let w = W::pow2(k);
            Real::Iv(w, w)
        }
    }

    /// Exact value of a binary64 number.
    pub fn from_f64(x: f64) -> Real {
        assert!(x.is_finite(), "non-finite f64");
        match w_to_rat(W::from_f64(x)) {
            Some(r) => Real::Exact(r),
            None => Real::point(W::from_f64(x)),
        }
    }

    pub fn point(w: W) -> Real {
        Real::Iv(w, w)
    }

    pub fn interval(lo: W, hi: W) -> Real {
        assert!(lo <= hi, "inverted interval {lo} > {hi}");
        Real::Iv(lo, hi)
    }

    pub fn from_f64_bounds(lo: f64, hi: f64) -> Real {
        Real::interval(W::from_f64(lo), W::from_f64(hi))
    }

    /// Parse a decimal (`"0.125"`, `"-3e-4"`) or fraction (`"1/3"`) exactly.
    pub fn parse(s: &str) -> Option<Real> {
        let s = s.trim();
        if let Some((a, b)) = s.split_once('/') {
            let n: BigInt = a.trim().parse().ok()?;
            let d: BigInt = b.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            return Some(Real::Exact(BigRational::new(n, d)));
        }
        let (mant, exp) = match s.find(['e', 'E']) {
            Some(i) => (&s[..i], s[i + 1..].parse::<i64>().ok()?),
            None => (s, 0),
        };
        let (neg, mant) = match mant.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mant.strip_prefix('+').unwrap_or(mant)),
        };
        let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
        if ip.is_empty() && fp.is_empty() {
            return None;
        }
        if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
            return None;
        }
        if exp.unsigned_abs() > 2000 {
            return None;
        }
        let digits: BigInt = format!("{ip}{fp}").parse().unwrap_or_else(|_| BigInt::zero());
        let scale = exp - fp.len() as i64;
        let ten = BigInt::from(10);
        let mut r = if scale >= 0 {
            BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
        } else {
            BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
        };
        if neg {
            r = -r;
        }
        Some(Real::Exact(r))
    }

    fn norm(r: BigRational) -> Real {
        if rat_bits(&r) > EXACT_BITS {
            Real::Iv(rat_to_w(&r, Dir::Down), rat_to_w(&r, Dir::Up))
        } else {
            Real::Exact(r)
        }
    }

    pub fn lo(&self) -> W {
        match self {
            Real::Exact(r) => rat_to_w(r, Dir::Down),
            Real::Iv(l, _) => *l,
        }
    }
    pub fn hi(&self) -> W {
        match self {
            Real::Exact(r) => rat_to_w(r, Dir::Up),
            Real::Iv(_, h) => *h,
        }
    }
    fn bounds(&self) -> (W, W) {
        match self {
            Real::Exact(r) => (rat_to_w(r, Dir::Down), rat_to_w(r, Dir::Up)),
            Real::Iv(l, h) => (*l, *h),
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Real::Exact(r) => Some(r),
            _ => None,
        }
    }

    /// True when the enclosure is a single point.
    pub fn is_exact(&self) -> bool {
        match self {
            Real::Exact(_) => true,
            Real::Iv(l, h) => l == h,
        }
    }

    pub fn width(&self) -> W {
        match self {
            Real::Exact(_) => W::ZERO,
            Real::Iv(l, h) => h.sub(*l, Dir::Up),
        }
    }

    /// Midpoint estimate as `f64` (saturating).
    pub fn mid(&self) -> f64 {
        match self {
            Real::Exact(r) => r.to_f64().unwrap_or_else(|| rat_to_w(r, Dir::Down).approx()),
            Real::Iv(l, h) => {
                if l == h {
                    return l.approx();
                }
                let a = l.approx();
                let b = h.approx();
                if a.is_infinite() || b.is_infinite() {
                    if a == b {
                        return a;
                    }
                    return if a.is_infinite() { b } else { a };
                }
                0.5 * a + 0.5 * b
            }
        }
    }

    /// Midpoint as a wide float.
    pub fn mid_w(&self) -> W {
        let (l, h) = self.bounds();
        if l == h || l.is_infinite() || h.is_infinite() {
            return if l.is_infinite() && !h.is_infinite() { h } else { l };
        }
        l.add(h, Dir::Down).mul(W::from_f64(0.5), Dir::Down)
    }

    pub fn is_finite(&self) -> bool {
        let (l, h) = self.bounds();
        l.is_finite() && h.is_finite()
    }

    pub fn is_inf(&self) -> bool {
        self.lo().is_infinite() && self.lo() > W::ZERO
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Real::Exact(r) => r.is_zero(),
            Real::Iv(l, h) => l.is_zero() && h.is_zero(),
        }
    }

    pub fn certainly_pos(&self) -> bool {
        self.lo() > W::ZERO
    }

    /// Ordering that is exact when decidable and falls back to midpoints
    /// for overlapping enclosures.
    pub fn cmp_mid(&self, o: &Real) -> Ordering {
        if let (Real::Exact(a), Real::Exact(b)) = (self, o) {
            return a.cmp(b);
        }
        let (al, ah) = self.bounds();
        let (bl, bh) = o.bounds();
        if ah < bl {
            return Ordering::Less;
        }
        if al > bh {
            return Ordering::Greater;
        }
        if al == ah && bl == bh && al == bl {
            return Ordering::Equal;
        }
        self.mid_w().total_cmp(&o.mid_w())
    }

    /// `Some` only when the order is certain.
    pub fn cmp_certain(&self, o: &Real) -> Option<Ordering> {
        if let (Real::Exact(a), Real::Exact(b)) = (self, o) {
            return Some(a.cmp(b));
        }
        let (al, ah) = self.bounds();
        let (bl, bh) = o.bounds();
        if ah < bl {
            Some(Ordering::Less)
        } else if al > bh {
            Some(Ordering::Greater)
        } else if al == ah && bl == bh && al == bl {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn max(&self, o: &Real) -> Real {
        if let (Real::Exact(a), Real::Exact(b)) = (self, o) {
            return Real::Exact(a.max(b).clone());
        }
        let (al, ah) = self.bounds();
        let (bl, bh) = o.bounds();
        Real::Iv(al.max(bl), ah.max(bh))
    }

    pub fn min(&self, o: &Real) -> Real {
        if let (Real::Exact(a), Real::Exact(b)) = (self, o) {
            return Real::Exact(a.min(b).clone());
        }
        let (al, ah) = self.bounds();
        let (bl, bh) = o.bounds();
        Real::Iv(al.min(bl), ah.min(bh))
    }

    /// Hull of two enclosures.
    pub fn hull(&self, o: &Real) -> Real {
        let (al, ah) = self.bounds();
        let (bl, bh) = o.bounds();
        if al == bl && ah == bh && self.is_exact() {
            return self.clone();
        }
        Real::Iv(al.min(bl), ah.max(bh))
    }

    /// Clamp below at zero (for quantities known to be nonnegative).
    pub fn clamp_nonneg(&self) -> Real {
        match self {
            Real::Exact(r) if r.is_negative() => Real::zero(),
            Real::Exact(_) => self.clone(),
            Real::Iv(l, h) => Real::Iv(l.max(W::ZERO), h.max(W::ZERO)),
        }
    }

    pub fn recip(&self) -> Real {
        Real::one() / self.clone()
    }

    pub fn powi(&self, n: i32) -> Real {
        if let Real::Exact(r) = self {
            if !(r.is_zero() && n < 0) {
                let bits = rat_bits(r) * n.unsigned_abs() as u64;
                if bits <= 2 * EXACT_BITS {
                    return Real::norm(num_traits::pow::Pow::pow(r, n));
                }
            }
        }
        if n == 0 {
            return Real::one();
        }
        if n < 0 {
            return self.powi(-n).recip();
        }
        // binary powering in interval arithmetic
        let mut base = self.clone();
        let mut acc = Real::one();
        let mut k = n as u32;
        let even = n % 2 == 0;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base.clone();
            }
            k >>= 1;
            if k > 0 {
                base = base.clone() * base;
            }
        }
        if even {
            acc.clamp_nonneg()
        } else {
            acc
        }
    }

    /// `x^s` for `x >= 0`; exact for small integer `s` on exact input.
    pub fn powf(&self, s: f64) -> Real {
        if s == 0.0 {
            return Real::one();
        }
        if s == 1.0 {
            return self.clone();
        }
        if s.fract() == 0.0 && s.abs() <= 64.0 {
            return self.powi(s as i32);
        }
        let (l, h) = self.bounds();
        assert!(l >= W::ZERO, "powf of negative enclosure");
        if l.is_zero() && s < 0.0 {
            let hi = W::INF;
            let lo = if h.is_zero() { W::INF } else { pow_w(h, s, Dir::Down) };
            return Real::Iv(lo, hi);
        }
        let (a, b) = (pow_w(l, s, Dir::Down), pow_w(h, s, Dir::Up));
        let (c, d) = (pow_w(l, s, Dir::Up), pow_w(h, s, Dir::Down));
        if s > 0.0 {
            Real::Iv(a, b)
        } else {
            Real::Iv(d, c)
        }
    }

    pub fn sqrt(&self) -> Real {
        if let Real::Exact(r) = self {
            let (n, d) = (r.numer(), r.denom());
            let (sn, sd) = (n.sqrt(), d.sqrt());
            if &(&sn * &sn) == n && &(&sd * &sd) == d {
                return Real::Exact(BigRational::new(sn, sd));
            }
        }
        let (l, h) = self.bounds();
        Real::Iv(l.max(W::ZERO).sqrt(Dir::Down), h.sqrt(Dir::Up))
    }

    /// Natural log; exact only at 1.
    pub fn ln(&self) -> Real {
        if let Real::Exact(r) = self {
            if r.is_one() {
                return Real::zero();
            }
        }
        let (l, h) = self.bounds();
        let (a, _) = l.ln();
        let (_, b) = h.ln();
        Real::Iv(W::from_f64(a), W::from_f64(b))
    }

    pub fn exp(&self) -> Real {
        if self.is_zero() {
            return Real::one();
        }
        let (l, h) = self.bounds();
        Real::Iv(W::exp(l.to_f64(Dir::Down), Dir::Down), W::exp(h.to_f64(Dir::Up), Dir::Up))
    }

    /// Sum of an iterator of reals.
    pub fn sum<I: IntoIterator<Item = Real>>(it: I) -> Real {
        it.into_iter().fold(Real::zero(), |a, b| a + b)
    }

    /// Decimal or binary-exponent rendering used in reports.
    pub fn render(&self) -> (String, String) {
        match self {
            Real::Exact(r) => {
                let s = match r.to_f64() {
                    Some(f) if f != 0.0 || r.is_zero() => {
                        if rat_bits(r) <= 96 && r.denom().is_one() {
                            r.numer().to_string()
                        } else {
                            format!("{}", W::from_f64(f))
                        }
                    }
                    _ => format!("{}", rat_to_w(r, Dir::Down)),
                };
                (s.clone(), s)
            }
            Real::Iv(l, h) => (format!("{l}"), format!("{h}")),
        }
    }
}

fn pow_w(x: W, s: f64, dir: Dir) -> W {
    if x.is_zero() {
        return if s > 0.0 { W::ZERO } else { W::INF };
    }
    if x.is_infinite() {
        return if s > 0.0 { W::INF } else { W::ZERO };
    }
    let (a, b) = x.ln();
    let y = match (s > 0.0, dir) {
        (true, Dir::Up) => b * s,
        (true, Dir::Down) => a * s,
        (false, Dir::Up) => a * s,
        (false, Dir::Down) => b * s,
    };
    let y = match dir {
        Dir::Up => y + y.abs() * f64::EPSILON,
        Dir::Down => y - y.abs() * f64::EPSILON,
    };
    W::exp(y, dir)
}

fn iv_add(a: (W, W), b: (W, W)) -> Real {
    Real::Iv(a.0.add(b.0, Dir::Down), a.1.add(b.1, Dir::Up))
}

fn iv_mul(a: (W, W), b: (W, W)) -> Real {
    let c = [
        (a.0, b.0),
        (a.0, b.1),
        (a.1, b.0),
        (a.1, b.1),
    ];
    let lo = c.iter().map(|&(x, y)| x.mul(y, Dir::Down)).fold(W::INF, W::min);
    let hi = c.iter().map(|&(x, y)| x.mul(y, Dir::Up)).fold(W::NEG_INF, W::max);
    Real::Iv(lo, hi)
}

fn iv_div(a: (W, W), b: (W, W)) -> Real {
    if b.0 <= W::ZERO && b.1 >= W::ZERO {
        if a.0.is_zero() && a.1.is_zero() {
            return Real::zero();
        }
        if b.0.is_zero() && b.1 > W::ZERO && a.0 >= W::ZERO {
            let lo = a.0.div(b.1, Dir::Down);
            return Real::Iv(lo, W::INF);
        }
        return Real::Iv(W::NEG_INF, W::INF);
    }
    let c = [
        (a.0, b.0),
        (a.0, b.1),
        (a.1, b.0),
        (a.1, b.1),
    ];
    let lo = c.iter().map(|&(x, y)| x.div(y, Dir::Down)).fold(W::INF, W::min);
    let hi = c.iter().map(|&(x, y)| x.div(y, Dir::Up)).fold(W::NEG_INF, W::max);
    Real::Iv(lo, hi)
}

impl Add for Real {
    type Output = Real;
    fn add(self, o: Real) -> Real {
        match (&self, &o) {
            (Real::Exact(a), Real::Exact(b)) => Real::norm(a + b),
            _ => iv_add(self.bounds(), o.bounds()),
        }
    }
}

impl Sub for Real {
    type Output = Real;
    fn sub(self, o: Real) -> Real {
        self + (-o)
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        match self {
            Real::Exact(a) => Real::Exact(-a),
            Real::Iv(l, h) => Real::Iv(h.neg(), l.neg()),
        }
    }
}

impl Mul for Real {
    type Output = Real;
    fn mul(self, o: Real) -> Real {
        match (&self, &o) {
            (Real::Exact(a), Real::Exact(b)) => Real::norm(a * b),
            (Real::Exact(a), _) | (_, Real::Exact(a)) if a.is_zero() => Real::zero(),
            _ => iv_mul(self.bounds(), o.bounds()),
        }
    }
}

impl Div for Real {
    type Output = Real;
    fn div(self, o: Real) -> Real {
        match (&self, &o) {
            (Real::Exact(a), Real::Exact(b)) if !b.is_zero() => Real::norm(a / b),
            (Real::Exact(a), _) if a.is_zero() => Real::zero(),
            _ => iv_div(self.bounds(), o.bounds()),
        }
    }
}

macro_rules! ref_ops {
    ($tr:ident, $f:ident) => {
        impl<'a> $tr<&'a Real> for &'a Real {
            type Output = Real;
            fn $f(self, o: &'a Real) -> Real {
                self.clone().$f(o.clone())
            }
        }
        impl<'a> $tr<&'a Real> for Real {
            type Output = Real;
            fn $f(self, o: &'a Real) -> Real {
                self.$f(o.clone())
            }
        }
    };
}
ref_ops!(Add, add);
ref_ops!(Sub, sub);
ref_ops!(Mul, mul);
ref_ops!(Div, div);

impl From<i64> for Real {
    fn from(n: i64) -> Real {
        Real::int(n)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Real::Exact(r) if rat_bits(r) <= 64 => write!(f, "{r}"),
            _ => {
                let (l, h) = self.render();
                if l == h {
                    write!(f, "{l}")
                } else {
                    write!(f, "[{l}, {h}]")
                }
            }
        }
    }
}

impl PartialEq for Real {
    /// Structural equality of enclosures.
    fn eq(&self, o: &Real) -> bool {
        match (self, o) {
            (Real::Exact(a), Real::Exact(b)) => a == b,
            _ => self.lo() == o.lo() && self.hi() == o.hi(),
        }
    }
}

/// Sign helper for BigInt-free call sites.
pub fn sign_of(r: &Real) -> Sign {
    match r.cmp_mid(&Real::zero()) {
        Ordering::Less => Sign::Minus,
        Ordering::Equal => Sign::NoSign,
        Ordering::Greater => Sign::Plus,
    }
}
