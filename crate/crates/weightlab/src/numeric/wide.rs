//! Wide-exponent binary floats with directed rounding.
//!
//! A `W` is `m * 2^e` with `1 <= |m| < 2` (or `m` zero / infinite) and an
//! `i128` exponent. Block families reach magnitudes like `2^(-2^104)`, which
//! neither `f64` nor practical rationals can hold.

use std::cmp::Ordering;
use std::fmt;

/// Exponents beyond this saturate to zero or infinity.
pub const E_MAX: i128 = 1 << 120;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dir {
    Down,
    Up,
}

#[derive(Clone, Copy, Debug)]
pub struct W {
    m: f64,
    e: i128,
}

fn split(x: f64) -> (f64, i128) {
    // x finite, nonzero
    let mut x = x;
    let mut adj = 0i128;
    if x.abs() < f64::MIN_POSITIVE {
        x *= 2f64.powi(64);
        adj = -64;
    }
    let bits = x.to_bits();
    let ex = ((bits >> 52) & 0x7ff) as i128 - 1023;
    let m = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1023u64 << 52));
    (m, ex + adj)
}

fn pow2f(e: i32) -> f64 {
    debug_assert!((-1022..=1023).contains(&e));
    f64::from_bits(((e + 1023) as u64) << 52)
}

fn nudge(x: f64, dir: Dir) -> f64 {
    match dir {
        Dir::Up => x.next_up(),
        Dir::Down => x.next_down(),
    }
}

impl W {
    pub const ZERO: W = W { m: 0.0, e: 0 };
    pub const ONE: W = W { m: 1.0, e: 0 };
    pub const INF: W = W { m: f64::INFINITY, e: 0 };
    pub const NEG_INF: W = W { m: f64::NEG_INFINITY, e: 0 };

    /// Smallest positive and largest finite magnitudes.
    pub fn tiny() -> W {
        W { m: 1.0, e: -E_MAX }
    }
    pub fn huge() -> W {
        W { m: 2f64.next_down(), e: E_MAX }
    }

    /// Normalize `m * 2^e` for any finite or infinite `m`; rounding only
    /// happens on exponent saturation.
    pub fn new(m: f64, e: i128, dir: Dir) -> W {
        if m == 0.0 {
            return W::ZERO;
        }
        if m.is_infinite() {
            return W { m, e: 0 };
        }
        assert!(!m.is_nan(), "NaN mantissa");
        let (mm, ee) = split(m);
        let e = e + ee;
        if e > E_MAX {
            let over = if mm > 0.0 { dir == Dir::Up } else { dir == Dir::Down };
            return if over {
                W { m: mm.signum() * f64::INFINITY, e: 0 }
            } else {
                let h = W::huge();
                W { m: mm.signum() * h.m, e: h.e }
            };
        }
        if e < -E_MAX {
            let away = if mm > 0.0 { dir == Dir::Up } else { dir == Dir::Down };
            return if away { W { m: mm.signum(), e: -E_MAX } } else { W::ZERO };
        }
        W { m: mm, e }
    }

    pub fn from_f64(x: f64) -> W {
        W::new(x, 0, Dir::Down)
    }

    /// Exact power of two.
    pub fn pow2(e: i128) -> W {
        W::new(1.0, e, Dir::Up)
    }

    pub fn mantissa(self) -> f64 {
        self.m
    }
    pub fn exponent(self) -> i128 {
        self.e
    }
    pub fn is_zero(self) -> bool {
        self.m == 0.0
    }
    pub fn is_finite(self) -> bool {
        self.m.is_finite()
    }
    pub fn is_infinite(self) -> bool {
        self.m.is_infinite()
    }
    pub fn signum(self) -> f64 {
        if self.m == 0.0 {
            0.0
        } else {
            self.m.signum()
        }
    }
    pub fn neg(self) -> W {
        W { m: -self.m, e: self.e }
    }
    pub fn abs(self) -> W {
        W { m: self.m.abs(), e: self.e }
    }

    /// Next representable value in direction `dir`.
    pub fn step(self, dir: Dir) -> W {
        if self.is_infinite() {
            return self;
        }
        if self.m == 0.0 {
            return match dir {
                Dir::Up => W::tiny(),
                Dir::Down => W::tiny().neg(),
            };
        }
        W::new(nudge(self.m, dir), self.e, dir)
    }

    pub fn add(self, o: W, dir: Dir) -> W {
        if self.m == 0.0 {
            return o;
        }
        if o.m == 0.0 {
            return self;
        }
        if self.is_infinite() || o.is_infinite() {
            if self.is_infinite() && o.is_infinite() && self.m != o.m {
                return if dir == Dir::Up { W::INF } else { W::NEG_INF };
            }
            return if self.is_infinite() { self } else { o };
        }
        let (a, b) = if (self.e, self.m.abs()) >= (o.e, o.m.abs()) { (self, o) } else { (o, self) };
        let d = a.e - b.e;
        if d > 60 {
            let toward = (b.m > 0.0 && dir == Dir::Up) || (b.m < 0.0 && dir == Dir::Down);
            return if toward { a.step(dir) } else { a };
        }
        let bm = b.m * pow2f(-(d as i32));
        let s = a.m + bm;
        let bb = s - a.m;
        let err = (a.m - (s - bb)) + (bm - bb);
        let s = if (err > 0.0 && dir == Dir::Up) || (err < 0.0 && dir == Dir::Down) { nudge(s, dir) } else { s };
        W::new(s, a.e, dir)
    }

    pub fn sub(self, o: W, dir: Dir) -> W {
        self.add(o.neg(), dir)
    }

    pub fn mul(self, o: W, dir: Dir) -> W {
        if self.m == 0.0 || o.m == 0.0 {
            return W::ZERO;
        }
        if self.is_infinite() || o.is_infinite() {
            return W { m: self.m.signum() * o.m.signum() * f64::INFINITY, e: 0 };
        }
        let p = self.m * o.m;
        let err = self.m.mul_add(o.m, -p);
        let p = if (err > 0.0 && dir == Dir::Up) || (err < 0.0 && dir == Dir::Down) { nudge(p, dir) } else { p };
        W::new(p, self.e + o.e, dir)
    }

    pub fn div(self, o: W, dir: Dir) -> W {
        if o.m == 0.0 {
            return if self.m == 0.0 {
                W::ZERO
            } else {
                W { m: self.m.signum() * f64::INFINITY, e: 0 }
            };
        }
        if self.m == 0.0 {
            return W::ZERO;
        }
        if self.is_infinite() {
            if o.is_infinite() {
                return if dir == Dir::Up { W::INF } else { W::ZERO };
            }
            return W { m: self.m.signum() * o.m.signum() * f64::INFINITY, e: 0 };
        }
        if o.is_infinite() {
            return W::ZERO;
        }
        let q = self.m / o.m;
        let r = (-q).mul_add(o.m, self.m);
        let sgn = r * o.m.signum();
        let q = if (sgn > 0.0 && dir == Dir::Up) || (sgn < 0.0 && dir == Dir::Down) { nudge(q, dir) } else { q };
        W::new(q, self.e - o.e, dir)
    }

    pub fn sqrt(self, dir: Dir) -> W {
        assert!(self.m >= 0.0, "sqrt of negative");
        if self.m == 0.0 || self.is_infinite() {
            return self;
        }
        let (m, e) = if self.e.rem_euclid(2) == 1 { (self.m * 2.0, self.e - 1) } else { (self.m, self.e) };
        let s = m.sqrt();
        let r = s.mul_add(s, -m);
        let s = if (r < 0.0 && dir == Dir::Up) || (r > 0.0 && dir == Dir::Down) { nudge(s, dir) } else { s };
        W::new(s, e / 2, dir)
    }

    /// Enclosure of the natural log as an `f64` pair.
    pub fn ln(self) -> (f64, f64) {
        assert!(self.m >= 0.0, "ln of negative");
        if self.m == 0.0 {
            return (f64::NEG_INFINITY, f64::NEG_INFINITY);
        }
        if self.is_infinite() {
            return (f64::INFINITY, f64::INFINITY);
        }
        if self.m == 1.0 && self.e == 0 {
            return (0.0, 0.0);
        }
        let ef = self.e as f64;
        let l = self.m.ln() + ef * std::f64::consts::LN_2;
        let tol = (ef.abs() * std::f64::consts::LN_2 + 1.0) * 4.0 * f64::EPSILON;
        ((l - tol).next_down(), (l + tol).next_up())
    }

    /// Directed enclosure endpoint of `exp(y)`.
    pub fn exp(y: f64, dir: Dir) -> W {
        if y == f64::NEG_INFINITY {
            return W::ZERO;
        }
        if y == f64::INFINITY {
            return W::INF;
        }
        if y == 0.0 {
            return W::ONE;
        }
        let t = y * std::f64::consts::LOG2_E;
        if t.abs() > E_MAX as f64 {
            return W::new(1.0, if t > 0.0 { E_MAX + 1 } else { -E_MAX - 1 }, dir);
        }
        let fl = t.floor();
        let m = (t - fl).exp2();
        let rel = (t.abs() * 4.0 + 8.0) * f64::EPSILON;
        let m = match dir {
            Dir::Up => (m * (1.0 + rel)).next_up(),
            Dir::Down => (m * (1.0 - rel)).next_down(),
        };
        W::new(m, fl as i128, dir)
    }

    /// Directed conversion to `f64`, saturating outside its range.
    pub fn to_f64(self, dir: Dir) -> f64 {
        if self.m == 0.0 || self.is_infinite() {
            return self.m;
        }
        if self.e > 1023 {
            let over = if self.m > 0.0 { dir == Dir::Up } else { dir == Dir::Down };
            return if over { self.m.signum() * f64::INFINITY } else { self.m.signum() * f64::MAX };
        }
        if self.e >= -1022 {
            return self.m * pow2f(self.e as i32);
        }
        if self.e < -1080 {
            let away = if self.m > 0.0 { dir == Dir::Up } else { dir == Dir::Down };
            return if away { self.m.signum() * f64::from_bits(1) } else { 0.0 * self.m.signum() };
        }
        // subnormal range: two-step scaling, widen only if inexact
        let k = (self.e + 1000) as i32;
        let scaled = self.m * pow2f(-1000);
        let x = scaled * pow2f(k);
        if x * pow2f(-k) == scaled {
            x
        } else {
            nudge(x, dir)
        }
    }

    /// Round-to-nearest-ish value for display and heuristics.
    pub fn approx(self) -> f64 {
        self.to_f64(Dir::Down)
    }

    /// Base-2 logarithm approximation, finite for finite nonzero values.
    pub fn log2_approx(self) -> f64 {
        self.m.abs().log2() + self.e as f64
    }

    pub fn max(self, o: W) -> W {
        if self.total_cmp(&o) == Ordering::Less {
            o
        } else {
            self
        }
    }
    pub fn min(self, o: W) -> W {
        if self.total_cmp(&o) == Ordering::Greater {
            o
        } else {
            self
        }
    }

    pub fn total_cmp(&self, o: &W) -> Ordering {
        let (sa, sb) = (self.signum(), o.signum());
        if sa != sb {
            return sa.partial_cmp(&sb).unwrap();
        }
        if sa == 0.0 {
            return Ordering::Equal;
        }
        let mag = if self.is_infinite() || o.is_infinite() {
            self.m.abs().partial_cmp(&o.m.abs()).unwrap()
        } else {
            (self.e, self.m.abs()).partial_cmp(&(o.e, o.m.abs())).unwrap()
        };
        if sa > 0.0 {
            mag
        } else {
            mag.reverse()
        }
    }
}

impl PartialEq for W {
    fn eq(&self, o: &W) -> bool {
        self.total_cmp(o) == Ordering::Equal
    }
}

impl PartialOrd for W {
    fn partial_cmp(&self, o: &W) -> Option<Ordering> {
        Some(self.total_cmp(o))
    }
}

impl fmt::Display for W {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.m == 0.0 {
            return write!(f, "0");
        }
        if self.is_infinite() {
            return write!(f, "{}", if self.m > 0.0 { "inf" } else { "-inf" });
        }
        if self.e.abs() < 1000 {
            return write!(f, "{:e}", self.to_f64(Dir::Down));
        }
        if self.e.abs() < (1i128 << 40) {
            let l10 = self.m.abs().log10() + self.e as f64 * std::f64::consts::LOG10_2;
            let ex = l10.floor();
            let mant = 10f64.powf(l10 - ex);
            let sign = if self.m < 0.0 { "-" } else { "" };
            return write!(f, "{sign}{mant:.6}e{ex}");
        }
        write!(f, "{}p{}", self.m, self.e)
    }
}
