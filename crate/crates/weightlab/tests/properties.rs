use proptest::prelude::*;
use std::sync::Arc;
use weightlab::conditions::{p6_functional, p6e_functional, Concentration};
use weightlab::families::{FamilyId, NamedFamily};
use weightlab::profile::{ConstTail, Coordinate, Profile, StepProfile, Tail, TailMode, Transform};
use weightlab::numeric::{Dir, W};
use weightlab::Real;

/// A step profile on `(0, 1]` from piece lengths (in 64ths of what is left)
/// and integer values, with a constant tail at `tail_val`.
fn build(coord: Coordinate, cuts: &[u8], vals: &[u16], tail_val: u16) -> StepProfile {
    let mut bps = vec![Real::one()];
    for c in cuts {
        let last = bps.last().unwrap().clone();
        bps.push(&last * &Real::ratio(*c as i64, 64));
    }
    let floor = bps.last().unwrap().clone();
    let vals = vals.iter().map(|v| Real::int(*v as i64)).collect();
    let tail = Tail::with_model(TailMode::ClosedForm, Arc::new(ConstTail { coord, floor, val: Real::int(tail_val as i64) }));
    StepProfile::new(coord, bps, vals, tail).unwrap()
}

/// A scale in `(floor, 1]`, where the pieces decide the answer.
fn above_floor(p: &StepProfile, frac: f64) -> Real {
    let f = p.floor().mid();
    Real::from_f64(f + frac * (1.0 - f))
}

fn pieces_strategy() -> impl Strategy<Value = (Vec<u8>, Vec<u16>)> {
    (2usize..10).prop_flat_map(|n| (prop::collection::vec(8u8..60, n), prop::collection::vec(1u16..200, n)))
}

/// Length and mass of every subset of `items`, indexed by bit mask. Block
/// families reach magnitudes like `2^(2^28 k)`, so this runs in wide floats.
fn subsets(items: &[(W, W)]) -> Vec<(W, W)> {
    let mut out = vec![(W::from_f64(0.0), W::from_f64(0.0)); 1 << items.len()];
    for mask in 1usize..out.len() {
        let i = mask.trailing_zeros() as usize;
        let (l, m) = out[mask & (mask - 1)];
        let (li, vi) = items[i];
        out[mask] = (l.add(li, Dir::Down), m.add(li.mul(vi, Dir::Down), Dir::Down));
    }
    out
}

/// Largest mass on a set of measure `budget`: a subset plus a fraction of
/// one more item, which is where an optimum of the fractional problem
/// always lies.
fn exhaustive(items: &[(W, W)], subs: &[(W, W)], budget: W) -> W {
    let slack = budget.mul(W::from_f64(1.0 + 1e-15), Dir::Down);
    let mut best = W::from_f64(0.0);
    for (mask, &(len, mass)) in subs.iter().enumerate() {
        if len > slack {
            continue;
        }
        best = best.max(mass);
        let rest = budget.sub(len, Dir::Down).max(W::from_f64(0.0));
        for (i, &(l, v)) in items.iter().enumerate() {
            if mask >> i & 1 == 0 && l >= rest {
                best = best.max(mass.add(rest.mul(v, Dir::Down), Dir::Down));
            }
        }
    }
    best
}

fn rel_err(a: W, b: W) -> f64 {
    a.sub(b, Dir::Down).abs().div(b.abs(), Dir::Up).approx()
}

#[test]
fn greedy_concentration_matches_exhaustive_search() {
    for id in FamilyId::all() {
        let Profile::Step(sp) = NamedFamily::new(id).instantiate().unwrap().to_s() else { continue };
        if !sp.integrable {
            continue;
        }
        let t = sp.truncate(12);
        // the tail sits at the lowest value, so it is a thirteenth item
        let vmin = t.values().into_iter().fold(Real::inf(), |a, b| a.min(&b));
        let tail = Tail::with_model(TailMode::ClosedForm, Arc::new(ConstTail { coord: Coordinate::S, floor: t.floor().clone(), val: vmin.clone() }));
        let t = t.with_tail(tail);
        let lens: Vec<Real> = t.pieces().iter().map(|q| q.len.clone()).collect();
        let mut items: Vec<(W, W)> = t.pieces().iter().map(|q| (q.len.lo(), q.val.lo())).collect();
        items.push((t.floor().lo(), vmin.lo()));
        let subs = subsets(&items);
        let total = subs.last().unwrap().1;
        let c = Concentration::new(&Profile::Step(t.clone()), &Real::one()).unwrap();
        let m = lens.len();
        // every single piece, then a spread of larger subsets
        let masks = (0..m).map(|i| 1usize << i).chain((1..1usize << m).step_by(61));
        for mask in masks {
            let budget = (0..m).filter(|i| mask >> i & 1 == 1).fold(Real::zero(), |acc, i| acc + lens[i].clone());
            let k = c.k(&budget).unwrap();
            let want = exhaustive(&items, &subs, budget.lo()).div(total, Dir::Down);
            assert!(rel_err(k.lo(), want) <= 1e-12, "{id} mask {mask:b}: {k} vs {want}");
        }
    }
}

#[test]
fn constant_concentration_is_the_identity() {
    let p = NamedFamily::new(FamilyId::Constant).instantiate().unwrap();
    for x in [Real::one(), Real::ratio(1, 7), Real::pow2(-40)] {
        let c = Concentration::new(&p, &x).unwrap();
        for a in 0..=20 {
            let a = Real::ratio(a, 20);
            let k = c.k(&a).unwrap();
            assert!(k.width().is_zero() && k.cmp_mid(&a) == std::cmp::Ordering::Equal, "{k} vs {a}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn log_variants_sandwich((cuts, vals) in pieces_strategy(), frac in 0.01f64..1.0) {
        let sp = build(Coordinate::S, &cuts, &vals, 1);
        let x = above_floor(&sp, frac);
        let p = Profile::Step(sp);
        let a = p6_functional(&p, &x).unwrap();
        let b = p6e_functional(&p, &x).unwrap();
        prop_assert!(a.lo().approx() <= b.hi().approx() + 1e-9);
        prop_assert!(b.lo().approx() <= 1.0 + std::f64::consts::LN_2 + a.hi().approx() + 1e-9);
    }

    #[test]
    fn coordinate_round_trip((cuts, vals) in pieces_strategy()) {
        let p = build(Coordinate::U, &cuts, &vals, 1);
        let back = p.convert_coordinate(Coordinate::S).convert_coordinate(Coordinate::U);
        prop_assert_eq!(back.pieces().len(), p.pieces().len());
        for (a, b) in back.breakpoints().iter().zip(p.breakpoints()) {
            prop_assert!((a.mid() - b.mid()).abs() <= 1e-14 * b.mid());
        }
        prop_assert!(back.values().iter().zip(p.values()).all(|(a, b)| *a == b));
        // mass is preserved in s: the u-pieces have s-lengths u(2 - u) differences
        let s = p.convert_coordinate(Coordinate::S);
        let m = s.moment(&Real::one(), &Transform::Identity).unwrap().mid();
        let oracle: f64 = p.pieces().iter().map(|q| {
            let (hi, lo) = (q.hi.mid(), (&q.hi - &q.len).mid());
            (hi * (2.0 - hi) - lo * (2.0 - lo)) * q.val.mid()
        }).sum::<f64>() + { let f = p.floor().mid(); f * (2.0 - f) };
        prop_assert!((m - oracle).abs() <= 1e-12 * oracle);
    }

    #[test]
    fn moments_add_over_pieces((cuts, vals) in pieces_strategy(), tail in 1u16..50, frac in 0.001f64..1.0) {
        let p = build(Coordinate::S, &cuts, &vals, tail);
        let x = above_floor(&p, frac);
        let xs = x.mid();
        // direct sum over the parts of (0, x]
        let mut oracle = p.floor().mid().min(xs) * tail as f64;
        for q in p.pieces() {
            let (hi, lo) = (q.hi.mid().min(xs), (&q.hi - &q.len).mid());
            if hi > lo {
                oracle += (hi - lo) * q.val.mid();
            }
        }
        let m = p.moment(&x, &Transform::Identity).unwrap();
        prop_assert!((m.mid() - oracle).abs() <= 1e-12 * oracle);
        // Cauchy-Schwarz and monotonicity in x
        let m2 = p.moment(&x, &Transform::Power(2.0)).unwrap().mid();
        prop_assert!(m.mid() * m.mid() <= m2 * xs * (1.0 + 1e-12));
        let lower = above_floor(&p, frac / 2.0);
        prop_assert!(p.moment(&lower, &Transform::Identity).unwrap().mid() <= m.mid());
    }

    #[test]
    fn concentration_is_concave_and_above_the_diagonal((cuts, vals) in pieces_strategy(), frac in 0.01f64..1.0) {
        let sp = build(Coordinate::S, &cuts, &vals, 1);
        let x = above_floor(&sp, frac);
        let c = Concentration::new(&Profile::Step(sp), &x).unwrap();
        let ks: Vec<f64> = (0..=32).map(|i| c.k(&Real::ratio(i, 32)).unwrap().mid()).collect();
        prop_assert!((ks[32] - 1.0).abs() < 1e-12 && ks[0].abs() < 1e-15);
        for i in 0..=32 {
            prop_assert!(ks[i] >= i as f64 / 32.0 - 1e-12);
        }
        for w in ks.windows(3) {
            prop_assert!(w[1] >= w[0] - 1e-12 && w[1] >= 0.5 * (w[0] + w[2]) - 1e-12);
        }
    }
}
