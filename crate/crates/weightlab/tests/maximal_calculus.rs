use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::cmp::Ordering;
use weightlab::families::{BRule, FamilyId, NamedFamily};
use weightlab::maximal::{envelope, global_maximal_at, maximal_integral, restricted_maximal_at};
use weightlab::profile::{Coordinate, Profile, StepProfile, Transform};
use weightlab::Real;

fn step_s(nf: NamedFamily) -> StepProfile {
    match nf.instantiate().unwrap().to_s() {
        Profile::Step(s) => s,
        Profile::Power(_) => unreachable!(),
    }
}

fn doubling() -> StepProfile {
    step_s(NamedFamily::new(FamilyId::Ex6_1).with_rule(BRule::Geometric { b0: 1.0, ratio: 2.0 }))
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(1e-300)
}

#[test]
fn constant_envelope_and_maximal_are_one() {
    let p = step_s(NamedFamily::new(FamilyId::Constant));
    let env = envelope(&p, &Real::one()).unwrap();
    for y in [1.0, 0.5, 1e-3] {
        assert!(close(env.eval(&Real::from_f64(y)).unwrap().mid(), 1.0, 1e-15));
        assert!(close(global_maximal_at(&p, &Real::from_f64(y)).unwrap().mid(), 1.0, 1e-15));
    }
    let x = Real::ratio(1, 3);
    let mi = maximal_integral(&p, &x).unwrap();
    assert!(mi.is_exact() && mi.cmp_mid(&x) == Ordering::Equal);
}

#[test]
fn envelope_matches_running_average_at_random_scales() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for id in [FamilyId::Ex6_9, FamilyId::Ex6_2, FamilyId::Ex6_5] {
        let p = step_s(NamedFamily::new(id));
        let env = envelope(&p, &Real::one()).unwrap();
        for _ in 0..100 {
            let y = Real::from_f64(2f64.powf(-rng.gen_range(0.0..30.0)));
            let direct = (p.moment(&y, &Transform::Identity).unwrap() / y.clone()).mid();
            assert!(close(env.eval(&y).unwrap().mid(), direct, 1e-12), "{id} y = {y}");
        }
    }
}

#[test]
fn increasing_profile_has_increasing_envelope() {
    let p = step_s(NamedFamily::new(FamilyId::Ex6_9));
    let env = envelope(&p, &Real::one()).unwrap();
    let ys: Vec<f64> = (0..60).map(|i| 2f64.powf(-(i as f64) / 2.0)).collect();
    for w in ys.windows(2) {
        let (hi, lo) = (env.eval(&Real::from_f64(w[0])).unwrap(), env.eval(&Real::from_f64(w[1])).unwrap());
        assert!(hi.cmp_mid(&lo) != Ordering::Less);
    }
    // so the supremum over [t, x] sits at y = x
    for n in [0, 3, 10] {
        let x = Real::pow2(-n);
        let avg = p.moment(&x, &Transform::Identity).unwrap() / x.clone();
        for t in [&x * &Real::ratio(1, 2), &x * &Real::ratio(1, 1000)] {
            let m = restricted_maximal_at(&p, &x, &t).unwrap();
            assert!(close(m.mid(), avg.mid(), 1e-14), "n = {n}");
        }
    }
}

#[test]
fn single_admissible_scale_gives_the_average() {
    let p = doubling();
    let m = restricted_maximal_at(&p, &Real::one(), &Real::one()).unwrap();
    let avg = p.moment(&Real::one(), &Transform::Identity).unwrap();
    assert!(close(m.mid(), avg.mid(), 1e-14));
}

#[test]
fn global_is_restricted_to_the_whole_interval() {
    let p = doubling();
    for n in 0..40 {
        let t = Real::pow2(-n) * Real::ratio(3, 4);
        let g = global_maximal_at(&p, &t).unwrap();
        let r = restricted_maximal_at(&p, &Real::one(), &t).unwrap();
        assert!(g.cmp_mid(&r) == Ordering::Equal);
        assert!(g.mid() <= 4.0, "t = {t}: {g}");
    }
}

#[test]
fn decreasing_disc_weight_has_exact_maximal_integral() {
    let p = step_s(NamedFamily::new(FamilyId::Ex6_9));
    for n in 0..=40 {
        let x = Real::pow2(-n);
        let mi = maximal_integral(&p, &x).unwrap();
        let m = p.moment(&x, &Transform::Identity).unwrap();
        assert!(mi.width().is_zero() && mi == m, "n = {n}");
    }
}

#[test]
fn maximal_integral_sits_between_riemann_sums() {
    // M(f 1_(0,x])(t) is non-increasing in t, so left and right sums bracket
    // the integral; the first cell uses the global bound 4 as its height
    let p = doubling();
    for n in [0i128, 3, 8] {
        let x = Real::pow2(-n);
        let cells = 4000;
        let xf = x.mid();
        let h = xf / cells as f64;
        // restricted_maximal_at(p, x, t) is this envelope's max_from(t)
        let env = envelope(&p, &x).unwrap();
        let m: Vec<f64> = (1..=cells).map(|i| env.max_from(&Real::from_f64(h * i as f64).min(&x)).unwrap().mid()).collect();
        assert!(close(m[17], restricted_maximal_at(&p, &x, &Real::from_f64(h * 18.0)).unwrap().mid(), 1e-15));
        let lower: f64 = m.iter().sum::<f64>() * h;
        let upper = 4.0 * h + m[..cells - 1].iter().sum::<f64>() * h;
        let mi = maximal_integral(&p, &x).unwrap();
        assert!(mi.lo().approx() <= upper * (1.0 + 1e-12) && mi.hi().approx() >= lower * (1.0 - 1e-12), "n = {n}: {mi} not in [{lower}, {upper}]");
    }
}

#[test]
fn maximal_ratio_bounded_on_doubling_blocks() {
    let p = doubling();
    let mut worst = 0.0f64;
    for n in 0..=40 {
        let x = Real::pow2(-n);
        let r = (maximal_integral(&p, &x).unwrap() / p.moment(&x, &Transform::Identity).unwrap()).mid();
        worst = worst.max(r);
    }
    assert!(worst.is_finite() && worst < 10.0, "{worst}");
}

#[test]
fn u_coordinate_profile_is_refused_nowhere() {
    // the calculus works in whichever coordinate the profile carries
    let p = match NamedFamily::new(FamilyId::Ex6_9).instantiate().unwrap() {
        Profile::Step(s) => s,
        _ => unreachable!(),
    };
    assert_eq!(p.coord, Coordinate::U);
    assert!(maximal_integral(&p, &Real::ratio(1, 2)).is_ok());
}
