use std::cmp::Ordering;
use weightlab::conditions::*;
use weightlab::families::{BRule, FamilyId, NamedFamily};
use weightlab::profile::{Coordinate, Profile, StepProfile, Tail, Transform};
use weightlab::Real;

fn fam(id: FamilyId) -> (NamedFamily, Profile) {
    let nf = NamedFamily::new(id);
    let p = nf.instantiate().unwrap().to_s();
    (nf, p)
}

fn doubling() -> Profile {
    NamedFamily::new(FamilyId::Ex6_1).with_rule(BRule::Geometric { b0: 1.0, ratio: 2.0 }).instantiate().unwrap().to_s()
}

fn x(n: i128) -> Real {
    Real::pow2(-n)
}

/// `log2` of the lower end, good far outside binary64.
fn lg_lo(r: &Real) -> f64 {
    r.lo().log2_approx()
}

fn cfg() -> SweepConfig {
    SweepConfig::default()
}

#[test]
fn constant_functionals_are_normalized() {
    let (_, p) = fam(FamilyId::Constant);
    for n in [0, 5, 40] {
        let x = x(n);
        assert!((p1_functional(&p, &x, 3.0).unwrap().mid() - 1.0).abs() < 1e-12);
        assert_eq!(rj_functional(&p, &x).unwrap().mid(), 1.0);
        assert_eq!(rh_functional(&p, &x, 2.0).unwrap().mid(), 1.0);
        assert_eq!(p5_functional(&p, &x).unwrap().mid(), 1.0);
        assert_eq!(p6_functional(&p, &x).unwrap().mid(), 0.0);
        let e = p6e_functional(&p, &x).unwrap().mid();
        assert!((e - (1.0 + std::f64::consts::E).ln()).abs() < 1e-12, "{e}");
        assert_eq!(p7_functional(&p, &x).unwrap().mid(), 1.0);
        assert_eq!(b1_functional(&p, &x).unwrap().mid(), 1.0);
        assert_eq!(p8_worst(&p, &x, &Real::one()).unwrap().0.mid(), 0.0);
    }
    let c = Concentration::new(&p, &Real::ratio(1, 3)).unwrap();
    for a in [Real::ratio(1, 10), Real::ratio(1, 2), Real::ratio(9, 10)] {
        assert!(c.k(&a).unwrap().cmp_mid(&a) == Ordering::Equal);
    }
}

/// `log2` of `v`, with a divergent moment read as `+inf`.
fn lg_or_inf(v: weightlab::Result<Real>) -> f64 {
    match v {
        Ok(v) => lg_lo(&v),
        Err(weightlab::Error::DivergentMoment(_)) => f64::INFINITY,
        Err(e) => panic!("{e}"),
    }
}

/// `log2` of the block term `2^-k-1 a_k b_k^e`; the moment of `f^e`
/// diverges when these grow without bound.
fn block_term(nf: &NamedFamily, k: u64, e: f64) -> f64 {
    -(k as f64) - 1.0 + lg_lo(&nf.a(k).unwrap()) + e * lg_lo(&nf.b(k).unwrap())
}

#[test]
fn log_decay_blocks_break_p1_from_below() {
    // value >= exp(1/a - 4) / (4^p (1/a)^(p-1)) with a = a_(n+1), p = 2
    let (nf, p) = fam(FamilyId::Ex6_4);
    let pe = 2.0;
    for n in 0..=40u64 {
        let inv = nf.a(n + 1).unwrap().recip().mid();
        let bound = (inv - 4.0) / std::f64::consts::LN_2 - 2.0 * pe - (pe - 1.0) * inv.log2();
        let v = lg_or_inf(p1_functional(&p, &x(n as i128), pe));
        assert!(v >= bound - 1e-9, "n = {n}: {v} < {bound}");
    }
    // f^(-1) has block terms 2^(k^2 - k - 1) a_k, so the value is infinite
    assert!(block_term(&nf, 60, -1.0) > block_term(&nf, 30, -1.0) + 100.0);
    assert_eq!(lg_or_inf(p1_functional(&p, &x(5), pe)), f64::INFINITY);
}

#[test]
fn log_decay_blocks_keep_p2_below_e_squared() {
    let (_, p) = fam(FamilyId::Ex6_4);
    for n in 0..=40 {
        let v = rj_functional(&p, &x(n)).unwrap();
        assert!(v.hi().approx() <= std::f64::consts::E.powi(2), "n = {n}: {v}");
    }
}

#[test]
fn root_log_decay_blocks_break_p2_from_below() {
    // value >= (1/4) exp(1/(4a) - 4a) with a = a_(n+1)
    let (nf, p) = fam(FamilyId::Ex6_3);
    for n in 0..=40u64 {
        let a = nf.a(n + 1).unwrap().mid();
        let bound = (0.25 * (1.0 / (4.0 * a) - 4.0 * a).exp()).log2();
        let v = rj_functional(&p, &x(n as i128)).unwrap();
        assert!(lg_lo(&v) >= bound - 1e-9, "n = {n}");
    }
}

#[test]
fn sparse_blocks_have_bounded_square_average() {
    // (1/x) int f^2 <= 2 (C_2 + 1), C_2 = sup_k a_k b_k^2
    let (nf, p) = fam(FamilyId::Ex6_6);
    let c2 = (0..nf.depth).map(|k| (nf.a(k).unwrap() * nf.b(k).unwrap().powi(2)).mid()).fold(0.0, f64::max);
    for n in 0..=40 {
        let v = average(&p, &x(n), &Transform::Power(2.0)).unwrap();
        assert!(v.hi().approx() <= 2.0 * (c2 + 1.0), "n = {n}: {v} vs C2 = {c2}");
    }
}

#[test]
fn log_weighted_blocks_break_p3_from_below() {
    // value >= b^(1/2) / (4^(3/2) (1 + log b)^(1/2)), b = b_(n+1)
    let (nf, p) = fam(FamilyId::Ex6_5);
    for n in 0..=40u64 {
        let lb = lg_lo(&nf.b(n + 1).unwrap());
        let ln_b = lb * std::f64::consts::LN_2;
        let bound = 0.5 * lb - 3.0 - 0.5 * (1.0 + ln_b).log2();
        let v = lg_or_inf(rh_functional(&p, &x(n as i128), 2.0));
        assert!(v >= bound - 1e-9, "n = {n}");
    }
    assert!(block_term(&nf, 60, 2.0) > block_term(&nf, 30, 2.0) + 100.0);
}

#[test]
fn alternating_levels_concentrate_nine_fourteenths() {
    // 3 on (2^-2j-1, 2^-2j], 1 on the other dyadic blocks: the 3s cover 2/3
    // of (0, 1] and the mass is 7/3, so half the measure carries 3/2
    let bps: Vec<Real> = (0..=60).map(|k| Real::pow2(-k)).collect();
    let vals: Vec<Real> = (0..60).map(|k| if k % 2 == 0 { Real::int(3) } else { Real::one() }).collect();
    let sp = StepProfile::new(Coordinate::S, bps, vals, Tail::forbid()).unwrap();
    let sp = sp.clone().with_tail(sp.geometric_tail(Real::ratio(1, 2)));
    let c = Concentration::new(&Profile::Step(sp), &Real::one()).unwrap();
    let k = c.k(&Real::ratio(1, 2)).unwrap();
    assert!((k.mid() - 9.0 / 14.0).abs() < 1e-15 && k.lo().approx() <= 9.0 / 14.0 && k.hi().approx() >= 9.0 / 14.0, "{k}");
}

#[test]
fn thin_heavy_blocks_concentrate_mass() {
    // a set of relative measure a_n carries more than a quarter of the mass
    let (nf, p) = fam(FamilyId::ExP4_1);
    for n in 20..=40u64 {
        let c = Concentration::new(&p, &x(n as i128)).unwrap();
        let k = c.k(&nf.a(n).unwrap()).unwrap();
        assert!(k.mid() > 0.25, "n = {n}: {k}");
    }
}

#[test]
fn p4_split_witnesses_sweep_as_claimed() {
    let (_, p) = fam(FamilyId::ExP4_2);
    assert!(classify(&p, &ConditionId::P4a, cfg()).unwrap().verdict.holds());
    let (_, p) = fam(FamilyId::ExP4_3);
    assert!(classify(&p, &ConditionId::P4b, cfg()).unwrap().verdict.fails());
}

#[test]
fn median_ratio_grows_or_stays_bounded() {
    let (nf, p) = fam(FamilyId::Ex6_2);
    for n in 0..=40u64 {
        let v = p5_functional(&p, &x(n as i128)).unwrap();
        let b = nf.b(n + 1).unwrap().mid();
        assert!(v.lo().approx() >= b / 16.0, "n = {n}");
    }
    let (_, p) = fam(FamilyId::Ex6_3);
    for n in 0..=40 {
        assert!(p5_functional(&p, &x(n)).unwrap().hi().approx() <= 4.0);
    }
}

#[test]
fn llogl_bounded_for_log_weighted_blocks() {
    let (_, p) = fam(FamilyId::Ex6_5);
    for n in 0..=40 {
        assert!(p6_functional(&p, &x(n)).unwrap().hi().approx() <= 2.0, "n = {n}");
    }
}

#[test]
fn halving_profile_is_exactly_b_infinity() {
    let (_, p) = fam(FamilyId::Ex6_9);
    for n in 0..=40 {
        let v = p7_functional(&p, &x(n)).unwrap();
        assert!(v.is_exact() && v.cmp_mid(&Real::one()) == Ordering::Equal, "n = {n}: {v}");
    }
}

#[test]
fn root_log_decay_p8_constant_sixteen() {
    let (_, p) = fam(FamilyId::Ex6_3);
    for n in 0..=40 {
        let (v, _) = p8_worst(&p, &x(n), &Real::one()).unwrap();
        assert!(v.hi().approx() <= 16.0, "n = {n}: {v}");
    }
}

#[test]
fn sparse_blocks_break_p8_at_every_beta() {
    // at l = sqrt(b_n) the ratio is at least sqrt(b_n) / 2
    let (nf, p) = fam(FamilyId::Ex6_6);
    for beta in [Real::ratio(1, 2), Real::ratio(1, 8)] {
        for n in 3..=30u64 {
            let rb = nf.b(n).unwrap().sqrt();
            if rb.mid() <= beta.recip().mid() {
                continue;
            }
            let (v, _) = p8_worst(&p, &x(n as i128), &beta).unwrap();
            assert!(v.lo().approx() >= rb.mid() / 2.0 * (1.0 - 1e-12), "n = {n}: {v} vs {rb}");
        }
    }
}

#[test]
fn b1_bounded_on_doubling_blocks_and_broken_by_vanishing_infimum() {
    let p = doubling();
    for n in 0..=40 {
        assert!(b1_functional(&p, &x(n)).unwrap().hi().approx() <= 4.0);
    }
    let (_, p) = fam(FamilyId::Ex6_7);
    assert!(classify(&p, &ConditionId::B1, cfg()).unwrap().verdict.fails());
}

#[test]
fn ac_ratios_of_halving_and_doubling_blocks() {
    // one block per dyadic top half, two blocks once the half straddles a breakpoint
    let p = NamedFamily::new(FamilyId::Ex6_9).instantiate().unwrap();
    let mut sup = 0.0f64;
    for n in 1..=40 {
        let r = ac_ratio(&p, &x(n)).unwrap();
        assert!(r.cmp_mid(&Real::one()) == Ordering::Equal, "n = {n}: {r}");
        let r = ac_ratio(&p, &(x(n) * Real::ratio(3, 2))).unwrap();
        assert!(r.mid() <= 2.0);
        sup = sup.max(r.mid());
    }
    assert_eq!(sup, 2.0);
    // the top half of an arc of length 2^-k starts just below 2^-k, so it
    // meets the exceptional piece at the bottom of block k - 1
    let p = NamedFamily::new(FamilyId::Ex6_1).with_rule(BRule::Geometric { b0: 1.0, ratio: 2.0 }).instantiate().unwrap();
    for k in 1..=40 {
        let r = ac_ratio(&p, &x(k + 1)).unwrap();
        assert!(r.cmp_mid(&Real::pow2(k)) == Ordering::Equal, "k = {k}: {r}");
        let r = ac_ratio(&p, &x(k)).unwrap();
        assert!(r.cmp_mid(&Real::pow2(k - 1)) == Ordering::Equal, "k = {k}: {r}");
    }
}

#[test]
fn sweeps_classify_log_decay_blocks() {
    let (_, p) = fam(FamilyId::Ex6_4);
    assert!(classify(&p, &ConditionId::P1(Some(2.0)), cfg()).unwrap().verdict.fails());
    let r = classify(&p, &ConditionId::P2, cfg()).unwrap();
    match r.verdict {
        Verdict::Holds { log2, .. } => assert!(log2 <= 2.0 * std::f64::consts::LOG2_E + 1e-9),
        v => panic!("P2: {v:?}"),
    }
}

#[test]
fn constant_holds_everything() {
    let (_, p) = fam(FamilyId::Constant);
    let sw = Sweeper::new(&p, cfg()).unwrap();
    for c in ConditionId::all() {
        assert!(sw.run(&c).unwrap().verdict.holds(), "{c}");
    }
}

#[test]
fn non_integrable_weight_is_refused() {
    let p = NamedFamily::new(FamilyId::Ex6_10).instantiate().unwrap();
    assert_eq!(classify(&p, &ConditionId::P7, cfg()).unwrap_err(), weightlab::Error::NonIntegrable);
    assert!(classify(&p, &ConditionId::AC, cfg()).unwrap().verdict.holds());
}

#[test]
fn p8_tail_levels_only_widen_the_bound() {
    // the tail can only add mass above a level and measure above beta l
    let (_, p) = fam(FamilyId::Ex6_6);
    let Profile::Step(sp) = &p else { unreachable!() };
    let levels = TailLevels::new(sp).unwrap();
    let deep = x(60);
    let c = concentration::StepCurve::new(sp, &deep).unwrap();
    let (v, _) = p8_curve(&c, sp, &Real::ratio(1, 2), &levels, None).unwrap();
    assert!(v.lo().approx() <= v.hi().approx());
    let capped = p8_curve(&c, sp, &Real::ratio(1, 2), &levels, Some(&Real::one())).unwrap().0;
    assert!(capped.cmp_mid(&v) != Ordering::Greater);
}
