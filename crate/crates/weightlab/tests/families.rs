use weightlab::families::*;
use weightlab::implication::Node;
use weightlab::profile::{Monotone, Profile, Transform};
use weightlab::Real;

#[test]
fn series_tail_closed_form_and_constant() {
    let c = series_constant().mid();
    assert!((c - (2.0 + 2.0 / std::f64::consts::LN_2)).abs() < 1e-15);
    for n in 0..=60u64 {
        let closed = series_tail(n);
        let partial: f64 = (n..n + 1000).map(|k| 2f64.powi(-(k as i32)) * (k + 1) as f64).sum();
        assert!((closed.mid() - partial).abs() <= 1e-12 * partial, "n = {n}");
        let ratio = closed / (Real::pow2(-(n as i128)) * Real::int(n as i64 + 1));
        assert!(ratio.hi().approx() <= c, "n = {n}: {ratio}");
    }
}

#[test]
fn block_moments_match_block_sums() {
    // int_0^(2^-n) f = sum_(k >= n) 2^-k-1 (1 + a_k (b_k - 1))
    for id in [FamilyId::Ex6_2, FamilyId::Ex6_3, FamilyId::Ex6_6] {
        let nf = NamedFamily::new(id);
        let p = nf.instantiate().unwrap();
        for n in [0u64, 1, 7, 30] {
            let oracle: f64 = (n..nf.depth)
                .map(|k| {
                    let (a, b) = (nf.a(k).unwrap().mid(), nf.b(k).unwrap().mid());
                    2f64.powi(-(k as i32) - 1) * (1.0 + a * (b - 1.0))
                })
                .sum();
            let m = p.moment(&Real::pow2(-(n as i128)), &Transform::Identity).unwrap().mid();
            assert!((m - oracle).abs() <= 1e-12 * oracle, "{id} n = {n}: {m} vs {oracle}");
        }
    }
}

#[test]
fn defaults_cover_the_sweep_with_margin() {
    let deep = Real::pow2(-64);
    for id in FamilyId::all() {
        match NamedFamily::new(id).instantiate().unwrap().to_s() {
            Profile::Step(s) => assert!(s.floor().mid() < deep.mid(), "{id}"),
            Profile::Power(pp) => assert!(matches!(id, FamilyId::ExCentre(r) if r == pp.r)),
        }
    }
}

#[test]
fn monotone_families_are_monotone() {
    for id in [FamilyId::Ex6_8, FamilyId::Ex6_9, FamilyId::Ex6_10] {
        let Profile::Step(s) = NamedFamily::new(id).instantiate().unwrap() else { unreachable!() };
        // pieces run from t = 1 downwards
        let vals: Vec<f64> = s.values().iter().map(|v| v.mid()).collect();
        let down = vals.windows(2).all(|w| w[0] >= w[1]);
        let up = vals.windows(2).all(|w| w[0] <= w[1]);
        match id.monotone() {
            Some(Monotone::Increasing) => assert!(down, "{id}"),
            Some(Monotone::Decreasing) => assert!(up, "{id}"),
            None => unreachable!(),
        }
    }
}

#[test]
fn family_spec_json_round_trip() {
    let text = r#"{"id": "Ex6_6", "b_rule": {"kind": "geometric", "b0": 1.0, "ratio": 3.0}, "depth": 70}"#;
    let spec = FamilySpec::from_json(text).unwrap();
    let nf = spec.family().unwrap();
    assert_eq!(nf.id, FamilyId::Ex6_6);
    assert_eq!(nf.depth, 70);
    assert_eq!(nf.b(2).unwrap().mid(), 9.0);
    let back = FamilySpec::from_json(&serde_json::to_string(&spec).unwrap()).unwrap();
    assert_eq!(back.b_rule, spec.b_rule);
    let centre = FamilySpec::from_json(r#"{"id": "ExCentre", "r": -0.5}"#).unwrap().family().unwrap();
    assert_eq!(centre.id, FamilyId::ExCentre(-0.5));
    assert!(FamilySpec::from_json(r#"{"id": 3}"#).is_err());
    assert!(FamilySpec::from_json(r#"{"id": "Ex9_9"}"#).unwrap().family().is_err());
}

#[test]
fn centre_weights_are_power_profiles() {
    for r in [1.0, -0.5] {
        match NamedFamily::new(FamilyId::ExCentre(r)).instantiate().unwrap() {
            Profile::Power(pp) => assert_eq!(pp.r, r),
            Profile::Step(_) => panic!("ExCentre({r}) should be a power profile"),
        }
    }
}

#[test]
fn claims_of_the_witnesses() {
    let e = expected_behavior(FamilyId::Ex6_1);
    assert_eq!(e.get(Node::B1), Some(true));
    assert_eq!(e.get(Node::P6), Some(false));
    assert_eq!(e.claims[&Node::P7].source, "closure");
    let e = expected_behavior(FamilyId::ExP4_4);
    assert_eq!(e.get(Node::P4b), Some(true));
    assert_eq!(e.get(Node::P2), Some(false));
    // failing P2 rules out everything that implies it
    assert_eq!(e.get(Node::P1), Some(false));
    assert_eq!(e.claims[&Node::P1].source, "closure");
    let e = expected_behavior(FamilyId::Ex6_10);
    assert_eq!((e.get(Node::AC), e.get(Node::P7)), (Some(true), Some(false)));
    assert!(!NamedFamily::new(FamilyId::Ex6_10).instantiate().unwrap().integrable());
}
