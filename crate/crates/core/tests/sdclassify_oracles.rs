use homflow_core::liealg::{classify_flow, AlgebraElement, FlowKind, DEFAULT_TOL};
use homflow_core::rootsys::{good_type, Rational, RootType};
use homflow_core::sdclassify::*;
use proptest::prelude::*;
use std::cmp::Ordering;

fn all_types() -> Vec<(RootType, usize)> {
    RootType::all_up_to(8).into_iter().filter(|(_, r)| *r >= 2).collect()
}

#[test]
fn rank_one_table_integrity() {
    for d in 2..=10u32 {
        for fam in [RankOneFamily::So, RankOneFamily::Su, RankOneFamily::Sp] {
            let row = rank_one_data(fam, Some(d)).unwrap();
            // half the sum of root-space dimensions weighted by root length
            assert_eq!(row.rho, Rational::new((row.p + 2 * row.q) as i64, 2), "{fam}({d},1)");
            assert!(row.rho0 <= row.rho);
            assert_eq!(row.kappa == 2, fam == RankOneFamily::So);
            // the symmetric space has real dimension p + q + 1
            let dim_h = match fam {
                RankOneFamily::So => d,
                RankOneFamily::Su => 2 * d,
                RankOneFamily::Sp => 4 * d,
                RankOneFamily::F4 => unreachable!(),
            };
            assert_eq!(row.p + row.q + 1, dim_h, "{fam}({d},1)");
        }
    }
    let f4 = rank_one_data(RankOneFamily::F4, None).unwrap();
    assert_eq!(f4.p + f4.q + 1, 16);
    assert_eq!(f4.rho, Rational::new((f4.p + 2 * f4.q) as i64, 2));
}

#[test]
fn good_type_always_sd() {
    for (t, r) in all_types() {
        let good = good_type(t, r).unwrap();
        for l in 2..=8 {
            let v = classify_higher_rank_simple(t, r, FlowKind::QuasiUnipotent { l }).unwrap();
            if good {
                assert_eq!(v.is_sd, Sd::Yes, "{t}{r} l={l}");
                assert_eq!(v.exponent, Exponent::poly_int(l as i64));
            } else {
                assert_eq!(v.exponent, Exponent::poly(Rational::new(l as i64, 2)));
                assert_eq!(v.is_sd == Sd::Yes, l >= 3, "{t}{r} l={l}");
            }
            // summable exponent and yes verdict agree
            assert_eq!(v.exponent.is_summable(), v.is_sd == Sd::Yes);
        }
        let v = classify_higher_rank_simple(t, r, FlowKind::QuasiDiagonalizable).unwrap();
        assert_eq!((v.is_sd, v.exponent), (Sd::Yes, Exponent::Exponential));
    }
}

#[test]
fn exponent_monotone_in_l() {
    for (t, r) in all_types() {
        let mut prev: Option<Exponent> = None;
        for l in 2..=8 {
            let e = classify_higher_rank_simple(t, r, FlowKind::QuasiUnipotent { l }).unwrap().exponent;
            if let Some(p) = prev {
                assert_ne!(e.compare(&p), Some(Ordering::Less));
            }
            prev = Some(e);
        }
    }
}

fn factor_json(t: RootType, r: usize, l: usize) -> String {
    format!(r#"{{"factor":"higher_rank","root_type":"{t}","rank":{r},"flow":{{"kind":"quasi_unipotent","l":{l}}}}}"#)
}

proptest! {
    #[test]
    fn adding_essential_factor_never_lowers_exponent(
        picks in prop::collection::vec((0usize..60, 2usize..9), 1..5),
        extra in (0usize..60, 2usize..9),
    ) {
        let types = all_types();
        let pick = |(i, l): (usize, usize)| { let (t, r) = types[i % types.len()]; factor_json(t, r, l) };
        let base: Vec<String> = picks.iter().copied().map(pick).collect();
        let mut more = base.clone();
        more.push(pick(extra));
        let a = GroupSpec::from_json(&format!(r#"{{"factors":[{}]}}"#, base.join(","))).unwrap();
        let b = GroupSpec::from_json(&format!(r#"{{"factors":[{}]}}"#, more.join(","))).unwrap();
        let (ea, eb) = (uniform_decay_exponent(&a).unwrap(), uniform_decay_exponent(&b).unwrap());
        prop_assert_ne!(eb.compare(&ea), Some(Ordering::Less));
        prop_assert!(ea.at_zero().unwrap() >= Rational::from_integer(1));
        let va = classify_semisimple(&a).unwrap();
        if va.exponent.is_summable() { prop_assert_eq!(va.is_sd, Sd::Yes); }
    }
}

#[test]
fn sl3_examples_end_to_end() {
    let x0 = AlgebraElement::from_rows(&[vec![0., 2., 0.], vec![0., 0., 2.], vec![0., 0., 0.]]).unwrap();
    let e13 = AlgebraElement::from_rows(&[vec![0., 0., 1.], vec![0., 0., 0.], vec![0., 0., 0.]]).unwrap();
    let k0 = classify_flow(&x0, DEFAULT_TOL).unwrap().kind;
    let k1 = classify_flow(&e13, DEFAULT_TOL).unwrap().kind;
    assert_eq!(k0, FlowKind::QuasiUnipotent { l: 4 });
    assert_eq!(k1, FlowKind::QuasiUnipotent { l: 2 });
    let v0 = classify_higher_rank_simple(RootType::A, 2, k0).unwrap();
    let v1 = classify_higher_rank_simple(RootType::A, 2, k1).unwrap();
    assert_eq!(v0.is_sd, Sd::Yes);
    assert_eq!(v0.exponent, Exponent::Polynomial { coeff: Rational::from_integer(2), uses_epsilon: true });
    assert_eq!(v0.exponent_display, "2(1-ε)");
    assert_eq!(v1.is_sd, Sd::No);
}

#[test]
fn verdict_json_shape() {
    let v = classify_higher_rank_simple(RootType::A, 2, FlowKind::QuasiUnipotent { l: 4 }).unwrap();
    let j = serde_json::to_value(&v).unwrap();
    assert_eq!(j["is_sd"], "yes");
    assert_eq!(j["exponent"]["form"], "polynomial");
    assert_eq!(j["exponent"]["coeff"], "2");
    assert!(j["rationale"].as_array().unwrap().len() >= 2);
}
