use proptest::prelude::*;

use cat0_rigidity::actions::{Action, ActionSpec};
use cat0_rigidity::boundary::{is_cauchy, ray_eval, BoundaryPoint, CauchyOptions, End};
use cat0_rigidity::conditions::derive_constants;
use cat0_rigidity::experiments::{power_sequence, with_line, DoublingFamily};
use cat0_rigidity::groups::{parse_family, GroupElement, GroupFamily, Letter, LineElem, WeightAssignment};
use cat0_rigidity::num::{q, Q};
use cat0_rigidity::spaces::{PieceSpec, SpacePoint};

fn word(fam: &GroupFamily, raw: &[(u16, bool)]) -> Vec<Letter> {
    let n = fam.num_generators() as u16;
    raw.iter().map(|(g, inv)| fam.letter(g % n, *inv)).collect()
}

fn raw_word(max: usize) -> impl Strategy<Value = Vec<(u16, bool)>> {
    prop::collection::vec((0u16..8, any::<bool>()), 0..max)
}

fn families() -> Vec<GroupFamily> {
    ["F2xZ", "(ZxZ)*Z2", "(Z2*Z2*Z2)x(Z2*Z2)", "Z^2*Z3", "(F2xZ)*Z2"]
        .iter()
        .map(|s| parse_family(s).unwrap())
        .collect()
}

fn star_action(wa: i128, shift: i128) -> Action {
    Action::from_spec(&ActionSpec::Product {
        family: "F2xZ".into(),
        weights: [("a".to_string(), q(wa))].into_iter().collect(),
        shifts: [("b".to_string(), q(shift))].into_iter().collect(),
    })
    .unwrap()
}

fn complex_action() -> Action {
    Action::from_spec(&ActionSpec::Complex {
        family: "(ZxZ)*Z2".into(),
        pieces: vec![
            PieceSpec::FlatLattice { basis: vec![vec![q(1), q(0)], vec![q(1), q(2)]] },
            PieceSpec::Interval { length: q(1) },
        ],
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_laws(fi in 0usize..5, a in raw_word(8), b in raw_word(8), c in raw_word(8)) {
        let fam = &families()[fi];
        let (x, y, z) = (
            fam.reduce(&word(fam, &a)).unwrap(),
            fam.reduce(&word(fam, &b)).unwrap(),
            fam.reduce(&word(fam, &c)).unwrap(),
        );
        let left = fam.multiply(&fam.multiply(&x, &y).unwrap(), &z).unwrap();
        let right = fam.multiply(&x, &fam.multiply(&y, &z).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        prop_assert!(fam.is_identity(&fam.multiply(&x, &fam.inverse(&x)).unwrap()));
        let round = fam.reduce(&fam.letters(&x)).unwrap();
        prop_assert_eq!(round, x);
    }

    #[test]
    fn orbit_maps_are_equivariant_isometries(a in raw_word(6), b in raw_word(6), g in raw_word(6), wa in 1i128..4, s in 0i128..3) {
        let act = star_action(wa, s);
        let fam = act.family().clone();
        let (x, y, h) = (
            fam.reduce(&word(&fam, &a)).unwrap(),
            fam.reduce(&word(&fam, &b)).unwrap(),
            fam.reduce(&word(&fam, &g)).unwrap(),
        );
        let (px, py) = (act.orbit_point(&x).unwrap(), act.orbit_point(&y).unwrap());
        let d = act.space().distance(&px, &py).unwrap();
        let moved = act.space().distance(&act.apply(&h, &px).unwrap(), &act.apply(&h, &py).unwrap()).unwrap();
        prop_assert!((d - moved).abs() < 1e-9);
        let hx = act.orbit_point(&fam.multiply(&h, &x).unwrap()).unwrap();
        prop_assert!(act.space().distance(&hx, &act.apply(&h, &px).unwrap()).unwrap() < 1e-9);
    }

    #[test]
    fn complex_metric_axioms(a in raw_word(6), b in raw_word(6), c in raw_word(6), t in 0.0f64..1.0) {
        let act = complex_action();
        let fam = act.family().clone();
        let sp = act.space();
        let pts: Vec<SpacePoint> = [a, b, c]
            .iter()
            .map(|w| act.orbit_point(&fam.reduce(&word(&fam, w)).unwrap()).unwrap())
            .collect();
        let d01 = sp.distance(&pts[0], &pts[1]).unwrap();
        let mid = sp.geodesic_eval(&pts[0], &pts[1], t * d01).unwrap();
        let d = |p: &SpacePoint, q: &SpacePoint| sp.distance(p, q).unwrap();
        prop_assert!((d(&pts[1], &pts[0]) - d01).abs() < 1e-9);
        prop_assert!(d(&pts[0], &pts[2]) <= d01 + d(&pts[1], &pts[2]) + 1e-9);
        // Points on a geodesic split its length.
        prop_assert!((d(&pts[0], &mid) + d(&mid, &pts[1]) - d01).abs() < 1e-9);
    }

    #[test]
    fn rays_have_unit_speed(raw in raw_word(5), theta in -1.5f64..1.5, r in 0.0f64..30.0) {
        let act = star_action(2, 0);
        let fam = parse_family("F2").unwrap();
        let mut period: Vec<Letter> = word(&fam, &raw);
        let red = fam.reduce(&period).unwrap();
        period = fam.letters(&red);
        prop_assume!(!period.is_empty() && period[0] != period[period.len() - 1].inverse());
        let alpha = BoundaryPoint::Product { end: End::periodic(Vec::new(), period).unwrap(), theta };
        let p = ray_eval(act.space(), &alpha, r).unwrap();
        let d = act.space().distance(&act.basepoint(), &p).unwrap();
        prop_assert!((d - r).abs() < 1e-9);
    }

    #[test]
    fn periodic_sequences_are_cauchy(raw in raw_word(5), k in -3i64..4, wa in 1i128..3) {
        let act = star_action(wa, 1);
        let fam = act.family().clone();
        let base = parse_family("F2").unwrap();
        let red = base.reduce(&word(&base, &raw)).unwrap();
        let w = base.letters(&red);
        prop_assume!(!w.is_empty() || k != 0);
        let g = with_line(&fam, &w, LineElem::translation(k)).unwrap();
        let seq = power_sequence(&fam, &g, 30).unwrap();
        let pts: Vec<SpacePoint> = seq.iter().map(|g| act.orbit_point(g).unwrap()).collect();
        let r = is_cauchy(act.space(), &pts, &CauchyOptions::default()).unwrap();
        prop_assert!(r.verdict.is_cauchy(), "{:?}", r.verdict);
    }

    #[test]
    fn derived_constants_grow_with_m(num in 1i128..100, den in 1i128..20, extra in 1i128..10) {
        let m = Q::new(num, den);
        let k1 = derive_constants(q(2), q(1), q(1), m, q(1), None).unwrap();
        let k2 = derive_constants(q(2), q(1), q(1), m + q(extra), q(1), None).unwrap();
        prop_assert!(k2.m_tilde > k1.m_tilde && k2.m_prime > k1.m_prime && k2.r > k1.r);
        prop_assert_eq!(k1.n_tilde, q(2));
    }

    #[test]
    fn recurrence_matches_weighted_lengths(wa in 1i128..5, wb in 1i128..5, n in 1usize..12) {
        let fam = parse_family("F2xZ").unwrap();
        let base = parse_family("F2").unwrap();
        let d = DoublingFamily::example_6_1(&fam).unwrap();
        let w = WeightAssignment::new(&base, vec![q(wa), q(wb)]).unwrap();
        let xs = d.ratio_recurrence(&w, n);
        for (i, g) in d.elements(&fam, n).unwrap().iter().enumerate() {
            let GroupElement::WithLine(b, line) = g else { panic!() };
            prop_assert_eq!(line.t, 1i64 << (i + 1));
            prop_assert_eq!(base.length(b, &w) / Q::from_integer(1i128 << (i + 1)), xs[i]);
        }
    }
}
