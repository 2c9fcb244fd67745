use num_rational::BigRational;
use proptest::prelude::*;

use abcf::arith::Number;
use abcf::cf::{expand_ab, CfParams};
use abcf::natext::{chart, chart_inv, detect_cycles, first_return, CycleProperty};

/// Rational pairs in the parameter set: -1 <= a < 0 < b <= 1, b - a >= 1.
fn pair() -> impl Strategy<Value = CfParams> {
    (1i64..=12, 1i64..=12, 1i64..=12).prop_filter_map("outside the parameter set", |(den, an, bn)| {
        (an <= den && bn <= den && an + bn >= den).then(|| CfParams::ab_ratio(-an, den, bn, den))
    })
}

fn in_window(x: &Number, p: &CfParams) -> bool {
    !x.lt(&p.a).unwrap() && x.lt(&p.b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn first_return_reads_off_quotients(p in pair(), n in -500i64..500, d in 1i64..200) {
        // y = a_j + z with z in [a,b), and the first return is -1/z
        let x = Number::ratio(n, d);
        let e = expand_ab(&x, &p, 10_000).unwrap();
        prop_assert!(e.terminated);
        let mut y = x;
        let mut digits = vec![];
        while !y.is_infinite() {
            let next = first_return(&y, &p).unwrap();
            let z = if next.is_infinite() { Number::zero() } else { next.recip().unwrap().neg() };
            prop_assert!(in_window(&z, &p), "{z} outside [{}, {})", p.a, p.b);
            let a = y.sub(&z).unwrap();
            let ai = a.floor().unwrap();
            prop_assert_eq!(a.as_rational().unwrap(), &BigRational::from_integer(ai.clone()));
            digits.push(ai);
            prop_assert!(digits.len() <= e.quotients.len());
            y = next;
        }
        prop_assert_eq!(digits, e.quotients);
    }

    #[test]
    fn larger_cap_keeps_verdicts(p in pair()) {
        let small = detect_cycles(&p, 200).unwrap();
        let large = detect_cycles(&p, 2000).unwrap();
        for (s, l) in [(&small.endpoint_a, &large.endpoint_a), (&small.endpoint_b, &large.endpoint_b)] {
            if matches!(s.property, CycleProperty::Strong | CycleProperty::Weak) {
                prop_assert_eq!(s, l);
            }
        }
    }

    #[test]
    fn chart_inverts(v in -1e4f64..1e4, w in prop::sample::select(vec![0.5, 1.0, 2.0, 20.0])) {
        let c = chart(v, w);
        let back = chart_inv(c, w);
        prop_assert!((back - v).abs() <= 1e-9 * v.abs().max(1.0), "{v} -> {c} -> {back}");
    }
}
