use num_traits::Signed;
use proptest::prelude::*;

use abcf::arith::{hyperbolic_distance, Number, UpperHalfPoint};
use abcf::calibrate::surd_orbit;
use abcf::excursion::{run_exact, Quotient};
use abcf::cf::CfParams;
use abcf::geodesic::{
    c_prime, reduce_geodesic_in, reduce_point, time_above, Geodesic, Reducedness, Region, Window,
};
use abcf::sample::{random_surd, rng};

fn point() -> impl Strategy<Value = UpperHalfPoint> {
    (-20.0f64..20.0, -6.0f64..4.0).prop_map(|(x, ly)| UpperHalfPoint::new(x, 10f64.powf(ly)).unwrap())
}

fn surd() -> impl Strategy<Value = Number> {
    any::<u64>().prop_map(|s| random_surd(&mut rng(s)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distance_is_a_metric(z in point(), w in point(), v in point()) {
        let (zw, wz) = (hyperbolic_distance(&z, &w), hyperbolic_distance(&w, &z));
        prop_assert!((zw - wz).abs() <= 1e-9 * zw.max(1.0));
        prop_assert!(hyperbolic_distance(&z, &z).abs() < 1e-12);
        let via = hyperbolic_distance(&z, &v) + hyperbolic_distance(&v, &w);
        prop_assert!(zw <= via + 1e-9 * via.max(1.0));
    }

    #[test]
    fn reduced_point_lies_in_the_fundamental_domain(z in point()) {
        let (r, m) = reduce_point(&z).unwrap();
        prop_assert!(r.x.abs() <= 0.5 + 1e-9);
        prop_assert!(r.x * r.x + r.y * r.y >= 1.0 - 1e-9);
        // same point of the modular surface
        let back = z.apply(&m);
        prop_assert!(hyperbolic_distance(&back, &r) < 1e-6 * (1.0 + r.y.ln().abs()));
    }

    #[test]
    fn unclipped_time_above_matches_arc_integral(u in -5.0f64..5.0, len in 0.01f64..50.0, d in 0.1f64..10.0) {
        // use rational endpoints close to the sampled ones
        let (un, wn) = ((u * 1000.0).round() as i64, ((u + len) * 1000.0).round() as i64);
        prop_assume!(un != wn);
        let g = Geodesic::new(Number::ratio(un, 1000), Number::ratio(wn, 1000)).unwrap();
        let r = (wn - un) as f64 / 2000.0;
        let t = time_above(&g, d, &Window::Unclipped).unwrap();
        // on y = r sin(th), ds = dth / sin(th); above d means sin(th) > d/r
        let expect = if r <= d { 0.0 } else {
            let th0 = (d / r).asin();
            2.0 * (1.0 / (th0 / 2.0).tan()).ln()
        };
        prop_assert!((t - expect).abs() <= 1e-9 * expect.max(1.0), "{t} vs {expect}");
    }

    #[test]
    fn time_above_shrinks_with_height(x in surd()) {
        let ds = [1.0, 1.5, 2.0, 4.0];
        let p = CfParams::minus_one_one();
        let run = run_exact(&x, &p, &Region::MinusOneOne, 40, &ds, 1000).unwrap();
        let g = Geodesic::new(x.conjugate(), x.clone()).unwrap();
        let red = reduce_geodesic_in(&g, &p, &Region::MinusOneOne, 1000).unwrap();
        prop_assert!(red.verdict != Reducedness::NotReduced);
        let mut cur = red.geodesic;
        for r in &run.returns {
            let a = match &r.quotient { Quotient::Exact(a) => a.clone(), _ => unreachable!() };
            let geo = &r.geometry;
            let lift: Vec<f64> = geo.above.iter().map(|t| t.time.to_f64().abs()).collect();
            let cusp: Vec<f64> = geo.above.iter().map(|t| t.cusp.to_f64().abs()).collect();
            prop_assert!(lift.windows(2).all(|p| p[1] <= p[0] + 1e-12), "{lift:?}");
            prop_assert!(cusp.windows(2).all(|p| p[1] <= p[0] + 1e-12), "{cusp:?}");
            let len = geo.return_time().to_f64();
            for k in 0..ds.len() {
                prop_assert!(lift[k] <= cusp[k] + 1e-12 && cusp[k] <= len + 1e-9);
                let via = time_above(&cur, ds[k], &Window::Return(a.clone())).unwrap();
                prop_assert!((via - lift[k]).abs() < 1e-9);
                // the gap is the rest of the window
                prop_assert!((geo.above[k].gap + geo.above[k].cusp.to_f64() - geo.elapsed.to_f64()).abs() < 1e-9 * len.max(1.0));
            }
            cur = cur.shift(&a).unwrap();
        }
    }

    #[test]
    fn minus_one_one_return_time_lower_bound(x in surd()) {
        let (orbit, _) = surd_orbit(&x, &CfParams::minus_one_one(), &Region::MinusOneOne, 200).unwrap();
        let cp = c_prime();
        for s in &orbit.steps {
            let ln_a = s.quotient.abs().to_string().parse::<f64>().unwrap().ln();
            prop_assert!(s.geometry.return_time().to_f64() >= 2.0 * ln_a - cp - 1e-9);
        }
    }
}
