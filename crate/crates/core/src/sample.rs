//! Seeded generators for the randomized suites and the calibration sets.

use num_bigint::BigInt;
use num_integer::Integer;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::arith::{normalize_rational, normalize_surd, Number};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A rational in `(-bound, bound)` with denominator below `max_den`.
pub fn random_rational<R: Rng>(rng: &mut R, bound: i64, max_den: i64) -> Number {
    let den = rng.gen_range(1..max_den);
    let lim = bound * den;
    let num = rng.gen_range(-lim + 1..lim);
    normalize_rational(BigInt::from(num), BigInt::from(den)).expect("nonzero denominator")
}

fn square_free(d: i64) -> bool {
    (2..).take_while(|p| p * p <= d).all(|p| d % (p * p) != 0)
}

/// A real quadratic irrational `(p + q sqrt d)/r` with small coefficients.
pub fn random_surd<R: Rng>(rng: &mut R) -> Number {
    loop {
        let d = rng.gen_range(2..200i64);
        if !square_free(d) {
            continue;
        }
        let p = rng.gen_range(-40..=40i64);
        let q = rng.gen_range(1..=12i64) * if rng.gen_bool(0.5) { 1 } else { -1 };
        let r = rng.gen_range(1..=30i64);
        if p.gcd(&q).gcd(&r) != 1 {
            continue;
        }
        return normalize_surd(p.into(), q.into(), d.into(), r.into()).expect("valid surd");
    }
}

pub fn random_surds(seed: u64, n: usize) -> Vec<Number> {
    let mut r = rng(seed);
    (0..n).map(|_| random_surd(&mut r)).collect()
}
