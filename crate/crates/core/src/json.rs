//! Serde adapters: integers are written as JSON numbers when they fit in
//! 64 bits and as decimal strings otherwise.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::de::Error;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Wire {
    Small(i64),
    Big(String),
}

fn to_wire(v: &BigInt) -> Wire {
    match v.to_i64() {
        Some(s) => Wire::Small(s),
        None => Wire::Big(v.to_string()),
    }
}

fn from_wire<E: Error>(w: Wire) -> Result<BigInt, E> {
    match w {
        Wire::Small(s) => Ok(BigInt::from(s)),
        Wire::Big(s) => s.parse().map_err(E::custom),
    }
}

pub mod bigint {
    use super::*;

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        to_wire(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        from_wire(Wire::deserialize(d)?)
    }
}

pub mod bigint_seq {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        let w: Vec<Wire> = v.iter().map(to_wire).collect();
        w.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        Vec::<Wire>::deserialize(d)?.into_iter().map(from_wire).collect()
    }
}
