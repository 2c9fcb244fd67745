pub mod arith;
pub mod calibrate;
pub mod cf;
pub mod excursion;
pub mod ext;
pub mod geodesic;
mod json;
pub mod natext;
pub mod sample;
