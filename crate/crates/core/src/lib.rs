pub mod approximant;
pub mod characters;
pub mod cli;
pub mod counting;
pub mod digits;
pub mod error;
pub mod measures;
pub mod numtheory;
pub mod verify;

pub use error::{Error, Result};

/// Serializes big integers as decimal strings.
pub(crate) mod serde_big {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(n: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&n.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
