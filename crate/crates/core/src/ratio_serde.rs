//! Serde adapter writing exact rationals as `"p/q"` strings (or `"p"`).

use num_rational::BigRational;
use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
    let text = String::deserialize(d)?;
    text.parse::<BigRational>().map_err(|e| D::Error::custom(format!("bad rational {text:?}: {e}")))
}
