//! Serde adapter writing rationals as `{"num": …, "den": …}`.

use num_rational::Rational64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Serialize, Deserialize)]
struct Parts {
    num: i64,
    den: i64,
}

pub fn serialize<S: Serializer>(r: &Rational64, s: S) -> Result<S::Ok, S::Error> {
    Parts { num: *r.numer(), den: *r.denom() }.serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational64, D::Error> {
    let p = Parts::deserialize(d)?;
    if p.den == 0 {
        return Err(serde::de::Error::custom("zero denominator"));
    }
    Ok(Rational64::new(p.num, p.den))
}

/// The same encoding for a sequence of rationals.
pub mod vec {
    use super::Parts;
    use num_rational::Rational64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational64], s: S) -> Result<S::Ok, S::Error> {
        let parts: Vec<Parts> = v.iter().map(|r| Parts { num: *r.numer(), den: *r.denom() }).collect();
        parts.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational64>, D::Error> {
        Vec::<Parts>::deserialize(d)?
            .into_iter()
            .map(|p| {
                if p.den == 0 {
                    Err(serde::de::Error::custom("zero denominator"))
                } else {
                    Ok(Rational64::new(p.num, p.den))
                }
            })
            .collect()
    }
}
