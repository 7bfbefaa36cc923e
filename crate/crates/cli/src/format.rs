//! Output formatting for reals: 17 significant digits, so every value
//! read back parses to the same `f64`.

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// Positional notation for moderate magnitudes, scientific otherwise.
pub fn real(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{v:.16e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..].parse().expect("exponent digits");
    if (-5..16).contains(&exp) {
        format!("{v:.prec$}", prec = (16 - exp) as usize)
    } else {
        sci
    }
}

/// A JSON number written through [`real`]; non-finite values become `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return serializer.serialize_none();
        }
        let raw = RawValue::from_string(real(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(real(1.0), "1.0000000000000000");
        assert_eq!(real(0.6321205588285577), "0.63212055882855767");
        assert_eq!(real(-0.05), "-0.050000000000000003");
        assert_eq!(real(1e-7), "9.9999999999999995e-8");
        assert_eq!(real(0.0), "0.0000000000000000");
    }

    #[test]
    fn round_trips() {
        for v in [0.1, 1.0 / 3.0, 123456.789, 2.5e-300, 6.02e23, -7.0, f64::MIN_POSITIVE, f64::MAX] {
            assert_eq!(real(v).parse::<f64>().unwrap(), v, "{v}");
        }
    }

    #[test]
    fn json_number() {
        let s = serde_json::to_string(&[Real(0.5), Real(f64::NAN)]).unwrap();
        assert_eq!(s, "[0.50000000000000000,null]");
        let back: Vec<Option<f64>> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![Some(0.5), None]);
    }
}
