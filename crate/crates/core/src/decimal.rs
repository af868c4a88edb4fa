// SPDX-License-Identifier: Apache-2.0

//! Fixed-point decimal with six fraction digits.
//!
//! Every decimal that crosses a wire or file boundary is rendered with exactly
//! six fraction digits, so values are stored as integer millionths. This keeps
//! certificate digests and snapshots byte-stable.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Number of fraction digits carried by [`Decimal`].
pub const SCALE_DIGITS: u32 = 6;
const SCALE: i64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecimalError {
    #[error("empty decimal literal")]
    Empty,
    #[error("invalid decimal literal `{0}`")]
    Invalid(String),
    #[error("decimal `{0}` has more than 6 fraction digits")]
    TooPrecise(String),
    #[error("decimal `{0}` is out of range")]
    Overflow(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Decimal(i64);

impl Decimal {
    pub const ZERO: Decimal = Decimal(0);
    pub const ONE: Decimal = Decimal(SCALE);

    pub const fn from_micros(micros: i64) -> Self {
        Decimal(micros)
    }

    pub const fn from_int(v: i64) -> Self {
        Decimal(v * SCALE)
    }

    pub const fn micros(self) -> i64 {
        self.0
    }

    /// Rounds half away from zero to the nearest millionth.
    pub fn from_f64(v: f64) -> Option<Self> {
        if !v.is_finite() {
            return None;
        }
        let scaled = (v * SCALE as f64).round();
        if scaled.abs() >= i64::MAX as f64 {
            return None;
        }
        Some(Decimal(scaled as i64))
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / SCALE as f64
    }

    pub fn is_integral(self) -> bool {
        self.0 % SCALE == 0
    }

    pub fn checked_add(self, rhs: Decimal) -> Option<Decimal> {
        self.0.checked_add(rhs.0).map(Decimal)
    }

    pub fn checked_sub(self, rhs: Decimal) -> Option<Decimal> {
        self.0.checked_sub(rhs.0).map(Decimal)
    }

    /// Product rounded half away from zero to six fraction digits.
    pub fn checked_mul(self, rhs: Decimal) -> Option<Decimal> {
        let wide = self.0 as i128 * rhs.0 as i128;
        let half = SCALE as i128 / 2;
        let rounded = if wide >= 0 {
            (wide + half) / SCALE as i128
        } else {
            (wide - half) / SCALE as i128
        };
        i64::try_from(rounded).ok().map(Decimal)
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let scale = SCALE as u64;
        write!(f, "{sign}{}.{:06}", abs / scale, abs % scale)
    }
}

impl FromStr for Decimal {
    type Err = DecimalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.is_empty() {
            return Err(DecimalError::Empty);
        }
        let invalid = || DecimalError::Invalid(s.to_string());
        let (negative, body) = match t.as_bytes()[0] {
            b'-' => (true, &t[1..]),
            b'+' => (false, &t[1..]),
            _ => (false, t),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(invalid());
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(invalid());
        }
        if frac_part.len() > SCALE_DIGITS as usize {
            // trailing zeros beyond the sixth digit carry no information
            if frac_part[SCALE_DIGITS as usize..]
                .bytes()
                .any(|b| b != b'0')
            {
                return Err(DecimalError::TooPrecise(s.to_string()));
            }
        }
        let overflow = || DecimalError::Overflow(s.to_string());
        let int_val: i64 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| overflow())?
        };
        let mut frac_val: i64 = 0;
        for i in 0..SCALE_DIGITS as usize {
            let digit = frac_part.as_bytes().get(i).map_or(0, |b| (b - b'0') as i64);
            frac_val = frac_val * 10 + digit;
        }
        let magnitude = int_val
            .checked_mul(SCALE)
            .and_then(|v| v.checked_add(frac_val))
            .ok_or_else(overflow)?;
        Ok(Decimal(if negative { -magnitude } else { magnitude }))
    }
}

// Rendered as a JSON number with exactly six fraction digits.
impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let number: serde_json::Number = self
            .to_string()
            .parse()
            .map_err(serde::ser::Error::custom)?;
        number.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let number = serde_json::Number::deserialize(deserializer)?;
        number.to_string().parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn formats_six_fraction_digits() {
        assert_eq!(Decimal::from_micros(990_000).to_string(), "0.990000");
        assert_eq!(Decimal::from_int(200).to_string(), "200.000000");
        assert_eq!(Decimal::from_micros(-500_000).to_string(), "-0.500000");
        assert_eq!(Decimal::from_micros(-1).to_string(), "-0.000001");
    }

    #[test]
    fn parses_common_forms() {
        assert_eq!(
            "0.9".parse::<Decimal>().unwrap(),
            Decimal::from_micros(900_000)
        );
        assert_eq!("15".parse::<Decimal>().unwrap(), Decimal::from_int(15));
        assert_eq!(
            ".5".parse::<Decimal>().unwrap(),
            Decimal::from_micros(500_000)
        );
        assert_eq!(
            "1.50000000".parse::<Decimal>().unwrap(),
            Decimal::from_micros(1_500_000)
        );
        assert!(matches!(
            "1.0000001".parse::<Decimal>(),
            Err(DecimalError::TooPrecise(_))
        ));
        assert!(matches!(
            "abc".parse::<Decimal>(),
            Err(DecimalError::Invalid(_))
        ));
        assert!(matches!(
            "1e3".parse::<Decimal>(),
            Err(DecimalError::Invalid(_))
        ));
        assert!(matches!("".parse::<Decimal>(), Err(DecimalError::Empty)));
        assert!(matches!(
            ".".parse::<Decimal>(),
            Err(DecimalError::Invalid(_))
        ));
    }

    #[test]
    fn multiplication_rounds_to_micros() {
        let d = |s: &str| s.parse::<Decimal>().unwrap();
        assert_eq!(d("100").checked_mul(d("0.15")).unwrap(), d("15"));
        assert_eq!(d("0.000001").checked_mul(d("0.5")).unwrap(), d("0.000001"));
        assert_eq!(
            d("-0.000001").checked_mul(d("0.5")).unwrap(),
            d("-0.000001")
        );
        assert_eq!(d("0.000001").checked_mul(d("0.4")).unwrap(), Decimal::ZERO);
        assert!(Decimal::from_int(i64::MAX / 1_000_000)
            .checked_mul(d("10"))
            .is_none());
    }

    #[test]
    fn json_uses_fixed_digits() {
        let json = serde_json::to_string(&Decimal::from_micros(10_000_000)).unwrap();
        assert_eq!(json, "10.000000");
        let back: Decimal = serde_json::from_str("0.25").unwrap();
        assert_eq!(back, Decimal::from_micros(250_000));
    }

    proptest! {
        #[test]
        fn display_parse_round_trip(micros in -10_000_000_000_000i64..10_000_000_000_000i64) {
            let d = Decimal::from_micros(micros);
            prop_assert_eq!(d.to_string().parse::<Decimal>().unwrap(), d);
        }
    }
}
