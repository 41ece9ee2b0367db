//! Two-decimal display values that carry their full-precision source.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Rounds the shortest decimal representation of `value * 10^shift` to two
/// decimals, half away from zero. Working on the decimal digits avoids
/// binary artifacts such as `1.005` printing as `1.00`.
pub fn round2_shifted(value: f64, shift: usize) -> String {
    if !value.is_finite() {
        return value.to_string();
    }
    let repr = format!("{}", value.abs());
    let (int_part, frac_part) = repr.split_once('.').unwrap_or((&repr, ""));
    let mut frac: Vec<u8> = frac_part.bytes().collect();
    while frac.len() < shift + 3 {
        frac.push(b'0');
    }
    let mut digits: Vec<u8> = int_part.bytes().chain(frac[..shift + 2].iter().copied()).collect();
    if frac[shift + 2] >= b'5' {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, b'1');
                break;
            }
            i -= 1;
            if digits[i] == b'9' {
                digits[i] = b'0';
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    let split = digits.len() - 2;
    let mut int_digits = String::from_utf8(digits[..split].to_vec()).expect("ascii");
    let trimmed = int_digits.trim_start_matches('0');
    int_digits = if trimmed.is_empty() { "0".into() } else { trimmed.into() };
    let frac_digits = std::str::from_utf8(&digits[split..]).expect("ascii");
    let negative = value < 0.0 && digits.iter().any(|&d| d != b'0');
    format!("{}{int_digits}.{frac_digits}", if negative { "-" } else { "" })
}

/// A fraction displayed as a percentage: raw `0.5947` shows as `"59.47"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Percent(pub f64);

/// A duration in days.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Days(pub f64);

#[derive(Serialize, Deserialize)]
struct Shown {
    display: String,
    raw: f64,
}

impl Percent {
    pub fn display(&self) -> String {
        round2_shifted(self.0, 2)
    }
}

impl Days {
    pub fn display(&self) -> String {
        round2_shifted(self.0, 0)
    }
}

macro_rules! shown_serde {
    ($ty:ident) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                Shown {
                    display: self.display(),
                    raw: self.0,
                }
                .serialize(s)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                Ok($ty(Shown::deserialize(d)?.raw))
            }
        }
    };
}

shown_serde!(Percent);
shown_serde!(Days);
