//! Normalized journal identifiers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::Error;

/// A normalized ISSN: seven ASCII digits followed by a digit or `X`,
/// stored without the conventional hyphen.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Issn([u8; 8]);

impl Issn {
    pub fn as_str(&self) -> &str {
        // Always ASCII by construction.
        std::str::from_utf8(&self.0).expect("ISSN bytes are ASCII")
    }
}

/// Normalize a raw ISSN string.
///
/// Strips hyphens and whitespace and uppercases a trailing `x`. Returns
/// `None` unless the result is exactly seven digits followed by a digit
/// or `X`.
pub fn normalize_issn(raw: &str) -> Option<Issn> {
    let mut out = [0u8; 8];
    let mut n = 0;
    for ch in raw.chars() {
        if ch == '-' || ch.is_whitespace() {
            continue;
        }
        if n == 8 {
            return None;
        }
        out[n] = match ch {
            '0'..='9' => ch as u8,
            'x' | 'X' if n == 7 => b'X',
            _ => return None,
        };
        n += 1;
    }
    (n == 8).then_some(Issn(out))
}

impl fmt::Display for Issn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for Issn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Issn({})", self.as_str())
    }
}

impl FromStr for Issn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        normalize_issn(s).ok_or_else(|| Error::Table(format!("invalid ISSN {s:?}")))
    }
}

impl Serialize for Issn {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Issn {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        normalize_issn(&s)
            .ok_or_else(|| serde::de::Error::custom(format!("invalid ISSN {s:?}")))
    }
}
