//! Angle parsing and number formatting used at the text boundary.
//!
//! The library works in radians. Text inputs may carry a `deg`, `°` or
//! `rad` suffix; a bare number is read in the caller's default unit.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnitError {
    #[error("empty angle")]
    Empty,
    #[error("cannot parse angle '{0}'")]
    Malformed(String),
    #[error("angle '{0}' is not finite")]
    NonFinite(String),
    #[error("unknown angle unit '{0}' (expected deg or rad)")]
    UnknownUnit(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleUnit {
    #[default]
    Deg,
    Rad,
}

impl AngleUnit {
    pub fn to_radians(self, value: f64) -> f64 {
        match self {
            AngleUnit::Deg => value.to_radians(),
            AngleUnit::Rad => value,
        }
    }

    pub fn from_radians(self, value: f64) -> f64 {
        match self {
            AngleUnit::Deg => value.to_degrees(),
            AngleUnit::Rad => value,
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            AngleUnit::Deg => "deg",
            AngleUnit::Rad => "rad",
        }
    }
}

impl fmt::Display for AngleUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.suffix())
    }
}

impl FromStr for AngleUnit {
    type Err = UnitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "deg" | "degree" | "degrees" => Ok(AngleUnit::Deg),
            "rad" | "radian" | "radians" => Ok(AngleUnit::Rad),
            other => Err(UnitError::UnknownUnit(other.to_string())),
        }
    }
}

/// Parses an angle such as `16.7deg`, `16.7°`, `0.29rad` or `16.7`,
/// returning radians. Bare numbers are interpreted in `default_unit`.
pub fn parse_angle(text: &str, default_unit: AngleUnit) -> Result<f64, UnitError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(UnitError::Empty);
    }
    let (number, unit) = split_unit(s, default_unit);
    let value: f64 = number
        .trim()
        .parse()
        .map_err(|_| UnitError::Malformed(text.to_string()))?;
    if !value.is_finite() {
        return Err(UnitError::NonFinite(text.to_string()));
    }
    let radians = unit.to_radians(value);
    if !radians.is_finite() {
        return Err(UnitError::NonFinite(text.to_string()));
    }
    Ok(radians)
}

fn split_unit(s: &str, default_unit: AngleUnit) -> (&str, AngleUnit) {
    if let Some(rest) = s.strip_suffix('°') {
        return (rest, AngleUnit::Deg);
    }
    let lower = s.to_ascii_lowercase();
    for (suffix, unit) in [("deg", AngleUnit::Deg), ("rad", AngleUnit::Rad)] {
        if lower.ends_with(suffix) {
            // suffixes are ASCII, so the byte split is on a char boundary
            return (&s[..s.len() - suffix.len()], unit);
        }
    }
    (s, default_unit)
}

/// Formats a number with ten significant digits (fixed notation in the
/// usual engineering range, scientific outside it). Zero prints as `0`.
pub fn format_sig(value: f64) -> String {
    const SIG: i32 = 10;
    if value == 0.0 {
        return "0".to_string();
    }
    if !value.is_finite() {
        return value.to_string();
    }
    let magnitude = value.abs().log10().floor() as i32;
    if (-4..9).contains(&magnitude) {
        let decimals = (SIG - 1 - magnitude).max(0) as usize;
        format!("{value:.decimals$}")
    } else {
        format!("{:.*e}", (SIG - 1) as usize, value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suffixes() {
        let d = parse_angle("16.7deg", AngleUnit::Rad).unwrap();
        assert!((d - 16.7f64.to_radians()).abs() < 1e-15);
        assert_eq!(parse_angle("0.5rad", AngleUnit::Deg).unwrap(), 0.5);
        assert_eq!(parse_angle(" 0.5 RAD ", AngleUnit::Deg).unwrap(), 0.5);
        assert_eq!(parse_angle("90°", AngleUnit::Rad).unwrap(), 90f64.to_radians());
        assert_eq!(parse_angle("-30", AngleUnit::Deg).unwrap(), (-30f64).to_radians());
        assert_eq!(parse_angle("2", AngleUnit::Rad).unwrap(), 2.0);
    }

    #[test]
    fn rejects_garbage() {
        assert_eq!(parse_angle("", AngleUnit::Deg), Err(UnitError::Empty));
        assert!(matches!(
            parse_angle("deg", AngleUnit::Deg),
            Err(UnitError::Malformed(_))
        ));
        assert!(matches!(
            parse_angle("1.0.0", AngleUnit::Deg),
            Err(UnitError::Malformed(_))
        ));
        assert!(matches!(
            parse_angle("inf", AngleUnit::Deg),
            Err(UnitError::NonFinite(_))
        ));
        assert!(matches!(
            parse_angle("NaNrad", AngleUnit::Deg),
            Err(UnitError::NonFinite(_))
        ));
        assert!(parse_angle("1e308deg", AngleUnit::Deg).is_ok());
        assert!("furlong".parse::<AngleUnit>().is_err());
    }

    #[test]
    fn sig_digits() {
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(1.0), "1.000000000");
        assert_eq!(format_sig(0.0762), "0.07620000000");
        assert_eq!(format_sig(-12.5), "-12.50000000");
        assert_eq!(format_sig(3.2666666666e-3), "0.003266666667");
        assert_eq!(format_sig(1.5e-7), "1.500000000e-7");
        for v in [1.010352762, 0.989647238, 123456.789, 9.99999999999e8] {
            let back: f64 = format_sig(v).parse().unwrap();
            assert!(((back - v) / v).abs() < 1e-9);
        }
    }
}
