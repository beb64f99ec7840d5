//! Serialization of exact and certified values for the CLI boundary.
//!
//! Rationals cross as exact `p/q` strings so downstream tooling can
//! re-verify exactly; certified values cross as decimal midpoint/radius
//! pairs with the radius rounded outward (never inward) so the emitted
//! object still encloses the original.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use qjacobi_core::certified::{CertifiedReal, CertifiedScalar};
use qjacobi_core::error::{Error, Result};
use qjacobi_core::matrix::Mat;
use qjacobi_core::polymat::{scalar_from_json, scalar_to_json};
use qjacobi_core::scalar::{parse_decimal, ExactScalar, Rat};
use qjacobi_core::MatPoly;

/// Significant decimal digits carried by emitted certified values.
const CERTIFIED_DIGITS: u32 = 24;

/// Matrix as nested row-major arrays of entry encodings.
pub fn matrix_to_json(m: &Mat) -> serde_json::Value {
    serde_json::Value::Array(
        (0..m.rows())
            .map(|i| {
                serde_json::Value::Array(
                    (0..m.cols()).map(|j| scalar_to_json(m.get(i, j))).collect(),
                )
            })
            .collect(),
    )
}

pub fn matrix_from_json(v: &serde_json::Value) -> Result<Mat> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::Parse("matrix is not an array".into()))?;
    let mut entries: Vec<Vec<ExactScalar>> = Vec::with_capacity(rows.len());
    for row in rows {
        let cols = row
            .as_array()
            .ok_or_else(|| Error::Parse("matrix row is not an array".into()))?;
        entries.push(cols.iter().map(scalar_from_json).collect::<Result<_>>()?);
    }
    Ok(Mat::from_rows(entries))
}

/// Round a rational to `digits` significant decimal digits.
/// `Up` rounds away from zero (used for radii); `Nearest` for midpoints.
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    Nearest,
    Up,
}

/// Decimal string with exactly controlled rounding; the returned string
/// parses back (via [`parse_decimal`]) to the rounded rational exactly.
pub fn to_decimal_string(r: &Rat, digits: u32, rounding: Rounding) -> String {
    if r.is_zero() {
        return "0".to_string();
    }
    let negative = r.is_negative();
    let abs = r.abs();
    // Exponent e with 10^e <= |r| < 10^{e+1}.
    let ten = Rat::from_integer(10.into());
    let mut e: i64 = 0;
    let mut probe = abs.clone();
    while probe >= ten {
        probe /= &ten;
        e += 1;
    }
    let one = Rat::from_integer(1.into());
    while probe < one {
        probe *= &ten;
        e -= 1;
    }
    // Scale so that the value has `digits` integer digits, then round.
    let shift = digits as i64 - 1 - e;
    let scaled = &abs * pow10(shift);
    let floor = scaled.to_integer();
    let frac = &scaled - Rat::from_integer(floor.clone());
    let half = Rat::new(1.into(), 2.into());
    let mantissa = match rounding {
        Rounding::Up => {
            if frac.is_zero() {
                floor
            } else {
                floor + BigInt::from(1)
            }
        }
        Rounding::Nearest => {
            if frac >= half {
                floor + BigInt::from(1)
            } else {
                floor
            }
        }
    };
    let sign = if negative { "-" } else { "" };
    let digits_str = mantissa.to_string();
    // mantissa has `digits` digits unless rounding carried; recompute exp.
    let exp = e + (digits_str.len() as i64 - digits as i64);
    let (head, tail) = digits_str.split_at(1);
    let trimmed_tail = tail.trim_end_matches('0');
    if trimmed_tail.is_empty() {
        format!("{sign}{head}e{exp}")
    } else {
        format!("{sign}{head}.{trimmed_tail}e{exp}")
    }
}

fn pow10(e: i64) -> Rat {
    let ten = BigInt::from(10u32);
    if e >= 0 {
        Rat::from_integer(ten.pow(e as u32))
    } else {
        Rat::new(1.into(), ten.pow((-e) as u32))
    }
}

/// Certified real as `{"mid": ..., "rad": ...}` decimal strings. The
/// midpoint is rounded to nearest and the representation error is absorbed
/// into the radius (rounded up), so the emitted pair encloses the input.
pub fn certified_to_json(c: &CertifiedReal) -> serde_json::Value {
    let mid_str = to_decimal_string(c.mid(), CERTIFIED_DIGITS, Rounding::Nearest);
    let mid_rounded = parse_decimal(&mid_str).expect("emitted decimal parses");
    let slack = (c.mid() - &mid_rounded).abs();
    let rad = c.rad() + slack;
    let rad_str = to_decimal_string(&rad, 6, Rounding::Up);
    serde_json::json!({ "mid": mid_str, "rad": rad_str })
}

#[cfg_attr(not(test), allow(dead_code))]
pub fn certified_from_json(v: &serde_json::Value) -> Result<CertifiedReal> {
    let mid = v
        .get("mid")
        .and_then(|x| x.as_str())
        .ok_or_else(|| Error::Parse("missing mid".into()))?;
    let rad = v
        .get("rad")
        .and_then(|x| x.as_str())
        .ok_or_else(|| Error::Parse("missing rad".into()))?;
    CertifiedReal::new(parse_decimal(mid)?, parse_decimal(rad)?)
}

/// Complex enclosure as `{"re": {...}, "im": {...}}`.
pub fn certified_scalar_to_json(c: &CertifiedScalar) -> serde_json::Value {
    serde_json::json!({
        "re": certified_to_json(&c.re),
        "im": certified_to_json(&c.im),
    })
}

/// RFC-style CSV field quoting: quote when the field contains a comma,
/// quote or newline; double embedded quotes.
pub fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn csv_row(fields: &[String]) -> String {
    fields
        .iter()
        .map(|f| csv_field(f))
        .collect::<Vec<_>>()
        .join(",")
}

/// Matrix as header-free CSV rows (complex entries in `p/q+r/si` form).
pub fn matrix_to_csv(m: &Mat) -> Vec<String> {
    (0..m.rows())
        .map(|i| {
            csv_row(
                &(0..m.cols())
                    .map(|j| m.get(i, j).to_display_string())
                    .collect::<Vec<_>>(),
            )
        })
        .collect()
}

/// Matrix in aligned plain text.
pub fn matrix_to_pretty(m: &Mat) -> String {
    let cells: Vec<Vec<String>> = (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| m.get(i, j).to_display_string())
                .collect()
        })
        .collect();
    let width = cells
        .iter()
        .flatten()
        .map(String::len)
        .max()
        .unwrap_or(1);
    cells
        .iter()
        .map(|row| {
            let padded: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
            format!("[ {} ]", padded.join("  "))
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Polynomial coefficients as an ascending list of matrices.
pub fn poly_to_json(p: &MatPoly) -> serde_json::Value {
    p.to_json()
}
