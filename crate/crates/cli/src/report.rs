//! Emitted artifacts: CSV curves/grids with 17-significant-digit values
//! and JSON reports under a fixed, round-trippable schema.

use serde::{Deserialize, Serialize};

/// One absorption-regime report, shared by `mfpt` and `classify`.
///
/// `regime` is one of `"finite"`, `"infinite"`, `"never_absorbed"`.
/// `tau`/`tau_error` accompany `"finite"` (from `mfpt` only),
/// `tail_exponent` accompanies `"infinite"` when a power-law tail is
/// identifiable, and `p_infinity` accompanies `"never_absorbed"`.
#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct RegimeReport {
    pub regime: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_infinity: Option<f64>,
}

/// One sampled curve point; `extra` carries the command-specific third
/// column (the tail asymptote for `fptd`).
#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct CurvePoint {
    pub t: f64,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub asymptote: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct CurveReport {
    pub quantity: String,
    pub points: Vec<CurvePoint>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct GridPoint {
    pub r: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct FieldReport {
    pub quantity: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_infinity: Option<f64>,
    pub points: Vec<GridPoint>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct ValidationSlice {
    pub s: f64,
    pub t: f64,
    pub deviation: f64,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct ValidationReport {
    pub norm: String,
    pub worst: f64,
    /// Largest deviation past the L1 startup window `s >= s_final/8`.
    pub worst_settled: f64,
    pub skipped_slices: usize,
    pub slices: Vec<ValidationSlice>,
}

/// 17 significant digits: enough to reproduce the double exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn curve_csv(header: &str, rows: &[Vec<f64>]) -> String {
    let mut out = String::with_capacity(rows.len() * 32 + header.len() + 1);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            out.push_str(&fmt_f64(*v));
            first = false;
        }
        out.push('\n');
    }
    out
}
