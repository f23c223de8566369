//! CSV and number formatting for the CLI.

use std::fmt::Write;

use crate::simulate::PdVsSnrRow;
use crate::types::RocCurve;

pub const ROC_HEADER: &str = "detector,source,pfa,pd";
pub const PD_TABLE_HEADER: &str = "snr1_db,detector,pd,std_error,threshold";

/// `x` with exactly `digits` significant digits, positional notation for
/// moderate exponents and scientific otherwise.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return format!("{:.*}", digits - 1, 0.0);
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    if (-5..15).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

/// [`fmt_sig`] with trailing zeros (and a bare decimal point) removed.
pub fn fmt_trim(x: f64, digits: usize) -> String {
    let s = fmt_sig(x, digits);
    if let Some((mantissa, exp)) = s.split_once('e') {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    trim_zeros(&s).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// ROC rows sorted by (detector name, source, pfa), 10 significant digits.
pub fn roc_csv(curves: &[RocCurve]) -> String {
    let mut rows: Vec<(&str, &str, f64, f64)> = curves
        .iter()
        .flat_map(|c| c.points.iter().map(move |p| (c.detector.name(), c.source.name(), p.pfa, p.pd)))
        .collect();
    rows.sort_by(|a, b| a.0.cmp(b.0).then(a.1.cmp(b.1)).then(a.2.total_cmp(&b.2)).then(a.3.total_cmp(&b.3)));
    let mut out = String::with_capacity(32 * (rows.len() + 1));
    out.push_str(ROC_HEADER);
    out.push('\n');
    for (d, s, pfa, pd) in rows {
        let _ = writeln!(out, "{d},{s},{},{}", fmt_sig(pfa, 10), fmt_sig(pd, 10));
    }
    out
}

pub fn pd_table_csv(rows: &[PdVsSnrRow]) -> String {
    let mut out = String::new();
    out.push_str(PD_TABLE_HEADER);
    out.push('\n');
    for row in rows {
        for e in &row.estimates {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                fmt_sig(row.snr1_db, 10),
                e.detector.name(),
                fmt_sig(e.pd, 10),
                fmt_sig(e.std_error, 10),
                fmt_sig(e.threshold, 10)
            );
        }
    }
    out
}
