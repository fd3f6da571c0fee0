//! CSV rendering shared by every command.

use std::fmt::Write;

use crate::netsim::RoundMetrics;
use crate::solver::{SolveResult, SolveStatus};
use crate::sweep::CurvePoint;

const SIGNIFICANT: i32 = 12;

/// Formats like C's `%.12g`: 12 significant digits, trailing zeros dropped,
/// exponent notation outside `[1e-4, 1e12)`. Infinities print as `inf` and
/// `-inf`.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (SIGNIFICANT - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..SIGNIFICANT).contains(&exp) {
        let decimals = (SIGNIFICANT - 1 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_string()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn header(out: &mut String, params: &[(String, String)], columns: &str) {
    out.push_str("# coopgame");
    for (k, v) in params {
        let _ = write!(out, " {k}={v}");
    }
    out.push('\n');
    out.push_str(columns);
    out.push('\n');
}

pub fn solve_csv(params: &[(String, String)], r: &SolveResult) -> String {
    let mut out = String::new();
    header(&mut out, params, "status,t_star,u_star,argmax_lo,argmax_hi");
    match r.status {
        SolveStatus::Interior => {
            let iv = r.argmax_interval();
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.status,
                fmt_num(r.t_star.unwrap_or(0.0)),
                fmt_num(r.u_star.unwrap_or(0.0)),
                iv.map(|iv| fmt_num(iv.lo)).unwrap_or_default(),
                iv.map(|iv| fmt_num(iv.hi)).unwrap_or_default(),
            );
        }
        // an opted-out node forwards nothing and gains nothing
        SolveStatus::OptOut => {
            let _ = writeln!(out, "{},0,0,,", r.status);
        }
        SolveStatus::Infeasible => {
            let _ = writeln!(out, "{},,,,", r.status);
        }
    }
    out
}

pub fn curve_csv(params: &[(String, String)], points: &[CurvePoint]) -> String {
    let mut out = String::new();
    header(&mut out, params, "x,u,feasible");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_num(p.x),
            fmt_num(p.value),
            p.feasible.unwrap_or(false)
        );
    }
    out
}

pub fn policy_csv(params: &[(String, String)], swept: &str, points: &[CurvePoint]) -> String {
    let mut out = String::new();
    header(&mut out, params, &format!("{swept},t_star,status"));
    for p in points {
        let status = p.status.map(|s| s.as_str()).unwrap_or("");
        let _ = writeln!(out, "{},{},{}", fmt_num(p.x), fmt_num(p.value), status);
    }
    out
}

pub fn exclusion_csv(params: &[(String, String)], points: &[CurvePoint]) -> String {
    let mut out = String::new();
    header(&mut out, params, "e,p_exclusion");
    for p in points {
        let _ = writeln!(out, "{},{}", fmt_num(p.x), fmt_num(p.value));
    }
    out
}

pub fn sim_csv(params: &[(String, String)], metrics: &[RoundMetrics]) -> String {
    let mut out = String::new();
    header(&mut out, params, "round,mean_policy,opted_out,delivered,offered");
    for m in metrics {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            m.round,
            fmt_num(m.mean_policy),
            m.opted_out_count,
            fmt_num(m.delivered),
            fmt_num(m.offered)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(800.0), "800");
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(2.0 / 3.0), "0.666666666667");
        assert_eq!(fmt_num(-4.1421356237309), "-4.14213562373");
        assert_eq!(fmt_num(123456789012.0), "123456789012");
        assert_eq!(fmt_num(1234567890123.0), "1.23456789012e+12");
        assert_eq!(fmt_num(0.0001), "0.0001");
        assert_eq!(fmt_num(0.00012), "0.00012");
        assert_eq!(fmt_num(0.00001), "1e-05");
        assert_eq!(fmt_num(2.2250738585072014e-308), "2.22507385851e-308");
        assert_eq!(fmt_num(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
        // rounding carries into the next decade
        assert_eq!(fmt_num(9.9999999999999), "10");
    }
}
