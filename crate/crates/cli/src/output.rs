use std::io::{self, Write};

use saddlescape::{IterationTrace, TraceRecord};
use serde::Serialize;

use crate::config::TraceFormat;

pub const CSV_HEADER: &str = "iter,err,grad_norm,energy,wall_ns";

/// C's `%.17g`.
pub fn fmt_g17(v: f64) -> String {
    const P: i32 = 17;
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, v);
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let x: i32 = exp.parse().expect("integer exponent");
    if x < -4 || x >= P {
        let sign = if x < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", strip_zeros(mant), x.abs())
    } else {
        strip_zeros(&format!("{:.*}", (P - 1 - x) as usize, v)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn csv_row(r: &TraceRecord) -> String {
    format!(
        "{},{},{},{},{}",
        r.iter,
        r.err.map(fmt_g17).unwrap_or_default(),
        fmt_g17(r.grad_norm),
        fmt_g17(r.energy),
        r.wall_ns
    )
}

#[derive(Serialize)]
struct JsonRecord {
    iter: usize,
    err: Option<f64>,
    grad_norm: f64,
    energy: f64,
    wall_ns: u64,
}

pub fn write_trace<W: Write>(out: &mut W, trace: &IterationTrace, format: TraceFormat) -> io::Result<()> {
    match format {
        TraceFormat::Csv => {
            writeln!(out, "{CSV_HEADER}")?;
            for r in trace.records() {
                writeln!(out, "{}", csv_row(r))?;
            }
        }
        TraceFormat::Jsonl => {
            for r in trace.records() {
                let rec = JsonRecord {
                    iter: r.iter,
                    err: r.err,
                    grad_norm: r.grad_norm,
                    energy: r.energy,
                    wall_ns: r.wall_ns,
                };
                serde_json::to_writer(&mut *out, &rec)?;
                writeln!(out)?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf() {
        let cases = [
            (0.1, "0.10000000000000001"),
            (1.0, "1"),
            (2.5e-4, "0.00025000000000000001"),
            (1e-5, "1.0000000000000001e-05"),
            (123456.0, "123456"),
            (1e17, "1e+17"),
            (-3.0e100, "-2.9999999999999999e+100"),
            (1.0 / 3.0, "0.33333333333333331"),
            (0.0, "0"),
        ];
        for (v, want) in cases {
            assert_eq!(fmt_g17(v), want, "{v:e}");
        }
    }

    #[test]
    fn round_trips() {
        for v in [std::f64::consts::PI, 6.02214076e23, 1.234e-300, -7.5e-11] {
            assert_eq!(fmt_g17(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn missing_err_is_empty_field() {
        let r = TraceRecord {
            iter: 3,
            err: None,
            grad_norm: 0.5,
            energy: -1.0,
            wall_ns: 7,
        };
        assert_eq!(csv_row(&r), "3,,0.5,-1,7");
    }
}
