//! CSV traces. Floats are written with 17 significant digits so that
//! parsing a file gives back the exact values.

use std::fmt::Write as _;
use std::path::Path;

use rpbm::baselines::SgmRecord;
use rpbm::bundle::{StepType, TraceRecord};

use crate::error::{BenchError, Result};

pub const TRACE_HEADER: &str =
    "iter,oracle_calls,wall_ns,step_type,f_x,f_z,model_pred,delta_tilde,kappa,rho,d_norm,g_norm";

pub const SGM_HEADER: &str = "iter,oracle_calls,wall_ns,f_x,f_best,step_size,g_norm";

fn float(out: &mut String, v: f64) {
    // `{:.16e}` is one leading digit plus sixteen decimals.
    write!(out, ",{v:.16e}").expect("writing to a String");
}

pub fn format_trace_csv(records: &[TraceRecord]) -> String {
    let mut out = String::with_capacity(64 + records.len() * 200);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in records {
        write!(out, "{},{},{},{}", r.iter, r.oracle_calls, r.wall_ns, r.step_type.as_str()).expect("writing to a String");
        for v in [r.f_x, r.f_z, r.model_pred, r.delta_tilde, r.kappa, r.rho, r.d_norm, r.g_norm] {
            float(&mut out, v);
        }
        out.push('\n');
    }
    out
}

pub fn format_sgm_csv(records: &[SgmRecord]) -> String {
    let mut out = String::with_capacity(64 + records.len() * 140);
    out.push_str(SGM_HEADER);
    out.push('\n');
    for r in records {
        write!(out, "{},{},{}", r.iter, r.oracle_calls, r.wall_ns).expect("writing to a String");
        for v in [r.f_x, r.f_best, r.step_size, r.g_norm] {
            float(&mut out, v);
        }
        out.push('\n');
    }
    out
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| BenchError::io(path, e))
}

pub fn write_trace_csv(records: &[TraceRecord], path: &Path) -> Result<()> {
    write_file(path, &format_trace_csv(records))
}

pub fn write_sgm_csv(records: &[SgmRecord], path: &Path) -> Result<()> {
    write_file(path, &format_sgm_csv(records))
}

struct Fields<'a> {
    line: usize,
    it: std::str::Split<'a, char>,
}

impl<'a> Fields<'a> {
    fn next_str(&mut self) -> Result<&'a str> {
        self.it
            .next()
            .ok_or_else(|| BenchError::MalformedTrace(format!("line {}: too few fields", self.line)))
    }

    fn parse<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let s = self.next_str()?;
        s.parse().map_err(|_| {
            BenchError::MalformedTrace(format!("line {}: bad {what} field {s:?}", self.line))
        })
    }

    fn finish(mut self) -> Result<()> {
        match self.it.next() {
            None => Ok(()),
            Some(_) => Err(BenchError::MalformedTrace(format!("line {}: too many fields", self.line))),
        }
    }
}

fn rows<'a>(text: &'a str, header: &str) -> Result<impl Iterator<Item = Fields<'a>>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == header => {}
        Some(h) => return Err(BenchError::MalformedTrace(format!("unexpected header {h:?}"))),
        None => return Err(BenchError::MalformedTrace("missing header".into())),
    }
    Ok(lines.enumerate().filter(|(_, l)| !l.is_empty()).map(|(i, l)| Fields {
        line: i + 2,
        it: l.split(','),
    }))
}

pub fn parse_trace_csv(text: &str) -> Result<Vec<TraceRecord>> {
    rows(text, TRACE_HEADER)?
        .map(|mut f| {
            let iter = f.parse("iter")?;
            let oracle_calls = f.parse("oracle_calls")?;
            let wall_ns = f.parse("wall_ns")?;
            let step_type: StepType = f.parse("step_type")?;
            let rec = TraceRecord {
                iter,
                oracle_calls,
                wall_ns,
                step_type,
                f_x: f.parse("f_x")?,
                f_z: f.parse("f_z")?,
                model_pred: f.parse("model_pred")?,
                delta_tilde: f.parse("delta_tilde")?,
                kappa: f.parse("kappa")?,
                rho: f.parse("rho")?,
                d_norm: f.parse("d_norm")?,
                g_norm: f.parse("g_norm")?,
            };
            f.finish()?;
            Ok(rec)
        })
        .collect()
}

pub fn parse_sgm_csv(text: &str) -> Result<Vec<SgmRecord>> {
    rows(text, SGM_HEADER)?
        .map(|mut f| {
            let rec = SgmRecord {
                iter: f.parse("iter")?,
                oracle_calls: f.parse("oracle_calls")?,
                wall_ns: f.parse("wall_ns")?,
                f_x: f.parse("f_x")?,
                f_best: f.parse("f_best")?,
                step_size: f.parse("step_size")?,
                g_norm: f.parse("g_norm")?,
            };
            f.finish()?;
            Ok(rec)
        })
        .collect()
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRecord>> {
    parse_trace_csv(&std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?)
}

/// Objective values of any trace file, as `(oracle_calls, wall_ns, value)`
/// where `value` is the center objective (bundle) or best-so-far (SGM).
pub fn read_series(path: &Path) -> Result<Vec<(usize, u64, f64)>> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    if text.starts_with(SGM_HEADER) {
        Ok(parse_sgm_csv(&text)?
            .iter()
            .map(|r| (r.oracle_calls, r.wall_ns, r.f_best))
            .collect())
    } else {
        Ok(parse_trace_csv(&text)?
            .iter()
            .map(|r| (r.oracle_calls, r.wall_ns, r.center_value()))
            .collect())
    }
}

/// The CSV with the `wall_ns` column blanked, for determinism checks.
pub fn without_wall_clock(csv: &str) -> String {
    let mut out = String::with_capacity(csv.len());
    for line in csv.lines() {
        for (i, field) in line.split(',').enumerate() {
            if i > 0 {
                out.push(',');
            }
            if i != 2 {
                out.push_str(field);
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(iter: usize) -> TraceRecord {
        TraceRecord {
            iter,
            oracle_calls: iter + 1,
            wall_ns: 12345,
            step_type: StepType::Null,
            f_x: 0.1 + 0.2,
            f_z: std::f64::consts::PI,
            model_pred: -1e-300,
            delta_tilde: 5e-324,
            kappa: 0.0,
            rho: 1.0 / 3.0,
            d_norm: 1e17,
            g_norm: 2.0f64.sqrt(),
        }
    }

    #[test]
    fn empty_trace_is_header_only() {
        assert_eq!(format_trace_csv(&[]), format!("{TRACE_HEADER}\n"));
    }

    #[test]
    fn one_record_two_lines() {
        let text = format_trace_csv(&[record(0)]);
        assert_eq!(text.lines().count(), 2);
        assert!(!text.contains('\r'));
        let line = text.lines().nth(1).unwrap();
        assert!(line.starts_with("0,1,12345,null,3.0000000000000004e-1,"));
    }

    #[test]
    fn roundtrip_is_exact() {
        let recs: Vec<_> = (0..5).map(record).collect();
        let back = parse_trace_csv(&format_trace_csv(&recs)).unwrap();
        assert_eq!(back, recs);
        for (a, b) in back.iter().zip(&recs) {
            assert_eq!(a.delta_tilde.to_bits(), b.delta_tilde.to_bits());
        }
    }

    #[test]
    fn sgm_roundtrip() {
        let recs = vec![SgmRecord {
            iter: 3,
            oracle_calls: 4,
            wall_ns: 9,
            f_x: 1.5,
            f_best: 1.25,
            step_size: 0.95f64.powi(3) * 2.0,
            g_norm: 0.7,
        }];
        assert_eq!(parse_sgm_csv(&format_sgm_csv(&recs)).unwrap(), recs);
    }

    #[test]
    fn malformed_rows() {
        assert!(parse_trace_csv("iter,oops\n").is_err());
        let mut text = format_trace_csv(&[record(0)]);
        text.push_str("1,2,3,null,1.0\n");
        assert!(matches!(parse_trace_csv(&text), Err(BenchError::MalformedTrace(_))));
        let bad = format_trace_csv(&[record(0)]).replace("null", "sideways");
        assert!(parse_trace_csv(&bad).is_err());
    }

    #[test]
    fn wall_clock_column_removed() {
        let a = format_trace_csv(&[record(0)]);
        let mut r = record(0);
        r.wall_ns = 999;
        let b = format_trace_csv(&[r]);
        assert_ne!(a, b);
        assert_eq!(without_wall_clock(&a), without_wall_clock(&b));
    }
}
