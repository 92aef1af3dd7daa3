//! Convergence tables and residual profiles: CSV and JSON encoding and decoding.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::ResidualProfile;

pub const TABLE_HEADER: [&str; 16] = [
    "level", "M", "h", "dt", "N", "p", "error", "R_st", "R_stoch", "E0_st", "E0_stoch", "bound", "exp_factor",
    "eoc_error", "eoc_R_st", "wall_time",
];

pub const PROFILE_HEADER: [&str; 4] = ["x", "mode0", "R_st_density", "R_stoch_density"];

/// One level of a convergence study. `R_st`, `R_stoch`, `error` and `bound`
/// are norms; `E0_st` and `E0_stoch` are squared norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub level: usize,
    #[serde(rename = "M")]
    pub elements: usize,
    pub h: f64,
    pub dt: f64,
    #[serde(rename = "N")]
    pub chaos_degree: usize,
    pub p: usize,
    pub error: Option<f64>,
    #[serde(rename = "R_st")]
    pub r_st: f64,
    #[serde(rename = "R_stoch")]
    pub r_stoch: f64,
    #[serde(rename = "E0_st")]
    pub e0_st: f64,
    #[serde(rename = "E0_stoch")]
    pub e0_stoch: f64,
    pub bound: f64,
    pub exp_factor: f64,
    pub eoc_error: Option<f64>,
    #[serde(rename = "eoc_R_st")]
    pub eoc_r_st: Option<f64>,
    pub wall_time: f64,
}

/// `log2(coarse / fine)`; `None` unless both are positive and finite.
pub fn eoc(coarse: f64, fine: f64) -> Option<f64> {
    (coarse > 0.0 && fine > 0.0 && coarse.is_finite() && fine.is_finite()).then(|| (coarse / fine).log2())
}

/// Fills the EOC columns between consecutive rows.
pub fn fill_eoc(rows: &mut [ConvergenceRow]) {
    for i in 0..rows.len() {
        if i == 0 {
            rows[i].eoc_error = None;
            rows[i].eoc_r_st = None;
            continue;
        }
        let (prev, cur) = (rows[i - 1].clone(), &mut rows[i]);
        cur.eoc_error = match (prev.error, cur.error) {
            (Some(a), Some(b)) => eoc(a, b),
            _ => None,
        };
        cur.eoc_r_st = eoc(prev.r_st, cur.r_st);
    }
}

fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f).unwrap_or_default()
}

fn write_csv_records(header: &[&str], records: impl Iterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let table_err = |e: csv::Error| Error::Table(e.to_string());
    w.write_record(header).map_err(table_err)?;
    for r in records {
        w.write_record(&r).map_err(table_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Table(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Table(e.to_string()))
}

pub fn table_to_csv(rows: &[ConvergenceRow]) -> Result<String> {
    write_csv_records(
        &TABLE_HEADER,
        rows.iter().map(|r| {
            vec![
                r.level.to_string(),
                r.elements.to_string(),
                fmt_f(r.h),
                fmt_f(r.dt),
                r.chaos_degree.to_string(),
                r.p.to_string(),
                fmt_opt(r.error),
                fmt_f(r.r_st),
                fmt_f(r.r_stoch),
                fmt_f(r.e0_st),
                fmt_f(r.e0_stoch),
                fmt_f(r.bound),
                fmt_f(r.exp_factor),
                fmt_opt(r.eoc_error),
                fmt_opt(r.eoc_r_st),
                fmt_f(r.wall_time),
            ]
        }),
    )
}

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    if found.iter().ne(expected.iter().copied()) {
        return Err(Error::Table(format!(
            "unexpected header `{}`, expected `{}`",
            found.iter().collect::<Vec<_>>().join(","),
            expected.join(",")
        )));
    }
    Ok(())
}

fn field(rec: &csv::StringRecord, i: usize, line: usize) -> Result<&str> {
    rec.get(i)
        .ok_or_else(|| Error::Table(format!("row {line}: missing column {i}")))
}

fn parse_f(rec: &csv::StringRecord, i: usize, line: usize) -> Result<f64> {
    let s = field(rec, i, line)?;
    s.trim()
        .parse()
        .map_err(|_| Error::Table(format!("row {line}: `{s}` is not a number")))
}

fn parse_opt(rec: &csv::StringRecord, i: usize, line: usize) -> Result<Option<f64>> {
    if field(rec, i, line)?.trim().is_empty() {
        Ok(None)
    } else {
        parse_f(rec, i, line).map(Some)
    }
}

fn parse_u(rec: &csv::StringRecord, i: usize, line: usize) -> Result<usize> {
    let s = field(rec, i, line)?;
    s.trim()
        .parse()
        .map_err(|_| Error::Table(format!("row {line}: `{s}` is not an integer")))
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes())
}

pub fn table_from_csv(text: &str) -> Result<Vec<ConvergenceRow>> {
    let mut rdr = reader(text);
    let header = rdr.headers().map_err(|e| Error::Table(e.to_string()))?.clone();
    check_header(&header, &TABLE_HEADER)?;
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Table(e.to_string()))?;
        let line = line + 2;
        rows.push(ConvergenceRow {
            level: parse_u(&rec, 0, line)?,
            elements: parse_u(&rec, 1, line)?,
            h: parse_f(&rec, 2, line)?,
            dt: parse_f(&rec, 3, line)?,
            chaos_degree: parse_u(&rec, 4, line)?,
            p: parse_u(&rec, 5, line)?,
            error: parse_opt(&rec, 6, line)?,
            r_st: parse_f(&rec, 7, line)?,
            r_stoch: parse_f(&rec, 8, line)?,
            e0_st: parse_f(&rec, 9, line)?,
            e0_stoch: parse_f(&rec, 10, line)?,
            bound: parse_f(&rec, 11, line)?,
            exp_factor: parse_f(&rec, 12, line)?,
            eoc_error: parse_opt(&rec, 13, line)?,
            eoc_r_st: parse_opt(&rec, 14, line)?,
            wall_time: parse_f(&rec, 15, line)?,
        });
    }
    Ok(rows)
}

pub fn table_to_json(rows: &[ConvergenceRow]) -> Result<String> {
    serde_json::to_string_pretty(rows).map_err(|e| Error::Table(e.to_string()))
}

pub fn table_from_json(text: &str) -> Result<Vec<ConvergenceRow>> {
    serde_json::from_str(text).map_err(|e| Error::Table(e.to_string()))
}

pub fn profile_to_csv(profile: &ResidualProfile) -> Result<String> {
    let n = profile.x.len();
    if profile.mode0.len() != n || profile.r_st_density.len() != n || profile.r_stoch_density.len() != n {
        return Err(Error::Table("profile columns have different lengths".into()));
    }
    write_csv_records(
        &PROFILE_HEADER,
        (0..n).map(|i| {
            vec![
                fmt_f(profile.x[i]),
                fmt_f(profile.mode0[i]),
                fmt_f(profile.r_st_density[i]),
                fmt_f(profile.r_stoch_density[i]),
            ]
        }),
    )
}

pub fn profile_from_csv(text: &str) -> Result<ResidualProfile> {
    let mut rdr = reader(text);
    let header = rdr.headers().map_err(|e| Error::Table(e.to_string()))?.clone();
    check_header(&header, &PROFILE_HEADER)?;
    let mut p = ResidualProfile::default();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Table(e.to_string()))?;
        let line = line + 2;
        p.x.push(parse_f(&rec, 0, line)?);
        p.mode0.push(parse_f(&rec, 1, line)?);
        p.r_st_density.push(parse_f(&rec, 2, line)?);
        p.r_stoch_density.push(parse_f(&rec, 3, line)?);
    }
    Ok(p)
}

/// `dir/<stem>_profile.csv` next to `out`.
pub fn profile_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    out.with_file_name(format!("{stem}_profile.csv"))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(level: usize, error: Option<f64>, r_st: f64) -> ConvergenceRow {
        ConvergenceRow {
            level,
            elements: 16 << level,
            h: 0.125 / (1 << level) as f64,
            dt: 0.02 / (1 << level) as f64,
            chaos_degree: 2,
            p: 1,
            error,
            r_st,
            r_stoch: 1e-20,
            e0_st: 0.0,
            e0_stoch: 0.75,
            bound: 0.1,
            exp_factor: 1.0512710963760241,
            eoc_error: None,
            eoc_r_st: None,
            wall_time: 0.25,
        }
    }

    #[test]
    fn eoc_definition() {
        assert_eq!(eoc(4e-3, 1e-3), Some(2.0));
        assert_eq!(eoc(0.0, 1.0), None);
        let mut rows = vec![row(0, Some(4e-3), 0.1), row(1, Some(1e-3), 0.0125)];
        fill_eoc(&mut rows);
        assert_eq!(rows[0].eoc_error, None);
        assert!((rows[1].eoc_error.unwrap() - 2.0).abs() < 1e-15);
        assert!((rows[1].eoc_r_st.unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn empty_table_is_header_only() {
        let csv = table_to_csv(&[]).unwrap();
        assert_eq!(csv.trim_end(), TABLE_HEADER.join(","));
        assert!(table_from_csv(&csv).unwrap().is_empty());
    }

    #[test]
    fn csv_and_json_round_trip() {
        let mut rows = vec![row(0, Some(0.1 + 0.2), 1.0 / 3.0), row(1, None, 2.0f64.sqrt())];
        fill_eoc(&mut rows);
        let csv = table_to_csv(&rows).unwrap();
        assert_eq!(table_from_csv(&csv).unwrap(), rows);
        assert!(csv.lines().nth(2).unwrap().contains(",,"));
        let json = table_to_json(&rows).unwrap();
        assert_eq!(table_from_json(&json).unwrap(), rows);
        assert!(json.contains("\"eoc_R_st\""));
    }

    #[test]
    fn wrong_headers_are_rejected() {
        assert!(table_from_csv("level,M\n0,16\n").is_err());
        let bad = format!("{}\n0,16,x,1,1,1,,1,1,1,1,1,1,,,1\n", TABLE_HEADER.join(","));
        assert!(table_from_csv(&bad).is_err());
        assert!(profile_from_csv("x,mode0\n").is_err());
    }

    #[test]
    fn profile_round_trip_and_path() {
        let p = ResidualProfile {
            x: vec![0.0625, 0.1875],
            mode0: vec![1.0, -2.5],
            r_st_density: vec![1e-3, 7.0],
            r_stoch_density: vec![0.0, 1e-300],
        };
        assert_eq!(profile_from_csv(&profile_to_csv(&p).unwrap()).unwrap(), p);
        assert_eq!(profile_path(Path::new("out/adv.csv")), PathBuf::from("out/adv_profile.csv"));
    }
}
