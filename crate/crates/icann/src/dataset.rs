//! Stress–time series on disk: `name.csv` with header `t,C11,S11` (seconds,
//! dimensionless, kPa) and a `name.meta` sidecar of `key = value` lines
//! (`protocol`, optional `rate` and `c11_max`).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use icann_core::{Dataset, LoadPath, Protocol};

use crate::error::{CliError, Result};

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta")
}

/// Flat `key = value` text; later keys may not repeat earlier ones.
pub fn parse_key_values(text: &str, path: &Path) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::format(path, format!("line {}: expected `key = value`, got `{line}`", i + 1)))?;
        let k = k.trim().to_string();
        if map.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::format(path, format!("line {}: duplicate key {k}", i + 1)));
        }
    }
    Ok(map)
}

pub struct Series {
    pub t: Vec<f64>,
    pub c11: Vec<f64>,
    pub s11: Vec<f64>,
}

/// Parses the CSV body. Line numbers in errors count the header as line 1.
pub fn parse_csv<R: std::io::Read>(reader: R, path: &Path) -> Result<Series> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| CliError::format(path, e.to_string()))?
        .clone();
    if header.iter().collect::<Vec<_>>() != ["t", "C11", "S11"] {
        return Err(CliError::format(
            path,
            format!(
                "line 1: expected header `t,C11,S11`, got `{}`",
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let mut s = Series {
        t: Vec::new(),
        c11: Vec::new(),
        s11: Vec::new(),
    };
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let bad = |msg: String| CliError::format(path, format!("line {line}: {msg}"));
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let mut vals = [0.0; 3];
        for (k, (field, col)) in rec.iter().zip(["t", "C11", "S11"]).enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| bad(format!("{col} `{field}` is not a number")))?;
            if !v.is_finite() {
                return Err(bad(format!("{col} is not finite")));
            }
            vals[k] = v;
        }
        let [t, c11, s11] = vals;
        if c11 <= 0.0 {
            return Err(bad(format!("C11 = {c11} must be positive")));
        }
        if let Some(&prev) = s.t.last() {
            if t <= prev {
                return Err(bad(format!("time {t} does not increase past {prev}")));
            }
        }
        s.t.push(t);
        s.c11.push(c11);
        s.s11.push(s11);
    }
    if s.t.len() < 2 {
        return Err(CliError::format(path, "need at least two rows"));
    }
    Ok(s)
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn read(path: &Path) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let meta_path = sidecar_path(path);
    let meta_text = std::fs::read_to_string(&meta_path).map_err(|e| CliError::io(&meta_path, e))?;
    let meta = parse_key_values(&meta_text, &meta_path)?;
    let protocol: Protocol = meta
        .get("protocol")
        .ok_or_else(|| CliError::format(&meta_path, "missing key `protocol`"))?
        .parse()
        .map_err(|e: icann_core::Error| CliError::format(&meta_path, e.to_string()))?;
    let num = |key: &str| -> Result<Option<f64>> {
        meta.get(key)
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| CliError::format(&meta_path, format!("{key} `{v}` is not a finite number")))
            })
            .transpose()
    };
    let rate = num("rate")?;
    let c11_max = num("c11_max")?;
    let s = parse_csv(file, path)?;
    let load = LoadPath::new(protocol, s.t, s.c11).map_err(|e| CliError::model(path.display().to_string(), e))?;
    let mut d =
        Dataset::new(dataset_name(path), load, s.s11).map_err(|e| CliError::model(path.display().to_string(), e))?;
    d.rate = rate;
    if let Some(m) = c11_max {
        d.c11_max = m;
    }
    Ok(d)
}

pub fn write(path: &Path, d: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    w.write_record(["t", "C11", "S11"]).map_err(|e| csv_io(path, e))?;
    for ((t, c), s) in d.path.times().iter().zip(d.path.c11()).zip(&d.s11) {
        w.write_record([format!("{t:?}"), format!("{c:?}"), format!("{s:?}")])
            .map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    let mut meta = format!("protocol = {}\nc11_max = {:?}\n", d.path.protocol, d.c11_max);
    if let Some(r) = d.rate {
        meta.push_str(&format!("rate = {r:?}\n"));
    }
    let meta_path = sidecar_path(path);
    std::fs::write(&meta_path, meta).map_err(|e| CliError::io(&meta_path, e))
}

pub(crate) fn csv_io(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::format(path, format!("{other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Series> {
        parse_csv(text.as_bytes(), Path::new("d.csv"))
    }

    #[test]
    fn accepts_well_formed_rows() {
        let s = parse("t,C11,S11\n0,1,0\n0.5, 1.2 ,3.5\n").unwrap();
        assert_eq!(s.c11, [1.0, 1.2]);
        assert_eq!(s.s11, [0.0, 3.5]);
    }

    #[test]
    fn errors_name_the_row() {
        let msg = |t: &str| parse(t).err().unwrap().to_string();
        assert!(msg("t,C11,S11\n0,1,0\n1,1,0\n1,1,0\n").contains("line 4"));
        assert!(msg("t,C11,S11\n0,1,0\n1,NaN,0\n").contains("line 3"));
        assert!(msg("t,C11,S11\n0,1,0\n1,1,inf\n").contains("line 3: S11"));
        assert!(msg("t,C11,S11\n0,1,0\n1,-1,0\n").contains("line 3: C11"));
        assert!(msg("t,C11,S11\n0,1,0\n1,x,0\n").contains("line 3"));
        assert!(msg("time,C11,S11\n0,1,0\n").contains("line 1"));
        assert!(msg("t,C11,S11\n0,1,0\n").contains("two rows"));
    }
}
