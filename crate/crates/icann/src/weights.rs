//! Weight files: one `name = value` line per weight, `#` comments allowed.
//!
//! Values are written with Rust's shortest round-trip formatting, so a file
//! read back yields bit-identical weights.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use icann_core::{PotentialVariant, Topology, ViscoSolid};

use crate::error::{CliError, Result};

pub fn to_string(model: &ViscoSolid) -> String {
    let top = model.topology();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# branches = {}, potential = {}, equilibrium = {}",
        top.branches,
        potential_name(top.potential),
        top.equilibrium
    );
    for (name, w) in top.names().iter().zip(model.to_vec()) {
        let _ = writeln!(out, "{name} = {w:?}");
    }
    out
}

pub fn potential_name(v: PotentialVariant) -> &'static str {
    match v {
        PotentialVariant::Full => "full",
        PotentialVariant::Reduced => "reduced",
    }
}

pub fn parse_potential(s: &str) -> Option<PotentialVariant> {
    match s {
        "full" => Some(PotentialVariant::Full),
        "reduced" => Some(PotentialVariant::Reduced),
        _ => None,
    }
}

fn parse_entries(text: &str, path: &Path) -> Result<BTreeMap<String, f64>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| CliError::format(path, format!("line {}: {msg}", i + 1));
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("expected `name = value`, got `{line}`")))?;
        let k = k.trim();
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| bad(format!("`{}` is not a number", v.trim())))?;
        if !v.is_finite() {
            return Err(bad(format!("{k} is not finite")));
        }
        if map.insert(k.to_string(), v).is_some() {
            return Err(bad(format!("duplicate weight {k}")));
        }
    }
    Ok(map)
}

/// The topology sharing the most names with the file's keys.
pub fn infer_topology(keys: &BTreeMap<String, f64>) -> Option<Topology> {
    let branches = (1..)
        .take_while(|b| keys.keys().any(|k| k.starts_with(&format!("branch{b}."))))
        .count();
    if branches == 0 {
        return None;
    }
    let equilibrium = keys.keys().any(|k| k.starts_with("eq."));
    [PotentialVariant::Reduced, PotentialVariant::Full]
        .into_iter()
        .map(|potential| Topology {
            branches,
            potential,
            equilibrium,
        })
        .max_by_key(|t| t.names().iter().filter(|n| keys.contains_key(*n)).count())
}

/// Parses weights for `top`, or for the topology implied by the keys.
pub fn from_str(text: &str, top: Option<Topology>, path: &Path) -> Result<ViscoSolid> {
    let map = parse_entries(text, path)?;
    let top = match top {
        Some(t) => t,
        None => infer_topology(&map).ok_or_else(|| CliError::format(path, "no `branchN.` weights found"))?,
    };
    let names = top.names();
    let missing: Vec<&str> = names
        .iter()
        .filter(|n| !map.contains_key(*n))
        .map(String::as_str)
        .collect();
    if !missing.is_empty() {
        return Err(CliError::format(
            path,
            format!("missing weights: {}", missing.join(", ")),
        ));
    }
    let unknown: Vec<&str> = map.keys().filter(|k| !names.contains(k)).map(String::as_str).collect();
    if !unknown.is_empty() {
        return Err(CliError::format(
            path,
            format!("unknown weights: {}", unknown.join(", ")),
        ));
    }
    let w: Vec<f64> = names.iter().map(|n| map[n]).collect();
    ViscoSolid::from_slice(top, &w).map_err(|e| CliError::model(path.display().to_string(), e))
}

pub fn read(path: &Path, top: Option<Topology>) -> Result<ViscoSolid> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    from_str(&text, top, path)
}

pub fn write(path: &Path, model: &ViscoSolid) -> Result<()> {
    std::fs::write(path, to_string(model)).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use icann_core::presets::Preset;

    #[test]
    fn presets_round_trip_bitwise() {
        for p in Preset::ALL {
            let m = p.solid();
            let back = from_str(&to_string(&m), None, Path::new("x")).unwrap();
            assert_eq!(back.topology(), m.topology());
            let (a, b) = (m.to_vec(), back.to_vec());
            assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn awkward_values_round_trip() {
        let top = Topology::MAXWELL;
        let w: Vec<f64> = (0..top.len())
            .map(|k| {
                [
                    0.1,
                    1.0 / 3.0,
                    5e-324,
                    1.7976931348623157e308,
                    -0.0,
                    2.220446049250313e-16,
                ][k % 6]
            })
            .collect();
        let m = ViscoSolid::from_slice(top, &w).unwrap();
        let back = from_str(&to_string(&m), Some(top), Path::new("x")).unwrap();
        assert!(back.to_vec().iter().zip(&w).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn missing_keys_are_listed() {
        let text = to_string(&Preset::Artificial.solid())
            .lines()
            .filter(|l| !l.starts_with("branch1.g.w2_4") && !l.starts_with("branch1.psi.w3_2"))
            .collect::<Vec<_>>()
            .join("\n");
        let err = from_str(&text, Some(Topology::MAXWELL), Path::new("w.txt")).unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("branch1.psi.w3_2") && msg.contains("branch1.g.w2_4"),
            "{msg}"
        );
        assert_eq!(err.exit_code(), 5);
    }

    #[test]
    fn rejects_garbage() {
        let p = Path::new("w");
        assert!(from_str("branch1.psi.w1_1 = abc", None, p).is_err());
        assert!(from_str("branch1.psi.w1_1 = inf", None, p).is_err());
        assert!(from_str("a = 1\na = 2", None, p)
            .unwrap_err()
            .to_string()
            .contains("line 2"));
        assert!(from_str("extra = 1", Some(Topology::MAXWELL), p).is_err());
    }
}
