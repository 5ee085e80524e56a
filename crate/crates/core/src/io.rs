//! File formats: path files, code files, JSON metadata sidecars, and the
//! deterministic numeric formatting shared by every CSV writer.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::path_model::{BinaryCode, PiecewiseLinearPath};
use crate::sampler::Seed;
use crate::{Error, Result};

/// 17 significant digits: enough to round-trip any f64, locale-free.
pub fn format_sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a path file: header `t,value`, one comma-separated pair per line,
/// times strictly increasing starting at `0,0`. Numbers use the shortest
/// representation that round-trips exactly.
pub fn write_path_file(path: &PiecewiseLinearPath, file: &Path) -> Result<()> {
    let mut out = String::from("t,value\n");
    for i in 0..path.num_points() {
        out.push_str(&format!("{},{}\n", path.breakpoint(i), path.values()[i]));
    }
    fs::write(file, out)?;
    Ok(())
}

/// Reads a path file written by `write_path_file` (or any file in the same
/// format). Uniform grids are detected so dyadic fast paths survive a
/// round trip through disk.
pub fn read_path_file(file: &Path) -> Result<PiecewiseLinearPath> {
    let text = fs::read_to_string(file)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header.trim() == "t,value" => {}
        other => {
            return Err(Error::InvalidPath(format!(
                "expected header `t,value`, got {other:?}"
            )))
        }
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (t, v) = line.split_once(',').ok_or_else(|| {
            Error::InvalidPath(format!("line {}: expected `t,value`", idx + 2))
        })?;
        let t: f64 = t
            .trim()
            .parse()
            .map_err(|_| Error::InvalidPath(format!("line {}: bad time {t:?}", idx + 2)))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidPath(format!("line {}: bad value {v:?}", idx + 2)))?;
        times.push(t);
        values.push(v);
    }
    if times.len() >= 2 {
        let n = times.len() - 1;
        let uniform = times
            .iter()
            .enumerate()
            .all(|(i, t)| *t == i as f64 / n as f64);
        if uniform {
            return PiecewiseLinearPath::from_uniform_values(values);
        }
    }
    PiecewiseLinearPath::from_breakpoints(times, values)
}

/// Writes a code file: a single line of 0/1 characters.
pub fn write_code_file(code: &BinaryCode, file: &Path) -> Result<()> {
    fs::write(file, format!("{code}\n"))?;
    Ok(())
}

pub fn read_code_file(file: &Path) -> Result<BinaryCode> {
    BinaryCode::parse(&fs::read_to_string(file)?)
}

/// JSON sidecar written next to generated artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GeneratedMetadata {
    pub seed: Seed,
    pub generator: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_level: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub codec_name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complexity_ratio: Option<f64>,
}

pub fn write_json<T: Serialize>(value: &T, file: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serialization cannot fail");
    text.push('\n');
    fs::write(file, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{random_brownian, random_code};

    #[test]
    fn sig17_round_trips() {
        for x in [0.0, 1.0 / 3.0, -2.5e-17, 0.1 + 0.2, f64::MIN_POSITIVE] {
            let s = format_sig17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn path_file_round_trip_preserves_grid_kind() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("p.csv");
        let path = random_brownian(6, Seed(1))
            .unwrap()
            .partial_sum(6)
            .unwrap();
        write_path_file(&path, &file).unwrap();
        let text = std::fs::read_to_string(&file).unwrap();
        assert!(text.starts_with("t,value\n0,0\n"));
        let back = read_path_file(&file).unwrap();
        assert_eq!(back, path);
        assert_eq!(back.dyadic_level(), Some(7));
    }

    #[test]
    fn code_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("c.txt");
        let code = random_code(77, Seed(3)).unwrap();
        write_code_file(&code, &file).unwrap();
        assert_eq!(read_code_file(&file).unwrap(), code);
    }

    #[test]
    fn malformed_path_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("bad.csv");
        std::fs::write(&file, "time,val\n0,0\n1,1\n").unwrap();
        assert!(read_path_file(&file).is_err());
        std::fs::write(&file, "t,value\n0,0.5\n1,1\n").unwrap();
        assert!(read_path_file(&file).is_err());
    }
}
