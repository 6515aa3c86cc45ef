//! Artifact files and their readers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use pnstencil_core::pn::Dim;
use pnstencil_core::solver::{SolutionField, SolveReport};

use crate::CliError;

pub const FIELD_MAGIC: &str = "PNFLD1";

/// Collocated SH coefficients, voxel-major (x fastest) and unknown-minor.
///
/// On disk: six text lines
///
/// ```text
/// PNFLD1
/// dim 3
/// resolution 32 32 32
/// unknowns 4
/// order 1
/// little_endian 1
/// ```
///
/// followed by `voxels * unknowns` raw f64 values in little-endian order.
/// 2D fields have a z resolution of 1. The diffusion equation is written
/// with order 0.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldFile {
    pub dim: Dim,
    pub res: [usize; 3],
    pub unknowns: usize,
    pub order: i32,
    pub data: Vec<f64>,
}

impl FieldFile {
    pub fn from_field(f: &SolutionField) -> Self {
        Self {
            dim: f.grid.dim,
            res: f.grid.res,
            unknowns: f.unknown_count(),
            order: f.order,
            data: f.data.clone(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = format!(
            "{FIELD_MAGIC}\ndim {}\nresolution {} {} {}\nunknowns {}\norder {}\nlittle_endian 1\n",
            self.dim.count(),
            self.res[0],
            self.res[1],
            self.res[2],
            self.unknowns,
            self.order
        );
        let mut out = header.into_bytes();
        out.reserve(self.data.len() * 8);
        for x in &self.data {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, String> {
        let mut rest = bytes;
        let mut lines = Vec::new();
        for _ in 0..6 {
            let end = rest
                .iter()
                .position(|&b| b == b'\n')
                .ok_or("truncated header")?;
            let line = std::str::from_utf8(&rest[..end]).map_err(|_| "header is not text")?;
            lines.push(line.to_string());
            rest = &rest[end + 1..];
        }
        if lines[0] != FIELD_MAGIC {
            return Err(format!("bad magic '{}'", lines[0]));
        }
        let field = |i: usize, key: &str| -> Result<Vec<String>, String> {
            let mut it = lines[i].split_whitespace();
            if it.next() != Some(key) {
                return Err(format!("expected '{key}' on header line {}", i + 1));
            }
            Ok(it.map(str::to_string).collect())
        };
        let one = |i: usize, key: &str| -> Result<String, String> {
            let v = field(i, key)?;
            match v.as_slice() {
                [x] => Ok(x.clone()),
                _ => Err(format!("'{key}' takes one value")),
            }
        };
        let dim = match one(1, "dim")?.as_str() {
            "2" => Dim::Two,
            "3" => Dim::Three,
            d => return Err(format!("bad dim {d}")),
        };
        let r = field(2, "resolution")?;
        if r.len() != 3 {
            return Err("resolution takes three values".into());
        }
        let mut res = [0usize; 3];
        for (o, s) in res.iter_mut().zip(&r) {
            *o = s.parse().map_err(|_| format!("bad resolution '{s}'"))?;
        }
        let unknowns: usize = one(3, "unknowns")?.parse().map_err(|_| "bad unknown count")?;
        let order: i32 = one(4, "order")?.parse().map_err(|_| "bad order")?;
        if one(5, "little_endian")? != "1" {
            return Err("only little-endian data is supported".into());
        }
        let n = res.iter().product::<usize>() * unknowns;
        if rest.len() != n * 8 {
            return Err(format!("expected {} data bytes, found {}", n * 8, rest.len()));
        }
        let data = rest
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Self {
            dim,
            res,
            unknowns,
            order,
            data,
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, self.to_bytes()).map_err(CliError::io(path))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let bytes = fs::read(path).map_err(CliError::io(path))?;
        Self::from_bytes(&bytes).map_err(|msg| CliError::Format {
            path: path.into(),
            msg,
        })
    }
}

/// Radial samples with an optional standard error (zero for deterministic
/// solves). CSV columns `r,value,stderr`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Profile {
    pub r: Vec<f64>,
    pub value: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl Profile {
    pub fn from_samples(samples: &[(f64, f64)]) -> Self {
        Self {
            r: samples.iter().map(|s| s.0).collect(),
            value: samples.iter().map(|s| s.1).collect(),
            stderr: vec![0.0; samples.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Numbers use Rust's shortest round-trip exponent form.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,value,stderr\n");
        for k in 0..self.len() {
            writeln!(s, "{:e},{:e},{:e}", self.r[k], self.value[k], self.stderr[k]).unwrap();
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self, String> {
        let mut lines = text.lines();
        match lines.next().map(str::trim) {
            Some("r,value,stderr") | Some("r,value") => {}
            other => return Err(format!("unexpected header {other:?}")),
        }
        let mut p = Profile::default();
        for (n, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if !(2..=3).contains(&cols.len()) {
                return Err(format!("line {}: expected 2 or 3 columns", n + 2));
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("line {}: bad number '{s}'", n + 2))
            };
            p.r.push(parse(cols[0])?);
            p.value.push(parse(cols[1])?);
            p.stderr.push(match cols.get(2) {
                Some(s) if !s.trim().is_empty() => parse(s)?,
                _ => 0.0,
            });
        }
        Ok(p)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, self.to_csv()).map_err(CliError::io(path))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(CliError::io(path))?;
        Self::from_csv(&text).map_err(|msg| CliError::Format {
            path: path.into(),
            msg,
        })
    }
}

/// Solve log: `key value` lines, then `iter normal primal` and one line per
/// iteration.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveLog {
    pub entries: Vec<(String, String)>,
    /// `(normal, primal)` relative residuals per iteration.
    pub history: Vec<(f64, f64)>,
}

impl SolveLog {
    /// `extra` lines go before the solver summary.
    pub fn render(extra: &[(&str, String)], report: &SolveReport) -> String {
        let mut s = String::new();
        for (k, v) in extra {
            writeln!(s, "{k} {v}").unwrap();
        }
        s + &report.to_log()
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut log = SolveLog::default();
        let mut in_history = false;
        for line in text.lines() {
            if line == "iter normal primal" {
                in_history = true;
                continue;
            }
            if in_history {
                let cols: Vec<&str> = line.split_whitespace().collect();
                let [k, n, p] = cols.as_slice() else {
                    return Err(format!("bad history line '{line}'"));
                };
                if k.parse::<usize>().ok() != Some(log.history.len()) {
                    return Err(format!("history out of sequence at '{line}'"));
                }
                let f = |s: &str| s.parse::<f64>().map_err(|_| format!("bad number '{s}'"));
                log.history.push((f(n)?, f(p)?));
            } else {
                let (k, v) = line.split_once(' ').ok_or_else(|| format!("bad line '{line}'"))?;
                log.entries.push((k.to_string(), v.to_string()));
            }
        }
        Ok(log)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(CliError::io(path))?;
        Self::parse(&text).map_err(|msg| CliError::Format {
            path: path.into(),
            msg,
        })
    }
}
