//! Run configuration: a flat `key = value` file merged with command-line
//! overrides, validated before any work starts.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use pnstencil_core::pn::Dim;
use pnstencil_core::problems::{make_problem, Boundary, Grid, ProblemSpec, PROBLEMS};
use pnstencil_core::ShIndex;

use crate::CliError;

/// Highest P_N order accepted from a config.
pub const MAX_ORDER: i32 = 15;

pub const RUN_KEYS: [&str; 15] = [
    "problem",
    "spec",
    "equations",
    "order",
    "dim",
    "res",
    "bc",
    "floor",
    "tol",
    "max_iter",
    "jacobi",
    "out",
    "seed",
    "dump_equations",
    "dump_stencil",
];

const SPEC_KEYS: [&str; 10] = [
    "name", "dim", "res", "extent", "sigma_t", "sigma_s", "albedo", "source", "power", "bc",
];

#[derive(Clone, Debug, PartialEq)]
pub enum ProblemSource {
    Named(String),
    File(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EquationChoice {
    Pn,
    Diffusion,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub source: ProblemSource,
    pub equations: EquationChoice,
    /// `None` for the diffusion equation.
    pub order: Option<i32>,
    pub dim: Option<Dim>,
    pub res: Option<usize>,
    pub bc: Option<Boundary>,
    pub floor: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub jacobi: bool,
    pub out: PathBuf,
    pub seed: u64,
    pub dump_equations: bool,
    pub dump_stencil: bool,
}

/// Reads `key = value` lines. `#` starts a comment; blank lines are skipped.
pub fn read_pairs(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_pairs(&text).map_err(|msg| CliError::Config(format!("{}: {msg}", path.display())))
}

pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", n + 1))?;
        let (k, v) = (normalize_key(k), v.trim().to_string());
        if k.is_empty() {
            return Err(format!("line {}: empty key", n + 1));
        }
        out.push((k, v));
    }
    Ok(out)
}

fn normalize_key(k: &str) -> String {
    k.trim().replace('-', "_")
}

fn collect(
    pairs: &[(String, String)],
    known: &[&str],
    what: &str,
) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (k, v) in pairs {
        let k = normalize_key(k);
        if !known.contains(&k.as_str()) {
            return Err(CliError::Config(format!("unknown {what} key '{k}'")));
        }
        map.insert(k, v.clone());
    }
    Ok(map)
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse()
        .map_err(|_| CliError::Config(format!("{key}: cannot parse '{v}'")))
}

fn positive(key: &str, v: &str) -> Result<f64, CliError> {
    let x: f64 = num(key, v)?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Config(format!("{key} must be positive, got {v}")))
    }
}

fn flag(key: &str, v: &str) -> Result<bool, CliError> {
    match v {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(CliError::Config(format!("{key}: expected true or false, got '{v}'"))),
    }
}

fn parse_dim(v: &str) -> Result<Dim, CliError> {
    match v {
        "2" => Ok(Dim::Two),
        "3" => Ok(Dim::Three),
        _ => Err(CliError::Config(format!("dim must be 2 or 3, got '{v}'"))),
    }
}

fn parse_bc(v: &str) -> Result<Boundary, CliError> {
    v.parse::<Boundary>().map_err(|e| CliError::Config(e.to_string()))
}

impl RunConfig {
    /// Later pairs override earlier ones, so pass file pairs before flags.
    pub fn from_pairs(pairs: &[(String, String)]) -> Result<Self, CliError> {
        let map = collect(pairs, &RUN_KEYS, "config")?;
        let get = |k: &str| map.get(k).map(String::as_str);

        let source = match (get("problem"), get("spec")) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config("give either problem or spec, not both".into()))
            }
            (Some(p), None) => {
                if !PROBLEMS.contains(&p) {
                    return Err(CliError::Config(format!(
                        "unknown problem '{p}' (expected one of {})",
                        PROBLEMS.join(", ")
                    )));
                }
                ProblemSource::Named(p.to_string())
            }
            (None, Some(s)) => ProblemSource::File(PathBuf::from(s)),
            (None, None) => return Err(CliError::Config("no problem or spec given".into())),
        };
        let equations = match get("equations").unwrap_or("pn") {
            "pn" => EquationChoice::Pn,
            "cda" | "diffusion" => EquationChoice::Diffusion,
            other => {
                return Err(CliError::Config(format!("equations must be pn or cda, got '{other}'")))
            }
        };
        let order = match (equations, get("order")) {
            (EquationChoice::Diffusion, Some(_)) => {
                return Err(CliError::Config("order does not apply to the diffusion equation".into()))
            }
            (EquationChoice::Diffusion, None) => None,
            (EquationChoice::Pn, v) => {
                let n: i32 = num("order", v.unwrap_or("1"))?;
                if !(1..=MAX_ORDER).contains(&n) {
                    return Err(CliError::Config(format!("order must be in 1..={MAX_ORDER}, got {n}")));
                }
                Some(n)
            }
        };
        let res = get("res")
            .map(|v| {
                let r: usize = num("res", v)?;
                if r == 0 {
                    return Err(CliError::Config("res must be at least 1".into()));
                }
                Ok(r)
            })
            .transpose()?;
        let floor = get("floor")
            .map(|v| {
                let f: f64 = num("floor", v)?;
                if f >= 0.0 && f.is_finite() {
                    Ok(f)
                } else {
                    Err(CliError::Config(format!("floor must be non-negative, got {v}")))
                }
            })
            .transpose()?;
        let tol = positive("tol", get("tol").unwrap_or("1e-8"))?;
        if tol >= 1.0 {
            return Err(CliError::Config(format!("tol must be below 1, got {tol}")));
        }
        let max_iter: usize = num("max_iter", get("max_iter").unwrap_or("20000"))?;
        if max_iter == 0 {
            return Err(CliError::Config("max_iter must be at least 1".into()));
        }
        Ok(Self {
            source,
            equations,
            order,
            dim: get("dim").map(parse_dim).transpose()?,
            res,
            bc: get("bc").map(parse_bc).transpose()?,
            floor,
            tol,
            max_iter,
            jacobi: get("jacobi").map(|v| flag("jacobi", v)).transpose()?.unwrap_or(false),
            out: PathBuf::from(get("out").unwrap_or("out")),
            seed: num("seed", get("seed").unwrap_or("0"))?,
            dump_equations: get("dump_equations")
                .map(|v| flag("dump_equations", v))
                .transpose()?
                .unwrap_or(false),
            dump_stencil: get("dump_stencil")
                .map(|v| flag("dump_stencil", v))
                .transpose()?
                .unwrap_or(false),
        })
    }

    /// Builds the problem with every override applied and checks it
    /// against the requested dimension.
    pub fn problem(&self) -> Result<ProblemSpec, CliError> {
        let mut spec = match &self.source {
            ProblemSource::Named(name) => make_problem(name, self.res, self.seed)?,
            ProblemSource::File(path) => load_problem_file(path, self.res, self.dim)?,
        };
        if let Some(dim) = self.dim {
            if dim != spec.grid.dim {
                return Err(CliError::Config(format!(
                    "problem '{}' is {}D but dim {} was requested",
                    spec.name,
                    spec.grid.dim.count(),
                    dim.count()
                )));
            }
        }
        if let Some(bc) = self.bc {
            spec.bc = bc;
        }
        if let Some(tau) = self.floor {
            spec = pnstencil_core::problems::floor_sigma_t(&spec, tau);
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// Homogeneous box described by a `key = value` file:
///
/// ```text
/// name = slab          # optional
/// dim = 3              # 2 or 3, default 3
/// res = 24             # voxels per axis
/// extent = 1.0         # edge length of the domain
/// sigma_t = 4
/// albedo = 0.75        # or sigma_s = 3
/// source = center      # center, uniform or none
/// power = 1            # total emitted power
/// bc = neumann         # default dirichlet
/// ```
pub fn load_problem_file(
    path: &Path,
    res_override: Option<usize>,
    dim_override: Option<Dim>,
) -> Result<ProblemSpec, CliError> {
    let pairs = read_pairs(path)?;
    let map = collect(&pairs, &SPEC_KEYS, "problem")?;
    let get = |k: &str| map.get(k).map(String::as_str);
    let bad = |msg: String| CliError::Config(format!("{}: {msg}", path.display()));

    let dim = match get("dim") {
        Some(v) => parse_dim(v)?,
        None => dim_override.unwrap_or(Dim::Three),
    };
    let res = match (res_override, get("res")) {
        (Some(r), _) => r,
        (None, Some(v)) => num("res", v)?,
        (None, None) => return Err(bad("res is required".into())),
    };
    if res == 0 {
        return Err(bad("res must be at least 1".into()));
    }
    let extent = positive("extent", get("extent").unwrap_or("1"))?;
    let sigma_t: f64 = num("sigma_t", get("sigma_t").ok_or_else(|| bad("sigma_t is required".into()))?)?;
    let sigma_s = match (get("sigma_s"), get("albedo")) {
        (Some(_), Some(_)) => return Err(bad("give sigma_s or albedo, not both".into())),
        (Some(v), None) => num("sigma_s", v)?,
        (None, Some(v)) => num::<f64>("albedo", v)? * sigma_t,
        (None, None) => 0.0,
    };
    let grid = Grid::new(dim, res, extent);
    let mut spec = ProblemSpec::homogeneous(get("name").unwrap_or("custom"), grid, sigma_t, sigma_s);
    if let Some(bc) = get("bc") {
        spec.bc = parse_bc(bc)?;
    }
    let power: f64 = num("power", get("power").unwrap_or("1"))?;
    let dv = grid.h.powi(dim.count() as i32);
    let s = (4.0 * PI).sqrt();
    match get("source").unwrap_or("center") {
        "none" => {}
        "center" => {
            let c = spec.center_voxel();
            spec.emission_mut(ShIndex { l: 0, m: 0 })[grid.index(c)] = power / (dv * s);
        }
        "uniform" => {
            let q = power / (grid.voxels() as f64 * dv * s);
            spec.emission_mut(ShIndex { l: 0, m: 0 }).fill(q);
        }
        other => return Err(bad(format!("source must be center, uniform or none, got '{other}'"))),
    }
    spec.validate()?;
    Ok(spec)
}
