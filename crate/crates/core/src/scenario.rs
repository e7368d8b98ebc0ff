//! Text format shared by group files and scenario files.
//!
//! One `key = value` entry per line, `#` starts a comment:
//!
//! ```text
//! name = heisenberg1            # inline group ...
//! layer_dims = 2 1
//! brackets = 1 2 3 1            # i j k c: [X_i, X_j] has c on X_k
//! group = heisenberg1           # ... or a catalog name / file path
//! subgroup W = 1 0 0
//! subgroup L = 0 1 0; 0 0 1
//! phi poly: l2 = -w1^2/2        # L-coordinate in w1..wm
//! domain box: -1..2             # repeat for a union of boxes
//! area box: 0..1
//! base_point = 1/2
//! seed = 7
//! tol = 1e-4
//! ladder = 2^-3..2^-12
//! deltas = 0.2 0.1 0.05
//! samples = 10000
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use crate::algebra::StratifiedAlgebra;
use crate::catalog;
use crate::graph::{Domain, GraphFunction};
use crate::group::CarnotGroup;
use crate::linalg::Vector;
use crate::poly::Polynomial;
use crate::scalar::{parse_rational, Rational, Scalar};
use crate::splitting::Splitting;

/// Environment variable naming a directory searched for `<name>.group`
/// before the built-in catalog.
pub const CATALOG_ENV: &str = "CARNOT_CATALOG";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("{file}:{line}: {message}")]
    Parse { file: String, line: usize, message: String },
    #[error("{file}:{line}: {message}")]
    Semantic { file: String, line: usize, message: String },
}

impl ScenarioError {
    pub fn is_parse(&self) -> bool {
        matches!(self, ScenarioError::Parse { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Located<T> {
    value: T,
    line: usize,
}

#[derive(Debug, Clone, PartialEq)]
struct PhiLine {
    coord: usize,
    expr: String,
}

/// A parsed, not yet resolved, scenario or group file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Scenario {
    file: String,
    base_dir: Option<PathBuf>,
    name: Option<Located<String>>,
    layer_dims: Option<Located<Vec<usize>>>,
    brackets: Vec<Located<(usize, usize, usize, Rational)>>,
    norm_weights: Option<Located<Vec<f64>>>,
    group_ref: Option<Located<String>>,
    w_rows: Option<Located<Vec<Vector>>>,
    l_rows: Option<Located<Vec<Vector>>>,
    phi: Vec<Located<PhiLine>>,
    domain: Vec<Located<Vec<(f64, f64)>>>,
    area_box: Option<Located<Vec<(f64, f64)>>>,
    pub base_point: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub ladder: Option<Vec<f64>>,
    pub deltas: Option<Vec<f64>>,
    pub samples: Option<usize>,
    pub lhs_samples: Option<usize>,
    pub ball_samples: Option<usize>,
    pub lambdas: Option<Vec<f64>>,
}

fn parse_err(file: &str, line: usize, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Parse { file: file.to_string(), line, message: message.into() }
}

fn sem_err(file: &str, line: usize, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Semantic { file: file.to_string(), line, message: message.into() }
}

fn numbers(text: &str) -> Vec<&str> {
    text.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).collect()
}

fn parse_f64_token(tok: &str) -> Result<f64, String> {
    match tok {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => parse_rational(tok).map(|r| Scalar::to_f64(&r)).map_err(|e| e.to_string()),
    }
}

fn parse_f64_list(text: &str) -> Result<Vec<f64>, String> {
    numbers(text).into_iter().map(parse_f64_token).collect()
}

/// `lo..hi` pairs separated by whitespace; spaces around `..` are allowed.
fn parse_ranges(text: &str) -> Result<Vec<(f64, f64)>, String> {
    let mut s = text.trim().to_string();
    while s.contains(" ..") || s.contains(".. ") {
        s = s.replace(" ..", "..").replace(".. ", "..");
    }
    s.split_whitespace()
        .map(|tok| {
            let (lo, hi) = tok.split_once("..").ok_or_else(|| format!("expected lo..hi, got `{tok}`"))?;
            Ok((parse_f64_token(lo)?, parse_f64_token(hi)?))
        })
        .collect()
}

/// Rational row vectors separated by `;`.
fn parse_rows(text: &str) -> Result<Vec<Vector>, String> {
    text.split(';')
        .map(str::trim)
        .filter(|r| !r.is_empty())
        .map(|r| numbers(r).into_iter().map(|t| parse_rational(t).map_err(|e| e.to_string())).collect())
        .collect()
}

/// A scale ladder: `2^-3..2^-12` (every integer exponent in between) or
/// an explicit list of numbers.
pub fn parse_ladder(text: &str) -> Result<Vec<f64>, String> {
    let text = text.trim();
    if let Some((a, b)) = text.split_once("..") {
        let pow = |s: &str| -> Result<(f64, i32), String> {
            let (base, exp) = s.trim().split_once('^').ok_or_else(|| format!("expected base^exp, got `{s}`"))?;
            let base = parse_f64_token(base.trim())?;
            let exp: i32 = exp.trim().parse().map_err(|_| format!("bad exponent in `{s}`"))?;
            Ok((base, exp))
        };
        let (b1, e1) = pow(a)?;
        let (b2, e2) = pow(b)?;
        if b1 != b2 || !(b1 > 0.0) {
            return Err("ladder endpoints need the same positive base".into());
        }
        let step = if e2 >= e1 { 1 } else { -1 };
        let mut out = Vec::new();
        let mut e = e1;
        loop {
            out.push(b1.powi(e));
            if e == e2 {
                break;
            }
            e += step;
        }
        Ok(out)
    } else {
        let v = parse_f64_list(text)?;
        if v.is_empty() {
            return Err("empty ladder".into());
        }
        Ok(v)
    }
}

impl Scenario {
    /// Parse text; `file` labels error messages.
    pub fn parse(text: &str, file: &str) -> Result<Self, ScenarioError> {
        let mut sc = Scenario { file: file.to_string(), ..Default::default() };
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let at = |m: String| parse_err(file, line, m);
            if let Some(rest) = content.strip_prefix("domain box:") {
                sc.domain.push(Located { value: parse_ranges(rest).map_err(at)?, line });
                continue;
            }
            if let Some(rest) = content.strip_prefix("area box:") {
                sc.area_box = Some(Located { value: parse_ranges(rest).map_err(at)?, line });
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| parse_err(file, line, format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if let Some(coord) = key.strip_prefix("phi poly:") {
                let coord = coord.trim();
                let idx: usize = coord
                    .strip_prefix('l')
                    .and_then(|d| d.parse().ok())
                    .filter(|&i| i >= 1)
                    .ok_or_else(|| parse_err(file, line, format!("expected an L-coordinate `l<i>`, got `{coord}`")))?;
                if value.is_empty() {
                    return Err(parse_err(file, line, "empty polynomial"));
                }
                sc.phi.push(Located { value: PhiLine { coord: idx, expr: value.to_string() }, line });
                continue;
            }
            let int = |v: &str| -> Result<usize, ScenarioError> {
                v.parse().map_err(|_| parse_err(file, line, format!("expected a nonnegative integer, got `{v}`")))
            };
            match key {
                "name" => sc.name = Some(Located { value: value.to_string(), line }),
                "layer_dims" => {
                    let dims = numbers(value).into_iter().map(int).collect::<Result<Vec<_>, _>>()?;
                    sc.layer_dims = Some(Located { value: dims, line });
                }
                "brackets" => {
                    for entry in value.split(',').map(str::trim).filter(|e| !e.is_empty()) {
                        let toks: Vec<&str> = entry.split_whitespace().collect();
                        if toks.len() != 4 {
                            return Err(at(format!("bracket entry `{entry}` needs `i j k c`")));
                        }
                        let i = int(toks[0])?;
                        let j = int(toks[1])?;
                        let k = int(toks[2])?;
                        let c = parse_rational(toks[3]).map_err(|e| at(e.to_string()))?;
                        sc.brackets.push(Located { value: (i, j, k, c), line });
                    }
                }
                "norm_weights" => sc.norm_weights = Some(Located { value: parse_f64_list(value).map_err(at)?, line }),
                "group" => sc.group_ref = Some(Located { value: value.to_string(), line }),
                "subgroup W" => sc.w_rows = Some(Located { value: parse_rows(value).map_err(at)?, line }),
                "subgroup L" => sc.l_rows = Some(Located { value: parse_rows(value).map_err(at)?, line }),
                "base_point" => sc.base_point = Some(parse_f64_list(value).map_err(at)?),
                "seed" => sc.seed = Some(value.parse().map_err(|_| at(format!("bad seed `{value}`")))?),
                "tol" => sc.tol = Some(parse_f64_token(value).map_err(at)?),
                "ladder" => sc.ladder = Some(parse_ladder(value).map_err(at)?),
                "deltas" => sc.deltas = Some(parse_f64_list(value).map_err(at)?),
                "samples" => sc.samples = Some(int(value)?),
                "lhs_samples" => sc.lhs_samples = Some(int(value)?),
                "ball_samples" => sc.ball_samples = Some(int(value)?),
                "lambdas" => sc.lambdas = Some(parse_f64_list(value).map_err(at)?),
                _ => return Err(at(format!("unknown key `{key}`"))),
            }
        }
        if sc.group_ref.is_some() && (sc.name.is_some() || sc.layer_dims.is_some() || !sc.brackets.is_empty()) {
            let line = sc.group_ref.as_ref().map_or(0, |g| g.line);
            return Err(parse_err(file, line, "`group =` cannot be combined with an inline group definition"));
        }
        Ok(sc)
    }

    pub fn read(path: &Path) -> Result<Self, ScenarioError> {
        let label = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| sem_err(&label, 0, format!("cannot read: {e}")))?;
        let mut sc = Self::parse(&text, &label)?;
        sc.base_dir = path.parent().map(Path::to_path_buf);
        Ok(sc)
    }

    pub fn file(&self) -> &str {
        &self.file
    }

    pub fn area_box(&self) -> Option<&[(f64, f64)]> {
        self.area_box.as_ref().map(|b| b.value.as_slice())
    }

    pub fn has_splitting(&self) -> bool {
        self.w_rows.is_some() || self.l_rows.is_some()
    }

    pub fn has_phi(&self) -> bool {
        !self.phi.is_empty()
    }

    /// Build the group defined inline in this file.
    pub fn build_group_inline(&self) -> Result<CarnotGroup, ScenarioError> {
        let file = &self.file;
        let dims = self.layer_dims.as_ref().ok_or_else(|| sem_err(file, 0, "missing `layer_dims`"))?;
        let name = self.name.as_ref().map_or("unnamed", |n| n.value.as_str());
        let entries: Vec<(usize, usize, usize, Rational)> = self.brackets.iter().map(|b| b.value.clone()).collect();
        let line = self.brackets.first().map_or(dims.line, |b| b.line);
        let algebra = StratifiedAlgebra::from_brackets(name, dims.value.clone(), &entries)
            .map_err(|e| sem_err(file, line, e.to_string()))?;
        let g = CarnotGroup::new(algebra).map_err(|e| sem_err(file, line, e.to_string()))?;
        match &self.norm_weights {
            Some(w) => g.with_norm_weights(w.value.clone()).map_err(|e| sem_err(file, w.line, e.to_string())),
            None => Ok(g),
        }
    }

    /// Resolve `group =` (catalog directory from the environment, then the
    /// built-in catalog, then a path relative to this file) or build the
    /// inline definition. Also returns the referenced file so its splitting
    /// can serve as a default.
    pub fn resolve_group(&self) -> Result<(CarnotGroup, Option<Scenario>), ScenarioError> {
        let Some(r) = &self.group_ref else {
            return Ok((self.build_group_inline()?, None));
        };
        let name = r.value.as_str();
        let from_env = std::env::var_os(CATALOG_ENV)
            .map(|d| PathBuf::from(d).join(format!("{name}.group")))
            .filter(|p| p.is_file());
        let referenced = if let Some(p) = from_env {
            Scenario::read(&p)?
        } else if let Some(text) = catalog::by_name(name) {
            Scenario::parse(text, name)?
        } else {
            let p = Path::new(name);
            let p = match (&self.base_dir, p.is_relative()) {
                (Some(dir), true) => dir.join(p),
                _ => p.to_path_buf(),
            };
            if !p.is_file() {
                return Err(sem_err(&self.file, r.line, format!("group `{name}` is neither a catalog entry nor a file")));
            }
            Scenario::read(&p)?
        };
        Ok((referenced.build_group_inline()?, Some(referenced)))
    }

    /// Validated splitting with `L` normal, from this file or the
    /// referenced group file.
    pub fn splitting(&self, g: &CarnotGroup, referenced: Option<&Scenario>) -> Result<Splitting, ScenarioError> {
        let src = if self.has_splitting() { self } else { referenced.filter(|r| r.has_splitting()).unwrap_or(self) };
        let file = &src.file;
        let w = src.w_rows.as_ref().ok_or_else(|| sem_err(file, 0, "missing `subgroup W`"))?;
        let l = src.l_rows.as_ref().ok_or_else(|| sem_err(file, 0, "missing `subgroup L`"))?;
        Splitting::from_rows(g, w.value.clone(), l.value.clone()).map_err(|e| sem_err(file, l.line.max(w.line), e.to_string()))
    }

    /// `φ` from the `phi poly:` lines (missing coordinates are 0) on the
    /// `domain box:` union (all of `W` when absent).
    pub fn graph_function(&self, split: Arc<Splitting>) -> Result<GraphFunction, ScenarioError> {
        let file = &self.file;
        let (m, l) = (split.w_dim(), split.l_dim());
        let mut polys = vec![Polynomial::zero(m); l];
        for p in &self.phi {
            if p.value.coord > l {
                return Err(sem_err(file, p.line, format!("l{} out of range: L has dimension {l}", p.value.coord)));
            }
            polys[p.value.coord - 1] =
                Polynomial::parse(&p.value.expr, 'w', m).map_err(|e| parse_err(file, p.line, e.to_string()))?;
        }
        let domain = if self.domain.is_empty() {
            Domain::everywhere(m)
        } else {
            if let Some(b) = self.domain.iter().find(|b| b.value.len() != m) {
                return Err(sem_err(file, b.line, format!("domain box has {} ranges, W has dimension {m}", b.value.len())));
            }
            Domain::Boxes(self.domain.iter().map(|b| b.value.clone()).collect())
        };
        GraphFunction::polynomial(split, domain, polys).map_err(|e| {
            let line = self.domain.first().map_or(0, |b| b.line);
            sem_err(file, line, e.to_string())
        })
    }
}
