//! Line-oriented problem files.
//!
//! ```text
//! # minimal surfaces in Euclidean space
//! [context]
//! base = x, y
//! fibers = 1
//! order = 1
//!
//! [lagrangian]
//! sqrt(1 + u_x^2 + u_y^2)
//! ```
//!
//! Sections are `[name]` headers; `#` starts a comment. Blank lines are
//! ignored. Keyed sections use `key = value` lines; list sections hold one
//! entry per line, or several separated by top-level commas.

use std::collections::BTreeMap;

use jetvar::linalg::Matrix;
use jetvar::relativity::Constants;
use jetvar::variational::Grid;
use jetvar::{Expr, JetContext};

use crate::error::CliError;

#[derive(Clone, Debug)]
struct Line {
    number: usize,
    text: String,
}

#[derive(Clone, Debug, Default)]
pub struct ProblemFile {
    sections: BTreeMap<String, Vec<Line>>,
}

const KNOWN: &[&str] = &[
    "context",
    "parameters",
    "constants",
    "functions",
    "lagrangian",
    "source",
    "metric",
    "potential",
    "field",
    "particle",
    "graph",
    "variation",
    "grid",
];

/// Splits at commas outside parentheses.
fn split_top_level(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    if !cur.trim().is_empty() || !out.is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut file = ProblemFile::default();
        let mut current: Option<String> = None;
        for (k, raw) in text.lines().enumerate() {
            let number = k + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim().to_ascii_lowercase();
                let name = if name == "submanifold" { "graph".to_string() } else { name };
                if !KNOWN.contains(&name.as_str()) {
                    return Err(CliError::problem(number, format!("unknown section [{name}]")));
                }
                if file.sections.contains_key(&name) {
                    return Err(CliError::problem(number, format!("duplicate section [{name}]")));
                }
                file.sections.insert(name.clone(), Vec::new());
                current = Some(name);
                continue;
            }
            let Some(section) = &current else {
                return Err(CliError::problem(number, "content before the first section header"));
            };
            file.sections.get_mut(section).expect("section exists").push(Line {
                number,
                text: line.to_string(),
            });
        }
        Ok(file)
    }

    pub fn has(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    fn lines(&self, section: &str) -> &[Line] {
        self.sections.get(section).map(Vec::as_slice).unwrap_or(&[])
    }

    fn require(&self, section: &str) -> Result<&[Line], CliError> {
        match self.sections.get(section) {
            Some(lines) if !lines.is_empty() => Ok(lines),
            _ => Err(CliError::Missing(section.to_string())),
        }
    }

    fn keyed(&self, section: &str) -> Result<BTreeMap<String, (usize, String)>, CliError> {
        let mut out = BTreeMap::new();
        for l in self.lines(section) {
            let (k, v) = l
                .text
                .split_once('=')
                .ok_or_else(|| CliError::problem(l.number, format!("expected `key = value` in [{section}]")))?;
            out.insert(k.trim().to_ascii_lowercase(), (l.number, v.trim().to_string()));
        }
        Ok(out)
    }

    /// Entries of a list section, each with its line number.
    fn entries(&self, section: &str) -> Vec<(usize, String)> {
        self.lines(section)
            .iter()
            .flat_map(|l| split_top_level(&l.text).into_iter().map(move |e| (l.number, e)))
            .filter(|(_, e)| !e.is_empty())
            .collect()
    }

    /// The jet context declared by `[context]`, or `fallback` when the section
    /// is absent; `[parameters]`, `[constants]` and `[functions]` are added.
    pub fn context(&self, fallback: Option<JetContext>) -> Result<JetContext, CliError> {
        let mut ctx = if self.has("context") {
            self.declared_context()?
        } else {
            fallback.ok_or_else(|| CliError::Missing("context".into()))?
        };
        for (line, name) in self.entries("parameters") {
            ctx.declare_parameter(&name).map_err(|e| CliError::at(line, e))?;
        }
        for l in self.lines("constants") {
            for entry in split_top_level(&l.text) {
                let (name, dim) = match entry.split_once('=') {
                    Some((n, d)) => (n.trim().to_string(), Some(d.trim().to_string())),
                    None => (entry.trim().to_string(), None),
                };
                if ctx.constant(&name).is_some() {
                    continue;
                }
                ctx.declare_constant(&name, dim.as_deref()).map_err(|e| CliError::at(l.number, e))?;
            }
        }
        for l in self.lines("functions") {
            let (name, args) = l
                .text
                .split_once('=')
                .ok_or_else(|| CliError::problem(l.number, "expected `name = arg, arg, ...` in [functions]"))?;
            let args = split_top_level(args);
            let refs: Vec<&str> = args.iter().map(String::as_str).collect();
            ctx.declare_function(name.trim(), &refs).map_err(|e| CliError::at(l.number, e))?;
        }
        Ok(ctx)
    }

    fn declared_context(&self) -> Result<JetContext, CliError> {
        let keys = self.keyed("context")?;
        let number = |key: &str| -> Result<Option<usize>, CliError> {
            keys.get(key)
                .map(|(line, v)| {
                    v.parse::<usize>()
                        .map_err(|_| CliError::problem(*line, format!("`{key}` must be a non-negative integer")))
                })
                .transpose()
        };
        let names: Option<Vec<String>> = keys.get("base").map(|(_, v)| split_top_level(v));
        let n = match (&names, number("n")?) {
            (Some(names), Some(n)) if names.len() != n => {
                return Err(CliError::problem(
                    keys["n"].0,
                    format!("n = {n} but {} base names are given", names.len()),
                ))
            }
            (Some(names), _) => names.len(),
            (None, Some(n)) => n,
            (None, None) => return Err(CliError::Invalid("[context] needs `base` or `n`".into())),
        };
        for key in keys.keys() {
            if !["base", "n", "m", "fibers", "order", "r"].contains(&key.as_str()) {
                return Err(CliError::problem(keys[key].0, format!("unknown key `{key}` in [context]")));
            }
        }
        let m = number("fibers")?.or(number("m")?).unwrap_or(1);
        let r = number("order")?.or(number("r")?).unwrap_or(1);
        let mut ctx = JetContext::new(n, m, r)?;
        if let Some(names) = names {
            ctx = ctx.with_base_names(&names).map_err(|e| CliError::at(keys["base"].0, e))?;
        }
        Ok(ctx)
    }

    fn parse_expr(ctx: &JetContext, line: usize, text: &str) -> Result<Expr, CliError> {
        ctx.parse(text).map_err(|e| CliError::at(line, e))
    }

    /// The `[lagrangian]` density; continuation lines are joined.
    pub fn lagrangian(&self, ctx: &JetContext) -> Result<Expr, CliError> {
        let lines = self.require("lagrangian")?;
        let text: Vec<&str> = lines.iter().map(|l| l.text.as_str()).collect();
        Self::parse_expr(ctx, lines[0].number, &text.join(" "))
    }

    /// One expression per entry of a list section.
    pub fn expressions(&self, section: &str, ctx: &JetContext) -> Result<Vec<Expr>, CliError> {
        self.require(section)?;
        self.entries(section)
            .iter()
            .map(|(line, e)| Self::parse_expr(ctx, *line, e))
            .collect()
    }

    /// `expressions` with an exact count.
    pub fn vector(&self, section: &str, ctx: &JetContext, len: usize) -> Result<Vec<Expr>, CliError> {
        let v = self.expressions(section, ctx)?;
        if v.len() != len {
            let line = self.lines(section)[0].number;
            return Err(CliError::problem(
                line,
                format!("[{section}] needs {len} entries, found {}", v.len()),
            ));
        }
        Ok(v)
    }

    /// A square matrix, one row per line.
    pub fn matrix(&self, section: &str, ctx: &JetContext, dim: usize) -> Result<Matrix, CliError> {
        let lines = self.require(section)?;
        if lines.len() != dim {
            return Err(CliError::problem(
                lines[0].number,
                format!("[{section}] needs {dim} rows, found {}", lines.len()),
            ));
        }
        lines
            .iter()
            .map(|l| {
                let row = split_top_level(&l.text);
                if row.len() != dim {
                    return Err(CliError::problem(l.number, format!("row needs {dim} entries, found {}", row.len())));
                }
                row.iter().map(|e| Self::parse_expr(ctx, l.number, e)).collect()
            })
            .collect()
    }

    /// Physical constants; defaults are the symbols `m`, `c`, `q`, `hbar`.
    pub fn particle(&self, ctx: &JetContext) -> Result<Constants, CliError> {
        let mut constants = Constants::default();
        for (key, (line, value)) in self.keyed("particle")? {
            let e = Self::parse_expr(ctx, line, &value)?;
            match key.as_str() {
                "mass" | "m" => constants.mass = e,
                "c" => constants.c = e,
                "charge" | "q" => constants.charge = e,
                "hbar" => constants.hbar = e,
                _ => return Err(CliError::problem(line, format!("unknown key `{key}` in [particle]"))),
            }
        }
        Ok(constants)
    }

    /// The `[grid]` box, defaulting to the unit cube with 1001 points per
    /// axis for curves and 33 otherwise.
    pub fn grid(&self, n: usize) -> Result<Grid, CliError> {
        let keys = self.keyed("grid")?;
        let points = match keys.get("points") {
            Some((line, v)) => v
                .parse::<usize>()
                .ok()
                .filter(|p| *p >= 3)
                .ok_or_else(|| CliError::problem(*line, "`points` must be an integer ≥ 3"))?,
            None if n == 1 => 1001,
            None => 33,
        };
        let mut grid = Grid::unit(n, points);
        for (key, target) in [("lower", &mut grid.lower), ("upper", &mut grid.upper)] {
            if let Some((line, v)) = keys.get(key) {
                let vals = split_top_level(v)
                    .iter()
                    .map(|x| x.parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| CliError::problem(*line, format!("`{key}` must be a list of numbers")))?;
                if vals.len() != n {
                    return Err(CliError::problem(*line, format!("`{key}` needs {n} numbers")));
                }
                *target = vals;
            }
        }
        for (key, (line, _)) in &keys {
            if !["points", "lower", "upper"].contains(&key.as_str()) {
                return Err(CliError::problem(*line, format!("unknown key `{key}` in [grid]")));
            }
        }
        if grid.lower.iter().zip(&grid.upper).any(|(a, b)| a >= b) {
            return Err(CliError::Invalid("grid bounds must satisfy lower < upper".into()));
        }
        Ok(grid)
    }
}
