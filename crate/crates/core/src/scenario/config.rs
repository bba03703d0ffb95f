//! Flat `section.key = value` scenario files.
//!
//! ```text
//! name = demo
//! grid.y_max = 20          # comments run to end of line
//! grid.n_cells = 1000
//! forcing.u_bar_e = constant(0.05)
//! initial.w0 = gaussian_bump(220, 2, 0.5) + scaled_erf(0.05)
//! solver.horizon = 2
//! solver.dt_init = 1e-3
//! ```

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::lift::erf;
use crate::solver::{ScenarioConfig, TimeFn};

/// `weight.m`: a fixed value or a geometric search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightChoice {
    Fixed(f64),
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldTerm {
    Zero,
    Constant(f64),
    /// `amp (e^{−((y−c)/w)²} − e^{−((y+c)/w)²})`, odd about the wall.
    GaussianBump { amp: f64, center: f64, width: f64 },
    /// `amp erf(y/2)`.
    ScaledErf(f64),
    /// Node values, one per grid node.
    Nodes(Vec<f64>),
}

/// Sum of field terms.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSpec(pub Vec<FieldTerm>);

impl FieldSpec {
    pub fn zero() -> Self {
        FieldSpec(vec![FieldTerm::Zero])
    }

    pub fn sample(&self, grid: &Arc<Grid>) -> Result<Field> {
        let mut values = vec![0.0; grid.len()];
        for term in &self.0 {
            match term {
                FieldTerm::Zero => {}
                FieldTerm::Constant(c) => values.iter_mut().for_each(|v| *v += c),
                FieldTerm::GaussianBump { amp, center, width } => {
                    for (v, &y) in values.iter_mut().zip(grid.nodes()) {
                        let g = |x: f64| (-(x / width).powi(2)).exp();
                        *v += amp * (g(y - center) - g(y + center));
                    }
                }
                FieldTerm::ScaledErf(amp) => {
                    for (v, &y) in values.iter_mut().zip(grid.nodes()) {
                        *v += amp * erf(0.5 * y);
                    }
                }
                FieldTerm::Nodes(nodes) => {
                    if nodes.len() != grid.len() {
                        return Err(Error::LengthMismatch {
                            expected: grid.len(),
                            got: nodes.len(),
                        });
                    }
                    values.iter_mut().zip(nodes).for_each(|(v, x)| *v += x);
                }
            }
        }
        Field::new(grid.clone(), values)
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, term) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            match term {
                FieldTerm::Zero => f.write_str("zero")?,
                FieldTerm::Constant(c) => write!(f, "constant({c:?})")?,
                FieldTerm::GaussianBump { amp, center, width } => {
                    write!(f, "gaussian_bump({amp:?}, {center:?}, {width:?})")?
                }
                FieldTerm::ScaledErf(a) => write!(f, "scaled_erf({a:?})")?,
                FieldTerm::Nodes(v) => {
                    f.write_str("[")?;
                    for (k, x) in v.iter().enumerate() {
                        if k > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{x:?}")?;
                    }
                    f.write_str("]")?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for TimeFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeFn::Zero => f.write_str("zero"),
            TimeFn::Constant(c) => write!(f, "constant({c:?})"),
            TimeFn::Linear(a, b) => write!(f, "linear({a:?}, {b:?})"),
        }
    }
}

/// A parsed and validated scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFile {
    pub name: String,
    pub y_max: f64,
    pub n_cells: usize,
    pub weight_n: f64,
    pub weight_m: WeightChoice,
    pub p_bar: TimeFn,
    pub u_bar_e: TimeFn,
    pub s_wall: TimeFn,
    pub s_far: TimeFn,
    pub w0: FieldSpec,
    pub s0: FieldSpec,
    pub horizon: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    pub blowup_cap: f64,
    pub snapshot_stride: usize,
    pub c_audit: f64,
    /// Output paths as written, relative to `base_dir` unless absolute.
    pub trace: PathBuf,
    pub audit: PathBuf,
    pub summary: PathBuf,
    pub base_dir: PathBuf,
}

const KEYS: &[&str] = &[
    "name",
    "grid.y_max",
    "grid.n_cells",
    "weight.n",
    "weight.m",
    "forcing.p_bar",
    "forcing.u_bar_e",
    "forcing.s_wall",
    "forcing.s_far",
    "initial.w0",
    "initial.s0",
    "solver.horizon",
    "solver.dt_init",
    "solver.dt_min",
    "solver.blowup_cap",
    "solver.snapshot_stride",
    "audit.c_audit",
    "output.trace",
    "output.audit",
    "output.summary",
];

const REQUIRED: &[&str] = &["grid.y_max", "grid.n_cells", "solver.horizon", "solver.dt_init"];

/// Reads and validates a scenario file. Relative output paths resolve
/// against the file's directory.
pub fn parse_config(path: impl AsRef<Path>) -> Result<ScenarioFile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config_str(&text, base)
}

pub fn parse_config_str(text: &str, base_dir: impl Into<PathBuf>) -> Result<ScenarioFile> {
    let mut entries: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Config {
                line,
                key: content.to_string(),
                message: "expected `key = value`".into(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(known) = KEYS.iter().find(|k| **k == key) else {
            return Err(Error::Config {
                line,
                key: key.to_string(),
                message: "unknown key".into(),
            });
        };
        if value.is_empty() {
            return Err(config_err(line, key, "empty value"));
        }
        if entries.insert(known, (line, value)).is_some() {
            return Err(config_err(line, key, "duplicate key"));
        }
    }
    for key in REQUIRED {
        if !entries.contains_key(key) {
            return Err(config_err(0, key, "missing required key"));
        }
    }

    let get = |key: &str| entries.get(key).copied();
    let real = |key: &str, default: Option<f64>| -> Result<f64> {
        match get(key) {
            Some((line, v)) => parse_real(v).map_err(|m| config_err(line, key, &m)),
            None => Ok(default.expect("required keys checked above")),
        }
    };
    let positive = |key: &str, default: Option<f64>| -> Result<f64> {
        let x = real(key, default)?;
        if x > 0.0 {
            Ok(x)
        } else {
            Err(config_err(line_of(&entries, key), key, "must be positive"))
        }
    };
    let count = |key: &str, default: usize| -> Result<usize> {
        match get(key) {
            Some((line, v)) => v.parse::<usize>().map_err(|e| config_err(line, key, &e.to_string())),
            None => Ok(default),
        }
    };
    let time_fn = |key: &str| -> Result<TimeFn> {
        match get(key) {
            Some((line, v)) => parse_time_fn(v).map_err(|m| config_err(line, key, &m)),
            None => Ok(TimeFn::Zero),
        }
    };
    let field = |key: &str| -> Result<FieldSpec> {
        match get(key) {
            Some((line, v)) => parse_field(v).map_err(|m| config_err(line, key, &m)),
            None => Ok(FieldSpec::zero()),
        }
    };

    let name = get("name").map(|(_, v)| v.to_string()).unwrap_or_else(|| "scenario".into());
    let weight_m = match get("weight.m") {
        None => WeightChoice::Auto,
        Some((_, "auto")) => WeightChoice::Auto,
        Some((line, v)) => {
            let m = parse_real(v).map_err(|e| config_err(line, "weight.m", &e))?;
            if m <= 0.0 {
                return Err(config_err(line, "weight.m", "must be positive or `auto`"));
            }
            WeightChoice::Fixed(m)
        }
    };
    let weight_n = real("weight.n", Some(2.0))?;
    if weight_n <= 1.0 {
        return Err(config_err(line_of(&entries, "weight.n"), "weight.n", "must exceed 1"));
    }
    let path = |key: &str, default: String| -> PathBuf { get(key).map(|(_, v)| PathBuf::from(v)).unwrap_or_else(|| default.into()) };

    let file = ScenarioFile {
        y_max: positive("grid.y_max", None)?,
        n_cells: count("grid.n_cells", 0)?,
        weight_n,
        weight_m,
        p_bar: time_fn("forcing.p_bar")?,
        u_bar_e: time_fn("forcing.u_bar_e")?,
        s_wall: time_fn("forcing.s_wall")?,
        s_far: time_fn("forcing.s_far")?,
        w0: field("initial.w0")?,
        s0: field("initial.s0")?,
        horizon: positive("solver.horizon", None)?,
        dt_init: positive("solver.dt_init", None)?,
        dt_min: positive("solver.dt_min", Some(1e-12))?,
        blowup_cap: positive("solver.blowup_cap", Some(1e6))?,
        snapshot_stride: count("solver.snapshot_stride", 20)?,
        c_audit: positive("audit.c_audit", Some(crate::lyapunov::DEFAULT_C_AUDIT))?,
        trace: path("output.trace", format!("{name}_trace.csv")),
        audit: path("output.audit", format!("{name}_audit.csv")),
        summary: path("output.summary", format!("{name}_summary.txt")),
        name,
        base_dir: base_dir.into(),
    };
    if file.dt_min > file.dt_init {
        return Err(config_err(line_of(&entries, "solver.dt_min"), "solver.dt_min", "must not exceed solver.dt_init"));
    }
    let grid = Arc::new(Grid::new(file.y_max, file.n_cells).map_err(|e| config_err(line_of(&entries, "grid.n_cells"), "grid.n_cells", &e.to_string()))?);
    for (key, spec) in [("initial.w0", &file.w0), ("initial.s0", &file.s0)] {
        spec.sample(&grid).map_err(|e| config_err(line_of(&entries, key), key, &e.to_string()))?;
    }
    let cfg = file.solver_config()?;
    cfg.check_admissible(&cfg.lift_params())?;
    Ok(file)
}

impl ScenarioFile {
    pub fn grid(&self) -> Result<Arc<Grid>> {
        Ok(Arc::new(Grid::new(self.y_max, self.n_cells)?))
    }

    pub fn solver_config(&self) -> Result<ScenarioConfig> {
        let grid = self.grid()?;
        Ok(ScenarioConfig {
            p_bar: self.p_bar,
            u_bar_e: self.u_bar_e,
            s_wall: self.s_wall,
            s_far: self.s_far,
            w0: self.w0.sample(&grid)?,
            s0: self.s0.sample(&grid)?,
            horizon: self.horizon,
            grid,
            dt_init: self.dt_init,
            dt_min: self.dt_min,
            blowup_cap: self.blowup_cap,
            snapshot_stride: self.snapshot_stride,
        })
    }

    pub fn output_path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Every key in sorted order with defaults filled in and reals in
    /// shortest round-trip form.
    pub fn canonical_text(&self) -> String {
        let m = match self.weight_m {
            WeightChoice::Auto => "auto".to_string(),
            WeightChoice::Fixed(m) => format!("{m:?}"),
        };
        let mut map: BTreeMap<&str, String> = BTreeMap::new();
        map.insert("name", self.name.clone());
        map.insert("grid.y_max", format!("{:?}", self.y_max));
        map.insert("grid.n_cells", self.n_cells.to_string());
        map.insert("weight.n", format!("{:?}", self.weight_n));
        map.insert("weight.m", m);
        map.insert("forcing.p_bar", self.p_bar.to_string());
        map.insert("forcing.u_bar_e", self.u_bar_e.to_string());
        map.insert("forcing.s_wall", self.s_wall.to_string());
        map.insert("forcing.s_far", self.s_far.to_string());
        map.insert("initial.w0", self.w0.to_string());
        map.insert("initial.s0", self.s0.to_string());
        map.insert("solver.horizon", format!("{:?}", self.horizon));
        map.insert("solver.dt_init", format!("{:?}", self.dt_init));
        map.insert("solver.dt_min", format!("{:?}", self.dt_min));
        map.insert("solver.blowup_cap", format!("{:?}", self.blowup_cap));
        map.insert("solver.snapshot_stride", self.snapshot_stride.to_string());
        map.insert("audit.c_audit", format!("{:?}", self.c_audit));
        map.insert("output.trace", self.trace.display().to_string());
        map.insert("output.audit", self.audit.display().to_string());
        map.insert("output.summary", self.summary.display().to_string());
        let mut out = String::new();
        for (k, v) in map {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// Lowercase hex SHA-256 of [`Self::canonical_text`].
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_text().as_bytes()))
    }
}

fn config_err(line: usize, key: &str, message: &str) -> Error {
    Error::Config {
        line,
        key: key.to_string(),
        message: message.to_string(),
    }
}

fn line_of(entries: &BTreeMap<&str, (usize, &str)>, key: &str) -> usize {
    entries.get(key).map(|e| e.0).unwrap_or(0)
}

fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|_| format!("`{}` is not a real number", s.trim()))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("`{}` is not finite", s.trim()))
    }
}

/// Splits `name(a, b, …)` into its name and real arguments.
fn parse_call(s: &str) -> std::result::Result<(&str, Vec<f64>), String> {
    let s = s.trim();
    match s.find('(') {
        None => Ok((s, Vec::new())),
        Some(open) => {
            let inner = s[open + 1..]
                .strip_suffix(')')
                .ok_or_else(|| format!("unbalanced parentheses in `{s}`"))?;
            let args = inner.split(',').map(parse_real).collect::<std::result::Result<_, _>>()?;
            Ok((s[..open].trim(), args))
        }
    }
}

fn arity(name: &str, args: &[f64], n: usize) -> std::result::Result<(), String> {
    if args.len() == n {
        Ok(())
    } else {
        Err(format!("`{name}` takes {n} argument(s), got {}", args.len()))
    }
}

pub fn parse_time_fn(s: &str) -> std::result::Result<TimeFn, String> {
    let (name, args) = parse_call(s)?;
    match name {
        "zero" => arity(name, &args, 0).map(|_| TimeFn::Zero),
        "constant" => arity(name, &args, 1).map(|_| TimeFn::Constant(args[0])),
        "linear" => arity(name, &args, 2).map(|_| TimeFn::Linear(args[0], args[1])),
        _ => Err(format!("unknown time family `{name}` (zero, constant, linear)")),
    }
}

pub fn parse_field(s: &str) -> std::result::Result<FieldSpec, String> {
    let mut terms = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let bytes = s.as_bytes();
    let mut pieces = Vec::new();
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'(' | b'[' => depth += 1,
            b')' | b']' => depth -= 1,
            b'+' if depth == 0 => {
                pieces.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
        if depth < 0 {
            return Err(format!("unbalanced brackets in `{s}`"));
        }
    }
    if depth != 0 {
        return Err(format!("unbalanced brackets in `{s}`"));
    }
    pieces.push(&s[start..]);
    for piece in pieces {
        let piece = piece.trim();
        if let Some(inner) = piece.strip_prefix('[') {
            let inner = inner.strip_suffix(']').ok_or_else(|| format!("unterminated array `{piece}`"))?;
            let values = inner
                .split(',')
                .filter(|c| !c.trim().is_empty())
                .map(parse_real)
                .collect::<std::result::Result<Vec<_>, _>>()?;
            terms.push(FieldTerm::Nodes(values));
            continue;
        }
        let (name, args) = parse_call(piece)?;
        let term = match name {
            "zero" => arity(name, &args, 0).map(|_| FieldTerm::Zero)?,
            "constant" => arity(name, &args, 1).map(|_| FieldTerm::Constant(args[0]))?,
            "scaled_erf" => arity(name, &args, 1).map(|_| FieldTerm::ScaledErf(args[0]))?,
            "gaussian_bump" => {
                arity(name, &args, 3)?;
                if args[2] <= 0.0 {
                    return Err("gaussian_bump width must be positive".into());
                }
                FieldTerm::GaussianBump {
                    amp: args[0],
                    center: args[1],
                    width: args[2],
                }
            }
            "" => return Err(format!("empty term in `{s}`")),
            _ => return Err(format!("unknown field family `{name}` (zero, constant, gaussian_bump, scaled_erf, [..])")),
        };
        terms.push(term);
    }
    Ok(FieldSpec(terms))
}
