//! Line-oriented manifest format:
//!
//! ```text
//! # comment
//! [manifold]
//! name = sphere example
//! kind = split
//! dimension = 3
//!
//! [phi]
//! expr = sin(r)
//! ```
//!
//! Sections and keys are fixed; anything unknown is rejected. Numeric values
//! may be constant expressions (`exp(-1)/2 + 0.01`).

use std::collections::BTreeMap;
use std::fmt;

use cdsplit_core::weighted::ExtendedReal;

use crate::expr::{chart_vars, fiber_vars, Expr, ExprError};

#[derive(Debug, Clone, PartialEq)]
pub enum ManifestError {
    Parse { line: usize, col: usize, msg: String },
    Validation { key: String, msg: String },
}

impl fmt::Display for ManifestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ManifestError::Parse { line, col, msg } => write!(f, "parse error at line {line}, column {col}: {msg}"),
            ManifestError::Validation { key, msg } => write!(f, "invalid {key}: {msg}"),
        }
    }
}

impl std::error::Error for ManifestError {}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub value: String,
    pub line: usize,
    /// Column of the first character of `value`.
    pub col: usize,
}

/// Sections in file order are irrelevant; keys are kept sorted.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawManifest {
    pub sections: BTreeMap<String, BTreeMap<String, Entry>>,
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("manifold", &["name", "kind", "dimension"]),
    ("metric", &["gij"]),
    ("phi", &["expr"]),
    ("psi", &["expr"]),
    ("radial", &["f"]),
    ("fiber", &["type", "einstein", "periods", "gij", "safe_min", "safe_max"]),
    ("density", &["type", "f", "f_L"]),
    ("cd", &["lambda", "N"]),
    (
        "grid",
        &[
            "r_min", "r_max", "r_count", "fiber_count", "y_min", "y_max", "rho_min", "rho_max", "rho_count",
        ],
    ),
    (
        "numeric",
        &[
            "dt", "t_max", "fd_first", "fd_second", "tol_cd", "threshold_samples", "blowup_threshold",
            "overflow_guard",
        ],
    ),
    ("riccati", &["a", "y0", "y0p", "t_max"]),
    ("geodesic", &["start", "velocity", "length"]),
    ("curvature", &["points", "count"]),
    ("bochner", &["h", "samples"]),
];

fn known_key(section: &str, key: &str) -> bool {
    if section == "density" && key.len() > 1 && key.starts_with('x') && key[1..].parse::<usize>().is_ok() {
        return true;
    }
    SECTIONS
        .iter()
        .any(|(s, keys)| *s == section && keys.contains(&key))
}

fn parse_err(line: usize, col: usize, msg: impl Into<String>) -> ManifestError {
    ManifestError::Parse {
        line,
        col,
        msg: msg.into(),
    }
}

impl RawManifest {
    pub fn parse(text: &str) -> Result<Self, ManifestError> {
        let mut out = RawManifest::default();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = match raw.find('#') {
                Some(k) => &raw[..k],
                None => raw,
            };
            let trimmed = content.trim();
            if trimmed.is_empty() {
                continue;
            }
            let indent = content.len() - content.trim_start().len() + 1;
            if let Some(rest) = trimmed.strip_prefix('[') {
                let Some(name) = rest.strip_suffix(']') else {
                    return Err(parse_err(line, indent + trimmed.len(), "expected ']'"));
                };
                let name = name.trim();
                if !SECTIONS.iter().any(|(s, _)| *s == name) {
                    return Err(parse_err(line, indent + 1, format!("unknown section [{name}]")));
                }
                if out.sections.contains_key(name) {
                    return Err(parse_err(line, indent + 1, format!("section [{name}] appears twice")));
                }
                out.sections.insert(name.to_string(), BTreeMap::new());
                current = Some(name.to_string());
                continue;
            }
            let Some(eq) = content.find('=') else {
                return Err(parse_err(line, indent, "expected 'key = value' or '[section]'"));
            };
            let Some(section) = current.clone() else {
                return Err(parse_err(line, indent, "key outside of any section"));
            };
            let key = content[..eq].trim();
            if key.is_empty() {
                return Err(parse_err(line, indent, "missing key before '='"));
            }
            if !known_key(&section, key) {
                return Err(parse_err(line, indent, format!("unknown key '{key}' in [{section}]")));
            }
            let after = &content[eq + 1..];
            let lead = after.len() - after.trim_start().len();
            let mut value = after.trim().to_string();
            let mut col = eq + 2 + lead;
            if value.len() >= 2 && value.starts_with('"') && value.ends_with('"') {
                value = value[1..value.len() - 1].to_string();
                col += 1;
            }
            if value.is_empty() {
                return Err(parse_err(line, eq + 2, format!("empty value for '{key}'")));
            }
            let keys = out.sections.get_mut(&section).expect("current section exists");
            if keys.contains_key(key) {
                return Err(parse_err(line, indent, format!("key '{key}' repeated in [{section}]")));
            }
            keys.insert(key.to_string(), Entry { value, line, col });
        }
        Ok(out)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.sections.get(section).and_then(|s| s.get(key))
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    /// Apply `key=value` (a `[grid]` key) or `section.key=value`.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), ManifestError> {
        let bad = |msg: String| ManifestError::Validation {
            key: format!("--grid-override {spec}"),
            msg,
        };
        let Some((lhs, value)) = spec.split_once('=') else {
            return Err(bad("expected key=value".into()));
        };
        let (section, key) = match lhs.trim().split_once('.') {
            Some((s, k)) => (s.trim(), k.trim()),
            None => ("grid", lhs.trim()),
        };
        if !known_key(section, key) {
            return Err(bad(format!("unknown key '{key}' in [{section}]")));
        }
        let value = value.trim();
        if value.is_empty() {
            return Err(bad("empty value".into()));
        }
        self.sections.entry(section.to_string()).or_default().insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                line: 0,
                col: 1,
            },
        );
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    General,
    Split,
    Twisted,
    RadialModel,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::General => "general",
            Kind::Split => "split",
            Kind::Twisted => "twisted",
            Kind::RadialModel => "radial_model",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FiberDecl {
    Euclidean,
    Sphere { einstein: f64 },
    Torus { periods: Vec<f64> },
    Custom {
        gij: Vec<Vec<Expr>>,
        einstein: Option<f64>,
        safe_min: Vec<f64>,
        safe_max: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum DensityDecl {
    None,
    /// Potential over the full chart.
    Gradient(Expr),
    Vector(Vec<Expr>),
    /// Split spaces: `f = φ(r) + f_L(y)`.
    FiberPotential(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridBlock {
    pub r_min: f64,
    pub r_max: f64,
    pub r_count: usize,
    pub fiber_count: usize,
    pub y_min: Option<f64>,
    pub y_max: Option<f64>,
    pub rho_min: f64,
    pub rho_max: f64,
    pub rho_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericBlock {
    pub dt: f64,
    pub t_max: f64,
    pub fd_first: f64,
    pub fd_second: f64,
    pub tol_cd: f64,
    pub threshold_samples: usize,
    pub blowup_threshold: f64,
    pub overflow_guard: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiBlock {
    pub a: f64,
    pub y0: f64,
    pub y0p: f64,
    pub t_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicBlock {
    pub start: Option<Vec<f64>>,
    pub velocity: Option<Vec<f64>>,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub name: String,
    pub kind: Kind,
    pub dim: usize,
    pub metric: Option<Vec<Vec<Expr>>>,
    pub phi: Option<Expr>,
    pub psi: Option<Expr>,
    pub radial_f: Option<Expr>,
    pub fiber: Option<FiberDecl>,
    pub density: DensityDecl,
    pub lambda: f64,
    pub n_param: ExtendedReal,
    pub grid: GridBlock,
    pub numeric: NumericBlock,
    pub riccati: RiccatiBlock,
    pub geodesic: GeodesicBlock,
    pub curvature_points: Option<Vec<Vec<f64>>>,
    pub curvature_count: usize,
    pub bochner_h: Option<Expr>,
    pub bochner_samples: usize,
}

struct V<'a> {
    raw: &'a RawManifest,
}

fn invalid(section: &str, key: &str, msg: impl Into<String>) -> ManifestError {
    ManifestError::Validation {
        key: format!("[{section}] {key}"),
        msg: msg.into(),
    }
}

fn expr_err(e: &Entry, offset: usize, err: ExprError) -> ManifestError {
    if e.line == 0 {
        return ManifestError::Parse {
            line: 0,
            col: err.col,
            msg: err.msg,
        };
    }
    parse_err(e.line, e.col + offset + err.col - 1, err.msg)
}

/// Pieces of `value` split on `sep`, with their character offsets.
fn pieces(value: &str, sep: char) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, c) in value.char_indices() {
        if c == sep {
            out.push((start, &value[start..i]));
            start = i + 1;
        }
    }
    out.push((start, &value[start..]));
    out.into_iter()
        .map(|(o, s)| (o + s.len() - s.trim_start().len(), s.trim()))
        .collect()
}

impl V<'_> {
    fn entry(&self, section: &str, key: &str) -> Option<&Entry> {
        self.raw.get(section, key)
    }

    fn require(&self, section: &str, key: &str) -> Result<&Entry, ManifestError> {
        self.entry(section, key)
            .ok_or_else(|| invalid(section, key, "required but missing"))
    }

    fn expr_at(&self, e: &Entry, offset: usize, text: &str, vars: &[String]) -> Result<Expr, ManifestError> {
        Expr::parse(text, vars).map_err(|err| expr_err(e, offset, err))
    }

    fn number(&self, section: &str, key: &str, default: f64) -> Result<f64, ManifestError> {
        match self.entry(section, key) {
            None => Ok(default),
            Some(e) => self.number_of(section, key, e, 0, &e.value),
        }
    }

    fn number_of(&self, section: &str, key: &str, e: &Entry, offset: usize, text: &str) -> Result<f64, ManifestError> {
        let ex = self.expr_at(e, offset, text, &[])?;
        let v = ex.eval(&[]);
        if !v.is_finite() {
            return Err(invalid(section, key, format!("{text:?} is not a finite number")));
        }
        Ok(v)
    }

    fn positive(&self, section: &str, key: &str, default: f64) -> Result<f64, ManifestError> {
        let v = self.number(section, key, default)?;
        if !(v > 0.0) {
            return Err(invalid(section, key, format!("must be positive, got {v}")));
        }
        Ok(v)
    }

    fn count(&self, section: &str, key: &str, default: usize) -> Result<usize, ManifestError> {
        match self.entry(section, key) {
            None => Ok(default),
            Some(e) => match e.value.parse::<usize>() {
                Ok(v) if v > 0 => Ok(v),
                _ => Err(invalid(section, key, format!("expected a positive integer, got {:?}", e.value))),
            },
        }
    }

    fn list(&self, section: &str, key: &str, e: &Entry, offset: usize, text: &str) -> Result<Vec<f64>, ManifestError> {
        pieces(text, ',')
            .into_iter()
            .map(|(o, t)| self.number_of(section, key, e, offset + o, t))
            .collect()
    }

    fn vector(&self, section: &str, key: &str, len: usize) -> Result<Option<Vec<f64>>, ManifestError> {
        let Some(e) = self.entry(section, key) else {
            return Ok(None);
        };
        let v = self.list(section, key, e, 0, &e.value)?;
        if v.len() != len {
            return Err(invalid(section, key, format!("expected {len} components, got {}", v.len())));
        }
        Ok(Some(v))
    }

    fn matrix(&self, section: &str, key: &str, n: usize, vars: &[String]) -> Result<Vec<Vec<Expr>>, ManifestError> {
        let e = self.require(section, key)?;
        let rows = pieces(&e.value, ';');
        if rows.len() != n {
            return Err(invalid(section, key, format!("expected {n} rows separated by ';', got {}", rows.len())));
        }
        rows.into_iter()
            .map(|(ro, row)| {
                let cells = pieces(row, ',');
                if cells.len() != n {
                    return Err(invalid(section, key, format!("expected {n} entries per row, got {}", cells.len())));
                }
                cells
                    .into_iter()
                    .map(|(co, c)| self.expr_at(e, ro + co, c, vars))
                    .collect()
            })
            .collect()
    }

    fn forbid(&self, section: &str, kind: Kind) -> Result<(), ManifestError> {
        if self.raw.has_section(section) {
            return Err(invalid(section, "*", format!("section not allowed for kind = {}", kind.name())));
        }
        Ok(())
    }
}

/// Parse and validate manifest text.
pub fn parse_manifest(text: &str) -> Result<Manifest, ManifestError> {
    let raw = RawManifest::parse(text)?;
    validate(&raw)
}

pub fn validate(raw: &RawManifest) -> Result<Manifest, ManifestError> {
    let v = V { raw };
    let name = v.require("manifold", "name")?.value.clone();
    let kind_e = v.require("manifold", "kind")?;
    let kind = match kind_e.value.as_str() {
        "general" => Kind::General,
        "split" => Kind::Split,
        "twisted" => Kind::Twisted,
        "radial_model" => Kind::RadialModel,
        other => {
            return Err(invalid(
                "manifold",
                "kind",
                format!("{other:?} is not one of general, split, twisted, radial_model"),
            ))
        }
    };
    let dim = match v.require("manifold", "dimension")?.value.parse::<usize>() {
        Ok(d) if d >= 2 => d,
        _ => return Err(invalid("manifold", "dimension", "must be an integer at least 2")),
    };
    let chart = chart_vars(dim);
    let fibv = fiber_vars(dim - 1);

    let mut metric = None;
    let mut phi = None;
    let mut psi = None;
    let mut radial_f = None;
    let mut fiber = None;
    match kind {
        Kind::General => {
            for s in ["phi", "psi", "radial", "fiber"] {
                v.forbid(s, kind)?;
            }
            metric = Some(v.matrix("metric", "gij", dim, &chart)?);
        }
        Kind::Split => {
            for s in ["metric", "psi", "radial"] {
                v.forbid(s, kind)?;
            }
            let e = v.require("phi", "expr")?;
            phi = Some(v.expr_at(e, 0, &e.value, &chart[..1])?);
            fiber = Some(fiber_decl(&v, dim - 1)?);
        }
        Kind::Twisted => {
            for s in ["metric", "phi", "radial"] {
                v.forbid(s, kind)?;
            }
            let e = v.require("psi", "expr")?;
            psi = Some(v.expr_at(e, 0, &e.value, &chart)?);
            fiber = Some(fiber_decl(&v, dim - 1)?);
        }
        Kind::RadialModel => {
            for s in ["metric", "phi", "psi", "fiber", "density"] {
                v.forbid(s, kind)?;
            }
            let e = v.require("radial", "f")?;
            radial_f = Some(v.expr_at(e, 0, &e.value, &chart[..1])?);
        }
    }

    let density = density_decl(&v, kind, dim, &chart, &fibv)?;

    let lambda = v.number("cd", "lambda", 0.0)?;
    let n_param = match v.entry("cd", "N") {
        None => ExtendedReal::Finite(1.0),
        Some(e) => match e.value.parse::<ExtendedReal>() {
            Ok(x) => x,
            Err(_) => ExtendedReal::Finite(v.number_of("cd", "N", e, 0, &e.value)?),
        },
    };
    if n_param == ExtendedReal::Finite(dim as f64) {
        return Err(invalid(
            "cd",
            "N",
            format!("N = {dim} equals the dimension; the generalized Ricci tensor divides by N - n"),
        ));
    }

    let grid = GridBlock {
        r_min: v.number("grid", "r_min", -10.0)?,
        r_max: v.number("grid", "r_max", 10.0)?,
        r_count: v.count("grid", "r_count", 201)?,
        fiber_count: v.count("grid", "fiber_count", 9)?,
        y_min: v.entry("grid", "y_min").map(|_| v.number("grid", "y_min", 0.0)).transpose()?,
        y_max: v.entry("grid", "y_max").map(|_| v.number("grid", "y_max", 0.0)).transpose()?,
        rho_min: v.positive("grid", "rho_min", 0.1)?,
        rho_max: v.positive("grid", "rho_max", 10.0)?,
        rho_count: v.count("grid", "rho_count", 100)?,
    };
    if !(grid.r_min < grid.r_max) {
        return Err(invalid("grid", "r_max", "r_max must exceed r_min"));
    }
    if !(grid.rho_min < grid.rho_max) {
        return Err(invalid("grid", "rho_max", "rho_max must exceed rho_min"));
    }
    if let (Some(lo), Some(hi)) = (grid.y_min, grid.y_max) {
        if !(lo < hi) {
            return Err(invalid("grid", "y_max", "y_max must exceed y_min"));
        }
    }

    let numeric = NumericBlock {
        dt: v.positive("numeric", "dt", 1e-3)?,
        t_max: v.positive("numeric", "t_max", 10.0)?,
        fd_first: v.positive("numeric", "fd_first", 1e-5)?,
        fd_second: v.positive("numeric", "fd_second", 1e-4)?,
        tol_cd: v.positive("numeric", "tol_cd", cdsplit_core::weighted::TOL_CD)?,
        threshold_samples: v.count("numeric", "threshold_samples", 2001)?,
        blowup_threshold: v.number("numeric", "blowup_threshold", -50.0)?,
        overflow_guard: v.positive("numeric", "overflow_guard", 1e8)?,
    };

    let riccati = RiccatiBlock {
        a: v.positive("riccati", "a", 1.0)?,
        y0: v.number("riccati", "y0", 0.0)?,
        y0p: v.number("riccati", "y0p", 0.0)?,
        t_max: v.positive("riccati", "t_max", 3.0)?,
    };

    let geodesic = GeodesicBlock {
        start: v.vector("geodesic", "start", dim)?,
        velocity: v.vector("geodesic", "velocity", dim)?,
        length: v.positive("geodesic", "length", numeric.t_max)?,
    };
    if let Some(vel) = &geodesic.velocity {
        if vel.iter().all(|x| *x == 0.0) {
            return Err(invalid("geodesic", "velocity", "must be nonzero"));
        }
    }

    let curvature_points = match v.entry("curvature", "points") {
        None => None,
        Some(e) => Some(
            pieces(&e.value, ';')
                .into_iter()
                .map(|(o, row)| {
                    let p = v.list("curvature", "points", e, o, row)?;
                    if p.len() != dim {
                        return Err(invalid("curvature", "points", format!("each point needs {dim} coordinates")));
                    }
                    Ok(p)
                })
                .collect::<Result<Vec<_>, _>>()?,
        ),
    };
    let curvature_count = v.count("curvature", "count", 8)?;
    let bochner_h = match v.entry("bochner", "h") {
        None => None,
        Some(e) => Some(v.expr_at(e, 0, &e.value, &chart)?),
    };
    let bochner_samples = v.count("bochner", "samples", 10)?;

    let m = Manifest {
        name,
        kind,
        dim,
        metric,
        phi,
        psi,
        radial_f,
        fiber,
        density,
        lambda,
        n_param,
        grid,
        numeric,
        riccati,
        geodesic,
        curvature_points,
        curvature_count,
        bochner_h,
        bochner_samples,
    };
    trial_evaluation(&m)?;
    Ok(m)
}

fn fiber_decl(v: &V<'_>, m: usize) -> Result<FiberDecl, ManifestError> {
    let t = v.require("fiber", "type")?;
    let allowed: &[&str] = match t.value.as_str() {
        "euclidean" => &["type"],
        "sphere" => &["type", "einstein"],
        "torus" => &["type", "periods"],
        "custom" => &["type", "gij", "einstein", "safe_min", "safe_max"],
        other => {
            return Err(invalid(
                "fiber",
                "type",
                format!("{other:?} is not one of euclidean, sphere, torus, custom"),
            ))
        }
    };
    if let Some(keys) = v.raw.sections.get("fiber") {
        if let Some(k) = keys.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(invalid("fiber", k, format!("not used by fiber type {}", t.value)));
        }
    }
    Ok(match t.value.as_str() {
        "euclidean" => FiberDecl::Euclidean,
        "sphere" => {
            if m < 2 {
                return Err(invalid("fiber", "type", "a sphere fiber needs dimension at least 3 overall"));
            }
            let e = v.require("fiber", "einstein")?;
            let einstein = v.number_of("fiber", "einstein", e, 0, &e.value)?;
            if !(einstein > 0.0) {
                return Err(invalid("fiber", "einstein", "a round sphere has a positive Einstein constant"));
            }
            FiberDecl::Sphere { einstein }
        }
        "torus" => {
            let e = v.require("fiber", "periods")?;
            let periods = v.list("fiber", "periods", e, 0, &e.value)?;
            if periods.len() != m || periods.iter().any(|p| !(*p > 0.0)) {
                return Err(invalid("fiber", "periods", format!("expected {m} positive periods")));
            }
            FiberDecl::Torus { periods }
        }
        _ => {
            let gij = v.matrix("fiber", "gij", m, &fiber_vars(m))?;
            let einstein = v.entry("fiber", "einstein").map(|_| v.number("fiber", "einstein", 0.0)).transpose()?;
            let safe_min = v.vector("fiber", "safe_min", m)?.ok_or_else(|| invalid("fiber", "safe_min", "required for a custom fiber"))?;
            let safe_max = v.vector("fiber", "safe_max", m)?.ok_or_else(|| invalid("fiber", "safe_max", "required for a custom fiber"))?;
            if safe_min.iter().zip(&safe_max).any(|(a, b)| !(a < b)) {
                return Err(invalid("fiber", "safe_max", "each upper bound must exceed the lower bound"));
            }
            FiberDecl::Custom {
                gij,
                einstein,
                safe_min,
                safe_max,
            }
        }
    })
}

fn density_decl(v: &V<'_>, kind: Kind, n: usize, chart: &[String], fibv: &[String]) -> Result<DensityDecl, ManifestError> {
    let Some(keys) = v.raw.sections.get("density") else {
        return Ok(match kind {
            Kind::Split => DensityDecl::FiberPotential(Expr::Num(0.0)),
            _ => DensityDecl::None,
        });
    };
    if kind == Kind::Split {
        if let Some(k) = keys.keys().find(|k| k.as_str() != "f_L") {
            return Err(invalid("density", k, "split spaces take only f_L (the density is phi(r) + f_L)"));
        }
        return Ok(DensityDecl::FiberPotential(match v.entry("density", "f_L") {
            Some(e) => v.expr_at(e, 0, &e.value, fibv)?,
            None => Expr::Num(0.0),
        }));
    }
    if keys.contains_key("f_L") {
        return Err(invalid("density", "f_L", "only split spaces take a fiber potential"));
    }
    let t = v.require("density", "type")?;
    match t.value.as_str() {
        "none" => {
            if let Some(k) = keys.keys().find(|k| k.as_str() != "type") {
                return Err(invalid("density", k, "not used by density type none"));
            }
            Ok(DensityDecl::None)
        }
        "gradient" => {
            if let Some(k) = keys.keys().find(|k| !matches!(k.as_str(), "type" | "f")) {
                return Err(invalid("density", k, "not used by density type gradient"));
            }
            let e = v.require("density", "f")?;
            Ok(DensityDecl::Gradient(v.expr_at(e, 0, &e.value, chart)?))
        }
        "vector" => {
            let comps: Vec<String> = (1..=n).map(|k| format!("x{k}")).collect();
            if let Some(k) = keys.keys().find(|k| k.as_str() != "type" && !comps.contains(k)) {
                return Err(invalid("density", k, format!("a vector density takes x1..x{n}")));
            }
            comps
                .iter()
                .map(|c| {
                    let e = v.require("density", c)?;
                    v.expr_at(e, 0, &e.value, chart)
                })
                .collect::<Result<Vec<_>, _>>()
                .map(DensityDecl::Vector)
        }
        other => Err(invalid(
            "density",
            "type",
            format!("{other:?} is not one of none, gradient, vector"),
        )),
    }
}

impl Manifest {
    /// Center of the sampling region, used for trial evaluation and as the
    /// default geodesic start.
    pub fn grid_center(&self) -> Vec<f64> {
        if self.kind == Kind::RadialModel {
            let rho = 0.5 * (self.grid.rho_min + self.grid.rho_max);
            let mut p = vec![0.0; self.dim];
            p[0] = rho;
            return p;
        }
        let (lo, hi) = self.fiber_box();
        let mut p = vec![0.5 * (self.grid.r_min + self.grid.r_max)];
        p.extend(lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)));
        p
    }

    /// Bounds for the fiber coordinates: `[grid] y_min/y_max` when given,
    /// otherwise the fiber's safe box (or `[-1, 1]` for a general chart).
    pub fn fiber_box(&self) -> (Vec<f64>, Vec<f64>) {
        let m = self.dim - 1;
        let (mut lo, mut hi) = match &self.fiber {
            Some(FiberDecl::Sphere { .. }) => (vec![-3.0; m], vec![3.0; m]),
            Some(FiberDecl::Euclidean) => (vec![-10.0; m], vec![10.0; m]),
            Some(FiberDecl::Torus { periods }) => (vec![0.0; m], periods.clone()),
            Some(FiberDecl::Custom { safe_min, safe_max, .. }) => (safe_min.clone(), safe_max.clone()),
            None => (vec![-1.0; m], vec![1.0; m]),
        };
        if let Some(y) = self.grid.y_min {
            lo = vec![y; m];
        }
        if let Some(y) = self.grid.y_max {
            hi = vec![y; m];
        }
        (lo, hi)
    }
}

fn trial_evaluation(m: &Manifest) -> Result<(), ManifestError> {
    let c = m.grid_center();
    let check = |section: &str, key: &str, e: &Expr, x: &[f64]| {
        let v = e.eval(x);
        if v.is_finite() {
            Ok(())
        } else {
            Err(invalid(section, key, format!("evaluates to {v} at the grid center {x:?}")))
        }
    };
    if let Some(g) = &m.metric {
        for row in g {
            for e in row {
                check("metric", "gij", e, &c)?;
            }
        }
    }
    if let Some(e) = &m.phi {
        check("phi", "expr", e, &c[..1])?;
    }
    if let Some(e) = &m.psi {
        check("psi", "expr", e, &c)?;
    }
    if let Some(e) = &m.radial_f {
        check("radial", "f", e, &c[..1])?;
    }
    if let Some(FiberDecl::Custom { gij, .. }) = &m.fiber {
        for row in gij {
            for e in row {
                check("fiber", "gij", e, &c[1..])?;
            }
        }
    }
    match &m.density {
        DensityDecl::None => {}
        DensityDecl::Gradient(e) => check("density", "f", e, &c)?,
        DensityDecl::FiberPotential(e) => check("density", "f_L", e, &c[1..])?,
        DensityDecl::Vector(xs) => {
            for (k, e) in xs.iter().enumerate() {
                check("density", &format!("x{}", k + 1), e, &c)?;
            }
        }
    }
    if let Some(e) = &m.bochner_h {
        check("bochner", "h", e, &c)?;
    }
    Ok(())
}
