//! Experiment configuration files.
//!
//! The format is line oriented: `key = value` pairs, `[section]` headers and
//! `#` comments. Lists are comma separated and numbers may be written as
//! fractions (`1/64`). Keys before the first header are top-level keys.

use std::cell::Cell;
use std::path::PathBuf;

use serde::Serialize;

use crate::analytic::Analytic;
use crate::corpus::{ExampleField, ExampleId, ExampleParams};
use crate::energy::HelfrichParams;
use crate::grid::{DomainSpec, Shape};
use crate::minimize::{GradientMethod, InitialField, MinimizeConfig, Mode};
use crate::{Error, Result};

/// Driver selected by the `command` key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Energy,
    Verify,
    Example,
    Relax,
    Minimize,
    Sweep,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Energy => "energy",
            Command::Verify => "verify",
            Command::Example => "example",
            Command::Relax => "relax",
            Command::Minimize => "minimize",
            Command::Sweep => "sweep",
        }
    }
}

/// Shape and lattice of the computational domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DomainConfig {
    pub shape: Shape,
    pub polar: bool,
    pub n_theta: Option<usize>,
}

impl DomainConfig {
    pub fn spec(&self, h: f64) -> DomainSpec {
        let s = DomainSpec::new(self.shape, h);
        if self.polar {
            s.polar(self.n_theta)
        } else {
            s
        }
    }
}

/// `[example]`: a singular example and its excision and scaling studies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExampleConfig {
    pub field: ExampleField,
    pub n_theta: usize,
    /// Excision widths, strictly decreasing.
    pub deltas: Vec<f64>,
    /// Exponent of the ∫|∇u|^p column.
    pub p: f64,
    /// Multipliers ε of the scaling study W0(εu).
    pub epsilons: Vec<f64>,
}

/// `[relax]`: approximating sequence of the `[example]` field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelaxConfig {
    pub sigma0: f64,
    pub js: Vec<u32>,
    pub gamma: f64,
    pub l1_tol: f64,
    /// Threshold on g below which the graph counts as vertical.
    pub attainment_tol: Option<f64>,
}

/// Starting field of the descent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitChoice {
    PhiExtension,
    Zero,
    Bump,
}

/// `[minimize]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimizeBlock {
    pub mode: Mode,
    pub init: InitChoice,
    pub bump_center: [f64; 2],
    pub bump_radius: f64,
    pub bump_amplitude: f64,
    pub max_iter: usize,
    pub step0: f64,
    pub backtrack: f64,
    pub armijo: f64,
    pub grad_tol: f64,
    pub energy_tol: f64,
    pub q_floor: f64,
    pub gradient: GradientMethod,
    pub precondition: bool,
    /// Number of seeded starts; more than one runs them in parallel.
    pub starts: usize,
}

impl MinimizeBlock {
    /// Library configuration for the start with bump seed `seed`.
    pub fn to_config(&self, params: HelfrichParams, seed: u64) -> MinimizeConfig {
        let init = match self.init {
            InitChoice::PhiExtension => InitialField::PhiExtension,
            InitChoice::Zero => InitialField::Zero,
            InitChoice::Bump => InitialField::SeededBump {
                seed,
                center: self.bump_center,
                radius: self.bump_radius,
                amplitude: self.bump_amplitude,
            },
        };
        MinimizeConfig {
            mode: self.mode,
            params,
            init,
            max_iter: self.max_iter,
            step0: self.step0,
            backtrack: self.backtrack,
            armijo: self.armijo,
            grad_tol: self.grad_tol,
            energy_tol: self.energy_tol,
            q_floor: self.q_floor,
            gradient: self.gradient,
            precondition: self.precondition,
        }
    }
}

/// `[verify]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyConfig {
    /// Seeded random fields for the inequality chain.
    pub random_fields: usize,
}

/// `[sweep]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepConfig {
    /// Exact W0 of the field; derived automatically where known.
    pub reference: Option<f64>,
}

/// A fully validated experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub seed: u64,
    /// Output directory; not part of the configuration hash.
    #[serde(skip)]
    pub output: PathBuf,
    /// Grid spacings, coarsest first.
    pub resolutions: Vec<f64>,
    pub domain: DomainConfig,
    /// The surface u evaluated by `energy` and `sweep`.
    pub field: Analytic,
    /// Boundary data φ; defaults to the field.
    pub boundary: Analytic,
    pub energy: HelfrichParams,
    /// Allowed trace mismatch for the bound certificates.
    pub trace_tol: f64,
    pub example: ExampleConfig,
    pub relax: RelaxConfig,
    pub minimize: MinimizeBlock,
    pub verify: VerifyConfig,
    pub sweep: SweepConfig,
}

/// Command-line overrides applied after parsing.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub resolutions: Option<String>,
}

// ---------------------------------------------------------------------------
// Raw key/value layer

#[derive(Debug)]
struct Entry {
    section: String,
    key: String,
    value: String,
    line: usize,
    used: Cell<bool>,
}

/// Parsed but untyped configuration file.
#[derive(Debug)]
pub struct ConfigFile {
    entries: Vec<Entry>,
}

fn err(line: usize, field: &str, msg: impl std::fmt::Display) -> Error {
    if line == 0 {
        Error::Config(format!("{}: {}", field, msg))
    } else {
        Error::Config(format!("line {}: {}: {}", line, field, msg))
    }
}

const SECTIONS: [&str; 10] =
    ["", "domain", "field", "boundary", "energy", "example", "relax", "minimize", "verify", "sweep"];

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<Entry> = Vec::new();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = raw.split('#').next().unwrap_or("").trim();
            if s.is_empty() {
                continue;
            }
            if let Some(rest) = s.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(line, "section", format!("unterminated header '{}'", s)))?
                    .trim();
                if name.is_empty() || !SECTIONS.contains(&name) {
                    return Err(err(line, "section", format!("unknown section [{}]", name)));
                }
                section = name.to_string();
                continue;
            }
            let (k, v) = s.split_once('=').ok_or_else(|| err(line, "syntax", format!("expected 'key = value', got '{}'", s)))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || !k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(err(line, "syntax", format!("invalid key '{}'", k)));
            }
            if let Some(prev) = entries.iter().find(|e| e.section == section && e.key == k) {
                return Err(err(line, &qualified(&section, k), format!("duplicate key (first set on line {})", prev.line)));
            }
            entries.push(Entry { section: section.clone(), key: k.into(), value: v.into(), line, used: Cell::new(false) });
        }
        Ok(ConfigFile { entries })
    }

    fn entry(&self, section: &str, key: &str) -> Option<&Entry> {
        let e = self.entries.iter().find(|e| e.section == section && e.key == key)?;
        e.used.set(true);
        Some(e)
    }

    fn has_section(&self, section: &str) -> bool {
        self.entries.iter().any(|e| e.section == section)
    }

    fn str_or(&self, section: &str, key: &str, default: &str) -> (String, usize) {
        match self.entry(section, key) {
            Some(e) => (e.value.clone(), e.line),
            None => (default.to_string(), 0),
        }
    }

    fn num(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        match self.entry(section, key) {
            Some(e) => parse_num(&e.value).map_err(|m| err(e.line, &qualified(section, key), m)),
            None => Ok(default),
        }
    }

    fn opt_num(&self, section: &str, key: &str) -> Result<Option<f64>> {
        match self.entry(section, key) {
            Some(e) => parse_num(&e.value).map(Some).map_err(|m| err(e.line, &qualified(section, key), m)),
            None => Ok(None),
        }
    }

    fn int(&self, section: &str, key: &str, default: u64) -> Result<u64> {
        match self.entry(section, key) {
            Some(e) => e
                .value
                .parse::<u64>()
                .map_err(|_| err(e.line, &qualified(section, key), format!("expected a non-negative integer, got '{}'", e.value))),
            None => Ok(default),
        }
    }

    fn list(&self, section: &str, key: &str, default: &[f64]) -> Result<(Vec<f64>, usize)> {
        match self.entry(section, key) {
            Some(e) => parse_list(&e.value).map(|v| (v, e.line)).map_err(|m| err(e.line, &qualified(section, key), m)),
            None => Ok((default.to_vec(), 0)),
        }
    }

    fn point(&self, section: &str, key: &str, default: [f64; 2]) -> Result<[f64; 2]> {
        let (v, line) = self.list(section, key, &default)?;
        if v.len() != 2 {
            return Err(err(line, &qualified(section, key), format!("expected 2 values, got {}", v.len())));
        }
        Ok([v[0], v[1]])
    }

    fn flag(&self, section: &str, key: &str, default: bool) -> Result<bool> {
        match self.entry(section, key) {
            Some(e) => match e.value.as_str() {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                v => Err(err(e.line, &qualified(section, key), format!("expected true or false, got '{}'", v))),
            },
            None => Ok(default),
        }
    }

    fn line_of(&self, section: &str, key: &str) -> usize {
        self.entries.iter().find(|e| e.section == section && e.key == key).map_or(0, |e| e.line)
    }

    fn unused(&self) -> Result<()> {
        match self.entries.iter().find(|e| !e.used.get()) {
            Some(e) => Err(err(e.line, &qualified(&e.section, &e.key), "unknown key")),
            None => Ok(()),
        }
    }
}

/// Message of a library error without its category prefix.
fn inner(e: Error) -> String {
    match e {
        Error::Config(m) | Error::Parameter(m) | Error::Precondition(m) | Error::Resolution(m) => m,
        other => other.to_string(),
    }
}

fn qualified(section: &str, key: &str) -> String {
    if section.is_empty() {
        key.to_string()
    } else {
        format!("{}.{}", section, key)
    }
}

/// A decimal number or a fraction `a/b`.
fn parse_num(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("expected a number, got '{}'", s))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("expected a number, got '{}'", s))?;
            a / b
        }
        None => s.parse().map_err(|_| format!("expected a number, got '{}'", s))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{}' is not finite", s))
    }
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(parse_num).collect()
}

// ---------------------------------------------------------------------------
// Typed layer

/// Default grid spacings.
pub const DEFAULT_RESOLUTIONS: [f64; 3] = [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0];

/// Checks that spacings are positive and strictly refining.
pub fn validate_resolutions(hs: &[f64], field: &str, line: usize) -> Result<()> {
    if hs.is_empty() {
        return Err(err(line, field, "at least one grid spacing is required"));
    }
    for (i, &h) in hs.iter().enumerate() {
        if !(h > 0.0) {
            return Err(err(line, field, format!("grid spacing h = {} (entry {}) must be positive", h, i + 1)));
        }
    }
    if hs.windows(2).any(|w| w[1] >= w[0]) {
        return Err(err(line, field, "resolutions must increase (grid spacings strictly decreasing)"));
    }
    Ok(())
}

impl ExperimentConfig {
    /// Parses and validates a configuration file, then applies `overrides`.
    pub fn from_str(text: &str, overrides: &Overrides) -> Result<Self> {
        let f = ConfigFile::parse(text)?;
        let mut cfg = Self::from_file(&f)?;
        f.unused()?;
        if let Some(o) = &overrides.output {
            cfg.output = o.clone();
        }
        if let Some(s) = overrides.seed {
            cfg.seed = s;
        }
        if let Some(r) = &overrides.resolutions {
            let hs = parse_list(r).map_err(|m| err(0, "--resolutions", m))?;
            validate_resolutions(&hs, "--resolutions", 0)?;
            cfg.resolutions = hs;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path, overrides: &Overrides) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {}", path.display(), e)))?;
        Self::from_str(&text, overrides)
    }

    fn from_file(f: &ConfigFile) -> Result<Self> {
        let (cmd, line) = f.str_or("", "command", "");
        let command = match cmd.as_str() {
            "energy" => Command::Energy,
            "verify" => Command::Verify,
            "example" => Command::Example,
            "relax" => Command::Relax,
            "minimize" => Command::Minimize,
            "sweep" => Command::Sweep,
            "" => return Err(err(0, "command", "missing; expected energy, verify, example, relax, minimize or sweep")),
            other => return Err(err(line, "command", format!("unknown command '{}'", other))),
        };
        let seed = f.int("", "seed", 0)?;
        let (out, _) = f.str_or("", "output", "out");
        let resolutions = if let Some(e) = f.entry("", "h") {
            if f.entry("", "resolutions").is_some() {
                return Err(err(e.line, "h", "give either h or resolutions, not both"));
            }
            let h = parse_num(&e.value).map_err(|m| err(e.line, "h", m))?;
            if !(h > 0.0) {
                return Err(err(e.line, "h", format!("grid spacing must be positive, got {}", h)));
            }
            vec![h]
        } else {
            let (hs, line) = f.list("", "resolutions", &DEFAULT_RESOLUTIONS)?;
            validate_resolutions(&hs, "resolutions", line)?;
            hs
        };

        let domain = domain_block(f)?;
        let field = analytic_block(f, "field", seed)?.unwrap_or(Analytic::Zero);
        let boundary = analytic_block(f, "boundary", seed)?.unwrap_or_else(|| field.clone());
        let energy = HelfrichParams {
            alpha: f.num("energy", "alpha", 0.0)?,
            h0: f.num("energy", "h0", 0.0)?,
            gamma: f.num("energy", "gamma", 0.0)?,
        };
        let trace_tol = f.num("energy", "trace_tol", 1e-10)?;
        if !(trace_tol > 0.0) {
            return Err(err(f.line_of("energy", "trace_tol"), "energy.trace_tol", "must be positive"));
        }

        let example = example_block(f)?;
        let relax = relax_block(f, &example.field)?;
        let minimize = minimize_block(f)?;
        let verify = VerifyConfig { random_fields: f.int("verify", "random_fields", 100)? as usize };
        let sweep = SweepConfig { reference: f.opt_num("sweep", "reference")? };
        Ok(ExperimentConfig {
            command,
            seed,
            output: PathBuf::from(out),
            resolutions,
            domain,
            field,
            boundary,
            energy,
            trace_tol,
            example,
            relax,
            minimize,
            verify,
            sweep,
        })
    }

    fn validate(&self) -> Result<()> {
        if self.domain.polar && matches!(self.domain.shape, Shape::Rectangle { .. }) {
            return Err(err(0, "domain.mode", "polar lattices need a disk or annulus"));
        }
        let p = self.energy;
        if ![p.alpha, p.h0, p.gamma].iter().all(|v| v.is_finite()) {
            return Err(err(0, "energy", "parameters must be finite"));
        }
        let cfg = self.minimize.to_config(self.energy, self.seed);
        cfg.validate().map_err(|e| match e {
            Error::Config(m) | Error::Parameter(m) => Error::Config(format!("minimize: {}", m)),
            other => other,
        })
    }

    /// Seeds of the minimizer starts.
    pub fn start_seeds(&self) -> Vec<u64> {
        (0..self.minimize.starts as u64).map(|i| self.seed.wrapping_add(i)).collect()
    }
}

fn domain_block(f: &ConfigFile) -> Result<DomainConfig> {
    let (kind, line) = f.str_or("domain", "shape", "disk");
    let center = f.point("domain", "center", [0.0; 2])?;
    let shape = match kind.as_str() {
        "disk" => Shape::Disk { center, radius: f.num("domain", "radius", 1.0)? },
        "annulus" => Shape::Annulus { center, inner: f.num("domain", "inner", 0.5)?, outer: f.num("domain", "outer", 1.0)? },
        "rectangle" => Shape::Rectangle { min: f.point("domain", "min", [0.0; 2])?, max: f.point("domain", "max", [1.0; 2])? },
        other => return Err(err(line, "domain.shape", format!("unknown shape '{}' (disk, annulus, rectangle)", other))),
    };
    let ok = match shape {
        Shape::Disk { radius, .. } => radius > 0.0,
        Shape::Annulus { inner, outer, .. } => inner > 0.0 && outer > inner,
        Shape::Rectangle { min, max } => max[0] > min[0] && max[1] > min[1],
    };
    if !ok {
        return Err(err(line, "domain", format!("degenerate {} parameters", kind)));
    }
    let default_mode = if matches!(shape, Shape::Rectangle { .. }) { "cartesian" } else { "polar" };
    let (mode, mline) = f.str_or("domain", "mode", default_mode);
    let polar = match mode.as_str() {
        "polar" => true,
        "cartesian" => false,
        other => return Err(err(mline, "domain.mode", format!("unknown mode '{}' (polar, cartesian)", other))),
    };
    let n_theta = match f.int("domain", "n_theta", 0)? as usize {
        0 => None,
        n if n % 8 == 0 => Some(n),
        n => return Err(err(f.line_of("domain", "n_theta"), "domain.n_theta", format!("must be a multiple of 8, got {}", n))),
    };
    Ok(DomainConfig { shape, polar, n_theta })
}

fn analytic_block(f: &ConfigFile, s: &str, seed: u64) -> Result<Option<Analytic>> {
    if !f.has_section(s) {
        return Ok(None);
    }
    let (family, line) = f.str_or(s, "family", "");
    let center = |f: &ConfigFile| f.point(s, "center", [0.0; 2]);
    let positive = |name: &str, v: f64| {
        if v > 0.0 {
            Ok(v)
        } else {
            Err(err(f.line_of(s, name), &qualified(s, name), format!("must be positive, got {}", v)))
        }
    };
    let field_seed = |f: &ConfigFile| f.int(s, "seed", seed);
    let a = match family.as_str() {
        "zero" => Analytic::Zero,
        "constant" => Analytic::Constant { c: f.num(s, "c", 0.0)? },
        "affine" => Analytic::Affine { a: f.num(s, "a", 0.0)?, b: f.num(s, "b", 0.0)?, c: f.num(s, "c", 0.0)? },
        "quadratic" => {
            let (m, mline) = f.list(s, "a", &[0.0; 4])?;
            if m.len() != 4 {
                return Err(err(mline, &qualified(s, "a"), "expected 4 entries (row-major 2×2)"));
            }
            Analytic::Quadratic { c: f.num(s, "c", 0.0)?, b: f.point(s, "b", [0.0; 2])?, a: [[m[0], m[1]], [m[2], m[3]]] }
        }
        "parabolic_cylinder" => Analytic::parabolic_cylinder(),
        "sphere_cap" => Analytic::SphereCap { center: center(f)?, radius: positive("radius", f.num(s, "radius", 1.0)?)? },
        "gaussian" => Analytic::Gaussian {
            center: center(f)?,
            amplitude: f.num(s, "amplitude", 1.0)?,
            width: positive("width", f.num(s, "width", 0.5)?)?,
        },
        "random_fourier" => Analytic::random_fourier(
            field_seed(f)?,
            f.int(s, "modes", 5)? as usize,
            positive("k_max", f.num(s, "k_max", 3.0)?)?,
            f.num(s, "amplitude", 0.5)?,
        ),
        "clamped_bump" => Analytic::random_clamped_bump(
            field_seed(f)?,
            center(f)?,
            positive("radius", f.num(s, "radius", 1.0)?)?,
            f.num(s, "amplitude", 0.2)?,
        ),
        "" => return Err(err(0, &qualified(s, "family"), "missing")),
        other => {
            return Err(err(
                line,
                &qualified(s, "family"),
                format!(
                    "unknown family '{}' (zero, constant, affine, quadratic, parabolic_cylinder, sphere_cap, gaussian, random_fourier, clamped_bump)",
                    other
                ),
            ))
        }
    };
    Ok(Some(a))
}

fn example_block(f: &ConfigFile) -> Result<ExampleConfig> {
    let (id, line) = f.str_or("example", "id", "sqrtlog");
    let id = ExampleId::parse(&id).map_err(|e| err(line, "example.id", inner(e)))?;
    let d = ExampleParams::default();
    let k = f.int("example", "k", d.k as u64)?;
    let params = ExampleParams {
        epsilon: f.num("example", "epsilon", d.epsilon)?,
        k: u32::try_from(k).map_err(|_| err(f.line_of("example", "k"), "example.k", "too large"))?,
        jump: f.num("example", "jump", d.jump)?,
    };
    let field = ExampleField::new(id, params).map_err(|e| err(f.line_of("example", "k"), "example", inner(e)))?;
    let n_theta = f.int("example", "n_theta", 16)? as usize;
    if n_theta == 0 || n_theta % 8 != 0 {
        return Err(err(f.line_of("example", "n_theta"), "example.n_theta", format!("must be a positive multiple of 8, got {}", n_theta)));
    }
    let (deltas, dline) = f.list("example", "deltas", &[])?;
    if deltas.iter().any(|&d| !(d > 0.0)) || deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(err(dline, "example.deltas", "excision widths must be positive and strictly decreasing"));
    }
    let p = f.num("example", "p", 2.0)?;
    if !(p > 0.0) {
        return Err(err(f.line_of("example", "p"), "example.p", "must be positive"));
    }
    let (epsilons, _) = f.list("example", "epsilons", &[])?;
    Ok(ExampleConfig { field, n_theta, deltas, p, epsilons })
}

fn relax_block(f: &ConfigFile, field: &ExampleField) -> Result<RelaxConfig> {
    let sigma0 = f.num("relax", "sigma0", field.default_sigma0())?;
    if !(sigma0 > 0.0) {
        return Err(err(f.line_of("relax", "sigma0"), "relax.sigma0", "must be positive"));
    }
    let (js, line) = f.list("relax", "js", &[1.0, 2.0, 3.0, 4.0])?;
    let js = js
        .iter()
        .map(|&j| if j >= 1.0 && j.fract() == 0.0 { Ok(j as u32) } else { Err(err(line, "relax.js", format!("index {} is not a positive integer", j))) })
        .collect::<Result<Vec<u32>>>()?;
    if js.is_empty() || js.windows(2).any(|w| w[1] <= w[0]) {
        return Err(err(line, "relax.js", "indices must be nonempty and strictly increasing"));
    }
    Ok(RelaxConfig {
        sigma0,
        js,
        gamma: f.num("relax", "gamma", 0.0)?,
        l1_tol: f.num("relax", "l1_tol", 0.05)?,
        attainment_tol: f.opt_num("relax", "attainment_tol")?,
    })
}

fn minimize_block(f: &ConfigFile) -> Result<MinimizeBlock> {
    let s = "minimize";
    let d = MinimizeConfig::default();
    let (mode, line) = f.str_or(s, "mode", "dirichlet");
    let mode = match mode.as_str() {
        "dirichlet" => Mode::Dirichlet,
        "navier" => Mode::Navier,
        other => return Err(err(line, "minimize.mode", format!("unknown mode '{}' (dirichlet, navier)", other))),
    };
    let (init, line) = f.str_or(s, "init", "phi_extension");
    let init = match init.as_str() {
        "phi_extension" => InitChoice::PhiExtension,
        "zero" => InitChoice::Zero,
        "bump" => InitChoice::Bump,
        other => return Err(err(line, "minimize.init", format!("unknown start '{}' (phi_extension, zero, bump)", other))),
    };
    let (gradient, line) = f.str_or(s, "gradient", "adjoint");
    let gradient = match gradient.as_str() {
        "adjoint" => GradientMethod::Adjoint,
        "forward_difference" => GradientMethod::ForwardDifference,
        other => return Err(err(line, "minimize.gradient", format!("unknown method '{}' (adjoint, forward_difference)", other))),
    };
    let starts = f.int(s, "starts", 1)? as usize;
    if starts == 0 {
        return Err(err(f.line_of(s, "starts"), "minimize.starts", "must be at least 1"));
    }
    if starts > 1 && init != InitChoice::Bump {
        return Err(err(f.line_of(s, "starts"), "minimize.starts", "several starts need init = bump"));
    }
    let block = MinimizeBlock {
        mode,
        init,
        bump_center: f.point(s, "bump_center", [0.0; 2])?,
        bump_radius: f.num(s, "bump_radius", 0.6)?,
        bump_amplitude: f.num(s, "bump_amplitude", 0.2)?,
        max_iter: f.int(s, "max_iter", d.max_iter as u64)? as usize,
        step0: f.num(s, "step0", d.step0)?,
        backtrack: f.num(s, "backtrack", d.backtrack)?,
        armijo: f.num(s, "armijo", d.armijo)?,
        grad_tol: f.num(s, "grad_tol", d.grad_tol)?,
        energy_tol: f.num(s, "energy_tol", d.energy_tol)?,
        q_floor: f.num(s, "q_floor", d.q_floor)?,
        gradient,
        precondition: f.flag(s, "precondition", d.precondition)?,
        starts,
    };
    if !(block.bump_radius > 0.0) {
        return Err(err(f.line_of(s, "bump_radius"), "minimize.bump_radius", "must be positive"));
    }
    for (key, v) in [
        ("step0", block.step0),
        ("backtrack", block.backtrack),
        ("armijo", block.armijo),
        ("grad_tol", block.grad_tol),
        ("energy_tol", block.energy_tol),
    ] {
        let bad = match key {
            "backtrack" | "armijo" => !(v > 0.0 && v < 1.0),
            _ => !(v > 0.0),
        };
        if bad {
            let range = if matches!(key, "backtrack" | "armijo") { "in (0, 1)" } else { "positive" };
            return Err(err(f.line_of(s, key), &qualified(s, key), format!("must be {}, got {}", range, v)));
        }
    }
    Ok(block)
}
