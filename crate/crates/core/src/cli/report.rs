//! Report files: JSON with 17 significant digits, CSV tables, config hash.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::grid::DiscreteDomain;
use crate::Result;

/// Pretty JSON with every float written as `{:.16e}`.
struct Digits17(PrettyFormatter<'static>);

impl Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{:.16e}", v)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes `value` as JSON with 17 significant digits per float.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17(PrettyFormatter::new()));
    value.serialize(&mut ser).map_err(|e| crate::Error::Io(e.to_string()))?;
    buf.push(b'\n');
    Ok(buf)
}

/// Hex SHA-256 of the canonical JSON form of the configuration.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let canonical = serde_json::to_vec(cfg).expect("configuration serializes");
    Sha256::digest(&canonical).iter().map(|b| format!("{:02x}", b)).collect()
}

/// Lattice parameters of one grid.
#[derive(Debug, Clone, Serialize)]
pub struct GridInfo {
    pub h: f64,
    pub mode: &'static str,
    pub nodes: usize,
    pub n_theta: Option<usize>,
    pub n_rings: Option<usize>,
    pub dr: Option<f64>,
    pub stencil_fallbacks: usize,
}

impl GridInfo {
    pub fn of(d: &DiscreteDomain) -> Self {
        let p = d.polar_info();
        GridInfo {
            h: d.h(),
            mode: if d.is_polar() { "polar" } else { "cartesian" },
            nodes: d.len(),
            n_theta: p.map(|p| p.n_theta),
            n_rings: p.map(|p| p.n_rings),
            dr: p.map(|p| p.dr),
            stencil_fallbacks: d.stencil_fallbacks(),
        }
    }

    fn summary(&self) -> String {
        let mut s = format!("h={:.16e} mode={} nodes={}", self.h, self.mode, self.nodes);
        if let (Some(t), Some(r)) = (self.n_theta, self.n_rings) {
            s.push_str(&format!(" n_theta={} n_rings={}", t, r));
        }
        s
    }
}

/// Envelope shared by every JSON report.
#[derive(Serialize)]
pub struct Report<'a, T: Serialize> {
    pub command: &'static str,
    pub version: &'static str,
    pub config_hash: &'a str,
    pub seed: u64,
    pub config: &'a ExperimentConfig,
    pub grids: &'a [GridInfo],
    pub results: T,
}

/// Writes report files into one output directory.
pub struct Writer<'a> {
    pub dir: PathBuf,
    pub hash: String,
    pub cfg: &'a ExperimentConfig,
    pub files: Vec<PathBuf>,
}

impl<'a> Writer<'a> {
    pub fn new(cfg: &'a ExperimentConfig) -> Result<Self> {
        std::fs::create_dir_all(&cfg.output)?;
        Ok(Writer { dir: cfg.output.clone(), hash: config_hash(cfg), cfg, files: Vec::new() })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.files.push(p.clone());
        p
    }

    pub fn json<T: Serialize>(&mut self, name: &str, grids: &[GridInfo], results: T) -> Result<PathBuf> {
        let report = Report {
            command: self.cfg.command.as_str(),
            version: env!("CARGO_PKG_VERSION"),
            config_hash: &self.hash,
            seed: self.cfg.seed,
            config: self.cfg,
            grids,
            results,
        };
        let bytes = to_json(&report)?;
        let p = self.path(name);
        std::fs::write(&p, bytes)?;
        Ok(p)
    }

    /// CSV table headed by `#` lines carrying the hash and grid parameters.
    pub fn csv(&mut self, name: &str, grids: &[GridInfo], header: &[&str], rows: &[Vec<Cell>]) -> Result<PathBuf> {
        let mut out = String::new();
        out.push_str(&format!("# config_hash={}\n", self.hash));
        for g in grids {
            out.push_str(&format!("# grid {}\n", g.summary()));
        }
        out.push_str(&header.join(","));
        out.push('\n');
        for r in rows {
            let line: Vec<String> = r.iter().map(Cell::render).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        let p = self.path(name);
        std::fs::write(&p, out)?;
        Ok(p)
    }

    /// Node table written by a closure (field dumps).
    pub fn raw(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<PathBuf> {
        let mut buf = format!("# config_hash={}\n", self.hash).into_bytes();
        f(&mut buf)?;
        let p = self.path(name);
        std::fs::write(&p, buf)?;
        Ok(p)
    }
}

/// One CSV cell.
#[derive(Debug, Clone)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
    B(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(v) => format!("{:.16e}", v),
            Cell::I(v) => v.to_string(),
            Cell::S(s) => s.clone(),
            Cell::B(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::I(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::B(v)
    }
}

/// Observed order between successive errors, `log(e_i/e_{i+1}) / log(h_i/h_{i+1})`.
pub fn observed_orders(hs: &[f64], errs: &[f64]) -> Vec<f64> {
    hs.windows(2)
        .zip(errs.windows(2))
        .map(|(h, e)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect()
}

/// Least-squares slope of log e against log h.
pub fn fitted_order(hs: &[f64], errs: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = hs.iter().zip(errs).filter(|(_, e)| **e > 0.0).map(|(h, e)| (h.ln(), e.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

pub fn display(p: &Path) -> String {
    p.display().to_string()
}
