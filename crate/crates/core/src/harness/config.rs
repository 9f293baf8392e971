//! Run configuration, TOML loading, and overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::presets;
use crate::error::{Error, Result};
use crate::hydro::{EtaMode, Formulation};
use crate::mesh::BoundingBox;
use crate::scheme::InitialSaturation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    Test1,
    Test2,
    Custom,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::Test1 => "test1",
            Case::Test2 => "test2",
            Case::Custom => "custom",
        })
    }
}

impl FromStr for Case {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "test1" => Ok(Case::Test1),
            "test2" => Ok(Case::Test2),
            "custom" => Ok(Case::Custom),
            _ => Err(Error::Config(format!("unknown case `{s}` (expected test1|test2|custom)"))),
        }
    }
}

/// `NxM` for a uniform grid of the domain, `file:PATH` for a mesh file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MeshSpec {
    Rect { nx: usize, ny: usize },
    File { path: PathBuf },
}

impl fmt::Display for MeshSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeshSpec::Rect { nx, ny } => write!(f, "{nx}x{ny}"),
            MeshSpec::File { path } => write!(f, "file:{}", path.display()),
        }
    }
}

impl FromStr for MeshSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if let Some(path) = s.strip_prefix("file:") {
            if path.is_empty() {
                return Err(Error::Config("empty mesh path".into()));
            }
            return Ok(MeshSpec::File { path: PathBuf::from(path) });
        }
        let bad = || Error::Config(format!("mesh `{s}` is neither NxM nor file:PATH"));
        let (a, b) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        let nx: usize = a.trim().parse().map_err(|_| bad())?;
        let ny: usize = b.trim().parse().map_err(|_| bad())?;
        if nx == 0 || ny == 0 {
            return Err(bad());
        }
        Ok(MeshSpec::Rect { nx, ny })
    }
}

impl TryFrom<String> for MeshSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MeshSpec> for String {
    fn from(m: MeshSpec) -> String {
        m.to_string()
    }
}

/// Constant pressure imposed on the boundary edges whose point `x_sigma`
/// lies in `region`; every other boundary edge is impermeable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirichletSpec {
    pub region: BoundingBox,
    pub pressure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub case: Case,
    pub formulation: Formulation,
    pub beta: f64,
    pub p_b: f64,
    pub eta_mode: EtaMode,
    pub mesh: MeshSpec,
    /// Domain of `Rect` meshes.
    pub domain: BoundingBox,
    pub dt: f64,
    pub t_end: f64,
    /// Newton stops when `sum |f_K| <= eps * dt`.
    pub eps: f64,
    pub max_iter: usize,
    /// `g = (0, -1)` when set, no gravity otherwise.
    pub gravity: bool,
    pub dirichlet: Option<DirichletSpec>,
    pub initial: InitialSaturation,
    pub adaptive_dt: bool,
    /// Tolerance of the reference run used for `err_s`/`err_u`; none skips it.
    pub reference_eps: Option<f64>,
    pub snapshot_times: Vec<f64>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn gravity_vector(&self) -> [f64; 2] {
        if self.gravity {
            [0.0, -1.0]
        } else {
            [0.0, 0.0]
        }
    }

    /// Number of steps: `T / dt` when integral to `1e-9`, truncated otherwise.
    pub fn num_steps(&self) -> usize {
        let r = self.t_end / self.dt;
        let n = r.round();
        if (r - n).abs() <= 1e-9 * n.max(1.0) {
            n as usize
        } else {
            r.floor() as usize
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("beta", self.beta)?;
        positive("dt", self.dt)?;
        positive("eps", self.eps)?;
        if let Some(r) = self.reference_eps {
            positive("reference_eps", r)?;
        }
        if !(self.p_b < 0.0) {
            return Err(Error::Config(format!("p_b must be negative, got {}", self.p_b)));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::Config(format!("t_end must be nonnegative, got {}", self.t_end)));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        if !(self.domain.width() > 0.0 && self.domain.height() > 0.0) {
            return Err(Error::Config(format!("degenerate domain {:?}", self.domain)));
        }
        if let Some(d) = &self.dirichlet {
            if !d.pressure.is_finite() {
                return Err(Error::Config("Dirichlet pressure must be finite".into()));
            }
        }
        if self.snapshot_times.iter().any(|t| !(*t >= 0.0 && *t <= self.t_end)) {
            return Err(Error::Config("snapshot times must lie in [0, t_end]".into()));
        }
        Ok(())
    }

    /// Resolved configuration as TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configurations serialize")
    }
}

/// Every field of [`RunConfig`] as an optional override.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub case: Option<Case>,
    pub formulation: Option<Formulation>,
    pub beta: Option<f64>,
    pub p_b: Option<f64>,
    pub eta_mode: Option<EtaMode>,
    pub mesh: Option<MeshSpec>,
    pub domain: Option<BoundingBox>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub eps: Option<f64>,
    pub max_iter: Option<usize>,
    pub gravity: Option<bool>,
    pub dirichlet: Option<DirichletSpec>,
    /// Drops the Dirichlet region of the preset.
    pub no_dirichlet: Option<bool>,
    pub initial: Option<InitialSaturation>,
    pub adaptive_dt: Option<bool>,
    pub reference_eps: Option<f64>,
    /// Drops the reference run of the preset.
    pub no_reference: Option<bool>,
    pub snapshot_times: Option<Vec<f64>>,
    pub output: Option<PathBuf>,
}

impl ConfigOverrides {
    /// Later values win.
    pub fn merge(mut self, later: ConfigOverrides) -> ConfigOverrides {
        macro_rules! take {
            ($($f:ident),*) => { $( if later.$f.is_some() { self.$f = later.$f; } )* };
        }
        take!(
            case, formulation, beta, p_b, eta_mode, mesh, domain, dt, t_end, eps, max_iter, gravity, dirichlet,
            no_dirichlet, initial, adaptive_dt, reference_eps, no_reference, snapshot_times, output
        );
        self
    }

    /// Start from the preset of the chosen case and apply every override.
    pub fn resolve(self) -> Result<RunConfig> {
        let case = self.case.unwrap_or(Case::Test1);
        let mut c = presets::base_for(case);
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { c.$f = v; } )* };
        }
        let explicit_snapshots = self.snapshot_times.is_some();
        set!(formulation, beta, p_b, eta_mode, mesh, domain, dt, t_end, eps, max_iter, gravity, initial, adaptive_dt, snapshot_times);
        if !explicit_snapshots {
            // preset snapshots past a shortened final time are dropped
            let t_end = c.t_end;
            c.snapshot_times.retain(|&t| t <= t_end);
        }
        if self.no_dirichlet == Some(true) {
            c.dirichlet = None;
        }
        if let Some(d) = self.dirichlet {
            c.dirichlet = Some(d);
        }
        if self.no_reference == Some(true) {
            c.reference_eps = None;
        }
        if let Some(r) = self.reference_eps {
            c.reference_eps = Some(r);
        }
        if let Some(o) = self.output {
            c.output = Some(o);
        }
        c.validate()?;
        Ok(c)
    }
}

/// Parameter lists of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub betas: Vec<f64>,
    pub eps: Vec<f64>,
    pub formulations: Vec<Formulation>,
}

/// A configuration file: run overrides at top level and an optional
/// `[sweep]` table.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(flatten)]
    pub run: ConfigOverrides,
    pub sweep: Option<SweepSpec>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Read a configuration file. Relative mesh and output paths are taken
    /// relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(MeshSpec::File { path: p }) = &mut cfg.run.mesh {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(o) = &mut cfg.run.output {
            if o.is_relative() {
                *o = base.join(&*o);
            }
        }
        Ok(cfg)
    }
}
