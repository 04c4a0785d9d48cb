//! Experiment configuration files (TOML).
//!
//! Numbers may be written as TOML numbers or as strings holding a fraction
//! such as `"2/3"`, which keeps exact grid translations readable.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use fraclab_core::ifs::product_ifs;
use fraclab_core::{Direction, Ifs, Similitude, SmoothMap};
use serde::de::{self, Deserializer};
use serde::Deserialize;

/// A real given as a number or a `"p/q"` string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Float(f64),
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Float(v) => Ok(Num(v)),
            Raw::Int(v) => Ok(Num(v as f64)),
            Raw::Text(s) => parse_fraction(&s).map(Num).map_err(de::Error::custom),
        }
    }
}

pub fn parse_fraction(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad number {t:?}: {e}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let q = parse(q)?;
            if q == 0.0 {
                return Err(format!("zero denominator in {s:?}"));
            }
            Ok(parse(p)? / q)
        }
        None => parse(s),
    }
}

/// A translation written as a scalar (one-dimensional systems) or a vector.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Coords {
    Scalar(Num),
    Vector(Vec<Num>),
}

impl Coords {
    pub fn to_vec(&self) -> Vec<f64> {
        match self {
            Coords::Scalar(v) => vec![v.0],
            Coords::Vector(v) => v.iter().map(|x| x.0).collect(),
        }
    }
}

pub fn nums(v: &[Num]) -> Vec<f64> {
    v.iter().map(|x| x.0).collect()
}

/// An IFS written inline, or a path to a file holding one.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IfsSpec {
    /// TOML file with the remaining fields, relative to the config file.
    pub path: Option<PathBuf>,
    /// Common ratio; alternatively one ratio per map in `ratios`.
    pub ratio: Option<Num>,
    pub ratios: Option<Vec<Num>>,
    #[serde(default)]
    pub translations: Vec<Coords>,
    pub weights: Option<Vec<Num>>,
    /// Cartesian power of the system (2 or 3).
    pub power: Option<usize>,
    /// Padding to this ambient dimension with zero coordinates.
    pub embed: Option<usize>,
    /// Moves the attractor by this vector.
    pub shift: Option<Vec<Num>>,
}

impl IfsSpec {
    pub fn build(&self, base_dir: &Path) -> anyhow::Result<Ifs> {
        if let Some(path) = &self.path {
            let full = base_dir.join(path);
            let text = std::fs::read_to_string(&full).with_context(|| format!("reading IFS file {}", full.display()))?;
            let inner: IfsSpec = toml::from_str(&text).with_context(|| format!("parsing IFS file {}", full.display()))?;
            if inner.path.is_some() {
                bail!("IFS file {} must not refer to another file", full.display());
            }
            if self.ratio.is_some() || self.ratios.is_some() || !self.translations.is_empty() || self.weights.is_some() {
                bail!("an IFS given by `path` takes only `power`, `embed` and `shift` inline");
            }
            let merged = IfsSpec {
                path: None,
                power: self.power.or(inner.power),
                embed: self.embed.or(inner.embed),
                shift: self.shift.clone().or(inner.shift.clone()),
                ..inner
            };
            let dir = full.parent().unwrap_or(base_dir).to_path_buf();
            return merged.build(&dir);
        }
        if self.translations.is_empty() {
            bail!("the IFS needs `translations` (or a `path`)");
        }
        let ratios: Vec<f64> = match (&self.ratio, &self.ratios) {
            (Some(r), None) => vec![r.0; self.translations.len()],
            (None, Some(rs)) => nums(rs),
            (Some(_), Some(_)) => bail!("give either `ratio` or `ratios`, not both"),
            (None, None) => bail!("the IFS needs `ratio` or `ratios`"),
        };
        if ratios.len() != self.translations.len() {
            bail!("{} ratios for {} translations", ratios.len(), self.translations.len());
        }
        let mut maps = Vec::with_capacity(ratios.len());
        for (r, t) in ratios.iter().zip(&self.translations) {
            let mut t = t.to_vec();
            if let Some(d) = self.embed {
                if d < t.len() {
                    bail!("cannot embed a {}-dimensional system in dimension {d}", t.len());
                }
                t.resize(d, 0.0);
            }
            if let Some(shift) = &self.shift {
                if shift.len() != t.len() {
                    bail!("shift has {} coordinates, translations have {}", shift.len(), t.len());
                }
                // conjugating by x ↦ x + s moves every fixed point by s
                for (ti, si) in t.iter_mut().zip(shift) {
                    *ti += (1.0 - r) * si.0;
                }
            }
            maps.push(Similitude::new(*r, &t)?);
        }
        let weights = self.weights.as_ref().map(|w| nums(w));
        let ifs = Ifs::new(maps, weights)?;
        Ok(match self.power {
            None | Some(1) => ifs,
            Some(k @ (2 | 3)) => product_ifs(&vec![&ifs; k])?,
            Some(k) => bail!("power must be 1, 2 or 3, got {k}"),
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleMethod {
    /// Deterministic cylinder cover.
    #[default]
    Cover,
    /// Random orbit of the chaos game, driven by the run seed.
    Chaos,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    #[serde(default)]
    pub method: SampleMethod,
    /// Cover depth; chosen from the budgets when absent.
    pub depth: Option<usize>,
    /// Chaos-game orbit length.
    pub points: Option<usize>,
    /// Working-set budget in bytes used to pick the depth.
    #[serde(default = "default_memory")]
    pub memory_budget: u64,
}

fn default_memory() -> u64 {
    2 << 30
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            method: SampleMethod::Cover,
            depth: None,
            points: None,
            memory_budget: default_memory(),
        }
    }
}

/// Declared acceptance thresholds. Each present field becomes a check in the
/// report; the exit code is 0 iff all of them pass.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    pub min_estimate: Option<f64>,
    pub max_abs_error: Option<f64>,
    pub min_r_squared: Option<f64>,
    /// Largest fraction of sweep directions allowed below `low_slope`.
    pub max_low_fraction: Option<f64>,
}

/// One step of an `estimate` pipeline acting on the current cloud.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Step {
    /// `⟨x, n⟩`
    Project { direction: Vec<Num> },
    /// `x / |x|`
    Radial {
        #[serde(default)]
        exclusion: f64,
    },
    /// Azimuthal angle.
    Geodesic {
        #[serde(default = "default_pole_tol")]
        pole_tol: f64,
    },
    /// Scalar image under a catalog map.
    Map { map: SmoothMap },
    /// Pinned or unpinned distance set.
    Distance {
        pin: Option<Vec<Num>>,
        max_pairs: Option<usize>,
    },
    /// Algebraic product of the (one-dimensional) cloud with itself.
    Product { factors: usize },
    /// Merge onto a grid of the given width.
    Dedup { width: f64 },
}

fn default_pole_tol() -> f64 {
    1e-9
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TdistanceParams {
    /// Map whose fixed point is the pin.
    #[serde(default)]
    pub pin_map: usize,
    /// Explicit pin instead of a fixed point.
    pub pin: Option<Vec<Num>>,
    /// Cylinder to restrict to; found automatically when absent.
    pub cylinder: Option<Vec<u32>>,
    #[serde(default = "default_refine")]
    pub max_refine: usize,
}

fn default_refine() -> usize {
    6
}

impl Default for TdistanceParams {
    fn default() -> Self {
        Self {
            pin_map: 0,
            pin: None,
            cylinder: None,
            max_refine: default_refine(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TprodParams {
    /// Cover depth of the cloud on which the gradient conditions are checked.
    #[serde(default = "default_check_depth")]
    pub check_depth: usize,
    #[serde(default = "default_check_pairs")]
    pub check_pairs: usize,
}

fn default_check_depth() -> usize {
    4
}

fn default_check_pairs() -> usize {
    2_000_000
}

impl Default for TprodParams {
    fn default() -> Self {
        Self {
            check_depth: default_check_depth(),
            check_pairs: default_check_pairs(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ltech1Params {
    /// Directions at angles `kπ/m`, `k = 0..m`.
    #[serde(default = "default_grid")]
    pub direction_grid: usize,
    /// Explicit angles in radians, used instead of the grid when present.
    pub angles: Option<Vec<f64>>,
    /// Test points as symbol words; each gives the point `π(w w w …)`.
    pub test_words: Option<Vec<Vec<u32>>>,
    pub test_points: Option<Vec<Vec<Num>>>,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_ltech_tol")]
    pub tolerance: f64,
}

fn default_grid() -> usize {
    8
}

fn default_n_max() -> usize {
    16
}

fn default_ltech_tol() -> f64 {
    1e-12
}

impl Default for Ltech1Params {
    fn default() -> Self {
        Self {
            direction_grid: default_grid(),
            angles: None,
            test_words: None,
            test_points: None,
            n_max: default_n_max(),
            tolerance: default_ltech_tol(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverlapParams {
    /// The projection normal `n_π` whose extremal pair is sought.
    pub normal: Vec<Num>,
    #[serde(default = "default_overlap_depth")]
    pub depth: usize,
    /// Depth of the exact-overlap search in the projected system.
    #[serde(default = "default_overlap_search")]
    pub overlap_depth: usize,
    #[serde(default = "default_overlap_tol")]
    pub tolerance: f64,
    /// Minimum number of merged pairs for the run to pass.
    #[serde(default)]
    pub min_overlaps: usize,
    /// Largest number of merged pairs for the run to pass.
    pub max_overlaps: Option<usize>,
    /// Projection normal to use instead of the extremal difference.
    pub along: Option<Vec<Num>>,
}

fn default_overlap_depth() -> usize {
    3
}

fn default_overlap_search() -> usize {
    2
}

fn default_overlap_tol() -> f64 {
    1e-9
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    #[serde(default = "default_directions")]
    pub directions: usize,
    /// Slopes below this count as low in the summary.
    #[serde(default = "default_low")]
    pub low_slope: f64,
    #[serde(default = "default_bins")]
    pub bins: usize,
}

fn default_directions() -> usize {
    500
}

fn default_low() -> f64 {
    0.9
}

fn default_bins() -> usize {
    20
}

impl Default for SweepParams {
    fn default() -> Self {
        Self {
            directions: default_directions(),
            low_slope: default_low(),
            bins: default_bins(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub ifs: Option<IfsSpec>,
    #[serde(default)]
    pub sampling: Sampling,
    /// Number of consecutive powers of the base ratio used as scales.
    pub decades: Option<usize>,
    /// Explicit, strictly decreasing scales.
    pub scales: Option<Vec<Num>>,
    /// Ratio whose powers form the scales; defaults to the largest ratio.
    pub base: Option<Num>,
    /// Cap on pairs or tuples formed by distance sets and products.
    pub max_tuples: Option<usize>,
    /// Expected value for `estimate` runs; defaults to the similarity dimension.
    pub target: Option<f64>,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub pipeline: Vec<Step>,
    #[serde(default)]
    pub tprod: TprodParams,
    #[serde(default)]
    pub tdistance: TdistanceParams,
    #[serde(default)]
    pub ltech1: Ltech1Params,
    pub overlap: Option<OverlapParams>,
    #[serde(default)]
    pub sweep: SweepParams,
    /// Seed used when the command line gives none.
    pub seed: Option<u64>,
}

/// A parsed configuration together with its source bytes and directory.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: Config,
    pub source: String,
    pub base_dir: PathBuf,
}

impl LoadedConfig {
    pub fn from_path(path: &Path) -> anyhow::Result<Self> {
        let source = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_str_in(&source, &base_dir)
    }

    pub fn from_str_in(source: &str, base_dir: &Path) -> anyhow::Result<Self> {
        let config: Config = toml::from_str(source).context("parsing config")?;
        Ok(Self {
            config,
            source: source.to_owned(),
            base_dir: base_dir.to_path_buf(),
        })
    }

    pub fn ifs(&self) -> anyhow::Result<Ifs> {
        match &self.config.ifs {
            Some(spec) => spec.build(&self.base_dir),
            None => bail!("the config has no [ifs] section"),
        }
    }
}

pub fn direction(v: &[Num]) -> anyhow::Result<Direction> {
    Ok(Direction::new(&nums(v))?)
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Project { direction } => write!(f, "project{:?}", nums(direction)),
            Step::Radial { .. } => f.write_str("radial"),
            Step::Geodesic { .. } => f.write_str("geodesic"),
            Step::Map { map } => write!(f, "map {}", map.name()),
            Step::Distance { pin: Some(p), .. } => write!(f, "distance pinned at {:?}", nums(p)),
            Step::Distance { pin: None, .. } => f.write_str("distance"),
            Step::Product { factors } => write!(f, "product x{factors}"),
            Step::Dedup { width } => write!(f, "dedup {width}"),
        }
    }
}
