//! Experiment configuration files.
//!
//! A config is a TOML document with a format `version`, a PRNG `seed`, an
//! optional output directory and tolerance scale, and one `[experiment]`
//! table selected by its `kind` key. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default = "unit")]
    pub tol_scale: f64,
    pub experiment: Experiment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Experiment {
    Fock(FockParams),
    Freeness(FreenessParams),
    Modular(ModularParams),
    Spectral(SpectralParams),
    Smatrix(SmatrixParams),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Fock(_) => "fock",
            Experiment::Freeness(_) => "freeness",
            Experiment::Modular(_) => "modular",
            Experiment::Spectral(_) => "spectral",
            Experiment::Smatrix(_) => "smatrix",
        }
    }
}

fn unit() -> f64 {
    1.0
}

/// Commutation relations, word-reversal involution and descriptor output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FockParams {
    pub dims: Vec<usize>,
    pub max_len: usize,
    /// Draw random vacua instead of the first basis vector.
    pub random_vacua: bool,
    pub trials: usize,
    pub tol: f64,
}

impl Default for FockParams {
    fn default() -> Self {
        FockParams { dims: vec![2, 3], max_len: 3, random_vacua: true, trials: 200, tol: 1e-10 }
    }
}

/// Alternating centered moments and split-word orthogonality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FreenessParams {
    pub dims: Vec<usize>,
    pub max_len: usize,
    pub trials: usize,
    /// Random generators per seed.
    pub generators: usize,
    pub split_instances: usize,
    pub tol: f64,
}

impl Default for FreenessParams {
    fn default() -> Self {
        FreenessParams {
            dims: vec![2, 3, 4],
            max_len: 3,
            trials: 1000,
            generators: 2,
            split_instances: 200,
            tol: 1e-10,
        }
    }
}

/// Two-by-two modular oracle, free-product factorization and shift decay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModularParams {
    pub weight: f64,
    pub t_grid: Vec<f64>,
    pub tol: f64,
    /// Number of `M_2 (x) 1` seeds in the free product; 0 skips the check.
    pub free_seeds: usize,
    pub max_len: usize,
    pub words: usize,
    pub free_tol: f64,
    pub shift_size: usize,
    pub window: [usize; 2],
    pub n_max: usize,
}

impl Default for ModularParams {
    fn default() -> Self {
        ModularParams {
            weight: 0.3,
            t_grid: (0..=20).map(|i| -10.0 + i as f64).collect(),
            tol: 1e-9,
            free_seeds: 2,
            max_len: 3,
            words: 30,
            free_tol: 1e-8,
            shift_size: 30,
            window: [10, 20],
            n_max: 10,
        }
    }
}

/// One seed spectrum: either `geometric = n` or a `csv` file path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSpectrum {
    pub label: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometric: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralParams {
    pub seeds: Vec<SeedSpectrum>,
    pub s: f64,
    pub max_len: usize,
    pub cutoff: f64,
    /// Extra inverse temperatures for the bound-versus-s series.
    pub s_grid: Vec<f64>,
    pub split_tol: f64,
}

impl Default for SpectralParams {
    fn default() -> Self {
        SpectralParams {
            seeds: vec![
                SeedSpectrum { label: 1, geometric: Some(200), csv: None },
                SeedSpectrum { label: 2, geometric: Some(200), csv: None },
            ],
            s: 1.0,
            max_len: 10,
            cutoff: 40.0,
            s_grid: Vec::new(),
            split_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmatrixParams {
    pub mass: f64,
    /// Group velocity of the faster packet `f`.
    pub velocity_f: f64,
    pub velocity_g: f64,
    pub width: f64,
    pub center_f: [f64; 2],
    pub center_g: [f64; 2],
    pub grid_min: f64,
    pub grid_max: f64,
    pub points: usize,
    /// Grid used for the two-particle checks and the amplitude series.
    pub coarse_points: usize,
    pub tol: f64,
    pub support_tol: f64,
}

impl Default for SmatrixParams {
    fn default() -> Self {
        SmatrixParams {
            mass: 1.0,
            velocity_f: 0.25,
            velocity_g: -0.25,
            width: 20.0,
            center_f: [0.0, 0.0],
            center_g: [0.0, 0.0],
            grid_min: -6.0,
            grid_max: 6.0,
            points: 2048,
            coarse_points: 128,
            tol: 1e-10,
            support_tol: 1e-3,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let config = Self::from_toml(&text, path)?;
        config.validate(path.parent().unwrap_or(Path::new(".")))?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Serialize(e.to_string()))
    }

    /// Checks the version, positivity of tolerances and that referenced
    /// files exist relative to `base`.
    pub fn validate(&self, base: &Path) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(CliError::Config(format!(
                "version: unsupported value {} (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        positive("tol_scale", self.tol_scale)?;
        match &self.experiment {
            Experiment::Fock(p) => {
                nonempty("experiment.dims", &p.dims)?;
                positive("experiment.tol", p.tol)
            }
            Experiment::Freeness(p) => {
                nonempty("experiment.dims", &p.dims)?;
                if p.generators == 0 {
                    return Err(CliError::Config("experiment.generators: must be at least 1".into()));
                }
                positive("experiment.tol", p.tol)
            }
            Experiment::Modular(p) => {
                if !(p.weight > 0.0 && p.weight < 1.0) {
                    return Err(CliError::Config(format!("experiment.weight: {} is not in (0, 1)", p.weight)));
                }
                positive("experiment.tol", p.tol)?;
                positive("experiment.free_tol", p.free_tol)
            }
            Experiment::Spectral(p) => {
                nonempty("experiment.seeds", &p.seeds)?;
                for seed in &p.seeds {
                    match (&seed.geometric, &seed.csv) {
                        (Some(_), None) => {}
                        (None, Some(file)) => {
                            let full = base.join(file);
                            if !full.is_file() {
                                return Err(CliError::Config(format!(
                                    "experiment.seeds.csv: file {} does not exist",
                                    full.display()
                                )));
                            }
                        }
                        _ => {
                            return Err(CliError::Config(format!(
                                "experiment.seeds: seed {} needs exactly one of geometric or csv",
                                seed.label
                            )))
                        }
                    }
                }
                positive("experiment.s", p.s)?;
                positive("experiment.cutoff", p.cutoff)?;
                positive("experiment.split_tol", p.split_tol)
            }
            Experiment::Smatrix(p) => {
                positive("experiment.mass", p.mass)?;
                positive("experiment.width", p.width)?;
                positive("experiment.tol", p.tol)?;
                positive("experiment.support_tol", p.support_tol)
            }
        }
    }
}

fn positive(field: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{field}: must be positive and finite, got {value}")))
    }
}

fn nonempty<T>(field: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        Err(CliError::Config(format!("{field}: must not be empty")))
    } else {
        Ok(())
    }
}
