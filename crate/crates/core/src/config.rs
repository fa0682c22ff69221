//! Declarative experiment configuration: one JSON file per run. Unknown
//! keys are rejected and every numeric range is validated before any work
//! starts, with diagnostics naming the offending key.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SphError};
use crate::estimators::{CellModel, DevKind, McParams};
use crate::functionals::{SizeKind, SizeSpec};
use crate::sphere::UnitVec;

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SizeSpecConfig {
    /// One of `volume`, `inradius`, `centred-inradius`.
    pub kind: String,
    /// Centre point for `centred-inradius`; defaults to the spherical origin
    /// of dimension `d`.
    #[serde(default)]
    pub origin: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    #[serde(default = "default_volume_samples")]
    pub volume_samples: u64,
    #[serde(default = "default_u1_samples")]
    pub u1_samples: u64,
    #[serde(default = "default_delta2_grid")]
    pub delta2_grid: usize,
}

fn default_volume_samples() -> u64 {
    20_000
}
fn default_u1_samples() -> u64 {
    20_000
}
fn default_delta2_grid() -> usize {
    512
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            volume_samples: default_volume_samples(),
            u1_samples: default_u1_samples(),
            delta2_grid: default_delta2_grid(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Subcommand: one of `simulate-crofton`, `simulate-voronoi-typical`,
    /// `tessellate`, `verify-urysohn`, `verify-stability`,
    /// `check-cell-count`, `check-typical-identity`, `check-voronoi-tail`,
    /// `check-lower-bound`, `estimate-rate`, `estimate-conditional`,
    /// `constants`.
    pub command: String,
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub gamma_s: Option<f64>,
    #[serde(default)]
    pub gamma_grid: Option<Vec<f64>>,
    /// Cell model for `estimate-conditional`: `hyperplane-crofton`,
    /// `hyperplane-typical`, `voronoi-typical`.
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub size: Option<SizeSpecConfig>,
    /// Deviation for `estimate-conditional`: `delta2`, `theta-r`, `theta-o`,
    /// `canonical`.
    #[serde(default)]
    pub dev: Option<String>,
    /// Stability kind for `verify-stability`: `volume-delta2`,
    /// `inradius-theta-r`, `voronoi-theta-o`.
    #[serde(default)]
    pub kind: Option<String>,
    /// Functional for `check-typical-identity`: `one`, `volume`,
    /// `volume-indicator` (needs `a`).
    #[serde(default)]
    pub f: Option<String>,
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub n: Option<u64>,
    /// Campaign size for the verify commands.
    #[serde(default)]
    pub bodies: Option<u64>,
    /// Number of great circles for `tessellate` (alternative to `gamma_s`).
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub mc: Option<McConfig>,
    /// Output path prefix; artifacts are `<prefix>.rows.csv` and
    /// `<prefix>.summary.json`.
    pub output: Option<String>,
}

pub fn load(path: &std::path::Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SphError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let cfg: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| SphError::Config(format!("config: {e}")))?;
    Ok(cfg)
}

impl ExperimentConfig {
    pub fn dimension(&self) -> Result<usize> {
        let d = self.d.unwrap_or(2);
        if !(2..=3).contains(&d) {
            return Err(SphError::Config(format!("d: {d} unsupported (need 2 or 3)")));
        }
        Ok(d)
    }

    pub fn gamma(&self) -> Result<f64> {
        let g = self
            .gamma_s
            .ok_or_else(|| SphError::Config("gamma_s: missing".into()))?;
        if !(g > 0.0 && g.is_finite()) {
            return Err(SphError::Config(format!("gamma_s: {g} not in (0, inf)")));
        }
        Ok(g)
    }

    pub fn grid(&self) -> Result<Vec<f64>> {
        let g = self
            .gamma_grid
            .clone()
            .ok_or_else(|| SphError::Config("gamma_grid: missing".into()))?;
        if g.is_empty() || g.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(SphError::Config("gamma_grid: entries must be positive".into()));
        }
        if g.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SphError::Config("gamma_grid: must be strictly increasing".into()));
        }
        Ok(g)
    }

    pub fn count(&self) -> Result<u64> {
        let n = self.n.ok_or_else(|| SphError::Config("n: missing".into()))?;
        if n == 0 {
            return Err(SphError::Config("n: must be positive".into()));
        }
        Ok(n)
    }

    pub fn body_count(&self) -> Result<u64> {
        let b = self
            .bodies
            .ok_or_else(|| SphError::Config("bodies: missing".into()))?;
        if b == 0 {
            return Err(SphError::Config("bodies: must be positive".into()));
        }
        Ok(b)
    }

    pub fn threshold(&self) -> Result<f64> {
        let a = self.a.ok_or_else(|| SphError::Config("a: missing".into()))?;
        if !(a > 0.0 && a.is_finite()) {
            return Err(SphError::Config(format!("a: {a} must be positive")));
        }
        Ok(a)
    }

    pub fn seed_value(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn mc_params(&self) -> McParams {
        let mc = self.mc.clone().unwrap_or_default();
        McParams {
            volume_samples: mc.volume_samples,
            u1_samples: mc.u1_samples,
            delta2_grid: mc.delta2_grid,
        }
    }

    pub fn output_prefix(&self) -> Result<&str> {
        self.output
            .as_deref()
            .ok_or_else(|| SphError::Config("output: missing".into()))
    }

    pub fn size_spec(&self, d: usize) -> Result<SizeSpec> {
        let cfg = self
            .size
            .as_ref()
            .ok_or_else(|| SphError::Config("size: missing".into()))?;
        let kind = match cfg.kind.as_str() {
            "volume" => SizeKind::Volume,
            "inradius" => SizeKind::Inradius,
            "centred-inradius" => SizeKind::CentredInradius,
            other => {
                return Err(SphError::Config(format!("size.kind: unknown value `{other}`")))
            }
        };
        let origin = match (&cfg.origin, kind) {
            (Some(coords), _) => Some(
                UnitVec::new(coords.clone())
                    .map_err(|e| SphError::Config(format!("size.origin: {e}")))?,
            ),
            (None, SizeKind::CentredInradius) => Some(UnitVec::origin(d)),
            (None, _) => None,
        };
        Ok(SizeSpec { kind, origin })
    }

    pub fn cell_model(&self) -> Result<CellModel> {
        match self
            .model
            .as_deref()
            .ok_or_else(|| SphError::Config("model: missing".into()))?
        {
            "hyperplane-crofton" => Ok(CellModel::HyperplaneCrofton),
            "hyperplane-typical" => Ok(CellModel::HyperplaneTypical),
            "voronoi-typical" => Ok(CellModel::VoronoiTypical),
            other => Err(SphError::Config(format!("model: unknown value `{other}`"))),
        }
    }

    pub fn dev_kind(&self) -> Result<DevKind> {
        match self
            .dev
            .as_deref()
            .ok_or_else(|| SphError::Config("dev: missing".into()))?
        {
            "delta2" => Ok(DevKind::Delta2),
            "theta-r" => Ok(DevKind::ThetaR),
            "theta-o" => Ok(DevKind::ThetaO),
            "canonical" => Ok(DevKind::Canonical),
            other => Err(SphError::Config(format!("dev: unknown value `{other}`"))),
        }
    }
}
