use std::path::PathBuf;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::bogoliubov::BogoliubovParams;
use crate::dispersion::{Branch, DispersionModel};
use crate::quadrature::QuadratureConfig;
use crate::reconstruct::ReconstructionConfig;
use crate::spectra::{BetaMode, BetaWeighting, KhSpec, PhysicalScales, ScanSpec};

/// Top-level JSON configuration shared by every subcommand. Blocks a
/// subcommand does not need may be omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<DispersionModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scales: Option<PhysicalScales>,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bogoliubov: Option<BogoliubovParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectra: Option<SpectraBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<CurveBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hump: Option<HumpBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub find_kh: Option<FindKhBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reconstruction: Option<ReconstructionConfig>,
    #[serde(default)]
    pub output: OutputBlock,
}

/// Settings of the energy-density ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SpectraBlock {
    #[serde(default = "default_kh")]
    pub k_h: KhSpec,
    #[serde(default = "default_beta_mode")]
    pub beta_mode: BetaMode,
    /// Value of |β_k|² in constant mode.
    #[serde(default = "default_beta_constant")]
    pub beta_constant: f64,
    /// Explicit upper limit of the integrals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<f64>,
}

impl Default for SpectraBlock {
    fn default() -> Self {
        Self {
            k_h: default_kh(),
            beta_mode: default_beta_mode(),
            beta_constant: default_beta_constant(),
            k_max: None,
        }
    }
}

impl SpectraBlock {
    /// The |β_k|² weighting selected by `beta_mode`.
    pub fn weighting(&self, bogoliubov: Option<BogoliubovParams>) -> BetaWeighting {
        match self.beta_mode {
            BetaMode::Constant => BetaWeighting::Constant(self.beta_constant),
            BetaMode::Full => BetaWeighting::Full(bogoliubov.unwrap_or_default()),
        }
    }
}

fn default_kh() -> KhSpec {
    KhSpec::FromHubble
}

fn default_beta_mode() -> BetaMode {
    BetaMode::Constant
}

fn default_beta_constant() -> f64 {
    1.0
}

/// Sampling of `dispersion-curve` and `bogoliubov`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CurveBlock {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_hi: Option<f64>,
}

impl Default for CurveBlock {
    fn default() -> Self {
        Self { samples: default_samples(), k_lo: None, k_hi: None }
    }
}

fn default_samples() -> usize {
    201
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct HumpBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct FindKhBlock {
    #[serde(default = "default_branch")]
    pub branch: Branch,
}

impl Default for FindKhBlock {
    fn default() -> Self {
        Self { branch: default_branch() }
    }
}

fn default_branch() -> Branch {
    Branch::Decaying
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// JSON schema of the configuration file.
    pub fn schema() -> serde_json::Value {
        serde_json::to_value(schemars::schema_for!(RunConfig))
            .expect("schema serialises to JSON")
    }
}
