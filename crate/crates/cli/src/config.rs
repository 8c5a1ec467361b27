//! Run configuration: a single JSON document per run, with CLI flags
//! overriding individual fields. Field-level validation happens while the
//! effective configuration is turned into model/kernel/connectivity values.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::Path;
use wcnet::connectivity::{self, Connectivity};
use wcnet::kernels::{DelayKernel, KernelSpec};
use wcnet::model::ModelParams;

use crate::CliError;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_ie: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_e: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub connectivity: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability: Option<StabilitySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hopf: Option<HopfSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSection {
    Preset { preset: String },
    Explicit { p: f64, a: f64, tau1: f64, tau2: f64 },
}

fn d_w_ie_range() -> (f64, f64) {
    (0.0, 6.0)
}
fn d_w_e_range() -> (f64, f64) {
    (0.0, 4.0)
}
fn d_grid() -> usize {
    64
}
fn d_radius() -> f64 {
    wcnet::spectral::DEFAULT_DISK_RADIUS
}
fn d_samples() -> usize {
    241
}
fn d_method() -> String {
    "closed".into()
}
fn d_hopf_nx() -> usize {
    128
}
fn d_hopf_ny() -> usize {
    128
}
fn d_hopf_we_range() -> (f64, f64) {
    (0.5, 4.0)
}
fn d_t_end() -> f64 {
    600.0
}
fn d_dt() -> f64 {
    0.01
}
fn d_settle() -> f64 {
    500.0
}
fn d_history() -> String {
    "perturbed".into()
}
fn d_perturbation() -> f64 {
    0.01
}
fn d_seed() -> u64 {
    1
}
fn d_threshold() -> f64 {
    1e-3
}
fn d_quad_nodes() -> usize {
    33
}
fn d_points() -> usize {
    100
}
fn d_stride() -> usize {
    1
}
fn d_out_stability() -> String {
    "stability.csv".into()
}
fn d_out_curves() -> String {
    "hopf_curves.csv".into()
}
fn d_out_intersections() -> String {
    "hopf_intersections.json".into()
}
fn d_out_trajectory() -> String {
    "trajectory.csv".into()
}
fn d_out_sweep() -> String {
    "sweep.csv".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilitySection {
    #[serde(default = "d_w_ie_range")]
    pub w_ie_range: (f64, f64),
    #[serde(default = "d_w_e_range")]
    pub w_e_range: (f64, f64),
    #[serde(default = "d_grid")]
    pub nx: usize,
    #[serde(default = "d_grid")]
    pub ny: usize,
    #[serde(default = "d_radius")]
    pub radius: f64,
    #[serde(default = "d_out_stability")]
    pub out: String,
}

impl Default for StabilitySection {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HopfSection {
    #[serde(default = "d_w_ie_range")]
    pub w_ie_range: (f64, f64),
    #[serde(default = "d_samples")]
    pub samples: usize,
    /// "closed" (solve the w-equation per W^IE) or "grid" (sign-change
    /// boundary of the max root real part).
    #[serde(default = "d_method")]
    pub method: String,
    #[serde(default = "d_hopf_nx")]
    pub nx: usize,
    #[serde(default = "d_hopf_ny")]
    pub ny: usize,
    #[serde(default = "d_hopf_we_range")]
    pub w_e_range: (f64, f64),
    #[serde(default = "d_out_curves")]
    pub out_curves: String,
    #[serde(default = "d_out_intersections")]
    pub out_intersections: String,
}

impl Default for HopfSection {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    #[serde(default = "d_t_end")]
    pub t_end: f64,
    #[serde(default = "d_dt")]
    pub dt: f64,
    #[serde(default = "d_settle")]
    pub settle: f64,
    /// "equilibrium" or "perturbed".
    #[serde(default = "d_history")]
    pub history: String,
    #[serde(default = "d_perturbation")]
    pub perturbation: f64,
    #[serde(default = "d_seed")]
    pub seed: u64,
    #[serde(default = "d_threshold")]
    pub threshold: f64,
    #[serde(default = "d_quad_nodes")]
    pub quad_nodes: usize,
    /// Keep every k-th sample in the trajectory CSV.
    #[serde(default = "d_stride")]
    pub out_stride: usize,
    #[serde(default = "d_out_trajectory")]
    pub out: String,
}

impl Default for SimulateSection {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default = "d_points")]
    pub points: usize,
    #[serde(default = "d_seed")]
    pub seed: u64,
    #[serde(default = "d_w_ie_range")]
    pub w_ie_range: (f64, f64),
    #[serde(default = "d_w_e_range")]
    pub w_e_range: (f64, f64),
    #[serde(default = "d_radius")]
    pub radius: f64,
    #[serde(default = "d_dt")]
    pub dt: f64,
    #[serde(default = "d_settle")]
    pub settle: f64,
    #[serde(default = "d_t_end")]
    pub t_end: f64,
    #[serde(default = "d_perturbation")]
    pub perturbation: f64,
    #[serde(default = "d_threshold")]
    pub threshold: f64,
    #[serde(default = "d_quad_nodes")]
    pub quad_nodes: usize,
    #[serde(default = "d_out_sweep")]
    pub out: String,
}

impl Default for SweepSection {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| {
                    CliError::Config(format!("cannot read config {}: {e}", p.display()))
                })?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("config {}: {e}", p.display())))
            }
        }
    }

    /// Hash of the effective configuration, stamped into output headers.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        let mut out = String::with_capacity(16);
        for byte in digest.iter().take(8) {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }

    pub fn model_params(&self) -> Result<ModelParams, CliError> {
        let (w_ie, w_e) = (self.w_ie.unwrap_or(0.0), self.w_e.unwrap_or(0.0));
        let params = match &self.model {
            None | Some(ModelSection::Preset { .. }) => {
                if let Some(ModelSection::Preset { preset }) = &self.model {
                    if preset != "paper" {
                        return Err(CliError::Config(format!(
                            "model.preset: unknown preset `{preset}` (only \"paper\")"
                        )));
                    }
                }
                ModelParams::preset(w_ie, w_e)
            }
            Some(ModelSection::Explicit { p, a, tau1, tau2 }) => ModelParams {
                p: *p,
                a: *a,
                tau1: *tau1,
                tau2: *tau2,
                w_ie,
                w_e,
            },
        };
        params
            .validate()
            .map_err(|e| CliError::Config(format!("model: {e}")))?;
        Ok(params)
    }

    pub fn kernel(&self) -> Result<DelayKernel, CliError> {
        match &self.kernel {
            None => Ok(DelayKernel::NoDelay),
            Some(spec) => DelayKernel::try_from(spec)
                .map_err(|e| CliError::Config(format!("kernel: {e}"))),
        }
    }

    pub fn connectivity(&self) -> Result<Connectivity, CliError> {
        let spec = self.connectivity.as_deref().unwrap_or("bi:8");
        if let Some(path) = spec.strip_prefix("csv:") {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("connectivity: cannot read {path}: {e}"))
            })?;
            return connectivity::from_csv(&text)
                .map_err(|e| CliError::Config(format!("connectivity: {e}")));
        }
        connectivity::parse_spec(spec).map_err(|e| CliError::Config(format!("connectivity: {e}")))
    }
}

/// Kernel flag syntax: raw JSON (`{"kind":...}`) or the shorthands
/// `none`, `dirac:TAU`, `uniform:TAU:SIGMA`, `gamma:M:GAMMA`,
/// `weak:TAU`, `strong:TAU`.
pub fn parse_kernel_flag(s: &str) -> Result<KernelSpec, String> {
    let s = s.trim();
    if s.starts_with('{') {
        return serde_json::from_str(s).map_err(|e| format!("kernel JSON: {e}"));
    }
    let mut parts = s.split(':');
    let kind = parts.next().unwrap_or_default();
    let nums: Vec<&str> = parts.collect();
    let parse = |tok: &str| -> Result<f64, String> {
        tok.parse().map_err(|_| format!("bad number `{tok}` in kernel `{s}`"))
    };
    let expect = |n: usize| -> Result<(), String> {
        if nums.len() == n {
            Ok(())
        } else {
            Err(format!("kernel `{s}`: expected {n} parameter(s)"))
        }
    };
    match kind {
        "none" => {
            expect(0)?;
            Ok(KernelSpec {
                kind: "none".into(),
                ..Default::default()
            })
        }
        "dirac" => {
            expect(1)?;
            Ok(KernelSpec {
                kind: "dirac".into(),
                tau_m: Some(parse(nums[0])?),
                ..Default::default()
            })
        }
        "uniform" => {
            expect(2)?;
            Ok(KernelSpec {
                kind: "uniform".into(),
                tau_m: Some(parse(nums[0])?),
                sigma: Some(parse(nums[1])?),
                ..Default::default()
            })
        }
        "gamma" => {
            expect(2)?;
            let m: u32 = nums[0]
                .parse()
                .map_err(|_| format!("bad shape `{}` in kernel `{s}`", nums[0]))?;
            Ok(KernelSpec {
                kind: "gamma".into(),
                m: Some(m),
                gamma: Some(parse(nums[1])?),
                ..Default::default()
            })
        }
        "weak" => {
            expect(1)?;
            Ok(KernelSpec {
                kind: "gamma".into(),
                m: Some(1),
                tau_m: Some(parse(nums[0])?),
                ..Default::default()
            })
        }
        "strong" => {
            expect(1)?;
            Ok(KernelSpec {
                kind: "gamma".into(),
                m: Some(2),
                tau_m: Some(parse(nums[0])?),
                ..Default::default()
            })
        }
        other => Err(format!("unknown kernel kind `{other}`")),
    }
}
