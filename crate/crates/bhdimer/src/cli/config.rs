use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeParams, OnSitePotential, PotentialKind};
use crate::resonances::{ResonanceOptions, TrapConfig, TrapGeometry};
use crate::timedomain::{OracleOptions, TrapCnOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DecayMethod {
    Gamov,
    Cn,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScatterConfig {
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "N")]
    pub n: i64,
}

impl Default for ScatterConfig {
    fn default() -> Self {
        Self { k: PI / 2.0, n: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub k_min: f64,
    pub k_max: f64,
    pub k_points: usize,
    pub v_min: f64,
    pub v_max: f64,
    pub v_points: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { k_min: 0.1, k_max: PI - 0.1, k_points: 100, v_min: -3.0, v_max: 2.0, v_points: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergeConfig {
    #[serde(rename = "V")]
    pub v: Vec<f64>,
    #[serde(rename = "N")]
    pub n: Vec<i64>,
    pub n_ref: i64,
}

impl Default for ConvergeConfig {
    fn default() -> Self {
        Self { v: vec![-2.0, -1.0, 0.8], n: (6..=20).collect(), n_ref: 25 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResonanceConfig {
    pub grid_points: usize,
    pub edge_margin: f64,
    pub n0: i64,
    pub max_poles: usize,
    pub fit_tol: f64,
    pub pole_tol: f64,
    pub stability_tol: f64,
    pub min_residue: f64,
    pub check_fixed_point: bool,
}

impl Default for ResonanceConfig {
    fn default() -> Self {
        let d = ResonanceOptions::default();
        Self {
            grid_points: d.grid_points,
            edge_margin: d.edge_margin,
            n0: d.n0,
            max_poles: d.max_poles,
            fit_tol: d.fit.tol,
            pole_tol: d.refine.pole_tol,
            stability_tol: d.stability_tol,
            min_residue: d.min_residue,
            check_fixed_point: d.check_fixed_point,
        }
    }
}

impl ResonanceConfig {
    pub fn options(&self) -> ResonanceOptions {
        let mut o = ResonanceOptions::default();
        o.grid_points = self.grid_points;
        o.edge_margin = self.edge_margin;
        o.n0 = self.n0;
        o.max_poles = self.max_poles;
        o.fit.tol = self.fit_tol;
        o.refine.pole_tol = self.pole_tol;
        o.stability_tol = self.stability_tol;
        o.min_residue = self.min_residue;
        o.check_fixed_point = self.check_fixed_point;
        o
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecayConfig {
    pub method: DecayMethod,
    /// Packet centres; the first two are compared when more are given.
    #[serde(rename = "M")]
    pub m: Vec<f64>,
    /// Packet carrier quasimomentum.
    #[serde(rename = "K")]
    pub k: f64,
    /// Time unit T; outputs carry t and t/T.
    pub time_unit: f64,
    pub t_max_over_t: f64,
    pub cn: TrapCnOptions,
}

impl Default for DecayConfig {
    fn default() -> Self {
        Self {
            method: DecayMethod::Both,
            m: vec![5.0],
            k: PI / 2.0,
            time_unit: 2.0 * PI / 0.30,
            t_max_over_t: 50.0,
            cn: TrapCnOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateConfig {
    pub unitarity_points: usize,
    pub elimination_cases: usize,
    pub oracle: OracleOptions,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        Self { unitarity_points: 5, elimination_cases: 10, oracle: OracleOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub out: Option<String>,
    pub format: Format,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { out: None, format: Format::Json }
    }
}

/// Full run configuration. Every section has defaults; unknown keys are
/// rejected at any level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: LatticeParams,
    pub potential: PotentialKind,
    pub scatter: ScatterConfig,
    pub sweep: SweepConfig,
    pub converge: ConvergeConfig,
    pub trap: TrapGeometry,
    pub resonances: ResonanceConfig,
    pub decay: DecayConfig,
    pub validate: ValidateConfig,
    pub output: OutputConfig,
    pub jobs: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: LatticeParams::default(),
            potential: PotentialKind::Gaussian { v: -2.0, sigma: 0.65, center: 0 },
            scatter: ScatterConfig::default(),
            sweep: SweepConfig::default(),
            converge: ConvergeConfig::default(),
            trap: TrapGeometry::default(),
            resonances: ResonanceConfig::default(),
            decay: DecayConfig::default(),
            validate: ValidateConfig::default(),
            output: OutputConfig::default(),
            jobs: 1,
            seed: 1,
        }
    }
}

impl RunConfig {
    /// Parses TOML or JSON, chosen by extension (JSON if it starts with '{'
    /// otherwise).
    pub fn parse(text: &str, path: Option<&Path>) -> Result<Self> {
        let ext = path.and_then(|p| p.extension()).and_then(|e| e.to_str()).unwrap_or("");
        let json = ext.eq_ignore_ascii_case("json") || (ext.is_empty() && text.trim_start().starts_with('{'));
        let name = path.map_or("<config>".to_string(), |p| p.display().to_string());
        if json {
            serde_json::from_str(text)
                .map_err(|e| Error::Config(format!("{name}: line {} column {}: {e}", e.line(), e.column())))
        } else {
            toml::from_str(text).map_err(|e| Error::Config(format!("{name}: {e}")))
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text, Some(path))
    }

    pub fn params(&self) -> Result<LatticeParams> {
        self.model.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(self.model)
    }

    pub fn potential(&self) -> Result<OnSitePotential> {
        OnSitePotential::new(self.potential.clone()).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn potential_with_v(&self, v: f64) -> Result<OnSitePotential> {
        let mut k = self.potential.clone();
        set_v(&mut k, v)?;
        OnSitePotential::new(k).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn trap_config(&self) -> Result<TrapConfig> {
        let c = TrapConfig { geometry: self.trap.clone(), barrier: self.potential()?, params: self.params()? };
        c.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(c)
    }

    pub fn sigma(&self) -> Option<f64> {
        match self.potential {
            PotentialKind::Gaussian { sigma, .. } => Some(sigma),
            _ => None,
        }
    }
}

pub(crate) fn set_v(k: &mut PotentialKind, new: f64) -> Result<()> {
    match k {
        PotentialKind::Gaussian { v, .. } | PotentialKind::Point { v, .. } => {
            *v = new;
            Ok(())
        }
        PotentialKind::Table { .. } => Err(Error::Config("--V cannot override a table potential".into())),
    }
}

pub(crate) fn set_sigma(k: &mut PotentialKind, new: f64) -> Result<()> {
    match k {
        PotentialKind::Gaussian { sigma, .. } => {
            *sigma = new;
            Ok(())
        }
        _ => Err(Error::Config("--sigma only applies to a gaussian potential".into())),
    }
}
