//! Scenario configuration (JSON).
//!
//! Frequencies are angular (rad per unit time), times in the same unit.
//! Matrices are row-major lists of `[re, im]` pairs.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use serde::{Deserialize, Serialize};
use unipert::linalg::C64;
use unipert::models::{HamiltonianForm, IonTrapParams, Profile};
use unipert::{Frequency, FrequencyBasis, Operator, TrigPoly};

use crate::CliError;

pub type MatrixSpec = Vec<[f64; 2]>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    Ti,
    TdMean,
    TdGauged,
    Magnus,
    FloquetMagnus,
    Rwa,
    Dyson,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Ti => "ti",
            Engine::TdMean => "td-mean",
            Engine::TdGauged => "td-gauged",
            Engine::Magnus => "magnus",
            Engine::FloquetMagnus => "floquet-magnus",
            Engine::Rwa => "rwa",
            Engine::Dyson => "dyson",
        }
    }

    pub fn is_time_dependent(self) -> bool {
        matches!(self, Engine::TdMean | Engine::TdGauged | Engine::Magnus | Engine::FloquetMagnus)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileConfig {
    Linearized,
    LambDicke,
    Table { g: Vec<f64>, f: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormConfig {
    FullD,
    Linearized,
    Generalized,
}

/// Trapped-ion model; defaults give the resonant linearised model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IonTrapConfig {
    /// Trap frequency ν.
    #[serde(default = "one")]
    pub nu: f64,
    /// Laser frequency α.
    #[serde(default = "four")]
    pub alpha: f64,
    /// Internal splitting ε; defaults to `α + ν`.
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default = "default_eta")]
    pub eta: f64,
    /// Coupling phase φ in radians.
    #[serde(default = "default_phi")]
    pub phi: f64,
    #[serde(default = "default_profile")]
    pub profile: ProfileConfig,
    #[serde(default = "default_form")]
    pub form: FormConfig,
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
}

fn one() -> f64 {
    1.0
}
fn four() -> f64 {
    4.0
}
fn default_eta() -> f64 {
    0.1
}
fn default_phi() -> f64 {
    -FRAC_PI_2
}
fn default_profile() -> ProfileConfig {
    ProfileConfig::Linearized
}
fn default_form() -> FormConfig {
    FormConfig::Generalized
}
fn default_cutoff() -> usize {
    12
}
fn default_order() -> usize {
    1
}

impl Default for IonTrapConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

impl IonTrapConfig {
    pub fn params(&self) -> IonTrapParams {
        let profile = match &self.profile {
            ProfileConfig::Linearized => Profile::Linearized,
            ProfileConfig::LambDicke => Profile::LambDicke,
            ProfileConfig::Table { g, f } => Profile::Table { g: g.clone(), f: f.clone() },
        };
        IonTrapParams {
            nu: self.nu,
            epsilon: self.epsilon.unwrap_or(self.alpha + self.nu),
            alpha: self.alpha,
            lambda: 1.0,
            eta: self.eta,
            phi: self.phi,
            profile,
            cutoff: self.cutoff,
        }
    }

    pub fn form(&self) -> HamiltonianForm {
        match self.form {
            FormConfig::FullD => HamiltonianForm::FullD,
            FormConfig::Linearized => HamiltonianForm::Linearized,
            FormConfig::Generalized => HamiltonianForm::Generalized,
        }
    }
}

/// One Fourier term of a periodic drive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    /// Integer coefficients on the frequency base.
    pub k: Vec<i64>,
    pub matrix: MatrixSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelConfig {
    IonTrap(IonTrapConfig),
    /// `H(λ) = H₀ + Σ λⁿ Hₙ`, time independent.
    Static { h0: MatrixSpec, h: Vec<MatrixSpec> },
    /// Interaction-picture drive `Σ λⁿ H̃ₙ(t)` with `H̃ₙ` given term by term.
    Periodic { frequencies: Vec<f64>, drive: Vec<Vec<TermSpec>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_oracle_tol")]
    pub oracle_rel_tol: f64,
    /// Unitarity defect bound per unit dimension.
    #[serde(default = "default_tight")]
    pub unitarity_per_dim: f64,
    /// Bound on `|[C, H₀]| / (|C| |H₀|)`.
    #[serde(default = "default_tight")]
    pub commutation: f64,
    /// Required slope is `N + slope_margin`.
    #[serde(default = "default_margin")]
    pub slope_margin: f64,
    #[serde(default = "default_rwa_slope")]
    pub rwa_max_slope: f64,
    #[serde(default = "default_verify")]
    pub verify: f64,
}

fn default_oracle_tol() -> f64 {
    1e-11
}
fn default_tight() -> f64 {
    1e-10
}
fn default_margin() -> f64 {
    0.8
}
fn default_rwa_slope() -> f64 {
    1.3
}
fn default_verify() -> f64 {
    1e-9
}

impl Default for Tolerances {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub id: String,
    pub model: ModelConfig,
    pub engine: Engine,
    #[serde(default = "default_order")]
    pub order: usize,
    pub lambda_grid: Vec<f64>,
    /// Sample times, ascending.
    pub time_grid: Vec<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Hermitian gauge constants, one per order (`ti`, `td-gauged`).
    #[serde(default)]
    pub gauge: Option<Vec<MatrixSpec>>,
    /// Output file stem; defaults to `id`.
    #[serde(default)]
    pub output: Option<String>,
}

/// A config file holding a list of scenarios.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioList {
    scenarios: Vec<ScenarioConfig>,
}

/// Parses one scenario, or `{"scenarios": [...]}`, and validates each.
pub fn parse_scenarios(text: &str, origin: &str) -> Result<Vec<ScenarioConfig>, CliError> {
    let fail = |e: serde_json::Error| CliError::Config(format!("{origin}: {e}"));
    let value: serde_json::Value = serde_json::from_str(text).map_err(fail)?;
    // Typed parses from the text (not the value) keep line/column positions in errors.
    let scenarios = if value.get("scenarios").is_some() {
        serde_json::from_str::<ScenarioList>(text).map_err(fail)?.scenarios
    } else {
        vec![serde_json::from_str::<ScenarioConfig>(text).map_err(fail)?]
    };
    if scenarios.is_empty() {
        return Err(CliError::Config(format!("{origin}: no scenarios")));
    }
    for s in &scenarios {
        s.validate().map_err(|e| CliError::Config(format!("{origin}: scenario '{}': {e}", s.id)))?;
    }
    Ok(scenarios)
}

pub fn load_scenarios(path: &Path) -> Result<Vec<ScenarioConfig>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_scenarios(&text, &path.display().to_string())
}

pub fn matrix(spec: &MatrixSpec, field: &str) -> Result<Operator, String> {
    let n = (spec.len() as f64).sqrt().round() as usize;
    if n == 0 || n * n != spec.len() {
        return Err(format!("{field}: {} entries is not a square matrix", spec.len()));
    }
    if spec.iter().flatten().any(|x| !x.is_finite()) {
        return Err(format!("{field}: entries must be finite"));
    }
    let entries: Vec<C64> = spec.iter().map(|[a, b]| C64::new(*a, *b)).collect();
    Ok(Operator::from_rows(n, &entries))
}

pub fn matrix_spec(x: &Operator) -> MatrixSpec {
    let n = x.dim();
    (0..n * n).map(|k| x.get(k / n, k % n)).map(|z| [z.re, z.im]).collect()
}

impl ScenarioConfig {
    pub fn stem(&self) -> &str {
        self.output.as_deref().unwrap_or(&self.id)
    }

    pub fn validate(&self) -> Result<(), String> {
        let name_ok = |s: &str| !s.is_empty() && s.chars().all(|ch| ch.is_ascii_alphanumeric() || "-_.".contains(ch));
        if !name_ok(&self.id) {
            return Err("id must be non-empty and use only letters, digits, '-', '_' or '.'".into());
        }
        if let Some(o) = &self.output {
            if !name_ok(o) {
                return Err("output must be a plain file stem".into());
            }
        }
        if self.order == 0 {
            return Err("order must be at least 1".into());
        }
        if self.lambda_grid.is_empty() {
            return Err("lambda_grid is empty".into());
        }
        if let Some(l) = self.lambda_grid.iter().find(|l| !l.is_finite() || **l < 0.0) {
            return Err(format!("lambda_grid value {l} must be finite and non-negative"));
        }
        if self.time_grid.is_empty() {
            return Err("time_grid is empty".into());
        }
        if self.time_grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err("time_grid values must be finite and non-negative".into());
        }
        if self.time_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err("time_grid must be strictly increasing".into());
        }
        let t = &self.tolerances;
        let positive = [t.oracle_rel_tol, t.unitarity_per_dim, t.commutation, t.verify];
        if positive.iter().any(|x| *x <= 0.0 || !x.is_finite()) {
            return Err("tolerances must be positive".into());
        }
        match (&self.model, self.engine) {
            (ModelConfig::Static { .. }, e) if e != Engine::Ti => {
                return Err(format!("engine '{}' needs a time-dependent model; static models support 'ti'", e.name()));
            }
            (ModelConfig::Periodic { .. }, Engine::Ti | Engine::Rwa) => {
                return Err(format!("engine '{}' is only available for ion-trap or static models", self.engine.name()));
            }
            _ => {}
        }
        if self.engine == Engine::Rwa && self.order != 1 {
            return Err("the rwa engine is first order only".into());
        }
        if self.gauge.is_some() && !matches!(self.engine, Engine::Ti | Engine::TdGauged) {
            return Err("gauge applies to the 'ti' and 'td-gauged' engines only".into());
        }
        match &self.model {
            ModelConfig::IonTrap(m) => m.params().validate().map_err(|e| e.to_string())?,
            ModelConfig::Static { h0, h } => {
                let h0 = matrix(h0, "h0")?;
                if h.is_empty() {
                    return Err("static model needs at least one perturbation matrix".into());
                }
                for (i, x) in h.iter().enumerate() {
                    let x = matrix(x, &format!("h[{i}]"))?;
                    if x.dim() != h0.dim() {
                        return Err(format!("h[{i}] has dimension {}, h0 has {}", x.dim(), h0.dim()));
                    }
                }
            }
            ModelConfig::Periodic { frequencies, drive } => {
                if frequencies.is_empty() {
                    return Err("periodic model needs at least one base frequency".into());
                }
                if drive.is_empty() || drive.iter().all(|d| d.is_empty()) {
                    return Err("periodic model needs at least one drive term".into());
                }
            }
        }
        Ok(())
    }
}

/// Interaction-picture drive chain `H̃₁, H̃₂, …` of a periodic model.
pub fn periodic_chain(frequencies: &[f64], drive: &[Vec<TermSpec>]) -> Result<Vec<TrigPoly>, String> {
    let basis = FrequencyBasis::new(frequencies).map_err(|e| e.to_string())?;
    let dim = drive
        .iter()
        .flatten()
        .next()
        .map(|t| matrix(&t.matrix, "drive").map(|m| m.dim()))
        .transpose()?
        .ok_or("periodic model needs at least one drive term")?;
    let mut chain = Vec::with_capacity(drive.len());
    for (n, terms) in drive.iter().enumerate() {
        let mut parsed = Vec::with_capacity(terms.len());
        for (j, t) in terms.iter().enumerate() {
            let m = matrix(&t.matrix, &format!("drive[{n}][{j}]"))?;
            if m.dim() != dim {
                return Err(format!("drive[{n}][{j}] has dimension {}, expected {dim}", m.dim()));
            }
            if t.k.len() != basis.len() {
                return Err(format!("drive[{n}][{j}]: k has {} entries for {} base frequencies", t.k.len(), basis.len()));
            }
            parsed.push((Frequency::new(t.k.clone()), m));
        }
        let poly = TrigPoly::from_terms(basis.clone(), dim, parsed).map_err(|e| e.to_string())?;
        if !poly.is_hermitian_valued() {
            return Err(format!("drive[{n}] is not Hermitian at all times"));
        }
        chain.push(poly);
    }
    Ok(chain)
}
