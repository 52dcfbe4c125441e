//! Run configuration: one TOML file, unknown keys rejected.
//!
//! Any knob can be overridden from the environment with
//! `PNFC_<SECTION>__<KEY>=<toml value>` (for example
//! `PNFC_CONVERGE__REF_DIM=64`) or `PNFC_<KEY>` for top-level keys.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

pub const ENV_PREFIX: &str = "PNFC_";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Decompose,
    Funcalc,
    LiftCalc,
    OracleCheck,
    Converge,
    ConvergeMulti,
    Regularize,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Decompose => "decompose",
            Command::Funcalc => "funcalc",
            Command::LiftCalc => "lift-calc",
            Command::OracleCheck => "oracle-check",
            Command::Converge => "converge",
            Command::ConvergeMulti => "converge-multi",
            Command::Regularize => "regularize",
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// When present it must match the subcommand.
    pub command: Option<Command>,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub input: Input,
    #[serde(default)]
    pub decompose: DecomposeKnobs,
    #[serde(default)]
    pub oracle: OracleKnobs,
    #[serde(default)]
    pub converge: ConvergeKnobs,
    #[serde(default)]
    pub converge_multi: ConvergeMultiKnobs,
    #[serde(default)]
    pub regularize: RegularizeKnobs,
    /// Directory of the config file; relative input paths resolve against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Input {
    /// `cmat v1` files, one per factor.
    #[serde(default)]
    pub matrices: Vec<PathBuf>,
    /// Function in the funcspace mini-language.
    pub function: Option<String>,
    /// Short name used in report file names.
    #[serde(default = "default_label")]
    pub label: String,
}

fn default_label() -> String {
    "f".into()
}

impl Default for Input {
    fn default() -> Self {
        Self {
            matrices: Vec::new(),
            function: None,
            label: default_label(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecomposeKnobs {
    /// Absolute clustering tolerance; unset means relative to `‖X‖`.
    pub cluster_tol: Option<f64>,
    pub tol_dec: f64,
    pub tol_nil: f64,
    pub nodes: usize,
}

impl Default for DecomposeKnobs {
    fn default() -> Self {
        let d = pnfc_core::spectra::DecomposeOptions::default();
        Self {
            cluster_tol: d.cluster_tol,
            tol_dec: d.tol_dec,
            tol_nil: d.tol_nil,
            nodes: d.nodes,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleKnobs {
    /// Quadrature nodes per factor for the multivariate Dunford integral.
    pub nodes: usize,
    /// Extra radius added around each factor's spectrum.
    pub margin: f64,
    pub max_degree: usize,
    /// Maximum admissible pairwise discrepancy (absolute, operator norm).
    pub tolerance: f64,
}

impl Default for OracleKnobs {
    fn default() -> Self {
        Self {
            nodes: pnfc_core::calculus::DEFAULT_MULTI_NODES,
            margin: 1.5,
            max_degree: 160,
            tolerance: 1e-9,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContourSpec {
    pub center: [f64; 2],
    pub radius: f64,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
}

fn default_nodes() -> usize {
    pnfc_core::spectra::DEFAULT_NODES
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergeKnobs {
    pub model: String,
    pub ref_dim: usize,
    pub guard: usize,
    pub z0: [f64; 2],
    pub contour: Option<ContourSpec>,
    pub n_list: Vec<usize>,
    /// Number of leading basis vectors used as probes (capped by `n_min`).
    pub probes: usize,
    /// Also run at `ref_dim/2` and report the reference stability.
    pub audit: bool,
    /// Nonempty switches to the perturbation family `X + δE`.
    pub deltas: Vec<f64>,
}

impl Default for ConvergeKnobs {
    fn default() -> Self {
        Self {
            model: "harmonic".into(),
            ref_dim: 64,
            guard: 4,
            z0: [-1.0, 0.0],
            contour: None,
            n_list: vec![4, 8, 16, 32],
            probes: 4,
            audit: false,
            deltas: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorKnobs {
    pub model: String,
    pub ref_dim: usize,
    #[serde(default = "default_guard")]
    pub guard: usize,
    #[serde(default = "default_z0")]
    pub z0: [f64; 2],
    pub contour: ContourSpec,
    #[serde(default = "default_true")]
    pub truncate: bool,
}

fn default_guard() -> usize {
    4
}

fn default_z0() -> [f64; 2] {
    [-1.0, 0.0]
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergeMultiKnobs {
    pub factors: Vec<FactorKnobs>,
    pub n_list: Vec<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegularizeKnobs {
    pub model: String,
    pub k_model: String,
    pub ref_dim: usize,
    pub guard: usize,
    pub eps: Vec<f64>,
    pub z0: [f64; 2],
    pub probes: usize,
}

impl Default for RegularizeKnobs {
    fn default() -> Self {
        Self {
            model: "complex_harmonic".into(),
            k_model: "harmonic".into(),
            ref_dim: 64,
            guard: 4,
            eps: vec![1e-1, 1e-2, 1e-3, 1e-4],
            z0: [-1.0, 0.0],
            probes: 4,
        }
    }
}

impl Config {
    /// Reads `path`, applies environment overrides from `env` and validates.
    pub fn load(path: &Path, env: impl IntoIterator<Item = (String, String)>) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut cfg = Self::parse(&text, env)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn parse(text: &str, env: impl IntoIterator<Item = (String, String)>) -> Result<Self, CliError> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Parse(e.to_string()))?;
        for (key, value) in env {
            let Some(rest) = key.strip_prefix(ENV_PREFIX) else {
                continue;
            };
            apply_override(&mut table, &rest.to_ascii_lowercase(), &value)?;
        }
        let cfg: Config = table
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Parse(msg));
        let d = &self.decompose;
        if !(d.tol_dec > 0.0 && d.tol_dec < 1.0) || !(d.tol_nil > 0.0 && d.tol_nil < 1.0) {
            return bad("decompose.tol_dec and decompose.tol_nil must lie in (0, 1)".into());
        }
        if d.cluster_tol.is_some_and(|t| !(t > 0.0)) {
            return bad("decompose.cluster_tol must be positive".into());
        }
        if d.nodes < pnfc_core::spectra::MIN_NODES {
            return bad(format!("decompose.nodes must be >= {}", pnfc_core::spectra::MIN_NODES));
        }
        let o = &self.oracle;
        if o.nodes < pnfc_core::spectra::MIN_NODES || !(o.margin > 0.0) || !(o.tolerance > 0.0) || o.max_degree == 0 {
            return bad("oracle: nodes >= 16, margin > 0, tolerance > 0, max_degree >= 1 required".into());
        }
        let c = &self.converge;
        if c.probes == 0 || c.n_list.contains(&0) || c.deltas.iter().any(|d| !(*d > 0.0)) {
            return bad("converge: probes >= 1, n_list entries >= 1 and deltas > 0 required".into());
        }
        if self.converge_multi.n_list.contains(&0) {
            return bad("converge_multi.n_list entries must be >= 1".into());
        }
        let r = &self.regularize;
        if r.probes == 0 || r.eps.iter().any(|e| !(*e >= 0.0)) {
            return bad("regularize: probes >= 1 and eps >= 0 required".into());
        }
        Ok(())
    }
}

/// `section__key` or `key`; the value is parsed as TOML and falls back to a
/// plain string.
fn apply_override(table: &mut toml::Table, key: &str, raw: &str) -> Result<(), CliError> {
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    match key.split_once("__") {
        Some((section, field)) => {
            let entry = table
                .entry(section.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            match entry {
                toml::Value::Table(t) => {
                    t.insert(field.to_string(), value);
                }
                _ => return Err(CliError::Parse(format!("override {key}: `{section}` is not a section"))),
            }
        }
        None => {
            table.insert(key.to_string(), value);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn none() -> Vec<(String, String)> {
        Vec::new()
    }

    #[test]
    fn defaults_and_sections() {
        let cfg = Config::parse("seed = 3\n[converge]\nref_dim = 32\nn_list = [2, 4]\n", none()).unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.converge.ref_dim, 32);
        assert_eq!(cfg.converge.model, "harmonic");
        assert_eq!(cfg.input.label, "f");
        assert_eq!(cfg.oracle.tolerance, 1e-9);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(Config::parse("sed = 3\n", none()).is_err());
        assert!(Config::parse("[converge]\nrefdim = 3\n", none()).is_err());
        assert!(Config::parse("[nonsense]\n", none()).is_err());
    }

    #[test]
    fn environment_overrides() {
        let env = vec![
            ("PNFC_CONVERGE__REF_DIM".to_string(), "48".to_string()),
            ("PNFC_INPUT__FUNCTION".to_string(), "exp(-1*z1)".to_string()),
            ("PNFC_SEED".to_string(), "9".to_string()),
            ("HOME".to_string(), "/x".to_string()),
        ];
        let cfg = Config::parse("[converge]\nref_dim = 32\n", env).unwrap();
        assert_eq!(cfg.converge.ref_dim, 48);
        assert_eq!(cfg.input.function.as_deref(), Some("exp(-1*z1)"));
        assert_eq!(cfg.seed, 9);
        let bad = vec![("PNFC_CONVERGE__NOPE".to_string(), "1".to_string())];
        assert!(Config::parse("", bad).is_err());
    }

    #[test]
    fn ranges_are_checked() {
        assert!(Config::parse("[decompose]\ntol_dec = 0.0\n", none()).is_err());
        assert!(Config::parse("[converge]\ndeltas = [0.1, -1.0]\n", none()).is_err());
        assert!(Config::parse("command = \"lift-calc\"\n", none()).unwrap().command == Some(Command::LiftCalc));
    }
}
