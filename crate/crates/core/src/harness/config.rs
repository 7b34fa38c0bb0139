//! TOML experiment description and Hamiltonian loading.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermion::{build_hubbard, classify_groups, jordan_wigner, parse_fcidump, PhysicalGroup};
use crate::numerics::state::NoiseConfig;
use crate::pauli::{dense_limit, PauliHamiltonian};
use crate::schedule::{GroupScheme, Protocol, ProtectionPhases};

/// Where the Hamiltonian comes from. Paths are relative to the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum HamiltonianSource {
    Fcidump {
        path: PathBuf,
        #[serde(default)]
        electrons: Option<usize>,
    },
    Hubbard {
        sites: usize,
        hopping: f64,
        interaction: f64,
        /// Defaults to half filling.
        #[serde(default)]
        electrons: Option<usize>,
    },
    PauliJson {
        path: PathBuf,
        #[serde(default)]
        electrons: Option<usize>,
    },
}

/// A protocol together with the variant knobs that change its schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolChoice {
    Trotter1,
    Trotter2,
    Suzuki,
    Qdrift,
    PhysdriftAbs,
    PhysdriftMean,
    RandomPermutation,
    Sparsto,
}

impl ProtocolChoice {
    pub fn name(self) -> &'static str {
        match self {
            ProtocolChoice::Trotter1 => "trotter1",
            ProtocolChoice::Trotter2 => "trotter2",
            ProtocolChoice::Suzuki => "suzuki",
            ProtocolChoice::Qdrift => "qdrift",
            ProtocolChoice::PhysdriftAbs => "physdrift_abs",
            ProtocolChoice::PhysdriftMean => "physdrift_mean",
            ProtocolChoice::RandomPermutation => "random_permutation",
            ProtocolChoice::Sparsto => "sparsto",
        }
    }

    pub fn protocol(self) -> Protocol {
        match self {
            ProtocolChoice::Trotter1 => Protocol::Trotter1,
            ProtocolChoice::Trotter2 => Protocol::Trotter2,
            ProtocolChoice::Suzuki => Protocol::Suzuki,
            ProtocolChoice::Qdrift => Protocol::Qdrift,
            ProtocolChoice::PhysdriftAbs | ProtocolChoice::PhysdriftMean => Protocol::Physdrift,
            ProtocolChoice::RandomPermutation => Protocol::RandomPermutation,
            ProtocolChoice::Sparsto => Protocol::Sparsto,
        }
    }

    pub fn group_scheme(self) -> Option<GroupScheme> {
        match self {
            ProtocolChoice::PhysdriftAbs => Some(GroupScheme::Abs),
            ProtocolChoice::PhysdriftMean => Some(GroupScheme::Mean),
            _ => None,
        }
    }
}

impl std::fmt::Display for ProtocolChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ProtocolChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ProtocolChoice::deserialize(serde::de::value::StrDeserializer::<serde::de::value::Error>::new(s))
            .map_err(|_| Error::Config(format!("unknown protocol {s:?}")))
    }
}

/// What the values of the step grid count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridUnit {
    /// Steps or samples `N` handed to the protocol.
    #[default]
    Steps,
    /// Target number of exponentials; converted per protocol.
    ExponentialCount,
}

fn default_order() -> u32 {
    4
}

fn default_permutation_average() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    pub names: Vec<ProtocolChoice>,
    pub times: Vec<f64>,
    pub grid: Vec<usize>,
    #[serde(default)]
    pub grid_unit: GridUnit,
    /// Suzuki order (even).
    #[serde(default = "default_order")]
    pub order: u32,
    #[serde(default)]
    pub protection: bool,
    #[serde(default)]
    pub protection_phases: ProtectionPhases,
    /// Block reorderings averaged per physDrift trial before taking the error.
    #[serde(default = "default_permutation_average")]
    pub permutation_average: usize,
}

fn default_trials() -> usize {
    20
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialConfig {
    #[serde(default = "default_trials")]
    pub count: usize,
    #[serde(default)]
    pub base_seed: u64,
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig { count: default_trials(), base_seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    SpectralError,
    MixingBound,
    Observables,
    Histogram,
    Tallies,
}

/// Initial state for observable tracking.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Lowest spin orbitals filled with the configured electron count.
    #[default]
    HartreeFock,
    /// Ground state of the fixed electron-number sector.
    Ground,
    /// Explicit bitstring, qubit 0 first.
    Bits(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableKind {
    /// `<H>` including the scalar offset.
    Energy,
    /// `|<H> - <H>_0|`.
    EnergyError,
    ParticleNumber,
    /// Phase-aligned distance to the exactly evolved state.
    StateError,
}

impl ObservableKind {
    pub fn name(self) -> &'static str {
        match self {
            ObservableKind::Energy => "energy",
            ObservableKind::EnergyError => "energy_error",
            ObservableKind::ParticleNumber => "particle_number",
            ObservableKind::StateError => "state_error",
        }
    }
}

fn default_observables() -> Vec<ObservableKind> {
    vec![ObservableKind::Energy, ObservableKind::ParticleNumber]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableConfig {
    #[serde(default)]
    pub initial: InitialState,
    #[serde(default = "default_observables")]
    pub names: Vec<ObservableKind>,
    /// Checkpoint kind for time series; protocol default when absent.
    #[serde(default)]
    pub checkpoint: Option<crate::numerics::Checkpoint>,
    /// Target precision for the shot count column.
    #[serde(default = "default_shot_epsilon")]
    pub shot_epsilon: f64,
}

fn default_shot_epsilon() -> f64 {
    0.01
}

impl Default for ObservableConfig {
    fn default() -> Self {
        ObservableConfig {
            initial: InitialState::default(),
            names: default_observables(),
            checkpoint: None,
            shot_epsilon: default_shot_epsilon(),
        }
    }
}

fn default_metrics() -> Vec<Metric> {
    vec![Metric::SpectralError, Metric::MixingBound]
}

fn default_directory() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<Metric>,
    #[serde(default)]
    pub plots: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { directory: default_directory(), metrics: default_metrics(), plots: false }
    }
}

fn default_epsilon() -> f64 {
    0.01
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    /// Target error for the closed-form cost table.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig { epsilon: default_epsilon() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub hamiltonian: HamiltonianSource,
    pub protocol: ProtocolConfig,
    #[serde(default = "NoiseConfig::noiseless")]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub trials: TrialConfig,
    #[serde(default)]
    pub observables: ObservableConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
    #[serde(default)]
    pub bounds: BoundsConfig,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.into();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, dir)
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.protocol;
        if p.names.is_empty() {
            return Err(Error::Config("protocol.names is empty".into()));
        }
        if p.grid.is_empty() {
            return Err(Error::Config("protocol.grid is empty".into()));
        }
        if p.grid.contains(&0) || p.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!("protocol.grid must be positive and strictly ascending, got {:?}", p.grid)));
        }
        if p.times.is_empty() || p.times.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return Err(Error::Config("protocol.times must be nonempty and positive".into()));
        }
        if p.names.contains(&ProtocolChoice::Suzuki) && (p.order < 2 || p.order % 2 == 1) {
            return Err(Error::Config(format!("suzuki order must be even and at least 2, got {}", p.order)));
        }
        if p.permutation_average == 0 {
            return Err(Error::Config("protocol.permutation_average must be at least 1".into()));
        }
        if self.trials.count == 0 {
            return Err(Error::Config("trials.count must be at least 1".into()));
        }
        if !(self.observables.shot_epsilon > 0.0) {
            return Err(Error::Config("observables.shot_epsilon must be positive".into()));
        }
        self.noise.validate()
    }

    pub fn wants(&self, m: Metric) -> bool {
        self.outputs.metrics.contains(&m)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Output directory, resolved against the working directory.
    pub fn output_dir(&self) -> &Path {
        &self.outputs.directory
    }
}

/// A loaded Hamiltonian with everything the protocols may need.
#[derive(Debug, Clone)]
pub struct Problem {
    pub hamiltonian: PauliHamiltonian,
    /// Physical groups; absent for Pauli-list sources.
    pub groups: Option<Vec<PhysicalGroup>>,
    pub electrons: Option<usize>,
}

impl Problem {
    pub fn n_qubits(&self) -> usize {
        self.hamiltonian.n_qubits()
    }

    pub fn groups(&self) -> Result<&[PhysicalGroup]> {
        self.groups
            .as_deref()
            .ok_or_else(|| Error::Unsupported("physDrift needs a second-quantized source (fcidump or hubbard)".into()))
    }
}

pub fn load_problem(cfg: &ExperimentConfig) -> Result<Problem> {
    let problem = match &cfg.hamiltonian {
        HamiltonianSource::Fcidump { path, electrons } => {
            let path = cfg.resolve(path);
            let file = File::open(&path).map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))?;
            let data = parse_fcidump(BufReader::new(file))?;
            let sq = data.to_spin_orbitals()?;
            Problem {
                hamiltonian: jordan_wigner(&sq)?,
                groups: Some(classify_groups(&sq)?),
                electrons: Some(electrons.unwrap_or(data.nelec)),
            }
        }
        HamiltonianSource::Hubbard { sites, hopping, interaction, electrons } => {
            let sq = build_hubbard(*sites, *hopping, *interaction)?;
            Problem {
                hamiltonian: jordan_wigner(&sq)?,
                groups: Some(classify_groups(&sq)?),
                electrons: Some(electrons.unwrap_or(*sites)),
            }
        }
        HamiltonianSource::PauliJson { path, electrons } => {
            let path = cfg.resolve(path);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))?;
            Problem { hamiltonian: PauliHamiltonian::from_json(&text)?, groups: None, electrons: *electrons }
        }
    };
    let limit = dense_limit();
    if problem.n_qubits() > limit {
        return Err(Error::DenseLimit { n: problem.n_qubits(), limit });
    }
    Ok(problem)
}
