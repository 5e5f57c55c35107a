//! Run configuration: sectioned TOML with every key optional and unknown keys
//! rejected. Times are in vibrational periods; energies in units of `omega`.

use serde::{Deserialize, Serialize};
use vibdimer::interferometry::TransferMode;
use vibdimer::pulses::{PerturbativeOrder, Polarization, PulseLabel};
use vibdimer::states::{Direction, Frame};
use vibdimer::{DimerParams, Electronic};

use crate::error::{CliError, CliResult};

pub const MAX_CUTOFF: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Target of `vibdimer run`: a subcommand or scenario name.
    pub scenario: Option<String>,
    pub output_dir: String,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    pub params: DimerParams,
    pub basis: BasisConfig,
    pub initial: InitialConfig,
    /// Pulses applied to the initial state before `dynamics` and `eigen`.
    pub pulses: Vec<PulseStep>,
    pub dynamics: DynamicsConfig,
    pub interferometry: InterferometryConfig,
    pub matching: MatchConfig,
    pub scan: ScanConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenario: None,
            output_dir: "vibdimer-out".into(),
            workers: 0,
            params: DimerParams::default(),
            basis: BasisConfig::default(),
            initial: InitialConfig::default(),
            pulses: Vec::new(),
            dynamics: DynamicsConfig::default(),
            interferometry: InterferometryConfig::default(),
            matching: MatchConfig::default(),
            scan: ScanConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    /// Donor and acceptor blocks only.
    OneExciton,
    /// All four electronic configurations.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BasisConfig {
    pub cutoff: usize,
    pub states: BasisKind,
}

impl Default for BasisConfig {
    fn default() -> Self {
        BasisConfig { cutoff: 20, states: BasisKind::OneExciton }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    /// Ground vibrational state of surface 0 placed vertically on `state`.
    FranckCondon,
    /// Two-mode coherent state with amplitudes `alpha`, `beta` in `frame`.
    Coherent,
    /// Coherent excitation of size `gamma` along `direction`.
    Rotated,
    /// `(a†_∥)^p (a†_⊥)^q |state,0,0⟩`.
    Fock,
    /// Number state `|state, p, q⟩`.
    Number,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConfig {
    pub kind: InitialKind,
    /// `ground`, `donor`, `acceptor` or `doubly`.
    pub state: String,
    pub frame: Frame,
    /// `[re, im]`.
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub direction: Direction,
    pub gamma: f64,
    pub phase: f64,
    pub p: usize,
    pub q: usize,
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig {
            kind: InitialKind::FranckCondon,
            state: "donor".into(),
            frame: Frame::Ground,
            alpha: [0.0; 2],
            beta: [0.0; 2],
            direction: Direction::Perpendicular,
            gamma: 0.0,
            phase: 0.0,
            p: 0,
            q: 0,
        }
    }
}

impl InitialConfig {
    pub fn number(state: &str, p: usize, q: usize) -> Self {
        InitialConfig { kind: InitialKind::Number, state: state.into(), p, q, ..Self::default() }
    }

    pub fn fock(state: &str, p: usize, q: usize) -> Self {
        InitialConfig { kind: InitialKind::Fock, state: state.into(), p, q, ..Self::default() }
    }

    pub fn electronic(&self) -> CliResult<Electronic> {
        Electronic::parse(&self.state).ok_or_else(|| CliError::Config(format!("unknown electronic state `{}`", self.state)))
    }

    /// Short column label, e.g. `fock_donor_1_0`.
    pub fn label(&self) -> String {
        match self.kind {
            InitialKind::FranckCondon => format!("fc_{}", self.state),
            InitialKind::Coherent => format!("coherent_{}", self.state),
            InitialKind::Rotated => format!("rotated_{}", self.state),
            InitialKind::Fock => format!("fock_{}_{}_{}", self.state, self.p, self.q),
            InitialKind::Number => format!("number_{}_{}_{}", self.state, self.p, self.q),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseStep {
    pub label: PulseLabel,
    pub polarization: Polarization,
    #[serde(default)]
    pub phase: f64,
    #[serde(default = "one")]
    pub strength: f64,
    #[serde(default = "up")]
    pub order: PerturbativeOrder,
    /// Free evolution after the pulse, in periods.
    #[serde(default)]
    pub wait: f64,
}

fn one() -> f64 {
    1.0
}

fn up() -> PerturbativeOrder {
    PerturbativeOrder::Up
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsConfig {
    pub t_start: f64,
    pub t_end: f64,
    pub samples: usize,
    /// Also write mean positions and momenta per block.
    pub trajectories: bool,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig { t_start: 0.0, t_end: 20.0, samples: 2001, trajectories: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterferometryConfig {
    pub t_p: [f64; 2],
    pub t_p_points: usize,
    pub t_d: [f64; 2],
    pub t_d_points: usize,
    pub t_w: f64,
    pub phi_p: f64,
    pub phi_d: f64,
    pub strength: f64,
    pub transfer: TransferMode,
    /// Whether `J` acts while the reference wavepacket evolves.
    pub reference_coupling: bool,
    /// Refinement factor of the peak search; 0 skips refinement.
    pub refine: usize,
}

impl Default for InterferometryConfig {
    fn default() -> Self {
        InterferometryConfig {
            t_p: [0.0, 2.0],
            t_p_points: 64,
            t_d: [0.0, 2.0],
            t_d_points: 64,
            t_w: 0.5,
            phi_p: 0.0,
            phi_d: 0.0,
            strength: 1.0,
            transfer: TransferMode::Exact,
            reference_coupling: true,
            refine: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchConfig {
    /// Transfer fraction 𝒜; computed from the ridge timing when absent.
    pub fraction: Option<f64>,
    pub t_w: f64,
    pub m: u32,
    pub n: u32,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig { fraction: None, t_w: 0.5, m: 0, n: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanVariable {
    /// ε₁ − ε₁′ with ε₁ held fixed.
    Detuning,
    Coupling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub variable: ScanVariable,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    /// Instant at which P₁′ is sampled, in periods.
    pub probe_time: f64,
    /// Length of the P₁′ time average, in periods.
    pub average_time: f64,
    pub initial_states: Vec<InitialConfig>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        let efc = DimerParams::default().reorganization_energy();
        ScanConfig {
            variable: ScanVariable::Detuning,
            from: -4.0 * efc,
            to: 4.0 * efc,
            points: 33,
            probe_time: 2.0,
            average_time: 100.0,
            initial_states: vec![InitialConfig::number("donor", 0, 0), InitialConfig::fock("donor", 1, 0)],
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable")
    }

    /// Copy without the settings that cannot change results.
    pub fn physics_only(&self) -> Self {
        RunConfig { output_dir: String::new(), workers: 0, ..self.clone() }
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        self.params.validate()?;
        if self.basis.cutoff > MAX_CUTOFF {
            return bad(format!("basis.cutoff = {} exceeds {MAX_CUTOFF}", self.basis.cutoff));
        }
        if self.workers > 1024 {
            return bad(format!("workers = {} is unreasonable", self.workers));
        }
        validate_initial(&self.initial, "initial")?;
        for (k, p) in self.pulses.iter().enumerate() {
            if !p.phase.is_finite() || !p.strength.is_finite() || !(p.wait >= 0.0) || !p.wait.is_finite() {
                return bad(format!("pulses[{k}]: phase, strength and a non-negative wait must be finite"));
            }
        }
        let d = &self.dynamics;
        if !d.t_start.is_finite() || !d.t_end.is_finite() || d.t_end < d.t_start || d.samples == 0 {
            return bad("dynamics: need finite t_start <= t_end and samples >= 1".into());
        }
        let i = &self.interferometry;
        for (name, r, n) in [("t_p", i.t_p, i.t_p_points), ("t_d", i.t_d, i.t_d_points)] {
            if !(r[0] >= 0.0) || !r[1].is_finite() || r[1] <= r[0] || n < 3 {
                return bad(format!("interferometry.{name}: need 0 <= lo < hi and at least 3 points"));
            }
        }
        if !(i.t_w > 0.0) || !i.t_w.is_finite() {
            return bad("interferometry.t_w must be positive".into());
        }
        if !i.strength.is_finite() || i.strength == 0.0 || !i.phi_p.is_finite() || !i.phi_d.is_finite() {
            return bad("interferometry: strength must be non-zero and phases finite".into());
        }
        let m = &self.matching;
        if !(m.t_w > 0.0) || !m.t_w.is_finite() || m.fraction.is_some_and(|f| !f.is_finite()) {
            return bad("matching: t_w must be positive and fraction finite".into());
        }
        let s = &self.scan;
        if !s.from.is_finite() || !s.to.is_finite() || s.points == 0 {
            return bad("scan: need finite bounds and points >= 1".into());
        }
        if !(s.probe_time >= 0.0) || !(s.average_time > 0.0) || !s.average_time.is_finite() {
            return bad("scan: probe_time must be >= 0 and average_time > 0".into());
        }
        if s.initial_states.is_empty() {
            return bad("scan.initial_states must not be empty".into());
        }
        for (k, st) in s.initial_states.iter().enumerate() {
            validate_initial(st, &format!("scan.initial_states[{k}]"))?;
        }
        if let Some(name) = &self.scenario {
            if !crate::run::TARGETS.contains(&name.as_str()) {
                return bad(format!("unknown scenario `{name}`; expected one of {}", crate::run::TARGETS.join(", ")));
            }
        }
        Ok(())
    }
}

fn validate_initial(st: &InitialConfig, at: &str) -> CliResult<()> {
    st.electronic().map_err(|e| CliError::Config(format!("{at}: {e}")))?;
    let finite = st.alpha.iter().chain(&st.beta).chain([&st.gamma, &st.phase]).all(|v| v.is_finite());
    if !finite || st.gamma < 0.0 {
        return Err(CliError::Config(format!("{at}: amplitudes must be finite and gamma non-negative")));
    }
    Ok(())
}
