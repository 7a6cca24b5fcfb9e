//! Ancilla-controlled interference experiments.
//!
//! An ancilla prepared in `(|0⟩ + |1⟩)/√2` selects which of two branch
//! programs acts on the register. Since the register starts in a product
//! state with the ancilla, the joint evolution is represented exactly by the
//! two branch vectors `ψ0`, `ψ1`; the ancilla coherence is `⟨ψ0|ψ1⟩/2`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fock::{
    apply_hop_sequence, apply_operator_string_with_ledger, hops_as_operator_string, inner_product,
    FockBasisState, Hop, OperatorString, RegisterLayout, SignLedger, StateVector,
};

/// Version of the JSON result schema.
pub const SCHEMA_VERSION: u32 = 1;
/// Below this visibility the relative phase is reported as undefined.
pub const VISIBILITY_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvaluationMode {
    /// Operator strings evaluated right to left exactly as written.
    Literal,
    /// Hops applied one after another as physical transport.
    #[default]
    Sequential,
}

impl fmt::Display for EvaluationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvaluationMode::Literal => "literal",
            EvaluationMode::Sequential => "sequential",
        })
    }
}

impl FromStr for EvaluationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(EvaluationMode::Literal),
            "sequential" => Ok(EvaluationMode::Sequential),
            _ => Err(Error::InvalidParameter(format!("unknown evaluation mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BranchSteps {
    Hops(Vec<Hop>),
    String(OperatorString),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchProgram {
    pub label: String,
    pub steps: BranchSteps,
}

impl BranchProgram {
    pub fn hops(label: &str, hops: Vec<Hop>) -> Self {
        BranchProgram { label: label.to_string(), steps: BranchSteps::Hops(hops) }
    }

    pub fn string(label: &str, s: OperatorString) -> Self {
        BranchProgram { label: label.to_string(), steps: BranchSteps::String(s) }
    }

    pub fn identity(label: &str) -> Self {
        Self::hops(label, Vec::new())
    }

    /// The branch as a single operator string (hops become `f†_to f_from` pairs).
    pub fn operator_string(&self) -> OperatorString {
        match &self.steps {
            BranchSteps::Hops(h) => hops_as_operator_string(h),
            BranchSteps::String(s) => s.clone(),
        }
    }

    pub fn evaluate(&self, start: &StateVector) -> Result<(StateVector, SignLedger)> {
        match &self.steps {
            BranchSteps::Hops(h) => apply_hop_sequence(h, start),
            BranchSteps::String(s) => {
                let mut ledger = SignLedger::new();
                let out = apply_operator_string_with_ledger(s, start, &mut ledger)?;
                Ok((out, ledger))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ControlledExperiment {
    pub name: String,
    pub layout: Arc<RegisterLayout>,
    pub initial: FockBasisState,
    pub branch0: BranchProgram,
    pub branch1: BranchProgram,
    pub mode: EvaluationMode,
    pub params: BTreeMap<String, Value>,
}

/// Overlap of two branch vectors and the quantities read from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseReading {
    /// `⟨ψ0|ψ1⟩` over normalized branches.
    pub overlap: Complex64,
    /// `arg⟨ψ0|ψ1⟩` in `(-π, π]`, or `None` when the visibility is below [`VISIBILITY_FLOOR`].
    pub phase: Option<f64>,
    pub visibility: f64,
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_phase(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    // rem_euclid can land exactly on 2π after rounding
    if a <= -PI {
        a += 2.0 * PI;
    }
    a + 0.0
}

fn phase_of(overlap: Complex64) -> f64 {
    let phi = overlap.im.atan2(overlap.re);
    // atan2 returns -π for a negative real axis approached from below (including -0.0)
    if phi <= -PI {
        PI
    } else {
        phi + 0.0
    }
}

/// Relative phase and visibility between two branch states.
pub fn extract_phase(psi0: &StateVector, psi1: &StateVector) -> Result<PhaseReading> {
    psi0.check_layout(psi1)?;
    let (Some(a), Some(b)) = (psi0.normalized(), psi1.normalized()) else {
        return Ok(PhaseReading { overlap: Complex64::new(0.0, 0.0), phase: None, visibility: 0.0 });
    };
    let overlap = inner_product(&a, &b)?;
    let visibility = overlap.norm().min(1.0);
    let phase = (visibility > VISIBILITY_FLOOR).then(|| phase_of(overlap));
    Ok(PhaseReading { overlap, phase, visibility })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasurementBasis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measurement {
    Probabilities { plus: f64, minus: f64 },
    Counts { plus: u64, minus: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShotCounts {
    pub shots: u64,
    pub seed: u64,
    pub x_plus: u64,
    pub y_plus: u64,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub experiment: String,
    pub params: BTreeMap<String, Value>,
    pub overlap: Complex64,
    pub phase: Option<f64>,
    pub visibility: f64,
    pub branch_labels: [String; 2],
    pub branch_states: [StateVector; 2],
    pub ledgers: [SignLedger; 2],
    pub seed: Option<u64>,
    pub counts: Option<ShotCounts>,
    pub version: u32,
    /// False when a branch annihilated the register.
    pub valid: bool,
}

impl ExperimentResult {
    pub fn from_branches(
        experiment: &str,
        params: BTreeMap<String, Value>,
        branch_labels: [String; 2],
        branch_states: [StateVector; 2],
        ledgers: [SignLedger; 2],
    ) -> Result<Self> {
        let reading = extract_phase(&branch_states[0], &branch_states[1])?;
        let valid = !branch_states[0].is_zero() && !branch_states[1].is_zero();
        Ok(ExperimentResult {
            experiment: experiment.to_string(),
            params,
            overlap: reading.overlap,
            phase: reading.phase,
            visibility: reading.visibility,
            branch_labels,
            branch_states,
            ledgers,
            seed: None,
            counts: None,
            version: SCHEMA_VERSION,
            valid,
        })
    }

    /// Ancilla `+` probability in the X basis: `(1 + V cos φ)/2`.
    pub fn x_plus_probability(&self) -> f64 {
        ((1.0 + self.overlap.re) / 2.0).clamp(0.0, 1.0)
    }

    /// Ancilla `+` probability in the Y basis: `(1 + V sin φ)/2`.
    pub fn y_plus_probability(&self) -> f64 {
        ((1.0 + self.overlap.im) / 2.0).clamp(0.0, 1.0)
    }

    /// Relative sign read off the ledgers: product of branch-1 signs times branch-0 signs.
    pub fn ledger_relative_sign(&self) -> crate::fock::Sign {
        self.ledgers[0].product() * self.ledgers[1].product()
    }

    /// Samples `shots` ancilla read-outs in both bases, reproducibly per seed.
    pub fn with_shots(mut self, shots: u64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x_plus = sample(&mut rng, shots, self.x_plus_probability())?;
        let y_plus = sample(&mut rng, shots, self.y_plus_probability())?;
        self.seed = Some(seed);
        self.counts = Some(ShotCounts { shots, seed, x_plus, y_plus });
        Ok(self)
    }

    fn branch_ket(psi: &StateVector) -> String {
        psi.dominant_configuration().map_or_else(|| "0".to_string(), |s| s.to_string())
    }

    /// The published JSON document. Keys are emitted in sorted order.
    pub fn to_json(&self) -> Value {
        let mut probabilities = json!({
            "x_plus": self.x_plus_probability(),
            "y_plus": self.y_plus_probability(),
        });
        if let Some(c) = self.counts {
            probabilities["counts"] = json!({
                "shots": c.shots,
                "x_plus": c.x_plus,
                "y_plus": c.y_plus,
            });
        }
        json!({
            "experiment": self.experiment,
            "params": self.params,
            "phase_rad": self.phase,
            "visibility": self.visibility,
            "branch_final": [
                Self::branch_ket(&self.branch_states[0]),
                Self::branch_ket(&self.branch_states[1]),
            ],
            "ledgers": [self.ledgers[0].clone(), self.ledgers[1].clone()],
            "probabilities": probabilities,
            "seed": self.seed,
            "version": self.version,
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("JSON values always serialize")
    }
}

fn sample(rng: &mut ChaCha8Rng, shots: u64, p: f64) -> Result<u64> {
    let dist = Binomial::new(shots, p.clamp(0.0, 1.0))
        .map_err(|e| Error::InvalidParameter(format!("binomial sampling: {e}")))?;
    Ok(dist.sample(rng))
}

/// Reads out the ancilla. Without `shots` returns exact probabilities; with
/// `shots` a seed is mandatory and the counts are reproducible per seed.
pub fn ancilla_measure(
    r: &ExperimentResult,
    basis: MeasurementBasis,
    shots: Option<u64>,
    seed: Option<u64>,
) -> Result<Measurement> {
    if !r.valid {
        return Err(Error::InvalidExperiment(format!("{} has an annihilated branch", r.experiment)));
    }
    let p = match basis {
        MeasurementBasis::X => r.x_plus_probability(),
        MeasurementBasis::Y => r.y_plus_probability(),
    };
    match (shots, seed) {
        (None, _) => Ok(Measurement::Probabilities { plus: p, minus: 1.0 - p }),
        (Some(_), None) => Err(Error::ShotsWithoutSeed),
        (Some(n), Some(seed)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let plus = sample(&mut rng, n, p)?;
            Ok(Measurement::Counts { plus, minus: n - plus })
        }
    }
}

/// Human-readable statistics label: `fermion`, `boson` or `mixed:<rows>`.
pub fn statistics_label(layout: &RegisterLayout) -> String {
    let rows = layout.statistics().rows();
    match rows.as_slice() {
        [r] if r == &[-1] => "fermion".into(),
        [r] if r == &[1] => "boson".into(),
        _ => format!(
            "mixed:{}",
            rows.iter()
                .map(|r| r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","))
                .collect::<Vec<_>>()
                .join(";")
        ),
    }
}

impl ControlledExperiment {
    pub fn new(
        name: &str,
        layout: Arc<RegisterLayout>,
        initial: FockBasisState,
        branch0: BranchProgram,
        branch1: BranchProgram,
        mode: EvaluationMode,
    ) -> Self {
        let mut params = BTreeMap::new();
        params.insert("modes".into(), layout.modes().into());
        params.insert("initial".into(), initial.to_string().into());
        params.insert("statistics".into(), statistics_label(&layout).into());
        params.insert("mode".into(), mode.to_string().into());
        ControlledExperiment { name: name.to_string(), layout, initial, branch0, branch1, mode, params }
    }

    pub fn with_param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }
}

/// Evaluates both branches from the shared initial state and reads out the phase.
pub fn run_controlled(e: &ControlledExperiment) -> Result<ExperimentResult> {
    let start = StateVector::basis(e.layout.clone(), e.initial)?;
    let (psi0, ledger0) = e.branch0.evaluate(&start)?;
    let (psi1, ledger1) = e.branch1.evaluate(&start)?;
    ExperimentResult::from_branches(
        &e.name,
        e.params.clone(),
        [e.branch0.label.clone(), e.branch1.label.clone()],
        [psi0, psi1],
        [ledger0, ledger1],
    )
}

fn hop_list(pairs: &[(u32, u32)]) -> Vec<Hop> {
    pairs.iter().map(|&(a, b)| Hop::between(a, b).expect("fixed schedules use distinct modes")).collect()
}

fn require_modes(layout: &RegisterLayout, modes: usize, experiment: &str) -> Result<()> {
    if layout.modes() != modes {
        return Err(Error::InvalidExperiment(format!(
            "{experiment} needs a {modes}-mode register, got {}",
            layout.modes()
        )));
    }
    Ok(())
}

fn four_mode_start() -> FockBasisState {
    FockBasisState::from_occupied(4, &[1, 3]).expect("static state")
}

/// First clockwise step of the four-site swap, as printed.
pub fn step_one_string() -> OperatorString {
    "f†_4 f_3 f†_2 f_1".parse().expect("static string")
}

/// Second step of the four-site swap, as printed.
pub fn step_two_string() -> OperatorString {
    "f_4 f†_3 f_2 f†_1".parse().expect("static string")
}

/// Counterclockwise half swap, as printed.
pub fn counterclockwise_string() -> OperatorString {
    "f†_4 f_3 f†_2 f_1".parse().expect("static string")
}

/// Clockwise half swap, as printed.
pub fn clockwise_string() -> OperatorString {
    "f†_2 f_3 f†_4 f_1".parse().expect("static string")
}

pub fn full_swap_hops() -> Vec<Hop> {
    hop_list(&[(1, 2), (3, 4), (2, 3), (4, 1)])
}

/// Controlled full swap of two particles on four sites starting from `|1010⟩`.
///
/// Branch 0 does nothing. In sequential mode branch 1 moves both particles
/// clockwise twice; in literal mode it applies the two printed step strings.
pub fn experiment_full_controlled_swap(
    layout: Arc<RegisterLayout>,
    mode: EvaluationMode,
) -> Result<ExperimentResult> {
    require_modes(&layout, 4, "full-swap")?;
    let swap = match mode {
        EvaluationMode::Sequential => BranchProgram::hops("swap", full_swap_hops()),
        EvaluationMode::Literal => BranchProgram::string("swap", step_two_string().after(&step_one_string())),
    };
    let e = ControlledExperiment::new(
        "full-swap",
        layout,
        four_mode_start(),
        BranchProgram::identity("identity"),
        swap,
        mode,
    );
    run_controlled(&e)
}

/// Interferes the two half swaps: forward `(1→2),(3→4)` against backward `(1→4),(3→2)`.
pub fn experiment_half_swap_interference(
    layout: Arc<RegisterLayout>,
    mode: EvaluationMode,
) -> Result<ExperimentResult> {
    require_modes(&layout, 4, "half-swap")?;
    let (b0, b1) = match mode {
        EvaluationMode::Sequential => (
            BranchProgram::hops("forward", hop_list(&[(1, 2), (3, 4)])),
            BranchProgram::hops("backward", hop_list(&[(1, 4), (3, 2)])),
        ),
        EvaluationMode::Literal => (
            BranchProgram::string("forward", counterclockwise_string()),
            BranchProgram::string("backward", clockwise_string()),
        ),
    };
    let e = ControlledExperiment::new("half-swap", layout, four_mode_start(), b0, b1, mode);
    run_controlled(&e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RingTurn {
    /// Every particle moves to its neighbouring site once.
    #[default]
    Step,
    /// Every particle goes once around the ring.
    Revolution,
}

impl fmt::Display for RingTurn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RingTurn::Step => "step",
            RingTurn::Revolution => "revolution",
        })
    }
}

impl FromStr for RingTurn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "step" => Ok(RingTurn::Step),
            "revolution" => Ok(RingTurn::Revolution),
            _ => Err(Error::InvalidParameter(format!("unknown ring turn {s:?}"))),
        }
    }
}

/// `n` particles on the odd modes of a `2n`-mode ring.
#[derive(Debug, Clone)]
pub struct RingConfig {
    pub n: usize,
    pub turn: RingTurn,
    pub layout: Arc<RegisterLayout>,
}

impl RingConfig {
    pub fn new(n: usize, turn: RingTurn, layout: Arc<RegisterLayout>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidExperiment("ring needs at least one particle".into()));
        }
        require_modes(&layout, 2 * n, "ring")?;
        Ok(RingConfig { n, turn, layout })
    }

    pub fn fermions(n: usize) -> Result<Self> {
        Self::new(n, RingTurn::Step, Arc::new(RegisterLayout::fermions(2 * n)?))
    }

    pub fn initial(&self) -> FockBasisState {
        let odd: Vec<u32> = (0..self.n as u32).map(|i| 2 * i + 1).collect();
        FockBasisState::from_occupied(2 * self.n, &odd).expect("ring fits its layout")
    }

    fn wrap_hop(&self, from: u32, to: u32) -> Hop {
        let h = Hop::between(from, to).expect("distinct ring sites");
        // with two sites the closing hop is also an ordinary neighbour hop
        if self.n >= 2 {
            h.wrapping()
        } else {
            h
        }
    }

    /// Odd → next even site, increasing index.
    pub fn forward_from_odd(&self) -> Vec<Hop> {
        let n = self.n as u32;
        hop_list(&(1..=n).map(|i| (2 * i - 1, 2 * i)).collect::<Vec<_>>())
    }

    /// Even → next odd site, closing the ring with `2n → 1`.
    pub fn forward_from_even(&self) -> Vec<Hop> {
        let n = self.n as u32;
        let mut hops = hop_list(&(1..n).map(|i| (2 * i, 2 * i + 1)).collect::<Vec<_>>());
        hops.push(self.wrap_hop(2 * n, 1));
        hops
    }

    /// Odd → previous even site: the wrap hop `1 → 2n` first, then `2i+1 → 2i`.
    pub fn backward_from_odd(&self) -> Vec<Hop> {
        let n = self.n as u32;
        let mut hops = vec![self.wrap_hop(1, 2 * n)];
        hops.extend(hop_list(&(1..n).map(|i| (2 * i + 1, 2 * i)).collect::<Vec<_>>()));
        hops
    }

    /// Even → previous odd site.
    pub fn backward_from_even(&self) -> Vec<Hop> {
        let n = self.n as u32;
        hop_list(&(1..=n).map(|i| (2 * i, 2 * i - 1)).collect::<Vec<_>>())
    }

    pub fn forward(&self) -> Vec<Hop> {
        match self.turn {
            RingTurn::Step => self.forward_from_odd(),
            RingTurn::Revolution => (0..self.n)
                .flat_map(|_| self.forward_from_odd().into_iter().chain(self.forward_from_even()))
                .collect(),
        }
    }

    pub fn backward(&self) -> Vec<Hop> {
        match self.turn {
            RingTurn::Step => self.backward_from_odd(),
            RingTurn::Revolution => (0..self.n)
                .flat_map(|_| self.backward_from_odd().into_iter().chain(self.backward_from_even()))
                .collect(),
        }
    }
}

/// Interferes a one-site rotation of the ring in both directions (or a full
/// revolution each way, depending on `cfg.turn`).
pub fn experiment_ring_rotation(cfg: &RingConfig, mode: EvaluationMode) -> Result<ExperimentResult> {
    let (fwd, bwd) = (cfg.forward(), cfg.backward());
    let (b0, b1) = match mode {
        EvaluationMode::Sequential => (BranchProgram::hops("forward", fwd), BranchProgram::hops("backward", bwd)),
        EvaluationMode::Literal => (
            BranchProgram::string("forward", hops_as_operator_string(&fwd)),
            BranchProgram::string("backward", hops_as_operator_string(&bwd)),
        ),
    };
    let e = ControlledExperiment::new("ring", cfg.layout.clone(), cfg.initial(), b0, b1, mode)
        .with_param("n", cfg.n)
        .with_param("turn", cfg.turn.to_string());
    run_controlled(&e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{Sign, StatisticsMatrix};

    fn fermions(m: usize) -> Arc<RegisterLayout> {
        Arc::new(RegisterLayout::fermions(m).unwrap())
    }

    fn bosons(m: usize) -> Arc<RegisterLayout> {
        Arc::new(RegisterLayout::hardcore_bosons(m).unwrap())
    }

    fn ket(layout: &Arc<RegisterLayout>, s: &str) -> StateVector {
        StateVector::basis(layout.clone(), s.parse().unwrap()).unwrap()
    }

    #[test]
    fn phase_extraction_examples() {
        let l = fermions(4);
        let psi = ket(&l, "1010");
        let r = extract_phase(&psi, &psi.scale(Complex64::new(-1.0, 0.0))).unwrap();
        assert_eq!((r.phase, r.visibility), (Some(PI), 1.0));
        let r = extract_phase(&psi, &psi).unwrap();
        assert_eq!((r.phase, r.visibility), (Some(0.0), 1.0));
        let r = extract_phase(&psi, &ket(&l, "0101")).unwrap();
        assert_eq!((r.phase, r.visibility), (None, 0.0));
    }

    #[test]
    fn negative_zero_imaginary_part_reads_as_pi() {
        assert_eq!(phase_of(Complex64::new(-1.0, -0.0)), PI);
        assert_eq!(phase_of(Complex64::new(-1.0, -1e-18)), PI);
        assert_eq!(phase_of(Complex64::new(1.0, -0.0)).to_bits(), 0.0f64.to_bits());
    }

    #[test]
    fn wrap_phase_range() {
        assert_eq!(wrap_phase(PI), PI);
        assert_eq!(wrap_phase(-PI), PI);
        assert!((wrap_phase(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap_phase(0.0), 0.0);
    }

    #[test]
    fn controlled_basics() {
        let l = fermions(4);
        let start: FockBasisState = "1010".parse().unwrap();
        let id = ControlledExperiment::new(
            "id",
            l.clone(),
            start,
            BranchProgram::identity("a"),
            BranchProgram::identity("b"),
            EvaluationMode::Sequential,
        );
        let r = run_controlled(&id).unwrap();
        assert_eq!((r.phase, r.visibility), (Some(0.0), 1.0));
        assert_eq!(r.x_plus_probability(), 1.0);

        let split = ControlledExperiment::new(
            "split",
            l.clone(),
            start,
            BranchProgram::identity("a"),
            BranchProgram::hops("b", hop_list(&[(1, 2)])),
            EvaluationMode::Sequential,
        );
        let r = run_controlled(&split).unwrap();
        assert_eq!((r.phase, r.visibility), (None, 0.0));
        assert_eq!(r.x_plus_probability(), 0.5);

        let printed = ControlledExperiment::new(
            "printed",
            l.clone(),
            start,
            BranchProgram::string("ccw", counterclockwise_string()),
            BranchProgram::string("cw", clockwise_string()),
            EvaluationMode::Literal,
        );
        let r = run_controlled(&printed).unwrap();
        assert_eq!((r.phase, r.visibility), (Some(PI), 1.0));
    }

    #[test]
    fn annihilated_branch_is_flagged() {
        let l = fermions(4);
        let e = ControlledExperiment::new(
            "blocked",
            l,
            "1010".parse().unwrap(),
            BranchProgram::identity("a"),
            BranchProgram::hops("b", hop_list(&[(1, 3)])),
            EvaluationMode::Sequential,
        );
        let r = run_controlled(&e).unwrap();
        assert!(!r.valid);
        assert_eq!(r.phase, None);
        assert!(matches!(ancilla_measure(&r, MeasurementBasis::X, None, None), Err(Error::InvalidExperiment(_))));
    }

    #[test]
    fn full_swap_statistics() {
        let r = experiment_full_controlled_swap(fermions(4), EvaluationMode::Sequential).unwrap();
        assert_eq!((r.phase, r.visibility), (Some(PI), 1.0));
        let r = experiment_full_controlled_swap(bosons(4), EvaluationMode::Sequential).unwrap();
        assert_eq!((r.phase, r.visibility), (Some(0.0), 1.0));
        let mixed = Arc::new(RegisterLayout::blocks(4, StatisticsMatrix::all_anticommuting(2)).unwrap());
        let r = experiment_full_controlled_swap(mixed, EvaluationMode::Sequential).unwrap();
        assert_eq!(r.phase, Some(PI));
        assert!(experiment_full_controlled_swap(fermions(6), EvaluationMode::Sequential).is_err());
    }

    #[test]
    fn literal_full_swap_follows_the_printed_strings() {
        let r = experiment_full_controlled_swap(fermions(4), EvaluationMode::Literal).unwrap();
        assert_eq!((r.phase, r.visibility), (Some(0.0), 1.0));
    }

    #[test]
    fn half_swap_ledger_attribution() {
        let r = experiment_half_swap_interference(fermions(4), EvaluationMode::Sequential).unwrap();
        assert_eq!((r.phase, r.visibility), (Some(PI), 1.0));
        let minus: Vec<_> = r.ledgers[1].minus_entries().collect();
        assert_eq!(minus.len(), 1);
        assert_eq!(minus[0].op.to_string(), "hop 1->4");
        assert_eq!(minus[0].interval_parity, 1);
        assert!(r.ledgers[0].entries().iter().all(|e| e.interval_parity == 0));
        assert_eq!(r.ledger_relative_sign(), Sign::Minus);

        let b = experiment_half_swap_interference(bosons(4), EvaluationMode::Sequential).unwrap();
        assert_eq!(b.phase, Some(0.0));
    }

    #[test]
    fn ring_small_cases() {
        let expected = |n: usize| if n.is_multiple_of(2) { PI } else { 0.0 };
        for n in 1..=4 {
            let r = experiment_ring_rotation(&RingConfig::fermions(n).unwrap(), EvaluationMode::Sequential).unwrap();
            assert_eq!(r.phase, Some(expected(n)), "n = {n}");
            assert_eq!(r.visibility, 1.0);
            let evens: Vec<u32> = (1..=n as u32).map(|i| 2 * i).collect();
            let target = FockBasisState::from_occupied(2 * n, &evens).unwrap();
            for psi in &r.branch_states {
                assert_eq!(psi.dominant_configuration(), Some(target));
            }
        }
        let r = experiment_ring_rotation(&RingConfig::fermions(3).unwrap(), EvaluationMode::Sequential).unwrap();
        let wrap: Vec<_> = r.ledgers[1].entries().iter().filter(|e| e.wrap).collect();
        assert_eq!(wrap.len(), 1);
        assert_eq!(wrap[0].interval_parity, 2);
        assert!(RingConfig::fermions(0).is_err());
    }

    #[test]
    fn ring_revolution_returns_every_particle_home() {
        for n in 1..=4 {
            let layout = fermions(2 * n);
            let cfg = RingConfig::new(n, RingTurn::Revolution, layout).unwrap();
            let r = experiment_ring_rotation(&cfg, EvaluationMode::Sequential).unwrap();
            assert_eq!(r.phase, Some(0.0), "n = {n}");
            for psi in &r.branch_states {
                assert_eq!(psi.dominant_configuration(), Some(cfg.initial()));
            }
        }
    }

    #[test]
    fn ring_literal_agrees_with_sequential() {
        for n in 1..=4 {
            let cfg = RingConfig::fermions(n).unwrap();
            let a = experiment_ring_rotation(&cfg, EvaluationMode::Sequential).unwrap();
            let b = experiment_ring_rotation(&cfg, EvaluationMode::Literal).unwrap();
            assert_eq!(a.phase, b.phase);
        }
    }

    #[test]
    fn measurement() {
        let r = experiment_half_swap_interference(fermions(4), EvaluationMode::Sequential).unwrap();
        assert_eq!(
            ancilla_measure(&r, MeasurementBasis::X, None, None).unwrap(),
            Measurement::Probabilities { plus: 0.0, minus: 1.0 }
        );
        assert_eq!(
            ancilla_measure(&r, MeasurementBasis::X, Some(1000), Some(42)).unwrap(),
            Measurement::Counts { plus: 0, minus: 1000 }
        );
        assert_eq!(ancilla_measure(&r, MeasurementBasis::X, Some(10), None), Err(Error::ShotsWithoutSeed));
        let b = experiment_half_swap_interference(bosons(4), EvaluationMode::Sequential).unwrap();
        assert_eq!(
            ancilla_measure(&b, MeasurementBasis::X, None, None).unwrap(),
            Measurement::Probabilities { plus: 1.0, minus: 0.0 }
        );
        let Measurement::Probabilities { plus, .. } = ancilla_measure(&b, MeasurementBasis::Y, None, None).unwrap() else {
            unreachable!()
        };
        assert_eq!(plus, 0.5);
    }

    #[test]
    fn shot_counts_are_seeded() {
        let l = fermions(4);
        let e = ControlledExperiment::new(
            "split",
            l,
            "1010".parse().unwrap(),
            BranchProgram::identity("a"),
            BranchProgram::hops("b", hop_list(&[(1, 2)])),
            EvaluationMode::Sequential,
        );
        let r = run_controlled(&e).unwrap();
        let a = ancilla_measure(&r, MeasurementBasis::X, Some(500), Some(9)).unwrap();
        let b = ancilla_measure(&r, MeasurementBasis::X, Some(500), Some(9)).unwrap();
        assert_eq!(a, b);
        let Measurement::Counts { plus, minus } = a else { unreachable!() };
        assert_eq!(plus + minus, 500);
    }

    #[test]
    fn json_schema_fields() {
        let r = experiment_half_swap_interference(fermions(4), EvaluationMode::Sequential)
            .unwrap()
            .with_shots(100, 5)
            .unwrap();
        let v = r.to_json();
        for key in ["experiment", "params", "phase_rad", "visibility", "branch_final", "ledgers", "probabilities", "seed", "version"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["branch_final"], json!(["|0101⟩", "|0101⟩"]));
        assert_eq!(v["ledgers"][1][0], json!({"step": 1, "op": "hop 1->4", "sign": -1, "interval_parity": 1, "wrap": false}));
        assert_eq!(v["probabilities"]["counts"]["x_plus"], json!(0));
        assert_eq!(v["seed"], json!(5));
        let text = r.to_json_string();
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back, v);
        let split = ControlledExperiment::new(
            "split",
            fermions(4),
            "1010".parse().unwrap(),
            BranchProgram::identity("a"),
            BranchProgram::hops("b", hop_list(&[(1, 2)])),
            EvaluationMode::Sequential,
        );
        assert_eq!(run_controlled(&split).unwrap().to_json()["phase_rad"], Value::Null);
    }
}
