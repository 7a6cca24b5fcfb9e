//! Continuous transport by hopping pulses and hopping Hamiltonians.
//!
//! A pulse between modes `a` and `b` applies `exp(iθ (f†_b f_a + f†_a f_b))`.
//! On a pair of basis states with exactly one particle across `(a, b)` this is
//! the two-level rotation `cos θ·(same) + i s sin θ·(transferred)`, where `s` is
//! the hop sign; empty and doubly occupied pairs are fixed points.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    enumerate_sector, hop_on_index, FockBasisState, Hop, LedgerOp, ModeIndex, RegisterLayout,
    SignLedger, StateVector,
};
use crate::protocols::ExperimentResult;

/// Largest particle-number sector handled by [`exact_evolve`].
pub const MAX_SECTOR_DIM: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HopPulse {
    pub from: ModeIndex,
    pub to: ModeIndex,
    /// Rotation angle; `π/2` transfers the particle completely.
    pub theta: f64,
}

impl HopPulse {
    pub fn new(from: ModeIndex, to: ModeIndex, theta: f64) -> Result<Self> {
        if from == to {
            return Err(Error::DegenerateHop(from.value()));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidParameter(format!("pulse angle {theta} is not finite")));
        }
        Ok(HopPulse { from, to, theta })
    }

    pub fn between(from: u32, to: u32, theta: f64) -> Result<Self> {
        Self::new(ModeIndex::new(from)?, ModeIndex::new(to)?, theta)
    }

    fn validate(&self, layout: &RegisterLayout) -> Result<()> {
        layout.check_mode(self.from)?;
        layout.check_mode(self.to)?;
        if self.from == self.to {
            return Err(Error::DegenerateHop(self.from.value()));
        }
        if !self.theta.is_finite() {
            return Err(Error::InvalidParameter(format!("pulse angle {} is not finite", self.theta)));
        }
        Ok(())
    }
}

/// Pulses applied in order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Schedule {
    pub pulses: Vec<HopPulse>,
}

impl Schedule {
    pub fn new(pulses: Vec<HopPulse>) -> Self {
        Schedule { pulses }
    }

    /// Full transfers (`θ = π/2`) along the given hops.
    pub fn full_transfers(hops: &[(u32, u32)]) -> Result<Self> {
        hops.iter()
            .map(|&(a, b)| HopPulse::between(a, b, std::f64::consts::FRAC_PI_2))
            .collect::<Result<_>>()
            .map(Schedule::new)
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }
}

fn rotate(p: HopPulse, psi: &StateVector, ledger: Option<&mut SignLedger>) -> Result<StateVector> {
    let layout = psi.layout();
    p.validate(layout)?;
    let (c, s) = (p.theta.cos(), p.theta.sin());
    let forward = Hop { from: p.from, to: p.to, wrap: false };
    let backward = forward.reversed();
    let mut out: BTreeMap<u64, Complex64> = BTreeMap::new();
    let mut classes = BTreeMap::new();
    for (idx, amp) in psi.iter() {
        let moved = hop_on_index(layout, forward, idx).or_else(|| hop_on_index(layout, backward, idx));
        match moved {
            Some((next, sign, count)) => {
                *out.entry(idx).or_default() += amp * c;
                *out.entry(next).or_default() += amp * Complex64::new(0.0, sign.to_f64() * s);
                classes.entry(count).or_insert(sign);
            }
            None => *out.entry(idx).or_default() += amp,
        }
    }
    if let Some(ledger) = ledger {
        let step = ledger.next_step();
        for (count, sign) in classes {
            ledger.record(step, LedgerOp::Pulse { a: p.from, b: p.to, theta: p.theta }, sign, count, false);
        }
    }
    Ok(StateVector::from_map(layout.clone(), out))
}

/// Applies `exp(iθ (f†_to f_from + f†_from f_to))` exactly.
pub fn hop_rotation(p: HopPulse, psi: &StateVector) -> Result<StateVector> {
    rotate(p, psi, None)
}

/// Applies every pulse of a schedule, recording transfer signs.
pub fn apply_schedule(schedule: &Schedule, psi: &StateVector) -> Result<(StateVector, SignLedger)> {
    let mut ledger = SignLedger::new();
    let mut state = psi.clone();
    for &p in &schedule.pulses {
        state = rotate(p, &state, Some(&mut ledger))?;
    }
    Ok((state, ledger))
}

/// Interferes two pulse schedules started from the same basis state.
///
/// Each full transfer contributes a factor `i`; when both schedules contain
/// the same number of them, these dynamical factors cancel in the relative phase.
pub fn run_pulse_interference(
    layout: Arc<RegisterLayout>,
    schedule0: &Schedule,
    schedule1: &Schedule,
    initial: FockBasisState,
) -> Result<ExperimentResult> {
    let start = StateVector::basis(layout.clone(), initial)?;
    let (psi0, ledger0) = apply_schedule(schedule0, &start)?;
    let (psi1, ledger1) = apply_schedule(schedule1, &start)?;
    let mut params = BTreeMap::new();
    params.insert("initial".to_string(), serde_json::Value::String(initial.to_string()));
    params.insert("modes".to_string(), layout.modes().into());
    params.insert("schedule0".to_string(), serde_json::to_value(schedule0).expect("plain data"));
    params.insert("schedule1".to_string(), serde_json::to_value(schedule1).expect("plain data"));
    ExperimentResult::from_branches(
        "pulse",
        params,
        ["schedule0".into(), "schedule1".into()],
        [psi0, psi1],
        [ledger0, ledger1],
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: ModeIndex,
    pub b: ModeIndex,
    pub coupling: f64,
}

/// `H = -Σ J (f†_b f_a + f†_a f_b)` over the edges.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub edges: Vec<Edge>,
}

impl HamiltonianSpec {
    pub fn new(edges: &[(u32, u32, f64)]) -> Result<Self> {
        let edges = edges
            .iter()
            .map(|&(a, b, coupling)| {
                let (a, b) = (ModeIndex::new(a)?, ModeIndex::new(b)?);
                if a == b {
                    return Err(Error::DegenerateHop(a.value()));
                }
                if !coupling.is_finite() {
                    return Err(Error::InvalidParameter(format!("coupling {coupling} is not finite")));
                }
                Ok(Edge { a, b, coupling })
            })
            .collect::<Result<_>>()?;
        Ok(HamiltonianSpec { edges })
    }

    fn validate(&self, layout: &RegisterLayout) -> Result<()> {
        for e in &self.edges {
            layout.check_mode(e.a)?;
            layout.check_mode(e.b)?;
        }
        Ok(())
    }
}

/// `exp(-iHt) ψ` by eigendecomposition of `H` on each particle-number sector of `ψ`.
pub fn exact_evolve(h: &HamiltonianSpec, t: f64, psi: &StateVector) -> Result<StateVector> {
    let layout = psi.layout();
    h.validate(layout)?;
    if !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time {t} is not finite")));
    }
    let mut sectors: BTreeMap<u32, Vec<(u64, Complex64)>> = BTreeMap::new();
    for (idx, a) in psi.iter() {
        sectors.entry(idx.count_ones()).or_default().push((idx, a));
    }
    let mut out: BTreeMap<u64, Complex64> = BTreeMap::new();
    for (k, terms) in sectors {
        let basis: Vec<u64> =
            enumerate_sector(layout.modes(), k as usize)?.into_iter().map(|s| s.bits()).collect();
        let dim = basis.len();
        if dim > MAX_SECTOR_DIM {
            return Err(Error::SectorTooLarge { dim, cap: MAX_SECTOR_DIM });
        }
        let position = |idx: u64| basis.binary_search(&idx).expect("hops conserve particle number");
        let mut hm = DMatrix::<f64>::zeros(dim, dim);
        for (col, &idx) in basis.iter().enumerate() {
            for e in &h.edges {
                let fwd = Hop { from: e.a, to: e.b, wrap: false };
                for hop in [fwd, fwd.reversed()] {
                    if let Some((next, sign, _)) = hop_on_index(layout, hop, idx) {
                        hm[(position(next), col)] -= e.coupling * sign.to_f64();
                    }
                }
            }
        }
        let eig = SymmetricEigen::new(hm);
        let v = &eig.eigenvectors;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); dim];
        for (idx, a) in terms {
            coeffs[position(idx)] = a;
        }
        // project, apply phases, rotate back
        let projected: Vec<Complex64> = (0..dim)
            .map(|n| {
                let phase = Complex64::new(0.0, -eig.eigenvalues[n] * t).exp();
                phase * (0..dim).map(|r| coeffs[r] * v[(r, n)]).sum::<Complex64>()
            })
            .collect();
        for (r, &idx) in basis.iter().enumerate() {
            let amp: Complex64 = (0..dim).map(|n| projected[n] * v[(r, n)]).sum();
            out.insert(idx, amp);
        }
    }
    Ok(StateVector::from_map(layout.clone(), out))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrotterOrder {
    /// Lie splitting.
    First,
    /// Symmetric Strang splitting.
    Second,
}

impl TryFrom<u8> for TrotterOrder {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(TrotterOrder::First),
            2 => Ok(TrotterOrder::Second),
            _ => Err(Error::InvalidParameter(format!("Trotter order must be 1 or 2, got {v}"))),
        }
    }
}

/// Product-formula approximation of `exp(-iHt) ψ` from per-edge hop rotations.
pub fn trotter_evolve(
    h: &HamiltonianSpec,
    t: f64,
    steps: usize,
    order: TrotterOrder,
    psi: &StateVector,
) -> Result<StateVector> {
    if steps == 0 {
        return Err(Error::InvalidParameter("Trotter evolution needs at least one step".into()));
    }
    h.validate(psi.layout())?;
    let dt = t / steps as f64;
    // exp(-i(-J A) dt) = exp(i J dt A)
    let factors: Vec<HopPulse> = match order {
        TrotterOrder::First => {
            h.edges.iter().map(|e| HopPulse { from: e.a, to: e.b, theta: e.coupling * dt }).collect()
        }
        TrotterOrder::Second => {
            let n = h.edges.len();
            let half = |e: &Edge| HopPulse { from: e.a, to: e.b, theta: 0.5 * e.coupling * dt };
            let mut f: Vec<HopPulse> = h.edges.iter().take(n.saturating_sub(1)).map(half).collect();
            if let Some(last) = h.edges.last() {
                f.push(HopPulse { from: last.a, to: last.b, theta: last.coupling * dt });
            }
            f.extend(h.edges.iter().take(n.saturating_sub(1)).rev().map(half));
            f
        }
    };
    let mut state = psi.clone();
    for _ in 0..steps {
        for &p in &factors {
            state = hop_rotation(p, &state)?;
        }
    }
    Ok(state)
}
