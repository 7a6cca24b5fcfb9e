use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

use super::basis::FockBasisState;
use super::layout::RegisterLayout;

/// Amplitudes with magnitude below this are dropped after every operation.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

/// Sparse Fock-space statevector keyed by basis index.
///
/// Entries are kept in ascending basis-index order, so every kernel visits
/// terms in the same deterministic order.
#[derive(Debug, Clone)]
pub struct StateVector {
    layout: Arc<RegisterLayout>,
    entries: BTreeMap<u64, Complex64>,
    norm: f64,
}

impl StateVector {
    pub fn basis(layout: Arc<RegisterLayout>, state: FockBasisState) -> Result<Self> {
        if state.modes() != layout.modes() {
            return Err(Error::InvalidKet(format!(
                "{state} has {} modes, register has {}",
                state.modes(),
                layout.modes()
            )));
        }
        Ok(Self::from_map(layout, BTreeMap::from([(state.bits(), Complex64::new(1.0, 0.0))])))
    }

    pub fn zero(layout: Arc<RegisterLayout>) -> Self {
        Self::from_map(layout, BTreeMap::new())
    }

    /// Builds a state from `(basis index, amplitude)` pairs, summing repeats.
    /// The result is not normalized; see [`StateVector::normalized`].
    pub fn from_amplitudes(
        layout: Arc<RegisterLayout>,
        terms: impl IntoIterator<Item = (u64, Complex64)>,
    ) -> Result<Self> {
        let full = layout.full_mask();
        let mut map = BTreeMap::new();
        for (idx, amp) in terms {
            if idx & !full != 0 {
                return Err(Error::InvalidKet(format!(
                    "basis index {idx} does not fit in {} modes",
                    layout.modes()
                )));
            }
            if !(amp.re.is_finite() && amp.im.is_finite()) {
                return Err(Error::InvalidParameter(format!("non-finite amplitude {amp}")));
            }
            *map.entry(idx).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        Ok(Self::from_map(layout, map))
    }

    pub(crate) fn from_map(layout: Arc<RegisterLayout>, mut entries: BTreeMap<u64, Complex64>) -> Self {
        entries.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
        let norm = entries.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        StateVector { layout, entries, norm }
    }

    pub fn layout(&self) -> &Arc<RegisterLayout> {
        &self.layout
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// True for the annihilated vector, which is a legitimate outcome of ladder
    /// operations rather than an error.
    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn amplitude(&self, state: FockBasisState) -> Complex64 {
        self.entries.get(&state.bits()).copied().unwrap_or_default()
    }

    pub fn amplitude_at(&self, index: u64) -> Complex64 {
        self.entries.get(&index).copied().unwrap_or_default()
    }

    /// Stored terms in ascending basis-index order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, Complex64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn basis_state(&self, index: u64) -> FockBasisState {
        FockBasisState::new(index, self.layout.modes()).expect("stored indices fit the layout")
    }

    /// The basis state with the largest amplitude magnitude (lowest index on ties).
    pub fn dominant_configuration(&self) -> Option<FockBasisState> {
        let mut best: Option<(u64, f64)> = None;
        for (idx, a) in self.iter() {
            let n = a.norm();
            if best.is_none_or(|(_, b)| n > b + 1e-12) {
                best = Some((idx, n));
            }
        }
        best.map(|(idx, _)| self.basis_state(idx))
    }

    pub fn normalized(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let inv = 1.0 / self.norm;
        Some(Self::from_map(
            self.layout.clone(),
            self.entries.iter().map(|(&k, &v)| (k, v * inv)).collect(),
        ))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self::from_map(
            self.layout.clone(),
            self.entries.iter().map(|(&k, &v)| (k, v * factor)).collect(),
        )
    }

    pub fn add(&self, other: &StateVector) -> Result<Self> {
        self.check_layout(other)?;
        let mut map = self.entries.clone();
        for (&k, &v) in &other.entries {
            *map.entry(k).or_insert(Complex64::new(0.0, 0.0)) += v;
        }
        Ok(Self::from_map(self.layout.clone(), map))
    }

    /// Largest absolute amplitude difference over the union of supports.
    pub fn max_deviation(&self, other: &StateVector) -> Result<f64> {
        self.check_layout(other)?;
        let mut worst = 0.0f64;
        for (&k, &v) in &self.entries {
            worst = worst.max((v - other.amplitude_at(k)).norm());
        }
        for (&k, &v) in &other.entries {
            if !self.entries.contains_key(&k) {
                worst = worst.max(v.norm());
            }
        }
        Ok(worst)
    }

    /// Particle number when every term agrees on it.
    pub fn particle_number(&self) -> Option<u32> {
        let mut counts = self.entries.keys().map(|k| k.count_ones());
        let first = counts.next()?;
        counts.all(|c| c == first).then_some(first)
    }

    pub(crate) fn check_layout(&self, other: &StateVector) -> Result<()> {
        if Arc::ptr_eq(&self.layout, &other.layout) || *self.layout == *other.layout {
            Ok(())
        } else {
            Err(Error::LayoutMismatch)
        }
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (n, (idx, a)) in self.iter().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({:.6}{:+.6}i){}", a.re, a.im, self.basis_state(idx))?;
        }
        Ok(())
    }
}

/// `⟨ψ|φ⟩`, conjugating the left argument.
pub fn inner_product(psi: &StateVector, phi: &StateVector) -> Result<Complex64> {
    psi.check_layout(phi)?;
    let (small, large, conj_small) = if psi.len() <= phi.len() {
        (psi, phi, true)
    } else {
        (phi, psi, false)
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for (&k, &a) in &small.entries {
        if let Some(&b) = large.entries.get(&k) {
            acc += if conj_small { a.conj() * b } else { b.conj() * a };
        }
    }
    Ok(acc)
}
