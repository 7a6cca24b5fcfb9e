use std::fmt;
use std::ops::{Mul, MulAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default upper bound on the number of modes in a register.
pub const DEFAULT_MAX_MODES: usize = 28;
/// Hard upper bound imposed by the `u64` occupation bitmask.
pub const BITMASK_MODES: usize = 64;

/// A 1-based mode label. Mode `k` is stored in bit `k - 1` of a basis index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct ModeIndex(u32);

impl ModeIndex {
    pub fn new(value: u32) -> Result<Self> {
        if value == 0 {
            return Err(Error::ZeroMode);
        }
        Ok(ModeIndex(value))
    }

    pub fn value(self) -> u32 {
        self.0
    }

    /// Bit position of this mode inside a basis index.
    #[inline]
    pub fn bit(self) -> u32 {
        self.0 - 1
    }

    #[inline]
    pub fn mask(self) -> u64 {
        1u64 << self.bit()
    }
}

impl TryFrom<u32> for ModeIndex {
    type Error = Error;

    fn try_from(value: u32) -> Result<Self> {
        ModeIndex::new(value)
    }
}

impl From<ModeIndex> for u32 {
    fn from(m: ModeIndex) -> u32 {
        m.0
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Shorthand for building a mode index from a literal; panics on zero.
pub fn mode(value: u32) -> ModeIndex {
    ModeIndex::new(value).expect("mode indices are 1-based")
}

/// A ±1 factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Sign {
    #[default]
    Plus,
    Minus,
}

impl Sign {
    #[inline]
    pub fn from_parity(count: u32) -> Self {
        if count & 1 == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn from_i8(v: i8) -> Option<Self> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }

    pub fn to_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn to_f64(self) -> f64 {
        f64::from(self.to_i8())
    }

    pub fn is_minus(self) -> bool {
        self == Sign::Minus
    }
}

impl Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl MulAssign for Sign {
    fn mul_assign(&mut self, rhs: Sign) {
        *self = *self * rhs;
    }
}

impl std::iter::Product for Sign {
    fn product<I: Iterator<Item = Sign>>(iter: I) -> Sign {
        iter.fold(Sign::Plus, Mul::mul)
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SpeciesId(pub u8);

/// Pairwise exchange signs between species: `+1` commute, `-1` anticommute.
///
/// A species with a `-1` diagonal entry is fermionic; `+1` on the diagonal is a
/// hardcore boson. Occupancy is capped at one particle per mode either way.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatisticsMatrix {
    size: usize,
    entries: Vec<Sign>,
}

impl StatisticsMatrix {
    pub fn new(rows: Vec<Vec<i8>>) -> Result<Self> {
        let size = rows.len();
        if size == 0 {
            return Err(Error::InvalidStatistics("matrix has no species".into()));
        }
        if size > usize::from(u8::MAX) {
            return Err(Error::InvalidStatistics(format!("{size} species is too many")));
        }
        let mut entries = Vec::with_capacity(size * size);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != size {
                return Err(Error::InvalidStatistics(format!(
                    "row {} has {} entries, expected {size}",
                    r + 1,
                    row.len()
                )));
            }
            for &v in row {
                let s = Sign::from_i8(v).ok_or_else(|| {
                    Error::InvalidStatistics(format!("entry {v} is not +1 or -1"))
                })?;
                entries.push(s);
            }
        }
        for a in 0..size {
            for b in 0..a {
                if entries[a * size + b] != entries[b * size + a] {
                    return Err(Error::InvalidStatistics(format!(
                        "matrix is not symmetric at ({}, {})",
                        a + 1,
                        b + 1
                    )));
                }
            }
        }
        Ok(StatisticsMatrix { size, entries })
    }

    /// Every pair of species anticommutes.
    pub fn all_anticommuting(size: usize) -> Self {
        StatisticsMatrix { size, entries: vec![Sign::Minus; size * size] }
    }

    /// Every pair of species commutes.
    pub fn all_commuting(size: usize) -> Self {
        StatisticsMatrix { size, entries: vec![Sign::Plus; size * size] }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, a: SpeciesId, b: SpeciesId) -> Sign {
        self.entries[usize::from(a.0) * self.size + usize::from(b.0)]
    }

    pub fn rows(&self) -> Vec<Vec<i8>> {
        self.entries.chunks(self.size).map(|r| r.iter().map(|s| s.to_i8()).collect()).collect()
    }
}

/// Global mode ordering, species assignment and exchange statistics of a register.
///
/// The ordering `1..=M` is the sign convention: the ladder operator on mode
/// `k` carries a string over the occupied modes `q < k` whose species
/// anticommutes with the species of `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterLayout {
    species_of: Vec<SpeciesId>,
    labels: Vec<String>,
    statistics: StatisticsMatrix,
    // string_masks[k] has bit q set iff q < k and σ(species(q), species(k)) = -1
    string_masks: Vec<u64>,
}

impl RegisterLayout {
    pub fn new(
        species_of: Vec<SpeciesId>,
        labels: Vec<String>,
        statistics: StatisticsMatrix,
    ) -> Result<Self> {
        Self::with_cap(species_of, labels, statistics, DEFAULT_MAX_MODES)
    }

    /// Like [`RegisterLayout::new`] with a custom mode cap (at most 64).
    pub fn with_cap(
        species_of: Vec<SpeciesId>,
        labels: Vec<String>,
        statistics: StatisticsMatrix,
        cap: usize,
    ) -> Result<Self> {
        let modes = species_of.len();
        let cap = cap.min(BITMASK_MODES);
        if modes == 0 {
            return Err(Error::InvalidParameter("register needs at least one mode".into()));
        }
        if modes > cap {
            return Err(Error::TooManyModes { modes, cap });
        }
        if labels.len() != statistics.size() {
            return Err(Error::InvalidStatistics(format!(
                "{} species labels for a {}x{} statistics matrix",
                labels.len(),
                statistics.size(),
                statistics.size()
            )));
        }
        if let Some(bad) = species_of.iter().find(|s| usize::from(s.0) >= statistics.size()) {
            return Err(Error::InvalidStatistics(format!("unknown species id {}", bad.0)));
        }
        let string_masks = (0..modes)
            .map(|k| {
                (0..k)
                    .filter(|&q| statistics.get(species_of[q], species_of[k]).is_minus())
                    .fold(0u64, |m, q| m | (1u64 << q))
            })
            .collect();
        Ok(RegisterLayout { species_of, labels, statistics, string_masks })
    }

    /// A single fermionic species on `modes` modes.
    pub fn fermions(modes: usize) -> Result<Self> {
        Self::new(
            vec![SpeciesId(0); modes],
            vec!["f".into()],
            StatisticsMatrix::all_anticommuting(1),
        )
    }

    /// A single hardcore-boson species on `modes` modes.
    pub fn hardcore_bosons(modes: usize) -> Result<Self> {
        Self::new(vec![SpeciesId(0); modes], vec!["b".into()], StatisticsMatrix::all_commuting(1))
    }

    /// Splits `modes` into contiguous equal blocks, one per species of `statistics`.
    /// Species are labelled `A`, `B`, ... in mode order.
    pub fn blocks(modes: usize, statistics: StatisticsMatrix) -> Result<Self> {
        let species = statistics.size();
        if !modes.is_multiple_of(species) {
            return Err(Error::InvalidStatistics(format!(
                "{modes} modes cannot be split evenly between {species} species"
            )));
        }
        if species > 26 {
            return Err(Error::InvalidStatistics("at most 26 block species".into()));
        }
        let per = modes / species;
        let species_of = (0..modes).map(|k| SpeciesId((k / per) as u8)).collect();
        let labels = (0..species).map(|s| char::from(b'A' + s as u8).to_string()).collect();
        Self::new(species_of, labels, statistics)
    }

    pub fn modes(&self) -> usize {
        self.species_of.len()
    }

    /// Bitmask with every mode of the register set.
    pub fn full_mask(&self) -> u64 {
        if self.modes() == 64 {
            u64::MAX
        } else {
            (1u64 << self.modes()) - 1
        }
    }

    pub fn species(&self, m: ModeIndex) -> SpeciesId {
        self.species_of[m.bit() as usize]
    }

    pub fn species_label(&self, s: SpeciesId) -> &str {
        &self.labels[usize::from(s.0)]
    }

    pub fn statistics(&self) -> &StatisticsMatrix {
        &self.statistics
    }

    /// Exchange sign between the species living on two modes.
    pub fn exchange_sign(&self, a: ModeIndex, b: ModeIndex) -> Sign {
        self.statistics.get(self.species(a), self.species(b))
    }

    pub fn is_all_commuting(&self) -> bool {
        self.string_masks.iter().all(|&m| m == 0)
    }

    pub fn check_mode(&self, m: ModeIndex) -> Result<()> {
        if m.value() as usize > self.modes() {
            Err(Error::ModeOutOfRange { mode: m.value(), modes: self.modes() })
        } else {
            Ok(())
        }
    }

    /// Lower-ordered modes that contribute to the string of ladder operators on `m`.
    #[inline]
    pub fn string_mask(&self, m: ModeIndex) -> u64 {
        self.string_masks[m.bit() as usize]
    }
}
