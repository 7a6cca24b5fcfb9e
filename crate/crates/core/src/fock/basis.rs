use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::layout::{ModeIndex, BITMASK_MODES};

/// An occupation-number basis state `|n1 n2 ... nM⟩`.
///
/// The basis index is `Σ n_k 2^(k-1)`, so mode 1 is the least significant bit
/// while the printed ket shows mode 1 leftmost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockBasisState {
    bits: u64,
    modes: usize,
}

impl FockBasisState {
    pub fn new(bits: u64, modes: usize) -> Result<Self> {
        if modes == 0 || modes > BITMASK_MODES {
            return Err(Error::TooManyModes { modes, cap: BITMASK_MODES });
        }
        if modes < 64 && bits >> modes != 0 {
            return Err(Error::InvalidKet(format!("index {bits} does not fit in {modes} modes")));
        }
        Ok(FockBasisState { bits, modes })
    }

    /// Builds a state from the list of occupied modes.
    pub fn from_occupied(modes: usize, occupied: &[u32]) -> Result<Self> {
        let mut bits = 0u64;
        for &m in occupied {
            let m = ModeIndex::new(m)?;
            if m.value() as usize > modes {
                return Err(Error::ModeOutOfRange { mode: m.value(), modes });
            }
            bits |= m.mask();
        }
        Self::new(bits, modes)
    }

    pub fn vacuum(modes: usize) -> Result<Self> {
        Self::new(0, modes)
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn modes(self) -> usize {
        self.modes
    }

    pub fn is_occupied(self, m: ModeIndex) -> bool {
        self.bits & m.mask() != 0
    }

    pub fn particle_count(self) -> u32 {
        self.bits.count_ones()
    }

    pub fn occupied_modes(self) -> impl Iterator<Item = ModeIndex> {
        let mut rest = self.bits;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let b = rest.trailing_zeros();
            rest &= rest - 1;
            Some(ModeIndex::new(b + 1).unwrap())
        })
    }

    /// The occupation string with mode 1 leftmost, without brackets.
    pub fn occupation_string(self) -> String {
        (0..self.modes).map(|k| if self.bits >> k & 1 == 1 { '1' } else { '0' }).collect()
    }
}

impl fmt::Display for FockBasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}⟩", self.occupation_string())
    }
}

impl FromStr for FockBasisState {
    type Err = Error;

    /// Accepts `|1010⟩`, `|1010>` or a bare `1010`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let t = t.strip_prefix('|').unwrap_or(t);
        let t = t.strip_suffix('⟩').or_else(|| t.strip_suffix('>')).unwrap_or(t);
        if t.is_empty() || t.chars().count() > BITMASK_MODES {
            return Err(Error::InvalidKet(s.to_string()));
        }
        let mut bits = 0u64;
        for (k, c) in t.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1u64 << k,
                _ => return Err(Error::InvalidKet(s.to_string())),
            }
        }
        FockBasisState::new(bits, t.len())
    }
}

/// All basis states of `modes` modes holding exactly `k` particles, in ascending
/// basis-index order.
pub fn enumerate_sector(modes: usize, k: usize) -> Result<Vec<FockBasisState>> {
    if k > modes || modes == 0 || modes > BITMASK_MODES {
        return Err(Error::InvalidSector { modes, k });
    }
    let mut out = Vec::new();
    if k == 0 {
        out.push(FockBasisState { bits: 0, modes });
        return Ok(out);
    }
    // Gosper's hack walks same-popcount integers in increasing order
    let mut v: u64 = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
    loop {
        out.push(FockBasisState { bits: v, modes });
        let c = v & v.wrapping_neg();
        let (r, overflow) = v.overflowing_add(c);
        if overflow || c == 0 {
            break;
        }
        v = (((r ^ v) >> 2) / c) | r;
        if modes < 64 && v >> modes != 0 {
            break;
        }
    }
    Ok(out)
}
