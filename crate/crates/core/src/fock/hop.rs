use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

use super::ladder::{LadderOp, OperatorString};
use super::layout::{ModeIndex, RegisterLayout, Sign};
use super::ledger::{LedgerOp, SignLedger};
use super::state::StateVector;

/// Transfer of one particle: `f†_to f_from`, annihilation first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Hop {
    pub from: ModeIndex,
    pub to: ModeIndex,
    /// Marks the hop that closes a ring across the mode-ordering boundary.
    pub wrap: bool,
}

impl Hop {
    pub fn new(from: ModeIndex, to: ModeIndex) -> Result<Self> {
        if from == to {
            return Err(Error::DegenerateHop(from.value()));
        }
        Ok(Hop { from, to, wrap: false })
    }

    /// Convenience constructor from raw 1-based mode numbers.
    pub fn between(from: u32, to: u32) -> Result<Self> {
        Hop::new(ModeIndex::new(from)?, ModeIndex::new(to)?)
    }

    pub fn wrapping(mut self) -> Self {
        self.wrap = true;
        self
    }

    pub fn reversed(self) -> Self {
        Hop { from: self.to, to: self.from, wrap: self.wrap }
    }

    /// The hop as a literal operator string `f†_to f_from`.
    pub fn as_operator_string(self) -> OperatorString {
        OperatorString::new(vec![LadderOp::create(self.to), LadderOp::annihilate(self.from)])
    }
}

impl fmt::Display for Hop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "hop {}->{}", self.from, self.to)
    }
}

/// Operator string equivalent of a hop sequence: later hops stand further left.
pub fn hops_as_operator_string(hops: &[Hop]) -> OperatorString {
    hops.iter().fold(OperatorString::identity(), |acc, h| h.as_operator_string().after(&acc))
}

/// Sign and interval-parity count of `hop` acting on `index`, or `None` when the
/// source is empty or the target is occupied.
///
/// The count is taken over the state after the annihilation: modes whose
/// factors from the two strings differ, i.e. `mask(from) ^ mask(to)`.
#[inline]
pub(crate) fn hop_on_index(layout: &RegisterLayout, hop: Hop, index: u64) -> Option<(u64, Sign, u32)> {
    let from = hop.from.mask();
    let to = hop.to.mask();
    if index & from == 0 || index & to != 0 {
        return None;
    }
    let emptied = index ^ from;
    let count = (emptied & (layout.string_mask(hop.from) ^ layout.string_mask(hop.to))).count_ones();
    Some((emptied | to, Sign::from_parity(count), count))
}

/// Applies a single hop and records its sign in `ledger`.
pub fn apply_hop(hop: Hop, psi: &StateVector, ledger: &mut SignLedger) -> Result<StateVector> {
    let layout = psi.layout();
    layout.check_mode(hop.from)?;
    layout.check_mode(hop.to)?;
    if hop.from == hop.to {
        return Err(Error::DegenerateHop(hop.from.value()));
    }
    let mut out = BTreeMap::new();
    let mut classes = BTreeMap::new();
    for (idx, amp) in psi.iter() {
        if let Some((next, sign, count)) = hop_on_index(layout, hop, idx) {
            out.insert(next, if sign.is_minus() { -amp } else { amp });
            classes.entry(count).or_insert(sign);
        }
    }
    let step = ledger.next_step();
    for (count, sign) in classes {
        ledger.record(step, LedgerOp::Hop(hop), sign, count, hop.wrap);
    }
    Ok(StateVector::from_map(layout.clone(), out))
}

/// Applies hops strictly in list order.
pub fn apply_hop_sequence(hops: &[Hop], psi: &StateVector) -> Result<(StateVector, SignLedger)> {
    let mut ledger = SignLedger::new();
    let mut state = psi.clone();
    for &h in hops {
        state = apply_hop(h, &state, &mut ledger)?;
    }
    Ok((state, ledger))
}
