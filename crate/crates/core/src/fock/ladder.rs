use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::basis::FockBasisState;
use super::layout::{ModeIndex, RegisterLayout, Sign};
use super::ledger::{LedgerOp, SignLedger};
use super::state::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LadderKind {
    Create,
    Annihilate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LadderOp {
    pub kind: LadderKind,
    pub mode: ModeIndex,
}

impl LadderOp {
    pub fn create(mode: ModeIndex) -> Self {
        LadderOp { kind: LadderKind::Create, mode }
    }

    pub fn annihilate(mode: ModeIndex) -> Self {
        LadderOp { kind: LadderKind::Annihilate, mode }
    }

    pub fn adjoint(self) -> Self {
        let kind = match self.kind {
            LadderKind::Create => LadderKind::Annihilate,
            LadderKind::Annihilate => LadderKind::Create,
        };
        LadderOp { kind, mode: self.mode }
    }
}

impl fmt::Display for LadderOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            LadderKind::Create => write!(f, "f†_{}", self.mode),
            LadderKind::Annihilate => write!(f, "f_{}", self.mode),
        }
    }
}

impl FromStr for LadderOp {
    type Err = Error;

    /// Parses `f_3`, `f†_3`, or the ASCII spelling `fd_3`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidOperatorString(s.to_string());
        let (kind, rest) = if let Some(r) = s.strip_prefix("f†_").or_else(|| s.strip_prefix("fd_")) {
            (LadderKind::Create, r)
        } else if let Some(r) = s.strip_prefix("f_") {
            (LadderKind::Annihilate, r)
        } else {
            return Err(bad());
        };
        let m: u32 = rest.parse().map_err(|_| bad())?;
        Ok(LadderOp { kind, mode: ModeIndex::new(m).map_err(|_| bad())? })
    }
}

/// A product of ladder operators written left to right and applied right to left.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OperatorString {
    pub ops: Vec<LadderOp>,
}

impl OperatorString {
    pub fn new(ops: Vec<LadderOp>) -> Self {
        OperatorString { ops }
    }

    pub fn identity() -> Self {
        OperatorString::default()
    }

    pub fn is_identity(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// The product `self · first`, i.e. `first` acts before `self`.
    pub fn after(&self, first: &OperatorString) -> OperatorString {
        OperatorString { ops: self.ops.iter().chain(&first.ops).copied().collect() }
    }

    /// Operators in the order they act on a ket.
    pub fn application_order(&self) -> impl Iterator<Item = LadderOp> + '_ {
        self.ops.iter().rev().copied()
    }
}

impl fmt::Display for OperatorString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ops.is_empty() {
            return f.write_str("1");
        }
        for (n, op) in self.ops.iter().enumerate() {
            if n > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{op}")?;
        }
        Ok(())
    }
}

impl FromStr for OperatorString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.is_empty() || t == "1" {
            return Ok(OperatorString::identity());
        }
        t.split_whitespace().map(str::parse).collect::<Result<Vec<_>>>().map(OperatorString::new)
    }
}

/// Product of exchange signs over occupied modes ordered before `mode`.
///
/// For a single fermionic species this is `(-1)^(number of occupied modes 1..mode-1)`.
pub fn jw_sign(state: FockBasisState, mode: ModeIndex, layout: &RegisterLayout) -> Result<Sign> {
    layout.check_mode(mode)?;
    Ok(Sign::from_parity((state.bits() & layout.string_mask(mode)).count_ones()))
}

/// Action of one ladder operator on one basis index: the new index, the string
/// sign and the number of string modes that contributed a `-1`.
#[inline]
pub(crate) fn ladder_on_index(
    layout: &RegisterLayout,
    op: LadderOp,
    index: u64,
) -> Option<(u64, Sign, u32)> {
    let bit = op.mode.mask();
    let occupied = index & bit != 0;
    let legal = match op.kind {
        LadderKind::Create => !occupied,
        LadderKind::Annihilate => occupied,
    };
    if !legal {
        return None;
    }
    let count = (index & layout.string_mask(op.mode)).count_ones();
    Some((index ^ bit, Sign::from_parity(count), count))
}

fn apply_ladder_inner(
    op: LadderOp,
    psi: &StateVector,
    ledger: Option<&mut SignLedger>,
) -> Result<StateVector> {
    let layout = psi.layout();
    layout.check_mode(op.mode)?;
    let mut out = BTreeMap::new();
    let mut classes = BTreeMap::new();
    for (idx, amp) in psi.iter() {
        if let Some((next, sign, count)) = ladder_on_index(layout, op, idx) {
            out.insert(next, if sign.is_minus() { -amp } else { amp });
            classes.entry(count).or_insert(sign);
        }
    }
    if let Some(ledger) = ledger {
        let step = ledger.next_step();
        for (count, sign) in classes {
            ledger.record(step, LedgerOp::Ladder(op), sign, count, false);
        }
    }
    Ok(StateVector::from_map(layout.clone(), out))
}

/// Applies a single creation or annihilation operator. Terms where the
/// operator is illegal vanish; the result may be the zero vector.
pub fn apply_ladder(op: LadderOp, psi: &StateVector) -> Result<StateVector> {
    apply_ladder_inner(op, psi, None)
}

/// Literal evaluation of an operator string: the rightmost operator acts first.
pub fn apply_operator_string(s: &OperatorString, psi: &StateVector) -> Result<StateVector> {
    s.application_order().try_fold(psi.clone(), |acc, op| apply_ladder(op, &acc))
}

/// Literal evaluation that also records the string sign of every ladder operator.
pub fn apply_operator_string_with_ledger(
    s: &OperatorString,
    psi: &StateVector,
    ledger: &mut SignLedger,
) -> Result<StateVector> {
    s.application_order().try_fold(psi.clone(), |acc, op| apply_ladder_inner(op, &acc, Some(ledger)))
}
