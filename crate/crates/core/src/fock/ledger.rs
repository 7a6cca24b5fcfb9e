use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::hop::Hop;
use super::ladder::LadderOp;
use super::layout::{ModeIndex, Sign};

/// The elementary operation a ledger entry is attributed to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LedgerOp {
    Ladder(LadderOp),
    Hop(Hop),
    /// A hopping rotation between two modes; the recorded sign belongs to the
    /// transferred component.
    Pulse { a: ModeIndex, b: ModeIndex, theta: f64 },
}

impl LedgerOp {
    /// Endpoints of hop-like operations, in transfer direction.
    pub fn endpoints(&self) -> Option<(ModeIndex, ModeIndex)> {
        match *self {
            LedgerOp::Hop(h) => Some((h.from, h.to)),
            LedgerOp::Pulse { a, b, .. } => Some((a, b)),
            LedgerOp::Ladder(_) => None,
        }
    }
}

impl fmt::Display for LedgerOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LedgerOp::Ladder(op) => write!(f, "{op}"),
            LedgerOp::Hop(h) => write!(f, "{h}"),
            LedgerOp::Pulse { a, b, theta } => write!(f, "pulse {a}<->{b} theta={theta}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignLedgerEntry {
    /// 1-based position of the operation within its branch.
    pub step: usize,
    pub op: LedgerOp,
    pub sign: Sign,
    /// Occupied modes whose exchange factor contributed a `-1`. For a hop within
    /// one species these are exactly the anticommuting modes strictly between
    /// the endpoints; for a ladder operator it is the string length.
    pub interval_parity: u32,
    /// Set when the hop closes a ring across the global-ordering boundary.
    pub wrap: bool,
}

impl Serialize for SignLedgerEntry {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("SignLedgerEntry", 5)?;
        s.serialize_field("interval_parity", &self.interval_parity)?;
        s.serialize_field("op", &self.op.to_string())?;
        s.serialize_field("sign", &self.sign.to_i8())?;
        s.serialize_field("step", &self.step)?;
        s.serialize_field("wrap", &self.wrap)?;
        s.end()
    }
}

/// Per-operation record of every sign acquired along a branch.
///
/// When an operation acts on a superposition, one entry is written per
/// distinct interval-parity class among the surviving terms, all sharing the
/// same step number.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SignLedger {
    entries: Vec<SignLedgerEntry>,
    #[serde(skip)]
    steps: usize,
}

impl SignLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn next_step(&mut self) -> usize {
        self.steps += 1;
        self.steps
    }

    pub(crate) fn record(&mut self, step: usize, op: LedgerOp, sign: Sign, interval_parity: u32, wrap: bool) {
        self.entries.push(SignLedgerEntry { step, op, sign, interval_parity, wrap });
    }

    pub fn entries(&self) -> &[SignLedgerEntry] {
        &self.entries
    }

    /// Number of operations applied, including ones that recorded no entry.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Product of all recorded signs. For definite-occupation branches this is
    /// the total sign accumulated by the branch.
    pub fn product(&self) -> Sign {
        self.entries.iter().map(|e| e.sign).product()
    }

    pub fn minus_entries(&self) -> impl Iterator<Item = &SignLedgerEntry> {
        self.entries.iter().filter(|e| e.sign.is_minus())
    }
}
