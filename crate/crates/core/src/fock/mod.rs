//! Fock-space registers, ladder operators, hops and sign bookkeeping.

mod basis;
mod hop;
mod ladder;
mod layout;
mod ledger;
mod state;

pub use basis::{enumerate_sector, FockBasisState};
pub use hop::{apply_hop, apply_hop_sequence, hops_as_operator_string, Hop};
pub use ladder::{
    apply_ladder, apply_operator_string, apply_operator_string_with_ledger, jw_sign, LadderKind,
    LadderOp, OperatorString,
};
pub use layout::{
    mode, ModeIndex, RegisterLayout, Sign, SpeciesId, StatisticsMatrix, BITMASK_MODES,
    DEFAULT_MAX_MODES,
};
pub use ledger::{LedgerOp, SignLedger, SignLedgerEntry};
pub use state::{inner_product, StateVector, PRUNE_THRESHOLD};

pub(crate) use hop::hop_on_index;
