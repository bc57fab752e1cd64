//! Communication-protocol simulations: the Reed-Solomon MA protocol for
//! inner products, its multi-prime wrapper for disjointness, the
//! advice-enumeration reduction to gap Max-IP and the NP·UPP sign families.

pub mod field;
pub mod gap;
pub mod ma;
pub mod rs;
pub mod upp;

/// Bit counts measured from the encodings a run actually uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CostReport {
    pub advice_bits: u64,
    pub coin_bits: u64,
    pub message_bits: u64,
    pub rounds: u64,
}
