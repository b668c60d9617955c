//! One-coincidence frequency-hopping sequence sets with dispersed elements.
//!
//! The HMC set for an odd prime `p` is built from the prime sequences
//! `S_k = (j * k mod p)`: each element of `H_k` is the ordinary integer sum of
//! two neighbouring `S_k` elements. The result keeps the one-coincidence
//! property (any two sequences hit at most once per period, at any shift)
//! while spreading elements over `{1, ..., 2p-3}`.
//!
//! - [`modp`]: prime-field arithmetic and primality.
//! - [`sequences`]: `S_k`, `H_k` and whole sets.
//! - [`analysis`]: Hamming correlation and the property checks.
//! - [`designer`]: dropping sequences by adjacent distance or bad frequencies.
//! - [`sim`]: a slot-level collision simulator.
//! - [`document`]: CSV/JSON documents for every command's output.

pub mod analysis;
pub mod designer;
pub mod document;
mod error;
pub mod modp;
pub mod sequences;
pub mod sim;

pub use error::{Error, Result};
pub use modp::Prime;
