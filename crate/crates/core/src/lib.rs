//! Private read-update-write (PRUW) for federated learning with top-r
//! sparsification over `N` simulated non-colluding databases.
//!
//! The model lives in `P` subpackets of `ell` parameters each, MDS coded
//! with added noise so that no single database learns anything about the
//! parameters. Users upload only their `P*r` most significant subpacket
//! updates and download the `P*r'` most commonly updated ones, addressing
//! both through secret permutations so the databases never see which real
//! positions move. Two schemes are supported: within-segment permutations
//! (`case1`) and within- plus inter-segment permutations (`case2`), trading
//! storage against index-information leakage.
//!
//! The crate provides the protocol primitives (fields, coded storage,
//! permutations and reversers, database/client logic), a deterministic
//! round simulator with a plaintext shadow oracle, exact leakage
//! computation with a brute-force cross-check, and exact cost accounting
//! against the closed-form expressions.

pub mod accounting;
pub mod client;
pub mod error;
pub mod field;
pub mod kat;
pub mod leakage;
pub mod node;
pub mod params;
pub mod perm;
pub mod sim;
pub mod storage;

pub use error::{Error, Result};
pub use field::{EvaluationPoints, Field, DEFAULT_MODULUS};
pub use params::{Scheme, SystemParams};
pub use perm::{PermutationSet, PermutedIndex, RealIndex, ReverserSet};
