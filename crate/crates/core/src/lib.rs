//! Exact simulation of linear-optics circuits acting on finite superpositions
//! of multimode coherent states.
//!
//! States are kept as lists of product coherent terms (`CsState`). Every
//! norm, inner product and probability is evaluated through the exact
//! pairwise overlap sum, so results carry no truncation error no matter how
//! large the coherent amplitudes become. A truncated number-basis simulator
//! ([`fock`]) is provided as an independent cross-check for small circuits.
//!
//! The crate also builds the circuits that prepare concatenated GHZ-type
//! entangled coherent states for arbitrary logical width `N` and encoding
//! depth `m` ([`protocol`]), runs parameter sweeps over them ([`analysis`]),
//! and reads/writes a small line-oriented circuit language ([`dsl`]).

pub mod analysis;
pub mod coherent;
pub mod dsl;
pub mod engine;
pub mod error;
pub mod fock;
pub mod optics;
pub mod protocol;
pub mod report;

pub use coherent::{CoherentTerm, ComplexNum, CsState, NormKind};
pub use engine::{Circuit, Instruction, RunResult};
pub use error::{Error, Result};
pub use optics::{SelectionMode, SelectionRecord};
pub use protocol::ProtocolParams;
