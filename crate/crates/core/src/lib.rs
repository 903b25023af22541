//! Load synthesis for single-RF load-modulated two-element arrays.
//!
//! A single feed drives two antenna elements through lossless reactive
//! two-port modulators. For every pair of spatially multiplexed symbols the
//! modulator loads are computed in closed form so the antenna port currents
//! radiate the intended beamspace symbols while the feed stays matched to
//! `Z0` at zero phase.
//!
//! - [`twoport`]: ABCD algebra of the T and Π modulators.
//! - [`antenna`]: coupled-array Z-matrix.
//! - [`beamspace`]: symbols to port currents, power normalization, feed voltage.
//! - [`synthesis`]: the closed-form load design.
//! - [`oracle`]: independent circuit solve used to verify designs.
//! - [`link`]: Monte Carlo BER against a conventional 2×2 MIMO transmitter.
//! - [`enumeration`], [`calibration`]: design-table ordering and fitting.

pub mod antenna;
pub mod beamspace;
pub mod calibration;
pub mod enumeration;
pub mod error;
pub mod link;
pub mod oracle;
pub mod synthesis;
pub mod twoport;

pub use antenna::AntennaZMatrix;
pub use beamspace::{BasisConfig, BeamspaceSymbolPair, Constellation};
pub use error::{Error, Result};
pub use synthesis::{synthesize, SynthesisResult};
pub use twoport::{NormalizedAbcd, ReactanceTuple, Topology};
