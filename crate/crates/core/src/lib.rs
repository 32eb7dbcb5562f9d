//! Pseudospectral simulator and Monte-Carlo verification harness for the
//! frequency-truncated quartic gKdV flow on the torus, together with the
//! spectral bookkeeping (X^{s,b}-type norms, resonance combinatorics) used
//! to check the analytical estimates behind it.

pub mod error;
pub mod flow;
pub mod gauge;
pub mod invariance;
pub mod io;
pub mod observable;
pub mod resonance;
pub mod sampler;
pub mod spectral;
pub mod xsb;

pub use error::{Error, Result};
pub use flow::{FlowConfig, Trajectory, Variant};
pub use observable::Observable;
pub use resonance::{CountingLemma, FrequencyTuple, RegionLabel, ZetaClass};
pub use sampler::{GibbsEnsemble, WienerSpec};
pub use spectral::{GridField, NormSpec, SpectralField};
pub use xsb::{NormKind, SpaceTimeSpectrum, Window, XsbSpec};
