//! Spike trains as quantized signals: leaky integrate-and-fire neurons, the norms under
//! which they are bounded quantizers, and a randomized harness that checks those bounds.
//!
//! ```
//! use spikenorm::{alexiewicz_norm, lif, Leak, LifConfig, SpikeTrain};
//!
//! let eta = SpikeTrain::new([(0.0, 0.6), (1.0, 0.7), (2.0, -2.5)]).unwrap();
//! let neuron = LifConfig::quantizer(1.0, Leak::ZERO).unwrap();
//! let out = lif(&eta, &neuron);
//! assert!(alexiewicz_norm(&(&out - &eta), Leak::ZERO) < 1.0);
//! ```

pub mod decompose;
pub mod error;
pub mod experiments;
pub mod io;
pub mod lif;
pub mod norms;
pub mod rng;
pub mod snn;
pub mod spike;

pub use decompose::{decompose, quantize_split, unit_decompose, Decomposition};
pub use error::{Error, Result};
pub use experiments::{ExperimentConfig, ExperimentReport, TrialRecord};
pub use lif::{
    from_grid, lif, lif_discrete, quantization_residual, to_grid, BetaMode, DiscreteLifConfig,
    LifConfig, ResetMode,
};
pub use norms::{alexiewicz_norm, discrepancy_norm, l2_norm, Leak};
pub use rng::SplitMix64;
pub use snn::{gamma_for, snn_error_bound, snn_forward, GammaPolicy, SnnNetwork};
pub use spike::{signal_to_spikes, PiecewiseConstantSignal, Spike, SpikeTrain};
