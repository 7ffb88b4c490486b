//! Compile functions given by their Fourier representation into explicit deep
//! ReLU networks, and verify the resulting approximation rates and oscillation
//! lower bounds by exact piecewise-linear analysis.
//!
//! The crate is organized in layers:
//!
//! * [`relu_net`]: the network container (layers of ReLU units plus a linear
//!   readout), evaluation, block-diagonal merging, JSON serialization.
//! * [`waveform`]: single-layer triangle waves and their composition laws,
//!   the depth-efficiency workhorse.
//! * [`sinusoid`]: randomized four-ReLU sinusoid estimators whose expectation
//!   over the shift parameter reproduces an exact cosine on a window.
//! * [`piecewise`]: exact piecewise-linear representations of 1-d networks,
//!   crossing counts and quadrature losses.
//! * [`fourier`]: Fourier measures (atomic and radial), norms, sampling.
//! * [`synthesizer`]: sampling-based compilation of a Fourier measure into a
//!   depth-D network under a unit budget.
//! * [`lowerbound`]: oscillation-based lower bound machinery.
//! * [`harness`]: experiment configs, sweeps, CSV output, verification suites.

pub mod fourier;
pub mod harness;
pub mod lowerbound;
pub mod piecewise;
pub mod quadrature;
pub mod relu_net;
pub mod sinusoid;
pub mod synthesizer;
pub mod waveform;

pub use fourier::{FourierAtom, FourierMeasure};
pub use relu_net::{LayerSpec, ReluNetwork};
