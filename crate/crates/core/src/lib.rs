//! Design and simulation of the double cross-phase-modulation (XPM) scheme
//! for heralded optical cat states under photon-absorption loss.
//!
//! * [`coherent`]: exact coherent-state and dyad algebra.
//! * [`engine`]: time-sliced Kerr + loss evolution of dyad states and the
//!   single/double XPM pipelines.
//! * [`closed_form`]: analytic coherence parameter, cat size and `G(τ)`.
//! * [`fock`]: brute-force master-equation integrator on a truncated Fock
//!   space, used as an independent check.
//! * [`design`]: solves for the interaction time and input intensity.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the scalar to `f64`.

pub mod closed_form;
pub mod coherent;
pub mod design;
pub mod engine;
pub mod error;
pub mod fock;
mod scalar;

pub use error::{Error, Result};
pub use scalar::{cis, Complex, Real};

pub type Amplitude = Complex<f64>;
pub type CatTarget64 = coherent::CatTarget<f64>;
pub type DyadState64 = coherent::DyadState<f64>;
pub type DyadState32 = coherent::DyadState<f32>;
pub type XpmParams64 = engine::XpmParams<f64>;
pub type XpmParams32 = engine::XpmParams<f32>;
pub type ChannelConfig64 = engine::ChannelConfig<f64>;
pub type SchemeOutput64 = engine::SchemeOutput<f64>;
pub type ClosedFormPoint64 = closed_form::ClosedFormPoint<f64>;
pub type FockDensity64 = fock::FockDensity<f64>;
pub type DesignSpec64 = design::DesignSpec<f64>;
pub type DesignResult64 = design::DesignResult<f64>;
