//! Certifiably optimal range-only pose and short-horizon trajectory
//! initialization.
//!
//! The nonconvex range-only MAP problem is rewritten as a QCQP over a lifted
//! state ([`qcqp`]), tightened with automatically discovered redundant
//! constraints ([`redundancy`]) and relaxed to an SDP solved by an in-crate
//! interior-point method ([`sdp`]). [`extraction`] recovers the estimate and
//! its tightness certificate; [`lm`] is the local baseline.

pub mod bench;
pub mod extraction;
pub mod lie;
pub mod lm;
pub mod pipeline;
pub mod qcqp;
pub mod redundancy;
pub mod scenario;
pub mod sdp;
