//! Streaming approximation of Boolean Max-2CSP and Max-kSAT via bias sketches.
//!
//! The pipeline: stream clauses into [`bias::BiasAccumulator`]s (exact or
//! ℓ1-sketched), then [`estimators::dispatch`] turns the resulting counts and
//! total bias into a value estimate with a certified upper bound.

pub mod formula;
pub mod l1sketch;
pub mod bias;
pub mod estimators;
pub mod assignment;
pub mod oracle;
pub mod rounding;
pub mod gapgen;
pub mod lemmas;
