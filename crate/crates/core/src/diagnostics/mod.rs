//! Gibbs-Bowen scans and correlation decay.

mod bowen;
mod correlation;

pub use bowen::{bowen_scan, canonical_extension, BowenReport, CylinderRatio, DepthExtremes, Representative};
pub use correlation::{
    correlation, correlation_direct, correlation_operator, decay_fit, CorrelationCurve, CorrelationPoint,
    CorrelationValue, CORRELATION_FLOOR, DEFAULT_GAP_STEPS, ENVELOPE_SLACK,
};
pub use crate::transport::cylinder_mass;
