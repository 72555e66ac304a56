//! Granger non-causality testing on panel data.
//!
//! A panel is a set of members, each observed as an aligned pair of time
//! series. Per member, a lag regression yields an F statistic and p-value;
//! the panel-level decision aggregates the member p-values through their
//! empirical gamma-quantile, which keeps the type-I error bounded even when
//! members are cross-sectionally dependent. The crate also ships the
//! average-Wald baselines (asymptotic, semi-asymptotic and block-bootstrap
//! normalizations), a panel unit-root pipeline built on the augmented
//! Dickey-Fuller test, synthetic panel generators for every experimental
//! regime and a Monte-Carlo power/FDR harness.
//!
//! Everything numerical is generic over the scalar type via [`Float`];
//! `f64` aliases for the main types live at the crate root.

pub mod aggregation;
pub mod dh;
pub mod diagnostics;
pub mod error;
mod float;
pub mod granger;
pub mod numstats;
pub mod pipeline;
mod seeding;
pub mod simulate;
pub mod stationarity;

pub use error::{Error, Result};
pub use float::Float;

/// Double-precision panel.
pub type Panel64 = granger::Panel<f64>;
/// Single-precision panel.
pub type Panel32 = granger::Panel<f32>;
/// Double-precision member pair.
pub type SeriesPair64 = granger::SeriesPair<f64>;
/// Double-precision member test result.
pub type MemberTestResult64 = granger::MemberTestResult<f64>;
/// Double-precision aggregation result.
pub type AggregationResult64 = aggregation::AggregationResult<f64>;
/// Double-precision average-Wald result.
pub type DhResult64 = dh::DhResult<f64>;
/// Double-precision ADF result.
pub type AdfResult64 = stationarity::AdfResult<f64>;
