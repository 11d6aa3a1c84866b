//! Periodic-component extraction and bootstrapped-EM multiple imputation
//! for uniformly sampled daily time series.
//!
//! The pipeline this library supports: simulate weekday/weekend-skewed
//! missingness on a complete series, extract candidate periodic components
//! with KZFT bandpass filters, assess each component's significance with a
//! period-aligned block bootstrap, feed the significant components' median
//! vectors into a bootstrapped-EM multiple imputer as auxiliary covariates,
//! smooth the completed series for diagnostics, and score the imputations
//! against the held-out truth.

pub mod error;
pub mod evaluation;
pub mod imputer;
pub mod kzfilter;
pub mod missingness;
pub mod seeding;
pub mod series;
pub mod smoothing;
pub mod spectral;
pub mod vbpbb;

pub use error::{Error, Result};
pub use series::{parse_series, weekday_of, write_series, TimeSeries, Weekday};
