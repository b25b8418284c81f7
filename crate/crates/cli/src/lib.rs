//! Experiment harness around `bbm-core`: declarative sweep configs, the
//! inflation/discontinuity/series experiments with named acceptance
//! predicates, and CSV/JSON/plot persistence.

pub mod config;
pub mod experiments;
pub mod report;
