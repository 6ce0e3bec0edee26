//! Detection of conditional-related micro-changes in Java method histories.

pub mod ast;
pub mod treediff;
pub mod textdiff;
pub mod catalog;
pub mod refactorings;
pub mod metrics;
pub mod mining;
