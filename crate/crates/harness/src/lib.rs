pub mod check;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod instance;
pub mod methods;
pub mod metrics;
pub mod report;
