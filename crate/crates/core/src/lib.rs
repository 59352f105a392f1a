pub mod analytics;
pub mod benchmark;
pub mod config;
pub mod discrepancy;
pub mod error;
pub mod etl;
pub mod ml;
pub mod model;
pub mod query;
pub mod store;
pub mod wire;
