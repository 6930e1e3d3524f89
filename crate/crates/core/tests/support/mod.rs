//! Shared test support: random data generators and independent reference oracles.

#![allow(dead_code)]

pub mod gen;
pub mod indicator_oracle;
pub mod metric_oracle;
pub mod portfolio_fuzz;
pub mod classical;
pub mod lookahead;
pub mod risk_grid;
pub mod policy_oracle;
pub mod retrieval_oracle;
pub mod walk;
