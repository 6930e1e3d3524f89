//! Simulation core: market data, signals, portfolio accounting, strategies, risk, agents and meetings.

pub mod agents;
pub mod meetings;
pub mod indicators;
pub mod marketdata;
pub mod metrics;
pub mod portfolio;
pub mod risk;
pub mod strategy;
pub mod synth;
