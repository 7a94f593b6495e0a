//! Intraday seasonality and tail-index analysis of FX limit and market
//! order transactions.

pub mod evt;
pub mod pipeline;
pub mod sampler;
pub mod stats;
pub mod synth;
pub mod tickstore;
