pub mod chem;
pub mod data;
pub mod seed;
pub mod net;
pub mod metrics;
pub mod stats;
pub mod experiments;
pub mod cli;
