//! [[7,1,3]] code primitives: tables, encoders, fault-tolerant
//! initialization, transversal gates, gadgets, and logical QFT builders.

pub mod builder;
pub mod code;
pub mod gadgets;
pub mod oracle;
pub mod qft;


pub use builder::{LogicalBlock, ProgramBuilder, SingleQubitPrep};
pub use code::{decode_measurement, SyndromeRecord};
