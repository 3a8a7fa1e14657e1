pub mod amenability;
pub mod catalog;
pub mod condition;
pub mod fp;
pub mod harness;
pub mod linalg;
pub mod relmetric;
pub mod rng;
