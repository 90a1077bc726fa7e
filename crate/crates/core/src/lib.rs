//! Agent-based simulation of toxic-content diffusion on social networks.
//!
//! Three dynamics are provided: baseline SEIZ, SEIZ with a basic
//! profile-agnostic moderator, and SEIZ with a smart moderator that counts
//! toxic messages per user and personalizes its interventions by Dark Triad
//! profile.

pub mod cli;
pub mod config;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod models;
pub mod profiles;
pub mod rng;

pub use error::{Error, Result};
