//! Contextual-bandit toolkit for sequential treatment assignment: an online
//! Bayesian logistic-regression belief, decision policies built on it
//! (knowledge gradient, Thompson sampling, exploitation, exploration),
//! sparse-feature engineering (similarity graphs, communities, an L1
//! logistic path with cross-validation), and a reproducible Monte-Carlo
//! experiment harness.

pub mod bayes;
pub mod config;
pub mod error;
pub mod features;
pub mod model;
pub mod num;
pub mod policy;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
