//! Core library: design languages, a planner, a novelty-search engine, the
//! conceptive loop that ties them together, and the design domains it runs on.

pub mod brouwer;
pub mod domain;
pub mod evaluation;
pub mod exec;
pub mod language;
pub mod metrics;
pub mod novelty;
pub mod planner;
pub mod render;
pub mod domains;
