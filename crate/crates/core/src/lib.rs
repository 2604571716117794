pub mod corpus;
pub mod country;
pub mod fingerprint;
pub mod index;
pub mod unionfind;
pub mod classify;
pub mod analytics;
pub mod config;
pub mod synth;
pub mod pipeline;
