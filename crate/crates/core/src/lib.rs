pub mod error;
pub mod graph;
pub mod matrix;
pub mod rational;
pub mod snf;
pub mod spinc;
pub mod lattice;
pub mod invariants;
pub mod zhat;
pub mod seifert;
pub mod correction;
pub mod splice;
pub mod calculus;
