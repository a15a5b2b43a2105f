pub mod graph;
pub mod linalg;
pub mod intersect;
pub mod taut;
pub mod repthy;
pub mod weights;
pub mod engine;
pub mod known;
pub mod cli;
