pub mod automata;
pub mod bits;
pub mod engine;
pub mod crossbar;
pub mod scouting;
pub mod perfmodel;
pub mod config;
