pub mod config;
pub mod datagen;
pub mod render;
pub mod rlcheck;
pub mod search;
