pub mod bloch;
pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod propagator;
pub mod pulse;
pub mod state;
pub mod sweep;
#[cfg(test)]
mod testing;
