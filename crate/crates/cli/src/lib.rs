//! Config-driven experiment runner: single runs, momentum sweeps and the
//! verification suites.

pub mod config;
pub mod output;
pub mod registry;
pub mod runner;
pub mod sweep;
pub mod verify;
