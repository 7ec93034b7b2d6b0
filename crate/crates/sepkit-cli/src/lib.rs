//! Batch front door for the separation toolkit: instance files in,
//! certificate reports out.
//!
//! The library half carries everything the binary does — loading
//! ([`schema`]), dispatch ([`run`]), and rendering ([`report`]) — so the
//! whole pipeline is testable without spawning processes.

pub mod report;
pub mod run;
pub mod schema;
