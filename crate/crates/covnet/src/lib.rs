//! Throughput analysis for infrastructure-assisted cooperative vehicular
//! networks.
//!
//! A vehicle of interest (VoI) drives along a highway that is covered by
//! regularly spaced roadside infrastructure. While covered, it downloads
//! directly (V2I). Between coverage regions, vehicles travelling in the
//! opposite direction act as helpers: they prefetch data while crossing the
//! coverage of the infrastructure ahead of the VoI and relay it on contact
//! (V2V). The crate answers one question three independent ways: what is the
//! VoI's long-run download throughput?
//!
//! * [`analytic`] — closed-form expected throughput per regime, built on
//!   renewal cycles and cluster statistics of the helper process.
//! * [`optimizer`] — an exact per-cycle scheduling linear program plus the
//!   closed-form optimal schedules it certifies.
//! * [`sim`] — Monte Carlo simulation at two fidelities (per-cycle sampling
//!   and an event-driven highway), with deterministic seeding.
//!
//! [`experiments`] sweeps scenarios across all three routes and writes CSV;
//! the `covnet` binary (in the companion CLI crate) exposes everything from
//! the command line.

pub mod analytic;
pub mod experiments;
pub mod model;
pub mod optimizer;
pub mod sim;

pub mod guide;
