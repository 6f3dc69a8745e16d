//! Toolkit for growing and analyzing annotated Internet AS-level topologies.
//!
//! The multiclass preferential attachment (MPA) growth model distinguishes
//! ISP from non-ISP autonomous systems and annotates every link as either
//! customer-to-provider (c2p) or peer-to-peer (p2p). This crate bundles:
//!
//! * [`model`] — the annotated graph storage and degree bookkeeping,
//! * [`analytic`] — closed-form predictions (exponents, degree trajectories),
//! * [`generator`] — the event-driven growth engine,
//! * [`metrics`] — the 2K-annotated metric battery (CCDFs, JDD projections,
//!   clustering, power-law fitting),
//! * [`ingest`] — parsers for CAIDA as-rel snapshots and AS taxonomy lists,
//! * [`io`] — graph serialization shared by the generator and the parsers.

pub mod analytic;
pub mod generator;
pub mod ingest;
pub mod io;
pub mod metrics;
pub mod model;
pub mod sampler;
