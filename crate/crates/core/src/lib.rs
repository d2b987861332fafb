//! Simulation and analysis toolkit for a two-photon interference random
//! number generator.
//!
//! * [`optics`]: beam-splitter interference and detector click statistics.
//! * [`timetag`]: time-domain Monte Carlo, coincidence pairing and delay scans.
//! * [`bitpipe`]: clocked bit extraction, error model and unbiasing.
//! * [`statskit`]: statistical randomness tests.

pub mod bitpipe;
pub mod optics;
pub mod statskit;
pub mod timetag;
