//! Link-level simulator for a millimeter-wave base station that shares one
//! wideband front end between radar sensing and directional OFDM data
//! transfer.
//!
//! The library is organized around the signal path:
//!
//! - [`frame`]: complementary-pair spreading sequences, the single-carrier
//!   preamble, and the radar pulse reused from it
//! - [`phy`]: scrambling, LDPC coding, QPSK tone-pair modulation, OFDM
//!   framing, channel estimation and equalization
//! - [`channel`]: target echoes, one-way communication links, array factors,
//!   and seeded noise injection
//! - [`rsp`]: frequency-domain matched filtering across a beam grid, peak
//!   detection, and echo/uplink discrimination
//! - [`mfe`]: front-end chain budgets (gain, noise figure, compression) and
//!   baseband impairment operators (IQ imbalance, LO leakage, CFO)
//! - [`fxp`]: fixed-point quantization applied at pipeline stage boundaries
//! - [`sched`]: protocol-level timing, beam management, and throughput
//!   accounting for the joint design against a sweep-based baseline
//!
//! All randomness flows through explicitly seeded counter-mode generators so
//! every experiment is reproducible bit for bit.

pub mod channel;
pub mod error;
pub mod frame;
pub mod fxp;
pub mod mfe;
pub mod phy;
pub mod rsp;
pub mod sched;
pub mod signal;

pub use error::{Error, Result};
