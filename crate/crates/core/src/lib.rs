//! Polar decoding with information-bottleneck look-up tables.
//!
//! The crate covers the full path from code construction to a cycle-level
//! model of a fully-unrolled hardware decoder:
//!
//! * [`code`]: construction, non-systematic and systematic encoding, and the
//!   pruned SSC decoder tree.
//! * [`quantdesign`]: information-bottleneck quantizers, quantized density
//!   evolution and the IB / MS-IB / re-MS-IB look-up table sets.
//! * [`kernels`]: float, saturating fixed-point and LUT message arithmetic.
//! * [`decode`]: SC and SSC decoders generic over a kernel.
//! * [`pipeline`]: unrolling, cycle scheduling, register inventory,
//!   throughput arithmetic and a cycle-accurate simulator.
//! * [`harness`]: AWGN channel, seeded parallel FER/BER sweeps, paired
//!   decoder comparison and CSV output.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod code;
pub mod decode;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod pipeline;
pub mod quantdesign;

pub use code::{DecoderTree, NodeKind, PolarCode};
pub use error::{Error, Result};

/// A hard bit value, always 0 or 1.
pub type Bit = u8;

/// Noise standard deviation of BPSK over AWGN at `ebn0_db` for a code of
/// rate `rate`: `sigma^2 = 1 / (2 R 10^(EbN0/10))`.
pub fn ebn0_to_sigma(ebn0_db: f64, rate: f64) -> f64 {
    (1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0))).sqrt()
}
