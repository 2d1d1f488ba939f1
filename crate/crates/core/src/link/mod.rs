//! Link-level simulation: modem, power allocation, detection and BER
//! accumulation.

pub mod detect;
pub mod modem;
pub mod power;
pub mod sim;

pub use detect::{effective_channel, ScalarEqualizer, SicDetector};
pub use modem::{qam16_map, qam16_slice, BITS_PER_SYMBOL};
pub use power::water_fill;
pub use sim::{run_ber_point, run_trials, simulate_block, stream_powers, BerPoint, SimConfig};
