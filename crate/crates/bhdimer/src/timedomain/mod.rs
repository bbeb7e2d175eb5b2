//! Crank-Nicolson propagation on a truncated two-particle lattice with
//! absorbers, used as an independent check of the stationary and resonance
//! results.

mod cn;
mod flux;
mod grid;
mod packet;
mod sim;

pub use cn::{crank_nicolson_propagate, nonescape_probability_direct, CnOptions, FluxConfig, Trajectory};
pub use flux::{channel_resolved_flux, ChannelFlux};
pub use grid::{norm_sqr, Absorber, Grid2D, Region};
pub use packet::{centroid, dimer_wavepacket, initial_wavepacket, trap_packet_value};
pub use sim::{
    flux_config, run_trap_cn, trap_grid, trap_region, wavepacket_scattering_oracle, OracleOptions, OracleResult,
    TrapCnOptions, TrapRun,
};
