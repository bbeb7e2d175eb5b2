//! Model parameters, dispersion relations, single-particle bound states and
//! asymptotic channel functions.

mod bound;
mod channels;
mod dimer;
mod params;
mod potential;

pub use bound::{single_particle_bound_states, BoundState, Window};
pub use channels::{
    build_channel_set, build_channel_set_at, dimer_channel_wavefunction,
    dissociation_channel_wavefunction, dissociation_momentum, dissociation_momentum_continued,
    ChannelSet, DimerChannel, Direction, DissociationChannel, Side, Sides,
};
pub use dimer::{
    dimer_dispersion, dimer_dispersion_c, dimer_group_velocity, dimer_lambda, dimer_lambda_c,
    invert_dimer_dispersion, invert_dimer_dispersion_c,
};
pub use params::LatticeParams;
pub use potential::{OnSitePotential, PotentialKind};

pub type C64 = faer::c64;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
