//! Hahn-echo decay of the donor in a random ²⁹Si nuclear bath, truncated at
//! nuclear pairs (CCE-2) under conditioned (pure-dephasing) evolution.
//!
//! Only the `S_z I_jz` part of the donor–nucleus contact coupling is kept;
//! electron–nuclear flip-flops are detuned by the electron Zeeman energy
//! and dropped. This is the leading model error of the module.

mod config;
mod couplings;
mod echo;
mod ensemble;
mod lattice;
mod occupancy;

pub use config::{build_configuration, BathConfiguration, BathModel, BathPair, NeighbourShell, SHELL_TOLERANCE_NM2};
pub use couplings::{dipolar_b, superhyperfine_j, KohnLuttinger};
pub use echo::{cce2_product, conditioned_hamiltonian, pair_echo, EchoCurve, PairCoupling};
pub use ensemble::{
    cce2_echo, conditioned_levels, convergence_study, ensemble_echo, sup_distance, CceParams, ConditionedLevels,
    ConvergenceEntry, ConvergenceStudy,
};
pub use lattice::{generate_lattice, is_diamond_site, norm2, LatticeSpec, Site, SILICON_A0};
pub use occupancy::{occupy, site_uniform, SI29_ABUNDANCE};
