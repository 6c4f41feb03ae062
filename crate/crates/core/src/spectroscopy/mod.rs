//! Magnetic-resonance observables of the donor: transition frequencies,
//! resonance fields at fixed excitation frequency, `Sx` matrix elements,
//! Rabi frequencies, field gradients, spectra and frequency–field maps.
//!
//! The intensity of a transition is `|⟨u|Sx⊗1|l⟩|²` only; populations and
//! frequency prefactors are left out.

mod freqmap;
mod resonance;
mod spectrum;
mod transitions;

pub use freqmap::{frequency_field_map, MapPoint};
pub use resonance::{find_all_resonances, resonance_fields, DEFAULT_INTENSITY_FLOOR};
pub use spectrum::{synthesize_spectrum, SpectrumCurve, SpectrumMode};
pub use transitions::{
    adjacent_pairs, df_db, rabi_frequency, sx_matrix_element, transition_at, transition_frequency, Transition,
    DF_DB_STEP,
};
