//! Rate constants, the matrices behind them, worst-case instances, and the
//! multiplier certificate.

mod certificate;
mod instances;
mod matrices;
mod rates;
mod sequences;

pub use certificate::{certificate_lemma1, polyak_certificate_multipliers, Certificate};
pub use instances::{
    build_altproj_tight_instance, build_feasibility_resisting_instance,
    build_polyak_tight_instance, AltProjInstance, TightInstance, GRAM_TOLERANCE,
};
pub use matrices::{matrix_a_adaptive, matrix_a_gram, matrix_q_polyak, GramSystem};
pub use rates::{rate_altproj, rate_optimal, rate_polyak};
pub use sequences::{
    growth_ratio_check, ln_polyak_growth, seq_a_stepweights, wallis_factor, SequencePack,
};
