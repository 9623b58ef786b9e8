//! Radar-side analysis: ambiguity function and estimation bounds.

mod ambiguity;
mod fisher;

pub use ambiguity::{
    af_grid, af_numeric_oracle, complex_af, linspace, pulse_af, ridge_covariance, time_moments,
    zero_delay_closed_form, zero_delay_cut, zero_doppler_cut, AFGrid, AfEvaluator,
};
pub use fisher::{
    bandwidth_is_small, crlb_expanded, crlb_full, crlb_simplified, fisher_matrix,
    smoothed_cross_moment, snr_constant, weighted_tone_sum, Crlb, FisherMatrix, SmoothedPulse,
    DEFAULT_BT,
};
