//! Scenario, channel and traffic descriptions.

mod propagation;
mod scenario;
mod traffic;

pub use propagation::{
    channel_moment, sample_channel_gain, sigma_from_db, ChannelSampler, GainSamplerFn, MomentFn,
    PropagationModel,
};
pub use scenario::Scenario;
pub use traffic::{
    duty_cycle_moment, queue_event_probs, queue_steady_state, sample_duty_cycle, silent_prob,
    transmit_prob, DutyMomentMode, DutySampler, QueueEvents, TrafficModel, OVERLAP_INVERSE_TOL,
};
