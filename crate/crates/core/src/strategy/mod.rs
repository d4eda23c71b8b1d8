//! Local hidden variable strategies: state tables, block mixtures, the
//! history-adaptive source that exploits block-level signaling, and the
//! within-block signaling source.

mod adaptive;
mod mixture;
mod signaling;
mod table;

pub use adaptive::{
    heavy_state, light_state, medium_state, AdaptiveType2State, AdaptiveType2Strategy, Phase,
};
pub use mixture::{draw_block_state, DiscreteSampler, MixtureComponent, MixtureStrategy};
pub use signaling::{signaling_block_outcomes, FourOutcomeLaw, SignalingType3Config};
pub use table::{
    build_state_table, measure_block, realize_mixture_component, table_distribution, ChCountSpec,
    StateTable, TrialAssignment,
};
