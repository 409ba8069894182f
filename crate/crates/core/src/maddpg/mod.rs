//! Decentralized actors with centralized attention critics, trained off-policy.

mod buffer;
mod learner;
mod metrics;
mod trainer;
mod update;

pub use buffer::{ReplayBuffer, Transition};
pub use learner::{act_with_noise, soft_update, AgentLearner};
pub use metrics::{JsonlMetrics, MetricsRecord, MetricsSink, NullSink, RunLabel};
pub use trainer::{train, train_logged, EpisodeRecord, TrainReport, TrainerConfig};
pub use update::{critic_update, policy_update, target_actions, td_target, UpdateBatch};
