//! Losses, the optimizer, and the training schedules.

mod adam;
mod losses;
mod schedule;

pub use adam::AdamState;
pub use losses::{
    adversarial_losses, bce, ccc_loss, channel_stats, mse_loss, ChannelStats, LossValue, BCE_CLAMP,
};
pub use schedule::{
    adapt_emotion, eval_checkpoint_loss, train_baseline, train_csg, BaselineKind, CsgPhase,
    CsgTrainer, LogRecord, ScheduleSpec, TrainOutcome,
};
