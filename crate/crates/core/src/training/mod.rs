//! Stage-wise training with a frozen previous-stage teacher.
//!
//! The stage objective is `lambda * L_soft + (1 - lambda) * L_hard`, where
//! `L_hard` is cross-entropy against the target characters and `L_soft` is
//! cross-entropy against the teacher's output distribution on the same
//! inputs. Both are token means over a batch.

mod loss;
mod optim;
mod sequence;
mod stage;

pub use loss::{check_lambda, combined_dlogits, combined_loss, distill_loss, hard_loss, LossBreakdown, LossGrad};
pub use optim::{optimizer_step, Optimizer, OptimizerKind};
pub use sequence::{
    checkpoint_name, train_sequence, train_sequence_from, SequenceState, StageReport, TeacherRecord,
};
pub use stage::{train_stage, StageConfig, StageData, StageHistory, TeacherHandle};
