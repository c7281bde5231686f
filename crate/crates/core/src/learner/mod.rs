//! Training-set assembly from captured states, per-predicate kernel
//! classifiers, and the accuracy evaluation protocol.

pub mod collect;
pub mod evaluate;
pub mod oracle;
pub mod schema;
pub mod svm;

pub use collect::{collect_training_data, CollectError};
pub use evaluate::{evaluate, train_solution, EvalError, EvalReport};
pub use svm::{train, train_detailed, ClassifierModel, KernelKind, SvmModel, TrainConfig, TrainingSet, TrainOutcome};
pub use schema::{
    build_schema, featurize, fold_array, Captured, CaptureSource, FeatureDescriptor,
    FeatureSchema, VarCategory, UNINITIALIZED_SENTINEL,
};
