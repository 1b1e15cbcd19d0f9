//! Round-based protocol simulation: the baseline that trains every device,
//! and the clustered protocol that trains one representative per group.

mod federation;
mod learner;
mod policy;

pub use federation::{
    DeviceInput, DeviceState, Federation, GlobalWeighting, Protocol, ProtocolSettings, ServerState,
};
pub use learner::{FitOutcome, LocalLearner, VqcLearner};
pub use policy::{
    aggregate, combine, combine_weighted, select_representative, server_test_model, train_start,
    update_member, MemberUpdate, MixWeights, PersonalizationPolicy, SelectionKind, SelectionRule,
    TestModel, TrainStart,
};
