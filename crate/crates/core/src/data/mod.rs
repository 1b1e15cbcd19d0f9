//! Dataset loading, preprocessing and the l-cycle non-IID device split.
//!
//! Order of operations: truncate → standardize (train statistics) → PCA →
//! train/validation split → l-cycle distribution → per-device min-max
//! scaling and 80/20 split.

mod lcycle;
mod load;
mod pca;
mod scale;

pub use lcycle::{
    device_local_prepare, label_range, lcycle_distribute, DeviceDataShard, DeviceSplit,
};
pub use load::{load_dataset, DatasetSource, RawDataset, LABEL_MODULUS};
pub use pca::PcaModel;
pub use scale::{standardize, train_validation_split, MinMaxScaler, StandardScaler};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
