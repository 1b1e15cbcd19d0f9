use rand::seq::SliceRandom;

use super::load::LABEL_MODULUS;
use super::scale::MinMaxScaler;
use super::seeded_rng;
use crate::error::{Error, Result};
use crate::vqc::LabeledDataset;

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceDataShard {
    pub device_id: usize,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    /// Cyclic label interval `[start, end)` modulo 10.
    pub label_range: (usize, usize),
}

impl DeviceDataShard {
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// `(i mod 10, (i + C) mod 10)`.
pub fn label_range(device: usize, n_class: usize) -> (usize, usize) {
    (device % LABEL_MODULUS, (device + n_class) % LABEL_MODULUS)
}

fn in_range(y: usize, (s, e): (usize, usize)) -> bool {
    if e > s {
        s <= y && y < e
    } else {
        y >= s || y < e
    }
}

/// Gives device `i` every row whose label falls in its cyclic range. Rows can
/// land on several devices; devices can end up empty (logged).
pub fn lcycle_distribute(
    x: &[Vec<f64>],
    y: &[usize],
    n_devices: usize,
    n_class: usize,
) -> Result<Vec<DeviceDataShard>> {
    if x.len() != y.len() {
        return Err(Error::contract("feature and label counts differ"));
    }
    if !(1..=LABEL_MODULUS).contains(&n_class) {
        return Err(Error::config(
            "n_class",
            format!("must be in 1..={LABEL_MODULUS}"),
        ));
    }
    if let Some(bad) = y.iter().find(|&&l| l >= LABEL_MODULUS) {
        return Err(Error::contract(format!(
            "label {bad} outside 0..{LABEL_MODULUS}"
        )));
    }
    let shards: Vec<DeviceDataShard> = (0..n_devices)
        .map(|i| {
            let range = label_range(i, n_class);
            let (features, labels) = x
                .iter()
                .zip(y)
                .filter(|(_, &l)| in_range(l, range))
                .map(|(r, &l)| (r.clone(), l))
                .unzip();
            DeviceDataShard {
                device_id: i,
                features,
                labels,
                label_range: range,
            }
        })
        .collect();
    for s in shards.iter().filter(|s| s.is_empty()) {
        log::warn!(
            "device {} received no rows for labels {:?}",
            s.device_id,
            s.label_range
        );
    }
    Ok(shards)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceSplit {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
}

/// Min-max scales a shard with its own statistics and splits it 80/20.
/// Returns `None` (with a warning) for shards with fewer than two rows.
pub fn device_local_prepare(shard: &DeviceDataShard, seed: u64) -> Result<Option<DeviceSplit>> {
    let m = shard.labels.len();
    if m < 2 {
        log::warn!("device {} skipped: {m} rows", shard.device_id);
        return Ok(None);
    }
    let scaled = MinMaxScaler::fit(&shard.features)?.transform(&shard.features);
    let n_train = ((0.8 * m as f64).round() as usize).clamp(1, m - 1);
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut seeded_rng(seed));
    let pick = |idx: &[usize]| {
        LabeledDataset::new(
            idx.iter().map(|&i| scaled[i].clone()).collect(),
            idx.iter().map(|&i| shard.labels[i]).collect(),
        )
    };
    Ok(Some(DeviceSplit {
        train: pick(&order[..n_train])?,
        test: pick(&order[n_train..])?,
    }))
}
