//! The fixed, ordered feature catalog.
//!
//! Order is a compatibility contract: feature files and serialized models
//! index into it. Bump [`CATALOG_VERSION`] on any change.

pub const CATALOG_VERSION: u32 = 1;

pub const N_FEATURES: usize = 107;

/// Per-channel statistic names, in the order they are emitted.
pub const STATISTICS: [&str; 11] = [
    "mean", "std", "min", "max", "range", "median", "rms", "iqr", "mad", "skew", "kurt",
];

/// Channel name prefixes, in the order they are emitted.
pub const CHANNELS: [&str; 9] = [
    "acc_x", "acc_y", "acc_z", "acc_mag", "gyro_x", "gyro_y", "gyro_z", "gyro_mag", "heart",
];

const NAMES: [&str; N_FEATURES] = [
    "acc_x_mean",
    "acc_x_std",
    "acc_x_min",
    "acc_x_max",
    "acc_x_range",
    "acc_x_median",
    "acc_x_rms",
    "acc_x_iqr",
    "acc_x_mad",
    "acc_x_skew",
    "acc_x_kurt",
    "acc_y_mean",
    "acc_y_std",
    "acc_y_min",
    "acc_y_max",
    "acc_y_range",
    "acc_y_median",
    "acc_y_rms",
    "acc_y_iqr",
    "acc_y_mad",
    "acc_y_skew",
    "acc_y_kurt",
    "acc_z_mean",
    "acc_z_std",
    "acc_z_min",
    "acc_z_max",
    "acc_z_range",
    "acc_z_median",
    "acc_z_rms",
    "acc_z_iqr",
    "acc_z_mad",
    "acc_z_skew",
    "acc_z_kurt",
    "acc_mag_mean",
    "acc_mag_std",
    "acc_mag_min",
    "acc_mag_max",
    "acc_mag_range",
    "acc_mag_median",
    "acc_mag_rms",
    "acc_mag_iqr",
    "acc_mag_mad",
    "acc_mag_skew",
    "acc_mag_kurt",
    "gyro_x_mean",
    "gyro_x_std",
    "gyro_x_min",
    "gyro_x_max",
    "gyro_x_range",
    "gyro_x_median",
    "gyro_x_rms",
    "gyro_x_iqr",
    "gyro_x_mad",
    "gyro_x_skew",
    "gyro_x_kurt",
    "gyro_y_mean",
    "gyro_y_std",
    "gyro_y_min",
    "gyro_y_max",
    "gyro_y_range",
    "gyro_y_median",
    "gyro_y_rms",
    "gyro_y_iqr",
    "gyro_y_mad",
    "gyro_y_skew",
    "gyro_y_kurt",
    "gyro_z_mean",
    "gyro_z_std",
    "gyro_z_min",
    "gyro_z_max",
    "gyro_z_range",
    "gyro_z_median",
    "gyro_z_rms",
    "gyro_z_iqr",
    "gyro_z_mad",
    "gyro_z_skew",
    "gyro_z_kurt",
    "gyro_mag_mean",
    "gyro_mag_std",
    "gyro_mag_min",
    "gyro_mag_max",
    "gyro_mag_range",
    "gyro_mag_median",
    "gyro_mag_rms",
    "gyro_mag_iqr",
    "gyro_mag_mad",
    "gyro_mag_skew",
    "gyro_mag_kurt",
    "heart_mean",
    "heart_std",
    "heart_min",
    "heart_max",
    "heart_range",
    "heart_median",
    "heart_rms",
    "heart_iqr",
    "heart_mad",
    "heart_skew",
    "heart_kurt",
    "angle_x",
    "angle_y",
    "angle_z",
    "corr_acc_xy",
    "corr_acc_xz",
    "corr_acc_yz",
    "sma_acc",
    "sma_gyro",
];

pub fn feature_catalog() -> &'static [&'static str; N_FEATURES] {
    &NAMES
}

/// Position of `name` in the catalog.
pub fn feature_index(name: &str) -> Option<usize> {
    NAMES.iter().position(|n| *n == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_shape() {
        let names = feature_catalog();
        assert_eq!(names.len(), 107);
        for expected in ["acc_x_std", "gyro_z_std", "angle_y", "acc_mag_std", "heart_mean"] {
            assert!(feature_index(expected).is_some(), "{expected}");
        }
        for (c, channel) in CHANNELS.iter().enumerate() {
            for (s, stat) in STATISTICS.iter().enumerate() {
                assert_eq!(names[c * 11 + s], alloc::format!("{channel}_{stat}"));
            }
        }
        let mut sorted = names.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 107, "names are unique");
    }

    #[test]
    fn catalog_is_stable() {
        assert!(core::ptr::eq(feature_catalog(), feature_catalog()));
        assert_eq!(feature_catalog()[0], "acc_x_mean");
        assert_eq!(feature_catalog()[98], "heart_kurt");
        assert_eq!(feature_catalog()[106], "sma_gyro");
    }
}
