//! Windowing, accelerometer denoising and the 107-value feature vector.

mod catalog;
pub mod stats;

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

pub use catalog::{feature_catalog, feature_index, CATALOG_VERSION, CHANNELS, N_FEATURES, STATISTICS};

use crate::ingest::{Emotion, WalkingSample};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FeatureError {
    #[error("invalid windowing config: {0}")]
    InvalidConfig(&'static str),
    #[error("cannot extract features from an empty window")]
    DegenerateWindow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct WindowingConfig {
    /// Samples per window.
    pub window_len: usize,
    /// Fraction of a window shared with the next one, in `[0, 1)`.
    pub overlap: f64,
    /// Nominal sampling rate in Hz.
    pub frequency_rate: f64,
}

impl Default for WindowingConfig {
    fn default() -> Self {
        Self {
            window_len: 64,
            overlap: 0.5,
            frequency_rate: 32.0,
        }
    }
}

impl WindowingConfig {
    pub fn stride(&self) -> Result<usize, FeatureError> {
        if self.window_len < 2 {
            return Err(FeatureError::InvalidConfig("window_len must be at least 2"));
        }
        if !(0.0..1.0).contains(&self.overlap) {
            return Err(FeatureError::InvalidConfig("overlap must lie in [0, 1)"));
        }
        if !(self.frequency_rate.is_finite() && self.frequency_rate > 0.0) {
            return Err(FeatureError::InvalidConfig("frequency_rate must be positive"));
        }
        let stride = libm::round(self.window_len as f64 * (1.0 - self.overlap)) as usize;
        if stride == 0 {
            return Err(FeatureError::InvalidConfig("overlap leaves a zero stride"));
        }
        Ok(stride)
    }

    /// Number of windows produced from a run of `n` samples.
    pub fn windows_in_run(&self, n: usize) -> Result<usize, FeatureError> {
        let stride = self.stride()?;
        Ok(if n < self.window_len {
            0
        } else {
            (n - self.window_len) / stride + 1
        })
    }
}

/// Consecutive walking samples sharing one (condition, emotion) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub samples: Vec<WalkingSample>,
    pub condition: u8,
    pub emotion: Emotion,
}

/// Cuts every contiguous (condition, emotion) run into fixed-length windows
/// starting at multiples of the stride. Windows never straddle runs.
pub fn segment_windows(samples: &[WalkingSample], cfg: &WindowingConfig) -> Result<Vec<Window>, FeatureError> {
    let stride = cfg.stride()?;
    let mut out = Vec::new();
    for run in samples.chunk_by(|a, b| a.condition == b.condition && a.emotion == b.emotion) {
        let mut start = 0;
        while start + cfg.window_len <= run.len() {
            out.push(Window {
                samples: run[start..start + cfg.window_len].to_vec(),
                condition: run[0].condition,
                emotion: run[0].emotion,
            });
            start += stride;
        }
    }
    Ok(out)
}

/// 3-point running median, edges replicated.
pub fn median3(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    (0..n)
        .map(|i| {
            let a = xs[i.saturating_sub(1)];
            let b = xs[i];
            let c = xs[(i + 1).min(n - 1)];
            a.max(b).min(a.min(b).max(c))
        })
        .collect()
}

/// Median-filters the three accelerometer channels; gyro and heart are kept.
pub fn denoise_accel(mut window: Window) -> Window {
    if window.samples.is_empty() {
        return window;
    }
    let column = |f: fn(&WalkingSample) -> f64, w: &Window| median3(&w.samples.iter().map(f).collect::<Vec<_>>());
    let ax = column(|s| s.ax, &window);
    let ay = column(|s| s.ay, &window);
    let az = column(|s| s.az, &window);
    for (i, s) in window.samples.iter_mut().enumerate() {
        s.ax = ax[i];
        s.ay = ay[i];
        s.az = az[i];
    }
    window
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    /// Values in [`feature_catalog`] order.
    pub values: Vec<f64>,
    pub emotion: Emotion,
    pub condition: u8,
}

fn angle_to_axis(mean: [f64; 3], axis: usize) -> f64 {
    let norm = libm::sqrt(mean.iter().map(|v| v * v).sum());
    if norm == 0.0 {
        return FRAC_PI_2;
    }
    libm::acos((mean[axis] / norm).clamp(-1.0, 1.0))
}

fn magnitude(x: f64, y: f64, z: f64) -> f64 {
    libm::sqrt(x * x + y * y + z * z)
}

fn signal_magnitude_area(x: &[f64], y: &[f64], z: &[f64]) -> f64 {
    let total: f64 = (0..x.len()).map(|i| x[i].abs() + y[i].abs() + z[i].abs()).sum();
    total / x.len() as f64
}

/// Computes the catalog features of a (denoised) window.
pub fn extract_features(window: &Window) -> Result<FeatureVector, FeatureError> {
    let s = &window.samples;
    if s.is_empty() {
        return Err(FeatureError::DegenerateWindow);
    }
    let col = |f: fn(&WalkingSample) -> f64| s.iter().map(f).collect::<Vec<f64>>();
    let ax = col(|s| s.ax);
    let ay = col(|s| s.ay);
    let az = col(|s| s.az);
    let gx = col(|s| s.rot_x);
    let gy = col(|s| s.rot_y);
    let gz = col(|s| s.rot_z);
    let heart = col(|s| f64::from(s.heart));
    let acc_mag: Vec<f64> = (0..s.len()).map(|i| magnitude(ax[i], ay[i], az[i])).collect();
    let gyro_mag: Vec<f64> = (0..s.len()).map(|i| magnitude(gx[i], gy[i], gz[i])).collect();

    let mut values = Vec::with_capacity(N_FEATURES);
    for channel in [&ax, &ay, &az, &acc_mag, &gx, &gy, &gz, &gyro_mag, &heart] {
        values.extend_from_slice(&stats::channel_stats(channel));
    }
    let mean_acc = [stats::mean(&ax), stats::mean(&ay), stats::mean(&az)];
    for axis in 0..3 {
        values.push(angle_to_axis(mean_acc, axis));
    }
    values.push(stats::correlation(&ax, &ay));
    values.push(stats::correlation(&ax, &az));
    values.push(stats::correlation(&ay, &az));
    values.push(signal_magnitude_area(&ax, &ay, &az));
    values.push(signal_magnitude_area(&gx, &gy, &gz));
    debug_assert_eq!(values.len(), N_FEATURES);

    Ok(FeatureVector {
        values,
        emotion: window.emotion,
        condition: window.condition,
    })
}

/// Segments, denoises and featurizes a participant's walking data, in
/// window start order.
pub fn featurize(samples: &[WalkingSample], cfg: &WindowingConfig) -> Result<Vec<FeatureVector>, FeatureError> {
    segment_windows(samples, cfg)?
        .into_iter()
        .map(|w| extract_features(&denoise_accel(w)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;
    use proptest::prelude::*;
    use std::vec;

    fn ws(condition: u8, emotion: Emotion, ax: f64) -> WalkingSample {
        WalkingSample {
            condition,
            emotion,
            ax,
            ay: 0.0,
            az: 0.0,
            rot_x: 0.0,
            rot_y: 0.0,
            rot_z: 0.0,
            heart: 70,
        }
    }

    fn run(n: usize) -> Vec<WalkingSample> {
        (0..n).map(|i| ws(0, Emotion::Happy, i as f64)).collect()
    }

    fn cfg(window_len: usize, overlap: f64) -> WindowingConfig {
        WindowingConfig {
            window_len,
            overlap,
            frequency_rate: 32.0,
        }
    }

    /// Start offsets by direct enumeration.
    fn brute_force_starts(n: usize, len: usize, stride: usize) -> Vec<usize> {
        let mut starts = vec![];
        let mut s = 0;
        loop {
            if s + len > n {
                break;
            }
            starts.push(s);
            s += stride;
        }
        starts
    }

    #[test]
    fn window_counts() {
        let w = segment_windows(&run(1000), &cfg(128, 0.5)).unwrap();
        assert_eq!(w.len(), 14);
        assert_eq!(brute_force_starts(1000, 128, 64).len(), 14);
        assert_eq!(w[13].samples[0].ax, 832.0);
        assert!(segment_windows(&run(100), &cfg(128, 0.5)).unwrap().is_empty());
        let w = segment_windows(&run(256), &cfg(128, 0.0)).unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(w[1].samples[0].ax, 128.0);
    }

    #[test]
    fn invalid_configs() {
        assert!(matches!(
            segment_windows(&run(10), &cfg(1, 0.0)),
            Err(FeatureError::InvalidConfig(_))
        ));
        assert!(cfg(4, 1.0).stride().is_err());
        assert!(cfg(4, 0.9).stride().is_err(), "round(0.4) = 0");
        assert!(cfg(4, -0.1).stride().is_err());
    }

    #[test]
    fn windows_respect_runs() {
        let mut samples = run(100);
        samples.extend((0..100).map(|i| ws(0, Emotion::Sad, i as f64)));
        samples.extend((0..50).map(|i| ws(1, Emotion::Sad, i as f64)));
        let w = segment_windows(&samples, &cfg(32, 0.5)).unwrap();
        assert_eq!(w.len(), 5 + 5 + 2);
        assert_eq!(w[5].emotion, Emotion::Sad);
        assert_eq!(w[11].condition, 1);
        for win in &w {
            assert!(win
                .samples
                .iter()
                .all(|s| s.condition == win.condition && s.emotion == win.emotion));
        }
    }

    #[test]
    fn median_filter() {
        assert_eq!(median3(&[2.0, 2.0, 2.0, 2.0]), vec![2.0; 4]);
        assert_eq!(median3(&[0.0, 0.0, 9.0, 0.0, 0.0]), vec![0.0; 5]);
        assert_eq!(median3(&[1.0, 2.0, 3.0, 4.0]), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(median3(&[5.0]), vec![5.0]);
    }

    #[test]
    fn denoise_touches_accel_only() {
        let mut samples: Vec<WalkingSample> = [0.0, 0.0, 9.0, 0.0, 0.0]
            .iter()
            .map(|&v| ws(0, Emotion::Happy, v))
            .collect();
        samples[2].rot_x = 50.0;
        samples[2].ay = -4.0;
        let w = Window {
            samples,
            condition: 0,
            emotion: Emotion::Happy,
        };
        let d = denoise_accel(w);
        assert!(d.samples.iter().all(|s| s.ax == 0.0 && s.ay == 0.0));
        assert_eq!(d.samples[2].rot_x, 50.0);
    }

    fn window_from(acc: &[[f64; 3]]) -> Window {
        Window {
            samples: acc
                .iter()
                .map(|a| WalkingSample {
                    ax: a[0],
                    ay: a[1],
                    az: a[2],
                    ..ws(0, Emotion::Neutral, 0.0)
                })
                .collect(),
            condition: 0,
            emotion: Emotion::Neutral,
        }
    }

    fn get(fv: &FeatureVector, name: &str) -> f64 {
        fv.values[feature_index(name).unwrap()]
    }

    #[test]
    fn constant_window_conventions() {
        let fv = extract_features(&window_from(&[[1.0, 2.0, 3.0]; 8])).unwrap();
        assert_eq!(fv.values.len(), 107);
        assert_eq!(get(&fv, "acc_x_std"), 0.0);
        assert_eq!(get(&fv, "corr_acc_xy"), 0.0);
        assert_eq!(get(&fv, "corr_acc_yz"), 0.0);
        assert_eq!(get(&fv, "acc_x_skew"), 0.0);
        assert_eq!(get(&fv, "acc_x_kurt"), 0.0);
        assert!(fv.values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn axis_aligned_angles() {
        let fv = extract_features(&window_from(&[[1.0, 0.0, 0.0]; 4])).unwrap();
        assert_eq!(get(&fv, "angle_x"), 0.0);
        assert!((get(&fv, "angle_y") - PI / 2.0).abs() < 1e-15);
        assert!((get(&fv, "angle_z") - PI / 2.0).abs() < 1e-15);
        let zero = extract_features(&window_from(&[[0.0; 3]; 4])).unwrap();
        assert_eq!(get(&zero, "angle_x"), FRAC_PI_2);
    }

    #[test]
    fn ramp_features() {
        let fv = extract_features(&window_from(&[[1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [3.0, 0.0, 0.0]])).unwrap();
        assert_eq!(get(&fv, "acc_x_mean"), 2.0);
        assert!((get(&fv, "acc_x_std") - 0.816_496_580_927_726).abs() < 1e-12);
        assert!((get(&fv, "acc_x_rms") - 2.160_246_899_469_287).abs() < 1e-12);
        assert_eq!(get(&fv, "acc_x_range"), 2.0);
        assert_eq!(get(&fv, "sma_acc"), 2.0);
        // acc magnitude equals |ax| here
        assert_eq!(get(&fv, "acc_mag_mean"), 2.0);
        assert_eq!(extract_features(&window_from(&[])), Err(FeatureError::DegenerateWindow));
    }

    fn arb_window() -> impl Strategy<Value = Window> {
        proptest::collection::vec(
            (
                prop::array::uniform3(-20.0f64..20.0),
                prop::array::uniform3(-300.0f64..300.0),
                25u16..=250,
            ),
            2..40,
        )
        .prop_map(|rows| Window {
            samples: rows
                .into_iter()
                .map(|(a, g, h)| WalkingSample {
                    condition: 2,
                    emotion: Emotion::Sad,
                    ax: a[0],
                    ay: a[1],
                    az: a[2],
                    rot_x: g[0],
                    rot_y: g[1],
                    rot_z: g[2],
                    heart: h,
                })
                .collect(),
            condition: 2,
            emotion: Emotion::Sad,
        })
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    proptest! {
        #[test]
        fn count_law_matches_enumeration(n in 0usize..2000, len in 2usize..=256,
                                         overlap in prop::sample::select(vec![0.0, 0.25, 0.5, 0.75])) {
            let c = cfg(len, overlap);
            let stride = c.stride().unwrap();
            let got = segment_windows(&run(n), &c).unwrap();
            let starts = brute_force_starts(n, len, stride);
            prop_assert_eq!(got.len(), starts.len());
            prop_assert_eq!(c.windows_in_run(n).unwrap(), starts.len());
            for (w, s) in got.iter().zip(&starts) {
                prop_assert_eq!(w.samples[0].ax, *s as f64);
                prop_assert_eq!(w.samples.len(), len);
            }
        }

        #[test]
        fn feature_ranges(w in arb_window()) {
            let fv = extract_features(&w).unwrap();
            prop_assert_eq!(fv.values.len(), N_FEATURES);
            prop_assert!(fv.values.iter().all(|v| v.is_finite()));
            for (c, _) in CHANNELS.iter().enumerate() {
                for s in [1, 4, 6, 7, 8] {
                    prop_assert!(fv.values[c * 11 + s] >= 0.0);
                }
            }
            for v in &fv.values[99..102] {
                prop_assert!((0.0..=PI).contains(v));
            }
            for v in &fv.values[102..105] {
                prop_assert!((-1.0..=1.0).contains(v));
            }
            prop_assert!(fv.values[105] >= 0.0 && fv.values[106] >= 0.0);
        }

        #[test]
        fn accel_scaling(w in arb_window(), c in 0.1f64..10.0) {
            let base = extract_features(&w).unwrap();
            let mut scaled = w.clone();
            for s in &mut scaled.samples {
                s.ax *= c;
                s.ay *= c;
                s.az *= c;
            }
            let sc = extract_features(&scaled).unwrap();
            for ch in 0..4 {
                for stat in [1, 4, 6, 7, 8] {
                    let i = ch * 11 + stat;
                    prop_assert!(close(sc.values[i], c * base.values[i], 1e-9), "{}", feature_catalog()[i]);
                }
                for stat in [9, 10] {
                    let i = ch * 11 + stat;
                    prop_assert!(close(sc.values[i], base.values[i], 1e-6), "{}", feature_catalog()[i]);
                }
            }
            for i in 99..105 {
                prop_assert!(close(sc.values[i], base.values[i], 1e-9), "{}", feature_catalog()[i]);
            }
            prop_assert!(close(sc.values[105], c * base.values[105], 1e-9));
        }

        #[test]
        fn channel_translation(w in arb_window(), shift in -50.0f64..50.0) {
            let base = extract_features(&w).unwrap();
            let mut moved = w.clone();
            for s in &mut moved.samples {
                s.ay += shift;
                s.rot_z += shift;
            }
            let mv = extract_features(&moved).unwrap();
            for ch in [1usize, 6] {
                for stat in [1, 7, 8] {
                    let i = ch * 11 + stat;
                    prop_assert!((mv.values[i] - base.values[i]).abs() < 1e-9, "{}", feature_catalog()[i]);
                }
            }
            for i in 102..105 {
                prop_assert!((mv.values[i] - base.values[i]).abs() < 1e-9);
            }
        }
    }
}
