//! Seeded synthetic cohorts in the ingest formats.
//!
//! Each walk is a sinusoidal gait whose cadence, amplitude and heart rate
//! depend on the emotion, scaled by `separability`. At separability 0 every
//! emotion draws from the same distribution.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::ingest::{ConditionDecoding, Emotion, EncodingRecord, PrefixMap, RawSample, Sex, Stimulus, TimeOfDay, Walk};
use crate::seed;

const GRAVITY: f64 = 9.81;
/// Neutral cadence (Hz) and amplitude (m/s²); happy and sad move away by
/// `CADENCE_SPREAD` and `AMPLITUDE_SPREAD` at separability 1.
const CADENCE: f64 = 1.8;
const CADENCE_SPREAD: f64 = 0.2;
const AMPLITUDE: f64 = 1.0;
const AMPLITUDE_SPREAD: f64 = 0.2;
const ACCEL_NOISE: f64 = 0.3;
/// deg/s of rotation per m/s² of gait acceleration.
const GYRO_GAIN: f64 = 25.0;
const GYRO_NOISE: f64 = 4.0;
const HEART_OFFSETS: [f64; 3] = [-5.0, 0.0, 10.0];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("invalid synth spec: {0}")]
    InvalidSpec(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SynthSpec {
    pub n_users: usize,
    pub conditions: Vec<u8>,
    pub walk_duration_s: f64,
    pub sample_rate_hz: f64,
    /// 0 makes emotions indistinguishable, 1 separates them fully.
    pub separability: f64,
    pub seed: u64,
    /// Shortest walk, in samples, the spec must allow.
    pub window_len: usize,
    /// Per-gait-cycle relative jitter of amplitude.
    pub amplitude_jitter: f64,
    /// Phase diffusion of the gait, in radians per √s.
    pub phase_diffusion: f64,
    /// Std of the per-second heart-rate measurement noise (bpm).
    pub heart_noise: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_users: 10,
            conditions: alloc::vec![0, 1, 2],
            walk_duration_s: 60.0,
            sample_rate_hz: 32.0,
            separability: 1.0,
            seed: 0,
            window_len: 64,
            amplitude_jitter: 0.25,
            phase_diffusion: 1.0,
            heart_noise: 6.0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = SynthError::InvalidSpec;
        if self.n_users == 0 {
            return Err(bad("n_users must be at least 1"));
        }
        if self.n_users > 999 {
            return Err(bad("n_users must be at most 999"));
        }
        if self.conditions.is_empty() {
            return Err(bad("conditions must not be empty"));
        }
        let mut seen = [false; 3];
        for &c in &self.conditions {
            match seen.get_mut(usize::from(c)) {
                Some(s) if !*s => *s = true,
                Some(_) => return Err(bad("duplicate condition")),
                None => return Err(bad("conditions must be 0, 1 or 2")),
            }
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0 && self.sample_rate_hz <= 1000.0) {
            return Err(bad("sample_rate_hz must be in (0, 1000]"));
        }
        if !(self.walk_duration_s.is_finite() && self.walk_duration_s >= 1.0 && self.walk_duration_s <= 600.0) {
            return Err(bad("walk_duration_s must be in [1, 600]"));
        }
        if (self.walk_seconds() as f64) * self.sample_rate_hz < self.window_len as f64 {
            return Err(bad("walks are shorter than one window"));
        }
        if !(0.0..=1.0).contains(&self.separability) {
            return Err(bad("separability must be in [0, 1]"));
        }
        for v in [self.amplitude_jitter, self.phase_diffusion, self.heart_noise] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(bad("noise parameters must be finite and non-negative"));
            }
        }
        Ok(())
    }

    fn walk_seconds(&self) -> u32 {
        libm::round(self.walk_duration_s) as u32
    }
}

/// One participant's raw stream.
#[derive(Debug, Clone, PartialEq)]
pub struct RawStream {
    pub participant_id: String,
    pub samples: Vec<RawSample>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    /// One record per user per condition, users in order.
    pub records: Vec<EncodingRecord>,
    pub streams: Vec<RawStream>,
}

pub fn participant_id(index: usize) -> String {
    format!("SY{:03}", index + 1)
}

struct Person {
    rest_heart: f64,
    offset: [f64; 3],
    gain: [f64; 3],
    phase: [f64; 3],
    gravity: [f64; 3],
}

impl Person {
    fn draw(rng: &mut ChaCha8Rng) -> Person {
        let mut unit = [0.0f64; 3];
        // wrist orientation: gravity mostly along z with a random tilt
        unit[0] = rng.random_range(-0.4..0.4);
        unit[1] = rng.random_range(-0.4..0.4);
        unit[2] = 1.0;
        let norm = libm::sqrt(unit.iter().map(|v| v * v).sum());
        Person {
            rest_heart: rng.random_range(60.0..90.0),
            offset: core::array::from_fn(|_| rng.random_range(-0.3..0.3)),
            gain: core::array::from_fn(|_| rng.random_range(0.6..1.4)),
            phase: core::array::from_fn(|_| rng.random_range(0.0..TAU)),
            gravity: unit.map(|u| GRAVITY * u / norm),
        }
    }
}

fn round4(v: f64) -> f64 {
    libm::round(v * 1e4) / 1e4
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Walk `w` of condition block `block` starts at 09:00 + block hours.
fn walk_bounds(spec: &SynthSpec, block: usize, w: usize) -> (u32, u32) {
    const GAP_S: u32 = 20;
    let len = spec.walk_seconds();
    let start = 9 * 3600 + block as u32 * 3600 + GAP_S + w as u32 * (len + GAP_S);
    (start, start + len)
}

struct Segment {
    emotion: Option<Emotion>,
    start_s: u32,
    end_s: u32,
}

fn generate_stream(spec: &SynthSpec, rng: &mut ChaCha8Rng, orders: &[[Emotion; 3]]) -> Vec<RawSample> {
    let person = Person::draw(rng);
    let dt = 1.0 / spec.sample_rate_hz;
    let s = spec.separability;
    let mut out = Vec::new();
    for (block, order) in orders.iter().enumerate() {
        let mut segments = Vec::new();
        let (first, _) = walk_bounds(spec, block, 0);
        let mut cursor = first - 10;
        for (w, &emotion) in order.iter().enumerate() {
            let (a, b) = walk_bounds(spec, block, w);
            segments.push(Segment {
                emotion: None,
                start_s: cursor,
                end_s: a,
            });
            segments.push(Segment {
                emotion: Some(emotion),
                start_s: a,
                end_s: b,
            });
            cursor = b;
        }
        segments.push(Segment {
            emotion: None,
            start_s: cursor,
            end_s: cursor + 10,
        });

        let mut phase = rng.random_range(0.0..TAU);
        let mut cycle_gain = (1.0 + spec.amplitude_jitter * normal(rng)).max(0.0);
        let mut heart_second = u32::MAX;
        let mut heart = person.rest_heart;
        for seg in segments {
            let (cadence, amplitude, heart_offset) = match seg.emotion {
                Some(e) => {
                    let l = f64::from(e.label());
                    let idx = (e.label() + 1) as usize;
                    (
                        CADENCE + CADENCE_SPREAD * s * l,
                        AMPLITUDE + AMPLITUDE_SPREAD * s * l,
                        HEART_OFFSETS[idx] * s,
                    )
                }
                None => (0.0, 0.0, 0.0),
            };
            let n = libm::round(f64::from(seg.end_s - seg.start_s) * spec.sample_rate_hz) as u64;
            // the walk interval is closed, so walks also take the sample at their end second
            let last = if seg.emotion.is_some() { n } else { n.saturating_sub(1) };
            let first = if seg.emotion.is_some() { 0 } else { 1 };
            for j in first..=last {
                let offset_ms = libm::round(j as f64 * 1000.0 * dt) as u32;
                let t_ms = seg.start_s * 1000 + offset_ms;
                let second = t_ms / 1000;
                if second != heart_second {
                    heart_second = second;
                    heart = person.rest_heart + heart_offset + spec.heart_noise * normal(rng);
                }
                let before = phase;
                phase += TAU * cadence * dt + spec.phase_diffusion * libm::sqrt(dt) * normal(rng);
                if libm::floor(phase / TAU) != libm::floor(before / TAU) {
                    cycle_gain = (1.0 + spec.amplitude_jitter * normal(rng)).max(0.0);
                }
                let amp = amplitude * cycle_gain;
                let lin: [f64; 3] = core::array::from_fn(|k| {
                    person.offset[k]
                        + amp * person.gain[k] * libm::sin(phase + person.phase[k])
                        + ACCEL_NOISE * normal(rng)
                });
                let rot: [f64; 3] = core::array::from_fn(|k| {
                    GYRO_GAIN * amp * person.gain[k] * libm::sin(phase + person.phase[k] + 0.5 * (k as f64 + 1.0))
                        + GYRO_NOISE * normal(rng)
                });
                let bpm = libm::round(heart).clamp(40.0, 200.0) as u16;
                out.push(RawSample {
                    t: TimeOfDay::from_ms(t_ms).expect("synthetic times stay within the day"),
                    ax: round4(lin[0]),
                    ay: round4(lin[1]),
                    az: round4(lin[2]),
                    ax_g: round4(lin[0] + person.gravity[0]),
                    ay_g: round4(lin[1] + person.gravity[1]),
                    az_g: round4(lin[2] + person.gravity[2]),
                    rot_x: round4(rot[0]),
                    rot_y: round4(rot[1]),
                    rot_z: round4(rot[2]),
                    heart: bpm,
                });
            }
        }
    }
    out
}

/// Generates the encoding records and raw streams described by `spec`.
pub fn generate_cohort(spec: &SynthSpec) -> Result<Cohort, SynthError> {
    spec.validate()?;
    let prefixes = PrefixMap::default();
    let mut conditions = spec.conditions.clone();
    conditions.sort_unstable();
    let mut records = Vec::new();
    let mut streams = Vec::new();
    for user in 0..spec.n_users {
        let pid = participant_id(user);
        let mut rng = seed::rng(&[spec.seed, seed::hash_str(&pid)]);
        let age = rng.random_range(18..=65);
        let sex = if rng.random_bool(0.5) { Sex::F } else { Sex::M };
        let mut orders = Vec::with_capacity(conditions.len());
        for (block, &condition) in conditions.iter().enumerate() {
            let mut order = Emotion::ALL;
            order.shuffle(&mut rng);
            orders.push(order);
            let walks = core::array::from_fn(|w| {
                let (a, b) = walk_bounds(spec, block, w);
                Walk {
                    start: TimeOfDay::from_ms(a * 1000).expect("within day"),
                    end: TimeOfDay::from_ms(b * 1000).expect("within day"),
                }
            });
            let code = prefixes.encode(condition, order).expect("default prefixes cover 0..=2");
            let decoding = ConditionDecoding {
                stimulus: Stimulus::from_condition(condition).expect("validated"),
                emotion_order: order,
            };
            records.push(EncodingRecord {
                participant_id: pid.clone(),
                condition_code: code,
                decoding,
                age,
                sex,
                walks,
            });
        }
        let samples = generate_stream(spec, &mut rng, &orders);
        streams.push(RawStream {
            participant_id: pid,
            samples,
        });
    }
    Ok(Cohort { records, streams })
}
