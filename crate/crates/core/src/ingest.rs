//! Study encoding records, raw sensor samples and walking-data slicing.
//!
//! Row-level parsing lives here so the companion crate only has to split
//! delimited text into fields; line numbers are threaded through for
//! diagnostics.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::Label;

pub const MS_PER_DAY: u32 = 86_400_000;
pub const HEART_MIN: u16 = 25;
pub const HEART_MAX: u16 = 250;

/// Column names of the raw per-participant stream, in file order.
pub const RAW_COLUMNS: [&str; 11] = [
    "time", "ax", "ay", "az", "ax_g", "ay_g", "az_g", "rot_x", "rot_y", "rot_z", "heart",
];

/// Column names of the encoding file, in file order.
pub const ENCODING_COLUMNS: [&str; 10] = [
    "participant_id",
    "condition",
    "age",
    "sex",
    "start_w1",
    "end_w1",
    "start_w2",
    "end_w2",
    "start_w3",
    "end_w3",
];

/// Column names of a walking-data file, in file order.
pub const WALKING_COLUMNS: [&str; 9] = [
    "condition",
    "emotion",
    "ax",
    "ay",
    "az",
    "rot_x",
    "rot_y",
    "rot_z",
    "heart",
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IngestError {
    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("unknown condition code {0:?}")]
    UnknownConditionCode(String),
}

fn malformed(line: usize, reason: impl Into<String>) -> IngestError {
    IngestError::MalformedRow {
        line,
        reason: reason.into(),
    }
}

/// Milliseconds since midnight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeOfDay(u32);

impl TimeOfDay {
    pub fn from_ms(ms: u32) -> Option<Self> {
        (ms < MS_PER_DAY).then_some(Self(ms))
    }

    pub fn from_hms(h: u32, m: u32, s: u32) -> Option<Self> {
        Self::from_hms_milli(h, m, s, 0)
    }

    pub fn from_hms_milli(h: u32, m: u32, s: u32, ms: u32) -> Option<Self> {
        if h >= 24 || m >= 60 || s >= 60 || ms >= 1000 {
            return None;
        }
        Some(Self(h * 3_600_000 + m * 60_000 + s * 1000 + ms))
    }

    pub fn as_ms(self) -> u32 {
        self.0
    }

    fn parts(self) -> (u32, u32, u32, u32) {
        let ms = self.0 % 1000;
        let s = self.0 / 1000;
        (s / 3600, (s / 60) % 60, s % 60, ms)
    }

    /// Parses the encoding file's dot-separated `HH.MM.SS`.
    pub fn parse_dotted(text: &str) -> Option<Self> {
        let mut it = text.trim().split('.');
        let h = it.next()?.trim().parse().ok()?;
        let m = it.next()?.trim().parse().ok()?;
        let s = it.next()?.trim().parse().ok()?;
        if it.next().is_some() {
            return None;
        }
        Self::from_hms(h, m, s)
    }

    /// Parses the raw stream's `HH:MM:SS:mmm`.
    pub fn parse_stamp(text: &str) -> Option<Self> {
        let mut it = text.trim().split(':');
        let h = it.next()?.parse().ok()?;
        let m = it.next()?.parse().ok()?;
        let s = it.next()?.parse().ok()?;
        let ms_text: &str = it.next()?;
        if it.next().is_some() || ms_text.len() != 3 {
            return None;
        }
        Self::from_hms_milli(h, m, s, ms_text.parse().ok()?)
    }

    pub fn dotted(self) -> impl fmt::Display {
        let (h, m, s, _) = self.parts();
        format!("{h:02}.{m:02}.{s:02}")
    }

    pub fn stamp(self) -> impl fmt::Display {
        let (h, m, s, ms) = self.parts();
        format!("{h:02}:{m:02}:{s:02}:{ms:03}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Emotion {
    Sad,
    Neutral,
    Happy,
}

impl Emotion {
    pub const ALL: [Emotion; 3] = [Emotion::Sad, Emotion::Neutral, Emotion::Happy];

    pub fn label(self) -> Label {
        match self {
            Emotion::Sad => -1,
            Emotion::Neutral => 0,
            Emotion::Happy => 1,
        }
    }

    pub fn from_label(label: Label) -> Option<Self> {
        match label {
            -1 => Some(Emotion::Sad),
            0 => Some(Emotion::Neutral),
            1 => Some(Emotion::Happy),
            _ => None,
        }
    }

    fn from_letter(c: char) -> Option<Self> {
        match c {
            'H' => Some(Emotion::Happy),
            'N' => Some(Emotion::Neutral),
            'S' => Some(Emotion::Sad),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stimulus {
    Movie,
    Music,
    MusicWhileWalking,
}

impl Stimulus {
    pub fn condition(self) -> u8 {
        match self {
            Stimulus::Movie => 0,
            Stimulus::Music => 1,
            Stimulus::MusicWhileWalking => 2,
        }
    }

    pub fn from_condition(condition: u8) -> Option<Self> {
        match condition {
            0 => Some(Stimulus::Movie),
            1 => Some(Stimulus::Music),
            2 => Some(Stimulus::MusicWhileWalking),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConditionDecoding {
    pub stimulus: Stimulus,
    /// Emotion induced before each of the three walks.
    pub emotion_order: [Emotion; 3],
}

impl ConditionDecoding {
    pub fn condition(&self) -> u8 {
        self.stimulus.condition()
    }
}

/// Maps condition-code prefixes (`Mo`, `Mu`, `Mw`) to condition integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixMap {
    entries: Vec<(String, u8)>,
}

impl Default for PrefixMap {
    fn default() -> Self {
        Self {
            entries: alloc::vec![("Mo".into(), 0), ("Mu".into(), 1), ("Mw".into(), 2)],
        }
    }
}

impl PrefixMap {
    pub fn empty() -> Self {
        Self { entries: Vec::new() }
    }

    /// Adds or replaces a prefix. Returns `None` for conditions outside 0..=2.
    pub fn with(mut self, prefix: &str, condition: u8) -> Option<Self> {
        Stimulus::from_condition(condition)?;
        match self.entries.iter_mut().find(|(p, _)| p == prefix) {
            Some(entry) => entry.1 = condition,
            None => self.entries.push((prefix.to_owned(), condition)),
        }
        Some(self)
    }

    pub fn entries(&self) -> &[(String, u8)] {
        &self.entries
    }

    pub fn prefix_for(&self, condition: u8) -> Option<&str> {
        self.entries
            .iter()
            .find(|(_, c)| *c == condition)
            .map(|(p, _)| p.as_str())
    }

    pub fn decode(&self, code: &str) -> Result<ConditionDecoding, IngestError> {
        let unknown = || IngestError::UnknownConditionCode(code.to_owned());
        let code_trim = code.trim();
        let (prefix, letters) = code_trim.split_once('-').ok_or_else(unknown)?;
        let condition = self
            .entries
            .iter()
            .find(|(p, _)| p == prefix)
            .map(|(_, c)| *c)
            .ok_or_else(unknown)?;
        let stimulus = Stimulus::from_condition(condition).ok_or_else(unknown)?;
        let mut order = [Emotion::Neutral; 3];
        let mut chars = letters.chars();
        for slot in order.iter_mut() {
            *slot = chars.next().and_then(Emotion::from_letter).ok_or_else(unknown)?;
        }
        if chars.next().is_some() {
            return Err(unknown());
        }
        let is_permutation = Emotion::ALL.iter().all(|e| order.contains(e));
        if !is_permutation {
            return Err(unknown());
        }
        Ok(ConditionDecoding {
            stimulus,
            emotion_order: order,
        })
    }

    /// Inverse of [`PrefixMap::decode`].
    pub fn encode(&self, condition: u8, order: [Emotion; 3]) -> Option<String> {
        let prefix = self.prefix_for(condition)?;
        let letters: String = order
            .iter()
            .map(|e| match e {
                Emotion::Happy => 'H',
                Emotion::Neutral => 'N',
                Emotion::Sad => 'S',
            })
            .collect();
        Some(format!("{prefix}-{letters}"))
    }
}

/// Decodes with the default prefix map.
pub fn decode_condition_code(code: &str) -> Result<ConditionDecoding, IngestError> {
    PrefixMap::default().decode(code)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sex {
    F,
    M,
}

impl fmt::Display for Sex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sex::F => "F",
            Sex::M => "M",
        })
    }
}

/// A closed time-of-day interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Walk {
    pub start: TimeOfDay,
    pub end: TimeOfDay,
}

impl Walk {
    pub fn contains(&self, t: TimeOfDay) -> bool {
        self.start <= t && t <= self.end
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodingRecord {
    pub participant_id: String,
    pub condition_code: String,
    pub decoding: ConditionDecoding,
    pub age: u32,
    pub sex: Sex,
    pub walks: [Walk; 3],
}

impl EncodingRecord {
    /// Builds a record from the ten fields of one encoding row.
    pub fn from_fields(fields: &[&str], line: usize, prefixes: &PrefixMap) -> Result<Self, IngestError> {
        if fields.len() != ENCODING_COLUMNS.len() {
            return Err(malformed(
                line,
                format!("expected {} columns, found {}", ENCODING_COLUMNS.len(), fields.len()),
            ));
        }
        let participant_id = fields[0].trim();
        if participant_id.is_empty() {
            return Err(malformed(line, "empty participant id"));
        }
        let condition_code = fields[1].trim();
        let decoding = prefixes.decode(condition_code)?;
        let age = fields[2]
            .trim()
            .parse()
            .map_err(|_| malformed(line, format!("bad age {:?}", fields[2].trim())))?;
        let sex = match fields[3].trim() {
            "F" | "f" => Sex::F,
            "M" | "m" => Sex::M,
            other => return Err(malformed(line, format!("bad sex {other:?}"))),
        };
        let mut times = [TimeOfDay(0); 6];
        for (slot, raw) in times.iter_mut().zip(&fields[4..]) {
            *slot =
                TimeOfDay::parse_dotted(raw).ok_or_else(|| malformed(line, format!("bad time {:?}", raw.trim())))?;
        }
        let walks = [
            Walk {
                start: times[0],
                end: times[1],
            },
            Walk {
                start: times[2],
                end: times[3],
            },
            Walk {
                start: times[4],
                end: times[5],
            },
        ];
        Self::new(
            participant_id.to_owned(),
            condition_code.to_owned(),
            decoding,
            age,
            sex,
            walks,
        )
        .map_err(|reason| malformed(line, reason))
    }

    /// Checks the walk ordering invariants.
    pub fn new(
        participant_id: String,
        condition_code: String,
        decoding: ConditionDecoding,
        age: u32,
        sex: Sex,
        walks: [Walk; 3],
    ) -> Result<Self, String> {
        for (i, w) in walks.iter().enumerate() {
            if w.start >= w.end {
                return Err(format!("walk {} ends before it starts", i + 1));
            }
        }
        if walks.windows(2).any(|p| p[0].end >= p[1].start) {
            return Err("walks overlap or are out of order".into());
        }
        Ok(Self {
            participant_id,
            condition_code,
            decoding,
            age,
            sex,
            walks,
        })
    }

    pub fn condition(&self) -> u8 {
        self.decoding.condition()
    }

    /// Fields in encoding-file column order.
    pub fn to_fields(&self) -> Vec<String> {
        let mut out = alloc::vec![
            self.participant_id.clone(),
            self.condition_code.clone(),
            format!("{}", self.age),
            format!("{}", self.sex),
        ];
        for w in &self.walks {
            out.push(format!("{}", w.start.dotted()));
            out.push(format!("{}", w.end.dotted()));
        }
        out
    }
}

/// One reading from a participant's raw stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawSample {
    pub t: TimeOfDay,
    pub ax: f64,
    pub ay: f64,
    pub az: f64,
    pub ax_g: f64,
    pub ay_g: f64,
    pub az_g: f64,
    pub rot_x: f64,
    pub rot_y: f64,
    pub rot_z: f64,
    pub heart: u16,
}

fn parse_finite(raw: &str, line: usize, column: &str) -> Result<f64, IngestError> {
    raw.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| malformed(line, format!("bad {column} value {:?}", raw.trim())))
}

fn parse_heart(raw: &str, line: usize) -> Result<u16, IngestError> {
    let text = raw.trim();
    let value: f64 = text
        .parse()
        .map_err(|_| malformed(line, format!("bad heart value {text:?}")))?;
    if libm::trunc(value) != value || !(f64::from(HEART_MIN)..=f64::from(HEART_MAX)).contains(&value) {
        return Err(malformed(
            line,
            format!("heart {text} outside [{HEART_MIN}, {HEART_MAX}] bpm"),
        ));
    }
    Ok(value as u16)
}

impl RawSample {
    pub fn from_fields(fields: &[&str], line: usize) -> Result<Self, IngestError> {
        if fields.len() != RAW_COLUMNS.len() {
            return Err(malformed(
                line,
                format!("expected {} columns, found {}", RAW_COLUMNS.len(), fields.len()),
            ));
        }
        let t = TimeOfDay::parse_stamp(fields[0])
            .ok_or_else(|| malformed(line, format!("bad timestamp {:?}", fields[0].trim())))?;
        let mut v = [0.0; 9];
        for (i, slot) in v.iter_mut().enumerate() {
            *slot = parse_finite(fields[i + 1], line, RAW_COLUMNS[i + 1])?;
        }
        Ok(Self {
            t,
            ax: v[0],
            ay: v[1],
            az: v[2],
            ax_g: v[3],
            ay_g: v[4],
            az_g: v[5],
            rot_x: v[6],
            rot_y: v[7],
            rot_z: v[8],
            heart: parse_heart(fields[10], line)?,
        })
    }

    /// Fields in raw-file column order.
    pub fn to_fields(&self) -> [String; 11] {
        [
            format!("{}", self.t.stamp()),
            format!("{}", self.ax),
            format!("{}", self.ay),
            format!("{}", self.az),
            format!("{}", self.ax_g),
            format!("{}", self.ay_g),
            format!("{}", self.az_g),
            format!("{}", self.rot_x),
            format!("{}", self.rot_y),
            format!("{}", self.rot_z),
            format!("{}", self.heart),
        ]
    }
}

/// A raw sample inside a timed walk, tagged with condition and emotion.
/// Gravity-inclusive channels are dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkingSample {
    pub condition: u8,
    pub emotion: Emotion,
    pub ax: f64,
    pub ay: f64,
    pub az: f64,
    pub rot_x: f64,
    pub rot_y: f64,
    pub rot_z: f64,
    pub heart: u16,
}

impl WalkingSample {
    pub fn from_fields(fields: &[&str], line: usize) -> Result<Self, IngestError> {
        if fields.len() != WALKING_COLUMNS.len() {
            return Err(malformed(
                line,
                format!("expected {} columns, found {}", WALKING_COLUMNS.len(), fields.len()),
            ));
        }
        let condition = fields[0]
            .trim()
            .parse::<u8>()
            .ok()
            .filter(|c| *c <= 2)
            .ok_or_else(|| malformed(line, format!("bad condition {:?}", fields[0].trim())))?;
        let emotion = fields[1]
            .trim()
            .parse::<Label>()
            .ok()
            .and_then(Emotion::from_label)
            .ok_or_else(|| malformed(line, format!("bad emotion {:?}", fields[1].trim())))?;
        let mut v = [0.0; 6];
        for (i, slot) in v.iter_mut().enumerate() {
            *slot = parse_finite(fields[i + 2], line, WALKING_COLUMNS[i + 2])?;
        }
        Ok(Self {
            condition,
            emotion,
            ax: v[0],
            ay: v[1],
            az: v[2],
            rot_x: v[3],
            rot_y: v[4],
            rot_z: v[5],
            heart: parse_heart(fields[8], line)?,
        })
    }

    pub fn to_fields(&self) -> [String; 9] {
        [
            format!("{}", self.condition),
            format!("{}", self.emotion.label()),
            format!("{}", self.ax),
            format!("{}", self.ay),
            format!("{}", self.az),
            format!("{}", self.rot_x),
            format!("{}", self.rot_y),
            format!("{}", self.rot_z),
            format!("{}", self.heart),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkingData {
    /// Samples of walk 1, then walk 2, then walk 3, each in time order.
    pub samples: Vec<WalkingSample>,
    /// Number of samples that fell into each walk.
    pub walk_counts: [usize; 3],
}

impl WalkingData {
    /// Zero-based indices of walks that received no samples.
    pub fn empty_walks(&self) -> impl Iterator<Item = usize> + '_ {
        self.walk_counts
            .iter()
            .enumerate()
            .filter(|(_, n)| **n == 0)
            .map(|(i, _)| i)
    }
}

/// Keeps the raw samples that fall inside one of the record's walks
/// (boundaries inclusive) and tags them with condition and emotion.
pub fn build_walking_data(raw: &[RawSample], rec: &EncodingRecord) -> WalkingData {
    let mut sorted: Vec<&RawSample> = raw.iter().collect();
    sorted.sort_by_key(|s| s.t);
    let condition = rec.condition();
    let mut samples = Vec::new();
    let mut walk_counts = [0usize; 3];
    for (w, walk) in rec.walks.iter().enumerate() {
        let emotion = rec.decoding.emotion_order[w];
        let first = sorted.partition_point(|s| s.t < walk.start);
        let inside = sorted[first..].iter().take_while(|s| s.t <= walk.end);
        for s in inside {
            walk_counts[w] += 1;
            samples.push(WalkingSample {
                condition,
                emotion,
                ax: s.ax,
                ay: s.ay,
                az: s.az,
                rot_x: s.rot_x,
                rot_y: s.rot_y,
                rot_z: s.rot_z,
                heart: s.heart,
            });
        }
    }
    WalkingData { samples, walk_counts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::vec;

    fn split(row: &str) -> Vec<&str> {
        row.split(',').collect()
    }

    fn sample_at(ms: u32) -> RawSample {
        RawSample {
            t: TimeOfDay::from_ms(ms).unwrap(),
            ax: f64::from(ms),
            ay: 0.0,
            az: 0.0,
            ax_g: 0.0,
            ay_g: 0.0,
            az_g: 9.8,
            rot_x: 0.0,
            rot_y: 0.0,
            rot_z: 0.0,
            heart: 70,
        }
    }

    fn record(code: &str, walks: [(u32, u32); 3]) -> EncodingRecord {
        let w = walks.map(|(a, b)| Walk {
            start: TimeOfDay::from_ms(a).unwrap(),
            end: TimeOfDay::from_ms(b).unwrap(),
        });
        EncodingRecord::new(
            "P1".into(),
            code.into(),
            decode_condition_code(code).unwrap(),
            30,
            Sex::F,
            w,
        )
        .unwrap()
    }

    #[test]
    fn raw_fields_round_trip() {
        let fields = [
            "11:22:31:148",
            "-0.25",
            "0.55",
            "5.88",
            "-0.39",
            "0.86",
            "9.18",
            "102.76",
            "38.85",
            "46.13",
            "74",
        ];
        let s = RawSample::from_fields(&fields, 2).unwrap();
        let out = s.to_fields();
        assert_eq!(out.iter().map(String::as_str).collect::<Vec<_>>(), fields);
    }

    #[test]
    fn encoding_row_from_table() {
        let row = "EW2, Mo-SNH, 23, F, 13.16.29, 13.19.41, 13.25.17, 13.28.30, 13.32.27, 13.35.34";
        let rec = EncodingRecord::from_fields(&split(row), 2, &PrefixMap::default()).unwrap();
        assert_eq!(rec.participant_id, "EW2");
        assert_eq!(rec.age, 23);
        assert_eq!(rec.sex, Sex::F);
        assert_eq!(rec.walks[0].start, TimeOfDay::from_hms(13, 16, 29).unwrap());
        assert_eq!(rec.walks[0].end, TimeOfDay::from_hms(13, 19, 41).unwrap());
        assert_eq!(rec.walks[2].end, TimeOfDay::from_hms(13, 35, 34).unwrap());
        assert_eq!(rec.condition(), 0);
    }

    #[test]
    fn encoding_row_end_before_start() {
        let row = "EW2,Mo-SNH,23,F,13.19.41,13.16.29,13.25.17,13.28.30,13.32.27,13.35.34";
        let err = EncodingRecord::from_fields(&split(row), 7, &PrefixMap::default()).unwrap_err();
        assert!(matches!(err, IngestError::MalformedRow { line: 7, .. }), "{err:?}");
    }

    #[test]
    fn encoding_row_errors() {
        let p = PrefixMap::default();
        assert!(matches!(
            EncodingRecord::from_fields(&split("EW2,Mo-SNH,23,F"), 3, &p),
            Err(IngestError::MalformedRow { line: 3, .. })
        ));
        let bad_time = "EW2,Mo-SNH,23,F,13:16:29,13.19.41,13.25.17,13.28.30,13.32.27,13.35.34";
        assert!(matches!(
            EncodingRecord::from_fields(&split(bad_time), 4, &p),
            Err(IngestError::MalformedRow { line: 4, .. })
        ));
        let bad_code = "EW2,Xx-ABC,23,F,13.16.29,13.19.41,13.25.17,13.28.30,13.32.27,13.35.34";
        assert!(matches!(
            EncodingRecord::from_fields(&split(bad_code), 5, &p),
            Err(IngestError::UnknownConditionCode(_))
        ));
        let overlap = "EW2,Mo-SNH,23,F,13.16.29,13.26.41,13.25.17,13.28.30,13.32.27,13.35.34";
        assert!(EncodingRecord::from_fields(&split(overlap), 6, &p).is_err());
    }

    #[test]
    fn condition_codes() {
        let d = decode_condition_code("Mo-SNH").unwrap();
        assert_eq!(d.stimulus, Stimulus::Movie);
        assert_eq!(d.emotion_order, [Emotion::Sad, Emotion::Neutral, Emotion::Happy]);
        let d = decode_condition_code("Mu-HNS").unwrap();
        assert_eq!(d.stimulus, Stimulus::Music);
        assert_eq!(d.emotion_order, [Emotion::Happy, Emotion::Neutral, Emotion::Sad]);
        assert_eq!(decode_condition_code("Mw-NHS").unwrap().condition(), 2);
        for bad in ["Xx-ABC", "Mo-SSH", "Mo-SN", "Mo-SNHH", "MoSNH", "", "Mo-snh"] {
            assert_eq!(
                decode_condition_code(bad),
                Err(IngestError::UnknownConditionCode(bad.into())),
                "{bad}"
            );
        }
    }

    #[test]
    fn custom_prefix_map() {
        let map = PrefixMap::default().with("MW", 2).unwrap();
        assert_eq!(map.decode("MW-HSN").unwrap().condition(), 2);
        assert!(PrefixMap::default().with("Zz", 3).is_none());
        assert!(PrefixMap::empty().decode("Mo-SNH").is_err());
        let code = map.encode(1, [Emotion::Happy, Emotion::Neutral, Emotion::Sad]).unwrap();
        assert_eq!(code, "Mu-HNS");
    }

    #[test]
    fn raw_row_from_table() {
        let row = "11:22:31:148, -0.25, 0.55, 5.88, -0.39, 0.86, 9.18, 102.76, 38.85, 46.13, 74";
        let s = RawSample::from_fields(&split(row), 2).unwrap();
        assert_eq!(s.t.as_ms(), 40_951_148);
        assert_eq!(s.ax, -0.25);
        assert_eq!(s.az_g, 9.18);
        assert_eq!(s.rot_z, 46.13);
        assert_eq!(s.heart, 74);
    }

    #[test]
    fn raw_row_rejects_bad_heart_and_stamp() {
        let row = "11:22:31:148,-0.25,0.55,5.88,-0.39,0.86,9.18,102.76,38.85,46.13,400";
        assert!(matches!(
            RawSample::from_fields(&split(row), 9,),
            Err(IngestError::MalformedRow { line: 9, .. })
        ));
        let row = "11:22:31,-0.25,0.55,5.88,-0.39,0.86,9.18,102.76,38.85,46.13,74";
        assert!(RawSample::from_fields(&split(row), 2).is_err());
        let row = "11:22:31:148,nan,0.55,5.88,-0.39,0.86,9.18,102.76,38.85,46.13,74";
        assert!(RawSample::from_fields(&split(row), 2).is_err());
        let row = "24:00:00:000,0,0,0,0,0,0,0,0,0,74";
        assert!(RawSample::from_fields(&split(row), 2).is_err());
    }

    #[test]
    fn time_formatting() {
        let t = TimeOfDay::parse_stamp("11:22:31:048").unwrap();
        assert_eq!(format!("{}", t.stamp()), "11:22:31:048");
        let t = TimeOfDay::parse_dotted("09.05.07").unwrap();
        assert_eq!(format!("{}", t.dotted()), "09.05.07");
    }

    #[test]
    fn walking_data_boundaries() {
        let rec = record("Mo-SNH", [(1000, 2000), (3000, 4000), (5000, 6000)]);
        let raw = vec![
            sample_at(999),
            sample_at(1000),
            sample_at(2000),
            sample_at(2500),
            sample_at(6000),
        ];
        let w = build_walking_data(&raw, &rec);
        assert_eq!(w.walk_counts, [2, 0, 1]);
        assert_eq!(w.empty_walks().collect::<Vec<_>>(), vec![1]);
        assert_eq!(w.samples[0].ax, 1000.0);
        assert_eq!(w.samples[1].ax, 2000.0);
        assert_eq!(w.samples[2].emotion, Emotion::Happy);
    }

    #[test]
    fn walking_data_ten_per_walk() {
        let rec = record("Mo-SNH", [(0, 900), (2000, 2900), (4000, 4900)]);
        // Ten samples inside each walk plus distractors in the gaps, shuffled.
        let mut raw: Vec<RawSample> = (0..3u32)
            .flat_map(|w| (0..10u32).map(move |i| sample_at(w * 2000 + i * 100)))
            .chain([sample_at(1000), sample_at(3500), sample_at(5000)])
            .collect();
        raw.reverse();
        let w = build_walking_data(&raw, &rec);
        assert_eq!(w.samples.len(), 30);
        assert!(w.samples.iter().all(|s| s.condition == 0));
        assert!(w.samples[..10].iter().all(|s| s.emotion.label() == -1));
        assert!(w.samples[10..20].iter().all(|s| s.emotion.label() == 0));
        assert!(w.samples[20..].iter().all(|s| s.emotion.label() == 1));
        assert!(w.samples.windows(2).take(9).all(|p| p[0].ax < p[1].ax));
    }

    proptest! {
        #[test]
        fn count_conservation(times in proptest::collection::vec(0u32..100_000, 0..300),
                              cuts in proptest::collection::btree_set(0u32..100_000, 6)) {
            let c: Vec<u32> = cuts.into_iter().collect();
            let rec = record("Mu-HSN", [(c[0], c[1]), (c[2], c[3]), (c[4], c[5])]);
            let raw: Vec<RawSample> = times.iter().map(|&t| sample_at(t)).collect();
            let w = build_walking_data(&raw, &rec);
            let brute = times
                .iter()
                .filter(|&&t| (0..3).any(|i| c[2 * i] <= t && t <= c[2 * i + 1]))
                .count();
            prop_assert_eq!(w.samples.len(), brute);
            // label coherence
            let mut seen = vec![];
            let mut offset = 0;
            for (i, n) in w.walk_counts.iter().enumerate() {
                let slice = &w.samples[offset..offset + n];
                prop_assert!(slice.iter().all(|s| s.emotion == rec.decoding.emotion_order[i]));
                seen.push(rec.decoding.emotion_order[i].label());
                offset += n;
            }
            seen.sort();
            prop_assert_eq!(seen, vec![-1, 0, 1]);
        }

        #[test]
        fn walking_fields_round_trip(ax in -50.0f64..50.0, rz in -500.0f64..500.0, heart in 25u16..=250) {
            let s = WalkingSample {
                condition: 1, emotion: Emotion::Sad, ax, ay: -ax, az: 0.5,
                rot_x: rz, rot_y: 0.0, rot_z: -rz, heart,
            };
            let fields = s.to_fields();
            let refs: Vec<&str> = fields.iter().map(String::as_str).collect();
            prop_assert_eq!(WalkingSample::from_fields(&refs, 1).unwrap(), s);
        }
    }
}
