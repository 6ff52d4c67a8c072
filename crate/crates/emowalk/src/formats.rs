//! Delimited-text readers and writers for every pipeline file.

use std::path::Path;

use emowalk_core::features::{feature_catalog, FeatureVector, N_FEATURES};
use emowalk_core::ingest::{
    Emotion, EncodingRecord, IngestError, PrefixMap, RawSample, WalkingSample, ENCODING_COLUMNS, RAW_COLUMNS,
    WALKING_COLUMNS,
};

use crate::error::{Error, Result};

fn reader(path: &Path, delimiter: u8) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::data(path, line, format!("{other:?}")),
    }
}

fn ingest_error(path: &Path, e: IngestError) -> Error {
    match e {
        IngestError::MalformedRow { line, reason } => Error::data(path, Some(line), reason),
        other => Error::data(path, None, other),
    }
}

fn check_header<S: AsRef<str>>(path: &Path, rdr: &mut csv::Reader<std::fs::File>, expected: &[S]) -> Result<()> {
    let got = rdr.headers().map_err(|e| csv_error(path, e))?;
    let matches = got.len() == expected.len() && got.iter().zip(expected).all(|(g, e)| g == e.as_ref());
    if !matches {
        let want: Vec<&str> = expected.iter().map(AsRef::as_ref).collect();
        return Err(Error::data(
            path,
            Some(1),
            format!(
                "header must be {:?}, found {:?}",
                want.join(","),
                got.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    Ok(())
}

/// Calls `row` with the fields and 1-based line of every data row.
fn for_each_row(
    path: &Path,
    delimiter: u8,
    expected: &[impl AsRef<str>],
    mut row: impl FnMut(&[&str], usize) -> Result<()>,
) -> Result<()> {
    let mut rdr = reader(path, delimiter)?;
    check_header(path, &mut rdr, expected)?;
    let mut record = csv::StringRecord::new();
    loop {
        match rdr.read_record(&mut record) {
            Ok(false) => return Ok(()),
            Ok(true) => {
                let line = record.position().map_or(0, |p| p.line() as usize);
                let fields: Vec<&str> = record.iter().collect();
                row(&fields, line)?;
            }
            Err(e) => return Err(csv_error(path, e)),
        }
    }
}

fn to_bytes<I, R>(delimiter: u8, header: &[impl AsRef<[u8]>], rows: I) -> Vec<u8>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for r in rows {
        w.write_record(r).expect("writing to memory");
    }
    w.into_inner().expect("writing to memory")
}

pub fn read_encoding(path: &Path, delimiter: u8, prefixes: &PrefixMap) -> Result<Vec<EncodingRecord>> {
    let mut out = Vec::new();
    for_each_row(path, delimiter, &ENCODING_COLUMNS, |fields, line| {
        let rec = EncodingRecord::from_fields(fields, line, prefixes).map_err(|e| match e {
            IngestError::UnknownConditionCode(code) => {
                Error::data(path, Some(line), format!("unknown condition code {code:?}"))
            }
            other => ingest_error(path, other),
        })?;
        out.push(rec);
        Ok(())
    })?;
    Ok(out)
}

pub fn encoding_bytes(records: &[EncodingRecord], delimiter: u8) -> Vec<u8> {
    to_bytes(delimiter, &ENCODING_COLUMNS, records.iter().map(|r| r.to_fields()))
}

/// Reads a raw stream. With `strict` off, malformed rows are skipped with a
/// warning instead of failing the file.
pub fn read_raw(path: &Path, delimiter: u8, strict: bool) -> Result<Vec<RawSample>> {
    let mut out = Vec::new();
    for_each_row(path, delimiter, &RAW_COLUMNS, |fields, line| {
        match RawSample::from_fields(fields, line) {
            Ok(s) => out.push(s),
            Err(e) if strict => return Err(ingest_error(path, e)),
            Err(e) => log::warn!("{}: skipping {e}", path.display()),
        }
        Ok(())
    })?;
    Ok(out)
}

pub fn raw_bytes(samples: &[RawSample], delimiter: u8) -> Vec<u8> {
    to_bytes(delimiter, &RAW_COLUMNS, samples.iter().map(RawSample::to_fields))
}

pub fn read_walking(path: &Path, delimiter: u8) -> Result<Vec<WalkingSample>> {
    let mut out = Vec::new();
    for_each_row(path, delimiter, &WALKING_COLUMNS, |fields, line| {
        out.push(WalkingSample::from_fields(fields, line).map_err(|e| ingest_error(path, e))?);
        Ok(())
    })?;
    Ok(out)
}

pub fn walking_bytes(samples: &[WalkingSample], delimiter: u8) -> Vec<u8> {
    to_bytes(
        delimiter,
        &WALKING_COLUMNS,
        samples.iter().map(WalkingSample::to_fields),
    )
}

fn feature_header() -> Vec<&'static str> {
    let mut h: Vec<&'static str> = feature_catalog().to_vec();
    h.extend(["emotion", "condition"]);
    h
}

pub fn read_features(path: &Path, delimiter: u8) -> Result<Vec<FeatureVector>> {
    let mut out = Vec::new();
    for_each_row(path, delimiter, &feature_header(), |fields, line| {
        if fields.len() != N_FEATURES + 2 {
            return Err(Error::data(
                path,
                Some(line),
                format!("expected {} columns, found {}", N_FEATURES + 2, fields.len()),
            ));
        }
        let mut values = Vec::with_capacity(N_FEATURES);
        for (name, raw) in feature_catalog().iter().zip(fields) {
            let v: f64 = raw
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::data(path, Some(line), format!("bad {name} value {raw:?}")))?;
            values.push(v);
        }
        let emotion = fields[N_FEATURES]
            .parse::<i8>()
            .ok()
            .and_then(Emotion::from_label)
            .ok_or_else(|| Error::data(path, Some(line), format!("bad emotion {:?}", fields[N_FEATURES])))?;
        let condition = fields[N_FEATURES + 1]
            .parse::<u8>()
            .ok()
            .filter(|c| *c <= 2)
            .ok_or_else(|| Error::data(path, Some(line), format!("bad condition {:?}", fields[N_FEATURES + 1])))?;
        out.push(FeatureVector {
            values,
            emotion,
            condition,
        });
        Ok(())
    })?;
    Ok(out)
}

pub fn features_bytes(features: &[FeatureVector], delimiter: u8) -> Vec<u8> {
    let rows = features.iter().map(|f| {
        let mut r: Vec<String> = f.values.iter().map(|v| format!("{v}")).collect();
        r.push(f.emotion.label().to_string());
        r.push(f.condition.to_string());
        r
    });
    to_bytes(delimiter, &feature_header(), rows)
}
