// SPDX-License-Identifier: MIT OR Apache-2.0

//! Newline-delimited JSON encoding of traces.
//!
//! Line 1 is the header object (format tag, version, meta fields); each
//! following line is one step record. Floats are written in their shortest
//! round-trip form, so `read(write(t)) == t` bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{validate_trace, StepRecord, Trace, TraceMeta};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const FORMAT_NAME: &str = "cogload-trace";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
struct Header<S> {
    format: String,
    version: u32,
    #[serde(flatten)]
    meta: TraceMeta<S>,
}

pub fn write_trace<S: Scalar>(trace: &Trace<S>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_trace_to(trace, &mut out).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn write_trace_to<S: Scalar, W: Write>(trace: &Trace<S>, mut out: W) -> Result<()> {
    let header = Header {
        format: FORMAT_NAME.to_string(),
        version: FORMAT_VERSION,
        meta: trace.meta.clone(),
    };
    let io_err = |e: std::io::Error| Error::io("<stream>", e);
    serde_json::to_writer(&mut out, &header).map_err(|e| Error::io("<stream>", e.into()))?;
    out.write_all(b"\n").map_err(io_err)?;
    for step in &trace.steps {
        serde_json::to_writer(&mut out, step).map_err(|e| Error::io("<stream>", e.into()))?;
        out.write_all(b"\n").map_err(io_err)?;
    }
    Ok(())
}

pub fn read_trace<S: Scalar>(path: impl AsRef<Path>) -> Result<Trace<S>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_trace_from(file)
}

/// Parses and validates a trace; the first invariant violation is returned
/// as [`Error::InvariantViolation`].
pub fn read_trace_from<S: Scalar, R: Read>(input: R) -> Result<Trace<S>> {
    let trace = parse_trace_from(input)?;
    if let Some(v) = validate_trace(&trace).into_iter().next() {
        return Err(Error::InvariantViolation {
            step: v.step.unwrap_or(0),
            field: v.field_label(),
            rule: v.rule,
        });
    }
    Ok(trace)
}

/// Like [`read_trace`], but without validation, so every violation can be
/// reported afterwards.
pub fn parse_trace<S: Scalar>(path: impl AsRef<Path>) -> Result<Trace<S>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_trace_from(file)
}

pub fn parse_trace_from<S: Scalar, R: Read>(input: R) -> Result<Trace<S>> {
    let reader = BufReader::new(input);
    let mut meta: Option<TraceMeta<S>> = None;
    let mut steps = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io("<stream>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        match meta {
            None => {
                let probe: serde_json::Value =
                    serde_json::from_str(&line).map_err(|e| malformed(lineno, e))?;
                if probe.get("format").and_then(|f| f.as_str()) != Some(FORMAT_NAME) {
                    return Err(Error::MalformedRecord {
                        line: lineno,
                        message: format!("header must carry \"format\": \"{FORMAT_NAME}\""),
                    });
                }
                let version = probe
                    .get("version")
                    .and_then(|v| v.as_u64())
                    .ok_or_else(|| Error::MalformedRecord {
                        line: lineno,
                        message: "header missing integer field `version`".into(),
                    })?;
                if version != u64::from(FORMAT_VERSION) {
                    return Err(Error::UnsupportedVersion {
                        found: version.min(u64::from(u32::MAX)) as u32,
                        supported: FORMAT_VERSION,
                    });
                }
                let header: Header<S> =
                    serde_json::from_str(&line).map_err(|e| malformed(lineno, e))?;
                meta = Some(header.meta);
            }
            Some(_) => {
                let step: StepRecord<S> =
                    serde_json::from_str(&line).map_err(|e| malformed(lineno, e))?;
                steps.push(step);
            }
        }
    }
    let meta = meta.ok_or(Error::MalformedRecord {
        line: 1,
        message: "missing meta header line".into(),
    })?;
    Ok(Trace { meta, steps })
}

fn malformed(line: usize, e: serde_json::Error) -> Error {
    Error::MalformedRecord {
        line,
        message: e.to_string(),
    }
}
