//! Deterministic CSV and JSON artifacts.
//!
//! Every float is written with 17 significant digits (`{:.16e}`), both in
//! CSV and in JSON, so that repeated runs produce byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;
use serde_json::value::RawValue;

use crate::error::Result;
use crate::profile::RadialProfile;

pub const SCHEMA_VERSION: &str = "1.0.0";

/// The JSON schema every `report.json` validates against.
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

pub fn fmt17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "NaN".to_string()
    }
}

fn raw17(v: f64) -> Option<Box<RawValue>> {
    v.is_finite()
        .then(|| RawValue::from_string(fmt17(v)).expect("formatted float is valid JSON"))
}

pub fn ser17<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    raw17(*v).serialize(s)
}

pub fn ser17_opt<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    v.and_then(raw17).serialize(s)
}

pub fn ser17_vec<S: Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&raw17(*x))?;
    }
    seq.end()
}

#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema_version: &'static str,
    pub command: &'a str,
    pub result: T,
}

pub fn to_json<T: Serialize>(command: &str, result: T) -> Result<String> {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        command,
        result,
    };
    let mut text = serde_json::to_string_pretty(&env)?;
    text.push('\n');
    Ok(text)
}

/// `r,u,du` per node, followed by the tail parameters as a comment line.
pub fn profile_csv(profile: &RadialProfile) -> String {
    let mut out = String::from("r,u,du\n");
    for n in &profile.nodes {
        out.push_str(&format!("{},{},{}\n", fmt17(n.r), fmt17(n.u), fmt17(n.du)));
    }
    if let Some(t) = profile.tail {
        out.push_str(&format!(
            "# tail radius={} value={} rate={}\n",
            fmt17(t.radius),
            fmt17(t.value),
            fmt17(t.rate)
        ));
    }
    out
}

/// File name for a profile at `lambda`, stable across runs.
pub fn profile_file_name(tag: &str, lambda: f64) -> String {
    format!("profile_{tag}_lambda_{}.csv", fmt17(lambda))
}

pub fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}
