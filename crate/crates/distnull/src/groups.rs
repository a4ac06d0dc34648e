//! Measure-group files for `qest`.
//!
//! ```toml
//! [[group]]
//! name = "anchoring"
//! set = "set 1"
//! measures = ["anchoring1", "anchoring2"]
//! ```

use std::path::Path;

use distnull_core::variance_ratio::MeasureGroupSpec;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupFile {
    #[serde(default)]
    group: Vec<GroupEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupEntry {
    name: String,
    set: Option<String>,
    measures: Vec<String>,
}

pub fn parse_groups(text: &str) -> Result<Vec<MeasureGroupSpec>, CliError> {
    let file: GroupFile = toml::from_str(text).map_err(|e| CliError::Data(format!("group file: {e}")))?;
    if file.group.is_empty() {
        return Err(CliError::Data("group file defines no [[group]] entries".into()));
    }
    Ok(file
        .group
        .into_iter()
        .map(|g| MeasureGroupSpec { group: g.name, measures: g.measures, set_label: g.set })
        .collect())
}

pub fn load_groups(path: &Path) -> Result<Vec<MeasureGroupSpec>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| CliError::File { path: path.display().to_string(), source })?;
    parse_groups(&text)
}

/// One group per measure, named after it.
pub fn per_measure_groups<'a>(measures: impl Iterator<Item = &'a str>) -> Vec<MeasureGroupSpec> {
    measures
        .map(|m| MeasureGroupSpec { group: m.to_string(), measures: vec![m.to_string()], set_label: None })
        .collect()
}
