//! JSON dataset files: a ground-truth model plus optional named sampling
//! directions.

use std::fs;
use std::path::Path;

use expsep_core::model::{PointSourceModel, Source};
use expsep_core::multidim::DirectionBasis;
use expsep_core::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceRecord {
    pub re: f64,
    pub im: f64,
    pub w: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedDirection {
    pub name: String,
    pub direction: Vec<f64>,
}

/// `{q, sources: [{re, im, w}], lines: [{name, direction}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub q: usize,
    pub sources: Vec<SourceRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lines: Vec<NamedDirection>,
}

/// A file holding only directions, e.g. `data/directions_3d.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionSet {
    pub q: usize,
    pub lines: Vec<NamedDirection>,
}

impl Dataset {
    pub fn from_model(model: &PointSourceModel, lines: Vec<NamedDirection>) -> Self {
        Self {
            q: model.dim(),
            sources: model
                .sources()
                .iter()
                .map(|s| SourceRecord {
                    re: s.amplitude.re,
                    im: s.amplitude.im,
                    w: s.frequency.clone(),
                })
                .collect(),
            lines,
        }
    }

    pub fn model(&self) -> Result<PointSourceModel> {
        let sources = self
            .sources
            .iter()
            .map(|s| Source::new(Complex64::new(s.re, s.im), s.w.clone()))
            .collect();
        Ok(PointSourceModel::new(self.q, sources)?)
    }

    /// Basis from the named lines, or `None` when the file carries none.
    pub fn basis(&self) -> Result<Option<DirectionBasis>> {
        if self.lines.is_empty() {
            return Ok(None);
        }
        basis_from(self.q, &self.lines).map(Some)
    }

    pub fn load(path: &Path) -> Result<Self> {
        read_json(path)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }
}

impl DirectionSet {
    pub fn load(path: &Path) -> Result<Self> {
        read_json(path)
    }

    pub fn basis(&self) -> Result<DirectionBasis> {
        basis_from(self.q, &self.lines)
    }
}

fn basis_from(q: usize, lines: &[NamedDirection]) -> Result<DirectionBasis> {
    if lines.len() != q {
        return Err(Error::config(format!(
            "expected {q} directions, found {}",
            lines.len()
        )));
    }
    if let Some(bad) = lines.iter().find(|l| l.direction.len() != q) {
        return Err(Error::config(format!(
            "direction '{}' has {} coordinates, expected {q}",
            bad.name,
            bad.direction.len()
        )));
    }
    Ok(DirectionBasis::new(
        lines.iter().map(|l| l.direction.clone()).collect(),
    )?)
}

pub(crate) fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::format(path, e))
}

pub(crate) fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::format(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
