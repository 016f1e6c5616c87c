//! Pairing input files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pairing::{FacePairingSeed, GroupWord, PropagateOptions, SpecialClass};
use crate::polytope::{build_catalog, CombinatorialPolyhedron, Edge};

/// Environment variable overriding the fixture directory.
pub const FIXTURE_DIR_VAR: &str = "SPACEFORM_FIXTURES";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolyhedronSpec {
    Named(String),
    Inline(CombinatorialPolyhedron),
}

impl PolyhedronSpec {
    pub fn build(&self) -> Result<CombinatorialPolyhedron> {
        match self {
            PolyhedronSpec::Named(n) => build_catalog(n),
            PolyhedronSpec::Inline(p) => Ok(p.clone()),
        }
    }
}

/// Placement of the fixture solid on the metric football.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Anchor {
    /// Fixture vertex sent to the base vertex.
    pub vertex: usize,
    pub pentagon: String,
    pub hexagon: String,
}

/// The simplex copy whose half-turn enters the supergroup identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfTurn {
    pub vertex: usize,
    pub hexagon: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricSpec {
    /// `football`, `truncated_octahedron`, `cube` or `cobweb`.
    pub solid: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<Anchor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_turn: Option<HalfTurn>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairingFixture {
    #[serde(default)]
    pub name: String,
    pub polyhedron: PolyhedronSpec,
    pub cells_per_edge: usize,
    #[serde(default)]
    pub special_classes: Vec<SpecialClass>,
    pub seeds: Vec<FacePairingSeed>,
    #[serde(default)]
    pub edge_order: Vec<[usize; 2]>,
    #[serde(default)]
    pub aliases: BTreeMap<String, GroupWord>,
    /// Expected face labels, merged with the inline solid's labels.
    #[serde(default)]
    pub labels: BTreeMap<String, GroupWord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_class_number: Option<usize>,
}

impl PairingFixture {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)?;
        let mut f = Self::from_json(&s)?;
        if f.name.is_empty() {
            f.name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
        }
        Ok(f)
    }

    pub fn options(&self) -> PropagateOptions {
        PropagateOptions {
            edge_order: self.edge_order.iter().map(|e| (e[0], e[1]) as Edge).collect(),
            aliases: self.aliases.clone(),
            first_class_number: self.first_class_number.unwrap_or(1),
            ..PropagateOptions::default()
        }
    }

    /// Expected labels from the file and from an inline solid.
    pub fn expected_labels(&self) -> Result<BTreeMap<String, GroupWord>> {
        let mut out = BTreeMap::new();
        if let PolyhedronSpec::Inline(p) = &self.polyhedron {
            for (k, v) in &p.labels {
                out.insert(k.clone(), GroupWord::parse(v)?);
            }
        }
        out.extend(self.labels.clone());
        Ok(out)
    }
}

pub fn fixture_dir() -> PathBuf {
    match std::env::var_os(FIXTURE_DIR_VAR) {
        Some(d) => PathBuf::from(d),
        None => Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures"),
    }
}

/// Bare names are looked up in the fixture directory first, with or without `.json`.
pub fn resolve_fixture(name: &str) -> Result<PathBuf> {
    let p = Path::new(name);
    let bare = p.components().count() == 1;
    let mut candidates = Vec::new();
    if bare {
        let dir = fixture_dir();
        candidates.push(dir.join(name));
        candidates.push(dir.join(format!("{name}.json")));
    }
    candidates.push(p.to_path_buf());
    candidates
        .into_iter()
        .find(|c| c.is_file())
        .ok_or_else(|| Error::Fixture(format!("no fixture named {name}")))
}

pub fn load_fixture(name: &str) -> Result<PairingFixture> {
    PairingFixture::load(&resolve_fixture(name)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_fixtures_load() {
        for n in ["football_fig5", "trunc_oct_fig4", "cube_torus", "cobweb_z3_fig8.json"] {
            let f = load_fixture(n).unwrap();
            let p = f.polyhedron.build().unwrap();
            assert!(p.validate().ok, "{n}");
            assert!(!f.seeds.is_empty());
        }
        assert!(load_fixture("no_such_fixture").is_err());
    }

    #[test]
    fn named_and_inline_polyhedra() {
        let f = PairingFixture::from_json(r#"{"polyhedron": "cube", "cells_per_edge": 4, "seeds": []}"#).unwrap();
        assert_eq!(f.polyhedron.build().unwrap().faces.len(), 6);
        assert_eq!(f.options().first_class_number, 1);
        assert!(PairingFixture::from_json(r#"{"polyhedron": 3}"#).is_err());
    }
}
