//! Browser bindings: classify a symbol, draw a Schlegel diagram, run a bundled fixture.

use spaceform::fixture::PairingFixture;
use spaceform::gram::DEFAULT_TOL;
use spaceform::pipeline::{run_classify, run_manifold as pipeline_manifold, ManifoldOptions};
use spaceform::polytope::build_catalog;
use spaceform::render::{render_svg, RenderOptions};
use wasm_bindgen::prelude::*;

const FIXTURES: [(&str, &str); 4] = [
    ("football_fig5", include_str!("../../../fixtures/football_fig5.json")),
    ("trunc_oct_fig4", include_str!("../../../fixtures/trunc_oct_fig4.json")),
    ("cube_torus", include_str!("../../../fixtures/cube_torus.json")),
    ("cobweb_z3_fig8", include_str!("../../../fixtures/cobweb_z3_fig8.json")),
];

// String errors become thrown JS strings and stay usable in native tests.
fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn fixture(name: &str) -> Result<PairingFixture, String> {
    let (_, text) = FIXTURES
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| err(format!("no bundled fixture {name}")))?;
    let mut f = PairingFixture::from_json(text).map_err(err)?;
    f.name = name.to_string();
    Ok(f)
}

/// Names of the bundled pairing fixtures.
#[wasm_bindgen]
pub fn fixtures() -> Vec<String> {
    FIXTURES.iter().map(|(n, _)| n.to_string()).collect()
}

/// Classification report for a symbol such as `5,3,5`, as JSON.
#[wasm_bindgen]
pub fn classify(symbol: &str) -> Result<String, String> {
    run_classify(symbol, DEFAULT_TOL).map_err(err)?.to_json().map_err(err)
}

/// Schlegel diagram of a catalog solid (or `cobweb:z`), as SVG. An empty
/// `outer` picks a largest face.
#[wasm_bindgen]
pub fn render(polyhedron: &str, outer: &str) -> Result<String, String> {
    let p = build_catalog(polyhedron).map_err(err)?;
    let outer = if outer.is_empty() {
        p.faces
            .iter()
            .max_by_key(|f| f.cycle.len())
            .map(|f| f.id.clone())
            .unwrap_or_default()
    } else {
        outer.to_string()
    };
    render_svg(&p, &outer, &RenderOptions::default()).map_err(err)
}

/// Full pipeline on a bundled fixture, as a JSON report.
#[wasm_bindgen]
pub fn run_manifold(name: &str, metric: bool) -> Result<String, String> {
    let f = fixture(name)?;
    let opts = ManifoldOptions {
        metric,
        ..Default::default()
    };
    pipeline_manifold(&f, &opts).map_err(err)?.to_json().map_err(err)
}

/// The fixture's Schlegel diagram with its edge classes and face labels.
#[wasm_bindgen]
pub fn render_manifold(name: &str, outer: &str) -> Result<String, String> {
    let f = fixture(name)?;
    let p = f.polyhedron.build().map_err(err)?;
    let report = pipeline_manifold(&f, &ManifoldOptions::default()).map_err(err)?;
    let mut opts = RenderOptions::default();
    if let Some(r) = report.pairing {
        opts.classes = Some(r.edge_class_map());
        opts.face_labels = Some(r.face_labels);
    }
    let outer = if outer.is_empty() {
        p.faces
            .iter()
            .max_by_key(|f| f.cycle.len())
            .map(|f| f.id.clone())
            .unwrap_or_default()
    } else {
        outer.to_string()
    };
    render_svg(&p, &outer, &opts).map_err(err)
}
