use spaceform_wasm::{classify, fixtures, render, render_manifold, run_manifold};

#[test]
fn classify_symbols() {
    assert!(classify("5,3,5").unwrap().contains("HyperbolicCompact"));
    assert!(classify("1,3").is_err());
}

#[test]
fn render_solids() {
    let svg = render("truncated_octahedron", "").unwrap();
    assert!(svg.starts_with("<?xml"));
    assert_eq!(svg, render("truncated_octahedron", "").unwrap());
    assert!(render("cube", "nope").is_err());
    assert!(render("teapot", "").is_err());
}

#[test]
fn bundled_fixtures_run() {
    assert_eq!(fixtures().len(), 4);
    let r = run_manifold("trunc_oct_fig4", true).unwrap();
    assert!(r.contains("Z_4 ⊕ Z_4"));
    assert!(run_manifold("nothing", false).is_err());
    let svg = render_manifold("cube_torus", "x0").unwrap();
    assert!(svg.contains(">x1</text>"));
}
