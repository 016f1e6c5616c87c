use std::process::{Command, Output};

use spaceform::pipeline::RunReport;

fn spaceform(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spaceform"))
        .args(args)
        .output()
        .unwrap()
}

fn report(out: &Output) -> RunReport {
    RunReport::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap()
}

#[test]
fn classify_exit_codes() {
    let out = spaceform(&["classify", "5,3,5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let g = &r.classification.unwrap().geometry;
    assert_eq!(format!("{:?}", g.kind), "HyperbolicCompact");
    assert!(g.determinant < 0.0);
    let out = spaceform(&["classify", "4,3,4"]);
    assert_eq!(
        report(&out).classification.unwrap().geometry.signature.to_string(),
        "(+,+,+,0)"
    );
    let out = spaceform(&["classify", "1,3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid symbol"));
    assert_eq!(spaceform(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn manifold_reports() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = spaceform(&["manifold", "trunc_oct_fig4", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r.homology.as_ref().unwrap().text, "Z_4 ⊕ Z_4");
    let saved = std::fs::read_to_string(&path).unwrap();
    assert_eq!(RunReport::from_json(&saved).unwrap(), r);
    // keys are sorted
    let keys: Vec<&str> = saved
        .lines()
        .filter(|l| l.starts_with("  \""))
        .map(|l| l.trim())
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);

    let out = spaceform(&["manifold", "football_fig5", "--metric"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r.homology.unwrap().text, "Z_14");
    let v = r.verification.unwrap();
    assert_eq!((v.edge_classes, v.euler, v.angles_ok), (30, 0, Some(true)));

    let out = spaceform(&["manifold", "cube_torus", "--cells-per-edge", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("declared 3"));
    assert_eq!(report(&out).error.unwrap().kind, "contradiction");

    assert_eq!(spaceform(&["manifold", "missing_fixture"]).status.code(), Some(2));
    assert_eq!(
        spaceform(&["manifold", "cobweb_z3_fig8", "--metric"]).status.code(),
        Some(0)
    );
}

#[test]
fn render_is_deterministic() {
    let a = spaceform(&["render", "truncated_icosahedron", "--outer", "h19"]);
    let b = spaceform(&["render", "truncated_icosahedron", "--outer", "h19"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stdout).starts_with("<?xml"));
    assert_eq!(
        spaceform(&["render", "truncated_icosahedron", "--outer", "zz"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(spaceform(&["render", "cobweb:4"]).status.code(), Some(2));
}

#[test]
fn render_with_classes() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("cw.json");
    let svg = dir.path().join("cw.svg");
    let out = spaceform(&["manifold", "cobweb_z3_fig8", "--out", rep.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let out = spaceform(&[
        "render",
        "cobweb:3",
        "--classes",
        rep.to_str().unwrap(),
        "--out",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.contains(">s1</text>"));
    let out = spaceform(&["render", "cube", "--classes", rep.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
