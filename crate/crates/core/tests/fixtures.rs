use spaceform::fixture::load_fixture;
use spaceform::homology::{abelianize, first_homology};
use spaceform::pairing::{propagate, ClassOutcome, GroupWord, PairingResult};

fn run(name: &str) -> PairingResult {
    let f = load_fixture(name).unwrap();
    let p = f.polyhedron.build().unwrap();
    propagate(&p, &f.seeds, f.cells_per_edge, &f.special_classes, &f.options()).unwrap()
}

fn labels_match(name: &str, r: &PairingResult) {
    let f = load_fixture(name).unwrap();
    for (face, w) in f.expected_labels().unwrap() {
        assert_eq!(r.face_labels[&face], w, "{name}: label of {face}");
    }
}

fn census(r: &PairingResult) -> (usize, usize, usize, usize) {
    let mut c = (0, 0, 0, 0);
    for k in &r.classes {
        match k.outcome {
            ClassOutcome::NewPairing { .. } => c.0 += 1,
            ClassOutcome::Trivial => c.1 += 1,
            ClassOutcome::Defining => c.2 += 1,
            ClassOutcome::Consequence { .. } => c.3 += 1,
        }
    }
    c
}

#[test]
fn truncated_octahedron_manifold() {
    let r = run("trunc_oct_fig4");
    labels_match("trunc_oct_fig4", &r);
    assert_eq!(r.classes.len(), 12);
    assert!(r.classes.iter().all(|c| c.size == 3));
    assert_eq!(r.vertex_classes.len(), 6);
    assert!(r.vertex_classes.iter().all(|v| v.vertices.len() == 4));
    let expected = [
        GroupWord::parse("v^2 u v^2 u^-1").unwrap(),
        GroupWord::parse("u^2 v^-1 u^2 v").unwrap(),
    ];
    assert_eq!(r.presentation.relators.len(), 2);
    for e in &expected {
        assert!(r.presentation.relators.iter().any(|w| w.is_cyclic_conjugate(e)), "{e}");
    }
    assert_eq!(first_homology(&r.presentation).to_string(), "Z_4 ⊕ Z_4");
}

#[test]
fn football_manifold() {
    let r = run("football_fig5");
    labels_match("football_fig5", &r);
    assert_eq!(r.classes.len(), 30);
    assert!(r.classes.iter().all(|c| c.size == 3));
    assert_eq!(r.face_pairs(), 16);
    assert_eq!(r.vertex_classes.len(), 15);
    assert!(r.vertex_classes.iter().all(|v| v.vertices.len() == 4));
    let (new, trivial, defining, consequence) = census(&r);
    assert_eq!(new, 14);
    assert_eq!(defining, 2);
    assert!(consequence >= 3);
    assert_eq!(trivial + defining + consequence, 16);
    for n in [3, 5] {
        assert_eq!(r.class(n).unwrap().outcome, ClassOutcome::Trivial, "class {n}");
    }
    for n in [23, 26] {
        assert_eq!(r.class(n).unwrap().outcome, ClassOutcome::Defining, "class {n}");
    }
    let m = abelianize(&r.presentation);
    let mut rows: Vec<Vec<i64>> = m
        .data
        .iter()
        .map(|row| row.iter().map(|x| i64::try_from(x).unwrap()).collect())
        .collect();
    for row in &mut rows {
        if row[0] < 0 || (row[0] == 0 && row[1] < 0) {
            row.iter_mut().for_each(|x| *x = -*x);
        }
    }
    rows.sort();
    // (8,-7) and (-6,7) up to sign
    assert_eq!(rows, vec![vec![6, -7], vec![8, -7]]);
    assert_eq!(first_homology(&r.presentation).to_string(), "Z_14");
}

#[test]
fn three_torus_control() {
    let r = run("cube_torus");
    labels_match("cube_torus", &r);
    assert_eq!(r.classes.len(), 3);
    assert!(r.classes.iter().all(|c| c.size == 4));
    assert_eq!(r.vertex_classes.len(), 1);
    assert_eq!(first_homology(&r.presentation).to_string(), "Z^3");
}

#[test]
fn cobweb_z3() {
    let r = run("cobweb_z3_fig8");
    labels_match("cobweb_z3_fig8", &r);
    let big: Vec<_> = r.classes.iter().filter(|c| c.size != 3).collect();
    assert_eq!(big.len(), 1);
    assert_eq!(big[0].size, 6);
    let euler = r.vertex_classes.len() as i64 - r.classes.len() as i64 + r.face_pairs() as i64 - 1;
    assert_eq!(euler, 0);
}
