//! Acceptance criteria 1-11, one PASS/FAIL line each.
//!
//! Run with `cargo test -p spaceform --test acceptance -- --nocapture` to see the lines.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use spaceform::fixture::load_fixture;
use spaceform::gram::{
    build_gram, classify_geometry, cobweb_admissible, triangle_defect, GeometryKind, GramMatrix, SchlafliSymbol,
    DEFAULT_TOL,
};
use spaceform::homology::{first_homology, homology_of_matrix, IntegerMatrix};
use spaceform::orthoscheme::{
    archimedean_realize, context, group_closure, AffineOrthoscheme, ArchimedeanKind, Model, DEFAULT_CAP,
};
use spaceform::pairing::{ClassOutcome, GroupWord};
use spaceform::pipeline::{run_manifold, ManifoldOptions, RunReport};
use spaceform::polytope::cobweb_solid;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let t = start.elapsed();
    if t > limit {
        Err(format!("took {t:?}, limit {limit:?}"))
    } else {
        Ok(())
    }
}

/// Seeded runner; failures are reported inline rather than persisted.
fn seeded(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn gram(s: &str) -> GramMatrix {
    build_gram(&SchlafliSymbol::parse(s).unwrap())
}

fn manifold(name: &str, metric: bool) -> Result<RunReport, String> {
    let f = load_fixture(name).map_err(|e| e.to_string())?;
    run_manifold(
        &f,
        &ManifoldOptions {
            metric,
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())
}

fn c1() -> Check {
    let start = Instant::now();
    let b43 = classify_geometry(&gram("4,3"), DEFAULT_TOL).determinant;
    ensure!((b43 - 0.25).abs() < 1e-12, "(4,3) B = {b43}");
    let b53 = classify_geometry(&gram("5,3"), DEFAULT_TOL).determinant;
    ensure!((b53 - (3.0 - 5f64.sqrt()) / 8.0).abs() < 1e-9, "(5,3) B = {b53}");
    ensure!(format!("{b53:.5}") == "0.09549", "(5,3) printed {b53:.5}");
    for s in ["3,6", "6,3", "4,4"] {
        let k = classify_geometry(&gram(s), DEFAULT_TOL).kind;
        ensure!(k == GeometryKind::Euclidean, "{s} is {k:?}");
    }
    for s in ["3,7", "7,3", "4,5", "5,4"] {
        let k = classify_geometry(&gram(s), DEFAULT_TOL).kind;
        ensure!(k.is_hyperbolic(), "{s} is {k:?}");
    }
    within(Duration::from_secs(1), start)?;
    Ok(format!("B(4,3) = {b43}, B(5,3) = {b53:.5}"))
}

/// Pivots and unit lower-triangular factor of a symmetric matrix, by
/// completing squares in order.
fn completing_squares(b: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = b.nrows();
    let mut a = b.clone();
    let mut l = DMatrix::identity(n, n);
    let mut d = vec![0.0; n];
    for k in 0..n {
        d[k] = a[(k, k)];
        if d[k].abs() < 1e-12 {
            continue;
        }
        for i in k + 1..n {
            l[(i, k)] = a[(i, k)] / d[k];
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[(i, j)] -= l[(i, k)] * d[k] * l[(j, k)];
            }
        }
    }
    (d, l)
}

fn c2() -> Check {
    let g434 = classify_geometry(&gram("4,3,4"), DEFAULT_TOL);
    ensure!(
        g434.signature.to_string() == "(+,+,+,0)",
        "(4,3,4) signature {}",
        g434.signature
    );
    let (d, l) = completing_squares(gram("4,3,4").matrix());
    let pos = d.iter().filter(|x| **x > 1e-12).count();
    let zero = d.iter().filter(|x| x.abs() <= 1e-12).count();
    ensure!(pos == 3 && zero == 1, "(4,3,4) pivots {d:?}");
    let sph = AffineOrthoscheme::sphenoid().gram;
    let b434 = gram("4,3,4");
    let mut runner = seeded(1000);
    let vecs = proptest::collection::vec(-10.0f64..10.0, 4);
    runner
        .run(&vecs, |w| {
            let x = DVector::from_vec(w.clone());
            // the sphenoid's three squares
            let q = (x.transpose() * sph.matrix() * &x)[(0, 0)];
            let squares = (w[0] - w[1] / 2.0 - w[3] / 2.0).powi(2)
                + 0.75 * (w[1] - 2.0 / 3.0 * w[2] - w[3] / 3.0).powi(2)
                + 2.0 / 3.0 * (w[2] - w[3]).powi(2);
            prop_assert!((q - squares).abs() < 1e-9 * (1.0 + q.abs()));
            // (4,3,4) as a sum of its squares
            let q = (x.transpose() * b434.matrix() * &x)[(0, 0)];
            let y = l.transpose() * &x;
            let s: f64 = (0..4).map(|k| d[k] * y[k] * y[k]).sum();
            prop_assert!((q - s).abs() < 1e-9 * (1.0 + q.abs()));
            Ok(())
        })
        .map_err(|e| format!("quadratic form: {e}"))?;
    let g535 = classify_geometry(&gram("5,3,5"), DEFAULT_TOL);
    ensure!(
        g535.signature.to_string() == "(+,+,+,-)",
        "(5,3,5) signature {}",
        g535.signature
    );
    ensure!(
        g535.minors[..3].iter().all(|m| *m > 0.0),
        "(5,3,5) minors {:?}",
        g535.minors
    );
    ensure!(g535.determinant < 0.0, "(5,3,5) det {}", g535.determinant);
    Ok(format!(
        "(4,3,4) pivots {:?}; sphenoid squares hold on 1000 vectors; (5,3,5) {}",
        d, g535.signature
    ))
}

fn c3() -> Check {
    let d37 = triangle_defect(3, 7);
    ensure!((d37 - PI / 42.0).abs() < 1e-12, "(3,7) defect {d37}");
    let d43 = triangle_defect(4, 3);
    ensure!((d43 + PI / 12.0).abs() < 1e-12, "(4,3) defect {d43}");
    Ok(format!("(3,7) {d37:.6} = pi/42, (4,3) {d43:.6} = -pi/12"))
}

fn c4() -> Check {
    let start = Instant::now();
    let mirrors = |s: &str, idx: &[usize]| {
        let ctx = context(s).unwrap();
        let gens: Vec<_> = idx.iter().map(|&i| (format!("m{i}"), ctx.mirror(i))).collect();
        (Model::Projective(ctx), gens)
    };
    let order = |model: &Model, gens: &[(String, DMatrix<f64>)]| {
        group_closure(model, gens, DEFAULT_CAP, 1e-9)
            .map(|g| g.order)
            .map_err(|e| e.to_string())
    };
    let (m, g) = mirrors("5,3,5", &[0, 1]);
    let o1 = order(&m, &g)?;
    let (m, g) = mirrors("5,3,5", &[0, 1, 2]);
    let o2 = order(&m, &g)?;
    let s = AffineOrthoscheme::sphenoid();
    let gens: Vec<_> = (0..3).map(|i| (format!("m{i}"), s.mirror(i))).collect();
    let o3 = order(&Model::Affine(3), &gens)?;
    let (m, g) = mirrors("4,3", &[0, 1, 2]);
    let o4 = order(&m, &g)?;
    ensure!((o1, o2, o3, o4) == (10, 120, 24, 48), "orders {o1}, {o2}, {o3}, {o4}");
    within(Duration::from_secs(5), start)?;
    Ok(format!("orders {o1}, {o2}, {o3}, {o4}"))
}

fn c5() -> Check {
    let f = archimedean_realize(ArchimedeanKind::Football).map_err(|e| e.to_string())?;
    ensure!(f.vertices.len() == 60, "{} vertices", f.vertices.len());
    let census = f.combinatorics.face_census();
    ensure!(
        census.get(&5) == Some(&12) && census.get(&6) == Some(&20),
        "faces {census:?}"
    );
    let closure = 2.0 * f.alpha + f.beta - 2.0 * PI;
    ensure!(closure.abs() < 1e-9, "2 alpha + beta - 2 pi = {closure}");
    let t = archimedean_realize(ArchimedeanKind::TruncatedOctahedron).map_err(|e| e.to_string())?;
    // coordinate oracle: permutations of (0, +-1, +-2); square normal e1, hexagon normal (1,1,1)
    let sq = DVector::<f64>::from_vec(vec![1.0, 0.0, 0.0]);
    let hex = DVector::<f64>::from_vec(vec![1.0, 1.0, 1.0]).normalize();
    let hex2 = DVector::<f64>::from_vec(vec![1.0, 1.0, -1.0]).normalize();
    let alpha = PI - f64::acos(sq.dot(&hex));
    let beta = PI - f64::acos(hex.dot(&hex2));
    ensure!((t.alpha - alpha).abs() < 1e-9, "square-hexagon {} vs {alpha}", t.alpha);
    ensure!((t.beta - beta).abs() < 1e-9, "hexagon-hexagon {} vs {beta}", t.beta);
    ensure!((alpha - (-1.0 / 3f64.sqrt()).acos()).abs() < 1e-12, "oracle alpha");
    ensure!((beta - (-1.0f64 / 3.0).acos()).abs() < 1e-12, "oracle beta");
    Ok(format!(
        "alpha {:.9}, beta {:.9}, 2a+b-2pi {closure:.1e}",
        f.alpha, f.beta
    ))
}

fn c6() -> Check {
    let start = Instant::now();
    let r = manifold("trunc_oct_fig4", false)?;
    let p = r.pairing.as_ref().ok_or("no pairing")?;
    ensure!(
        p.classes.len() == 12 && p.classes.iter().all(|c| c.size == 3),
        "classes"
    );
    ensure!(
        p.vertex_classes.len() == 6 && p.vertex_classes.iter().all(|v| v.vertices.len() == 4),
        "vertex classes"
    );
    let table: BTreeSet<Vec<usize>> = p.vertex_classes.iter().map(|v| v.edge_classes.clone()).collect();
    let expected: BTreeSet<Vec<usize>> = [
        vec![1, 2, 4, 6],
        vec![1, 3, 5, 7],
        vec![4, 8, 11, 12],
        vec![5, 9, 10, 12],
        vec![2, 7, 8, 9],
        vec![3, 6, 10, 11],
    ]
    .into();
    ensure!(table == expected, "incidence {table:?}");
    for w in ["v^2 u v^2 u^-1", "u^2 v^-1 u^2 v"] {
        let w = GroupWord::parse(w).unwrap();
        ensure!(
            p.presentation.relators.iter().any(|r| r.is_cyclic_conjugate(&w)),
            "missing relator {w}"
        );
    }
    ensure!(
        p.presentation.relators.len() == 2,
        "{} relators",
        p.presentation.relators.len()
    );
    let h = first_homology(&p.presentation).to_string();
    ensure!(h == "Z_4 ⊕ Z_4", "H1 = {h}");
    within(Duration::from_secs(1), start)?;
    Ok(format!("12 classes, 6 vertex classes, H1 = {h}"))
}

fn c7() -> Check {
    let start = Instant::now();
    let r = manifold("football_fig5", false)?;
    let p = r.pairing.as_ref().ok_or("no pairing")?;
    ensure!(
        p.classes.len() == 30 && p.classes.iter().all(|c| c.size == 3),
        "classes"
    );
    let count = |f: fn(&ClassOutcome) -> bool| p.classes.iter().filter(|c| f(&c.outcome)).count();
    let defining = count(|o| *o == ClassOutcome::Defining);
    let consequence = count(|o| matches!(o, ClassOutcome::Consequence { .. }));
    let trivial = count(|o| *o == ClassOutcome::Trivial);
    ensure!(defining == 2, "{defining} defining");
    ensure!(consequence >= 3, "{consequence} consequences");
    for n in [3, 5] {
        ensure!(
            p.class(n).map(|c| &c.outcome) == Some(&ClassOutcome::Trivial),
            "class {n} not trivial"
        );
    }
    ensure!(
        p.vertex_classes.len() == 15 && p.vertex_classes.iter().all(|v| v.vertices.len() == 4),
        "vertex classes"
    );
    let v = r.verification.as_ref().ok_or("no verification")?;
    ensure!(v.euler == 0, "Euler {}", v.euler);
    let mut rows: Vec<(i64, i64)> = r
        .homology
        .as_ref()
        .unwrap()
        .abelianized
        .iter()
        .map(|x| (x[0], x[1]))
        .collect();
    for row in &mut rows {
        if row.0 < 0 {
            *row = (-row.0, -row.1);
        }
    }
    rows.sort();
    ensure!(rows == vec![(6, -7), (8, -7)], "exponent sums {rows:?}");
    let h = &r.homology.as_ref().unwrap().text;
    ensure!(h == "Z_14", "H1 = {h}");
    within(Duration::from_secs(2), start)?;
    Ok(format!(
        "30 classes: {trivial} trivial, {defining} defining, {consequence} consequences; H1 = {h}"
    ))
}

fn c8() -> Check {
    let r = manifold("football_fig5", true)?;
    let m = r.metric.as_ref().ok_or("no metric report")?;
    ensure!(m.supergroup.len() == 2, "{} identities checked", m.supergroup.len());
    for c in &m.supergroup {
        ensure!(c.ok, "{} residual {:e}", c.identity, c.residual);
    }
    let v = r.verification.as_ref().unwrap();
    ensure!(v.relations_metric_ok == Some(true), "cycle words are not the identity");
    let worst = m.supergroup.iter().map(|c| c.residual).fold(0.0, f64::max);
    Ok(format!("both identities hold, max residual {worst:.1e}"))
}

fn c9() -> Check {
    let r = manifold("cube_torus", true)?;
    ensure!(r.exit_status == 0, "exit {}", r.exit_status);
    let v = r.verification.as_ref().unwrap();
    ensure!(v.ok, "verification failed");
    let h = &r.homology.as_ref().unwrap().text;
    ensure!(h == "Z^3", "H1 = {h}");
    Ok(format!("H1 = {h}"))
}

fn c10() -> Check {
    let start = Instant::now();
    let a = cobweb_admissible(6, 6, 6);
    ensure!(a.admissible, "(6,6,6) not admissible: {a:?}");
    for z in [3i64, 5, 7] {
        let n = cobweb_solid(z).map_err(|e| e.to_string())?.faces.len() as i64;
        ensure!(n == 2 + 2 * z + 8 * z, "Cw({z}) has {n} faces");
    }
    let r = manifold("cobweb_z3_fig8", true)?;
    let p = r.pairing.as_ref().ok_or("no pairing")?;
    let big: Vec<_> = p.classes.iter().filter(|c| c.size != 3).collect();
    ensure!(
        big.len() == 1 && big[0].size == 6,
        "non-triangular classes {:?}",
        big.iter().map(|c| c.size).collect::<Vec<_>>()
    );
    let v = r.verification.as_ref().unwrap();
    let arrow = v
        .angle_sums
        .iter()
        .find(|s| s.class == big[0].number)
        .ok_or("no arrow angle sum")?;
    ensure!(arrow.ok, "arrow angle sum {}", arrow.sum);
    ensure!(v.euler == 0, "Euler {}", v.euler);
    within(Duration::from_secs(5), start)?;
    Ok(format!(
        "arrow class {} of 6 edges, angle sum {:.12}, Euler 0",
        big[0].number, arrow.sum
    ))
}

fn c11() -> Check {
    // reflection isometry
    let mut runner = seeded(1000);
    let symbols = ["5,3,5", "4,3,5", "3,5,3", "4,3", "3,3,3"];
    let strat = (0..symbols.len(), proptest::collection::vec(-1.0f64..1.0, 4));
    runner
        .run(&strat, |(k, u)| {
            let ctx = context(symbols[k]).unwrap();
            let u = DVector::from_iterator(ctx.dim(), u.into_iter().take(ctx.dim()));
            prop_assume!(ctx.form_inner(&u, &u) > 1e-3);
            let m = ctx.reflection_matrix(&u).unwrap();
            prop_assert!(ctx.isometry_residual(&m) < 1e-10);
            let n = m.nrows();
            prop_assert!((&m * &m - DMatrix::identity(n, n)).amax() < 1e-10);
            Ok(())
        })
        .map_err(|e| format!("reflections: {e}"))?;
    // SNF invariance under row operations
    for name in ["football_fig5", "trunc_oct_fig4", "cube_torus", "cobweb_z3_fig8"] {
        let r = manifold(name, false)?;
        let rows = r.homology.as_ref().unwrap().abelianized.clone();
        let cols = r.pairing.as_ref().unwrap().generators.len();
        let h0 = homology_of_matrix(&IntegerMatrix::from_i64(&rows, cols));
        let mut runner = seeded(100);
        let ops = proptest::collection::vec((0usize..3, 0usize..64, 0usize..64, -3i64..=3), 1..8);
        runner
            .run(&ops, |ops| {
                let mut m = rows.clone();
                let n = m.len();
                if n == 0 {
                    return Ok(());
                }
                for (op, a, b, k) in ops {
                    let (a, b) = (a % n, b % n);
                    match op {
                        0 => m.swap(a, b),
                        1 => m[a].iter_mut().for_each(|x| *x = -*x),
                        _ if a != b => {
                            let rb = m[b].clone();
                            m[a].iter_mut().zip(rb).for_each(|(x, y)| *x += k * y);
                        }
                        _ => {}
                    }
                }
                prop_assert_eq!(homology_of_matrix(&IntegerMatrix::from_i64(&m, cols)), h0.clone());
                Ok(())
            })
            .map_err(|e| format!("{name} SNF: {e}"))?;
    }
    Ok("1000 reflections isometric and involutive; SNF invariant over 4 x 100 shuffles".into())
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("classification table", c1),
        ("signatures and completed squares", c2),
        ("triangle defect", c3),
        ("group orders by closure", c4),
        ("metric football and Euclidean cross-check", c5),
        ("truncated-octahedron manifold", c6),
        ("football manifold", c7),
        ("supergroup identities", c8),
        ("3-torus control", c9),
        ("cobweb", c10),
        ("property suites", c11),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = f();
        let t = start.elapsed();
        match &out {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} ({t:.2?})", i + 1),
            Err(why) => {
                println!("criterion {:>2} FAIL  {name}: {why} ({t:.2?})", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
