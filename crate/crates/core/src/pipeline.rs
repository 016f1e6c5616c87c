//! Fixture -> propagation -> verification -> homology, with optional metric checks.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixture::{MetricSpec, PairingFixture};
use crate::gram::{build_gram, classify_geometry, invert_gram, GeometryClass, SchlafliSymbol};
use crate::homology::{abelianize, first_homology, HomologyGroup};
use crate::orthoscheme::{
    archimedean_realize, classify_isometry, cube_cell, reversal, ArchimedeanKind, Flag, IsometryClass,
    MetricPolyhedron, Model, Side,
};
use crate::pairing::{propagate, verify_space_form, MetricData, PairingResult, VerificationReport};
use crate::polytope::{
    cobweb_vertex_keys, edge_key, extend_isomorphism, find_isomorphism, CobwebVertex, CombinatorialPolyhedron,
};

/// A fixture solid placed on a metric polyhedron.
pub struct Placement {
    pub metric: MetricPolyhedron,
    /// Fixture vertex -> metric vertex.
    pub vertex_map: Vec<usize>,
    /// Fixture face -> metric face.
    pub face_map: Vec<usize>,
    pub fixture_faces: Vec<String>,
}

impl Placement {
    fn new(p: &CombinatorialPolyhedron, metric: MetricPolyhedron, vertex_map: Vec<usize>) -> Result<Self> {
        let q = &metric.combinatorics;
        let sets: Vec<BTreeSet<usize>> = q.faces.iter().map(|f| f.cycle.iter().copied().collect()).collect();
        let face_map = p
            .faces
            .iter()
            .map(|f| {
                let img: BTreeSet<usize> = f.cycle.iter().map(|&v| vertex_map[v]).collect();
                sets.iter().position(|s| *s == img)
            })
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Polyhedron("vertex map does not carry faces to faces".into()))?;
        Ok(Placement {
            metric,
            vertex_map,
            face_map,
            fixture_faces: p.faces.iter().map(|f| f.id.clone()).collect(),
        })
    }

    pub fn dihedral(&self, p: &CombinatorialPolyhedron) -> BTreeMap<(usize, usize), f64> {
        p.edges()
            .into_iter()
            .map(|(u, v)| {
                let e = edge_key(self.vertex_map[u], self.vertex_map[v]);
                ((u, v), self.metric.edge_dihedral[&e])
            })
            .collect()
    }

    /// Matrix of the pairing `source -> target` with the given vertex map,
    /// landing on the neighbour across the target face.
    pub fn pairing_matrix(
        &self,
        p: &CombinatorialPolyhedron,
        source: &str,
        target: &str,
        vmap: &BTreeMap<usize, usize>,
    ) -> Result<DMatrix<f64>> {
        let fs = p.face_index(source).ok_or_else(|| Error::UnknownFace(source.into()))?;
        let ft = p.face_index(target).ok_or_else(|| Error::UnknownFace(target.into()))?;
        let c = &p.faces[fs].cycle;
        let (a, b) = (c[0], c[1]);
        let src = Flag {
            vertex: self.vertex_map[a],
            next: self.vertex_map[b],
            face: self.face_map[fs],
        };
        let dst = Flag {
            vertex: self.vertex_map[vmap[&a]],
            next: self.vertex_map[vmap[&b]],
            face: self.face_map[ft],
        };
        self.metric.isometry_from_flags(src, dst, Side::Across)
    }
}

/// Place the fixture football so that `anchor.vertex` is the base vertex and
/// the anchor faces are the base pentagon and hexagon.
pub fn place_football(p: &CombinatorialPolyhedron, spec: &MetricSpec) -> Result<Placement> {
    let metric = archimedean_realize(ArchimedeanKind::Football)?;
    let anchor = spec
        .anchor
        .as_ref()
        .ok_or_else(|| Error::Fixture("football metric needs an anchor".into()))?;
    let fp = p
        .face_index(&anchor.pentagon)
        .ok_or_else(|| Error::UnknownFace(anchor.pentagon.clone()))?;
    let fh = p
        .face_index(&anchor.hexagon)
        .ok_or_else(|| Error::UnknownFace(anchor.hexagon.clone()))?;
    let q = &metric.combinatorics;
    let (gp, gh) = (metric.base_faces[0], metric.base_faces[1]);
    let cyc = &q.faces[gp].cycle;
    let n = cyc.len();
    let hex: BTreeSet<usize> = q.faces[gh].cycle.iter().copied().collect();
    for k in 0..n {
        for dir in [1, n - 1] {
            let Some(m) = extend_isomorphism(p, q, fp, gp, cyc[k], cyc[(k + dir) % n]) else {
                continue;
            };
            let img: BTreeSet<usize> = p.faces[fh].cycle.iter().map(|&v| m[v]).collect();
            if m[anchor.vertex] == 0 && img == hex {
                return Placement::new(p, metric, m);
            }
        }
    }
    Err(Error::Fixture("anchor does not match the football".into()))
}

/// Any placement on the given metric solid.
pub fn place_any(p: &CombinatorialPolyhedron, metric: MetricPolyhedron) -> Result<Placement> {
    let m = find_isomorphism(p, &metric.combinatorics)
        .ok_or_else(|| Error::Polyhedron(format!("not isomorphic to {}", metric.combinatorics.name)))?;
    Placement::new(p, metric, m)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingIsometry {
    pub name: String,
    pub class: IsometryClass,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupergroupCheck {
    pub identity: String,
    pub residual: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub solid: String,
    /// Dihedral angles by edge type; absent when the solid has one type.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub edges_with_angles: usize,
    pub isometries: Vec<PairingIsometry>,
    /// Why pairing matrices are missing, if they are.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub isometry_note: Option<String>,
    pub supergroup: Vec<SupergroupCheck>,
}

pub struct MetricOutcome {
    pub data: MetricData,
    pub report: MetricReport,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn pairing_matrices(
    p: &CombinatorialPolyhedron,
    place: &Placement,
    result: &PairingResult,
) -> Result<BTreeMap<String, DMatrix<f64>>> {
    result
        .pairings
        .iter()
        .map(|q| {
            let vmap: BTreeMap<usize, usize> = q.vertex_map.iter().map(|e| (e[0], e[1])).collect();
            Ok((q.name.clone(), place.pairing_matrix(p, &q.source, &q.target, &vmap)?))
        })
        .collect()
}

/// Arrow edges of the cobweb solid: both ends of face-centre type F03.
pub fn cobweb_arrow_edges(p: &CombinatorialPolyhedron, z: i64) -> Result<Vec<(usize, usize)>> {
    let keys = cobweb_vertex_keys(z)?;
    Ok(p.edges()
        .into_iter()
        .filter(|e| keys[e.0].0 == CobwebVertex::F03 && keys[e.1].0 == CobwebVertex::F03)
        .collect())
}

/// Metric data for a fixture; `None` when the fixture has no metric block.
pub fn metric_for(
    fixture: &PairingFixture,
    p: &CombinatorialPolyhedron,
    result: &PairingResult,
) -> Result<Option<MetricOutcome>> {
    let Some(spec) = &fixture.metric else { return Ok(None) };
    let solid = spec.solid.as_str();
    if solid == "cobweb" {
        let z: i64 = p
            .name
            .strip_prefix("cobweb:")
            .and_then(|z| z.parse().ok())
            .ok_or_else(|| Error::Fixture("cobweb metric needs a cobweb:z solid".into()))?;
        let g = build_gram(&SchlafliSymbol::parse("6,6,6")?);
        let arrow = 2.0 * g.dihedral(1, 2);
        let dihedral: BTreeMap<_, _> = cobweb_arrow_edges(p, z)?.into_iter().map(|e| (e, arrow)).collect();
        let report = MetricReport {
            solid: solid.into(),
            alpha: None,
            beta: Some(arrow),
            edges_with_angles: dihedral.len(),
            isometries: Vec::new(),
            isometry_note: Some("only the arrow dihedral angle is determined".into()),
            supergroup: Vec::new(),
        };
        return Ok(Some(MetricOutcome {
            data: MetricData {
                dihedral,
                ..Default::default()
            },
            report,
        }));
    }
    let place = match solid {
        "football" => place_football(p, spec)?,
        "truncated_octahedron" => place_any(p, archimedean_realize(ArchimedeanKind::TruncatedOctahedron)?)?,
        "cube" => place_any(p, cube_cell()?)?,
        other => return Err(Error::UnknownSolid(other.into())),
    };
    let dihedral = place.dihedral(p);
    let projective = place.metric.model.projective_dedup();
    let (generators, note) = match pairing_matrices(p, &place, result) {
        Ok(g) => (g, None),
        Err(e) => (
            BTreeMap::new(),
            Some(format!("pairings are not isometries of the cell: {e}")),
        ),
    };
    let mut isometries = Vec::new();
    for (name, m) in &generators {
        isometries.push(PairingIsometry {
            name: name.clone(),
            class: classify_isometry(m, &place.metric.model)?,
        });
    }
    let supergroup = if solid == "football" {
        football_supergroup(&place, spec, &generators)?
    } else {
        Vec::new()
    };
    let report = MetricReport {
        solid: solid.into(),
        alpha: finite(place.metric.alpha),
        beta: finite(place.metric.beta),
        edges_with_angles: dihedral.len(),
        isometries,
        isometry_note: note,
        supergroup,
    };
    Ok(Some(MetricOutcome {
        data: MetricData {
            dihedral,
            generators,
            projective,
        },
        report,
    }))
}

fn product(ms: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let n = ms[0].nrows();
    ms.iter().fold(DMatrix::identity(n, n), |acc, m| acc * *m)
}

fn projective_residual(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax().min((a + b).amax())
}

/// `b = m3 m0 m2 m1 m0 m1` and `a^-1 = r m0 m1 m2 m1` with `r` the half-turn
/// of the simplex copy named in the fixture.
pub fn football_supergroup(
    place: &Placement,
    spec: &MetricSpec,
    gens: &BTreeMap<String, DMatrix<f64>>,
) -> Result<Vec<SupergroupCheck>> {
    let Model::Projective(ctx) = &place.metric.model else {
        return Err(Error::NotHyperbolic);
    };
    let m: Vec<DMatrix<f64>> = (0..4).map(|i| ctx.mirror(i)).collect();
    let mut out = Vec::new();
    let check = |identity: &str, lhs: &DMatrix<f64>, rhs: &DMatrix<f64>| {
        let residual = projective_residual(lhs, rhs);
        SupergroupCheck {
            identity: identity.into(),
            residual,
            ok: residual < 1e-7,
        }
    };
    if let Some(b) = gens.get("b") {
        out.push(check(
            "b = m3 m0 m2 m1 m0 m1",
            b,
            &product(&[&m[3], &m[0], &m[2], &m[1], &m[0], &m[1]]),
        ));
    }
    if let (Some(a), Some(h)) = (gens.get("a"), spec.half_turn.as_ref()) {
        let mp = &place.metric;
        let v = place.vertex_map[h.vertex];
        let f = place.face_map[mp_face(place, &h.hexagon).ok_or_else(|| Error::UnknownFace(h.hexagon.clone()))?];
        let c = mp
            .group
            .matrices
            .iter()
            .find(|c| mp.apply_to_vertex(0, c) == Some(v) && mp.apply_to_face(mp.base_faces[1], c) == Some(f))
            .ok_or_else(|| Error::Fixture("no cell symmetry reaches the half-turn copy".into()))?;
        let ci = c
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Degenerate("singular".into()))?;
        let r = product(&[&ci, &reversal(4), c]);
        let ainv = a
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Degenerate("singular".into()))?;
        out.push(check(
            "a^-1 = r m0 m1 m2 m1",
            &ainv,
            &product(&[&r, &m[0], &m[1], &m[2], &m[1]]),
        ));
    }
    Ok(out)
}

fn mp_face(place: &Placement, id: &str) -> Option<usize> {
    place.fixture_faces.iter().position(|f| f == id)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub symbol: String,
    pub geometry: GeometryClass,
    /// Inverse Gram matrix, absent when singular.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertex_matrix: Option<Vec<Vec<f64>>>,
    /// Angle defect of the (p, q) triangle for rank-three symbols.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub triangle_defect: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomologyReport {
    pub group: HomologyGroup,
    pub text: String,
    /// Exponent sums, one row per defining relator.
    pub abelianized: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCheck {
    pub ok: bool,
    pub mismatches: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub kind: String,
    pub message: String,
    pub trace: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: BTreeMap<String, serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classification: Option<ClassificationReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairing: Option<PairingResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<LabelCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homology: Option<HomologyReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorReport>,
    pub exit_status: i32,
}

impl RunReport {
    fn new(command: &str, inputs: BTreeMap<String, serde_json::Value>) -> Self {
        RunReport {
            command: command.into(),
            inputs,
            classification: None,
            pairing: None,
            labels: None,
            verification: None,
            metric: None,
            homology: None,
            error: None,
            exit_status: 0,
        }
    }

    /// Pretty JSON with sorted keys.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&serde_json::to_value(self)?)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

pub fn classify_symbol(symbol: &str, tol: f64) -> Result<ClassificationReport> {
    let s = SchlafliSymbol::parse(symbol)?;
    let g = build_gram(&s);
    let geometry = classify_geometry(&g, tol);
    let vertex_matrix = invert_gram(&g, tol).ok().map(|a| {
        let m = a.matrix();
        (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
    });
    let triangle_defect = match s.entries() {
        [p, q] => Some(crate::gram::triangle_defect(*p, *q)),
        _ => None,
    };
    Ok(ClassificationReport {
        symbol: s.to_string(),
        geometry,
        vertex_matrix,
        triangle_defect,
    })
}

pub fn run_classify(symbol: &str, tol: f64) -> Result<RunReport> {
    let inputs = BTreeMap::from([
        ("symbol".to_string(), serde_json::json!(symbol)),
        ("tol".to_string(), serde_json::json!(tol)),
    ]);
    let mut r = RunReport::new("classify", inputs);
    r.classification = Some(classify_symbol(symbol, tol)?);
    Ok(r)
}

#[derive(Clone, Debug)]
pub struct ManifoldOptions {
    pub metric: bool,
    /// Angle-sum tolerance.
    pub tol: f64,
    /// Override of the fixture's cells per edge.
    pub cells_per_edge: Option<usize>,
}

impl Default for ManifoldOptions {
    fn default() -> Self {
        ManifoldOptions {
            metric: false,
            tol: 1e-9,
            cells_per_edge: None,
        }
    }
}

fn check_labels(fixture: &PairingFixture, result: &PairingResult) -> Result<Option<LabelCheck>> {
    let expected = fixture.expected_labels()?;
    if expected.is_empty() {
        return Ok(None);
    }
    let mismatches: Vec<String> = expected
        .iter()
        .filter_map(|(face, w)| match result.face_labels.get(face) {
            Some(got) if got == w => None,
            Some(got) => Some(format!("{face}: expected {w}, got {got}")),
            None => Some(format!("{face}: no such face")),
        })
        .collect();
    Ok(Some(LabelCheck {
        ok: mismatches.is_empty(),
        mismatches,
    }))
}

/// Full pipeline. Input errors are returned as `Err`; derivation failures
/// produce a report with exit status 1.
pub fn run_manifold(fixture: &PairingFixture, opts: &ManifoldOptions) -> Result<RunReport> {
    let cells = opts.cells_per_edge.unwrap_or(fixture.cells_per_edge);
    let inputs = BTreeMap::from([
        ("fixture".to_string(), serde_json::json!(fixture.name)),
        ("metric".to_string(), serde_json::json!(opts.metric)),
        ("tol".to_string(), serde_json::json!(opts.tol)),
        ("cells_per_edge".to_string(), serde_json::json!(cells)),
    ]);
    let mut report = RunReport::new("manifold", inputs);
    let p = fixture.polyhedron.build()?;
    let result = match propagate(&p, &fixture.seeds, cells, &fixture.special_classes, &fixture.options()) {
        Ok(r) => r,
        Err(e) if e.is_verification_failure() => {
            let (kind, message, trace) = match e {
                Error::Contradiction { message, trace } => ("contradiction", message, trace),
                Error::Orphan { message, trace } => ("orphan", message, trace),
                _ => unreachable!(),
            };
            report.error = Some(ErrorReport {
                kind: kind.into(),
                message,
                trace,
            });
            report.exit_status = 1;
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    let metric = if opts.metric {
        if fixture.metric.is_none() {
            return Err(Error::Fixture(format!("{} has no metric block", fixture.name)));
        }
        metric_for(fixture, &p, &result)?
    } else {
        None
    };
    let verification = verify_space_form(&result, metric.as_ref().map(|m| &m.data), opts.tol);
    let labels = check_labels(fixture, &result)?;
    let group = first_homology(&result.presentation);
    let abelianized = abelianize(&result.presentation)
        .data
        .iter()
        .map(|row| row.iter().map(|x| i64::try_from(x).unwrap_or(i64::MAX)).collect())
        .collect();
    let supergroup_ok = metric.as_ref().is_none_or(|m| m.report.supergroup.iter().all(|c| c.ok));
    let ok = verification.ok && labels.as_ref().is_none_or(|l| l.ok) && supergroup_ok;
    report.homology = Some(HomologyReport {
        text: group.to_string(),
        group,
        abelianized,
    });
    report.verification = Some(verification);
    report.labels = labels;
    report.metric = metric.map(|m| m.report);
    report.pairing = Some(result);
    report.exit_status = if ok { 0 } else { 1 };
    Ok(report)
}
