//! Characteristic simplices, their reflection groups, orbit polyhedra
//! (the Archimedean cells), flag isometries and truncation of outer vertices.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::{build_gram, classify_geometry, GeometryKind, GramMatrix, SchlafliSymbol, DEFAULT_TOL};
use crate::polytope::{edge_key, null_vector, CombinatorialPolyhedron, Edge};
use crate::projmetric::{unit, ElementKind, PlaneForm, PointVector, SpaceContext};

pub const DEFAULT_CAP: usize = 10_000;
/// Entrywise tolerance for projective matrix comparison.
pub const MATRIX_TOL: f64 = 1e-8;

/// Projective (spherical or hyperbolic) orthoscheme.
#[derive(Clone, Debug)]
pub struct Orthoscheme {
    pub ctx: SpaceContext,
    /// `A_i = e_i`, scaled to `<A_i;A_i> = +-1`.
    pub vertices: Vec<PointVector>,
    /// `b^i = e_i`.
    pub planes: Vec<PlaneForm>,
}

impl Orthoscheme {
    pub fn new(ctx: SpaceContext) -> Self {
        let n = ctx.dim();
        let vertices = (0..n).map(|i| ctx.normalize_point(&unit(n, i))).collect();
        let planes = (0..n).map(|i| unit(n, i)).collect();
        Orthoscheme { ctx, vertices, planes }
    }

    /// `x . b^j >= 0` for every face.
    pub fn contains(&self, x: &PointVector) -> bool {
        let s = if x.sum() < 0.0 { -1.0 } else { 1.0 };
        self.planes.iter().all(|b| s * x.dot(b) >= -self.ctx.tol)
    }

    pub fn mirror(&self, i: usize) -> DMatrix<f64> {
        self.ctx.mirror(i)
    }
}

/// Euclidean orthoscheme in affine coordinates; faces are `n_i . x + h_i >= 0`
/// with unit inward normals.
#[derive(Clone, Debug)]
pub struct AffineOrthoscheme {
    pub gram: GramMatrix,
    pub vertices: Vec<DVector<f64>>,
    pub normals: Vec<DVector<f64>>,
    pub offsets: Vec<f64>,
}

impl AffineOrthoscheme {
    /// Normals from the positive part of the spectrum, every offset 1.
    pub fn from_gram(gram: &GramMatrix) -> Result<Self> {
        let n = gram.order();
        let eig = nalgebra::SymmetricEigen::new(gram.matrix().clone());
        let pos: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] > DEFAULT_TOL).collect();
        if pos.len() != n - 1 {
            return Err(Error::Degenerate("Gram matrix is not Euclidean".into()));
        }
        let normals: Vec<DVector<f64>> = (0..n)
            .map(|i| {
                DVector::from_iterator(
                    n - 1,
                    pos.iter()
                        .map(|&k| eig.eigenvectors[(i, k)] * eig.eigenvalues[k].sqrt()),
                )
            })
            .collect();
        let offsets = vec![1.0; n];
        Self::from_faces(gram.clone(), normals, offsets)
    }

    fn from_faces(gram: GramMatrix, normals: Vec<DVector<f64>>, offsets: Vec<f64>) -> Result<Self> {
        let n = normals.len();
        let mut vertices = Vec::new();
        for k in 0..n {
            let rows: Vec<usize> = (0..n).filter(|&i| i != k).collect();
            let m = DMatrix::from_fn(n - 1, n - 1, |r, c| normals[rows[r]][c]);
            let rhs = DVector::from_iterator(n - 1, rows.iter().map(|&i| -offsets[i]));
            let x = m
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::Degenerate("degenerate simplex".into()))?;
            vertices.push(x);
        }
        Ok(AffineOrthoscheme {
            gram,
            vertices,
            normals,
            offsets,
        })
    }

    /// The sphenoid with `A3 = 0`, `A1 = (4,0,0)`, `A0 = (2,2,2)`, `A2 = (2,-2,2)`.
    pub fn sphenoid() -> Self {
        let p = |x: f64, y: f64, z: f64| DVector::from_vec(vec![x, y, z]);
        let verts = [p(2.0, 2.0, 2.0), p(4.0, 0.0, 0.0), p(2.0, -2.0, 2.0), p(0.0, 0.0, 0.0)];
        let mut normals = Vec::new();
        let mut offsets = Vec::new();
        for i in 0..4 {
            let f: Vec<&DVector<f64>> = (0..4).filter(|&j| j != i).map(|j| &verts[j]).collect();
            let a = f[1] - f[0];
            let b = f[2] - f[0];
            let mut nrm = DVector::from_vec(vec![
                a[1] * b[2] - a[2] * b[1],
                a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0],
            ])
            .normalize();
            if nrm.dot(&(&verts[i] - f[0])) < 0.0 {
                nrm = -nrm;
            }
            offsets.push(-nrm.dot(f[0]));
            normals.push(nrm);
        }
        AffineOrthoscheme {
            gram: build_gram(&SchlafliSymbol::sphenoid()),
            vertices: verts.to_vec(),
            normals,
            offsets,
        }
    }

    pub fn dim(&self) -> usize {
        self.normals[0].len()
    }

    /// `n_i . n_j`, to compare with the Gram matrix.
    pub fn normal_gram(&self) -> DMatrix<f64> {
        let n = self.normals.len();
        DMatrix::from_fn(n, n, |i, j| self.normals[i].dot(&self.normals[j]))
    }

    /// Homogeneous row-action reflection in face `i`.
    pub fn mirror(&self, i: usize) -> DMatrix<f64> {
        affine_reflection(&self.normals[i], self.offsets[i])
    }

    pub fn homogeneous_vertex(&self, i: usize) -> DVector<f64> {
        homogeneous(&self.vertices[i])
    }
}

pub fn homogeneous(x: &DVector<f64>) -> DVector<f64> {
    let d = x.len();
    DVector::from_fn(d + 1, |i, _| if i < d { x[i] } else { 1.0 })
}

/// Reflection in `n . x + h = 0` (unit `n`) acting on rows `(x, 1)`.
pub fn affine_reflection(n: &DVector<f64>, h: f64) -> DMatrix<f64> {
    let d = n.len();
    DMatrix::from_fn(d + 1, d + 1, |i, j| match (i < d, j < d) {
        (true, true) => (if i == j { 1.0 } else { 0.0 }) - 2.0 * n[i] * n[j],
        (true, false) => 0.0,
        (false, true) => -2.0 * h * n[j],
        (false, false) => 1.0,
    })
}

#[derive(Clone, Debug)]
pub enum Realization {
    Projective(Orthoscheme),
    Affine(AffineOrthoscheme),
}

pub fn realize(gram: &GramMatrix) -> Result<Realization> {
    if gram.order() != 4 && gram.order() != 3 {
        return Err(Error::Symbol("Gram matrix must have order 3 or 4".into()));
    }
    match classify_geometry(gram, DEFAULT_TOL).kind {
        GeometryKind::Euclidean => Ok(Realization::Affine(AffineOrthoscheme::from_gram(gram)?)),
        _ => Ok(Realization::Projective(Orthoscheme::new(SpaceContext::new(
            gram.clone(),
        )?))),
    }
}

/// Where isometry matrices act.
#[derive(Clone, Debug)]
pub enum Model {
    Projective(SpaceContext),
    /// Homogeneous rows `(x, 1)` of Euclidean space.
    Affine(usize),
}

impl Model {
    pub fn dim(&self) -> usize {
        match self {
            Model::Projective(c) => c.dim(),
            Model::Affine(d) => d + 1,
        }
    }

    /// Projective models of hyperbolic space identify `M` with `-M`.
    pub fn projective_dedup(&self) -> bool {
        matches!(self, Model::Projective(c) if c.is_hyperbolic())
    }

    pub fn form_inner(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        match self {
            Model::Projective(c) => c.form_inner(u, v),
            Model::Affine(d) => (0..*d).map(|i| u[i] * v[i]).sum(),
        }
    }

    pub fn normalize_point(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            Model::Projective(c) => c.normalize_point(x),
            Model::Affine(d) => x / x[*d],
        }
    }

    pub fn isometry_residual(&self, m: &DMatrix<f64>) -> f64 {
        match self {
            Model::Projective(c) => c.isometry_residual(m),
            Model::Affine(d) => {
                let l = m.view((0, 0), (*d, *d)).into_owned();
                let orth = (&l * l.transpose() - DMatrix::identity(*d, *d)).amax();
                let col = (0..*d).map(|i| m[(i, *d)].abs()).fold(0.0, f64::max);
                orth.max(col).max((m[(*d, *d)] - 1.0).abs())
            }
        }
    }

    /// Interior dihedral angle between inward-oriented forms.
    pub fn dihedral(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        let c = self.form_inner(u, v) / (self.form_inner(u, u) * self.form_inner(v, v)).sqrt();
        PI - c.clamp(-1.0, 1.0).acos()
    }

    /// Unit normal direction of a form, as a point row for flag frames.
    fn pole_row(&self, u: &DVector<f64>) -> DVector<f64> {
        match self {
            Model::Projective(c) => c.pole(u) / c.form_inner(u, u).sqrt(),
            Model::Affine(d) => {
                let nrm: f64 = (0..*d).map(|i| u[i] * u[i]).sum::<f64>().sqrt();
                DVector::from_fn(d + 1, |i, _| if i < *d { u[i] / nrm } else { 0.0 })
            }
        }
    }

    /// Canonical representative of `+-M`.
    pub fn canonical(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            Model::Projective(c) if c.is_hyperbolic() => c.orient_isometry(m),
            _ => m.clone(),
        }
    }
}

fn matrix_key(m: &DMatrix<f64>, projective: bool) -> Vec<i64> {
    let mut s = 1.0;
    if projective {
        if let Some(x) = m.iter().find(|x| x.abs() > 1e-6) {
            s = x.signum();
        }
    }
    m.iter().map(|x| (s * x / 1e-6).round() as i64).collect()
}

fn point_key(x: &DVector<f64>) -> Vec<i64> {
    x.iter().map(|v| (v / 1e-6).round() as i64).collect()
}

/// `M1 ~ M2` entrywise, up to sign when `projective`.
pub fn matrices_equal(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64, projective: bool) -> bool {
    (a - b).amax() < tol || (projective && (a + b).amax() < tol)
}

#[derive(Clone, Debug, Serialize)]
pub struct GroupClosure {
    pub order: usize,
    pub words: Vec<String>,
    /// Row-major entries of each element.
    pub elements: Vec<Vec<f64>>,
    #[serde(skip)]
    pub matrices: Vec<DMatrix<f64>>,
}

impl GroupClosure {
    /// Breadth-first closure; the identity comes first and words are
    /// space-separated generator names.
    pub fn generate(generators: &[(String, DMatrix<f64>)], cap: usize, projective: bool) -> Result<Self> {
        let n = generators.first().map_or(1, |g| g.1.nrows());
        let id = DMatrix::identity(n, n);
        let mut seen: HashMap<Vec<i64>, usize> = HashMap::new();
        seen.insert(matrix_key(&id, projective), 0);
        let mut matrices = vec![id];
        let mut words = vec![String::new()];
        let mut queue = VecDeque::from([0usize]);
        while let Some(k) = queue.pop_front() {
            for (name, g) in generators {
                let m = &matrices[k] * g;
                let key = matrix_key(&m, projective);
                if seen.contains_key(&key) {
                    continue;
                }
                if matrices.len() >= cap {
                    return Err(Error::CapExceeded(cap));
                }
                seen.insert(key, matrices.len());
                let w = if words[k].is_empty() {
                    name.clone()
                } else {
                    format!("{} {}", words[k], name)
                };
                words.push(w);
                matrices.push(m);
                queue.push_back(matrices.len() - 1);
            }
        }
        Ok(GroupClosure {
            order: matrices.len(),
            words,
            elements: matrices
                .iter()
                .map(|m| m.transpose().iter().copied().collect())
                .collect(),
            matrices,
        })
    }
}

/// Closure of generators that must be isometries of `model`.
pub fn group_closure(
    model: &Model,
    generators: &[(String, DMatrix<f64>)],
    cap: usize,
    tol: f64,
) -> Result<GroupClosure> {
    for (_, g) in generators {
        let r = model.isometry_residual(g);
        if r > tol {
            return Err(Error::NotIsometry(r));
        }
    }
    GroupClosure::generate(generators, cap, model.projective_dedup())
}

/// Distinct images of `x`, in group order.
pub fn orbit_point(model: &Model, x: &DVector<f64>, group: &GroupClosure) -> Vec<DVector<f64>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for g in &group.matrices {
        let y = model.normalize_point(&(x.transpose() * g).transpose());
        if seen.insert(point_key(&y)) {
            out.push(y);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArchimedeanKind {
    /// {4,6,6}
    TruncatedOctahedron,
    /// {5,6,6}
    Football,
}

impl std::str::FromStr for ArchimedeanKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "{4,6,6}" | "4,6,6" | "truncated_octahedron" => Ok(ArchimedeanKind::TruncatedOctahedron),
            "{5,6,6}" | "5,6,6" | "football" | "truncated_icosahedron" => Ok(ArchimedeanKind::Football),
            _ => Err(Error::UnknownSolid(s.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// Symmetry of the polyhedron itself.
    Same,
    /// Onto the neighbouring copy across the target face.
    Across,
}

/// Vertex, an adjacent vertex along the face, and the face.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flag {
    pub vertex: usize,
    pub next: usize,
    pub face: usize,
}

#[derive(Clone, Debug)]
pub struct MetricPolyhedron {
    pub combinatorics: CombinatorialPolyhedron,
    pub model: Model,
    pub vertices: Vec<DVector<f64>>,
    /// Face forms, positive on the interior.
    pub planes: Vec<DVector<f64>>,
    pub center: DVector<f64>,
    pub edge_dihedral: BTreeMap<Edge, f64>,
    /// Dihedral angle at edges between faces of different sizes.
    pub alpha: f64,
    /// Dihedral angle at hexagon-hexagon edges.
    pub beta: f64,
    pub group: GroupClosure,
    pub generators: Vec<DMatrix<f64>>,
    /// Faces through vertex 0 spanned by each generating subgroup.
    pub base_faces: Vec<usize>,
    /// Distance between the equal-edge vertex point and the halving point.
    pub halving_discrepancy: Option<f64>,
}

fn face_prefix(size: usize) -> &'static str {
    match size {
        3 => "t",
        4 => "s",
        5 => "p",
        6 => "h",
        _ => "f",
    }
}

fn det4(rows: [&DVector<f64>; 4]) -> f64 {
    DMatrix::from_fn(4, 4, |i, j| rows[i][j]).determinant()
}

/// Orbit polyhedron of `base` under the group, with faces the orbits of
/// `base` under the subgroups spanned by `subgroups` (generator indices).
pub fn orbit_polyhedron(
    name: &str,
    model: Model,
    generators: Vec<DMatrix<f64>>,
    base: &DVector<f64>,
    center: DVector<f64>,
    subgroups: &[&[usize]],
) -> Result<MetricPolyhedron> {
    let named: Vec<(String, DMatrix<f64>)> = generators
        .iter()
        .enumerate()
        .map(|(i, g)| (format!("m{i}"), g.clone()))
        .collect();
    let group = group_closure(&model, &named, DEFAULT_CAP, 1e-9)?;
    let vertices = orbit_point(&model, base, &group);
    let index: HashMap<Vec<i64>, usize> = vertices.iter().enumerate().map(|(i, v)| (point_key(v), i)).collect();
    let image = |i: usize, g: &DMatrix<f64>| -> Result<usize> {
        let y = model.normalize_point(&(vertices[i].transpose() * g).transpose());
        index
            .get(&point_key(&y))
            .copied()
            .ok_or_else(|| Error::Degenerate("orbit not closed".into()))
    };
    let mut seeds = Vec::new();
    for sub in subgroups {
        let gens: Vec<(String, DMatrix<f64>)> = sub.iter().map(|&k| named[k].clone()).collect();
        let h = GroupClosure::generate(&gens, DEFAULT_CAP, model.projective_dedup())?;
        let pts: BTreeSet<usize> = h.matrices.iter().map(|g| image(0, g)).collect::<Result<_>>()?;
        seeds.push(pts);
    }
    let mut seen = BTreeSet::new();
    let mut face_sets: Vec<BTreeSet<usize>> = Vec::new();
    let mut base_faces = Vec::new();
    for g in &group.matrices {
        for s in &seeds {
            let img: BTreeSet<usize> = s.iter().map(|&i| image(i, g)).collect::<Result<_>>()?;
            if seen.insert(img.iter().copied().collect::<Vec<_>>()) {
                face_sets.push(img);
            }
        }
    }
    for s in &seeds {
        base_faces.push(face_sets.iter().position(|f| f == s).expect("seed face present"));
    }
    // order: smaller faces first, then discovery
    let mut order: Vec<usize> = (0..face_sets.len()).collect();
    order.sort_by_key(|&k| (face_sets[k].len(), k));
    let rank: HashMap<usize, usize> = order.iter().enumerate().map(|(r, &k)| (k, r)).collect();
    let base_faces = base_faces.iter().map(|k| rank[k]).collect();
    let mut counters: BTreeMap<usize, usize> = BTreeMap::new();
    let mut faces = Vec::new();
    let mut planes = Vec::new();
    for &k in &order {
        let set: Vec<usize> = face_sets[k].iter().copied().collect();
        let cycle = cyclic_order(&vertices, &set, &center);
        let rows: Vec<DVector<f64>> = cycle.iter().map(|&v| vertices[v].clone()).collect();
        let mut u = null_vector(&rows);
        if u.dot(&center) < 0.0 {
            u = -u;
        }
        for r in &rows {
            if r.dot(&u).abs() > 1e-9 * r.norm() * u.norm() {
                return Err(Error::Degenerate("face vertices are not coplanar".into()));
            }
        }
        let c = counters.entry(set.len()).or_insert(0);
        faces.push((format!("{}{}", face_prefix(set.len()), c), cycle));
        *c += 1;
        planes.push(u);
    }
    let combinatorics = CombinatorialPolyhedron::new(name, faces);
    let mut edge_dihedral = BTreeMap::new();
    let mut alphas = Vec::new();
    let mut betas = Vec::new();
    for (e, fs) in combinatorics.edge_faces() {
        let d = model.dihedral(&planes[fs[0]], &planes[fs[1]]);
        let sizes = (
            combinatorics.faces[fs[0]].cycle.len(),
            combinatorics.faces[fs[1]].cycle.len(),
        );
        if sizes.0 == sizes.1 {
            betas.push(d);
        } else {
            alphas.push(d);
        }
        edge_dihedral.insert(e, d);
    }
    let mean = |v: &[f64]| {
        if v.is_empty() {
            f64::NAN
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    for v in [&alphas, &betas] {
        if v.iter().any(|x| (x - mean(v)).abs() > 1e-9) {
            return Err(Error::Degenerate("dihedral angles differ within one edge type".into()));
        }
    }
    Ok(MetricPolyhedron {
        combinatorics,
        model,
        vertices,
        planes,
        center,
        edge_dihedral,
        alpha: mean(&alphas),
        beta: mean(&betas),
        group,
        generators,
        base_faces,
        halving_discrepancy: None,
    })
}

/// Cyclic order of coplanar points around their centroid, counter-clockwise seen from outside.
fn cyclic_order(points: &[DVector<f64>], set: &[usize], center: &DVector<f64>) -> Vec<usize> {
    let c: DVector<f64> = set.iter().map(|&i| &points[i]).sum();
    let flat: Vec<DVector<f64>> = set
        .iter()
        .map(|&i| &points[i] - &c * (points[i].dot(&c) / c.dot(&c)))
        .collect();
    let q1 = flat[0].normalize();
    let q2 = (&flat[1] - &q1 * flat[1].dot(&q1)).normalize();
    let mut idx: Vec<(f64, usize)> = set
        .iter()
        .zip(&flat)
        .map(|(&i, w)| (w.dot(&q2).atan2(w.dot(&q1)), i))
        .collect();
    idx.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut cyc: Vec<usize> = idx.into_iter().map(|(_, i)| i).collect();
    if det4([center, &points[cyc[0]], &points[cyc[1]], &points[cyc[2]]]) > 0.0 {
        cyc.reverse();
        cyc.rotate_right(1);
    }
    let m = cyc.iter().enumerate().min_by_key(|(_, &v)| v).map(|(k, _)| k).unwrap();
    cyc.rotate_left(m);
    cyc
}

impl MetricPolyhedron {
    fn face_centroid(&self, f: usize) -> DVector<f64> {
        let s: DVector<f64> = self.combinatorics.faces[f]
            .cycle
            .iter()
            .map(|&v| &self.vertices[v])
            .sum();
        self.model.normalize_point(&s)
    }

    fn frame(&self, flag: Flag, side: Side) -> Result<DMatrix<f64>> {
        let cyc = &self
            .combinatorics
            .faces
            .get(flag.face)
            .ok_or_else(|| Error::UnknownFace(flag.face.to_string()))?
            .cycle;
        let n = cyc.len();
        let i = cyc
            .iter()
            .position(|&v| v == flag.vertex)
            .ok_or_else(|| Error::Degenerate("flag vertex not on face".into()))?;
        if cyc[(i + 1) % n] != flag.next && cyc[(i + n - 1) % n] != flag.next {
            return Err(Error::Degenerate("flag edge not on face".into()));
        }
        let mut pole = self.model.pole_row(&self.planes[flag.face]);
        if side == Side::Across {
            pole = -pole;
        }
        let rows = [
            self.vertices[flag.vertex].clone(),
            self.vertices[flag.next].clone(),
            self.face_centroid(flag.face),
            pole,
        ];
        let d = self.model.dim();
        Ok(DMatrix::from_fn(d, d, |r, c| rows[r][c]))
    }

    /// The isometry taking the source flag to the target flag; with
    /// `Side::Across` the polyhedron lands on the far side of the target face.
    pub fn isometry_from_flags(&self, src: Flag, dst: Flag, side: Side) -> Result<DMatrix<f64>> {
        let x = self.frame(src, Side::Same)?;
        let y = self.frame(dst, side)?;
        let xi = x
            .try_inverse()
            .ok_or_else(|| Error::Degenerate("singular flag frame".into()))?;
        let m = xi * y;
        let r = self.model.isometry_residual(&m);
        if r > 1e-7 {
            return Err(Error::IncompatibleFlags(r));
        }
        Ok(m)
    }

    /// Vertex index of a point, if it is one.
    pub fn vertex_of(&self, x: &DVector<f64>) -> Option<usize> {
        let y = self.model.normalize_point(x);
        self.vertices.iter().position(|v| (v - &y).amax() < 1e-7)
    }

    /// Image of a vertex under a group element.
    pub fn apply_to_vertex(&self, v: usize, g: &DMatrix<f64>) -> Option<usize> {
        self.vertex_of(&(self.vertices[v].transpose() * g).transpose())
    }

    /// Face whose vertex set is the image of face `f`.
    pub fn apply_to_face(&self, f: usize, g: &DMatrix<f64>) -> Option<usize> {
        let img: BTreeSet<usize> = self.combinatorics.faces[f]
            .cycle
            .iter()
            .map(|&v| self.apply_to_vertex(v, g))
            .collect::<Option<_>>()?;
        self.combinatorics
            .faces
            .iter()
            .position(|h| h.cycle.iter().copied().collect::<BTreeSet<_>>() == img)
    }

    /// Orbits of undirected edges under the group.
    pub fn edge_orbits(&self) -> Vec<Vec<Edge>> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for e in self.combinatorics.edges() {
            if seen.contains(&e) {
                continue;
            }
            let mut orbit = BTreeSet::new();
            for g in &self.group.matrices {
                if let (Some(a), Some(b)) = (self.apply_to_vertex(e.0, g), self.apply_to_vertex(e.1, g)) {
                    orbit.insert(edge_key(a, b));
                }
            }
            seen.extend(orbit.iter().copied());
            out.push(orbit.into_iter().collect());
        }
        out
    }
}

/// Equal-edge vertex point on `b^0` between `A2` and `A1`, and the halving point.
pub fn football_vertex_point(ctx: &SpaceContext) -> Result<(PointVector, PointVector)> {
    let a1 = ctx.normalize_point(&unit(4, 1));
    let a2 = ctx.normalize_point(&unit(4, 2));
    let (m1, m2) = (ctx.mirror(1), ctx.mirror(2));
    let at = |t: f64| ctx.normalize_point(&(&a2 * (1.0 - t) + &a1 * t));
    let img = |x: &PointVector, m: &DMatrix<f64>| (x.transpose() * m).transpose();
    let f = |t: f64| -> Result<f64> {
        let x = at(t);
        Ok(ctx.distance(&x, &img(&x, &m1))? - ctx.distance(&x, &img(&x, &m2))?)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    if f(lo)? >= 0.0 || f(hi)? <= 0.0 {
        return Err(Error::NoConvergence("edge lengths do not bracket".into()));
    }
    for _ in 0..200 {
        if hi - lo < 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if hi - lo >= 1e-12 {
        return Err(Error::NoConvergence("bisection".into()));
    }
    Ok((at(0.5 * (lo + hi)), ctx.normalize_point(&(&a1 + &a2))))
}

pub fn context(symbol: &str) -> Result<SpaceContext> {
    SpaceContext::new(build_gram(&SchlafliSymbol::parse(symbol)?))
}

pub fn archimedean_realize(kind: ArchimedeanKind) -> Result<MetricPolyhedron> {
    match kind {
        ArchimedeanKind::Football => {
            let ctx = context("5,3,5")?;
            let (x, d2) = football_vertex_point(&ctx)?;
            let gens = (0..3).map(|i| ctx.mirror(i)).collect();
            let center = ctx.normalize_point(&unit(4, 3));
            let discrepancy = ctx.distance(&x, &d2)?;
            let mut p = orbit_polyhedron(
                "football",
                Model::Projective(ctx),
                gens,
                &x,
                center,
                &[&[0, 1], &[1, 2]],
            )?;
            p.halving_discrepancy = Some(discrepancy);
            Ok(p)
        }
        ArchimedeanKind::TruncatedOctahedron => {
            let s = AffineOrthoscheme::sphenoid();
            let gens = (0..3).map(|i| s.mirror(i)).collect();
            let centroid: DVector<f64> = s.vertices.iter().sum::<DVector<f64>>() / 4.0;
            orbit_polyhedron(
                "truncated_octahedron",
                Model::Affine(3),
                gens,
                &homogeneous(&centroid),
                s.homogeneous_vertex(3),
                &[&[0, 1], &[1, 2], &[0, 2]],
            )
        }
    }
}

/// The cube cell of the (4,3,4) tiling: orbit of `A0` around `A3`.
pub fn cube_cell() -> Result<MetricPolyhedron> {
    let s = AffineOrthoscheme::from_gram(&build_gram(&SchlafliSymbol::parse("4,3,4")?))?;
    let gens = (0..3).map(|i| s.mirror(i)).collect();
    orbit_polyhedron(
        "cube",
        Model::Affine(3),
        gens,
        &s.homogeneous_vertex(0),
        s.homogeneous_vertex(3),
        &[&[0, 1]],
    )
}

/// Coordinate reversal `0 <-> n-1, 1 <-> n-2, ...`: the half-turn of a
/// palindromic orthoscheme.
pub fn reversal(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| if i + j == n - 1 { 1.0 } else { 0.0 })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IsometryKind {
    Identity,
    Reflection,
    Rotation,
    HalfTurn,
    Translation,
    Screw,
    Other,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsometryClass {
    pub kind: IsometryKind,
    /// Rotation angle about the axis.
    pub angle: f64,
    /// Translation length along the axis.
    pub translation: f64,
}

pub fn classify_isometry(m: &DMatrix<f64>, model: &Model) -> Result<IsometryClass> {
    let r = model.isometry_residual(m);
    if r > 1e-7 {
        return Err(Error::NotIsometry(r));
    }
    let tol = 1e-7;
    let m = model.canonical(m);
    let n = m.nrows();
    let id = DMatrix::identity(n, n);
    let class = |kind, angle, translation| {
        Ok(IsometryClass {
            kind,
            angle,
            translation,
        })
    };
    if (&m - &id).amax() < tol {
        return class(IsometryKind::Identity, 0.0, 0.0);
    }
    match model {
        Model::Projective(ctx) if ctx.is_hyperbolic() && n == 4 => {
            if m.determinant() < 0.0 {
                let kind = if (&m * &m - &id).amax() < tol {
                    IsometryKind::Reflection
                } else {
                    IsometryKind::Other
                };
                return class(kind, 0.0, 0.0);
            }
            let ev = m.clone().complex_eigenvalues();
            let rho = ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let lambda = rho.ln();
            let tr = m.trace();
            if lambda < 1e-6 {
                let c = ((tr - 2.0) / 2.0).clamp(-1.0, 1.0);
                let angle = c.acos();
                if angle < 1e-6 {
                    return class(IsometryKind::Other, 0.0, 0.0);
                }
                let kind = if (angle - PI).abs() < 1e-6 {
                    IsometryKind::HalfTurn
                } else {
                    IsometryKind::Rotation
                };
                return class(kind, angle, 0.0);
            }
            let c = ((tr - 2.0 * lambda.cosh()) / 2.0).clamp(-1.0, 1.0);
            let angle = c.acos();
            if angle < 1e-6 {
                return class(IsometryKind::Translation, 0.0, ctx.k * lambda);
            }
            class(IsometryKind::Screw, angle, ctx.k * lambda)
        }
        Model::Affine(d) => {
            let d = *d;
            let l = m.view((0, 0), (d, d)).into_owned();
            let t = DVector::from_fn(d, |j, _| m[(d, j)]);
            if l.determinant() < 0.0 {
                let kind = if (&m * &m - &id).amax() < tol {
                    IsometryKind::Reflection
                } else {
                    IsometryKind::Other
                };
                return class(kind, 0.0, 0.0);
            }
            if d != 3 {
                return class(IsometryKind::Other, 0.0, 0.0);
            }
            let angle = ((l.trace() - 1.0) / 2.0).clamp(-1.0, 1.0).acos();
            if angle < 1e-6 {
                return class(IsometryKind::Translation, 0.0, t.norm());
            }
            let axis = null_vector(&[
                (&l - DMatrix::identity(3, 3)).row(0).transpose(),
                (&l - DMatrix::identity(3, 3)).row(1).transpose(),
                (&l - DMatrix::identity(3, 3)).row(2).transpose(),
            ]);
            let along = t.dot(&axis).abs();
            let kind = if along > 1e-7 {
                IsometryKind::Screw
            } else if (angle - PI).abs() < 1e-6 {
                IsometryKind::HalfTurn
            } else {
                IsometryKind::Rotation
            };
            class(kind, angle, along)
        }
        Model::Projective(_) => {
            if m.determinant() < 0.0 {
                let kind = if (&m * &m - &id).amax() < tol {
                    IsometryKind::Reflection
                } else {
                    IsometryKind::Other
                };
                return class(kind, 0.0, 0.0);
            }
            if n == 3 {
                let angle = ((m.trace() - 1.0) / 2.0).clamp(-1.0, 1.0).acos();
                let kind = if (angle - PI).abs() < 1e-6 {
                    IsometryKind::HalfTurn
                } else {
                    IsometryKind::Rotation
                };
                return class(kind, angle, 0.0);
            }
            class(IsometryKind::Other, 0.0, 0.0)
        }
    }
}

#[derive(Clone, Debug)]
pub struct TruncatedOrthoscheme {
    pub base: Orthoscheme,
    /// `(i, polar of A_i)` for every outer vertex.
    pub polar_planes: Vec<(usize, PlaneForm)>,
    pub vertices: Vec<PointVector>,
    /// `A_j` for kept vertices, `A_i|A_j` for the cut on edge `A_iA_j` near outer `A_i`.
    pub vertex_labels: Vec<String>,
}

pub fn truncate(o: &Orthoscheme) -> Result<TruncatedOrthoscheme> {
    let ctx = &o.ctx;
    let n = ctx.dim();
    let kinds: Vec<ElementKind> = (0..n).map(|i| ctx.classify_point(&unit(n, i))).collect::<Result<_>>()?;
    let outer: Vec<usize> = (0..n).filter(|&i| kinds[i] == ElementKind::Outer).collect();
    if outer.is_empty() {
        return Err(Error::NothingToTruncate);
    }
    let a = ctx.vertex_matrix();
    let mut vertices = Vec::new();
    let mut labels = Vec::new();
    for j in 0..n {
        if kinds[j] != ElementKind::Outer {
            vertices.push(ctx.normalize_point(&unit(n, j)));
            labels.push(format!("A{j}"));
        }
    }
    for &i in &outer {
        for j in (0..n).filter(|&j| j != i) {
            // on line A_i A_j and incident to the polar of A_i
            let p = unit(n, j) * a.entry(i, i) - unit(n, i) * a.entry(i, j);
            vertices.push(ctx.normalize_point(&p));
            labels.push(format!("A{i}|A{j}"));
        }
    }
    for (v, l) in vertices.iter().zip(&labels) {
        if ctx.classify_point(v)? != ElementKind::Proper {
            return Err(Error::NotProper(format!("truncated vertex {l}")));
        }
    }
    Ok(TruncatedOrthoscheme {
        base: o.clone(),
        polar_planes: outer.iter().map(|&i| (i, ctx.polar(&unit(n, i)))).collect(),
        vertices,
        vertex_labels: labels,
    })
}
