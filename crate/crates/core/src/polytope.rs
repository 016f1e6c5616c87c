//! Oriented polyhedral 2-spheres: the catalog of fundamental solids, the
//! cobweb solids, validation and Schlegel layouts.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use nalgebra::{DMatrix, DVector, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Face {
    pub id: String,
    /// Counter-clockwise seen from outside.
    pub cycle: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CombinatorialPolyhedron {
    pub name: String,
    pub vertices: Vec<usize>,
    pub faces: Vec<Face>,
    #[serde(default)]
    pub labels: BTreeMap<String, String>,
}

pub type Edge = (usize, usize);

pub fn edge_key(u: usize, v: usize) -> Edge {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

fn cycle_edges(c: &[usize]) -> impl Iterator<Item = (usize, usize)> + '_ {
    (0..c.len()).map(move |i| (c[i], c[(i + 1) % c.len()]))
}

impl CombinatorialPolyhedron {
    pub fn new(name: &str, faces: Vec<(String, Vec<usize>)>) -> Self {
        let n = faces.iter().flat_map(|f| f.1.iter()).max().map_or(0, |m| m + 1);
        CombinatorialPolyhedron {
            name: name.to_string(),
            vertices: (0..n).collect(),
            faces: faces.into_iter().map(|(id, cycle)| Face { id, cycle }).collect(),
            labels: BTreeMap::new(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_index(&self, id: &str) -> Option<usize> {
        self.faces.iter().position(|f| f.id == id)
    }

    pub fn face(&self, id: &str) -> Result<&Face> {
        self.faces
            .iter()
            .find(|f| f.id == id)
            .ok_or_else(|| Error::UnknownFace(id.to_string()))
    }

    /// Directed edge -> index of the face traversing it.
    pub fn directed_edges(&self) -> HashMap<Edge, usize> {
        let mut m = HashMap::new();
        for (k, f) in self.faces.iter().enumerate() {
            for e in cycle_edges(&f.cycle) {
                m.entry(e).or_insert(k);
            }
        }
        m
    }

    /// Undirected edges with their incident faces, sorted.
    pub fn edge_faces(&self) -> BTreeMap<Edge, Vec<usize>> {
        let mut m: BTreeMap<Edge, Vec<usize>> = BTreeMap::new();
        for (k, f) in self.faces.iter().enumerate() {
            for (u, v) in cycle_edges(&f.cycle) {
                m.entry(edge_key(u, v)).or_default().push(k);
            }
        }
        m
    }

    pub fn edges(&self) -> Vec<Edge> {
        self.edge_faces().into_keys().collect()
    }

    pub fn neighbors(&self) -> Vec<BTreeSet<usize>> {
        let mut nb = vec![BTreeSet::new(); self.vertices.len()];
        for (u, v) in self.edges() {
            if u < nb.len() && v < nb.len() {
                nb[u].insert(v);
                nb[v].insert(u);
            }
        }
        nb
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges().len() as i64 + self.faces.len() as i64
    }

    /// Face sizes -> count.
    pub fn face_census(&self) -> BTreeMap<usize, usize> {
        let mut m = BTreeMap::new();
        for f in &self.faces {
            *m.entry(f.cycle.len()).or_insert(0) += 1;
        }
        m
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let n = self.vertices.len();
        if self.vertices.iter().enumerate().any(|(i, &v)| i != v) {
            violations.push("vertex ids must be 0..V-1 in order".to_string());
        }
        let mut ids = BTreeSet::new();
        for f in &self.faces {
            if !ids.insert(&f.id) {
                violations.push(format!("duplicate face id {}", f.id));
            }
            if f.cycle.len() < 3 {
                violations.push(format!("face {} has fewer than 3 vertices", f.id));
            }
            if f.cycle.iter().any(|&v| v >= n) {
                violations.push(format!("face {} uses an unknown vertex", f.id));
            }
            if f.cycle.iter().collect::<BTreeSet<_>>().len() != f.cycle.len() {
                violations.push(format!("face {} repeats a vertex", f.id));
            }
        }
        let mut directed: HashMap<Edge, Vec<usize>> = HashMap::new();
        for (k, f) in self.faces.iter().enumerate() {
            for e in cycle_edges(&f.cycle) {
                directed.entry(e).or_default().push(k);
            }
        }
        for ((u, v), fs) in self.edge_faces() {
            if fs.len() != 2 {
                violations.push(format!(
                    "edge ({u},{v}) lies in {} faces (non-manifold or open)",
                    fs.len()
                ));
            } else {
                let fw = directed.get(&(u, v)).map_or(0, |x| x.len());
                let bw = directed.get(&(v, u)).map_or(0, |x| x.len());
                if fw != 1 || bw != 1 {
                    violations.push(format!(
                        "edge ({u},{v}) is traversed twice in the same direction (orientability)"
                    ));
                }
            }
        }
        let nb = self.neighbors();
        let used: BTreeSet<usize> = self.faces.iter().flat_map(|f| f.cycle.iter().copied()).collect();
        if used.len() != n {
            violations.push(format!("{} vertices lie on no face", n - used.len()));
        }
        if n > 0 {
            let mut seen = vec![false; n];
            let mut q = VecDeque::from([0]);
            seen[0] = true;
            while let Some(v) = q.pop_front() {
                for &w in &nb[v] {
                    if !seen[w] {
                        seen[w] = true;
                        q.push_back(w);
                    }
                }
            }
            if seen.iter().any(|s| !s) {
                violations.push("not connected".to_string());
            }
        }
        let euler = self.euler_characteristic();
        if euler != 2 {
            violations.push(format!("Euler characteristic {euler}, expected 2"));
        }
        ValidationReport {
            ok: violations.is_empty(),
            vertices: n,
            edges: self.edges().len(),
            faces: self.faces.len(),
            euler,
            violations,
        }
    }

    /// Same complex with every face traversed the other way.
    pub fn reversed(&self) -> Self {
        let mut p = self.clone();
        for f in &mut p.faces {
            f.cycle.reverse();
        }
        p
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub euler: i64,
    pub violations: Vec<String>,
}

/// Faces around each vertex in rotation order, as `(face, next neighbour)`.
fn vertex_rotation(p: &CombinatorialPolyhedron, v: usize, de: &HashMap<Edge, usize>) -> Vec<usize> {
    // neighbours w of v in cyclic order: after w comes pred_F(v), F the face with v -> w
    let start = *p.neighbors()[v].iter().next().expect("vertex has neighbours");
    let mut out = vec![start];
    let mut w = start;
    loop {
        let f = &p.faces[de[&(v, w)]].cycle;
        let i = f.iter().position(|&x| x == v).unwrap();
        let u = f[(i + f.len() - 1) % f.len()];
        if u == start {
            break;
        }
        out.push(u);
        w = u;
    }
    out
}

/// Truncation: each vertex becomes a face, each face doubles its cycle.
/// New vertex `t(u,v)` sits on edge `uv` next to `u`; ids follow the sorted
/// directed edges.
pub fn truncate_solid(
    p: &CombinatorialPolyhedron,
    name: &str,
    vertex_prefix: &str,
    face_prefix: &str,
) -> CombinatorialPolyhedron {
    let mut directed: Vec<Edge> = p.directed_edges().into_keys().collect();
    directed.sort();
    let t: HashMap<Edge, usize> = directed.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let de = p.directed_edges();
    let mut faces = Vec::new();
    for &v in &p.vertices {
        let nbrs = vertex_rotation(p, v, &de);
        faces.push((
            format!("{vertex_prefix}{v}"),
            nbrs.iter().map(|&w| t[&(v, w)]).collect(),
        ));
    }
    for (k, f) in p.faces.iter().enumerate() {
        let mut cyc = Vec::new();
        for (a, b) in cycle_edges(&f.cycle) {
            cyc.push(t[&(a, b)]);
            cyc.push(t[&(b, a)]);
        }
        faces.push((format!("{face_prefix}{k}"), cyc));
    }
    CombinatorialPolyhedron::new(name, faces)
}

/// Faces become vertices; vertex `v` becomes face `{prefix}{v}`.
pub fn dual_solid(p: &CombinatorialPolyhedron, name: &str, prefix: &str) -> CombinatorialPolyhedron {
    let de = p.directed_edges();
    let faces = p
        .vertices
        .iter()
        .map(|&v| {
            // faces around v: F with v -> w, taken in the rotation order, reversed for outward ccw
            let nbrs = vertex_rotation(p, v, &de);
            let mut cyc: Vec<usize> = nbrs.iter().map(|&w| de[&(v, w)]).collect();
            cyc.reverse();
            (format!("{prefix}{v}"), cyc)
        })
        .collect();
    CombinatorialPolyhedron::new(name, faces)
}

/// Outward-oriented triangles of a convex point set whose edges all have squared length `d2`.
fn triangles_from_points(name: &str, pts: &[Vector3<f64>], d2: f64) -> CombinatorialPolyhedron {
    let n = pts.len();
    let adj = |i: usize, j: usize| ((pts[i] - pts[j]).norm_squared() - d2).abs() < 1e-9;
    let mut faces = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if adj(i, j) && adj(j, k) && adj(i, k) {
                    let nrm = (pts[j] - pts[i]).cross(&(pts[k] - pts[i]));
                    let cyc = if nrm.dot(&pts[i]) > 0.0 {
                        vec![i, j, k]
                    } else {
                        vec![i, k, j]
                    };
                    faces.push((format!("f{}", faces.len()), cyc));
                }
            }
        }
    }
    CombinatorialPolyhedron::new(name, faces)
}

pub fn cube() -> CombinatorialPolyhedron {
    let f = |id: &str, c: [usize; 4]| (id.to_string(), c.to_vec());
    CombinatorialPolyhedron::new(
        "cube",
        vec![
            f("x0", [0, 4, 6, 2]),
            f("x1", [1, 3, 7, 5]),
            f("y0", [0, 1, 5, 4]),
            f("y1", [2, 6, 7, 3]),
            f("z0", [0, 2, 3, 1]),
            f("z1", [4, 5, 7, 6]),
        ],
    )
}

pub fn octahedron() -> CombinatorialPolyhedron {
    let mut pts = Vec::new();
    for a in 0..3 {
        for s in [1.0, -1.0] {
            let mut p = Vector3::zeros();
            p[a] = s;
            pts.push(p);
        }
    }
    triangles_from_points("octahedron", &pts, 2.0)
}

pub fn icosahedron() -> CombinatorialPolyhedron {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut pts = Vec::new();
    for k in 0..3 {
        for s1 in [1.0, -1.0] {
            for s2 in [1.0, -1.0] {
                let mut p = Vector3::zeros();
                p[(k + 1) % 3] = s1;
                p[(k + 2) % 3] = s2 * phi;
                pts.push(p);
            }
        }
    }
    triangles_from_points("icosahedron", &pts, 4.0)
}

pub fn dodecahedron() -> CombinatorialPolyhedron {
    dual_solid(&icosahedron(), "dodecahedron", "f")
}

pub fn truncated_octahedron() -> CombinatorialPolyhedron {
    truncate_solid(&octahedron(), "truncated_octahedron", "s", "h")
}

pub fn truncated_icosahedron() -> CombinatorialPolyhedron {
    truncate_solid(&icosahedron(), "truncated_icosahedron", "p", "h")
}

pub const CATALOG: [&str; 6] = [
    "cube",
    "octahedron",
    "icosahedron",
    "dodecahedron",
    "truncated_octahedron",
    "truncated_icosahedron",
];

/// Catalog solids and `cobweb:<z>`.
pub fn build_catalog(name: &str) -> Result<CombinatorialPolyhedron> {
    if let Some(z) = name.strip_prefix("cobweb:") {
        let z: i64 = z.parse().map_err(|_| Error::UnknownSolid(name.to_string()))?;
        return cobweb_solid(z);
    }
    match name {
        "cube" => Ok(cube()),
        "octahedron" => Ok(octahedron()),
        "icosahedron" => Ok(icosahedron()),
        "dodecahedron" => Ok(dodecahedron()),
        "truncated_octahedron" => Ok(truncated_octahedron()),
        "truncated_icosahedron" => Ok(truncated_icosahedron()),
        _ => Err(Error::UnknownSolid(name.to_string())),
    }
}

/// Vertex types of the cobweb solid: the two edge points and the two
/// face-centre points of the truncated orthoscheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CobwebVertex {
    F03,
    E02,
    F12,
    E13,
}

/// `(type, ray mod 8z... , level)` for every vertex id of `cobweb_solid(z)`.
pub fn cobweb_vertex_keys(z: i64) -> Result<Vec<(CobwebVertex, usize, usize)>> {
    Ok(cobweb_build(z)?.1)
}

pub fn cobweb_solid(z: i64) -> Result<CombinatorialPolyhedron> {
    Ok(cobweb_build(z)?.0)
}

fn cobweb_build(z: i64) -> Result<(CombinatorialPolyhedron, Vec<(CobwebVertex, usize, usize)>)> {
    if z < 3 || z % 2 == 0 {
        return Err(Error::CobwebParameter(z));
    }
    use CobwebVertex::*;
    let rays = 4 * z;
    let mut ids: HashMap<(CobwebVertex, usize, usize), usize> = HashMap::new();
    let mut keys = Vec::new();
    let mut vid = |t: CobwebVertex, r: i64, s: usize| -> usize {
        let k = (t, r.rem_euclid(rays) as usize, s);
        *ids.entry(k).or_insert_with(|| {
            keys.push(k);
            keys.len() - 1
        })
    };
    let mut faces = Vec::new();
    // deltoids: the half domain reflected around the axis, two levels
    for s in 0..2usize {
        for w in 0..rays {
            let (o, e) = if w % 2 == 1 { (w, w + 1) } else { (w + 1, w) };
            let mut cyc = vec![vid(F03, o, s), vid(E02, o, s), vid(F12, e, s), vid(E13, e, s)];
            if (w + s as i64) % 2 == 1 {
                cyc.reverse();
            }
            faces.push((format!("d{w}_{s}"), cyc));
        }
    }
    for r in (0..rays).step_by(2) {
        let mut cyc = vec![
            vid(F03, r + 1, 0),
            vid(F03, r + 1, 1),
            vid(E13, r, 1),
            vid(F03, r - 1, 1),
            vid(F03, r - 1, 0),
            vid(E13, r, 0),
        ];
        cyc.reverse();
        faces.push((format!("h{r}"), cyc));
    }
    for s in 0..2usize {
        let mut cyc = Vec::new();
        for r in (0..rays).step_by(2) {
            cyc.push(vid(F12, r, s));
            cyc.push(vid(E02, r + 1, s));
        }
        if s == 1 {
            cyc.reverse();
        }
        faces.push((format!("B{s}"), cyc));
    }
    Ok((CombinatorialPolyhedron::new(&format!("cobweb:{z}"), faces), keys))
}

/// Isomorphism `p -> q` (vertex map) sending face `f` to face `g` with
/// `f.cycle[0] -> v` and `f.cycle[1] -> w`. Orientation may be reversed.
pub fn extend_isomorphism(
    p: &CombinatorialPolyhedron,
    q: &CombinatorialPolyhedron,
    f: usize,
    g: usize,
    v: usize,
    w: usize,
) -> Option<Vec<usize>> {
    if p.vertices.len() != q.vertices.len() || p.faces.len() != q.faces.len() {
        return None;
    }
    let de_p = p.directed_edges();
    let ef_q = q.edge_faces();
    let mut map: Vec<Option<usize>> = vec![None; p.vertices.len()];
    let mut face_done = vec![false; p.faces.len()];
    let mut queue = VecDeque::new();
    // (face in p, face in q, a, b) with a -> map a, b -> map b
    let (a, b) = (p.faces[f].cycle[0], p.faces[f].cycle[1]);
    map[a] = Some(v);
    map[b] = Some(w);
    queue.push_back((f, g, a, b));
    while let Some((fp, fq, a, b)) = queue.pop_front() {
        if face_done[fp] {
            continue;
        }
        let cp = &p.faces[fp].cycle;
        let cq = &q.faces[fq].cycle;
        if cp.len() != cq.len() {
            return None;
        }
        let (ma, mb) = (map[a]?, map[b]?);
        let i = cp.iter().position(|&x| x == a)?;
        let j = cq.iter().position(|&x| x == ma)?;
        let n = cp.len();
        let fwd_p = cp[(i + 1) % n] == b;
        if !fwd_p && cp[(i + n - 1) % n] != b {
            return None;
        }
        let dir_q = if cq[(j + 1) % n] == mb {
            1
        } else if cq[(j + n - 1) % n] == mb {
            n - 1
        } else {
            return None;
        };
        for k in 0..n {
            let x = if fwd_p { cp[(i + k) % n] } else { cp[(i + n - k) % n] };
            let y = cq[(j + k * dir_q) % n];
            match map[x] {
                None => map[x] = Some(y),
                Some(y0) if y0 != y => return None,
                _ => {}
            }
        }
        face_done[fp] = true;
        for (x, y) in cycle_edges(cp) {
            let fp2 = de_p[&(y, x)];
            if face_done[fp2] {
                continue;
            }
            let (mx, my) = (map[x]?, map[y]?);
            let fq2 = *ef_q.get(&edge_key(mx, my))?.iter().find(|&&h| h != fq)?;
            queue.push_back((fp2, fq2, x, y));
        }
    }
    let out: Vec<usize> = map.into_iter().collect::<Option<_>>()?;
    let uniq: BTreeSet<_> = out.iter().collect();
    (uniq.len() == out.len()).then_some(out)
}

/// Any isomorphism (orientation preserving or reversing), or None.
pub fn find_isomorphism(p: &CombinatorialPolyhedron, q: &CombinatorialPolyhedron) -> Option<Vec<usize>> {
    let f = 0;
    let size = p.faces.get(f)?.cycle.len();
    for (g, face) in q.faces.iter().enumerate() {
        if face.cycle.len() != size {
            continue;
        }
        for k in 0..size {
            for dir in [1, size - 1] {
                let v = face.cycle[k];
                let w = face.cycle[(k + dir) % size];
                if let Some(m) = extend_isomorphism(p, q, f, g, v, w) {
                    return Some(m);
                }
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchlegelLayout {
    pub outer: String,
    pub positions: Vec<[f64; 2]>,
    pub residual: f64,
}

/// Tutte embedding: outer face on the unit circle, every other vertex at the
/// barycentre of its neighbours.
pub fn schlegel_layout(p: &CombinatorialPolyhedron, outer: &str) -> Result<SchlegelLayout> {
    let face = p.face(outer)?;
    let n = p.vertices.len();
    let nb = p.neighbors();
    let mut pos = vec![[0.0; 2]; n];
    let mut fixed = vec![false; n];
    let m = face.cycle.len();
    for (k, &v) in face.cycle.iter().enumerate() {
        // reversed so the interior faces come out counter-clockwise
        let th = std::f64::consts::FRAC_PI_2 - 2.0 * std::f64::consts::PI * k as f64 / m as f64;
        pos[v] = [th.cos(), th.sin()];
        fixed[v] = true;
    }
    let free: Vec<usize> = (0..n).filter(|&v| !fixed[v]).collect();
    let idx: HashMap<usize, usize> = free.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let k = free.len();
    let mut lap = DMatrix::<f64>::zeros(k, k);
    let mut rhs = DMatrix::<f64>::zeros(k, 2);
    for (i, &v) in free.iter().enumerate() {
        lap[(i, i)] = nb[v].len() as f64;
        for &w in &nb[v] {
            if fixed[w] {
                rhs[(i, 0)] += pos[w][0];
                rhs[(i, 1)] += pos[w][1];
            } else {
                lap[(i, idx[&w])] -= 1.0;
            }
        }
    }
    let sol = lap
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Degenerate("singular layout system".into()))?;
    let residual = (&lap * &sol - &rhs).amax();
    if residual >= 1e-10 {
        return Err(Error::NoConvergence(format!("layout residual {residual:e}")));
    }
    for (i, &v) in free.iter().enumerate() {
        pos[v] = [sol[(i, 0)], sol[(i, 1)]];
    }
    Ok(SchlegelLayout {
        outer: outer.to_string(),
        positions: pos,
        residual,
    })
}

/// Pairs of edges without a common vertex whose drawn segments meet.
pub fn layout_crossings(p: &CombinatorialPolyhedron, layout: &SchlegelLayout) -> Vec<(Edge, Edge)> {
    let pos = &layout.positions;
    let edges = p.edges();
    let orient = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let mut out = Vec::new();
    for (i, &(a, b)) in edges.iter().enumerate() {
        for &(c, d) in &edges[i + 1..] {
            if a == c || a == d || b == c || b == d {
                continue;
            }
            let (pa, pb, pc, pd) = (pos[a], pos[b], pos[c], pos[d]);
            let d1 = orient(pa, pb, pc);
            let d2 = orient(pa, pb, pd);
            let d3 = orient(pc, pd, pa);
            let d4 = orient(pc, pd, pb);
            if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
                out.push(((a, b), (c, d)));
            }
        }
    }
    out
}

/// Barycentre of a face in the layout.
pub fn face_centroid(layout: &SchlegelLayout, cycle: &[usize]) -> [f64; 2] {
    let n = cycle.len() as f64;
    let sx: f64 = cycle.iter().map(|&v| layout.positions[v][0]).sum();
    let sy: f64 = cycle.iter().map(|&v| layout.positions[v][1]).sum();
    [sx / n, sy / n]
}

pub(crate) fn null_vector(rows: &[DVector<f64>]) -> DVector<f64> {
    let n = rows[0].len();
    let m = DMatrix::from_fn(
        rows.len().max(n),
        n,
        |i, j| if i < rows.len() { rows[i][j] } else { 0.0 },
    );
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    vt.row(k).transpose()
}
