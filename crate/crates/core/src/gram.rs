//! Coxeter-Schlafli matrices and the geometry they define.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Zero-eigenvalue threshold for unit-diagonal Gram matrices.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Dihedral angle `pi * num / den` between faces `i` and `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Branch {
    pub i: usize,
    pub j: usize,
    pub num: u32,
    pub den: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct BranchFile {
    order: usize,
    branches: Vec<Branch>,
}

/// Linear symbol `(p,q)` / `(p,q,r)`, optionally with explicit branch angles
/// overriding the linear defaults.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchlafliSymbol {
    order: usize,
    entries: Vec<u32>,
    branches: Vec<Branch>,
}

impl SchlafliSymbol {
    pub fn linear(entries: &[u32]) -> Result<Self> {
        if !(2..=3).contains(&entries.len()) {
            return Err(Error::Symbol(format!("expected 2 or 3 entries, got {}", entries.len())));
        }
        if let Some(e) = entries.iter().find(|&&e| e < 2) {
            return Err(Error::Symbol(format!("entry {e} is below 2")));
        }
        Ok(SchlafliSymbol {
            order: entries.len() + 1,
            entries: entries.to_vec(),
            branches: Vec::new(),
        })
    }

    /// Non-linear diagram: every pair not listed is orthogonal.
    pub fn with_branches(order: usize, branches: Vec<Branch>) -> Result<Self> {
        if !(3..=4).contains(&order) {
            return Err(Error::Symbol(format!("order must be 3 or 4, got {order}")));
        }
        for b in &branches {
            if b.i >= order || b.j >= order || b.i == b.j {
                return Err(Error::Symbol(format!("bad branch indices ({}, {})", b.i, b.j)));
            }
            if b.num == 0 || b.den == 0 || 2 * b.num > b.den {
                return Err(Error::Symbol(format!(
                    "branch angle pi*{}/{} outside (0, pi/2]",
                    b.num, b.den
                )));
            }
        }
        for (k, a) in branches.iter().enumerate() {
            for b in &branches[k + 1..] {
                let same = (a.i, a.j) == (b.i, b.j) || (a.i, a.j) == (b.j, b.i);
                if same && a.num as u64 * b.den as u64 != b.num as u64 * a.den as u64 {
                    return Err(Error::Symbol(format!("asymmetric branch matrix at ({}, {})", a.i, a.j)));
                }
            }
        }
        Ok(SchlafliSymbol {
            order,
            entries: Vec::new(),
            branches,
        })
    }

    /// `"p,q"`, `"p,q,r"` (parentheses optional) or a branch JSON object
    /// `{order, branches:[{i,j,num,den}]}`.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.starts_with('{') {
            let f: BranchFile = serde_json::from_str(t).map_err(|e| Error::Symbol(format!("branch JSON: {e}")))?;
            return Self::with_branches(f.order, f.branches);
        }
        let t = t.trim_start_matches('(').trim_end_matches(')');
        let entries = t
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::Symbol(format!("not an integer: {:?}", p.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::linear(&entries)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    /// Dihedral angle between faces `i` and `j` as `(num, den)`, a rational multiple of pi.
    pub fn angle(&self, i: usize, j: usize) -> (u32, u32) {
        if let Some(b) = self
            .branches
            .iter()
            .find(|b| (b.i, b.j) == (i, j) || (b.i, b.j) == (j, i))
        {
            return (b.num, b.den);
        }
        if self.branches.is_empty() && i.abs_diff(j) == 1 {
            (1, self.entries[i.min(j)])
        } else {
            (1, 2)
        }
    }

    /// The sphenoid: a 4-cycle of pi/3 angles with two opposite right angles.
    pub fn sphenoid() -> Self {
        let third = |i, j| Branch { i, j, num: 1, den: 3 };
        Self::with_branches(4, vec![third(0, 1), third(1, 2), third(2, 3), third(0, 3)]).expect("valid sphenoid")
    }
}

impl std::fmt::Display for SchlafliSymbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.branches.is_empty() {
            let e: Vec<String> = self.entries.iter().map(|e| e.to_string()).collect();
            write!(f, "({})", e.join(","))
        } else {
            let b: Vec<String> = self
                .branches
                .iter()
                .map(|b| format!("{}{}:{}/{}", b.i, b.j, b.num, b.den))
                .collect();
            write!(f, "[{}]", b.join(" "))
        }
    }
}

/// Inner products `b^{ij}` of the unit face normals.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    b: DMatrix<f64>,
}

impl GramMatrix {
    pub fn from_matrix(b: DMatrix<f64>) -> Result<Self> {
        let n = b.nrows();
        if b.ncols() != n || !(3..=4).contains(&n) {
            return Err(Error::Symbol("Gram matrix must be 3x3 or 4x4".into()));
        }
        for i in 0..n {
            if (b[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(Error::Symbol("Gram diagonal must be 1".into()));
            }
            for j in 0..n {
                if (b[(i, j)] - b[(j, i)]).abs() > 1e-12 {
                    return Err(Error::Symbol("Gram matrix must be symmetric".into()));
                }
            }
        }
        Ok(GramMatrix { b })
    }

    pub fn order(&self) -> usize {
        self.b.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.b[(i, j)]
    }

    /// Interior dihedral angle `beta^{ij} = pi - arccos(b^{ij})`.
    pub fn dihedral(&self, i: usize, j: usize) -> f64 {
        PI - self.b[(i, j)].clamp(-1.0, 1.0).acos()
    }

    /// Same matrix with nodes relabelled: new node `k` is old node `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> GramMatrix {
        let n = self.order();
        GramMatrix {
            b: DMatrix::from_fn(n, n, |i, j| self.b[(perm[i], perm[j])]),
        }
    }
}

pub fn build_gram(symbol: &SchlafliSymbol) -> GramMatrix {
    let n = symbol.order();
    let b = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else {
            let (num, den) = symbol.angle(i, j);
            if 2 * num == den {
                0.0
            } else {
                -(PI * num as f64 / den as f64).cos()
            }
        }
    });
    GramMatrix { b }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeometryKind {
    Spherical,
    Euclidean,
    HyperbolicCompact,
    HyperbolicOther,
}

impl GeometryKind {
    pub fn is_hyperbolic(self) -> bool {
        matches!(self, GeometryKind::HyperbolicCompact | GeometryKind::HyperbolicOther)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl std::fmt::Display for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut s = vec!["+"; self.positive];
        s.extend(vec!["-"; self.negative]);
        s.extend(vec!["0"; self.zero]);
        write!(f, "({})", s.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryClass {
    pub kind: GeometryKind,
    pub determinant: f64,
    /// Leading principal minors of orders 1..=n.
    pub minors: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub signature: Signature,
    /// Orders of leading minors that are not positive.
    pub failing_minors: Vec<usize>,
}

pub fn leading_minors(m: &DMatrix<f64>) -> Vec<f64> {
    (1..=m.nrows())
        .map(|k| m.view((0, 0), (k, k)).into_owned().determinant())
        .collect()
}

/// Every principal minor on a proper subset of nodes is positive. Leading
/// minors alone depend on the node order.
fn proper_principal_minors_positive(m: &DMatrix<f64>, tol: f64) -> bool {
    let n = m.nrows();
    (1u32..(1 << n) - 1).all(|mask| {
        let idx: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        m.select_rows(&idx).select_columns(&idx).determinant() > tol
    })
}

pub fn signature(m: &DMatrix<f64>, tol: f64) -> (Signature, Vec<f64>) {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    let sig = Signature {
        positive: ev.iter().filter(|&&l| l > tol).count(),
        negative: ev.iter().filter(|&&l| l < -tol).count(),
        zero: ev.iter().filter(|&&l| l.abs() <= tol).count(),
    };
    (sig, ev)
}

pub fn classify_geometry(g: &GramMatrix, tol: f64) -> GeometryClass {
    let n = g.order();
    let minors = leading_minors(&g.b);
    let determinant = minors[n - 1];
    let (sig, eigenvalues) = signature(&g.b, tol);
    let failing_minors: Vec<usize> = minors
        .iter()
        .enumerate()
        .filter(|(_, &m)| m <= tol)
        .map(|(k, _)| k + 1)
        .collect();
    let proper_ok = failing_minors.iter().all(|&k| k == n) && proper_principal_minors_positive(&g.b, tol);
    let kind = if sig.zero == 0 && sig.negative == 0 {
        GeometryKind::Spherical
    } else if sig.zero == 1 && sig.negative == 0 {
        GeometryKind::Euclidean
    } else if sig.negative == 1 && sig.zero == 0 && proper_ok && determinant < 0.0 {
        GeometryKind::HyperbolicCompact
    } else {
        GeometryKind::HyperbolicOther
    };
    GeometryClass {
        kind,
        determinant,
        minors,
        eigenvalues,
        signature: sig,
        failing_minors,
    }
}

/// `a_{ij}`, the inverse of a nonsingular Gram matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexMatrix {
    a: DMatrix<f64>,
}

impl VertexMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.a[(i, j)]
    }
}

pub fn invert_gram(g: &GramMatrix, tol: f64) -> Result<VertexMatrix> {
    let det = g.b.determinant();
    if det.abs() <= tol {
        return Err(Error::Singular(det));
    }
    let a = g.b.clone().try_inverse().ok_or(Error::Singular(det))?;
    let a = (&a + a.transpose()) * 0.5;
    Ok(VertexMatrix { a })
}

/// `pi - (pi/2 + pi/p + pi/q)`: positive for hyperbolic, zero for Euclidean,
/// negative (spherical excess) otherwise.
pub fn triangle_defect(p: u32, q: u32) -> f64 {
    PI - (PI / 2.0 + PI / p as f64 + PI / q as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CobwebAdmissibility {
    pub u: u32,
    pub v: u32,
    pub w: u32,
    /// `pi/u + pi/v < pi/2`
    pub uv_acute: bool,
    /// `pi/v + pi/w < pi/2`
    pub vw_acute: bool,
    /// `sin(pi/u) sin(pi/w) - cos(pi/v)`
    pub value: f64,
    pub admissible: bool,
}

pub fn cobweb_admissible(u: u32, v: u32, w: u32) -> CobwebAdmissibility {
    let r = |k: u32| PI / k as f64;
    let uv_acute = r(u) + r(v) < PI / 2.0 - 1e-12;
    let vw_acute = r(v) + r(w) < PI / 2.0 - 1e-12;
    let value = r(u).sin() * r(w).sin() - r(v).cos();
    CobwebAdmissibility {
        u,
        v,
        w,
        uv_acute,
        vw_acute,
        value,
        admissible: uv_acute && vw_acute && value < 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gram(s: &str) -> GramMatrix {
        build_gram(&SchlafliSymbol::parse(s).unwrap())
    }

    #[test]
    fn tridiagonal_linear_symbols() {
        let g = gram("4,3,4");
        let c4 = -(PI / 4.0).cos();
        assert!((g.entry(0, 1) - c4).abs() < 1e-15);
        assert!((g.entry(1, 2) + 0.5).abs() < 1e-15);
        assert!((g.entry(2, 3) - c4).abs() < 1e-15);
        assert_eq!(g.entry(0, 2), 0.0);
        assert_eq!(g.entry(0, 3), 0.0);
        assert_eq!(g.entry(1, 3), 0.0);
    }

    #[test]
    fn sphenoid_four_cycle() {
        let g = build_gram(&SchlafliSymbol::sphenoid());
        for (i, j) in [(0, 1), (1, 2), (2, 3), (0, 3)] {
            assert!((g.entry(i, j) + 0.5).abs() < 1e-15);
        }
        assert_eq!(g.entry(0, 2), 0.0);
        assert_eq!(g.entry(1, 3), 0.0);
        assert_eq!(classify_geometry(&g, DEFAULT_TOL).kind, GeometryKind::Euclidean);
    }

    #[test]
    fn rejects_bad_symbols() {
        assert!(SchlafliSymbol::parse("1,3").is_err());
        assert!(SchlafliSymbol::parse("4").is_err());
        assert!(SchlafliSymbol::parse("a,b").is_err());
        let b = |i, j, num, den| Branch { i, j, num, den };
        assert!(SchlafliSymbol::with_branches(4, vec![b(0, 1, 1, 3), b(1, 0, 1, 4)]).is_err());
        assert!(SchlafliSymbol::with_branches(4, vec![b(0, 1, 2, 3)]).is_err());
        assert!(SchlafliSymbol::with_branches(4, vec![b(0, 0, 1, 3)]).is_err());
    }

    #[test]
    fn branch_json_round_trip() {
        let s = SchlafliSymbol::parse(
            r#"{"order":4,"branches":[{"i":0,"j":1,"num":1,"den":3},{"i":1,"j":2,"num":1,"den":3},
                {"i":2,"j":3,"num":1,"den":3},{"i":3,"j":0,"num":1,"den":3}]}"#,
        )
        .unwrap();
        assert_eq!(build_gram(&s), build_gram(&SchlafliSymbol::sphenoid()));
    }

    #[test]
    fn plane_classification() {
        let c = classify_geometry(&gram("4,3"), DEFAULT_TOL);
        assert_eq!(c.kind, GeometryKind::Spherical);
        assert!((c.determinant - 0.25).abs() < 1e-12);
        let c = classify_geometry(&gram("5,3"), DEFAULT_TOL);
        assert!((c.determinant - (3.0 - 5f64.sqrt()) / 8.0).abs() < 1e-12);
        for s in ["3,6", "6,3", "4,4"] {
            assert_eq!(classify_geometry(&gram(s), DEFAULT_TOL).kind, GeometryKind::Euclidean);
        }
        for s in ["3,7", "7,3", "4,5", "5,4"] {
            assert!(classify_geometry(&gram(s), DEFAULT_TOL).kind.is_hyperbolic());
        }
    }

    #[test]
    fn space_classification() {
        let c = classify_geometry(&gram("4,3,4"), DEFAULT_TOL);
        assert_eq!(c.kind, GeometryKind::Euclidean);
        assert_eq!(
            c.signature,
            Signature {
                positive: 3,
                negative: 0,
                zero: 1
            }
        );
        let c = classify_geometry(&gram("5,3,5"), DEFAULT_TOL);
        assert_eq!(c.kind, GeometryKind::HyperbolicCompact);
        assert_eq!(
            c.signature,
            Signature {
                positive: 3,
                negative: 1,
                zero: 0
            }
        );
        assert!(c.determinant < 0.0);
        let c = classify_geometry(&gram("6,6,6"), DEFAULT_TOL);
        assert_eq!(c.kind, GeometryKind::HyperbolicOther);
        assert_eq!(c.failing_minors, vec![3, 4]);
    }

    #[test]
    fn inverse_and_singular() {
        let g = gram("5,3,5");
        let a = invert_gram(&g, DEFAULT_TOL).unwrap();
        let r = g.matrix() * a.matrix() - DMatrix::identity(4, 4);
        assert!(r.amax() < 1e-12);
        assert!(a.entry(3, 3) < 0.0);
        assert!(matches!(
            invert_gram(&gram("4,3,4"), DEFAULT_TOL),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn spherical_arc_matches_cube_coordinates() {
        // vertex direction (1,1,1) against edge-midpoint direction (1,1,0)
        let a = invert_gram(&gram("4,3"), DEFAULT_TOL).unwrap();
        let arc = (a.entry(0, 1) / (a.entry(0, 0) * a.entry(1, 1)).sqrt()).acos();
        let oracle = (2.0 / (3f64.sqrt() * 2f64.sqrt())).acos();
        assert!((arc - oracle).abs() < 1e-12);
    }

    #[test]
    fn defects() {
        assert!((triangle_defect(3, 7) - PI / 42.0).abs() < 1e-12);
        assert!(triangle_defect(4, 4).abs() < 1e-15);
        assert!((triangle_defect(4, 3) + PI / 12.0).abs() < 1e-12);
    }

    #[test]
    fn cobweb_parameters() {
        let r = cobweb_admissible(6, 6, 6);
        assert!(r.admissible);
        assert!((r.value - (0.25 - 3f64.sqrt() / 2.0)).abs() < 1e-12);
        assert!(!cobweb_admissible(4, 4, 4).admissible);
        let r = cobweb_admissible(3, 7, 3);
        assert!(r.admissible);
        assert!(0.75 < (PI / 7.0).cos().powi(2));
    }

    #[test]
    fn euclidean_vertex_figure_is_not_compact_in_any_labelling() {
        let g = build_gram(&SchlafliSymbol::parse("4,4,3").unwrap());
        for perm in [[0, 1, 2, 3], [3, 2, 1, 0], [1, 2, 3, 0]] {
            let c = classify_geometry(&g.permuted(&perm), DEFAULT_TOL);
            assert_eq!(c.kind, GeometryKind::HyperbolicOther, "{perm:?}");
        }
    }
}
