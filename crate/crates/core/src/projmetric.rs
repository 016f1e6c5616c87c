//! Projective metric model: points are vectors over the vertex basis, planes
//! are forms over the face basis, and the Gram matrix and its inverse give
//! the two inner products.
//!
//! Isometries act on row vectors, `x -> x * M`; forms transform by `u -> M^-1 * u`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::{classify_geometry, invert_gram, GeometryClass, GramMatrix, VertexMatrix, DEFAULT_TOL};

pub type PointVector = DVector<f64>;
pub type PlaneForm = DVector<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ElementKind {
    Proper,
    Boundary,
    Outer,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleReport {
    /// `arccos(<u,v> / sqrt(<u,u><v,v>))`
    pub raw: f64,
    /// `pi - raw`, the interior dihedral angle for outward-oriented forms.
    pub interior: f64,
    /// The planes meet in a proper line.
    pub proper_intersection: bool,
}

#[derive(Clone, Debug)]
pub struct SpaceContext {
    gram: GramMatrix,
    vertex: VertexMatrix,
    geometry: GeometryClass,
    /// Metric constant `k` (radius `R` in spherical contexts).
    pub k: f64,
    pub tol: f64,
    reference: PointVector,
}

impl SpaceContext {
    pub fn new(gram: GramMatrix) -> Result<Self> {
        Self::with_tol(gram, DEFAULT_TOL)
    }

    pub fn with_tol(gram: GramMatrix, tol: f64) -> Result<Self> {
        let vertex = invert_gram(&gram, tol)?;
        let geometry = classify_geometry(&gram, tol);
        let n = gram.order();
        let mut ctx = SpaceContext {
            gram,
            vertex,
            geometry,
            k: 1.0,
            tol,
            reference: DVector::zeros(n),
        };
        ctx.reference = ctx.pick_reference();
        Ok(ctx)
    }

    fn pick_reference(&self) -> PointVector {
        let n = self.dim();
        if !self.is_hyperbolic() {
            return DVector::from_element(n, 1.0);
        }
        let mut candidates = vec![DVector::from_element(n, 1.0)];
        candidates.extend((0..n).map(|i| DVector::from_fn(n, |j, _| if i == j { 1.0 } else { 0.0 })));
        for c in candidates {
            if self.point_inner(&c, &c) < -self.tol {
                return c;
            }
        }
        // timelike eigenvector of the vertex matrix
        let eig = nalgebra::SymmetricEigen::new(self.vertex.matrix().clone());
        let (k, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        let v = eig.eigenvectors.column(k).into_owned();
        if v.sum() < 0.0 {
            -v
        } else {
            v
        }
    }

    pub fn dim(&self) -> usize {
        self.gram.order()
    }

    pub fn gram(&self) -> &GramMatrix {
        &self.gram
    }

    pub fn vertex_matrix(&self) -> &VertexMatrix {
        &self.vertex
    }

    pub fn geometry(&self) -> &GeometryClass {
        &self.geometry
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.geometry.kind.is_hyperbolic()
    }

    /// A proper point fixing the positive cone component.
    pub fn reference_point(&self) -> &PointVector {
        &self.reference
    }

    /// `<x;y> = x^T A y`
    pub fn point_inner(&self, x: &PointVector, y: &PointVector) -> f64 {
        (x.transpose() * self.vertex.matrix() * y)[(0, 0)]
    }

    /// `<u;v> = u^T B v`
    pub fn form_inner(&self, u: &PlaneForm, v: &PlaneForm) -> f64 {
        (u.transpose() * self.gram.matrix() * v)[(0, 0)]
    }

    fn require_hyperbolic(&self) -> Result<()> {
        if self.is_hyperbolic() {
            Ok(())
        } else {
            Err(Error::NotHyperbolic)
        }
    }

    pub fn classify_point(&self, x: &PointVector) -> Result<ElementKind> {
        self.require_hyperbolic()?;
        let q = self.point_inner(x, x);
        let s = self.tol * x.norm_squared();
        Ok(if q < -s {
            ElementKind::Proper
        } else if q.abs() <= s {
            ElementKind::Boundary
        } else {
            ElementKind::Outer
        })
    }

    pub fn classify_plane(&self, u: &PlaneForm) -> Result<ElementKind> {
        self.require_hyperbolic()?;
        let q = self.form_inner(u, u);
        let s = self.tol * u.norm_squared();
        Ok(if q > s {
            ElementKind::Proper
        } else if q.abs() <= s {
            ElementKind::Boundary
        } else {
            ElementKind::Outer
        })
    }

    /// Scale to `<x;x> = -1` (proper) or `+1`, in the reference cone component.
    pub fn normalize_point(&self, x: &PointVector) -> PointVector {
        let q = self.point_inner(x, x);
        let mut y = if q.abs() > 1e-300 {
            x / q.abs().sqrt()
        } else {
            x.clone()
        };
        if self.is_hyperbolic() {
            if self.point_inner(&y, &self.reference) > 0.0 {
                y = -y;
            }
        } else if y.dot(&self.reference) < 0.0 {
            y = -y;
        }
        y
    }

    pub fn distance(&self, x: &PointVector, y: &PointVector) -> Result<f64> {
        if x.norm() == 0.0 || y.norm() == 0.0 {
            return Err(Error::Degenerate("zero vector".into()));
        }
        let xx = self.point_inner(x, x);
        let yy = self.point_inner(y, y);
        let xy = self.point_inner(x, y);
        if self.is_hyperbolic() {
            for (p, q) in [(x, xx), (y, yy)] {
                if self.classify_point(p)? != ElementKind::Proper {
                    return Err(Error::NotProper(format!("point with <x;x> = {q:e}")));
                }
            }
            let c = xy.abs() / (xx * yy).sqrt();
            if c < 1.0 - 1e-12 {
                return Err(Error::Degenerate(format!("arccosh argument {c}")));
            }
            Ok(self.k * c.max(1.0).acosh())
        } else {
            let c = (xy / (xx * yy).sqrt()).clamp(-1.0, 1.0);
            Ok(self.k * c.acos())
        }
    }

    pub fn angle(&self, u: &PlaneForm, v: &PlaneForm) -> Result<AngleReport> {
        if self.is_hyperbolic() {
            for p in [u, v] {
                if self.classify_plane(p)? != ElementKind::Proper {
                    return Err(Error::NotProper("plane".into()));
                }
            }
        }
        let uu = self.form_inner(u, u);
        let vv = self.form_inner(v, v);
        let uv = self.form_inner(u, v);
        let raw = (uv / (uu * vv).sqrt()).clamp(-1.0, 1.0).acos();
        Ok(AngleReport {
            raw,
            interior: PI - raw,
            proper_intersection: uu * vv - uv * uv > self.tol,
        })
    }

    /// Pole of a form: coordinates `u_i b^{ij}`.
    pub fn pole(&self, u: &PlaneForm) -> PointVector {
        self.gram.matrix() * u
    }

    /// Polar of a point: coordinates `a_{ij} x^j`.
    pub fn polar(&self, x: &PointVector) -> PlaneForm {
        self.vertex.matrix() * x
    }

    fn mirror_norm(&self, u: &PlaneForm) -> Result<f64> {
        let uu = self.form_inner(u, u);
        if uu.abs() <= self.tol * u.norm_squared() {
            return Err(Error::Degenerate("boundary mirror".into()));
        }
        Ok(uu)
    }

    pub fn reflect_point(&self, x: &PointVector, u: &PlaneForm) -> Result<PointVector> {
        let uu = self.mirror_norm(u)?;
        Ok(x - self.pole(u) * (2.0 * x.dot(u) / uu))
    }

    pub fn reflect_plane(&self, v: &PlaneForm, u: &PlaneForm) -> Result<PlaneForm> {
        let uu = self.mirror_norm(u)?;
        Ok(v - u * (2.0 * self.form_inner(v, u) / uu))
    }

    /// Row-action matrix of the reflection in `u`.
    pub fn reflection_matrix(&self, u: &PlaneForm) -> Result<DMatrix<f64>> {
        let uu = self.mirror_norm(u)?;
        let n = self.dim();
        Ok(DMatrix::identity(n, n) - u * self.pole(u).transpose() * (2.0 / uu))
    }

    /// Reflection in the face plane `b^i`.
    pub fn mirror(&self, i: usize) -> DMatrix<f64> {
        let n = self.dim();
        let e = DVector::from_fn(n, |j, _| if i == j { 1.0 } else { 0.0 });
        self.reflection_matrix(&e).expect("Gram diagonal is 1")
    }

    /// `max |M A M^T - A|`
    pub fn isometry_residual(&self, m: &DMatrix<f64>) -> f64 {
        let a = self.vertex.matrix();
        (m * a * m.transpose() - a).amax()
    }

    /// Sign representative preserving the reference cone component.
    pub fn orient_isometry(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        if !self.is_hyperbolic() {
            return m.clone();
        }
        let r = self.reference.transpose();
        let img = (&r * m).transpose();
        if self.point_inner(&self.reference, &img) > 0.0 {
            -m
        } else {
            m.clone()
        }
    }
}

pub fn unit(n: usize, i: usize) -> DVector<f64> {
    DVector::from_fn(n, |j, _| if i == j { 1.0 } else { 0.0 })
}
