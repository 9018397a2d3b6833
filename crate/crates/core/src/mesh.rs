//! Uniform space-time mesh on `[0,l1] x [0,l2] x [0,T]` and mesh functions.

use crate::error::{Error, Result};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshSpec<T> {
    pub l1: T,
    pub l2: T,
    pub t_final: T,
    pub nx: usize,
    pub ny: usize,
    pub nt: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Interior,
    Boundary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh<T> {
    pub spec: MeshSpec<T>,
    pub hx: T,
    pub hy: T,
    pub tau: T,
}

pub fn build_mesh<T: Real>(spec: MeshSpec<T>) -> Result<Mesh<T>> {
    for (name, v) in [("l1", spec.l1), ("l2", spec.l2), ("T", spec.t_final)] {
        if !(v.is_finite() && v > T::zero()) {
            return Err(Error::InvalidMesh(format!("{name} must be positive and finite")));
        }
    }
    if spec.nx < 2 || spec.ny < 2 {
        return Err(Error::InvalidMesh(format!(
            "need nx, ny >= 2 (got {}, {})",
            spec.nx, spec.ny
        )));
    }
    if spec.nt < 1 {
        return Err(Error::InvalidMesh("need nt >= 1".into()));
    }
    let n = |k: usize| T::from_usize(k).unwrap();
    Ok(Mesh {
        spec,
        hx: spec.l1 / n(spec.nx),
        hy: spec.l2 / n(spec.ny),
        tau: spec.t_final / n(spec.nt),
    })
}

impl<T: Real> Mesh<T> {
    pub fn new(l1: T, l2: T, t_final: T, nx: usize, ny: usize, nt: usize) -> Result<Self> {
        build_mesh(MeshSpec { l1, l2, t_final, nx, ny, nt })
    }

    pub fn nx(&self) -> usize {
        self.spec.nx
    }
    pub fn ny(&self) -> usize {
        self.spec.ny
    }
    pub fn nt(&self) -> usize {
        self.spec.nt
    }

    // the last node is pinned to the extent so it is exact
    pub fn x(&self, i: usize) -> T {
        if i == self.spec.nx {
            self.spec.l1
        } else {
            T::from_usize(i).unwrap() * self.hx
        }
    }
    pub fn y(&self, j: usize) -> T {
        if j == self.spec.ny {
            self.spec.l2
        } else {
            T::from_usize(j).unwrap() * self.hy
        }
    }
    pub fn t(&self, m: usize) -> T {
        if m == self.spec.nt {
            self.spec.t_final
        } else {
            T::from_usize(m).unwrap() * self.tau
        }
    }

    pub fn classify(&self, i: usize, j: usize) -> Result<NodeKind> {
        let (nx, ny) = (self.spec.nx, self.spec.ny);
        if i > nx || j > ny {
            return Err(Error::IndexOutOfRange { i, j, nx, ny });
        }
        Ok(if i == 0 || i == nx || j == 0 || j == ny {
            NodeKind::Boundary
        } else {
            NodeKind::Interior
        })
    }

    /// Interior points per line.
    pub fn line_len(&self) -> usize {
        self.spec.ny - 1
    }
    pub fn n_lines(&self) -> usize {
        self.spec.nx - 1
    }
    pub fn n_interior(&self) -> usize {
        self.n_lines() * self.line_len()
    }
}

/// Mesh function on all `(nx+1) x (ny+1)` nodes of one time level.
///
/// Storage is line-major: node `(i, j)` lives at `i * (ny + 1) + j`, so the
/// interior of line `i` is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    nx: usize,
    ny: usize,
    data: Vec<T>,
}

pub type Pair<T> = [Field<T>; 2];

impl<T: Real> Field<T> {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        Self::constant(nx, ny, T::zero())
    }
    pub fn constant(nx: usize, ny: usize, v: T) -> Self {
        Field { nx, ny, data: vec![v; (nx + 1) * (ny + 1)] }
    }
    pub fn for_mesh(mesh: &Mesh<T>) -> Self {
        Self::zeros(mesh.nx(), mesh.ny())
    }
    pub fn from_fn(mesh: &Mesh<T>, mut f: impl FnMut(T, T) -> T) -> Self {
        let mut out = Self::for_mesh(mesh);
        for i in 0..=mesh.nx() {
            for j in 0..=mesh.ny() {
                out.set(i, j, f(mesh.x(i), mesh.y(j)));
            }
        }
        out
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * (self.ny + 1) + j]
    }
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * (self.ny + 1) + j] = v;
    }
    pub fn values(&self) -> &[T] {
        &self.data
    }
    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.data
    }
    pub fn interior_line(&self, i: usize) -> &[T] {
        let s = i * (self.ny + 1);
        &self.data[s + 1..s + self.ny]
    }
    pub fn interior_line_mut(&mut self, i: usize) -> &mut [T] {
        let s = i * (self.ny + 1);
        &mut self.data[s + 1..s + self.ny]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn matches(&self, mesh: &Mesh<T>) -> bool {
        self.nx == mesh.nx() && self.ny == mesh.ny()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }

    pub fn max_abs_diff_interior(&self, other: &Self) -> T {
        let mut m = T::zero();
        for i in 1..self.nx {
            for (a, b) in self.interior_line(i).iter().zip(other.interior_line(i)) {
                m = m.max((*a - *b).abs());
            }
        }
        m
    }

    /// Copy the boundary ring of `src` into `self`.
    pub fn copy_boundary(&mut self, src: &Self) {
        for i in 0..=self.nx {
            for j in 0..=self.ny {
                if i == 0 || i == self.nx || j == 0 || j == self.ny {
                    self.set(i, j, src.get(i, j));
                }
            }
        }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Field { nx: self.nx, ny: self.ny, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        Field {
            nx: self.nx,
            ny: self.ny,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn min_value(&self) -> T {
        self.data.iter().fold(T::infinity(), |m, &v| m.min(v))
    }
    pub fn max_value(&self) -> T {
        self.data.iter().fold(T::neg_infinity(), |m, &v| m.max(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square() {
        let m = Mesh::<f64>::new(1.0, 1.0, 1.0, 4, 4, 2).unwrap();
        assert_eq!((m.hx, m.hy, m.tau), (0.25, 0.25, 0.5));
    }

    #[test]
    fn wide_domain() {
        let m = Mesh::<f64>::new(2.0, 1.0, 0.5, 8, 4, 5).unwrap();
        assert_eq!(m.hx, 0.25);
        assert_eq!(m.hy, 0.25);
        assert!((m.tau - 0.1).abs() < 1e-15);
        assert_eq!(m.x(8), 2.0);
        assert_eq!(m.t(5), 0.5);
    }

    #[test]
    fn rejects_degenerate() {
        assert!(Mesh::<f64>::new(1.0, 1.0, 1.0, 1, 4, 2).is_err());
        assert!(Mesh::<f64>::new(1.0, 1.0, 1.0, 4, 4, 0).is_err());
        assert!(Mesh::<f64>::new(0.0, 1.0, 1.0, 4, 4, 1).is_err());
        assert!(Mesh::<f64>::new(1.0, 1.0, -1.0, 4, 4, 1).is_err());
    }

    #[test]
    fn classify_nodes() {
        let m = Mesh::<f64>::new(1.0, 1.0, 1.0, 4, 4, 2).unwrap();
        assert_eq!(m.classify(0, 3).unwrap(), NodeKind::Boundary);
        assert_eq!(m.classify(2, 2).unwrap(), NodeKind::Interior);
        assert_eq!(m.classify(4, 4).unwrap(), NodeKind::Boundary);
        assert!(m.classify(5, 0).is_err());
        let interior = (0..=4)
            .flat_map(|i| (0..=4).map(move |j| (i, j)))
            .filter(|&(i, j)| m.classify(i, j).unwrap() == NodeKind::Interior)
            .count();
        assert_eq!(interior, m.n_interior());
    }

    #[test]
    fn line_layout() {
        let m = Mesh::<f64>::new(3.0, 1.0, 1.0, 3, 4, 1).unwrap();
        let f = Field::from_fn(&m, |x, y| 10.0 * x + y);
        assert_eq!(f.interior_line(1), &[10.25, 10.5, 10.75][..]);
    }
}
