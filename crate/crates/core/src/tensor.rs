//! Symmetric second-order tensors in three dimensions.
//!
//! Only the six independent components are stored, in the order
//! `xx, yy, zz, yz, xz, xy`. Tensors built from three principal values carry
//! a diagonal flag; all operations on flagged inputs reduce to componentwise
//! scalar formulas and return flagged outputs. Coaxial loading keeps every
//! tensor of the material model on this path.
//!
//! Matrix functions (`sym_sqrt`, `sym_exp`) on general tensors go through a
//! cyclic Jacobi eigendecomposition, written against [`Real`] so it can also
//! be recorded on the gradient tape.

use core::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Eigenvalues at or below this are treated as non-positive.
pub const EIGEN_TOL: f64 = 1e-12;

const VOIGT: [[usize; 3]; 3] = [[0, 5, 4], [5, 1, 3], [4, 3, 2]];

pub type Mat3<T> = [[T; 3]; 3];

#[derive(Clone, Copy, Debug)]
pub struct SymTensor3<T: Real = f64> {
    c: [T; 6],
    diagonal: bool,
}

impl<T: Real> PartialEq for SymTensor3<T> {
    fn eq(&self, other: &Self) -> bool {
        self.c.iter().zip(other.c.iter()).all(|(a, b)| a.value() == b.value())
    }
}

/// Principal and deviatoric invariants, plus the isochoric pair when
/// `I3 > 0`.
#[derive(Clone, Copy, Debug)]
pub struct InvariantSet<T: Real = f64> {
    pub i1: T,
    pub i2: T,
    pub i3: T,
    pub j2: T,
    pub j3: T,
    /// `I1 / I3^(1/3)`
    pub i1_iso: Option<T>,
    /// `I2 / I3^(2/3)`
    pub i2_iso: Option<T>,
}

impl<T: Real> InvariantSet<T> {
    /// The modified (isochoric) invariants `(Ĩ1, Ĩ2)`.
    pub fn isochoric(&self) -> Result<(T, T)> {
        match (self.i1_iso, self.i2_iso) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::NonPositiveVolume { i3: self.i3.value() }),
        }
    }
}

impl<T: Real> SymTensor3<T> {
    pub fn new(xx: T, yy: T, zz: T, yz: T, xz: T, xy: T) -> Self {
        let diagonal = yz.value() == 0.0 && xz.value() == 0.0 && xy.value() == 0.0;
        Self {
            c: [xx, yy, zz, yz, xz, xy],
            diagonal,
        }
    }

    pub fn diag(xx: T, yy: T, zz: T) -> Self {
        let z = T::zero();
        Self {
            c: [xx, yy, zz, z, z, z],
            diagonal: true,
        }
    }

    pub fn from_diag(d: [T; 3]) -> Self {
        Self::diag(d[0], d[1], d[2])
    }

    pub fn identity() -> Self {
        Self::diag(T::one(), T::one(), T::one())
    }

    pub fn zero() -> Self {
        Self::diag(T::zero(), T::zero(), T::zero())
    }

    /// Symmetric part of a full matrix.
    pub fn from_matrix(m: &Mat3<T>) -> Self {
        let half = |a: T, b: T| (a + b) * 0.5;
        Self::new(
            m[0][0],
            m[1][1],
            m[2][2],
            half(m[1][2], m[2][1]),
            half(m[0][2], m[2][0]),
            half(m[0][1], m[1][0]),
        )
    }

    /// Lifts an `f64` tensor into constants of `T`.
    pub fn lift(a: &SymTensor3<f64>) -> Self {
        Self {
            c: a.c.map(T::cst),
            diagonal: a.diagonal,
        }
    }

    /// Drops derivative information.
    pub fn values(&self) -> SymTensor3<f64> {
        SymTensor3 {
            c: self.c.map(|x| x.value()),
            diagonal: self.diagonal,
        }
    }

    #[inline]
    pub fn is_diagonal(&self) -> bool {
        self.diagonal
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.c[VOIGT[i][j]]
    }

    /// Components in `xx, yy, zz, yz, xz, xy` order.
    pub fn components(&self) -> [T; 6] {
        self.c
    }

    #[inline]
    pub fn diagonal_values(&self) -> [T; 3] {
        [self.c[0], self.c[1], self.c[2]]
    }

    pub fn to_matrix(&self) -> Mat3<T> {
        core::array::from_fn(|i| core::array::from_fn(|j| self.get(i, j)))
    }

    #[inline]
    fn map_diag(&self, f: impl Fn(T) -> T) -> Self {
        Self::diag(f(self.c[0]), f(self.c[1]), f(self.c[2]))
    }

    pub fn scale(&self, s: T) -> Self {
        if self.diagonal {
            return self.map_diag(|x| x * s);
        }
        Self {
            c: self.c.map(|x| x * s),
            diagonal: false,
        }
    }

    pub fn scale_f64(&self, s: f64) -> Self {
        if self.diagonal {
            return self.map_diag(|x| x * s);
        }
        Self {
            c: self.c.map(|x| x * s),
            diagonal: false,
        }
    }

    #[inline]
    pub fn trace(&self) -> T {
        self.c[0] + self.c[1] + self.c[2]
    }

    pub fn det(&self) -> T {
        let [xx, yy, zz, yz, xz, xy] = self.c;
        if self.diagonal {
            return xx * yy * zz;
        }
        xx * (yy * zz - yz * yz) - xy * (xy * zz - yz * xz) + xz * (xy * yz - yy * xz)
    }

    /// `A - tr(A)/3 I`.
    pub fn dev(&self) -> Self {
        let m = self.trace() / 3.0;
        let mut out = *self;
        for k in 0..3 {
            out.c[k] = self.c[k] - m;
        }
        out
    }

    /// `A : B`.
    pub fn ddot(&self, other: &Self) -> T {
        let d = self.c[0] * other.c[0] + self.c[1] * other.c[1] + self.c[2] * other.c[2];
        if self.diagonal || other.diagonal {
            // off-diagonal contributions vanish if either side is diagonal
            return d;
        }
        d + (self.c[3] * other.c[3] + self.c[4] * other.c[4] + self.c[5] * other.c[5]) * 2.0
    }

    pub fn norm(&self) -> T {
        self.ddot(self).sqrt()
    }

    /// Full matrix product `A B` (not symmetric in general).
    pub fn matmul(&self, other: &Self) -> Mat3<T> {
        let a = self.to_matrix();
        let b = other.to_matrix();
        core::array::from_fn(|i| core::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j]))
    }

    /// `A·A`.
    pub fn square(&self) -> Self {
        if self.diagonal {
            return self.map_diag(|x| x * x);
        }
        Self::from_matrix(&self.matmul(self))
    }

    /// Symmetrized product `(A B + B A) / 2`; equals `A B` for coaxial
    /// tensors.
    pub fn sym_product(&self, other: &Self) -> Self {
        if self.diagonal && other.diagonal {
            return Self::diag(self.c[0] * other.c[0], self.c[1] * other.c[1], self.c[2] * other.c[2]);
        }
        Self::from_matrix(&self.matmul(other))
    }

    /// `A B A`, symmetric whenever `A` and `B` are.
    pub fn sandwich(a: &Self, b: &Self) -> Self {
        if a.diagonal && b.diagonal {
            return Self::diag(
                a.c[0] * b.c[0] * a.c[0],
                a.c[1] * b.c[1] * a.c[1],
                a.c[2] * b.c[2] * a.c[2],
            );
        }
        let ab = a.matmul(b);
        let m = a.to_matrix();
        let aba: Mat3<T> = core::array::from_fn(|i| {
            core::array::from_fn(|j| ab[i][0] * m[0][j] + ab[i][1] * m[1][j] + ab[i][2] * m[2][j])
        });
        Self::from_matrix(&aba)
    }

    /// `I2 = (tr²A - tr A²) / 2`.
    pub fn i2(&self) -> T {
        let [xx, yy, zz, yz, xz, xy] = self.c;
        let i2 = xx * yy + yy * zz + xx * zz;
        if self.diagonal {
            return i2;
        }
        i2 - yz * yz - xz * xz - xy * xy
    }

    /// `J2 = tr(dev A)² / 2`.
    pub fn j2(&self) -> T {
        let s = self.dev();
        s.ddot(&s) * 0.5
    }

    /// `J3 = tr(dev A)³ / 3`.
    pub fn j3(&self) -> T {
        // for a traceless tensor tr(s^3)/3 = det(s)
        self.dev().det()
    }

    pub fn invariants(&self) -> InvariantSet<T> {
        let i1 = self.trace();
        let i2 = self.i2();
        let i3 = self.det();
        let (i1_iso, i2_iso) = if i3.value() > 0.0 {
            let cbrt_inv = i3.powf(-1.0 / 3.0);
            (Some(i1 * cbrt_inv), Some(i2 * cbrt_inv * cbrt_inv))
        } else {
            (None, None)
        };
        InvariantSet {
            i1,
            i2,
            i3,
            j2: self.j2(),
            j3: self.j3(),
            i1_iso,
            i2_iso,
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.diagonal {
            let [a, b, c] = self.diagonal_values();
            if a.value() == 0.0 || b.value() == 0.0 || c.value() == 0.0 {
                return Err(Error::Singular {
                    det: (a * b * c).value(),
                });
            }
            return Ok(Self::diag(T::one() / a, T::one() / b, T::one() / c));
        }
        let det = self.det();
        let scale = self.c.iter().fold(0.0f64, |m, x| m.max(libm::fabs(x.value())));
        if libm::fabs(det.value()) <= f64::EPSILON * scale * scale * scale {
            return Err(Error::Singular { det: det.value() });
        }
        let [xx, yy, zz, yz, xz, xy] = self.c;
        let inv = T::one() / det;
        Ok(Self::new(
            (yy * zz - yz * yz) * inv,
            (xx * zz - xz * xz) * inv,
            (xx * yy - xy * xy) * inv,
            (xz * xy - xx * yz) * inv,
            (xy * yz - yy * xz) * inv,
            (yz * xz - xy * zz) * inv,
        ))
    }

    /// Eigenvalues and column eigenvectors (`v[i][k]` is component `i` of
    /// eigenvector `k`).
    pub fn eigen(&self) -> ([T; 3], Mat3<T>) {
        if self.diagonal {
            let z = T::zero();
            let o = T::one();
            return (self.diagonal_values(), [[o, z, z], [z, o, z], [z, z, o]]);
        }
        jacobi_eigen(self.to_matrix())
    }

    /// Applies a scalar function to the eigenvalues.
    pub fn map_spectrum(&self, f: impl Fn(T) -> T) -> Self {
        if self.diagonal {
            return self.map_diag(f);
        }
        let (lam, v) = self.eigen();
        let fl = lam.map(f);
        let m: Mat3<T> = core::array::from_fn(|i| {
            core::array::from_fn(|j| v[i][0] * fl[0] * v[j][0] + v[i][1] * fl[1] * v[j][1] + v[i][2] * fl[2] * v[j][2])
        });
        Self::from_matrix(&m)
    }

    /// Principal square root of a symmetric positive-definite tensor.
    pub fn sym_sqrt(&self) -> Result<Self> {
        let lam = if self.diagonal {
            self.diagonal_values()
        } else {
            self.eigen().0
        };
        let min = lam.iter().fold(f64::INFINITY, |m, x| m.min(x.value()));
        if min <= EIGEN_TOL {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
        }
        Ok(self.map_spectrum(|x| x.sqrt()))
    }

    /// Matrix exponential.
    pub fn sym_exp(&self) -> Self {
        self.map_spectrum(|x| x.exp())
    }
}

impl SymTensor3<f64> {
    /// Smallest eigenvalue, used for positive-definiteness checks.
    pub fn min_eigenvalue(&self) -> f64 {
        let lam = if self.diagonal {
            self.diagonal_values()
        } else {
            self.eigen().0
        };
        lam.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl<T: Real> Add for SymTensor3<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        if self.diagonal && rhs.diagonal {
            return Self::diag(self.c[0] + rhs.c[0], self.c[1] + rhs.c[1], self.c[2] + rhs.c[2]);
        }
        Self {
            c: core::array::from_fn(|k| self.c[k] + rhs.c[k]),
            diagonal: false,
        }
    }
}

impl<T: Real> Sub for SymTensor3<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        if self.diagonal && rhs.diagonal {
            return Self::diag(self.c[0] - rhs.c[0], self.c[1] - rhs.c[1], self.c[2] - rhs.c[2]);
        }
        Self {
            c: core::array::from_fn(|k| self.c[k] - rhs.c[k]),
            diagonal: false,
        }
    }
}

impl<T: Real> Neg for SymTensor3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale_f64(-1.0)
    }
}

impl<T: Real> Mul<T> for SymTensor3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

/// Cyclic Jacobi sweeps on a symmetric 3×3 matrix.
fn jacobi_eigen<T: Real>(mut a: Mat3<T>) -> ([T; 3], Mat3<T>) {
    let z = T::zero();
    let o = T::one();
    let mut v = [[o, z, z], [z, o, z], [z, z, o]];
    let scale = (0..3)
        .flat_map(|i| (0..3).map(move |j| (i, j)))
        .fold(0.0f64, |m, (i, j)| m.max(libm::fabs(a[i][j].value())));
    if scale == 0.0 {
        return ([a[0][0], a[1][1], a[2][2]], v);
    }
    let tol = 1e-30 * scale * scale;
    for _sweep in 0..64 {
        let sq = |x: T| x.value() * x.value();
        let off = sq(a[0][1]) + sq(a[0][2]) + sq(a[1][2]);
        if off <= tol {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = a[p][q];
            if libm::fabs(apq.value()) <= 1e-300 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (apq * 2.0);
            let sgn = if theta.value() >= 0.0 { 1.0 } else { -1.0 };
            let t = T::cst(sgn) / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = T::one() / (t * t + 1.0).sqrt();
            let s = t * c;
            // A <- Jᵀ A J with the Givens rotation J in the (p, q) plane
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = akp * c - akq * s;
                a[k][q] = akp * s + akq * c;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[q][k];
                a[p][k] = apk * c - aqk * s;
                a[q][k] = apk * s + aqk * c;
            }
            for row in v.iter_mut() {
                let vkp = row[p];
                let vkq = row[q];
                row[p] = vkp * c - vkq * s;
                row[q] = vkp * s + vkq * c;
            }
        }
    }
    ([a[0][0], a[1][1], a[2][2]], v)
}

#[cfg(test)]
mod tests {
    use super::*;

    type S = SymTensor3<f64>;

    fn spd() -> S {
        S::new(2.0, 1.5, 3.0, 0.3, -0.2, 0.4)
    }

    fn close(a: &S, b: &S, tol: f64) -> bool {
        a.components()
            .iter()
            .zip(b.components().iter())
            .all(|(x, y)| (x - y).abs() <= tol)
    }

    fn mat_close_identity(m: &Mat3<f64>, tol: f64) -> bool {
        (0..3).all(|i| (0..3).all(|j| (m[i][j] - if i == j { 1.0 } else { 0.0 }).abs() <= tol))
    }

    #[test]
    fn identity_invariants() {
        let inv = S::identity().invariants();
        assert_eq!((inv.i1, inv.i2, inv.i3, inv.j2, inv.j3), (3.0, 3.0, 1.0, 0.0, 0.0));
        assert_eq!(inv.isochoric().unwrap(), (3.0, 3.0));
    }

    #[test]
    fn uniaxial_incompressible_has_unit_det() {
        let inv = S::diag(4.0, 0.5, 0.5).invariants();
        assert!((inv.i3 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diag_2_1_1_invariants() {
        // J2 = 1/2 tr(dev^2), J3 = 1/3 tr(dev^3) with dev = (2/3, -1/3, -1/3)
        let inv = S::diag(2.0, 1.0, 1.0).invariants();
        assert_eq!(inv.i1, 4.0);
        assert_eq!(inv.i2, 5.0);
        assert_eq!(inv.i3, 2.0);
        assert!((inv.j2 - 1.0 / 3.0).abs() < 1e-15);
        assert!((inv.j3 - 2.0 / 27.0).abs() < 1e-15);
    }

    #[test]
    fn isochoric_requires_positive_volume() {
        let inv = S::diag(-1.0, 1.0, 1.0).invariants();
        assert!(matches!(inv.isochoric(), Err(Error::NonPositiveVolume { .. })));
    }

    #[test]
    fn dev_examples() {
        assert_eq!(S::identity().dev(), S::zero());
        assert_eq!(S::diag(3.0, 0.0, 0.0).dev(), S::diag(2.0, -1.0, -1.0));
        let d = spd().dev();
        assert!(d.trace().abs() < 1e-15);
        assert!(close(&d.dev(), &d, 1e-15));
    }

    #[test]
    fn general_invariants_agree_with_matrix_traces() {
        let a = spd();
        let m = a.to_matrix();
        let tr2: f64 = (0..3).map(|i| (0..3).map(|k| m[i][k] * m[k][i]).sum::<f64>()).sum();
        let inv = a.invariants();
        assert!((inv.i2 - 0.5 * (inv.i1 * inv.i1 - tr2)).abs() < 1e-13);
        let s = a.dev().to_matrix();
        let s2: Mat3<f64> = core::array::from_fn(|i| core::array::from_fn(|j| (0..3).map(|k| s[i][k] * s[k][j]).sum()));
        let tr3: f64 = (0..3).map(|i| (0..3).map(|k| s2[i][k] * s[k][i]).sum::<f64>()).sum();
        assert!((inv.j3 - tr3 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn sqrt_examples() {
        assert_eq!(S::identity().sym_sqrt().unwrap(), S::identity());
        assert_eq!(S::diag(4.0, 1.0, 0.25).sym_sqrt().unwrap(), S::diag(2.0, 1.0, 0.5));
        let a = spd();
        let r = a.sym_sqrt().unwrap();
        assert!(close(&r.square(), &a, 1e-12));
        assert!(r.min_eigenvalue() > 0.0);
    }

    #[test]
    fn sqrt_rejects_indefinite() {
        assert!(matches!(
            S::diag(1.0, -1.0, 1.0).sym_sqrt(),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(S::diag(1.0, 1e-13, 1.0).sym_sqrt().is_err());
        assert!(S::new(1.0, 1.0, 1.0, 0.0, 0.0, 2.0).sym_sqrt().is_err());
    }

    #[test]
    fn exp_examples() {
        assert_eq!(S::zero().sym_exp(), S::identity());
        let e = S::diag(0.5, -1.0, 2.0).sym_exp();
        assert_eq!(e, S::diag(libm::exp(0.5), libm::exp(-1.0), libm::exp(2.0)));
        let a = S::new(0.3, -1.2, 1.9, 0.7, -1.5, 0.4);
        let rel = (a.sym_exp().det() - libm::exp(a.trace())).abs() / libm::exp(a.trace());
        assert!(rel < 1e-10);
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(S::identity().inverse().unwrap(), S::identity());
        assert_eq!(S::diag(2.0, 4.0, 0.5).inverse().unwrap(), S::diag(0.5, 0.25, 2.0));
        let a = spd();
        assert!(mat_close_identity(&a.matmul(&a.inverse().unwrap()), 1e-12));
        assert!(matches!(S::diag(1.0, 0.0, 1.0).inverse(), Err(Error::Singular { .. })));
        assert!(S::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0).inverse().is_err());
    }

    #[test]
    fn jacobi_reconstructs() {
        let a = S::new(1.0, 2.0, 3.0, 0.5, 0.25, -0.75);
        let (lam, v) = a.eigen();
        let rebuilt = a.map_spectrum(|x| x);
        assert!(close(&rebuilt, &a, 1e-13));
        // orthonormal eigenvectors
        for p in 0..3 {
            for q in 0..3 {
                let d: f64 = (0..3).map(|i| v[i][p] * v[i][q]).sum();
                assert!((d - if p == q { 1.0 } else { 0.0 }).abs() < 1e-13);
            }
        }
        assert!((lam.iter().sum::<f64>() - a.trace()).abs() < 1e-13);
    }

    #[test]
    fn diagonal_flag_is_preserved() {
        let a = S::diag(1.0, 2.0, 3.0);
        let b = S::diag(0.5, 0.5, 4.0);
        assert!((a + b).is_diagonal());
        assert!(a.sym_product(&b).is_diagonal());
        assert!(S::sandwich(&a, &b).is_diagonal());
        assert!(a.sym_exp().is_diagonal());
        assert!(a.dev().is_diagonal());
        assert!(!spd().is_diagonal());
    }
}
