//! Fixed-size dense complex linear algebra: 2-dimensional single systems and
//! 4-dimensional pairs.
//!
//! Basis convention: index 0 is spin down (vertical polarization), index 1 is
//! spin up (horizontal). Hence `σ_z|0⟩ = -|0⟩` and `σ_z|1⟩ = +|1⟩`. Pair
//! states use A-major ordering `|00⟩, |01⟩, |10⟩, |11⟩`.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::{reduce_phase, Complex, Real};
use crate::tolerance;

/// Plain complex column vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CVector<T, const N: usize>(pub [Complex<T>; N]);

/// Plain dense complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CMatrix<T, const N: usize>(pub [[Complex<T>; N]; N]);

fn c<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

impl<T: Real, const N: usize> CVector<T, N> {
    pub fn zeros() -> Self {
        CVector([Complex::new(T::zero(), T::zero()); N])
    }

    /// Computational basis vector `|i⟩`.
    pub fn basis(i: usize) -> Self {
        let mut v = Self::zeros();
        v.0[i] = Complex::new(T::one(), T::zero());
        v
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| {
                acc + a.conj() * b
            })
    }

    pub fn norm_sqr(&self) -> T {
        self.0.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, k: Complex<T>) -> Self {
        CVector(self.0.map(|a| a * k))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(T::zero(), |m, (a, b)| m.max((a - b).norm()))
    }
}

impl<T: Real, const N: usize> Add for CVector<T, N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        for (o, r) in out.0.iter_mut().zip(rhs.0) {
            *o += r;
        }
        out
    }
}

impl<T: Real, const N: usize> Sub for CVector<T, N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut out = self;
        for (o, r) in out.0.iter_mut().zip(rhs.0) {
            *o -= r;
        }
        out
    }
}

impl<T: Real, const N: usize> CMatrix<T, N> {
    pub fn zeros() -> Self {
        CMatrix([[Complex::new(T::zero(), T::zero()); N]; N])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.0[i][i] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_diag(d: [Complex<T>; N]) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.0[i][i] = d[i];
        }
        m
    }

    pub fn from_columns(cols: [CVector<T, N>; N]) -> Self {
        let mut m = Self::zeros();
        for (j, col) in cols.iter().enumerate() {
            for i in 0..N {
                m.0[i][j] = col.0[i];
            }
        }
        m
    }

    pub fn column(&self, j: usize) -> CVector<T, N> {
        CVector(std::array::from_fn(|i| self.0[i][j]))
    }

    pub fn diagonal(&self) -> [Complex<T>; N] {
        std::array::from_fn(|i| self.0[i][i])
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = self.0[j][i].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> Complex<T> {
        (0..N).fold(Complex::new(T::zero(), T::zero()), |acc, i| acc + self.0[i][i])
    }

    pub fn scale(&self, k: Complex<T>) -> Self {
        CMatrix(self.0.map(|row| row.map(|a| a * k)))
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> T {
        self.0
            .iter()
            .flatten()
            .fold(T::zero(), |m, a| m.max(a.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        (*self - *other).max_abs()
    }

    /// Max-entry magnitude of `M†M - I`.
    pub fn unitarity_deviation(&self) -> T {
        (self.adjoint() * *self - Self::identity()).max_abs()
    }

    pub fn max_off_diagonal(&self) -> T {
        let mut m = T::zero();
        for i in 0..N {
            for j in 0..N {
                if i != j {
                    m = m.max(self.0[i][j].norm());
                }
            }
        }
        m
    }

    /// `[self, other] = self·other - other·self`.
    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }
}

impl<T: Real> CMatrix<T, 2> {
    pub fn det(&self) -> Complex<T> {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }
}

impl<T: Real, const N: usize> Add for CMatrix<T, N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        for i in 0..N {
            for j in 0..N {
                out.0[i][j] += rhs.0[i][j];
            }
        }
        out
    }
}

impl<T: Real, const N: usize> Sub for CMatrix<T, N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut out = self;
        for i in 0..N {
            for j in 0..N {
                out.0[i][j] -= rhs.0[i][j];
            }
        }
        out
    }
}

impl<T: Real, const N: usize> Neg for CMatrix<T, N> {
    type Output = Self;
    fn neg(self) -> Self {
        CMatrix(self.0.map(|row| row.map(|a| -a)))
    }
}

impl<T: Real, const N: usize> Mul for CMatrix<T, N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zeros();
        for i in 0..N {
            for k in 0..N {
                let a = self.0[i][k];
                for j in 0..N {
                    out.0[i][j] += a * rhs.0[k][j];
                }
            }
        }
        out
    }
}

impl<T: Real, const N: usize> Mul<CVector<T, N>> for CMatrix<T, N> {
    type Output = CVector<T, N>;
    fn mul(self, v: CVector<T, N>) -> CVector<T, N> {
        let mut out = CVector::zeros();
        for i in 0..N {
            for j in 0..N {
                out.0[i] += self.0[i][j] * v.0[j];
            }
        }
        out
    }
}

/// Pauli `σ_x` in the spin-down-first basis.
pub fn pauli_x<T: Real>() -> CMatrix<T, 2> {
    let o = T::zero();
    let l = T::one();
    CMatrix([[c(o, o), c(l, o)], [c(l, o), c(o, o)]])
}

/// Pauli `σ_y` in the spin-down-first basis, fixed by `σ_x σ_y = i σ_z`.
pub fn pauli_y<T: Real>() -> CMatrix<T, 2> {
    let o = T::zero();
    let l = T::one();
    CMatrix([[c(o, o), c(o, l)], [c(o, -l), c(o, o)]])
}

/// Pauli `σ_z = diag(-1, +1)` in the spin-down-first basis.
pub fn pauli_z<T: Real>() -> CMatrix<T, 2> {
    let o = T::zero();
    let l = T::one();
    CMatrix([[c(-l, o), c(o, o)], [c(o, o), c(l, o)]])
}

/// Unit direction on the Bloch sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliVector<T> {
    x: T,
    y: T,
    z: T,
}

impl<T: Real> PauliVector<T> {
    /// Accepts a direction whose norm is within the unit-axis tolerance of 1
    /// and renormalizes it exactly.
    pub fn new(x: T, y: T, z: T) -> Result<Self> {
        let n = (x * x + y * y + z * z).sqrt();
        if !n.is_finite() || (n - T::one()).abs() > T::tol(tolerance::UNIT_AXIS) {
            return Err(Error::input(format!(
                "axis ({x}, {y}, {z}) has norm {n}, expected 1"
            )));
        }
        Ok(PauliVector {
            x: x / n,
            y: y / n,
            z: z / n,
        })
    }

    /// Normalizes any finite nonzero direction.
    pub fn normalized(x: T, y: T, z: T) -> Result<Self> {
        let n = (x * x + y * y + z * z).sqrt();
        if !n.is_finite() || n <= T::epsilon() {
            return Err(Error::input(format!(
                "cannot normalize direction ({x}, {y}, {z})"
            )));
        }
        Ok(PauliVector {
            x: x / n,
            y: y / n,
            z: z / n,
        })
    }

    pub(crate) fn from_unit_unchecked(v: [T; 3]) -> Self {
        PauliVector {
            x: v[0],
            y: v[1],
            z: v[2],
        }
    }

    pub fn unit_x() -> Self {
        Self::from_unit_unchecked([T::one(), T::zero(), T::zero()])
    }

    pub fn unit_y() -> Self {
        Self::from_unit_unchecked([T::zero(), T::one(), T::zero()])
    }

    pub fn unit_z() -> Self {
        Self::from_unit_unchecked([T::zero(), T::zero(), T::one()])
    }

    /// Direction at polar angle `theta` from `ẑ` and azimuth `phi`.
    pub fn from_angles(theta: T, phi: T) -> Self {
        Self::from_unit_unchecked([
            theta.sin() * phi.cos(),
            theta.sin() * phi.sin(),
            theta.cos(),
        ])
    }

    pub fn x(&self) -> T {
        self.x
    }
    pub fn y(&self) -> T {
        self.y
    }
    pub fn z(&self) -> T {
        self.z
    }

    pub fn components(&self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(&self, other: &Self) -> T {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &Self) -> [T; 3] {
        cross(self.components(), other.components())
    }

    pub fn negated(&self) -> Self {
        Self::from_unit_unchecked([-self.x, -self.y, -self.z])
    }

    /// Right-handed rotation of `self` about `axis` by `angle` (Rodrigues).
    pub fn rotated(&self, axis: &Self, angle: T) -> Self {
        let (s, co) = angle.sin_cos();
        let k = axis.components();
        let v = self.components();
        let kxv = cross(k, v);
        let kv = axis.dot(self);
        let r: [T; 3] =
            std::array::from_fn(|i| v[i] * co + kxv[i] * s + k[i] * kv * (T::one() - co));
        let n = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        Self::from_unit_unchecked(r.map(|a| a / n))
    }

    /// `n̂·σ`.
    pub fn sigma(&self) -> CMatrix<T, 2> {
        let o = T::zero();
        CMatrix([
            [c(-self.z, o), c(self.x, self.y)],
            [c(self.x, -self.y), c(self.z, o)],
        ])
    }
}

pub(crate) fn cross<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Unit-norm state of a single system (`N = 2`) or a pair (`N = 4`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateVector<T, const N: usize>(CVector<T, N>);

impl<T: Real, const N: usize> StateVector<T, N> {
    pub fn new(amplitudes: [Complex<T>; N]) -> Result<Self> {
        Self::from_vector(CVector(amplitudes))
    }

    pub fn from_vector(v: CVector<T, N>) -> Result<Self> {
        let drift = (v.norm_sqr() - T::one()).abs();
        if !(drift <= T::tol(tolerance::NORM)) {
            return Err(Error::input(format!(
                "state has squared norm {}, expected 1",
                v.norm_sqr()
            )));
        }
        Ok(StateVector(v))
    }

    /// Normalizes a nonzero vector.
    pub fn normalized(v: CVector<T, N>) -> Result<Self> {
        let n = v.norm();
        if !(n > T::epsilon()) {
            return Err(Error::input("cannot normalize a zero vector"));
        }
        Ok(StateVector(v.scale(Complex::new(T::one() / n, T::zero()))))
    }

    pub(crate) fn from_unit_unchecked(v: CVector<T, N>) -> Self {
        StateVector(v)
    }

    pub fn basis(i: usize) -> Self {
        StateVector(CVector::basis(i))
    }

    pub fn vector(&self) -> &CVector<T, N> {
        &self.0
    }

    pub fn amplitudes(&self) -> &[Complex<T>; N] {
        &self.0 .0
    }

    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.0.inner(&other.0)
    }

    /// `|⟨self|other⟩|`.
    pub fn overlap(&self, other: &Self) -> T {
        self.inner(other).norm()
    }

    pub fn apply(&self, u: &UnitaryOperator<T, N>) -> Self {
        StateVector(u.0 * self.0)
    }

    pub fn with_phase(&self, phase: T) -> Self {
        StateVector(self.0.scale(Complex::from_polar(T::one(), phase)))
    }
}

/// Dense unitary operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitaryOperator<T, const N: usize>(CMatrix<T, N>);

impl<T: Real, const N: usize> UnitaryOperator<T, N> {
    pub fn new(m: CMatrix<T, N>) -> Result<Self> {
        Self::new_within(m, tolerance::UNITARY)
    }

    /// Accepts `m` when `M†M` deviates from the identity by at most `tol`.
    pub fn new_within(m: CMatrix<T, N>, tol: f64) -> Result<Self> {
        let dev = m.unitarity_deviation();
        if !(dev <= T::tol(tol)) {
            return Err(Error::input(format!(
                "matrix is not unitary: deviation {dev} exceeds {tol:e}"
            )));
        }
        Ok(UnitaryOperator(m))
    }

    pub(crate) fn from_unitary_unchecked(m: CMatrix<T, N>) -> Self {
        UnitaryOperator(m)
    }

    pub fn identity() -> Self {
        UnitaryOperator(CMatrix::identity())
    }

    pub fn matrix(&self) -> &CMatrix<T, N> {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        UnitaryOperator(self.0.adjoint())
    }

    pub fn apply_vector(&self, v: &CVector<T, N>) -> CVector<T, N> {
        self.0 * *v
    }
}

impl<T: Real, const N: usize> Mul for UnitaryOperator<T, N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        UnitaryOperator(self.0 * rhs.0)
    }
}

/// `exp(-i·angle·(axis·σ)) = cos(angle)·I - i·sin(angle)·(axis·σ)`.
pub fn su2_exp<T: Real>(axis: &PauliVector<T>, angle: T) -> UnitaryOperator<T, 2> {
    let (s, co) = angle.sin_cos();
    let gen = axis.sigma().scale(Complex::new(T::zero(), -s));
    UnitaryOperator(CMatrix::identity().scale(Complex::new(co, T::zero())) + gen)
}

/// Kronecker product `a ⊗ b` with `a` on the major index.
pub fn kron<T: Real>(a: &CMatrix<T, 2>, b: &CMatrix<T, 2>) -> CMatrix<T, 4> {
    let mut m = CMatrix::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    m.0[2 * i + k][2 * j + l] = a.0[i][j] * b.0[k][l];
                }
            }
        }
    }
    m
}

pub fn kron_vector<T: Real>(a: &CVector<T, 2>, b: &CVector<T, 2>) -> CVector<T, 4> {
    CVector(std::array::from_fn(|i| a.0[i / 2] * b.0[i % 2]))
}

/// Composite evolution `a ⊗ b` of two independent systems.
pub fn tensor<T: Real>(
    a: &UnitaryOperator<T, 2>,
    b: &UnitaryOperator<T, 2>,
) -> UnitaryOperator<T, 4> {
    UnitaryOperator(kron(&a.0, &b.0))
}

/// Multiplies `v` by the unimodular factor that makes its largest-magnitude
/// component real positive. Magnitudes tied within the gauge tolerance
/// resolve to the earliest component.
pub fn gauge_fix<T: Real, const N: usize>(v: CVector<T, N>) -> CVector<T, N> {
    let max = v.0.iter().fold(T::zero(), |m, a| m.max(a.norm()));
    if max == T::zero() {
        return v;
    }
    let tie = T::tol(tolerance::GAUGE_TIE);
    let pivot = v
        .0
        .iter()
        .position(|a| a.norm() >= max - tie)
        .unwrap_or(0);
    let a = v.0[pivot];
    v.scale(a.conj() / a.norm())
}

/// Result of [`diagonalize_unitary_2x2`]: `basis† · u · basis = diagonal`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitaryEigen<T> {
    pub basis: UnitaryOperator<T, 2>,
    pub diagonal: UnitaryOperator<T, 2>,
}

impl<T: Real> UnitaryEigen<T> {
    pub fn eigenvalues(&self) -> [Complex<T>; 2] {
        self.diagonal.0.diagonal()
    }

    /// Eigenvalue phases in `(-π, π]`, ascending.
    pub fn phases(&self) -> [T; 2] {
        self.eigenvalues().map(|z| reduce_phase(z.arg()))
    }

    pub fn eigenvector(&self, j: usize) -> CVector<T, 2> {
        self.basis.0.column(j)
    }
}

/// Spectral decomposition of a 2×2 unitary. Eigenvalues are ordered by
/// ascending phase in `(-π, π]`; eigenvectors are gauge-fixed by
/// [`gauge_fix`]. A scalar input returns the identity basis.
pub fn diagonalize_unitary_2x2<T: Real>(u: &CMatrix<T, 2>) -> Result<UnitaryEigen<T>> {
    let dev = u.unitarity_deviation();
    if !(dev <= T::tol(tolerance::UNITARY)) {
        return Err(Error::input(format!(
            "cannot diagonalize: input deviates from unitarity by {dev}"
        )));
    }
    let [[a, b], [cc, d]] = u.0;
    let half = Complex::new(T::lit(0.5), T::zero());
    let half_tr = (a + d) * half;
    let disc = (half_tr * half_tr - u.det()).sqrt();
    let lambda = half_tr - disc;

    // Two algebraically equivalent eigenvector candidates; keep the better
    // conditioned one.
    let cand1 = CVector([b, lambda - a]);
    let cand2 = CVector([lambda - d, cc]);
    let best = if cand1.norm_sqr() >= cand2.norm_sqr() {
        cand1
    } else {
        cand2
    };
    let v0 = if best.norm() <= T::tol(tolerance::ALGEBRAIC) {
        CVector::basis(0)
    } else {
        best.scale(Complex::new(T::one() / best.norm(), T::zero()))
    };
    let v1 = CVector([-v0.0[1].conj(), v0.0[0].conj()]);

    let rayleigh = |v: &CVector<T, 2>| {
        let z = v.inner(&(*u * *v));
        z / z.norm()
    };
    let mut pairs = [(rayleigh(&v0), v0), (rayleigh(&v1), v1)];
    let ph = |z: &Complex<T>| reduce_phase(z.arg());
    if ph(&pairs[1].0) < ph(&pairs[0].0) {
        pairs.swap(0, 1);
    }
    let basis = CMatrix::from_columns([gauge_fix(pairs[0].1), gauge_fix(pairs[1].1)]);
    Ok(UnitaryEigen {
        basis: UnitaryOperator(basis),
        diagonal: UnitaryOperator(CMatrix::from_diag([pairs[0].0, pairs[1].0])),
    })
}
