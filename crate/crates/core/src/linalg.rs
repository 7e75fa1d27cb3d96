//! Fixed-size complex linear algebra for the two-level system.
//!
//! Everything here is `Copy` and allocation-free. The general eigensolver
//! [`eig2`] and the matrix exponential [`expm2`] work for arbitrary (not
//! necessarily normal) 2×2 matrices, which is what a non-Hermitian
//! Hamiltonian needs.

use std::ops::{Add, Mul, Neg, Sub};

pub use num_complex::Complex64 as Complex;

pub const ZERO: Complex = Complex::new(0.0, 0.0);
pub const ONE: Complex = Complex::new(1.0, 0.0);
pub const I: Complex = Complex::new(0.0, 1.0);

/// Relative eigenvalue gap below which [`eig2`] reports coalescence.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// A two-component complex state vector in the {|0⟩, |1⟩} basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CVec2 {
    pub c0: Complex,
    pub c1: Complex,
}

impl CVec2 {
    pub const fn new(c0: Complex, c1: Complex) -> Self {
        Self { c0, c1 }
    }

    pub fn real(c0: f64, c1: f64) -> Self {
        Self::new(Complex::new(c0, 0.0), Complex::new(c1, 0.0))
    }

    pub fn zero() -> Self {
        Self::new(ZERO, ZERO)
    }

    /// Euclidean inner product ⟨self|other⟩ (conjugate-linear in `self`).
    pub fn dot(&self, other: &CVec2) -> Complex {
        self.c0.conj() * other.c0 + self.c1.conj() * other.c1
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c0.norm_sqr() + self.c1.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: Complex) -> CVec2 {
        CVec2::new(self.c0 * s, self.c1 * s)
    }

    pub fn conj(&self) -> CVec2 {
        CVec2::new(self.c0.conj(), self.c1.conj())
    }

    pub fn normalized(&self) -> CVec2 {
        let n = self.norm();
        self.scale(Complex::new(1.0 / n, 0.0))
    }

    pub fn is_finite(&self) -> bool {
        self.c0.is_finite() && self.c1.is_finite()
    }

    pub fn as_array(&self) -> [Complex; 2] {
        [self.c0, self.c1]
    }

    pub fn from_array(a: [Complex; 2]) -> Self {
        Self::new(a[0], a[1])
    }
}

impl Add for CVec2 {
    type Output = CVec2;
    fn add(self, rhs: CVec2) -> CVec2 {
        CVec2::new(self.c0 + rhs.c0, self.c1 + rhs.c1)
    }
}

impl Sub for CVec2 {
    type Output = CVec2;
    fn sub(self, rhs: CVec2) -> CVec2 {
        CVec2::new(self.c0 - rhs.c0, self.c1 - rhs.c1)
    }
}

impl Neg for CVec2 {
    type Output = CVec2;
    fn neg(self) -> CVec2 {
        CVec2::new(-self.c0, -self.c1)
    }
}

impl Mul<CVec2> for Complex {
    type Output = CVec2;
    fn mul(self, rhs: CVec2) -> CVec2 {
        rhs.scale(self)
    }
}

/// A complex 2×2 matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CMat2 {
    pub m: [[Complex; 2]; 2],
}

impl CMat2 {
    pub const fn new(a: Complex, b: Complex, c: Complex, d: Complex) -> Self {
        Self { m: [[a, b], [c, d]] }
    }

    pub fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn diag(a: Complex, d: Complex) -> Self {
        Self::new(a, ZERO, ZERO, d)
    }

    pub fn sigma_x() -> Self {
        Self::new(ZERO, ONE, ONE, ZERO)
    }

    pub fn sigma_y() -> Self {
        Self::new(ZERO, -I, I, ZERO)
    }

    pub fn sigma_z() -> Self {
        Self::new(ONE, ZERO, ZERO, -ONE)
    }

    pub fn transpose(&self) -> Self {
        let [[a, b], [c, d]] = self.m;
        Self::new(a, c, b, d)
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn adjoint(&self) -> Self {
        self.transpose().conj()
    }

    pub fn trace(&self) -> Complex {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> Complex {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.m.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: Complex) -> Self {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(Complex) -> Complex) -> Self {
        let [[a, b], [c, d]] = self.m;
        Self::new(f(a), f(b), f(c), f(d))
    }

    pub fn apply(&self, v: &CVec2) -> CVec2 {
        let [[a, b], [c, d]] = self.m;
        CVec2::new(a * v.c0 + b * v.c1, c * v.c0 + d * v.c1)
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|z| z.is_finite())
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Add for CMat2 {
    type Output = CMat2;
    fn add(self, rhs: CMat2) -> CMat2 {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.m[i][j] += rhs.m[i][j];
            }
        }
        out
    }
}

impl Sub for CMat2 {
    type Output = CMat2;
    fn sub(self, rhs: CMat2) -> CMat2 {
        self + rhs.scale(-ONE)
    }
}

impl Mul for CMat2 {
    type Output = CMat2;
    fn mul(self, rhs: CMat2) -> CMat2 {
        let a = &self.m;
        let b = &rhs.m;
        let mut out = CMat2::zero();
        for i in 0..2 {
            for j in 0..2 {
                out.m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }
}

impl Mul<CVec2> for CMat2 {
    type Output = CVec2;
    fn mul(self, rhs: CVec2) -> CVec2 {
        self.apply(&rhs)
    }
}

impl Mul<CMat2> for Complex {
    type Output = CMat2;
    fn mul(self, rhs: CMat2) -> CMat2 {
        rhs.scale(self)
    }
}

/// Eigen-decomposition of a general 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eig2 {
    /// Ordered by descending real part, then descending imaginary part.
    pub values: [Complex; 2],
    /// Euclidean-normalized right eigenvectors matching `values`.
    pub vectors: [CVec2; 2],
    /// Set when the eigenvalue gap is below [`DEGENERACY_TOL`] relative to
    /// the matrix scale. Both slots then hold the coalesced pair.
    pub degenerate: bool,
}

fn scale_of(m: &CMat2) -> f64 {
    m.max_abs().max(f64::MIN_POSITIVE)
}

/// Null vector of `m − λI`, picking whichever of the two algebraic candidates
/// is better conditioned.
fn eigvec(m: &CMat2, lambda: Complex) -> CVec2 {
    let [[a, b], [c, d]] = m.m;
    let from_row0 = CVec2::new(b, lambda - a);
    let from_row1 = CVec2::new(lambda - d, c);
    let v = if from_row0.norm_sqr() >= from_row1.norm_sqr() {
        from_row0
    } else {
        from_row1
    };
    if v.norm_sqr() == 0.0 {
        // m is a multiple of the identity; any basis works.
        CVec2::real(1.0, 0.0)
    } else {
        v.normalized()
    }
}

fn ordered(x: Complex, y: Complex, scale: f64) -> bool {
    let tie = 1e-12 * scale;
    if (x.re - y.re).abs() > tie {
        x.re > y.re
    } else {
        x.im >= y.im
    }
}

/// Eigenvalues and eigenvectors of an arbitrary complex 2×2 matrix.
pub fn eig2(m: &CMat2) -> Eig2 {
    let [[a, b], [c, d]] = m.m;
    let scale = scale_of(m);
    let mean = (a + d) * 0.5;
    let half_gap = ((a - d) * (a - d) * 0.25 + b * c).sqrt();
    let (mut l1, mut l2) = (mean + half_gap, mean - half_gap);
    if !ordered(l1, l2, scale) {
        std::mem::swap(&mut l1, &mut l2);
    }
    let degenerate = (l1 - l2).norm() <= DEGENERACY_TOL * scale;
    if degenerate {
        let v = eigvec(m, mean);
        return Eig2 { values: [mean, mean], vectors: [v, v], degenerate };
    }
    Eig2 { values: [l1, l2], vectors: [eigvec(m, l1), eigvec(m, l2)], degenerate }
}

/// sinh(q)/q, even in q.
fn sinhc(q: Complex) -> Complex {
    if q.norm() < 1e-3 {
        let q2 = q * q;
        // 1 + q²/6 + q⁴/120 + q⁶/5040
        ONE + q2 / 6.0 + q2 * q2 / 120.0 + q2 * q2 * q2 / 5040.0
    } else {
        q.sinh() / q
    }
}

/// Matrix exponential of a 2×2 complex matrix.
///
/// With μ = tr/2 and q² = ((a−d)/2)² + bc, every 2×2 matrix satisfies
/// exp(M) = e^μ [cosh(q) I + sinh(q)/q (M − μI)]. Both cosh(q) and
/// sinh(q)/q are even, so the branch of q is irrelevant, and the small-q
/// series keeps coalescing eigenvalues well behaved.
pub fn expm2(m: &CMat2) -> CMat2 {
    let [[a, b], [c, d]] = m.m;
    let mu = (a + d) * 0.5;
    let q = ((a - d) * (a - d) * 0.25 + b * c).sqrt();
    let ch = q.cosh();
    let sc = sinhc(q);
    let shifted = *m - CMat2::identity().scale(mu);
    (CMat2::identity().scale(ch) + shifted.scale(sc)).scale(mu.exp())
}
