//! Complex 2x2 matrices with the Pauli-basis helpers used throughout the crate.

use num_complex::Complex64;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Dense complex 2x2 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m: [[Complex64; 2]; 2],
}

impl Mat2 {
    pub const fn new(m: [[Complex64; 2]; 2]) -> Self {
        Self { m }
    }

    pub fn zero() -> Self {
        Self::new([[Complex64::ZERO; 2]; 2])
    }

    pub fn identity() -> Self {
        let o = Complex64::ONE;
        let z = Complex64::ZERO;
        Self::new([[o, z], [z, o]])
    }

    pub fn pauli_x() -> Self {
        let o = Complex64::ONE;
        let z = Complex64::ZERO;
        Self::new([[z, o], [o, z]])
    }

    pub fn pauli_y() -> Self {
        let z = Complex64::ZERO;
        Self::new([[z, -I], [I, z]])
    }

    pub fn pauli_z() -> Self {
        let o = Complex64::ONE;
        let z = Complex64::ZERO;
        Self::new([[o, z], [z, -o]])
    }

    /// Hermitian matrix a0*I + a.sigma from real Pauli coordinates.
    pub fn from_pauli(a0: f64, a: [f64; 3]) -> Self {
        let mut out = Self::identity().scale(a0.into());
        out = out.add(&Self::pauli_x().scale(a[0].into()));
        out = out.add(&Self::pauli_y().scale(a[1].into()));
        out = out.add(&Self::pauli_z().scale(a[2].into()));
        out
    }

    /// Real Pauli coordinates (a0, a) of a (nearly) Hermitian matrix.
    /// a0 = Re tr(M)/2, a_i = Re tr(M sigma_i)/2.
    pub fn to_pauli(&self) -> (f64, [f64; 3]) {
        let a0 = 0.5 * (self.m[0][0] + self.m[1][1]).re;
        let ax = 0.5 * (self.m[0][1] + self.m[1][0]).re;
        let ay = 0.5 * (self.m[1][0].im - self.m[0][1].im);
        let az = 0.5 * (self.m[0][0] - self.m[1][1]).re;
        (a0, [ax, ay, az])
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = Self::zero();
        for i in 0..2 {
            for j in 0..2 {
                out.m[i][j] = self.m[i][0] * rhs.m[0][j] + self.m[i][1] * rhs.m[1][j];
            }
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = *self;
        for i in 0..2 {
            for j in 0..2 {
                out.m[i][j] += rhs.m[i][j];
            }
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let mut out = *self;
        for i in 0..2 {
            for j in 0..2 {
                out.m[i][j] -= rhs.m[i][j];
            }
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = *self;
        for i in 0..2 {
            for j in 0..2 {
                out.m[i][j] *= c;
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self::new([
            [self.m[0][0].conj(), self.m[1][0].conj()],
            [self.m[0][1].conj(), self.m[1][1].conj()],
        ])
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    /// Largest deviation |M - M^dagger| over elements.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.sub(&self.adjoint());
        d.m.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Eigenvalues of a Hermitian matrix, ascending: a0 -/+ |a|.
    pub fn eigvals_hermitian(&self) -> (f64, f64) {
        let (a0, a) = self.to_pauli();
        let r = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        (a0 - r, a0 + r)
    }

    /// Clip the eigenvalues of a Hermitian matrix to be >= 0.
    pub fn psd_clip(&self) -> Self {
        let (a0, a) = self.to_pauli();
        let r = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        let (lo, hi) = (a0 - r, a0 + r);
        if lo >= 0.0 {
            return Self::from_pauli(a0, a);
        }
        let hi = hi.max(0.0);
        if r == 0.0 {
            return Self::from_pauli(hi / 2.0, [0.0; 3]);
        }
        // keep only the clipped spectrum on the same eigenbasis
        let unit = [a[0] / r, a[1] / r, a[2] / r];
        let new_a0 = hi / 2.0;
        Self::from_pauli(
            new_a0,
            [unit[0] * new_a0, unit[1] * new_a0, unit[2] * new_a0],
        )
    }

    /// Inverse square root of a Hermitian positive definite matrix.
    pub fn inv_sqrt_hermitian(&self) -> Option<Self> {
        let (a0, a) = self.to_pauli();
        let r = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        let (lo, hi) = (a0 - r, a0 + r);
        if lo <= 0.0 {
            return None;
        }
        let (flo, fhi) = (1.0 / lo.sqrt(), 1.0 / hi.sqrt());
        // f(M) = f(lo) P_lo + f(hi) P_hi with P_± = (I ± a_hat.sigma)/2
        let b0 = 0.5 * (fhi + flo);
        let scale = if r == 0.0 { 0.0 } else { 0.5 * (fhi - flo) / r };
        Some(Self::from_pauli(
            b0,
            [a[0] * scale, a[1] * scale, a[2] * scale],
        ))
    }

    /// Projector |v><v| for a (not necessarily normalized) spinor.
    pub fn projector(v: [Complex64; 2]) -> Self {
        let n2 = v[0].norm_sqr() + v[1].norm_sqr();
        Self::new([
            [v[0] * v[0].conj() / n2, v[0] * v[1].conj() / n2],
            [v[1] * v[0].conj() / n2, v[1] * v[1].conj() / n2],
        ])
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        let d = self.sub(rhs);
        d.m.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max)
    }
}
