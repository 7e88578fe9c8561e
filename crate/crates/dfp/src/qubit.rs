//! Qubit states on the Bloch sphere, the six Pauli fiducials, the two-phase
//! channel, quasi-probability decompositions and the pure-state quantum Fisher
//! information.

use num_complex::Complex64;
use thiserror::Error;

use crate::fisher::FisherMatrix;
use crate::mat2::Mat2;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Tolerance on |r| = 1 for pure states.
pub const PURITY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum QubitError {
    #[error("Bloch vector has non-finite components")]
    NonFinite,
    #[error("Bloch vector norm {0} is not 1 within {PURITY_TOL}")]
    NotPure(f64),
    #[error("Bloch vector norm {0} exceeds 1")]
    OutsideSphere(f64),
    #[error("matrix is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix trace {0} is not 1")]
    BadTrace(f64),
    #[error("matrix has negative eigenvalue {0:.3e}")]
    NotPositive(f64),
}

/// A pure qubit state as a unit Bloch vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureQubit {
    bloch: [f64; 3],
}

impl PureQubit {
    pub fn new(bloch: [f64; 3]) -> Result<Self, QubitError> {
        if !bloch.iter().all(|c| c.is_finite()) {
            return Err(QubitError::NonFinite);
        }
        let n = norm3(bloch);
        if (n - 1.0).abs() > PURITY_TOL {
            return Err(QubitError::NotPure(n));
        }
        Ok(Self { bloch })
    }

    /// Spherical parametrization: polar angle from +z, azimuth from +x.
    pub fn from_spherical(polar: f64, azimuth: f64) -> Self {
        let (sp, cp) = polar.sin_cos();
        let (sa, ca) = azimuth.sin_cos();
        Self {
            bloch: [sp * ca, sp * sa, cp],
        }
    }

    pub fn bloch(&self) -> [f64; 3] {
        self.bloch
    }

    /// Spinor (cos(t/2), e^{i phi} sin(t/2)); (0,1,0) maps to (1, i)/sqrt(2).
    pub fn spinor(&self) -> [Complex64; 2] {
        let [x, y, z] = self.bloch;
        let polar = z.clamp(-1.0, 1.0).acos();
        let azimuth = y.atan2(x);
        let half = 0.5 * polar;
        [
            Complex64::new(half.cos(), 0.0),
            Complex64::from_polar(half.sin(), azimuth),
        ]
    }
}

/// A 2x2 density matrix (Hermitian, unit trace, positive semidefinite).
#[derive(Debug, Clone, Copy)]
pub struct DensityMatrix2 {
    mat: Mat2,
}

impl DensityMatrix2 {
    pub fn new(mat: Mat2) -> Result<Self, QubitError> {
        let defect = mat.hermiticity_defect();
        if defect > 1e-12 {
            return Err(QubitError::NotHermitian(defect));
        }
        let tr = mat.trace().re;
        if (tr - 1.0).abs() > 1e-12 {
            return Err(QubitError::BadTrace(tr));
        }
        let (lo, _) = mat.eigvals_hermitian();
        if lo < -1e-12 {
            return Err(QubitError::NotPositive(lo));
        }
        Ok(Self { mat })
    }

    /// rho = (I + r.sigma)/2 for any Bloch vector with |r| <= 1.
    pub fn from_bloch(bloch: [f64; 3]) -> Result<Self, QubitError> {
        if !bloch.iter().all(|c| c.is_finite()) {
            return Err(QubitError::NonFinite);
        }
        let n = norm3(bloch);
        if n > 1.0 + PURITY_TOL {
            return Err(QubitError::OutsideSphere(n));
        }
        Ok(Self {
            mat: Mat2::from_pauli(0.5, [bloch[0] / 2.0, bloch[1] / 2.0, bloch[2] / 2.0]),
        })
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.mat
    }

    /// Bloch vector r_i = tr(rho sigma_i).
    pub fn bloch(&self) -> [f64; 3] {
        let (_, a) = self.mat.to_pauli();
        [2.0 * a[0], 2.0 * a[1], 2.0 * a[2]]
    }
}

/// rho = (I + r.sigma)/2 of a pure state.
pub fn density_of(state: &PureQubit) -> DensityMatrix2 {
    DensityMatrix2::from_bloch(state.bloch()).expect("unit Bloch vector is inside the sphere")
}

/// The six Pauli eigenstate fiducials, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fiducial {
    H,
    V,
    D,
    A,
    R,
    L,
}

pub const FIDUCIALS: [Fiducial; 6] = [
    Fiducial::H,
    Fiducial::V,
    Fiducial::D,
    Fiducial::A,
    Fiducial::R,
    Fiducial::L,
];

impl Fiducial {
    pub fn index(self) -> usize {
        match self {
            Fiducial::H => 0,
            Fiducial::V => 1,
            Fiducial::D => 2,
            Fiducial::A => 3,
            Fiducial::R => 4,
            Fiducial::L => 5,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Fiducial::H => "H",
            Fiducial::V => "V",
            Fiducial::D => "D",
            Fiducial::A => "A",
            Fiducial::R => "R",
            Fiducial::L => "L",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "H" => Some(Fiducial::H),
            "V" => Some(Fiducial::V),
            "D" => Some(Fiducial::D),
            "A" => Some(Fiducial::A),
            "R" => Some(Fiducial::R),
            "L" => Some(Fiducial::L),
            _ => None,
        }
    }

    /// Bloch axis (0 = x for D/A, 1 = y for R/L, 2 = z for H/V) and sign.
    pub fn axis_sign(self) -> (usize, f64) {
        match self {
            Fiducial::H => (2, 1.0),
            Fiducial::V => (2, -1.0),
            Fiducial::D => (0, 1.0),
            Fiducial::A => (0, -1.0),
            Fiducial::R => (1, 1.0),
            Fiducial::L => (1, -1.0),
        }
    }

    pub fn bloch(self) -> [f64; 3] {
        let (axis, sign) = self.axis_sign();
        let mut r = [0.0; 3];
        r[axis] = sign;
        r
    }

    pub fn state(self) -> PureQubit {
        PureQubit {
            bloch: self.bloch(),
        }
    }
}

/// Quasi-probability coefficients over the six fiducials, canonical order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub c: [f64; 6],
}

impl Coefficients {
    pub fn get(&self, f: Fiducial) -> f64 {
        self.c[f.index()]
    }

    pub fn sum(&self) -> f64 {
        self.c.iter().sum()
    }

    fn from_bloch_linear(r: [f64; 3], with_offset: bool) -> Self {
        let base = if with_offset { 1.0 / 6.0 } else { 0.0 };
        let mut c = [0.0; 6];
        for f in FIDUCIALS {
            let (axis, sign) = f.axis_sign();
            c[f.index()] = base + sign * r[axis] / 2.0;
        }
        Self { c }
    }
}

/// Order of the two non-commuting channel unitaries, written as an operator
/// product (the rightmost factor acts first).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelOrder {
    /// V(chi) . U(phi): the Z phase shift acts first.
    Vu,
    /// U(phi) . V(chi): the X rotation acts first.
    Uv,
}

/// Parameters of the two-phase channel: a phase shift phi about Z and a
/// rotation chi about X, applied in the declared order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub phi: f64,
    pub chi: f64,
    pub order: ChannelOrder,
}

impl ChannelParams {
    pub fn new(phi: f64, chi: f64, order: ChannelOrder) -> Result<Self, QubitError> {
        if !phi.is_finite() || !chi.is_finite() {
            return Err(QubitError::NonFinite);
        }
        Ok(Self { phi, chi, order })
    }
}

/// U(phi) = diag(e^{-i phi/2}, e^{i phi/2}).
pub fn unitary_u(phi: f64) -> Mat2 {
    let z = Complex64::ZERO;
    Mat2::new([
        [Complex64::from_polar(1.0, -phi / 2.0), z],
        [z, Complex64::from_polar(1.0, phi / 2.0)],
    ])
}

/// V(chi) = [[cos(chi/2), -i sin(chi/2)], [-i sin(chi/2), cos(chi/2)]].
pub fn unitary_v(chi: f64) -> Mat2 {
    let c = Complex64::new((chi / 2.0).cos(), 0.0);
    let s = -I * (chi / 2.0).sin();
    Mat2::new([[c, s], [s, c]])
}

fn total_unitary(params: &ChannelParams) -> Mat2 {
    let u = unitary_u(params.phi);
    let v = unitary_v(params.chi);
    match params.order {
        ChannelOrder::Vu => v.mul(&u),
        ChannelOrder::Uv => u.mul(&v),
    }
}

/// Apply the channel to a pure state.
pub fn evolve(state: &PureQubit, params: &ChannelParams) -> Result<PureQubit, QubitError> {
    if !params.phi.is_finite() || !params.chi.is_finite() {
        return Err(QubitError::NonFinite);
    }
    let psi = total_unitary(params).apply(state.spinor());
    let x = 2.0 * (psi[0].conj() * psi[1]).re;
    let y = 2.0 * (psi[0].conj() * psi[1]).im;
    let z = psi[0].norm_sqr() - psi[1].norm_sqr();
    PureQubit::new(renormalize([x, y, z]))
}

fn renormalize(r: [f64; 3]) -> [f64; 3] {
    let n = norm3(r);
    [r[0] / n, r[1] / n, r[2] / n]
}

/// Canonical symmetric decomposition rho = sum_a C_a |a><a| over the six
/// fiducials: C_{+-i} = 1/6 +- r_i/2.
pub fn decompose(rho: &DensityMatrix2) -> Coefficients {
    Coefficients::from_bloch_linear(rho.bloch(), true)
}

// 3x3 Bloch rotations of the channel and their parameter derivatives.

fn rot_z(phi: f64) -> [[f64; 3]; 3] {
    let (s, c) = phi.sin_cos();
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}

fn drot_z(phi: f64) -> [[f64; 3]; 3] {
    let (s, c) = phi.sin_cos();
    [[-s, -c, 0.0], [c, -s, 0.0], [0.0, 0.0, 0.0]]
}

fn rot_x(chi: f64) -> [[f64; 3]; 3] {
    let (s, c) = chi.sin_cos();
    [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]
}

fn drot_x(chi: f64) -> [[f64; 3]; 3] {
    let (s, c) = chi.sin_cos();
    [[0.0, 0.0, 0.0], [0.0, -s, -c], [0.0, c, -s]]
}

fn mat3_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for (k, bk) in b.iter().enumerate() {
                out[i][j] += a[i][k] * bk[j];
            }
        }
    }
    out
}

fn mat3_apply(a: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = a[i][0] * v[0] + a[i][1] * v[1] + a[i][2] * v[2];
    }
    out
}

/// Evolved Bloch vector of a probe together with its analytic derivatives
/// with respect to phi and chi.
pub fn bloch_evolution(
    probe: &PureQubit,
    params: &ChannelParams,
) -> ([f64; 3], [f64; 3], [f64; 3]) {
    let rz = rot_z(params.phi);
    let rx = rot_x(params.chi);
    let dz = drot_z(params.phi);
    let dx = drot_x(params.chi);
    let (rot, dphi, dchi) = match params.order {
        ChannelOrder::Vu => (mat3_mul(&rx, &rz), mat3_mul(&rx, &dz), mat3_mul(&dx, &rz)),
        ChannelOrder::Uv => (mat3_mul(&rz, &rx), mat3_mul(&dz, &rx), mat3_mul(&rz, &dx)),
    };
    let r0 = probe.bloch();
    (
        mat3_apply(&rot, r0),
        mat3_apply(&dphi, r0),
        mat3_apply(&dchi, r0),
    )
}

/// Analytic derivatives (d/dphi C, d/dchi C) of the decomposition
/// coefficients of the evolved probe.
pub fn coefficient_derivatives(
    probe: &PureQubit,
    params: &ChannelParams,
) -> (Coefficients, Coefficients) {
    let (_, dr_phi, dr_chi) = bloch_evolution(probe, params);
    (
        Coefficients::from_bloch_linear(dr_phi, false),
        Coefficients::from_bloch_linear(dr_chi, false),
    )
}

fn inner(a: [Complex64; 2], b: [Complex64; 2]) -> Complex64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

/// Pure-state quantum Fisher information matrix for (phi, chi),
/// H_ij = 4 Re(<di psi|dj psi> - <di psi|psi><psi|dj psi>).
pub fn qfi_matrix(probe: &PureQubit, params: &ChannelParams) -> FisherMatrix {
    let u = unitary_u(params.phi);
    let v = unitary_v(params.chi);
    let gz = Mat2::pauli_z().scale(-I * 0.5);
    let gx = Mat2::pauli_x().scale(-I * 0.5);
    let psi0 = probe.spinor();

    let (psi, dphi, dchi) = match params.order {
        ChannelOrder::Vu => {
            let upsi = u.apply(psi0);
            let psi = v.apply(upsi);
            (psi, v.apply(gz.apply(upsi)), gx.apply(psi))
        }
        ChannelOrder::Uv => {
            let vpsi = v.apply(psi0);
            let psi = u.apply(vpsi);
            (psi, gz.apply(psi), u.apply(gx.apply(vpsi)))
        }
    };

    let ds = [dphi, dchi];
    let mut h = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let term = inner(ds[i], ds[j]) - inner(ds[i], psi) * inner(psi, ds[j]);
            h[i][j] = 4.0 * term.re;
        }
    }
    // symmetrize away floating-point asymmetry
    let off = 0.5 * (h[0][1] + h[1][0]);
    FisherMatrix::new_2x2(h[0][0], h[1][1], off, ["phi", "chi"])
}

fn norm3(r: [f64; 3]) -> f64 {
    (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt()
}
