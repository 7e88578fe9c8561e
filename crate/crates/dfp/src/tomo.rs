//! Baseline detector tomography: synthetic data-fitting patterns from a known
//! POVM, constrained least-squares reconstruction, and the Born-rule Fisher
//! information predictor used for route comparisons.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::fisher::{
    fisher_from_probabilities, DfpTable, FisherError, FisherMatrix, ParamSet, ProbabilityVector,
    DEFAULT_NORM_TOL,
};
use crate::mat2::Mat2;
use crate::qubit::{bloch_evolution, ChannelParams, PureQubit, FIDUCIALS};

#[derive(Debug, Error)]
pub enum TomoError {
    #[error("POVM element {index} is not Hermitian (defect {defect:.3e})")]
    NotHermitian { index: usize, defect: f64 },
    #[error("POVM element {index} has eigenvalue {eig:.3e} < -1e-9")]
    NotPositive { index: usize, eig: f64 },
    #[error("POVM elements sum to identity with defect {0:.3e} > 1e-9")]
    NotComplete(f64),
    #[error("POVM needs at least 2 outcomes, got {0}")]
    TooFewOutcomes(usize),
    #[error("negative noise level {0}")]
    NegativeNoise(f64),
    #[error("reconstruction degenerate: clipped elements sum is singular")]
    DegenerateSum,
    #[error(transparent)]
    Fisher(#[from] FisherError),
}

/// A qubit measurement: Hermitian PSD outcome matrices summing to identity.
#[derive(Debug, Clone)]
pub struct Povm {
    elements: Vec<Mat2>,
}

impl Povm {
    pub fn new(elements: Vec<Mat2>) -> Result<Self, TomoError> {
        if elements.len() < 2 {
            return Err(TomoError::TooFewOutcomes(elements.len()));
        }
        let mut sum = Mat2::zero();
        for (index, e) in elements.iter().enumerate() {
            let defect = e.hermiticity_defect();
            if defect > 1e-10 {
                return Err(TomoError::NotHermitian { index, defect });
            }
            let (eig, _) = e.eigvals_hermitian();
            if eig < -1e-9 {
                return Err(TomoError::NotPositive { index, eig });
            }
            sum = sum.add(e);
        }
        let defect = sum.max_abs_diff(&Mat2::identity());
        if defect > 1e-9 {
            return Err(TomoError::NotComplete(defect));
        }
        Ok(Self { elements })
    }

    pub fn n_outcomes(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Mat2] {
        &self.elements
    }

    /// Born-rule row q[alpha][m] = Tr(Pi_m |alpha><alpha|) for each fiducial,
    /// with optional Gaussian perturbation; deterministic for a fixed seed.
    pub fn synth_dfp(&self, noise_sigma: f64, seed: u64) -> Result<DfpTable, TomoError> {
        if noise_sigma < 0.0 {
            return Err(TomoError::NegativeNoise(noise_sigma));
        }
        let m = self.n_outcomes();
        let pauli: Vec<(f64, [f64; 3])> = self.elements.iter().map(|e| e.to_pauli()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::with_capacity(6);
        for f in FIDUCIALS {
            let r = f.bloch();
            let row: Vec<f64> = pauli
                .iter()
                .map(|(a0, a)| {
                    let born = a0 + a[0] * r[0] + a[1] * r[1] + a[2] * r[2];
                    let noise: f64 = StandardNormal.sample(&mut rng);
                    born + noise_sigma * noise
                })
                .collect();
            rows.push(row);
        }
        let tol = DEFAULT_NORM_TOL.max(noise_sigma * 10.0 * (m as f64).sqrt());
        let labels = (0..m).map(|i| i.to_string()).collect();
        Ok(DfpTable::new(labels, rows, tol)?)
    }
}

/// Projective two-outcome measurement along a Bloch axis.
pub fn povm_projective(axis: [f64; 3]) -> Povm {
    let plus = Mat2::from_pauli(0.5, [axis[0] / 2.0, axis[1] / 2.0, axis[2] / 2.0]);
    let minus = Mat2::identity().sub(&plus);
    Povm::new(vec![plus, minus]).expect("projective pair is a valid POVM")
}

/// Four-outcome split measurement: a beamsplitter with intensity
/// transmissions (t_h, t_v) sends the transmitted arm to an H/V analysis and
/// the reflected arm to a D/A analysis. Outcomes ordered Z+, Z-, X+, X-.
pub fn povm_zx(t_h: f64, t_v: f64) -> Result<Povm, TomoError> {
    let z = Complex64::ZERO;
    let zp = Mat2::new([[Complex64::new(t_h, 0.0), z], [z, z]]);
    let zm = Mat2::new([[z, z], [z, Complex64::new(t_v, 0.0)]]);
    let rh = (1.0 - t_h).sqrt();
    let rv = (1.0 - t_v).sqrt();
    let xp = Mat2::new([
        [
            Complex64::new(0.5 * rh * rh, 0.0),
            Complex64::new(0.5 * rh * rv, 0.0),
        ],
        [
            Complex64::new(0.5 * rh * rv, 0.0),
            Complex64::new(0.5 * rv * rv, 0.0),
        ],
    ]);
    let xm = Mat2::new([
        [
            Complex64::new(0.5 * rh * rh, 0.0),
            Complex64::new(-0.5 * rh * rv, 0.0),
        ],
        [
            Complex64::new(-0.5 * rh * rv, 0.0),
            Complex64::new(0.5 * rv * rv, 0.0),
        ],
    ]);
    Povm::new(vec![zp, zm, xp, xm])
}

/// Half-wave plate at angle theta (radians) followed by an H/V projection.
pub fn povm_waveplate(theta: f64) -> Povm {
    let (s, c) = (2.0 * theta).sin_cos();
    let hwp = Mat2::new([
        [Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(-c, 0.0)],
    ]);
    let h = Mat2::projector([Complex64::ONE, Complex64::ZERO]);
    let pi0 = hwp.adjoint().mul(&h).mul(&hwp);
    let pi1 = Mat2::identity().sub(&pi0);
    Povm::new(vec![pi0, pi1]).expect("waveplate projector pair is a valid POVM")
}

/// Random valid POVM with the requested number of outcomes: Wishart-like
/// positive elements symmetrically normalized to completeness.
pub fn random_povm(rng: &mut impl Rng, n_outcomes: usize) -> Povm {
    for _ in 0..64 {
        let mut elements: Vec<Mat2> = (0..n_outcomes)
            .map(|_| {
                let mut g = Mat2::zero();
                for i in 0..2 {
                    for j in 0..2 {
                        let re: f64 = StandardNormal.sample(rng);
                        let im: f64 = StandardNormal.sample(rng);
                        g.m[i][j] = Complex64::new(re, im);
                    }
                }
                g.mul(&g.adjoint())
            })
            .collect();
        let sum = elements.iter().fold(Mat2::zero(), |acc, e| acc.add(e));
        let Some(w) = sum.inv_sqrt_hermitian() else {
            continue;
        };
        for e in &mut elements {
            *e = w.mul(e).mul(&w);
        }
        if let Ok(povm) = Povm::new(elements) {
            return povm;
        }
    }
    unreachable!("random POVM normalization failed 64 times in a row");
}

/// Result of a POVM reconstruction.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub povm: Povm,
    pub converged: bool,
    pub iterations: usize,
    /// Final sum of squared Born residuals against the table.
    pub misfit: f64,
}

const RECON_MAX_ITERS: usize = 500;
const RECON_TOL: f64 = 1e-8;

fn ls_fit(table: &DfpTable) -> Vec<Mat2> {
    let m = table.n_outcomes();
    (0..m)
        .map(|j| {
            let a0 = FIDUCIALS.iter().map(|f| table.get(*f, j)).sum::<f64>() / 6.0;
            let mut a = [0.0; 3];
            for f in FIDUCIALS {
                let (axis, sign) = f.axis_sign();
                a[axis] += sign * table.get(f, j) / 2.0;
            }
            Mat2::from_pauli(a0, a)
        })
        .collect()
}

fn project_physical(elements: &[Mat2]) -> Result<Vec<Mat2>, TomoError> {
    let clipped: Vec<Mat2> = elements.iter().map(Mat2::psd_clip).collect();
    let sum = clipped.iter().fold(Mat2::zero(), |acc, e| acc.add(e));
    let w = sum.inv_sqrt_hermitian().ok_or(TomoError::DegenerateSum)?;
    Ok(clipped.iter().map(|e| w.mul(e).mul(&w)).collect())
}

fn born_misfit(elements: &[Mat2], table: &DfpTable) -> f64 {
    let mut misfit = 0.0;
    for f in FIDUCIALS {
        let r = f.bloch();
        for (j, e) in elements.iter().enumerate() {
            let (a0, a) = e.to_pauli();
            let p = a0 + a[0] * r[0] + a[1] * r[1] + a[2] * r[2];
            let res = p - table.get(f, j);
            misfit += res * res;
        }
    }
    misfit
}

fn frobenius_change(a: &[Mat2], b: &[Mat2]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x.sub(y);
            d.m.iter().flatten().map(|c| c.norm_sqr()).sum::<f64>()
        })
        .sum::<f64>()
        .sqrt()
}

/// Least-squares fit of the Born constraints followed by alternating
/// projection onto the physical set (eigenvalue clipping, then symmetric
/// rescaling to completeness). Returns the iterate of least misfit.
pub fn reconstruct_povm(table: &DfpTable) -> Result<Reconstruction, TomoError> {
    let ls = ls_fit(table);
    let mut best: Option<(f64, Vec<Mat2>)> = None;
    let mut prev: Option<Vec<Mat2>> = None;
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=RECON_MAX_ITERS {
        iterations = it;
        let phys = project_physical(&ls)?;
        let misfit = born_misfit(&phys, table);
        if best.as_ref().map_or(true, |(m, _)| misfit < *m) {
            best = Some((misfit, phys.clone()));
        }
        if let Some(p) = &prev {
            if frobenius_change(&phys, p) < RECON_TOL {
                converged = true;
                break;
            }
        }
        prev = Some(phys);
    }
    let (misfit, elements) = best.expect("at least one iterate");
    Ok(Reconstruction {
        povm: Povm { elements },
        converged,
        iterations,
        misfit,
    })
}

/// Born probabilities of the evolved probe and their analytic parameter
/// derivatives, fed to the probability-route Fisher information.
pub fn fisher_from_povm(
    povm: &Povm,
    probe: &PureQubit,
    params: &ChannelParams,
    param_set: ParamSet,
) -> Result<FisherMatrix, FisherError> {
    let pv = born_probability_vector(povm, probe, params, param_set)?;
    fisher_from_probabilities(&pv)
}

/// The Born-rule probability vector itself (exposed for route comparisons).
pub fn born_probability_vector(
    povm: &Povm,
    probe: &PureQubit,
    params: &ChannelParams,
    param_set: ParamSet,
) -> Result<ProbabilityVector, FisherError> {
    let (r, dr_phi, dr_chi) = bloch_evolution(probe, params);
    let mut p = Vec::with_capacity(povm.n_outcomes());
    let mut dp_phi = Vec::with_capacity(povm.n_outcomes());
    let mut dp_chi = Vec::with_capacity(povm.n_outcomes());
    for e in povm.elements() {
        let (a0, a) = e.to_pauli();
        p.push(a0 + a[0] * r[0] + a[1] * r[1] + a[2] * r[2]);
        dp_phi.push(a[0] * dr_phi[0] + a[1] * dr_phi[1] + a[2] * dr_phi[2]);
        dp_chi.push(a[0] * dr_chi[0] + a[1] * dr_chi[1] + a[2] * dr_chi[2]);
    }
    let dp = match param_set {
        ParamSet::Phi => vec![dp_phi],
        ParamSet::PhiChi => vec![dp_phi, dp_chi],
    };
    ProbabilityVector::new(p, dp)
}

/// Exact Born table of a POVM (no noise), for oracle comparisons.
pub fn born_table(povm: &Povm) -> DfpTable {
    povm.synth_dfp(0.0, 0)
        .expect("noiseless synthesis is valid")
}
