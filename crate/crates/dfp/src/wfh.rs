//! Weak-field homodyne detection: analytic data-fitting patterns for a pair
//! of N-bin multiplexed click detectors behind a 50:50 beamsplitter with a
//! few-photon local oscillator, the Gaussian kernel transform of those
//! patterns, Wigner-overlap probabilities, and per-outcome Fisher information
//! for coherent and displaced-squeezed probes.

use num_complex::Complex64;
use thiserror::Error;

use crate::exec;
use crate::fisher::{DERIV_FLOOR, PROB_FLOOR};

#[derive(Debug, Error)]
pub enum WfhError {
    #[error("invalid detector: {0}")]
    BadDetector(String),
    #[error("outcome ({x1},{x2}) out of range for N = {n}")]
    OutcomeOutOfRange { x1: u32, x2: u32, n: u32 },
    #[error("kernel normalization check failed for outcome ({x1},{x2}): kernel route {got:.12e} vs direct {expected:.12e}")]
    NormalizationInvalid {
        x1: u32,
        x2: u32,
        expected: f64,
        got: f64,
    },
    #[error("overlap probability {0:.6e} outside [-1e-6, 1+1e-6]: normalization bug")]
    NormalizationBug(f64),
    #[error("invalid Wigner function: {0}")]
    BadWigner(String),
    #[error("squeezing parameter s = {0} must be > 0")]
    BadSqueeze(f64),
    #[error("displacement fraction r_d = {0} must lie in (0, 1]")]
    BadSplit(f64),
    #[error("energy {0} must be > 0")]
    BadEnergy(f64),
    #[error("outcome ({x1},{x2}) has q = {p:.3e} below floor with |dq| = {dp:.3e}")]
    FloorViolation { x1: u32, x2: u32, p: f64, dp: f64 },
    #[error(
        "finite-difference check failed for outcome ({x1},{x2}): {d1:.9e} vs {d2:.9e} at half step"
    )]
    DerivativeCheck { x1: u32, x2: u32, d1: f64, d2: f64 },
}

/// A weak-field homodyne detector: local oscillator amplitude and bin count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WfhDetector {
    pub gamma: Complex64,
    pub n_bins: u32,
}

impl WfhDetector {
    pub fn new(gamma: Complex64, n_bins: u32) -> Result<Self, WfhError> {
        if n_bins < 1 {
            return Err(WfhError::BadDetector("n_bins must be >= 1".into()));
        }
        if !gamma.re.is_finite() || !gamma.im.is_finite() {
            return Err(WfhError::BadDetector("gamma must be finite".into()));
        }
        Ok(Self { gamma, n_bins })
    }

    /// All (N+1)^2 outcomes in x1-major order.
    pub fn outcomes(&self) -> Vec<WfhOutcome> {
        let n = self.n_bins;
        (0..=n)
            .flat_map(|x1| (0..=n).map(move |x2| WfhOutcome { x1, x2 }))
            .collect()
    }

    fn check(&self, x: WfhOutcome) -> Result<(), WfhError> {
        if x.x1 > self.n_bins || x.x2 > self.n_bins {
            return Err(WfhError::OutcomeOutOfRange {
                x1: x.x1,
                x2: x.x2,
                n: self.n_bins,
            });
        }
        Ok(())
    }
}

/// Click counts on the transmitted (x1) and reflected (x2) arms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WfhOutcome {
    pub x1: u32,
    pub x2: u32,
}

impl WfhOutcome {
    pub const fn new(x1: u32, x2: u32) -> Self {
        Self { x1, x2 }
    }
}

fn binom(n: u32, k: u32) -> f64 {
    let mut out = 1.0;
    for i in 0..k.min(n - k) {
        out = out * (n - i) as f64 / (i + 1) as f64;
    }
    out
}

/// One arm of the double binomial sum, grouped per arm so the alternating
/// terms cancel stably: C(N,x) sum_y (-1)^{x-y} C(x,y) e^{-u(N-y)}.
fn arm_sum(n: u32, x: u32, u: f64) -> f64 {
    let mut s = 0.0;
    for y in 0..=x {
        let sign = if (x - y) % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * binom(x, y) * (-u * (n - y) as f64).exp();
    }
    binom(n, x) * s
}

/// The analytic data-fitting pattern q_x(alpha) of the detector: the
/// double binomial sum over (y1, y2), evaluated arm by arm.
pub fn dfp_probability(
    det: &WfhDetector,
    x: WfhOutcome,
    alpha: Complex64,
) -> Result<f64, WfhError> {
    det.check(x)?;
    let n = det.n_bins;
    let u1 = (alpha + det.gamma).norm_sqr() / (2.0 * n as f64);
    let u2 = (alpha - det.gamma).norm_sqr() / (2.0 * n as f64);
    Ok((arm_sum(n, x.x1, u1) * arm_sum(n, x.x2, u2)).max(0.0))
}

/// One Gaussian term of the outcome kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelTerm {
    /// Signed binomial weight (-1)^{x1-y1+x2-y2} C(N,x1)C(N,x2)C(x1,y1)C(x2,y2).
    pub weight: f64,
    /// sigma^2 = 2N/(2N - y1 - y2); +inf for the y1 = y2 = N term.
    pub sigma2: f64,
    /// gamma_tilde = (y2 - y1) gamma / (2N).
    pub gamma_tilde: Complex64,
    pub y1: u32,
    pub y2: u32,
}

/// Enumerate the (x1+1)(x2+1) kernel terms of an outcome.
pub fn kernel_terms(det: &WfhDetector, x: WfhOutcome) -> Result<Vec<KernelTerm>, WfhError> {
    det.check(x)?;
    let n = det.n_bins;
    let prefactor = binom(n, x.x1) * binom(n, x.x2);
    let mut terms = Vec::with_capacity(((x.x1 + 1) * (x.x2 + 1)) as usize);
    for y1 in 0..=x.x1 {
        for y2 in 0..=x.x2 {
            let parity = (x.x1 - y1 + x.x2 - y2) % 2;
            let sign = if parity == 0 { 1.0 } else { -1.0 };
            let denom = 2 * n - y1 - y2;
            let sigma2 = if denom == 0 {
                f64::INFINITY
            } else {
                2.0 * n as f64 / denom as f64
            };
            terms.push(KernelTerm {
                weight: sign * prefactor * binom(x.x1, y1) * binom(x.x2, y2),
                sigma2,
                gamma_tilde: det.gamma * ((y2 as f64 - y1 as f64) / (2.0 * n as f64)),
                y1,
                y2,
            });
        }
    }
    Ok(terms)
}

impl KernelTerm {
    /// Value of this term of zeta at a phase-space point (weight included).
    fn zeta_at(&self, alpha: Complex64, gamma: Complex64) -> f64 {
        if self.sigma2.is_infinite() {
            // constant-function limit of the y1 = y2 = N term
            return self.weight;
        }
        let c = self.sigma2 - 0.5;
        let gt = self.gamma_tilde;
        let quad = -(alpha.norm_sqr() + self.sigma2 * gt.norm_sqr() / 2.0) / c;
        let cross = -(self.sigma2 / c) * 2.0 * (alpha.conj() * gt).re;
        self.weight * (self.sigma2 / c) * (quad + cross - gamma.norm_sqr() / self.sigma2).exp()
    }

    /// Exact overlap of this term against a normalized Gaussian (weight included).
    fn overlap(&self, w: &GaussianWigner, gamma: Complex64) -> f64 {
        if self.sigma2.is_infinite() {
            return self.weight;
        }
        let c = self.sigma2 - 0.5;
        let gt = self.gamma_tilde;
        let k = (self.sigma2 / c)
            * (-(self.sigma2 * gt.norm_sqr()) / (2.0 * c) - gamma.norm_sqr() / self.sigma2).exp();
        let a = 2.0 / c;
        let b = [
            -(2.0 * self.sigma2 / c) * gt.re,
            -(2.0 * self.sigma2 / c) * gt.im,
        ];
        let m = [w.mean.re, w.mean.im];
        let p = w.precision();
        // Q = P + a*I, c_vec = P m + b
        let q = [[p[0][0] + a, p[0][1]], [p[1][0], p[1][1] + a]];
        let det_q = q[0][0] * q[1][1] - q[0][1] * q[1][0];
        let cv = [
            p[0][0] * m[0] + p[0][1] * m[1] + b[0],
            p[1][0] * m[0] + p[1][1] * m[1] + b[1],
        ];
        // c^T Q^-1 c
        let qinv_c = [
            (q[1][1] * cv[0] - q[0][1] * cv[1]) / det_q,
            (-q[1][0] * cv[0] + q[0][0] * cv[1]) / det_q,
        ];
        let quad_c = cv[0] * qinv_c[0] + cv[1] * qinv_c[1];
        let quad_m =
            m[0] * (p[0][0] * m[0] + p[0][1] * m[1]) + m[1] * (p[1][0] * m[0] + p[1][1] * m[1]);
        self.weight * k / (w.det_cov() * det_q).sqrt() * (0.5 * quad_c - 0.5 * quad_m).exp()
    }
}

/// A normalized Gaussian Wigner function: complex mean and 2x2 covariance in
/// (alpha_x, alpha_p). A coherent state has covariance diag(1/4, 1/4).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianWigner {
    mean: Complex64,
    cov: [[f64; 2]; 2],
}

impl GaussianWigner {
    pub fn new(mean: Complex64, cov: [[f64; 2]; 2]) -> Result<Self, WfhError> {
        let finite = mean.re.is_finite()
            && mean.im.is_finite()
            && cov.iter().flatten().all(|v| v.is_finite());
        if !finite {
            return Err(WfhError::BadWigner("non-finite mean or covariance".into()));
        }
        if (cov[0][1] - cov[1][0]).abs() > 1e-12 {
            return Err(WfhError::BadWigner("covariance is not symmetric".into()));
        }
        let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
        if cov[0][0] <= 0.0 || det <= 0.0 {
            return Err(WfhError::BadWigner(
                "covariance is not positive definite".into(),
            ));
        }
        Ok(Self { mean, cov })
    }

    pub fn coherent(alpha: Complex64) -> Self {
        Self {
            mean: alpha,
            cov: [[0.25, 0.0], [0.0, 0.25]],
        }
    }

    pub fn mean(&self) -> Complex64 {
        self.mean
    }

    pub fn cov(&self) -> [[f64; 2]; 2] {
        self.cov
    }

    pub fn det_cov(&self) -> f64 {
        self.cov[0][0] * self.cov[1][1] - self.cov[0][1] * self.cov[1][0]
    }

    fn precision(&self) -> [[f64; 2]; 2] {
        let d = self.det_cov();
        [
            [self.cov[1][1] / d, -self.cov[0][1] / d],
            [-self.cov[1][0] / d, self.cov[0][0] / d],
        ]
    }

    /// Phase-space rotation by `phi` (mean and covariance both rotate).
    pub fn rotated(&self, phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        let r = [[c, -s], [s, c]];
        // R Sigma R^T, symmetrized against roundoff
        let mut rc = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    rc[i][j] += r[i][k] * self.cov[k][j];
                }
            }
        }
        let mut cov = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    cov[i][j] += rc[i][k] * r[j][k];
                }
            }
        }
        let off = 0.5 * (cov[0][1] + cov[1][0]);
        Self {
            mean: self.mean * Complex64::from_polar(1.0, phi),
            cov: [[cov[0][0], off], [off, cov[1][1]]],
        }
    }

    /// Density at a phase-space point (integrates to 1 over d^2 alpha).
    pub fn value(&self, alpha: Complex64) -> f64 {
        let d = [alpha.re - self.mean.re, alpha.im - self.mean.im];
        let p = self.precision();
        let quad =
            d[0] * (p[0][0] * d[0] + p[0][1] * d[1]) + d[1] * (p[1][0] * d[0] + p[1][1] * d[1]);
        (-0.5 * quad).exp() / (2.0 * std::f64::consts::PI * self.det_cov().sqrt())
    }
}

/// Wigner function of a displaced squeezed vacuum: mean alpha0 on the real
/// axis, variances 1/(4 s^2) in alpha_x and s^2/4 in alpha_p (s < 1 squeezes P).
pub fn wigner_dsv(alpha0: f64, s: f64) -> Result<GaussianWigner, WfhError> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(WfhError::BadSqueeze(s));
    }
    GaussianWigner::new(
        Complex64::new(alpha0, 0.0),
        [[1.0 / (4.0 * s * s), 0.0], [0.0, s * s / 4.0]],
    )
}

/// Mean photon number alpha0^2 + (s^2 - 1)^2 / (4 s^2) of the displaced
/// squeezed vacuum.
pub fn mean_photon(alpha0: f64, s: f64) -> f64 {
    let s2 = s * s;
    alpha0 * alpha0 + (s2 - 1.0) * (s2 - 1.0) / (4.0 * s2)
}

/// The outcome kernel zeta_x as a validated list of Gaussian terms. The
/// constructor locks the normalization constants by cross-checking the
/// kernel-route coherent probabilities against the direct pattern.
#[derive(Debug, Clone)]
pub struct WfhKernel {
    det: WfhDetector,
    outcome: WfhOutcome,
    terms: Vec<KernelTerm>,
}

impl WfhKernel {
    pub fn new(det: &WfhDetector, x: WfhOutcome) -> Result<Self, WfhError> {
        let kernel = Self {
            det: *det,
            outcome: x,
            terms: kernel_terms(det, x)?,
        };
        for alpha0 in [Complex64::new(0.0, 0.0), Complex64::new(0.37, 0.21)] {
            let got = kernel.raw_overlap(&GaussianWigner::coherent(alpha0));
            let expected = dfp_probability(det, x, alpha0)?;
            if (got - expected).abs() > 1e-8 {
                return Err(WfhError::NormalizationInvalid {
                    x1: x.x1,
                    x2: x.x2,
                    expected,
                    got,
                });
            }
        }
        Ok(kernel)
    }

    pub fn outcome(&self) -> WfhOutcome {
        self.outcome
    }

    pub fn terms(&self) -> &[KernelTerm] {
        &self.terms
    }

    /// zeta_x evaluated at a phase-space point.
    pub fn zeta(&self, alpha: Complex64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.zeta_at(alpha, self.det.gamma))
            .sum()
    }

    fn raw_overlap(&self, w: &GaussianWigner) -> f64 {
        self.terms
            .iter()
            .map(|t| t.overlap(w, self.det.gamma))
            .sum()
    }

    /// Exact Gaussian-Gaussian overlap p = int W zeta d^2alpha, tolerance
    /// checked and clamped to [0, 1].
    pub fn probability(&self, w: &GaussianWigner) -> Result<f64, WfhError> {
        let p = self.raw_overlap(w);
        if !(-1e-6..=1.0 + 1e-6).contains(&p) {
            return Err(WfhError::NormalizationBug(p));
        }
        Ok(p.clamp(0.0, 1.0))
    }
}

/// zeta_x at a point through a freshly validated kernel.
pub fn zeta(det: &WfhDetector, x: WfhOutcome, alpha: Complex64) -> Result<f64, WfhError> {
    Ok(WfhKernel::new(det, x)?.zeta(alpha))
}

/// Outcome probability of a Gaussian state through a validated kernel.
pub fn probability_wigner(
    det: &WfhDetector,
    x: WfhOutcome,
    w: &GaussianWigner,
) -> Result<f64, WfhError> {
    WfhKernel::new(det, x)?.probability(w)
}

/// Probe state fed to the phase-estimation scans.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbeField {
    Coherent(Complex64),
    Gaussian(GaussianWigner),
}

/// Default central finite-difference step for the phase derivative.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

fn q_of_phase(
    det: &WfhDetector,
    x: WfhOutcome,
    probe: &ProbeField,
    phi: f64,
) -> Result<f64, WfhError> {
    match probe {
        ProbeField::Coherent(alpha) => {
            dfp_probability(det, x, alpha * Complex64::from_polar(1.0, phi))
        }
        ProbeField::Gaussian(w) => probability_wigner(det, x, &w.rotated(phi)),
    }
}

struct PhaseDerivative {
    q: f64,
    dq: f64,
}

fn phase_derivative<Q>(q: &Q, phi: f64, h: f64, x: WfhOutcome) -> Result<PhaseDerivative, WfhError>
where
    Q: Fn(f64) -> Result<f64, WfhError>,
{
    let d1 = (q(phi + h)? - q(phi - h)?) / (2.0 * h);
    let d2 = (q(phi + h / 2.0)? - q(phi - h / 2.0)?) / h;
    if (d1 - d2).abs() > 1e-6 * d1.abs().max(d2.abs()).max(1.0) {
        return Err(WfhError::DerivativeCheck {
            x1: x.x1,
            x2: x.x2,
            d1,
            d2,
        });
    }
    Ok(PhaseDerivative { q: q(phi)?, dq: d1 })
}

/// Per-outcome Fisher information F^(x) = (d_phi q_x)^2 / q_x at the given
/// phase, with a central finite difference of step `h`. For real amplitudes
/// the patterns are stationary at phi = 0, so evaluate at a finite phase
/// (the scans default to 0.1).
pub fn outcome_fisher(
    det: &WfhDetector,
    x: WfhOutcome,
    probe: &ProbeField,
    phi: f64,
    h: f64,
) -> Result<f64, WfhError> {
    det.check(x)?;
    let d = phase_derivative(&|ph| q_of_phase(det, x, probe, ph), phi, h, x)?;
    if d.q < PROB_FLOOR {
        if d.dq.abs() < DERIV_FLOOR {
            return Ok(0.0);
        }
        return Err(WfhError::FloorViolation {
            x1: x.x1,
            x2: x.x2,
            p: d.q,
            dp: d.dq,
        });
    }
    Ok(d.dq * d.dq / d.q)
}

/// Per-outcome and total Fisher information at one probe configuration.
#[derive(Debug, Clone)]
pub struct FisherBreakdown {
    /// Per-outcome information in detector outcome order.
    pub per_outcome: Vec<f64>,
    pub total: f64,
    /// Outcomes skipped because their probability sat below the floor.
    pub skipped: usize,
}

fn fisher_breakdown<Q>(
    det: &WfhDetector,
    q_fn: Q,
    phi: f64,
    h: f64,
) -> Result<FisherBreakdown, WfhError>
where
    Q: Fn(WfhOutcome, f64) -> Result<f64, WfhError>,
{
    let outcomes = det.outcomes();
    let mut per_outcome = Vec::with_capacity(outcomes.len());
    let mut total = 0.0;
    let mut skipped = 0;
    for x in outcomes {
        let d = phase_derivative(&|ph| q_fn(x, ph), phi, h, x)?;
        if d.q < PROB_FLOOR {
            skipped += 1;
            per_outcome.push(0.0);
            continue;
        }
        let f = d.dq * d.dq / d.q;
        per_outcome.push(f);
        total += f;
    }
    Ok(FisherBreakdown {
        per_outcome,
        total,
        skipped,
    })
}

/// One row of a coherent-probe amplitude scan.
#[derive(Debug, Clone)]
pub struct AlphaScanRow {
    pub alpha: f64,
    pub fisher: FisherBreakdown,
}

/// Total and per-outcome Fisher information for real coherent amplitudes.
pub fn coherent_alpha_scan(
    det: &WfhDetector,
    alphas: &[f64],
    phi: f64,
    h: f64,
) -> Result<Vec<AlphaScanRow>, WfhError> {
    let rows: Vec<Result<AlphaScanRow, WfhError>> = exec::map_slice(alphas, |&alpha| {
        let probe = Complex64::new(alpha, 0.0);
        let fisher = fisher_breakdown(
            det,
            |x, ph| dfp_probability(det, x, probe * Complex64::from_polar(1.0, ph)),
            phi,
            h,
        )?;
        Ok(AlphaScanRow { alpha, fisher })
    });
    rows.into_iter().collect()
}

/// Split a total probe energy between displacement and P squeezing:
/// alpha0^2 = r_d * energy and (s^2-1)^2/(4 s^2) = (1 - r_d) * energy, s < 1.
pub fn split_energy(energy: f64, r_d: f64) -> Result<(f64, f64), WfhError> {
    if !(energy > 0.0) || !energy.is_finite() {
        return Err(WfhError::BadEnergy(energy));
    }
    if !(r_d > 0.0 && r_d <= 1.0) {
        return Err(WfhError::BadSplit(r_d));
    }
    let alpha0 = (r_d * energy).sqrt();
    let es = (1.0 - r_d) * energy;
    let s2 = 1.0 + 2.0 * es - 2.0 * (es * (es + 1.0)).sqrt();
    Ok((alpha0, s2.sqrt()))
}

/// One probe of the squeeze trade-off scan.
#[derive(Debug, Clone)]
pub struct SqueezePoint {
    pub r_d: f64,
    pub alpha0: f64,
    pub s: f64,
    pub fisher: FisherBreakdown,
}

/// One row (one total amplitude) of the squeeze trade-off scan.
#[derive(Debug, Clone)]
pub struct SqueezeScanRow {
    /// Total amplitude; the probe energy at this row is alpha^2.
    pub alpha: f64,
    pub points: Vec<SqueezePoint>,
}

/// Total Fisher information of displaced-squeezed probes of energy alpha^2,
/// split per `r_d`, against the same detector.
pub fn squeeze_tradeoff_scan(
    det: &WfhDetector,
    alphas: &[f64],
    rd_values: &[f64],
    phi: f64,
    h: f64,
) -> Result<Vec<SqueezeScanRow>, WfhError> {
    let kernels: Vec<WfhKernel> = det
        .outcomes()
        .into_iter()
        .map(|x| WfhKernel::new(det, x))
        .collect::<Result<_, _>>()?;
    let kernel_of =
        |x: WfhOutcome| -> &WfhKernel { &kernels[(x.x1 * (det.n_bins + 1) + x.x2) as usize] };
    let rows: Vec<Result<SqueezeScanRow, WfhError>> = exec::map_slice(alphas, |&alpha| {
        let energy = alpha * alpha;
        let mut points = Vec::with_capacity(rd_values.len());
        for &r_d in rd_values {
            let (alpha0, s) = split_energy(energy, r_d)?;
            let w = wigner_dsv(alpha0, s)?;
            let fisher = fisher_breakdown(
                det,
                |x, ph| kernel_of(x).probability(&w.rotated(ph)),
                phi,
                h,
            )?;
            points.push(SqueezePoint {
                r_d,
                alpha0,
                s,
                fisher,
            });
        }
        Ok(SqueezeScanRow { alpha, points })
    });
    rows.into_iter().collect()
}
