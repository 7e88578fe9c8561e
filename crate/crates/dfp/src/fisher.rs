//! Classical Fisher information from outcome probabilities and from detector
//! data-fitting patterns, effective per-parameter information and the
//! single-qubit two-parameter trade-off ratio.

use thiserror::Error;

use crate::qubit::{Coefficients, Fiducial, FIDUCIALS};

/// Default tolerance on the row normalization of a loaded table.
pub const DEFAULT_NORM_TOL: f64 = 1e-6;
/// Outcome probabilities below this floor are treated as vanishing.
pub const PROB_FLOOR: f64 = 1e-12;
/// Derivative magnitudes below this floor are treated as vanishing.
pub const DERIV_FLOOR: f64 = 1e-12;
/// Determinant floor below which a non-diagonal Fisher matrix is singular.
pub const DET_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum FisherError {
    #[error("table needs at least 2 outcomes, got {0}")]
    TooFewOutcomes(usize),
    #[error("table entry q[{fiducial}][{outcome}] = {value} is not a probability")]
    BadEntry {
        fiducial: &'static str,
        outcome: usize,
        value: f64,
    },
    #[error("row {fiducial} sums to {sum} (|sum-1| > {tol})")]
    RowNotNormalized {
        fiducial: &'static str,
        sum: f64,
        tol: f64,
    },
    #[error("probability vector sums to {0}, expected 1")]
    NotNormalized(f64),
    #[error("derivative vector {param} sums to {sum}, expected 0")]
    DerivativeNotClosed { param: usize, sum: f64 },
    #[error(
        "outcome {outcome} has p = {p:.3e} below floor with |dp| = {dp:.3e}: information diverges"
    )]
    DivergentOutcome { outcome: usize, p: f64, dp: f64 },
    #[error("negative predicted probability p[{outcome}] = {p:.3e}")]
    NegativePrediction { outcome: usize, p: f64 },
    #[error("Fisher matrix is singular (det = {0:.3e}) and not diagonal")]
    SingularMatrix(f64),
    #[error("QFI diagonal entry {0} is zero")]
    ZeroQfiDiagonal(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Which channel parameters the information matrix is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamSet {
    /// Single-parameter phase estimation: 1x1 matrix in phi.
    Phi,
    /// Joint estimation of phi and chi: 2x2 matrix.
    PhiChi,
}

/// Measured or synthetic outcome probabilities q[fiducial][outcome] for the
/// six Pauli fiducials. Negative entries are clamped to zero at load and each
/// row renormalized; the raw values are kept for audit.
#[derive(Debug, Clone)]
pub struct DfpTable {
    outcomes: Vec<String>,
    q: Vec<Vec<f64>>,
    raw: Vec<Vec<f64>>,
    raw_row_sums: [f64; 6],
    clamped_entries: usize,
}

impl DfpTable {
    /// Build a table from six rows in canonical fiducial order (H,V,D,A,R,L).
    /// `norm_tol` bounds the acceptable pre-normalization row-sum deviation.
    pub fn new(
        outcomes: Vec<String>,
        rows: Vec<Vec<f64>>,
        norm_tol: f64,
    ) -> Result<Self, FisherError> {
        let m = outcomes.len();
        if m < 2 {
            return Err(FisherError::TooFewOutcomes(m));
        }
        if rows.len() != 6 {
            return Err(FisherError::Dimension(format!(
                "expected 6 rows, got {}",
                rows.len()
            )));
        }
        let mut q = Vec::with_capacity(6);
        let mut raw_row_sums = [0.0; 6];
        let mut clamped_entries = 0;
        for (f, row) in FIDUCIALS.iter().zip(&rows) {
            if row.len() != m {
                return Err(FisherError::Dimension(format!(
                    "row {} has {} entries, expected {}",
                    f.label(),
                    row.len(),
                    m
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || !(-0.5..=1.5).contains(&v) {
                    return Err(FisherError::BadEntry {
                        fiducial: f.label(),
                        outcome: j,
                        value: v,
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            raw_row_sums[f.index()] = sum;
            if (sum - 1.0).abs() > norm_tol {
                return Err(FisherError::RowNotNormalized {
                    fiducial: f.label(),
                    sum,
                    tol: norm_tol,
                });
            }
            let clamped: Vec<f64> = row.iter().map(|&v| v.max(0.0)).collect();
            clamped_entries += row.iter().filter(|&&v| v < 0.0).count();
            let csum: f64 = clamped.iter().sum();
            q.push(clamped.into_iter().map(|v| v / csum).collect());
        }
        Ok(Self {
            outcomes,
            q,
            raw: rows,
            raw_row_sums,
            clamped_entries,
        })
    }

    pub fn with_default_tolerance(
        outcomes: Vec<String>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self, FisherError> {
        Self::new(outcomes, rows, DEFAULT_NORM_TOL)
    }

    pub fn n_outcomes(&self) -> usize {
        self.outcomes.len()
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn row(&self, f: Fiducial) -> &[f64] {
        &self.q[f.index()]
    }

    pub fn get(&self, f: Fiducial, outcome: usize) -> f64 {
        self.q[f.index()][outcome]
    }

    /// Pre-clamp values as supplied at load time.
    pub fn raw_row(&self, f: Fiducial) -> &[f64] {
        &self.raw[f.index()]
    }

    pub fn raw_row_sum(&self, f: Fiducial) -> f64 {
        self.raw_row_sums[f.index()]
    }

    pub fn clamped_entries(&self) -> usize {
        self.clamped_entries
    }

    /// Coarse-grained copy with outcomes `a` and `b` merged into one column.
    pub fn merged_outcomes(&self, a: usize, b: usize) -> Result<Self, FisherError> {
        if a == b || a >= self.n_outcomes() || b >= self.n_outcomes() {
            return Err(FisherError::Dimension(format!(
                "cannot merge outcomes {a} and {b}"
            )));
        }
        let (keep, drop) = (a.min(b), a.max(b));
        let mut outcomes = self.outcomes.clone();
        outcomes[keep] = format!("{}+{}", self.outcomes[keep], self.outcomes[drop]);
        outcomes.remove(drop);
        let rows: Vec<Vec<f64>> = self
            .q
            .iter()
            .map(|row| {
                let mut r = row.clone();
                r[keep] += r[drop];
                r.remove(drop);
                r
            })
            .collect();
        Self::new(outcomes, rows, 1e-9)
    }
}

/// Outcome probabilities with one derivative vector per estimated parameter.
#[derive(Debug, Clone)]
pub struct ProbabilityVector {
    p: Vec<f64>,
    dp: Vec<Vec<f64>>,
}

impl ProbabilityVector {
    pub fn new(p: Vec<f64>, dp: Vec<Vec<f64>>) -> Result<Self, FisherError> {
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(FisherError::NotNormalized(sum));
        }
        for (i, d) in dp.iter().enumerate() {
            if d.len() != p.len() {
                return Err(FisherError::Dimension(format!(
                    "derivative {i} has {} entries, expected {}",
                    d.len(),
                    p.len()
                )));
            }
            let dsum: f64 = d.iter().sum();
            if dsum.abs() > 1e-9 {
                return Err(FisherError::DerivativeNotClosed {
                    param: i,
                    sum: dsum,
                });
            }
        }
        Ok(Self { p, dp })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn derivatives(&self) -> &[Vec<f64>] {
        &self.dp
    }

    pub fn n_params(&self) -> usize {
        self.dp.len()
    }
}

/// Symmetric d x d Fisher information matrix (d = 1 or 2 here).
#[derive(Debug, Clone, PartialEq)]
pub struct FisherMatrix {
    labels: Vec<String>,
    data: Vec<f64>,
    dim: usize,
}

impl FisherMatrix {
    pub fn new_1x1(f: f64, label: &str) -> Self {
        Self {
            labels: vec![label.to_string()],
            data: vec![f],
            dim: 1,
        }
    }

    pub fn new_2x2(f00: f64, f11: f64, f01: f64, labels: [&str; 2]) -> Self {
        Self {
            labels: labels.iter().map(|s| s.to_string()).collect(),
            data: vec![f00, f01, f01, f11],
            dim: 2,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn det(&self) -> f64 {
        match self.dim {
            1 => self.get(0, 0),
            _ => self.get(0, 0) * self.get(1, 1) - self.get(0, 1) * self.get(1, 0),
        }
    }

    /// Eigenvalues (ascending); for d = 1 both entries coincide.
    pub fn eigvals(&self) -> (f64, f64) {
        match self.dim {
            1 => (self.get(0, 0), self.get(0, 0)),
            _ => {
                let half_tr = 0.5 * (self.get(0, 0) + self.get(1, 1));
                let delta = 0.5 * (self.get(0, 0) - self.get(1, 1));
                let disc = (delta * delta + self.get(0, 1) * self.get(1, 0))
                    .max(0.0)
                    .sqrt();
                (half_tr - disc, half_tr + disc)
            }
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// True when the off-diagonal part is negligible against the diagonal.
    pub fn is_diagonal(&self) -> bool {
        if self.dim == 1 {
            return true;
        }
        let scale = self.diag().iter().fold(1.0, |m: f64, &d| m.max(d.abs()));
        self.get(0, 1).abs() <= DET_FLOOR * scale
    }
}

/// p[m] = sum_a C_a q[a][m]; returns the bare values (sum equals sum of C).
pub fn predict_probabilities(c: &Coefficients, table: &DfpTable) -> Vec<f64> {
    let m = table.n_outcomes();
    let mut p = vec![0.0; m];
    for f in FIDUCIALS {
        let ca = c.get(f);
        for (pm, qm) in p.iter_mut().zip(table.row(f)) {
            *pm += ca * qm;
        }
    }
    p
}

/// True iff every predicted probability is at least `eps`, up to a floating-
/// point slack at the boundary (exact-zero predictions survive roundoff).
pub fn positivity_filter(c: &Coefficients, table: &DfpTable, eps: f64) -> bool {
    predict_probabilities(c, table)
        .iter()
        .all(|&p| p >= eps - PROB_FLOOR)
}

/// F_ij = sum_m (d_i p)(d_j p)/p with the vanishing-outcome floor rule.
pub fn fisher_from_probabilities(pv: &ProbabilityVector) -> Result<FisherMatrix, FisherError> {
    let d = pv.n_params();
    let mut f = vec![0.0; d * d];
    for (m, &p) in pv.probabilities().iter().enumerate() {
        if p < PROB_FLOOR {
            let dp_max = pv
                .derivatives()
                .iter()
                .map(|v| v[m].abs())
                .fold(0.0, f64::max);
            if dp_max < DERIV_FLOOR {
                continue;
            }
            return Err(FisherError::DivergentOutcome {
                outcome: m,
                p,
                dp: dp_max,
            });
        }
        for i in 0..d {
            for j in 0..d {
                f[i * d + j] += pv.derivatives()[i][m] * pv.derivatives()[j][m] / p;
            }
        }
    }
    Ok(match d {
        1 => FisherMatrix::new_1x1(f[0], "phi"),
        2 => FisherMatrix::new_2x2(f[0], f[3], 0.5 * (f[1] + f[2]), ["phi", "chi"]),
        _ => return Err(FisherError::Dimension(format!("unsupported dimension {d}"))),
    })
}

/// Fisher information straight from the data-fitting pattern:
/// F_ij = sum_m (sum_a d_iC_a q_a(m))(sum_a d_jC_a q_a(m)) / (sum_a C_a q_a(m)).
pub fn fisher_from_dfp(
    c: &Coefficients,
    dcs: &[&Coefficients],
    table: &DfpTable,
) -> Result<FisherMatrix, FisherError> {
    let m = table.n_outcomes();
    let denom = predict_probabilities(c, table);
    if let Some((outcome, &p)) = denom.iter().enumerate().find(|(_, &p)| p < -PROB_FLOOR) {
        return Err(FisherError::NegativePrediction { outcome, p });
    }
    let d = dcs.len();
    let mut num = vec![vec![0.0; m]; d];
    for (i, dc) in dcs.iter().enumerate() {
        for f in FIDUCIALS {
            let dca = dc.get(f);
            for (nm, qm) in num[i].iter_mut().zip(table.row(f)) {
                *nm += dca * qm;
            }
        }
    }
    let mut f = vec![0.0; d * d];
    for (k, &p) in denom.iter().enumerate() {
        if p < PROB_FLOOR {
            let dp_max = num.iter().map(|v| v[k].abs()).fold(0.0, f64::max);
            if dp_max < DERIV_FLOOR {
                continue;
            }
            return Err(FisherError::DivergentOutcome {
                outcome: k,
                p,
                dp: dp_max,
            });
        }
        for i in 0..d {
            for j in 0..d {
                f[i * d + j] += num[i][k] * num[j][k] / p;
            }
        }
    }
    Ok(match d {
        1 => FisherMatrix::new_1x1(f[0], "phi"),
        2 => FisherMatrix::new_2x2(f[0], f[3], 0.5 * (f[1] + f[2]), ["phi", "chi"]),
        _ => return Err(FisherError::Dimension(format!("unsupported dimension {d}"))),
    })
}

/// Effective per-parameter information F'_ii = 1/(F^-1)_ii.
pub fn effective_fisher(f: &FisherMatrix) -> Result<Vec<f64>, FisherError> {
    match f.dim() {
        1 => Ok(vec![f.get(0, 0)]),
        _ => {
            if f.is_diagonal() {
                return Ok(f.diag());
            }
            let det = f.det();
            let scale = f.get(0, 0).abs().max(f.get(1, 1).abs()).max(1.0);
            if det.abs() < DET_FLOOR * scale {
                return Err(FisherError::SingularMatrix(det));
            }
            Ok(vec![det / f.get(1, 1), det / f.get(0, 0)])
        }
    }
}

/// The two-parameter trade-off ratio F_pp/H_pp + F_cc/H_cc built from the raw
/// diagonal entries.
pub fn massar_ratio(f: &FisherMatrix, h: &FisherMatrix) -> Result<f64, FisherError> {
    if f.dim() != 2 || h.dim() != 2 {
        return Err(FisherError::Dimension(
            "massar ratio needs 2x2 matrices".into(),
        ));
    }
    for i in 0..2 {
        if h.get(i, i) == 0.0 {
            return Err(FisherError::ZeroQfiDiagonal(i));
        }
    }
    Ok(f.get(0, 0) / h.get(0, 0) + f.get(1, 1) / h.get(1, 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::{
        coefficient_derivatives, decompose, density_of, evolve, ChannelOrder, ChannelParams,
        PureQubit,
    };
    use approx::assert_abs_diff_eq;

    /// Ideal H/V projection table: q_H=(1,0), q_V=(0,1), others (1/2,1/2).
    fn hv_table() -> DfpTable {
        DfpTable::with_default_tolerance(
            vec!["0".into(), "1".into()],
            vec![
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![0.5, 0.5],
                vec![0.5, 0.5],
                vec![0.5, 0.5],
                vec![0.5, 0.5],
            ],
        )
        .unwrap()
    }

    fn da_table() -> DfpTable {
        DfpTable::with_default_tolerance(
            vec!["0".into(), "1".into()],
            vec![
                vec![0.5, 0.5],
                vec![0.5, 0.5],
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![0.5, 0.5],
                vec![0.5, 0.5],
            ],
        )
        .unwrap()
    }

    fn coeffs(c: [f64; 6]) -> Coefficients {
        Coefficients { c }
    }

    #[test]
    fn predict_on_known_states() {
        let t = hv_table();
        let mixed = coeffs([1.0 / 6.0; 6]);
        let p = predict_probabilities(&mixed, &t);
        assert_abs_diff_eq!(p[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 0.5, epsilon = 1e-15);

        let h = decompose(&density_of(&PureQubit::new([0.0, 0.0, 1.0]).unwrap()));
        let p = predict_probabilities(&h, &t);
        assert_abs_diff_eq!(p[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 0.0, epsilon = 1e-15);

        let d = decompose(&density_of(&PureQubit::new([1.0, 0.0, 0.0]).unwrap()));
        let p = predict_probabilities(&d, &t);
        assert_abs_diff_eq!(p[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn filter_accepts_mixtures_rejects_forced_sign() {
        let t = hv_table();
        assert!(positivity_filter(&coeffs([1.0 / 6.0; 6]), &t, 0.0));
        // C = (2, -1, 0, 0, 0, 0): p[1] = -1
        assert!(!positivity_filter(
            &coeffs([2.0, -1.0, 0.0, 0.0, 0.0, 0.0]),
            &t,
            0.0
        ));
    }

    #[test]
    fn filter_on_perturbed_table_clamps_at_load() {
        // a slightly negative entry is clamped at load, so the prediction for
        // |H> is restored to a physical value
        let rows = vec![
            vec![1.0003, -0.0003],
            vec![0.0, 1.0],
            vec![0.5, 0.5],
            vec![0.5, 0.5],
            vec![0.5, 0.5],
            vec![0.5, 0.5],
        ];
        let t = DfpTable::new(vec!["0".into(), "1".into()], rows.clone(), 1e-3).unwrap();
        assert_eq!(t.clamped_entries(), 1);
        let h = decompose(&density_of(&PureQubit::new([0.0, 0.0, 1.0]).unwrap()));
        // clamping restores the prediction to the p = 0 boundary
        assert!(positivity_filter(&h, &t, 0.0));
        assert!(predict_probabilities(&h, &t)[1].abs() <= 1e-12);

        // without clamping the raw prediction is clearly negative
        let p_raw: f64 = FIDUCIALS
            .iter()
            .map(|f| h.get(*f) * rows[f.index()][1])
            .sum();
        assert!(p_raw < -1e-4);
    }

    #[test]
    fn fisher_single_parameter_phase() {
        // p = (cos^2(phi/2), sin^2(phi/2)) at phi = pi/2, dp = (-1/2, 1/2)
        let pv = ProbabilityVector::new(vec![0.5, 0.5], vec![vec![-0.5, 0.5]]).unwrap();
        let f = fisher_from_probabilities(&pv).unwrap();
        assert_abs_diff_eq!(f.get(0, 0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn fisher_no_dependence_is_zero() {
        let pv = ProbabilityVector::new(vec![0.3, 0.7], vec![vec![0.0, 0.0]]).unwrap();
        let f = fisher_from_probabilities(&pv).unwrap();
        assert_abs_diff_eq!(f.get(0, 0), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn fisher_divergent_outcome_is_signalled() {
        let pv = ProbabilityVector::new(vec![1.0, 0.0], vec![vec![-0.5, 0.5]]).unwrap();
        match fisher_from_probabilities(&pv) {
            Err(FisherError::DivergentOutcome { outcome: 1, .. }) => {}
            other => panic!("expected divergent-outcome signal, got {other:?}"),
        }
    }

    #[test]
    fn dfp_zero_derivatives_give_zero_matrix() {
        let t = da_table();
        let c = decompose(&density_of(&PureQubit::new([0.0, 1.0, 0.0]).unwrap()));
        let zero = coeffs([0.0; 6]);
        let f = fisher_from_dfp(&c, &[&zero, &zero], &t).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(f.get(i, j), 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn dfp_phase_on_da_table_gives_unit_information() {
        let t = da_table();
        let probe = PureQubit::new([0.0, 1.0, 0.0]).unwrap();
        let params = ChannelParams::new(0.0, 0.0, ChannelOrder::Vu).unwrap();
        let c = decompose(&density_of(&evolve(&probe, &params).unwrap()));
        let (dphi, _) = coefficient_derivatives(&probe, &params);
        let f = fisher_from_dfp(&c, &[&dphi], &t).unwrap();
        assert_abs_diff_eq!(f.get(0, 0), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn dfp_requires_positive_predictions() {
        let t = hv_table();
        let c = coeffs([2.0, -1.0, 0.0, 0.0, 0.0, 0.0]);
        let zero = coeffs([0.0; 6]);
        match fisher_from_dfp(&c, &[&zero], &t) {
            Err(FisherError::NegativePrediction { outcome: 1, .. }) => {}
            other => panic!("expected negative-prediction error, got {other:?}"),
        }
    }

    #[test]
    fn effective_fisher_formulas() {
        let f = FisherMatrix::new_2x2(2.0, 3.0, 0.0, ["phi", "chi"]);
        let e = effective_fisher(&f).unwrap();
        assert_abs_diff_eq!(e[0], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e[1], 3.0, epsilon = 1e-15);

        let f = FisherMatrix::new_2x2(2.0, 2.0, 1.0, ["phi", "chi"]);
        let e = effective_fisher(&f).unwrap();
        assert_abs_diff_eq!(e[0], 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(e[1], 1.5, epsilon = 1e-15);

        let singular = FisherMatrix::new_2x2(1.0, 1.0, 1.0, ["phi", "chi"]);
        assert!(matches!(
            effective_fisher(&singular),
            Err(FisherError::SingularMatrix(_))
        ));
    }

    #[test]
    fn effective_never_exceeds_diagonal() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let a: f64 = rng.gen_range(0.1..3.0);
            let b: f64 = rng.gen_range(0.1..3.0);
            let cmax = (a * b).sqrt() * 0.999;
            let c: f64 = rng.gen_range(-cmax..cmax);
            let f = FisherMatrix::new_2x2(a, b, c, ["phi", "chi"]);
            if let Ok(e) = effective_fisher(&f) {
                assert!(e[0] <= a + 1e-12);
                assert!(e[1] <= b + 1e-12);
            }
        }
    }

    #[test]
    fn massar_ratio_simple_cases() {
        let h = FisherMatrix::new_2x2(1.0, 1.0, 0.0, ["phi", "chi"]);
        let zero = FisherMatrix::new_2x2(0.0, 0.0, 0.0, ["phi", "chi"]);
        assert_abs_diff_eq!(massar_ratio(&zero, &h).unwrap(), 0.0, epsilon = 1e-15);

        let f = FisherMatrix::new_2x2(0.5, 0.5, 0.0, ["phi", "chi"]);
        assert_abs_diff_eq!(massar_ratio(&f, &h).unwrap(), 1.0, epsilon = 1e-15);

        let h0 = FisherMatrix::new_2x2(0.0, 1.0, 0.0, ["phi", "chi"]);
        assert!(matches!(
            massar_ratio(&f, &h0),
            Err(FisherError::ZeroQfiDiagonal(0))
        ));
    }

    #[test]
    fn coarse_graining_never_increases_information() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let probe = PureQubit::new([0.0, 1.0, 0.0]).unwrap();
        for _ in 0..50 {
            let t = crate::tomo::random_povm(&mut rng, 4)
                .synth_dfp(0.0, 0)
                .unwrap();
            let params = ChannelParams::new(
                rng.gen_range(-0.4..0.4),
                rng.gen_range(-0.4..0.4),
                ChannelOrder::Vu,
            )
            .unwrap();
            let c = decompose(&density_of(&evolve(&probe, &params).unwrap()));
            let (dphi, dchi) = coefficient_derivatives(&probe, &params);
            let f = fisher_from_dfp(&c, &[&dphi, &dchi], &t).unwrap();
            let merged = t.merged_outcomes(0, 1).unwrap();
            let fm = fisher_from_dfp(&c, &[&dphi, &dchi], &merged).unwrap();
            for i in 0..2 {
                assert!(fm.get(i, i) <= f.get(i, i) + 1e-10);
            }
        }
    }

    #[test]
    fn table_rejects_bad_rows() {
        let outcomes = vec!["0".to_string(), "1".to_string()];
        let mut rows = vec![vec![0.5, 0.5]; 6];
        rows[0] = vec![0.6, 0.5];
        assert!(matches!(
            DfpTable::with_default_tolerance(outcomes.clone(), rows),
            Err(FisherError::RowNotNormalized { .. })
        ));
        assert!(matches!(
            DfpTable::with_default_tolerance(vec!["0".to_string()], vec![vec![1.0]; 6]),
            Err(FisherError::TooFewOutcomes(1))
        ));
    }
}
