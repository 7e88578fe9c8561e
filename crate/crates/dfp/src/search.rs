//! Constrained maximization of (effective) Fisher information over pure probe
//! states: exhaustive feasibility-aware grid enumeration followed by
//! derivative-free simplex refinement from the best feasible basins.

use thiserror::Error;

use crate::exec;
use crate::fisher::{
    effective_fisher, fisher_from_dfp, positivity_filter, DfpTable, FisherError, FisherMatrix,
};
use crate::qubit::{
    coefficient_derivatives, decompose, density_of, evolve, ChannelParams, PureQubit,
};

use std::f64::consts::{PI, TAU};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("no probe on the grid passes the positivity filter")]
    NoFeasibleProbe,
    #[error("two-parameter search needs at least 3 outcomes, got {0}")]
    NeedThreeOutcomes(usize),
    #[error("probe angles out of range: polar {polar}, azimuth {azimuth}")]
    BadAngles { polar: f64, azimuth: f64 },
    #[error(transparent)]
    Fisher(#[from] FisherError),
}

/// Spherical coordinates of a probe's Bloch vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeParam {
    pub polar: f64,
    pub azimuth: f64,
}

impl ProbeParam {
    pub fn new(polar: f64, azimuth: f64) -> Result<Self, SearchError> {
        if !(0.0..=PI).contains(&polar) || !(0.0..TAU).contains(&azimuth) {
            return Err(SearchError::BadAngles { polar, azimuth });
        }
        Ok(Self { polar, azimuth })
    }

    /// Fold arbitrary angles back into [0, pi] x [0, 2pi).
    pub fn wrapped(polar: f64, azimuth: f64) -> Self {
        let mut p = polar.rem_euclid(TAU);
        let mut a = azimuth;
        if p > PI {
            p = TAU - p;
            a += PI;
        }
        Self {
            polar: p,
            azimuth: a.rem_euclid(TAU),
        }
    }

    pub fn state(&self) -> PureQubit {
        PureQubit::from_spherical(self.polar, self.azimuth)
    }
}

/// How a two-parameter scan is collapsed to a single search objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scalarization {
    Sum,
    Min,
    PhiOnly,
    ChiOnly,
}

impl Scalarization {
    fn apply(self, eff_phi: f64, eff_chi: f64) -> f64 {
        match self {
            Scalarization::Sum => eff_phi + eff_chi,
            Scalarization::Min => eff_phi.min(eff_chi),
            Scalarization::PhiOnly => eff_phi,
            Scalarization::ChiOnly => eff_chi,
        }
    }
}

/// Search configuration. The default grid uses 2 degree spacing.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    /// Number of polar intervals (the grid has polar_steps + 1 rows).
    pub polar_steps: usize,
    /// Number of azimuth intervals.
    pub azimuth_steps: usize,
    /// Positivity filter threshold.
    pub eps: f64,
    /// Feasible basins refined by the simplex stage.
    pub starts: usize,
    pub nm_max_iters: usize,
    pub nm_tol: f64,
    pub scalarization: Scalarization,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            polar_steps: 90,
            azimuth_steps: 180,
            eps: 0.0,
            starts: 3,
            nm_max_iters: 200,
            nm_tol: 1e-10,
            scalarization: Scalarization::Sum,
        }
    }
}

impl SearchConfig {
    /// 1 degree grid, as used by the projective-table accuracy checks.
    pub fn fine() -> Self {
        Self {
            polar_steps: 180,
            azimuth_steps: 360,
            ..Self::default()
        }
    }
}

/// Outcome of a probe search.
#[derive(Debug, Clone)]
pub struct SearchReport {
    pub probe: PureQubit,
    pub param: ProbeParam,
    pub objective: f64,
    pub fisher: FisherMatrix,
    /// Grid points rejected by the positivity filter.
    pub rejected: usize,
    pub grid: (usize, usize),
    pub refine_iters: usize,
    /// Refined result of every simplex start: the distinct feasible local
    /// maxima the search surfaced, best first.
    pub local_maxima: Vec<(ProbeParam, f64)>,
    /// Set when the information vanishes over the whole feasible sphere.
    pub non_identifiable: bool,
}

/// One record of a two-parameter scan.
#[derive(Debug, Clone)]
pub struct TwoParamPoint {
    pub param: ProbeParam,
    pub feasible: bool,
    pub fisher: Option<FisherMatrix>,
    pub eff_phi: Option<f64>,
    pub eff_chi: Option<f64>,
    pub singular: bool,
}

/// Two-parameter search result: the scalarized optimum plus the full scan.
#[derive(Debug, Clone)]
pub struct TwoParamReport {
    pub report: SearchReport,
    pub eff_phi: f64,
    pub eff_chi: f64,
    pub cross: f64,
    pub scan: Vec<TwoParamPoint>,
}

fn single_objective(
    table: &DfpTable,
    params: &ChannelParams,
    probe: &PureQubit,
    eps: f64,
) -> Option<(f64, FisherMatrix)> {
    let evolved = evolve(probe, params).ok()?;
    let c = decompose(&density_of(&evolved));
    if !positivity_filter(&c, table, eps) {
        return None;
    }
    let (dphi, _) = coefficient_derivatives(probe, params);
    let f = fisher_from_dfp(&c, &[&dphi], table).ok()?;
    Some((f.get(0, 0), f))
}

fn two_param_eval(
    table: &DfpTable,
    params: &ChannelParams,
    probe: &PureQubit,
    eps: f64,
) -> TwoParamPoint {
    let param = ProbeParam {
        polar: 0.0,
        azimuth: 0.0,
    }; // filled by caller
    let evolved = match evolve(probe, params) {
        Ok(e) => e,
        Err(_) => {
            return TwoParamPoint {
                param,
                feasible: false,
                fisher: None,
                eff_phi: None,
                eff_chi: None,
                singular: false,
            }
        }
    };
    let c = decompose(&density_of(&evolved));
    if !positivity_filter(&c, table, eps) {
        return TwoParamPoint {
            param,
            feasible: false,
            fisher: None,
            eff_phi: None,
            eff_chi: None,
            singular: false,
        };
    }
    let (dphi, dchi) = coefficient_derivatives(probe, params);
    match fisher_from_dfp(&c, &[&dphi, &dchi], table) {
        Ok(f) => match effective_fisher(&f) {
            Ok(eff) => TwoParamPoint {
                param,
                feasible: true,
                eff_phi: Some(eff[0]),
                eff_chi: Some(eff[1]),
                singular: false,
                fisher: Some(f),
            },
            Err(_) => TwoParamPoint {
                param,
                feasible: true,
                fisher: Some(f),
                eff_phi: None,
                eff_chi: None,
                singular: true,
            },
        },
        Err(_) => TwoParamPoint {
            param,
            feasible: false,
            fisher: None,
            eff_phi: None,
            eff_chi: None,
            singular: false,
        },
    }
}

fn grid_params(config: &SearchConfig) -> Vec<ProbeParam> {
    let mut out = Vec::with_capacity((config.polar_steps + 1) * config.azimuth_steps);
    for i in 0..=config.polar_steps {
        let polar = PI * i as f64 / config.polar_steps as f64;
        for j in 0..config.azimuth_steps {
            let azimuth = TAU * j as f64 / config.azimuth_steps as f64;
            out.push(ProbeParam { polar, azimuth });
        }
    }
    out
}

fn angular_distance(a: &ProbeParam, b: &ProbeParam) -> f64 {
    let ra = a.state().bloch();
    let rb = b.state().bloch();
    let dot: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    dot.clamp(-1.0, 1.0).acos()
}

/// Pick up to `starts` feasible grid maxima separated by at least 10 degrees.
fn pick_basins(scored: &[(ProbeParam, f64)], starts: usize) -> Vec<ProbeParam> {
    if starts == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&a, &b| scored[b].1.total_cmp(&scored[a].1).then(a.cmp(&b)));
    let min_sep = 10f64.to_radians();
    let mut picked: Vec<ProbeParam> = Vec::new();
    for idx in order {
        let cand = scored[idx].0;
        if picked.iter().all(|p| angular_distance(p, &cand) > min_sep) {
            picked.push(cand);
            if picked.len() == starts {
                break;
            }
        }
    }
    picked
}

/// Nelder-Mead on (polar, azimuth); infeasible points evaluate to +inf.
/// Returns the best point,value and the number of iterations used.
fn nelder_mead<F>(
    f: F,
    start: ProbeParam,
    step: f64,
    max_iters: usize,
    tol: f64,
) -> (ProbeParam, f64, usize)
where
    F: Fn(&ProbeParam) -> f64,
{
    let eval = |x: &[f64; 2]| f(&ProbeParam::wrapped(x[0], x[1]));
    let mut simplex: Vec<([f64; 2], f64)> = vec![
        ([start.polar, start.azimuth], 0.0),
        ([start.polar + step, start.azimuth], 0.0),
        ([start.polar, start.azimuth + step], 0.0),
    ];
    for v in &mut simplex {
        v.1 = eval(&v.0);
    }
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut iters = 0;
    for _ in 0..max_iters {
        iters += 1;
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = (simplex[2].1 - simplex[0].1).abs();
        let size = simplex[1..]
            .iter()
            .map(|(x, _)| {
                ((x[0] - simplex[0].0[0]).powi(2) + (x[1] - simplex[0].0[1]).powi(2)).sqrt()
            })
            .fold(0.0, f64::max);
        if spread < tol && size < 1e-8 {
            break;
        }
        let best = simplex[0];
        let worst = simplex[2];
        let centroid = [
            0.5 * (simplex[0].0[0] + simplex[1].0[0]),
            0.5 * (simplex[0].0[1] + simplex[1].0[1]),
        ];
        let refl = [
            centroid[0] + alpha * (centroid[0] - worst.0[0]),
            centroid[1] + alpha * (centroid[1] - worst.0[1]),
        ];
        let f_refl = eval(&refl);
        if f_refl < best.1 {
            let exp = [
                centroid[0] + gamma * (refl[0] - centroid[0]),
                centroid[1] + gamma * (refl[1] - centroid[1]),
            ];
            let f_exp = eval(&exp);
            simplex[2] = if f_exp < f_refl {
                (exp, f_exp)
            } else {
                (refl, f_refl)
            };
            continue;
        }
        if f_refl < simplex[1].1 {
            simplex[2] = (refl, f_refl);
            continue;
        }
        let contr = [
            centroid[0] + rho * (worst.0[0] - centroid[0]),
            centroid[1] + rho * (worst.0[1] - centroid[1]),
        ];
        let f_contr = eval(&contr);
        if f_contr < worst.1 {
            simplex[2] = (contr, f_contr);
            continue;
        }
        for k in 1..3 {
            let shrunk = [
                best.0[0] + sigma * (simplex[k].0[0] - best.0[0]),
                best.0[1] + sigma * (simplex[k].0[1] - best.0[1]),
            ];
            simplex[k] = (shrunk, eval(&shrunk));
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    (
        ProbeParam::wrapped(simplex[0].0[0], simplex[0].0[1]),
        simplex[0].1,
        iters,
    )
}

/// Maximize the single-parameter Fisher information F_phiphi over pure probes
/// at evaluation phase `phi0` (channel chi and order taken from `channel`).
pub fn optimize_single(
    table: &DfpTable,
    channel: &ChannelParams,
    phi0: f64,
    config: &SearchConfig,
) -> Result<SearchReport, SearchError> {
    let params = ChannelParams {
        phi: phi0,
        ..*channel
    };
    let grid = grid_params(config);
    let evals: Vec<Option<f64>> = exec::map_slice(&grid, |p| {
        single_objective(table, &params, &p.state(), config.eps).map(|(v, _)| v)
    });
    let rejected = evals.iter().filter(|e| e.is_none()).count();
    let scored: Vec<(ProbeParam, f64)> = grid
        .iter()
        .zip(&evals)
        .filter_map(|(p, e)| e.map(|v| (*p, v)))
        .collect();
    if scored.is_empty() {
        return Err(SearchError::NoFeasibleProbe);
    }
    let grid_best = scored
        .iter()
        .fold((scored[0].0, f64::NEG_INFINITY), |acc, &(p, v)| {
            if v > acc.1 {
                (p, v)
            } else {
                acc
            }
        });

    let step = PI / config.polar_steps as f64 / 2.0;
    let objective = |p: &ProbeParam| -> f64 {
        single_objective(table, &params, &p.state(), config.eps)
            .map(|(v, _)| -v)
            .unwrap_or(f64::INFINITY)
    };
    let mut best = grid_best;
    let mut refine_iters = 0;
    let mut local_maxima = Vec::new();
    for start in pick_basins(&scored, config.starts) {
        let (p, neg_v, iters) =
            nelder_mead(objective, start, step, config.nm_max_iters, config.nm_tol);
        refine_iters += iters;
        local_maxima.push((p, -neg_v));
        if -neg_v > best.1 {
            best = (p, -neg_v);
        }
    }
    local_maxima.sort_by(|a, b| b.1.total_cmp(&a.1));
    let (value, fisher) = single_objective(table, &params, &best.0.state(), config.eps)
        .expect("best probe stays feasible");
    let non_identifiable = best.1 <= 1e-12;
    Ok(SearchReport {
        probe: best.0.state(),
        param: best.0,
        objective: value,
        fisher,
        rejected,
        grid: (config.polar_steps + 1, config.azimuth_steps),
        refine_iters,
        local_maxima,
        non_identifiable,
    })
}

/// Scan the full two-parameter information over the probe grid and refine the
/// scalarized objective. The whole scan is retained for export.
pub fn optimize_two_parameter(
    table: &DfpTable,
    params: &ChannelParams,
    config: &SearchConfig,
) -> Result<TwoParamReport, SearchError> {
    if table.n_outcomes() < 3 {
        return Err(SearchError::NeedThreeOutcomes(table.n_outcomes()));
    }
    let grid = grid_params(config);
    let mut scan: Vec<TwoParamPoint> = exec::map_slice(&grid, |p| {
        let mut point = two_param_eval(table, params, &p.state(), config.eps);
        point.param = *p;
        point
    });
    let rejected = scan.iter().filter(|p| !p.feasible).count();
    let scal = config.scalarization;
    let scored: Vec<(ProbeParam, f64)> = scan
        .iter()
        .filter_map(|pt| match (pt.eff_phi, pt.eff_chi) {
            (Some(ep), Some(ec)) => Some((pt.param, scal.apply(ep, ec))),
            _ => None,
        })
        .collect();
    if scored.is_empty() {
        if scan.iter().all(|p| !p.feasible) {
            return Err(SearchError::NoFeasibleProbe);
        }
        // every feasible probe is singular; report the scan with a zero optimum
        let pt = scan
            .iter()
            .find(|p| p.feasible)
            .expect("feasible point exists");
        let report = SearchReport {
            probe: pt.param.state(),
            param: pt.param,
            objective: 0.0,
            fisher: pt.fisher.clone().expect("feasible point carries a matrix"),
            rejected,
            grid: (config.polar_steps + 1, config.azimuth_steps),
            refine_iters: 0,
            local_maxima: Vec::new(),
            non_identifiable: true,
        };
        let cross = report.fisher.get(0, 1);
        return Ok(TwoParamReport {
            report,
            eff_phi: 0.0,
            eff_chi: 0.0,
            cross,
            scan,
        });
    }

    let grid_best = scored
        .iter()
        .fold((scored[0].0, f64::NEG_INFINITY), |acc, &(p, v)| {
            if v > acc.1 {
                (p, v)
            } else {
                acc
            }
        });
    let objective = |p: &ProbeParam| -> f64 {
        let pt = two_param_eval(table, params, &p.state(), config.eps);
        match (pt.eff_phi, pt.eff_chi) {
            (Some(ep), Some(ec)) => -scal.apply(ep, ec),
            _ => f64::INFINITY,
        }
    };
    let step = PI / config.polar_steps as f64 / 2.0;
    let mut best = grid_best;
    let mut refine_iters = 0;
    let mut local_maxima = Vec::new();
    for start in pick_basins(&scored, config.starts) {
        let (p, neg_v, iters) =
            nelder_mead(objective, start, step, config.nm_max_iters, config.nm_tol);
        refine_iters += iters;
        local_maxima.push((p, -neg_v));
        if -neg_v > best.1 {
            best = (p, -neg_v);
        }
    }
    local_maxima.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut best_pt = two_param_eval(table, params, &best.0.state(), config.eps);
    best_pt.param = best.0;
    let fisher = best_pt
        .fisher
        .clone()
        .expect("optimal probe stays feasible");
    let (eff_phi, eff_chi) = (
        best_pt.eff_phi.expect("optimal probe is non-singular"),
        best_pt.eff_chi.expect("optimal probe is non-singular"),
    );
    let cross = fisher.get(0, 1);
    let non_identifiable = best.1 <= 1e-12;
    // keep the refined optimum visible in the exported scan
    scan.push(best_pt);
    Ok(TwoParamReport {
        report: SearchReport {
            probe: best.0.state(),
            param: best.0,
            objective: best.1,
            fisher,
            rejected,
            grid: (config.polar_steps + 1, config.azimuth_steps),
            refine_iters,
            local_maxima,
            non_identifiable,
        },
        eff_phi,
        eff_chi,
        cross,
        scan,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::ChannelOrder;
    use crate::tomo::{born_table, povm_projective, povm_zx};
    use approx::assert_abs_diff_eq;

    fn phase_channel() -> ChannelParams {
        ChannelParams::new(0.0, 0.0, ChannelOrder::Vu).unwrap()
    }

    #[test]
    fn da_table_optimum_is_equatorial_unit_information() {
        let table = born_table(&povm_projective([1.0, 0.0, 0.0]));
        let report = optimize_single(&table, &phase_channel(), 0.0, &SearchConfig::fine()).unwrap();
        assert_abs_diff_eq!(report.objective, 1.0, epsilon = 1e-4);
        assert!(!report.non_identifiable);
        // optimum sits on the equator
        assert!(
            report.probe.bloch()[2].abs() < 1e-3,
            "bloch = {:?}",
            report.probe.bloch()
        );
    }

    #[test]
    fn hv_table_phase_is_non_identifiable() {
        let table = born_table(&povm_projective([0.0, 0.0, 1.0]));
        let report =
            optimize_single(&table, &phase_channel(), 0.0, &SearchConfig::default()).unwrap();
        assert_abs_diff_eq!(report.objective, 0.0, epsilon = 1e-12);
        assert!(report.non_identifiable);
    }

    #[test]
    fn perturbed_table_filters_and_reports_feasible_optimum() {
        // D/A projection with the H row perturbed: predictions for probes near
        // -x go negative, so part of the sphere must be rejected.
        let rows = vec![
            vec![0.495, 0.505],
            vec![0.5, 0.5],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.5, 0.5],
            vec![0.5, 0.5],
        ];
        let table = DfpTable::new(vec!["0".into(), "1".into()], rows, 1e-2).unwrap();
        let config = SearchConfig {
            eps: 1e-4,
            ..SearchConfig::default()
        };
        let report = optimize_single(&table, &phase_channel(), 0.0, &config).unwrap();
        assert!(report.rejected > 0, "expected filtered grid points");
        assert!(!report.local_maxima.is_empty());
        assert!(report.local_maxima.windows(2).all(|w| w[0].1 >= w[1].1));
        let c = decompose(&density_of(&report.probe));
        assert!(positivity_filter(&c, &table, config.eps));

        // exhaustive fine grid never beats the refined feasible optimum
        let fine = SearchConfig {
            eps: config.eps,
            ..SearchConfig::fine()
        };
        let fine_best = optimize_single(&table, &phase_channel(), 0.0, &fine).unwrap();
        assert!(report.objective >= fine_best.objective - 1e-3);
    }

    #[test]
    fn two_parameter_on_ideal_zx() {
        let table = born_table(&povm_zx(0.5, 0.5).unwrap());
        let result =
            optimize_two_parameter(&table, &phase_channel(), &SearchConfig::default()).unwrap();
        assert_abs_diff_eq!(result.eff_phi, 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(result.eff_chi, 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(result.cross, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn two_parameter_uneven_split() {
        let table = born_table(&povm_zx(0.55, 0.45).unwrap());
        let result =
            optimize_two_parameter(&table, &phase_channel(), &SearchConfig::default()).unwrap();
        assert!(
            (result.eff_phi - result.eff_chi).abs() > 1e-3,
            "effective values should split unevenly: {} vs {}",
            result.eff_phi,
            result.eff_chi
        );
    }

    #[test]
    fn two_parameter_needs_three_outcomes() {
        let table = born_table(&povm_projective([1.0, 0.0, 0.0]));
        assert!(matches!(
            optimize_two_parameter(&table, &phase_channel(), &SearchConfig::default()),
            Err(SearchError::NeedThreeOutcomes(2))
        ));
    }

    #[test]
    fn two_parameter_duplicated_axis_is_singular() {
        // four outcomes that all measure Z: the information matrix is rank 1
        let rows = vec![
            vec![0.5, 0.0, 0.5, 0.0],
            vec![0.0, 0.5, 0.0, 0.5],
            vec![0.25, 0.25, 0.25, 0.25],
            vec![0.25, 0.25, 0.25, 0.25],
            vec![0.25, 0.25, 0.25, 0.25],
            vec![0.25, 0.25, 0.25, 0.25],
        ];
        let table = DfpTable::with_default_tolerance(
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            rows,
        )
        .unwrap();
        // away from the origin the rank-1 information has a nonzero cross term
        let params = ChannelParams::new(0.1, 0.2, ChannelOrder::Vu).unwrap();
        let result = optimize_two_parameter(&table, &params, &SearchConfig::default()).unwrap();
        assert!(
            result.scan.iter().any(|p| p.singular),
            "expected singular flags in the scan"
        );
    }

    #[test]
    fn scalarization_rescale_keeps_argmax() {
        let table = born_table(&povm_zx(0.6, 0.4).unwrap());
        let result =
            optimize_two_parameter(&table, &phase_channel(), &SearchConfig::default()).unwrap();
        // positive rescales of the objective leave the argmax over the
        // retained scan unchanged (only the value changes)
        for scale in [0.5, 2.0, 7.3] {
            let argmax = |s: f64| {
                result
                    .scan
                    .iter()
                    .enumerate()
                    .filter_map(|(i, p)| match (p.eff_phi, p.eff_chi) {
                        (Some(ep), Some(ec)) => Some((i, s * (ep + ec))),
                        _ => None,
                    })
                    .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
                    .map(|(i, _)| i)
                    .unwrap()
            };
            assert_eq!(argmax(1.0), argmax(scale));
        }
        // the reported optimum is the scan's best point (the refined point is
        // appended to the scan)
        let best = result
            .scan
            .iter()
            .filter_map(|p| p.eff_phi.zip(p.eff_chi).map(|(ep, ec)| ep + ec))
            .fold(f64::NEG_INFINITY, f64::max);
        assert_abs_diff_eq!(result.report.objective, best, epsilon = 1e-12);
    }

    #[test]
    fn refinement_never_loses_to_grid() {
        let table = born_table(&povm_projective([1.0, 0.0, 0.0]));
        let coarse = SearchConfig {
            polar_steps: 18,
            azimuth_steps: 36,
            ..SearchConfig::default()
        };
        let report = optimize_single(&table, &phase_channel(), 0.0, &coarse).unwrap();
        // grid-only best
        let grid_only = SearchConfig {
            starts: 0,
            ..coarse.clone()
        };
        let grid_best = optimize_single(&table, &phase_channel(), 0.0, &grid_only).unwrap();
        assert!(report.objective >= grid_best.objective - 1e-12);
    }
}
