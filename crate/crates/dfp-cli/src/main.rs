//! Command-line front end: ingest data-fitting-pattern tables or synthesize
//! them from detector models, run Fisher-information scans, probe
//! optimizations, tomography comparisons and weak-field-homodyne scans, and
//! emit machine-readable CSV results.

mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use dfp::fisher::ParamSet;
use dfp::search::{optimize_single, optimize_two_parameter, Scalarization, SearchConfig};
use dfp::tomo::{
    fisher_from_povm, povm_projective, povm_waveplate, povm_zx, reconstruct_povm, Povm,
};
use dfp::wfh::{coherent_alpha_scan, squeeze_tradeoff_scan, WfhDetector};
use dfp::{
    coefficient_derivatives, decompose, density_of, effective_fisher, evolve, fisher_from_dfp,
    massar_ratio, positivity_filter, qfi_matrix, ChannelOrder, ChannelParams, DfpTable,
    FisherMatrix, PureQubit, SearchError, FIDUCIALS,
};

use io::{cell, load_table, ResultFile};

#[derive(Parser)]
#[command(
    name = "dfp",
    version,
    about = "Fisher information from detector data-fitting patterns"
)]
struct Cli {
    /// Worker threads for scan parallelism (defaults to all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan Fisher information over a model angle or a phase range
    FisherScan(FisherScanArgs),
    /// Optimize a probe at a single evaluation point and report it
    OptimizeProbe(OptimizeProbeArgs),
    /// Compare the direct DFP route against reconstructed-POVM predictions
    TomoCompare(TomoCompareArgs),
    /// Per-outcome phase information of a weak-field homodyne over amplitudes
    WfhScan(WfhScanArgs),
    /// Phase information of displaced-squeezed probes per displacement fraction
    WfhSqueeze(WfhSqueezeArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Model {
    /// Half-wave plate + polarising beam splitter (2 outcomes)
    Waveplate,
    /// Balanced Z/X split measurement (4 outcomes)
    Zx,
    /// Polarisation-dependent Z/X split, t_H = 0.55 / t_V = 0.45
    ZxAsym,
    /// Ideal H/V projection
    Hv,
    /// Ideal D/A projection
    Da,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OrderArg {
    /// V(chi) . U(phi): phase first
    Vu,
    /// U(phi) . V(chi): rotation first
    Uv,
}

impl From<OrderArg> for ChannelOrder {
    fn from(o: OrderArg) -> Self {
        match o {
            OrderArg::Vu => ChannelOrder::Vu,
            OrderArg::Uv => ChannelOrder::Uv,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScalarizeArg {
    Sum,
    Min,
    Phi,
    Chi,
}

impl From<ScalarizeArg> for Scalarization {
    fn from(s: ScalarizeArg) -> Self {
        match s {
            ScalarizeArg::Sum => Scalarization::Sum,
            ScalarizeArg::Min => Scalarization::Min,
            ScalarizeArg::Phi => Scalarization::PhiOnly,
            ScalarizeArg::Chi => Scalarization::ChiOnly,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ParamsArg {
    Phi,
    #[value(alias = "phi,chi")]
    PhiChi,
}

#[derive(Args)]
struct TableOrModel {
    /// DFP table file (CSV or JSON, columns fiducial,outcome,probability)
    #[arg(long, conflicts_with = "model")]
    table: Option<PathBuf>,
    /// Synthetic detector model
    #[arg(long, value_enum)]
    model: Option<Model>,
    /// Waveplate angle in degrees; fisher-scan accepts a range a:b:step
    #[arg(long, default_value = "22.5")]
    theta: String,
    /// Gaussian noise level for synthetic tables
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// RNG seed for synthetic tables
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Row-normalization tolerance when loading tables
    #[arg(long, default_value_t = 1e-6)]
    norm_tol: f64,
}

impl TableOrModel {
    fn theta_single(&self) -> Result<f64> {
        self.theta
            .trim()
            .parse()
            .with_context(|| format!("--theta {:?} must be a single angle here", self.theta))
    }

    fn povm(&self) -> Result<Option<Povm>> {
        Ok(match self.model {
            None => None,
            Some(Model::Waveplate) => Some(povm_waveplate(self.theta_single()?.to_radians())),
            Some(Model::Zx) => Some(povm_zx(0.5, 0.5).map_err(|e| anyhow!(e))?),
            Some(Model::ZxAsym) => Some(povm_zx(0.55, 0.45).map_err(|e| anyhow!(e))?),
            Some(Model::Hv) => Some(povm_projective([0.0, 0.0, 1.0])),
            Some(Model::Da) => Some(povm_projective([1.0, 0.0, 0.0])),
        })
    }

    fn load(&self) -> Result<DfpTable, Failure> {
        if let Some(path) = &self.table {
            return load_table(path, self.norm_tol).map_err(Failure::Input);
        }
        let povm = self
            .povm()
            .map_err(Failure::Input)?
            .ok_or_else(|| Failure::Input(anyhow!("either --table or --model is required")))?;
        povm.synth_dfp(self.noise, self.seed)
            .map_err(|e| Failure::Other(anyhow!(e)))
    }

    fn describe(&self) -> String {
        match (&self.table, self.model) {
            (Some(p), _) => p.display().to_string(),
            (None, Some(Model::Waveplate)) => format!("waveplate(theta={}deg)", self.theta),
            (None, Some(Model::Zx)) => "zx(0.5,0.5)".into(),
            (None, Some(Model::ZxAsym)) => "zx(0.55,0.45)".into(),
            (None, Some(Model::Hv)) => "hv".into(),
            (None, Some(Model::Da)) => "da".into(),
            (None, None) => "unset".into(),
        }
    }
}

#[derive(Args)]
struct FisherScanArgs {
    #[command(flatten)]
    source: TableOrModel,
    /// Parameters estimated at each scan point
    #[arg(long, value_enum, default_value_t = ParamsArg::Phi)]
    params: ParamsArg,
    /// Evaluation phase(s) phi, a:b:step or a single value; when omitted the
    /// waveplate model scans theta instead
    #[arg(long)]
    phi: Option<String>,
    /// Fixed rotation chi at evaluation
    #[arg(long, default_value_t = 0.0)]
    chi: f64,
    /// Channel order
    #[arg(long, value_enum, default_value_t = OrderArg::Vu)]
    order: OrderArg,
    /// Probe: `auto` to optimize, or `x,y,z` Bloch components
    #[arg(long, default_value = "auto")]
    probe: String,
    /// Positivity filter threshold
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    /// Grid as POLARxAZIMUTH intervals
    #[arg(long, default_value = "90x180")]
    grid: String,
    /// Two-parameter search objective
    #[arg(long, value_enum, default_value_t = ScalarizeArg::Sum)]
    scalarize: ScalarizeArg,
    /// Output CSV path
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct OptimizeProbeArgs {
    #[command(flatten)]
    source: TableOrModel,
    #[arg(long, value_enum, default_value_t = ParamsArg::Phi)]
    params: ParamsArg,
    /// Evaluation phase
    #[arg(long, default_value_t = 0.0)]
    phi: f64,
    #[arg(long, default_value_t = 0.0)]
    chi: f64,
    #[arg(long, value_enum, default_value_t = OrderArg::Vu)]
    order: OrderArg,
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    #[arg(long, default_value = "90x180")]
    grid: String,
    /// Two-parameter search objective
    #[arg(long, value_enum, default_value_t = ScalarizeArg::Sum)]
    scalarize: ScalarizeArg,
    /// export the full two-parameter scan next to the report
    #[arg(long)]
    scan_output: Option<PathBuf>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct TomoCompareArgs {
    /// Detector model to synthesize, reconstruct and compare
    #[arg(long, value_enum, default_value_t = Model::Zx)]
    povm: Model,
    #[arg(long, default_value_t = 22.5)]
    theta: f64,
    #[arg(long, default_value_t = 1e-3)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Phase scan a:b:step
    #[arg(long, default_value = "0:0.5:0.05")]
    phi: String,
    #[arg(long, default_value_t = 0.0)]
    chi: f64,
    #[arg(long, value_enum, default_value_t = OrderArg::Vu)]
    order: OrderArg,
    #[arg(long, value_enum, default_value_t = ParamsArg::PhiChi)]
    params: ParamsArg,
    /// Probe Bloch components x,y,z
    #[arg(long, default_value = "0,1,0")]
    probe: String,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct WfhScanArgs {
    #[arg(long, default_value_t = 4)]
    n_bins: u32,
    /// Local oscillator amplitude (real)
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Evaluation phase
    #[arg(long, default_value_t = 0.1)]
    phi: f64,
    /// Coherent amplitude scan a:b:step
    #[arg(long, default_value = "0:2:0.02")]
    alpha: String,
    /// Central finite-difference step
    #[arg(long, default_value_t = 1e-4)]
    fd_step: f64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct WfhSqueezeArgs {
    /// Grid scale: amplitudes run over --alpha times sqrt(energy)
    #[arg(long, default_value_t = 1.0)]
    energy: f64,
    /// Displacement fractions r_d, comma separated
    #[arg(long, default_value = "1,0.95,0.9", value_delimiter = ',')]
    rd: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 4)]
    n_bins: u32,
    #[arg(long, default_value_t = 0.1)]
    phi: f64,
    /// Amplitude scan a:b:step before energy scaling
    #[arg(long, default_value = "0.2:1.6:0.05")]
    alpha: String,
    #[arg(long, default_value_t = 1e-4)]
    fd_step: f64,
    #[arg(short, long)]
    output: PathBuf,
}

/// Errors mapped to the CLI exit-code contract.
enum Failure {
    /// Malformed or missing input: exit 2.
    Input(anyhow::Error),
    /// Infeasible optimization: exit 3.
    Infeasible(anyhow::Error),
    /// Anything else: exit 1.
    Other(anyhow::Error),
}

impl Failure {
    fn report(self) -> ExitCode {
        match self {
            Failure::Input(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            }
            Failure::Infeasible(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(3)
            }
            Failure::Other(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        }
    }
}

fn from_search(e: SearchError) -> Failure {
    match e {
        SearchError::NoFeasibleProbe => Failure::Infeasible(anyhow!(e)),
        other => Failure::Other(anyhow!(other)),
    }
}

fn parse_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [single] => Ok(vec![single.trim().parse().context("parsing scan value")?]),
        [a, b, step] => {
            let (a, b, step): (f64, f64, f64) = (
                a.trim().parse().context("parsing scan start")?,
                b.trim().parse().context("parsing scan end")?,
                step.trim().parse().context("parsing scan step")?,
            );
            if step <= 0.0 || b < a {
                anyhow::bail!("ranges must be a:b:step with step > 0 and b >= a");
            }
            let mut out = Vec::with_capacity(((b - a) / step) as usize + 2);
            let mut k = 0usize;
            loop {
                let v = a + step * k as f64;
                if v > b + step * 1e-9 {
                    break;
                }
                out.push(v);
                k += 1;
            }
            Ok(out)
        }
        _ => anyhow::bail!("expected a single value or a:b:step, got {s:?}"),
    }
}

fn parse_probe(s: &str) -> Result<Option<PureQubit>> {
    if s.trim().eq_ignore_ascii_case("auto") {
        return Ok(None);
    }
    let comps: Vec<f64> = s
        .split(',')
        .map(|c| c.trim().parse::<f64>().context("parsing probe component"))
        .collect::<Result<_>>()?;
    if comps.len() != 3 {
        anyhow::bail!("probe must be `auto` or three comma-separated Bloch components");
    }
    let norm = comps.iter().map(|c| c * c).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        anyhow::bail!("probe Bloch vector must be non-zero and finite");
    }
    PureQubit::new([comps[0] / norm, comps[1] / norm, comps[2] / norm])
        .map(Some)
        .map_err(|e| anyhow!(e))
}

fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let (p, a) = s
        .split_once('x')
        .ok_or_else(|| anyhow!("grid must look like 90x180"))?;
    Ok((p.trim().parse()?, a.trim().parse()?))
}

fn check_output_path(path: &std::path::Path) -> Result<(), Failure> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = parent {
        if !dir.is_dir() {
            return Err(Failure::Input(anyhow!(
                "output directory {} does not exist",
                dir.display()
            )));
        }
    }
    Ok(())
}

fn spherical_of(probe: &PureQubit) -> (f64, f64) {
    let [x, y, z] = probe.bloch();
    (
        z.clamp(-1.0, 1.0).acos(),
        y.atan2(x).rem_euclid(std::f64::consts::TAU),
    )
}

fn record_table(out: &mut ResultFile, table: &DfpTable) {
    for f in FIDUCIALS {
        out.config(
            &format!("raw_row_sum_{}", f.label()),
            cell(table.raw_row_sum(f)),
        );
    }
    out.config("clamped_entries", table.clamped_entries());
}

/// Evaluate a fixed probe exactly where the optimizer would.
fn fixed_probe_eval(
    table: &DfpTable,
    params: &ChannelParams,
    probe: &PureQubit,
    eps: f64,
    param_set: ParamSet,
) -> Result<FisherMatrix, Failure> {
    let c = decompose(&density_of(
        &evolve(probe, params).map_err(|e| Failure::Other(anyhow!(e)))?,
    ));
    if !positivity_filter(&c, table, eps) {
        return Err(Failure::Infeasible(anyhow!(
            "fixed probe fails the positivity filter at eps = {eps}"
        )));
    }
    let (dphi, dchi) = coefficient_derivatives(probe, params);
    let dcs: Vec<&dfp::Coefficients> = match param_set {
        ParamSet::Phi => vec![&dphi],
        ParamSet::PhiChi => vec![&dphi, &dchi],
    };
    fisher_from_dfp(&c, &dcs, table).map_err(|e| Failure::Other(anyhow!(e)))
}

fn eff_or_nan(f: &FisherMatrix) -> (f64, f64) {
    match effective_fisher(f) {
        Ok(e) => (e[0], e[1]),
        Err(_) => (f64::NAN, f64::NAN),
    }
}

fn cmd_fisher_scan(args: &FisherScanArgs) -> Result<(), Failure> {
    check_output_path(&args.output)?;
    let probe = parse_probe(&args.probe).map_err(Failure::Input)?;
    let (polar_steps, azimuth_steps) = parse_grid(&args.grid).map_err(Failure::Input)?;
    let config = SearchConfig {
        polar_steps,
        azimuth_steps,
        eps: args.eps,
        ..SearchConfig::default()
    };
    let order: ChannelOrder = args.order.into();

    let mut out = ResultFile::new("fisher-scan");
    out.config("source", args.source.describe())
        .config(
            "params",
            match args.params {
                ParamsArg::Phi => "phi",
                ParamsArg::PhiChi => "phi,chi",
            },
        )
        .config("chi", cell(args.chi))
        .config(
            "order",
            if order == ChannelOrder::Vu {
                "vu"
            } else {
                "uv"
            },
        )
        .config("probe", &args.probe)
        .config("eps", cell(args.eps))
        .config("grid", &args.grid)
        .config(
            "scalarize",
            match args.scalarize {
                ScalarizeArg::Sum => "sum",
                ScalarizeArg::Min => "min",
                ScalarizeArg::Phi => "phi",
                ScalarizeArg::Chi => "chi",
            },
        )
        .config("noise", cell(args.source.noise))
        .config("seed", args.source.seed);

    let is_theta_scan = args.source.model == Some(Model::Waveplate)
        && args.source.table.is_none()
        && args.phi.is_none();
    if is_theta_scan {
        let default_thetas = if args.source.theta.contains(':') {
            args.source.theta.clone()
        } else {
            "0:180:1".to_string()
        };
        let thetas = parse_range(&default_thetas).map_err(Failure::Input)?;
        let phi0 = 0.0;
        out.config("theta_scan", &default_thetas)
            .config("phi", cell(phi0));
        out.columns(&[
            "theta_deg",
            "f_phiphi",
            "h_phiphi",
            "ratio",
            "rejected",
            "polar",
            "azimuth",
        ]);
        for (i, theta) in thetas.iter().enumerate() {
            let povm = povm_waveplate(theta.to_radians());
            let table = povm
                .synth_dfp(args.source.noise, args.source.seed.wrapping_add(i as u64))
                .map_err(|e| Failure::Other(anyhow!(e)))?;
            let channel = ChannelParams::new(phi0, args.chi, order)
                .map_err(|e| Failure::Input(anyhow!(e)))?;
            let (f, h, rejected, p) = match &probe {
                None => {
                    let rep =
                        optimize_single(&table, &channel, phi0, &config).map_err(from_search)?;
                    let h = qfi_matrix(&rep.probe, &channel);
                    (rep.objective, h.get(0, 0), rep.rejected, rep.probe)
                }
                Some(p) => {
                    let f = fixed_probe_eval(&table, &channel, p, args.eps, ParamSet::Phi)?;
                    let h = qfi_matrix(p, &channel);
                    (f.get(0, 0), h.get(0, 0), 0, *p)
                }
            };
            let (polar, azimuth) = spherical_of(&p);
            let ratio = if h == 0.0 { f64::NAN } else { f / h };
            out.row(&[
                cell(*theta),
                cell(f),
                cell(h),
                cell(ratio),
                rejected.to_string(),
                cell(polar),
                cell(azimuth),
            ]);
        }
        return out.write(&args.output).map_err(Failure::Other);
    }

    let table = args.source.load()?;
    record_table(&mut out, &table);
    let phi_spec = args.phi.clone().unwrap_or_else(|| "0".to_string());
    let phis = parse_range(&phi_spec).map_err(Failure::Input)?;
    out.config("phi_scan", &phi_spec);
    match args.params {
        ParamsArg::Phi => {
            out.columns(&[
                "phi", "f_phiphi", "h_phiphi", "ratio", "rejected", "polar", "azimuth",
            ]);
            for &phi0 in &phis {
                let channel = ChannelParams::new(phi0, args.chi, order)
                    .map_err(|e| Failure::Input(anyhow!(e)))?;
                let (f, h, rejected, p) = match &probe {
                    None => {
                        let rep = optimize_single(&table, &channel, phi0, &config)
                            .map_err(from_search)?;
                        let h = qfi_matrix(&rep.probe, &channel);
                        (rep.objective, h.get(0, 0), rep.rejected, rep.probe)
                    }
                    Some(p) => {
                        let f = fixed_probe_eval(&table, &channel, p, args.eps, ParamSet::Phi)?;
                        let h = qfi_matrix(p, &channel);
                        (f.get(0, 0), h.get(0, 0), 0, *p)
                    }
                };
                let (polar, azimuth) = spherical_of(&p);
                let ratio = if h == 0.0 { f64::NAN } else { f / h };
                out.row(&[
                    cell(phi0),
                    cell(f),
                    cell(h),
                    cell(ratio),
                    rejected.to_string(),
                    cell(polar),
                    cell(azimuth),
                ]);
            }
        }
        ParamsArg::PhiChi => {
            out.columns(&[
                "phi", "f_phiphi", "f_chichi", "f_chiphi", "eff_phi", "eff_chi", "massar",
                "rejected", "polar", "azimuth",
            ]);
            for &phi0 in &phis {
                let channel = ChannelParams::new(phi0, args.chi, order)
                    .map_err(|e| Failure::Input(anyhow!(e)))?;
                let (f, rejected, p) = match &probe {
                    None => {
                        let res = optimize_two_parameter(&table, &channel, &config)
                            .map_err(from_search)?;
                        (
                            res.report.fisher.clone(),
                            res.report.rejected,
                            res.report.probe,
                        )
                    }
                    Some(p) => (
                        fixed_probe_eval(&table, &channel, p, args.eps, ParamSet::PhiChi)?,
                        0,
                        *p,
                    ),
                };
                let h = qfi_matrix(&p, &channel);
                let (eff_phi, eff_chi) = eff_or_nan(&f);
                let massar = massar_ratio(&f, &h).unwrap_or(f64::NAN);
                let (polar, azimuth) = spherical_of(&p);
                out.row(&[
                    cell(phi0),
                    cell(f.get(0, 0)),
                    cell(f.get(1, 1)),
                    cell(f.get(0, 1)),
                    cell(eff_phi),
                    cell(eff_chi),
                    cell(massar),
                    rejected.to_string(),
                    cell(polar),
                    cell(azimuth),
                ]);
            }
        }
    }
    out.write(&args.output).map_err(Failure::Other)
}

fn cmd_optimize_probe(args: &OptimizeProbeArgs) -> Result<(), Failure> {
    check_output_path(&args.output)?;
    let (polar_steps, azimuth_steps) = parse_grid(&args.grid).map_err(Failure::Input)?;
    let config = SearchConfig {
        polar_steps,
        azimuth_steps,
        eps: args.eps,
        ..SearchConfig::default()
    };
    let table = args.source.load()?;
    let channel = ChannelParams::new(args.phi, args.chi, args.order.into())
        .map_err(|e| Failure::Input(anyhow!(e)))?;

    let mut out = ResultFile::new("optimize-probe");
    out.config("source", args.source.describe())
        .config(
            "params",
            match args.params {
                ParamsArg::Phi => "phi",
                ParamsArg::PhiChi => "phi,chi",
            },
        )
        .config("phi", cell(args.phi))
        .config("chi", cell(args.chi))
        .config(
            "order",
            if args.order == OrderArg::Vu {
                "vu"
            } else {
                "uv"
            },
        )
        .config("eps", cell(args.eps))
        .config("grid", &args.grid)
        .config(
            "scalarize",
            match args.scalarize {
                ScalarizeArg::Sum => "sum",
                ScalarizeArg::Min => "min",
                ScalarizeArg::Phi => "phi",
                ScalarizeArg::Chi => "chi",
            },
        );
    record_table(&mut out, &table);

    match args.params {
        ParamsArg::Phi => {
            let rep = optimize_single(&table, &channel, args.phi, &config).map_err(from_search)?;
            for (k, (p, v)) in rep.local_maxima.iter().enumerate() {
                out.config(
                    &format!("local_maximum_{k}"),
                    format!(
                        "polar={} azimuth={} value={}",
                        cell(p.polar),
                        cell(p.azimuth),
                        cell(*v)
                    ),
                );
            }
            let (polar, azimuth) = spherical_of(&rep.probe);
            let [x, y, z] = rep.probe.bloch();
            out.columns(&[
                "objective",
                "f_phiphi",
                "polar",
                "azimuth",
                "bloch_x",
                "bloch_y",
                "bloch_z",
                "rejected",
                "refine_iters",
                "non_identifiable",
            ]);
            out.row(&[
                cell(rep.objective),
                cell(rep.fisher.get(0, 0)),
                cell(polar),
                cell(azimuth),
                cell(x),
                cell(y),
                cell(z),
                rep.rejected.to_string(),
                rep.refine_iters.to_string(),
                rep.non_identifiable.to_string(),
            ]);
        }
        ParamsArg::PhiChi => {
            let res = optimize_two_parameter(&table, &channel, &config).map_err(from_search)?;
            let rep = &res.report;
            for (k, (p, v)) in rep.local_maxima.iter().enumerate() {
                out.config(
                    &format!("local_maximum_{k}"),
                    format!(
                        "polar={} azimuth={} value={}",
                        cell(p.polar),
                        cell(p.azimuth),
                        cell(*v)
                    ),
                );
            }
            let (polar, azimuth) = spherical_of(&rep.probe);
            let [x, y, z] = rep.probe.bloch();
            out.columns(&[
                "objective",
                "f_phiphi",
                "f_chichi",
                "f_chiphi",
                "eff_phi",
                "eff_chi",
                "polar",
                "azimuth",
                "bloch_x",
                "bloch_y",
                "bloch_z",
                "rejected",
                "refine_iters",
                "non_identifiable",
            ]);
            out.row(&[
                cell(rep.objective),
                cell(rep.fisher.get(0, 0)),
                cell(rep.fisher.get(1, 1)),
                cell(res.cross),
                cell(res.eff_phi),
                cell(res.eff_chi),
                cell(polar),
                cell(azimuth),
                cell(x),
                cell(y),
                cell(z),
                rep.rejected.to_string(),
                rep.refine_iters.to_string(),
                rep.non_identifiable.to_string(),
            ]);
            if let Some(scan_path) = &args.scan_output {
                let mut scan_out = ResultFile::new("optimize-probe --scan-output");
                scan_out.config("source", args.source.describe());
                scan_out.columns(&[
                    "polar", "azimuth", "feasible", "singular", "eff_phi", "eff_chi",
                ]);
                for pt in &res.scan {
                    scan_out.row(&[
                        cell(pt.param.polar),
                        cell(pt.param.azimuth),
                        pt.feasible.to_string(),
                        pt.singular.to_string(),
                        cell(pt.eff_phi.unwrap_or(f64::NAN)),
                        cell(pt.eff_chi.unwrap_or(f64::NAN)),
                    ]);
                }
                scan_out.write(scan_path).map_err(Failure::Other)?;
            }
        }
    }
    out.write(&args.output).map_err(Failure::Other)
}

fn cmd_tomo_compare(args: &TomoCompareArgs) -> Result<(), Failure> {
    check_output_path(&args.output)?;
    let source = TableOrModel {
        table: None,
        model: Some(args.povm),
        theta: args.theta.to_string(),
        noise: args.noise,
        seed: args.seed,
        norm_tol: 1e-6,
    };
    let truth = source
        .povm()
        .map_err(Failure::Input)?
        .expect("model is always set");
    let table = truth
        .synth_dfp(args.noise, args.seed)
        .map_err(|e| Failure::Other(anyhow!(e)))?;
    let rec = reconstruct_povm(&table).map_err(|e| Failure::Other(anyhow!(e)))?;
    let probe = parse_probe(&args.probe)
        .map_err(Failure::Input)?
        .ok_or_else(|| Failure::Input(anyhow!("tomo-compare needs an explicit probe")))?;
    let phis = parse_range(&args.phi).map_err(Failure::Input)?;
    let order: ChannelOrder = args.order.into();
    let param_set = match args.params {
        ParamsArg::Phi => ParamSet::Phi,
        ParamsArg::PhiChi => ParamSet::PhiChi,
    };

    let mut out = ResultFile::new("tomo-compare");
    out.config("povm", source.describe())
        .config("noise", cell(args.noise))
        .config("seed", args.seed)
        .config("phi_scan", &args.phi)
        .config("chi", cell(args.chi))
        .config(
            "order",
            if args.order == OrderArg::Vu {
                "vu"
            } else {
                "uv"
            },
        )
        .config(
            "params",
            match args.params {
                ParamsArg::Phi => "phi",
                ParamsArg::PhiChi => "phi,chi",
            },
        )
        .config("probe", &args.probe)
        .config("reconstruction_converged", rec.converged)
        .config("reconstruction_iterations", rec.iterations)
        .config("reconstruction_misfit", cell(rec.misfit));
    record_table(&mut out, &table);

    match param_set {
        ParamSet::Phi => {
            out.columns(&["phi", "f_dfp", "f_tomo"]);
            for &phi0 in &phis {
                let channel = ChannelParams::new(phi0, args.chi, order)
                    .map_err(|e| Failure::Input(anyhow!(e)))?;
                let f_dfp = fixed_probe_eval(&table, &channel, &probe, 0.0, ParamSet::Phi)?;
                let f_tomo = fisher_from_povm(&rec.povm, &probe, &channel, ParamSet::Phi)
                    .map_err(|e| Failure::Other(anyhow!(e)))?;
                out.row(&[cell(phi0), cell(f_dfp.get(0, 0)), cell(f_tomo.get(0, 0))]);
            }
        }
        ParamSet::PhiChi => {
            out.columns(&[
                "phi",
                "f_phiphi_dfp",
                "f_chichi_dfp",
                "f_chiphi_dfp",
                "eff_phi_dfp",
                "eff_chi_dfp",
                "f_phiphi_tomo",
                "f_chichi_tomo",
                "f_chiphi_tomo",
                "eff_phi_tomo",
                "eff_chi_tomo",
            ]);
            for &phi0 in &phis {
                let channel = ChannelParams::new(phi0, args.chi, order)
                    .map_err(|e| Failure::Input(anyhow!(e)))?;
                let f_dfp = fixed_probe_eval(&table, &channel, &probe, 0.0, ParamSet::PhiChi)?;
                let f_tomo = fisher_from_povm(&rec.povm, &probe, &channel, ParamSet::PhiChi)
                    .map_err(|e| Failure::Other(anyhow!(e)))?;
                let (ed_p, ed_c) = eff_or_nan(&f_dfp);
                let (et_p, et_c) = eff_or_nan(&f_tomo);
                out.row(&[
                    cell(phi0),
                    cell(f_dfp.get(0, 0)),
                    cell(f_dfp.get(1, 1)),
                    cell(f_dfp.get(0, 1)),
                    cell(ed_p),
                    cell(ed_c),
                    cell(f_tomo.get(0, 0)),
                    cell(f_tomo.get(1, 1)),
                    cell(f_tomo.get(0, 1)),
                    cell(et_p),
                    cell(et_c),
                ]);
            }
        }
    }
    out.write(&args.output).map_err(Failure::Other)
}

fn cmd_wfh_scan(args: &WfhScanArgs) -> Result<(), Failure> {
    check_output_path(&args.output)?;
    let det = WfhDetector::new(Complex64::new(args.gamma, 0.0), args.n_bins)
        .map_err(|e| Failure::Input(anyhow!(e)))?;
    let alphas = parse_range(&args.alpha).map_err(Failure::Input)?;
    let rows = coherent_alpha_scan(&det, &alphas, args.phi, args.fd_step)
        .map_err(|e| Failure::Other(anyhow!(e)))?;

    let mut out = ResultFile::new("wfh-scan");
    out.config("n_bins", args.n_bins)
        .config("gamma", cell(args.gamma))
        .config("phi", cell(args.phi))
        .config("alpha_scan", &args.alpha)
        .config("fd_step", cell(args.fd_step));
    let mut names: Vec<String> = vec!["alpha".into()];
    for x in det.outcomes() {
        names.push(format!("f_{}_{}", x.x1, x.x2));
    }
    names.push("total".into());
    names.push("skipped".into());
    out.columns(&names.iter().map(String::as_str).collect::<Vec<_>>());
    for row in &rows {
        let mut cells = vec![cell(row.alpha)];
        cells.extend(row.fisher.per_outcome.iter().map(|&v| cell(v)));
        cells.push(cell(row.fisher.total));
        cells.push(row.fisher.skipped.to_string());
        out.row(&cells);
    }
    out.write(&args.output).map_err(Failure::Other)
}

fn cmd_wfh_squeeze(args: &WfhSqueezeArgs) -> Result<(), Failure> {
    check_output_path(&args.output)?;
    if args.energy <= 0.0 {
        return Err(Failure::Input(anyhow!("--energy must be > 0")));
    }
    let det = WfhDetector::new(Complex64::new(args.gamma, 0.0), args.n_bins)
        .map_err(|e| Failure::Input(anyhow!(e)))?;
    let scale = args.energy.sqrt();
    let alphas: Vec<f64> = parse_range(&args.alpha)
        .map_err(Failure::Input)?
        .into_iter()
        .map(|a| a * scale)
        .collect();
    let rows = squeeze_tradeoff_scan(&det, &alphas, &args.rd, args.phi, args.fd_step)
        .map_err(|e| Failure::Other(anyhow!(e)))?;

    let mut out = ResultFile::new("wfh-squeeze");
    out.config("energy", cell(args.energy))
        .config(
            "rd",
            args.rd
                .iter()
                .map(|r| cell(*r))
                .collect::<Vec<_>>()
                .join(","),
        )
        .config("gamma", cell(args.gamma))
        .config("n_bins", args.n_bins)
        .config("phi", cell(args.phi))
        .config("alpha_scan", &args.alpha)
        .config("fd_step", cell(args.fd_step));
    out.columns(&["alpha", "rd", "alpha0", "s", "total_fi", "skipped"]);
    for row in &rows {
        for pt in &row.points {
            out.row(&[
                cell(row.alpha),
                cell(pt.r_d),
                cell(pt.alpha0),
                cell(pt.s),
                cell(pt.fisher.total),
                pt.fisher.skipped.to_string(),
            ]);
        }
    }
    out.write(&args.output).map_err(Failure::Other)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let result = match &cli.command {
        Command::FisherScan(args) => cmd_fisher_scan(args),
        Command::OptimizeProbe(args) => cmd_optimize_probe(args),
        Command::TomoCompare(args) => cmd_tomo_compare(args),
        Command::WfhScan(args) => cmd_wfh_scan(args),
        Command::WfhSqueeze(args) => cmd_wfh_squeeze(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}
