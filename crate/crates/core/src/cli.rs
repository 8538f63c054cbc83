//! Experiment drivers behind the `macrospin` binary.
//!
//! Every command is deterministic given its flags (and seed). CSV files start
//! with a `# macrospin <version> config=<json>` line followed by a header row;
//! JSON outputs are flat objects that carry `version` and `config` keys.

use crate::classical::{
    ensemble_slot_histogram, evolve_classical, gap_point, quadrature_histogram_q, sample_q_function,
    total_variation, ClassicalSpin, Proposal, SlotHistogram, ZConvention,
};
use crate::error::{invalid, Error, Result};
use crate::lg::{find_max_k, k_analytic, k_exact_with, violation_boundary_x, LgProtocol};
use crate::measurement::{
    coarse_from_distribution, disturbance_metric_q, make_partition, PartitionPolicy,
    Propagator,
};
use crate::numeric::{golden_section_max, median};
use crate::spin::{Hamiltonian, SpinLength};
use crate::states::{
    coherent_vector, gaussian_approx, maximally_mixed, rotated_coherent_angles, CoherentMixture,
    CoherentStateParams, QFunction,
};
use crate::VERSION;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "macrospin", version, about = "Leggett-Garg tests and coarse-grained measurements of large spins")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Exact and analytic K over a grid of x = (2j+1) omega dt.
    LgScan(LgScanArgs),
    /// Location and height of the maximal violation.
    LgMax(LgMaxArgs),
    /// Outcome distributions of a rotating coherent state.
    CoherentEvolve(CoherentEvolveArgs),
    /// Coarse-grained quantum predictions vs classical ensembles.
    ClassicalCompare(ClassicalCompareArgs),
    /// Measurement disturbance of the Q-function vs slot width.
    Disturbance(DisturbanceArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct LgScanArgs {
    /// Twice the spin length.
    #[arg(long)]
    pub two_j: u32,
    #[arg(long, default_value_t = 0.1)]
    pub x_min: f64,
    #[arg(long, default_value_t = 3.0)]
    pub x_max: f64,
    /// Number of grid points (at least 2).
    #[arg(long, default_value_t = 59)]
    pub steps: usize,
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct LgMaxArgs {
    #[arg(long)]
    pub two_j: u32,
    #[arg(long, default_value_t = 0.1)]
    pub x_min: f64,
    #[arg(long, default_value_t = 3.0)]
    pub x_max: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyArg {
    Strict,
    Ragged,
}

impl From<PolicyArg> for PartitionPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Strict => PartitionPolicy::Strict,
            PolicyArg::Ragged => PartitionPolicy::Ragged,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CoherentEvolveArgs {
    #[arg(long)]
    pub two_j: u32,
    #[arg(long, default_value_t = 0.0)]
    pub theta0: f64,
    #[arg(long, default_value_t = 0.0)]
    pub phi0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    /// Comma-separated times.
    #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "0")]
    pub times: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    pub delta_m: usize,
    #[arg(long, value_enum, default_value_t = PolicyArg::Strict)]
    pub policy: PolicyArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ClassicalCompareArgs {
    #[arg(long)]
    pub two_j: u32,
    #[arg(long)]
    pub delta_m: usize,
    /// Ensemble size per row (at least 100).
    #[arg(long, default_value_t = 100_000)]
    pub n_samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Number of rows, each with a random initial coherent state and time.
    #[arg(long, default_value_t = 20)]
    pub times: usize,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    #[arg(long, value_enum, default_value_t = PolicyArg::Ragged)]
    pub policy: PolicyArg,
    /// How classical spins are binned: `spin-length` uses j cos(theta).
    #[arg(long, value_enum, default_value_t = ZArg::SpinLength)]
    pub z_convention: ZArg,
    /// CSV output (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON summary (defaults to the CSV path with a `.json` extension).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZArg {
    SpinLength,
    Magnitude,
}

impl From<ZArg> for ZConvention {
    fn from(z: ZArg) -> Self {
        match z {
            ZArg::SpinLength => ZConvention::SpinLength,
            ZArg::Magnitude => ZConvention::Magnitude,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DisturbanceArgs {
    #[arg(long)]
    pub two_j: u32,
    /// Comma-separated slot widths (ragged slots).
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub delta_m: Vec<usize>,
    /// Coherent state polar angle (ignored with --mixture or --mixed).
    #[arg(long, default_value_t = PI / 2.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub phi: f64,
    /// CSV of `weight,theta,phi` rows describing a coherent mixture.
    #[arg(long, conflicts_with = "mixed")]
    pub mixture: Option<PathBuf>,
    /// Use the maximally mixed state.
    #[arg(long)]
    pub mixed: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs one command.
pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::LgScan(a) => {
            let rows = lg_scan(a)?;
            write_csv(&cli.command, a.out.as_deref(), &rows)
        }
        Command::LgMax(a) => {
            let summary = lg_max(a)?;
            write_json(&cli.command, a.out.as_deref(), &summary)
        }
        Command::CoherentEvolve(a) => {
            let table = coherent_evolve(a)?;
            write_table(&cli.command, a.out.as_deref(), &table)
        }
        Command::ClassicalCompare(a) => {
            let (rows, summary) = classical_compare(a)?;
            write_csv(&cli.command, a.out.as_deref(), &rows)?;
            let summary_path = a.summary.clone().or_else(|| a.out.as_ref().map(|p| p.with_extension("json")));
            match summary_path {
                Some(p) => write_json(&cli.command, Some(&p), &summary),
                None => write_json(&cli.command, None, &summary),
            }
        }
        Command::Disturbance(a) => {
            let rows = disturbance(a)?;
            write_csv(&cli.command, a.out.as_deref(), &rows)
        }
    }
}

fn spin(two_j: u32) -> SpinLength {
    SpinLength::from_two_j(two_j)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LgScanRow {
    pub x: f64,
    pub k_analytic: f64,
    pub k_exact: f64,
    pub abs_diff: f64,
}

/// Parity protocol on the maximally mixed state at `steps` equally spaced `x`.
pub fn lg_scan(a: &LgScanArgs) -> Result<Vec<LgScanRow>> {
    if a.steps < 2 {
        return Err(invalid("--steps must be at least 2"));
    }
    if !(a.x_min > 0.0 && a.x_max > a.x_min && a.x_max.is_finite()) {
        return Err(invalid(format!("need 0 < x-min < x-max, got {} and {}", a.x_min, a.x_max)));
    }
    let j = spin(a.two_j);
    let prop = Propagator::new(Hamiltonian::precession(j, 1.0))?;
    let xs: Vec<f64> =
        (0..a.steps).map(|i| a.x_min + (a.x_max - a.x_min) * i as f64 / (a.steps - 1) as f64).collect();
    xs.par_iter()
        .map(|&x| {
            let k = k_exact_with(&prop, &LgProtocol::parity_mixed(j, 1.0, x)?)?.k;
            let ka = k_analytic(x);
            Ok(LgScanRow { x, k_analytic: ka, k_exact: k, abs_diff: (k - ka).abs() })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LgMaxSummary {
    pub two_j: u32,
    pub x_star: f64,
    pub k_star_analytic: f64,
    /// Exact K at the analytic optimum.
    pub k_exact_at_x_star: f64,
    /// Optimum of the exact K (grid of 16 points plus golden-section refinement).
    pub x_star_exact: f64,
    pub k_star_exact: f64,
    pub violation_boundary_x: f64,
    pub observable: String,
}

const EXACT_GRID: usize = 16;

pub fn lg_max(a: &LgMaxArgs) -> Result<LgMaxSummary> {
    let j = spin(a.two_j);
    let analytic = find_max_k(a.x_min, a.x_max)?;
    let prop = Propagator::new(Hamiltonian::precession(j, 1.0))?;
    let k_at = |x: f64| -> Result<f64> { Ok(k_exact_with(&prop, &LgProtocol::parity_mixed(j, 1.0, x)?)?.k) };
    let step = (a.x_max - a.x_min) / (EXACT_GRID - 1) as f64;
    let grid: Vec<(f64, f64)> = (0..EXACT_GRID)
        .into_par_iter()
        .map(|i| {
            let x = a.x_min + i as f64 * step;
            k_at(x).map(|k| (x, k))
        })
        .collect::<Result<_>>()?;
    let best = grid.iter().copied().fold((a.x_min, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
    let lo = (best.0 - step).max(a.x_min);
    let hi = (best.0 + step).min(a.x_max);
    let mut failure = None;
    let (x_star_exact, k_star_exact) = golden_section_max(
        |x| match k_at(x) {
            Ok(k) => k,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NEG_INFINITY
            }
        },
        lo,
        hi,
        1e-7,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let (x_star_exact, k_star_exact) =
        if best.1 > k_star_exact { best } else { (x_star_exact, k_star_exact) };
    Ok(LgMaxSummary {
        two_j: a.two_j,
        x_star: analytic.x_star,
        k_star_analytic: analytic.k_star,
        k_exact_at_x_star: k_at(analytic.x_star)?,
        x_star_exact,
        k_star_exact,
        violation_boundary_x: violation_boundary_x(),
        observable: "parity".into(),
    })
}

/// Header plus rows of numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Columns `t, theta, phi, mu, sigma, p_<m>..., pbar_<label>..., pbar_sum`.
pub fn coherent_evolve(a: &CoherentEvolveArgs) -> Result<Table> {
    let j = spin(a.two_j);
    let p0 = CoherentStateParams::new(j, a.theta0, a.phi0)?;
    let part = make_partition(j, a.delta_m, a.policy.into())?;
    let h = Hamiltonian::precession(j, a.omega);
    if !a.omega.is_finite() || a.times.iter().any(|t| !t.is_finite()) {
        return Err(invalid("omega and times must be finite"));
    }
    let prop = Propagator::new(h)?;
    let psi0 = coherent_vector(&p0);
    let mut header: Vec<String> = ["t", "theta", "phi", "mu", "sigma"].iter().map(|s| s.to_string()).collect();
    header.extend(j.ms().map(|m| format!("p_{m}")));
    header.extend(part.labels().iter().map(|l| format!("pbar_{l}")));
    header.push("pbar_sum".into());
    let rows = a
        .times
        .iter()
        .map(|&t| {
            let angle = h.angle(t);
            let psi = prop.rotation().apply(angle, &psi0);
            let p: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
            let pt = rotated_coherent_angles(&p0, angle);
            let g = gaussian_approx(j, pt.theta)?;
            let coarse = coarse_from_distribution(&p, &part);
            let mut row = vec![t, pt.theta, pt.phi, g.mu, g.sigma];
            row.extend(&p);
            row.extend(&coarse);
            row.push(coarse.iter().sum());
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(Table { header, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub row: usize,
    pub t: f64,
    pub theta0: f64,
    pub phi0: f64,
    pub theta_t: f64,
    pub mu: f64,
    pub sigma: f64,
    pub border_distance_sigma: f64,
    /// Quantum coarse vs sampled classical ensemble.
    pub tvd_ensemble: f64,
    /// Quantum coarse vs Q-function band quadrature.
    pub tvd_quadrature: f64,
    /// Quantum coarse vs the single classical spin.
    pub tvd_single_spin: f64,
    pub acceptance_rate: f64,
    pub envelope_violations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareSummary {
    pub two_j: u32,
    pub delta_m: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub rows: usize,
    pub median_tvd_ensemble: f64,
    pub median_tvd_quadrature: f64,
    pub median_tvd_single_spin: f64,
    pub mean_tvd_ensemble: f64,
    pub max_tvd_ensemble: f64,
    pub large_tvd_rows: usize,
    /// Rows with ensemble TVD above 0.1 and the border diagnostic below 1.5 sigma.
    pub large_tvd_rows_near_border: usize,
}

pub const LARGE_TVD: f64 = 0.1;
pub const BORDER_FLAG_SIGMA: f64 = 1.5;

/// Row `i` draws its initial direction (uniform on the sphere), its time
/// (uniform over one period) and its sampler seed from ChaCha8 stream `i`.
pub fn classical_compare(a: &ClassicalCompareArgs) -> Result<(Vec<CompareRow>, CompareSummary)> {
    if a.n_samples < 100 {
        return Err(invalid("--n-samples must be at least 100"));
    }
    if a.times == 0 {
        return Err(invalid("--times must be at least 1"));
    }
    if !(a.omega > 0.0 && a.omega.is_finite()) {
        return Err(invalid("--omega must be positive"));
    }
    let j = spin(a.two_j);
    let part = make_partition(j, a.delta_m, a.policy.into())?;
    let h = Hamiltonian::precession(j, a.omega);
    let prop = Propagator::new(h)?;
    let mut rows = Vec::with_capacity(a.times);
    for i in 0..a.times {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        rng.set_stream(i as u64);
        let u: f64 = rng.random_range(-1.0..=1.0);
        let phi0: f64 = rng.random_range(0.0..2.0 * PI);
        let t: f64 = rng.random_range(0.0..2.0 * PI / a.omega);
        let sampler_seed: u64 = rng.random();
        let p0 = CoherentStateParams::new(j, u.acos(), phi0)?;
        let angle = h.angle(t);

        let psi0 = coherent_vector(&p0);
        let psi_t = prop.rotation().apply(angle, &psi0);
        let p: Vec<f64> = psi_t.iter().map(|z| z.norm_sqr()).collect();
        let quantum = SlotHistogram::new(&part, coarse_from_distribution(&p, &part))?;

        let q0 = QFunction::from_pure(j, psi0)?;
        let (ens, stats) = sample_q_function(&q0, a.n_samples, sampler_seed, Proposal::Cells)?;
        let classical = ensemble_slot_histogram(&ens.evolve(angle), &part, a.z_convention.into())?;
        let quadrature = quadrature_histogram_q(&QFunction::from_pure(j, psi_t)?, &part)?;

        let spin_t = evolve_classical(&ClassicalSpin::from_angles(j, p0.theta, p0.phi), angle);
        let gap = gap_point(t, &quantum, &spin_t, &part)?;
        rows.push(CompareRow {
            row: i,
            t,
            theta0: p0.theta,
            phi0: p0.phi,
            theta_t: spin_t.theta(),
            mu: gap.mu,
            sigma: gap.sigma,
            border_distance_sigma: gap.border_distance_sigma,
            tvd_ensemble: total_variation(&quantum, &classical)?,
            tvd_quadrature: total_variation(&quantum, &quadrature)?,
            tvd_single_spin: gap.tvd,
            acceptance_rate: stats.acceptance_rate(),
            envelope_violations: stats.envelope_violations,
        });
    }
    let col = |f: fn(&CompareRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let ens = col(|r| r.tvd_ensemble);
    let large: Vec<&CompareRow> = rows.iter().filter(|r| r.tvd_ensemble > LARGE_TVD).collect();
    let summary = CompareSummary {
        two_j: a.two_j,
        delta_m: a.delta_m,
        n_samples: a.n_samples,
        seed: a.seed,
        rows: rows.len(),
        median_tvd_ensemble: median(&ens),
        median_tvd_quadrature: median(&col(|r| r.tvd_quadrature)),
        median_tvd_single_spin: median(&col(|r| r.tvd_single_spin)),
        mean_tvd_ensemble: ens.iter().sum::<f64>() / ens.len() as f64,
        max_tvd_ensemble: ens.iter().copied().fold(0.0, f64::max),
        large_tvd_rows: large.len(),
        large_tvd_rows_near_border: large.iter().filter(|r| r.border_distance_sigma < BORDER_FLAG_SIGMA).count(),
    };
    Ok((rows, summary))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisturbanceRow {
    pub delta_m: usize,
    pub slot_count: usize,
    pub d_average: f64,
    pub sqrt_j_over_delta_m: f64,
}

/// Reads `weight,theta,phi` rows (header optional, `#` comments allowed).
pub fn read_mixture(path: &Path, j: SpinLength) -> Result<CoherentMixture> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut components = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) if v.len() == 3 => components.push((v[0], CoherentStateParams::new(j, v[1], v[2])?)),
            Ok(v) => return Err(invalid(format!("mixture row {} has {} fields, expected 3", i + 1, v.len()))),
            Err(_) if i == 0 => continue,
            Err(e) => return Err(invalid(format!("mixture row {}: {e}", i + 1))),
        }
    }
    CoherentMixture::new(components)
}

pub fn disturbance(a: &DisturbanceArgs) -> Result<Vec<DisturbanceRow>> {
    let j = spin(a.two_j);
    let q = if a.mixed {
        QFunction::from_density(&maximally_mixed(j))
    } else if let Some(path) = &a.mixture {
        QFunction::from_mixture(&read_mixture(path, j)?)
    } else {
        QFunction::from_pure(j, coherent_vector(&CoherentStateParams::new(j, a.theta, a.phi)?))?
    };
    a.delta_m
        .iter()
        .map(|&dm| {
            let part = make_partition(j, dm, PartitionPolicy::Ragged)?;
            let d = disturbance_metric_q(&q, &part)?;
            Ok(DisturbanceRow {
                delta_m: dm,
                slot_count: part.len(),
                d_average: d.average,
                sqrt_j_over_delta_m: j.j().sqrt() / dm as f64,
            })
        })
        .collect()
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// `# macrospin <version> config=<json>`.
pub fn provenance_line(cmd: &Command) -> Result<String> {
    Ok(format!("# macrospin {VERSION} config={}", serde_json::to_string(cmd)?))
}

pub fn write_csv<T: Serialize>(cmd: &Command, path: Option<&Path>, rows: &[T]) -> Result<()> {
    let mut out = open_output(path)?;
    writeln!(out, "{}", provenance_line(cmd)?)?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_table(cmd: &Command, path: Option<&Path>, table: &Table) -> Result<()> {
    let mut out = open_output(path)?;
    writeln!(out, "{}", provenance_line(cmd)?)?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(&table.header)?;
        for r in &table.rows {
            w.write_record(r.iter().map(|x| x.to_string()))?;
        }
        w.flush()?;
    }
    out.flush()?;
    Ok(())
}

/// Flattens `value` into one object with `version` and `config` added.
pub fn write_json<T: Serialize>(cmd: &Command, path: Option<&Path>, value: &T) -> Result<()> {
    let mut obj = match serde_json::to_value(value)? {
        serde_json::Value::Object(m) => m,
        _ => return Err(Error::Numerical("summary must serialise to an object".into())),
    };
    obj.insert("version".into(), VERSION.into());
    if let serde_json::Value::Object(cfg) = serde_json::to_value(cmd)? {
        for (k, v) in cfg {
            obj.insert(format!("config_{}", k.replace('-', "_")), v);
        }
    }
    let mut out = open_output(path)?;
    serde_json::to_writer_pretty(&mut out, &obj)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}
