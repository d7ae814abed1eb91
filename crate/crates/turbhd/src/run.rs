//! Command implementations.

use rayon::prelude::*;
use turbhd_core::channel::NoisyStateView;
use turbhd_core::counts::{
    auto_range, count_diff_distribution, gaussian_approx_distribution, monte_carlo_counts, CountDiffDistribution,
    CountHistogram,
};
use turbhd_core::covariance::{noisy_cov_monitored, uncertainty_product, uncertainty_scan, ChannelMoments};
use turbhd_core::monitor::{
    conditional_count_mean, conditional_moments, conditional_pdtc_nodes, lo_amplitude_for_negligible_noise,
    noise_negligible, relative_error, required_lo_amplitude,
};
use turbhd_core::numerics::RngSeed;
use turbhd_core::pdtc::{Moment, TransmittanceModel};
use turbhd_core::states::{ComplexGrid, StateModel};
use turbhd_core::{Complex64, Error};

use crate::config::{Diagnostic, RawConfig};
use crate::output::{Cell, Table};
use crate::scenario::{resolve, Command, CountsMethod, Scenario};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid configuration:\n{}", list(.0))]
    Config(Vec<Diagnostic>),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

fn list(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n")
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) | RunError::Io(_) => 1,
            RunError::Numerical(_) => 2,
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { name, reason } => RunError::Config(vec![Diagnostic::new(name, reason)]),
            Error::UnsupportedState(what) => {
                RunError::Config(vec![Diagnostic::new("state.kind", format!("not supported here: {what}"))])
            }
            Error::DegenerateGeometry { .. } | Error::EmptySupport { .. } | Error::PathologicalTruncation { .. } => {
                RunError::Config(vec![Diagnostic::new("channel", e.to_string())])
            }
            other => RunError::Numerical(other.to_string()),
        }
    }
}

/// Resolves `raw` and computes the command's table.
pub fn run(raw: &RawConfig) -> Result<(Scenario, Table), RunError> {
    let sc = resolve(raw).map_err(RunError::Config)?;
    let table = match sc.command {
        Command::PdtcMoments => pdtc_moments(&sc)?,
        Command::Counts => counts(&sc)?,
        Command::QuadDist => quad_dist(&sc)?,
        Command::FockDist => fock_dist(&sc)?,
        Command::PfuncGrid => pfunc_grid(&sc)?,
        Command::MonitorBudget => monitor_budget(&sc)?,
        Command::UncertaintyScan => scan(&sc)?,
    };
    if let Some((row, col)) = table.first_non_finite() {
        return Err(RunError::Numerical(format!("non-finite {col} in output row {row}")));
    }
    Ok((sc, table))
}

/// Header lines: tool version, command, seed and the resolved configuration.
pub fn header(sc: &Scenario, raw: &RawConfig) -> Vec<String> {
    let mut lines = vec![
        format!("turbhd {}", env!("CARGO_PKG_VERSION")),
        format!("command = {}", sc.command.name()),
        format!("seed = {}", sc.seed),
        "resolved configuration:".to_string(),
    ];
    lines.extend(raw.echo().into_iter().map(|l| format!("  {l}")));
    lines
}

fn linspace((a, b, n): (f64, f64, usize)) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn view(sc: &Scenario) -> Result<NoisyStateView, RunError> {
    Ok(NoisyStateView::with_node_order(sc.state, sc.scheme, sc.pdtc.clone(), sc.node_order)?)
}

fn quantity(t: &mut Table, name: &str, v: f64) {
    t.rows.push(vec![Cell::Text(name.to_string()), Cell::Float(v)]);
}

fn pdtc_moments(sc: &Scenario) -> Result<Table, RunError> {
    let mut t = Table::new(&["quantity", "value"]);
    let p = &sc.pdtc;
    let moment = |k: f64| -> Result<f64, RunError> { Ok(p.moment_with(k, &sc.rule)?.finite(k)?) };
    if let TransmittanceModel::BeamWandering(bw) = p {
        let w = bw.params();
        quantity(&mut t, "t0", w.t0);
        quantity(&mut t, "shape", w.shape);
        quantity(&mut t, "scale", w.scale);
    }
    let (m1, m2, m4) = (moment(1.0)?, moment(2.0)?, moment(4.0)?);
    quantity(&mut t, "mean_t", m1);
    quantity(&mut t, "mean_t2", m2);
    quantity(&mut t, "sqrt_mean_t2", m2.sqrt());
    quantity(&mut t, "mean_t4", m4);
    quantity(&mut t, "var_t", m2 - m1 * m1);
    quantity(&mut t, "mean_loss_db", p.mean_loss_db()?);
    match p.moment_with(-2.0, &sc.rule)? {
        Moment::Finite(v) => quantity(&mut t, "mean_t_inv2", v),
        Moment::Divergent => t.notes.push("mean_t_inv2 = divergent".into()),
    }
    if let TransmittanceModel::Truncated(tr) = p {
        quantity(&mut t, "acceptance", tr.acceptance());
    }
    t.notes.push(format!("sqrt_mean_t2 = {}", m2.sqrt()));
    Ok(t)
}

fn coherent_amplitude(state: &StateModel) -> Complex64 {
    match state {
        StateModel::Coherent(g) => *g,
        _ => Complex64::new(0.0, 0.0),
    }
}

/// Samples per random stream; fixed so results do not depend on the thread count.
const CHUNK: u64 = 100_000;

fn counts(sc: &Scenario) -> Result<Table, RunError> {
    let (lo, det) = (sc.oscillator(), sc.detector());
    let dist = match sc.out.counts_method {
        CountsMethod::Exact => count_diff_distribution(&sc.state, &sc.pdtc, lo, det, sc.out.dn_range)?,
        CountsMethod::Gaussian => {
            let alpha = coherent_amplitude(&sc.state);
            let range = sc.out.dn_range.unwrap_or_else(|| auto_range(alpha.norm(), sc.pdtc.support().1, lo, det));
            gaussian_approx_distribution(alpha, &sc.pdtc, lo, det, range)?
        }
        CountsMethod::MonteCarlo => {
            let alpha = coherent_amplitude(&sc.state);
            let seed = RngSeed(sc.seed);
            let chunks = sc.out.samples.div_ceil(CHUNK);
            let parts: Vec<CountHistogram> = (0..chunks)
                .into_par_iter()
                .map(|i| {
                    let n = CHUNK.min(sc.out.samples - i * CHUNK);
                    monte_carlo_counts(alpha, &sc.pdtc, lo, det, n, seed, i)
                })
                .collect();
            let mut hist = CountHistogram::default();
            parts.iter().for_each(|h| hist.merge(h));
            let d = hist.to_distribution();
            match sc.out.dn_range {
                Some((a, b)) => CountDiffDistribution::new(a, (a..=b).map(|k| d.probability(k)).collect()),
                None => d,
            }
        }
    };
    let mut t = Table::new(&["dn", "probability"]);
    t.rows = dist.iter().map(|(k, p)| vec![Cell::Int(k), Cell::Float(p)]).collect();
    t.notes.push(format!("deficit = {}", dist.deficit()));
    t.notes.push(format!("mean = {}", dist.mean()));
    t.notes.push(format!("variance = {}", dist.variance()));
    Ok(t)
}

fn quad_dist(sc: &Scenario) -> Result<Table, RunError> {
    let view = view(sc)?;
    let phi = sc.oscillator().phase;
    let xs = linspace(sc.out.x_grid);
    let values: Result<Vec<f64>, Error> = xs.par_iter().map(|&x| view.noisy_quadrature_pdf(x, phi)).collect();
    let mut t = Table::new(&["x", "density"]);
    t.rows = xs.iter().zip(values?).map(|(&x, p)| vec![Cell::Float(x), Cell::Float(p)]).collect();
    t.notes.push(format!("phi = {phi}"));
    t.notes.push(format!("acceptance = {}", view.acceptance()));
    Ok(t)
}

fn fock_dist(sc: &Scenario) -> Result<Table, RunError> {
    let view = view(sc)?;
    let p = view.noisy_fock_distribution_with(sc.out.n_max, &sc.rule)?;
    let mut t = Table::new(&["n", "p"]);
    t.rows = p.iter().enumerate().map(|(n, &v)| vec![Cell::Int(n as i64), Cell::Float(v)]).collect();
    let min = p.iter().copied().fold(f64::INFINITY, f64::min);
    t.notes.push(format!("sum = {}", p.iter().sum::<f64>()));
    t.notes.push(format!("min_p = {min}"));
    t.notes.push(format!("acceptance = {}", view.acceptance()));
    Ok(t)
}

fn pfunc_grid(sc: &Scenario) -> Result<Table, RunError> {
    let view = view(sc)?;
    let (re, im) = (sc.out.re_grid, sc.out.im_grid);
    let grid = ComplexGrid::new((re.0, re.1), (im.0, im.1), re.2, im.2)?;
    let points: Vec<Complex64> = grid.points().collect();
    let values: Result<Vec<f64>, Error> = points.par_iter().map(|&a| view.noisy_p_function(a)).collect();
    let mut t = Table::new(&["re_alpha", "im_alpha", "p_noisy"]);
    t.rows = points
        .iter()
        .zip(values?)
        .map(|(a, p)| vec![Cell::Float(a.re), Cell::Float(a.im), Cell::Float(p)])
        .collect();
    Ok(t)
}

fn monitor_budget(sc: &Scenario) -> Result<Table, RunError> {
    let cfg = &sc.monitor;
    let b = sc.budget;
    let mut t = Table::new(&["quantity", "value"]);
    let (mean, var) = conditional_moments(cfg, b.transmittance);
    let atoms = conditional_pdtc_nodes(cfg, b.transmittance, None)?;
    quantity(&mut t, "transmittance", b.transmittance);
    quantity(&mut t, "monitor_count_mean", conditional_count_mean(cfg, b.transmittance));
    quantity(&mut t, "t_meas_sq_mean", mean);
    quantity(&mut t, "t_meas_sq_variance", var);
    quantity(&mut t, "relative_error", relative_error(cfg, b.transmittance)?);
    quantity(&mut t, "required_lo_amplitude", required_lo_amplitude(cfg, b.transmittance, b.epsilon)?);
    quantity(&mut t, "noise_threshold_lo_amplitude", lo_amplitude_for_negligible_noise(cfg, sc.detector()));
    quantity(&mut t, "noise_negligible", noise_negligible(cfg, sc.detector(), b.margin) as u8 as f64);
    quantity(&mut t, "discard_probability", atoms.discarded);
    quantity(&mut t, "tail_deficit", atoms.tail_deficit);
    Ok(t)
}

fn log_grid((a, b, n): (f64, f64, usize)) -> Vec<f64> {
    linspace((a.ln(), b.ln(), n)).into_iter().map(f64::exp).collect()
}

fn scan(sc: &Scenario) -> Result<Table, RunError> {
    let input = sc
        .gaussian_state()
        .ok_or_else(|| RunError::Config(vec![Diagnostic::new("state.kind", "needs a Gaussian state")]))?;
    let (det, lo) = (sc.detector(), sc.oscillator());
    let moments = ChannelMoments::from_pdtc(&sc.pdtc)?;
    let grid = log_grid(sc.out.t_ref_grid);
    let rows = uncertainty_scan(&input, &moments, det.efficiency, det.noise_counts, lo.amplitude, &grid)?;
    let mut t = Table::new(&["t_ref", "product", "violated"]);
    t.rows = rows
        .iter()
        .map(|r| vec![Cell::Float(r.t_ref), Cell::Float(r.product), Cell::Bool(r.violated)])
        .collect();
    t.notes.push(format!("crossing_t_ref_vacuum = {}", moments.m2));
    let kept = TransmittanceModel::truncated(sc.pdtc.clone(), sc.monitor.t_min)
        .and_then(|p| ChannelMoments::from_pdtc(&p))
        .and_then(|m| noisy_cov_monitored(&input, &m, det.efficiency, det.noise_counts, sc.monitor.bs_reflectance, lo.amplitude));
    match kept {
        Ok(out) => t.notes.push(format!("monitored_product = {}", uncertainty_product(&out))),
        Err(e) => t.notes.push(format!("monitored_product unavailable: {e}")),
    }
    Ok(t)
}
