//! Typed scenario resolved from a [`RawConfig`].

use std::path::Path;

use turbhd_core::channel::{Scheme, SchemeConfig};
use turbhd_core::counts::{DetectorPair, LocalOscillator};
use turbhd_core::covariance::CovarianceState;
use turbhd_core::monitor::MonitorConfig;
use turbhd_core::numerics::QuadratureRule;
use turbhd_core::pdtc::TransmittanceModel;
use turbhd_core::states::StateModel;
use turbhd_core::{Complex64, Error};

use crate::config::{Diagnostic, RawConfig, Reader};
use crate::tabulated::load_table;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    PdtcMoments,
    Counts,
    QuadDist,
    FockDist,
    PfuncGrid,
    MonitorBudget,
    UncertaintyScan,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::PdtcMoments,
        Command::Counts,
        Command::QuadDist,
        Command::FockDist,
        Command::PfuncGrid,
        Command::MonitorBudget,
        Command::UncertaintyScan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::PdtcMoments => "pdtc-moments",
            Command::Counts => "counts",
            Command::QuadDist => "quad-dist",
            Command::FockDist => "fock-dist",
            Command::PfuncGrid => "pfunc-grid",
            Command::MonitorBudget => "monitor-budget",
            Command::UncertaintyScan => "uncertainty-scan",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountsMethod {
    Exact,
    Gaussian,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub n_max: usize,
    pub x_grid: (f64, f64, usize),
    pub re_grid: (f64, f64, usize),
    pub im_grid: (f64, f64, usize),
    pub dn_range: Option<(i64, i64)>,
    pub counts_method: CountsMethod,
    pub samples: u64,
    pub t_ref_grid: (f64, f64, usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetSpec {
    pub transmittance: f64,
    pub epsilon: f64,
    pub margin: f64,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub command: Command,
    pub output: String,
    pub seed: u64,
    pub pdtc: TransmittanceModel,
    pub state: StateModel,
    pub scheme: SchemeConfig,
    pub monitor: MonitorConfig,
    pub rule: QuadratureRule,
    pub node_order: usize,
    pub out: OutputSpec,
    pub budget: BudgetSpec,
}

impl Scenario {
    pub fn detector(&self) -> &DetectorPair {
        &self.scheme.det
    }

    pub fn oscillator(&self) -> &LocalOscillator {
        &self.scheme.lo
    }

    /// The input as a Gaussian covariance, when it is one.
    pub fn gaussian_state(&self) -> Option<CovarianceState> {
        match self.state {
            StateModel::Coherent(g) => Some(CovarianceState::coherent(g)),
            StateModel::Thermal(n) => CovarianceState::thermal(n).ok(),
            StateModel::Gaussian(cs) => Some(cs),
            _ => None,
        }
    }
}

/// Diagnostics for `raw`; empty iff it resolves to a runnable scenario.
pub fn validate(raw: &RawConfig) -> Vec<Diagnostic> {
    resolve(raw).err().unwrap_or_default()
}

fn in_unit(v: f64) -> bool {
    v > 0.0 && v <= 1.0
}

pub fn resolve(raw: &RawConfig) -> Result<Scenario, Vec<Diagnostic>> {
    let mut r = Reader::new(raw);

    let command = match Command::parse(raw.get("run.command")) {
        Some(c) => c,
        None => {
            let names: Vec<&str> = Command::ALL.iter().map(|c| c.name()).collect();
            r.push("run.command", format!("must be one of {}, got '{}'", names.join(" | "), raw.get("run.command")));
            Command::PdtcMoments
        }
    };
    let seed = raw.get("run.seed").parse::<u64>().unwrap_or_else(|_| {
        r.push("run.seed", "expected an unsigned 64-bit integer");
        0
    });

    let pdtc = channel(&mut r);
    let state = state(&mut r);

    let eta = r.float_where("detector.efficiency", in_unit, "in (0,1]");
    let noise = r.float_where("detector.noise_counts", |v| v >= 0.0, ">= 0");
    let amplitude = r.float_where("lo.amplitude", |v| v > 0.0, "> 0");
    let phase = r.float("lo.phase");
    let det = DetectorPair { efficiency: eta, noise_counts: noise };
    let lo = LocalOscillator { amplitude, phase };

    let t2 = r.float_where("monitor.bs_transmittance", |v| v > 0.0 && v < 1.0, "in (0,1)");
    let r2 = r.float_where("monitor.bs_reflectance", |v| v > 0.0 && v < 1.0, "in (0,1)");
    if t2.is_finite() && r2.is_finite() && (t2 * t2 + r2 * r2 - 1.0).abs() > 1e-9 {
        r.push(
            "monitor.bs_reflectance",
            format!("lossless splitter requires |T2|^2 + |R2|^2 = 1, got {}", t2 * t2 + r2 * r2),
        );
    }
    let monitor = MonitorConfig {
        eta3: r.float_where("monitor.eta3", in_unit, "in (0,1]"),
        noise3: r.float_where("monitor.noise3", |v| v >= 0.0, ">= 0"),
        bs_transmittance: t2,
        bs_reflectance: r2,
        lo_amplitude: amplitude,
        t_min: r.float_where("monitor.t_min", |v| v > 0.0 && v < 1.0, "in (0,1)"),
    };

    let scheme = match r.choice("scheme.kind", &["fixed-reference", "monitored", "monitored-shot-noise"]) {
        "fixed-reference" => {
            let t_ref = match raw.get("scheme.t_ref") {
                "auto" => pdtc
                    .as_ref()
                    .and_then(|p| p.moment(2.0).ok())
                    .and_then(|m| m.finite(2.0).ok())
                    .map(f64::sqrt)
                    .unwrap_or(f64::NAN),
                s => s.parse::<f64>().unwrap_or(f64::NAN),
            };
            if pdtc.is_some() && !in_unit(t_ref) {
                r.push("scheme.t_ref", "T_ref must be in (0,1]");
            }
            Scheme::FixedReference { t_ref }
        }
        "monitored" => Scheme::MonitoredIdeal(monitor),
        _ => Scheme::MonitoredShotNoise(monitor),
    };
    let scheme = SchemeConfig { scheme, det, lo };

    let rule = QuadratureRule::new(
        r.float_where("numerics.abs_tol", |v| v > 0.0, "> 0"),
        r.float_where("numerics.rel_tol", |v| v > 0.0, "> 0"),
        r.count("numerics.max_subdivisions", 1) as usize,
    )
    .unwrap_or_default();
    let node_order = r.count("numerics.node_order", 1) as usize;

    let out = output(&mut r);
    let budget = BudgetSpec {
        transmittance: r.float_where("monitor.transmittance", in_unit, "in (0,1]"),
        epsilon: r.float_where("monitor.epsilon", |v| v > 0.0, "> 0"),
        margin: r.float_where("monitor.noise_margin", |v| v >= 1.0, ">= 1"),
    };

    if command == Command::UncertaintyScan {
        if let Some(s) = &state {
            let gaussian = matches!(s, StateModel::Coherent(_) | StateModel::Thermal(_) | StateModel::Gaussian(_));
            if !gaussian {
                r.push("state.kind", "uncertainty-scan needs a Gaussian state (vacuum, coherent, thermal, squeezed)");
            }
        }
    }
    if command == Command::Counts && out.counts_method != CountsMethod::Exact {
        if let Some(s) = &state {
            if !matches!(s, StateModel::Coherent(_)) && !matches!(s, StateModel::Thermal(n) if *n == 0.0) {
                r.push("output.counts_method", "gaussian and monte-carlo counts need a coherent or vacuum state");
            }
        }
    }

    let diags = r.diags;
    match (diags.is_empty(), pdtc, state) {
        (true, Some(pdtc), Some(state)) => Ok(Scenario {
            command,
            output: raw.get("run.output").to_string(),
            seed,
            pdtc,
            state,
            scheme,
            monitor,
            rule,
            node_order,
            out,
            budget,
        }),
        _ => Err(diags),
    }
}

fn channel(r: &mut Reader<'_>) -> Option<TransmittanceModel> {
    let model = match r.choice("channel.model", &["beam-wandering", "deterministic", "tabulated"]) {
        "beam-wandering" => {
            let a = r.float_where("channel.aperture_radius", |v| v > 0.0, "> 0");
            let w = r.float_where("channel.spot_radius", |v| v > 0.0, "> 0");
            let sigma = r.float_where("channel.sigma", |v| v > 0.0, "> 0");
            if !(a > 0.0 && w > 0.0 && sigma > 0.0) {
                return None;
            }
            match TransmittanceModel::beam_wandering(a, w, sigma) {
                Ok(m) => m,
                Err(e) => {
                    r.push("channel.spot_radius", e.to_string());
                    return None;
                }
            }
        }
        "deterministic" => {
            let t = r.float_where("channel.transmittance", |v| (0.0..=1.0).contains(&v), "in [0,1]");
            TransmittanceModel::deterministic(t).ok()?
        }
        _ => {
            let path = r.raw().get("channel.table").to_string();
            if path.is_empty() {
                r.push("channel.table", "a tabulated channel needs a table file");
                return None;
            }
            match load_table(Path::new(&path)) {
                Ok(m) => TransmittanceModel::Tabulated(m),
                Err(msg) => {
                    r.push("channel.table", msg);
                    return None;
                }
            }
        }
    };
    let t_min = r.float_where("channel.t_min", |v| (0.0..1.0).contains(&v), "in [0,1)");
    if t_min > 0.0 {
        match TransmittanceModel::truncated(model, t_min) {
            Ok(m) => Some(m),
            Err(e) => {
                r.push("channel.t_min", e.to_string());
                None
            }
        }
    } else {
        Some(model)
    }
}

fn state(r: &mut Reader<'_>) -> Option<StateModel> {
    let kind = r.choice("state.kind", &["vacuum", "coherent", "thermal", "spats", "displaced-spats", "squeezed"]);
    let nbar = r.float_where("state.nbar", |v| v >= 0.0, ">= 0");
    let gamma = Complex64::new(r.float("state.gamma_re"), r.float("state.gamma_im"));
    let db = r.float_where("state.squeezing_db", |v| v >= 0.0, ">= 0");
    let phi = r.float("state.squeezing_phase");
    let state = match kind {
        "vacuum" => StateModel::vacuum(),
        "coherent" => StateModel::Coherent(gamma),
        "thermal" => StateModel::Thermal(nbar),
        "spats" => StateModel::Spats(nbar),
        "displaced-spats" => StateModel::DisplacedSpats { nbar, gamma },
        _ => {
            let sq = CovarianceState::squeezed_vacuum(db, phi).ok()?;
            let mean = [2f64.sqrt() * gamma.re, 2f64.sqrt() * gamma.im];
            StateModel::Gaussian(CovarianceState::new(mean, sq.ncov()).ok()?)
        }
    };
    match state.validate() {
        Ok(()) => Some(state),
        Err(Error::InvalidParameter { name, reason }) => {
            r.push(&format!("state.{name}"), reason);
            None
        }
        Err(e) => {
            r.push("state.kind", e.to_string());
            None
        }
    }
}

fn grid(r: &mut Reader<'_>, lo: &str, hi: &str, n: &str) -> (f64, f64, usize) {
    let a = r.float(lo);
    let b = r.float(hi);
    let count = r.count(n, 1) as usize;
    if a > b || (count == 1 && a != b) {
        r.push(hi, format!("need {lo} <= {hi}, and a single point only for an empty range"));
    }
    (a, b, count)
}

fn output(r: &mut Reader<'_>) -> OutputSpec {
    let n_max = r.count("output.n_max", 0);
    if n_max > 100 {
        r.push("output.n_max", "must be <= 100");
    }
    let dn_raw = r.raw().get("output.dn_range");
    let dn_range = if dn_raw == "auto" {
        None
    } else {
        let parsed = dn_raw
            .split_once(':')
            .and_then(|(a, b)| Some((a.trim().parse::<i64>().ok()?, b.trim().parse::<i64>().ok()?)))
            .filter(|(a, b)| a <= b);
        if parsed.is_none() {
            r.push("output.dn_range", format!("expected 'auto' or 'min:max', got '{dn_raw}'"));
        }
        parsed
    };
    let counts_method = match r.choice("output.counts_method", &["exact", "gaussian", "monte-carlo"]) {
        "exact" => CountsMethod::Exact,
        "gaussian" => CountsMethod::Gaussian,
        _ => CountsMethod::MonteCarlo,
    };
    let t_ref_grid = grid(r, "output.t_ref_min", "output.t_ref_max", "output.t_ref_points");
    if !(in_unit(t_ref_grid.0) && in_unit(t_ref_grid.1)) {
        r.push("output.t_ref_min", "T_ref must be in (0,1]");
    }
    OutputSpec {
        n_max: n_max as usize,
        x_grid: grid(r, "output.x_min", "output.x_max", "output.x_points"),
        re_grid: grid(r, "output.re_min", "output.re_max", "output.re_points"),
        im_grid: grid(r, "output.im_min", "output.im_max", "output.im_points"),
        dn_range,
        counts_method,
        samples: r.count("output.samples", 1),
        t_ref_grid,
    }
}
