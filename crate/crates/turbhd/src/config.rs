//! `key = value` configuration with `[section]` headers, documented defaults
//! and command-line overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use ini::Ini;

pub struct KeySpec {
    pub key: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

const fn spec(key: &'static str, default: &'static str, help: &'static str) -> KeySpec {
    KeySpec { key, default, help }
}

/// Every recognised key, as `section.name`, with its default.
pub const KEYS: &[KeySpec] = &[
    spec("run.command", "", "command to run when none is given on the command line"),
    spec("run.output", "-", "output CSV path, '-' for stdout"),
    spec("run.seed", "1", "seed of the random streams (Monte Carlo only)"),
    spec("channel.model", "beam-wandering", "beam-wandering | deterministic | tabulated"),
    spec("channel.aperture_radius", "1", "aperture radius a"),
    spec("channel.spot_radius", "0.9", "beam-spot radius W, same units as a"),
    spec("channel.sigma", "1", "beam-deflection standard deviation, same units as a"),
    spec("channel.transmittance", "1", "transmittance of the deterministic channel"),
    spec("channel.table", "", "CSV file of `t,weight` rows for the tabulated channel"),
    spec("channel.t_min", "0", "postselection threshold applied to the channel itself, 0 = none"),
    spec("state.kind", "spats", "vacuum | coherent | thermal | spats | displaced-spats | squeezed"),
    spec("state.nbar", "1.11", "thermal mean photon number"),
    spec("state.gamma_re", "0", "real part of the coherent amplitude or displacement"),
    spec("state.gamma_im", "0", "imaginary part of the coherent amplitude or displacement"),
    spec("state.squeezing_db", "8", "squeezing of the squeezed vacuum in dB"),
    spec("state.squeezing_phase", "0", "quadrature angle of the squeezed axis"),
    spec("scheme.kind", "fixed-reference", "fixed-reference | monitored | monitored-shot-noise"),
    spec("scheme.t_ref", "auto", "reference transmittance, 'auto' = sqrt(E[T^2])"),
    spec("detector.efficiency", "0.5", "detection efficiency eta"),
    spec("detector.noise_counts", "0", "mean noise counts per detector"),
    spec("lo.amplitude", "20", "local-oscillator amplitude r"),
    spec("lo.phase", "0", "local-oscillator phase phi"),
    spec("monitor.eta3", "0.9", "monitor detector efficiency"),
    spec("monitor.noise3", "0", "monitor detector mean noise counts"),
    spec("monitor.bs_transmittance", "0.7071067811865476", "splitter amplitude transmittance |T2|"),
    spec("monitor.bs_reflectance", "0.7071067811865476", "splitter amplitude reflectance |R2|"),
    spec("monitor.t_min", "0.05", "postselection threshold of the monitored schemes"),
    spec("monitor.transmittance", "0.5", "transmittance at which monitor-budget reports"),
    spec("monitor.epsilon", "0.01", "target relative error for the oscillator sizing"),
    spec("monitor.noise_margin", "10", "factor by which r must exceed the noise threshold"),
    spec("numerics.abs_tol", "1e-10", "absolute quadrature tolerance"),
    spec("numerics.rel_tol", "1e-8", "relative quadrature tolerance"),
    spec("numerics.max_subdivisions", "2000", "adaptive quadrature subdivision budget"),
    spec("numerics.node_order", "16", "Gauss-Legendre points per transmittance panel"),
    spec("output.n_max", "30", "largest photon number of fock-dist"),
    spec("output.x_min", "-6", "quad-dist grid start"),
    spec("output.x_max", "6", "quad-dist grid end"),
    spec("output.x_points", "240", "quad-dist grid size; the default avoids x = 0, where zero-mean fixed-reference laws are singular"),
    spec("output.re_min", "-3", "pfunc-grid real-axis start"),
    spec("output.re_max", "3", "pfunc-grid real-axis end"),
    spec("output.re_points", "121", "pfunc-grid real-axis size"),
    spec("output.im_min", "0", "pfunc-grid imaginary-axis start"),
    spec("output.im_max", "0", "pfunc-grid imaginary-axis end"),
    spec("output.im_points", "1", "pfunc-grid imaginary-axis size"),
    spec("output.dn_range", "auto", "counts support as 'min:max', or 'auto'"),
    spec("output.counts_method", "exact", "exact | gaussian | monte-carlo"),
    spec("output.samples", "1000000", "Monte Carlo sample count"),
    spec("output.t_ref_min", "1e-6", "uncertainty-scan grid start"),
    spec("output.t_ref_max", "1", "uncertainty-scan grid end"),
    spec("output.t_ref_points", "121", "uncertainty-scan grid size (log spaced)"),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub key: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

/// Resolved `section.key -> value` map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl Default for RawConfig {
    fn default() -> Self {
        Self {
            values: KEYS.iter().map(|k| (k.key.to_string(), k.default.to_string())).collect(),
        }
    }
}

impl RawConfig {
    pub fn get(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), Diagnostic> {
        let key = key.trim();
        if !self.values.contains_key(key) {
            return Err(Diagnostic::new(key, "unknown key"));
        }
        self.values.insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    /// Applies every entry of an INI file. Keys outside a section are
    /// rejected.
    pub fn merge_file(&mut self, path: &Path) -> Result<(), Vec<Diagnostic>> {
        let ini = Ini::load_from_file(path)
            .map_err(|e| vec![Diagnostic::new("config", format!("cannot read {}: {e}", path.display()))])?;
        let mut diags = Vec::new();
        for (section, props) in ini.iter() {
            for (k, v) in props.iter() {
                let full = match section {
                    Some(s) => format!("{s}.{k}"),
                    None => k.to_string(),
                };
                if let Err(d) = self.set(&full, v) {
                    diags.push(d);
                }
            }
        }
        if diags.is_empty() {
            Ok(())
        } else {
            Err(diags)
        }
    }

    /// Applies a `section.key=value` override, with or without leading dashes.
    pub fn apply_override(&mut self, arg: &str) -> Result<(), Diagnostic> {
        let body = arg.trim_start_matches('-');
        let (k, v) = body
            .split_once('=')
            .ok_or_else(|| Diagnostic::new(body, "override must have the form --section.key=value"))?;
        self.set(k, v)
    }

    /// Lines of the form `[section]` / `key = value`, in key order.
    pub fn echo(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut current = "";
        for (k, v) in &self.values {
            let (section, name) = k.split_once('.').unwrap_or(("", k));
            if section != current {
                out.push(format!("[{section}]"));
                current = section;
            }
            out.push(format!("{name} = {v}"));
        }
        out
    }
}

/// Typed reads that collect diagnostics instead of failing fast.
pub struct Reader<'a> {
    raw: &'a RawConfig,
    pub diags: Vec<Diagnostic>,
}

impl<'a> Reader<'a> {
    pub fn new(raw: &'a RawConfig) -> Self {
        Self { raw, diags: Vec::new() }
    }

    pub fn raw(&self) -> &'a RawConfig {
        self.raw
    }

    pub fn push(&mut self, key: &str, message: impl Into<String>) {
        self.diags.push(Diagnostic::new(key, message));
    }

    pub fn float(&mut self, key: &str) -> f64 {
        match self.raw.get(key).parse::<f64>() {
            Ok(v) if v.is_finite() => v,
            _ => {
                self.push(key, format!("expected a finite number, got '{}'", self.raw.get(key)));
                f64::NAN
            }
        }
    }

    pub fn float_where(&mut self, key: &str, ok: impl Fn(f64) -> bool, range: &str) -> f64 {
        let v = self.float(key);
        if v.is_finite() && !ok(v) {
            self.push(key, format!("must be {range}, got {v}"));
        }
        v
    }

    pub fn count(&mut self, key: &str, min: u64) -> u64 {
        match self.raw.get(key).parse::<u64>() {
            Ok(v) if v >= min => v,
            _ => {
                self.push(key, format!("expected an integer >= {min}, got '{}'", self.raw.get(key)));
                min
            }
        }
    }

    pub fn choice(&mut self, key: &str, options: &[&'static str]) -> &'static str {
        let v = self.raw.get(key);
        match options.iter().find(|o| **o == v) {
            Some(o) => o,
            None => {
                self.push(key, format!("must be one of {}, got '{v}'", options.join(" | ")));
                options[0]
            }
        }
    }
}
