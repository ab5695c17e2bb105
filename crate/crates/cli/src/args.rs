use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "umbrella", version, about = "Stability verdicts, critical surfaces and parameter sweeps")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct Global {
    /// Write the table here and a `<output>.meta.json` sidecar next to it.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,

    /// Width of the indeterminacy band of the Hurwitz classifier.
    #[arg(long, global = true, default_value_t = umbrella_core::quartic::DEFAULT_BAND)]
    pub band: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// A list of numbers, written either `a,b,c` or `lo:hi:n` for `n` evenly
/// spaced values.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Values(pub Vec<f64>);

pub fn parse_values(s: &str) -> Result<Values, String> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    let v = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(format!("range `{s}` must look like lo:hi:n"));
        };
        let (lo, hi) = (num(lo)?, num(hi)?);
        let n: usize = n.trim().parse().map_err(|e| format!("`{n}`: {e}"))?;
        match n {
            0 => return Err("a range needs at least one point".into()),
            1 => vec![lo],
            _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
        }
    } else {
        s.split(',').map(num).collect::<Result<_, _>>()?
    };
    if v.iter().any(|x: &f64| !x.is_finite()) {
        return Err(format!("`{s}` contains a non-finite value"));
    }
    Ok(Values(v))
}

fn parse_finite(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("`{s}`: {e}"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

/// Parameters for `sweep --set name=value`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assignment {
    pub name: String,
    pub value: f64,
}

pub fn parse_assignment(s: &str) -> Result<Assignment, String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("`{s}` must look like name=value"))?;
    Ok(Assignment { name: name.trim().to_string(), value: parse_finite(value)? })
}

/// Axis for `sweep --axis name=lo:hi:n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisSpec {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

pub fn parse_axis(s: &str) -> Result<AxisSpec, String> {
    let (name, range) = s.split_once('=').ok_or_else(|| format!("`{s}` must look like name=lo:hi:n"))?;
    let parts: Vec<&str> = range.split(':').collect();
    let [lo, hi, n] = parts[..] else {
        return Err(format!("`{range}` must look like lo:hi:n"));
    };
    Ok(AxisSpec {
        name: name.trim().to_string(),
        lo: parse_finite(lo)?,
        hi: parse_finite(hi)?,
        count: n.trim().parse().map_err(|e| format!("`{n}`: {e}"))?,
    })
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Classify `λ⁴ + a1λ³ + a2λ² + a3λ + a4`, or run the randomized oracle comparison.
    Verdict(VerdictArgs),
    /// Critical circulatory parameter of a damped two-degree-of-freedom system.
    BottemaLimit(BottemaArgs),
    /// Flutter load of Ziegler's double pendulum.
    Ziegler(ZieglerArgs),
    /// Critical friction coefficient of Hultén's brake model.
    Hulten(HultenArgs),
    /// Spectrum of a gyroscopic system over a range of spin rates.
    GyroSpectrum(GyroSpectrumArgs),
    /// Critical spin rate: closed-form surface against bisection.
    GyroUmbrella(GyroUmbrellaArgs),
    /// Stability of the Maxwell-Bloch quartic on an (Ω, ν) grid.
    MaxwellBloch(MaxwellBlochArgs),
    /// Floquet multipliers of the parametrically excited rotor.
    Floquet(FloquetArgs),
    /// Flutter loads of the Galerkin model of Beck's column.
    Beck(BeckArgs),
    /// Two-layer baroclinic thresholds or phase-speed portraits.
    Baroclinic(BaroclinicArgs),
    /// Sample the Whitney umbrella and its image on the Bottema surface.
    UmbrellaSample(UmbrellaSampleArgs),
    /// Grid of stability verdicts for a named system.
    Sweep(SweepArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct VerdictArgs {
    #[arg(long, allow_negative_numbers = true, required_unless_present = "samples", value_parser = parse_finite)]
    pub a1: Option<f64>,
    #[arg(long, allow_negative_numbers = true, required_unless_present = "samples", value_parser = parse_finite)]
    pub a2: Option<f64>,
    #[arg(long, allow_negative_numbers = true, required_unless_present = "samples", value_parser = parse_finite)]
    pub a3: Option<f64>,
    #[arg(long, allow_negative_numbers = true, required_unless_present = "samples", value_parser = parse_finite)]
    pub a4: Option<f64>,

    /// Number of random quartics for the oracle comparison.
    #[arg(long, conflicts_with_all = ["a1", "a2", "a3", "a4"])]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 1, requires = "samples")]
    pub seed: u64,
    #[arg(long, default_value_t = 10.0, requires = "samples", value_parser = parse_finite)]
    pub range: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct PositiveK {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true, value_parser = parse_finite)]
    pub k11: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true, value_parser = parse_finite)]
    pub k12: f64,
    #[arg(long, default_value_t = 4.0, allow_negative_numbers = true, value_parser = parse_finite)]
    pub k22: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct NegativeK {
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true, value_parser = parse_finite)]
    pub k11: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true, value_parser = parse_finite)]
    pub k12: f64,
    #[arg(long, default_value_t = -4.0, allow_negative_numbers = true, value_parser = parse_finite)]
    pub k22: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct Damping {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true, value_parser = parse_finite)]
    pub d11: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true, value_parser = parse_finite)]
    pub d12: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true, value_parser = parse_finite)]
    pub d22: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct BottemaArgs {
    #[command(flatten)]
    pub k: PositiveK,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true, value_parser = parse_finite)]
    pub d11: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true, value_parser = parse_finite)]
    pub d12: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true, value_parser = parse_finite)]
    pub d22: f64,
    /// Damping magnitudes at which the critical ν is bisected.
    #[arg(long, default_value = "0.1,0.01,0.001", allow_hyphen_values = true, value_parser = parse_values)]
    pub deltas: Values,
}

#[derive(Debug, Args, Serialize)]
pub struct ZieglerArgs {
    /// Damping coefficients; a single value or a list.
    #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = parse_values)]
    pub b: Values,
    #[arg(long, default_value_t = 1.0, value_parser = parse_finite)]
    pub m: f64,
    #[arg(long, default_value_t = 1.0, value_parser = parse_finite)]
    pub l: f64,
    #[arg(long, default_value_t = 1.0, value_parser = parse_finite)]
    pub c: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct HultenArgs {
    #[arg(long, default_value_t = 1.0, value_parser = parse_finite)]
    pub omega1: f64,
    #[arg(long, default_value_t = 1.2, value_parser = parse_finite)]
    pub omega2: f64,
    #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = parse_values)]
    pub eta1: Values,
    #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = parse_values)]
    pub eta2: Values,
}

#[derive(Debug, Args, Serialize)]
pub struct GyroSpectrumArgs {
    #[command(flatten)]
    pub k: NegativeK,
    #[command(flatten)]
    pub d: Damping,
    #[arg(long, default_value = "0:4:9", allow_hyphen_values = true, value_parser = parse_values)]
    pub omegas: Values,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true, value_parser = parse_finite)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true, value_parser = parse_finite)]
    pub nu: f64,
    /// Report the Krein collision of the conservative system instead.
    #[arg(long)]
    pub collision: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct GyroUmbrellaArgs {
    #[command(flatten)]
    pub k: NegativeK,
    #[command(flatten)]
    pub d: Damping,
    #[arg(long, default_value = "0.001", allow_hyphen_values = true, value_parser = parse_values)]
    pub deltas: Values,
    /// Ratios `ν/δ`.
    #[arg(long, default_value = "0.5,1,1.5,2,3", allow_hyphen_values = true, value_parser = parse_values)]
    pub gammas: Values,
}

#[derive(Debug, Args, Serialize)]
pub struct MaxwellBlochArgs {
    #[arg(long, default_value = "-4:4:81", allow_hyphen_values = true, value_parser = parse_values)]
    pub omegas: Values,
    #[arg(long, default_value = "-2:2:81", allow_hyphen_values = true, value_parser = parse_values)]
    pub nus: Values,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true, value_parser = parse_finite)]
    pub delta: f64,
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true, value_parser = parse_finite)]
    pub kappa: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct FloquetArgs {
    #[arg(long, default_value_t = 1.0, value_parser = parse_finite)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.05, value_parser = parse_finite)]
    pub eps: f64,
    /// Damping through `μ = 2εκ`.
    #[arg(long, default_value_t = 0.0, value_parser = parse_finite)]
    pub kappa: f64,
    /// Defaults to `η₀(1 − 3ε)`.
    #[arg(long, value_parser = parse_finite)]
    pub eta_min: Option<f64>,
    /// Defaults to `η₀(1 + 3ε)`.
    #[arg(long, value_parser = parse_finite)]
    pub eta_max: Option<f64>,
    #[arg(long, default_value_t = 121)]
    pub points: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct BeckArgs {
    #[arg(long, default_value = "0.0001", allow_hyphen_values = true, value_parser = parse_values)]
    pub d1: Values,
    #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = parse_values)]
    pub d2: Values,
    #[arg(long, default_value_t = 12)]
    pub n_modes: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct BaroclinicArgs {
    #[arg(long, default_value_t = 10.0, value_parser = parse_finite)]
    pub f: f64,
    #[arg(long, default_value_t = 1.0, value_parser = parse_finite)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.0, value_parser = parse_finite)]
    pub r: f64,
    #[arg(long, default_value_t = 1)]
    pub m: u32,
    /// Zonal wavenumbers for the threshold table.
    #[arg(long, default_value = "0.1:1.4:27", allow_hyphen_values = true, value_parser = parse_values)]
    pub alphas: Values,
    /// Shears for the phase-speed portrait at `--alpha`; switches the output.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_values)]
    pub shears: Option<Values>,
    #[arg(long, default_value_t = 1.0, value_parser = parse_finite)]
    pub alpha: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct UmbrellaSampleArgs {
    #[arg(long, default_value_t = 100)]
    pub grid: usize,
    #[arg(long, default_value_t = 2.0, value_parser = parse_finite)]
    pub x1_max: f64,
    #[arg(long, default_value_t = 2.0, value_parser = parse_finite)]
    pub x2_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum System {
    Quartic,
    Ziegler,
    Hulten,
    MaxwellBloch,
    Gyro,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub system: System,
    /// `name=lo:hi:n`, one to three times.
    #[arg(long = "axis", required = true, allow_hyphen_values = true, value_parser = parse_axis)]
    pub axes: Vec<AxisSpec>,
    /// `name=value` for parameters held fixed.
    #[arg(long = "set", allow_hyphen_values = true, value_parser = parse_assignment)]
    pub set: Vec<Assignment>,
}
