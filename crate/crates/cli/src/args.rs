use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cvdist::{GainMatrix, NoiseSetting, Squeezing};

#[derive(Debug, Parser)]
#[command(
    name = "cvdist",
    version,
    about = "Gaussian entanglement distribution by separable states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the three-step protocol and report every step.
    Improved(ImprovedArgs),
    /// Gain-based recovery of the A-C entanglement.
    Recover(RecoverArgs),
    /// Sweep the protocol over a grid of squeezing values.
    Sweep(SweepArgs),
    /// Check the analytic CMs against a Monte Carlo simulation.
    McValidate(McArgs),
    /// Regression table of headline values.
    PaperTable(OutputArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct SqueezingArgs {
    /// Squeezing factor e^{2t} (>= 1).
    #[arg(long, value_parser = parse_e2t)]
    pub e2t: Option<Squeezing>,
    /// Squeezing in dB, 10 log10 e^{2t}.
    #[arg(long = "squeezing-db", value_parser = parse_db)]
    pub squeezing_db: Option<Squeezing>,
}

impl SqueezingArgs {
    pub fn squeezing(&self) -> Squeezing {
        self.e2t
            .or(self.squeezing_db)
            .expect("clap enforces one squeezing flag")
    }
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    /// Classical noise strength, or "auto" for the separability threshold.
    #[arg(long, default_value = "auto", value_parser = parse_noise)]
    pub x: NoiseSetting,
    /// Extra variance on the antisqueezed quadratures of A and C.
    #[arg(long, default_value_t = 0.0, value_parser = parse_nonnegative)]
    pub excess: f64,
}

#[derive(Debug, Args)]
pub struct ImprovedArgs {
    #[command(flatten)]
    pub squeezing: SqueezingArgs,
    #[command(flatten)]
    pub noise: NoiseArgs,
    /// Also run the recovery scheme with this gain.
    #[arg(long, value_parser = parse_gain)]
    pub gain: Option<GainMatrix>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    #[command(flatten)]
    pub squeezing: SqueezingArgs,
    #[command(flatten)]
    pub noise: NoiseArgs,
    /// "identity" or four comma-separated reals g11,g12,g21,g22.
    #[arg(long, default_value = "identity", value_parser = parse_gain)]
    pub gain: GainMatrix,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// First e^{2t} of the geometric grid.
    #[arg(long, default_value_t = 1.1, conflicts_with = "e2t")]
    pub start: f64,
    /// Last e^{2t} of the geometric grid.
    #[arg(long, default_value_t = 1e6, conflicts_with = "e2t")]
    pub stop: f64,
    /// Number of grid points.
    #[arg(long, default_value_t = 50, conflicts_with = "e2t")]
    pub points: usize,
    /// Explicit comma-separated list of e^{2t} values.
    #[arg(long, value_delimiter = ',', value_parser = parse_e2t)]
    pub e2t: Vec<Squeezing>,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub squeezing: SqueezingArgs,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[arg(long, default_value = "identity", value_parser = parse_gain)]
    pub gain: GainMatrix,
    /// Number of shots (at least 1000).
    #[arg(long, default_value_t = cvdist::mcoracle::DEFAULT_SHOTS, value_parser = parse_samples)]
    pub samples: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Allowed deviation in standard errors.
    #[arg(long, default_value_t = cvdist::mcoracle::DEFAULT_SIGMA, value_parser = parse_positive)]
    pub sigma: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("'{s}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

fn parse_nonnegative(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("'{s}' must be non-negative"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("'{s}' must be positive"))
    }
}

fn parse_e2t(s: &str) -> Result<Squeezing, String> {
    Squeezing::from_e2t(parse_f64(s)?).map_err(|e| e.to_string())
}

fn parse_db(s: &str) -> Result<Squeezing, String> {
    Squeezing::from_db(parse_f64(s)?).map_err(|e| e.to_string())
}

fn parse_noise(s: &str) -> Result<NoiseSetting, String> {
    s.parse().map_err(|e: cvdist::Error| e.to_string())
}

fn parse_samples(s: &str) -> Result<usize, String> {
    let v = parse_f64(s)?;
    if v.fract() != 0.0 || v < 0.0 || v > u32::MAX as f64 * 64.0 {
        return Err(format!("'{s}' is not a valid sample count"));
    }
    let n = v as usize;
    if n < cvdist::mcoracle::MIN_PROTOCOL_SHOTS {
        return Err(format!(
            "at least {} samples are required",
            cvdist::mcoracle::MIN_PROTOCOL_SHOTS
        ));
    }
    Ok(n)
}

pub fn parse_gain(s: &str) -> Result<GainMatrix, String> {
    if s.trim().eq_ignore_ascii_case("identity") {
        return Ok(GainMatrix::identity());
    }
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err(format!(
            "gain must be 'identity' or four comma-separated numbers, got '{s}'"
        ));
    }
    let mut v = [0.0; 4];
    for (slot, p) in v.iter_mut().zip(parts) {
        *slot = parse_f64(p)?;
    }
    Ok(GainMatrix::from_row_major(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gain_specs() {
        assert_eq!(parse_gain("identity").unwrap(), GainMatrix::identity());
        assert_eq!(parse_gain("1,0,0,1").unwrap(), GainMatrix::identity());
        assert_eq!(parse_gain("0, 0, 0, 0").unwrap(), GainMatrix::zero());
        assert!(parse_gain("1,2,3").is_err());
        assert!(parse_gain("a,b,c,d").is_err());
        assert!(parse_gain("1,0,0,inf").is_err());
    }

    #[test]
    fn samples_accept_scientific_notation() {
        assert_eq!(parse_samples("1e6").unwrap(), 1_000_000);
        assert_eq!(parse_samples("1000").unwrap(), 1000);
        assert!(parse_samples("100").is_err());
        assert!(parse_samples("1500.5").is_err());
    }

    #[test]
    fn db_round_trip() {
        for d in [0.0, 3.0, 10.0, 27.5] {
            let s = parse_db(&d.to_string()).unwrap();
            assert!((s.db() - d).abs() < 1e-12);
        }
        assert!(parse_db("-1").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
