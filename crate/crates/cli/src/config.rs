use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Grid of positive reals: `a:b:n` (n evenly spaced points, both ends included) or `x,y,z`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Grid(pub Vec<f64>);

impl std::str::FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("'{x}' is not a number"));
        let parts: Vec<&str> = s.split(':').collect();
        let values = match parts.as_slice() {
            [a, b, n] => {
                let (a, b) = (num(a)?, num(b)?);
                let n: usize = n.trim().parse().map_err(|_| format!("'{n}' is not a point count"))?;
                match n {
                    0 => return Err("a grid needs at least one point".into()),
                    1 => vec![a],
                    _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
                }
            }
            [_] => s.split(',').map(num).collect::<Result<_, _>>()?,
            _ => return Err(format!("'{s}' is neither a:b:n nor a comma list")),
        };
        if values.iter().any(|x| !x.is_finite()) {
            return Err("grid values must be finite".into());
        }
        Ok(Grid(values))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleArg {
    Parallel,
    Sequential,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MutateFrom {
    /// The reference basis of line bundles.
    Reference,
    /// The classes identified from the asymptotic basis.
    Stokes,
}

/// Flags shared by every subcommand.
#[derive(Args, Clone, Debug, Serialize)]
pub struct Common {
    /// Built-in space: point, P1..P6, or products such as P1xP2.
    #[arg(long, global = true)]
    pub space: Option<String>,
    /// User data file (JSON).
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,
    /// Working precision in decimal digits.
    #[arg(long, global = true, env = "GAMMAFLOW_DIGITS", default_value_t = 50)]
    pub digits: u32,
    /// Ceiling for commands that raise precision per grid point.
    #[arg(long, global = true, default_value_t = 1000)]
    pub max_digits: u32,
    /// Pass/fail threshold; each command has its own default.
    #[arg(long = "tol", global = true)]
    pub tolerance: Option<f64>,
    /// |t| values (`a:b:n` or comma list).
    #[arg(long, global = true)]
    pub t: Option<Grid>,
    /// arg t in radians.
    #[arg(long, global = true, default_value_t = 0.0)]
    pub t_arg: f64,
    /// |z| values (`a:b:n` or comma list).
    #[arg(long, global = true)]
    pub z: Option<Grid>,
    /// arg z in radians.
    #[arg(long, global = true, default_value_t = 0.0)]
    pub z_arg: f64,
    /// Phase φ of the asymptotic sector; admissible default when absent.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub phase: Option<f64>,
    /// Line bundle degrees, one per factor.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub bundle: Option<Vec<i64>>,
    #[arg(long, global = true, value_enum, default_value_t = ScheduleArg::Parallel)]
    pub schedule: ScheduleArg,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write the plot table (CSV) here, for commands that have one.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
}

#[derive(Parser, Debug)]
#[command(name = "gammaflow", version, about = "High-precision quantum D-module checks for Fano spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Identity checks on one space.
    #[command(subcommand)]
    Check(CheckCmd),
    /// Eigenvalues of c₁⋆ at the given t and the Conjecture O test.
    Spectrum,
    /// Gamma conjecture I.
    #[command(subcommand)]
    Gamma1(Gamma1Cmd),
    /// Asymptotic bases, Stokes matrices and their K-theoretic identification.
    #[command(subcommand)]
    Stokes(StokesCmd),
    /// Riemann–Hilbert data.
    #[command(subcommand)]
    Rh(RhCmd),
    /// Lattice checks for a blowup.
    #[command(subcommand)]
    Blowup(BlowupCmd),
    /// User data files.
    #[command(subcommand)]
    Data(DataCmd),
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckCmd {
    /// Frobenius algebra axioms (classical and quantum).
    Algebra,
    /// Γ̂ Γ̂* against (2πi)^{deg/2} Â.
    GammaIdentity,
    /// Euler form of the line bundle basis, exact and in floating point.
    Hrr,
    /// Flat-section pairing against the Euler form.
    Pairing,
    /// z-loop and τ-shift monodromy identities.
    Monodromy,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Gamma1Cmd {
    /// Distance between [J(c₁ log t, 1)] and [Γ̂] along a t grid.
    Limit,
    /// Angle between e^{T/z} s(O)(1, z) and the Perron direction as z shrinks.
    FlatForm,
    /// Fit ‖J‖ ≈ C t^{-β} e^{Tt} along a t grid.
    Fit,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StokesCmd {
    /// Stokes matrix from the asymptotic bases at φ and φ + π.
    Compute,
    /// Integer K-classes of the asymptotic basis and a braid search to the reference Gram.
    Identify {
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// Apply a braid word (`k` right mutation at k, `-k` left) to an exceptional basis.
    Mutate {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        word: Vec<i32>,
        #[arg(long, value_enum, default_value_t = MutateFrom::Reference)]
        from: MutateFrom,
    },
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhCmd {
    /// Forward check of the gluing equations on sample points.
    Verify {
        #[arg(long, default_value_t = 10)]
        samples: usize,
    },
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlowupCmd {
    /// Unimodularity, pull-back isometry and block semiorthogonality of the Orlov basis.
    Check {
        #[arg(long, default_value = "F1")]
        preset: String,
    },
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataCmd {
    /// Parse and check every axiom; also runs the hypersurface pattern when declared.
    Validate,
}

/// Everything that determines a run. Embedded verbatim in each report.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(flatten)]
    pub common: Common,
    /// Runs have no random input; reports depend only on this configuration.
    pub deterministic: bool,
}

impl From<Cli> for RunConfig {
    fn from(cli: Cli) -> Self {
        Self { command: cli.command, common: cli.common, deterministic: true }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!("25:200:8".parse::<Grid>().unwrap().0, vec![25.0, 50.0, 75.0, 100.0, 125.0, 150.0, 175.0, 200.0]);
        assert_eq!("0.1, 0.05".parse::<Grid>().unwrap().0, vec![0.1, 0.05]);
        assert_eq!("3:9:1".parse::<Grid>().unwrap().0, vec![3.0]);
        assert!("1:2".parse::<Grid>().is_err());
        assert!("1:2:0".parse::<Grid>().is_err());
        assert!("a,b".parse::<Grid>().is_err());
    }
}
