use std::f64::consts::{FRAC_PI_2, PI};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use haar_averager::basis::HaarSystem;
use haar_averager::quad::QuadConfig;
use haar_averager::special::{KernelSpec, UnitComplex};
use serde::Serialize;

use crate::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "haar-averager",
    version,
    about = "Haar martingale transforms, averaged kernels and their constants",
    allow_negative_numbers = true
)]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "HAAR_AVERAGER_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate the constant C of one averaged kernel.
    #[command(allow_negative_numbers = true)]
    Constant(ConstantArgs),
    /// Search a kernel family for the smallest C.
    #[command(allow_negative_numbers = true)]
    Optimize(OptimizeArgs),
    /// Run the invariant and oracle checks.
    #[command(allow_negative_numbers = true)]
    Verify(VerifyArgs),
    /// Apply a martingale transform to a square-grid CSV (the mean is dropped).
    #[command(allow_negative_numbers = true)]
    Transform(TransformArgs),
    /// Sample an averaged kernel (or its homogenization) on a grid.
    #[command(allow_negative_numbers = true)]
    KernelDump(KernelDumpArgs),
    /// Compare Monte-Carlo translation averages with kernel convolution.
    #[command(allow_negative_numbers = true)]
    McCheck(McCheckArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyArg {
    New,
    Diagonal,
    Triangle,
}

pub fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be positive, got {v}"))
    }
}

fn finite(s: &str) -> Result<f64, String> {
    let v = parse_angle(s)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be finite, got {v}"))
    }
}

/// A real number, or `pi`/`-pi` optionally scaled as in `pi/2`, `3pi/4`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim();
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, t),
    };
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (n, d.parse::<f64>().map_err(|_| format!("bad angle `{s}`"))?),
        None => (body, 1.0),
    };
    let coeff = match num.strip_suffix("pi") {
        Some("") => 1.0,
        Some(c) => c.parse::<f64>().map_err(|_| format!("bad angle `{s}`"))?,
        None => return Err(format!("bad angle `{s}`")),
    };
    Ok(sign * coeff * PI / den)
}

/// Comma-separated angles in radians; `σ = e^{iθ}`.
pub fn parse_sigma(s: &str) -> Result<Vec<UnitComplex>, String> {
    s.split(',')
        .map(|t| parse_angle(t).map(UnitComplex::from_angle))
        .collect()
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct QuadArgs {
    /// Absolute and relative quadrature tolerance.
    #[arg(long, value_parser = positive, default_value_t = 1e-10)]
    pub tol: f64,
    /// Gauss–Legendre nodes per axis.
    #[arg(long, default_value_t = 16)]
    pub gl_order: usize,
}

impl QuadArgs {
    pub fn config(&self) -> QuadConfig {
        QuadConfig {
            abs_tol: self.tol,
            rel_tol: self.tol.max(1e-15),
            gl_order: self.gl_order,
            ..QuadConfig::default()
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct KernelArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::New)]
    pub family: FamilyArg,
    /// Side ratio (new), stretch (diagonal) or height (triangle).
    #[arg(long, value_parser = positive, default_value_t = 1.0)]
    pub b: f64,
    /// Inclination of the parallelogram, in (0, π).
    #[arg(long, value_parser = parse_angle, default_value_t = FRAC_PI_2)]
    pub phi: f64,
    /// Phase of σ± = e^{±iϑ} (diagonal).
    #[arg(long, value_parser = finite, default_value_t = PI)]
    pub theta: f64,
    /// Shear of the triangle map (x, y) ↦ (x + a y, b y).
    #[arg(long, value_parser = finite, default_value_t = 0.0)]
    pub a: f64,
    /// Angles of (σ₀, σ₊, σ₋), e.g. `0,pi,pi`. Default: the family's
    /// reference choice.
    #[arg(long)]
    pub sigma: Option<String>,
}

impl KernelArgs {
    pub fn sigma(&self) -> Result<[UnitComplex; 3], CliError> {
        match &self.sigma {
            None => Ok(match self.family {
                FamilyArg::Diagonal => [
                    UnitComplex::ONE,
                    UnitComplex::from_angle(self.theta),
                    UnitComplex::from_angle(-self.theta),
                ],
                _ => [UnitComplex::ONE, UnitComplex::MINUS_ONE, UnitComplex::MINUS_ONE],
            }),
            Some(s) => {
                let v = parse_sigma(s).map_err(CliError::Usage)?;
                <[UnitComplex; 3]>::try_from(v)
                    .map_err(|_| CliError::Usage("--sigma needs three angles".into()))
            }
        }
    }

    pub fn spec(&self) -> Result<KernelSpec, CliError> {
        let s = self.sigma()?;
        let spec = match self.family {
            FamilyArg::New => {
                if !(self.phi > 0.0 && self.phi < PI) {
                    return Err(CliError::Usage(format!("--phi must lie in (0, π), got {}", self.phi)));
                }
                KernelSpec::new_family(self.b, self.phi, s)
            }
            FamilyArg::Diagonal => KernelSpec::Diagonal {
                b: self.b,
                sigma0: s[0],
                sigma_plus: s[1],
                sigma_minus: s[2],
            },
            FamilyArg::Triangle => KernelSpec::Triangle {
                a: self.a,
                b: self.b,
                sigma0: s[0],
                sigma_plus: s[1],
                sigma_minus: s[2],
            },
        };
        spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(spec)
    }

    pub fn params(&self) -> serde_json::Value {
        match self.family {
            FamilyArg::New => serde_json::json!({"b": self.b, "phi": self.phi}),
            FamilyArg::Diagonal => serde_json::json!({"b": self.b, "theta": self.theta}),
            FamilyArg::Triangle => serde_json::json!({"a": self.a, "b": self.b}),
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ConstantArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub quad: QuadArgs,
    /// Evaluate by the generic planar integral even where a reduced form exists.
    #[arg(long)]
    pub planar: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OptimizeArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::New)]
    pub family: FamilyArg,
    /// Stage 1 is the grid scan, later stages refine by downhill simplex.
    #[arg(long, default_value_t = 2)]
    pub stages: u32,
    /// Grid points per axis (default 21, or 7 for triangles).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Best grid points used as simplex starts.
    #[arg(long, default_value_t = 3)]
    pub starts: usize,
    /// Search box as `lo:hi` per parameter, comma-separated.
    #[arg(long)]
    pub bounds: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Rank the real sign patterns at --b/--phi instead of searching shapes.
    #[arg(long)]
    pub sign_patterns: bool,
    #[arg(long, value_parser = positive, default_value_t = 1.0)]
    pub b: f64,
    #[arg(long, value_parser = parse_angle, default_value_t = FRAC_PI_2)]
    pub phi: f64,
    #[command(flatten)]
    pub quad: QuadArgs,
    /// Output paths: `log.csv summary.json`, or one prefix for both.
    #[arg(long, num_args = 1..=2)]
    pub out: Vec<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    All,
    Gram,
    Norms,
    Subordination,
    Averaging,
    Series,
    Triangle,
    Diagonal,
    Constants,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Random trials per system in the norm and subordination checks.
    #[arg(long, default_value_t = 40)]
    pub trials: usize,
    /// Monte-Carlo samples per point in the averaging check.
    #[arg(long, default_value_t = 200_000)]
    pub samples: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SquareSystemArg {
    Orig,
    New,
}

impl SquareSystemArg {
    pub fn system(self) -> HaarSystem {
        match self {
            SquareSystemArg::Orig => HaarSystem::Orig,
            SquareSystemArg::New => HaarSystem::New,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TransformArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SquareSystemArg::New)]
    pub system: SquareSystemArg,
    /// One angle per kind, e.g. `0,pi,pi`.
    #[arg(long, default_value = "0,pi,pi")]
    pub sigma: String,
    /// Generations to transform (default: all resolved by the grid).
    #[arg(long)]
    pub depth: Option<u32>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct KernelDumpArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Grid points per axis.
    #[arg(long, default_value_t = 101)]
    pub n: usize,
    /// Half-width of the sampled square (default: cover the support).
    #[arg(long, value_parser = positive)]
    pub extent: Option<f64>,
    /// Dump the degree −2 homogenization on the unit circle instead.
    #[arg(long)]
    pub homogenized: bool,
    /// Angular samples for --homogenized.
    #[arg(long, default_value_t = 360)]
    pub angles: usize,
    #[command(flatten)]
    pub quad: QuadArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanarSystemArg {
    New,
    Parallelogram,
    Diagonal,
    Triangle,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct McCheckArgs {
    #[arg(long, value_enum, default_value_t = PlanarSystemArg::New)]
    pub system: PlanarSystemArg,
    #[arg(long, value_parser = positive, default_value_t = 1.0)]
    pub b: f64,
    #[arg(long, value_parser = parse_angle, default_value_t = FRAC_PI_2)]
    pub phi: f64,
    #[arg(long, value_parser = finite, default_value_t = 0.0)]
    pub a: f64,
    /// One angle per kind.
    #[arg(long, default_value = "0,2,pi")]
    pub sigma: String,
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub quad: QuadArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl McCheckArgs {
    pub fn system(&self) -> Result<HaarSystem, CliError> {
        let sys = match self.system {
            PlanarSystemArg::New => HaarSystem::New,
            PlanarSystemArg::Parallelogram => HaarSystem::Parallelogram {
                b: self.b,
                phi: self.phi,
            },
            PlanarSystemArg::Diagonal => HaarSystem::Diagonal {
                b: self.b,
                phi: FRAC_PI_2,
            },
            PlanarSystemArg::Triangle => HaarSystem::Triangle { a: self.a, b: self.b },
        };
        sys.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(sys)
    }
}
