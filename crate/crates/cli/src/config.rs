use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Debug, Parser)]
#[command(name = "normflow", version, about = "Gradient flows and contraction checks on asymmetric normed spaces")]
pub struct Cli {
    /// Read the full command configuration from a JSON file (as echoed in reports).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// A comma-separated point such as `1,-0.5`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<f64>);

impl FromStr for Point {
    type Err = normflow::Error;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        normflow::parse_point(s).map(Point)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        f.write_str(&items.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "lowercase")]
pub enum Command {
    /// Randomized check of the norm axioms.
    Axioms(AxiomsArgs),
    /// Dual norm, Legendre transform and dual metric tensor of a covector.
    Dual(DualArgs),
    /// Integrate one gradient curve.
    Flow(FlowArgs),
    /// Distance profile between two gradient curves.
    Contract(ContractArgs),
    /// Run one of the packaged counterexample constructions.
    Scenario {
        #[command(subcommand)]
        kind: ScenarioKind,
    },
    /// Grid search for the largest distance ratio.
    Witness(SearchArgs),
    /// Lower bound for the best contraction constant over a grid.
    Bestc(SearchArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Axioms(_) => "axioms",
            Command::Dual(_) => "dual",
            Command::Flow(_) => "flow",
            Command::Contract(_) => "contract",
            Command::Scenario { .. } => "scenario",
            Command::Witness(_) => "witness",
            Command::Bestc(_) => "bestc",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct AxiomsArgs {
    #[arg(long)]
    pub space: String,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DualArgs {
    #[arg(long)]
    pub space: String,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Point,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FlowArgs {
    #[arg(long)]
    pub space: String,
    #[arg(long)]
    pub function: String,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Point,
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub horizon: f64,
    /// Local error tolerance of the smooth integrator.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Number of uniform samples reported alongside the breakpoints.
    #[arg(long, default_value_t = 101)]
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ContractArgs {
    #[arg(long)]
    pub space: String,
    #[arg(long)]
    pub function: String,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Point,
    #[arg(long, allow_hyphen_values = true)]
    pub y0: Point,
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub horizon: f64,
    /// Check `d(t) ≤ e^{−Kt} d(0)` instead of plain contraction.
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Relative tolerance of the violation test.
    #[arg(long, default_value_t = 1e-9)]
    pub violation_tol: f64,
    /// Extra times at which the distance is reported.
    #[arg(long, allow_hyphen_values = true)]
    pub at: Option<Point>,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ScenarioKind {
    /// Corner of a nondifferentiable norm.
    Step1 {
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long, default_value_t = 0.9)]
        c: f64,
        /// Space to run on; defaults to euclid_l1:lambda=(0,1).
        #[arg(long)]
        space: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
    },
    /// Asymmetric norm with horizontal tangencies.
    Step2 {
        #[arg(long)]
        space: String,
        #[arg(long, default_value_t = 0.5)]
        c: f64,
        #[arg(long, default_value_t = 0.01)]
        s: f64,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
    },
    /// Tangency scan of a smooth planar norm.
    Step3 {
        #[arg(long)]
        space: String,
        #[arg(long, default_value_t = 360)]
        samples: usize,
    },
    /// Symmetric non-Euclidean norm with unit support lines along the axes.
    Step4 {
        /// Exponent of the ℓp space; ignored when --space is given.
        #[arg(long, default_value_t = 4.0)]
        p: f64,
        #[arg(long)]
        space: Option<String>,
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, default_value_t = 0.01)]
        s: f64,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SearchArgs {
    #[arg(long)]
    pub space: String,
    #[arg(long)]
    pub family: String,
    /// `name=v1,v2;name=start:stop:count`
    #[arg(long)]
    pub grid: String,
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommandConfig {
    pub command: Command,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}
