use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};
use crate::output::Format;

pub const DEFAULT_SEED: u64 = 20240611;
pub const DEFAULT_OUT_DIR: &str = "psym-out";

#[derive(Debug, Parser)]
#[command(name = "psym", version, about = "Permutation-symmetric state experiments")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct GlobalArgs {
    /// Base RNG seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, env = "PSYM_OUT_DIR")]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// TOML file with global keys and per-subcommand sections.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedGlobal {
    pub seed: u64,
    pub out: PathBuf,
    pub format: Format,
    pub threads: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scaled eigenvalue histogram of random reduced states.
    EnsembleSpectrum(EnsembleSpectrumArgs),
    /// Closed-form averages next to Monte Carlo estimates.
    Averages(AveragesArgs),
    /// Half-system von Neumann entropy against the approximate formula.
    VnScaling(VnScalingArgs),
    /// TMI of random PS or unrestricted qubit states.
    TmiRandom(TmiRandomArgs),
    /// Entropy, MI and TMI along a kicked-top trajectory.
    Timeseries(TimeseriesArgs),
    /// Out-of-time-order correlator and its growth rate.
    Otoc(OtocArgs),
    /// Time-averaged TMI over a grid of coherent initial states.
    TmiGrid(TmiGridArgs),
    /// Classical kicked-top orbits.
    PhasePortrait(PhasePortraitArgs),
    /// Classical Lyapunov exponent and Ehrenfest time.
    Lyapunov(LyapunovArgs),
    /// Empirical concentration against the Levy bound.
    Concentration(ConcentrationArgs),
    /// Describe the available experiments.
    List(ListArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ListArgs {
    /// Show a single experiment.
    pub name: Option<String>,

    /// Emit the catalog as JSON.
    #[arg(long)]
    pub json: bool,
}

/// Parameters of one experiment. Every field is optional so that flags,
/// config values and defaults can be layered.
pub trait ExperimentArgs: Serialize + DeserializeOwned + Default {
    const NAME: &'static str;
    fn defaults() -> Self;
    /// `(field, Rust type)` pairs in declaration order.
    fn field_types() -> &'static [(&'static str, &'static str)];
}

macro_rules! experiment_args {
    (
        $name:literal, $ty:ident {
            $( $(#[$meta:meta])* $field:ident : $fty:ty = $default:expr ),* $(,)?
        }
    ) => {
        #[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
        pub struct $ty {
            $(
                $(#[$meta])*
                #[arg(long)]
                pub $field: Option<$fty>,
            )*
        }

        impl ExperimentArgs for $ty {
            const NAME: &'static str = $name;
            fn defaults() -> Self {
                $ty { $( $field: $default ),* }
            }
            fn field_types() -> &'static [(&'static str, &'static str)] {
                &[ $( (stringify!($field), stringify!($fty)) ),* ]
            }
        }
    };
}

experiment_args!("ensemble-spectrum", EnsembleSpectrumArgs {
    /// `ps` or `wishart`.
    kind: String = Some("ps".into()),
    /// Total qubits (ps).
    n: usize = Some(12),
    /// Block size (ps).
    q: usize = Some(2),
    /// Matrix dimension (wishart).
    n1: usize = Some(51),
    /// Column count (wishart).
    n2: usize = Some(51),
    samples: usize = Some(10_000),
    bins: usize = Some(250),
});

experiment_args!("averages", AveragesArgs {
    n: usize = Some(12),
    /// Block size; ignored with --sweep-q.
    q: usize = Some(2),
    /// Tabulate every Q in 1..=N-1.
    #[arg(num_args = 0..=1, default_missing_value = "true")]
    sweep_q: bool = Some(false),
    /// Monte Carlo samples per row; 0 leaves the Monte Carlo columns empty.
    samples: usize = Some(10_000),
    alpha: f64 = Some(2.0 / 3.0),
});

experiment_args!("vn-scaling", VnScalingArgs {
    n_min: usize = Some(10),
    n_max: usize = Some(100),
    n_step: usize = Some(10),
    samples: usize = Some(1000),
    alpha: f64 = Some(2.0 / 3.0),
    /// Fit alpha to the Monte Carlo means.
    #[arg(num_args = 0..=1, default_missing_value = "true")]
    calibrate: bool = Some(false),
});

experiment_args!("tmi-random", TmiRandomArgs {
    n: usize = Some(12),
    /// Block sizes q1,q2,q3.
    #[arg(value_delimiter = ',')]
    blocks: Vec<usize> = Some(vec![1, 2, 2]),
    /// `vn`, `lin` or `renyi:<alpha>`.
    kind: String = Some("vn".into()),
    samples: usize = Some(100),
    /// `ps` or `qubits`.
    ensemble: String = Some("ps".into()),
    alpha: f64 = Some(2.0 / 3.0),
});

experiment_args!("timeseries", TimeseriesArgs {
    j: f64 = Some(10.0),
    k: f64 = Some(6.0),
    p: f64 = Some(FRAC_PI_2),
    theta: f64 = Some(2.25),
    phi: f64 = Some(0.63),
    steps: usize = Some(250),
    #[arg(value_delimiter = ',')]
    blocks: Vec<usize> = Some(vec![1, 1, 1]),
    #[arg(value_delimiter = ',')]
    kinds: Vec<String> = Some(vec!["vn".into(), "lin".into()]),
    /// Lyapunov exponent used for the saturation window.
    lambda: f64 = Some(0.97),
    dim_cap: usize = Some(psym_core::kicked_top::DEFAULT_DIM_CAP),
});

experiment_args!("otoc", OtocArgs {
    j: f64 = Some(200.0),
    k: f64 = Some(6.0),
    p: f64 = Some(FRAC_PI_2),
    steps: usize = Some(20),
    lambda: f64 = Some(0.97),
    fit_start: usize = Some(1),
    /// Defaults to the integer part of the Ehrenfest time.
    fit_end: usize = None,
    dim_cap: usize = Some(psym_core::kicked_top::DEFAULT_DIM_CAP),
});

experiment_args!("tmi-grid", TmiGridArgs {
    j: f64 = Some(6.0),
    k: f64 = Some(6.0),
    p: f64 = Some(FRAC_PI_2),
    n_theta: usize = Some(50),
    n_phi: usize = Some(100),
    steps: usize = Some(1000),
    #[arg(value_delimiter = ',')]
    blocks: Vec<usize> = Some(vec![1, 1, 1]),
    kind: String = Some("vn".into()),
    dim_cap: usize = Some(psym_core::kicked_top::DEFAULT_DIM_CAP),
});

experiment_args!("phase-portrait", PhasePortraitArgs {
    k: f64 = Some(3.0),
    p: f64 = Some(FRAC_PI_2),
    points: usize = Some(100),
    steps: usize = Some(500),
});

experiment_args!("lyapunov", LyapunovArgs {
    k: f64 = Some(6.0),
    p: f64 = Some(FRAC_PI_2),
    transient: usize = Some(200),
    average: usize = Some(5000),
    trajectories: usize = Some(64),
    /// Spin for the Ehrenfest time column.
    j: f64 = None,
});

experiment_args!("concentration", ConcentrationArgs {
    n: usize = Some(40),
    /// `vn`, `lin` or `tmi`.
    functional: String = Some("lin".into()),
    /// Block size for `vn` and `lin`.
    q: usize = Some(2),
    /// Block sizes for `tmi`.
    #[arg(value_delimiter = ',')]
    blocks: Vec<usize> = Some(vec![1, 1, 1]),
    /// Entropy used inside `tmi`.
    kind: String = Some("lin".into()),
    samples: usize = Some(10_000),
    #[arg(value_delimiter = ',')]
    epsilons: Vec<f64> = Some(vec![0.01, 0.02, 0.05, 0.1, 0.2]),
});

const GLOBAL_KEYS: [&str; 4] = ["seed", "out", "format", "threads"];
pub const EXPERIMENT_NAMES: [&str; 10] = [
    "ensemble-spectrum",
    "averages",
    "vn-scaling",
    "tmi-random",
    "timeseries",
    "otoc",
    "tmi-grid",
    "phase-portrait",
    "lyapunov",
    "concentration",
];

/// Parsed `--config` file.
#[derive(Debug, Default)]
pub struct ConfigFile {
    global: Map<String, Value>,
    sections: Map<String, Value>,
}

impl ConfigFile {
    pub fn load(path: Option<&PathBuf>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(ConfigFile::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let table: toml::Table = toml::from_str(text).map_err(|e| CliError::validation("config", e.to_string()))?;
        let mut cfg = ConfigFile::default();
        for (key, value) in table {
            let key = normalize(&key);
            let value = serde_json::to_value(value).map_err(|e| CliError::validation(&key, e.to_string()))?;
            if GLOBAL_KEYS.contains(&key.as_str()) {
                cfg.global.insert(key, value);
            } else if let Some(name) = EXPERIMENT_NAMES.iter().find(|n| normalize(n) == key) {
                let Value::Object(section) = value else {
                    return Err(CliError::validation(*name, "config section must be a table"));
                };
                let section = section.into_iter().map(|(k, v)| (normalize(&k), v)).collect();
                cfg.sections.insert(name.to_string(), Value::Object(section));
            } else {
                return Err(CliError::validation(key, "unknown config key"));
            }
        }
        Ok(cfg)
    }

    pub fn resolve_global(&self, flags: &GlobalArgs) -> CliResult<ResolvedGlobal> {
        let merged: GlobalArgs = overlay(&GlobalArgs::default(), &self.global, flags, "config")?;
        Ok(ResolvedGlobal {
            seed: merged.seed.unwrap_or(DEFAULT_SEED),
            out: merged.out.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
            format: merged.format.unwrap_or(Format::Csv),
            threads: merged.threads.unwrap_or(0),
        })
    }

    /// Flags over config section over defaults. Returns the merged
    /// parameters and their JSON form for the manifest.
    pub fn resolve<T: ExperimentArgs>(&self, flags: &T) -> CliResult<(T, Value)> {
        let empty = Map::new();
        let section = match self.sections.get(T::NAME) {
            Some(Value::Object(m)) => m,
            _ => &empty,
        };
        let merged: T = overlay(&T::defaults(), section, flags, T::NAME)?;
        let json = serde_json::to_value(&merged).map_err(|e| CliError::Serialize(e.to_string()))?;
        Ok((merged, json))
    }
}

fn normalize(key: &str) -> String {
    key.replace('-', "_")
}

fn overlay<T: Serialize + DeserializeOwned>(
    defaults: &T,
    config: &Map<String, Value>,
    flags: &T,
    section: &str,
) -> CliResult<T> {
    let to_map = |v: &T| match serde_json::to_value(v) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(CliError::Serialize("expected an object".into())),
        Err(e) => Err(CliError::Serialize(e.to_string())),
    };
    let mut merged = to_map(defaults)?;
    for (key, value) in config {
        if !merged.contains_key(key) {
            return Err(CliError::validation(key, format!("unknown key in [{section}]")));
        }
        // Check the type of each key on its own so the error names it.
        let mut probe = Map::new();
        probe.insert(key.clone(), value.clone());
        serde_json::from_value::<T>(Value::Object(probe)).map_err(|e| CliError::validation(key, e.to_string()))?;
        merged.insert(key.clone(), value.clone());
    }
    for (key, value) in to_map(flags)? {
        if !value.is_null() {
            merged.insert(key, value);
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::validation(section, e.to_string()))
}

/// Unwraps a resolved parameter, naming it when absent.
pub fn need<T: Clone>(value: &Option<T>, field: &str) -> CliResult<T> {
    value.clone().ok_or_else(|| CliError::validation(field, "a value is required"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config_override_defaults() {
        let cfg = ConfigFile::parse("seed = 7\n[otoc]\nj = 50.0\nsteps = 8\n").unwrap();
        let flags = OtocArgs {
            steps: Some(12),
            ..Default::default()
        };
        let (merged, _) = cfg.resolve(&flags).unwrap();
        assert_eq!(merged.j, Some(50.0));
        assert_eq!(merged.steps, Some(12));
        assert_eq!(merged.k, Some(6.0));
        assert_eq!(merged.fit_end, None);
        let g = cfg.resolve_global(&GlobalArgs::default()).unwrap();
        assert_eq!(g.seed, 7);
        let g = cfg
            .resolve_global(&GlobalArgs {
                seed: Some(9),
                ..Default::default()
            })
            .unwrap();
        assert_eq!(g.seed, 9);
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = ConfigFile::parse("[otoc]\nbogus = 1\n")
            .unwrap()
            .resolve(&OtocArgs::default())
            .unwrap_err();
        assert!(matches!(&err, CliError::Validation { field, .. } if field == "bogus"), "{err}");
        let err = ConfigFile::parse("nonsense = 1\n").unwrap_err();
        assert!(matches!(&err, CliError::Validation { field, .. } if field == "nonsense"));
    }

    #[test]
    fn wrong_types_are_named() {
        let err = ConfigFile::parse("[averages]\nsamples = \"many\"\n")
            .unwrap()
            .resolve(&AveragesArgs::default())
            .unwrap_err();
        assert!(matches!(&err, CliError::Validation { field, .. } if field == "samples"), "{err}");
    }

    #[test]
    fn dashed_keys_are_accepted() {
        let cfg = ConfigFile::parse("[tmi-grid]\nn-theta = 4\n").unwrap();
        let (merged, _) = cfg.resolve(&TmiGridArgs::default()).unwrap();
        assert_eq!(merged.n_theta, Some(4));
    }
}
