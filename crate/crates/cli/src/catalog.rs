use serde::Serialize;
use serde_json::Value;

use crate::args::*;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize)]
pub struct Parameter {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: &'static str,
    pub default: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct Experiment {
    pub name: &'static str,
    pub reproduces: &'static str,
    pub outputs: &'static [&'static str],
    pub parameters: Vec<Parameter>,
}

fn schema_type(rust: &str) -> &'static str {
    match rust.replace(' ', "").as_str() {
        "usize" | "u64" => "integer",
        "f64" => "number",
        "bool" => "boolean",
        "String" => "string",
        "Vec<usize>" => "array<integer>",
        "Vec<f64>" => "array<number>",
        "Vec<String>" => "array<string>",
        _ => "string",
    }
}

fn entry<T: ExperimentArgs>(reproduces: &'static str, outputs: &'static [&'static str]) -> Experiment {
    let defaults = serde_json::to_value(T::defaults()).unwrap_or(Value::Null);
    let parameters = T::field_types()
        .iter()
        .map(|(name, ty)| Parameter {
            name: name.replace('_', "-"),
            ty: schema_type(ty),
            default: defaults.get(*name).cloned().unwrap_or(Value::Null),
        })
        .collect();
    Experiment {
        name: T::NAME,
        reproduces,
        outputs,
        parameters,
    }
}

pub fn catalog() -> Vec<Experiment> {
    vec![
        entry::<EnsembleSpectrumArgs>(
            "Scaled eigenvalue histograms of PS and Wishart reduced states, with the Marchenko-Pastur law",
            &["spectrum", "summary.json"],
        ),
        entry::<AveragesArgs>(
            "Average purity, linear entropy and von Neumann entropy of PS reductions",
            &["averages"],
        ),
        entry::<VnScalingArgs>(
            "Half-system von Neumann entropy versus N against the approximate formula and the Page value",
            &["vn_scaling", "summary.json"],
        ),
        entry::<TmiRandomArgs>(
            "TMI scatter of random PS states versus unrestricted random states",
            &["tmi_samples", "summary.json"],
        ),
        entry::<TimeseriesArgs>(
            "Entanglement, MI and TMI along kicked-top trajectories (saturation and Ehrenfest time)",
            &["timeseries", "summary.json"],
        ),
        entry::<OtocArgs>(
            "Out-of-time-order correlator growth with rate above twice the Lyapunov exponent",
            &["otoc", "summary.json"],
        ),
        entry::<TmiGridArgs>(
            "Time-averaged TMI over a theta-phi grid of coherent states, chaotic versus regular",
            &["tmi_grid", "summary.json"],
        ),
        entry::<PhasePortraitArgs>(
            "Classical kicked-top phase portraits",
            &["phase_portrait"],
        ),
        entry::<LyapunovArgs>(
            "Classical Lyapunov exponent and Ehrenfest time",
            &["lyapunov"],
        ),
        entry::<ConcentrationArgs>(
            "Empirical concentration of entropies and TMI against the Levy bound",
            &["concentration", "summary.json"],
        ),
    ]
}

pub fn lookup(name: &str) -> CliResult<Experiment> {
    let all = catalog();
    if let Some(e) = all.iter().find(|e| e.name == name) {
        return Ok(e.clone());
    }
    let mut close: Vec<(f64, &str)> = all
        .iter()
        .map(|e| (strsim::jaro_winkler(name, e.name), e.name))
        .filter(|(score, _)| *score >= 0.7)
        .collect();
    close.sort_by(|a, b| b.0.total_cmp(&a.0));
    let candidates: Vec<&str> = if close.is_empty() {
        all.iter().map(|e| e.name).collect()
    } else {
        close.into_iter().map(|(_, n)| n).collect()
    };
    Err(CliError::UnknownExperiment {
        name: name.to_string(),
        hint: format!("; did you mean: {}", candidates.join(", ")),
    })
}

pub fn render_text(entries: &[Experiment]) -> String {
    let mut out = String::new();
    for e in entries {
        out.push_str(&format!("{}\n    {}\n", e.name, e.reproduces));
        for p in &e.parameters {
            out.push_str(&format!("    --{:<14} {:<15} default {}\n", p.name, p.ty, p.default));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_subcommand_is_listed() {
        let names: Vec<&str> = catalog().iter().map(|e| e.name).collect();
        assert_eq!(names, EXPERIMENT_NAMES);
    }

    #[test]
    fn defaults_are_reported() {
        let grid = lookup("tmi-grid").unwrap();
        let n_theta = grid.parameters.iter().find(|p| p.name == "n-theta").unwrap();
        assert_eq!(n_theta.ty, "integer");
        assert_eq!(n_theta.default, 50);
    }

    #[test]
    fn misspelling_gets_suggestions() {
        let err = lookup("tmi-gird").unwrap_err();
        assert!(err.to_string().contains("tmi-grid"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }
}
