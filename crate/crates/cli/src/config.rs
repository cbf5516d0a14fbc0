//! Run configuration: defaults, JSON config document, command-line
//! overrides, in that precedence order.

use serde::Deserialize;
use std::path::PathBuf;

use relkepler::perturbation::PerturbationConfig;
use relkepler::{IntegratorConfig, PerturbationSpec, PhysParams};

use crate::{CliError, GlobalOpts, OutputFormat};

/// Shape of the `--config` JSON document. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub params: Option<ParamsSection>,
    pub integrator: Option<IntegratorSection>,
    pub perturbation: Option<PerturbationConfig>,
    pub output: Option<OutputSection>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub m: Option<f64>,
    pub c: Option<f64>,
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_step: Option<f64>,
    pub min_radius_guard: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub format: Option<String>,
    pub path: Option<String>,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: PhysParams,
    pub integrator: IntegratorConfig,
    /// Perturbation description from the config file, if any; commands that
    /// need one default to dipole-cos with amplitude 1 otherwise.
    pub perturbation: Option<PerturbationConfig>,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
    pub jobs: Option<usize>,
}

impl Resolved {
    /// The perturbation for a search at forcing period `t_period`: the
    /// configured one (period filled in when the document omits it), or the
    /// default dipole-cos of unit amplitude.
    pub fn perturbation_for(&self, t_period: f64) -> Result<PerturbationSpec, CliError> {
        match &self.perturbation {
            Some(cfg) => {
                let mut cfg = cfg.clone();
                cfg.period.get_or_insert(t_period);
                Ok(PerturbationSpec::from_config(&cfg)?)
            }
            None => Ok(PerturbationSpec::dipole_cos(1.0, t_period)?),
        }
    }
}

pub fn resolve(opts: &GlobalOpts) -> Result<Resolved, CliError> {
    let file: FileConfig = match &opts.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Spec(format!("bad config {}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    let fp = file.params.unwrap_or_default();
    let params = PhysParams::new(
        opts.m.or(fp.m).unwrap_or(1.0),
        opts.c.or(fp.c).unwrap_or(1.0),
        opts.alpha.or(fp.alpha).unwrap_or(1.0),
    )?;
    let fi = file.integrator.unwrap_or_default();
    let defaults = IntegratorConfig::default();
    let integrator = IntegratorConfig {
        rel_tol: opts.rel_tol.or(fi.rel_tol).unwrap_or(defaults.rel_tol),
        abs_tol: opts.abs_tol.or(fi.abs_tol).unwrap_or(defaults.abs_tol),
        max_step: fi.max_step.unwrap_or(defaults.max_step),
        min_radius_guard: fi.min_radius_guard.unwrap_or(defaults.min_radius_guard),
    };
    integrator.validate()?;
    let fo = file.output.unwrap_or_default();
    let format = match opts.format {
        Some(f) => f,
        None => match fo.format.as_deref() {
            Some("csv") => OutputFormat::Csv,
            Some("json") | None => OutputFormat::Json,
            Some(other) => {
                return Err(CliError::Spec(format!(
                    "unknown output format '{other}' (expected csv or json)"
                )))
            }
        },
    };
    let out_dir = opts
        .out
        .clone()
        .or_else(|| fo.path.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok(Resolved {
        params,
        integrator,
        perturbation: file.perturbation,
        out_dir,
        format,
        jobs: opts.jobs,
    })
}
