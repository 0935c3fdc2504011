//! Executes one configuration and writes its artifacts.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sparse_harmonics::grid::{Domain, GridFunction};
use sparse_harmonics::harness::{
    CommutatorInput, Comparator, Context, DecayCurve, HarnessError, SharpnessSymbol, Verdict, VerificationReport,
    coifman_fefferman_experiment, fefferman_stein_experiment, local_decay_experiment, mixed_weak_experiment,
    modular_experiment, sharpness_experiment,
};
use sparse_harmonics::orlicz::YoungFunction;
use sparse_harmonics::weights::{ConstantsRow, Weight, WeightSpec, constants_table, default_bank, write_constants_csv};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::svg::decay_plot;
use crate::{CliError, ExitCode};

/// Contents of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub reports: Vec<VerificationReport>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    pub curve: Option<DecayCurve>,
    pub constants: Option<Vec<ConstantsRow>>,
}

impl RunOutput {
    /// 0 when every verdict holds, 4 if any is violated, otherwise 3 if any is degenerate.
    pub fn exit_code(&self) -> ExitCode {
        let v: Vec<Verdict> = self.report.reports.iter().map(|r| r.verdict).collect();
        if v.contains(&Verdict::Violated) {
            ExitCode::Violated
        } else if v.contains(&Verdict::Degenerate) {
            ExitCode::Degenerate
        } else {
            ExitCode::Ok
        }
    }

    /// Writes `report.json`, and `curves.csv` with `plot.svg` or `constants.csv`
    /// when the run produced them.
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        fs::create_dir_all(dir)?;
        let mut json = serde_json::to_string_pretty(&self.report).expect("report serialises");
        json.push('\n');
        fs::write(dir.join("report.json"), json)?;
        if let Some(curve) = &self.curve {
            let mut buf = Vec::new();
            curve.write_csv(&mut buf).map_err(|e| CliError::Io(e.into()))?;
            fs::write(dir.join("curves.csv"), buf)?;
            let title = format!("{:?} decay, L = {}", self.report.config.kind, self.report.config.l);
            fs::write(dir.join("plot.svg"), decay_plot(curve, &title))?;
        }
        if let Some(rows) = &self.constants {
            let mut buf = Vec::new();
            write_constants_csv(rows, &mut buf).map_err(|e| CliError::Io(e.into()))?;
            fs::write(dir.join("constants.csv"), buf)?;
        }
        Ok(())
    }
}

fn weights(specs: &[WeightSpec], d: Domain, count: usize) -> Result<Vec<Weight>, CliError> {
    let specs = if specs.is_empty() { vec![WeightSpec::One; count] } else { specs.to_vec() };
    specs
        .iter()
        .map(|s| s.weight(d).map_err(|e| CliError::Harness(e.into())))
        .collect()
}

fn check_support(fs: &[GridFunction], cfg: &ExperimentConfig, d: &Domain) -> Result<(), CliError> {
    let span = cfg.q0().span(d);
    if span.lo < 0 || span.hi > d.n_cells() as i64 {
        return Err(CliError::Config("q0 lies outside the domain".into()));
    }
    for (k, f) in fs.iter().enumerate() {
        let escapes = f
            .samples()
            .iter()
            .enumerate()
            .any(|(i, v)| *v != 0.0 && ((i as i64) < span.lo || (i as i64) >= span.hi));
        if escapes {
            return Err(CliError::Config(format!("function {k} is not supported in q0")));
        }
    }
    Ok(())
}

/// Runs the experiment described by `cfg`.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    cfg.validate()?;
    let ctx = Context {
        dimensional: cfg.dimensional,
        slack: cfg.slack,
        seed: cfg.seed,
    };
    let mut curve = None;
    let mut constants = None;
    let reports = match cfg.kind {
        ExperimentKind::Sharpness => {
            let (c, rep) = sharpness_experiment(cfg.l, cfg.symbol.unwrap_or(SharpnessSymbol::Log), &ctx)?;
            curve = Some(c);
            vec![rep]
        }
        ExperimentKind::Constants => {
            let d = cfg.domain()?;
            let bank = if cfg.weights.is_empty() { default_bank() } else { cfg.weights.clone() };
            let ps = cfg.ps.clone().unwrap_or_else(|| vec![1.0, 1.5, 2.0, 3.0]);
            constants = Some(constants_table(&bank, &ps, d).map_err(|e| CliError::Harness(e.into()))?);
            Vec::new()
        }
        kind => {
            let d = cfg.domain()?;
            let op = cfg.operator.expect("validated");
            let fs = cfg.sample_functions(d);
            let bs = cfg.sample_symbols(d);
            op.validate(bs.len())?;
            let m = fs.len();
            if kind == ExperimentKind::Decay {
                check_support(&fs, cfg, &d)?;
            }
            let input = CommutatorInput::new(op, bs, fs)?;
            match kind {
                ExperimentKind::Decay => {
                    let w = match cfg.weights.as_slice() {
                        [] => None,
                        [w] => Some(w.weight(d).map_err(|e| CliError::Harness(e.into()))?),
                        _ => return Err(CliError::Config("decay takes at most one weight".into())),
                    };
                    let comparator = cfg.comparator.unwrap_or(Comparator::MixedMin);
                    let (c, rep) = local_decay_experiment(&input, &cfg.q0(), &cfg.t_grid, comparator, w.as_ref(), &ctx)?;
                    curve = Some(c);
                    vec![rep]
                }
                ExperimentKind::Cf => {
                    let p = cfg.p.expect("validated");
                    if !(p > 0.0) {
                        return Err(CliError::Config(format!("p must be positive, got {p}")));
                    }
                    let ws = weights(&cfg.weights, d, 1)?;
                    ws.par_iter().map(|w| coifman_fefferman_experiment(&input, p, w, &ctx)).collect()
                }
                ExperimentKind::Mixed => {
                    let ws = weights(&cfg.weights, d, m)?;
                    let v = cfg.v.clone().unwrap_or(WeightSpec::One);
                    let v = v.weight(d).map_err(|e| CliError::Harness(e.into()))?;
                    mixed_weak_experiment(&input, &ws, &v, cfg.t.unwrap_or(2.0), &ctx)?
                }
                ExperimentKind::Fs => {
                    let ws = weights(&cfg.weights, d, m)?;
                    vec![fefferman_stein_experiment(&input, cfg.ps.as_ref().expect("validated"), &ws, &ctx)?]
                }
                ExperimentKind::Modular => {
                    let ws = weights(&cfg.weights, d, 1)?;
                    let phi = YoungFunction::new(cfg.phi.clone().expect("validated"));
                    ws.iter()
                        .map(|w| modular_experiment(&input, &phi, cfg.q.unwrap(), cfg.r.unwrap(), w, &ctx))
                        .collect::<Result<Vec<_>, HarnessError>>()?
                }
                _ => unreachable!(),
            }
        }
    };
    Ok(RunOutput {
        report: RunReport {
            config: cfg.clone(),
            reports,
        },
        curve,
        constants,
    })
}
