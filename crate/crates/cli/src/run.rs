//! Executes validated tasks in declaration order and assembles the report.

use std::path::Path;
use std::time::Instant;

use contact_pairs::contact::{
    assess_contact_pair, cartan_class, verify_single_linear_deformation, ClassReport, ContactPair,
    ContactPairCertificate, SingleDeformationReport,
};
use contact_pairs::deformation::{sweep, verify_converse, verify_forward, SweepRow};
use contact_pairs::expr::Expr;
use contact_pairs::jacobi::{JacobiSide, ScalarField, Side};
use contact_pairs::manifold::Sampling;
use contact_pairs::verdict::{CheckItem, Probe, Sense, Status, TheoremVerdict, Verdict};
use serde::Serialize;

use crate::config::{JacobiTask, RunConfig, Task, TaskInput, TaskKind, SCHEMA_VERSION};

/// Minimum defect reduction per grid halving for second-order stencils.
pub const CONVERGENCE_RATIO: f64 = 3.5;

/// Defects below this are roundoff; their ratios carry no information.
const ROUNDOFF: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskStatus {
    Pass,
    Fail,
    Inconclusive,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JacobiLevel {
    pub resolution: usize,
    pub nodes: usize,
    pub leaf_dim: usize,
    pub max_system_residual: f64,
    pub antisymmetry: f64,
    pub reeb_hamiltonian_defect: f64,
    pub unit_bracket_defect: f64,
    pub jacobi_identity_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JacobiReport {
    pub side: Side,
    pub leaf_axes: Vec<usize>,
    pub functions: Vec<String>,
    pub levels: Vec<JacobiLevel>,
    pub checks: Vec<CheckItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// `t` values where the volume coefficient takes both signs.
    pub sign_changes: Vec<f64>,
    pub csv: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", content = "data", rename_all = "snake_case")]
pub enum TaskResult {
    Class(ClassReport),
    Certificate(ContactPairCertificate),
    Theorem(TheoremVerdict),
    SingleDeformation(SingleDeformationReport),
    Jacobi(JacobiReport),
    Sweep(SweepReport),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskReport {
    pub index: usize,
    pub kind: &'static str,
    pub label: String,
    pub status: TaskStatus,
    pub summary: String,
    /// Failed items, each with its first offending probe and its worst probe.
    pub failures: Vec<CheckItem>,
    pub error: Option<String>,
    pub result: Option<TaskResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub total_seconds: f64,
    pub task_seconds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub seed: u64,
    pub tol: Option<f64>,
    pub sampling: Sampling,
    pub exit_code: u8,
    pub tasks: Vec<TaskReport>,
    /// Wall-clock data; the only part of a report that varies between runs.
    pub timing: Timing,
}

/// Exit codes: 2 (error) beats 1 (falsified) beats 3 (inconclusive) beats 0.
pub fn exit_code(statuses: impl IntoIterator<Item = TaskStatus>) -> u8 {
    let mut code = 0;
    for s in statuses {
        code = match (code, s) {
            (_, TaskStatus::Error) | (2, _) => 2,
            (_, TaskStatus::Fail) | (1, _) => 1,
            (_, TaskStatus::Inconclusive) | (3, _) => 3,
            _ => 0,
        };
    }
    code
}

pub fn run(config: &RunConfig) -> RunReport {
    let start = Instant::now();
    let mut tasks = Vec::with_capacity(config.tasks.len());
    let mut task_seconds = Vec::with_capacity(config.tasks.len());
    for (index, task) in config.tasks.iter().enumerate() {
        let t0 = Instant::now();
        tasks.push(run_task(config, index, task));
        task_seconds.push(t0.elapsed().as_secs_f64());
    }
    RunReport {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION"),
        seed: config.seed,
        tol: config.tol,
        sampling: config.sampling,
        exit_code: exit_code(tasks.iter().map(|t| t.status)),
        tasks,
        timing: Timing {
            total_seconds: start.elapsed().as_secs_f64(),
            task_seconds,
        },
    }
}

struct Outcome {
    status: TaskStatus,
    summary: String,
    failures: Vec<CheckItem>,
    result: TaskResult,
}

fn run_task(config: &RunConfig, index: usize, task: &Task) -> TaskReport {
    let outcome = match execute(config, task) {
        Ok(o) => o,
        Err(e) => {
            return TaskReport {
                index,
                kind: task.kind.name(),
                label: task.label.clone(),
                status: TaskStatus::Error,
                summary: "error".into(),
                failures: Vec::new(),
                error: Some(e),
                result: None,
            }
        }
    };
    TaskReport {
        index,
        kind: task.kind.name(),
        label: task.label.clone(),
        status: outcome.status,
        summary: outcome.summary,
        failures: outcome.failures,
        error: None,
        result: Some(outcome.result),
    }
}

fn status_of(failed: bool, marginal: bool) -> TaskStatus {
    match (failed, marginal) {
        (_, true) => TaskStatus::Inconclusive,
        (true, false) => TaskStatus::Fail,
        (false, false) => TaskStatus::Pass,
    }
}

fn err(e: impl ToString) -> String {
    e.to_string()
}

fn execute(config: &RunConfig, task: &Task) -> Result<Outcome, String> {
    match (&task.input, task.kind) {
        (TaskInput::Classify { model, alpha }, _) => {
            let settings = config.settings(model);
            let report = cartan_class(model, alpha, &settings).map_err(err)?;
            let marginal = report.min_nondegeneracy <= 10.0 * settings.tol
                || (report.max_power_residual > 0.0 && report.max_power_residual >= settings.tol / 10.0);
            let failures = match &report.witness {
                Some(w) => vec![CheckItem {
                    name: "constant class".into(),
                    status: Status::Fail,
                    value: w.value,
                    threshold: f64::NAN,
                    sense: Sense::MustVanish,
                    witness: Some(w.clone()),
                    worst: Some(w.clone()),
                    note: Some(format!("k = {} at the first sample; value is k at the witness, -1 when no k qualifies", report.k)),
                }],
                None => Vec::new(),
            };
            Ok(Outcome {
                status: status_of(!report.constant, report.constant && marginal),
                summary: if report.constant {
                    format!("class {} (k = {}) on {} points", report.class(), report.k, report.points)
                } else {
                    "class is not constant".into()
                },
                failures,
                result: TaskResult::Class(report),
            })
        }
        (TaskInput::Pair { model, alpha, beta, k, l }, _) => {
            let settings = config.settings(model);
            let pair = ContactPair::new(model, alpha.clone(), beta.clone(), *k, *l).map_err(err)?;
            let cert = assess_contact_pair(model, &pair, &settings, None, "").map_err(err)?;
            let failures: Vec<CheckItem> = cert.checks.iter().filter(|c| c.failed()).cloned().collect();
            let marginal = if failures.is_empty() {
                cert.checks.iter().any(CheckItem::is_marginal)
            } else {
                failures.iter().all(CheckItem::is_marginal)
            };
            Ok(Outcome {
                status: status_of(!failures.is_empty(), marginal),
                summary: match failures.first() {
                    None => format!("contact pair of type ({k},{l}), orientation {:?}", cert.orientation),
                    Some(f) => format!("not a contact pair of type ({k},{l}): {} fails", f.name),
                },
                failures,
                result: TaskResult::Certificate(cert),
            })
        }
        (TaskInput::Family(family), TaskKind::DeformForward | TaskKind::DeformConverse) => {
            let settings = config.settings(&family.model);
            let verdict = if task.kind == TaskKind::DeformForward {
                verify_forward(family, &task.t_grid, &settings)
            } else {
                verify_converse(family, &task.t_grid, &settings)
            }
            .map_err(err)?;
            Ok(theorem_outcome(verdict))
        }
        (TaskInput::Family(family), TaskKind::Sweep) => {
            let settings = config.settings(&family.model);
            let rows = sweep(family, &task.t_grid, &settings).map_err(err)?;
            let csv = match &task.output {
                Some(path) => {
                    write_sweep_csv(path, &rows).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
                    Some(path.display().to_string())
                }
                None => None,
            };
            let sign_changes: Vec<f64> = rows
                .iter()
                .filter(|r| r.min_volume_coeff < 0.0 && r.max_volume_coeff > 0.0)
                .map(|r| r.t)
                .collect();
            Ok(Outcome {
                status: TaskStatus::Pass,
                summary: format!(
                    "{} t values, volume changes sign at {} of them",
                    rows.len(),
                    sign_changes.len()
                ),
                failures: Vec::new(),
                result: TaskResult::Sweep(SweepReport { rows, sign_changes, csv }),
            })
        }
        (TaskInput::Single { model, alpha0, alpha }, _) => {
            let settings = config.settings(model);
            let report =
                verify_single_linear_deformation(model, alpha0, alpha, &task.t_grid, &settings).map_err(err)?;
            let failures: Vec<CheckItem> = report
                .condition_ii
                .iter()
                .chain(&report.condition_i)
                .filter(|c| c.failed())
                .cloned()
                .collect();
            let decisive = report.condition_ii.iter().chain(&report.condition_i);
            let marginal = decisive.clone().any(CheckItem::is_marginal);
            Ok(Outcome {
                status: status_of(!report.agree, marginal),
                summary: format!(
                    "condition (i) {}, condition (ii) {}, equivalence {}",
                    holds(report.i_holds),
                    holds(report.ii_holds),
                    if report.agree { "confirmed" } else { "violated" }
                ),
                failures,
                result: TaskResult::SingleDeformation(report),
            })
        }
        (TaskInput::Jacobi(j), _) => {
            let tol = config.settings(&j.model).tol;
            let report = jacobi_report(j, tol)?;
            let failures: Vec<CheckItem> = report.checks.iter().filter(|c| c.failed()).cloned().collect();
            // ratio checks are not residuals, so only vanishing checks can be marginal
            let residual_marginal = |c: &CheckItem| c.sense == Sense::MustVanish && c.is_marginal();
            let marginal = if failures.is_empty() {
                report.checks.iter().any(residual_marginal)
            } else {
                failures.iter().all(residual_marginal)
            };
            Ok(Outcome {
                status: status_of(!failures.is_empty(), marginal),
                summary: format!(
                    "{} side, leaf dimension {}, {} resolutions",
                    match j.side {
                        Side::Alpha => "alpha",
                        Side::Beta => "beta",
                    },
                    report.levels.first().map_or(0, |l| l.leaf_dim),
                    report.levels.len()
                ),
                failures,
                result: TaskResult::Jacobi(report),
            })
        }
        (TaskInput::Family(_), kind) => Err(format!("task kind `{}` does not take a family", kind.name())),
    }
}

fn holds(b: bool) -> &'static str {
    if b {
        "holds"
    } else {
        "fails"
    }
}

fn theorem_outcome(verdict: TheoremVerdict) -> Outcome {
    let failures: Vec<CheckItem> = match verdict.verdict {
        Verdict::Holds => Vec::new(),
        Verdict::NotApplicable => verdict.hypotheses.iter().filter(|c| c.failed()).cloned().collect(),
        Verdict::Falsified => verdict.failed_conclusions().cloned().collect(),
    };
    let inconclusive = verdict.is_inconclusive();
    let status = match (verdict.verdict, inconclusive) {
        (_, true) => TaskStatus::Inconclusive,
        (Verdict::Holds, false) => TaskStatus::Pass,
        _ => TaskStatus::Fail,
    };
    let summary = match verdict.verdict {
        Verdict::Holds => format!(
            "holds: {} hypotheses and {} conclusions pass",
            verdict.hypotheses.len(),
            verdict.conclusions.len()
        ),
        Verdict::NotApplicable => format!(
            "not applicable: hypothesis `{}` fails",
            failures.first().map_or("", |c| c.name.as_str())
        ),
        Verdict::Falsified => format!("falsified: {} conclusion(s) fail", failures.len()),
    };
    Outcome {
        status,
        summary,
        failures,
        result: TaskResult::Theorem(verdict),
    }
}

fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn jacobi_report(j: &JacobiTask, tol: f64) -> Result<JacobiReport, String> {
    let [f, g, h] = j.functions.clone().map(ScalarField::Expr);
    let mut levels = Vec::new();
    let mut checks = Vec::new();
    for &res in &j.resolutions {
        let side = JacobiSide::new(&j.model, &j.pair, j.side, j.grid(res), tol).map_err(err)?;
        let fg = side.jacobi_bracket(&f, &g).map_err(err)?;
        let gf = side.jacobi_bracket(&g, &f).map_err(err)?;
        let (ScalarField::Grid(fg), ScalarField::Grid(gf)) = (&fg, &gf) else {
            return Err("bracket did not return grid values".into());
        };
        let prefix = format!("n={res}: ");
        let anti = CheckItem::must_vanish(
            format!("{prefix}antisymmetry"),
            0.0,
            side.nodes().iter().zip(fg.iter().zip(gf)).map(|(p, (a, b))| Probe::new(p, None, (a + b).abs())),
        );
        let x1 = side.hamiltonian_field(&ScalarField::Expr(Expr::one())).map_err(err)?;
        let reeb = CheckItem::must_vanish(
            format!("{prefix}X_1 = E"),
            tol,
            side.nodes().iter().zip(x1.values.iter().zip(side.reeb())).map(|(p, (x, e))| {
                Probe::new(p, None, x.iter().zip(e).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            }),
        );
        levels.push(JacobiLevel {
            resolution: res,
            nodes: side.len(),
            leaf_dim: side.leaf_dim(),
            max_system_residual: side.max_system_residual(),
            antisymmetry: anti.value,
            reeb_hamiltonian_defect: reeb.value,
            unit_bracket_defect: side.unit_bracket_defect(&g).map_err(err)?,
            jacobi_identity_defect: side.jacobi_identity_defect(&f, &g, &h).map_err(err)?,
        });
        checks.push(anti);
        checks.push(reeb);
    }
    if levels.len() < 2 {
        checks.push(CheckItem::skipped("convergence", "needs at least two resolutions"));
    }
    for w in levels.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        for (name, da, db) in [
            ("{1,g} - E.g", a.unit_bracket_defect, b.unit_bracket_defect),
            ("Jacobi identity", a.jacobi_identity_defect, b.jacobi_identity_defect),
        ] {
            let label = format!("{name} ratio {}->{}", a.resolution, b.resolution);
            let expected = CONVERGENCE_RATIO * (b.resolution as f64 / a.resolution as f64 / 2.0).powi(2);
            checks.push(if da < ROUNDOFF && db < ROUNDOFF {
                CheckItem::skipped(label, "both defects are at roundoff")
            } else {
                CheckItem::scalar(label, Sense::MustExceed, da / db, expected)
                    .with_note(format!("defects {da:.6e} and {db:.6e}"))
            });
        }
    }
    Ok(JacobiReport {
        side: j.side,
        leaf_axes: j.leaf_axes.clone(),
        functions: j.functions.iter().map(ToString::to_string).collect(),
        levels,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_code_priority() {
        use TaskStatus::*;
        assert_eq!(exit_code([]), 0);
        assert_eq!(exit_code([Pass, Pass]), 0);
        assert_eq!(exit_code([Pass, Inconclusive]), 3);
        assert_eq!(exit_code([Inconclusive, Fail, Pass]), 1);
        assert_eq!(exit_code([Fail, Error, Inconclusive]), 2);
    }
}
