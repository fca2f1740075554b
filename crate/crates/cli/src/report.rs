//! Report rendering: a line-oriented text form and a structured (JSON) form.

use std::fmt::Write as _;

use contact_pairs::catalog::ExampleInfo;
use contact_pairs::verdict::{CheckItem, Witness};

use crate::run::{RunReport, TaskResult, TaskStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Structured,
}

/// Full precision so witnesses can be pasted back as regression fixtures.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn point(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|x| num(*x)).collect();
    format!("[{}]", parts.join(", "))
}

fn witness_line(out: &mut String, tag: &str, w: &Witness) {
    let _ = write!(out, "      {tag}: point {}", point(&w.point));
    if let Some(t) = w.t {
        let _ = write!(out, " t {}", num(t));
    }
    let _ = writeln!(out, " value {}", num(w.value));
}

fn item_lines(out: &mut String, c: &CheckItem) {
    let _ = writeln!(
        out,
        "    FAIL {}: value {} threshold {} ({:?})",
        c.name,
        num(c.value),
        num(c.threshold),
        c.sense
    );
    if let Some(w) = &c.witness {
        witness_line(out, "witness", w);
    }
    if let Some(w) = &c.worst {
        witness_line(out, "worst", w);
    }
    if let Some(n) = &c.note {
        let _ = writeln!(out, "      note: {n}");
    }
}

fn status_word(s: TaskStatus) -> &'static str {
    match s {
        TaskStatus::Pass => "PASS",
        TaskStatus::Fail => "FAIL",
        TaskStatus::Inconclusive => "INCONCLUSIVE",
        TaskStatus::Error => "ERROR",
    }
}

pub fn render_text(report: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "cpairs {} schema {} seed {}",
        report.tool_version, report.schema_version, report.seed
    );
    for t in &report.tasks {
        let _ = writeln!(out, "task {} [{}] {}: {} ({})", t.index, t.kind, t.label, status_word(t.status), t.summary);
        if let Some(e) = &t.error {
            let _ = writeln!(out, "    error: {e}");
        }
        for c in &t.failures {
            item_lines(&mut out, c);
        }
        match &t.result {
            Some(TaskResult::Sweep(s)) => {
                let _ = writeln!(out, "    t, min volume, max volume, max Reeb residual");
                for r in &s.rows {
                    let _ = writeln!(
                        out,
                        "    {}, {}, {}, {}",
                        num(r.t),
                        num(r.min_volume_coeff),
                        num(r.max_volume_coeff),
                        num(r.max_reeb_residual)
                    );
                }
                if let Some(p) = &s.csv {
                    let _ = writeln!(out, "    csv written to {p}");
                }
            }
            Some(TaskResult::Jacobi(j)) => {
                for l in &j.levels {
                    let _ = writeln!(
                        out,
                        "    n={}: {{1,g}}-E.g {} jacobi {} X_1-E {}",
                        l.resolution,
                        num(l.unit_bracket_defect),
                        num(l.jacobi_identity_defect),
                        num(l.reeb_hamiltonian_defect)
                    );
                }
            }
            _ => {}
        }
    }
    let _ = writeln!(
        out,
        "exit code {} (elapsed {:.3} s)",
        report.exit_code, report.timing.total_seconds
    );
    out
}

pub fn render_structured(report: &RunReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

pub fn render(report: &RunReport, format: Format) -> String {
    match format {
        Format::Text => render_text(report),
        Format::Structured => render_structured(report),
    }
}

pub fn render_examples(list: &[ExampleInfo], format: Format) -> String {
    match format {
        Format::Structured => {
            let mut s = serde_json::to_string_pretty(list).expect("listing serializes");
            s.push('\n');
            s
        }
        Format::Text => list
            .iter()
            .map(|e| {
                format!(
                    "{:<22} {:<18} dim {:<2} type ({},{})  {}\n",
                    e.name,
                    format!("{:?}", e.kind),
                    e.dim,
                    e.pair_type.0,
                    e.pair_type.1,
                    e.description
                )
            })
            .collect(),
    }
}
