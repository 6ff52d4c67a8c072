//! Summary and boxplot tables from a results file.

use emowalk_core::eval::{ConditionSummary, StudySummary, Task};

use crate::manifest::Output;

pub const SUMMARY_COLUMNS: [&str; 10] = [
    "condition",
    "model",
    "auc_mean",
    "auc_std",
    "f1_mean",
    "f1_std",
    "acc_mean",
    "acc_std",
    "user_lift",
    "p_value",
];
pub const BOXPLOT_COLUMNS: [&str; 4] = ["condition", "model", "participant_id", "accuracy"];

fn fixed(v: f64) -> String {
    format!("{v:.3}")
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for r in rows {
        w.write_record(r).expect("writing to memory");
    }
    w.into_inner().expect("writing to memory")
}

fn summary_rows(groups: &[&ConditionSummary]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for g in groups {
        for m in &g.models {
            rows.push(vec![
                g.condition.to_string(),
                m.model.name().to_string(),
                fixed(m.auc.mean),
                fixed(m.auc.std),
                fixed(m.f1_weighted.mean),
                fixed(m.f1_weighted.std),
                fixed(m.accuracy.mean),
                fixed(m.accuracy.std),
                m.user_lift.map(fixed).unwrap_or_default(),
                m.p_value.map(fixed).unwrap_or_default(),
            ]);
        }
    }
    rows
}

fn boxplot_rows(groups: &[&ConditionSummary]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for g in groups {
        for m in &g.models {
            for (pid, acc) in g.participants.iter().zip(&m.user_accuracies) {
                rows.push(vec![
                    g.condition.to_string(),
                    m.model.name().to_string(),
                    pid.clone(),
                    format!("{acc:.6}"),
                ]);
            }
        }
    }
    rows
}

/// `summary_<task>.csv` and `boxplot_<task>.csv` for every task present.
pub fn render(summary: &StudySummary) -> Vec<Output> {
    let mut out = Vec::new();
    for task in [Task::Binary, Task::Ternary] {
        let groups: Vec<&ConditionSummary> = summary.groups.iter().filter(|g| g.task == task).collect();
        if groups.is_empty() {
            continue;
        }
        out.push((
            format!("summary_{task}.csv"),
            csv_bytes(&SUMMARY_COLUMNS, summary_rows(&groups)),
        ));
        out.push((
            format!("boxplot_{task}.csv"),
            csv_bytes(&BOXPLOT_COLUMNS, boxplot_rows(&groups)),
        ));
    }
    out
}
