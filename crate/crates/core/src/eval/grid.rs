//! The full experiment grid and its result tables.

use serde::{Deserialize, Serialize};

use super::{nested_cv_many, EvalReport, EvalSettings, ExperimentConfig, ModelKind};
use crate::balance::BalanceKind;
use crate::error::Result;
use crate::seqdata::{Coords, MouseSequence};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub seed: u64,
    pub settings: EvalSettings,
    /// Baselines first (constant, forest), then recurrent cells ranked by F.
    pub rows: Vec<EvalReport>,
}

/// Baseline cells followed by the 36 recurrent cells.
pub fn grid_cells() -> Vec<ExperimentConfig> {
    let mut cells = vec![
        ExperimentConfig::constant_bad(),
        ExperimentConfig::rf(BalanceKind::Adasyn),
    ];
    cells.extend(ExperimentConfig::grid());
    cells
}

/// Orders reports the way the result table shows them.
pub fn rank(mut rows: Vec<EvalReport>) -> Vec<EvalReport> {
    let class = |r: &EvalReport| match r.config.model {
        ModelKind::ConstantBad => 0,
        ModelKind::Rf => 1,
        ModelKind::Bilstm => 2,
    };
    rows.sort_by(|a, b| {
        class(a)
            .cmp(&class(b))
            .then(
                b.metrics
                    .prf
                    .weighted
                    .f1
                    .total_cmp(&a.metrics.prf.weighted.f1),
            )
            .then(b.metrics.roc_auc.total_cmp(&a.metrics.roc_auc))
            .then(a.name.cmp(&b.name))
    });
    rows
}

pub fn run_grid(data: &[MouseSequence], settings: &EvalSettings, seed: u64) -> Result<GridReport> {
    run_cells(data, &grid_cells(), settings, seed)
}

pub fn run_cells(
    data: &[MouseSequence],
    cells: &[ExperimentConfig],
    settings: &EvalSettings,
    seed: u64,
) -> Result<GridReport> {
    let rows = nested_cv_many(data, cells, settings, seed)?;
    Ok(GridReport {
        seed,
        settings: settings.clone(),
        rows: rank(rows),
    })
}

fn describe(cfg: &ExperimentConfig) -> (String, String, String) {
    match cfg.model {
        ModelKind::ConstantBad => ("all abandonments bad".into(), "".into(), "".into()),
        ModelKind::Rf => (
            "RF, 10-dim features".into(),
            "".into(),
            cfg.balance.to_string(),
        ),
        ModelKind::Bilstm => {
            let input = match cfg.coords {
                Coords::Raw => "raw coords",
                Coords::Standardized => "standardized coords",
            };
            let time = if cfg.time { "yes" } else { "no" };
            (input.into(), time.into(), cfg.balance.to_string())
        }
    }
}

fn cell(v: f64, ci: (f64, f64)) -> String {
    format!("{v:.2} [{:.2}, {:.2}]", ci.0, ci.1)
}

/// Markdown table in the column order Precision, Recall, F-measure, ROC AUC.
pub fn render_markdown(rows: &[EvalReport]) -> String {
    let mut out = String::from(
        "| Input data | Time | Augmentation | Precision | Recall | F-measure | ROC AUC |\n\
         |---|---|---|---|---|---|---|\n",
    );
    for r in rows {
        let (input, time, aug) = describe(&r.config);
        let m = &r.metrics;
        let w = m.prf.weighted;
        out.push_str(&format!(
            "| {input} | {time} | {aug} | {} | {} | {} | {} |\n",
            cell(w.precision, m.intervals.precision),
            cell(w.recall, m.intervals.recall),
            cell(w.f1, m.intervals.f1),
            cell(m.roc_auc, m.intervals.roc_auc),
        ));
    }
    out
}

pub fn render_csv(rows: &[EvalReport]) -> String {
    let mut out = String::from(
        "config,precision,precision_lo,precision_hi,recall,recall_lo,recall_hi,\
         f1,f1_lo,f1_hi,roc_auc,roc_auc_lo,roc_auc_hi,n_events,n_models\n",
    );
    for r in rows {
        let m = &r.metrics;
        let w = m.prf.weighted;
        let i = &m.intervals;
        let vals = [
            w.precision,
            i.precision.0,
            i.precision.1,
            w.recall,
            i.recall.0,
            i.recall.1,
            w.f1,
            i.f1.0,
            i.f1.1,
            m.roc_auc,
            i.roc_auc.0,
            i.roc_auc.1,
        ];
        let nums: Vec<String> = vals.iter().map(|v| format!("{v:.6}")).collect();
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.name,
            nums.join(","),
            m.n_events,
            r.n_models
        ));
    }
    out
}
