use cursor_abandon::balance::BalanceKind;
use cursor_abandon::eval::grid::{render_markdown, run_cells};
use cursor_abandon::eval::{nested_cv, EvalSettings, ExperimentConfig};
use cursor_abandon::seqdata::Coords;
use cursor_abandon::synth::{generate_dataset, GeneratorParams};

fn small_settings() -> EvalSettings {
    let mut s = EvalSettings::default();
    s.model.units = 2;
    s.model.num_layers = 1;
    s.train.max_epochs = 2;
    s.train.patience = 1;
    s.forest.n_trees = 8;
    s
}

#[test]
fn every_forest_cell_is_leak_free_and_pools_535_events() {
    let data = generate_dataset(&GeneratorParams::default()).unwrap();
    let settings = small_settings();
    for kind in BalanceKind::GRID {
        let r = nested_cv(&data, &ExperimentConfig::rf(kind), &settings, 3).unwrap();
        assert_eq!(r.total_leaked(), 0, "{kind}");
        assert_eq!(r.metrics.n_events, 535);
        assert_eq!(r.n_models, 50);
        assert_eq!(r.per_fold.len(), 10);
        let m = r.metrics.prf.weighted;
        for (v, (lo, hi)) in [
            (m.precision, r.metrics.intervals.precision),
            (m.recall, r.metrics.intervals.recall),
            (m.f1, r.metrics.intervals.f1),
        ] {
            assert!(lo <= v && v <= hi, "{kind}: {v} outside [{lo}, {hi}]");
        }
    }
}

#[test]
fn recurrent_cells_run_and_repeat_exactly() {
    let data = generate_dataset(&GeneratorParams {
        n_good: 40,
        n_bad: 20,
        rng_seed: 8,
        ..Default::default()
    })
    .unwrap();
    let settings = small_settings();
    let cells = [
        ExperimentConfig::bilstm(Coords::Raw, false, BalanceKind::Smote),
        ExperimentConfig::bilstm(Coords::Standardized, true, BalanceKind::ClassWeighted),
        ExperimentConfig::bilstm(Coords::Standardized, true, BalanceKind::TrimmingOnly),
    ];
    let a = run_cells(&data, &cells, &settings, 1).unwrap();
    let b = run_cells(&data, &cells, &settings, 1).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.rows.len(), 3);
    for r in &a.rows {
        assert_eq!(r.total_leaked(), 0);
        assert!(r
            .jobs
            .iter()
            .all(|j| j.best_epoch.is_some_and(|e| (1..=2).contains(&e))));
        assert!(r.pooled_scores.iter().all(|p| (0.0..=1.0).contains(p)));
    }
    let md = render_markdown(&a.rows);
    assert_eq!(md.lines().count(), 5);

    // a different seed moves the folds and the scores
    let c = run_cells(&data, &cells[..1], &settings, 2).unwrap();
    assert_ne!(
        c.rows[0].pooled_scores,
        a.rows
            .iter()
            .find(|r| r.config == cells[0])
            .unwrap()
            .pooled_scores
    );
}
