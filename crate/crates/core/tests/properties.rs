use proptest::prelude::*;

use cursor_abandon::eval::metrics::{roc_auc, weighted_metrics, wilson_interval, Z95};
use cursor_abandon::eval::stratified_kfold;
use cursor_abandon::features::extract_features;
use cursor_abandon::features::FeatureVector;
use cursor_abandon::forest::{train_forest, ForestConfig, Node};
use cursor_abandon::seeds::rng_for;
use cursor_abandon::seqdata::{
    parse_dataset, serialize_dataset, standardize_width, validate_sequence, CursorEvent, Label,
    MouseSequence, Provenance, Rect, Screen,
};
use cursor_abandon::synth::{generate_dataset, GeneratorParams};

fn label(b: bool) -> Label {
    if b {
        Label::Good
    } else {
        Label::Bad
    }
}

prop_compose! {
    fn session()(
        width in 800.0..2000.0f64,
        height in 600.0..1200.0f64,
        pts in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64, 1.0..2000.0f64, prop::bool::weighted(0.1)), 2..40),
        noticed in any::<bool>(),
        usefulness in 1u8..=5,
    ) -> MouseSequence {
        let mut t = 0.0;
        let mut reach = 0.0;
        let events = pts
            .iter()
            .enumerate()
            .map(|(i, &(fx, fy, dt, scroll))| {
                t += dt.round();
                let (x, y) = ((fx * width).round(), (fy * height).round());
                // keep the first two events as moves so the session is valid
                if scroll && i >= 2 {
                    reach += 100.0;
                    CursorEvent::scroll(x, y, t, 0.0, reach)
                } else {
                    CursorEvent::mv(x, y, t)
                }
            })
            .collect();
        MouseSequence {
            session_id: "p".into(),
            screen: Screen { width, height },
            km_bbox: Rect::new((0.7 * width).round(), 100.0, (0.95 * width).round(), 500.0),
            noticed_km: noticed,
            usefulness,
            events,
            provenance: Provenance::Original,
            source_id: None,
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stratified_folds_partition_and_balance(
        flags in prop::collection::vec(any::<bool>(), 20..120),
        k in 2usize..6,
        seed in any::<u64>(),
    ) {
        let labels: Vec<Label> = flags.iter().map(|&b| label(b)).collect();
        let (bad, good) = labels.iter().fold((0, 0), |(b, g), l| if *l == Label::Bad { (b + 1, g) } else { (b, g + 1) });
        prop_assume!((bad == 0 || bad >= k) && (good == 0 || good >= k));
        let folds = stratified_kfold(&labels, k, &mut rng_for(seed, &[])).unwrap();
        let mut seen = vec![0; labels.len()];
        for f in &folds {
            for &i in f {
                seen[i] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        for class in [Label::Bad, Label::Good] {
            let per: Vec<usize> = folds.iter().map(|f| f.iter().filter(|&&i| labels[i] == class).count()).collect();
            prop_assert!(per.iter().max().unwrap() - per.iter().min().unwrap() <= 1);
        }
    }

    #[test]
    fn wire_format_round_trips(seed in any::<u64>(), n_good in 1usize..12, n_bad in 1usize..12) {
        let data = generate_dataset(&GeneratorParams { n_good, n_bad, rng_seed: seed, ..Default::default() }).unwrap();
        let text = serialize_dataset(&data);
        let parsed = parse_dataset(&text).unwrap();
        prop_assert!(parsed.rejects.is_empty());
        prop_assert_eq!(&parsed.sequences, &data);
        prop_assert_eq!(serialize_dataset(&parsed.sequences), text);
    }

    #[test]
    fn generated_sessions_are_valid(s in session()) {
        prop_assert!(validate_sequence(&s).is_valid());
    }

    #[test]
    fn standardization_scales_x_only_and_is_idempotent(s in session()) {
        let once = standardize_width(&s, 1280.0).unwrap();
        let twice = standardize_width(&once, 1280.0).unwrap();
        for (a, b) in once.events.iter().zip(&twice.events) {
            prop_assert!((a.x - b.x).abs() <= 1e-9 * a.x.abs().max(1.0));
        }
        let k = 1280.0 / s.screen.width;
        for (orig, st) in s.events.iter().zip(&once.events) {
            prop_assert!((st.x - orig.x * k).abs() < 1e-9);
            prop_assert_eq!(st.y, orig.y);
            prop_assert_eq!(st.t, orig.t);
        }
        // scaling to w1 then w2 equals scaling straight to w2
        let via = standardize_width(&standardize_width(&s, 960.0).unwrap(), 1280.0).unwrap();
        for (a, b) in via.events.iter().zip(&once.events) {
            prop_assert!((a.x - b.x).abs() < 1e-9);
        }
    }

    #[test]
    fn features_match_a_direct_recount(s in session()) {
        let f = extract_features(&s);
        let moves: Vec<&CursorEvent> = s.events.iter().filter(|e| e.is_move()).collect();
        let mut length = 0.0;
        for w in moves.windows(2) {
            length += ((w[1].x - w[0].x).powi(2) + (w[1].y - w[0].y).powi(2)).sqrt();
        }
        let xs: Vec<f64> = moves.iter().map(|e| e.x).collect();
        let ys: Vec<f64> = moves.iter().map(|e| e.y).collect();
        let span = |v: &[f64]| v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min);
        let mut entries = 0;
        let mut was_in = false;
        for e in &moves {
            let b = s.km_bbox;
            let now = e.x >= b.left && e.x <= b.right && e.y >= b.top && e.y <= b.bottom;
            if now && !was_in {
                entries += 1;
            }
            was_in = now;
        }
        let scrolls = s.events.len() - moves.len();
        prop_assert!((f.trajectory_length() - length).abs() < 1e-6);
        prop_assert_eq!(f.range_x(), span(&xs));
        prop_assert_eq!(f.range_y(), span(&ys));
        prop_assert_eq!(f.n_mousemoves(), moves.len() as f64);
        prop_assert_eq!(f.n_km_hovers(), entries as f64);
        prop_assert_eq!(f.n_scrolls(), scrolls as f64);
        prop_assert_eq!(f.dwell_time(), s.events.last().unwrap().t - s.events[0].t);
        let gaps: Vec<f64> = moves.windows(2).map(|w| w[1].t - w[0].t).collect();
        let mean_gap = gaps.iter().sum::<f64>() / gaps.len() as f64;
        prop_assert!((f.avg_time_offset() - mean_gap).abs() < 1e-9);
    }

    #[test]
    fn auc_equals_trapezoid_under_roc(
        scored in prop::collection::vec((0u8..20, any::<bool>()), 2..60),
    ) {
        let scores: Vec<f64> = scored.iter().map(|(s, _)| *s as f64 / 19.0).collect();
        let truth: Vec<Label> = scored.iter().map(|(_, b)| label(*b)).collect();
        let pos = truth.iter().filter(|l| **l == Label::Good).count();
        let neg = truth.len() - pos;
        prop_assume!(pos > 0 && neg > 0);
        // sweep thresholds from high to low, one ROC point per distinct score
        let mut thresholds = scores.clone();
        thresholds.sort_by(|a, b| b.total_cmp(a));
        thresholds.dedup();
        let mut pts = vec![(0.0, 0.0)];
        for th in thresholds {
            let tp = scores.iter().zip(&truth).filter(|(s, l)| **s >= th && **l == Label::Good).count();
            let fp = scores.iter().zip(&truth).filter(|(s, l)| **s >= th && **l == Label::Bad).count();
            pts.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
        }
        let area: f64 = pts.windows(2).map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0).sum();
        prop_assert!((roc_auc(&scores, &truth).unwrap() - area).abs() < 1e-12);
    }

    #[test]
    fn wilson_narrows_as_n_grows(p in 0.0..=1.0f64, n in 1usize..5000, extra in 1usize..5000) {
        let (a, b) = wilson_interval(p, n, Z95).unwrap();
        let (c, d) = wilson_interval(p, n + extra, Z95).unwrap();
        prop_assert!(d - c <= b - a + 1e-12);
        prop_assert!(a <= p + 1e-12 && p <= b + 1e-12);
    }

    #[test]
    fn root_split_maximizes_gini_decrease(
        pts in prop::collection::vec((0u8..30, any::<bool>()), 4..40),
    ) {
        let x: Vec<FeatureVector> = pts
            .iter()
            .map(|(v, _)| {
                let mut f = [0.0; 10];
                f[0] = *v as f64;
                FeatureVector(f)
            })
            .collect();
        let y: Vec<Label> = pts.iter().map(|(_, b)| label(*b)).collect();
        prop_assume!(y.contains(&Label::Bad) && y.contains(&Label::Good));
        let cfg = ForestConfig {
            n_trees: 1,
            max_depth: Some(1),
            features_per_split: 10,
            bootstrap: false,
            ..Default::default()
        };
        let forest = train_forest(&x, &y, &cfg).unwrap();
        let Node::Split { feature, threshold, gini_decrease, .. } = forest.trees[0].nodes[0] else {
            // a mixed node stays a leaf only when the feature is constant
            prop_assert!(pts.iter().all(|p| p.0 == pts[0].0));
            return Ok(());
        };
        prop_assert_eq!(feature, 0);
        let g = |sel: &[&Label]| {
            let n = sel.len() as f64;
            if n == 0.0 { return 0.0; }
            let p = sel.iter().filter(|l| ***l == Label::Good).count() as f64 / n;
            1.0 - p * p - (1.0 - p) * (1.0 - p)
        };
        let all: Vec<&Label> = y.iter().collect();
        let decrease_at = |th: f64| {
            let l: Vec<&Label> = x.iter().zip(&y).filter(|(f, _)| f.0[0] <= th).map(|(_, l)| l).collect();
            let r: Vec<&Label> = x.iter().zip(&y).filter(|(f, _)| f.0[0] > th).map(|(_, l)| l).collect();
            let n = y.len() as f64;
            g(&all) - l.len() as f64 / n * g(&l) - r.len() as f64 / n * g(&r)
        };
        let mut values: Vec<u8> = pts.iter().map(|p| p.0).collect();
        values.sort_unstable();
        values.dedup();
        let best = values.windows(2).map(|w| decrease_at((w[0] as f64 + w[1] as f64) / 2.0)).fold(f64::MIN, f64::max);
        prop_assert!((decrease_at(threshold) - best).abs() < 1e-12);
        prop_assert!((gini_decrease - best).abs() < 1e-12);
    }
}

/// Every prediction vector over every label vector of up to 8 items.
#[test]
fn weighted_metrics_match_brute_force() {
    for n in 1..=8usize {
        for t_bits in 0u32..(1 << n) {
            let truth: Vec<Label> = (0..n).map(|i| label(t_bits >> i & 1 == 1)).collect();
            for p_bits in 0u32..(1 << n) {
                let pred: Vec<Label> = (0..n).map(|i| label(p_bits >> i & 1 == 1)).collect();
                let r = weighted_metrics(&pred, &truth);
                let mut expect = [0.0; 3];
                for class in [Label::Bad, Label::Good] {
                    let tp = (0..n)
                        .filter(|&i| pred[i] == class && truth[i] == class)
                        .count() as f64;
                    let predicted = (0..n).filter(|&i| pred[i] == class).count() as f64;
                    let actual = (0..n).filter(|&i| truth[i] == class).count() as f64;
                    let p = if predicted > 0.0 { tp / predicted } else { 0.0 };
                    let rc = if actual > 0.0 { tp / actual } else { 0.0 };
                    let f = if p + rc > 0.0 {
                        2.0 * p * rc / (p + rc)
                    } else {
                        0.0
                    };
                    let w = actual / n as f64;
                    expect[0] += w * p;
                    expect[1] += w * rc;
                    expect[2] += w * f;
                }
                let got = [r.weighted.precision, r.weighted.recall, r.weighted.f1];
                for k in 0..3 {
                    assert!(
                        (got[k] - expect[k]).abs() < 1e-12,
                        "n={n} truth={t_bits:b} pred={p_bits:b}"
                    );
                }
            }
        }
    }
}
