//! Ten hand-crafted interaction features for the tree baseline.

use serde::{Deserialize, Serialize};

use crate::seqdata::{EventKind, Label, MouseSequence, Provenance};

pub const FEATURE_NAMES: [&str; 10] = [
    "dwell_time",
    "avg_time_offset",
    "n_mousemoves",
    "n_km_hovers",
    "n_scrolls",
    "trajectory_length",
    "range_x",
    "range_y",
    "scroll_reach_x",
    "scroll_reach_y",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; 10]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dwell_time(&self) -> f64 {
        self.0[0]
    }
    pub fn avg_time_offset(&self) -> f64 {
        self.0[1]
    }
    pub fn n_mousemoves(&self) -> f64 {
        self.0[2]
    }
    pub fn n_km_hovers(&self) -> f64 {
        self.0[3]
    }
    pub fn n_scrolls(&self) -> f64 {
        self.0[4]
    }
    pub fn trajectory_length(&self) -> f64 {
        self.0[5]
    }
    pub fn range_x(&self) -> f64 {
        self.0[6]
    }
    pub fn range_y(&self) -> f64 {
        self.0[7]
    }
    pub fn scroll_reach_x(&self) -> f64 {
        self.0[8]
    }
    pub fn scroll_reach_y(&self) -> f64 {
        self.0[9]
    }
}

/// A feature vector that remembers where it came from, so it can take part
/// in class balancing like a represented sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledFeatures {
    pub features: FeatureVector,
    pub label: Label,
    pub source_id: String,
    pub provenance: Provenance,
}

impl LabeledFeatures {
    pub fn from_sequence(seq: &MouseSequence) -> Self {
        LabeledFeatures {
            features: extract_features(seq),
            label: seq.label(),
            source_id: seq.origin_id().to_string(),
            provenance: seq.provenance,
        }
    }
}

pub fn extract_features(seq: &MouseSequence) -> FeatureVector {
    let dwell = match (seq.events.first(), seq.events.last()) {
        (Some(a), Some(b)) => b.t - a.t,
        _ => 0.0,
    };
    let moves: Vec<_> = seq.moves().collect();
    let n_moves = moves.len();
    let avg_offset = if n_moves > 1 {
        (moves[n_moves - 1].t - moves[0].t) / (n_moves - 1) as f64
    } else {
        0.0
    };

    let mut hovers = 0usize;
    let mut inside = false;
    let mut length = 0.0;
    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for (i, e) in moves.iter().enumerate() {
        let now_inside = seq.km_bbox.contains(e.x, e.y);
        if now_inside && !inside {
            hovers += 1;
        }
        inside = now_inside;
        if i > 0 {
            length += (e.x - moves[i - 1].x).hypot(e.y - moves[i - 1].y);
        }
        min_x = min_x.min(e.x);
        max_x = max_x.max(e.x);
        min_y = min_y.min(e.y);
        max_y = max_y.max(e.y);
    }
    let (range_x, range_y) = if n_moves > 0 {
        (max_x - min_x, max_y - min_y)
    } else {
        (0.0, 0.0)
    };

    let mut n_scrolls = 0usize;
    let (mut reach_x, mut reach_y) = (0.0f64, 0.0f64);
    for e in seq.events.iter().filter(|e| e.kind == EventKind::Scroll) {
        n_scrolls += 1;
        reach_x = reach_x.max(e.scroll_x.unwrap_or(0.0));
        reach_y = reach_y.max(e.scroll_y.unwrap_or(0.0));
    }

    FeatureVector([
        dwell,
        avg_offset,
        n_moves as f64,
        hovers as f64,
        n_scrolls as f64,
        length,
        range_x,
        range_y,
        reach_x,
        reach_y,
    ])
}

pub fn csv_header() -> String {
    let mut cols = vec!["session_id"];
    cols.extend(FEATURE_NAMES);
    cols.push("label");
    cols.join(",")
}

pub fn csv_row(seq: &MouseSequence, f: &FeatureVector) -> String {
    let mut cols = vec![seq.session_id.clone()];
    cols.extend(f.0.iter().map(|v| v.to_string()));
    cols.push(seq.label().to_string());
    cols.join(",")
}
