//! Cursor trajectory data model, line-delimited JSON ingestion, validation,
//! and the fixed-length representations fed to the sequence classifier.
//!
//! A session is a list of [`CursorEvent`]s recorded while one SERP was open.
//! Move events carry the cursor position, scroll events additionally carry
//! the page scroll offsets. Representations are built from move events only.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sequences are truncated to (or padded up to) this many timesteps.
pub const MAX_LEN: usize = 50;

/// Screen width every standardized session is rescaled to.
pub const TARGET_WIDTH: f64 = 1280.0;

/// Pixels a coordinate may overshoot the screen before it is rejected.
pub const BOUNDS_TOLERANCE: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Bad,
    Good,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Bad, Label::Good];

    /// Good abandonment: the user noticed the knowledge module and rated it 4 or 5.
    pub fn from_answers(noticed_km: bool, usefulness: u8) -> Label {
        if noticed_km && usefulness >= 4 {
            Label::Good
        } else {
            Label::Bad
        }
    }

    pub fn index(self) -> usize {
        match self {
            Label::Bad => 0,
            Label::Good => 1,
        }
    }

    /// 1.0 for good, 0.0 for bad.
    pub fn target(self) -> f64 {
        self.index() as f64
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Bad => "bad",
            Label::Good => "good",
        }
    }

    pub fn other(self) -> Label {
        match self {
            Label::Bad => Label::Good,
            Label::Good => Label::Bad,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Move,
    Scroll,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CursorEvent {
    pub x: f64,
    pub y: f64,
    /// Milliseconds since session start.
    pub t: f64,
    pub kind: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scroll_x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scroll_y: Option<f64>,
}

impl CursorEvent {
    pub fn mv(x: f64, y: f64, t: f64) -> Self {
        CursorEvent {
            x,
            y,
            t,
            kind: EventKind::Move,
            scroll_x: None,
            scroll_y: None,
        }
    }

    pub fn scroll(x: f64, y: f64, t: f64, scroll_x: f64, scroll_y: f64) -> Self {
        CursorEvent {
            x,
            y,
            t,
            kind: EventKind::Scroll,
            scroll_x: Some(scroll_x),
            scroll_y: Some(scroll_y),
        }
    }

    pub fn is_move(&self) -> bool {
        self.kind == EventKind::Move
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Screen {
    pub width: f64,
    pub height: f64,
}

/// Axis-aligned rectangle in page pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub left: f64,
    pub top: f64,
    pub right: f64,
    pub bottom: f64,
}

impl Rect {
    pub fn new(left: f64, top: f64, right: f64, bottom: f64) -> Self {
        Rect {
            left,
            top,
            right,
            bottom,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.left && x <= self.right && y >= self.top && y <= self.bottom
    }

    /// Euclidean distance from a point to the closest point of the rectangle.
    pub fn distance(&self, x: f64, y: f64) -> f64 {
        let cx = x.clamp(self.left, self.right);
        let cy = y.clamp(self.top, self.bottom);
        (x - cx).hypot(y - cy)
    }

    fn is_well_formed(&self) -> bool {
        [self.left, self.top, self.right, self.bottom]
            .iter()
            .all(|v| v.is_finite())
            && self.left <= self.right
            && self.top <= self.bottom
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    #[default]
    Original,
    Resampled,
    Augmented,
}

impl Provenance {
    pub fn is_original(&self) -> bool {
        *self == Provenance::Original
    }
}

/// One abandoned-query session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MouseSequence {
    pub session_id: String,
    pub screen: Screen,
    pub km_bbox: Rect,
    pub noticed_km: bool,
    pub usefulness: u8,
    pub events: Vec<CursorEvent>,
    #[serde(default, skip_serializing_if = "Provenance::is_original")]
    pub provenance: Provenance,
    /// Session the item was derived from; `None` for originals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_id: Option<String>,
}

impl MouseSequence {
    pub fn label(&self) -> Label {
        Label::from_answers(self.noticed_km, self.usefulness)
    }

    /// The original session this item descends from (itself, for originals).
    pub fn origin_id(&self) -> &str {
        self.source_id.as_deref().unwrap_or(&self.session_id)
    }

    pub fn moves(&self) -> impl Iterator<Item = &CursorEvent> + '_ {
        self.events.iter().filter(|e| e.is_move())
    }

    pub fn move_count(&self) -> usize {
        self.moves().count()
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("sequence serializes")
    }
}

/// Why a sequence failed validation.
#[derive(Debug, Clone, PartialEq)]
pub enum Invalid {
    TooFewEvents(usize),
    NonMonotoneTimestamps { index: usize },
    NegativeTimestamp { index: usize },
    CoordinateOutOfBounds { index: usize },
    ScrollOffsets { index: usize },
    DegenerateScreen,
    KmBboxMalformed,
    UsefulnessOutOfRange(u8),
}

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Invalid::TooFewEvents(n) => write!(f, "too few events ({n} move events, need 2)"),
            Invalid::NonMonotoneTimestamps { index } => {
                write!(f, "non-monotone timestamps at event {index}")
            }
            Invalid::NegativeTimestamp { index } => {
                write!(f, "negative timestamp at event {index}")
            }
            Invalid::CoordinateOutOfBounds { index } => {
                write!(f, "coordinate out of bounds at event {index}")
            }
            Invalid::ScrollOffsets { index } => {
                write!(
                    f,
                    "scroll offsets must be present exactly on scroll events (event {index})"
                )
            }
            Invalid::DegenerateScreen => f.write_str("degenerate screen size"),
            Invalid::KmBboxMalformed => f.write_str("km_bbox malformed or outside the screen"),
            Invalid::UsefulnessOutOfRange(u) => write!(f, "usefulness {u} outside 1-5"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Verdict {
    pub reasons: Vec<Invalid>,
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        self.reasons.is_empty()
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return f.write_str("valid");
        }
        let parts: Vec<String> = self.reasons.iter().map(|r| r.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

pub fn validate_sequence(seq: &MouseSequence) -> Verdict {
    let mut reasons = Vec::new();
    let Screen { width, height } = seq.screen;
    let screen_ok = width.is_finite() && height.is_finite() && width > 0.0 && height > 0.0;
    if !screen_ok {
        reasons.push(Invalid::DegenerateScreen);
    }
    let moves = seq.move_count();
    if moves < 2 {
        reasons.push(Invalid::TooFewEvents(moves));
    }
    if !(1..=5).contains(&seq.usefulness) {
        reasons.push(Invalid::UsefulnessOutOfRange(seq.usefulness));
    }

    let mut prev_t = f64::NEG_INFINITY;
    let mut monotone_reported = false;
    let mut bounds_reported = false;
    for (index, e) in seq.events.iter().enumerate() {
        if !(e.t >= 0.0) {
            reasons.push(Invalid::NegativeTimestamp { index });
        }
        if e.t < prev_t && !monotone_reported {
            reasons.push(Invalid::NonMonotoneTimestamps { index });
            monotone_reported = true;
        }
        prev_t = prev_t.max(e.t);
        let in_bounds = e.x >= -BOUNDS_TOLERANCE
            && e.y >= -BOUNDS_TOLERANCE
            && (!screen_ok
                || (e.x <= width + BOUNDS_TOLERANCE && e.y <= height + BOUNDS_TOLERANCE));
        if !in_bounds && !bounds_reported {
            reasons.push(Invalid::CoordinateOutOfBounds { index });
            bounds_reported = true;
        }
        let has_scroll = e.scroll_x.is_some() && e.scroll_y.is_some();
        let has_any = e.scroll_x.is_some() || e.scroll_y.is_some();
        let scroll_ok = match e.kind {
            EventKind::Scroll => has_scroll,
            EventKind::Move => !has_any,
        };
        if !scroll_ok {
            reasons.push(Invalid::ScrollOffsets { index });
        }
    }

    let b = seq.km_bbox;
    let inside = screen_ok
        && b.left >= 0.0
        && b.top >= 0.0
        && b.right <= width + BOUNDS_TOLERANCE
        && b.bottom <= height + BOUNDS_TOLERANCE;
    if !b.is_well_formed() || !inside {
        reasons.push(Invalid::KmBboxMalformed);
    }
    Verdict { reasons }
}

/// A rejected input line.
#[derive(Debug, Clone, PartialEq)]
pub struct LineError {
    /// 1-based line number.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for LineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub sequences: Vec<MouseSequence>,
    pub rejects: Vec<LineError>,
}

impl Dataset {
    /// (bad, good) counts.
    pub fn class_counts(&self) -> (usize, usize) {
        class_counts(&self.sequences)
    }
}

pub fn class_counts(seqs: &[MouseSequence]) -> (usize, usize) {
    let good = seqs.iter().filter(|s| s.label() == Label::Good).count();
    (seqs.len() - good, good)
}

/// Parses line-delimited JSON sessions. Invalid lines are collected in
/// [`Dataset::rejects`]; the call only fails when nothing valid remains.
pub fn parse_dataset(content: &str) -> Result<Dataset> {
    let mut out = Dataset::default();
    let mut seen = HashSet::new();
    for (i, raw) in content.lines().enumerate() {
        let line = i + 1;
        let text = raw.trim();
        if text.is_empty() {
            continue;
        }
        let seq: MouseSequence = match serde_json::from_str(text) {
            Ok(s) => s,
            Err(e) => {
                out.rejects.push(LineError {
                    line,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let verdict = validate_sequence(&seq);
        if !verdict.is_valid() {
            out.rejects.push(LineError {
                line,
                message: verdict.to_string(),
            });
            continue;
        }
        if !seen.insert(seq.session_id.clone()) {
            out.rejects.push(LineError {
                line,
                message: format!("duplicate session_id {:?}", seq.session_id),
            });
            continue;
        }
        out.sequences.push(seq);
    }
    if out.sequences.is_empty() {
        return Err(Error::EmptyDataset(
            out.rejects.iter().map(|r| r.to_string()).collect(),
        ));
    }
    Ok(out)
}

pub fn serialize_dataset(seqs: &[MouseSequence]) -> String {
    let mut s = String::new();
    for seq in seqs {
        s.push_str(&seq.to_json_line());
        s.push('\n');
    }
    s
}

/// Rescales every horizontal quantity so the screen is `target_width` wide.
/// Vertical coordinates are left alone: the SERP layout is left-aligned.
pub fn standardize_width(seq: &MouseSequence, target_width: f64) -> Result<MouseSequence> {
    if !(seq.screen.width > 0.0) {
        return Err(Error::DegenerateScreen);
    }
    if !(target_width > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "target width {target_width}"
        )));
    }
    let k = target_width / seq.screen.width;
    let mut out = seq.clone();
    out.screen.width = target_width;
    out.km_bbox.left *= k;
    out.km_bbox.right *= k;
    for e in &mut out.events {
        e.x *= k;
        if let Some(sx) = e.scroll_x.as_mut() {
            *sx *= k;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coords {
    Raw,
    Standardized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Xy,
    TimeOffset,
    Speed,
    DistanceToKm,
}

impl Channel {
    pub fn width(self) -> usize {
        match self {
            Channel::Xy => 2,
            _ => 1,
        }
    }
}

/// How a session becomes a fixed-length matrix.
///
/// With `normalize` set, positions and KM distances are divided by
/// `target_width` and time offsets are expressed in seconds, which keeps
/// network inputs O(1). Speed stays in px/ms. With `normalize_y` cleared,
/// vertical positions are left in pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentationScheme {
    pub coords: Coords,
    channels: Vec<Channel>,
    pub target_width: f64,
    pub normalize: bool,
    pub normalize_y: bool,
    pub max_len: usize,
}

impl RepresentationScheme {
    pub fn new(coords: Coords, channels: &[Channel]) -> Result<Self> {
        let mut chans: Vec<Channel> = channels.to_vec();
        chans.sort();
        chans.dedup();
        if chans.is_empty() {
            return Err(Error::InvalidArgument(
                "representation needs at least one channel".into(),
            ));
        }
        Ok(RepresentationScheme {
            coords,
            channels: chans,
            target_width: TARGET_WIDTH,
            normalize: true,
            normalize_y: true,
            max_len: MAX_LEN,
        })
    }

    /// Coordinates, optionally followed by the time offset channel.
    pub fn coords_time(coords: Coords, time: bool) -> Self {
        let chans: &[Channel] = if time {
            &[Channel::Xy, Channel::TimeOffset]
        } else {
            &[Channel::Xy]
        };
        Self::new(coords, chans).expect("non-empty channel set")
    }

    pub fn unnormalized(mut self) -> Self {
        self.normalize = false;
        self
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    /// Columns per timestep.
    pub fn dim(&self) -> usize {
        self.channels.iter().map(|c| c.width()).sum()
    }
}

/// A 50×D matrix (row-major) with a prefix mask of real timesteps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentedSequence {
    pub values: Vec<f64>,
    pub dim: usize,
    pub mask: Vec<bool>,
    pub label: Label,
    pub source_id: String,
    pub provenance: Provenance,
}

impl RepresentedSequence {
    pub fn max_len(&self) -> usize {
        self.mask.len()
    }

    /// Number of real (unpadded) timesteps.
    pub fn len(&self) -> usize {
        self.mask.iter().take_while(|m| **m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.values[t * self.dim..(t + 1) * self.dim]
    }

    /// The first `len()` rows, contiguous.
    pub fn real_rows(&self) -> &[f64] {
        &self.values[..self.len() * self.dim]
    }
}

/// Keeps the last `max_len` rows of a `T×dim` row-major matrix, or pads it
/// with zero rows. Returns the `max_len×dim` matrix and its mask.
pub fn pad_truncate(values: &[f64], dim: usize, max_len: usize) -> Result<(Vec<f64>, Vec<bool>)> {
    if dim == 0 || !values.len().is_multiple_of(dim) {
        return Err(Error::InvalidArgument(format!(
            "matrix of {} values is not a multiple of dim {dim}",
            values.len()
        )));
    }
    let t = values.len() / dim;
    if t == 0 {
        return Err(Error::EmptySequence);
    }
    let keep = t.min(max_len);
    let mut out = vec![0.0; max_len * dim];
    out[..keep * dim].copy_from_slice(&values[(t - keep) * dim..]);
    let mask = (0..max_len).map(|i| i < keep).collect();
    Ok((out, mask))
}

/// Per-timestep channel values over all move events, before padding.
pub fn channel_matrix(seq: &MouseSequence, scheme: &RepresentationScheme) -> Result<Vec<f64>> {
    let seq = match scheme.coords {
        Coords::Standardized => standardize_width(seq, scheme.target_width)?,
        Coords::Raw => seq.clone(),
    };
    let (pos_scale, y_scale, time_scale) = if scheme.normalize {
        let p = 1.0 / scheme.target_width;
        (p, if scheme.normalize_y { p } else { 1.0 }, 1e-3)
    } else {
        (1.0, 1.0, 1.0)
    };
    let moves: Vec<&CursorEvent> = seq.moves().collect();
    let mut out = Vec::with_capacity(moves.len() * scheme.dim());
    for (i, e) in moves.iter().enumerate() {
        let (dt, step) = if i == 0 {
            (0.0, 0.0)
        } else {
            let p = moves[i - 1];
            (e.t - p.t, (e.x - p.x).hypot(e.y - p.y))
        };
        for c in scheme.channels() {
            match c {
                Channel::Xy => {
                    out.push(e.x * pos_scale);
                    out.push(e.y * y_scale);
                }
                Channel::TimeOffset => out.push(dt * time_scale),
                Channel::Speed => out.push(if dt > 0.0 { step / dt } else { 0.0 }),
                Channel::DistanceToKm => out.push(seq.km_bbox.distance(e.x, e.y) * pos_scale),
            }
        }
    }
    Ok(out)
}

pub fn to_representation(
    seq: &MouseSequence,
    scheme: &RepresentationScheme,
) -> Result<RepresentedSequence> {
    let dim = scheme.dim();
    let raw = channel_matrix(seq, scheme)?;
    let (values, mask) = pad_truncate(&raw, dim, scheme.max_len)?;
    Ok(RepresentedSequence {
        values,
        dim,
        mask,
        label: seq.label(),
        source_id: seq.origin_id().to_string(),
        provenance: seq.provenance,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn seq_from_moves(id: &str, pts: &[(f64, f64, f64)]) -> MouseSequence {
        MouseSequence {
            session_id: id.to_string(),
            screen: Screen {
                width: 1280.0,
                height: 800.0,
            },
            km_bbox: Rect::new(900.0, 150.0, 1200.0, 500.0),
            noticed_km: true,
            usefulness: 5,
            events: pts
                .iter()
                .map(|&(x, y, t)| CursorEvent::mv(x, y, t))
                .collect(),
            provenance: Provenance::Original,
            source_id: None,
        }
    }

    #[test]
    fn label_truth_table() {
        for noticed in [false, true] {
            for u in 1..=5u8 {
                let expected = if noticed && u >= 4 {
                    Label::Good
                } else {
                    Label::Bad
                };
                assert_eq!(Label::from_answers(noticed, u), expected, "{noticed} {u}");
            }
        }
    }

    #[test]
    fn validation_cases() {
        let ok = seq_from_moves("a", &[(0.0, 0.0, 0.0), (10.0, 10.0, 150.0)]);
        assert!(validate_sequence(&ok).is_valid());

        let one = seq_from_moves("b", &[(0.0, 0.0, 0.0)]);
        let v = validate_sequence(&one);
        assert_eq!(v.reasons, vec![Invalid::TooFewEvents(1)]);
        assert!(v.to_string().contains("too few events"));

        let back = seq_from_moves(
            "c",
            &[(0.0, 0.0, 0.0), (1.0, 1.0, 150.0), (2.0, 2.0, 100.0)],
        );
        let v = validate_sequence(&back);
        assert!(v.to_string().contains("non-monotone timestamps"), "{v}");

        let far = seq_from_moves("d", &[(0.0, 0.0, 0.0), (1280.0 + 500.0, 1.0, 150.0)]);
        let v = validate_sequence(&far);
        assert!(v.to_string().contains("coordinate out of bounds"), "{v}");

        // within the 5 px overshoot tolerance
        let edge = seq_from_moves("e", &[(0.0, 0.0, 0.0), (1284.0, 803.0, 150.0)]);
        assert!(validate_sequence(&edge).is_valid());

        let mut bbox = ok.clone();
        bbox.km_bbox = Rect::new(10.0, 10.0, 5.0, 20.0);
        assert!(!validate_sequence(&bbox).is_valid());

        let mut scroll = ok.clone();
        scroll.events[1].scroll_y = Some(4.0);
        assert!(!validate_sequence(&scroll).is_valid());
    }

    #[test]
    fn parse_keeps_valid_lines_and_reports_the_rest() {
        let a = seq_from_moves("a", &[(0.0, 0.0, 0.0), (3.0, 4.0, 150.0)]);
        let b = seq_from_moves("b", &[(5.0, 5.0, 0.0), (6.0, 4.0, 150.0)]);
        let c = seq_from_moves(
            "c",
            &[(5.0, 5.0, 0.0), (6.0, 4.0, 150.0), (7.0, 4.0, 300.0)],
        );
        let short = seq_from_moves("d", &[(5.0, 5.0, 0.0)]);
        let mut text = serialize_dataset(&[a.clone(), b, c]);
        assert_eq!(parse_dataset(&text).unwrap().sequences.len(), 3);

        text.push_str("{not json\n");
        text.push_str(&short.to_json_line());
        text.push('\n');
        text.push_str(&a.to_json_line());
        let ds = parse_dataset(&text).unwrap();
        assert_eq!(ds.sequences.len(), 3);
        assert_eq!(ds.rejects.len(), 3);
        assert_eq!(ds.rejects[0].line, 4);
        assert!(ds.rejects[1].message.contains("too few events"));
        assert!(ds.rejects[2].message.contains("duplicate"));

        assert!(matches!(
            parse_dataset("\n{bad\n"),
            Err(Error::EmptyDataset(_))
        ));
    }

    #[test]
    fn unknown_keys_are_ignored() {
        let line = r#"{"session_id":"z","screen":{"width":1000,"height":700},"km_bbox":{"left":600,"top":100,"right":950,"bottom":400},"noticed_km":false,"usefulness":2,"user_agent":"x","events":[{"x":1,"y":2,"t":0,"kind":"move"},{"x":3,"y":4,"t":150,"kind":"move","extra":1},{"x":3,"y":4,"t":200,"kind":"scroll","scroll_x":0,"scroll_y":120}]}"#;
        let ds = parse_dataset(line).unwrap();
        assert_eq!(ds.sequences[0].label(), Label::Bad);
        assert_eq!(ds.sequences[0].events[2].scroll_y, Some(120.0));
    }

    #[test]
    fn standardize_examples() {
        let mut s = seq_from_moves("a", &[(960.0, 10.0, 0.0), (10.0, 10.0, 150.0)]);
        s.screen.width = 1920.0;
        s.km_bbox = Rect::new(1200.0, 0.0, 1900.0, 300.0);
        let out = standardize_width(&s, 1280.0).unwrap();
        assert_eq!(out.events[0].x, 640.0);
        assert_eq!(out.events[0].y, 10.0);
        assert_eq!(out.screen.width, 1280.0);

        let same = seq_from_moves("b", &[(333.0, 10.0, 0.0), (10.0, 10.0, 150.0)]);
        assert_eq!(standardize_width(&same, 1280.0).unwrap(), same);

        let mut narrow = same.clone();
        narrow.screen.width = 1024.0;
        narrow.km_bbox = Rect::new(700.0, 0.0, 1024.0, 300.0);
        assert_eq!(
            standardize_width(&narrow, 1280.0).unwrap().km_bbox.right,
            1280.0
        );

        let mut zero = same;
        zero.screen.width = 0.0;
        assert!(matches!(
            standardize_width(&zero, 1280.0),
            Err(Error::DegenerateScreen)
        ));
    }

    #[test]
    fn representation_channels() {
        let s = seq_from_moves("a", &[(0.0, 0.0, 0.0), (3.0, 4.0, 150.0)]);
        let scheme = RepresentationScheme::new(Coords::Raw, &[Channel::Speed]).unwrap();
        let r = to_representation(&s, &scheme).unwrap();
        assert_eq!(r.dim, 1);
        assert_eq!(r.len(), 2);
        assert_eq!(r.values[0], 0.0);
        assert!((r.values[1] - 5.0 / 150.0).abs() < 1e-12);

        let s = seq_from_moves(
            "b",
            &[(0.0, 0.0, 0.0), (1.0, 1.0, 150.0), (2.0, 2.0, 450.0)],
        );
        let scheme = RepresentationScheme::new(Coords::Raw, &[Channel::TimeOffset])
            .unwrap()
            .unnormalized();
        let r = to_representation(&s, &scheme).unwrap();
        assert_eq!(&r.values[..3], &[0.0, 150.0, 300.0]);

        let s = seq_from_moves(
            "c",
            &[
                (1000.0, 200.0, 0.0),
                (0.0, 150.0, 150.0),
                (0.0, 150.0, 150.0),
            ],
        );
        let scheme =
            RepresentationScheme::new(Coords::Raw, &[Channel::DistanceToKm, Channel::Speed])
                .unwrap()
                .unnormalized();
        let r = to_representation(&s, &scheme).unwrap();
        // speed column precedes distance in canonical order
        assert_eq!(r.row(0), &[0.0, 0.0]);
        assert_eq!(r.row(1)[1], 900.0);
        // duplicate timestamp gives zero speed
        assert_eq!(r.row(2)[0], 0.0);
    }

    #[test]
    fn scheme_dimensions() {
        let all = [
            Channel::Xy,
            Channel::TimeOffset,
            Channel::Speed,
            Channel::DistanceToKm,
        ];
        assert_eq!(
            RepresentationScheme::new(Coords::Raw, &all).unwrap().dim(),
            5
        );
        assert_eq!(
            RepresentationScheme::coords_time(Coords::Raw, true).dim(),
            3
        );
        assert_eq!(
            RepresentationScheme::coords_time(Coords::Raw, false).dim(),
            2
        );
        assert!(RepresentationScheme::new(Coords::Raw, &[]).is_err());
    }

    #[test]
    fn pad_truncate_examples() {
        let m: Vec<f64> = (0..60).map(|v| v as f64).collect();
        let (v, mask) = pad_truncate(&m, 1, 50).unwrap();
        assert_eq!(v[0], 10.0);
        assert_eq!(v[49], 59.0);
        assert!(mask.iter().all(|m| *m));

        let m: Vec<f64> = (0..50).map(|v| v as f64).collect();
        let (v, mask) = pad_truncate(&m, 1, 50).unwrap();
        assert_eq!(v, m);
        assert!(mask.iter().all(|m| *m));

        let m: Vec<f64> = (1..=10).map(|v| v as f64).collect();
        let (v, mask) = pad_truncate(&m, 1, 50).unwrap();
        assert_eq!(&v[..10], &m[..]);
        assert!(v[10..].iter().all(|x| *x == 0.0));
        assert_eq!(mask.iter().filter(|m| **m).count(), 10);
        assert!(mask[..10].iter().all(|m| *m) && mask[10..].iter().all(|m| !*m));

        assert!(matches!(
            pad_truncate(&[], 2, 50),
            Err(Error::EmptySequence)
        ));
    }
}
