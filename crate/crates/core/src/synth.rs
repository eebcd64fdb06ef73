//! Synthetic abandoned-query sessions with labels known by construction.
//!
//! Good sessions drift from the search bar toward the knowledge module on
//! the right of the page and linger there with slow, deliberate moves. Bad
//! sessions wander over the result list with mostly short polling gaps.
//! Event counts follow a log-normal tuned to median 19 with about 10% of
//! sessions above 50 moves.

use rand::Rng as _;
use rand_distr::{Distribution, LogNormal, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds::{rng_for, Rng};
use crate::seqdata::{CursorEvent, Label, MouseSequence, Provenance, Rect, Screen};

/// Shortest gap between two recorded moves, in ms.
pub const POLL_MS: f64 = 150.0;

/// Log-normal given by its median and the standard deviation of its log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormalSpec {
    pub median: f64,
    pub sigma: f64,
}

impl LogNormalSpec {
    fn dist(&self) -> Result<LogNormal<f64>> {
        if !(self.median > 0.0) || !(self.sigma >= 0.0) {
            return Err(Error::Config(format!(
                "log-normal needs median > 0 and sigma >= 0, got {self:?}"
            )));
        }
        LogNormal::new(self.median.ln(), self.sigma).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Gaps between consecutive moves: with probability `short_weight` a draw
/// from `short`, otherwise from `long`. Floored at the polling interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffsetMixture {
    pub short_weight: f64,
    pub short: LogNormalSpec,
    pub long: LogNormalSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassParams {
    /// Time from page load to the first recorded event, ms.
    pub dwell: LogNormalSpec,
    pub offsets: OffsetMixture,
    /// Standard deviation of the random part of each step, px.
    pub step_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub n_good: usize,
    pub n_bad: usize,
    pub good: ClassParams,
    pub bad: ClassParams,
    /// Number of move events per session.
    pub event_count: LogNormalSpec,
    /// Knowledge-module rectangle as fractions of the screen:
    /// left, top, right, bottom.
    pub km_fraction: [f64; 4],
    /// Chance that a recorded step is followed by a scroll event.
    pub scroll_rate: f64,
    /// Screen sizes drawn uniformly per session.
    pub screens: Vec<(f64, f64)>,
    pub rng_seed: u64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            n_good: 77,
            n_bad: 30,
            good: ClassParams {
                dwell: LogNormalSpec {
                    median: 2500.0,
                    sigma: 0.7,
                },
                offsets: OffsetMixture {
                    short_weight: 0.15,
                    short: LogNormalSpec {
                        median: 300.0,
                        sigma: 0.3,
                    },
                    long: LogNormalSpec {
                        median: 1400.0,
                        sigma: 0.6,
                    },
                },
                step_sd: 25.0,
            },
            bad: ClassParams {
                dwell: LogNormalSpec {
                    median: 3000.0,
                    sigma: 0.7,
                },
                offsets: OffsetMixture {
                    short_weight: 0.75,
                    short: LogNormalSpec {
                        median: 260.0,
                        sigma: 0.3,
                    },
                    long: LogNormalSpec {
                        median: 1200.0,
                        sigma: 0.6,
                    },
                },
                step_sd: 70.0,
            },
            // median 19; P(n > 50) = 0.1 gives sigma = ln(50/19) / 1.2816
            event_count: LogNormalSpec {
                median: 19.0,
                sigma: 0.755,
            },
            km_fraction: [0.68, 0.16, 0.95, 0.62],
            scroll_rate: 0.04,
            screens: vec![
                (1280.0, 800.0),
                (1366.0, 768.0),
                (1440.0, 900.0),
                (1536.0, 864.0),
                (1920.0, 1080.0),
            ],
            rng_seed: 0,
        }
    }
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_good + self.n_bad == 0 {
            return Err(Error::Config("nothing to generate".into()));
        }
        if self.screens.is_empty() || self.screens.iter().any(|&(w, h)| !(w > 0.0 && h > 0.0)) {
            return Err(Error::Config(
                "screen catalog must hold positive sizes".into(),
            ));
        }
        let [l, t, r, b] = self.km_fraction;
        if !(0.0 <= l && l < r && r <= 1.0 && 0.0 <= t && t < b && b <= 1.0) {
            return Err(Error::Config(
                "km_fraction must be an ordered sub-rectangle of [0, 1]".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.scroll_rate) {
            return Err(Error::Config("scroll_rate outside [0, 1]".into()));
        }
        for c in [&self.good, &self.bad] {
            if !(0.0..=1.0).contains(&c.offsets.short_weight) || !(c.step_sd >= 0.0) {
                return Err(Error::Config("bad class parameters".into()));
            }
            c.dwell.dist()?;
            c.offsets.short.dist()?;
            c.offsets.long.dist()?;
        }
        self.event_count.dist()?;
        Ok(())
    }
}

/// The dataset for `params`, bad and good sessions interleaved in a fixed
/// seed-dependent order. Sequence `i` depends only on the seed and `i`.
pub fn generate_dataset(params: &GeneratorParams) -> Result<Vec<MouseSequence>> {
    params.validate()?;
    let n = params.n_good + params.n_bad;
    let mut labels: Vec<Label> = std::iter::repeat_n(Label::Bad, params.n_bad)
        .chain(std::iter::repeat_n(Label::Good, params.n_good))
        .collect();
    let mut order_rng = rng_for(params.rng_seed, &[u64::MAX]);
    rand::seq::SliceRandom::shuffle(labels.as_mut_slice(), &mut order_rng);
    let width = n.to_string().len().max(3);
    labels
        .par_iter()
        .enumerate()
        .map(|(i, &label)| {
            let mut rng = rng_for(params.rng_seed, &[i as u64]);
            let id = format!("syn{}-{:0width$}", params.rng_seed, i);
            generate_session(params, label, id, &mut rng)
        })
        .collect()
}

/// One session of the given class.
pub fn generate_session(
    params: &GeneratorParams,
    label: Label,
    session_id: String,
    rng: &mut Rng,
) -> Result<MouseSequence> {
    let class = match label {
        Label::Good => &params.good,
        Label::Bad => &params.bad,
    };
    let (width, height) = params.screens[rng.random_range(0..params.screens.len())];
    let [fl, ft, fr, fb] = params.km_fraction;
    let jitter = |rng: &mut Rng| rng.random_range(-0.02..0.02);
    let km = Rect::new(
        ((fl + jitter(rng)) * width).round(),
        ((ft + jitter(rng)) * height).round(),
        ((fr + jitter(rng)).min(1.0) * width).round(),
        ((fb + jitter(rng)) * height).round(),
    );

    let n_moves = (params.event_count.dist()?.sample(rng).round() as usize).max(2);
    let dwell = class.dwell.dist()?;
    let short = class.offsets.short.dist()?;
    let long = class.offsets.long.dist()?;
    let step =
        Normal::new(0.0, class.step_sd.max(1e-9)).map_err(|e| Error::Config(e.to_string()))?;

    // start near the search bar, top left
    let mut x = rng.random_range(0.08..0.45) * width;
    let mut y = rng.random_range(0.04..0.14) * height;
    // good sessions head for a spot inside the module
    let goal = (
        rng.random_range(km.left + 10.0..km.right - 10.0),
        rng.random_range(km.top + 10.0..km.bottom - 10.0),
    );
    // bad sessions browse the result column
    let browse = (
        rng.random_range(0.12..0.55) * width,
        rng.random_range(0.25..0.85) * height,
    );
    let pull = match label {
        Label::Good => rng.random_range(0.25..0.45),
        Label::Bad => rng.random_range(0.05..0.15),
    };

    let mut t = dwell.sample(rng).round();
    let mut events = Vec::with_capacity(n_moves + 4);
    let mut scroll_y = 0.0;
    for k in 0..n_moves {
        if k > 0 {
            let gap = if rng.random_bool(class.offsets.short_weight) {
                short.sample(rng)
            } else {
                long.sample(rng)
            };
            t += gap.max(POLL_MS).round();
            let target = match label {
                Label::Good => goal,
                Label::Bad => browse,
            };
            x += pull * (target.0 - x) + step.sample(rng);
            y += pull * (target.1 - y) + step.sample(rng);
            x = x.clamp(0.0, width);
            y = y.clamp(0.0, height);
        }
        events.push(CursorEvent::mv(x.round(), y.round(), t));
        if k + 1 < n_moves && rng.random_bool(params.scroll_rate) {
            scroll_y += rng.random_range(40.0..400.0f64).round();
            t += rng.random_range(20.0..120.0f64).round();
            events.push(CursorEvent::scroll(x.round(), y.round(), t, 0.0, scroll_y));
        }
    }

    let (noticed_km, usefulness) = match label {
        Label::Good => (true, rng.random_range(4..=5)),
        // either never saw the module or did not find it useful
        Label::Bad => {
            if rng.random_bool(0.4) {
                (true, rng.random_range(1..=3))
            } else {
                (false, rng.random_range(1..=5))
            }
        }
    };
    Ok(MouseSequence {
        session_id,
        screen: Screen { width, height },
        km_bbox: km,
        noticed_km,
        usefulness,
        events,
        provenance: Provenance::Original,
        source_id: None,
    })
}
