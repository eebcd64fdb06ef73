//! Browser bindings for the demo page in `www/`. Sessions cross the boundary
//! as wire-format JSON lines.

use wasm_bindgen::prelude::*;

use cursor_abandon::balance::{distort, trim};
use cursor_abandon::features::{extract_features, FEATURE_NAMES};
use cursor_abandon::seeds::rng_for;
use cursor_abandon::seqdata::{validate_sequence, Label, MouseSequence};
use cursor_abandon::synth::{generate_session, GeneratorParams};

fn parse(line: &str) -> Result<MouseSequence, JsError> {
    let seq: MouseSequence = serde_json::from_str(line)?;
    let verdict = validate_sequence(&seq);
    if !verdict.is_valid() {
        return Err(JsError::new(&verdict.to_string()));
    }
    Ok(seq)
}

/// One synthetic session of the requested class.
#[wasm_bindgen(js_name = generateSession)]
pub fn generate_session_json(seed: u64, good: bool) -> Result<String, JsError> {
    let label = if good { Label::Good } else { Label::Bad };
    let params = GeneratorParams::default();
    let mut rng = rng_for(seed, &[good as u64]);
    let seq = generate_session(&params, label, format!("demo-{seed}"), &mut rng)
        .map_err(|e| JsError::new(&e.to_string()))?;
    Ok(seq.to_json_line())
}

/// Applies `distortion`, `trimming` or `both` with the default bounds.
#[wasm_bindgen(js_name = augmentSession)]
pub fn augment_session(line: &str, kind: &str, seed: u64) -> Result<String, JsError> {
    let seq = parse(line)?;
    let mut rng = rng_for(seed, &[]);
    let out = match kind {
        "distortion" => distort(&seq, &mut rng, 2.0),
        "trimming" => trim(&seq, &mut rng, 5),
        "both" => trim(&distort(&seq, &mut rng, 2.0), &mut rng, 5),
        other => return Err(JsError::new(&format!("unknown augmentation {other:?}"))),
    };
    Ok(out.to_json_line())
}

/// `{"label": .., "features": [[name, value], ..]}` with the ten
/// interaction features in canonical order.
#[wasm_bindgen(js_name = sessionFeatures)]
pub fn session_features(line: &str) -> Result<String, JsError> {
    let seq = parse(line)?;
    let f = extract_features(&seq);
    let pairs: Vec<(&str, f64)> = FEATURE_NAMES
        .iter()
        .copied()
        .zip(f.as_slice().iter().copied())
        .collect();
    Ok(serde_json::json!({ "label": seq.label().name(), "features": pairs }).to_string())
}
