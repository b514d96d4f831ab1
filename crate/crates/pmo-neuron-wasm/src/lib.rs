//! Browser bindings for the neuron simulator. Each export runs a short
//! simulation and returns a JSON string; the page parses it and draws
//! on a canvas. JSON keeps the boundary to plain strings and numbers,
//! which is plenty for an interactive demo.
//!
//! The `*_impl` functions carry the logic and return plain
//! `Result<String, String>` so they compile and test on the host; the
//! `#[wasm_bindgen]` wrappers only exist on the wasm32 target, where
//! `JsValue` is usable.

use serde::Serialize;

use pmo_neuron::device::{spike_time, StepConfig};
use pmo_neuron::neuron::{classify_pattern, simulate, Block, NeuronConfig};
use pmo_neuron::params::DeviceParams;
use pmo_neuron::stimulus::Waveform;

fn json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct SpikeTimeCurve {
    v_volts: Vec<f64>,
    t_spike_ns: Vec<Option<f64>>,
}

/// Isolated-device integration time versus drive voltage magnitude.
/// Points where the device settles sub-threshold come back as null.
pub fn spike_time_curve_impl(v_min: f64, v_max: f64, points: u32) -> Result<String, String> {
    if !(v_min > 0.0) || !(v_max > v_min) || points < 2 {
        return Err("need 0 < v_min < v_max and >= 2 points".into());
    }
    let p = DeviceParams::spike_time_calibrated();
    let step = StepConfig::default();
    let mut curve = SpikeTimeCurve {
        v_volts: Vec::new(),
        t_spike_ns: Vec::new(),
    };
    for k in 0..points {
        let v = v_min + (v_max - v_min) * k as f64 / (points - 1) as f64;
        let t = spike_time(v, &p, p.t_amb, &step).map_err(|e| e.to_string())?;
        curve.v_volts.push(v);
        curve.t_spike_ns.push(t.map(|s| s * 1e9));
    }
    json(&curve)
}

#[derive(Serialize)]
struct TraceJson {
    time_us: Vec<f64>,
    current_ma: Vec<f64>,
    temperature_k: Vec<f64>,
    spike_times_us: Vec<f64>,
    pattern: Option<String>,
    msb_stream: String,
}

fn trace_json(
    cfg: &NeuronConfig,
    w: &Waveform,
    t_end: f64,
    sample: f64,
) -> Result<String, String> {
    let tr = simulate(cfg, w, t_end, Some(sample)).map_err(|e| e.to_string())?;
    let mut out = TraceJson {
        time_us: Vec::new(),
        current_ma: Vec::new(),
        temperature_k: Vec::new(),
        spike_times_us: Vec::new(),
        pattern: None,
        msb_stream: String::new(),
    };
    for s in tr.samples.iter().filter(|s| s.block == Block::Integration) {
        out.time_us.push(s.time * 1e6);
        out.current_ma.push(s.current * 1e3);
        out.temperature_k.push(s.temperature);
    }
    let spikes = tr.spike_times(Block::Integration);
    out.spike_times_us = spikes.iter().map(|t| t * 1e6).collect();
    if spikes.len() >= 7 {
        out.pattern = classify_pattern(&spikes[1..], 0.4).ok().map(|p| p.to_string());
    }
    out.msb_stream = tr
        .events
        .iter()
        .filter(|e| e.source == Block::Integration)
        .map(|e| e.register1_bits.chars().next().unwrap_or('?'))
        .collect();
    json(&out)
}

/// Simulate one of the named spiking presets under a constant drive.
/// `preset` is "rs", "ch", or "ib"; `v_input` is the signed input level.
pub fn run_pattern_impl(preset: &str, v_input: f64, t_end_us: f64) -> Result<String, String> {
    let cfg = match preset {
        "rs" => NeuronConfig::regular_spiking(),
        "ch" => NeuronConfig::chattering(),
        "ib" => NeuronConfig::intrinsic_bursting(),
        other => return Err(format!("unknown preset `{other}`")),
    };
    if !(t_end_us > 0.0 && t_end_us <= 100.0) {
        return Err("t_end_us must be in (0, 100]".into());
    }
    let t_end = t_end_us * 1e-6;
    let w = Waveform::constant(v_input, t_end);
    trace_json(&cfg, &w, t_end, 20e-9)
}

/// Simulate the beat-note response: a sum of two sinusoids with a
/// common amplitude, through the sinusoid-response preset.
pub fn run_sinusoid_impl(
    f1_khz: f64,
    f2_khz: f64,
    amplitude_v: f64,
    t_end_us: f64,
) -> Result<String, String> {
    if !(f1_khz > 0.0 && f2_khz > 0.0) {
        return Err("frequencies must be positive".into());
    }
    if !(t_end_us > 0.0 && t_end_us <= 100.0) {
        return Err("t_end_us must be in (0, 100]".into());
    }
    let cfg = NeuronConfig::sinusoid_response();
    let t_end = t_end_us * 1e-6;
    let w = Waveform::sinusoid_sum(f1_khz * 1e3, f2_khz * 1e3, amplitude_v, amplitude_v, t_end);
    trace_json(&cfg, &w, t_end, 20e-9)
}

#[cfg(target_arch = "wasm32")]
mod bindings {
    use wasm_bindgen::prelude::*;

    fn lift(r: Result<String, String>) -> Result<String, JsValue> {
        r.map_err(|e| JsValue::from_str(&e))
    }

    #[wasm_bindgen]
    pub fn spike_time_curve(v_min: f64, v_max: f64, points: u32) -> Result<String, JsValue> {
        lift(super::spike_time_curve_impl(v_min, v_max, points))
    }

    #[wasm_bindgen]
    pub fn run_pattern(preset: &str, v_input: f64, t_end_us: f64) -> Result<String, JsValue> {
        lift(super::run_pattern_impl(preset, v_input, t_end_us))
    }

    #[wasm_bindgen]
    pub fn run_sinusoid(
        f1_khz: f64,
        f2_khz: f64,
        amplitude_v: f64,
        t_end_us: f64,
    ) -> Result<String, JsValue> {
        lift(super::run_sinusoid_impl(f1_khz, f2_khz, amplitude_v, t_end_us))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_is_monotone_where_defined() {
        let s = spike_time_curve_impl(1.5, 2.4, 10).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        let times: Vec<Option<f64>> = v["t_spike_ns"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_f64())
            .collect();
        let defined: Vec<f64> = times.into_iter().flatten().collect();
        assert!(defined.len() >= 8);
        assert!(defined.windows(2).all(|p| p[1] < p[0]));
    }

    #[test]
    fn pattern_demo_reports_ch() {
        let s = run_pattern_impl("ch", -2.2, 15.0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["pattern"], "CH");
        assert!(v["spike_times_us"].as_array().unwrap().len() >= 14);
        assert!(v["msb_stream"].as_str().unwrap().starts_with("1110"));
    }

    #[test]
    fn sinusoid_demo_spikes_in_bursts() {
        let s = run_sinusoid_impl(250.0, 350.0, -0.7, 20.0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert!(!v["spike_times_us"].as_array().unwrap().is_empty());
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(run_pattern_impl("nope", -2.2, 15.0).is_err());
        assert!(run_pattern_impl("rs", -1.6, 0.0).is_err());
        assert!(spike_time_curve_impl(2.0, 1.0, 10).is_err());
        assert!(run_sinusoid_impl(-1.0, 350.0, -0.7, 20.0).is_err());
    }
}
