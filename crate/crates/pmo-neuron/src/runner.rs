//! Scenario execution: turns a parsed [`ScenarioSpec`] into simulations
//! and deterministic on-disk artifacts (trace CSV, spike CSV, summary
//! JSON, optional SVG plot).

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::calibrate::{self, BoundedParam, FreeParam};
use crate::config::{ScenarioKind, ScenarioSpec};
use crate::device::{temperature_derivative, total_current, DeviceState};
use crate::error::ModelError;
use crate::neuron::{
    classify_pattern, refractory_period, simulate, Block, Pattern, SpikeEvent, Trace, TraceSample,
};
use crate::params::DeviceParams;
use crate::plot::render_trace_svg;
use crate::scaling::ScalingReport;
use crate::stimulus::Waveform;

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Numeric(ModelError),
    Io(std::io::Error),
}

impl From<ModelError> for RunError {
    fn from(e: ModelError) -> Self {
        RunError::Numeric(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "config error: {m}"),
            RunError::Numeric(e) => write!(f, "numerical failure: {e}"),
            RunError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl RunError {
    /// Process exit code: 2 for configuration/environment problems, 3
    /// for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Io(_) => 2,
            RunError::Numeric(_) => 3,
        }
    }
}

/// Machine-readable run outcome, also written as summary.json.
#[derive(Debug, Clone, Serialize, Default)]
pub struct Summary {
    pub scenario: String,
    pub spike_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_frequency_hz: Option<f64>,
    pub isi_s: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pattern: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_refractory_gap_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted_refractory_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingSummary {
    pub tau_rc_s: f64,
    pub tau_th_s: f64,
    pub ratio: f64,
    pub capacitance_f: f64,
    pub transistor_count: u32,
    pub area_f2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CalibrationSummary {
    pub r_th_k_per_w: f64,
    pub c_th_j_per_k: f64,
    pub i_compliance_a: f64,
    pub phi_b_ev: f64,
    pub e_trap_ev: f64,
    pub rms_log_error: f64,
    pub iterations: usize,
    pub residuals: Vec<f64>,
}

/// Write the trace CSV. Column set is a stable contract.
pub fn write_trace_csv(trace: &Trace, path: &Path) -> std::io::Result<()> {
    let mut out = String::from("time_s,v_in_v,v_device_v,current_a,temperature_k,v_a_v,block,spike\n");
    for s in &trace.samples {
        out += &format!(
            "{:e},{:e},{:e},{:e},{:e},{:e},{},{}\n",
            s.time,
            s.v_in,
            s.v_device,
            s.current,
            s.temperature,
            s.v_a,
            s.block,
            u8::from(s.spike)
        );
    }
    fs::write(path, out)
}

/// Write the spike-event CSV.
pub fn write_spikes_csv(trace: &Trace, path: &Path) -> std::io::Result<()> {
    let mut out = String::from("time_s,source,register1_bits\n");
    for e in &trace.events {
        out += &format!("{:e},{},{}\n", e.time, e.source, e.register1_bits);
    }
    fs::write(path, out)
}

fn summarize_trace(trace: &Trace, kind: ScenarioKind) -> Summary {
    let spikes = trace.spike_times(Block::Integration);
    let isis = trace.isis();
    let pattern = if spikes.len() >= 7 {
        classify_pattern(&spikes[1..], 0.4).ok().map(|p: Pattern| p.to_string())
    } else if spikes.len() >= 6 {
        classify_pattern(&spikes, 0.4).ok().map(|p| p.to_string())
    } else {
        None
    };
    // Quiescent gaps: integration spike to the refractory spike that
    // reconnects the integration branch.
    let refs = trace.spike_times(Block::Refractory);
    let gaps: Vec<f64> = spikes
        .iter()
        .filter_map(|&s| refs.iter().find(|&&r| r > s).map(|&r| r - s))
        .collect();
    let mean_gap = if gaps.len() > 3 {
        let tail = &gaps[2..];
        Some(tail.iter().sum::<f64>() / tail.len() as f64)
    } else {
        None
    };
    Summary {
        scenario: format!("{kind:?}"),
        spike_count: spikes.len(),
        mean_frequency_hz: trace.mean_frequency(2),
        isi_s: isis,
        pattern,
        mean_refractory_gap_s: mean_gap,
        ..Default::default()
    }
}

fn write_artifacts(
    trace: &Trace,
    summary: &Summary,
    out_dir: &Path,
    stem: &str,
    plot: bool,
) -> Result<(), RunError> {
    fs::create_dir_all(out_dir)?;
    write_trace_csv(trace, &out_dir.join(format!("{stem}_trace.csv")))?;
    write_spikes_csv(trace, &out_dir.join(format!("{stem}_spikes.csv")))?;
    let json = serde_json::to_string_pretty(summary)
        .map_err(|e| RunError::Config(format!("summary serialization: {e}")))?;
    fs::write(out_dir.join(format!("{stem}_summary.json")), json)?;
    if plot {
        fs::write(out_dir.join(format!("{stem}_trace.svg")), render_trace_svg(trace))?;
    }
    Ok(())
}

/// Simulate a bare device driven directly by a pulse waveform (no toggle
/// machinery): a spike is the current's rising crossing of compliance.
pub fn replicate(
    p: &DeviceParams,
    w: &Waveform,
    sample_interval: Option<f64>,
) -> Result<Trace, ModelError> {
    p.validate()?;
    let step = crate::device::StepConfig::default();
    let mut state = DeviceState::at_ambient(p);
    let t_end = w.duration();
    let mut trace = Trace {
        t_end,
        ..Default::default()
    };
    let mut was_at_compliance = false;
    let mut next_sample = 0.0_f64;
    while state.time < t_end {
        let v_sig = w.eval(state.time)?;
        let v = v_sig.abs();
        let i = total_current(v, state.temperature, p)?;
        if i >= p.i_compliance && !was_at_compliance {
            trace.events.push(SpikeEvent {
                time: state.time,
                source: Block::Integration,
                register1_bits: String::new(),
            });
        }
        was_at_compliance = i >= p.i_compliance;
        let d = temperature_derivative(state.temperature, i * v, p)?;
        let mut dt = if d == 0.0 {
            f64::INFINITY
        } else {
            step.delta_t_cap / d.abs()
        };
        dt = dt
            .min(w.step_limit(state.time))
            .min(t_end - state.time)
            .min(200e-9)
            .max(step.dt_floor);
        state.temperature += d * dt;
        state.time += dt;
        state.current = i;
        let sample_due = match sample_interval {
            None => true,
            Some(iv) => {
                if state.time >= next_sample {
                    while next_sample <= state.time {
                        next_sample += iv;
                    }
                    true
                } else {
                    false
                }
            }
        };
        if sample_due {
            trace.samples.push(TraceSample {
                time: state.time,
                v_in: v_sig,
                v_device: v,
                current: i,
                temperature: state.temperature,
                v_a: 0.0,
                block: Block::Integration,
                spike: false,
            });
        }
    }
    Ok(trace)
}

/// Execute one scenario, writing artifacts under `out_dir`. Paths inside
/// the spec (e.g. calibration observations) resolve against `base_dir`.
pub fn run(
    spec: &ScenarioSpec,
    base_dir: &Path,
    out_dir: &Path,
    plot: bool,
    sample_interval_override: Option<f64>,
) -> Result<Summary, RunError> {
    let sample_interval = sample_interval_override
        .or(spec.scenario.sample_interval_s)
        .or(Some(10e-9));
    match spec.scenario.kind {
        ScenarioKind::Constant
        | ScenarioKind::Sinusoid
        | ScenarioKind::PatternCh
        | ScenarioKind::PatternIb
        | ScenarioKind::RefractorySweep => {
            let cfg = spec.neuron_config().map_err(RunError::Config)?;
            let w = spec.waveform().map_err(RunError::Config)?;
            let trace = simulate(&cfg, &w, spec.t_end(), sample_interval)?;
            let mut summary = summarize_trace(&trace, spec.scenario.kind);
            if spec.scenario.kind == ScenarioKind::RefractorySweep
                || spec.scenario.kind == ScenarioKind::Constant
            {
                summary.predicted_refractory_s = refractory_period(&cfg).ok();
            }
            write_artifacts(&trace, &summary, out_dir, "run", plot)?;
            Ok(summary)
        }
        ScenarioKind::ExperimentReplication => {
            let p = spec.device_params(DeviceParams::spike_time_calibrated());
            let w = spec.waveform().map_err(RunError::Config)?;
            let trace = replicate(&p, &w, sample_interval)?;
            let mut summary = summarize_trace(&trace, spec.scenario.kind);
            summary.mean_refractory_gap_s = None;
            write_artifacts(&trace, &summary, out_dir, "run", plot)?;
            Ok(summary)
        }
        ScenarioKind::ScalingReport => {
            let p = spec.device_params(DeviceParams::nominal());
            let report = ScalingReport::from_device(&p, 1.0)?;
            fs::create_dir_all(out_dir)?;
            fs::write(out_dir.join("scaling_report.txt"), report.render_text())?;
            fs::write(out_dir.join("scaling_report.csv"), report.render_csv())?;
            let summary = Summary {
                scenario: format!("{:?}", spec.scenario.kind),
                scaling: Some(ScalingSummary {
                    tau_rc_s: report.tau_rc_s,
                    tau_th_s: report.tau_th_s,
                    ratio: report.ratio,
                    capacitance_f: report.capacitance_f,
                    transistor_count: report.transistor_count,
                    area_f2: report.area_f2,
                }),
                ..Default::default()
            };
            let json = serde_json::to_string_pretty(&summary)
                .map_err(|e| RunError::Config(format!("summary serialization: {e}")))?;
            fs::write(out_dir.join("run_summary.json"), json)?;
            Ok(summary)
        }
        ScenarioKind::Calibrate => {
            let cal = spec
                .calibration
                .as_ref()
                .ok_or_else(|| RunError::Config("missing [calibration] section".into()))?;
            let csv_path = base_dir.join(&cal.observations_csv);
            let text = fs::read_to_string(&csv_path).map_err(|e| {
                RunError::Config(format!("cannot read {}: {e}", csv_path.display()))
            })?;
            let observations =
                calibrate::parse_observations_csv(&text).map_err(RunError::Config)?;
            let init = spec.device_params(DeviceParams::nominal());
            let free = resolve_free_set(cal.free.as_deref(), &init).map_err(RunError::Config)?;
            let fit = calibrate::fit(&observations, &free, &init)?;
            let summary = Summary {
                scenario: format!("{:?}", spec.scenario.kind),
                calibration: Some(CalibrationSummary {
                    r_th_k_per_w: fit.params.r_th,
                    c_th_j_per_k: fit.params.c_th,
                    i_compliance_a: fit.params.i_compliance,
                    phi_b_ev: fit.params.phi_b,
                    e_trap_ev: fit.params.e_trap,
                    rms_log_error: fit.rms_log_error,
                    iterations: fit.iterations,
                    residuals: fit.residuals.clone(),
                }),
                ..Default::default()
            };
            fs::create_dir_all(out_dir)?;
            let json = serde_json::to_string_pretty(&summary)
                .map_err(|e| RunError::Config(format!("summary serialization: {e}")))?;
            fs::write(out_dir.join("fit_summary.json"), json)?;
            Ok(summary)
        }
    }
}

fn resolve_free_set(
    names: Option<&[String]>,
    init: &DeviceParams,
) -> Result<Vec<BoundedParam>, String> {
    let Some(names) = names else {
        return Ok(calibrate::default_free_set(init));
    };
    names
        .iter()
        .map(|n| {
            let (param, center) = match n.as_str() {
                "r_th" => (FreeParam::RTh, init.r_th),
                "c_th" => (FreeParam::CTh, init.c_th),
                "i_compliance" => (FreeParam::ICompliance, init.i_compliance),
                "phi_b" => (FreeParam::PhiB, init.phi_b),
                "e_trap" => (FreeParam::ETrap, init.e_trap),
                other => return Err(format!("unknown free parameter `{other}`")),
            };
            Ok(BoundedParam {
                param,
                lo: center / 3.0,
                hi: center * 3.0,
            })
        })
        .collect()
}

/// One row of a sweep result.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub v_input_v: f64,
    pub spike_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frequency_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refractory_gap_s: Option<f64>,
}

/// Run one simulation per sweep input level, concurrently; the aggregate
/// CSV is assembled in input order.
pub fn sweep(spec: &ScenarioSpec, out_dir: &Path, plot: bool) -> Result<Vec<SweepRow>, RunError> {
    let sweep_section = spec
        .sweep
        .as_ref()
        .ok_or_else(|| RunError::Config("a [sweep] section is required for sweep runs".into()))?;
    let cfg = spec.neuron_config().map_err(RunError::Config)?;
    let t_end = spec.t_end();
    let sample = spec.scenario.sample_interval_s.or(Some(10e-9));
    fs::create_dir_all(out_dir)?;

    let results: Vec<Result<(SweepRow, Trace), ModelError>> = sweep_section
        .v_input_v
        .par_iter()
        .map(|&v| {
            let w = Waveform::constant(v, t_end);
            let trace = simulate(&cfg, &w, t_end, sample)?;
            let summary = summarize_trace(&trace, spec.scenario.kind);
            Ok((
                SweepRow {
                    v_input_v: v,
                    spike_count: summary.spike_count,
                    frequency_hz: summary.mean_frequency_hz,
                    refractory_gap_s: summary.mean_refractory_gap_s,
                },
                trace,
            ))
        })
        .collect();

    let mut rows = Vec::with_capacity(results.len());
    for (k, r) in results.into_iter().enumerate() {
        let (row, trace) = r?;
        let stem = format!("point_{k:03}");
        write_trace_csv(&trace, &out_dir.join(format!("{stem}_trace.csv")))?;
        write_spikes_csv(&trace, &out_dir.join(format!("{stem}_spikes.csv")))?;
        if plot {
            fs::write(
                out_dir.join(format!("{stem}_trace.svg")),
                render_trace_svg(&trace),
            )?;
        }
        rows.push(row);
    }

    let mut csv = String::from("v_input_v,spike_count,frequency_hz,refractory_gap_s\n");
    for row in &rows {
        csv += &format!(
            "{:e},{},{},{}\n",
            row.v_input_v,
            row.spike_count,
            row.frequency_hz.map_or(String::new(), |f| format!("{f:e}")),
            row.refractory_gap_s
                .map_or(String::new(), |g| format!("{g:e}")),
        );
    }
    fs::write(out_dir.join("sweep.csv"), csv)?;
    Ok(rows)
}

/// Load a spec from disk, returning the spec and its directory (used to
/// resolve relative paths inside it).
pub fn load_spec(path: &Path) -> Result<(ScenarioSpec, PathBuf), RunError> {
    let text = fs::read_to_string(path)
        .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
    let spec = ScenarioSpec::parse(&text).map_err(RunError::Config)?;
    let base = path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    Ok((spec, base))
}

/// Re-ingest a trace CSV and recompute the headline statistics; used to
/// verify the CSV is a faithful projection of the in-memory trace.
pub fn reingest_trace_csv(text: &str) -> Result<(usize, Vec<f64>), String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty trace csv")?;
    if header != "time_s,v_in_v,v_device_v,current_a,temperature_k,v_a_v,block,spike" {
        return Err(format!("unexpected header `{header}`"));
    }
    let mut spike_times = Vec::new();
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(format!("bad row `{line}`"));
        }
        if f[6] == "integration" && f[7] == "1" {
            spike_times.push(f[0].parse::<f64>().map_err(|e| e.to_string())?);
        }
    }
    let isis = spike_times.windows(2).map(|w| w[1] - w[0]).collect();
    Ok((spike_times.len(), isis))
}

/// Convenience used by the CLI and tests: write text then flush.
pub fn write_text(path: &Path, text: &str) -> std::io::Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    f.flush()
}
