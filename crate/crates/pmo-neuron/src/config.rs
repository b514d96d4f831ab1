//! Scenario configuration files: TOML with explicit units in every key
//! name and strict rejection of unknown keys — silent unit mistakes are
//! the dominant failure mode in device simulation, so a typo'd or
//! unit-less key is a hard error, not a default.

use serde::Deserialize;

use crate::circuit::SeriesNetwork;
use crate::device::StepConfig;
use crate::neuron::{NeuronConfig, ShiftRegister};
use crate::params::DeviceParams;
use crate::stimulus::{Waveform, DEFAULT_RESET_GAP};

/// Top-level scenario file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub stimulus: Option<StimulusSection>,
    #[serde(default)]
    pub neuron: Option<NeuronSection>,
    #[serde(default)]
    pub device: Option<DeviceSection>,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub calibration: Option<CalibrationSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub kind: ScenarioKind,
    #[serde(default)]
    pub t_end_s: Option<f64>,
    #[serde(default)]
    pub sample_interval_s: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Constant,
    RefractorySweep,
    Sinusoid,
    PatternCh,
    PatternIb,
    ExperimentReplication,
    ScalingReport,
    Calibrate,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StimulusSection {
    /// Constant-scenario signed input level [V].
    #[serde(default)]
    pub v_input_v: Option<f64>,
    #[serde(default)]
    pub f1_hz: Option<f64>,
    #[serde(default)]
    pub f2_hz: Option<f64>,
    #[serde(default)]
    pub amplitude_v: Option<f64>,
    #[serde(default)]
    pub dc_v: Option<f64>,
    /// Pulse program for experiment replication.
    #[serde(default)]
    pub pulses: Vec<PulseSpec>,
    #[serde(default)]
    pub reset_gap_s: Option<f64>,
    /// Repeat the whole pulse program this many times.
    #[serde(default)]
    pub program_repeat: Option<u32>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSpec {
    pub v_v: f64,
    pub width_s: f64,
    #[serde(default = "one")]
    pub repeat: u32,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeuronSection {
    #[serde(default)]
    pub preset: Option<NeuronPreset>,
    #[serde(default)]
    pub v_refractory_v: Option<f64>,
    #[serde(default)]
    pub v_th_detect_v: Option<f64>,
    #[serde(default)]
    pub r_s_ohm: Option<f64>,
    #[serde(default)]
    pub r_c_ohm: Option<f64>,
    /// Pattern register bits, MSB first, e.g. "1110".
    #[serde(default)]
    pub register1: Option<String>,
    #[serde(default)]
    pub register1_wrap: Option<bool>,
    #[serde(default)]
    pub detector_latency_s: Option<f64>,
    #[serde(default)]
    pub delta_t_cap_k: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NeuronPreset {
    RegularSpiking,
    Chattering,
    IntrinsicBursting,
    SinusoidResponse,
}

/// Device overrides in datasheet units.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSection {
    #[serde(default)]
    pub mu_cm2_per_vs: Option<f64>,
    #[serde(default)]
    pub phi_b_ev: Option<f64>,
    #[serde(default)]
    pub eps_pmo: Option<f64>,
    #[serde(default)]
    pub n_v_per_cm3: Option<f64>,
    #[serde(default)]
    pub e_trap_ev: Option<f64>,
    #[serde(default)]
    pub n_t_per_cm3: Option<f64>,
    #[serde(default)]
    pub length_nm: Option<f64>,
    #[serde(default)]
    pub area_um2: Option<f64>,
    #[serde(default)]
    pub t_amb_k: Option<f64>,
    #[serde(default)]
    pub r_th_k_per_w: Option<f64>,
    #[serde(default)]
    pub c_th_pj_per_k: Option<f64>,
    #[serde(default)]
    pub i_compliance_ma: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Signed input levels, one simulation per entry.
    pub v_input_v: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSection {
    /// CSV of observations (v_volts,t_spike_seconds,weight).
    pub observations_csv: String,
    /// Free parameter names: r_th, c_th, i_compliance, phi_b, e_trap.
    #[serde(default)]
    pub free: Option<Vec<String>>,
}

impl ScenarioSpec {
    pub fn parse(text: &str) -> Result<Self, String> {
        let spec: ScenarioSpec =
            toml::from_str(text).map_err(|e| format!("config parse error: {e}"))?;
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<(), String> {
        if let Some(iv) = self.scenario.sample_interval_s {
            if !(iv > 0.0) {
                return Err("scenario.sample_interval_s must be > 0".into());
            }
        }
        if let Some(t) = self.scenario.t_end_s {
            if !(t > 0.0) {
                return Err("scenario.t_end_s must be > 0".into());
            }
        }
        match self.scenario.kind {
            ScenarioKind::Constant | ScenarioKind::RefractorySweep => {
                let v = self
                    .stimulus
                    .as_ref()
                    .and_then(|s| s.v_input_v)
                    .ok_or("stimulus.v_input_v is required for this scenario")?;
                if !v.is_finite() {
                    return Err("stimulus.v_input_v must be finite".into());
                }
            }
            ScenarioKind::Sinusoid => {
                let s = self
                    .stimulus
                    .as_ref()
                    .ok_or("a [stimulus] section is required for sinusoid scenarios")?;
                for (name, v) in [
                    ("f1_hz", s.f1_hz),
                    ("f2_hz", s.f2_hz),
                    ("amplitude_v", s.amplitude_v),
                    ("dc_v", s.dc_v),
                ] {
                    if v.is_none() {
                        return Err(format!("stimulus.{name} is required for sinusoid scenarios"));
                    }
                }
            }
            ScenarioKind::ExperimentReplication => {
                let s = self
                    .stimulus
                    .as_ref()
                    .ok_or("a [stimulus] section with pulses is required for replication")?;
                if s.pulses.is_empty() {
                    return Err("stimulus.pulses must not be empty for replication".into());
                }
                for p in &s.pulses {
                    if !(p.width_s > 0.0) {
                        return Err("stimulus.pulses[].width_s must be > 0".into());
                    }
                }
            }
            ScenarioKind::Calibrate => {
                if self.calibration.is_none() {
                    return Err("a [calibration] section is required for calibrate scenarios".into());
                }
            }
            ScenarioKind::PatternCh | ScenarioKind::PatternIb | ScenarioKind::ScalingReport => {}
        }
        if let Some(n) = &self.neuron {
            if let Some(r) = &n.register1 {
                if ShiftRegister::from_str_bits(r, true).is_none() {
                    return Err(format!("neuron.register1 `{r}` is not a bit string"));
                }
            }
        }
        Ok(())
    }

    /// Resolved device parameters: preset/defaults overridden field-wise
    /// by the [device] section.
    pub fn device_params(&self, base: DeviceParams) -> DeviceParams {
        let mut p = base;
        if let Some(d) = &self.device {
            if let Some(v) = d.mu_cm2_per_vs {
                p.mu = v * 1e-4;
            }
            if let Some(v) = d.phi_b_ev {
                p.phi_b = v;
            }
            if let Some(v) = d.eps_pmo {
                p.eps_pmo = v;
            }
            if let Some(v) = d.n_v_per_cm3 {
                p.n_v = v * 1e6;
            }
            if let Some(v) = d.e_trap_ev {
                p.e_trap = v;
            }
            if let Some(v) = d.n_t_per_cm3 {
                p.n_t = v * 1e6;
            }
            if let Some(v) = d.length_nm {
                p.length = v * 1e-9;
            }
            if let Some(v) = d.area_um2 {
                p.area = v * 1e-12;
            }
            if let Some(v) = d.t_amb_k {
                p.t_amb = v;
            }
            if let Some(v) = d.r_th_k_per_w {
                p.r_th = v;
            }
            if let Some(v) = d.c_th_pj_per_k {
                p.c_th = v * 1e-12;
            }
            if let Some(v) = d.i_compliance_ma {
                p.i_compliance = v * 1e-3;
            }
        }
        p
    }

    /// Resolved neuron configuration for this scenario.
    pub fn neuron_config(&self) -> Result<NeuronConfig, String> {
        let preset = self.neuron.as_ref().and_then(|n| n.preset).unwrap_or(
            match self.scenario.kind {
                ScenarioKind::PatternCh => NeuronPreset::Chattering,
                ScenarioKind::PatternIb => NeuronPreset::IntrinsicBursting,
                ScenarioKind::Sinusoid => NeuronPreset::SinusoidResponse,
                _ => NeuronPreset::RegularSpiking,
            },
        );
        let mut cfg = match preset {
            NeuronPreset::RegularSpiking => NeuronConfig::regular_spiking(),
            NeuronPreset::Chattering => NeuronConfig::chattering(),
            NeuronPreset::IntrinsicBursting => NeuronConfig::intrinsic_bursting(),
            NeuronPreset::SinusoidResponse => NeuronConfig::sinusoid_response(),
        };
        cfg.device_input = self.device_params(cfg.device_input);
        cfg.device_refractory = self.device_params(cfg.device_refractory);
        if let Some(n) = &self.neuron {
            if let Some(v) = n.v_refractory_v {
                cfg.v_refractory = v;
            }
            if let Some(v) = n.v_th_detect_v {
                cfg.v_th_detect = v;
            }
            if let Some(r) = n.r_s_ohm {
                cfg.network_input = SeriesNetwork {
                    r_s: r,
                    ..cfg.network_input
                };
                cfg.network_refractory = SeriesNetwork {
                    r_s: r,
                    ..cfg.network_refractory
                };
            }
            if let Some(r) = n.r_c_ohm {
                cfg.network_input.r_c_active = r;
            }
            if let Some(bits) = &n.register1 {
                let wrap = n.register1_wrap.unwrap_or(cfg.register1.wrap());
                cfg.register1 = ShiftRegister::from_str_bits(bits, wrap)
                    .ok_or_else(|| format!("neuron.register1 `{bits}` is not a bit string"))?;
            } else if let Some(wrap) = n.register1_wrap {
                cfg.register1 = ShiftRegister::new(cfg.register1.bits().to_vec(), wrap);
            }
            if let Some(l) = n.detector_latency_s {
                cfg.detector_latency = l;
            }
            if let Some(c) = n.delta_t_cap_k {
                cfg.step = StepConfig {
                    delta_t_cap: c,
                    ..cfg.step
                };
            }
        }
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }

    /// Simulation horizon with a scenario-appropriate default.
    pub fn t_end(&self) -> f64 {
        self.scenario.t_end_s.unwrap_or(match self.scenario.kind {
            ScenarioKind::Sinusoid => 20e-6,
            _ => 30e-6,
        })
    }

    /// Build the stimulus for simulation scenarios.
    pub fn waveform(&self) -> Result<Waveform, String> {
        let t_end = self.t_end();
        match self.scenario.kind {
            ScenarioKind::Constant | ScenarioKind::RefractorySweep => {
                let v = self.stimulus.as_ref().and_then(|s| s.v_input_v).unwrap();
                Ok(Waveform::constant(v, t_end))
            }
            ScenarioKind::PatternCh | ScenarioKind::PatternIb => {
                let v = self
                    .stimulus
                    .as_ref()
                    .and_then(|s| s.v_input_v)
                    .unwrap_or(-2.2);
                Ok(Waveform::constant(v, t_end))
            }
            ScenarioKind::Sinusoid => {
                let s = self.stimulus.as_ref().unwrap();
                Ok(Waveform::sinusoid_sum(
                    s.f1_hz.unwrap(),
                    s.f2_hz.unwrap(),
                    s.amplitude_v.unwrap(),
                    s.dc_v.unwrap(),
                    t_end,
                ))
            }
            ScenarioKind::ExperimentReplication => {
                let s = self.stimulus.as_ref().unwrap();
                let levels: Vec<(f64, f64, u32)> =
                    s.pulses.iter().map(|p| (p.v_v, p.width_s, p.repeat)).collect();
                let gap = s.reset_gap_s.unwrap_or(DEFAULT_RESET_GAP);
                let w = Waveform::pulse_program(&levels, gap);
                Ok(match s.program_repeat {
                    Some(n) if n > 1 => w.repeated(n),
                    _ => w,
                })
            }
            ScenarioKind::ScalingReport | ScenarioKind::Calibrate => {
                Err("this scenario kind has no stimulus".into())
            }
        }
    }
}
