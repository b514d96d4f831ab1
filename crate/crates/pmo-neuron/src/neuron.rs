//! The clock-less neuron: an integration branch driven by the stimulus
//! and a refractory branch driven by a constant bias, each a series
//! (switch + R_C + RRAM + R_S) network. A 2-bit toggle register keeps
//! exactly one branch connected; a 4-bit pattern register shifts on every
//! integration-branch spike and its MSB decides whether the control
//! resistor is shorted. Every state change is triggered by a sense-voltage
//! threshold crossing — there is no global tick.

use crate::circuit::{solve_operating_point, OperatingPoint, SeriesNetwork};
use crate::device::{temperature_derivative, StepConfig};
use crate::error::ModelError;
use crate::params::DeviceParams;
use crate::stimulus::Waveform;

/// Hard cap on a single event-loop step [s], so the disconnected branch's
/// cooling and slow stimuli stay well resolved.
const GLOBAL_DT_CAP: f64 = 200e-9;
/// Threshold-crossing localization resolution [s].
const CROSSING_RESOLUTION: f64 = 1e-12;
/// Minimum advance after a spike so event times strictly increase [s].
const POST_SPIKE_ADVANCE: f64 = 1e-12;
/// Consecutive sub-nanosecond inter-event gaps tolerated before the run
/// is declared a pathological toggle ping-pong.
const PINGPONG_LIMIT: u32 = 32;

/// Which branch of the neuron an event or sample belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Integration,
    Refractory,
}

impl std::fmt::Display for Block {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Block::Integration => write!(f, "integration"),
            Block::Refractory => write!(f, "refractory"),
        }
    }
}

/// Fixed-width shift register. `bits[0]` is the MSB. A shift moves every
/// bit one place toward the MSB; the vacated LSB refills from the old MSB
/// when `wrap` is set, otherwise with 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftRegister {
    bits: Vec<bool>,
    wrap: bool,
}

impl ShiftRegister {
    pub fn new(bits: Vec<bool>, wrap: bool) -> Self {
        assert!(!bits.is_empty(), "register width must be positive");
        Self { bits, wrap }
    }

    /// Parse e.g. `"1110"` (MSB first).
    pub fn from_str_bits(s: &str, wrap: bool) -> Option<Self> {
        if s.is_empty() || !s.chars().all(|c| c == '0' || c == '1') {
            return None;
        }
        Some(Self::new(s.chars().map(|c| c == '1').collect(), wrap))
    }

    pub fn msb(&self) -> bool {
        self.bits[0]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn wrap(&self) -> bool {
        self.wrap
    }

    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn shift(&mut self) {
        let msb = self.bits.remove(0);
        self.bits.push(if self.wrap { msb } else { false });
    }

    /// MSB-first bit string, e.g. `"1110"`.
    pub fn as_bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

/// Full parameterization of one neuron.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuronConfig {
    /// RRAM of the integration branch.
    pub device_input: DeviceParams,
    /// RRAM of the refractory branch.
    pub device_refractory: DeviceParams,
    pub network_input: SeriesNetwork,
    pub network_refractory: SeriesNetwork,
    /// Constant drive magnitude of the refractory branch [V].
    pub v_refractory: f64,
    /// 4-bit pattern register; its MSB shorts R_C when set.
    pub register1: ShiftRegister,
    /// 2-bit toggle register; bit 0 set ⇒ integration branch connected.
    pub register2: ShiftRegister,
    /// Spike-detection threshold on the sense voltage V_A [V].
    pub v_th_detect: f64,
    /// Delay between a crossing and the switch/register response [s].
    pub detector_latency: f64,
    pub step: StepConfig,
}

impl NeuronConfig {
    fn base(p: DeviceParams, r_s: f64, v_refractory: f64, v_th_detect: f64) -> Self {
        Self {
            device_input: p,
            device_refractory: p,
            network_input: SeriesNetwork::new(r_s, 0.0),
            network_refractory: SeriesNetwork::new(r_s, 0.0),
            v_refractory,
            register1: ShiftRegister::new(vec![true; 4], true),
            register2: ShiftRegister::new(vec![true, false], true),
            v_th_detect,
            detector_latency: 0.0,
            step: StepConfig::default(),
        }
    }

    /// Regular-spiking preset: frequency-calibrated thermal pair, 50 Ω
    /// sense resistors, detection at the compliance plateau (0.5 V), and
    /// a refractory bias giving the calibrated quiescent gap.
    pub fn regular_spiking() -> Self {
        Self::base(DeviceParams::frequency_calibrated(), 50.0, 1.5971, 0.5)
    }

    /// Chattering preset: pattern register 1110 with wrap-around, active
    /// control resistor 150 Ω, early detection at 0.2 V so the loaded
    /// (R_C inserted) integration still reaches the detector.
    pub fn chattering() -> Self {
        let mut c = Self::base(DeviceParams::frequency_calibrated(), 50.0, 1.657868, 0.2);
        c.network_input.r_c_active = 150.0;
        c.register1 = ShiftRegister::from_str_bits("1110", true).unwrap();
        c
    }

    /// Intrinsic-bursting preset: as chattering, but the pattern register
    /// zero-fills, so the MSB stream is 1,1,1,0,0,0,…
    pub fn intrinsic_bursting() -> Self {
        let mut c = Self::chattering();
        c.register1 = ShiftRegister::from_str_bits("1110", false).unwrap();
        c
    }

    /// Preset for slow time-varying stimuli: spike-time-calibrated device
    /// (bare spike times in the 100 ns – 1 μs decade) and a fast
    /// refractory branch.
    pub fn sinusoid_response() -> Self {
        Self::base(DeviceParams::spike_time_calibrated(), 50.0, 2.0, 0.5)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.device_input.validate()?;
        self.device_refractory.validate()?;
        self.network_input.validate()?;
        self.network_refractory.validate()?;
        if !(self.v_th_detect > 0.0) || !self.v_th_detect.is_finite() {
            return Err(ModelError::InvalidParameter {
                name: "v_th_detect",
                value: self.v_th_detect,
            });
        }
        if !(self.v_refractory >= 0.0) || !self.v_refractory.is_finite() {
            return Err(ModelError::InvalidParameter {
                name: "v_refractory",
                value: self.v_refractory,
            });
        }
        if self.detector_latency < 0.0 || !self.detector_latency.is_finite() {
            return Err(ModelError::InvalidParameter {
                name: "detector_latency",
                value: self.detector_latency,
            });
        }
        if self.register2.bits().len() != 2 || self.register2.popcount() != 1 {
            return Err(ModelError::InvalidParameter {
                name: "register2_popcount",
                value: self.register2.popcount() as f64,
            });
        }
        Ok(())
    }
}

/// One recorded point of a branch's electrical/thermal state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub time: f64,
    /// Signed drive seen by this branch: the stimulus for the integration
    /// branch, the (positive) refractory bias for the refractory branch,
    /// 0 when the branch is disconnected.
    pub v_in: f64,
    pub v_device: f64,
    pub current: f64,
    pub temperature: f64,
    pub v_a: f64,
    pub block: Block,
    pub spike: bool,
}

/// A detector firing.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikeEvent {
    pub time: f64,
    pub source: Block,
    /// Pattern-register contents at the instant of the spike (before the
    /// post-spike shift), MSB first.
    pub register1_bits: String,
}

/// Full simulation record.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub samples: Vec<TraceSample>,
    pub events: Vec<SpikeEvent>,
    pub t_end: f64,
}

impl Trace {
    pub fn spike_times(&self, source: Block) -> Vec<f64> {
        self.events
            .iter()
            .filter(|e| e.source == source)
            .map(|e| e.time)
            .collect()
    }

    /// Inter-spike intervals of the integration branch.
    pub fn isis(&self) -> Vec<f64> {
        let t = self.spike_times(Block::Integration);
        t.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Mean firing rate of the integration branch [Hz], from the mean ISI
    /// after discarding `skip` initial transient intervals.
    pub fn mean_frequency(&self, skip: usize) -> Option<f64> {
        let isis = self.isis();
        if isis.len() <= skip {
            return None;
        }
        let tail = &isis[skip..];
        Some(tail.len() as f64 / tail.iter().sum::<f64>())
    }
}

struct LoopState {
    t: f64,
    /// Temperatures: [integration, refractory].
    temp: [f64; 2],
    reg1: ShiftRegister,
    reg2: ShiftRegister,
    last_event_t: f64,
    rapid_events: u32,
}

fn active_block(reg2: &ShiftRegister) -> Block {
    if reg2.bits()[0] {
        Block::Integration
    } else {
        Block::Refractory
    }
}

fn branch_of(cfg: &NeuronConfig, block: Block, reg1: &ShiftRegister) -> (DeviceParams, SeriesNetwork) {
    match block {
        Block::Integration => {
            let mut net = cfg.network_input;
            net.r_c_is_short = reg1.msb();
            net.switch_closed = true;
            (cfg.device_input, net)
        }
        Block::Refractory => {
            let mut net = cfg.network_refractory;
            net.switch_closed = true;
            (cfg.device_refractory, net)
        }
    }
}

fn block_index(b: Block) -> usize {
    match b {
        Block::Integration => 0,
        Block::Refractory => 1,
    }
}

/// Run the neuron against `stimulus` until `t_end`. With
/// `sample_interval = None` every integrator step is recorded; otherwise
/// samples are taken on (at least) that grid, plus one at every spike.
pub fn simulate(
    cfg: &NeuronConfig,
    stimulus: &Waveform,
    t_end: f64,
    sample_interval: Option<f64>,
) -> Result<Trace, ModelError> {
    cfg.validate()?;
    if !(t_end > 0.0) || t_end > stimulus.duration() {
        return Err(ModelError::StimulusOutOfRange {
            time: t_end,
            t_end: stimulus.duration(),
        });
    }
    let mut st = LoopState {
        t: 0.0,
        temp: [cfg.device_input.t_amb, cfg.device_refractory.t_amb],
        reg1: cfg.register1.clone(),
        reg2: cfg.register2.clone(),
        last_event_t: f64::NEG_INFINITY,
        rapid_events: 0,
    };
    let mut trace = Trace {
        t_end,
        ..Default::default()
    };
    let mut next_sample = 0.0_f64;

    // Record both branches at the current instant.
    let record = |trace: &mut Trace,
                  st: &LoopState,
                  active: Block,
                  v_sig: f64,
                  op: &OperatingPoint,
                  spike: bool| {
        let idle = match active {
            Block::Integration => Block::Refractory,
            Block::Refractory => Block::Integration,
        };
        let active_v_in = match active {
            Block::Integration => v_sig,
            Block::Refractory => cfg.v_refractory,
        };
        trace.samples.push(TraceSample {
            time: st.t,
            v_in: active_v_in,
            v_device: op.v_device,
            current: op.current,
            temperature: st.temp[block_index(active)],
            v_a: op.v_a,
            block: active,
            spike,
        });
        trace.samples.push(TraceSample {
            time: st.t,
            v_in: 0.0,
            v_device: 0.0,
            current: 0.0,
            temperature: st.temp[block_index(idle)],
            v_a: 0.0,
            block: idle,
            spike: false,
        });
    };

    while st.t < t_end {
        let active = active_block(&st.reg2);
        let v_sig = stimulus.eval(st.t)?;
        let (params, net) = branch_of(cfg, active, &st.reg1);
        let v_mag = match active {
            Block::Integration => v_sig.abs(),
            Block::Refractory => cfg.v_refractory,
        };
        let ai = block_index(active);
        let oi = 1 - ai;
        let tau_other = match active {
            Block::Integration => cfg.device_refractory.tau_thermal(),
            Block::Refractory => cfg.device_input.tau_thermal(),
        };
        let t_amb_other = match active {
            Block::Integration => cfg.device_refractory.t_amb,
            Block::Refractory => cfg.device_input.t_amb,
        };

        let op = solve_operating_point(v_mag, st.temp[ai], &net, &params)?;
        if op.v_a >= cfg.v_th_detect {
            // Already over threshold at the step start (hot reconnect or
            // a stimulus edge): the detector fires immediately.
            record(&mut trace, &st, active, v_sig, &op, true);
            fire(&mut st, &mut trace, active, cfg)?;
            st.t += POST_SPIKE_ADVANCE;
            continue;
        }

        let d = temperature_derivative(st.temp[ai], op.current * op.v_device, &params)?;
        let mut dt = if d == 0.0 {
            GLOBAL_DT_CAP
        } else {
            cfg.step.delta_t_cap / d.abs()
        };
        dt = dt
            .min(GLOBAL_DT_CAP)
            .min(stimulus.step_limit(st.t))
            .min(t_end - st.t);
        if sample_interval.is_some() && next_sample > st.t {
            dt = dt.min(next_sample - st.t);
        }
        dt = dt.max(cfg.step.dt_floor);

        let temp_after = st.temp[ai] + d * dt;
        let op_after = solve_operating_point(v_mag, temp_after, &net, &params)?;
        if op_after.v_a >= cfg.v_th_detect {
            // Crossing inside this step: bisect the substep (voltage held
            // at its step-start value, T linear in time) to 1 ps.
            let mut lo = 0.0_f64;
            let mut hi = dt;
            while hi - lo > CROSSING_RESOLUTION {
                let mid = 0.5 * (lo + hi);
                let opm = solve_operating_point(v_mag, st.temp[ai] + d * mid, &net, &params)?;
                if opm.v_a >= cfg.v_th_detect {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let s = hi;
            st.temp[ai] += d * s;
            st.temp[oi] = t_amb_other + (st.temp[oi] - t_amb_other) * (-s / tau_other).exp();
            st.t += s;
            let op_spike = solve_operating_point(v_mag, st.temp[ai], &net, &params)?;
            record(&mut trace, &st, active, v_sig, &op_spike, true);
            fire(&mut st, &mut trace, active, cfg)?;
            st.t += POST_SPIKE_ADVANCE;
            continue;
        }

        st.temp[ai] = temp_after;
        st.temp[oi] = t_amb_other + (st.temp[oi] - t_amb_other) * (-dt / tau_other).exp();
        st.t += dt;
        match sample_interval {
            None => record(&mut trace, &st, active, v_sig, &op_after, false),
            Some(iv) => {
                if st.t >= next_sample {
                    record(&mut trace, &st, active, v_sig, &op_after, false);
                    while next_sample <= st.t {
                        next_sample += iv;
                    }
                }
            }
        }
    }
    Ok(trace)
}

fn fire(
    st: &mut LoopState,
    trace: &mut Trace,
    source: Block,
    cfg: &NeuronConfig,
) -> Result<(), ModelError> {
    if st.t - st.last_event_t < 1e-9 {
        st.rapid_events += 1;
        if st.rapid_events > PINGPONG_LIMIT {
            return Err(ModelError::NoConvergence(
                "toggle ping-pong: both branches re-fire immediately",
            ));
        }
    } else {
        st.rapid_events = 0;
    }
    st.last_event_t = st.t;
    trace.events.push(SpikeEvent {
        time: st.t,
        source,
        register1_bits: st.reg1.as_bit_string(),
    });
    st.reg2.shift();
    debug_assert_eq!(st.reg2.popcount(), 1);
    if source == Block::Integration {
        st.reg1.shift();
    }
    st.t += cfg.detector_latency;
    Ok(())
}

/// Time for a freshly connected branch (device at `t0_temp`) to drive its
/// sense voltage up to `v_th` under constant drive magnitude `v_mag`.
/// `None` if it settles sub-threshold instead.
pub fn time_to_threshold(
    v_mag: f64,
    params: &DeviceParams,
    net: &SeriesNetwork,
    v_th: f64,
    t0_temp: f64,
    step: &StepConfig,
) -> Result<Option<f64>, ModelError> {
    let mut temp = t0_temp;
    let mut elapsed = 0.0_f64;
    let wall = 1e-2;
    while elapsed < wall {
        let op = solve_operating_point(v_mag, temp, net, params)?;
        if op.v_a >= v_th {
            return Ok(Some(elapsed));
        }
        let d = temperature_derivative(temp, op.current * op.v_device, params)?;
        // Under constant drive, a non-positive derivative while still
        // sub-threshold means the branch descends toward a stable
        // balance whose sense voltage is below the detector: no spike.
        if d <= 0.0 {
            return Ok(None);
        }
        let dt = (step.delta_t_cap / d).max(step.dt_floor);
        // Locate the crossing inside the final substep.
        let after = solve_operating_point(v_mag, temp + d * dt, net, params)?;
        if after.v_a >= v_th {
            let (mut lo, mut hi) = (0.0_f64, dt);
            while hi - lo > CROSSING_RESOLUTION {
                let mid = 0.5 * (lo + hi);
                let opm = solve_operating_point(v_mag, temp + d * mid, net, params)?;
                if opm.v_a >= v_th {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(Some(elapsed + hi));
        }
        temp += d * dt;
        elapsed += dt;
    }
    Err(ModelError::NoConvergence("time_to_threshold exceeded wall time"))
}

/// Analytic refractory period: spike time of the refractory branch from
/// ambient at its configured bias. Errors if the bias can never fire.
pub fn refractory_period(cfg: &NeuronConfig) -> Result<f64, ModelError> {
    cfg.validate()?;
    let mut net = cfg.network_refractory;
    net.switch_closed = true;
    match time_to_threshold(
        cfg.v_refractory,
        &cfg.device_refractory,
        &net,
        cfg.v_th_detect,
        cfg.device_refractory.t_amb,
        &cfg.step,
    )? {
        Some(t) => Ok(t + cfg.detector_latency),
        None => Err(ModelError::NeverFires {
            v_refractory: cfg.v_refractory,
        }),
    }
}

/// Solve for the refractory bias giving a target refractory period, by
/// bisection over [v_lo, v_hi] (the period is decreasing in the bias).
pub fn solve_v_refractory(
    cfg: &NeuronConfig,
    target: f64,
    v_lo: f64,
    v_hi: f64,
) -> Result<f64, ModelError> {
    let mut probe = cfg.clone();
    let (mut lo, mut hi) = (v_lo, v_hi);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        probe.v_refractory = mid;
        let t = match refractory_period(&probe) {
            Ok(t) => Some(t),
            Err(ModelError::NeverFires { .. }) => None,
            Err(e) => return Err(e),
        };
        match t {
            None => lo = mid,
            Some(t) if t > target => lo = mid,
            Some(_) => hi = mid,
        }
    }
    let v = 0.5 * (lo + hi);
    probe.v_refractory = v;
    refractory_period(&probe)?; // must fire at the solution
    Ok(v)
}

/// Firing-pattern label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pattern {
    /// Regular spiking: a single ISI cluster.
    Rs,
    /// Intrinsic bursting: short ISIs followed only by long ones.
    Ib,
    /// Chattering: one long ISI every fourth interval, periodically.
    Ch,
    Other,
}

impl std::fmt::Display for Pattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Pattern::Rs => write!(f, "RS"),
            Pattern::Ib => write!(f, "IB"),
            Pattern::Ch => write!(f, "CH"),
            Pattern::Other => write!(f, "other"),
        }
    }
}

/// Split ISIs into short/long by the best 2-means partition of the sorted
/// values; returns (short mean, long mean, per-ISI long flags).
fn two_means_split(isis: &[f64]) -> (f64, f64, Vec<bool>) {
    let mut sorted = isis.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let mut best = (f64::INFINITY, 1usize);
    for k in 1..n {
        let (a, b) = sorted.split_at(k);
        let ma = a.iter().sum::<f64>() / a.len() as f64;
        let mb = b.iter().sum::<f64>() / b.len() as f64;
        let cost = a.iter().map(|x| (x - ma).powi(2)).sum::<f64>()
            + b.iter().map(|x| (x - mb).powi(2)).sum::<f64>();
        if cost < best.0 {
            best = (cost, k);
        }
    }
    let boundary = 0.5 * (sorted[best.1 - 1] + sorted[best.1]);
    let short: Vec<f64> = sorted[..best.1].to_vec();
    let long: Vec<f64> = sorted[best.1..].to_vec();
    let ms = short.iter().sum::<f64>() / short.len() as f64;
    let ml = long.iter().sum::<f64>() / long.len() as f64;
    let flags = isis.iter().map(|&x| x > boundary).collect();
    (ms, ml, flags)
}

/// Classify a spike train by its ISI structure. `tolerance` is the
/// minimum relative separation between the short and long ISI clusters
/// for them to count as distinct (below it the train is regular spiking).
pub fn classify_pattern(spike_times: &[f64], tolerance: f64) -> Result<Pattern, ModelError> {
    if spike_times.len() < 6 {
        return Err(ModelError::TooFewSpikes {
            got: spike_times.len(),
            need: 6,
        });
    }
    let isis: Vec<f64> = spike_times.windows(2).map(|w| w[1] - w[0]).collect();
    let (ms, ml, flags) = two_means_split(&isis);
    if (ml - ms) <= tolerance * 0.5 * (ml + ms) {
        return Ok(Pattern::Rs);
    }
    let long_idx: Vec<usize> = flags
        .iter()
        .enumerate()
        .filter_map(|(i, &l)| l.then_some(i))
        .collect();
    if long_idx.is_empty() {
        return Ok(Pattern::Rs);
    }
    // IB: one maximal run of long ISIs extending to the end.
    let first = long_idx[0];
    if long_idx.len() >= 2 && long_idx == (first..isis.len()).collect::<Vec<_>>() && first >= 1 {
        return Ok(Pattern::Ib);
    }
    // CH: long ISIs recur with period 4 (three shorts between them).
    if long_idx.len() >= 2 && long_idx.windows(2).all(|w| w[1] - w[0] == 4) {
        return Ok(Pattern::Ch);
    }
    Ok(Pattern::Other)
}
