//! Input stimulus waveforms: constant levels, pulse programs with reset
//! gaps, and superposed sinusoids. Voltages are signed; the device model
//! consumes the magnitude.

use std::f64::consts::TAU;

use crate::error::ModelError;

/// Default width of the 0 V reset gap inserted between program pulses [s].
pub const DEFAULT_RESET_GAP: f64 = 100e-9;

#[derive(Debug, Clone, PartialEq)]
enum Segment {
    Constant { v: f64, duration: f64 },
    SinusoidSum {
        f1: f64,
        f2: f64,
        amplitude: f64,
        dc: f64,
        duration: f64,
    },
}

impl Segment {
    fn duration(&self) -> f64 {
        match self {
            Segment::Constant { duration, .. } => *duration,
            Segment::SinusoidSum { duration, .. } => *duration,
        }
    }

    /// Evaluate at segment-local time.
    fn eval(&self, s: f64) -> f64 {
        match self {
            Segment::Constant { v, .. } => *v,
            Segment::SinusoidSum {
                f1,
                f2,
                amplitude,
                dc,
                ..
            } => dc + amplitude * (TAU * f1 * s).sin() + amplitude * (TAU * f2 * s).sin(),
        }
    }
}

/// Piecewise stimulus, evaluable at any time within its domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    segments: Vec<Segment>,
    total: f64,
}

impl Waveform {
    fn from_segments(segments: Vec<Segment>) -> Self {
        let total = segments.iter().map(Segment::duration).sum();
        Self { segments, total }
    }

    /// Constant signed level on [0, t_end].
    pub fn constant(v: f64, t_end: f64) -> Self {
        Self::from_segments(vec![Segment::Constant { v, duration: t_end }])
    }

    /// dc + amplitude·sin(2πf1·t) + amplitude·sin(2πf2·t) on [0, t_end].
    pub fn sinusoid_sum(f1: f64, f2: f64, amplitude: f64, dc: f64, t_end: f64) -> Self {
        Self::from_segments(vec![Segment::SinusoidSum {
            f1,
            f2,
            amplitude,
            dc,
            duration: t_end,
        }])
    }

    /// Pulse train from `(voltage, duration, repeat)` levels, with a 0 V
    /// reset gap of `reset_gap` seconds after every pulse.
    pub fn pulse_program(levels: &[(f64, f64, u32)], reset_gap: f64) -> Self {
        let mut segments = Vec::new();
        for &(v, duration, repeat) in levels {
            for _ in 0..repeat {
                segments.push(Segment::Constant { v, duration });
                if reset_gap > 0.0 {
                    segments.push(Segment::Constant {
                        v: 0.0,
                        duration: reset_gap,
                    });
                }
            }
        }
        Self::from_segments(segments)
    }

    /// Repeat the whole program `n` times.
    pub fn repeated(&self, n: u32) -> Self {
        let mut segments = Vec::new();
        for _ in 0..n {
            segments.extend(self.segments.iter().cloned());
        }
        Self::from_segments(segments)
    }

    /// Total duration [s].
    pub fn duration(&self) -> f64 {
        self.total
    }

    /// Signed voltage at time `t`; errors outside [0, duration].
    pub fn eval(&self, t: f64) -> Result<f64, ModelError> {
        if !t.is_finite() || t < 0.0 || t > self.total {
            return Err(ModelError::StimulusOutOfRange {
                time: t,
                t_end: self.total,
            });
        }
        let mut start = 0.0;
        for seg in &self.segments {
            let end = start + seg.duration();
            if t < end || (t == end && std::ptr::eq(seg, self.segments.last().unwrap())) {
                return Ok(seg.eval(t - start));
            }
            start = end;
        }
        // t == total with accumulated rounding; evaluate the last segment.
        let last = self.segments.last().expect("waveform has segments");
        Ok(last.eval(t - (self.total - last.duration())))
    }

    /// Largest time step the simulator may take from time `t` without
    /// skipping a segment edge or under-resolving a sinusoid.
    pub fn step_limit(&self, t: f64) -> f64 {
        let mut start = 0.0;
        for seg in &self.segments {
            let end = start + seg.duration();
            if t < end {
                let to_edge = end - t;
                return match seg {
                    Segment::Constant { .. } => to_edge,
                    Segment::SinusoidSum { f1, f2, .. } => to_edge.min(0.01 / f1.max(*f2)),
                };
            }
            start = end;
        }
        f64::INFINITY
    }
}
