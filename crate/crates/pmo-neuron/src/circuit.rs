//! Series-network operating point: input source → switch → control
//! resistor R_C → RRAM → sense resistor R_S.
//!
//! The only nonlinear element is the RRAM, whose unclamped current is
//! strictly increasing in its own voltage, so the partition of the applied
//! voltage is found by bracketing bisection on the device voltage.

use crate::device::total_current;
use crate::error::ModelError;
use crate::params::DeviceParams;

/// Linear part of one neuron branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesNetwork {
    /// Sense resistance [Ω]; the drop across it (V_A) detects spikes.
    pub r_s: f64,
    /// Control resistance when Register-1 MSB = 0 [Ω].
    pub r_c_active: f64,
    /// When true, R_C is shorted out (MSB = 1).
    pub r_c_is_short: bool,
    /// Switch S1/S2 state; open disconnects the branch entirely.
    pub switch_closed: bool,
}

impl SeriesNetwork {
    pub fn new(r_s: f64, r_c_active: f64) -> Self {
        Self {
            r_s,
            r_c_active,
            r_c_is_short: true,
            switch_closed: true,
        }
    }

    /// Total linear series resistance currently in circuit [Ω].
    pub fn r_total(&self) -> f64 {
        if self.r_c_is_short {
            self.r_s
        } else {
            self.r_s + self.r_c_active
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.r_s > 0.0) || !self.r_s.is_finite() {
            return Err(ModelError::InvalidParameter {
                name: "r_s",
                value: self.r_s,
            });
        }
        if self.r_c_active < 0.0 || !self.r_c_active.is_finite() {
            return Err(ModelError::InvalidParameter {
                name: "r_c_active",
                value: self.r_c_active,
            });
        }
        Ok(())
    }
}

/// Solved branch operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    /// Voltage magnitude across the RRAM [V].
    pub v_device: f64,
    /// Branch current [A].
    pub current: f64,
    /// Sense voltage V_A = I·R_S [V].
    pub v_a: f64,
}

impl OperatingPoint {
    pub const OPEN: Self = Self {
        v_device: 0.0,
        current: 0.0,
        v_a: 0.0,
    };
}

/// Residual tolerance: |v_in − i·R_total − v_device| ≤ 1e-9·max(1, v_in).
pub fn residual_tolerance(v_in: f64) -> f64 {
    1e-9 * v_in.max(1.0)
}

/// Partition `v_in` between the device and the linear resistors at device
/// temperature `t`.
pub fn solve_operating_point(
    v_in: f64,
    t: f64,
    net: &SeriesNetwork,
    p: &DeviceParams,
) -> Result<OperatingPoint, ModelError> {
    if !v_in.is_finite() || v_in < 0.0 {
        return Err(ModelError::Domain {
            op: "solve_operating_point",
            what: "v_in",
            value: v_in,
        });
    }
    if !net.switch_closed || v_in == 0.0 {
        return Ok(OperatingPoint::OPEN);
    }
    let r_total = net.r_total();
    if r_total == 0.0 {
        let i = total_current(v_in, t, p)?;
        return Ok(OperatingPoint {
            v_device: v_in,
            current: i,
            v_a: 0.0,
        });
    }
    let residual = |v_dev: f64| -> Result<f64, ModelError> {
        Ok(v_in - total_current(v_dev, t, p)? * r_total - v_dev)
    };
    // Residual is strictly decreasing in v_dev; r(0) = v_in > 0.
    let mut lo = 0.0;
    let mut hi = v_in;
    let r_hi = residual(hi)?;
    if r_hi > 0.0 {
        // Should be impossible for a passive device; flag pathology.
        return Err(ModelError::BracketFailure { v_in });
    }
    let tol = residual_tolerance(v_in);
    let mut v_dev = 0.5 * (lo + hi);
    for _ in 0..200 {
        let r = residual(v_dev)?;
        if r.abs() <= tol {
            break;
        }
        if r > 0.0 {
            lo = v_dev;
        } else {
            hi = v_dev;
        }
        v_dev = 0.5 * (lo + hi);
    }
    let i = total_current(v_dev, t, p)?;
    Ok(OperatingPoint {
        v_device: v_dev,
        current: i,
        v_a: i * net.r_s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::total_current;

    fn net(r_s: f64) -> SeriesNetwork {
        SeriesNetwork::new(r_s, 0.0)
    }

    #[test]
    fn zero_input_is_zero() {
        let p = DeviceParams::nominal();
        let op = solve_operating_point(0.0, 300.0, &net(50.0), &p).unwrap();
        assert_eq!(op, OperatingPoint::OPEN);
    }

    #[test]
    fn open_switch_is_zero() {
        let p = DeviceParams::nominal();
        let mut n = net(50.0);
        n.switch_closed = false;
        let op = solve_operating_point(1.6, 300.0, &n, &p).unwrap();
        assert_eq!(op, OperatingPoint::OPEN);
    }

    #[test]
    fn residual_bound_holds() {
        let p = DeviceParams::nominal();
        let n = net(50.0);
        let op = solve_operating_point(1.6, 300.0, &n, &p).unwrap();
        let r = 1.6 - op.current * n.r_total() - op.v_device;
        assert!(r.abs() <= residual_tolerance(1.6), "residual {r}");
        assert!((op.v_a - op.current * 50.0).abs() < 1e-15);
    }

    #[test]
    fn matches_brute_force_scan() {
        // Oracle: scan v_device over [0, 1.6] V at 10 μV resolution and
        // keep the minimal-|residual| point.
        let p = DeviceParams::nominal();
        let n = net(50.0);
        let mut best = (f64::INFINITY, 0.0);
        let mut v = 0.0;
        while v <= 1.6 {
            let i = total_current(v, 300.0, &p).unwrap();
            let r = (1.6 - i * 50.0 - v).abs();
            if r < best.0 {
                best = (r, v);
            }
            v += 1e-5;
        }
        let op = solve_operating_point(1.6, 300.0, &n, &p).unwrap();
        assert!((op.v_device - best.1).abs() < 2e-5, "solved {}, brute {}", op.v_device, best.1);
    }

    #[test]
    fn short_flag_equals_zero_rc() {
        let p = DeviceParams::nominal();
        let shorted = SeriesNetwork {
            r_s: 50.0,
            r_c_active: 470.0,
            r_c_is_short: true,
            switch_closed: true,
        };
        let zero = SeriesNetwork {
            r_s: 50.0,
            r_c_active: 0.0,
            r_c_is_short: false,
            switch_closed: true,
        };
        let a = solve_operating_point(1.8, 320.0, &shorted, &p).unwrap();
        let b = solve_operating_point(1.8, 320.0, &zero, &p).unwrap();
        assert!((a.v_device - b.v_device).abs() < 1e-9);
    }

    #[test]
    fn device_voltage_decreases_with_series_resistance() {
        let p = DeviceParams::nominal();
        let mut prev = f64::INFINITY;
        for r in [10.0, 50.0, 200.0, 1000.0] {
            let op = solve_operating_point(1.6, 300.0, &net(r), &p).unwrap();
            assert!(op.v_device < prev);
            assert!(op.v_device >= 0.0 && op.v_device <= 1.6);
            prev = op.v_device;
        }
    }
}
