//! Analytical electrothermal model of the PMO RRAM.
//!
//! Current is the sum of an Ohmic (thermionic) term linear in V and a
//! space-charge-limited term quadratic in V, both with a (T/T_amb)^{3/2}
//! power-law and an Arrhenius factor. The effective device temperature
//! obeys a lumped thermal balance: C_th dT/dt = I·V − (T − T_amb)/R_th.
//! Self-heating couples the two: current raises temperature, which raises
//! current, until either a stable balance is found or the current runs
//! away to the compliance limit.

use crate::error::ModelError;
use crate::params::{DeviceParams, EPS0, K_B, Q};

/// Instantaneous state of one device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceState {
    /// Effective device temperature [K].
    pub temperature: f64,
    /// Last self-consistently solved current [A].
    pub current: f64,
    /// Simulation time [s].
    pub time: f64,
}

impl DeviceState {
    /// A device at rest: ambient temperature, zero current, t = 0.
    pub fn at_ambient(p: &DeviceParams) -> Self {
        Self {
            temperature: p.t_amb,
            current: 0.0,
            time: 0.0,
        }
    }
}

/// Adaptive-integration knobs for [`step_state`] and [`spike_time`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    /// Maximum temperature change per substep [K].
    pub delta_t_cap: f64,
    /// Minimum substep [s]; going below this raises `StepUnderflow`.
    pub dt_floor: f64,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self {
            delta_t_cap: 0.5,
            dt_floor: 1e-12,
        }
    }
}

fn check_inputs(op: &'static str, v: f64, t: f64) -> Result<(), ModelError> {
    if !v.is_finite() || v < 0.0 {
        return Err(ModelError::Domain {
            op,
            what: "voltage",
            value: v,
        });
    }
    if !t.is_finite() || t <= 0.0 {
        return Err(ModelError::Domain {
            op,
            what: "temperature",
            value: t,
        });
    }
    Ok(())
}

/// Ohmic (thermionic) conduction current [A] at voltage magnitude `v` and
/// temperature `t`.
pub fn ohmic_current(v: f64, t: f64, p: &DeviceParams) -> Result<f64, ModelError> {
    check_inputs("ohmic_current", v, t)?;
    let thermal = (t / p.t_amb).powf(1.5) * (-Q * p.phi_b / (K_B * t)).exp();
    Ok(Q * p.area * p.mu * p.n_v * thermal * (v / p.length))
}

/// Space-charge-limited conduction current [A].
pub fn sclc_current(v: f64, t: f64, p: &DeviceParams) -> Result<f64, ModelError> {
    check_inputs("sclc_current", v, t)?;
    let thermal = (t / p.t_amb).powf(1.5) * (-Q * p.e_trap / (K_B * t)).exp();
    Ok(p.area * p.mu * EPS0 * p.eps_pmo * (p.n_v / p.n_t) * thermal * (v * v / (p.length * p.length * p.length)))
}

/// Total device current without the compliance clamp [A].
pub fn total_current_unclamped(v: f64, t: f64, p: &DeviceParams) -> Result<f64, ModelError> {
    Ok(ohmic_current(v, t, p)? + sclc_current(v, t, p)?)
}

/// Total device current, hard-clamped at the compliance limit [A].
pub fn total_current(v: f64, t: f64, p: &DeviceParams) -> Result<f64, ModelError> {
    Ok(total_current_unclamped(v, t, p)?.min(p.i_compliance))
}

/// dT/dt [K/s] from the lumped thermal balance at dissipated power `power`.
pub fn temperature_derivative(t: f64, power: f64, p: &DeviceParams) -> Result<f64, ModelError> {
    if !t.is_finite() || !power.is_finite() || power < 0.0 {
        return Err(ModelError::Domain {
            op: "temperature_derivative",
            what: "power",
            value: power,
        });
    }
    Ok((power - (t - p.t_amb) / p.r_th) / p.c_th)
}

/// Advance the device by `dt_max` seconds under constant voltage magnitude
/// `v`, subdividing adaptively so no substep changes T by more than the
/// configured cap. Current within a substep is evaluated at the substep's
/// starting temperature.
pub fn step_state(
    state: &DeviceState,
    v: f64,
    dt_max: f64,
    p: &DeviceParams,
    cfg: &StepConfig,
) -> Result<DeviceState, ModelError> {
    check_inputs("step_state", v, state.temperature)?;
    if !(dt_max > 0.0) {
        return Err(ModelError::Domain {
            op: "step_state",
            what: "dt_max",
            value: dt_max,
        });
    }
    let mut t = state.temperature;
    let mut elapsed = 0.0;
    while elapsed < dt_max {
        let i = total_current(v, t, p)?;
        let d = temperature_derivative(t, i * v, p)?;
        let remaining = dt_max - elapsed;
        let dt = if d == 0.0 {
            remaining
        } else {
            let dt_cap = cfg.delta_t_cap / d.abs();
            if dt_cap < cfg.dt_floor {
                return Err(ModelError::StepUnderflow {
                    time: state.time + elapsed,
                    floor: cfg.dt_floor,
                });
            }
            dt_cap.min(remaining)
        };
        t += d * dt;
        elapsed += dt;
    }
    Ok(DeviceState {
        temperature: t,
        current: total_current(v, t, p)?,
        time: state.time + dt_max,
    })
}

/// Smallest stable balance temperature T* where heating I(v,T)·v equals
/// cooling (T − T_amb)/R_th, using the unclamped current. `None` means no
/// stable balance exists below the compliance regime: thermal runaway.
pub fn steady_state_temperature(v: f64, p: &DeviceParams) -> Result<Option<f64>, ModelError> {
    check_inputs("steady_state_temperature", v, p.t_amb)?;
    if v == 0.0 {
        return Ok(Some(p.t_amb));
    }
    // Residual heating in kelvin: positive below a stable fixed point.
    let f = |t: f64| -> Result<f64, ModelError> {
        Ok(total_current_unclamped(v, t, p)? * v * p.r_th - (t - p.t_amb))
    };
    let t_max = p.t_amb + 1700.0;
    let step = 0.05;
    let mut t_lo = p.t_amb;
    let mut f_lo = f(t_lo)?;
    if f_lo < 0.0 {
        // Cooling exceeds heating already at ambient: ambient-adjacent
        // fixed point lies below t_amb; report t_amb as the floor.
        return Ok(Some(p.t_amb));
    }
    let mut t = p.t_amb + step;
    while t < t_max {
        let ft = f(t)?;
        if ft < 0.0 {
            // Bisect [t_lo, t] down to 1 μK.
            let (mut lo, mut hi) = (t_lo, t);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if f(mid)? >= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let t_star = 0.5 * (lo + hi);
            // A balance inside the compliance clamp is not a real model
            // fixed point; treat it as runaway.
            if total_current_unclamped(v, t_star, p)? >= p.i_compliance {
                return Ok(None);
            }
            return Ok(Some(t_star));
        }
        t_lo = t;
        f_lo = ft;
        t += step;
    }
    let _ = f_lo;
    Ok(None)
}

/// Time for the current to reach compliance under constant voltage
/// magnitude `v`, starting from temperature `t0`. `None` if the device
/// settles into a stable sub-threshold balance instead.
pub fn spike_time(
    v: f64,
    p: &DeviceParams,
    t0: f64,
    cfg: &StepConfig,
) -> Result<Option<f64>, ModelError> {
    check_inputs("spike_time", v, t0)?;
    if t0 < p.t_amb {
        return Err(ModelError::Domain {
            op: "spike_time",
            what: "t0",
            value: t0,
        });
    }
    let mut t = t0;
    let mut elapsed = 0.0;
    // Generous wall: the slowest near-threshold transients of interest
    // are well under a millisecond.
    let t_wall = 1e-2;
    while elapsed < t_wall {
        let i = total_current(v, t, p)?;
        if i >= p.i_compliance {
            return Ok(Some(elapsed));
        }
        let d = temperature_derivative(t, i * v, p)?;
        // Under constant drive, a non-positive derivative below
        // compliance means the trajectory descends to a stable
        // sub-threshold balance and can never fire.
        if d <= 0.0 {
            return Ok(None);
        }
        let dt_cap = cfg.delta_t_cap / d;
        if dt_cap < cfg.dt_floor {
            return Err(ModelError::StepUnderflow {
                time: elapsed,
                floor: cfg.dt_floor,
            });
        }
        t += d * dt_cap;
        elapsed += dt_cap;
    }
    Err(ModelError::NoConvergence("spike_time exceeded wall time"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> DeviceParams {
        DeviceParams::nominal()
    }

    // Frozen by direct scalar evaluation of the closed-form expressions
    // with the nominal SI parameters at v = 1.6 V, t = 300 K.
    const I_OHMIC_1V6_300K: f64 = 2.865485e-4;
    const I_SCLC_1V6_300K: f64 = 1.102128e-3;

    #[test]
    fn ohmic_zero_voltage() {
        assert_eq!(ohmic_current(0.0, 300.0, &p()).unwrap(), 0.0);
    }

    #[test]
    fn ohmic_regression_value() {
        let i = ohmic_current(1.6, 300.0, &p()).unwrap();
        assert!((i - I_OHMIC_1V6_300K).abs() / I_OHMIC_1V6_300K < 1e-4, "i = {i}");
    }

    #[test]
    fn ohmic_increases_with_temperature() {
        let a = ohmic_current(1.6, 300.0, &p()).unwrap();
        let b = ohmic_current(1.6, 600.0, &p()).unwrap();
        assert!(b > a);
    }

    #[test]
    fn sclc_zero_voltage() {
        assert_eq!(sclc_current(0.0, 300.0, &p()).unwrap(), 0.0);
    }

    #[test]
    fn sclc_regression_value() {
        let i = sclc_current(1.6, 300.0, &p()).unwrap();
        assert!((i - I_SCLC_1V6_300K).abs() / I_SCLC_1V6_300K < 1e-4, "i = {i}");
    }

    #[test]
    fn sclc_quadratic_in_voltage() {
        let a = sclc_current(0.8, 300.0, &p()).unwrap();
        let b = sclc_current(1.6, 300.0, &p()).unwrap();
        assert!((b / a - 4.0).abs() < 1e-12);
    }

    #[test]
    fn total_is_sum_then_clamped() {
        let pp = p();
        let i = total_current(1.6, 300.0, &pp).unwrap();
        assert!((i - (I_OHMIC_1V6_300K + I_SCLC_1V6_300K)).abs() / i < 1e-4);
        // Hot device: unclamped sum exceeds compliance, clamp applies.
        let hot = total_current(2.4, 700.0, &pp).unwrap();
        assert_eq!(hot, pp.i_compliance);
    }

    #[test]
    fn negative_voltage_rejected() {
        assert!(ohmic_current(-1.0, 300.0, &p()).is_err());
        assert!(total_current(f64::NAN, 300.0, &p()).is_err());
    }

    #[test]
    fn derivative_equilibrium_at_ambient() {
        assert_eq!(temperature_derivative(300.0, 0.0, &p()).unwrap(), 0.0);
    }

    #[test]
    fn derivative_cooling_from_400k() {
        // -(100 K) / (3e4 K/W * 3.25e-12 J/K) ≈ -1.0256e9 K/s
        let d = temperature_derivative(400.0, 0.0, &p()).unwrap();
        let expect = -100.0 / (3.0e4 * 3.25e-12);
        assert!((d - expect).abs() / expect.abs() < 1e-12);
    }

    #[test]
    fn derivative_steady_state_balance() {
        let pp = p();
        let t = 450.0;
        let power = (t - pp.t_amb) / pp.r_th;
        assert_eq!(temperature_derivative(t, power, &pp).unwrap(), 0.0);
    }

    #[test]
    fn step_zero_voltage_at_ambient_is_identity() {
        let pp = p();
        let s0 = DeviceState::at_ambient(&pp);
        let s1 = step_state(&s0, 0.0, 1e-7, &pp, &StepConfig::default()).unwrap();
        assert_eq!(s1.temperature, pp.t_amb);
        assert_eq!(s1.current, 0.0);
    }

    #[test]
    fn cooling_matches_exponential_over_one_tau() {
        // From 400 K with v = 0, after tau = 97.5 ns: T = 300 + 100/e.
        let pp = p();
        let s0 = DeviceState {
            temperature: 400.0,
            current: 0.0,
            time: 0.0,
        };
        let cfg = StepConfig {
            delta_t_cap: 0.05,
            ..Default::default()
        };
        let s1 = step_state(&s0, 0.0, 97.5e-9, &pp, &cfg).unwrap();
        let expect = 300.0 + 100.0 * (-1.0f64).exp();
        assert!(
            (s1.temperature - expect).abs() < 0.2,
            "T = {}, want ≈ {expect}",
            s1.temperature
        );
    }

    #[test]
    fn runaway_drive_reaches_compliance() {
        let pp = p();
        let mut s = DeviceState::at_ambient(&pp);
        let cfg = StepConfig::default();
        let mut last_t = s.temperature;
        let mut grew = 0;
        for _ in 0..40 {
            s = step_state(&s, 1.6, 5e-9, &pp, &cfg).unwrap();
            if s.temperature > last_t {
                grew += 1;
            }
            last_t = s.temperature;
            if s.current >= pp.i_compliance {
                break;
            }
        }
        assert_eq!(s.current, pp.i_compliance);
        assert!(grew > 5);
    }

    #[test]
    fn steady_state_zero_voltage() {
        assert_eq!(steady_state_temperature(0.0, &p()).unwrap(), Some(300.0));
    }

    #[test]
    fn steady_state_small_voltage_first_order() {
        let pp = p();
        let v = 0.05;
        let t_star = steady_state_temperature(v, &pp).unwrap().unwrap();
        let i = total_current_unclamped(v, pp.t_amb, &pp).unwrap();
        let approx = pp.t_amb + i * v * pp.r_th;
        assert!((t_star - approx).abs() < 0.05, "t* = {t_star}, approx = {approx}");
    }

    #[test]
    fn steady_state_runaway_above_threshold() {
        assert_eq!(steady_state_temperature(1.5, &p()).unwrap(), None);
    }

    #[test]
    fn steady_state_matches_brute_force_scan() {
        // Independent oracle: 0.1 K grid scan over [300, 2000] K for the
        // first sign change of heating - cooling.
        let pp = p();
        for &v in &[0.3, 0.5, 0.7, 0.8, 0.85] {
            let brute = {
                let mut found = None;
                let mut t = 300.0;
                while t < 2000.0 {
                    let f = total_current_unclamped(v, t, &pp).unwrap() * v * pp.r_th - (t - 300.0);
                    if f < 0.0 {
                        found = Some(t);
                        break;
                    }
                    t += 0.1;
                }
                found
            };
            let solved = steady_state_temperature(v, &pp).unwrap();
            match (brute, solved) {
                (Some(b), Some(s)) => assert!((b - s).abs() <= 0.1 + 1e-6, "v={v}: brute {b}, solved {s}"),
                (None, None) => {}
                other => panic!("v={v}: mismatch {other:?}"),
            }
        }
    }

    #[test]
    fn spike_time_subthreshold_is_none() {
        let pp = p();
        assert_eq!(spike_time(0.5, &pp, pp.t_amb, &StepConfig::default()).unwrap(), None);
    }

    #[test]
    fn spike_time_decreases_with_voltage() {
        let pp = p();
        let cfg = StepConfig::default();
        let a = spike_time(1.8, &pp, pp.t_amb, &cfg).unwrap().unwrap();
        let b = spike_time(1.6, &pp, pp.t_amb, &cfg).unwrap().unwrap();
        assert!(a < b, "t(1.8) = {a}, t(1.6) = {b}");
    }

    #[test]
    fn spike_time_step_independence() {
        // Halving the dT cap moves spike time by < 0.1 %.
        let pp = DeviceParams::spike_time_calibrated();
        let coarse = StepConfig {
            delta_t_cap: 0.1,
            ..Default::default()
        };
        let fine = StepConfig {
            delta_t_cap: 0.05,
            ..Default::default()
        };
        for &v in &[1.6, 2.0, 2.4] {
            let a = spike_time(v, &pp, pp.t_amb, &coarse).unwrap().unwrap();
            let b = spike_time(v, &pp, pp.t_amb, &fine).unwrap().unwrap();
            assert!((a - b).abs() / b < 1e-3, "v={v}: {a} vs {b}");
        }
    }
}
