//! Compactness analysis: the electrical RC timescale of a capacitor-based
//! integrator vs. the electrothermal timescale of the self-heating RRAM,
//! plus a transistor-count area estimate for the full neuron cell.
//!
//! Both timescales are written in area-cancelled form, which is the point
//! of the argument: neither depends on device area, so the comparison
//! survives scaling.

use crate::device::total_current_unclamped;
use crate::error::ModelError;
use crate::params::{DeviceParams, EPS0};

/// Inputs to the two timescale formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingInputs {
    /// Relative permittivity of the integrator capacitor dielectric.
    pub eps_r: f64,
    /// Dielectric thickness [m].
    pub d: f64,
    /// Threshold / operating voltage [V].
    pub v: f64,
    /// Switching current density [A/m²].
    pub j_d: f64,
    /// Volumetric heat capacity of the RRAM film [J/(K·m³)].
    pub c_v: f64,
    /// Temperature rise to switching [K].
    pub delta_t: f64,
    /// RRAM film thickness [m].
    pub length: f64,
}

impl ScalingInputs {
    /// Textbook reference point: SiO₂-class dielectric (ε_r = 3.9) at
    /// 2 nm, 1 V threshold, and the compliance current spread over a
    /// 100 μm² device.
    pub fn reference() -> Self {
        Self {
            eps_r: 3.9,
            d: 2e-9,
            v: 1.0,
            j_d: 10e-3 / 1e-10,
            c_v: 5e5,
            delta_t: 115.0,
            length: 65e-9,
        }
    }

    /// Derive the electrothermal-side inputs from the device model at
    /// drive `v`: ΔT is the rise needed for the unclamped current to
    /// reach compliance, and j_d is the current density halfway up that
    /// rise (a mid-transition operating point).
    pub fn matched_operating_point(p: &DeviceParams, v: f64) -> Result<Self, ModelError> {
        p.validate()?;
        if !(v > 0.0) || !v.is_finite() {
            return Err(ModelError::Domain {
                op: "matched_operating_point",
                what: "v",
                value: v,
            });
        }
        // Unclamped current is strictly increasing in T: bisect for the
        // compliance-crossing temperature.
        let (mut lo, mut hi) = (p.t_amb, p.t_amb + 1700.0);
        if total_current_unclamped(v, hi, p)? < p.i_compliance {
            return Err(ModelError::NoConvergence(
                "compliance never reached within the temperature bracket",
            ));
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if total_current_unclamped(v, mid, p)? < p.i_compliance {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t_comp = 0.5 * (lo + hi);
        let t_mid = 0.5 * (p.t_amb + t_comp);
        let j_d = total_current_unclamped(v, t_mid, p)? / p.area;
        Ok(Self {
            eps_r: 3.9,
            d: 2e-9,
            v,
            j_d,
            c_v: p.c_th / (p.area * p.length),
            delta_t: t_comp - p.t_amb,
            length: p.length,
        })
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let fields = [
            ("eps_r", self.eps_r),
            ("d", self.d),
            ("v", self.v),
            ("j_d", self.j_d),
            ("c_v", self.c_v),
            ("delta_t", self.delta_t),
            ("length", self.length),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v <= 0.0 {
                return Err(ModelError::InvalidParameter { name, value: v });
            }
        }
        Ok(())
    }
}

/// RC electrical timescale of a capacitor integrator: ε₀·ε_r·V/(d·J_D).
/// Area cancels (C ∝ A, I ∝ A).
pub fn tau_rc(input: &ScalingInputs) -> Result<f64, ModelError> {
    input.validate()?;
    Ok(EPS0 * input.eps_r * input.v / (input.d * input.j_d))
}

/// Electrothermal timescale of the self-heating RRAM:
/// C_v·L·ΔT/(V·J_D). Written per unit area so the device area cancels;
/// the film thickness L stays, since the stored heat scales with the
/// heated volume while the dissipated power scales with the area.
pub fn tau_th(input: &ScalingInputs) -> Result<f64, ModelError> {
    input.validate()?;
    Ok(input.c_v * input.length * input.delta_t / (input.v * input.j_d))
}

/// Parallel-plate capacitance ε₀·ε_r·A/d [F].
pub fn capacitance(eps_r: f64, area: f64, d: f64) -> Result<f64, ModelError> {
    for (name, v) in [("eps_r", eps_r), ("area", area), ("d", d)] {
        if !v.is_finite() || v <= 0.0 {
            return Err(ModelError::InvalidParameter { name, value: v });
        }
    }
    Ok(EPS0 * eps_r * area / d)
}

/// Layout-neutral area estimate: 100 F² per transistor.
pub fn estimate_area(transistor_count: u32) -> f64 {
    transistor_count as f64 * 100.0
}

/// Per-component transistor costs for the digital periphery. These are
/// reporting conventions (a D flip-flop with set/reset and buffered
/// outputs at 16 T, a 2-input CMOS OR at 6 T, a transmission-gate switch
/// at 2 T, an RC-active resistor leg at 3 T, a clocked comparator core at
/// 4 T), not extracted layouts.
pub mod cost {
    pub const FLIP_FLOP: u32 = 16;
    pub const OR_GATE: u32 = 6;
    pub const SWITCH: u32 = 2;
    pub const RESISTOR_LEG: u32 = 3;
    pub const COMPARATOR: u32 = 4;
}

/// Bill of digital-periphery components for one neuron cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComponentCounts {
    pub flip_flops: u32,
    pub or_gates: u32,
    pub switches: u32,
    pub resistor_legs: u32,
    pub comparators: u32,
}

impl ComponentCounts {
    /// The cell as simulated: 6 register bits (4 pattern + 2 toggle),
    /// one OR gate, the two branch switches, three resistor legs
    /// (2×R_S + R_C), one spike comparator.
    pub fn neuron_cell() -> Self {
        Self {
            flip_flops: 6,
            or_gates: 1,
            switches: 2,
            resistor_legs: 3,
            comparators: 1,
        }
    }

    pub fn transistors(&self) -> u32 {
        self.flip_flops * cost::FLIP_FLOP
            + self.or_gates * cost::OR_GATE
            + self.switches * cost::SWITCH
            + self.resistor_legs * cost::RESISTOR_LEG
            + self.comparators * cost::COMPARATOR
    }
}

/// One row of the comparison report.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub tau_rc_s: f64,
    pub tau_th_s: f64,
    pub ratio: f64,
    pub capacitance_f: f64,
    pub transistor_count: u32,
    pub area_f2: f64,
    pub inputs: ScalingInputs,
}

impl ScalingReport {
    /// Build the full report from the device model at drive `v`.
    pub fn from_device(p: &DeviceParams, v: f64) -> Result<Self, ModelError> {
        let matched = ScalingInputs::matched_operating_point(p, v)?;
        let reference = ScalingInputs::reference();
        let t_rc = tau_rc(&ScalingInputs { j_d: matched.j_d, v, ..reference })?;
        let t_th = tau_th(&matched)?;
        let counts = ComponentCounts::neuron_cell();
        Ok(Self {
            tau_rc_s: t_rc,
            tau_th_s: t_th,
            ratio: t_th / t_rc,
            capacitance_f: capacitance(reference.eps_r, p.area, reference.d)?,
            transistor_count: counts.transistors(),
            area_f2: estimate_area(counts.transistors()),
            inputs: matched,
        })
    }

    /// Human-readable block, one line per figure of merit.
    pub fn render_text(&self) -> String {
        format!(
            "scaling report (matched operating point v = {:.3} V)\n\
             tau_rc        : {:.4e} s\n\
             tau_th        : {:.4e} s\n\
             tau_th/tau_rc : {:.1}\n\
             capacitance   : {:.4e} F\n\
             transistors   : {}\n\
             area          : {:.4e} F^2\n\
             j_d           : {:.4e} A/m^2\n\
             delta_t       : {:.2} K\n",
            self.inputs.v,
            self.tau_rc_s,
            self.tau_th_s,
            self.ratio,
            self.capacitance_f,
            self.transistor_count,
            self.area_f2,
            self.inputs.j_d,
            self.inputs.delta_t,
        )
    }

    /// CSV with a header row, mirroring the comparison-table columns.
    pub fn render_csv(&self) -> String {
        format!(
            "work,tau_rc_s,tau_th_s,ratio,capacitance_f,transistor_count,area_f2\n\
             this_work,{:e},{:e},{},{:e},{},{}\n",
            self.tau_rc_s,
            self.tau_th_s,
            self.ratio,
            self.capacitance_f,
            self.transistor_count,
            self.area_f2,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_rc_reference_value() {
        // eps0·3.9·1V / (2nm · 1e8 A/m²) = 1.7266e-10 s.
        let t = tau_rc(&ScalingInputs::reference()).unwrap();
        assert!((t - 1.7266e-10).abs() / 1.7266e-10 < 1e-3, "tau_rc {t}");
    }

    #[test]
    fn tau_rc_area_invariant() {
        // Doubling an area-explicit variant leaves tau unchanged: double
        // the current (j_d fixed) and double the capacitance — already
        // encoded by the area-free formula, so assert invariance under
        // joint rescale of numerator/denominator.
        let a = ScalingInputs::reference();
        let t1 = tau_rc(&a).unwrap();
        // j_d is per-area; scaling the device does not change it.
        let t2 = tau_rc(&ScalingInputs { ..a }).unwrap();
        assert_eq!(t1, t2);
    }

    #[test]
    fn capacitance_reference_value() {
        let c = capacitance(3.9, 1e-10, 2e-9).unwrap();
        assert!((c - 1.7266e-12).abs() / 1.7266e-12 < 1e-3, "C = {c}");
    }

    #[test]
    fn tau_th_in_observed_decade() {
        let p = DeviceParams::nominal();
        let m = ScalingInputs::matched_operating_point(&p, 1.0).unwrap();
        // c_v from the thermal capacitance over the film volume.
        assert!((m.c_v - 5e5).abs() / 5e5 < 1e-6, "c_v {}", m.c_v);
        let t = tau_th(&m).unwrap();
        assert!(t > 100e-9 && t < 1e-6, "tau_th {t}");
    }

    #[test]
    fn ratio_in_band() {
        let p = DeviceParams::nominal();
        let r = ScalingReport::from_device(&p, 1.0).unwrap();
        assert!(r.ratio >= 100.0 && r.ratio <= 1000.0, "ratio {}", r.ratio);
    }

    #[test]
    fn ratio_matches_algebraic_form() {
        // tau_th/tau_rc = c_v·L·ΔT·d / (eps0·eps_r·v²) at matched j_d.
        let p = DeviceParams::nominal();
        let m = ScalingInputs::matched_operating_point(&p, 1.0).unwrap();
        let lhs = tau_th(&m).unwrap() / tau_rc(&m).unwrap();
        let rhs = m.c_v * m.length * m.delta_t * m.d / (EPS0 * m.eps_r * m.v * m.v);
        assert!((lhs - rhs).abs() / rhs < 1e-12);
    }

    #[test]
    fn transistor_count_and_area() {
        let c = ComponentCounts::neuron_cell();
        assert_eq!(c.transistors(), 119);
        assert_eq!(estimate_area(119), 11.9e3);
        assert_eq!(estimate_area(0), 0.0);
    }

    #[test]
    fn report_renders_both_formats() {
        let r = ScalingReport::from_device(&DeviceParams::nominal(), 1.0).unwrap();
        assert!(r.render_text().contains("tau_th/tau_rc"));
        let csv = r.render_csv();
        assert!(csv.starts_with("work,tau_rc_s"));
        assert_eq!(csv.lines().count(), 2);
    }

    #[test]
    fn invalid_inputs_rejected() {
        let mut i = ScalingInputs::reference();
        i.d = 0.0;
        assert!(tau_rc(&i).is_err());
        assert!(capacitance(3.9, -1.0, 2e-9).is_err());
    }
}
