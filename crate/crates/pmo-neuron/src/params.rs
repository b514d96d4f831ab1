//! Device parameters and physical constants.
//!
//! All internal computation is in SI units. Constructors accept the
//! datasheet-style units used in configuration files (cm²/Vs, cm⁻³, nm,
//! μm², pJ/K) and convert once at load time.

use crate::error::ModelError;

/// Elementary charge [C].
pub const Q: f64 = 1.602_176_634e-19;
/// Boltzmann constant [J/K].
pub const K_B: f64 = 1.380_649e-23;
/// Vacuum permittivity [F/m].
pub const EPS0: f64 = 8.854_187_812_8e-12;

/// Physical and thermal parameters of one PMO RRAM device, in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceParams {
    /// Carrier mobility [m²/(V·s)].
    pub mu: f64,
    /// Barrier height [eV].
    pub phi_b: f64,
    /// Relative dielectric constant of the PMO film.
    pub eps_pmo: f64,
    /// Density of states [m⁻³].
    pub n_v: f64,
    /// Trap level [eV].
    pub e_trap: f64,
    /// Trap density [m⁻³].
    pub n_t: f64,
    /// Film thickness [m].
    pub length: f64,
    /// Device area [m²].
    pub area: f64,
    /// Ambient temperature [K].
    pub t_amb: f64,
    /// Thermal resistance [K/W].
    pub r_th: f64,
    /// Thermal capacitance [J/K].
    pub c_th: f64,
    /// Compliance current [A]; current is hard-clamped here.
    pub i_compliance: f64,
}

impl DeviceParams {
    /// Nominal PMO stack parameters (datasheet units converted to SI).
    ///
    /// μ = 17.5 cm²/Vs, Φ_B = 0.3151 eV, ε_PMO = 30, N_V = 8.16e19 cm⁻³,
    /// E_trap = 0.06 eV, N_T = 3.15e21 cm⁻³, L = 65 nm, A = 100 μm²,
    /// T_amb = 300 K, R_th = 3e4 K/W, C_th = 3.25 pJ/K, I_comp = 10 mA.
    pub fn nominal() -> Self {
        Self::from_datasheet(17.5, 0.3151, 30.0, 8.16e19, 0.06, 3.15e21, 65.0, 100.0, 300.0, 3.0e4, 3.25, 10.0e-3)
    }

    /// Nominal stack with the thermal capacitance rescaled so that bare
    /// spike times over 1.5-2.4 V land in the experimentally observed
    /// 100 ns - 1 μs decade (C_th = 22.75 pJ/K).
    pub fn spike_time_calibrated() -> Self {
        let mut p = Self::nominal();
        p.c_th = 22.75e-12;
        p
    }

    /// Thermal pair refitted against the simulated regular-spiking
    /// frequency anchors (537 kHz at -1.6 V, 754 kHz at -1.8 V):
    /// R_th = 1.05e4 K/W, C_th = 0.7503 pJ/K.
    pub fn frequency_calibrated() -> Self {
        let mut p = Self::nominal();
        p.r_th = 1.05e4;
        p.c_th = 7.503e-13;
        p
    }

    /// Build from datasheet units: mobility in cm²/Vs, energies in eV,
    /// densities in cm⁻³, thickness in nm, area in μm², C_th in pJ/K.
    #[allow(clippy::too_many_arguments)]
    pub fn from_datasheet(
        mu_cm2: f64,
        phi_b_ev: f64,
        eps_pmo: f64,
        n_v_cm3: f64,
        e_trap_ev: f64,
        n_t_cm3: f64,
        length_nm: f64,
        area_um2: f64,
        t_amb_k: f64,
        r_th_k_per_w: f64,
        c_th_pj: f64,
        i_compliance_a: f64,
    ) -> Self {
        Self {
            mu: mu_cm2 * 1e-4,
            phi_b: phi_b_ev,
            eps_pmo,
            n_v: n_v_cm3 * 1e6,
            e_trap: e_trap_ev,
            n_t: n_t_cm3 * 1e6,
            length: length_nm * 1e-9,
            area: area_um2 * 1e-12,
            t_amb: t_amb_k,
            r_th: r_th_k_per_w,
            c_th: c_th_pj * 1e-12,
            i_compliance: i_compliance_a,
        }
    }

    /// Check the strict-positivity invariants.
    pub fn validate(&self) -> Result<(), ModelError> {
        let fields = [
            ("mu", self.mu),
            ("phi_b", self.phi_b),
            ("eps_pmo", self.eps_pmo),
            ("n_v", self.n_v),
            ("e_trap", self.e_trap),
            ("n_t", self.n_t),
            ("length", self.length),
            ("area", self.area),
            ("t_amb", self.t_amb),
            ("r_th", self.r_th),
            ("c_th", self.c_th),
            ("i_compliance", self.i_compliance),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v <= 0.0 {
                return Err(ModelError::InvalidParameter {
                    name,
                    value: v,
                });
            }
        }
        Ok(())
    }

    /// Thermal time constant R_th·C_th [s].
    pub fn tau_thermal(&self) -> f64 {
        self.r_th * self.c_th
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nominal_si_conversion() {
        let p = DeviceParams::nominal();
        assert!((p.mu - 17.5e-4).abs() < 1e-12);
        assert!((p.n_v - 8.16e25).abs() / 8.16e25 < 1e-12);
        assert!((p.n_t - 3.15e27).abs() / 3.15e27 < 1e-12);
        assert!((p.length - 65e-9).abs() < 1e-18);
        assert!((p.area - 1e-10).abs() < 1e-20);
        assert!((p.c_th - 3.25e-12).abs() < 1e-22);
        assert!(p.validate().is_ok());
    }

    #[test]
    fn nominal_tau_thermal() {
        // R_th·C_th = 3e4 * 3.25e-12 = 97.5 ns
        let p = DeviceParams::nominal();
        assert!((p.tau_thermal() - 97.5e-9).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive() {
        let mut p = DeviceParams::nominal();
        p.r_th = 0.0;
        assert!(p.validate().is_err());
        p.r_th = f64::NAN;
        assert!(p.validate().is_err());
    }
}
