//! Fitting free device parameters to observed (voltage, spike-time)
//! pairs. Spike times span decades, so residuals are taken in log space;
//! the objective is minimized with a derivative-free Nelder-Mead simplex,
//! multi-started from quasi-random points of the bounded box to dodge
//! local minima.

use crate::device::{spike_time, StepConfig};
use crate::error::ModelError;
use crate::params::DeviceParams;

/// One calibration target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpikeTimeObservation {
    /// Applied voltage magnitude [V].
    pub v: f64,
    /// Observed spike time [s].
    pub t_spike: f64,
    /// Non-negative weight.
    pub weight: f64,
}

impl SpikeTimeObservation {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.v > 0.0) || !self.v.is_finite() {
            return Err(ModelError::InvalidParameter { name: "v", value: self.v });
        }
        if !(self.t_spike > 0.0) || !self.t_spike.is_finite() {
            return Err(ModelError::InvalidParameter {
                name: "t_spike",
                value: self.t_spike,
            });
        }
        if self.weight < 0.0 || !self.weight.is_finite() {
            return Err(ModelError::InvalidParameter {
                name: "weight",
                value: self.weight,
            });
        }
        Ok(())
    }
}

/// Parameters the fitter may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreeParam {
    RTh,
    CTh,
    ICompliance,
    PhiB,
    ETrap,
}

impl FreeParam {
    pub fn name(&self) -> &'static str {
        match self {
            FreeParam::RTh => "r_th",
            FreeParam::CTh => "c_th",
            FreeParam::ICompliance => "i_compliance",
            FreeParam::PhiB => "phi_b",
            FreeParam::ETrap => "e_trap",
        }
    }

    fn get(&self, p: &DeviceParams) -> f64 {
        match self {
            FreeParam::RTh => p.r_th,
            FreeParam::CTh => p.c_th,
            FreeParam::ICompliance => p.i_compliance,
            FreeParam::PhiB => p.phi_b,
            FreeParam::ETrap => p.e_trap,
        }
    }

    fn set(&self, p: &mut DeviceParams, v: f64) {
        match self {
            FreeParam::RTh => p.r_th = v,
            FreeParam::CTh => p.c_th = v,
            FreeParam::ICompliance => p.i_compliance = v,
            FreeParam::PhiB => p.phi_b = v,
            FreeParam::ETrap => p.e_trap = v,
        }
    }
}

/// One free parameter with its positive search bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundedParam {
    pub param: FreeParam,
    pub lo: f64,
    pub hi: f64,
}

/// Fit outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: DeviceParams,
    /// Per-observation residuals ln t_model − ln t_obs.
    pub residuals: Vec<f64>,
    /// sqrt of the weighted mean squared log residual.
    pub rms_log_error: f64,
    pub iterations: usize,
}

/// Penalty standing in for ln-residual when the model never fires at an
/// observation voltage.
const NEVER_FIRES_PENALTY: f64 = 1e3;
const MULTISTARTS: usize = 5;
const MAX_ITERS: usize = 400;
/// Relative simplex diameter (in log-parameter space) at convergence.
const SIMPLEX_TOL: f64 = 1e-4;

struct Objective<'a> {
    observations: &'a [SpikeTimeObservation],
    free: &'a [BoundedParam],
    init: DeviceParams,
    step: StepConfig,
}

impl Objective<'_> {
    fn params_at(&self, x: &[f64]) -> DeviceParams {
        let mut p = self.init;
        for (b, &xi) in self.free.iter().zip(x) {
            b.param.set(&mut p, xi.exp().clamp(b.lo, b.hi));
        }
        p
    }

    /// Weighted sum of squared log residuals; `None` in a residual slot
    /// marks a never-fires voltage (penalized in the total).
    fn eval(&self, x: &[f64]) -> Result<(f64, Vec<Option<f64>>), ModelError> {
        let p = self.params_at(x);
        let mut total = 0.0;
        let mut residuals = Vec::with_capacity(self.observations.len());
        for obs in self.observations {
            match spike_time(obs.v, &p, p.t_amb, &self.step)? {
                Some(t) => {
                    let r = t.ln() - obs.t_spike.ln();
                    total += obs.weight * r * r;
                    residuals.push(Some(r));
                }
                None => {
                    total += obs.weight * NEVER_FIRES_PENALTY;
                    residuals.push(None);
                }
            }
        }
        Ok((total, residuals))
    }
}

/// Deterministic quasi-random point: Halton sequence digit reversal.
fn halton(index: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let mut i = index;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

const HALTON_BASES: [usize; 5] = [2, 3, 5, 7, 11];

/// Minimize the weighted squared log-residual of modeled vs. observed
/// spike times over the bounded free-parameter box, starting from `init`.
pub fn fit(
    observations: &[SpikeTimeObservation],
    free: &[BoundedParam],
    init: &DeviceParams,
) -> Result<FitResult, ModelError> {
    init.validate()?;
    for o in observations {
        o.validate()?;
    }
    for b in free {
        if !(b.lo > 0.0) || !(b.hi > b.lo) || !b.hi.is_finite() {
            return Err(ModelError::InvalidParameter {
                name: b.param.name(),
                value: b.lo,
            });
        }
    }
    if observations.len() < free.len() {
        return Err(ModelError::TooFewObservations {
            need: free.len(),
            free: free.len(),
            got: observations.len(),
        });
    }
    let objective = Objective {
        observations,
        free,
        init: *init,
        step: StepConfig::default(),
    };

    if free.is_empty() {
        let (total, residuals) = objective.eval(&[])?;
        return finish(&objective, init, &residuals, total, 0, observations);
    }

    let n = free.len();
    let mut best: Option<(f64, Vec<f64>, usize)> = None;
    for start in 0..MULTISTARTS {
        let x0: Vec<f64> = free
            .iter()
            .enumerate()
            .map(|(j, b)| {
                let frac = if start == 0 {
                    // First start: the init value projected into bounds.
                    let v = b.param.get(init).clamp(b.lo, b.hi);
                    (v.ln() - b.lo.ln()) / (b.hi.ln() - b.lo.ln())
                } else {
                    halton(start, HALTON_BASES[j % HALTON_BASES.len()])
                };
                b.lo.ln() + frac.clamp(0.02, 0.98) * (b.hi.ln() - b.lo.ln())
            })
            .collect();
        let (obj, x, iters) = nelder_mead(&objective, &x0, n)?;
        if best.as_ref().map_or(true, |(b, _, _)| obj < *b) {
            best = Some((obj, x, iters));
        }
    }
    let (obj, x, iters) = best.unwrap();
    let p = objective.params_at(&x);
    let (_, residuals) = objective.eval(&x)?;
    finish(&objective, &p, &residuals, obj, iters, observations)
}

fn finish(
    _objective: &Objective<'_>,
    p: &DeviceParams,
    residuals: &[Option<f64>],
    total: f64,
    iterations: usize,
    observations: &[SpikeTimeObservation],
) -> Result<FitResult, ModelError> {
    if let Some(i) = residuals.iter().position(Option::is_none) {
        return Err(ModelError::Infeasible {
            v: observations[i].v,
        });
    }
    let res: Vec<f64> = residuals.iter().map(|r| r.unwrap()).collect();
    let wsum: f64 = observations.iter().map(|o| o.weight).sum();
    let rms = if wsum > 0.0 { (total / wsum).sqrt() } else { 0.0 };
    Ok(FitResult {
        params: *p,
        residuals: res,
        rms_log_error: rms,
        iterations,
    })
}

/// Standard Nelder-Mead in log-parameter space. Returns (objective,
/// argmin, iterations).
fn nelder_mead(
    objective: &Objective<'_>,
    x0: &[f64],
    n: usize,
) -> Result<(f64, Vec<f64>, usize), ModelError> {
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    // Initial simplex: x0 plus per-axis offsets of 10% of a decade.
    let mut simplex: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n + 1);
    let f0 = objective.eval(x0)?.0;
    simplex.push((f0, x0.to_vec()));
    for j in 0..n {
        let mut xj = x0.to_vec();
        xj[j] += 0.23;
        let fj = objective.eval(&xj)?.0;
        simplex.push((fj, xj));
    }
    let mut iters = 0;
    while iters < MAX_ITERS {
        iters += 1;
        simplex.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        // Convergence: max vertex distance from the best point.
        let diameter = simplex[1..]
            .iter()
            .map(|(_, x)| {
                x.iter()
                    .zip(&simplex[0].1)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0_f64, f64::max)
            })
            .fold(0.0_f64, f64::max);
        if diameter < SIMPLEX_TOL {
            break;
        }
        let worst = simplex[n].clone();
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(_, x)| x[j]).sum::<f64>() / n as f64)
            .collect();
        let reflect: Vec<f64> = centroid
            .iter()
            .zip(&worst.1)
            .map(|(c, w)| c + alpha * (c - w))
            .collect();
        let fr = objective.eval(&reflect)?.0;
        if fr < simplex[0].0 {
            let expand: Vec<f64> = centroid
                .iter()
                .zip(&reflect)
                .map(|(c, r)| c + gamma * (r - c))
                .collect();
            let fe = objective.eval(&expand)?.0;
            simplex[n] = if fe < fr { (fe, expand) } else { (fr, reflect) };
        } else if fr < simplex[n - 1].0 {
            simplex[n] = (fr, reflect);
        } else {
            let contract: Vec<f64> = centroid
                .iter()
                .zip(&worst.1)
                .map(|(c, w)| c + rho * (w - c))
                .collect();
            let fc = objective.eval(&contract)?.0;
            if fc < worst.0 {
                simplex[n] = (fc, contract);
            } else {
                // Shrink toward the best vertex.
                let best = simplex[0].1.clone();
                for v in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = best
                        .iter()
                        .zip(&v.1)
                        .map(|(b, x)| b + sigma * (x - b))
                        .collect();
                    *v = (objective.eval(&x)?.0, x);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let (f, x) = simplex.remove(0);
    Ok((f, x, iters))
}

/// Parse observations from CSV text. The header line
/// `v_volts,t_spike_seconds,weight` is required.
pub fn parse_observations_csv(text: &str) -> Result<Vec<SpikeTimeObservation>, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or("empty observations file")?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols != ["v_volts", "t_spike_seconds", "weight"] {
        return Err(format!(
            "expected header `v_volts,t_spike_seconds,weight`, got `{header}`"
        ));
    }
    let mut out = Vec::new();
    for (k, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(format!("line {}: expected 3 fields, got {}", k + 2, fields.len()));
        }
        let parse = |s: &str, what: &str| -> Result<f64, String> {
            s.parse::<f64>()
                .map_err(|e| format!("line {}: bad {what} `{s}`: {e}", k + 2))
        };
        let obs = SpikeTimeObservation {
            v: parse(fields[0], "voltage")?,
            t_spike: parse(fields[1], "spike time")?,
            weight: parse(fields[2], "weight")?,
        };
        obs.validate()
            .map_err(|e| format!("line {}: {e}", k + 2))?;
        out.push(obs);
    }
    Ok(out)
}

/// Default free set: the thermal pair, searched one decade around `init`.
pub fn default_free_set(init: &DeviceParams) -> Vec<BoundedParam> {
    vec![
        BoundedParam {
            param: FreeParam::RTh,
            lo: init.r_th / 3.0,
            hi: init.r_th * 3.0,
        },
        BoundedParam {
            param: FreeParam::CTh,
            lo: init.c_th / 3.0,
            hi: init.c_th * 3.0,
        },
    ]
}
