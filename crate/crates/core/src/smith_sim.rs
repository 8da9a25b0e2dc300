//! Fixed-step simulation of a networked control loop: plant, controller,
//! time-varying sensor- and actuator-side transport delays, with or without
//! the Smith-predictor minor loops around the controller.
//!
//! Delayed signals are read from a transport buffer: the value at `t - tau`
//! is linearly interpolated from the stored sample history, with delay
//! processes piecewise constant between seeded redraws. All times are in
//! the transfer functions' own unit.

use crate::lti::{discretize, to_state_space, DiscreteStateSpace, LtiError, RationalTf};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Output magnitude beyond which a run is truncated and flagged; an
/// unstable loop is an expected result, not an error.
const DIVERGENCE_LIMIT: f64 = 1e9;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable derivation of per-process seeds from one campaign seed.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    splitmix(seed ^ salt)
}

/// A time-varying delay realisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DelayProcess {
    Constant { value: f64 },
    /// Uniform in `[0, ubd)`, redrawn every `redraw_period`, reproducible
    /// from the seed and independent of the simulation step.
    Uniform { ubd: f64, redraw_period: f64, seed: u64 },
}

impl DelayProcess {
    pub fn zero() -> Self {
        DelayProcess::Constant { value: 0.0 }
    }

    /// Delay applied at absolute time `t`.
    pub fn sample(&self, t: f64) -> f64 {
        match self {
            DelayProcess::Constant { value } => *value,
            DelayProcess::Uniform { ubd, redraw_period, seed } => {
                let idx = (t / redraw_period).floor().max(0.0) as u64;
                let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed ^ idx.wrapping_mul(0xD134_2543_DE82_EF95)));
                rng.gen::<f64>() * ubd
            }
        }
    }

    pub fn upper_bound(&self) -> f64 {
        match self {
            DelayProcess::Constant { value } => *value,
            DelayProcess::Uniform { ubd, .. } => *ubd,
        }
    }

    fn redraw_period(&self) -> Option<f64> {
        match self {
            DelayProcess::Constant { .. } => None,
            DelayProcess::Uniform { redraw_period, .. } => Some(*redraw_period),
        }
    }
}

/// Setpoint waveform.
#[derive(Debug, Clone, PartialEq)]
pub enum SetpointSpec {
    Step { amplitude: f64 },
    Square { amplitude: f64, period: f64 },
    Samples { values: Vec<f64> },
}

impl SetpointSpec {
    fn value(&self, t: f64, k: usize) -> f64 {
        match self {
            SetpointSpec::Step { amplitude } => *amplitude,
            SetpointSpec::Square { amplitude, period } => {
                let phase = (t / period).rem_euclid(1.0);
                if phase < 0.5 {
                    *amplitude
                } else {
                    0.0
                }
            }
            SetpointSpec::Samples { values } => {
                values.get(k).or(values.last()).copied().unwrap_or(0.0)
            }
        }
    }
}

/// Everything one closed-loop run needs.
#[derive(Debug, Clone)]
pub struct LoopConfig {
    pub plant: RationalTf,
    /// The predictor's internal plant model; equals `plant` when the model
    /// is assumed exact.
    pub plant_model: RationalTf,
    pub controller: RationalTf,
    /// The predictor's internal estimate of the total loop transport delay.
    pub model_delay: f64,
    pub sensor_delay: DelayProcess,
    pub actuator_delay: DelayProcess,
    pub setpoint: SetpointSpec,
    pub step: f64,
    pub horizon: f64,
}

impl LoopConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.step > 0.0) {
            return Err(SimError::InvalidConfig(format!("step must be > 0, got {}", self.step)));
        }
        if !(self.horizon > 0.0) {
            return Err(SimError::InvalidConfig(format!(
                "horizon must be > 0, got {}",
                self.horizon
            )));
        }
        if self.model_delay < 0.0 {
            return Err(SimError::InvalidConfig("model_delay must be >= 0".into()));
        }
        for d in [&self.sensor_delay, &self.actuator_delay] {
            if let Some(p) = d.redraw_period() {
                if self.step > p / 10.0 {
                    return Err(SimError::InvalidConfig(format!(
                        "step {} too coarse for redraw period {p} (need step <= period/10)",
                        self.step
                    )));
                }
            }
            if d.upper_bound() < 0.0 {
                return Err(SimError::InvalidConfig("delays must be >= 0".into()));
            }
        }
        // The horizon must cover the slow plant dynamics.
        let slowest = self
            .plant
            .den
            .roots()
            .iter()
            .filter(|r| r.re < -1e-9)
            .map(|r| 1.0 / -r.re)
            .fold(0.0, f64::max);
        if slowest > 0.0 && self.horizon < 10.0 * slowest {
            return Err(SimError::InvalidConfig(format!(
                "horizon {} shorter than 10 plant time constants ({})",
                self.horizon,
                10.0 * slowest
            )));
        }
        if self.plant.unit != self.controller.unit || self.plant.unit != self.plant_model.unit {
            return Err(SimError::InvalidConfig("plant/model/controller time units differ".into()));
        }
        Ok(())
    }
}

/// Summary metrics recomputable from the trace columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    /// Integral of squared error over the horizon, in signal^2 * time unit.
    pub ise: f64,
    pub overshoot_pct: f64,
    /// Earliest time after which the output stays within 5% of the
    /// setpoint; `None` when it never settles inside the horizon.
    pub settling_time: Option<f64>,
    pub diverged: bool,
}

/// Time-indexed record of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub time: Vec<f64>,
    pub setpoint: Vec<f64>,
    pub corrected_error: Vec<f64>,
    pub control: Vec<f64>,
    pub actuator_delay: Vec<f64>,
    pub sensor_delay: Vec<f64>,
    pub output: Vec<f64>,
    pub metrics: Metrics,
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid loop configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Lti(#[from] LtiError),
}

/// Reads a transport buffer at `t - tau` with linear interpolation; times
/// before the start of the run read as zero, and a non-positive delay reads
/// the newest sample exactly.
fn read_delayed(hist: &[f64], t: f64, tau: f64, step: f64) -> f64 {
    if tau <= 0.0 {
        return *hist.last().unwrap_or(&0.0);
    }
    let pos = (t - tau) / step;
    if pos < 0.0 {
        return 0.0;
    }
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    let a = hist.get(i).copied().unwrap_or(0.0);
    let b = hist.get(i + 1).copied().unwrap_or(a);
    a * (1.0 - frac) + b * frac
}

struct Discretized {
    plant: DiscreteStateSpace,
    model: DiscreteStateSpace,
    controller: DiscreteStateSpace,
}

fn discretize_loop(cfg: &LoopConfig) -> Result<Discretized, SimError> {
    Ok(Discretized {
        plant: discretize(&to_state_space(&cfg.plant)?, cfg.step)?,
        model: discretize(&to_state_space(&cfg.plant_model)?, cfg.step)?,
        controller: discretize(&to_state_space(&cfg.controller)?, cfg.step)?,
    })
}

fn run(cfg: &LoopConfig, smith: bool) -> Result<SimTrace, SimError> {
    cfg.validate()?;
    let d = discretize_loop(cfg)?;
    let steps = (cfg.horizon / cfg.step).round() as usize;

    let mut x_plant = DVector::zeros(d.plant.order());
    let mut x_model = DVector::zeros(d.model.order());
    let mut x_ctrl = DVector::zeros(d.controller.order());

    let mut y_hist: Vec<f64> = Vec::with_capacity(steps + 1);
    let mut ystar_hist: Vec<f64> = Vec::with_capacity(steps + 1);
    let mut u_hist: Vec<f64> = Vec::with_capacity(steps + 1);

    let mut trace = SimTrace {
        time: Vec::with_capacity(steps + 1),
        setpoint: Vec::with_capacity(steps + 1),
        corrected_error: Vec::with_capacity(steps + 1),
        control: Vec::with_capacity(steps + 1),
        actuator_delay: Vec::with_capacity(steps + 1),
        sensor_delay: Vec::with_capacity(steps + 1),
        output: Vec::with_capacity(steps + 1),
        metrics: Metrics { ise: 0.0, overshoot_pct: 0.0, settling_time: None, diverged: false },
    };

    // Held inputs applied over the previous interval; the sampled outputs
    // at t_k are taken before the new inputs latch.
    let mut plant_in_prev = 0.0;
    let mut model_in_prev = 0.0;

    for k in 0..=steps {
        let t = k as f64 * cfg.step;
        let tau_s = cfg.sensor_delay.sample(t);
        let tau_a = cfg.actuator_delay.sample(t);

        let y = d.plant.output(&x_plant, plant_in_prev);
        let y_star = d.model.output(&x_model, model_in_prev);
        y_hist.push(y);
        ystar_hist.push(y_star);

        let r = cfg.setpoint.value(t, k);
        let y_delayed = read_delayed(&y_hist, t, tau_s, cfg.step);
        let eps = if smith {
            let y_star_delayed = read_delayed(&ystar_hist, t, cfg.model_delay, cfg.step);
            r - y_delayed + y_star_delayed - y_star
        } else {
            r - y_delayed
        };

        let u = d.controller.output(&x_ctrl, eps);
        u_hist.push(u);
        let plant_in = read_delayed(&u_hist, t, tau_a, cfg.step);

        trace.time.push(t);
        trace.setpoint.push(r);
        trace.corrected_error.push(eps);
        trace.control.push(u);
        trace.actuator_delay.push(tau_a);
        trace.sensor_delay.push(tau_s);
        trace.output.push(y);

        if !y.is_finite() || y.abs() > DIVERGENCE_LIMIT {
            trace.metrics.diverged = true;
            break;
        }

        d.plant.advance(&mut x_plant, plant_in);
        d.model.advance(&mut x_model, u);
        d.controller.advance(&mut x_ctrl, eps);
        plant_in_prev = plant_in;
        model_in_prev = u;
    }

    finish_metrics(&mut trace, cfg.step);
    Ok(trace)
}

fn finish_metrics(trace: &mut SimTrace, step: f64) {
    let mut ise = 0.0;
    let mut r_max = 0.0_f64;
    let mut y_max = f64::NEG_INFINITY;
    for (r, y) in trace.setpoint.iter().zip(&trace.output) {
        let e = r - y;
        if e.is_finite() {
            ise += e * e * step;
        } else {
            ise = f64::INFINITY;
        }
        r_max = r_max.max(r.abs());
        y_max = y_max.max(*y);
    }
    trace.metrics.ise = ise;
    trace.metrics.overshoot_pct = if r_max > 0.0 && y_max > r_max {
        100.0 * (y_max - r_max) / r_max
    } else {
        0.0
    };
    trace.metrics.settling_time = if trace.metrics.diverged {
        None
    } else {
        let band = 0.05 * r_max;
        let mut settle = Some(0.0);
        for ((t, r), y) in trace.time.iter().zip(&trace.setpoint).zip(&trace.output) {
            if (r - y).abs() > band {
                settle = None;
            } else if settle.is_none() {
                settle = Some(*t);
            }
        }
        settle
    };
}

/// Classic unity-feedback loop with the network delays applied and no
/// compensation.
pub fn run_uncompensated(cfg: &LoopConfig) -> Result<SimTrace, SimError> {
    run(cfg, false)
}

/// The compensated loop: the controller sees the corrected error
/// `r - y_delayed + y*_delayed - y*`, with the internal model simulated
/// once delayed by `model_delay` and once undelayed.
pub fn run_smith(cfg: &LoopConfig) -> Result<SimTrace, SimError> {
    run(cfg, true)
}

/// One labelled entry of a comparison run.
#[derive(Debug, Clone)]
pub struct CompareCase {
    pub label: String,
    pub compensated: bool,
    pub cfg: LoopConfig,
}

/// Comparison table across runs sharing a setpoint and horizon.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub rows: Vec<(String, Metrics)>,
    pub traces: Vec<(String, SimTrace)>,
}

pub fn compare(cases: &[CompareCase]) -> Result<ComparisonReport, SimError> {
    if let Some(first) = cases.first() {
        for c in cases {
            if c.cfg.horizon != first.cfg.horizon || c.cfg.setpoint != first.cfg.setpoint {
                return Err(SimError::InvalidConfig(
                    "comparison runs must share setpoint and horizon".into(),
                ));
            }
        }
    }
    let mut rows = Vec::with_capacity(cases.len());
    let mut traces = Vec::with_capacity(cases.len());
    for c in cases {
        let trace = run(&c.cfg, c.compensated)?;
        rows.push((c.label.clone(), trace.metrics.clone()));
        traces.push((c.label.clone(), trace));
    }
    Ok(ComparisonReport { rows, traces })
}

/// The benchmark scenario used throughout: reference plant and PI
/// controller (time in ms), square-wave setpoint of period 100 ms over a
/// 200 ms horizon, both network delays uniform in [0, 3.5) ms redrawn every
/// 10 ms, predictor model delay set to the 3.5 ms bound.
pub fn reference_scenario(seed: u64) -> LoopConfig {
    let plant = crate::lti::reference_plant();
    LoopConfig {
        plant_model: plant.clone(),
        plant,
        controller: crate::lti::reference_controller(),
        model_delay: 3.5,
        sensor_delay: DelayProcess::Uniform {
            ubd: 3.5,
            redraw_period: 10.0,
            seed: derive_seed(seed, 0x5345_4E53),
        },
        actuator_delay: DelayProcess::Uniform {
            ubd: 3.5,
            redraw_period: 10.0,
            seed: derive_seed(seed, 0x4143_5455),
        },
        setpoint: SetpointSpec::Square { amplitude: 1.0, period: 100.0 },
        step: 0.01,
        horizon: 200.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::{reference_controller, reference_plant, Polynomial, TimeUnit};
    use approx::assert_relative_eq;

    fn zero_delay_cfg() -> LoopConfig {
        let plant = reference_plant();
        LoopConfig {
            plant_model: plant.clone(),
            plant,
            controller: reference_controller(),
            model_delay: 0.0,
            sensor_delay: DelayProcess::zero(),
            actuator_delay: DelayProcess::zero(),
            setpoint: SetpointSpec::Step { amplitude: 1.0 },
            step: 0.01,
            horizon: 120.0,
        }
    }

    #[test]
    fn step_response_converges_to_setpoint() {
        let trace = run_uncompensated(&zero_delay_cfg()).unwrap();
        assert!(!trace.metrics.diverged);
        let y_end = *trace.output.last().unwrap();
        assert_relative_eq!(y_end, 1.0, max_relative = 1e-3);
        assert!(trace.metrics.settling_time.is_some());
    }

    #[test]
    fn zero_plant_keeps_output_zero() {
        let mut cfg = zero_delay_cfg();
        cfg.plant = RationalTf::new(
            Polynomial::zero(),
            Polynomial::new([1.0, 1.0]),
            TimeUnit::Milliseconds,
        )
        .unwrap();
        cfg.plant_model = cfg.plant.clone();
        let trace = run_uncompensated(&cfg).unwrap();
        assert!(trace.output.iter().all(|&y| y == 0.0));
    }

    #[test]
    fn smith_equals_plain_without_delays() {
        let cfg = zero_delay_cfg();
        let plain = run_uncompensated(&cfg).unwrap();
        let smith = run_smith(&cfg).unwrap();
        let max_diff = plain
            .output
            .iter()
            .zip(&smith.output)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(max_diff < 1e-9, "max output difference {max_diff}");
        let max_u = plain
            .control
            .iter()
            .zip(&smith.control)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(max_u < 1e-9, "max control difference {max_u}");
    }

    #[test]
    fn constant_matched_delays_shift_the_ideal_response() {
        // Sensor and actuator each carry half the loop delay; the predictor
        // models their sum. The plant output then equals the zero-delay
        // response shifted by the actuator-side delay.
        let mut cfg = zero_delay_cfg();
        cfg.sensor_delay = DelayProcess::Constant { value: 1.75 };
        cfg.actuator_delay = DelayProcess::Constant { value: 1.75 };
        cfg.model_delay = 3.5;
        let smith = run_smith(&cfg).unwrap();
        let ideal = run_uncompensated(&zero_delay_cfg()).unwrap();
        let shift = (1.75 / cfg.step).round() as usize;
        let mut max_dev = 0.0_f64;
        for k in 0..ideal.output.len() - shift {
            max_dev = max_dev.max((smith.output[k + shift] - ideal.output[k]).abs());
        }
        assert!(max_dev < 0.01, "max deviation from shifted ideal {max_dev}");
    }

    #[test]
    fn delays_stay_within_bound_and_piecewise_constant() {
        let p = DelayProcess::Uniform { ubd: 3.5, redraw_period: 10.0, seed: 9 };
        let mut last = None;
        for k in 0..20_000 {
            let t = k as f64 * 0.01;
            let v = p.sample(t);
            assert!((0.0..3.5).contains(&v));
            let idx = (t / 10.0).floor() as u64;
            if let Some((last_idx, last_v)) = last {
                if last_idx == idx {
                    assert_eq!(v, last_v);
                }
            }
            last = Some((idx, v));
        }
        // Reproducible and independent of query pattern.
        assert_eq!(p.sample(12.34), p.sample(12.34));
    }

    #[test]
    fn deterministic_traces_per_seed() {
        let cfg = reference_scenario(5);
        let a = run_smith(&cfg).unwrap();
        let b = run_smith(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_delays_degrade_the_uncompensated_loop() {
        let cfg = reference_scenario(0);
        let delayed = run_uncompensated(&cfg).unwrap();
        let mut ideal_cfg = cfg.clone();
        ideal_cfg.sensor_delay = DelayProcess::zero();
        ideal_cfg.actuator_delay = DelayProcess::zero();
        let ideal = run_uncompensated(&ideal_cfg).unwrap();
        assert!(delayed.metrics.ise > ideal.metrics.ise, "delays did not hurt");
    }

    #[test]
    fn smith_beats_uncompensated_under_random_delays() {
        let cfg = reference_scenario(1);
        let plain = run_uncompensated(&cfg).unwrap();
        let smith = run_smith(&cfg).unwrap();
        assert!(smith.metrics.ise < plain.metrics.ise);
    }

    #[test]
    fn compare_reports_identical_metrics_for_identical_cases() {
        let cfg = zero_delay_cfg();
        let report = compare(&[
            CompareCase { label: "a".into(), compensated: false, cfg: cfg.clone() },
            CompareCase { label: "b".into(), compensated: false, cfg },
        ])
        .unwrap();
        assert_eq!(report.rows[0].1, report.rows[1].1);
        assert!(compare(&[]).unwrap().rows.is_empty());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = zero_delay_cfg();
        cfg.step = 0.0;
        assert!(matches!(run_uncompensated(&cfg), Err(SimError::InvalidConfig(_))));
        let mut cfg = zero_delay_cfg();
        cfg.horizon = 0.0;
        assert!(run_uncompensated(&cfg).is_err());
        let mut cfg = zero_delay_cfg();
        cfg.sensor_delay = DelayProcess::Uniform { ubd: 1.0, redraw_period: 0.05, seed: 0 };
        assert!(run_uncompensated(&cfg).is_err());
        let mut cfg = zero_delay_cfg();
        cfg.horizon = 10.0;
        assert!(run_uncompensated(&cfg).is_err(), "horizon below plant settling must fail");
    }

    #[test]
    fn step_halving_changes_ise_below_one_percent() {
        let cfg = reference_scenario(2);
        let coarse = run_smith(&cfg).unwrap();
        let mut fine_cfg = cfg.clone();
        fine_cfg.step = cfg.step / 2.0;
        let fine = run_smith(&fine_cfg).unwrap();
        let rel = (coarse.metrics.ise - fine.metrics.ise).abs() / fine.metrics.ise;
        assert!(rel < 0.01, "ISE changed by {rel} on step halving");
    }
}
