//! Seeded synthetic data: bearing run-to-failure vibration and turbofan-style
//! sensor fleets. Every snapshot and unit draws from its own stream derived
//! from the configured seed, so output never depends on generation order.

use std::f64::consts::TAU;

use rand::Rng;

use crate::error::{Error, Result};
use crate::prognostics::{CycleRecord, RunToFailureUnit, SENSORS, SETTINGS};
use crate::rng::{derive_seed, gaussian, prng, Prng};
use crate::signals::Signal;
use crate::spectral::{fault_frequency, Defect};

/// Stream index separating the second (vertical) accelerometer channel.
const VERTICAL_STREAM: u64 = 0x5645_5254;

/// Impulse-response and tone parameters shared by all bearing generators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VibrationModel {
    pub shaft_amplitude: f64,
    pub impulse_amplitude: f64,
    /// Carrier of the exponentially decaying resonance excited by each impact.
    pub resonance_hz: f64,
    /// Decay rate of the resonance in 1/s.
    pub decay_per_s: f64,
    /// Relative standard deviation of per-impact amplitude.
    pub impact_jitter: f64,
}

impl Default for VibrationModel {
    fn default() -> Self {
        Self {
            shaft_amplitude: 0.2,
            impulse_amplitude: 1.0,
            resonance_hz: 3000.0,
            decay_per_s: 800.0,
            impact_jitter: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BearingSimConfig {
    /// `None` simulates a healthy bearing.
    pub fault: Option<Defect>,
    pub rpm: f64,
    pub sample_rate_hz: f64,
    pub snapshot_len: usize,
    pub snapshots: usize,
    pub severity_exponent: f64,
    /// Standard deviation of additive Gaussian noise.
    pub noise: f64,
    pub seed: u64,
    pub model: VibrationModel,
}

impl Default for BearingSimConfig {
    fn default() -> Self {
        Self {
            fault: Some(Defect::OuterRing),
            rpm: 1800.0,
            sample_rate_hz: 25_600.0,
            snapshot_len: 2560,
            snapshots: 200,
            severity_exponent: 2.0,
            noise: 0.1,
            seed: 0,
            model: VibrationModel::default(),
        }
    }
}

impl BearingSimConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.rpm, self.sample_rate_hz, self.severity_exponent];
        if positive.iter().any(|v| !v.is_finite() || *v <= 0.0) || self.snapshot_len == 0 || self.snapshots == 0 {
            return Err(Error::Config("bearing simulation needs positive rpm, rate, lengths and exponent".into()));
        }
        if !self.noise.is_finite() || self.noise < 0.0 {
            return Err(Error::Config(format!("invalid noise level {}", self.noise)));
        }
        Ok(())
    }

    /// Fault severity of snapshot `index`: `(index / snapshots)^exponent`.
    pub fn severity(&self, index: usize) -> f64 {
        (index as f64 / self.snapshots as f64).powf(self.severity_exponent)
    }
}

/// Shaft tone plus an impulse train at the defect frequency, each impact
/// ringing the structural resonance, plus white noise.
#[allow(clippy::too_many_arguments)]
fn render(
    fault: Option<Defect>,
    severity: f64,
    rpm: f64,
    fs: f64,
    len: usize,
    noise: f64,
    model: &VibrationModel,
    rng: &mut Prng,
) -> Vec<f64> {
    let shaft_hz = rpm / 60.0;
    let shaft_phase = rng.gen::<f64>() * TAU;
    let mut x: Vec<f64> = (0..len)
        .map(|n| model.shaft_amplitude * (TAU * shaft_hz * n as f64 / fs + shaft_phase).sin())
        .collect();
    if let Some(defect) = fault {
        let period = fs / fault_frequency(defect, rpm);
        // resonance tail is cut once it has decayed below 1e-4
        let ring = ((1e4f64).ln() / model.decay_per_s * fs).ceil() as usize;
        let mut t0 = -(rng.gen::<f64>() * period) - ring as f64;
        while t0 < len as f64 {
            let amp = model.impulse_amplitude * severity * (1.0 + model.impact_jitter * gaussian(rng));
            let first = t0.ceil().max(0.0) as usize;
            let last = ((t0 + ring as f64).floor().max(-1.0) + 1.0).min(len as f64) as usize;
            for (n, v) in x.iter_mut().enumerate().take(last).skip(first) {
                let tau = (n as f64 - t0) / fs;
                *v += amp * (-model.decay_per_s * tau).exp() * (TAU * model.resonance_hz * tau).sin();
            }
            t0 += period;
        }
    }
    for v in &mut x {
        *v += noise * gaussian(rng);
    }
    x
}

/// Ordered snapshots of one simulated bearing life.
pub fn synth_bearing_run(cfg: &BearingSimConfig) -> Result<Vec<Signal>> {
    cfg.validate()?;
    (0..cfg.snapshots)
        .map(|i| {
            let mut rng = prng(derive_seed(cfg.seed, i as u64));
            let samples = render(
                cfg.fault,
                cfg.severity(i),
                cfg.rpm,
                cfg.sample_rate_hz,
                cfg.snapshot_len,
                cfg.noise,
                &cfg.model,
                &mut rng,
            );
            Signal::new(samples, cfg.sample_rate_hz)
        })
        .collect()
}

/// Horizontal and vertical channels of one run; the vertical channel uses an
/// independent stream derived from the seed.
pub fn synth_bearing_channels(cfg: &BearingSimConfig) -> Result<(Vec<Signal>, Vec<Signal>)> {
    let horizontal = synth_bearing_run(cfg)?;
    let vertical = synth_bearing_run(&BearingSimConfig {
        seed: derive_seed(cfg.seed, VERTICAL_STREAM),
        ..cfg.clone()
    })?;
    Ok((horizontal, vertical))
}

/// One continuous recording at fixed fault severity.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultSignalConfig {
    pub fault: Option<Defect>,
    pub severity: f64,
    pub rpm: f64,
    pub sample_rate_hz: f64,
    pub len: usize,
    pub noise: f64,
    pub seed: u64,
    pub model: VibrationModel,
}

impl Default for FaultSignalConfig {
    fn default() -> Self {
        Self {
            fault: None,
            severity: 1.0,
            rpm: 1797.0,
            sample_rate_hz: 12_000.0,
            len: 4096 * 120,
            noise: 0.1,
            seed: 0,
            model: VibrationModel::default(),
        }
    }
}

pub fn synth_fault_signal(cfg: &FaultSignalConfig) -> Result<Signal> {
    if cfg.len == 0 || !(cfg.rpm > 0.0 && cfg.sample_rate_hz > 0.0) || !(cfg.severity >= 0.0 && cfg.noise >= 0.0) {
        return Err(Error::Config("fault signal needs positive length, rpm and rate".into()));
    }
    let mut rng = prng(cfg.seed);
    let x = render(
        cfg.fault,
        cfg.severity,
        cfg.rpm,
        cfg.sample_rate_hz,
        cfg.len,
        cfg.noise,
        &cfg.model,
        &mut rng,
    );
    Signal::new(x, cfg.sample_rate_hz)
}

/// Nominal sensor levels used as each sensor's baseline.
const SENSOR_BASELINE: [f64; SENSORS] = [
    518.67, 642.68, 1590.52, 1408.93, 14.62, 21.61, 553.37, 2388.10, 9065.24, 1.30, 47.54, 521.41,
    2388.10, 8143.75, 8.44, 0.03, 393.21, 2388.0, 100.0, 38.82, 23.29,
];

/// Default drift direction per sensor: sensors without a trend are 0.
pub const DEFAULT_DRIFT: [i8; SENSORS] = [0, 1, 1, 1, 0, 0, -1, 1, 1, 0, 1, -1, 1, 1, 1, 0, 1, 0, 0, -1, -1];

#[derive(Debug, Clone, PartialEq)]
pub struct FleetSimConfig {
    pub units: usize,
    pub sensors: usize,
    pub min_life: usize,
    pub max_life: usize,
    /// Direction of each sensor's drift (`+1`, `-1` or `0` for none).
    pub drift_signs: Vec<i8>,
    /// Noise standard deviation relative to the full drift amplitude.
    pub noise: f64,
    pub seed: u64,
}

impl Default for FleetSimConfig {
    fn default() -> Self {
        Self {
            units: 100,
            sensors: SENSORS,
            min_life: 128,
            max_life: 362,
            drift_signs: DEFAULT_DRIFT.to_vec(),
            noise: 0.05,
            seed: 0,
        }
    }
}

impl FleetSimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_life < 30 || self.max_life < self.min_life {
            return Err(Error::Config(format!(
                "life range {}..{} must start at 30 cycles or more",
                self.min_life, self.max_life
            )));
        }
        if self.sensors < 2 || self.drift_signs.len() != self.sensors {
            return Err(Error::Config(format!(
                "{} sensors with {} drift signs",
                self.sensors,
                self.drift_signs.len()
            )));
        }
        if self.units == 0 || !self.noise.is_finite() || self.noise < 0.0 {
            return Err(Error::Config("fleet needs at least one unit and a valid noise level".into()));
        }
        Ok(())
    }
}

/// Run-to-failure units with ids `1..=units`. Sensor `s` of a unit with life
/// `L` reads `base_s + a_s (sign_s (t/L)^2 + noise * N(0, 1))` at cycle `t`.
pub fn synth_turbofan_fleet(cfg: &FleetSimConfig) -> Result<Vec<RunToFailureUnit>> {
    cfg.validate()?;
    (0..cfg.units)
        .map(|u| {
            let mut rng = prng(derive_seed(cfg.seed, u as u64));
            let life = rng.gen_range(cfg.min_life..=cfg.max_life);
            let bases: Vec<f64> = (0..cfg.sensors)
                .map(|s| {
                    let nominal = SENSOR_BASELINE.get(s).copied().unwrap_or(100.0);
                    nominal * (1.0 + 1e-4 * gaussian(&mut rng))
                })
                .collect();
            let amps: Vec<f64> = (0..cfg.sensors)
                .map(|s| 0.005 * SENSOR_BASELINE.get(s).copied().unwrap_or(100.0).abs().max(1.0))
                .collect();
            let cycles = (1..=life)
                .map(|t| {
                    let progress = (t as f64 / life as f64).powi(2);
                    let mut settings = [0.0; SETTINGS];
                    for v in &mut settings {
                        *v = 1e-3 * gaussian(&mut rng);
                    }
                    let sensors = (0..cfg.sensors)
                        .map(|s| {
                            let drift = f64::from(cfg.drift_signs[s]) * progress;
                            bases[s] + amps[s] * (drift + cfg.noise * gaussian(&mut rng))
                        })
                        .collect();
                    CycleRecord {
                        cycle: t as u32,
                        settings,
                        sensors,
                    }
                })
                .collect();
            Ok(RunToFailureUnit {
                unit_id: u as u32 + 1,
                cycles,
            })
        })
        .collect()
}
