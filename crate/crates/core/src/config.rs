//! TOML pipeline configuration: one file describes the network, the
//! control loop and the simulation scenario, each section independently
//! usable.
//!
//! Capacities and rates accept the suffixes `bps|kbps|Mbps` (bits per
//! second) and `Bps|kBps|MBps` (bytes per second); bare numbers are bytes
//! per second. All quantities are converted to bytes and seconds at this
//! boundary. Control-section polynomials are coefficient lists in
//! ascending powers of s, and every time in the `[simulation]` section is
//! expressed in the control section's `time_unit`.

use crate::lti::{Polynomial, RationalTf, TimeUnit};
use crate::net_model::{Link, NetworkModel, NodeId, Stream, StreamId, SwitchSpec, TrafficEnvelope};
use crate::smith_sim::{DelayProcess, LoopConfig, SetpointSpec};
use serde::Deserialize;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read '{path}': {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("configuration parse error: {0}")]
    Parse(String),
    #[error("missing section [{0}]")]
    MissingSection(&'static str),
    #[error("invalid value for {what}: {why}")]
    Invalid { what: String, why: String },
    #[error("route inference for stream '{stream}' failed: {why}")]
    Route { stream: String, why: String },
}

/// Number with an optional unit suffix.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RateValue {
    Number(f64),
    Text(String),
}

impl RateValue {
    /// Bytes per second.
    pub fn bytes_per_second(&self, what: &str) -> Result<f64, ConfigError> {
        let v = match self {
            RateValue::Number(n) => *n,
            RateValue::Text(s) => parse_rate(s).ok_or_else(|| ConfigError::Invalid {
                what: what.to_owned(),
                why: format!("cannot parse rate '{s}'"),
            })?,
        };
        if !(v > 0.0) {
            return Err(ConfigError::Invalid {
                what: what.to_owned(),
                why: format!("must be > 0, got {v}"),
            });
        }
        Ok(v)
    }
}

fn parse_rate(s: &str) -> Option<f64> {
    let s = s.trim();
    // Longest suffixes first so "kbps" is not read as "bps".
    const SUFFIXES: [(&str, f64); 6] = [
        ("MBps", 1e6),
        ("kBps", 1e3),
        ("Mbps", 1e6 / 8.0),
        ("kbps", 1e3 / 8.0),
        ("Bps", 1.0),
        ("bps", 1.0 / 8.0),
    ];
    for (suffix, factor) in SUFFIXES {
        if let Some(prefix) = s.strip_suffix(suffix) {
            return prefix.trim().parse::<f64>().ok().map(|v| v * factor);
        }
    }
    s.parse::<f64>().ok()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwitchEntry {
    pub id: String,
    pub port_count: u32,
    pub backplane_capacity: Option<RateValue>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkEntry {
    pub from: String,
    pub to: String,
    pub capacity: RateValue,
    /// Declare the reverse direction too (full duplex). Defaults to true.
    pub bidirectional: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub stations: Vec<String>,
    #[serde(default, rename = "switch")]
    pub switches: Vec<SwitchEntry>,
    #[serde(default, rename = "link")]
    pub links: Vec<LinkEntry>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamEntry {
    pub id: String,
    pub source: String,
    pub destination: String,
    /// Bytes.
    pub sigma: f64,
    pub rho: RateValue,
    /// Bytes.
    pub max_frame_len: f64,
    /// Ordered switch list; inferred from the topology when omitted.
    pub route: Option<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TfEntry {
    /// Ascending powers of s.
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSection {
    pub time_unit: String,
    pub plant: TfEntry,
    pub controller: TfEntry,
    /// Stream carrying sensor measurements across the network.
    pub sensor_stream: Option<String>,
    /// Stream carrying actuator commands across the network.
    pub actuator_stream: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetpointEntry {
    pub kind: String,
    pub amplitude: Option<f64>,
    pub period: Option<f64>,
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayEntry {
    pub kind: String,
    pub value: Option<f64>,
    pub ubd: Option<f64>,
    pub redraw_period: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub step: f64,
    pub horizon: f64,
    pub model_delay: f64,
    pub setpoint: SetpointEntry,
    pub sensor_delay: DelayEntry,
    pub actuator_delay: DelayEntry,
    pub plant_model: Option<TfEntry>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<String>,
}

/// The whole pipeline file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub network: Option<NetworkSection>,
    #[serde(default, rename = "stream")]
    pub streams: Vec<StreamEntry>,
    pub control: Option<ControlSection>,
    pub simulation: Option<SimulationSection>,
    pub output: Option<OutputSection>,
}

impl PipelineConfig {
    pub fn from_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_str(&text)
    }

    /// Builds the network model, expanding duplex link entries and
    /// inferring any omitted routes.
    pub fn network_model(&self) -> Result<NetworkModel, ConfigError> {
        let section = self.network.as_ref().ok_or(ConfigError::MissingSection("network"))?;
        let mut links = Vec::new();
        for entry in &section.links {
            let capacity = entry
                .capacity
                .bytes_per_second(&format!("link {} -> {} capacity", entry.from, entry.to))?;
            links.push(Link {
                from: NodeId::new(entry.from.clone()),
                to: NodeId::new(entry.to.clone()),
                capacity,
            });
            if entry.bidirectional.unwrap_or(true) {
                links.push(Link {
                    from: NodeId::new(entry.to.clone()),
                    to: NodeId::new(entry.from.clone()),
                    capacity,
                });
            }
        }
        let mut switches = Vec::new();
        for entry in &section.switches {
            let backplane = match &entry.backplane_capacity {
                Some(v) => {
                    Some(v.bytes_per_second(&format!("switch {} backplane", entry.id))?)
                }
                None => None,
            };
            switches.push(SwitchSpec {
                id: NodeId::new(entry.id.clone()),
                port_count: entry.port_count,
                backplane_capacity: backplane,
            });
        }
        let mut model = NetworkModel {
            stations: section.stations.iter().map(|s| NodeId::new(s.clone())).collect(),
            switches,
            links,
            streams: Vec::new(),
        };
        for entry in &self.streams {
            let rho = entry.rho.bytes_per_second(&format!("stream {} rho", entry.id))?;
            let route = match &entry.route {
                Some(route) => route.iter().map(|s| NodeId::new(s.clone())).collect(),
                None => model
                    .unique_route(&NodeId::new(entry.source.clone()), &NodeId::new(entry.destination.clone()))
                    .map_err(|e| ConfigError::Route {
                        stream: entry.id.clone(),
                        why: e.to_string(),
                    })?,
            };
            model.streams.push(Stream {
                id: StreamId::new(entry.id.clone()),
                source: NodeId::new(entry.source.clone()),
                destination: NodeId::new(entry.destination.clone()),
                envelope0: TrafficEnvelope { sigma: entry.sigma, rho },
                max_frame_len: entry.max_frame_len,
                route,
            });
        }
        Ok(model)
    }

    pub fn time_unit(&self) -> Result<TimeUnit, ConfigError> {
        let section = self.control.as_ref().ok_or(ConfigError::MissingSection("control"))?;
        TimeUnit::parse(&section.time_unit).ok_or_else(|| ConfigError::Invalid {
            what: "control.time_unit".into(),
            why: format!("unknown unit '{}'", section.time_unit),
        })
    }

    fn tf(entry: &TfEntry, unit: TimeUnit, what: &str) -> Result<RationalTf, ConfigError> {
        RationalTf::new(
            Polynomial::new(entry.num.clone()),
            Polynomial::new(entry.den.clone()),
            unit,
        )
        .map_err(|e| ConfigError::Invalid { what: what.to_owned(), why: e.to_string() })
    }

    /// Plant and controller transfer functions in the declared unit.
    pub fn control_loop(&self) -> Result<(RationalTf, RationalTf), ConfigError> {
        let section = self.control.as_ref().ok_or(ConfigError::MissingSection("control"))?;
        let unit = self.time_unit()?;
        Ok((
            Self::tf(&section.plant, unit, "control.plant")?,
            Self::tf(&section.controller, unit, "control.controller")?,
        ))
    }

    /// Builds the simulation scenario. `seed_override` replaces the file's
    /// seed when given (the command line wins).
    pub fn loop_config(&self, seed_override: Option<u64>) -> Result<LoopConfig, ConfigError> {
        let sim = self.simulation.as_ref().ok_or(ConfigError::MissingSection("simulation"))?;
        let unit = self.time_unit()?;
        let (plant, controller) = self.control_loop()?;
        let plant_model = match &sim.plant_model {
            Some(entry) => Self::tf(entry, unit, "simulation.plant_model")?,
            None => plant.clone(),
        };
        let seed = seed_override.unwrap_or(sim.seed);
        let setpoint = match sim.setpoint.kind.as_str() {
            "step" => SetpointSpec::Step { amplitude: sim.setpoint.amplitude.unwrap_or(1.0) },
            "square" => SetpointSpec::Square {
                amplitude: sim.setpoint.amplitude.unwrap_or(1.0),
                period: sim.setpoint.period.ok_or_else(|| ConfigError::Invalid {
                    what: "simulation.setpoint.period".into(),
                    why: "required for a square wave".into(),
                })?,
            },
            "samples" => SetpointSpec::Samples {
                values: sim.setpoint.values.clone().unwrap_or_default(),
            },
            other => {
                return Err(ConfigError::Invalid {
                    what: "simulation.setpoint.kind".into(),
                    why: format!("unknown kind '{other}'"),
                })
            }
        };
        let delay = |entry: &DelayEntry, what: &str, salt: u64| -> Result<DelayProcess, ConfigError> {
            match entry.kind.as_str() {
                "constant" => Ok(DelayProcess::Constant { value: entry.value.unwrap_or(0.0) }),
                "uniform" => Ok(DelayProcess::Uniform {
                    ubd: entry.ubd.ok_or_else(|| ConfigError::Invalid {
                        what: format!("{what}.ubd"),
                        why: "required for a uniform delay".into(),
                    })?,
                    redraw_period: entry.redraw_period.ok_or_else(|| ConfigError::Invalid {
                        what: format!("{what}.redraw_period"),
                        why: "required for a uniform delay".into(),
                    })?,
                    seed: crate::smith_sim::derive_seed(seed, salt),
                }),
                other => Err(ConfigError::Invalid {
                    what: format!("{what}.kind"),
                    why: format!("unknown kind '{other}'"),
                }),
            }
        };
        Ok(LoopConfig {
            plant,
            plant_model,
            controller,
            model_delay: sim.model_delay,
            sensor_delay: delay(&sim.sensor_delay, "simulation.sensor_delay", 0x5345_4E53)?,
            actuator_delay: delay(&sim.actuator_delay, "simulation.actuator_delay", 0x4143_5455)?,
            setpoint,
            step: sim.step,
            horizon: sim.horizon,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net_model::case_study_model;

    const CASE_STUDY: &str = include_str!("../../../configs/case_study.toml");

    #[test]
    fn rate_suffixes() {
        assert_eq!(parse_rate("10Mbps"), Some(1.25e6));
        assert_eq!(parse_rate("1.25MBps"), Some(1.25e6));
        assert_eq!(parse_rate("100kbps"), Some(12_500.0));
        assert_eq!(parse_rate("9600 bps"), Some(1200.0));
        assert_eq!(parse_rate("7200Bps"), Some(7200.0));
        assert_eq!(parse_rate("5kBps"), Some(5000.0));
        assert_eq!(parse_rate("123456"), Some(123456.0));
        assert_eq!(parse_rate("fast"), None);
    }

    #[test]
    fn case_study_file_matches_builtin_model() {
        let cfg = PipelineConfig::from_str(CASE_STUDY).unwrap();
        let model = cfg.network_model().unwrap();
        assert_eq!(model, case_study_model());
        assert!(model.validate().is_clean());
    }

    #[test]
    fn case_study_control_section() {
        let cfg = PipelineConfig::from_str(CASE_STUDY).unwrap();
        let (p, c) = cfg.control_loop().unwrap();
        assert_eq!(p.num.coeffs(), &[2.0]);
        assert_eq!(p.den.coeffs(), &[1.0, 5.2, 1.0]);
        assert_eq!(c.num.coeffs(), &[0.5, 0.5]);
        assert_eq!(cfg.time_unit().unwrap(), TimeUnit::Milliseconds);
        let lc = cfg.loop_config(None).unwrap();
        assert_eq!(lc.model_delay, 3.5);
        assert!(lc.validate().is_ok());
    }

    #[test]
    fn routes_are_inferred_when_omitted() {
        let text = r#"
            [network]
            stations = ["a", "b"]
            [[network.switch]]
            id = "sw"
            port_count = 2
            [[network.link]]
            from = "a"
            to = "sw"
            capacity = "10Mbps"
            [[network.link]]
            from = "sw"
            to = "b"
            capacity = "10Mbps"
            [[stream]]
            id = "s"
            source = "a"
            destination = "b"
            sigma = 100.0
            rho = "1kBps"
            max_frame_len = 100.0
        "#;
        let cfg = PipelineConfig::from_str(text).unwrap();
        let model = cfg.network_model().unwrap();
        assert_eq!(model.streams[0].route, vec![NodeId::new("sw")]);
        assert_eq!(model.streams[0].envelope0.rho, 1000.0);
    }

    #[test]
    fn parse_errors_carry_location() {
        let err = PipelineConfig::from_str("[network\nstations=3").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line"), "no location in: {msg}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = PipelineConfig::from_str("[network]\nstations = []\nfoo = 1").unwrap_err();
        assert!(matches!(err, ConfigError::Parse(_)));
    }
}
