use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arrays::ArrayGeometry;
use crate::channel::{ScenarioConfig, Shadowing};
use crate::error::{Error, Result};
use crate::metrics::{dbm_to_watts, noise_power, PowerModel};
use crate::precoders::{IuiAwareOptions, Scheme, SelectionOptions, StopRule, UserOrder};

fn geometry_from_str<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<ArrayGeometry, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

fn geometry_to_str<S: Serializer>(g: &ArrayGeometry, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(g)
}

fn default_name() -> String {
    "experiment".into()
}

fn default_bandwidth() -> f64 {
    500e6
}

fn default_psd() -> f64 {
    -174.0
}

fn default_trials() -> usize {
    500
}

fn default_schemes() -> Vec<Scheme> {
    Scheme::ALL.to_vec()
}

/// A full Monte Carlo experiment, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    /// `ula:N` or `upa:N1xN2`.
    #[serde(deserialize_with = "geometry_from_str", serialize_with = "geometry_to_str")]
    pub geometry: ArrayGeometry,
    pub users: usize,
    #[serde(default)]
    pub channel: ChannelProfile,
    #[serde(default = "default_bandwidth")]
    pub bandwidth_hz: f64,
    #[serde(default = "default_psd")]
    pub noise_psd_dbm_per_hz: f64,
    /// Hardware power figures; `p_t` is replaced by the sweep's transmit power.
    #[serde(default)]
    pub power: PowerModel,
    #[serde(default = "default_schemes")]
    pub schemes: Vec<Scheme>,
    #[serde(default)]
    pub selection: SelectionConfig,
    pub sweep: Sweep,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelProfile {
    pub clusters_per_user: usize,
    pub paths_per_cluster: usize,
    /// Azimuth spread in direction units; geometry default when absent.
    pub spread_az: Option<f64>,
    pub spread_el: Option<f64>,
    pub distance_m: f64,
    pub shadowing: Shadowing,
    pub min_separation: Option<f64>,
    pub jitter: f64,
    pub grid_aligned: bool,
}

impl Default for ChannelProfile {
    fn default() -> Self {
        Self {
            clusters_per_user: 1,
            paths_per_cluster: 10,
            spread_az: None,
            spread_el: None,
            distance_m: 10.0,
            shadowing: Shadowing::default(),
            min_separation: None,
            jitter: 0.5,
            grid_aligned: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelectionConfig {
    pub epsilon: f64,
    /// Select exactly this many beams per user instead of thresholding.
    pub fixed_beams: Option<usize>,
    pub order: UserOrder,
    pub multi_cluster: bool,
    pub iui_aware: Option<IuiAwareConfig>,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.25,
            fixed_beams: None,
            order: UserOrder::Ascending,
            multi_cluster: false,
            iui_aware: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IuiAwareConfig {
    pub eta_min: f64,
    #[serde(default = "one")]
    pub eta_min_decay: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axis", rename_all = "snake_case", deny_unknown_fields)]
pub enum Sweep {
    TransmitPowerDbm {
        values: Vec<f64>,
    },
    Beams {
        values: Vec<usize>,
        transmit_power_dbm: f64,
    },
}

impl Sweep {
    pub fn name(&self) -> &'static str {
        match self {
            Sweep::TransmitPowerDbm { .. } => "p_t_dbm",
            Sweep::Beams { .. } => "beams",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Sweep::TransmitPowerDbm { values } => values.len(),
            Sweep::Beams { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn value(&self, i: usize) -> f64 {
        match self {
            Sweep::TransmitPowerDbm { values } => values[i],
            Sweep::Beams { values, .. } => values[i] as f64,
        }
    }
}

/// Settings of one sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub value: f64,
    pub p_t: f64,
    pub fixed_beams: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.sweep.is_empty() {
            return Err(Error::Config("sweep has no values".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("no schemes requested".into()));
        }
        if let Sweep::Beams { values, .. } = &self.sweep {
            if values.contains(&0) {
                return Err(Error::Config("beam counts must be positive".into()));
            }
        }
        if self.users > self.geometry.num_elements() {
            return Err(Error::Config(format!(
                "{} users exceed {} beams",
                self.users,
                self.geometry.num_elements()
            )));
        }
        self.power.validate().map_err(|e| Error::Config(e.to_string()))?;
        noise_power(self.bandwidth_hz, self.noise_psd_dbm_per_hz).map_err(|e| Error::Config(e.to_string()))?;
        self.selection_options(None)
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        self.scenario().validate()
    }

    pub fn scenario(&self) -> ScenarioConfig {
        let mut s = ScenarioConfig::new(self.geometry, self.users, self.channel.paths_per_cluster);
        let c = &self.channel;
        s.clusters_per_user = c.clusters_per_user;
        s.spread_az = c.spread_az.unwrap_or(s.spread_az);
        s.spread_el = c.spread_el.unwrap_or(s.spread_el);
        s.distance_m = c.distance_m;
        s.shadowing = c.shadowing;
        s.min_separation = c.min_separation;
        s.jitter = c.jitter;
        s.grid_aligned = c.grid_aligned;
        s
    }

    pub fn noise_power(&self) -> f64 {
        noise_power(self.bandwidth_hz, self.noise_psd_dbm_per_hz).expect("validated bandwidth")
    }

    pub fn sweep_point(&self, index: usize) -> SweepPoint {
        let (p_t_dbm, fixed) = match &self.sweep {
            Sweep::TransmitPowerDbm { values } => (values[index], self.selection.fixed_beams),
            Sweep::Beams {
                values,
                transmit_power_dbm,
            } => (*transmit_power_dbm, Some(values[index])),
        };
        SweepPoint {
            index,
            value: self.sweep.value(index),
            p_t: dbm_to_watts(p_t_dbm),
            fixed_beams: fixed,
        }
    }

    pub fn selection_options(&self, fixed_beams: Option<usize>) -> SelectionOptions {
        SelectionOptions {
            stop: match fixed_beams.or(self.selection.fixed_beams) {
                Some(b) => StopRule::FixedCount(b),
                None => StopRule::Threshold(self.selection.epsilon),
            },
            order: self.selection.order,
            multi_cluster: self.selection.multi_cluster,
        }
    }

    pub fn iui_options(&self, fixed_beams: Option<usize>) -> Option<IuiAwareOptions> {
        self.selection.iui_aware.map(|c| IuiAwareOptions {
            selection: self.selection_options(fixed_beams),
            sigma2: self.noise_power(),
            eta_min: c.eta_min,
            eta_min_decay: c.eta_min_decay,
        })
    }
}
