use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{ChannelKind, TwoQubitNoise};
use crate::engine::{run_exact, run_trajectories, SimMode, SimSpec, DEFAULT_SHOTS};
use crate::error::{Error, Result};

/// One sweep over the Cartesian product of channels, n, θ and p.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub channels: Vec<ChannelKind>,
    pub n_list: Vec<usize>,
    pub theta_list: Vec<f64>,
    pub p_grid: Vec<f64>,
    pub mode: SimMode,
    pub shots: u64,
    pub seed: u64,
    pub two_qubit_noise: TwoQubitNoise,
}

/// `count` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|i| {
                if i == count - 1 {
                    stop
                } else {
                    start + (stop - start) * i as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

pub const FIG2_THETAS: [f64; 3] = [0.03125, 0.5, 0.96875];

impl SweepConfig {
    /// All four channels, n = 5, the three reference phases and 26 points on [0, 0.05].
    pub fn fig2() -> Self {
        Self {
            channels: ChannelKind::ALL.to_vec(),
            n_list: vec![5],
            theta_list: FIG2_THETAS.to_vec(),
            p_grid: linspace(0.0, 0.05, 26),
            mode: SimMode::Exact,
            shots: DEFAULT_SHOTS,
            seed: 0,
            two_qubit_noise: TwoQubitNoise::Both,
        }
    }

    /// Same as [`SweepConfig::fig2`] on the fit window: 21 points on [0, 0.01].
    pub fn fit_window() -> Self {
        Self {
            p_grid: linspace(0.0, 0.01, 21),
            ..Self::fig2()
        }
    }

    /// Qubit-count sweep at fixed p with a phase representable for every n ≥ 3.
    pub fn n_sweep(p: f64) -> Self {
        Self {
            channels: vec![ChannelKind::Depolarizing],
            n_list: (3..=8).collect(),
            theta_list: vec![0.125],
            p_grid: vec![p],
            ..Self::fig2()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let empty = |name: &str| Error::Config(format!("{name} must not be empty"));
        if self.channels.is_empty() {
            return Err(empty("channels"));
        }
        if self.n_list.is_empty() {
            return Err(empty("n_list"));
        }
        if self.theta_list.is_empty() {
            return Err(empty("theta_list"));
        }
        if self.p_grid.is_empty() {
            return Err(empty("p_grid"));
        }
        if let Some(p) = self.p_grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Config(format!("p_grid value {p} is outside [0, 1]")));
        }
        if let Some(t) = self.theta_list.iter().find(|t| !(0.0..1.0).contains(*t)) {
            return Err(Error::Config(format!(
                "theta_list value {t} is outside [0, 1)"
            )));
        }
        if let Some(n) = self.n_list.iter().find(|&&n| !(1..=11).contains(&n)) {
            return Err(Error::Config(format!("n_list value {n} is outside 1..=11")));
        }
        if self.mode == SimMode::Sampled && self.shots == 0 {
            return Err(Error::Config(
                "shots must be at least 1 in sampled mode".into(),
            ));
        }
        Ok(())
    }

    /// Parses the TOML config document.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|span| text[..span.start].matches('\n').count() + 1)
                .unwrap_or(1);
            Error::Parse {
                line,
                message: e.message().to_string(),
            }
        })?;
        let cfg = file.into_config()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        let file = ConfigFile {
            channels: Some(
                self.channels
                    .iter()
                    .map(|c| c.as_str().to_string())
                    .collect(),
            ),
            n_list: self.n_list.clone(),
            theta_list: self.theta_list.clone(),
            p_grid: PGrid::List(self.p_grid.clone()),
            mode: Some(self.mode.as_str().to_string()),
            shots: Some(self.shots),
            seed: Some(self.seed),
            two_qubit_noise: Some(self.two_qubit_noise.as_str().to_string()),
        };
        toml::to_string(&file).expect("config serializes")
    }

    /// Number of rows [`run_sweep`] produces.
    pub fn num_points(&self) -> usize {
        self.channels.len() * self.n_list.len() * self.theta_list.len() * self.p_grid.len()
    }

    /// `key=value` pairs describing every setting, defaults included.
    pub fn describe(&self) -> Vec<(String, String)> {
        let list = |v: Vec<String>| v.join(",");
        vec![
            (
                "channels".into(),
                list(self.channels.iter().map(|c| c.to_string()).collect()),
            ),
            (
                "n_list".into(),
                list(self.n_list.iter().map(|n| n.to_string()).collect()),
            ),
            (
                "theta_list".into(),
                list(self.theta_list.iter().map(|t| t.to_string()).collect()),
            ),
            (
                "p_grid".into(),
                list(self.p_grid.iter().map(|p| p.to_string()).collect()),
            ),
            ("mode".into(), self.mode.to_string()),
            ("shots".into(), self.shots.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("two_qubit_noise".into(), self.two_qubit_noise.to_string()),
        ]
    }
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    channels: Option<Vec<String>>,
    n_list: Vec<usize>,
    theta_list: Vec<f64>,
    p_grid: PGrid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    two_qubit_noise: Option<String>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(untagged)]
enum PGrid {
    List(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        points: usize,
    },
}

impl ConfigFile {
    fn into_config(self) -> Result<SweepConfig> {
        let channels = match self.channels {
            Some(names) => names
                .iter()
                .map(|n| n.parse())
                .collect::<Result<Vec<_>>>()?,
            None => ChannelKind::ALL.to_vec(),
        };
        let p_grid = match self.p_grid {
            PGrid::List(v) => v,
            PGrid::Range {
                start,
                stop,
                points,
            } => linspace(start, stop, points),
        };
        Ok(SweepConfig {
            channels,
            n_list: self.n_list,
            theta_list: self.theta_list,
            p_grid,
            mode: self
                .mode
                .as_deref()
                .map(str::parse)
                .transpose()?
                .unwrap_or_default(),
            shots: self.shots.unwrap_or(DEFAULT_SHOTS),
            seed: self.seed.unwrap_or(0),
            two_qubit_noise: self
                .two_qubit_noise
                .as_deref()
                .map(str::parse)
                .transpose()?
                .unwrap_or_default(),
        })
    }
}

/// One simulated point. Field order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub channel: ChannelKind,
    pub n: usize,
    pub theta_actual: f64,
    pub p: f64,
    pub theta_bar: f64,
    pub delta_theta: f64,
    pub mode: SimMode,
    /// 0 in exact mode.
    pub shots: u64,
    pub seed: u64,
}

impl SweepRow {
    pub fn series_key(&self) -> SeriesKey {
        SeriesKey {
            channel: self.channel,
            n: self.n,
            theta_actual: self.theta_actual,
        }
    }
}

/// Identifies one Δθ(p) curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesKey {
    pub channel: ChannelKind,
    pub n: usize,
    pub theta_actual: f64,
}

/// Simulates a single point using the mode, shots, seed and noise placement of `cfg`.
pub fn run_point(
    cfg: &SweepConfig,
    kind: ChannelKind,
    n: usize,
    theta: f64,
    p: f64,
) -> Result<SweepRow> {
    let (mode, seed) = (cfg.mode, cfg.seed);
    let spec = SimSpec::qpe(n, theta, kind, p)?
        .with_two_qubit_noise(cfg.two_qubit_noise)
        .with_seed(seed);
    let (dist, shots) = match mode {
        SimMode::Exact => (run_exact(&spec)?, 0),
        SimMode::Sampled => (run_trajectories(&spec, cfg.shots)?, cfg.shots),
    };
    let stats = dist.stats();
    Ok(SweepRow {
        channel: kind,
        n,
        theta_actual: theta,
        p,
        theta_bar: stats.theta_bar.clamp(0.0, 1.0),
        delta_theta: stats.delta_theta,
        mode,
        shots,
        seed,
    })
}

/// Runs every point of the sweep; rows come back sorted by (channel, n, θ, p)
/// whatever order the points finish in.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let mut points = Vec::with_capacity(cfg.num_points());
    for &kind in &cfg.channels {
        for &n in &cfg.n_list {
            for &theta in &cfg.theta_list {
                for &p in &cfg.p_grid {
                    points.push((kind, n, theta, p));
                }
            }
        }
    }
    let mut rows = points
        .into_par_iter()
        .map(|(kind, n, theta, p)| run_point(cfg, kind, n, theta, p))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| {
        a.channel
            .cmp(&b.channel)
            .then(a.n.cmp(&b.n))
            .then(a.theta_actual.total_cmp(&b.theta_actual))
            .then(a.p.total_cmp(&b.p))
    });
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_single_point() {
        let cfg = SweepConfig {
            channels: vec![ChannelKind::BitFlip],
            n_list: vec![5],
            theta_list: vec![0.5],
            p_grid: vec![0.0],
            ..SweepConfig::fig2()
        };
        let rows = run_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].theta_bar - 0.5).abs() < 1e-10);
        assert!(rows[0].delta_theta < 1e-5);
        assert_eq!(rows[0].shots, 0);
    }

    #[test]
    fn high_noise_approaches_uniform_moments() {
        let cfg = SweepConfig {
            channels: vec![ChannelKind::Depolarizing],
            theta_list: vec![0.03125],
            p_grid: vec![0.9],
            ..SweepConfig::fig2()
        };
        let row = &run_sweep(&cfg).unwrap()[0];
        assert!((row.theta_bar - 0.484).abs() < 0.01, "{row:?}");
        assert!((row.delta_theta - 0.2885).abs() < 0.01, "{row:?}");
    }

    #[test]
    fn rows_are_canonically_ordered() {
        let cfg = SweepConfig {
            channels: vec![ChannelKind::Depolarizing, ChannelKind::BitFlip],
            n_list: vec![3, 2],
            theta_list: vec![0.5, 0.25],
            p_grid: vec![0.02, 0.0],
            ..SweepConfig::fig2()
        };
        let rows = run_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 16);
        assert_eq!(rows[0].channel, ChannelKind::BitFlip);
        assert_eq!((rows[0].n, rows[0].theta_actual, rows[0].p), (2, 0.25, 0.0));
        assert_eq!(rows[15].channel, ChannelKind::Depolarizing);
        assert_eq!(
            (rows[15].n, rows[15].theta_actual, rows[15].p),
            (3, 0.5, 0.02)
        );
    }

    #[test]
    fn default_grids() {
        let grid = SweepConfig::fig2().p_grid;
        assert_eq!(grid.len(), 26);
        assert_eq!((grid[0], grid[25]), (0.0, 0.05));
        assert!((grid[1] - 0.002).abs() < 1e-15);
        let window = SweepConfig::fit_window().p_grid;
        assert_eq!(window.len(), 21);
        assert_eq!(window[20], 0.01);
        assert_eq!(SweepConfig::fig2().num_points(), 4 * 3 * 26);
    }

    #[test]
    fn validation_rejects_empty_and_out_of_range() {
        let cfg = SweepConfig {
            p_grid: vec![],
            ..SweepConfig::fig2()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let cfg = SweepConfig {
            p_grid: vec![1.5],
            ..SweepConfig::fig2()
        };
        assert!(cfg.validate().is_err());
        let cfg = SweepConfig {
            theta_list: vec![1.0],
            ..SweepConfig::fig2()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn toml_config_with_range_grid() {
        let text = r#"
            channels = ["bitflip", "depolarizing"]
            n_list = [5]
            theta_list = [0.5]
            p_grid = { start = 0.0, stop = 0.05, points = 26 }
            mode = "sampled"
            shots = 1000
            seed = 11
        "#;
        let cfg = SweepConfig::from_toml_str(text).unwrap();
        assert_eq!(
            cfg.channels,
            vec![ChannelKind::BitFlip, ChannelKind::Depolarizing]
        );
        assert_eq!(cfg.p_grid, linspace(0.0, 0.05, 26));
        assert_eq!(cfg.mode, SimMode::Sampled);
        assert_eq!((cfg.shots, cfg.seed), (1000, 11));
        assert_eq!(cfg.two_qubit_noise, TwoQubitNoise::Both);
    }

    #[test]
    fn toml_round_trip() {
        let cfg = SweepConfig::fig2();
        assert_eq!(
            SweepConfig::from_toml_str(&cfg.to_toml_string()).unwrap(),
            cfg
        );
    }

    #[test]
    fn toml_errors_report_lines() {
        let text = "n_list = [5]\ntheta_list = [0.5]\np_grid = [0.0]\nbogus = 3\n";
        let err = SweepConfig::from_toml_str(text).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");

        let text = "n_list = [5]\ntheta_list = [0.5]\np_grid = []\n";
        assert!(matches!(
            SweepConfig::from_toml_str(text),
            Err(Error::Config(_))
        ));

        let text = "n_list = [5]\ntheta_list = [0.5]\np_grid = [0.0]\nchannels = [\"typo\"]\n";
        assert!(matches!(
            SweepConfig::from_toml_str(text),
            Err(Error::UnknownName {
                what: "channel",
                ..
            })
        ));
    }
}
