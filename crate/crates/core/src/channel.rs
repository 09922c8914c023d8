//! Clustered Saleh-Valenzuela channel generation, large-scale fading and the
//! beamspace transform of multiuser channels.

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::arrays::{circular_distance, ArrayGeometry, Direction, LensTransform, SpatialDirection};
use crate::error::{Error, Result};
use crate::linalg::{norm, CMatrix, C64};

/// Path loss in dB at `distance_m` with shadowing sample `shadow_db`:
/// `72 + 29.2·log10(d) + ϱ`.
pub fn path_loss_db(distance_m: f64, shadow_db: f64) -> Result<f64> {
    if !(distance_m > 0.0) {
        return Err(Error::Domain(format!("distance must be positive, got {distance_m}")));
    }
    Ok(72.0 + 29.2 * distance_m.log10() + shadow_db)
}

/// Linear channel gain `μ = 10^(-PL/10)`.
pub fn large_scale_fading(distance_m: f64, shadow_db: f64) -> Result<f64> {
    Ok(10f64.powf(-path_loss_db(distance_m, shadow_db)? / 10.0))
}

/// Log-normal shadowing model for the `ϱ` term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", content = "value", rename_all = "snake_case")]
pub enum Shadowing {
    Off,
    /// Gaussian in dB with the given variance (dB²).
    VarianceDb(f64),
    /// Gaussian in dB with the given standard deviation.
    StdDevDb(f64),
}

impl Default for Shadowing {
    fn default() -> Self {
        Shadowing::VarianceDb(8.7)
    }
}

impl Shadowing {
    pub fn std_dev_db(&self) -> f64 {
        match *self {
            Shadowing::Off => 0.0,
            Shadowing::VarianceDb(v) => v.sqrt(),
            Shadowing::StdDevDb(s) => s,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let s = self.std_dev_db();
        if s == 0.0 {
            0.0
        } else {
            Normal::new(0.0, s).expect("finite std dev").sample(rng)
        }
    }

    /// `E[10^(-ϱ/10)]`, the mean linear factor the shadowing multiplies into `μ`.
    pub fn mean_linear_factor(&self) -> f64 {
        let s = self.std_dev_db() * std::f64::consts::LN_10 / 10.0;
        (s * s / 2.0).exp()
    }

    fn validate(&self) -> Result<()> {
        let v = match *self {
            Shadowing::Off => 0.0,
            Shadowing::VarianceDb(v) | Shadowing::StdDevDb(v) => v,
        };
        if v.is_finite() && v >= 0.0 {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "shadowing parameter must be nonnegative, got {v}"
            )))
        }
    }
}

/// One scattering cluster: mean AoD, angular spread per dimension, path count.
///
/// `spread_el` is ignored for linear arrays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterSpec {
    pub mean: Direction,
    pub spread_az: f64,
    pub spread_el: f64,
    pub num_paths: usize,
}

impl ClusterSpec {
    pub fn linear(mean: f64, spread: f64, num_paths: usize) -> Result<Self> {
        let spec = Self {
            mean: Direction::Linear(SpatialDirection::new(mean)?),
            spread_az: spread,
            spread_el: 0.0,
            num_paths,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn planar(az: f64, el: f64, spread_az: f64, spread_el: f64, num_paths: usize) -> Result<Self> {
        let spec = Self {
            mean: Direction::Planar {
                az: SpatialDirection::new(az)?,
                el: SpatialDirection::new(el)?,
            },
            spread_az,
            spread_el,
            num_paths,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_paths == 0 {
            return Err(Error::Config("cluster needs at least one path".into()));
        }
        for s in [self.spread_az, self.spread_el] {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::Config(format!("angular spread {s} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserChannelParams {
    /// Linear large-scale gain.
    pub mu: f64,
    pub clusters: Vec<ClusterSpec>,
}

impl UserChannelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return Err(Error::Config(format!(
                "large-scale gain must be positive, got {}",
                self.mu
            )));
        }
        if self.clusters.is_empty() {
            return Err(Error::Config("user needs at least one cluster".into()));
        }
        self.clusters.iter().try_for_each(ClusterSpec::validate)
    }
}

fn uniform_around<R: Rng + ?Sized>(rng: &mut R, mean: f64, spread: f64) -> SpatialDirection {
    let u: f64 = rng.random();
    SpatialDirection::wrapped(mean + spread * (u - 0.5))
}

/// Draws `num_paths` AoDs uniformly within `mean ± spread/2` per dimension,
/// wrapped onto `[-1/2, 1/2)`.
pub fn sample_cluster_aods<R: Rng + ?Sized>(rng: &mut R, spec: &ClusterSpec) -> Vec<Direction> {
    (0..spec.num_paths)
        .map(|_| match spec.mean {
            Direction::Linear(m) => Direction::Linear(uniform_around(rng, m.value(), spec.spread_az)),
            Direction::Planar { az, el } => Direction::Planar {
                az: uniform_around(rng, az.value(), spec.spread_az),
                el: uniform_around(rng, el.value(), spec.spread_el),
            },
        })
        .collect()
}

/// Draws a standard circularly-symmetric complex Gaussian `CN(0, 1)`.
pub fn standard_complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Paths of one cluster realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterRealization {
    pub aods: Vec<Direction>,
    pub gains: Vec<C64>,
}

/// `h = Σ_l √(Nμ/(N_cl·N_p,l)) Σ_i β_i a(φ_i)` for explicit path gains and AoDs.
pub fn synthesize_user_channel(geometry: &ArrayGeometry, mu: f64, clusters: &[ClusterRealization]) -> Result<Vec<C64>> {
    let n = geometry.num_elements();
    let mut h = vec![C64::new(0.0, 0.0); n];
    let n_cl = clusters.len() as f64;
    for cl in clusters {
        if cl.aods.len() != cl.gains.len() {
            return Err(Error::Dimension("one gain per path required".into()));
        }
        let scale = (n as f64 * mu / (n_cl * cl.aods.len() as f64)).sqrt();
        for (&dir, &beta) in cl.aods.iter().zip(&cl.gains) {
            geometry.accumulate_steering(dir, beta * scale, &mut h)?;
        }
    }
    Ok(h)
}

/// Spatial channel of one user with `CN(0,1)` path gains.
pub fn sample_user_channel<R: Rng + ?Sized>(
    rng: &mut R,
    params: &UserChannelParams,
    geometry: &ArrayGeometry,
) -> Result<Vec<C64>> {
    params.validate()?;
    let clusters: Vec<_> = params
        .clusters
        .iter()
        .map(|spec| {
            let aods = sample_cluster_aods(rng, spec);
            let gains = (0..spec.num_paths).map(|_| standard_complex_normal(rng)).collect();
            ClusterRealization { aods, gains }
        })
        .collect();
    synthesize_user_channel(geometry, params.mu, &clusters)
}

/// Multiuser channel in both the spatial and beamspace domains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiuserChannel {
    pub geometry: ArrayGeometry,
    pub params: Vec<UserChannelParams>,
    /// `N×K` spatial channel `H`.
    pub spatial: CMatrix,
    /// `N×K` beamspace channel `U·H`.
    pub beamspace: CMatrix,
}

impl MultiuserChannel {
    pub fn users(&self) -> usize {
        self.beamspace.cols()
    }

    /// Builds the beamspace form of explicitly given spatial columns.
    pub fn from_spatial(lens: &LensTransform, params: Vec<UserChannelParams>, columns: &[Vec<C64>]) -> Result<Self> {
        let geometry = lens.geometry();
        if columns.iter().any(|c| c.len() != geometry.num_elements()) {
            return Err(Error::Dimension("channel length differs from array size".into()));
        }
        let spatial = CMatrix::from_columns(columns);
        let beamspace = lens.apply_matrix(&spatial);
        Ok(Self {
            geometry,
            params,
            spatial,
            beamspace,
        })
    }

    /// Largest per-column gap `|‖Hb[:,k]‖ - ‖H[:,k]‖|`.
    pub fn parseval_error(&self) -> f64 {
        self.spatial
            .columns()
            .zip(self.beamspace.columns())
            .map(|(h, hb)| (norm(h) - norm(hb)).abs())
            .fold(0.0, f64::max)
    }
}

/// Everything needed to draw one multiuser realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub geometry: ArrayGeometry,
    pub users: usize,
    pub clusters_per_user: usize,
    pub paths_per_cluster: usize,
    /// Angular spread in direction units (azimuth; the only one for ULA).
    pub spread_az: f64,
    pub spread_el: f64,
    pub distance_m: f64,
    pub shadowing: Shadowing,
    /// Minimum circular azimuth separation between cluster means. Defaults to
    /// `4 / N` (ULA) or `4 / N1` (UPA).
    pub min_separation: Option<f64>,
    /// Fraction of the available slack used for per-cluster jitter, in `[0, 1]`.
    pub jitter: f64,
    /// Snap each cluster's lower angular edge onto the beam grid.
    pub grid_aligned: bool,
}

impl ScenarioConfig {
    /// Defaults for the given geometry: ±5/N spread for ULA, ±1/N1 × ±1/N2 for
    /// UPA (capped at the full direction range), 10 m, single cluster.
    pub fn new(geometry: ArrayGeometry, users: usize, paths_per_cluster: usize) -> Self {
        let (n1, n2) = geometry.dims();
        let (spread_az, spread_el) = if geometry.is_planar() {
            (2.0 / n1 as f64, 2.0 / n2 as f64)
        } else {
            (10.0 / n1 as f64, 0.0)
        };
        let (spread_az, spread_el) = (spread_az.min(1.0), spread_el.min(1.0));
        Self {
            geometry,
            users,
            clusters_per_user: 1,
            paths_per_cluster,
            spread_az,
            spread_el,
            distance_m: 10.0,
            shadowing: Shadowing::default(),
            min_separation: None,
            jitter: 0.5,
            grid_aligned: false,
        }
    }

    pub fn min_separation(&self) -> f64 {
        self.min_separation.unwrap_or(4.0 / self.geometry.dims().0 as f64)
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        if self.users == 0 {
            return Err(Error::Config("at least one user required".into()));
        }
        if self.clusters_per_user == 0 || self.paths_per_cluster == 0 {
            return Err(Error::Config("clusters and paths per cluster must be positive".into()));
        }
        if !(self.distance_m > 0.0) {
            return Err(Error::Config(format!(
                "distance must be positive, got {}",
                self.distance_m
            )));
        }
        if !(0.0..=1.0).contains(&self.jitter) {
            return Err(Error::Config(format!("jitter {} outside [0, 1]", self.jitter)));
        }
        for s in [self.spread_az, self.spread_el] {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::Config(format!("angular spread {s} outside [0, 1]")));
            }
        }
        self.shadowing.validate()?;
        let slots = (self.users * self.clusters_per_user) as f64;
        let sep = self.min_separation();
        if !(sep >= 0.0) || (slots > 1.0 && sep * slots > 1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "cannot place {slots} clusters with separation {sep}: needs slots × separation ≤ 1"
            )));
        }
        Ok(())
    }
}

/// Draws the cluster means: an evenly spaced azimuth grid with a common random
/// offset plus bounded jitter. Elevations (UPA) are uniform.
fn place_clusters<R: Rng + ?Sized>(rng: &mut R, cfg: &ScenarioConfig) -> Vec<Vec<ClusterSpec>> {
    let slots = cfg.users * cfg.clusters_per_user;
    let spacing = 1.0 / slots as f64;
    let (n1, n2) = cfg.geometry.dims();
    let max_jitter = if slots > 1 {
        cfg.jitter * (spacing - cfg.min_separation()).max(0.0) / 2.0
    } else {
        0.0
    };
    let offset: f64 = rng.random();
    let snap = |center: f64, spread: f64, m: usize| -> f64 {
        if !cfg.grid_aligned {
            return center;
        }
        // lower edge onto the nearest grid point (i - (m-1)/2)/m
        let c = (m as f64 - 1.0) / 2.0;
        let lower = center - spread / 2.0;
        let i = (lower * m as f64 + c).round();
        (i - c) / m as f64 + spread / 2.0
    };
    let mut users = vec![Vec::with_capacity(cfg.clusters_per_user); cfg.users];
    for slot in 0..slots {
        let jitter = if max_jitter > 0.0 {
            rng.random_range(-max_jitter..=max_jitter)
        } else {
            0.0
        };
        let az = snap(offset + slot as f64 * spacing + jitter, cfg.spread_az, n1);
        let mean = if cfg.geometry.is_planar() {
            let el = snap(rng.random::<f64>() - 0.5, cfg.spread_el, n2);
            Direction::Planar {
                az: SpatialDirection::wrapped(az),
                el: SpatialDirection::wrapped(el),
            }
        } else {
            Direction::Linear(SpatialDirection::wrapped(az))
        };
        users[slot % cfg.users].push(ClusterSpec {
            mean,
            spread_az: cfg.spread_az,
            spread_el: if cfg.geometry.is_planar() { cfg.spread_el } else { 0.0 },
            num_paths: cfg.paths_per_cluster,
        });
    }
    users
}

/// Reusable generator holding the lens transform for one geometry.
#[derive(Debug, Clone)]
pub struct ScenarioGenerator {
    config: ScenarioConfig,
    lens: LensTransform,
}

impl ScenarioGenerator {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let lens = LensTransform::new(config.geometry);
        Ok(Self { config, lens })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn lens(&self) -> &LensTransform {
        &self.lens
    }

    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<MultiuserChannel> {
        let cfg = &self.config;
        let placements = place_clusters(rng, cfg);
        let mut params = Vec::with_capacity(cfg.users);
        let mut columns = Vec::with_capacity(cfg.users);
        for clusters in placements {
            let shadow = cfg.shadowing.sample(rng);
            let p = UserChannelParams {
                mu: large_scale_fading(cfg.distance_m, shadow)?,
                clusters,
            };
            columns.push(sample_user_channel(rng, &p, &cfg.geometry)?);
            params.push(p);
        }
        MultiuserChannel::from_spatial(&self.lens, params, &columns)
    }
}

/// One-shot form of [`ScenarioGenerator::generate`].
pub fn generate_scenario<R: Rng + ?Sized>(rng: &mut R, config: &ScenarioConfig) -> Result<MultiuserChannel> {
    ScenarioGenerator::new(config.clone())?.generate(rng)
}

/// Smallest circular azimuth distance between cluster means of different users.
pub fn min_user_separation(channel: &MultiuserChannel) -> Option<f64> {
    let means: Vec<(usize, f64)> = channel
        .params
        .iter()
        .enumerate()
        .flat_map(|(k, p)| p.clusters.iter().map(move |c| (k, c.mean.azimuth().value())))
        .collect();
    let mut best: Option<f64> = None;
    for (i, &(ki, a)) in means.iter().enumerate() {
        for &(kj, b) in &means[i + 1..] {
            if ki != kj {
                let d = circular_distance(a, b);
                best = Some(best.map_or(d, |x| x.min(d)));
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm_sqr;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn rng(seed: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(seed)
    }

    #[test]
    fn path_loss_examples() {
        assert!((path_loss_db(10.0, 0.0).unwrap() - 101.2).abs() < 1e-12);
        assert!((path_loss_db(1.0, 0.0).unwrap() - 72.0).abs() < 1e-12);
        assert!((path_loss_db(10.0, 8.7).unwrap() - 109.9).abs() < 1e-12);
        let mu = large_scale_fading(10.0, 0.0).unwrap();
        assert!((mu / 10f64.powf(-10.12) - 1.0).abs() < 1e-12);
        assert!(matches!(large_scale_fading(0.0, 0.0), Err(Error::Domain(_))));
        assert!(large_scale_fading(-3.0, 0.0).is_err());
    }

    #[test]
    fn shadowing_default_is_variance() {
        let s = Shadowing::default();
        assert!((s.std_dev_db() - 8.7f64.sqrt()).abs() < 1e-15);
        assert_eq!(Shadowing::StdDevDb(8.7).std_dev_db(), 8.7);
        assert_eq!(Shadowing::Off.mean_linear_factor(), 1.0);
    }

    #[test]
    fn shadowing_mean_factor_matches_monte_carlo() {
        let s = Shadowing::default();
        let mut r = rng(3);
        let n = 200_000;
        let m: f64 = (0..n).map(|_| 10f64.powf(-s.sample(&mut r) / 10.0)).sum::<f64>() / n as f64;
        assert!((m / s.mean_linear_factor() - 1.0).abs() < 0.02, "{m}");
    }

    #[test]
    fn zero_spread_returns_mean() {
        let spec = ClusterSpec::linear(0.123, 0.0, 17).unwrap();
        for d in sample_cluster_aods(&mut rng(1), &spec) {
            assert_eq!(d, spec.mean);
        }
    }

    #[test]
    fn uniform_aods_stay_in_window() {
        let n = 256.0;
        let mean = 0.1;
        let spec = ClusterSpec::linear(mean, 10.0 / n, 100_000).unwrap();
        let draws: Vec<f64> = sample_cluster_aods(&mut rng(2), &spec)
            .iter()
            .map(|d| d.azimuth().value())
            .collect();
        let lo = draws.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = draws.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(lo >= mean - 5.0 / n - 1e-15 && hi <= mean + 5.0 / n + 1e-15);
        let m = draws.iter().sum::<f64>() / draws.len() as f64;
        // σ of the uniform mean: width / √(12 n)
        let sigma = (10.0 / n) / (12.0 * draws.len() as f64).sqrt();
        assert!((m - mean).abs() < 3.0 * sigma);
    }

    #[test]
    fn aods_wrap_near_the_edge() {
        let spec = ClusterSpec::linear(0.499, 0.02, 10_000).unwrap();
        let draws = sample_cluster_aods(&mut rng(5), &spec);
        assert!(draws.iter().all(|d| (-0.5..0.5).contains(&d.azimuth().value())));
        assert!(draws.iter().any(|d| d.azimuth().value() < 0.0));
    }

    #[test]
    fn single_unit_path_has_expected_norm() {
        let g = ArrayGeometry::ula(64).unwrap();
        let mu = 3e-4;
        let h = synthesize_user_channel(
            &g,
            mu,
            &[ClusterRealization {
                aods: vec![g.grid_direction(10)],
                gains: vec![C64::new(1.0, 0.0)],
            }],
        )
        .unwrap();
        assert!((norm(&h) - (64.0 * mu).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn energy_normalization_in_expectation() {
        let g = ArrayGeometry::ula(64).unwrap();
        let mu = 2.0;
        for (n_cl, n_p) in [(1usize, 100usize), (3, 7)] {
            let params = UserChannelParams {
                mu,
                clusters: (0..n_cl)
                    .map(|l| ClusterSpec::linear(-0.3 + 0.25 * l as f64, 10.0 / 64.0, n_p).unwrap())
                    .collect(),
            };
            let mut r = rng(7);
            let trials = 10_000;
            let e: f64 = (0..trials)
                .map(|_| norm_sqr(&sample_user_channel(&mut r, &params, &g).unwrap()))
                .sum::<f64>()
                / trials as f64;
            assert!((e / (64.0 * mu) - 1.0).abs() < 0.02, "N_cl={n_cl}: {e}");
        }
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let g = ArrayGeometry::upa(8, 4).unwrap();
        let params = UserChannelParams {
            mu: 1.0,
            clusters: vec![ClusterSpec::planar(0.1, -0.2, 0.25, 0.5, 10).unwrap()],
        };
        let a = sample_user_channel(&mut rng(11), &params, &g).unwrap();
        let b = sample_user_channel(&mut rng(11), &params, &g).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn separation_holds_for_eight_users() {
        let mut cfg = ScenarioConfig::new(ArrayGeometry::ula(512).unwrap(), 8, 10);
        cfg.jitter = 1.0;
        let gen = ScenarioGenerator::new(cfg).unwrap();
        let mut r = rng(13);
        for _ in 0..200 {
            let ch = gen.generate(&mut r).unwrap();
            assert!(min_user_separation(&ch).unwrap() >= 4.0 / 512.0 - 1e-12);
            assert!(ch.parseval_error() < 1e-9);
        }
    }

    #[test]
    fn single_user_has_no_separation_constraint() {
        let mut cfg = ScenarioConfig::new(ArrayGeometry::ula(16).unwrap(), 1, 3);
        cfg.min_separation = Some(2.0);
        let ch = generate_scenario(&mut rng(1), &cfg).unwrap();
        assert_eq!(ch.users(), 1);
        assert!(min_user_separation(&ch).is_none());
    }

    #[test]
    fn infeasible_separation_is_rejected() {
        let mut cfg = ScenarioConfig::new(ArrayGeometry::ula(64).unwrap(), 16, 3);
        assert!(cfg.validate().is_ok());
        cfg.users = 17; // 17 × 4/64 > 1
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn los_beamspace_is_concentrated() {
        let n = 256usize;
        let mut cfg = ScenarioConfig::new(ArrayGeometry::ula(n).unwrap(), 4, 1);
        cfg.spread_az = 0.0;
        let top = (n as f64).log2().ceil() as usize;
        let mut r = rng(17);
        for _ in 0..50 {
            let ch = generate_scenario(&mut r, &cfg).unwrap();
            for col in ch.beamspace.columns() {
                let mut p: Vec<f64> = col.iter().map(|z| z.norm_sqr()).collect();
                p.sort_by(|a, b| b.total_cmp(a));
                let frac = p[..top].iter().sum::<f64>() / p.iter().sum::<f64>();
                assert!(frac >= 0.9, "{frac}");
            }
        }
    }

    #[test]
    fn grid_aligned_clusters_start_on_grid() {
        let n = 512;
        let mut cfg = ScenarioConfig::new(ArrayGeometry::ula(n).unwrap(), 8, 5);
        cfg.grid_aligned = true;
        let ch = generate_scenario(&mut rng(19), &cfg).unwrap();
        for p in &ch.params {
            let lower = p.clusters[0].mean.azimuth().value() - cfg.spread_az / 2.0;
            let idx = lower * n as f64 + (n as f64 - 1.0) / 2.0;
            let idx = idx.rem_euclid(n as f64);
            assert!((idx - idx.round()).abs() < 1e-6, "{idx}");
        }
        assert!(min_user_separation(&ch).unwrap() >= 4.0 / n as f64 - 1e-12);
    }
}
