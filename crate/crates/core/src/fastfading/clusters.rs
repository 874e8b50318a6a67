//! Cluster delays and powers, rays, coupling, XPR and phases.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::angles::{
    folded, generate_azimuth_angles, generate_zenith_angles, wrapped, AngleSpec, RAY_OFFSETS,
};
use super::lsp::{LargeScaleParams, LspTable};
use crate::geometry::LinkGeometry;
use crate::rng::Stage;
use crate::{fold_zenith, wrap_degrees, Error, Result};

/// One ray (sub-path) of a cluster. Angles in degrees, XPR linear, phases
/// in radians ordered θθ, θφ, φθ, φφ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ray {
    pub aod: f64,
    pub aoa: f64,
    pub zod: f64,
    pub zoa: f64,
    pub xpr: f64,
    pub phases: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cluster {
    /// seconds
    pub delay: f64,
    /// Scattered power; the powers of a set sum to one.
    pub power: f64,
    pub aod: f64,
    pub aoa: f64,
    pub zod: f64,
    pub zoa: f64,
    pub rays: Vec<Ray>,
}

/// Direct ray of a LOS link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LosRay {
    /// Rician K factor, linear.
    pub k_factor: f64,
    pub aod: f64,
    pub aoa: f64,
    pub zod: f64,
    pub zoa: f64,
    /// 3D path length, meters.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterSet {
    pub clusters: Vec<Cluster>,
    pub los: Option<LosRay>,
}

impl ClusterSet {
    /// Power carried by each cluster once the direct ray is folded into the
    /// first one. Sums to one.
    pub fn effective_powers(&self) -> Vec<f64> {
        let k = self.los.map_or(0.0, |l| l.k_factor);
        self.clusters
            .iter()
            .enumerate()
            .map(|(n, c)| c.power / (k + 1.0) + if n == 0 { k / (k + 1.0) } else { 0.0 })
            .collect()
    }

    pub fn ray_count(&self) -> usize {
        self.clusters
            .iter()
            .map(|c| c.rays.len())
            .max()
            .unwrap_or(0)
    }
}

/// Exponential delays `−r_τ·DS·ln(U)`, shifted so the first is zero and
/// sorted ascending.
pub fn generate_delays<R: Rng + ?Sized>(
    rng: &mut R,
    clusters: usize,
    ds: f64,
    delay_scaling: f64,
) -> Result<Vec<f64>> {
    if !(ds > 0.0) {
        return Err(Error::range("delay spread", ds, 0.0, f64::INFINITY));
    }
    if !(delay_scaling > 1.0) {
        return Err(Error::range(
            "delay scaling",
            delay_scaling,
            1.0,
            f64::INFINITY,
        ));
    }
    let mut d: Vec<f64> = (0..clusters)
        .map(|_| -delay_scaling * ds * (1.0 - rng.random::<f64>()).ln())
        .collect();
    let min = d.iter().cloned().fold(f64::INFINITY, f64::min);
    for x in &mut d {
        *x -= min;
    }
    d.sort_by(|a, b| a.partial_cmp(b).expect("finite delays"));
    Ok(d)
}

/// Scaling applied to LOS cluster delays to compensate for the extra
/// direct-ray power at zero delay.
pub fn los_delay_scaling(k_db: f64) -> f64 {
    0.7705 - 0.0433 * k_db + 0.0002 * k_db.powi(2) + 0.000017 * k_db.powi(3)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterPowers {
    /// Normalized powers of the scattered clusters.
    pub scattered: Vec<f64>,
    /// With the direct ray added to the first cluster (LOS), normalized.
    /// Equals `scattered` for NLOS.
    pub total: Vec<f64>,
}

pub fn generate_powers<R: Rng + ?Sized>(
    rng: &mut R,
    delays: &[f64],
    ds: f64,
    delay_scaling: f64,
    cluster_shadow_db: f64,
    k_db: Option<f64>,
) -> Result<ClusterPowers> {
    if delays.is_empty() {
        return Err(Error::EmptyInput("cluster delays"));
    }
    if delays.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Invariant("cluster delays must be sorted".into()));
    }
    let raw: Vec<f64> = delays
        .iter()
        .map(|tau| {
            let z: f64 = StandardNormal.sample(rng);
            (-tau * (delay_scaling - 1.0) / (delay_scaling * ds)).exp()
                * 10f64.powf(-cluster_shadow_db * z / 10.0)
        })
        .collect();
    let sum: f64 = raw.iter().sum();
    let scattered: Vec<f64> = raw.iter().map(|p| p / sum).collect();
    let total = match k_db {
        None => scattered.clone(),
        Some(k) => {
            let k = 10f64.powf(k / 10.0);
            if k.is_infinite() {
                let mut t = vec![0.0; scattered.len()];
                t[0] = 1.0;
                t
            } else {
                scattered
                    .iter()
                    .enumerate()
                    .map(|(n, p)| p / (k + 1.0) + if n == 0 { k / (k + 1.0) } else { 0.0 })
                    .collect()
            }
        }
    };
    Ok(ClusterPowers { scattered, total })
}

/// Independently permutes the AOA, ZOA and ZOD rays of every cluster
/// against the fixed AOD order.
pub fn couple_subpaths<R: Rng + ?Sized>(rng: &mut R, set: &mut ClusterSet) {
    for cluster in &mut set.clusters {
        let m = cluster.rays.len();
        let mut aoa: Vec<f64> = cluster.rays.iter().map(|r| r.aoa).collect();
        let mut zoa: Vec<f64> = cluster.rays.iter().map(|r| r.zoa).collect();
        let mut zod: Vec<f64> = cluster.rays.iter().map(|r| r.zod).collect();
        if m > 1 {
            aoa.shuffle(rng);
            zoa.shuffle(rng);
            zod.shuffle(rng);
        }
        for (i, ray) in cluster.rays.iter_mut().enumerate() {
            ray.aoa = aoa[i];
            ray.zoa = zoa[i];
            ray.zod = zod[i];
        }
    }
}

/// Lognormal cross-polarization power ratio, linear.
pub fn draw_xpr<R: Rng + ?Sized>(rng: &mut R, mu_db: f64, sigma_db: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    10f64.powf((mu_db + sigma_db * z) / 10.0)
}

/// Four independent phases uniform on `(−π, π]`.
pub fn draw_phases<R: Rng + ?Sized>(rng: &mut R) -> [f64; 4] {
    std::array::from_fn(|_| std::f64::consts::PI - std::f64::consts::TAU * rng.random::<f64>())
}

#[derive(Debug, Clone, Copy)]
pub struct ClusterInputs<'a> {
    pub link: &'a LinkGeometry,
    pub lsp: &'a LargeScaleParams,
    pub table: &'a LspTable,
    /// Outdoor LOS: adds the direct ray and pins the first cluster.
    pub los: bool,
    /// Indoor arrival zenith is centred on the horizon.
    pub indoor: bool,
    pub zod_offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterOptions {
    /// Random signs and Gaussian perturbations of cluster angles.
    pub jitter: bool,
    /// Split the two strongest clusters into three delay sub-clusters.
    pub subclusters: bool,
    /// seconds between sub-clusters
    pub subcluster_spacing: f64,
    /// Clusters this far (dB) below the strongest are dropped.
    pub weak_cluster_db: f64,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        Self {
            jitter: true,
            subclusters: true,
            subcluster_spacing: 5e-9,
            weak_cluster_db: -25.0,
        }
    }
}

/// 1-based ray indices of the three delay sub-clusters and their power
/// share (10, 6 and 4 of 20 rays).
const SUBCLUSTER_RAYS: [&[usize]; 3] = [
    &[1, 2, 3, 4, 5, 6, 7, 8, 19, 20],
    &[9, 10, 11, 12, 17, 18],
    &[13, 14, 15, 16],
];

/// Delays, powers, angles, coupling, XPR and phases for one link. `stream`
/// hands out the generator for each stage.
pub fn generate_cluster_set<R, F>(
    mut stream: F,
    inputs: &ClusterInputs<'_>,
    options: &ClusterOptions,
) -> Result<ClusterSet>
where
    R: Rng,
    F: FnMut(Stage) -> R,
{
    let t = inputs.table;
    let lsp = inputs.lsp;
    let link = inputs.link;
    let k_db = if inputs.los {
        Some(lsp.k_db.ok_or_else(|| {
            Error::Config("LOS link generated from an LSP table without a K factor".into())
        })?)
    } else {
        None
    };

    let delays = generate_delays(
        &mut stream(Stage::Delays),
        t.clusters,
        lsp.ds,
        t.delay_scaling,
    )?;
    let powers = generate_powers(
        &mut stream(Stage::Powers),
        &delays,
        lsp.ds,
        t.delay_scaling,
        t.cluster_shadow_db,
        k_db,
    )?;

    let max = powers.total.iter().cloned().fold(0.0, f64::max);
    let threshold = max * 10f64.powf(options.weak_cluster_db / 10.0);
    let keep: Vec<usize> = (0..delays.len())
        .filter(|&n| n == 0 || powers.total[n] >= threshold)
        .collect();
    let los_scale = k_db.map_or(1.0, los_delay_scaling);
    let delays: Vec<f64> = keep.iter().map(|&n| delays[n] / los_scale).collect();
    let total: Vec<f64> = keep.iter().map(|&n| powers.total[n]).collect();
    let kept_sum: f64 = keep.iter().map(|&n| powers.scattered[n]).sum();
    let scattered: Vec<f64> = keep
        .iter()
        .map(|&n| powers.scattered[n] / kept_sum)
        .collect();

    let spec = |spread: f64, center: f64, offset: f64| AngleSpec {
        spread,
        center,
        offset,
        los_k_db: k_db,
        scaling_clusters: t.clusters,
        jitter: options.jitter,
    };
    let mut az = stream(Stage::Azimuth);
    let aoa = generate_azimuth_angles(&mut az, &spec(lsp.asa, link.los_aoa, 0.0), &total)?;
    let aod = generate_azimuth_angles(&mut az, &spec(lsp.asd, link.los_aod, 0.0), &total)?;
    let mut ze = stream(Stage::Zenith);
    let zoa_center = if inputs.indoor { 90.0 } else { link.los_zoa };
    let zoa = generate_zenith_angles(&mut ze, &spec(lsp.zsa, zoa_center, 0.0), &total)?;
    let zod = generate_zenith_angles(
        &mut ze,
        &spec(lsp.zsd, link.los_zod, inputs.zod_offset),
        &total,
    )?;

    let offsets: &[f64] = if t.rays == 1 { &[0.0] } else { &RAY_OFFSETS };
    let zod_ray_spread = 0.375 * 10f64.powf(lsp.zsd_mu);
    let (aoa_c, aod_c) = (wrapped(&aoa), wrapped(&aod));
    let (zoa_c, zod_c) = (folded(&zoa), folded(&zod));
    let mut xpr_rng = stream(Stage::Xpr);
    let mut phase_rng = stream(Stage::Phases);
    let clusters: Vec<Cluster> = (0..delays.len())
        .map(|n| Cluster {
            delay: delays[n],
            power: scattered[n],
            aod: aod_c[n],
            aoa: aoa_c[n],
            zod: zod_c[n],
            zoa: zoa_c[n],
            rays: offsets
                .iter()
                .map(|alpha| Ray {
                    aod: wrap_degrees(aod[n] + t.cluster_asd * alpha),
                    aoa: wrap_degrees(aoa[n] + t.cluster_asa * alpha),
                    zod: fold_zenith(zod[n] + zod_ray_spread * alpha),
                    zoa: fold_zenith(zoa[n] + t.cluster_zsa * alpha),
                    xpr: 0.0,
                    phases: [0.0; 4],
                })
                .collect(),
        })
        .collect();

    let mut set = ClusterSet {
        clusters,
        los: k_db.map(|k| LosRay {
            k_factor: 10f64.powf(k / 10.0),
            aod: link.los_aod,
            aoa: link.los_aoa,
            zod: link.los_zod,
            zoa: link.los_zoa,
            distance: link.d_3d,
        }),
    };
    couple_subpaths(&mut stream(Stage::Coupling), &mut set);
    for ray in set.clusters.iter_mut().flat_map(|c| c.rays.iter_mut()) {
        ray.xpr = draw_xpr(&mut xpr_rng, t.xpr.mu, t.xpr.sigma);
        ray.phases = draw_phases(&mut phase_rng);
    }
    if options.subclusters && t.rays == RAY_OFFSETS.len() {
        split_strongest(&mut set, options.subcluster_spacing);
    }
    Ok(set)
}

fn split_strongest(set: &mut ClusterSet, spacing: f64) {
    let mut order: Vec<usize> = (0..set.clusters.len()).collect();
    order.sort_by(|&a, &b| {
        set.clusters[b]
            .power
            .partial_cmp(&set.clusters[a].power)
            .expect("finite powers")
            .then(a.cmp(&b))
    });
    let strongest: Vec<usize> = order.into_iter().take(2).collect();
    let total_rays = RAY_OFFSETS.len() as f64;
    let mut out = Vec::with_capacity(set.clusters.len() + 4);
    for (n, cluster) in set.clusters.drain(..).enumerate() {
        if !strongest.contains(&n) {
            out.push(cluster);
            continue;
        }
        for (i, members) in SUBCLUSTER_RAYS.iter().enumerate() {
            out.push(Cluster {
                delay: cluster.delay + spacing * i as f64,
                power: cluster.power * members.len() as f64 / total_rays,
                rays: members.iter().map(|m| cluster.rays[m - 1]).collect(),
                ..cluster.clone()
            });
        }
    }
    out.sort_by(|a, b| a.delay.partial_cmp(&b.delay).expect("finite delays"));
    set.clusters = out;
}
