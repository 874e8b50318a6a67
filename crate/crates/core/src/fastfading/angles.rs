//! Cluster angle generation.
//!
//! Zenith angles use the inverse of a Laplacian power angular spectrum:
//! `θ'_n = −spread·ln(P_n / max P) / C_θ`. Azimuths use the inverse-Gaussian
//! map `φ'_n = 2(spread/1.4)·sqrt(−ln(P_n / max P)) / C_φ`. Each mapped angle
//! gets a random sign and a Gaussian perturbation of standard deviation
//! `spread/7`; disabling jitter leaves the bare quantile map.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::{fold_zenith, wrap_degrees, Error, Result};

/// Ray offsets within a cluster for unit cluster spread, degrees.
pub const RAY_OFFSETS: [f64; 20] = [
    0.0447, -0.0447, 0.1413, -0.1413, 0.2492, -0.2492, 0.3715, -0.3715, 0.5129, -0.5129, 0.6797,
    -0.6797, 0.8844, -0.8844, 1.1481, -1.1481, 1.5195, -1.5195, 2.1551, -2.1551,
];

/// NLOS azimuth scaling factor C_φ by cluster count.
const AZIMUTH_SCALING: [(usize, f64); 11] = [
    (4, 0.779),
    (5, 0.860),
    (8, 1.018),
    (10, 1.090),
    (11, 1.123),
    (12, 1.146),
    (14, 1.190),
    (15, 1.211),
    (16, 1.226),
    (19, 1.273),
    (20, 1.289),
];

/// NLOS zenith scaling factor C_θ by cluster count.
const ZENITH_SCALING: [(usize, f64); 7] = [
    (8, 0.889),
    (10, 0.957),
    (11, 1.031),
    (12, 1.104),
    (15, 1.1088),
    (19, 1.184),
    (20, 1.178),
];

fn lookup(table: &[(usize, f64)], n: usize, what: &str) -> Result<f64> {
    table
        .iter()
        .find(|(k, _)| *k == n)
        .map(|(_, c)| *c)
        .ok_or_else(|| {
            Error::Config(format!(
                "no {what} scaling factor for {n} clusters (supported: {:?})",
                table.iter().map(|(k, _)| *k).collect::<Vec<_>>()
            ))
        })
}

pub fn nlos_azimuth_scaling(clusters: usize) -> Result<f64> {
    lookup(&AZIMUTH_SCALING, clusters, "azimuth")
}

pub fn nlos_zenith_scaling(clusters: usize) -> Result<f64> {
    lookup(&ZENITH_SCALING, clusters, "zenith")
}

/// K-factor (dB) correction of C_φ for LOS links.
pub fn los_azimuth_scaling(k_db: f64) -> f64 {
    1.1035 - 0.028 * k_db - 0.002 * k_db.powi(2) + 0.0001 * k_db.powi(3)
}

/// K-factor (dB) correction of C_θ for LOS links.
pub fn los_zenith_scaling(k_db: f64) -> f64 {
    1.3086 + 0.0339 * k_db - 0.0077 * k_db.powi(2) + 0.0002 * k_db.powi(3)
}

/// Parameters for one angle dimension of one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleSpec {
    /// Angular spread, degrees.
    pub spread: f64,
    /// LOS angle, or 90° for indoor arrival zenith.
    pub center: f64,
    /// Added to the centre of NLOS links (ZOD offset); ignored in LOS.
    pub offset: f64,
    /// K factor in dB for LOS links. The first cluster is then pinned to
    /// `center`.
    pub los_k_db: Option<f64>,
    /// Cluster count selecting the scaling constant.
    pub scaling_clusters: usize,
    /// Random sign and Gaussian perturbation per cluster.
    pub jitter: bool,
}

fn place<R: Rng + ?Sized>(rng: &mut R, spec: &AngleSpec, mapped: &[f64]) -> Vec<f64> {
    let normal = Normal::new(0.0, spec.spread / 7.0).expect("finite spread");
    let raw: Vec<f64> = mapped
        .iter()
        .map(|&a| {
            if spec.jitter {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                sign * a + normal.sample(rng)
            } else {
                a
            }
        })
        .collect();
    match spec.los_k_db {
        Some(_) => {
            let first = raw[0];
            raw.iter().map(|a| a - first + spec.center).collect()
        }
        None => raw.iter().map(|a| a + spec.center + spec.offset).collect(),
    }
}

fn check(spec: &AngleSpec, powers: &[f64]) -> Result<f64> {
    if powers.is_empty() {
        return Err(Error::EmptyInput("cluster powers"));
    }
    if !(spec.spread >= 0.0 && spec.spread.is_finite()) {
        return Err(Error::range(
            "angular spread",
            spec.spread,
            0.0,
            f64::INFINITY,
        ));
    }
    let max = powers.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return Err(Error::Invariant(
            "cluster powers must have a positive maximum".into(),
        ));
    }
    Ok(max)
}

/// Cluster central zenith angles (unfolded). Callers fold into `[0°, 180°]`
/// after adding ray offsets; [`fold_zenith`] does the folding.
pub fn generate_zenith_angles<R: Rng + ?Sized>(
    rng: &mut R,
    spec: &AngleSpec,
    powers: &[f64],
) -> Result<Vec<f64>> {
    let max = check(spec, powers)?;
    let mut c = nlos_zenith_scaling(spec.scaling_clusters)?;
    if let Some(k) = spec.los_k_db {
        c *= los_zenith_scaling(k);
    }
    let mapped: Vec<f64> = powers
        .iter()
        .map(|p| -spec.spread * (p / max).ln() / c)
        .collect();
    Ok(place(rng, spec, &mapped))
}

/// Cluster central azimuths (unwrapped).
pub fn generate_azimuth_angles<R: Rng + ?Sized>(
    rng: &mut R,
    spec: &AngleSpec,
    powers: &[f64],
) -> Result<Vec<f64>> {
    let max = check(spec, powers)?;
    let mut c = nlos_azimuth_scaling(spec.scaling_clusters)?;
    if let Some(k) = spec.los_k_db {
        c *= los_azimuth_scaling(k);
    }
    let mapped: Vec<f64> = powers
        .iter()
        .map(|p| 2.0 * (spec.spread / 1.4) * (-(p / max).ln()).max(0.0).sqrt() / c)
        .collect();
    Ok(place(rng, spec, &mapped))
}

pub(crate) fn folded(angles: &[f64]) -> Vec<f64> {
    angles.iter().map(|a| fold_zenith(*a)).collect()
}

pub(crate) fn wrapped(angles: &[f64]) -> Vec<f64> {
    angles.iter().map(|a| wrap_degrees(*a)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn powers() -> Vec<f64> {
        let raw = [
            0.3, 0.2, 0.15, 0.1, 0.08, 0.06, 0.04, 0.03, 0.02, 0.01, 0.007, 0.003,
        ];
        let s: f64 = raw.iter().sum();
        raw.iter().map(|p| p / s).collect()
    }

    fn spec(jitter: bool) -> AngleSpec {
        AngleSpec {
            spread: 10.0,
            center: 100.0,
            offset: -3.0,
            los_k_db: None,
            scaling_clusters: 12,
            jitter,
        }
    }

    #[test]
    fn ray_offsets_symmetric() {
        let s: f64 = RAY_OFFSETS.iter().sum();
        assert!(s.abs() < 1e-12);
    }

    #[test]
    fn strongest_cluster_closest_to_center() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = powers();
        let z = generate_zenith_angles(&mut rng, &spec(false), &p).unwrap();
        let dev: Vec<f64> = z.iter().map(|a| (a - 97.0).abs()).collect();
        let strongest = dev
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(strongest, 0);
        assert_eq!(dev[0], 0.0);
        for w in dev.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn los_pins_first_cluster() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = AngleSpec {
            los_k_db: Some(9.0),
            jitter: true,
            ..spec(true)
        };
        for _ in 0..100 {
            let z = generate_zenith_angles(&mut rng, &s, &powers()).unwrap();
            assert!((z[0] - 100.0).abs() < 1e-9);
            let a = generate_azimuth_angles(&mut rng, &s, &powers()).unwrap();
            assert!((a[0] - 100.0).abs() < 1e-9);
        }
    }

    #[test]
    fn indoor_zoa_centred_at_horizon() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = AngleSpec {
            spread: 15.0,
            center: 90.0,
            offset: 0.0,
            ..spec(true)
        };
        let mut sum = 0.0;
        let mut n = 0.0;
        for _ in 0..5000 {
            for a in folded(&generate_zenith_angles(&mut rng, &s, &powers()).unwrap()) {
                sum += a;
                n += 1.0;
            }
        }
        assert!((sum / n - 90.0).abs() < 0.5, "{}", sum / n);
    }

    #[test]
    fn azimuth_wrap_and_degenerate_spread() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = AngleSpec {
            spread: 80.0,
            center: 175.0,
            offset: 0.0,
            ..spec(true)
        };
        for _ in 0..1000 {
            for a in wrapped(&generate_azimuth_angles(&mut rng, &s, &powers()).unwrap()) {
                assert!(a > -180.0 && a <= 180.0);
            }
        }
        let tiny = AngleSpec {
            spread: 0.0,
            center: 42.0,
            offset: 0.0,
            ..spec(true)
        };
        for a in generate_azimuth_angles(&mut rng, &tiny, &powers()).unwrap() {
            assert_eq!(a, 42.0);
        }
    }

    #[test]
    fn azimuth_centered_on_los_over_realizations() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = AngleSpec {
            spread: 20.0,
            center: -35.0,
            offset: 0.0,
            ..spec(true)
        };
        let mut acc = 0.0;
        let mut n = 0.0;
        for _ in 0..5000 {
            for a in generate_azimuth_angles(&mut rng, &s, &powers()).unwrap() {
                acc += a;
                n += 1.0;
            }
        }
        assert!((acc / n + 35.0).abs() < 0.5);
    }

    #[test]
    fn unsupported_cluster_count() {
        assert!(nlos_zenith_scaling(13).is_err());
        assert!(nlos_azimuth_scaling(20).is_ok());
    }
}
