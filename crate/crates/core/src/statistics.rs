//! Coupling loss, serving-cell association and empirical distributions.

use serde::{Deserialize, Serialize};

use crate::antenna::{ElementPattern, Orientation};
use crate::fastfading::ClusterSet;
use crate::geometry::LinkGeometry;
use crate::largescale::PathlossBreakdown;
use crate::{Error, Result};

/// One (sector, UE) pair of one drop.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkRecord {
    pub scenario: String,
    pub drop: u32,
    pub site: u32,
    pub sector: u32,
    pub ue: u32,
    pub d_2d: f64,
    pub d_3d: f64,
    pub h_ue: f64,
    pub indoor: bool,
    pub los_state: String,
    pub pathloss: PathlossBreakdown,
    pub sf_db: f64,
    pub tx_gain_db: f64,
    pub rx_gain_db: f64,
    pub coupling_loss_db: f64,
    pub serving: bool,
    pub ds: f64,
    pub asd: f64,
    pub asa: f64,
    pub lsp_zsd: f64,
    pub zsa: f64,
    pub k_db: Option<f64>,
    /// Empirical zenith spread of departure, serving links only.
    pub zsd: Option<f64>,
    pub mean_zod: Option<f64>,
}

/// Element gains of both ends toward the LOS direction, in dBi.
pub fn link_gains(
    link: &LinkGeometry,
    tx_pattern: &ElementPattern,
    tx_orientation: &Orientation,
    rx_pattern: &ElementPattern,
    rx_orientation: &Orientation,
) -> (f64, f64) {
    (
        tx_orientation.gain_db(tx_pattern, link.los_zod, link.los_aod),
        rx_orientation.gain_db(rx_pattern, link.los_zoa, link.los_aoa),
    )
}

/// Pathloss plus shadowing minus both antenna gains.
pub fn coupling_loss(pathloss_db: f64, sf_db: f64, tx_gain_db: f64, rx_gain_db: f64) -> f64 {
    pathloss_db + sf_db - tx_gain_db - rx_gain_db
}

/// Index of the candidate with the smallest coupling loss; ties go to the
/// lowest sector id. Candidates are `(sector id, coupling loss)`.
pub fn associate_serving_cell(candidates: &[(u32, f64)]) -> Result<u32> {
    candidates
        .iter()
        .copied()
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .map(|(id, _)| id)
        .ok_or(Error::EmptyInput("serving-cell candidates"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Binning {
    FreedmanDiaconis,
    Fixed(usize),
}

impl Default for Binning {
    fn default() -> Self {
        Binning::FreedmanDiaconis
    }
}

/// Sorted samples with a histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    samples: Vec<f64>,
    pub edges: Vec<f64>,
    /// Fraction of samples per bin; sums to one.
    pub frequencies: Vec<f64>,
}

pub fn ecdf(samples: &[f64], binning: Binning) -> Result<EmpiricalDistribution> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("samples"));
    }
    if let Some(x) = samples.iter().find(|x| !x.is_finite()) {
        return Err(Error::Invariant(format!("non-finite sample {x}")));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let n = sorted.len();
    let bins = if hi == lo {
        1
    } else {
        match binning {
            Binning::Fixed(k) => k.max(1),
            Binning::FreedmanDiaconis => {
                let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
                let width = 2.0 * iqr / (n as f64).cbrt();
                if width > 0.0 {
                    (((hi - lo) / width).ceil() as usize).clamp(1, 10_000)
                } else {
                    1
                }
            }
        }
    };
    let edges: Vec<f64> = if hi == lo {
        vec![lo - 0.5, hi + 0.5]
    } else {
        (0..=bins)
            .map(|i| {
                if i == bins {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / bins as f64
                }
            })
            .collect()
    };
    let mut counts = vec![0usize; bins];
    for x in &sorted {
        let i = edges
            .partition_point(|e| e <= x)
            .saturating_sub(1)
            .min(bins - 1);
        counts[i] += 1;
    }
    Ok(EmpiricalDistribution {
        samples: sorted,
        edges,
        frequencies: counts.iter().map(|c| *c as f64 / n as f64).collect(),
    })
}

/// Lower empirical quantile: the smallest sample whose CDF reaches `p`.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let k = ((p * n as f64 - 1e-9).ceil() as usize).clamp(1, n);
    sorted[k - 1]
}

impl EmpiricalDistribution {
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Right-continuous step CDF.
    pub fn cdf(&self, x: f64) -> f64 {
        self.samples.partition_point(|s| *s <= x) as f64 / self.samples.len() as f64
    }

    pub fn quantile(&self, p: f64) -> f64 {
        quantile_sorted(&self.samples, p.clamp(0.0, 1.0))
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Density per bin: frequency over bin width.
    pub fn pdf(&self) -> Vec<f64> {
        self.frequencies
            .iter()
            .zip(self.edges.windows(2))
            .map(|(f, w)| f / (w[1] - w[0]))
            .collect()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}

/// Power-weighted circular mean and spread, degrees.
pub fn circular_moments(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    let total: f64 = points.iter().map(|p| p.1).sum();
    if points.is_empty() || !(total > 0.0) {
        return Err(Error::EmptyInput("weighted angles"));
    }
    let (re, im) = points.iter().fold((0.0, 0.0), |(re, im), (a, w)| {
        let (s, c) = a.to_radians().sin_cos();
        (re + w * c, im + w * s)
    });
    let r = (re.hypot(im) / total).min(1.0);
    let spread = (-2.0 * r.ln()).max(0.0).sqrt().to_degrees();
    Ok((im.atan2(re).to_degrees(), spread))
}

/// Departure zenith of every ray with its power, the direct ray included.
pub fn departure_zenith_rays(set: &ClusterSet) -> Vec<(f64, f64)> {
    let k = set.los.map_or(0.0, |l| l.k_factor);
    let mut out: Vec<(f64, f64)> = set
        .clusters
        .iter()
        .flat_map(|c| {
            let w = c.power / (k + 1.0) / c.rays.len() as f64;
            c.rays.iter().map(move |r| (r.zod, w))
        })
        .collect();
    if let Some(los) = set.los {
        out.push((los.zod, k / (k + 1.0)));
    }
    out
}

/// Which quantity stands for the mean ZOD of a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MeanZodEstimator {
    /// Power-weighted circular mean over the generated rays. Cluster
    /// jitter and the random sign can pull it across the horizon.
    Rays,
    /// LOS zenith plus the NLOS offset: the centre the clusters are drawn
    /// around.
    #[default]
    Centre,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZenithSummary {
    pub zsd: f64,
    pub mean_zod: f64,
}

pub fn zenith_summary(
    set: &ClusterSet,
    estimator: MeanZodEstimator,
    centre: f64,
) -> Result<ZenithSummary> {
    let (mean, zsd) = circular_moments(&departure_zenith_rays(set))?;
    Ok(ZenithSummary {
        zsd,
        mean_zod: match estimator {
            MeanZodEstimator::Rays => mean,
            MeanZodEstimator::Centre => centre,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::antenna::ParabolicPattern;
    use crate::fastfading::{Cluster, Ray};
    use proptest::prelude::*;

    #[test]
    fn coupling_loss_examples() {
        let link = LinkGeometry {
            d_2d: 100.0,
            d_3d: 102.0,
            h_bs: 25.0,
            h_ue: 1.5,
            los_aod: 0.0,
            los_aoa: 180.0,
            los_zod: 90.0,
            los_zoa: 90.0,
        };
        let iso = ElementPattern::isotropic();
        let id = Orientation::identity();
        let (t, r) = link_gains(&link, &iso, &id, &iso, &id);
        assert_eq!(coupling_loss(120.0, 3.0, t, r), 123.0);
        let sector = ElementPattern::Parabolic(ParabolicPattern::default());
        let (t8, _) = link_gains(&link, &sector, &id, &iso, &id);
        assert!((coupling_loss(120.0, 3.0, t8, r) - 115.0).abs() < 1e-12);
        assert!(coupling_loss(121.0, 3.0, t, r) > coupling_loss(120.0, 3.0, t, r));
    }

    #[test]
    fn serving_cell_examples() {
        assert_eq!(associate_serving_cell(&[(7, 100.0)]).unwrap(), 7);
        assert_eq!(associate_serving_cell(&[(1, 100.0), (2, 90.0)]).unwrap(), 2);
        assert_eq!(associate_serving_cell(&[(5, 90.0), (3, 90.0)]).unwrap(), 3);
        assert!(associate_serving_cell(&[]).is_err());
    }

    #[test]
    fn ecdf_examples() {
        let e = ecdf(&[3.0, 1.0, 2.0], Binning::default()).unwrap();
        assert!((e.cdf(2.0) - 2.0 / 3.0).abs() < 1e-15);
        let c = ecdf(&[4.0; 5], Binning::default()).unwrap();
        assert_eq!(c.cdf(3.999), 0.0);
        assert_eq!(c.cdf(4.0), 1.0);
        assert_eq!(c.frequencies, vec![1.0]);
        let xs: Vec<f64> = (1..=100).map(f64::from).collect();
        let h = ecdf(&xs, Binning::default()).unwrap();
        assert_eq!(h.quantile(0.5), 50.0);
        assert!(ecdf(&[], Binning::default()).is_err());
        assert!(ecdf(&[f64::NAN], Binning::default()).is_err());
    }

    /// Freedman–Diaconis width 2·IQR/n^(1/3): for 1..=1000 the lower
    /// quartiles are 250 and 750, width 100 over a range of 999: ten bins.
    #[test]
    fn freedman_diaconis_bins() {
        let xs: Vec<f64> = (1..=1000).map(f64::from).collect();
        let e = ecdf(&xs, Binning::FreedmanDiaconis).unwrap();
        assert_eq!(e.frequencies.len(), 10);
        let f = ecdf(&xs, Binning::Fixed(4)).unwrap();
        assert_eq!(f.frequencies, vec![0.25, 0.25, 0.25, 0.25]);
    }

    fn set(rays: &[(f64, f64)]) -> ClusterSet {
        ClusterSet {
            clusters: rays
                .iter()
                .map(|&(zod, power)| Cluster {
                    delay: 0.0,
                    power,
                    aod: 0.0,
                    aoa: 0.0,
                    zod,
                    zoa: 90.0,
                    rays: vec![Ray {
                        aod: 0.0,
                        aoa: 0.0,
                        zod,
                        zoa: 90.0,
                        xpr: 1.0,
                        phases: [0.0; 4],
                    }],
                })
                .collect(),
            los: None,
        }
    }

    #[test]
    fn zenith_examples() {
        let s = zenith_summary(
            &set(&[(97.0, 0.5), (97.0, 0.5)]),
            MeanZodEstimator::Rays,
            0.0,
        )
        .unwrap();
        assert!(s.zsd.abs() < 1e-6);
        let s = zenith_summary(
            &set(&[(80.0, 0.5), (100.0, 0.5)]),
            MeanZodEstimator::Rays,
            0.0,
        )
        .unwrap();
        assert!((s.mean_zod - 90.0).abs() < 1e-12);
        let c = zenith_summary(&set(&[(80.0, 1.0)]), MeanZodEstimator::Centre, 93.0).unwrap();
        assert_eq!(c.mean_zod, 93.0);
    }

    /// Small spreads approach the linear power-weighted standard deviation.
    #[test]
    fn circular_spread_small_angle_limit() {
        let pts = [(99.0, 0.25), (100.0, 0.5), (101.0, 0.25)];
        let (m, s) = circular_moments(&pts).unwrap();
        assert!((m - 100.0).abs() < 1e-9);
        assert!((s - 0.5f64.sqrt()).abs() < 1e-4);
    }

    proptest! {
        #[test]
        fn argmin_shift_invariant(losses in prop::collection::vec(50.0f64..200.0, 1..20), c in -50.0f64..50.0) {
            let a: Vec<(u32, f64)> = losses.iter().enumerate().map(|(i, l)| (i as u32, *l)).collect();
            let b: Vec<(u32, f64)> = a.iter().map(|(i, l)| (*i, l + c)).collect();
            prop_assert_eq!(associate_serving_cell(&a).unwrap(), associate_serving_cell(&b).unwrap());
        }

        #[test]
        fn quantile_cdf_inverse(xs in prop::collection::vec(-1e3f64..1e3, 1..200)) {
            let e = ecdf(&xs, Binning::default()).unwrap();
            let total: f64 = e.frequencies.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            for x in e.samples() {
                prop_assert_eq!(e.quantile(e.cdf(*x)), *x);
            }
            let mut prev = 0.0;
            for x in e.samples() {
                let c = e.cdf(*x);
                prop_assert!(c >= prev && c <= 1.0);
                prev = c;
            }
        }
    }
}
