//! Correlated large-scale parameters and the elevation model.

use std::collections::BTreeMap;

use nalgebra::{SMatrix, SVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::geometry::{ScenarioKind, MIN_UE_HEIGHT};
use crate::{Error, Result};

/// Order of the jointly drawn Gaussian components.
pub const LSP_NAMES: [&str; 7] = ["ds", "asd", "asa", "zsd", "zsa", "k", "sf"];

const MAX_AZIMUTH_SPREAD: f64 = 104.0;
const MAX_ZENITH_SPREAD: f64 = 52.0;

/// Propagation condition selecting an LSP table. Indoor UEs use `O2i`
/// whatever the LOS state of their outdoor path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Los,
    Nlos,
    O2i,
}

/// Gaussian in the log10 domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogNormal {
    pub mu: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gaussian {
    pub mu: f64,
    pub sigma: f64,
}

/// Per-condition large-scale and cluster parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LspTable {
    /// log10(delay spread / 1 s)
    pub ds: LogNormal,
    /// log10(degrees)
    pub asd: LogNormal,
    pub asa: LogNormal,
    pub zsa: LogNormal,
    /// Rician K factor in dB; only LOS tables carry one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Gaussian>,
    pub sf_sigma_db: f64,
    /// Cross-correlations keyed `"a_b"` with names from [`LSP_NAMES`].
    /// Missing pairs are uncorrelated.
    #[serde(default)]
    pub correlations: BTreeMap<String, f64>,
    pub delay_scaling: f64,
    /// Cross-polarization ratio in dB.
    pub xpr: Gaussian,
    pub clusters: usize,
    pub rays: usize,
    pub cluster_asd: f64,
    pub cluster_asa: f64,
    pub cluster_zsa: f64,
    pub cluster_shadow_db: f64,
}

fn lsp_index(name: &str) -> Option<usize> {
    LSP_NAMES.iter().position(|n| *n == name)
}

impl LspTable {
    pub fn correlation_matrix(&self) -> Result<SMatrix<f64, 7, 7>> {
        let mut m = SMatrix::<f64, 7, 7>::identity();
        for (key, &rho) in &self.correlations {
            let (a, b) = key
                .split_once('_')
                .and_then(|(a, b)| Some((lsp_index(a)?, lsp_index(b)?)))
                .ok_or_else(|| Error::Config(format!("unknown correlation pair {key:?}")))?;
            if a == b {
                return Err(Error::Config(format!(
                    "self-correlation {key:?} is fixed at 1"
                )));
            }
            if !(-1.0..=1.0).contains(&rho) {
                return Err(Error::range("correlation", rho, -1.0, 1.0));
            }
            if m[(a, b)] != 0.0 {
                return Err(Error::Config(format!(
                    "correlation pair {key:?} given twice"
                )));
            }
            m[(a, b)] = rho;
            m[(b, a)] = rho;
        }
        if self.k.is_none() && (0..7).any(|i| i != 5 && m[(5, i)] != 0.0) {
            return Err(Error::Config(
                "K correlations given for a table without K".into(),
            ));
        }
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("ds", self.ds.sigma),
            ("asd", self.asd.sigma),
            ("asa", self.asa.sigma),
            ("zsa", self.zsa.sigma),
            ("sf_sigma_db", self.sf_sigma_db),
            ("xpr", self.xpr.sigma),
            ("cluster_shadow_db", self.cluster_shadow_db),
        ] {
            if !(v >= 0.0) {
                return Err(Error::Config(format!("{name} sigma must be non-negative")));
            }
        }
        if !(self.delay_scaling > 1.0) {
            return Err(Error::Config("delay_scaling must exceed 1".into()));
        }
        if self.clusters == 0 || self.rays == 0 {
            return Err(Error::Config("clusters and rays must be positive".into()));
        }
        crate::fastfading::nlos_azimuth_scaling(self.clusters)?;
        crate::fastfading::nlos_zenith_scaling(self.clusters)?;
        if self.rays != 1 && self.rays != crate::fastfading::RAY_OFFSETS.len() {
            return Err(Error::Config(format!(
                "rays per cluster must be 1 or {}, got {}",
                crate::fastfading::RAY_OFFSETS.len(),
                self.rays
            )));
        }
        Ok(())
    }
}

/// An [`LspTable`] with its correlation matrix factorised.
#[derive(Debug, Clone)]
pub struct LspModel {
    pub table: LspTable,
    chol: SMatrix<f64, 7, 7>,
}

impl LspModel {
    pub fn new(table: LspTable) -> Result<Self> {
        table.validate()?;
        let chol = table
            .correlation_matrix()?
            .cholesky()
            .ok_or_else(|| {
                Error::Config("LSP cross-correlation matrix is not positive definite".into())
            })?
            .l();
        Ok(Self { table, chol })
    }

    /// Seven correlated standard normal variates in [`LSP_NAMES`] order.
    pub fn correlated_normals<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 7] {
        let z = SVector::<f64, 7>::from_fn(|_, _| StandardNormal.sample(rng));
        let x = self.chol * z;
        x.into()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LargeScaleParams {
    /// seconds
    pub ds: f64,
    /// degrees
    pub asd: f64,
    pub asa: f64,
    pub zsd: f64,
    pub zsa: f64,
    pub k_db: Option<f64>,
    pub sf_db: f64,
    /// log10 mean of the ZSD used for this link.
    pub zsd_mu: f64,
}

/// Draws one correlated septet. `zsd_mu`/`zsd_sigma` come from the
/// elevation model evaluated at the link's distance and UE height.
pub fn generate_lsps<R: Rng + ?Sized>(
    rng: &mut R,
    model: &LspModel,
    zsd_mu: f64,
    zsd_sigma: f64,
) -> LargeScaleParams {
    let x = model.correlated_normals(rng);
    let t = &model.table;
    let log = |p: LogNormal, z: f64| 10f64.powf(p.mu + p.sigma * z);
    LargeScaleParams {
        ds: log(t.ds, x[0]),
        asd: log(t.asd, x[1]).min(MAX_AZIMUTH_SPREAD),
        asa: log(t.asa, x[2]).min(MAX_AZIMUTH_SPREAD),
        zsd: 10f64.powf(zsd_mu + zsd_sigma * x[3]).min(MAX_ZENITH_SPREAD),
        zsa: log(t.zsa, x[4]).min(MAX_ZENITH_SPREAD),
        k_db: t.k.map(|k| k.mu + k.sigma * x[5]),
        sf_db: t.sf_sigma_db * x[6],
        zsd_mu,
    }
}

/// How the UE height relative to the eNB enters the ZSD log-mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelativeHeight {
    None,
    /// `|h_ue − h_bs|`
    Abs,
    /// `max(h_ue − h_bs, 0)`
    PositivePart,
}

/// `μ_lgZSD = max(floor, intercept + d_slope_per_km·d_2d/1000
///   + h_slope·(h_ue − 1.5) + rel_slope·rel(h_ue − h_bs))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZsdCurve {
    pub intercept: f64,
    pub d_slope_per_km: f64,
    pub h_slope: f64,
    pub rel_slope: f64,
    pub relative: RelativeHeight,
    pub floor: f64,
    pub sigma: f64,
}

impl ZsdCurve {
    pub fn mu(&self, d_2d: f64, h_ue: f64, h_bs: f64) -> f64 {
        let dh = h_ue - h_bs;
        let rel = match self.relative {
            RelativeHeight::None => 0.0,
            RelativeHeight::Abs => dh.abs(),
            RelativeHeight::PositivePart => dh.max(0.0),
        };
        (self.intercept
            + self.d_slope_per_km * d_2d / 1000.0
            + self.h_slope * (h_ue - MIN_UE_HEIGHT)
            + self.rel_slope * rel)
            .max(self.floor)
    }
}

/// Signed shift of the mean ZOD away from the LOS ZOD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OffsetCurve {
    Zero,
    /// `−10^(a·log10(max(d_min, d_2d)) + b + c·(h_ue − 1.5))` degrees.
    Power {
        a: f64,
        b: f64,
        c: f64,
        d_min: f64,
    },
}

impl OffsetCurve {
    pub fn eval(&self, d_2d: f64, h_ue: f64) -> f64 {
        match *self {
            OffsetCurve::Zero => 0.0,
            OffsetCurve::Power { a, b, c, d_min } => {
                -10f64.powf(a * d_2d.max(d_min).log10() + b + c * (h_ue - MIN_UE_HEIGHT))
            }
        }
    }
}

/// Distance and height dependent ZSD log-means and the NLOS ZOD offset.
/// LOS links (including LOS outdoor-to-indoor) have no ZOD offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElevationModel {
    pub los_zsd: ZsdCurve,
    pub nlos_zsd: ZsdCurve,
    pub nlos_offset: OffsetCurve,
}

impl ElevationModel {
    pub fn uma() -> Self {
        Self {
            los_zsd: ZsdCurve {
                intercept: 0.75,
                d_slope_per_km: -2.1,
                h_slope: -0.01,
                rel_slope: 0.0,
                relative: RelativeHeight::None,
                floor: -0.5,
                sigma: 0.40,
            },
            nlos_zsd: ZsdCurve {
                intercept: 0.9,
                d_slope_per_km: -2.1,
                h_slope: -0.01,
                rel_slope: 0.0,
                relative: RelativeHeight::None,
                floor: -0.5,
                sigma: 0.49,
            },
            nlos_offset: OffsetCurve::Power {
                a: -0.62,
                b: 1.93,
                c: -0.07,
                d_min: 10.0,
            },
        }
    }

    pub fn umi() -> Self {
        Self {
            los_zsd: ZsdCurve {
                intercept: 0.75,
                d_slope_per_km: -2.1,
                h_slope: 0.0,
                rel_slope: 0.01,
                relative: RelativeHeight::Abs,
                floor: -0.5,
                sigma: 0.6,
            },
            nlos_zsd: ZsdCurve {
                intercept: 0.9,
                d_slope_per_km: -2.1,
                h_slope: 0.0,
                rel_slope: 0.01,
                relative: RelativeHeight::PositivePart,
                floor: -0.5,
                sigma: 0.6,
            },
            nlos_offset: OffsetCurve::Power {
                a: -0.55,
                b: 1.6,
                c: 0.0,
                d_min: 10.0,
            },
        }
    }

    /// Rejects curves that break the observed trends: ZSD and |offset|
    /// must not grow with distance, the UMa |offset| must not grow with
    /// height and the UMi offset must not depend on height.
    pub fn validate(&self, kind: ScenarioKind) -> Result<()> {
        for (name, c) in [("los_zsd", &self.los_zsd), ("nlos_zsd", &self.nlos_zsd)] {
            if c.d_slope_per_km > 0.0 {
                return Err(Error::Config(format!(
                    "{name}: ZSD log-mean must be nonincreasing in distance"
                )));
            }
            if !(c.sigma >= 0.0) {
                return Err(Error::Config(format!("{name}: sigma must be non-negative")));
            }
        }
        if let OffsetCurve::Power { a, c, d_min, .. } = self.nlos_offset {
            if a > 0.0 {
                return Err(Error::Config(
                    "ZOD offset magnitude must be nonincreasing in distance".into(),
                ));
            }
            if !(d_min > 0.0) {
                return Err(Error::Config("ZOD offset d_min must be positive".into()));
            }
            match kind {
                ScenarioKind::UMa if c > 0.0 => {
                    return Err(Error::Config(
                        "UMa ZOD offset magnitude must be nonincreasing in UE height".into(),
                    ))
                }
                ScenarioKind::UMi if c != 0.0 => {
                    return Err(Error::Config(
                        "UMi ZOD offset must not depend on UE height".into(),
                    ))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn zsd_curve(&self, los: bool) -> &ZsdCurve {
        if los {
            &self.los_zsd
        } else {
            &self.nlos_zsd
        }
    }
}

/// ZOD offset in degrees; zero for any LOS outdoor path.
pub fn zod_offset(model: &ElevationModel, los: bool, d_2d: f64, h_ue: f64) -> f64 {
    if los {
        0.0
    } else {
        model.nlos_offset.eval(d_2d, h_ue)
    }
}
