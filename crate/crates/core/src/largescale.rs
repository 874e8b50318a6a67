//! LOS state, environmental height, pathloss and shadow fading.
//!
//! The UMa LOS probability is the sum of a type-1 term, which depends only
//! on horizontal distance, and a type-2 term that only exists above the
//! 12 m rooftop level and grows with UE height. UMi uses the type-1 term
//! alone. Indoor UEs get a LOS state too; it applies to the outdoor part of
//! their outdoor-to-indoor pathloss.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::geometry::{LinkGeometry, ScenarioKind, MAX_UE_HEIGHT, MIN_UE_HEIGHT};
use crate::{Error, Result, SPEED_OF_LIGHT};

/// Rooftop height of the lowest (4-storey) building; type-2 LOS needs a UE
/// strictly above it.
pub const ROOFTOP_HEIGHT: f64 = 12.0;
/// Environmental height of type-1 LOS links, meters.
pub const TYPE1_ENV_HEIGHT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LosState {
    Nlos,
    /// LOS also seen from the first floor of the same building.
    Type1,
    /// LOS only reachable above the surrounding rooftops.
    Type2,
}

impl LosState {
    pub fn is_los(self) -> bool {
        !matches!(self, LosState::Nlos)
    }

    pub fn label(self) -> &'static str {
        match self {
            LosState::Nlos => "nlos",
            LosState::Type1 => "type1",
            LosState::Type2 => "type2",
        }
    }
}

/// Type-1 LOS probability as a function of horizontal distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Type1Curve {
    /// `min(d1/d, 1)·(1 − exp(−d/d2)) + exp(−d/d2)`.
    Itu { d1: f64, d2: f64 },
    /// Distance-independent probability.
    Constant { p: f64 },
}

impl Type1Curve {
    pub fn eval(&self, d_2d: f64) -> f64 {
        match *self {
            Type1Curve::Itu { d1, d2 } => {
                let e = (-d_2d / d2).exp();
                let near = if d_2d <= d1 { 1.0 } else { d1 / d_2d };
                near * (1.0 - e) + e
            }
            Type1Curve::Constant { p } => p,
        }
    }
}

/// Type-2 LOS probability as a multiple of the type-1 probability:
/// `p2 = p1 · ((h − h_threshold)/h_scale)^exponent · g(d)` for
/// `h ≥ h_threshold`, with `g(d) = g_coeff·d³·exp(−d/g_decay)` beyond
/// `g_min_distance` and zero inside it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Type2Curve {
    pub h_threshold: f64,
    pub h_scale: f64,
    pub exponent: f64,
    pub g_coeff: f64,
    pub g_decay: f64,
    pub g_min_distance: f64,
}

impl Type2Curve {
    fn height_factor(&self, h_ue: f64) -> f64 {
        if h_ue < self.h_threshold {
            0.0
        } else {
            ((h_ue - self.h_threshold) / self.h_scale).powf(self.exponent)
        }
    }

    fn distance_factor(&self, d_2d: f64) -> f64 {
        if d_2d <= self.g_min_distance {
            0.0
        } else {
            self.g_coeff * d_2d.powi(3) * (-d_2d / self.g_decay).exp()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LosCurveSet {
    pub type1: Type1Curve,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub type2: Option<Type2Curve>,
}

impl LosCurveSet {
    pub fn uma() -> Self {
        Self {
            type1: Type1Curve::Itu { d1: 18.0, d2: 63.0 },
            type2: Some(Type2Curve {
                h_threshold: 13.0,
                h_scale: 10.0,
                exponent: 1.5,
                g_coeff: 1.25e-6,
                g_decay: 150.0,
                g_min_distance: 18.0,
            }),
        }
    }

    pub fn umi() -> Self {
        Self {
            type1: Type1Curve::Itu { d1: 18.0, d2: 36.0 },
            type2: None,
        }
    }

    pub fn validate(&self, kind: ScenarioKind) -> Result<()> {
        match self.type1 {
            Type1Curve::Itu { d1, d2 } if !(d1 > 0.0 && d2 > 0.0) => {
                return Err(Error::Config(
                    "type-1 curve distances must be positive".into(),
                ))
            }
            Type1Curve::Constant { p } if !(0.0..=1.0).contains(&p) => {
                return Err(Error::range("type1.p", p, 0.0, 1.0))
            }
            _ => {}
        }
        if let Some(t2) = &self.type2 {
            if kind == ScenarioKind::UMi {
                return Err(Error::Config(
                    "type-2 LOS is not modelled for UMi; remove the type2 curve".into(),
                ));
            }
            if t2.h_threshold < ROOFTOP_HEIGHT {
                return Err(Error::Config(format!(
                    "type-2 height threshold {} below the {ROOFTOP_HEIGHT} m rooftop level",
                    t2.h_threshold
                )));
            }
            if !(t2.h_scale > 0.0 && t2.exponent > 0.0 && t2.g_coeff >= 0.0 && t2.g_decay > 0.0) {
                return Err(Error::Config(
                    "type-2 curve parameters must be positive".into(),
                ));
            }
        }
        Ok(())
    }

    /// `(type-1, type-2)` probabilities. The type-2 term is capped so that
    /// the total never exceeds one.
    pub fn components(&self, kind: ScenarioKind, d_2d: f64, h_ue: f64) -> (f64, f64) {
        let p1 = self.type1.eval(d_2d).clamp(0.0, 1.0);
        let p2 = match (&self.type2, kind) {
            (Some(t2), ScenarioKind::UMa) if h_ue > ROOFTOP_HEIGHT => {
                (p1 * t2.height_factor(h_ue) * t2.distance_factor(d_2d)).min(1.0 - p1)
            }
            _ => 0.0,
        };
        (p1, p2)
    }
}

fn check_ue_height(h_ue: f64) -> Result<()> {
    if !(MIN_UE_HEIGHT - 1e-9..=MAX_UE_HEIGHT + 1e-9).contains(&h_ue) {
        return Err(Error::range("h_ue", h_ue, MIN_UE_HEIGHT, MAX_UE_HEIGHT));
    }
    Ok(())
}

pub fn los_probability(
    kind: ScenarioKind,
    d_2d: f64,
    h_ue: f64,
    curves: &LosCurveSet,
) -> Result<f64> {
    check_ue_height(h_ue)?;
    if !(d_2d >= 0.0) {
        return Err(Error::range("d_2d", d_2d, 0.0, f64::INFINITY));
    }
    let (p1, p2) = curves.components(kind, d_2d, h_ue);
    Ok(p1 + p2)
}

/// A single uniform draw `u` selects type-1 on `[0, p1)`, type-2 on
/// `[p1, p1 + p2)` and NLOS otherwise.
pub fn draw_los_state<R: Rng + ?Sized>(
    rng: &mut R,
    kind: ScenarioKind,
    d_2d: f64,
    h_ue: f64,
    curves: &LosCurveSet,
) -> Result<LosState> {
    check_ue_height(h_ue)?;
    let (p1, p2) = curves.components(kind, d_2d, h_ue);
    let u: f64 = rng.random();
    Ok(if u < p1 {
        LosState::Type1
    } else if u < p1 + p2 {
        LosState::Type2
    } else {
        LosState::Nlos
    })
}

/// Candidate type-2 environmental heights `{12, 15, …, h_ue − 1.5}`.
pub fn type2_env_heights(h_ue: f64) -> Result<Vec<f64>> {
    let top = h_ue - 1.5;
    if top < ROOFTOP_HEIGHT - 1e-9 {
        return Err(Error::Invariant(format!(
            "type-2 LOS needs h_ue - 1.5 >= {ROOFTOP_HEIGHT} m, got h_ue = {h_ue}"
        )));
    }
    let count = ((top - ROOFTOP_HEIGHT) / 3.0 + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|k| ROOFTOP_HEIGHT + 3.0 * k as f64)
        .collect())
}

pub fn environmental_height<R: Rng + ?Sized>(
    rng: &mut R,
    state: LosState,
    h_ue: f64,
) -> Result<f64> {
    match state {
        LosState::Type1 => Ok(TYPE1_ENV_HEIGHT),
        LosState::Type2 => {
            let set = type2_env_heights(h_ue)?;
            Ok(set[rng.random_range(0..set.len())])
        }
        LosState::Nlos => Err(Error::Invariant(
            "environmental height requested for an NLOS link".into(),
        )),
    }
}

/// `4·(h_bs − h_e)·(h_ue − h_e)·f / c`.
pub fn breakpoint_distance(h_bs: f64, h_ue: f64, h_e: f64, carrier_hz: f64) -> Result<f64> {
    if h_ue <= h_e || h_bs <= h_e {
        return Err(Error::Geometry(format!(
            "environmental height {h_e} m not below both antennas (h_bs {h_bs} m, h_ue {h_ue} m)"
        )));
    }
    Ok(4.0 * (h_bs - h_e) * (h_ue - h_e) * carrier_hz / SPEED_OF_LIGHT)
}

/// Two-slope LOS law in `d_3d`:
/// `near_slope·log10(d) + intercept + freq_coeff·log10(f_GHz)` up to the
/// breakpoint, then `far_slope·log10(d) + intercept + freq_coeff·log10(f_GHz)
/// − bp_coeff·log10(d_bp² + Δh²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LosPathloss {
    pub near_slope: f64,
    pub far_slope: f64,
    pub intercept: f64,
    pub freq_coeff: f64,
    pub bp_coeff: f64,
}

impl Default for LosPathloss {
    fn default() -> Self {
        Self {
            near_slope: 22.0,
            far_slope: 40.0,
            intercept: 28.0,
            freq_coeff: 20.0,
            bp_coeff: 9.0,
        }
    }
}

/// Pre-height-gain NLOS law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NlosBase {
    /// ITU urban macro NLOS law with street width and mean building height.
    ItuUma {
        street_width: f64,
        building_height: f64,
    },
    /// `intercept + distance_slope·log10(d_3d) + freq_slope·log10(f_GHz)`.
    LogDistance {
        intercept: f64,
        distance_slope: f64,
        freq_slope: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathlossParams {
    pub los: LosPathloss,
    pub nlos: NlosBase,
    /// Height gain coefficient α, dB per meter above 1.5 m.
    pub height_gain_db_per_m: f64,
    pub wall_loss_db: f64,
    pub indoor_loss_db_per_m: f64,
    pub min_distance: f64,
    pub max_distance: f64,
}

impl PathlossParams {
    pub fn uma() -> Self {
        Self {
            los: LosPathloss::default(),
            nlos: NlosBase::ItuUma {
                street_width: 20.0,
                building_height: 20.0,
            },
            height_gain_db_per_m: 0.6,
            wall_loss_db: 20.0,
            indoor_loss_db_per_m: 0.5,
            min_distance: 10.0,
            max_distance: 5000.0,
        }
    }

    pub fn umi() -> Self {
        Self {
            nlos: NlosBase::LogDistance {
                intercept: 22.7,
                distance_slope: 36.7,
                freq_slope: 26.0,
            },
            height_gain_db_per_m: 0.3,
            ..Self::uma()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let los = &self.los;
        if (los.far_slope - 2.0 * los.bp_coeff - los.near_slope).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "LOS pathloss is discontinuous at the breakpoint: far_slope - 2*bp_coeff = {} != near_slope = {}",
                los.far_slope - 2.0 * los.bp_coeff,
                los.near_slope
            )));
        }
        if self.height_gain_db_per_m < 0.0 {
            return Err(Error::Config(
                "height gain coefficient must be non-negative".into(),
            ));
        }
        if self.wall_loss_db < 0.0 || self.indoor_loss_db_per_m < 0.0 {
            return Err(Error::Config(
                "O2I loss constants must be non-negative".into(),
            ));
        }
        if !(self.min_distance > 0.0 && self.max_distance > self.min_distance) {
            return Err(Error::Config("invalid pathloss validity range".into()));
        }
        Ok(())
    }

    fn check_distance(&self, d_3d: f64) -> Result<()> {
        if !(self.min_distance..=self.max_distance).contains(&d_3d) {
            return Err(Error::range(
                "d_3d",
                d_3d,
                self.min_distance,
                self.max_distance,
            ));
        }
        Ok(())
    }
}

pub fn pathloss_los(
    params: &PathlossParams,
    d_3d: f64,
    h_bs: f64,
    h_ue: f64,
    h_e: f64,
    carrier_hz: f64,
) -> Result<f64> {
    params.check_distance(d_3d)?;
    let dh = h_bs - h_ue;
    let d_2d = (d_3d * d_3d - dh * dh).max(0.0).sqrt();
    let d_bp = breakpoint_distance(h_bs, h_ue, h_e, carrier_hz)?;
    let c = &params.los;
    let freq = c.freq_coeff * (carrier_hz / 1e9).log10();
    Ok(if d_2d <= d_bp {
        c.near_slope * d_3d.log10() + c.intercept + freq
    } else {
        c.far_slope * d_3d.log10() + c.intercept + freq
            - c.bp_coeff * (d_bp * d_bp + dh * dh).log10()
    })
}

/// Components of the NLOS pathloss computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlosPathloss {
    pub base_db: f64,
    /// `−α·(h_ue − 1.5)`, never positive.
    pub height_gain_db: f64,
    pub pre_clamp_db: f64,
    /// LOS pathloss of the same geometry with a 1 m environmental height.
    pub los_db: f64,
    pub total_db: f64,
}

fn nlos_base(base: &NlosBase, d_3d: f64, h_bs: f64, carrier_hz: f64) -> f64 {
    let f_ghz = carrier_hz / 1e9;
    match *base {
        NlosBase::ItuUma {
            street_width: w,
            building_height: h,
        } => {
            161.04 - 7.1 * w.log10() + 7.5 * h.log10()
                - (24.37 - 3.7 * (h / h_bs).powi(2)) * h_bs.log10()
                + (43.42 - 3.1 * h_bs.log10()) * (d_3d.log10() - 3.0)
                + 20.0 * f_ghz.log10()
                - (3.2 * 17.625f64.log10().powi(2) - 4.97)
        }
        NlosBase::LogDistance {
            intercept,
            distance_slope,
            freq_slope,
        } => intercept + distance_slope * d_3d.log10() + freq_slope * f_ghz.log10(),
    }
}

pub fn pathloss_nlos(
    params: &PathlossParams,
    link: &LinkGeometry,
    carrier_hz: f64,
) -> Result<NlosPathloss> {
    check_ue_height(link.h_ue)?;
    params.check_distance(link.d_3d)?;
    let base_db = nlos_base(&params.nlos, link.d_3d, link.h_bs, carrier_hz);
    let height_gain_db = -params.height_gain_db_per_m * (link.h_ue - MIN_UE_HEIGHT);
    let pre_clamp_db = base_db + height_gain_db;
    let los_db = pathloss_los(
        params,
        link.d_3d,
        link.h_bs,
        link.h_ue,
        TYPE1_ENV_HEIGHT,
        carrier_hz,
    )?;
    Ok(NlosPathloss {
        base_db,
        height_gain_db,
        pre_clamp_db,
        los_db,
        total_db: pre_clamp_db.max(los_db),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathlossBreakdown {
    pub outdoor_db: f64,
    pub wall_db: f64,
    pub indoor_db: f64,
    /// Height gain already contained in `outdoor_db`, kept for auditing.
    pub height_gain_db: f64,
    pub total_db: f64,
}

/// Adds wall penetration and indoor loss to the outdoor component for
/// indoor UEs; outdoor UEs pass through unchanged.
pub fn o2i_total(
    params: &PathlossParams,
    outdoor_db: f64,
    height_gain_db: f64,
    indoor: bool,
    indoor_depth: f64,
) -> Result<PathlossBreakdown> {
    if !(indoor_depth >= 0.0) {
        return Err(Error::range("d_in", indoor_depth, 0.0, f64::INFINITY));
    }
    let (wall_db, indoor_db) = if indoor {
        (
            params.wall_loss_db,
            params.indoor_loss_db_per_m * indoor_depth,
        )
    } else {
        (0.0, 0.0)
    };
    Ok(PathlossBreakdown {
        outdoor_db,
        wall_db,
        indoor_db,
        height_gain_db,
        total_db: outdoor_db + wall_db + indoor_db,
    })
}

/// Zero-mean Gaussian shadow fading in dB.
pub fn shadow_fading<R: Rng + ?Sized>(rng: &mut R, sigma_db: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    sigma_db * z
}
