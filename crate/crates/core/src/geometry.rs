//! Network layout, UE dropping and per-link geometry.
//!
//! Zenith angles follow one convention everywhere in the crate: 0° points
//! up, 90° is the horizon and 180° points down. Azimuths are in degrees in
//! `(-180, 180]`.

use nalgebra::{Point3, Vector2, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{wrap_degrees, Error, Result};

/// Lowest UE height covered by the model (street level), meters.
pub const MIN_UE_HEIGHT: f64 = 1.5;
/// Highest UE height covered by the model (8th floor), meters.
pub const MAX_UE_HEIGHT: f64 = 22.5;
/// Floor-to-floor spacing, meters.
pub const FLOOR_HEIGHT: f64 = 3.0;
/// Building heights in floors are uniform on this inclusive range.
pub const BUILDING_FLOORS: (u32, u32) = (4, 8);

pub const MIN_CARRIER_HZ: f64 = 2.0e9;
pub const MAX_CARRIER_HZ: f64 = 6.0e9;
pub const MAX_BANDWIDTH_HZ: f64 = 100.0e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScenarioKind {
    UMa,
    UMi,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::UMa => "UMa",
            ScenarioKind::UMi => "UMi",
        }
    }
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "UMa" | "uma" => Ok(ScenarioKind::UMa),
            "UMi" | "umi" => Ok(ScenarioKind::UMi),
            other => Err(Error::Config(format!("unknown scenario {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub isd: f64,
    pub enb_height: f64,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
}

impl Scenario {
    pub fn new(
        kind: ScenarioKind,
        isd: f64,
        enb_height: f64,
        carrier_hz: f64,
        bandwidth_hz: f64,
    ) -> Result<Self> {
        if !(MIN_CARRIER_HZ..=MAX_CARRIER_HZ).contains(&carrier_hz) {
            return Err(Error::range(
                "carrier_hz",
                carrier_hz,
                MIN_CARRIER_HZ,
                MAX_CARRIER_HZ,
            ));
        }
        if !(bandwidth_hz > 0.0 && bandwidth_hz <= MAX_BANDWIDTH_HZ) {
            return Err(Error::range(
                "bandwidth_hz",
                bandwidth_hz,
                0.0,
                MAX_BANDWIDTH_HZ,
            ));
        }
        if !(isd > 0.0 && isd.is_finite()) {
            return Err(Error::range("isd", isd, 0.0, f64::INFINITY));
        }
        if !(enb_height > 0.0 && enb_height.is_finite()) {
            return Err(Error::range("enb_height", enb_height, 0.0, f64::INFINITY));
        }
        Ok(Self {
            kind,
            isd,
            enb_height,
            carrier_hz,
            bandwidth_hz,
        })
    }

    /// 500 m ISD, 25 m eNB, 2 GHz carrier, 10 MHz bandwidth.
    pub fn uma() -> Self {
        Self::new(ScenarioKind::UMa, 500.0, 25.0, 2.0e9, 10.0e6).expect("valid defaults")
    }

    /// 200 m ISD, 10 m eNB, 2 GHz carrier, 10 MHz bandwidth.
    pub fn umi() -> Self {
        Self::new(ScenarioKind::UMi, 200.0, 10.0, 2.0e9, 10.0e6).expect("valid defaults")
    }

    pub fn wavelength(&self) -> f64 {
        crate::SPEED_OF_LIGHT / self.carrier_hz
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Site {
    pub id: u32,
    pub position: Point3<f64>,
    /// Sector boresight bearings in degrees, counter-clockwise from +x.
    pub sector_bearings: [f64; 3],
}

pub const SECTORS_PER_SITE: usize = 3;
const SECTOR_BEARINGS: [f64; 3] = [30.0, 150.0, -90.0];

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkLayout {
    pub isd: f64,
    pub enb_height: f64,
    pub rings: u32,
    pub wraparound: bool,
    pub sites: Vec<Site>,
    wrap_shifts: Vec<Vector2<f64>>,
}

/// Hexagonal lattice of `1 + 3·rings·(rings+1)` three-sector sites at pitch
/// `isd`, with the first site at the origin.
///
/// Sector bearings point at the corners of each site's hexagonal cell, so
/// each sector serves one rhombus of the cell. With wraparound enabled the
/// layout tiles the plane with six translated copies of itself, and link
/// geometry uses whichever copy of a site is closest to the UE.
pub fn build_layout(scenario: &Scenario, rings: u32, wraparound: bool) -> NetworkLayout {
    let r = rings as i64;
    let a1 = Vector2::new(scenario.isd, 0.0);
    let a2 = Vector2::new(scenario.isd * 0.5, scenario.isd * 3f64.sqrt() / 2.0);

    // Axial coordinates ring by ring, walking each ring counter-clockwise.
    let mut axial: Vec<(i64, i64)> = vec![(0, 0)];
    let dirs = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];
    for ring in 1..=r {
        let (mut q, mut s) = (ring * dirs[4].0, ring * dirs[4].1);
        for dir in dirs {
            for _ in 0..ring {
                axial.push((q, s));
                q += dir.0;
                s += dir.1;
            }
        }
    }

    let sites = axial
        .iter()
        .enumerate()
        .map(|(id, &(q, s))| {
            let xy = a1 * q as f64 + a2 * s as f64;
            Site {
                id: id as u32,
                position: Point3::new(xy.x, xy.y, scenario.enb_height),
                sector_bearings: SECTOR_BEARINGS,
            }
        })
        .collect();

    let wrap_shifts = if wraparound {
        let t = a1 * (r + 1) as f64 + a2 * r as f64;
        (0..6)
            .map(|k| {
                let (sin, cos) = (k as f64 * 60f64.to_radians()).sin_cos();
                Vector2::new(cos * t.x - sin * t.y, sin * t.x + cos * t.y)
            })
            .collect()
    } else {
        Vec::new()
    };

    NetworkLayout {
        isd: scenario.isd,
        enb_height: scenario.enb_height,
        rings,
        wraparound,
        sites,
        wrap_shifts,
    }
}

impl NetworkLayout {
    pub fn sector_count(&self) -> usize {
        self.sites.len() * SECTORS_PER_SITE
    }

    /// Global sector id of sector `k` at `site`.
    pub fn sector_id(site: u32, k: usize) -> u32 {
        site * SECTORS_PER_SITE as u32 + k as u32
    }

    /// Position of the copy of `site` closest to `ue` (the site itself when
    /// wraparound is off).
    pub fn site_image(&self, site: &Site, ue: &Point3<f64>) -> Point3<f64> {
        let mut best = site.position;
        let mut best_d = horizontal_distance(&best, ue);
        for shift in &self.wrap_shifts {
            let cand = Point3::new(
                site.position.x + shift.x,
                site.position.y + shift.y,
                site.position.z,
            );
            let d = horizontal_distance(&cand, ue);
            if d < best_d {
                best = cand;
                best_d = d;
            }
        }
        best
    }

    /// Circumradius of a site's hexagonal cell.
    pub fn cell_radius(&self) -> f64 {
        self.isd / 3f64.sqrt()
    }

    fn in_cell(&self, offset: Vector2<f64>) -> bool {
        let apothem = self.isd / 2.0;
        (0..6).all(|k| {
            let (sin, cos) = (k as f64 * 60f64.to_radians()).sin_cos();
            offset.x * cos + offset.y * sin <= apothem
        })
    }
}

fn horizontal_distance(a: &Point3<f64>, b: &Point3<f64>) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Outcome of the floor draw for one UE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloorDraw {
    /// Floor index, 1-based; 0 for outdoor UEs.
    pub floor: u32,
    /// Building height in floors; 0 for outdoor UEs.
    pub building_floors: u32,
    pub height: f64,
}

pub fn floor_height(floor: u32) -> f64 {
    FLOOR_HEIGHT * (floor as f64 - 1.0) + MIN_UE_HEIGHT
}

/// Outdoor UEs sit at 1.5 m. Indoor UEs pick a building of 4..=8 floors and
/// a floor uniformly within it.
pub fn sample_ue_height<R: Rng + ?Sized>(rng: &mut R, indoor: bool) -> FloorDraw {
    if !indoor {
        return FloorDraw {
            floor: 0,
            building_floors: 0,
            height: MIN_UE_HEIGHT,
        };
    }
    let building_floors = rng.random_range(BUILDING_FLOORS.0..=BUILDING_FLOORS.1);
    let floor = rng.random_range(1..=building_floors);
    FloorDraw {
        floor,
        building_floors,
        height: floor_height(floor),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DropParams {
    pub indoor_fraction: f64,
    /// Minimum 2D distance to the serving site, meters.
    pub min_distance: f64,
    /// Indoor depth is uniform on `[0, max_indoor_depth]`, meters.
    pub max_indoor_depth: f64,
    /// UE speed, km/h, in a uniformly random horizontal direction.
    pub ue_speed_kmh: f64,
    pub max_attempts: u32,
}

impl DropParams {
    pub fn uma() -> Self {
        Self {
            indoor_fraction: 0.8,
            min_distance: 35.0,
            max_indoor_depth: 25.0,
            ue_speed_kmh: 3.0,
            max_attempts: 10_000,
        }
    }

    pub fn umi() -> Self {
        Self {
            min_distance: 10.0,
            ..Self::uma()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.indoor_fraction) {
            return Err(Error::range(
                "indoor_fraction",
                self.indoor_fraction,
                0.0,
                1.0,
            ));
        }
        if !(self.min_distance >= 0.0) {
            return Err(Error::range(
                "min_distance",
                self.min_distance,
                0.0,
                f64::INFINITY,
            ));
        }
        if !(self.max_indoor_depth >= 0.0) {
            return Err(Error::range(
                "max_indoor_depth",
                self.max_indoor_depth,
                0.0,
                f64::INFINITY,
            ));
        }
        if !(self.ue_speed_kmh >= 0.0) {
            return Err(Error::range(
                "ue_speed_kmh",
                self.ue_speed_kmh,
                0.0,
                f64::INFINITY,
            ));
        }
        if self.max_attempts == 0 {
            return Err(Error::Config("max_attempts must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UeState {
    pub position: Point3<f64>,
    pub indoor: bool,
    pub floor: u32,
    pub building_floors: u32,
    /// Distance from the building wall, meters; 0 for outdoor UEs.
    pub indoor_depth: f64,
    /// m/s
    pub velocity: Vector3<f64>,
}

impl UeState {
    pub fn height(&self) -> f64 {
        self.position.z
    }
}

/// Drop one UE uniformly over the rhombus served by `sector` of `site`.
///
/// A single generator drives placement, the indoor flag, the floor draw,
/// indoor depth and velocity, in that order.
pub fn drop_ue<R: Rng + ?Sized>(
    rng: &mut R,
    layout: &NetworkLayout,
    site: &Site,
    sector: usize,
    params: &DropParams,
) -> Result<UeState> {
    params.validate()?;
    let bearing = site.sector_bearings[sector];
    let radius = layout.cell_radius();
    let mut placed = None;
    for _ in 0..params.max_attempts {
        let offset = Vector2::new(
            rng.random_range(-radius..radius),
            rng.random_range(-radius..radius),
        );
        if !layout.in_cell(offset) {
            continue;
        }
        let d = offset.norm();
        if d < params.min_distance || d == 0.0 {
            continue;
        }
        let az = offset.y.atan2(offset.x).to_degrees();
        if wrap_degrees(az - bearing).abs() > 60.0 {
            continue;
        }
        placed = Some(offset);
        break;
    }
    let offset = placed.ok_or_else(|| {
        Error::DegenerateGeometry(format!(
            "no admissible UE position after {} attempts (min distance {} m, cell radius {:.1} m)",
            params.max_attempts, params.min_distance, radius
        ))
    })?;

    let indoor = rng.random::<f64>() < params.indoor_fraction;
    let floors = sample_ue_height(rng, indoor);
    let indoor_depth = if indoor {
        rng.random::<f64>() * params.max_indoor_depth
    } else {
        0.0
    };
    let speed = params.ue_speed_kmh / 3.6;
    let heading = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    Ok(UeState {
        position: Point3::new(
            site.position.x + offset.x,
            site.position.y + offset.y,
            floors.height,
        ),
        indoor,
        floor: floors.floor,
        building_floors: floors.building_floors,
        indoor_depth,
        velocity: Vector3::new(speed * heading.cos(), speed * heading.sin(), 0.0),
    })
}

/// Distances and line-of-sight angles of one (sector, UE) link.
///
/// Azimuths are measured in the sector frame, i.e. relative to the sector
/// boresight bearing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub d_2d: f64,
    pub d_3d: f64,
    pub h_bs: f64,
    pub h_ue: f64,
    pub los_aod: f64,
    pub los_aoa: f64,
    pub los_zod: f64,
    pub los_zoa: f64,
}

pub fn compute_link_geometry(
    enb: &Point3<f64>,
    sector_bearing: f64,
    ue: &Point3<f64>,
) -> Result<LinkGeometry> {
    let delta = ue - enb;
    if !(delta.x.is_finite() && delta.y.is_finite() && delta.z.is_finite()) {
        return Err(Error::Geometry("non-finite position".into()));
    }
    let d_2d = delta.x.hypot(delta.y);
    if d_2d == 0.0 {
        return Err(Error::UndefinedBearing);
    }
    let d_3d = delta.norm();
    let los_zod = d_2d.atan2(delta.z).to_degrees();
    let los_aod = wrap_degrees(delta.y.atan2(delta.x).to_degrees() - sector_bearing);
    Ok(LinkGeometry {
        d_2d,
        d_3d,
        h_bs: enb.z,
        h_ue: ue.z,
        los_aod,
        los_aoa: wrap_degrees(los_aod + 180.0),
        los_zod,
        los_zoa: 180.0 - los_zod,
    })
}
