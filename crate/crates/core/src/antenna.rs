//! Antenna element patterns, polarization and array geometry.
//!
//! Field patterns are returned as the amplitude components along the
//! spherical basis vectors θ̂ (zenith) and φ̂ (azimuth) of the frame in which
//! the direction is given. [`Orientation`] maps a direction given in a
//! sector frame to the element's own frame (mechanical downtilt) and rotates
//! the resulting field back.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::fastfading::spherical_unit_vector;
use crate::{wrap_degrees, Error, Result};

/// Idealized parabolic sector element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParabolicPattern {
    pub hpbw_az: f64,
    pub hpbw_el: f64,
    pub gain_max_dbi: f64,
    /// Maximum attenuation of each cut and of the combined pattern, dB.
    pub floor_attenuation_db: f64,
}

impl Default for ParabolicPattern {
    fn default() -> Self {
        Self {
            hpbw_az: 65.0,
            hpbw_el: 65.0,
            gain_max_dbi: 8.0,
            floor_attenuation_db: 30.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ElementPattern {
    Isotropic { gain_dbi: f64 },
    Parabolic(ParabolicPattern),
}

impl Default for ElementPattern {
    fn default() -> Self {
        ElementPattern::Parabolic(ParabolicPattern::default())
    }
}

impl ElementPattern {
    pub fn isotropic() -> Self {
        ElementPattern::Isotropic { gain_dbi: 0.0 }
    }

    /// Element gain in dBi at zenith `theta` and azimuth `phi`, both in
    /// degrees in the element frame (boresight at θ = 90°, φ = 0°).
    pub fn gain_db(&self, theta: f64, phi: f64) -> f64 {
        match self {
            ElementPattern::Isotropic { gain_dbi } => *gain_dbi,
            ElementPattern::Parabolic(p) => element_gain_db(theta, phi, p),
        }
    }

    pub fn gain_linear(&self, theta: f64, phi: f64) -> f64 {
        10f64.powf(self.gain_db(theta, phi) / 10.0)
    }
}

pub fn element_gain_db(theta: f64, phi: f64, p: &ParabolicPattern) -> f64 {
    let phi = wrap_degrees(phi);
    let vertical = (12.0 * ((theta - 90.0) / p.hpbw_el).powi(2)).min(p.floor_attenuation_db);
    let horizontal = (12.0 * (phi / p.hpbw_az).powi(2)).min(p.floor_attenuation_db);
    p.gain_max_dbi - (vertical + horizontal).min(p.floor_attenuation_db)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolarizationModel {
    /// Power split between θ̂ and φ̂ fixed by the slant for all directions.
    Constant,
    /// Dipole mechanically rotated by the slant about the boresight axis.
    SlantedDipole,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Polarization {
    pub model: PolarizationModel,
    pub slant_deg: f64,
}

impl Polarization {
    pub fn new(model: PolarizationModel, slant_deg: f64) -> Result<Self> {
        if !(slant_deg > -90.0 && slant_deg <= 90.0) {
            return Err(Error::range("slant_deg", slant_deg, -90.0, 90.0));
        }
        Ok(Self { model, slant_deg })
    }

    pub fn vertical() -> Self {
        Self {
            model: PolarizationModel::Constant,
            slant_deg: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldPattern {
    pub f_theta: f64,
    pub f_phi: f64,
}

impl FieldPattern {
    pub fn power(&self) -> f64 {
        self.f_theta * self.f_theta + self.f_phi * self.f_phi
    }
}

/// Field pattern of one element in its own frame.
///
/// The slanted dipole is a vertical dipole rotated by the slant ζ about the
/// boresight (x) axis: its axis is `(0, -sin ζ, cos ζ)`, and the far field
/// points along the projection of that axis onto the plane transverse to
/// the propagation direction. At boresight the projection is the axis
/// itself, giving `(cos ζ, sin ζ)` like the constant model.
pub fn field_pattern(
    theta: f64,
    phi: f64,
    pattern: &ElementPattern,
    polarization: &Polarization,
) -> FieldPattern {
    let amplitude = pattern.gain_linear(theta, phi).sqrt();
    let zeta = polarization.slant_deg.to_radians();
    let (cos_psi, sin_psi) = match polarization.model {
        PolarizationModel::Constant => (zeta.cos(), zeta.sin()),
        PolarizationModel::SlantedDipole => {
            let (st, ct) = theta.to_radians().sin_cos();
            let (sp, cp) = phi.to_radians().sin_cos();
            let (sz, cz) = zeta.sin_cos();
            let (a, b) = (cz * st + sz * sp * ct, sz * cp);
            // Length of the projected axis; hypot keeps full precision
            // close to the axis where 1 - cos² would cancel.
            let transverse = a.hypot(b);
            if transverse < 1e-12 {
                // Looking straight down the dipole axis: no preferred
                // orientation, fall back to the boresight split.
                (cz, sz)
            } else {
                (a / transverse, b / transverse)
            }
        }
    };
    FieldPattern {
        f_theta: amplitude * cos_psi,
        f_phi: amplitude * sin_psi,
    }
}

/// Orientation of an element frame relative to the frame angles are given
/// in: rotation by `azimuth_deg` about z after a downtilt of `downtilt_deg`
/// (positive tilts the boresight below the horizon).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orientation {
    rotation: Matrix3<f64>,
}

impl Orientation {
    pub fn new(azimuth_deg: f64, downtilt_deg: f64) -> Self {
        let (sa, ca) = azimuth_deg.to_radians().sin_cos();
        let (sb, cb) = downtilt_deg.to_radians().sin_cos();
        let rz = Matrix3::new(ca, -sa, 0.0, sa, ca, 0.0, 0.0, 0.0, 1.0);
        let ry = Matrix3::new(cb, 0.0, sb, 0.0, 1.0, 0.0, -sb, 0.0, cb);
        Self { rotation: rz * ry }
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
        }
    }

    /// Angles (θ, φ) in the element frame of a direction given in the outer
    /// frame.
    pub fn to_local(&self, theta: f64, phi: f64) -> (f64, f64) {
        let local = self.rotation.transpose() * spherical_unit_vector(theta, phi);
        direction_angles(&local)
    }

    /// Maps a vector from the element frame into the outer frame.
    pub fn rotate(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * v
    }

    /// Element gain toward a direction given in the outer frame.
    pub fn gain_db(&self, pattern: &ElementPattern, theta: f64, phi: f64) -> f64 {
        let (lt, lp) = self.to_local(theta, phi);
        pattern.gain_db(lt, lp)
    }

    /// Field pattern toward a direction given in the outer frame, expressed
    /// on the outer frame's θ̂/φ̂ basis.
    pub fn field(
        &self,
        pattern: &ElementPattern,
        polarization: &Polarization,
        theta: f64,
        phi: f64,
    ) -> FieldPattern {
        let (lt, lp) = self.to_local(theta, phi);
        let local = field_pattern(lt, lp, pattern, polarization);
        if self.rotation == Matrix3::identity() {
            return local;
        }
        let (theta_hat_l, phi_hat_l) = spherical_basis(lt, lp);
        let field = self.rotation * (theta_hat_l * local.f_theta + phi_hat_l * local.f_phi);
        let (theta_hat, phi_hat) = spherical_basis(theta, phi);
        FieldPattern {
            f_theta: field.dot(&theta_hat),
            f_phi: field.dot(&phi_hat),
        }
    }
}

fn direction_angles(v: &Vector3<f64>) -> (f64, f64) {
    let theta = v.z.clamp(-1.0, 1.0).acos().to_degrees();
    let phi = v.y.atan2(v.x).to_degrees();
    (theta, phi)
}

fn spherical_basis(theta: f64, phi: f64) -> (Vector3<f64>, Vector3<f64>) {
    let (st, ct) = theta.to_radians().sin_cos();
    let (sp, cp) = phi.to_radians().sin_cos();
    (
        Vector3::new(ct * cp, ct * sp, -st),
        Vector3::new(-sp, cp, 0.0),
    )
}

/// Uniform planar array in the y-z plane (boresight along +x).
///
/// Elements are ordered row-major over (row, column) with the polarizations
/// of one location adjacent: `index = (row * cols + col) * n_pol + pol`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    pub rows: usize,
    pub cols: usize,
    /// Vertical spacing in wavelengths.
    pub dv: f64,
    /// Horizontal spacing in wavelengths.
    pub dh: f64,
    pub wavelength: f64,
    pub pattern: ElementPattern,
    pub polarizations: Vec<Polarization>,
    positions: Vec<Vector3<f64>>,
}

impl ArrayGeometry {
    pub fn planar(
        rows: usize,
        cols: usize,
        dv: f64,
        dh: f64,
        wavelength: f64,
        pattern: ElementPattern,
        polarizations: Vec<Polarization>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 || polarizations.is_empty() {
            return Err(Error::Config(
                "array needs at least one row, column and polarization".into(),
            ));
        }
        if !(wavelength > 0.0) || dv < 0.0 || dh < 0.0 {
            return Err(Error::Config(
                "array spacing and wavelength must be positive".into(),
            ));
        }
        let mut positions = Vec::with_capacity(rows * cols * polarizations.len());
        for row in 0..rows {
            for col in 0..cols {
                let p = Vector3::new(
                    0.0,
                    col as f64 * dh * wavelength,
                    row as f64 * dv * wavelength,
                );
                positions.extend(std::iter::repeat_n(p, polarizations.len()));
            }
        }
        Ok(Self {
            rows,
            cols,
            dv,
            dh,
            wavelength,
            pattern,
            polarizations,
            positions,
        })
    }

    /// Single-polarized elements at arbitrary positions (meters).
    pub fn from_positions(
        positions: Vec<Vector3<f64>>,
        wavelength: f64,
        pattern: ElementPattern,
        polarization: Polarization,
    ) -> Self {
        Self {
            rows: positions.len(),
            cols: 1,
            dv: 0.0,
            dh: 0.0,
            wavelength,
            pattern,
            polarizations: vec![polarization],
            positions,
        }
    }

    pub fn single(pattern: ElementPattern, polarization: Polarization) -> Self {
        Self::from_positions(vec![Vector3::zeros()], 1.0, pattern, polarization)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn element_position(&self, index: usize) -> Result<Vector3<f64>> {
        self.positions
            .get(index)
            .copied()
            .ok_or(Error::IndexOutOfRange {
                index,
                len: self.positions.len(),
            })
    }

    pub fn element_polarization(&self, index: usize) -> Result<Polarization> {
        if index >= self.len() {
            return Err(Error::IndexOutOfRange {
                index,
                len: self.len(),
            });
        }
        Ok(self.polarizations[index % self.polarizations.len()])
    }

    pub fn positions(&self) -> &[Vector3<f64>] {
        &self.positions
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn sector() -> ElementPattern {
        ElementPattern::default()
    }

    #[test]
    fn gain_examples() {
        let p = ParabolicPattern::default();
        assert_abs_diff_eq!(element_gain_db(90.0, 0.0, &p), 8.0);
        assert_abs_diff_eq!(element_gain_db(90.0, 32.5, &p), 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(element_gain_db(122.5, 0.0, &p), 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(element_gain_db(90.0, 180.0, &p), -22.0);
        assert_abs_diff_eq!(element_gain_db(0.0, 180.0, &p), -22.0);
    }

    #[test]
    fn constant_vertical_any_direction() {
        let pol = Polarization::vertical();
        for (t, p) in [(90.0, 0.0), (30.0, 120.0), (170.0, -45.0)] {
            let f = field_pattern(t, p, &sector(), &pol);
            assert_abs_diff_eq!(f.f_phi, 0.0);
            assert_abs_diff_eq!(
                f.f_theta,
                sector().gain_linear(t, p).sqrt(),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn slant_45_boresight_equal_split() {
        for model in [
            PolarizationModel::Constant,
            PolarizationModel::SlantedDipole,
        ] {
            for slant in [45.0, -45.0] {
                let pol = Polarization::new(model, slant).unwrap();
                let f = field_pattern(90.0, 0.0, &sector(), &pol);
                assert!((f.f_theta.abs() - f.f_phi.abs()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn slanted_dipole_split_varies_off_boresight() {
        let pol = Polarization::new(PolarizationModel::SlantedDipole, 45.0).unwrap();
        let f = field_pattern(60.0, 40.0, &sector(), &pol);
        assert!((f.f_theta.abs() - f.f_phi.abs()).abs() > 1e-3);
    }

    #[test]
    fn slant_range() {
        assert!(Polarization::new(PolarizationModel::Constant, -90.0).is_err());
        assert!(Polarization::new(PolarizationModel::Constant, 90.0).is_ok());
    }

    #[test]
    fn downtilt_moves_boresight() {
        let o = Orientation::new(0.0, 12.0);
        assert_abs_diff_eq!(o.gain_db(&sector(), 102.0, 0.0), 8.0, epsilon = 1e-9);
        assert!(o.gain_db(&sector(), 90.0, 0.0) < 8.0);
        let (t, p) = o.to_local(102.0, 0.0);
        assert_abs_diff_eq!(t, 90.0, epsilon = 1e-9);
        assert_abs_diff_eq!(p, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn element_positions() {
        let single = ArrayGeometry::single(sector(), Polarization::vertical());
        assert_eq!(single.element_position(0).unwrap(), Vector3::zeros());
        assert!(matches!(
            single.element_position(1),
            Err(Error::IndexOutOfRange { index: 1, len: 1 })
        ));

        let a = ArrayGeometry::planar(
            2,
            1,
            0.5,
            0.5,
            0.15,
            sector(),
            vec![Polarization::vertical()],
        )
        .unwrap();
        let d = a.element_position(1).unwrap() - a.element_position(0).unwrap();
        assert_abs_diff_eq!(d.z, 0.075, epsilon = 1e-15);
        assert_abs_diff_eq!(d.y, 0.0);

        let xpol = vec![
            Polarization::new(PolarizationModel::SlantedDipole, 45.0).unwrap(),
            Polarization::new(PolarizationModel::SlantedDipole, -45.0).unwrap(),
        ];
        let big = ArrayGeometry::planar(8, 4, 0.8, 0.5, 0.15, sector(), xpol).unwrap();
        assert_eq!(big.len(), 64);
        let mut distinct: Vec<[i64; 3]> = big
            .positions()
            .iter()
            .map(|p| [p.x, p.y, p.z].map(|c| (c * 1e9).round() as i64))
            .collect();
        distinct.sort();
        distinct.dedup();
        assert_eq!(distinct.len(), 32);
        for i in (0..64).step_by(2) {
            assert_eq!(
                big.element_position(i).unwrap(),
                big.element_position(i + 1).unwrap()
            );
            assert_eq!(big.element_polarization(i + 1).unwrap().slant_deg, -45.0);
        }
    }

    proptest! {
        #[test]
        fn power_conservation(
            theta in 0.0f64..=180.0, phi in -180.0f64..180.0,
            slant in -89.0f64..=90.0, tilt in -20.0f64..20.0,
            dipole in any::<bool>(),
        ) {
            let model = if dipole { PolarizationModel::SlantedDipole } else { PolarizationModel::Constant };
            let pol = Polarization::new(model, slant).unwrap();
            let f = field_pattern(theta, phi, &sector(), &pol);
            let g = sector().gain_linear(theta, phi);
            prop_assert!((f.power() - g).abs() <= 1e-10 * g);

            let o = Orientation::new(0.0, tilt);
            let fg = o.field(&sector(), &pol, theta, phi);
            let gg = 10f64.powf(o.gain_db(&sector(), theta, phi) / 10.0);
            prop_assert!((fg.power() - gg).abs() <= 1e-10 * gg);
        }

        #[test]
        fn gain_symmetry(x in 0.0f64..90.0, phi in -180.0f64..180.0) {
            let p = ParabolicPattern::default();
            let g = element_gain_db(90.0 + x, phi, &p);
            prop_assert!((g - element_gain_db(90.0 - x, phi, &p)).abs() < 1e-9);
            prop_assert!((g - element_gain_db(90.0 + x, -phi, &p)).abs() < 1e-9);
        }

        #[test]
        fn models_coincide_at_boresight(slant in -89.0f64..=90.0) {
            let c = field_pattern(90.0, 0.0, &sector(), &Polarization::new(PolarizationModel::Constant, slant).unwrap());
            let d = field_pattern(90.0, 0.0, &sector(), &Polarization::new(PolarizationModel::SlantedDipole, slant).unwrap());
            prop_assert!((c.f_theta - d.f_theta).abs() < 1e-12 && (c.f_phi - d.f_phi).abs() < 1e-12);
        }
    }
}
