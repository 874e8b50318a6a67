//! Channel coefficients per receive element, transmit element, cluster and
//! time sample.

use std::f64::consts::TAU;

use nalgebra::Vector3;
use num_complex::Complex64;

use super::clusters::ClusterSet;
use crate::antenna::{ArrayGeometry, FieldPattern, Orientation, Polarization};
use crate::{Error, Result};

/// Unit vector for zenith `theta` and azimuth `phi`, degrees.
pub fn spherical_unit_vector(theta: f64, phi: f64) -> Vector3<f64> {
    let (st, ct) = theta.to_radians().sin_cos();
    let (sp, cp) = phi.to_radians().sin_cos();
    Vector3::new(st * cp, st * sp, ct)
}

/// Doppler shift (Hz) of a ray arriving from `direction` at a receiver moving
/// with `velocity` (m/s).
pub fn doppler_frequency(
    direction: &Vector3<f64>,
    velocity: &Vector3<f64>,
    wavelength: f64,
) -> f64 {
    direction.dot(velocity) / wavelength
}

/// One end of the link.
#[derive(Debug, Clone, Copy)]
pub struct Endpoint<'a> {
    pub array: &'a ArrayGeometry,
    pub orientation: Orientation,
    /// m/s, same frame as the ray angles.
    pub velocity: Vector3<f64>,
}

impl<'a> Endpoint<'a> {
    pub fn fixed(array: &'a ArrayGeometry, orientation: Orientation) -> Self {
        Self {
            array,
            orientation,
            velocity: Vector3::zeros(),
        }
    }
}

/// Coefficients `H[u][s][n][t]` stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTensor {
    pub n_rx: usize,
    pub n_tx: usize,
    pub n_paths: usize,
    pub times: Vec<f64>,
    pub delays: Vec<f64>,
    pub wavelength: f64,
    data: Vec<Complex64>,
}

impl ChannelTensor {
    fn index(&self, u: usize, s: usize, n: usize, t: usize) -> usize {
        ((u * self.n_tx + s) * self.n_paths + n) * self.times.len() + t
    }

    pub fn get(&self, u: usize, s: usize, n: usize, t: usize) -> Result<Complex64> {
        let dims = [
            (u, self.n_rx),
            (s, self.n_tx),
            (n, self.n_paths),
            (t, self.times.len()),
        ];
        for (index, len) in dims {
            if index >= len {
                return Err(Error::IndexOutOfRange { index, len });
            }
        }
        Ok(self.data[self.index(u, s, n, t)])
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Sum of |H|² over paths for one element pair and time sample.
    pub fn power(&self, u: usize, s: usize, t: usize) -> f64 {
        (0..self.n_paths)
            .map(|n| self.data[self.index(u, s, n, t)].norm_sqr())
            .sum()
    }
}

fn element_field(
    end: &Endpoint<'_>,
    pol: &Polarization,
    polarized: bool,
    theta: f64,
    phi: f64,
) -> FieldPattern {
    if polarized {
        end.orientation.field(&end.array.pattern, pol, theta, phi)
    } else {
        FieldPattern {
            f_theta: 10f64
                .powf(end.orientation.gain_db(&end.array.pattern, theta, phi) / 10.0)
                .sqrt(),
            f_phi: 0.0,
        }
    }
}

fn array_phase(
    end: &Endpoint<'_>,
    element: usize,
    direction: &Vector3<f64>,
    wavelength: f64,
) -> Complex64 {
    let d = end.orientation.rotate(&end.array.positions()[element]);
    Complex64::from_polar(1.0, TAU * direction.dot(&d) / wavelength)
}

struct Direction {
    rx: Vector3<f64>,
    rx_angles: (f64, f64),
    tx: Vector3<f64>,
    tx_angles: (f64, f64),
}

impl Direction {
    fn new(zoa: f64, aoa: f64, zod: f64, aod: f64) -> Self {
        Self {
            rx: spherical_unit_vector(zoa, aoa),
            rx_angles: (zoa, aoa),
            tx: spherical_unit_vector(zod, aod),
            tx_angles: (zod, aod),
        }
    }
}

/// Evaluates the coefficient tensor of a cluster set.
///
/// Polarized mode applies the 2×2 polarization matrix with random initial
/// phases and XPR; unpolarized mode keeps only the θθ phase and uses the
/// element amplitude pattern. LOS sets add the direct ray to the first
/// path, weighted by K/(K+1), with the scattered part scaled by 1/(K+1).
pub fn channel_coefficient(
    set: &ClusterSet,
    tx: &Endpoint<'_>,
    rx: &Endpoint<'_>,
    wavelength: f64,
    times: &[f64],
    polarized: bool,
) -> Result<ChannelTensor> {
    if tx.array.is_empty() || rx.array.is_empty() {
        return Err(Error::DimensionMismatch(
            "antenna array without elements".into(),
        ));
    }
    if times.is_empty() {
        return Err(Error::DimensionMismatch("no time samples requested".into()));
    }
    if set.clusters.is_empty() {
        return Err(Error::EmptyInput("clusters"));
    }
    if let Some(n) = set.clusters.iter().position(|c| c.rays.is_empty()) {
        return Err(Error::DimensionMismatch(format!("cluster {n} has no rays")));
    }
    if !(wavelength > 0.0) {
        return Err(Error::range("wavelength", wavelength, 0.0, f64::INFINITY));
    }
    let (n_rx, n_tx, n_paths, n_t) = (
        rx.array.len(),
        tx.array.len(),
        set.clusters.len(),
        times.len(),
    );
    let rx_pols: Vec<Polarization> = (0..n_rx)
        .map(|u| rx.array.element_polarization(u))
        .collect::<Result<_>>()?;
    let tx_pols: Vec<Polarization> = (0..n_tx)
        .map(|s| tx.array.element_polarization(s))
        .collect::<Result<_>>()?;
    let k = set.los.map_or(0.0, |l| l.k_factor);
    let scatter_scale = (1.0 / (k + 1.0)).sqrt();

    let mut tensor = ChannelTensor {
        n_rx,
        n_tx,
        n_paths,
        times: times.to_vec(),
        delays: set.clusters.iter().map(|c| c.delay).collect(),
        wavelength,
        data: vec![Complex64::new(0.0, 0.0); n_rx * n_tx * n_paths * n_t],
    };

    let j = Complex64::i();
    for (n, cluster) in set.clusters.iter().enumerate() {
        let amp = scatter_scale * (cluster.power / cluster.rays.len() as f64).sqrt();
        for ray in &cluster.rays {
            let dir = Direction::new(ray.zoa, ray.aoa, ray.zod, ray.aod);
            let nu = doppler_frequency(&dir.rx, &rx.velocity, wavelength);
            let x = ray.xpr.powf(-0.5);
            let [p_tt, p_tp, p_pt, p_pp] = ray.phases.map(|p| (j * p).exp());
            let rx_fields: Vec<_> = rx_pols
                .iter()
                .map(|p| element_field(rx, p, polarized, dir.rx_angles.0, dir.rx_angles.1))
                .collect();
            let tx_fields: Vec<_> = tx_pols
                .iter()
                .map(|p| element_field(tx, p, polarized, dir.tx_angles.0, dir.tx_angles.1))
                .collect();
            for u in 0..n_rx {
                let fr = rx_fields[u];
                let a_rx = array_phase(rx, u, &dir.rx, wavelength);
                for s in 0..n_tx {
                    let ft = tx_fields[s];
                    let pol = if polarized {
                        fr.f_theta * (p_tt * ft.f_theta + x * p_tp * ft.f_phi)
                            + fr.f_phi * (x * p_pt * ft.f_theta + p_pp * ft.f_phi)
                    } else {
                        p_tt * fr.f_theta * ft.f_theta
                    };
                    let base = amp * pol * a_rx * array_phase(tx, s, &dir.tx, wavelength);
                    let start = tensor.index(u, s, n, 0);
                    for (t, time) in times.iter().enumerate() {
                        tensor.data[start + t] += base * (j * TAU * nu * time).exp();
                    }
                }
            }
        }
    }

    if let Some(los) = set.los {
        let dir = Direction::new(los.zoa, los.aoa, los.zod, los.aod);
        let nu = doppler_frequency(&dir.rx, &rx.velocity, wavelength);
        let amp = (k / (k + 1.0)).sqrt();
        let path_phase = (-j * TAU * los.distance / wavelength).exp();
        for u in 0..n_rx {
            let fr = element_field(rx, &rx_pols[u], polarized, dir.rx_angles.0, dir.rx_angles.1);
            let a_rx = array_phase(rx, u, &dir.rx, wavelength);
            for s in 0..n_tx {
                let ft =
                    element_field(tx, &tx_pols[s], polarized, dir.tx_angles.0, dir.tx_angles.1);
                let pol = fr.f_theta * ft.f_theta - fr.f_phi * ft.f_phi;
                let base = amp * pol * path_phase * a_rx * array_phase(tx, s, &dir.tx, wavelength);
                let start = tensor.index(u, s, 0, 0);
                for (t, time) in times.iter().enumerate() {
                    tensor.data[start + t] += base * (j * TAU * nu * time).exp();
                }
            }
        }
    }
    Ok(tensor)
}
