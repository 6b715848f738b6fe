//! Array geometry, waveguide propagation gains and far-field steering vectors.
//!
//! The array lies in the y-z plane. Elements of one waveguide run along y,
//! waveguides are stacked along z. Element `(i, j)` (both 0-based) sits at
//! `(0, (j + 1)·ρ_e, i·ρ_w)` and is fed from a port one element spacing
//! before the first radiator, so its feed distance is `(j + 1)·ρ_e > 0`.
//!
//! Global element index is `i·N_u + j`, i.e. waveguide-major, so that the
//! block partition of the DMA matrix is a contiguous range per waveguide.

use std::f64::consts::PI;
use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Attenuation coefficient ν of the DMA waveguide, in 1/m.
pub const DEFAULT_ATTENUATION_PER_METER: f64 = 0.6;
/// Guided wavenumber ϖ of the DMA waveguide, in rad/m.
pub const DEFAULT_WAVENUMBER_PER_METER: f64 = 827.67;

/// Waveguide partition of an array: `n_waveguides` blocks of
/// `elements_per_waveguide` consecutive elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockLayout {
    pub n_waveguides: usize,
    pub elements_per_waveguide: usize,
}

impl BlockLayout {
    pub fn new(n_waveguides: usize, elements_per_waveguide: usize) -> Result<Self> {
        if n_waveguides == 0 || elements_per_waveguide == 0 {
            return Err(Error::InvalidConfig(format!(
                "array dimensions must be positive, got {n_waveguides}x{elements_per_waveguide}"
            )));
        }
        Ok(Self {
            n_waveguides,
            elements_per_waveguide,
        })
    }

    pub fn n_elements(&self) -> usize {
        self.n_waveguides * self.elements_per_waveguide
    }

    pub fn global_index(&self, waveguide: usize, element: usize) -> usize {
        waveguide * self.elements_per_waveguide + element
    }

    pub fn waveguide_of(&self, index: usize) -> usize {
        index / self.elements_per_waveguide
    }

    /// Element range of waveguide `i`.
    pub fn block(&self, waveguide: usize) -> Range<usize> {
        let start = waveguide * self.elements_per_waveguide;
        start..start + self.elements_per_waveguide
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub n_waveguides: usize,
    pub elements_per_waveguide: usize,
    pub waveguide_spacing: f64,
    pub element_spacing: f64,
    pub wavelength: f64,
    pub positions: Vec<[f64; 3]>,
    pub feed_distances: Vec<f64>,
}

impl ArrayGeometry {
    /// Rectangular grid of `rows × cols` elements with the given spacings.
    pub fn planar(
        rows: usize,
        cols: usize,
        row_spacing: f64,
        element_spacing: f64,
        wavelength: f64,
    ) -> Result<Self> {
        let layout = BlockLayout::new(rows, cols)?;
        if !(row_spacing > 0.0 && element_spacing > 0.0 && wavelength > 0.0) {
            return Err(Error::InvalidConfig(
                "spacings and wavelength must be positive".into(),
            ));
        }
        let mut positions = Vec::with_capacity(layout.n_elements());
        let mut feed_distances = Vec::with_capacity(layout.n_elements());
        for i in 0..rows {
            for j in 0..cols {
                let d = (j + 1) as f64 * element_spacing;
                positions.push([0.0, d, i as f64 * row_spacing]);
                feed_distances.push(d);
            }
        }
        Ok(Self {
            n_waveguides: rows,
            elements_per_waveguide: cols,
            waveguide_spacing: row_spacing,
            element_spacing,
            wavelength,
            positions,
            feed_distances,
        })
    }

    pub fn layout(&self) -> BlockLayout {
        BlockLayout {
            n_waveguides: self.n_waveguides,
            elements_per_waveguide: self.elements_per_waveguide,
        }
    }

    pub fn n_elements(&self) -> usize {
        self.positions.len()
    }

    pub fn position(&self, waveguide: usize, element: usize) -> [f64; 3] {
        self.positions[self.layout().global_index(waveguide, element)]
    }

    pub fn feed_distance(&self, waveguide: usize, element: usize) -> f64 {
        self.feed_distances[self.layout().global_index(waveguide, element)]
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Physical extent along the waveguide axis, first to last element.
    pub fn aperture_along_waveguide(&self) -> f64 {
        (self.elements_per_waveguide - 1) as f64 * self.element_spacing
    }
}

pub fn wavelength(carrier_frequency_hz: f64) -> f64 {
    SPEED_OF_LIGHT / carrier_frequency_hz
}

/// DMA layout: waveguides `λ/2` apart, radiators `λ/5` apart along each waveguide.
pub fn build_dma_geometry(
    n_waveguides: usize,
    elements_per_waveguide: usize,
    carrier_frequency_hz: f64,
) -> Result<ArrayGeometry> {
    if !(carrier_frequency_hz > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "carrier frequency must be positive, got {carrier_frequency_hz}"
        )));
    }
    let lambda = wavelength(carrier_frequency_hz);
    ArrayGeometry::planar(
        n_waveguides,
        elements_per_waveguide,
        lambda / 2.0,
        lambda / 5.0,
        lambda,
    )
}

/// `q_j = exp(-d_j (ν + iϖ))`.
pub fn propagation_gains(
    geometry: &ArrayGeometry,
    attenuation_per_meter: f64,
    wavenumber_per_meter: f64,
) -> Result<Vec<Complex64>> {
    if !(attenuation_per_meter > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "attenuation must be positive, got {attenuation_per_meter}"
        )));
    }
    Ok(geometry
        .feed_distances
        .iter()
        .map(|&d| {
            Complex64::from_polar(
                (-d * attenuation_per_meter).exp(),
                -d * wavenumber_per_meter,
            )
        })
        .collect())
}

/// Azimuth θ and elevation φ of a far-field direction, in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetDirection {
    pub azimuth: f64,
    pub elevation: f64,
}

impl TargetDirection {
    pub const BROADSIDE: TargetDirection = TargetDirection {
        azimuth: 0.0,
        elevation: PI / 2.0,
    };

    pub fn new(azimuth: f64, elevation: f64) -> Self {
        Self { azimuth, elevation }
    }

    /// `(sinφ cosθ, sinφ sinθ, cosφ)`
    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = self.azimuth.sin_cos();
        let (sp, cp) = self.elevation.sin_cos();
        [sp * ct, sp * st, cp]
    }
}

pub fn steering_vector(geometry: &ArrayGeometry, direction: TargetDirection) -> Vec<Complex64> {
    let u = direction.unit_vector();
    let k = geometry.wavenumber();
    geometry
        .positions
        .iter()
        .map(|p| Complex64::from_polar(1.0, k * (p[0] * u[0] + p[1] * u[1] + p[2] * u[2])))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const FC: f64 = 28e9;

    #[test]
    fn paper_geometry_dimensions() {
        let g = build_dma_geometry(8, 16, FC).unwrap();
        assert_eq!(g.n_elements(), 128);
        assert!((g.wavelength - 0.0107).abs() < 1e-4);
        assert!((g.waveguide_spacing - 5.35e-3).abs() < 1e-5);
        assert!((g.element_spacing - 2.14e-3).abs() < 1e-5);
    }

    #[test]
    fn single_element() {
        let g = build_dma_geometry(1, 1, FC).unwrap();
        let rho = g.wavelength / 5.0;
        assert_eq!(g.positions, vec![[0.0, rho, 0.0]]);
        assert_eq!(g.feed_distances, vec![rho]);
    }

    #[test]
    fn index_order_is_waveguide_major() {
        let g = build_dma_geometry(2, 2, FC).unwrap();
        let rho = g.element_spacing;
        assert_eq!(g.feed_distances, vec![rho, 2.0 * rho, rho, 2.0 * rho]);
        assert_eq!(g.positions[2], [0.0, rho, g.waveguide_spacing]);
        for i in 0..2 {
            for j in 0..2 {
                let k = g.layout().global_index(i, j);
                assert_eq!(g.position(i, j), g.positions[k]);
                assert_eq!(g.feed_distance(i, j), g.feed_distances[k]);
                assert_eq!(g.layout().waveguide_of(k), i);
            }
        }
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(build_dma_geometry(0, 4, FC).is_err());
        assert!(build_dma_geometry(4, 0, FC).is_err());
        assert!(build_dma_geometry(4, 4, 0.0).is_err());
        assert!(build_dma_geometry(4, 4, -1.0).is_err());
    }

    #[test]
    fn gain_of_first_element() {
        let g = build_dma_geometry(1, 1, FC).unwrap();
        let q = propagation_gains(&g, 0.6, 827.67).unwrap()[0];
        let d = g.wavelength / 5.0;
        assert!((q.norm() - (-0.6 * d).exp()).abs() < 1e-15);
        assert!((q.norm() - 0.99872).abs() < 1e-5);
        // -ϖ·d = -1.77236 for λ = c/28 GHz; rounding λ to 1.07 cm gives -1.7712
        let phase = q.arg();
        assert!((phase - (-827.67 * d)).abs() < 1e-12);
        assert!((phase - (-1.7712)).abs() < 2e-3);
    }

    #[test]
    fn gains_compose_and_vanish() {
        let g = build_dma_geometry(1, 2, FC).unwrap();
        let q = propagation_gains(&g, 0.6, 827.67).unwrap();
        assert!((q[1] - q[0] * q[0]).norm() < 1e-14);
        let q = propagation_gains(&g, 1e6, 827.67).unwrap();
        assert!(q.iter().all(|x| x.norm() < 1e-100));
        assert!(propagation_gains(&g, 0.0, 827.67).is_err());
    }

    #[test]
    fn gains_strictly_inside_unit_disc() {
        let g = build_dma_geometry(8, 48, FC).unwrap();
        let q = propagation_gains(&g, 0.6, 827.67).unwrap();
        assert!(q.iter().all(|x| x.norm() > 0.0 && x.norm() < 1.0));
    }

    #[test]
    fn broadside_is_all_ones() {
        let g = build_dma_geometry(8, 16, FC).unwrap();
        let a = steering_vector(&g, TargetDirection::BROADSIDE);
        assert!(a
            .iter()
            .all(|x| (x - Complex64::new(1.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn endfire_phase_step_along_waveguide() {
        let g = build_dma_geometry(1, 2, FC).unwrap();
        let a = steering_vector(&g, TargetDirection::new(PI / 2.0, PI / 2.0));
        let step = (a[1] * a[0].conj()).arg();
        let expected = 2.0 * PI * g.element_spacing / g.wavelength;
        assert!((step - expected).abs() < 1e-12);
    }

    #[test]
    fn steering_norm_is_element_count() {
        let g = build_dma_geometry(4, 7, FC).unwrap();
        for k in 0..20 {
            let dir = TargetDirection::new(-1.0 + 0.1 * k as f64, 0.3 + 0.12 * k as f64);
            let a = steering_vector(&g, dir);
            let n2: f64 = a.iter().map(|x| x.norm_sqr()).sum();
            assert!((n2 - 28.0).abs() < 1e-12);
            assert!(a.iter().all(|x| (x.norm() - 1.0).abs() < 1e-14));
        }
    }
}
