use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ArrayGeometry;
use crate::model::HardwareCounts;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ArchitectureKind {
    TriHybrid,
    FdSn,
    FdSa,
    HbfSn,
    HbfSa,
}

impl ArchitectureKind {
    pub const ALL: [ArchitectureKind; 5] = [
        ArchitectureKind::TriHybrid,
        ArchitectureKind::FdSn,
        ArchitectureKind::FdSa,
        ArchitectureKind::HbfSn,
        ArchitectureKind::HbfSa,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ArchitectureKind::TriHybrid => "TRI_HYBRID",
            ArchitectureKind::FdSn => "FD_SN",
            ArchitectureKind::FdSa => "FD_SA",
            ArchitectureKind::HbfSn => "HBF_SN",
            ArchitectureKind::HbfSa => "HBF_SA",
        }
    }

    pub fn is_fully_digital(&self) -> bool {
        matches!(self, ArchitectureKind::FdSn | ArchitectureKind::FdSa)
    }

    pub fn is_hybrid(&self) -> bool {
        matches!(self, ArchitectureKind::HbfSn | ArchitectureKind::HbfSa)
    }

    fn same_aperture(&self) -> bool {
        matches!(self, ArchitectureKind::FdSa | ArchitectureKind::HbfSa)
    }
}

impl fmt::Display for ArchitectureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ArchitectureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown architecture {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArchitectureDescriptor {
    pub kind: ArchitectureKind,
    pub n_antennas: usize,
    pub element_spacing: f64,
    pub counts: HardwareCounts,
}

/// Same-aperture column count: the DMA waveguide length at `λ/5` spacing
/// re-sampled at `λ/2`, i.e. `round(2 N_u / 5)` (half up), at least one.
fn same_aperture_columns(elements_per_waveguide: usize) -> usize {
    ((4 * elements_per_waveguide + 5) / 10).max(1)
}

/// Array and hardware inventory of `kind`, derived from the DMA geometry.
pub fn build_architecture(
    kind: ArchitectureKind,
    base: &ArrayGeometry,
) -> Result<(ArrayGeometry, ArchitectureDescriptor)> {
    let half = base.wavelength / 2.0;
    let geometry = match kind {
        ArchitectureKind::TriHybrid => base.clone(),
        _ => {
            let cols = if kind.same_aperture() {
                same_aperture_columns(base.elements_per_waveguide)
            } else {
                base.elements_per_waveguide
            };
            ArrayGeometry::planar(base.n_waveguides, cols, half, half, base.wavelength)?
        }
    };
    let n = geometry.n_elements();
    let counts = match kind {
        ArchitectureKind::TriHybrid => HardwareCounts {
            rf_chains: 1,
            phase_shifters: base.n_waveguides,
            dma_elements: n,
        },
        ArchitectureKind::FdSn | ArchitectureKind::FdSa => HardwareCounts {
            rf_chains: n,
            phase_shifters: 0,
            dma_elements: 0,
        },
        ArchitectureKind::HbfSn | ArchitectureKind::HbfSa => HardwareCounts {
            rf_chains: 1,
            phase_shifters: n,
            dma_elements: 0,
        },
    };
    let descriptor = ArchitectureDescriptor {
        kind,
        n_antennas: n,
        element_spacing: geometry.element_spacing,
        counts,
    };
    Ok((geometry, descriptor))
}
