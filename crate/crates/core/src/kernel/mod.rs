//! Imaginary-frequency Green's function and Galerkin panel-pair integrals.

mod integrate;
mod oracle;
mod rules;

use crate::error::{Error, Result};
use crate::meshio::{Panel, Vec3};

pub use integrate::{
    pair_moments, rwg_pair_integral, slot_block, PairMoments, PanelRules, SlotCoefficients, SurfaceData,
};
pub use oracle::{reference_moments, OracleRule};
pub use rules::{DuffyRule, Singularity, TriangleRule};

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// Screened scalar Green's function `exp(-κr) / (4π r)`.
pub fn scalar_green(kappa: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("Green's function needs r > 0, got {r}")));
    }
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(Error::Domain(format!("Green's function needs κ >= 0, got {kappa}")));
    }
    Ok(green(kappa, r))
}

/// Derivative of `g(|x - xp|)` when `x` moves along `+z`.
pub fn scalar_green_dz(kappa: f64, x: &Vec3, xp: &Vec3) -> Result<f64> {
    scalar_green_directional(kappa, x, xp, &Vec3::z())
}

/// Derivative of `g(|x - xp|)` when `x` moves along the unit vector `direction`.
pub fn scalar_green_directional(kappa: f64, x: &Vec3, xp: &Vec3, direction: &Vec3) -> Result<f64> {
    let d = x - xp;
    let r = d.norm();
    scalar_green(kappa, r)?;
    Ok(green_derivative(kappa, &d, direction))
}

#[inline]
pub(crate) fn green(kappa: f64, r: f64) -> f64 {
    (-kappa * r).exp() / (FOUR_PI * r)
}

#[inline]
pub(crate) fn green_derivative(kappa: f64, d: &Vec3, direction: &Vec3) -> f64 {
    let r = d.norm();
    -d.dot(direction) / r * (kappa + 1.0 / r) * green(kappa, r)
}

/// Integration kernel of a matrix entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    /// `g(|x - y|)`.
    Value { kappa: f64 },
    /// `∂/∂δ g(|x + δe - y|)` at `δ = 0`.
    Derivative { kappa: f64, direction: Vec3 },
}

impl Kernel {
    pub fn kappa(&self) -> f64 {
        match *self {
            Kernel::Value { kappa } | Kernel::Derivative { kappa, .. } => kappa,
        }
    }

    /// Kernel at separation `d = x - y`.
    #[inline]
    pub fn eval(&self, d: &Vec3) -> f64 {
        match self {
            Kernel::Value { kappa } => green(*kappa, d.norm()),
            Kernel::Derivative { kappa, direction } => green_derivative(*kappa, d, direction),
        }
    }
}

/// How a panel pair is integrated.
///
/// For the singular classes the arrays give the local vertex order
/// `(P0, P1, P2)` of each panel expected by the matching [`DuffyRule`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PanelPairClass {
    SelfPanel,
    CommonEdge { a: [usize; 3], b: [usize; 3] },
    CommonVertex { a: [usize; 3], b: [usize; 3] },
    Near,
    Far,
}

/// Centroid distance below this multiple of the larger diameter is Near.
pub const NEAR_FACTOR: f64 = 3.0;

/// Classify a panel pair. Shared vertices only count within one object.
pub fn classify_pair(a: &Panel, b: &Panel, same_object: bool) -> PanelPairClass {
    if same_object {
        if a.vertices == b.vertices {
            return PanelPairClass::SelfPanel;
        }
        let in_b = a.vertices.map(|v| b.vertices.iter().position(|&w| w == v));
        let shared = in_b.iter().filter(|p| p.is_some()).count();
        match shared {
            3 => return PanelPairClass::SelfPanel,
            2 => {
                let free = in_b.iter().position(|p| p.is_none()).unwrap();
                let a_order = [(free + 1) % 3, (free + 2) % 3, free];
                let b0 = in_b[a_order[0]].unwrap();
                let b1 = in_b[a_order[1]].unwrap();
                return PanelPairClass::CommonEdge {
                    a: a_order,
                    b: [b0, b1, 3 - b0 - b1],
                };
            }
            1 => {
                let k = in_b.iter().position(|p| p.is_some()).unwrap();
                let m = in_b[k].unwrap();
                return PanelPairClass::CommonVertex {
                    a: [k, (k + 1) % 3, (k + 2) % 3],
                    b: [m, (m + 1) % 3, (m + 2) % 3],
                };
            }
            _ => {}
        }
    }
    let distance = (a.centroid - b.centroid).norm();
    if distance < NEAR_FACTOR * a.diameter.max(b.diameter) {
        PanelPairClass::Near
    } else {
        PanelPairClass::Far
    }
}
