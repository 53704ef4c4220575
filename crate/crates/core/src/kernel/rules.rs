//! Triangle quadrature rules and singular (Duffy-type) panel-pair rules.
//!
//! Panels are parametrized over the reference triangle
//! `T = {(u, v) : 0 <= v <= u <= 1}` by `x = P0 + u (P1 - P0) + v (P2 - P1)`,
//! with Jacobian `2A`.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};

/// Symmetric rule on a triangle in barycentric form; weights sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleRule {
    pub points: Vec<([f64; 3], f64)>,
    pub degree: usize,
}

fn orbit3(a: f64, b: f64, w: f64, out: &mut Vec<([f64; 3], f64)>) {
    out.push(([a, b, b], w));
    out.push(([b, a, b], w));
    out.push(([b, b, a], w));
}

fn orbit6(a: f64, b: f64, c: f64, w: f64, out: &mut Vec<([f64; 3], f64)>) {
    for p in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
        out.push((p, w));
    }
}

impl TriangleRule {
    /// Centroid rule, degree 1.
    pub fn centroid() -> Self {
        TriangleRule {
            points: vec![([1.0 / 3.0; 3], 1.0)],
            degree: 1,
        }
    }

    /// Dunavant 6-point rule, degree 4.
    pub fn dunavant6() -> Self {
        let mut points = Vec::with_capacity(6);
        orbit3(0.108103018168070, 0.445948490915965, 0.223381589678011, &mut points);
        orbit3(0.816847572980459, 0.091576213509771, 0.109951743655322, &mut points);
        TriangleRule { points, degree: 4 }
    }

    /// Dunavant 16-point rule, degree 8.
    pub fn dunavant16() -> Self {
        let mut points = vec![([1.0 / 3.0; 3], 0.144315607677787)];
        orbit3(0.081414823414554, 0.459292588292723, 0.095091634267285, &mut points);
        orbit3(0.658861384496480, 0.170569307751760, 0.103217370534718, &mut points);
        orbit3(0.898905543365938, 0.050547228317031, 0.032458497623198, &mut points);
        orbit6(
            0.008394777409958,
            0.263112829634638,
            0.728492392955404,
            0.027230314174435,
            &mut points,
        );
        TriangleRule { points, degree: 8 }
    }

    /// Rule by point count; 1, 6 and 16 are available.
    pub fn with_points(n: usize) -> Result<Self> {
        match n {
            1 => Ok(Self::centroid()),
            6 => Ok(Self::dunavant6()),
            16 => Ok(Self::dunavant16()),
            _ => Err(Error::InvalidArgument(format!(
                "no {n}-point triangle rule, expected 1, 6 or 16"
            ))),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Which singular configuration a [`DuffyRule`] integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Singularity {
    /// Both points on the same panel.
    Identical,
    /// Panels share the edge `P0 P1` with matching orientation of the parameter `u`.
    CommonEdge,
    /// Panels share the vertex `P0`.
    CommonVertex,
}

/// Tensor Gauss-Legendre rule on `T x T` after Duffy-type splitting, for
/// integrands with a `1/|x - y|` singularity on the shared set.
///
/// Each node is `(x, y, w)` in reference coordinates; the weights include
/// the splitting Jacobians and sum to `|T|^2 = 1/4`.
#[derive(Debug, Clone, PartialEq)]
pub struct DuffyRule {
    pub kind: Singularity,
    pub order: usize,
    pub nodes: Vec<([f64; 2], [f64; 2], f64)>,
}

impl DuffyRule {
    pub fn new(kind: Singularity, order: usize) -> Result<Self> {
        let n = NonZeroUsize::new(order)
            .filter(|n| n.get() <= 64)
            .ok_or_else(|| Error::InvalidArgument(format!("Duffy order must be in 1..=64, got {order}")))?;
        let gl: Vec<(f64, f64)> = GaussLegendre::new(n)
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
            .collect();

        let mut nodes = Vec::new();
        for &(xi, wxi) in &gl {
            for &(e1, w1) in &gl {
                for &(e2, w2) in &gl {
                    for &(e3, w3) in &gl {
                        let w = wxi * w1 * w2 * w3;
                        push_regions(kind, xi, e1, e2, e3, w, &mut nodes);
                    }
                }
            }
        }
        Ok(DuffyRule { kind, order, nodes })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn push_regions(
    kind: Singularity,
    xi: f64,
    e1: f64,
    e2: f64,
    e3: f64,
    w: f64,
    out: &mut Vec<([f64; 2], [f64; 2], f64)>,
) {
    let mut both = |x: [f64; 2], y: [f64; 2], w: f64| {
        out.push((x, y, w));
        out.push((y, x, w));
    };
    match kind {
        Singularity::Identical => {
            let w = w * xi.powi(3) * e1 * e1 * e2;
            both(
                [xi, xi * (1.0 - e1 + e1 * e2)],
                [xi * (1.0 - e1 * e2 * e3), xi * (1.0 - e1)],
                w,
            );
            both(
                [xi, xi * e1 * (1.0 - e2 + e2 * e3)],
                [xi * (1.0 - e1 * e2), xi * e1 * (1.0 - e2)],
                w,
            );
            both(
                [xi * (1.0 - e1 * e2 * e3), xi * e1 * (1.0 - e2 * e3)],
                [xi, xi * e1 * (1.0 - e2)],
                w,
            );
        }
        Singularity::CommonEdge => {
            let w1 = w * xi.powi(3) * e1 * e1;
            let w2 = w1 * e2;
            out.push((
                [xi, xi * e1 * e3],
                [xi * (1.0 - e1 * e2), xi * e1 * (1.0 - e2)],
                w1,
            ));
            out.push((
                [xi, xi * e1],
                [xi * (1.0 - e1 * e2 * e3), xi * e1 * e2 * (1.0 - e3)],
                w2,
            ));
            out.push((
                [xi * (1.0 - e1 * e2), xi * e1 * (1.0 - e2)],
                [xi, xi * e1 * e2 * e3],
                w2,
            ));
            out.push((
                [xi * (1.0 - e1 * e2 * e3), xi * e1 * e2 * (1.0 - e3)],
                [xi, xi * e1],
                w2,
            ));
            out.push((
                [xi * (1.0 - e1 * e2 * e3), xi * e1 * (1.0 - e2 * e3)],
                [xi, xi * e1 * e2],
                w2,
            ));
        }
        Singularity::CommonVertex => {
            let w = w * xi.powi(3) * e2;
            both([xi, xi * e1], [xi * e2, xi * e2 * e3], w);
        }
    }
}
