//! Independent reference values used by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use nalgebra::{Matrix3, Matrix6, Vector3};

/// Composite Gauss-Legendre over `[a, b]` split into `pieces`.
pub fn integrate(a: f64, b: f64, pieces: usize, f: impl Fn(f64) -> f64) -> f64 {
    let rule = GaussLegendre::new(NonZeroUsize::new(12).unwrap());
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let lo = a + h * i as f64;
            rule.integrate(lo, lo + h, &f)
        })
        .sum()
}

/// Electric and magnetic dipole polarizabilities of a perfectly conducting
/// sphere at imaginary wavenumber `kappa`, from the `l = 1` Mie coefficients.
pub fn sphere_polarizabilities(radius: f64, kappa: f64) -> (f64, f64) {
    let y = kappa * radius;
    let r3 = radius.powi(3);
    if y < 1e-2 {
        let (y2, y4) = (y * y, y.powi(4));
        let electric = 1.5 * (2.0 / 3.0 + 2.0 / 15.0 * y2 + y4 / 140.0) * y.exp() / (1.0 + y + y2) * r3;
        let magnetic = -1.5 * (1.0 / 3.0 + y2 / 30.0 + y4 / 840.0) * y.exp() / (1.0 + y) * r3;
        return (electric, magnetic);
    }
    let (s, c) = (y.sinh(), y.cosh());
    let pre = 1.5 / y.powi(3) * r3;
    let electric = pre * y.exp() * (y * y * s + s - y * c) / (1.0 + y + y * y);
    let magnetic = -pre * y.exp() * (y * c - s) / (1.0 + y);
    (electric, magnetic)
}

fn cross_matrix(n: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -n.z, n.y, n.z, 0.0, -n.x, -n.y, n.x, 0.0)
}

/// Fields `(E, B)` at `r` produced by dipoles `(p, m)` at the origin.
fn dipole_coupling(r: &Vector3<f64>, kappa: f64) -> Matrix6<f64> {
    let d = r.norm();
    let n = r / d;
    let nn = n * n.transpose();
    let id = Matrix3::identity();
    let decay = (-kappa * d).exp();
    let kr = kappa * d;
    let direct = ((3.0 * nn - id) * (1.0 + kr) - (id - nn) * kr * kr) * decay / d.powi(3);
    let mixed = cross_matrix(&n) * (kappa * (1.0 + kr) * decay / (d * d));
    let mut g = Matrix6::zeros();
    g.fixed_view_mut::<3, 3>(0, 0).copy_from(&direct);
    g.fixed_view_mut::<3, 3>(3, 3).copy_from(&direct);
    g.fixed_view_mut::<3, 3>(3, 0).copy_from(&(-mixed));
    g.fixed_view_mut::<3, 3>(0, 3).copy_from(&mixed);
    g
}

/// `log det(1 - A₂ G₂₁ A₁ G₁₂)` for two dipole scatterers `center` apart.
pub fn dipole_logdet(polarizabilities: impl Fn(f64) -> (f64, f64), center: f64, kappa: f64) -> f64 {
    let (e, m) = polarizabilities(kappa);
    let a = Matrix6::from_diagonal(&nalgebra::Vector6::new(e, e, e, m, m, m));
    let r = Vector3::new(0.0, 0.0, center);
    let round_trip = a * dipole_coupling(&(-r), kappa) * a * dipole_coupling(&r, kappa);
    let size = round_trip.abs().max();
    if size < 1e-3 {
        let mut power = round_trip;
        let mut total = 0.0;
        for j in 1..=8 {
            total -= power.trace() / j as f64;
            power *= round_trip;
        }
        return total;
    }
    (Matrix6::identity() - round_trip).determinant().ln()
}

/// Dipole-order (`l_max = 1`) Casimir energy of two spheres of radius
/// `radius` with centers `center` apart.
pub fn dipole_sphere_energy(radius: f64, center: f64) -> f64 {
    let top = 60.0 / center;
    integrate(0.0, top, 600, |k| dipole_logdet(|kk| sphere_polarizabilities(radius, kk), center, k)) / (2.0 * PI)
}

/// Same interaction with frequency-independent static polarizabilities.
pub fn static_dipole_energy(radius: f64, center: f64) -> f64 {
    let r3 = radius.powi(3);
    let top = 60.0 / center;
    integrate(0.0, top, 600, |k| dipole_logdet(|_| (r3, -0.5 * r3), center, k)) / (2.0 * PI)
}

/// Proximity-force estimate for two spheres of radius `radius` at surface
/// gap `gap`: the plate energy `-π²/(720 h³)` integrated over the disc of
/// opposing surface elements, `h(ρ) = gap + 2(R - √(R² - ρ²))`.
pub fn pfa_sphere_energy(radius: f64, gap: f64) -> f64 {
    // ρ = R sin t spreads the points evenly near the rim
    integrate(0.0, 0.5 * PI, 4000, |t| {
        let rho = radius * t.sin();
        let h = gap + 2.0 * radius * (1.0 - t.cos());
        -PI * PI / (720.0 * h.powi(3)) * 2.0 * PI * rho * radius * t.cos()
    })
}

/// Richardson extrapolation of values on meshes refined by a factor 2 per
/// level. The order is estimated from the three finest values and clamped to
/// `[1, 4]`.
pub fn richardson(values: &[f64]) -> f64 {
    let n = values.len();
    assert!(n >= 3);
    let (a, b, c) = (values[n - 3], values[n - 2], values[n - 1]);
    let ratio = (a - b) / (b - c);
    let order = if ratio.is_finite() && ratio > 0.0 { ratio.log2().clamp(1.0, 4.0) } else { 2.0 };
    c + (c - b) / (2f64.powf(order) - 1.0)
}
