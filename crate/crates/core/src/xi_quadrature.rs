//! Integration over imaginary frequency `κ` on a mapped Gauss-Legendre rule.
//!
//! `E = (1/2π) ∫₀^∞ log det M/det M∞ dκ` in units of `ħc/ℓ` and
//! `F = -(1/2π) ∫₀^∞ Tr(M⁻¹ ∂M/∂δ) dκ` in units of `ħc/ℓ²`.

use std::num::NonZeroUsize;
use std::time::Instant;

use gauss_quad::GaussLegendre;
use rayon::prelude::*;

use crate::assembly::Assembler;
use crate::error::{Error, Result};
use crate::geometry::Configuration;
use crate::kernel::PanelRules;
use crate::meshio::Vec3;
use crate::spectral::{evaluate, IntegrandSample};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// `κ` rule plus the panel-pair rules used by assembly.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    pub n_points: usize,
    /// Mapping scale `κ₀`; `None` uses `1/d_min` of the configuration.
    pub kappa_scale: Option<f64>,
    pub far_points: usize,
    pub near_points: usize,
    pub duffy_order: usize,
    /// Rerun on the `n/2` rule and report the difference.
    pub error_estimate: bool,
    pub max_basis: usize,
    /// Nodes with `κ d_min` at or above this contribute zero.
    pub kappa_cutoff: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            n_points: 24,
            kappa_scale: None,
            far_points: 6,
            near_points: 16,
            duffy_order: 5,
            error_estimate: false,
            max_basis: crate::assembly::MAX_BASIS,
            kappa_cutoff: 40.0,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_points < 4 {
            return Err(Error::InvalidArgument(format!("need at least 4 κ points, got {}", self.n_points)));
        }
        if let Some(k) = self.kappa_scale {
            if !(k > 0.0) || !k.is_finite() {
                return Err(Error::InvalidArgument(format!("κ scale must be positive, got {k}")));
            }
        }
        if !(self.kappa_cutoff > 0.0) {
            return Err(Error::InvalidArgument("κ cutoff must be positive".into()));
        }
        self.panel_rules().map(|_| ())
    }

    pub fn panel_rules(&self) -> Result<PanelRules> {
        PanelRules::new(self.far_points, self.near_points, self.duffy_order)
    }

    /// `κ₀` for `config`: the explicit scale, else `1/d_min`, else 1.
    pub fn scale_for(&self, config: &Configuration) -> f64 {
        self.kappa_scale.or_else(|| config.d_min().map(|d| 1.0 / d)).unwrap_or(1.0)
    }
}

/// `n` Gauss-Legendre nodes mapped to `(0, ∞)` by `κ = κ₀ u / (1 - u)`.
pub fn kappa_nodes(n: usize, kappa_scale: f64) -> Result<Vec<(f64, f64)>> {
    if n == 0 || !(kappa_scale > 0.0) || !kappa_scale.is_finite() {
        return Err(Error::InvalidArgument(format!("bad κ rule: n = {n}, κ₀ = {kappa_scale}")));
    }
    let rule = GaussLegendre::new(NonZeroUsize::new(n).unwrap());
    let mut nodes: Vec<(f64, f64)> = rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| {
            let (u, wu) = (0.5 * (x + 1.0), 0.5 * w);
            (kappa_scale * u / (1.0 - u), wu * kappa_scale / ((1.0 - u) * (1.0 - u)))
        })
        .collect();
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(nodes)
}

/// Energy and force of one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// `ħc/ℓ`.
    pub energy: f64,
    /// `ħc/ℓ²`, when a force was requested.
    pub force: Option<f64>,
    /// `|E(n) - E(n/2)|`, when requested.
    pub energy_error: Option<f64>,
    /// `|F(n) - F(n/2)|`, when requested.
    pub force_error: Option<f64>,
    pub n_basis: usize,
    pub kappa_scale: f64,
    pub wall_seconds: f64,
    pub samples: Vec<IntegrandSample>,
}

/// Runs `κ` integrals, reusing self-blocks across calls through its [`Assembler`].
#[derive(Debug)]
pub struct Integrator {
    spec: QuadratureSpec,
    assembler: Assembler,
}

impl Integrator {
    pub fn new(spec: QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        let assembler = Assembler::from_spec(&spec)?;
        Ok(Integrator { spec, assembler })
    }

    pub fn spec(&self) -> &QuadratureSpec {
        &self.spec
    }

    pub fn assembler(&self) -> &Assembler {
        &self.assembler
    }

    fn samples(&self, config: &Configuration, n: usize, scale: f64, force: Option<(usize, Vec3)>) -> Result<Vec<(f64, IntegrandSample)>> {
        let nodes = kappa_nodes(n, scale)?;
        let d_min = config.d_min();
        nodes
            .par_iter()
            .map(|&(kappa, weight)| {
                let screened = d_min.is_some_and(|d| kappa * d >= self.spec.kappa_cutoff);
                if config.len() < 2 || screened {
                    return Ok((
                        weight,
                        IntegrandSample {
                            kappa,
                            energy_integrand: 0.0,
                            force_integrand: force.map(|_| 0.0),
                            min_pivot: f64::NAN,
                            condition_estimate: f64::NAN,
                        },
                    ));
                }
                let sample = (|| {
                    let (m, m_inf) = self.assembler.assemble_pair(config, kappa)?;
                    let dm = match force {
                        Some((object, direction)) => Some(self.assembler.assemble_dz(config, object, direction, kappa)?),
                        None => None,
                    };
                    evaluate(&m, &m_inf, dm.as_ref())
                })()
                .map_err(|e| e.at_kappa(kappa))?;
                Ok((weight, sample))
            })
            .collect()
    }

    fn integrate(&self, config: &Configuration, n: usize, scale: f64, force: Option<(usize, Vec3)>) -> Result<(f64, Option<f64>, Vec<IntegrandSample>)> {
        let samples = self.samples(config, n, scale, force)?;
        let mut energy = 0.0;
        let mut total_force = 0.0;
        for (w, s) in &samples {
            energy += w * s.energy_integrand;
            total_force += w * s.force_integrand.unwrap_or(0.0);
        }
        let force = force.map(|_| -total_force / TWO_PI);
        Ok((energy / TWO_PI, force, samples.into_iter().map(|(_, s)| s).collect()))
    }

    fn run(&self, config: &Configuration, force: Option<(usize, Vec3)>) -> Result<SweepResult> {
        let start = Instant::now();
        let scale = self.spec.scale_for(config);
        let (energy, force_value, samples) = self.integrate(config, self.spec.n_points, scale, force)?;
        let (mut energy_error, mut force_error) = (None, None);
        if self.spec.error_estimate {
            let (e_half, f_half, _) = self.integrate(config, self.spec.n_points / 2, scale, force)?;
            energy_error = Some((energy - e_half).abs());
            force_error = force_value.zip(f_half).map(|(a, b)| (a - b).abs());
        }
        Ok(SweepResult {
            energy,
            force: force_value,
            energy_error,
            force_error,
            n_basis: config.dimension(),
            kappa_scale: scale,
            wall_seconds: start.elapsed().as_secs_f64(),
            samples,
        })
    }

    /// Casimir energy of `config`.
    pub fn energy(&self, config: &Configuration) -> Result<SweepResult> {
        self.run(config, None)
    }

    /// Energy and the force on object `object` along the unit vector `direction`.
    pub fn force(&self, config: &Configuration, object: usize, direction: Vec3) -> Result<SweepResult> {
        if config.len() < 2 {
            return Err(Error::InvalidArgument("a force needs at least two objects".into()));
        }
        if object >= config.len() {
            return Err(Error::InvalidArgument(format!("object index {object} out of range")));
        }
        self.run(config, Some((object, direction)))
    }
}

/// Casimir energy of `config` with a fresh [`Integrator`].
pub fn integrate_energy(config: &Configuration, spec: &QuadratureSpec) -> Result<SweepResult> {
    Integrator::new(spec.clone())?.energy(config)
}

/// Force on object `object` along `+z` with a fresh [`Integrator`].
pub fn integrate_force(config: &Configuration, object: usize, spec: &QuadratureSpec) -> Result<SweepResult> {
    Integrator::new(spec.clone())?.force(config, object, Vec3::z())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ObjectInstance, RigidTransform};
    use crate::meshio::generate_sphere;

    fn sphere_pair(level: usize, center_distance: f64) -> Configuration {
        let a = ObjectInstance::from_mesh("lower", generate_sphere(1.0, level).unwrap(), RigidTransform::identity());
        let b = ObjectInstance::new("upper", a.basis().clone(), RigidTransform::translation(Vec3::new(0.0, 0.0, center_distance)));
        Configuration::new(vec![a, b]).unwrap()
    }

    #[test]
    fn mapped_rule_integrates_exponentials() {
        let sum = |n, k0, f: &dyn Fn(f64) -> f64| kappa_nodes(n, k0).unwrap().iter().map(|&(k, w)| w * f(k)).sum::<f64>();
        // the fixed map leaves -1.6313e-8 on this integrand (numpy, same rule)
        let unit = sum(24, 1.0, &|k| (-k).exp()) - 1.0;
        assert!((unit + 1.631288759629257e-8).abs() < 1e-12, "{unit:e}");
        for d in [0.1, 1.0, 7.5] {
            let v = sum(24, 1.0 / d, &|k| (-2.0 * k * d).exp());
            assert!((v - 0.5 / d).abs() < 1e-9 * (0.5 / d).max(1.0), "d = {d}");
        }
    }

    #[test]
    fn nodes_and_weights_are_positive() {
        for n in [4, 12, 24, 48] {
            let nodes = kappa_nodes(n, 0.3).unwrap();
            assert_eq!(nodes.len(), n);
            assert!(nodes.iter().all(|&(k, w)| k > 0.0 && k.is_finite() && w > 0.0 && w.is_finite()));
        }
        assert!(kappa_nodes(24, 0.0).is_err());
        let bad = QuadratureSpec { n_points: 3, ..Default::default() };
        assert!(Integrator::new(bad).is_err());
    }

    #[test]
    fn single_object_energy_is_zero() {
        let config = Configuration::new(vec![ObjectInstance::from_mesh("s", generate_sphere(1.0, 1).unwrap(), RigidTransform::identity())]).unwrap();
        assert_eq!(integrate_energy(&config, &QuadratureSpec::default()).unwrap().energy, 0.0);
        assert!(integrate_force(&config, 0, &QuadratureSpec::default()).is_err());
    }

    #[test]
    fn attraction_and_third_law() {
        let config = sphere_pair(1, 3.0);
        let integrator = Integrator::new(QuadratureSpec::default()).unwrap();
        let upper = integrator.force(&config, 1, Vec3::z()).unwrap();
        let lower = integrator.force(&config, 0, Vec3::z()).unwrap();
        assert!(upper.energy < 0.0);
        assert!(upper.samples.iter().all(|s| s.energy_integrand <= 0.0));
        let (fu, fl) = (upper.force.unwrap(), lower.force.unwrap());
        assert!(fu < 0.0 && fl > 0.0);
        assert!((fu + fl).abs() <= 1e-6 * fu.abs());
        assert_eq!(upper.energy, lower.energy);
    }

    #[test]
    fn rule_size_convergence() {
        let config = sphere_pair(1, 4.0);
        let e24 = integrate_energy(&config, &QuadratureSpec::default()).unwrap().energy;
        let e48 = integrate_energy(&config, &QuadratureSpec { n_points: 48, ..Default::default() }).unwrap().energy;
        assert!(((e24 - e48) / e48).abs() < 1e-3, "{e24:e} vs {e48:e}");
    }

    #[test]
    fn scale_robustness_within_error_estimate() {
        let config = sphere_pair(1, 4.0);
        let spec = QuadratureSpec { error_estimate: true, ..Default::default() };
        let base = integrate_energy(&config, &spec).unwrap();
        let estimate = base.energy_error.unwrap();
        assert!(estimate > 0.0);
        for factor in [0.5, 2.0] {
            let scaled = QuadratureSpec { kappa_scale: Some(base.kappa_scale * factor), ..spec.clone() };
            let e = integrate_energy(&config, &scaled).unwrap().energy;
            assert!((e - base.energy).abs() < estimate, "×{factor}: {:e} vs estimate {estimate:e}", e - base.energy);
        }
    }

    #[test]
    fn global_translation_leaves_energy_unchanged() {
        let config = sphere_pair(1, 3.5);
        let moved = config.moved(&RigidTransform::translation(Vec3::new(10.0, -3.0, 7.0))).unwrap();
        let spec = QuadratureSpec::default();
        let a = integrate_energy(&config, &spec).unwrap().energy;
        let b = integrate_energy(&moved, &spec).unwrap().energy;
        assert!(((a - b) / a).abs() < 1e-10, "{a:e} vs {b:e}");
    }
}
