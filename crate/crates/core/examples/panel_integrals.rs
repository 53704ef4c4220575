//! Panel-pair integrals: each interaction class against the reference quadrature.

use std::sync::Arc;

use casimir_core::kernel::{classify_pair, pair_moments, reference_moments, rwg_pair_integral, Kernel, OracleRule, PanelPairClass, PanelRules, SurfaceData};
use casimir_core::meshio::{generate_sphere, RwgBasisSet};

fn main() -> casimir_core::Result<()> {
    let mesh = Arc::new(generate_sphere(1.0, 1)?);
    let basis = Arc::new(RwgBasisSet::new(mesh.clone()));
    let rules = PanelRules::default();
    let surface = SurfaceData::new(mesh.clone(), basis, &rules);
    let kernel = Kernel::Value { kappa: 1.0 };
    let corners = |p: usize| mesh.panels()[p].vertices.map(|v| mesh.vertices()[v]);

    let mut shown = Vec::new();
    for q in 0..mesh.num_panels() {
        let class = classify_pair(&mesh.panels()[0], &mesh.panels()[q], true);
        let name = match class {
            PanelPairClass::SelfPanel => "self",
            PanelPairClass::CommonEdge { .. } => "common edge",
            PanelPairClass::CommonVertex { .. } => "common vertex",
            PanelPairClass::Near => "near",
            PanelPairClass::Far => "far",
        };
        if shown.contains(&name) {
            continue;
        }
        shown.push(name);
        let ours = pair_moments(&surface, 0, &surface, q, class, &kernel, &rules)?;
        let reference = reference_moments(&corners(0), &corners(q), &kernel, OracleRule { points: 8, levels: 5 });
        println!("{name:<14} ∬g = {:.12e}  reference {:.12e}  relative difference {:.1e}", ours.i0, reference.i0, ((ours.i0 - reference.i0) / reference.i0).abs());
    }

    for kappa in [0.1, 1.0, 10.0] {
        let diagonal = rwg_pair_integral(&surface, 0, &surface, 0, true, kappa, &rules)?;
        println!("κ = {kappa:5}: weak-form entry (0, 0) = {diagonal:.8e}");
    }
    Ok(())
}
