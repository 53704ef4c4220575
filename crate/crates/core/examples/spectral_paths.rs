//! Log-det ratio and force trace by factorization and by eigenvalues.

use casimir_core::assembly::Assembler;
use casimir_core::cli::tetrahedron_pair;
use casimir_core::kernel::PanelRules;
use casimir_core::meshio::Vec3;
use casimir_core::spectral::{evaluate, force_eigs, force_trace, logdet_ratio, logdet_ratio_eig};

fn main() -> casimir_core::Result<()> {
    let config = tetrahedron_pair(2, 1.0, 15.0, 40.0)?;
    let assembler = Assembler::new(PanelRules::default());
    let d = config.d_min().unwrap();
    println!("tetrahedron pair, N = {}, d_min = {d:.4}", config.dimension());
    for k in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let kappa = k / d;
        let (m, m_inf) = assembler.assemble_pair(&config, kappa)?;
        let dm = assembler.assemble_dz(&config, 1, Vec3::y(), kappa)?;
        let chol = logdet_ratio(&m, &m_inf)?;
        let eig = logdet_ratio_eig(&m, &m_inf)?;
        let trace = force_trace(&m, &dm)?;
        let sum: f64 = force_eigs(&m, &dm)?.iter().sum();
        let sample = evaluate(&m, &m_inf, Some(&dm))?;
        println!(
            "κd = {k:4}: log det ratio {chol:.12e} / {eig:.12e}, trace {trace:.10e} / {sum:.10e}, min pivot {:.2e}",
            sample.min_pivot
        );
    }
    Ok(())
}
