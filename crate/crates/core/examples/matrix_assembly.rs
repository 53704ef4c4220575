//! Assemble M(κ), M∞(κ) and ∂M/∂z for a sphere pair and write M to a text file.

use casimir_core::assembly::Assembler;
use casimir_core::cli::sphere_pair;
use casimir_core::kernel::PanelRules;
use casimir_core::meshio::Vec3;

fn main() -> casimir_core::Result<()> {
    let config = sphere_pair(1, 1.0)?;
    let assembler = Assembler::new(PanelRules::default());
    let kappa = 0.5;
    let start = std::time::Instant::now();
    let (m, m_inf) = assembler.assemble_pair(&config, kappa)?;
    let dm = assembler.assemble_dz(&config, 1, Vec3::z(), kappa)?;
    println!("N = {} assembled in {:.2} s", m.dimension(), start.elapsed().as_secs_f64());
    println!("asymmetry of M: {:.2e}", m.asymmetry());
    let coupling = m.block(0, 1);
    let largest = (0..coupling.nrows()).flat_map(|i| (0..coupling.ncols()).map(move |j| (i, j))).map(|(i, j)| coupling[(i, j)].abs()).fold(0.0, f64::max);
    println!("largest coupling entry {largest:.3e}, M∞ coupling block zero: {}", m_inf.block(0, 1).norm_max() == 0.0);
    println!("∂M/∂z diagonal blocks zero: {}", dm.block(0, 0).norm_max() == 0.0 && dm.block(1, 1).norm_max() == 0.0);

    let path = std::env::temp_dir().join("sphere_pair_matrix.txt");
    m.dump(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}
