//! A translation sweep driven through the CLI layer, written as CSV.

use casimir_core::cli::{run, ForceTarget, Mode, Range, RunPlan, SweepAxis};
use casimir_core::geometry::Axis;

fn main() -> casimir_core::Result<()> {
    let dir = std::env::temp_dir();
    let geometry = dir.join("sweep_spheres.geo");
    std::fs::write(&geometry, "object lower sphere(1, 1)\nobject upper sphere(1, 1) move 0 0 4\n")?;

    let mut plan = RunPlan::new(Mode::Sweep, &geometry);
    plan.force = Some(ForceTarget { object: "upper".into(), direction: Axis::Z });
    plan.sweep = Some(SweepAxis::Translate { object: "upper".into(), axis: Axis::Z, range: Range::new(2.5, 8.0, 6)? });
    plan.quadrature.error_estimate = true;
    plan.out = Some(dir.join("sweep_spheres.csv"));
    for row in run(&plan)? {
        let r = row.result.unwrap();
        println!("d = {:>4}: E = {:.5e}, F = {:.5e}, error estimate {:.1e}", row.param_value, r.energy, r.force.unwrap(), r.force_error.unwrap());
    }
    println!("CSV written to {}", plan.out.unwrap().display());
    Ok(())
}
