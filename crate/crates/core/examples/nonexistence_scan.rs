//! Slope scans for curvatures on the negative side of the wall: no shot
//! changes sign, so no radial solution is bracketed.

use orbifold_yamabe::geometry::RadialGeometry;
use orbifold_yamabe::solver::{classify_wall, make_k_minus, scan, KFamily, Problem, ShotKind, SolverOptions};

fn main() -> orbifold_yamabe::Result<()> {
    let g = RadialGeometry::lebrun_compact(3)?;
    let opts = SolverOptions::default();
    let families = [
        KFamily::constant(1.0)?,
        make_k_minus(3, KFamily::RationalDecay { base: 1.0, amplitude: 1.0 })?,
        make_k_minus(3, KFamily::Bump { base: 1.0, amplitude: 0.5, width: 1.0 })?,
    ];
    for k in families {
        let wall = classify_wall(&k, 3);
        let ev = scan(&Problem::new(&g, &k, 3.0)?, &opts.slope_grid(), &opts);
        println!(
            "margin {:+.3}: {} shots, {} brackets, {} zero crossings, {} divergent",
            wall.margin,
            ev.shots.len(),
            ev.brackets.len(),
            ev.count(ShotKind::ZeroCrossing),
            ev.count(ShotKind::Divergent)
        );
    }
    Ok(())
}
