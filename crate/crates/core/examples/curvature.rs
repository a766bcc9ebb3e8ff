//! Closed-form scalar curvature of the compactified metrics against fourth-order
//! finite differences, and the flatness of the ALE metrics.

use orbifold_yamabe::asymptotics::log_spaced;
use orbifold_yamabe::geometry::RadialGeometry;

fn main() -> orbifold_yamabe::Result<()> {
    for n in [1, 2, 3, 5] {
        let compact = RadialGeometry::lebrun_compact(n)?;
        let ale = RadialGeometry::lebrun_ale(n)?;
        let mut rel: f64 = 0.0;
        let mut flat: f64 = 0.0;
        for x in log_spaced(0.02, 10.0, 50) {
            let exact = compact.scalar_curvature(x)?;
            rel = rel.max((compact.numeric_scalar_curvature(x, 1e-3)? - exact).abs() / exact.abs());
        }
        for r in log_spaced(0.1, 50.0, 50) {
            flat = flat.max(ale.numeric_scalar_curvature(r, 1e-3)?.abs());
        }
        println!(
            "n = {n}: R(s=1) = {:>9.5}, max relative FD error {rel:.2e}, ALE max |R| {flat:.2e}",
            compact.scalar_curvature(1.0)?
        );
    }
    let football = RadialGeometry::football(3)?;
    println!("football S^4/Z_3: R = {}", football.scalar_curvature(1.0)?);
    Ok(())
}
