//! Energy of test functions concentrating at the orbifold point of `O(-2)`.

use orbifold_yamabe::bubble::energy_expansion_check;
use orbifold_yamabe::geometry::RadialGeometry;
use orbifold_yamabe::solver::KFamily;

fn main() -> orbifold_yamabe::Result<()> {
    let g = RadialGeometry::lebrun_compact(2)?;
    let lambdas = [20.0, 40.0, 80.0, 160.0];
    for k in [KFamily::constant(1.0)?, KFamily::bump(-0.5)?, KFamily::bump(0.5)?] {
        let rep = energy_expansion_check(&g, &k, &lambdas)?;
        println!("{k:?}");
        for (l, j) in rep.lambdas.iter().zip(&rep.energies) {
            println!("  lambda = {l:>5}: J = {j:.9}");
        }
        println!(
            "  limit {:.9}, fitted coefficient {:+.3e}, observed order {:?}",
            rep.threshold, rep.fit.coefficient, rep.observed_order
        );
    }
    Ok(())
}
