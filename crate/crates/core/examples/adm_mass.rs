//! ADM mass of the LeBrun metrics and of the conformal blow-up of their
//! compactification.

use orbifold_yamabe::asymptotics::{
    adm_mass, default_radii, mass_regular_term_check, GreenOptions, LebrunAleProfile, MassOptions,
};
use orbifold_yamabe::geometry::RadialGeometry;

fn main() -> orbifold_yamabe::Result<()> {
    let radii = default_radii();
    let opts = MassOptions::default();
    println!("{:>3} {:>14} {:>14} {:>10}", "n", "ADM mass", "-2(n-2)", "exponent");
    for n in 1..=4 {
        let profile = LebrunAleProfile::new(RadialGeometry::lebrun_ale(n)?)?;
        let est = adm_mass(&profile, &radii, &opts)?;
        let exponent = est
            .convergence_exponent
            .map_or("exact".to_string(), |q| format!("{q:.3}"));
        println!(
            "{n:>3} {:>14.9} {:>14.1} {exponent:>10}",
            est.extrapolated,
            -2.0 * (n as f64 - 2.0)
        );
    }

    println!("\nblow-up of the compactified metric (m = 12A):");
    for n in 1..=3 {
        let g = RadialGeometry::lebrun_compact(n)?;
        let check = mass_regular_term_check(&g, &radii, &GreenOptions::default(), &opts)?;
        println!(
            "n = {n}: mass {:.9}, implied A {:.9}, s-coordinate constant term {:.9}",
            check.mass.extrapolated, check.implied_regular_term, check.regular_term_s
        );
    }
    Ok(())
}
