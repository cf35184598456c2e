//! Pattern mass of a Cantor measure along a decreasing mollification sequence.

use salem_patterns::measures::{cantor_measure, CantorSpec};
use salem_patterns::oscillatory::scale_setup;
use salem_patterns::patterns::nu_mass;
use salem_patterns::Polynomial;

fn main() -> salem_patterns::Result<()> {
    let p = Polynomial::t_plus_t2();
    let eps = [2f64.powi(-8), 2f64.powi(-9), 2f64.powi(-10)];
    let level = 13u32;
    for gamma in [3.0, 6.0, 12.0, 25.0, 50.0, 100.0, 200.0] {
        let l0 = scale_setup(&p, gamma)?.l0;
        let mu = cantor_measure(&CantorSpec::middle_thirds(8), level)?;
        let r = nu_mass(&mu, &p, l0, &eps)?;
        println!("gamma {gamma} grid level {level}, l0 {l0}");
        for (e, v) in r.epsilons.iter().zip(&r.values) {
            println!("  eps 2^{:<4} {v:.12}", e.log2());
        }
        println!(
            "  cauchy {:?} decreasing {} limit {:.9} residual {:.2e}",
            r.cauchy.iter().map(|c| format!("{c:.3e}")).collect::<Vec<_>>(),
            r.cauchy_decreasing(),
            r.limit_estimate,
            r.residual
        );
    }
    Ok(())
}
