//! Certified configurations x, x+t, x+P(t) among the intervals of a
//! Cantor stage, and the mollified pattern mass.

use salem_patterns::measures::{cantor_measure, CantorSpec};
use salem_patterns::oscillatory::scale_setup;
use salem_patterns::patterns::{find_configurations, nu_mass, IntervalSet, DEFAULT_BUDGET};
use salem_patterns::Polynomial;

fn main() -> salem_patterns::Result<()> {
    let set = IntervalSet::from_cantor(&CantorSpec::middle_thirds(6))?;
    for p in [Polynomial::from_pairs(&[(2.0, 1)])?, Polynomial::t_plus_t2()] {
        let r = find_configurations(&set, &p, 3, DEFAULT_BUDGET)?;
        println!("P = {p}: {} certified triples, {} expansions", r.triples.len(), r.expansions);
        if let Some(t) = r.triples.first() {
            println!("  first: {}", t.to_line());
        }
    }

    let p = Polynomial::t_plus_t2();
    let l0 = scale_setup(&p, 100.0)?.l0;
    let mu = cantor_measure(&CantorSpec::middle_thirds(8), 13)?;
    let nm = nu_mass(&mu, &p, l0, &[2f64.powi(-8), 2f64.powi(-9), 2f64.powi(-10)])?;
    print!("{}", nm.to_csv());
    println!("l0 {l0}: limit {:.4}, residual {:.3}", nm.limit_estimate, nm.residual);
    let deep = find_configurations(&IntervalSet::from_cantor(&CantorSpec::middle_thirds(8))?, &p, l0, DEFAULT_BUDGET)?;
    println!("depth 8 at l0 {l0}: {} certified triples", deep.triples.len());
    Ok(())
}
