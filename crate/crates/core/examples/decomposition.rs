//! Splitting a Cantor measure into a bounded Fejer mean and a rough part,
//! and bounding the mixed trilinear terms.

use salem_patterns::fourier::{decompose, fourier_coeffs, mixed_decay_driver};
use salem_patterns::measures::{cantor_measure, CantorSpec, MeasureConditions};
use salem_patterns::oscillatory::MultiplierTable;
use salem_patterns::trilinear::mixed_term_bounds;
use salem_patterns::Polynomial;

fn main() -> salem_patterns::Result<()> {
    let mu = cantor_measure(&CantorSpec::middle_thirds(8), 13)?;
    let series = fourier_coeffs(&mu, 512)?;
    for alpha in [0.5, 0.6, 0.7] {
        let cond = MeasureConditions::new(alpha, 0.5, 2.0, 1.0, 1.0)?;
        let d = decompose(&series, &cond, 16.0)?;
        println!(
            "alpha {alpha}: N = {:.3}, mu1 in [{:.4}, {:.4}], M = {}, truncated {}, driver {:.3e}",
            d.n,
            d.min_value,
            d.sup_bound,
            d.m,
            d.truncated,
            mixed_decay_driver(&cond, 0.1)
        );
    }

    let cond = MeasureConditions::new(0.6, 0.5, 2.0, 1.0, 1.0)?;
    let d = decompose(&series, &cond, 16.0)?;
    let table = MultiplierTable::tabulate(&Polynomial::t_plus_t2(), 7, 48);
    let mixed = mixed_term_bounds(&d.mu1.with_cutoff(48), &d.mu2.with_cutoff(48), &table, 0.1)?;
    for ((label, v), b) in mixed.labels.iter().zip(&mixed.values).zip(&mixed.bounds) {
        println!("mixed {label:?}: |Lambda| {v:.3e} <= {b:.3e}");
    }
    Ok(())
}
