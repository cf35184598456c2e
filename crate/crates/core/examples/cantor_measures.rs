//! Cantor-type measures: construction, ball condition and Fourier decay.

use salem_patterns::fourier::{decay_constant, fourier_coeffs};
use salem_patterns::measures::{ball_constant, cantor_measure, random_salem_measure, CantorSpec};

fn main() -> salem_patterns::Result<()> {
    let specs = [
        ("middle thirds", CantorSpec::middle_thirds(8)),
        ("(5,3) fixed", CantorSpec { branching: 5, survivors: 3, depth: 5, randomized: false, seed: 0 }),
        ("(5,3) random", CantorSpec::random(5, 3, 5, 7)),
    ];
    println!("{:<14} {:>6} {:>10} {:>10} {:>10}", "measure", "dim", "C1(dim)", "|mu(k)| k^.25", "max k<=512");
    for (name, spec) in &specs {
        let mu = if spec.randomized {
            random_salem_measure(spec, 14)?
        } else {
            cantor_measure(spec, 14)?
        };
        let s = fourier_coeffs(&mu, 512)?;
        let alpha = spec.dimension();
        let peak = (1..=512).map(|k| s.get(k).norm()).fold(0.0, f64::max);
        println!(
            "{name:<14} {alpha:>6.3} {:>10.3} {:>10.3} {peak:>10.3e}",
            ball_constant(&mu, alpha)?,
            decay_constant(&s, 0.5),
        );
    }
    Ok(())
}
