//! Tabulating the oscillatory multiplier to disk and reading it back.

use salem_patterns::oscillatory::{ray_csv, tabulate_multiplier, MultiplierTable};
use salem_patterns::Polynomial;

fn main() -> salem_patterns::Result<()> {
    let p = Polynomial::parse("1:1, 1:3")?;
    let path = std::env::temp_dir().join("salem_multiplier.bin");
    let t = tabulate_multiplier(&p, 4, 64, &path)?;
    let back = MultiplierTable::read(&path)?;
    assert_eq!(back.to_bytes(), t.to_bytes());
    println!("{} entries, max quadrature error {:.2e}, file {}", t.values().len(), t.max_error, path.display());
    for (a, b) in [(0, 0), (10, -3), (-40, 64), (64, 64)] {
        println!("m(2pi {a}, 2pi {b}) = {:.6e}", t.get(a, b));
    }
    print!("{}", ray_csv(&p, 4, -1.0, &[1e2, 1e3, 1e4]));
    Ok(())
}
