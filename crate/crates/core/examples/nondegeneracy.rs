//! The closed-form non-degeneracy expression against finite differences of
//! the stationary-phase phase function.

use salem_patterns::oscillatory::{admissible_window, nondegeneracy_detail, nondegeneracy_fd, top_coefficient};
use salem_patterns::Polynomial;

fn main() -> salem_patterns::Result<()> {
    for p in [Polynomial::t_plus_t2(), Polynomial::parse("1:1, 1:3")?, Polynomial::parse("3:1, 1:2, 1:5")?] {
        println!("P = {p}, top coefficient {}", top_coefficient(&p));
        for l in [2, 4] {
            let (lo, hi) = admissible_window(&p, l);
            for i in 1..4 {
                let rho = lo + (hi - lo) * i as f64 / 4.0;
                let nd = nondegeneracy_detail(rho, &p, l)?;
                let fd = nondegeneracy_fd(rho, &p, l)?;
                println!("  l {l} rho {rho:+.5}: s {:.5}  |E| {:.6e}  fd {fd:.6e}", nd.s, nd.value.abs());
            }
        }
    }
    Ok(())
}
