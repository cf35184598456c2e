//! Decay of `||T_l(f, g)||_2` for unit band functions at separated dyadic
//! frequencies, as the larger band grows.

use salem_patterns::fourier::random_band;
use salem_patterns::oscillatory::MultiplierTable;
use salem_patterns::trilinear::{apply_t_fourier, log2_slope};
use salem_patterns::fourier::sobolev_norm;
use salem_patterns::Polynomial;

fn main() -> salem_patterns::Result<()> {
    let p = Polynomial::t_plus_t2();
    let gap = 5;
    for l in [0, 1, 2, 3, 4] {
        let table = MultiplierTable::tabulate(&p, l, 256);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for kmax in gap..=7 {
            let mut worst = 0.0f64;
            for kmin in 0..=(kmax - gap) {
                for (k1, k2) in [(kmax, kmin), (kmin, kmax)] {
                    for seed in 0..4u64 {
                        let f = random_band(1 << k1, 2 << k1, 256, 100 * seed + 1);
                        let g = random_band(1 << k2, 2 << k2, 256, 100 * seed + 2);
                        let t = apply_t_fourier(&f, &g, &table)?;
                        worst = worst.max(sobolev_norm(&t, 0.0));
                    }
                }
            }
            println!("l {l} max band 2^{kmax}: ||T|| = {worst:.3e}");
            xs.push(kmax as f64);
            ys.push(worst);
        }
        println!("l {l} slope {:.2}", log2_slope(&xs, &ys));
    }
    Ok(())
}
