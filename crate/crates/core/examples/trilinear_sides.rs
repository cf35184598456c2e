//! The trilinear form on both sides: step-function grids, trigonometric
//! polynomials sampled finely, and the multiplier sum in frequency.

use salem_patterns::fourier::random_band;
use salem_patterns::grid::GridDensity;
use salem_patterns::measures::{cantor_measure, CantorSpec};
use salem_patterns::oscillatory::MultiplierTable;
use salem_patterns::trilinear::{
    trilinear_form, trilinear_fourier, trilinear_physical, trilinear_physical_trig, Operand, Side,
};
use salem_patterns::Polynomial;

fn main() -> salem_patterns::Result<()> {
    let p = Polynomial::t_plus_t2();

    let u = GridDensity::uniform(12)?;
    let mu = cantor_measure(&CantorSpec::middle_thirds(6), 12)?;
    for l in [2, 4, 6] {
        println!(
            "l {l}: Lambda(1,1,1) = {:.12}, Lambda(mu,mu,mu) = {:.6}",
            trilinear_physical(&u, &u, &u, l, &p)?,
            trilinear_physical(&mu, &mu, &mu, l, &p)?
        );
    }

    let (k, l) = (64, 5);
    let table = MultiplierTable::tabulate(&p, l, k);
    for seed in 0..3u64 {
        let f = random_band(0, k + 1, k, 10 * seed);
        let g = random_band(0, k + 1, k, 10 * seed + 1);
        let h = random_band(0, k + 1, k, 10 * seed + 2);
        let phys = trilinear_physical_trig(&f, &g, &h, l, &p, 13)?;
        let four = trilinear_fourier(&f, &g, &h, &table)?;
        println!("trio {seed}: physical {:+.12e}  fourier {:+.12e}  gap {:.1e}", phys.re, four.re, (phys - four).norm());
    }

    let f = random_band(1, 9, 8, 1);
    let via_form = trilinear_form(Operand::Series(&f), Operand::Series(&f), Operand::Series(&f), 3, &p, Side::Fourier)?;
    println!("trilinear_form on a low band: {via_form:+.6e}");
    Ok(())
}
