//! Bourgain pigeonholing along the scale ladder, for a smooth density and a
//! narrow arc that only certifies at fine scales.

use salem_patterns::grid::GridDensity;
use salem_patterns::measures::{cantor_measure, CantorSpec};
use salem_patterns::trilinear::{bourgain_ratio, scale_scan, ScanParams, BOURGAIN_SCALES};
use salem_patterns::Polynomial;

fn main() -> salem_patterns::Result<()> {
    let p = Polynomial::t_plus_t2();
    let n = 1usize << 14;
    let arc = GridDensity::new(14, (0..n).map(|j| if j < n / 128 { 128.0 } else { 0.0 }).collect())?;
    let cantor = cantor_measure(&CantorSpec::middle_thirds(5), 14)?;
    for (name, f, start) in [("arc of length 2^-7", &arc, 4), ("cantor depth 5", &cantor, 2)] {
        println!("== {name}: Bourgain ratio {:.4}", bourgain_ratio(f, &BOURGAIN_SCALES)?);
        let r = scale_scan(f, &p, &ScanParams::new(start))?;
        print!("{}", r.to_text());
        println!(
            "certified {:?}, increments {:.3e} <= C0 ||f||^2 = {:.3e}",
            r.certified_scale,
            r.increments_sum,
            r.c_big0 * r.l2_norm_sq
        );
    }
    Ok(())
}
