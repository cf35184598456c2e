//! Minimum of the triple-convolution ratio over two disjoint corpora.

use salem_patterns::corpus::bourgain_corpus;
use salem_patterns::trilinear::{bourgain_ratio, BOURGAIN_C0, BOURGAIN_SCALES};

fn main() -> salem_patterns::Result<()> {
    let mut mins = Vec::new();
    for id in [1u64, 2] {
        let corpus = bourgain_corpus(id, 200, 12)?;
        let ratios: Vec<f64> = corpus
            .iter()
            .map(|f| bourgain_ratio(f, &BOURGAIN_SCALES))
            .collect::<salem_patterns::Result<_>>()?;
        let (arg, min) = ratios
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |a, (i, &r)| if r < a.1 { (i, r) } else { a });
        println!("corpus {id}: min ratio {min:.6} (member {arg}, family {})", arg % 3);
        mins.push(min);
    }
    println!("frozen c0 = {BOURGAIN_C0}, shift = {:.3}%", 100.0 * (mins[1] - mins[0]).abs() / mins[0]);
    Ok(())
}
