//! Running the staged pipeline from a config string, as the CLI does.

use salem_patterns::experiment::{run_experiment, ExperimentConfig, Stage};

fn main() -> salem_patterns::Result<()> {
    let config = ExperimentConfig::parse(
        "measure = cantor\ndepth = 6\ngrid_level = 12\ncutoff = 256\nmixed_cutoff = 24\npattern_depth = 6\nepsilons = 2^-7, 2^-8, 2^-9\n",
    )?;
    print!("{}", config.to_config_string());
    let out = std::env::temp_dir().join("salem_experiment");
    let r = run_experiment(&config, Stage::NuMass, &out)?;
    println!("l0 {}, outputs in {}", r.l0, out.display());
    if let Some(s) = &r.scan {
        println!("certified scale {:?}", s.certified_scale);
    }
    if let Some(p) = &r.patterns {
        println!("pattern found {}", p.pattern_found);
    }
    print!("{}", std::fs::read_to_string(out.join("report.txt"))?);
    Ok(())
}
