//! Experiment configs and the end-to-end pipeline
//! construct, conditions, decompose, scan, mixed, patterns, nu_mass.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{cell_averages, decay_constant, decompose, fourier_coeffs, mixed_decay_driver};
use crate::grid::GridDensity;
use crate::measures::{ball_constant, cantor_measure, random_salem_measure, CantorSpec, MeasureConditions};
use crate::oscillatory::{scale_setup, MultiplierTable};
use crate::patterns::{find_configurations, nu_mass, IntervalSet, NuMassResult};
use crate::polynomial::Polynomial;
use crate::trilinear::{mixed_term_bounds, scale_scan, MixedTermReport, ScanParams, TrilinearReport, BOURGAIN_C0};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasureKind {
    Uniform,
    Cantor,
    Random,
}

impl MeasureKind {
    fn name(self) -> &'static str {
        match self {
            MeasureKind::Uniform => "uniform",
            MeasureKind::Cantor => "cantor",
            MeasureKind::Random => "random",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stage {
    Construct,
    Conditions,
    Decompose,
    Scan,
    Mixed,
    Patterns,
    NuMass,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Construct,
        Stage::Conditions,
        Stage::Decompose,
        Stage::Scan,
        Stage::Mixed,
        Stage::Patterns,
        Stage::NuMass,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Construct => "construct",
            Stage::Conditions => "conditions",
            Stage::Decompose => "decompose",
            Stage::Scan => "scan",
            Stage::Mixed => "mixed",
            Stage::Patterns => "patterns",
            Stage::NuMass => "nu_mass",
        }
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| crate::error::invalid("stage", format!("unknown stage `{s}`")))
    }
}

/// Everything one run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub measure: MeasureKind,
    pub branching: u32,
    pub survivors: u32,
    pub depth: u32,
    pub seed: u64,
    pub polynomial: Polynomial,
    /// Dominance factor of the scale setup.
    pub gamma: f64,
    pub conditions: MeasureConditions,
    /// `A` in `M = A 2^{6B} C1`.
    pub a: f64,
    pub grid_level: u32,
    pub cutoff: usize,
    pub c0: f64,
    /// Fixed `C_M`; `None` uses `M^10`.
    pub c_m: Option<f64>,
    pub ratio: f64,
    pub k_max: usize,
    /// First rung; `None` starts at the scale-setup `l0`.
    pub l_start: Option<i32>,
    pub s0: f64,
    /// Cutoff of the multiplier table for the mixed terms.
    pub mixed_cutoff: usize,
    /// Depth of the interval approximation searched for patterns.
    pub pattern_depth: u32,
    pub budget: u64,
    pub epsilons: Vec<f64>,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            measure: MeasureKind::Cantor,
            branching: 3,
            survivors: 2,
            depth: 8,
            seed: 1,
            polynomial: Polynomial::t_plus_t2(),
            gamma: 100.0,
            conditions: MeasureConditions {
                alpha: 0.6,
                beta: 0.5,
                c1: 2.0,
                c2: 1.0,
                b: 1.0,
            },
            a: 16.0,
            grid_level: 13,
            cutoff: 512,
            c0: BOURGAIN_C0,
            c_m: None,
            ratio: 1.5,
            k_max: 8,
            l_start: None,
            s0: 0.1,
            mixed_cutoff: 48,
            pattern_depth: 8,
            budget: crate::patterns::DEFAULT_BUDGET,
            epsilons: vec![2f64.powi(-8), 2f64.powi(-9), 2f64.powi(-10)],
            out_dir: PathBuf::from("out"),
        }
    }
}

const KEYS: [&str; 26] = [
    "measure",
    "branching",
    "survivors",
    "depth",
    "seed",
    "polynomial",
    "gamma",
    "alpha",
    "beta",
    "c1",
    "c2",
    "b",
    "a",
    "grid_level",
    "cutoff",
    "c0",
    "c_m",
    "ratio",
    "k_max",
    "l_start",
    "s0",
    "mixed_cutoff",
    "pattern_depth",
    "budget",
    "epsilons",
    "out_dir",
];

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    if let Some(e) = s.strip_prefix("2^") {
        return e
            .parse::<i32>()
            .map(|e| 2f64.powi(e))
            .map_err(|_| format!("bad power of two `{s}`"));
    }
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("bad number `{s}`"))
}

fn parse_num<T: FromStr>(s: &str) -> std::result::Result<T, String> {
    s.parse::<T>().map_err(|_| format!("bad integer `{s}`"))
}

fn fmt_f64(v: f64) -> String {
    if v > 0.0 && v.log2().fract() == 0.0 && v.log2().abs() >= 4.0 {
        format!("2^{}", v.log2() as i32)
    } else {
        format!("{v:?}")
    }
}

impl ExperimentConfig {
    /// Parse `key = value` lines; `#` starts a comment. Unknown and
    /// repeated keys are errors, missing keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        let mut seen: Vec<(&'static str, usize)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let err = |message: String| Error::Config { line, message };
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{body}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let key = *KEYS
                .iter()
                .find(|k| **k == key)
                .ok_or_else(|| err(format!("unknown key `{key}`")))?;
            if seen.iter().any(|(k, _)| *k == key) {
                return Err(err(format!("duplicate key `{key}`")));
            }
            seen.push((key, line));
            let f = || parse_f64(value).map_err(&err);
            match key {
                "measure" => {
                    c.measure = match value {
                        "uniform" => MeasureKind::Uniform,
                        "cantor" => MeasureKind::Cantor,
                        "random" => MeasureKind::Random,
                        _ => return Err(err(format!("measure must be uniform, cantor or random, got `{value}`"))),
                    }
                }
                "branching" => c.branching = parse_num(value).map_err(&err)?,
                "survivors" => c.survivors = parse_num(value).map_err(&err)?,
                "depth" => c.depth = parse_num(value).map_err(&err)?,
                "seed" => c.seed = parse_num(value).map_err(&err)?,
                "polynomial" => {
                    c.polynomial = Polynomial::parse(value).map_err(|e| err(e.to_string()))?
                }
                "gamma" => c.gamma = f()?,
                "alpha" => c.conditions.alpha = f()?,
                "beta" => c.conditions.beta = f()?,
                "c1" => c.conditions.c1 = f()?,
                "c2" => c.conditions.c2 = f()?,
                "b" => c.conditions.b = f()?,
                "a" => c.a = f()?,
                "grid_level" => c.grid_level = parse_num(value).map_err(&err)?,
                "cutoff" => c.cutoff = parse_num(value).map_err(&err)?,
                "c0" => c.c0 = f()?,
                "c_m" => {
                    c.c_m = match value {
                        "auto" => None,
                        _ => Some(f()?),
                    }
                }
                "ratio" => c.ratio = f()?,
                "k_max" => c.k_max = parse_num(value).map_err(&err)?,
                "l_start" => {
                    c.l_start = match value {
                        "auto" => None,
                        _ => Some(parse_num(value).map_err(&err)?),
                    }
                }
                "s0" => c.s0 = f()?,
                "mixed_cutoff" => c.mixed_cutoff = parse_num(value).map_err(&err)?,
                "pattern_depth" => c.pattern_depth = parse_num(value).map_err(&err)?,
                "budget" => c.budget = parse_num(value).map_err(&err)?,
                "epsilons" => {
                    c.epsilons = value
                        .split(',')
                        .map(|s| parse_f64(s.trim()))
                        .collect::<std::result::Result<_, _>>()
                        .map_err(&err)?
                }
                "out_dir" => c.out_dir = PathBuf::from(value),
                _ => unreachable!("key list and match agree"),
            }
        }
        let line_of = |names: &[&str]| {
            names
                .iter()
                .filter_map(|n| seen.iter().find(|(k, _)| k == n).map(|(_, l)| *l))
                .max()
                .unwrap_or(0)
        };
        c.validate().map_err(|(fields, message)| Error::Config {
            line: line_of(fields),
            message,
        })?;
        Ok(c)
    }

    fn validate(&self) -> std::result::Result<(), (&'static [&'static str], String)> {
        if self.measure != MeasureKind::Uniform {
            self.spec()
                .validate()
                .map_err(|e| (&["branching", "survivors", "depth"][..], e.to_string()))?;
            let pat = CantorSpec {
                depth: self.pattern_depth,
                ..self.spec()
            };
            pat.validate()
                .map_err(|e| (&["pattern_depth"][..], format!("pattern_depth: {e}")))?;
        }
        self.conditions
            .validate()
            .map_err(|e| (&["alpha", "beta", "c1", "c2", "b"][..], e.to_string()))?;
        let check = |ok: bool, fields: &'static [&'static str], msg: &str| {
            if ok {
                Ok(())
            } else {
                Err((fields, msg.to_string()))
            }
        };
        check(self.gamma >= 2.0, &["gamma"], "gamma must be at least 2")?;
        check(self.a > 0.0, &["a"], "a must be positive")?;
        check((1..=26).contains(&self.grid_level), &["grid_level"], "grid_level must lie in 1..=26")?;
        check(
            self.cutoff >= 1 && 2 * self.cutoff < (1usize << self.grid_level),
            &["cutoff", "grid_level"],
            "cutoff must satisfy 1 <= 2 cutoff < 2^grid_level",
        )?;
        check(self.c0 > 0.0, &["c0"], "c0 must be positive")?;
        check(self.c_m.is_none_or(|v| v > 0.0), &["c_m"], "c_m must be positive")?;
        check(self.ratio > 1.0, &["ratio"], "ratio must exceed 1")?;
        check(self.l_start.is_none_or(|l| l >= 0), &["l_start"], "l_start must be nonnegative")?;
        check(self.s0 > 0.0 && self.s0 < 1.0, &["s0"], "s0 must lie in (0, 1)")?;
        check(self.mixed_cutoff >= 1, &["mixed_cutoff"], "mixed_cutoff must be positive")?;
        check(self.budget >= 1, &["budget"], "budget must be positive")?;
        let h = 2f64.powi(-(self.grid_level as i32));
        check(
            !self.epsilons.is_empty()
                && self.epsilons.iter().all(|e| *e >= h)
                && self.epsilons.windows(2).all(|w| w[1] < w[0]),
            &["epsilons", "grid_level"],
            "epsilons must decrease strictly and stay above the cell width",
        )?;
        Ok(())
    }

    pub fn spec(&self) -> CantorSpec {
        CantorSpec {
            branching: self.branching,
            survivors: self.survivors,
            depth: self.depth,
            randomized: self.measure == MeasureKind::Random,
            seed: self.seed,
        }
    }

    /// Canonical text form: every key, fixed order.
    pub fn to_config_string(&self) -> String {
        let c = &self.conditions;
        let opt = |v: Option<String>| v.unwrap_or_else(|| "auto".into());
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("measure", self.measure.name().into());
        kv("branching", self.branching.to_string());
        kv("survivors", self.survivors.to_string());
        kv("depth", self.depth.to_string());
        kv("seed", self.seed.to_string());
        kv("polynomial", self.polynomial.to_config_string());
        kv("gamma", fmt_f64(self.gamma));
        kv("alpha", fmt_f64(c.alpha));
        kv("beta", fmt_f64(c.beta));
        kv("c1", fmt_f64(c.c1));
        kv("c2", fmt_f64(c.c2));
        kv("b", fmt_f64(c.b));
        kv("a", fmt_f64(self.a));
        kv("grid_level", self.grid_level.to_string());
        kv("cutoff", self.cutoff.to_string());
        kv("c0", fmt_f64(self.c0));
        kv("c_m", opt(self.c_m.map(fmt_f64)));
        kv("ratio", fmt_f64(self.ratio));
        kv("k_max", self.k_max.to_string());
        kv("l_start", opt(self.l_start.map(|l| l.to_string())));
        kv("s0", fmt_f64(self.s0));
        kv("mixed_cutoff", self.mixed_cutoff.to_string());
        kv("pattern_depth", self.pattern_depth.to_string());
        kv("budget", self.budget.to_string());
        kv(
            "epsilons",
            self.epsilons.iter().map(|e| fmt_f64(*e)).collect::<Vec<_>>().join(", "),
        );
        kv("out_dir", self.out_dir.display().to_string());
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructSummary {
    pub cells: usize,
    pub mass: f64,
    pub max_density: f64,
    pub dimension: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionsSummary {
    /// Measured `C1` at the target `alpha`.
    pub ball_constant: f64,
    pub ball_holds: bool,
    /// `(beta, max_k |c_k| |k|^{beta/2})`.
    pub decay_profile: Vec<(f64, f64)>,
    /// `C2 (1 - alpha)^{-B}`.
    pub decay_target: f64,
    pub decay_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecomposeSummary {
    pub n: f64,
    pub sup_mu1: f64,
    pub min_mu1: f64,
    pub m: f64,
    pub sup_within_bound: bool,
    pub truncated: bool,
    pub mu2_zero_mode: f64,
    pub mu2_is_zero: bool,
    pub decay_driver: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedSummary {
    pub report: MixedTermReport,
    /// `c0 / 8`, the size each mixed value must stay below.
    pub target: f64,
    pub all_below_target: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternSummary {
    pub l0: i32,
    /// Window scales the interval set and the grid both resolve.
    pub feasible_l0: [i32; 2],
    pub intervals: usize,
    pub certified: usize,
    pub endpoint_witnesses: usize,
    pub inconclusive: usize,
    pub expansions: u64,
    pub pattern_found: bool,
    /// Up to five certified triples in text form.
    pub sample: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: String,
    pub l0: i32,
    pub construct: Option<ConstructSummary>,
    pub conditions: Option<ConditionsSummary>,
    pub decompose: Option<DecomposeSummary>,
    pub scan: Option<TrilinearReport>,
    pub mixed: Option<MixedSummary>,
    pub patterns: Option<PatternSummary>,
    pub nu_mass: Option<NuMassResult>,
}

fn staged<T>(stage: Stage, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage {
        stage: stage.name().into(),
        source: Box::new(e),
    })
}

const DECAY_BETAS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Run the stages up to and including `last`, writing every output file
/// into `out`.
pub fn run_experiment(config: &ExperimentConfig, last: Stage, out: &Path) -> Result<ExperimentReport> {
    fs::create_dir_all(out)?;
    let p = &config.polynomial;
    let setup = scale_setup(p, config.gamma)?;
    let mut report = ExperimentReport {
        config: config.to_config_string(),
        l0: setup.l0,
        construct: None,
        conditions: None,
        decompose: None,
        scan: None,
        mixed: None,
        patterns: None,
        nu_mass: None,
    };
    let run = |s: Stage| s <= last;

    let mu = staged(Stage::Construct, match config.measure {
        MeasureKind::Uniform => GridDensity::uniform(config.grid_level),
        MeasureKind::Cantor => cantor_measure(&config.spec(), config.grid_level),
        MeasureKind::Random => random_salem_measure(&config.spec(), config.grid_level),
    })?;
    report.construct = Some(ConstructSummary {
        cells: mu.len(),
        mass: mu.mass(),
        max_density: mu.max(),
        dimension: match config.measure {
            MeasureKind::Uniform => 1.0,
            _ => config.spec().dimension(),
        },
    });

    if run(Stage::Conditions) {
        let cond = &config.conditions;
        let c1 = staged(Stage::Conditions, ball_constant(&mu, cond.alpha))?;
        let series = staged(Stage::Conditions, fourier_coeffs(&mu, config.cutoff))?;
        let profile: Vec<(f64, f64)> = DECAY_BETAS
            .iter()
            .map(|&b| (b, decay_constant(&series, b)))
            .collect();
        let target = cond.c2 * (1.0 - cond.alpha).powf(-cond.b);
        let at_beta = decay_constant(&series, cond.beta);
        let mut csv = String::from("beta,decay_constant\n");
        for (b, v) in &profile {
            let _ = writeln!(csv, "{b},{v:e}");
        }
        fs::write(out.join("decay.csv"), csv)?;
        report.conditions = Some(ConditionsSummary {
            ball_constant: c1,
            ball_holds: c1 <= cond.c1,
            decay_profile: profile,
            decay_target: target,
            decay_holds: at_beta <= target,
        });
    }

    let mut mu1_grid = None;
    let mut parts = None;
    if run(Stage::Decompose) {
        let series = staged(Stage::Decompose, fourier_coeffs(&mu, config.cutoff))?;
        let d = staged(Stage::Decompose, decompose(&series, &config.conditions, config.a))?;
        let z = d.mu2.get(0);
        report.decompose = Some(DecomposeSummary {
            n: d.n,
            sup_mu1: d.sup_bound,
            min_mu1: d.min_value,
            m: d.m,
            sup_within_bound: d.sup_within_bound(),
            truncated: d.truncated,
            mu2_zero_mode: z.norm(),
            mu2_is_zero: d.mu2.iter().all(|(_, c)| c.norm() == 0.0),
            decay_driver: mixed_decay_driver(&config.conditions, config.s0),
        });
        mu1_grid = Some(staged(Stage::Decompose, cell_averages(&d.mu1, config.grid_level))?);
        parts = Some((d.mu1, d.mu2));
    }

    let mut certified = None;
    if run(Stage::Scan) {
        let f = mu1_grid.as_ref().expect("decompose ran");
        let mut params = ScanParams::new(config.l_start.unwrap_or(setup.l0));
        params.c0 = config.c0;
        params.ratio = config.ratio;
        params.k_max = config.k_max;
        params.c_m = config.c_m;
        let r = staged(Stage::Scan, scale_scan(f, p, &params))?;
        fs::write(out.join("scan.csv"), r.to_csv())?;
        certified = r.certified_scale;
        report.scan = Some(r);
    }
    let l_pattern = certified.unwrap_or(setup.l0);

    if run(Stage::Mixed) {
        let (mu1, mu2) = parts.as_ref().expect("decompose ran");
        let k = config.mixed_cutoff.min(config.cutoff);
        let table = MultiplierTable::tabulate(p, l_pattern, k);
        staged(Stage::Mixed, table.write(&out.join("multiplier.bin")))?;
        let r = staged(
            Stage::Mixed,
            mixed_term_bounds(&mu1.with_cutoff(k), &mu2.with_cutoff(k), &table, config.s0),
        )?;
        let mut csv = String::from("i1,i2,i3,value,bound\n");
        for ((l, v), b) in r.labels.iter().zip(&r.values).zip(&r.bounds) {
            let _ = writeln!(csv, "{},{},{},{v:e},{b:e}", l[0], l[1], l[2]);
        }
        fs::write(out.join("mixed.csv"), csv)?;
        let target = config.c0 / 8.0;
        report.mixed = Some(MixedSummary {
            all_below_target: r.values.iter().all(|v| *v <= target),
            report: r,
            target,
        });
    }

    if run(Stage::Patterns) {
        let set = staged(Stage::Patterns, match config.measure {
            MeasureKind::Uniform => Ok(IntervalSet::unit()),
            _ => IntervalSet::from_cantor(&CantorSpec {
                depth: config.pattern_depth,
                ..config.spec()
            }),
        })?;
        let max_l0 = set
            .max_resolvable_l0()
            .unwrap_or(i32::MAX)
            .min(config.grid_level as i32 - 3);
        let feasible_l0 = [setup.l0, max_l0];
        if l_pattern > max_l0 {
            return Err(Error::Stage {
                stage: Stage::Patterns.name().into(),
                source: Box::new(Error::ResolutionExceeded {
                    scale: l_pattern as u32,
                    reason: format!("feasible l0 range is {}..={max_l0}", setup.l0),
                }),
            });
        }
        let r = staged(Stage::Patterns, find_configurations(&set, p, l_pattern, config.budget))?;
        fs::write(out.join("triples.txt"), r.to_text())?;
        report.patterns = Some(PatternSummary {
            l0: l_pattern,
            feasible_l0,
            intervals: set.len(),
            certified: r.triples.len(),
            endpoint_witnesses: r.triples.iter().filter(|t| t.endpoint_witness).count(),
            inconclusive: r.inconclusive.len(),
            expansions: r.expansions,
            pattern_found: !r.triples.is_empty(),
            sample: r.triples.iter().take(5).map(|t| t.to_line()).collect(),
        });
    }

    if run(Stage::NuMass) {
        let r = staged(Stage::NuMass, nu_mass(&mu, p, l_pattern, &config.epsilons))?;
        fs::write(out.join("nu_mass.csv"), r.to_csv())?;
        report.nu_mass = Some(r);
    }

    fs::write(out.join("report.txt"), render_report(&report, true))?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(out.join("summary.json"), json)?;
    Ok(report)
}

/// Human-readable report; the first line carries a timestamp when asked.
pub fn render_report(r: &ExperimentReport, timestamp: bool) -> String {
    let mut s = String::new();
    if timestamp {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let _ = writeln!(s, "# generated at unix time {secs}");
    }
    s.push_str("## config\n");
    s.push_str(&r.config);
    let _ = writeln!(s, "\n## scale setup\nl0 = {}", r.l0);
    if let Some(c) = &r.construct {
        let _ = writeln!(
            s,
            "\n## construct\ncells = {}\nmass = {:.15}\nmax_density = {:e}\ndimension = {:.6}",
            c.cells, c.mass, c.max_density, c.dimension
        );
    }
    if let Some(c) = &r.conditions {
        let _ = writeln!(
            s,
            "\n## conditions\nball_constant = {:e}\nball_holds = {}\ndecay_target = {:e}\ndecay_holds = {}",
            c.ball_constant, c.ball_holds, c.decay_target, c.decay_holds
        );
        for (b, v) in &c.decay_profile {
            let _ = writeln!(s, "decay[beta={b}] = {v:e}");
        }
    }
    if let Some(d) = &r.decompose {
        let _ = writeln!(
            s,
            "\n## decompose\nN = {:e}\nsup_mu1 = {:e}\nmin_mu1 = {:e}\nM = {:e}\nsup_within_bound = {}\ntruncated = {}\nmu2(0) = {:e}\nmu2_is_zero = {}\ndecay_driver = {:e}",
            d.n, d.sup_mu1, d.min_mu1, d.m, d.sup_within_bound, d.truncated, d.mu2_zero_mode, d.mu2_is_zero, d.decay_driver
        );
    }
    if let Some(t) = &r.scan {
        s.push_str("\n## scan\n");
        s.push_str(&t.to_text());
    }
    if let Some(m) = &r.mixed {
        let _ = writeln!(
            s,
            "\n## mixed\nC_l0 = {:e}\ntarget = {:e}\nall_below_target = {}",
            m.report.c_l0, m.target, m.all_below_target
        );
        for ((l, v), b) in m.report.labels.iter().zip(&m.report.values).zip(&m.report.bounds) {
            let _ = writeln!(s, "({},{},{}) value = {v:e} bound = {b:e}", l[0], l[1], l[2]);
        }
    }
    if let Some(p) = &r.patterns {
        let _ = writeln!(
            s,
            "\n## patterns\nl0 = {}\nfeasible_l0 = {}..={}\nintervals = {}\ncertified = {}\nendpoint_witnesses = {}\ninconclusive = {}\nexpansions = {}\npattern_found = {}",
            p.l0, p.feasible_l0[0], p.feasible_l0[1], p.intervals, p.certified, p.endpoint_witnesses, p.inconclusive, p.expansions, p.pattern_found
        );
        for line in &p.sample {
            let _ = writeln!(s, "triple {line}");
        }
    }
    if let Some(n) = &r.nu_mass {
        s.push_str("\n## nu_mass\n");
        for (e, v) in n.epsilons.iter().zip(&n.values) {
            let _ = writeln!(s, "eps = {e:e} value = {v:.15e}");
        }
        for c in &n.cauchy {
            let _ = writeln!(s, "cauchy = {c:e}");
        }
        let _ = writeln!(
            s,
            "limit_estimate = {:.15e}\nresidual = {:e}",
            n.limit_estimate, n.residual
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_idempotent() {
        let c = ExperimentConfig::default();
        let text = c.to_config_string();
        let back = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_config_string(), text);
    }

    #[test]
    fn errors_name_line_and_field() {
        let e = ExperimentConfig::parse("depth = 3\nbogus = 1\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: 2, .. }));
        let e = ExperimentConfig::parse("# cantor\nbranching = 3\nsurvivors = 4\n").unwrap_err();
        match e {
            Error::Config { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("survivors"), "{message}");
            }
            other => panic!("{other}"),
        }
        assert!(ExperimentConfig::parse("alpha = 1.5").is_err());
        assert!(ExperimentConfig::parse("seed = 1\nseed = 2").is_err());
        assert!(ExperimentConfig::parse("epsilons = 2^-9, 2^-8").is_err());
    }

    #[test]
    fn unresolvable_window_reports_the_feasible_range() {
        let dir = tempfile::tempdir().unwrap();
        let c = ExperimentConfig::parse(
            "depth = 4\npattern_depth = 2\ngrid_level = 11\ncutoff = 64\nmixed_cutoff = 8\n",
        )
        .unwrap();
        let e = run_experiment(&c, Stage::Patterns, dir.path()).unwrap_err();
        assert!(e.to_string().contains("feasible l0 range"), "{e}");
    }

    #[test]
    fn uniform_pipeline_is_degenerate() {
        let dir = tempfile::tempdir().unwrap();
        let c = ExperimentConfig::parse(
            "measure = uniform\ngrid_level = 11\ncutoff = 64\nmixed_cutoff = 8\nepsilons = 2^-6, 2^-7\n",
        )
        .unwrap();
        let r = run_experiment(&c, Stage::NuMass, dir.path()).unwrap();
        let scan = r.scan.unwrap();
        assert_eq!(scan.certified_scale, Some(r.l0));
        assert!((scan.scales[0].lambda - 1.0).abs() < 1e-9);
        assert!(r.decompose.unwrap().mu2_is_zero);
        assert!(r.patterns.unwrap().pattern_found);
        assert!(r.mixed.unwrap().report.values.iter().all(|v| *v == 0.0));
        for f in ["report.txt", "summary.json", "scan.csv", "multiplier.bin", "nu_mass.csv"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
    }
}
