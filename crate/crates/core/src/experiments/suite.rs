//! The generated bases and the experiment runner behind `verify`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    certify_discrete_partition, certify_example3, certify_example4, certify_example5, certify_example_lp,
    certify_theorem1, khintchine_ratio, Config, ExperimentReport, DEFAULT_P_GRID,
};
use crate::bases::{
    disjoint_indicators, disjointly_supported, haar_basis, independent_digit_functions, indicator_rademacher_grid,
    rademacher_basis, HaarG,
};
use crate::error::{Error, Result};
use crate::norms::BasisSequence;
use crate::stepfn::{DisjointDyadicSets, DyadicInterval, DyadicSet, StepFunction};

/// A generated basis with a short label used in report names.
#[derive(Debug, Clone)]
pub struct NamedBasis {
    pub label: String,
    pub basis: BasisSequence<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExperimentName {
    Theorem1,
    ExampleLp,
    Example3,
    Example4,
    DiscretePartition,
    Haar,
    Khintchine,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 7] = [
        Self::Theorem1,
        Self::ExampleLp,
        Self::Example3,
        Self::Example4,
        Self::DiscretePartition,
        Self::Haar,
        Self::Khintchine,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Theorem1 => "theorem1",
            Self::ExampleLp => "example-lp",
            Self::Example3 => "example3",
            Self::Example4 => "example4",
            Self::DiscretePartition => "discrete-partition",
            Self::Haar => "haar",
            Self::Khintchine => "khintchine",
        }
    }

    /// Whether the experiment can run on a caller-supplied basis.
    pub fn accepts_basis(self) -> bool {
        !matches!(self, Self::Example3 | Self::Haar)
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|e| e.as_str() == s).ok_or_else(|| {
            let known: Vec<&str> = Self::ALL.iter().map(|e| e.as_str()).collect();
            format!("unknown experiment `{s}` (known: {})", known.join(", "))
        })
    }
}

/// Everything `verify` needs besides the experiment names.
#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub p_grid: Vec<f64>,
    pub config: Config,
    /// `M` for the Haar experiment.
    pub haar_level: u32,
    /// Replaces the generated bases; its own `p` is used.
    pub basis: Option<BasisSequence<f64>>,
}

impl SuiteOptions {
    pub fn new(config: Config) -> Self {
        Self { p_grid: DEFAULT_P_GRID.to_vec(), config, haar_level: 6, basis: None }
    }
}

fn interval(level: u32, index: u64) -> Result<DyadicSet> {
    Ok(DyadicInterval::new(level, index)?.into())
}

/// `[0, 1/2)` and `[1/2, 1)`.
pub fn halves() -> Result<DisjointDyadicSets> {
    DisjointDyadicSets::new(vec![interval(1, 0)?, interval(1, 1)?])
}

/// Four disjoint sets of different measures, one of them a union of two
/// intervals; `[29/32, 15/16)` is left uncovered.
pub fn mixed_sets() -> Result<DisjointDyadicSets> {
    DisjointDyadicSets::new(vec![
        interval(1, 0)?,
        interval(2, 2)?,
        DyadicSet::new(vec![DyadicInterval::new(3, 6)?, DyadicInterval::new(4, 15)?]),
        interval(5, 28)?,
    ])
}

/// Four sign-changing functions supported on the quarters, at level 5.
fn quarter_functions() -> Result<Vec<StepFunction<f64>>> {
    (0..4)
        .map(|n| {
            StepFunction::from_fn(5, |k| {
                if k / 8 != n {
                    return 0.0;
                }
                let mag = 1.0 + ((k * 7 + n * 3) % 5) as f64;
                if k % 2 == 0 {
                    mag
                } else {
                    -0.5 * mag
                }
            })
        })
        .collect()
}

/// The bases used when no basis is supplied, all normalized in `L_p`.
pub fn standard_bases(p: f64) -> Result<Vec<NamedBasis>> {
    let named = |label: &str, basis| NamedBasis { label: label.to_string(), basis };
    Ok(vec![
        named("halves", disjoint_indicators(&halves()?, p)?),
        named("mixed-indicators", disjoint_indicators(&mixed_sets()?, p)?),
        named("disjoint-functions", disjointly_supported(quarter_functions()?, p)?),
        named("grid-halves-3", indicator_rademacher_grid(&halves()?, 3, p)?),
        named("rademacher-4", rademacher_basis(4, p)?),
        named(
            "digits",
            independent_digit_functions(
                &[vec![1, 2], vec![3], vec![4, 5]],
                &[vec![2.0, -1.0, 0.5, -1.5], vec![1.0, -1.0], vec![3.0, 1.0, -1.0, -3.0]],
                p,
            )?,
        ),
        named("haar-3", haar_basis(3, p)?),
    ])
}

fn pick(all: &[NamedBasis], labels: &[&str]) -> Vec<NamedBasis> {
    all.iter().filter(|b| labels.contains(&b.label.as_str())).cloned().collect()
}

/// For each level `n = 1..=M`: the uniform `b` and two random ones.
pub fn default_haar_family(max_level: u32, p: f64, seed: u64) -> Result<Vec<HaarG<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for n in 1..=max_level {
        out.push(HaarG::uniform(n, p)?);
        for _ in 0..2 {
            let b: Vec<f64> = (0..1usize << (n - 1)).map(|_| rng.random::<f64>()).collect();
            out.push(HaarG::normalized(n, b, p)?);
        }
    }
    Ok(out)
}

fn rename(mut r: ExperimentReport, name: ExperimentName, label: &str) -> ExperimentReport {
    r.name = format!("{name}/{label}");
    r.metadata.insert("basis".into(), label.into());
    r
}

/// Runs one experiment at one `p`, over the generated bases or the supplied one.
pub fn run_experiment(name: ExperimentName, p: f64, opts: &SuiteOptions) -> Result<Vec<ExperimentReport>> {
    let cfg = &opts.config;
    let bases = match &opts.basis {
        Some(basis) => {
            if !name.accepts_basis() {
                return Err(Error::Unsupported(format!("experiment `{name}` builds its own basis")));
            }
            vec![NamedBasis { label: "user".into(), basis: basis.clone() }]
        }
        None => {
            let all = standard_bases(p)?;
            match name {
                ExperimentName::Theorem1 | ExperimentName::DiscretePartition => all,
                ExperimentName::ExampleLp => pick(&all, &["halves", "mixed-indicators", "disjoint-functions"]),
                ExperimentName::Example4 => pick(&all, &["rademacher-4", "digits"]),
                ExperimentName::Khintchine => pick(&all, &["halves", "rademacher-4", "digits", "haar-3"]),
                ExperimentName::Example3 | ExperimentName::Haar => Vec::new(),
            }
        }
    };
    let run = |f: fn(&BasisSequence<f64>, &Config) -> Result<ExperimentReport>| {
        bases.iter().map(|b| Ok(rename(f(&b.basis, cfg)?, name, &b.label))).collect::<Result<Vec<_>>>()
    };
    match name {
        ExperimentName::Theorem1 => run(certify_theorem1),
        ExperimentName::ExampleLp => run(certify_example_lp),
        ExperimentName::Example4 => run(certify_example4),
        ExperimentName::DiscretePartition => run(certify_discrete_partition),
        ExperimentName::Khintchine => run(khintchine_ratio),
        ExperimentName::Example3 => Ok(vec![
            rename(certify_example3(&halves()?, 2, cfg, p)?, name, "halves-2"),
            rename(certify_example3(&mixed_sets()?, 4, cfg, p)?, name, "mixed-4"),
        ]),
        ExperimentName::Haar => {
            let m = opts.haar_level;
            let family = default_haar_family(m, p, cfg.seed)?;
            Ok(vec![rename(certify_example5(m, p, &family, cfg, true)?, name, &format!("M{m}"))])
        }
    }
}

/// Runs every `(p, experiment)` job, one thread per job; reports come back
/// in `p`-major order regardless of scheduling.
pub fn run_suite(names: &[ExperimentName], opts: &SuiteOptions) -> Result<Vec<ExperimentReport>> {
    let p_grid: Vec<f64> = match &opts.basis {
        Some(b) => vec![b.p()],
        None => opts.p_grid.clone(),
    };
    let jobs: Vec<(f64, ExperimentName)> = p_grid.iter().flat_map(|&p| names.iter().map(move |&n| (p, n))).collect();
    let results: Vec<Result<Vec<ExperimentReport>>> = std::thread::scope(|s| {
        let handles: Vec<_> = jobs.iter().map(|&(p, name)| s.spawn(move || run_experiment(name, p, opts))).collect();
        handles.into_iter().map(|h| h.join().expect("experiment thread panicked")).collect()
    });
    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}
