use std::time::Instant;

use pwnorm_core::bases::{haar, haar_g, haar_indices, haar_weight_closed_form, BasisDescriptor, HaarG};
use pwnorm_core::duality::{sample_g, GSampler};
use pwnorm_core::experiments::{
    fmt_sci10, fmt_sci17, reports_to_csv, reports_to_json, run_suite, to_json_string, Config, ExperimentName,
    SuiteOptions,
};
use pwnorm_core::norms::{ell_p_norm, expansion_norm, family_norm_breakdown, square_function_norm};
use pwnorm_core::{Coefficients64, Family64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::io::{emit, read_json};
use crate::{Cli, CliError, Command, Format, HaarTableArgs, NormArgs, SampleGArgs, Sampler, SquareArgs, VerifyArgs};

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Norm(args) => norm(cli, args),
        Command::Square(args) => square(cli, args),
        Command::Verify(args) => verify(cli, args),
        Command::HaarTable(args) => haar_table(cli, args),
        Command::SampleG(args) => sample(cli, args),
    }
}

fn check_p(p: f64) -> Result<(), CliError> {
    if p.is_finite() && p > 2.0 {
        Ok(())
    } else {
        Err(CliError::usage(format!("--p must be a finite number greater than 2, got {p}")))
    }
}

fn csv_error(e: impl std::fmt::Display) -> CliError {
    CliError::io(format!("cannot format CSV: {e}"))
}

fn json_error(e: serde_json::Error) -> CliError {
    CliError::io(format!("cannot format JSON: {e}"))
}

#[derive(Serialize)]
struct NormOutput {
    p: f64,
    norm: f64,
    pairs: Vec<f64>,
}

fn norm(cli: &Cli, args: &NormArgs) -> Result<(), CliError> {
    check_p(args.p)?;
    let a: Coefficients64 = read_json(&args.coeffs, "coefficients")?;
    let family: Family64 = read_json(&args.family, "family")?;
    let pairs = family_norm_breakdown(&a, &family, args.p)?;
    let value = pairs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let text = match cli.format {
        None => {
            let mut s = format!("{}\n", fmt_sci17(value));
            if cli.verbose {
                for (k, v) in pairs.iter().enumerate() {
                    s.push_str(&format!("pair {k}: {}\n", fmt_sci10(*v)));
                }
            }
            s
        }
        Some(Format::Json) => to_json_string(&NormOutput { p: args.p, norm: value, pairs }).map_err(json_error)?,
        Some(Format::Csv) => {
            let mut s = String::from("pair,value\n");
            for (k, v) in pairs.iter().enumerate() {
                s.push_str(&format!("{k},{}\n", fmt_sci17(*v)));
            }
            s
        }
    };
    emit(cli.out.as_deref(), &text)
}

#[derive(Serialize)]
struct SquareOutput {
    p: f64,
    #[serde(rename = "N")]
    n: usize,
    square_function_norm: f64,
    ell_p_norm: f64,
    expansion_norm: f64,
}

fn square(cli: &Cli, args: &SquareArgs) -> Result<(), CliError> {
    if let Some(p) = args.p {
        check_p(p)?;
    }
    let a: Coefficients64 = read_json(&args.coeffs, "coefficients")?;
    let descriptor: BasisDescriptor = read_json(&args.basis, "basis")?;
    let basis = descriptor.build(args.p)?;
    let p = basis.p();
    let sq = square_function_norm(&a, &basis)?;
    let out = || -> Result<SquareOutput, CliError> {
        Ok(SquareOutput {
            p,
            n: basis.len(),
            square_function_norm: sq,
            ell_p_norm: ell_p_norm(&a, p)?,
            expansion_norm: expansion_norm(&a, &basis)?,
        })
    };
    let text = match cli.format {
        None => {
            let mut s = format!("{}\n", fmt_sci17(sq));
            if cli.verbose {
                let o = out()?;
                s.push_str(&format!(
                    "ell_p: {}\nexpansion: {}\n",
                    fmt_sci10(o.ell_p_norm),
                    fmt_sci10(o.expansion_norm)
                ));
            }
            s
        }
        Some(Format::Json) => to_json_string(&out()?).map_err(json_error)?,
        Some(Format::Csv) => {
            let o = out()?;
            format!(
                "p,N,square_function_norm,ell_p_norm,expansion_norm\n{},{},{},{},{}\n",
                fmt_sci17(o.p),
                o.n,
                fmt_sci17(o.square_function_norm),
                fmt_sci17(o.ell_p_norm),
                fmt_sci17(o.expansion_norm)
            )
        }
    };
    emit(cli.out.as_deref(), &text)
}

fn verify(cli: &Cli, args: &VerifyArgs) -> Result<(), CliError> {
    let names: Vec<ExperimentName> = if args.all {
        ExperimentName::ALL.to_vec()
    } else {
        let mut names = args
            .experiments
            .iter()
            .map(|s| s.parse::<ExperimentName>().map_err(CliError::usage))
            .collect::<Result<Vec<_>, _>>()?;
        names.sort();
        names.dedup();
        names
    };
    if let Some(p) = args.p {
        check_p(p)?;
    }
    if args.max_level == 0 {
        return Err(CliError::usage("--max-level must be at least 1"));
    }
    let mut opts = SuiteOptions::new(Config::new(args.trials, args.seed));
    opts.haar_level = args.max_level;
    if let Some(p) = args.p {
        opts.p_grid = vec![p];
    }
    if let Some(path) = &args.basis {
        let descriptor: BasisDescriptor = read_json(path, "basis")?;
        let basis = descriptor.build(args.p)?;
        if let Some(bad) = names.iter().find(|n| !n.accepts_basis()) {
            return Err(CliError::usage(format!("experiment `{bad}` does not take --basis")));
        }
        opts.basis = Some(basis);
    }

    let start = Instant::now();
    let reports = run_suite(&names, &opts)?;
    let elapsed = start.elapsed();

    let text = match cli.format.unwrap_or(Format::Json) {
        Format::Json => reports_to_json(&reports).map_err(json_error)?,
        Format::Csv => reports_to_csv(&reports).map_err(csv_error)?,
    };
    emit(cli.out.as_deref(), &text)?;

    let failed: Vec<_> = reports.iter().filter(|r| !r.pass).collect();
    for r in &reports {
        if cli.verbose || !r.pass {
            eprintln!(
                "{} {} p={} N={} lhs={} rhs={}",
                if r.pass { "PASS" } else { "FAIL" },
                r.name,
                r.p,
                r.n,
                fmt_sci10(r.lhs),
                fmt_sci10(r.rhs)
            );
            for c in r.checks.iter().filter(|c| !c.pass) {
                eprintln!(
                    "  check {} failed: lhs={} rhs={} violation={}",
                    c.name,
                    fmt_sci10(c.lhs),
                    fmt_sci10(c.rhs),
                    fmt_sci10(c.worst_violation)
                );
            }
        }
    }
    if cli.verbose {
        eprintln!("{} reports in {:.3} s", reports.len(), elapsed.as_secs_f64());
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::certification(format!("{} of {} certifications failed", failed.len(), reports.len())))
    }
}

#[derive(Serialize)]
struct HaarRow {
    m: u32,
    l: u64,
    closed_form: f64,
    direct_integral: f64,
    abs_diff: f64,
}

fn haar_table(cli: &Cli, args: &HaarTableArgs) -> Result<(), CliError> {
    check_p(args.p)?;
    if args.b.is_empty() {
        return Err(CliError::usage("--b is required"));
    }
    let hg = HaarG::new(args.n, args.b.clone(), args.p)?;
    let g = haar_g(&hg)?;
    let max = args.max_level.unwrap_or(args.n + 2);
    let mut rows = Vec::new();
    for idx in haar_indices(max).into_iter().filter(|i| i.n >= args.min_level) {
        let h = haar(idx, args.p)?;
        let direct = g.g().mul(&h.mul(&h)?)?.integral();
        let closed = haar_weight_closed_form(&hg, idx.n, idx.k)?;
        rows.push(HaarRow {
            m: idx.n,
            l: idx.k,
            closed_form: closed,
            direct_integral: direct,
            abs_diff: (closed - direct).abs(),
        });
    }
    let text = match cli.format.unwrap_or(Format::Csv) {
        Format::Json => to_json_string(&rows).map_err(json_error)?,
        Format::Csv => {
            let mut s = String::from("m,l,closed_form,direct_integral,abs_diff\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.m,
                    r.l,
                    fmt_sci17(r.closed_form),
                    fmt_sci17(r.direct_integral),
                    fmt_sci17(r.abs_diff)
                ));
            }
            s
        }
    };
    emit(cli.out.as_deref(), &text)
}

fn sample(cli: &Cli, args: &SampleGArgs) -> Result<(), CliError> {
    check_p(args.p)?;
    let sampler = match args.sampler {
        Sampler::SquaredNormal => GSampler::SquaredNormal,
        Sampler::Uniform => GSampler::Uniform,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let gs = (0..args.count)
        .map(|_| sample_g::<f64, _>(&mut rng, args.max_level, args.p, sampler))
        .collect::<Result<Vec<_>, _>>()?;
    let text = match cli.format.unwrap_or(Format::Json) {
        Format::Json => to_json_string(&gs).map_err(json_error)?,
        Format::Csv => {
            let mut s = String::from("g,cell,value\n");
            for (i, g) in gs.iter().enumerate() {
                for (k, v) in g.g().values().iter().enumerate() {
                    s.push_str(&format!("{i},{k},{}\n", fmt_sci17(*v)));
                }
            }
            s
        }
    };
    emit(cli.out.as_deref(), &text)
}
