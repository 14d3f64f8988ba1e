//! One function per subcommand, each returning a [`Document`].

use sfsph_core::blockcounting::partition_count;
use sfsph_core::estimators::{self, harmonic, EstimatorKind};
use sfsph_core::intweight::{support_scan, IntWeightedLaw};
use sfsph_core::inversion::{self, invert_cdf, InversionGrid, DEFAULT_H};
use sfsph_core::simulate::{simulate_sfs, SimConfig};
use sfsph_core::{build_model, SfsModel};

use crate::output::{Document, Value};
use crate::{CliError, Command, OutputArgs, StatisticArgs};

/// Probabilities reported as quantiles by `neutrality-cdf`.
pub const QUANTILE_PROBS: [f64; 3] = [0.025, 0.5, 0.975];

/// Values below this are reported as outside the support by `intweight`.
pub const SUPPORT_THRESHOLD: f64 = 1e-14;

pub fn dispatch(command: &Command) -> Result<(Document, &OutputArgs), CliError> {
    let (mut doc, output) = match command {
        Command::Statespace { n, output } => (statespace(*n)?, output),
        Command::Sfs { n, theta, kmax, output } => (sfs(*n, *theta, *kmax)?, output),
        Command::Intweight {
            n,
            theta,
            statistic,
            kmax,
            output,
        } => (intweight(*n, *theta, statistic, *kmax)?, output),
        Command::Estimators { n, theta, output } => (estimators_table(*n, *theta)?, output),
        Command::NeutralityCdf {
            n,
            theta,
            statistic,
            grid_h,
            grid_eta,
            output,
        } => (neutrality_cdf(*n, *theta, statistic, *grid_h, *grid_eta)?, output),
        Command::Simulate {
            n,
            theta,
            statistic,
            reps,
            seed,
            output,
        } => (simulate(*n, *theta, statistic, *reps, *seed)?, output),
    };
    doc.run.push(("format".into(), output.format.name().into()));
    let out = output.out.as_ref().map_or("-".to_string(), |p| p.display().to_string());
    doc.run.push(("out".into(), out.into()));
    Ok((doc, output))
}

fn run_header(command: &str, n: usize, theta: Option<f64>) -> Vec<(String, Value)> {
    let mut run = vec![("command".to_string(), command.into()), ("n".to_string(), n.into())];
    if let Some(theta) = theta {
        run.push(("theta".into(), theta.into()));
    }
    run
}

fn numbered(prefix: &str, count: usize) -> Vec<String> {
    (1..=count).map(|i| format!("{prefix}_{i}")).collect()
}

fn validate_kmax(kmax: usize) -> Result<(), CliError> {
    if kmax > 1_000_000 {
        return Err(CliError::Validation(format!("kmax {kmax} above the limit of 1000000")));
    }
    Ok(())
}

/// A statistic chosen by name or by explicit coefficients.
struct Statistic {
    label: String,
    c: Vec<f64>,
    kind: Option<EstimatorKind>,
}

fn resolve_statistic(args: &StatisticArgs, sm: &SfsModel) -> Result<Option<Statistic>, CliError> {
    let n = sm.sample_size();
    match (&args.stat, &args.coeffs) {
        (Some(name), _) if name == "blue" => Ok(Some(Statistic {
            label: "blue".into(),
            c: estimators::blue_coefficients(sm)?.c,
            kind: None,
        })),
        (Some(name), _) => {
            let w = estimators::classical_coefficients(name, n)?;
            Ok(Some(Statistic {
                label: w.label,
                c: w.c,
                kind: Some(name.parse()?),
            }))
        }
        (None, Some(c)) => {
            if c.len() != n - 1 {
                return Err(CliError::Validation(format!(
                    "--coeffs needs {} values, got {}",
                    n - 1,
                    c.len()
                )));
            }
            if c.iter().any(|x| !x.is_finite()) {
                return Err(CliError::Validation("--coeffs must be finite".into()));
            }
            Ok(Some(Statistic {
                label: "custom".into(),
                c: c.clone(),
                kind: None,
            }))
        }
        (None, None) => Ok(None),
    }
}

fn required_statistic(args: &StatisticArgs, sm: &SfsModel) -> Result<Statistic, CliError> {
    resolve_statistic(args, sm)?.ok_or_else(|| CliError::Validation("one of --stat or --coeffs is required".into()))
}

pub fn statespace(n: usize) -> Result<Document, CliError> {
    let model = build_model(n)?;
    let mut columns = vec!["state".to_string()];
    columns.extend(numbered("a", n - 1));
    columns.extend(["lineages", "total_rate", "exit_rate", "transitions"].map(String::from));
    let mut doc = Document::new(columns);
    doc.run = run_header("statespace", n, None);
    doc.summary("states", model.size());
    doc.summary("partitions", partition_count(n));
    for (k, state) in model.states().iter().enumerate() {
        let mut row: Vec<Value> = vec![(k + 1).into()];
        row.extend(state.counts().iter().map(|&a| Value::from(a)));
        row.push(state.lineages().into());
        row.push(model.total_rate(k).into());
        row.push(model.exit_rate(k).into());
        let moves: Vec<String> = model
            .transitions(k)
            .iter()
            .map(|&(target, rate)| format!("{}:{rate}", target + 1))
            .collect();
        row.push(moves.join(" ").into());
        doc.push_row(row);
    }
    Ok(doc)
}

pub fn sfs(n: usize, theta: f64, kmax: usize) -> Result<Document, CliError> {
    validate_kmax(kmax)?;
    let sm = SfsModel::new(n, theta)?;
    let mut columns = vec!["k".to_string()];
    columns.extend(numbered("xi", n - 1));
    let mut doc = Document::new(columns);
    doc.run = run_header("sfs", n, Some(theta));
    doc.run.push(("kmax".into(), kmax.into()));
    let mut tables = Vec::with_capacity(n - 1);
    let mut means = Vec::with_capacity(n - 1);
    let mut defects = Vec::with_capacity(n - 1);
    for i in 1..n {
        let law = sm.iton_count_law(i)?;
        tables.push(law.pmf_table(kmax));
        means.push(law.mean());
        defects.push(sm.iton_branch_law(i)?.defect());
    }
    doc.summary("mean", means);
    doc.summary("branch_defect", defects);
    for k in 0..=kmax {
        let mut row: Vec<Value> = vec![k.into()];
        row.extend(tables.iter().map(|t| Value::from(t[k])));
        doc.push_row(row);
    }
    Ok(doc)
}

pub fn intweight(n: usize, theta: f64, args: &StatisticArgs, kmax: usize) -> Result<Document, CliError> {
    validate_kmax(kmax)?;
    let sm = SfsModel::new(n, theta)?;
    let (label, c, scale): (String, Vec<i64>, i64) = match (&args.stat, &args.coeffs) {
        (Some(name), _) => {
            let kind: EstimatorKind = name.parse()?;
            let q = kind.rational_coefficients(n)?;
            let scale = (1.0 / kind.value_mesh(n)?).round() as i64;
            let c: Vec<i64> = q.iter().map(|x| (x * scale as i128).to_integer() as i64).collect();
            (kind.name().to_string(), c, scale)
        }
        (None, Some(c)) => {
            let ints = c
                .iter()
                .map(|&x| {
                    if x.fract() == 0.0 && x.abs() < 1e9 {
                        Ok(x as i64)
                    } else {
                        Err(CliError::Validation(format!("coefficient {x} is not an integer")))
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            ("custom".to_string(), ints, 1)
        }
        (None, None) => return Err(CliError::Validation("one of --stat or --coeffs is required".into())),
    };
    let law = IntWeightedLaw::new(&sm, &c)?;
    let mut doc = Document::new(["k", "pmf", "cdf"].map(String::from).to_vec());
    doc.run = run_header("intweight", n, Some(theta));
    doc.run.push(("statistic".into(), label.into()));
    doc.run.push(("kmax".into(), kmax.into()));
    doc.summary("coefficients", c.clone());
    doc.summary("scale", scale);
    doc.summary("block_rows", law.sub_transition().nrows());
    doc.summary("mean", law.mean());
    let expected: f64 = c
        .iter()
        .enumerate()
        .map(|(j, &cj)| cj as f64 * theta / (j + 1) as f64)
        .sum();
    doc.summary("expected_mean", expected);
    let support = support_scan(&law, kmax);
    let gaps: Vec<usize> = (0..=kmax).filter(|k| !support.contains(k)).collect();
    doc.summary("support_gaps", gaps);
    let pmf = law.pmf_table(kmax);
    let mut cumulative = 0.0;
    for (k, p) in pmf.iter().enumerate() {
        cumulative += p;
        doc.push_row(vec![k.into(), (*p).into(), cumulative.into()]);
    }
    Ok(doc)
}

pub fn estimators_table(n: usize, theta: f64) -> Result<Document, CliError> {
    let sm = SfsModel::new(n, theta)?;
    let mut columns = ["label", "role", "bias_weight", "unbiased", "variance"]
        .map(String::from)
        .to_vec();
    columns.extend(numbered("c", n - 1));
    let mut doc = Document::new(columns);
    doc.run = run_header("estimators", n, Some(theta));
    let a1 = harmonic(n);
    doc.summary("a1", format!("{}/{}", a1.numer(), a1.denom()));
    let mut statistics = Vec::new();
    for kind in EstimatorKind::ALL {
        if kind.is_test() && n < 3 {
            continue;
        }
        let role = if kind.is_test() { "test" } else { "estimator" };
        statistics.push((role, estimators::classical_coefficients(kind.name(), n)?));
    }
    statistics.push(("blue", estimators::blue_coefficients(&sm)?));
    for (role, w) in statistics {
        let report = estimators::report(&sm, &w)?;
        let mut row: Vec<Value> = vec![
            report.label.into(),
            role.into(),
            w.bias_weight().into(),
            report.unbiased.into(),
            report.variance.into(),
        ];
        row.extend(report.c.iter().map(|&x| Value::from(x)));
        doc.push_row(row);
    }
    Ok(doc)
}

pub fn neutrality_cdf(
    n: usize,
    theta: f64,
    args: &StatisticArgs,
    grid_h: Option<usize>,
    grid_eta: Option<f64>,
) -> Result<Document, CliError> {
    let sm = SfsModel::new(n, theta)?;
    let stat = required_statistic(args, &sm)?;
    let (mu, sd) = inversion::moments(&sm, &stat.c)?;
    let mesh = match stat.kind {
        Some(kind) => Some(kind.value_mesh(n)?),
        None if stat.c.iter().all(|x| x.fract() == 0.0) => Some(1.0),
        None => None,
    };
    let grid = match (grid_h, grid_eta) {
        (None, None) => match mesh {
            Some(mesh) => InversionGrid::resolving(&sm, &stat.c, mesh)?,
            None => InversionGrid::default_for(&sm, &stat.c)?,
        },
        (Some(h), None) => InversionGrid::with_size(&sm, &stat.c, h)?,
        (h, Some(eta)) => InversionGrid::new(h.unwrap_or(DEFAULT_H), eta, mu)?,
    };
    let table = invert_cdf(&sm, &stat.c, grid)?;
    let q = inversion::quantiles(&table, &QUANTILE_PROBS)?;

    let mut doc = Document::new(["x", "cdf_raw", "cdf"].map(String::from).to_vec());
    doc.run = run_header("neutrality-cdf", n, Some(theta));
    doc.run.push(("statistic".into(), stat.label.into()));
    doc.run.push(("coefficients".into(), stat.c.clone().into()));
    doc.run.push(("grid_H".into(), grid.h.into()));
    doc.run.push(("grid_eta".into(), grid.eta.into()));
    doc.summary("mean", mu);
    doc.summary("sd", sd);
    doc.summary("step", grid.step());
    doc.summary("endpoint_deviation", table.endpoint_deviation);
    doc.summary("monotonicity_violation", table.monotonicity_violation);
    for (p, x) in QUANTILE_PROBS.iter().zip(&q) {
        doc.summary(format!("quantile_{p}"), *x);
    }
    for ((x, raw), f) in table.statistic_points().iter().zip(&table.raw).zip(&table.values) {
        doc.push_row(vec![(*x).into(), (*raw).into(), (*f).into()]);
    }
    Ok(doc)
}

pub fn simulate(n: usize, theta: f64, args: &StatisticArgs, reps: usize, seed: u64) -> Result<Document, CliError> {
    if reps > 100_000_000 {
        return Err(CliError::Validation(format!(
            "reps {reps} above the limit of 100000000"
        )));
    }
    let sm = SfsModel::new(n, theta)?;
    let stat = resolve_statistic(args, &sm)?;
    let cfg = SimConfig::new(n, theta, reps, seed)?;
    let samples = simulate_sfs(&cfg)?;

    let mut columns = vec!["replicate".to_string()];
    columns.extend(numbered("xi", n - 1));
    if stat.is_some() {
        columns.push("statistic".into());
    }
    let mut doc = Document::new(columns);
    doc.run = run_header("simulate", n, Some(theta));
    if let Some(s) = &stat {
        doc.run.push(("statistic".into(), s.label.clone().into()));
        doc.run.push(("coefficients".into(), s.c.clone().into()));
    }
    doc.run.push(("reps".into(), reps.into()));
    doc.run.push(("seed".into(), seed.into()));
    doc.run.push(("generator".into(), "chacha8".into()));
    let mut sums = vec![0.0; n - 1];
    for (r, sample) in samples.iter().enumerate() {
        let mut row: Vec<Value> = vec![(r + 1).into()];
        for (sum, &x) in sums.iter_mut().zip(&sample.sfs) {
            *sum += x as f64;
            row.push(x.into());
        }
        if let Some(s) = &stat {
            let value: f64 = sample.sfs.iter().zip(&s.c).map(|(&x, &w)| x as f64 * w).sum();
            row.push(value.into());
        }
        doc.push_row(row);
    }
    let means: Vec<f64> = sums.iter().map(|s| s / reps as f64).collect();
    doc.summary("sample_mean", means);
    Ok(doc)
}
