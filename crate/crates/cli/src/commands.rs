use std::fs::File;
use std::io::{self, BufWriter, Write};

use stabilis::amenability::{
    excess_factor, probe_catalog, recheck_witness, strassen_excess_closed_form, strassen_point, AmenabilityError,
};
use stabilis::condition::{
    kappa_closed_form, kappa_sampled_catalog, kappa_via_jacobian, CatalogFunction, ConditionError, Method,
    SampleOptions,
};
use stabilis::fp::{ExactReal, FpNumber, Precision};
use stabilis::harness::{
    log_grid, sine_experiment, strassen_experiment, HarnessError, SineConfig, StrassenConfig,
};
use stabilis::relmetric::RelPoint;
use thiserror::Error;

use crate::expr::{parse_point, ExprError};
use crate::output::{format_f64, write_table, Cell, RunConfig, Table};
use crate::{AmenArgs, Cli, Command, CondArgs, ExcessArgs, SineArgs, StrassenArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{op} failed: {message}")]
    Compute { op: &'static str, message: String },
    #[error("writing output: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute { .. } | CliError::Io(_) => 3,
        }
    }
}

impl From<ExprError> for CliError {
    fn from(e: ExprError) -> Self {
        CliError::Config(e.to_string())
    }
}

fn compute<E: std::fmt::Display>(op: &'static str) -> impl Fn(E) -> CliError {
    move |e| CliError::Compute {
        op,
        message: e.to_string(),
    }
}

fn harness_err(op: &'static str) -> impl Fn(HarnessError) -> CliError {
    move |e| match e {
        HarnessError::InvalidConfig(m) => CliError::Config(m.to_string()),
        e => compute(op)(e),
    }
}

fn precision(t: u32) -> Result<Precision, CliError> {
    Precision::new(t).map_err(|e| CliError::Config(e.to_string()))
}

fn function(id: &str) -> Result<CatalogFunction, CliError> {
    CatalogFunction::from_id(id).map_err(|e| CliError::Config(e.to_string()))
}

fn join_point(x: &[f64]) -> String {
    x.iter().map(|v| format_f64(*v)).collect::<Vec<_>>().join(";")
}

fn exact_point(x: &[f64]) -> String {
    x.iter()
        .map(|v| FpNumber::from_f64(*v).map(|f| f.to_exact_string()).unwrap_or_else(|_| "nan".into()))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let (config, table) = match &cli.command {
        Command::Strassen(args) => strassen(cli, args)?,
        Command::Sine(args) => sine(cli, args)?,
        Command::Cond(args) => cond(cli, args)?,
        Command::Amen(args) => amen(cli, args)?,
        Command::Excess(args) => excess(cli, args)?,
    };
    match &cli.output {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write_table(&mut w, &config, &table)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write_table(&mut w, &config, &table)?;
        }
    }
    Ok(())
}

fn strassen(cli: &Cli, args: &StrassenArgs) -> Result<(RunConfig, Table), CliError> {
    let p = precision(args.t)?;
    let seed = args.seed.seed;
    let cfg = if args.full {
        StrassenConfig {
            precision: p,
            ..StrassenConfig::full(seed)
        }
    } else {
        let (lo, hi) = (args.eps[0], args.eps[1]);
        if !(lo > 0.0 && lo <= hi && hi < 1.0) {
            return Err(CliError::Config("need 0 < MIN <= MAX < 1 for --eps".into()));
        }
        if args.n_eps == 0 {
            return Err(CliError::Config("--n-eps must be at least 1".into()));
        }
        StrassenConfig {
            eps: log_grid(lo, hi, args.n_eps),
            samples: args.samples,
            seed,
            precision: p,
        }
    };
    let mut config = RunConfig::new("strassen", cli.format)
        .param("eps_min", cfg.eps[0])
        .param("eps_max", *cfg.eps.last().expect("nonempty grid"))
        .param("n_eps", cfg.eps.len())
        .param("samples", cfg.samples)
        .param("u", p.unit_roundoff_f64());
    config.seed = Some(seed);
    config.t = Some(args.t);
    let rows = strassen_experiment(&cfg).map_err(harness_err("strassen experiment"))?;
    let mut table = Table::new(&["epsilon", "rel_p05", "rel_med", "rel_p95", "abs_p05", "abs_med", "abs_p95"]);
    for r in rows {
        table.push(vec![
            r.epsilon.into(),
            r.rel_p05.into(),
            r.rel_med.into(),
            r.rel_p95.into(),
            r.abs_p05.into(),
            r.abs_med.into(),
            r.abs_p95.into(),
        ]);
    }
    Ok((config, table))
}

fn sine(cli: &Cli, args: &SineArgs) -> Result<(RunConfig, Table), CliError> {
    let cfg = SineConfig {
        k_max: args.k_max,
        precision: precision(args.t)?,
        guard: args.guard,
    };
    let mut config = RunConfig::new("sine", cli.format)
        .param("k_max", args.k_max)
        .param("guard", args.guard);
    config.t = Some(args.t);
    let rows = sine_experiment(&cfg).map_err(harness_err("sine experiment"))?;
    let mut table = Table::new(&["k", "u", "rel_lop"]);
    for r in rows {
        table.push(vec![Cell::Int(r.input_id as i64), r.u().into(), r.rel_lop.into()]);
    }
    Ok((config, table))
}

fn condition_err(op: &'static str) -> impl Fn(ConditionError) -> CliError {
    move |e| match e {
        ConditionError::Arity(_) | ConditionError::OutsideDomain | ConditionError::UnknownFunction(_) => {
            CliError::Config(e.to_string())
        }
        e => compute(op)(e),
    }
}

fn cond(cli: &Cli, args: &CondArgs) -> Result<(RunConfig, Table), CliError> {
    let f = function(&args.function)?;
    let x = parse_point(&args.point)?;
    let mut config = RunConfig::new("cond", cli.format)
        .param("function", f.id())
        .param("point", args.point.clone())
        .param("sample", args.sample)
        .param("jacobian", args.jacobian);
    let report = if args.sample {
        config.seed = Some(args.seed.seed);
        let opts = SampleOptions {
            seed: args.seed.seed,
            ..SampleOptions::default()
        };
        kappa_sampled_catalog(&f, &x, &opts).map_err(condition_err("sampled condition estimate"))?
    } else {
        let point = RelPoint::from_f64s(&x).map_err(|e| CliError::Config(e.to_string()))?;
        if args.jacobian {
            kappa_via_jacobian(&f, &point).map_err(condition_err("Jacobian condition number"))?
        } else {
            kappa_closed_form(&f, &point).map_err(condition_err("closed-form condition number"))?
        }
    };
    let (method, converged) = match report.method {
        Method::ClosedForm => ("closed-form", Cell::Missing),
        Method::Jacobian => ("jacobian", Cell::Missing),
        Method::Sampled { converged, divergent } => (
            if divergent { "sampled-divergent" } else { "sampled" },
            Cell::Bool(converged),
        ),
    };
    let mut table = Table::new(&["function", "point", "point_exact", "kappa", "kappa_tilde", "method", "converged"]);
    table.push(vec![
        f.id().into(),
        join_point(&x).into(),
        exact_point(&x).into(),
        report.kappa.into(),
        report.kappa_tilde.into(),
        method.into(),
        converged,
    ]);
    Ok((config, table))
}

fn amenability_err(op: &'static str) -> impl Fn(AmenabilityError) -> CliError {
    move |e| match e {
        AmenabilityError::InvalidParameter(m) => CliError::Config(m.to_string()),
        AmenabilityError::Condition(c) => condition_err(op)(c),
        e => compute(op)(e),
    }
}

fn amen(cli: &Cli, args: &AmenArgs) -> Result<(RunConfig, Table), CliError> {
    let f = function(&args.function)?;
    let x = parse_point(&args.x)?;
    let mut config = RunConfig::new("amen", cli.format)
        .param("function", f.id())
        .param("point", args.x.clone())
        .param("a", args.a)
        .param("n", args.n);
    config.seed = Some(args.seed.seed);
    let v = probe_catalog(&f, &x, args.a, args.n, args.seed.seed).map_err(amenability_err("amenability probe"))?;
    let (witness, witness_kt, verified) = match &v.witness {
        Some(w) => (
            Cell::Text(join_point(&w.point)),
            Cell::Num(w.kappa_tilde),
            Cell::Bool(recheck_witness(&f, &x, &v)),
        ),
        None => (Cell::Missing, Cell::Missing, Cell::Missing),
    };
    let mut table = Table::new(&[
        "function",
        "point",
        "a",
        "kappa_tilde",
        "radius",
        "samples",
        "domain_ok",
        "growth_ok",
        "verdict",
        "witness",
        "witness_kappa_tilde",
        "witness_verified",
    ]);
    table.push(vec![
        f.id().into(),
        join_point(&x).into(),
        v.a.into(),
        v.kappa_tilde.into(),
        v.radius.into(),
        Cell::Int(v.samples_used as i64),
        v.domain_ok.into(),
        v.growth_ok.into(),
        if v.passed() { "PASS" } else { "FAIL" }.into(),
        witness,
        witness_kt,
        verified,
    ]);
    Ok((config, table))
}

fn excess(cli: &Cli, args: &ExcessArgs) -> Result<(RunConfig, Table), CliError> {
    let g = function(&args.g)?;
    let h = function(&args.h)?;
    let mut config = RunConfig::new("excess", cli.format)
        .param("g", g.id())
        .param("h", h.id());
    let (x, lower_bound) = match (&args.eps, &args.x) {
        (Some(eps), _) => {
            let closed = strassen_excess_closed_form(*eps).map_err(amenability_err("Strassen closed form"))?;
            config = config.param("eps", *eps);
            let lb = ExactReal::Rational(closed.lower_bound).to_f64();
            (strassen_point(*eps), Cell::Num(lb))
        }
        (None, Some(point)) => {
            config = config.param("point", point.clone());
            (parse_point(point)?, Cell::Missing)
        }
        (None, None) => return Err(CliError::Config("give --eps or --x".into())),
    };
    let r = excess_factor(&g, &h, &x).map_err(amenability_err("excess factor"))?;
    let mut table = Table::new(&["g", "h", "point", "kt_g_at_hx", "kt_h_at_x", "kt_f_at_x", "excess", "lower_bound"]);
    table.push(vec![
        g.id().into(),
        h.id().into(),
        join_point(&x).into(),
        r.kt_g_at_hx.into(),
        r.kt_h_at_x.into(),
        r.kt_f_at_x.into(),
        r.excess.into(),
        lower_bound,
    ]);
    Ok((config, table))
}
