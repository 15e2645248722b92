use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use netgame::analysis::{self, Axis, AxisValue, SweepBase};
use netgame::game::{equilibrium, Regime};
use netgame::intervene::{
    intervention_gain, optimal_intervention, simple_intervention, small_budget_intervention,
};
use netgame::report::{format_number, format_opt, Table};
use netgame::{Error, NamedGraph, Scenario, UtilityVector};

#[derive(Parser)]
#[command(
    name = "netgame",
    version,
    about = "Equilibria and welfare-optimal interventions in multi-activity network games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report the regularity margins and regime; fails if a margin is too small.
    Check(ScenarioArg),
    /// Equilibrium efforts and utilities as CSV.
    Equilibrium {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Budget-constrained intervention as CSV, with a summary on stderr.
    Intervene {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Budget; overrides the one in the scenario file.
        #[arg(long)]
        budget: Option<f64>,
        /// Use the closed-form large-budget construction.
        #[arg(long, conflicts_with = "small_budget")]
        simple: bool,
        /// Use the small-budget construction (needs nonzero baseline utilities).
        #[arg(long)]
        small_budget: bool,
        /// Also write the summary as a two-column CSV.
        #[arg(long)]
        summary: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Parameter sweep as CSV.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Swept quantity: C, beta, delta, l or graph.
        #[arg(long)]
        axis: String,
        /// Comma-separated grid (numbers, or graph names such as G1,G2,path:5).
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        /// Optional second quantity, one curve per value.
        #[arg(long, requires = "values")]
        by: Option<String>,
        /// Comma-separated values of the `--by` quantity.
        #[arg(long, requires = "by", allow_hyphen_values = true)]
        values: Option<String>,
        /// Budget; overrides the one in the scenario file.
        #[arg(long)]
        budget: Option<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Welfare-improvement ratio for the first `l` activities.
    Ratio {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Number of targeted activities (1..=k).
        #[arg(long)]
        l: usize,
        /// Finite budget.
        #[arg(long, conflicts_with = "limit")]
        budget: Option<f64>,
        /// Symbolic budget limit.
        #[arg(long)]
        limit: Option<Limit>,
    },
}

#[derive(Args)]
struct ScenarioArg {
    /// Scenario file (JSON).
    scenario: PathBuf,
}

#[derive(Args)]
struct OutArgs {
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Limit {
    Inf,
    Zero,
}

/// Failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::AssumptionViolated { .. }
            | Error::NoConvergence { .. }
            | Error::NotPositiveDefinite(_)
            | Error::Singular(_)
            | Error::ZeroBaseline(_)
            | Error::DegenerateGap
            | Error::Precondition(_) => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Check(s) => check(&load(&s.scenario)?),
        Command::Equilibrium { scenario, out } => {
            write_table(
                &equilibrium_table(&load(&scenario.scenario)?)?,
                out.out.as_deref(),
            )?;
            Ok(0)
        }
        Command::Intervene {
            scenario,
            budget,
            simple,
            small_budget,
            summary,
            out,
        } => {
            let method = match (simple, small_budget) {
                (true, _) => Method::Simple,
                (_, true) => Method::SmallBudget,
                _ => Method::Exact,
            };
            let (table, summary_rows) = intervene(&load(&scenario.scenario)?, budget, method)?;
            write_table(&table, out.out.as_deref())?;
            let mut st = Table::new(["key", "value"]);
            for (k, v) in &summary_rows {
                eprintln!("{k}: {v}");
                st.push(vec![k.clone(), v.clone()]);
            }
            if let Some(path) = summary {
                write_table(&st, Some(&path))?;
            }
            Ok(0)
        }
        Command::Sweep {
            scenario,
            axis,
            grid,
            by,
            values,
            budget,
            out,
        } => {
            let s = load(&scenario.scenario)?;
            let axis: Axis = axis.parse()?;
            let grid = parse_values(axis, &grid)?;
            let series = match (by, values) {
                (Some(by), Some(values)) => {
                    let by: Axis = by.parse()?;
                    let values = parse_values(by, &values)?;
                    Some((by, values))
                }
                _ => None,
            };
            let table = sweep_table(
                &s,
                axis,
                &grid,
                series.as_ref().map(|(a, v)| (*a, v.as_slice())),
                budget,
            )?;
            write_table(&table, out.out.as_deref())?;
            Ok(0)
        }
        Command::Ratio {
            scenario,
            l,
            budget,
            limit,
        } => {
            ratio(&load(&scenario.scenario)?, l, budget, limit)?;
            Ok(0)
        }
    }
}

fn load(path: &Path) -> Result<Scenario, Failure> {
    Scenario::from_file(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write_table(table: &Table, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|e| Failure {
                code: 1,
                message: format!("cannot create {}: {e}", path.display()),
            })?;
            table.write_to(std::io::BufWriter::new(file))?;
        }
        None => table.write_to(std::io::stdout().lock())?,
    }
    Ok(())
}

fn check(s: &Scenario) -> Result<u8, Failure> {
    let params = s.params()?;
    let margins = params.margins();
    println!("sum_margin: {}", format_number(margins.sum));
    println!("difference_margin: {}", format_number(margins.diff));
    println!("activities: {}", params.regime());
    println!("network: {}", spillover_label(params.delta()));
    if params.has_spillover() {
        println!("cross_spillover: {}", format_number(params.gamma()));
    }
    if margins.holds() {
        println!("phi: {}", format_number(analysis::phi(&params)?));
        println!("status: pass");
        Ok(0)
    } else {
        println!("status: fail");
        Ok(1)
    }
}

fn spillover_label(delta: f64) -> &'static str {
    if delta > 0.0 {
        "strategic complements"
    } else if delta < 0.0 {
        "strategic substitutes"
    } else {
        "no spillover"
    }
}

fn equilibrium_table(s: &Scenario) -> Result<Table, Failure> {
    let params = s.params()?;
    params.ensure_valid()?;
    let a = s.a_hat()?;
    let eq = equilibrium(&params, &a)?;
    let mut t = Table::new(["agent", "activity", "a", "x_star", "utility"]);
    for act in 0..s.k {
        for agent in 0..s.n {
            t.push(vec![
                agent.to_string(),
                (act + 1).to_string(),
                format_number(a.get(agent, act)),
                format_number(eq.x_star.get(agent, act)),
                format_number(eq.per_agent_utilities[agent]),
            ]);
        }
    }
    t.push(vec![
        "welfare".into(),
        String::new(),
        String::new(),
        String::new(),
        format_number(eq.welfare),
    ]);
    Ok(t)
}

#[derive(Clone, Copy)]
enum Method {
    Exact,
    Simple,
    SmallBudget,
}

type Summary = Vec<(String, String)>;

fn intervene(
    s: &Scenario,
    budget: Option<f64>,
    method: Method,
) -> Result<(Table, Summary), Failure> {
    let prob = s.problem(budget)?;
    prob.params().ensure_valid()?;
    let optimum = optimal_intervention(&prob)?;
    let (a_star, name) = match method {
        Method::Exact => (optimum.a_star.clone(), "exact"),
        Method::Simple => (simple_intervention(&prob)?, "simple"),
        Method::SmallBudget => (small_budget_intervention(&prob)?, "small-budget"),
    };
    let a_hat = prob.a_hat();
    let shift = UtilityVector::new(a_hat.k(), a_hat.n(), a_star.values() - a_hat.values())?;
    let mut t = Table::new(["agent", "activity", "a_hat", "a_star", "shift"]);
    for act in 0..s.k {
        for agent in 0..s.n {
            t.push(vec![
                agent.to_string(),
                (act + 1).to_string(),
                format_number(a_hat.get(agent, act)),
                format_number(a_star.get(agent, act)),
                format_number(shift.get(agent, act)),
            ]);
        }
    }
    let mut summary: Summary = vec![
        ("method".into(), name.into()),
        ("budget".into(), format_number(prob.budget())),
        (
            "baseline_welfare".into(),
            format_number(optimum.baseline_welfare),
        ),
    ];
    let mut add = |k: &str, v: String| summary.push((k.into(), v));
    match method {
        Method::Exact => {
            add("welfare", format_number(optimum.welfare));
            add("gain", format_number(optimum.welfare_gain));
            add("multiplier", format_number(optimum.multiplier));
            add("alignment", format_number(optimum.alignment));
            add("binding", optimum.binding.to_string());
            add("hard_case", optimum.hard_case.to_string());
        }
        Method::Simple | Method::SmallBudget => {
            let gain = intervention_gain(&prob, &a_star)?;
            add(
                "welfare",
                format_number(equilibrium(prob.params(), &a_star)?.welfare),
            );
            add("gain", format_number(gain));
            add("optimal_gain", format_number(optimum.welfare_gain));
            let ratio = (optimum.welfare_gain > 0.0).then(|| gain / optimum.welfare_gain);
            add("gain_ratio", format_opt(ratio));
            add("cost", format_number(prob.shift_cost(&shift)));
        }
    }
    Ok((t, summary))
}

fn parse_values(axis: Axis, list: &str) -> Result<Vec<AxisValue>, Failure> {
    list.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| match axis {
            Axis::Graph => v
                .parse::<NamedGraph>()
                .map(AxisValue::Graph)
                .map_err(Failure::from),
            _ => v
                .parse::<f64>()
                .map(AxisValue::Number)
                .map_err(|_| usage(format!("`{v}` is not a number (axis {})", axis.name()))),
        })
        .collect()
}

fn sweep_table(
    s: &Scenario,
    axis: Axis,
    grid: &[AxisValue],
    series: Option<(Axis, &[AxisValue])>,
    budget: Option<f64>,
) -> Result<Table, Failure> {
    let base = SweepBase {
        net: s.network()?,
        k: s.k,
        beta: s.beta,
        delta: s.delta,
        gamma: s.gamma(),
        a_hat: s.a_hat.clone(),
        budget: budget.or(s.budget),
        costs: s.costs.clone(),
    };
    let rows = analysis::sweep(&base, axis, grid, series)?;
    let mut header: Vec<&str> = Vec::new();
    if let Some((by, _)) = series {
        header.push(by.name());
    }
    let axis_name = if axis == Axis::L {
        "l_value"
    } else {
        axis.name()
    };
    header.push(axis_name);
    header.extend([
        "l",
        "status",
        "w_hat",
        "w_star",
        "gain",
        "rho",
        "rho_inf",
        "phi",
        "theta",
        "alignment",
    ]);
    let mut t = Table::new(header);
    let show = |v: &AxisValue| match v {
        AxisValue::Number(x) => format_number(*x),
        AxisValue::Graph(g) => g.to_string(),
    };
    for r in rows {
        let mut row = Vec::new();
        if series.is_some() {
            row.push(r.series.as_ref().map(show).unwrap_or_default());
        }
        row.push(show(&r.value));
        row.push(r.l.to_string());
        row.push(r.status.to_string());
        for v in [
            r.w_hat,
            r.w_star,
            r.gain,
            r.rho,
            r.rho_inf,
            r.phi,
            r.theta,
            r.alignment,
        ] {
            row.push(format_opt(v));
        }
        t.push(row);
    }
    Ok(t)
}

fn ratio(s: &Scenario, l: usize, budget: Option<f64>, limit: Option<Limit>) -> Result<(), Failure> {
    let params = s.params()?;
    params.ensure_valid()?;
    if l == 0 || l > s.k {
        return Err(usage(format!("--l must be in 1..={}", s.k)));
    }
    let regime = params.regime();
    println!("l: {l}");
    println!("activities: {regime}");
    let phi = analysis::phi(&params)?;
    println!("phi: {}", format_number(phi));
    let budget = match (budget, limit) {
        (Some(c), _) => Some(c),
        (None, Some(_)) => None,
        (None, None) => match s.budget {
            Some(c) => Some(c),
            None => {
                return Err(usage(
                    "give --budget, --limit, or a budget in the scenario file",
                ))
            }
        },
    };
    if let Some(c) = budget {
        let prob = s.problem(Some(c))?;
        println!("budget: {}", format_number(c));
        println!("rho: {}", format_number(analysis::rho_finite(&prob, l, c)?));
        println!(
            "rho_inf: {}",
            format_number(analysis::rho_infinity(&params, l)?)
        );
        match analysis::rho_zero(&prob, l) {
            Ok(r) => println!("rho_zero: {}", format_number(r)),
            Err(_) => println!("rho_zero: "),
        }
        return Ok(());
    }
    match limit.expect("limit is set when budget is not") {
        Limit::Inf => {
            println!("budget: inf");
            println!(
                "rho: {}",
                format_number(analysis::rho_infinity_spectral(&params, l)?)
            );
            let form = if params.has_spillover() {
                "top-slope ratio"
            } else {
                match regime {
                    Regime::Substitutes if l == 1 => "(k-1+phi)/k",
                    Regime::Substitutes | Regime::Independent => "1",
                    Regime::Complements => "(l+(k-l)/phi)/k",
                }
            };
            println!(
                "closed_form: {}",
                format_number(analysis::rho_infinity(&params, l)?)
            );
            println!("formula: {form}");
        }
        Limit::Zero => {
            let prob = s.problem(Some(s.budget.unwrap_or(1.0)))?;
            let closed = analysis::rho_zero(&prob, l)?;
            let tiny = 1e-12 * prob.a_hat().norm().powi(2).max(1.0);
            println!("budget: zero");
            println!(
                "rho: {}",
                format_number(analysis::rho_finite(&prob, l, tiny)?)
            );
            println!("closed_form: {}", format_number(closed));
            println!("formula: |P_L a_hat| / |P a_hat|");
        }
    }
    Ok(())
}
