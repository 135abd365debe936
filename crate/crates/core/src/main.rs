use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nlburgers::exact::InitialDatumId;
use nlburgers::experiments::{self, SolveRequest, TestId, Variant};
use nlburgers::kernels::KernelFamily;
use nlburgers::schemes::{Method, Problem};

#[derive(Parser)]
#[command(name = "nlburgers", version, about = "Finite-volume experiments for the local and nonlocal Burgers equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single solver configuration and write snapshot CSVs.
    Solve(SolveArgs),
    /// Run one of the standard experiments T1..T7.
    Test(TestArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// local | nonlocal
    #[arg(long)]
    problem: String,
    /// lf | godunov
    #[arg(long)]
    scheme: String,
    /// A | B | C | D | E | F
    #[arg(long)]
    datum: String,
    /// even | left | right (nonlocal only)
    #[arg(long)]
    kernel: Option<String>,
    /// kernel radius (nonlocal only)
    #[arg(long)]
    eps: Option<f64>,
    /// mesh width; dt is h/6
    #[arg(long)]
    h: f64,
    #[arg(long)]
    tfinal: f64,
    /// comma-separated snapshot times, e.g. 0,1,2
    #[arg(long, default_value = "")]
    snapshots: String,
    /// domain as lo,hi (defaults to -6,8)
    #[arg(long, default_value = "-6,8", allow_hyphen_values = true)]
    domain: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TestArgs {
    /// T1..T7
    test: String,
    /// fixed | coupled (panels of T3, T6, T7)
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    out: PathBuf,
    /// use the full-resolution h = 0.001 fixed-mesh panels (slow)
    #[arg(long, default_value_t = false)]
    paper_scale: bool,
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    if s.trim().is_empty() {
        return Ok(vec![]);
    }
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad number '{t}': {e}")))
        .collect()
}

fn run_solve(args: &SolveArgs) -> Result<(), String> {
    let problem = Problem::parse(&args.problem)
        .ok_or_else(|| format!("unknown problem '{}' (expected local|nonlocal)", args.problem))?;
    let method = Method::parse(&args.scheme)
        .ok_or_else(|| format!("unknown scheme '{}' (expected lf|godunov)", args.scheme))?;
    let datum = InitialDatumId::parse(&args.datum)
        .ok_or_else(|| format!("unknown datum '{}' (expected A..F)", args.datum))?;
    let kernel_family = match &args.kernel {
        Some(k) => Some(
            KernelFamily::parse(k)
                .ok_or_else(|| format!("unknown kernel '{k}' (expected even|left|right)"))?,
        ),
        None => None,
    };
    let domain = {
        let v = parse_list(&args.domain)?;
        if v.len() != 2 || v[0] >= v[1] {
            return Err(format!("bad --domain '{}': expected lo,hi with lo < hi", args.domain));
        }
        (v[0], v[1])
    };
    let req = SolveRequest {
        problem,
        method,
        datum,
        kernel_family,
        eps: args.eps,
        h: args.h,
        t_final: args.tfinal,
        snapshot_times: parse_list(&args.snapshots)?,
        domain,
        out: args.out.clone(),
    };
    let traj = experiments::solve(&req).map_err(|e| e.to_string())?;
    println!(
        "solve: {} steps, {} snapshots written to {}",
        traj.n_steps,
        traj.snapshots.len(),
        args.out.display()
    );
    Ok(())
}

fn run_test_cmd(args: &TestArgs) -> Result<(), String> {
    let test = TestId::parse(&args.test)
        .ok_or_else(|| format!("unknown test '{}' (expected T1..T7)", args.test))?;
    let variant = match &args.variant {
        Some(v) => Some(
            Variant::parse(v).ok_or_else(|| format!("unknown variant '{v}' (expected fixed|coupled)"))?,
        ),
        None => None,
    };
    let summaries = experiments::run_test(test, variant, None, &args.out, args.paper_scale)
        .map_err(|e| e.to_string())?;
    for s in &summaries {
        let label = s
            .plan
            .variant
            .map(|v| format!(" ({})", v.as_str()))
            .unwrap_or_default();
        println!(
            "{}{}: {} rows in {:.1}s",
            s.plan.test.as_str(),
            label,
            s.rows.len(),
            s.total_wall_s
        );
        for r in &s.rates {
            let eps = r.eps.map(|e| format!(" eps={e}")).unwrap_or_default();
            println!(
                "  rate {} datum={}{} p={}: {:.3}",
                r.scheme.label(),
                r.datum.as_str(),
                eps,
                r.p,
                r.rate
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Test(args) => run_test_cmd(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
