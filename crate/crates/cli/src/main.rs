//! `perlat`: build, extend, search for and verify perfect Latin rectangles.
//!
//! Exit codes: 0 success, 1 verified false, 2 usage/I/O/parse error,
//! 3 budget exhausted or θ unresolved.

mod output;

use std::fmt::Write as FmtWrite;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use perlat::extension::{
    certify_extension, execute_chain, extend, plan_chain, ExtensionError, ExtensionPlan,
};
use perlat::factorization::{oracle_perfection, to_factorization};
use perlat::generators::{bound, cyclic};
use perlat::lrect;
use perlat::perfection::perfection_report_parallel;
use perlat::registry::Registry;
use perlat::search::{
    search, Method, SearchMode, SearchQuery, Termination, ThetaResult, ThetaSolver, ThetaStatus,
    WidthOutcome,
};
use perlat::{perfection_report, LatinRectangle, PerfectionReport};
use serde::Serialize;

use output::{ChainOutput, OracleOutput, SearchOutput, TraceOutput, VerifyOutput};

const OK: u8 = 0;
const FALSE: u8 = 1;
const ERROR: u8 = 2;
const UNRESOLVED: u8 = 3;

#[derive(Parser)]
#[command(name = "perlat", version, about = "Perfect Latin rectangle toolkit")]
struct Cli {
    /// Print one JSON object instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads; 1 gives bitwise deterministic output.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Reserved for randomized modes; currently has no effect.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Directory of extra perfect squares named `<order>.lrect`.
    #[arg(long, global = true)]
    registry: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    First,
    Count,
    All,
}

impl From<ModeArg> for SearchMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::First => SearchMode::First,
            ModeArg::Count => SearchMode::Count,
            ModeArg::All => SearchMode::All,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Emit the cyclic square of order n.
    GenCyclic { n: usize },
    /// Report the perfect pairs of a rectangle.
    Verify { file: PathBuf },
    /// Widen a perfect rectangle R by a perfect square S.
    Extend {
        r: PathBuf,
        s: PathBuf,
        /// Column of R to delete.
        #[arg(long)]
        col: usize,
        /// Symbol of the relabeled S to overwrite.
        #[arg(long)]
        sym: u32,
        /// First label of the relabeled S (default: width of R).
        #[arg(long)]
        base: Option<u32>,
        /// Write the full trace as JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Plan and run the extension chain for m rows and odd residue i.
    Chain {
        m: u64,
        i: u64,
        /// Write the rectangle here instead of stdout.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Backtracking search for m x n rectangles.
    Search {
        m: usize,
        n: usize,
        #[arg(long, value_enum, default_value = "first")]
        mode: ModeArg,
        /// Restrict to reduced rectangles.
        #[arg(long)]
        reduced: bool,
        /// Node budget.
        #[arg(long, default_value_t = 1_000_000_000)]
        budget: u64,
        /// Only check perfection at leaves.
        #[arg(long)]
        no_prune: bool,
        /// Accept every Latin rectangle, perfect or not.
        #[arg(long)]
        latin_only: bool,
    },
    /// Smallest width k = i (mod m-1) with a perfect m x k rectangle.
    Theta {
        m: u64,
        i: u64,
        #[arg(long)]
        cutoff: u64,
        /// Node budget per direct search.
        #[arg(long)]
        budget: Option<u64>,
    },
    /// θ(m, i) for every odd residue, and their maximum.
    ThetaM {
        m: u64,
        #[arg(long)]
        cutoff: u64,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// The explicit width thresholds for m rows.
    Bound { m: u64 },
    /// Write the rectangle as an edge list of K_{n,n}.
    ExportFactorization {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the permutation and graph-walk perfection checks.
    OracleVerify { file: PathBuf },
}

fn read_rect(path: &Path) -> Result<LatinRectangle> {
    let text = fs::read_to_string(path).with_context(|| format!("{}", path.display()))?;
    lrect::parse(&text)
        .map_err(|e| anyhow!("{}:{}:{}: {}", path.display(), e.line, e.column, e.kind))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("{}", path.display()))
}

fn print_json<T: Serialize>(out: &mut String, v: &T) -> Result<()> {
    out.push_str(&serde_json::to_string_pretty(v)?);
    out.push('\n');
    Ok(())
}

struct Ctx {
    json: bool,
    threads: usize,
    registry: Option<PathBuf>,
}

impl Ctx {
    fn report(&self, r: &LatinRectangle) -> PerfectionReport {
        if self.threads > 1 {
            perfection_report_parallel(r)
        } else {
            perfection_report(r)
        }
    }

    fn solver(&self, budget: Option<u64>) -> Result<ThetaSolver> {
        let registry = match &self.registry {
            Some(dir) => Registry::load_dir(dir).map_err(|e| anyhow!("{}: {e}", dir.display()))?,
            None => Registry::new(),
        };
        let mut solver = ThetaSolver::new(registry);
        solver.threads = self.threads;
        if let Some(b) = budget {
            solver.search_budget = b;
        }
        Ok(solver)
    }
}

fn method_text(m: &Method) -> String {
    match m {
        Method::Registry => "registry".into(),
        Method::Chain {
            seed_order,
            extensions,
        } => format!("chain seed {seed_order} extensions {extensions}"),
        Method::Search { nodes } => format!("search nodes {nodes}"),
    }
}

fn status_text(s: ThetaStatus) -> &'static str {
    match s {
        ThetaStatus::Exact => "exact",
        ThetaStatus::UpperBound => "upper-bound",
        ThetaStatus::UnknownAboveCutoff => "unknown-above-cutoff",
    }
}

fn status_code(s: ThetaStatus) -> u8 {
    if s == ThetaStatus::Exact {
        OK
    } else {
        UNRESOLVED
    }
}

fn value_text(v: Option<u64>) -> String {
    v.map_or_else(|| "unknown".into(), |v| v.to_string())
}

fn theta_text(t: &ThetaResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "m {}", t.m);
    let _ = writeln!(out, "i {}", t.i);
    let _ = writeln!(out, "value {}", value_text(t.value));
    let _ = writeln!(out, "status {}", status_text(t.status));
    for a in &t.attempts {
        let what = match &a.outcome {
            WidthOutcome::Found { method } => format!("found {}", method_text(method)),
            WidthOutcome::Excluded { nodes } => format!("excluded nodes {nodes}"),
            WidthOutcome::Undetermined { nodes } => format!("undetermined nodes {nodes}"),
        };
        let _ = writeln!(out, "width {} {what}", a.width);
    }
    if let Some(w) = &t.witness {
        out.push('\n');
        out.push_str(&lrect::format(w));
    }
    out
}

fn run(cli: Cli, out: &mut String) -> Result<u8> {
    let ctx = Ctx {
        json: cli.json,
        threads: cli.threads,
        registry: cli.registry,
    };
    match cli.command {
        Command::GenCyclic { n } => {
            let r = cyclic(n)?;
            if ctx.json {
                print_json(out, &r)?;
            } else {
                out.push_str(&lrect::format(&r));
            }
            Ok(OK)
        }

        Command::Verify { file } => {
            let r = read_rect(&file)?;
            let report = ctx.report(&r);
            let code = if report.perfect { OK } else { FALSE };
            if ctx.json {
                print_json(
                    out,
                    &VerifyOutput {
                        rows: r.rows(),
                        cols: r.cols(),
                        report,
                    },
                )?;
            } else {
                let _ = writeln!(out, "shape {} {}", r.rows(), r.cols());
                let _ = write!(out, "{report}");
            }
            Ok(code)
        }

        Command::Extend {
            r,
            s,
            col,
            sym,
            base,
            trace,
        } => {
            let rr = read_rect(&r)?;
            let ss = read_rect(&s)?;
            let plan = ExtensionPlan {
                column: col,
                symbol: sym,
                relabel_base: base.unwrap_or(rr.cols() as u32),
            };
            let t = match extend(&rr, &ss, plan) {
                Ok(t) => t,
                Err(e @ ExtensionError::NotPerfect { .. }) => {
                    eprintln!("error: {e}");
                    return Ok(FALSE);
                }
                Err(e) => return Err(e.into()),
            };
            let witnesses = certify_extension(&t).map_err(|e| anyhow!("certification: {e}"))?;
            let payload = TraceOutput {
                plan: t.plan,
                substitution_column: t.substitution_column.clone(),
                deleted_column_symbols: t.deleted_column_symbols.clone(),
                raw: t.raw.to_rows(),
                labels: t.labels.clone(),
                result: t.result.clone(),
                witnesses: witnesses.iter().map(Into::into).collect(),
            };
            if let Some(path) = trace {
                write_file(&path, &(serde_json::to_string_pretty(&payload)? + "\n"))?;
            }
            if ctx.json {
                print_json(out, &payload)?;
            } else {
                out.push_str(&lrect::format(&t.result));
            }
            Ok(OK)
        }

        Command::Chain { m, i, emit } => {
            let plan = plan_chain(m, i)?;
            let result = execute_chain(&plan)?;
            if let Some(path) = &emit {
                write_file(path, &lrect::format(&result))?;
            }
            if ctx.json {
                print_json(
                    out,
                    &ChainOutput {
                        plan,
                        result,
                        perfect: true,
                    },
                )?;
                return Ok(OK);
            }
            let _ = writeln!(out, "m {}", plan.m);
            let _ = writeln!(out, "r {}", plan.r);
            let _ = writeln!(out, "target_i {}", plan.target_i);
            let _ = writeln!(out, "j {}", plan.j);
            let _ = writeln!(out, "width {}", plan.width);
            for (k, s) in plan.steps.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "step {k} column {} symbol {} base {}",
                    s.column, s.symbol, s.relabel_base
                );
            }
            let _ = writeln!(out, "perfect true");
            if emit.is_none() {
                out.push('\n');
                out.push_str(&lrect::format(&result));
            }
            Ok(OK)
        }

        Command::Search {
            m,
            n,
            mode,
            reduced,
            budget,
            no_prune,
            latin_only,
        } => {
            let mut q = SearchQuery::new(m, n, mode.into());
            q.reduced = reduced;
            q.budget = budget;
            q.prune_pairs = !no_prune;
            q.perfect_only = !latin_only;
            q.threads = ctx.threads;
            let start = Instant::now();
            let res = search(&q)?;
            eprintln!("wall {:.3}s", start.elapsed().as_secs_f64());
            let code = match res.termination {
                Termination::BudgetExhausted => UNRESOLVED,
                Termination::Exhausted if q.mode == SearchMode::First => FALSE,
                _ => OK,
            };
            if ctx.json {
                print_json(
                    out,
                    &SearchOutput {
                        rows: m,
                        cols: n,
                        mode: q.mode,
                        reduced: q.reduced,
                        prune_pairs: q.prune_pairs,
                        perfect_only: q.perfect_only,
                        budget: q.budget,
                        stats: res.stats,
                        count: res.count,
                        termination: res.termination,
                        witnesses: res.witnesses,
                    },
                )?;
                return Ok(code);
            }
            let termination = match res.termination {
                Termination::Exhausted => "exhausted",
                Termination::Found => "found",
                Termination::BudgetExhausted => "budget-exhausted",
            };
            let _ = writeln!(out, "nodes {}", res.stats.nodes);
            let _ = writeln!(out, "prunes {}", res.stats.prunes);
            let _ = writeln!(out, "count {}", res.count);
            let _ = writeln!(out, "termination {termination}");
            for w in &res.witnesses {
                out.push('\n');
                out.push_str(&lrect::format(w));
            }
            Ok(code)
        }

        Command::Theta {
            m,
            i,
            cutoff,
            budget,
        } => {
            let t = ctx.solver(budget)?.theta(m, i, cutoff)?;
            let code = status_code(t.status);
            if ctx.json {
                print_json(out, &t)?;
            } else {
                out.push_str(&theta_text(&t));
            }
            Ok(code)
        }

        Command::ThetaM { m, cutoff, budget } => {
            let table = ctx.solver(budget)?.theta_m(m, cutoff)?;
            let code = status_code(table.status);
            if ctx.json {
                print_json(out, &table)?;
                return Ok(code);
            }
            let _ = writeln!(out, "m {}", table.m);
            for e in &table.entries {
                let _ = writeln!(
                    out,
                    "i {} value {} {}",
                    e.i,
                    value_text(e.value),
                    status_text(e.status)
                );
            }
            let _ = writeln!(out, "bound {}", value_text(table.bound));
            let _ = writeln!(out, "status {}", status_text(table.status));
            let _ = writeln!(out, "known {}", value_text(table.known_value));
            Ok(code)
        }

        Command::Bound { m } => {
            let b = bound(m)?;
            if ctx.json {
                print_json(out, &b)?;
            } else {
                let _ = writeln!(out, "m {}", b.m);
                let _ = writeln!(out, "unconditional {}", b.unconditional);
                let _ = writeln!(out, "conditional {}", b.conditional);
            }
            Ok(OK)
        }

        Command::ExportFactorization {
            file,
            out: out_path,
        } => {
            let r = read_rect(&file)?;
            let f = to_factorization(&r);
            if ctx.json {
                print_json(out, &f)?;
            }
            let edges = f.to_edge_list();
            match out_path {
                Some(path) => write_file(&path, &edges)?,
                None if !ctx.json => out.push_str(&edges),
                None => {}
            }
            Ok(OK)
        }

        Command::OracleVerify { file } => {
            let r = read_rect(&file)?;
            let perfection = ctx.report(&r);
            let oracle = oracle_perfection(&r);
            let agree = perfection == oracle;
            let code = if agree && perfection.perfect {
                OK
            } else {
                FALSE
            };
            if ctx.json {
                print_json(
                    out,
                    &OracleOutput {
                        perfection,
                        oracle,
                        agree,
                    },
                )?;
            } else {
                let _ = writeln!(
                    out,
                    "perfection pf {} perfect {}",
                    perfection.pf, perfection.perfect
                );
                let _ = writeln!(out, "oracle pf {} perfect {}", oracle.pf, oracle.perfect);
                let _ = writeln!(out, "agree {agree}");
            }
            Ok(code)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads == 0 {
        eprintln!("error: --threads must be at least 1");
        return ExitCode::from(ERROR);
    }
    if cli.threads > 1 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(ERROR);
        }
    }
    let mut out = String::new();
    let code = match run(cli, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ERROR
        }
    };
    // a closed pipe downstream is not an error of ours
    let mut stdout = io::stdout().lock();
    match stdout
        .write_all(out.as_bytes())
        .and_then(|_| stdout.flush())
    {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
            eprintln!("error: stdout: {e}");
            ExitCode::from(ERROR)
        }
        _ => ExitCode::from(code),
    }
}
