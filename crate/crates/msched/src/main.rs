//! Command-line front end: solve, verify, gap, gen, bench.
//!
//! Exit codes: 0 success, 1 failed verification, 2 usage or input trouble,
//! 3 exhaustive-search refusal when the caller demanded it.

use clap::{Parser, Subcommand};
use msched::instances::{
    gen_gap_restricted, gen_gap_uniform, gen_gap_unrelated, gen_random, threshold_grid,
    RandomProfile,
};
use msched::lp::{build_lp, build_lp_pnorm, program_to_lp_text};
use msched::model::{
    instance_from_json, instance_to_json, schedule_from_json, schedule_to_json, verify_schedule,
    Instance, PNorm, Variant,
};
use msched::oracle::{brute_force_makespan, OracleBudget};
use msched::rational::{dec12, fmt_rat, parse_rat, rat, Rat};
use msched::rounding::rounding_to_json;
use msched::search::{min_feasible_target, minimize_makespan, Precision, Scheme};
use msched::weighted::{report_csv, solve_weighted};
use rayon::prelude::*;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "msched", about = "LP-rounding solver for malleable job scheduling")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve an instance and write the schedule as JSON.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        /// simple | filtered | beta | restricted | uniform | pnorm
        #[arg(long)]
        scheme: String,
        /// Override the instance's norm index (a rational, or "inf").
        #[arg(long)]
        p: Option<String>,
        /// makespan | weighted
        #[arg(long, default_value = "makespan")]
        objective: String,
        /// Relative precision of the threshold search.
        #[arg(long, default_value = "1e-6")]
        eps: f64,
        #[arg(long)]
        out: PathBuf,
        /// Write the per-job account of a weighted run as CSV.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Dump the relaxation at the found target in LP text format.
        #[arg(long)]
        dump_lp: Option<PathBuf>,
        /// Dump the per-job rounding decisions as JSON.
        #[arg(long)]
        dump_decisions: Option<PathBuf>,
    },
    /// Check a schedule against its instance.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        schedule: PathBuf,
    },
    /// Tabulate relaxation thresholds against exhaustive optima.
    Gap {
        /// restricted | uniform | unrelated
        #[arg(long)]
        family: String,
        /// Inclusive range, e.g. 2..5
        #[arg(long)]
        k_range: String,
        #[arg(long)]
        csv: PathBuf,
        /// Exit with code 3 if any exhaustive search is refused.
        #[arg(long)]
        require_oracle: bool,
    },
    /// Generate an instance file.
    Gen {
        /// restricted | uniform | unrelated | random
        #[arg(long)]
        family: String,
        /// Family width for the threshold families.
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Seed for the random family.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// unrelated | restricted | uniform (random family only)
        #[arg(long, default_value = "unrelated")]
        variant: String,
        #[arg(long, default_value_t = 5)]
        max_machines: usize,
        #[arg(long, default_value_t = 7)]
        max_jobs: usize,
        /// Attach weights and keep durations at least 1 (random family).
        #[arg(long)]
        weighted: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run schemes over a directory of instances and tabulate ratios.
    Bench {
        #[arg(long)]
        dir: PathBuf,
        /// Comma-separated scheme names.
        #[arg(long)]
        schemes: String,
        /// makespan | weighted
        #[arg(long, default_value = "makespan")]
        objective: String,
        #[arg(long, default_value = "1e-6")]
        eps: f64,
        #[arg(long)]
        csv: PathBuf,
    },
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn main() -> ExitCode {
    if let Some(threads) = std::env::var_os("MSCHED_THREADS") {
        let parsed = threads.to_str().and_then(|t| t.parse::<usize>().ok());
        match parsed {
            Some(n) if n >= 1 => {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .expect("thread pool configured before first use");
            }
            _ => {
                eprintln!("MSCHED_THREADS must be a positive integer");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn show(r: &Rat) -> String {
    format!("{} ({})", fmt_rat(r), dec12(r))
}

fn read_instance(path: &Path) -> Result<Instance, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| fail(2, format!("cannot read {}: {e}", path.display())))?;
    instance_from_json(&text)
        .map_err(|e| fail(2, format!("bad instance {}: {e}", path.display())))
}

fn write_file(path: &Path, content: &str) -> Result<(), Failure> {
    fs::write(path, content)
        .map_err(|e| fail(2, format!("cannot write {}: {e}", path.display())))
}

fn parse_scheme(name: &str) -> Result<Scheme, Failure> {
    Scheme::parse(name).ok_or_else(|| {
        fail(
            2,
            format!("unknown scheme {name}; pick simple, filtered, beta, restricted, uniform or pnorm"),
        )
    })
}

fn parse_eps(eps: f64) -> Result<Precision, Failure> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(fail(2, "eps must be a positive number"));
    }
    let r = Rat::from_float(eps).expect("finite float");
    Ok(Precision::Relative(r))
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.cmd {
        Cmd::Solve {
            instance,
            scheme,
            p,
            objective,
            eps,
            out,
            report,
            dump_lp,
            dump_decisions,
        } => {
            let mut inst = read_instance(&instance)?;
            if let Some(ptext) = p {
                let norm = if ptext == "inf" {
                    PNorm::Infinity
                } else {
                    let v = parse_rat(&ptext)
                        .map_err(|e| fail(2, format!("bad norm index {ptext}: {e}")))?;
                    PNorm::finite(v).map_err(|e| fail(2, e.to_string()))?
                };
                inst = inst.with_p(norm).map_err(|e| fail(2, e.to_string()))?;
            }
            let scheme = parse_scheme(&scheme)?;
            let precision = parse_eps(eps)?;
            match objective.as_str() {
                "makespan" => {
                    let sol = minimize_makespan(&inst, scheme, &precision)
                        .map_err(|e| fail(2, e.to_string()))?;
                    write_file(&out, &schedule_to_json(&sol.schedule))?;
                    if let Some(path) = dump_lp {
                        let lp = match scheme {
                            Scheme::PNorm => build_lp_pnorm(&inst, &sol.target, &inst.p),
                            _ => build_lp(&inst, &sol.target),
                        }
                        .expect("the found target admits the relaxation");
                        let text = program_to_lp_text(&lp.program, |v| {
                            let (i, j) = lp.columns[v];
                            format!("x_{i}_{j}")
                        });
                        write_file(&path, &text)?;
                    }
                    if let Some(path) = dump_decisions {
                        write_file(&path, &rounding_to_json(&sol.rounded))?;
                    }
                    let ratio = &sol.schedule.makespan / &sol.target;
                    println!(
                        "target {}  makespan {}  scheme {}  factor {}  ratio {}",
                        show(&sol.target),
                        show(&sol.schedule.makespan),
                        sol.scheme,
                        dec12(&sol.factor),
                        show(&ratio),
                    );
                }
                "weighted" => {
                    let sol = solve_weighted(&inst, scheme)
                        .map_err(|e| fail(2, e.to_string()))?;
                    write_file(&out, &schedule_to_json(&sol.schedule))?;
                    if let Some(path) = report {
                        write_file(&path, &report_csv(&sol))?;
                    }
                    let ratio = &sol.objective / &sol.lp_objective;
                    println!(
                        "relaxation {}  weighted completion {}  scheme {}  factor {}  ratio {}",
                        show(&sol.lp_objective),
                        show(&sol.objective),
                        scheme,
                        dec12(&sol.factor),
                        show(&ratio),
                    );
                }
                other => return Err(fail(2, format!("unknown objective {other}"))),
            }
            Ok(0)
        }
        Cmd::Verify { instance, schedule } => {
            let inst = read_instance(&instance)?;
            let text = fs::read_to_string(&schedule)
                .map_err(|e| fail(2, format!("cannot read {}: {e}", schedule.display())))?;
            let sched = schedule_from_json(&inst, &text)
                .map_err(|e| fail(2, format!("bad schedule {}: {e}", schedule.display())))?;
            let defects = verify_schedule(&inst, &sched);
            if defects.is_empty() {
                println!("ok  makespan {}", show(&sched.makespan));
                Ok(0)
            } else {
                for d in &defects {
                    eprintln!("{d}");
                }
                Ok(1)
            }
        }
        Cmd::Gap {
            family,
            k_range,
            csv,
            require_oracle,
        } => {
            let (a, b) = parse_range(&k_range)?;
            let mut rows = String::from(
                "family,k,c_min,c_min_dec,opt,opt_dec,gap,gap_dec,oracle_note\n",
            );
            let budget = OracleBudget::default();
            let mut refused = false;
            for k in a..=b {
                let (inst, precision): (Instance, Precision) = match family.as_str() {
                    "restricted" => (
                        gen_gap_restricted(k),
                        Precision::Exact(threshold_grid(k)),
                    ),
                    "uniform" => (gen_gap_uniform(k), Precision::Exact(threshold_grid(k))),
                    "unrelated" => (
                        gen_gap_unrelated(k),
                        Precision::Relative(rat(1, 1_000_000_000)),
                    ),
                    other => return Err(fail(2, format!("unknown family {other}"))),
                };
                let (c_min, _) = min_feasible_target(&inst, Scheme::Simple, &precision)
                    .expect("family thresholds sit inside their grids");
                match brute_force_makespan(&inst, &budget) {
                    Ok(r) => {
                        let gap = &r.objective / &c_min;
                        rows.push_str(&format!(
                            "{family},{k},{},{},{},{},{},{},\n",
                            fmt_rat(&c_min),
                            dec12(&c_min),
                            fmt_rat(&r.objective),
                            dec12(&r.objective),
                            fmt_rat(&gap),
                            dec12(&gap),
                        ));
                    }
                    Err(e) => {
                        refused = true;
                        rows.push_str(&format!(
                            "{family},{k},{},{},,,,,{}\n",
                            fmt_rat(&c_min),
                            dec12(&c_min),
                            e.0.replace(',', ";"),
                        ));
                    }
                }
            }
            write_file(&csv, &rows)?;
            println!("wrote {}", csv.display());
            if refused && require_oracle {
                return Err(fail(3, "exhaustive search refused within the requested range"));
            }
            Ok(0)
        }
        Cmd::Gen {
            family,
            k,
            seed,
            variant,
            max_machines,
            max_jobs,
            weighted,
            out,
        } => {
            let inst = match family.as_str() {
                "restricted" => gen_gap_restricted(k),
                "uniform" => gen_gap_uniform(k),
                "unrelated" => gen_gap_unrelated(k),
                "random" => {
                    let variant = match variant.as_str() {
                        "unrelated" => Variant::Unrelated,
                        "restricted" => Variant::Restricted,
                        "uniform" => Variant::Uniform,
                        other => return Err(fail(2, format!("unknown variant {other}"))),
                    };
                    gen_random(
                        seed,
                        &RandomProfile {
                            max_machines,
                            max_jobs,
                            variant,
                            weighted,
                        },
                    )
                }
                other => return Err(fail(2, format!("unknown family {other}"))),
            };
            write_file(&out, &instance_to_json(&inst))?;
            println!(
                "wrote {} ({} machines, {} jobs)",
                out.display(),
                inst.machines,
                inst.jobs
            );
            Ok(0)
        }
        Cmd::Bench {
            dir,
            schemes,
            objective,
            eps,
            csv,
        } => {
            let schemes: Vec<Scheme> = schemes
                .split(',')
                .map(|s| parse_scheme(s.trim()))
                .collect::<Result<_, _>>()?;
            let precision = parse_eps(eps)?;
            let mut files: Vec<PathBuf> = fs::read_dir(&dir)
                .map_err(|e| fail(2, format!("cannot read {}: {e}", dir.display())))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
                .collect();
            files.sort();
            if files.is_empty() {
                return Err(fail(2, format!("no .json instances in {}", dir.display())));
            }
            let weighted = match objective.as_str() {
                "makespan" => false,
                "weighted" => true,
                other => return Err(fail(2, format!("unknown objective {other}"))),
            };
            let mut tasks = Vec::new();
            for file in &files {
                let inst = read_instance(file)?;
                for &scheme in &schemes {
                    tasks.push((file.clone(), inst.clone(), scheme));
                }
            }
            let results: Vec<(usize, String, Option<Rat>)> = tasks
                .par_iter()
                .enumerate()
                .map(|(idx, (file, inst, scheme))| {
                    let name = file
                        .file_name()
                        .map(|n| n.to_string_lossy().into_owned())
                        .unwrap_or_default();
                    let row = if weighted {
                        match solve_weighted(inst, *scheme) {
                            Ok(sol) => {
                                let ratio = &sol.objective / &sol.lp_objective;
                                (
                                    format!(
                                        "{name},{scheme},{},{},{},{},{},{},{},{}\n",
                                        fmt_rat(&sol.lp_objective),
                                        dec12(&sol.lp_objective),
                                        fmt_rat(&sol.objective),
                                        dec12(&sol.objective),
                                        fmt_rat(&sol.factor),
                                        dec12(&sol.factor),
                                        fmt_rat(&ratio),
                                        dec12(&ratio),
                                    ),
                                    Some(ratio),
                                )
                            }
                            Err(e) => (format!("{name},{scheme},skipped: {e}\n"), None),
                        }
                    } else {
                        match minimize_makespan(inst, *scheme, &precision) {
                            Ok(sol) => {
                                let ratio = &sol.schedule.makespan / &sol.target;
                                (
                                    format!(
                                        "{name},{scheme},{},{},{},{},{},{},{},{}\n",
                                        fmt_rat(&sol.target),
                                        dec12(&sol.target),
                                        fmt_rat(&sol.schedule.makespan),
                                        dec12(&sol.schedule.makespan),
                                        fmt_rat(&sol.factor),
                                        dec12(&sol.factor),
                                        fmt_rat(&ratio),
                                        dec12(&ratio),
                                    ),
                                    Some(ratio),
                                )
                            }
                            Err(e) => (format!("{name},{scheme},skipped: {e}\n"), None),
                        }
                    };
                    (idx, row.0, row.1)
                })
                .collect();
            let mut ordered = results;
            ordered.sort_by_key(|(idx, _, _)| *idx);
            let header = if weighted {
                "instance,scheme,relaxation,relaxation_dec,objective,objective_dec,\
                 factor,factor_dec,ratio,ratio_dec\n"
            } else {
                "instance,scheme,target,target_dec,makespan,makespan_dec,\
                 factor,factor_dec,ratio,ratio_dec\n"
            };
            let mut text = String::from(header);
            let mut max_ratio: Option<Rat> = None;
            for (_, row, ratio) in ordered {
                text.push_str(&row);
                if let Some(r) = ratio {
                    if max_ratio.as_ref().is_none_or(|m| r > *m) {
                        max_ratio = Some(r);
                    }
                }
            }
            write_file(&csv, &text)?;
            match max_ratio {
                Some(r) => println!("wrote {}  max ratio {}", csv.display(), show(&r)),
                None => println!("wrote {}  (no successful runs)", csv.display()),
            }
            Ok(0)
        }
    }
}

fn parse_range(text: &str) -> Result<(usize, usize), Failure> {
    let bad = || fail(2, format!("bad range {text}; expected a..b"));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    let a: usize = a.parse().map_err(|_| bad())?;
    let b: usize = b.parse().map_err(|_| bad())?;
    if a < 1 || b < a {
        return Err(bad());
    }
    Ok((a, b))
}
