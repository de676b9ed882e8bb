use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use m4kit::blocks::catalog;
use m4kit::certify::Budget;
use m4kit::geography::{coords, realize_pair, region_check, FreedmanModel, GeoError, GeoPoint};
use m4kit::manifest::{parse, replay_report, run, Report, RunOptions, Status};

const EXIT_USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "m4kit", version, about = "Build and certify symbolic 4-manifold constructions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run manifests without certifying fundamental groups.
    Build(RunArgs),
    /// Run manifests and certify every fundamental-group expectation.
    Certify {
        #[command(flatten)]
        run: RunArgs,
        /// Coset budget (overrides M4KIT_BUDGET_COSETS).
        #[arg(long, value_name = "N")]
        max_cosets: Option<usize>,
        /// Derivation step budget.
        #[arg(long, value_name = "N")]
        max_steps: Option<usize>,
    },
    /// Geography coordinates, region checks and realizations of geography points.
    Geography {
        #[command(flatten)]
        mode: GeoArgs,
        #[arg(long)]
        json: bool,
    },
    /// List the building blocks with their invariants and surgery sites.
    Catalog {
        #[arg(long)]
        json: bool,
    },
    /// Re-check the certificates embedded in a report.
    Replay { report: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    /// Manifest files (`.m4`); several run concurrently.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Directory receiving `<stem>.report.json` for each manifest.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Print reports as JSON instead of a summary.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct GeoArgs {
    /// Coordinates of (e, sigma).
    #[arg(long, num_args = 2, value_names = ["E", "SIGMA"], allow_negative_numbers = true)]
    coords: Option<Vec<i64>>,
    /// Whether (chi_h, c1^2) lies in 0 <= c1^2 <= 8 chi_h - 1.
    #[arg(long, num_args = 2, value_names = ["CHI", "C"], allow_negative_numbers = true)]
    check: Option<Vec<i64>>,
    /// Build and certify the realization of (chi_h, c1^2).
    #[arg(long, num_args = 2, value_names = ["CHI", "C"], allow_negative_numbers = true)]
    realize: Option<Vec<i64>>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let code = match cli.command {
        Command::Build(args) => run_batch(&args, RunOptions { budget: Budget::from_env(), certify: false }),
        Command::Certify { run, max_cosets, max_steps } => {
            let mut budget = Budget::from_env();
            if let Some(n) = max_cosets {
                budget.max_cosets = n;
            }
            if let Some(n) = max_steps {
                budget.max_derivation_steps = n;
            }
            run_batch(&run, RunOptions { budget, certify: true })
        }
        Command::Geography { mode, json } => geography(&mode, json),
        Command::Catalog { json } => print_catalog(json),
        Command::Replay { report } => replay(&report),
    };
    ExitCode::from(code)
}

enum Outcome {
    Ran(Box<Report>),
    Error(String),
}

fn run_one(path: &Path, options: &RunOptions) -> Outcome {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return Outcome::Error(format!("{}: {e}", path.display())),
    };
    let result = parse(&text).and_then(|m| run(&m, options));
    match result {
        Ok(mut r) => {
            r.source = Some(path.display().to_string());
            Outcome::Ran(Box::new(r))
        }
        Err(e) => Outcome::Error(format!("{}:{}:{}: {}", path.display(), e.pos.line, e.pos.column, e.message)),
    }
}

fn run_batch(args: &RunArgs, options: RunOptions) -> u8 {
    let outcomes: Vec<Outcome> = std::thread::scope(|s| {
        let handles: Vec<_> = args.files.iter().map(|f| s.spawn(move || run_one(f, &options))).collect();
        handles.into_iter().map(|h| h.join().expect("manifest worker panicked")).collect()
    });
    if let Some(dir) = &args.out {
        if let Err(e) = std::fs::create_dir_all(dir) {
            eprintln!("{}: {e}", dir.display());
            return EXIT_USAGE;
        }
    }
    let mut code = 0u8;
    for (path, outcome) in args.files.iter().zip(&outcomes) {
        match outcome {
            Outcome::Error(msg) => {
                eprintln!("error: {msg}");
                code = code.max(EXIT_USAGE);
            }
            Outcome::Ran(report) => {
                code = code.max(report.status.exit_code() as u8);
                if args.json {
                    println!("{}", report.to_json());
                } else {
                    print_summary(path, report);
                }
                if let Some(dir) = &args.out {
                    let stem = path.file_stem().map_or("manifest".into(), |s| s.to_string_lossy().into_owned());
                    let target = dir.join(format!("{stem}.report.json"));
                    if let Err(e) = std::fs::write(&target, report.to_json()) {
                        eprintln!("{}: {e}", target.display());
                        code = code.max(EXIT_USAGE);
                    }
                }
            }
        }
    }
    code
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::Inconclusive => "INCONCLUSIVE",
        Status::Skipped => "SKIP",
    }
}

fn print_summary(path: &Path, r: &Report) {
    println!("== {} [{}] {:.0} ms", path.display(), status_word(r.status), r.wall_time_ms);
    for e in &r.entries {
        let m = &e.manifold;
        let geo = e.coords.map_or("-".to_string(), |p| p.to_string());
        let mut line = format!("  {:<10} e={:<4} sigma={:<4} (chi_h, c1^2)={geo}", e.name, m.e, m.sigma);
        if let Some(c) = &e.certificate {
            line.push_str(&format!("  pi1: {}", c.verdict));
        }
        if let Some(model) = e.model {
            line.push_str(&format!("  model: {model}"));
        }
        println!("{line}");
    }
    for x in &r.expectations {
        println!(
            "  {:<5} line {:>3}: {}.{} expected {} got {}",
            status_word(x.status),
            x.pos.line,
            x.target,
            x.key,
            x.expected,
            x.actual
        );
    }
}

fn pair(v: &[i64]) -> (i64, i64) {
    (v[0], v[1])
}

fn geography(args: &GeoArgs, json: bool) -> u8 {
    if let Some(v) = &args.coords {
        let (e, sigma) = pair(v);
        let p = match coords(e, sigma) {
            Ok(p) => p,
            Err(err) => {
                eprintln!("error: {err}");
                return EXIT_USAGE;
            }
        };
        let model = FreedmanModel::from_e_sigma(e, sigma).ok();
        if json {
            let v = serde_json::json!({ "e": e, "sigma": sigma, "point": p, "region": region_check(p), "model": model });
            println!("{}", serde_json::to_string_pretty(&v).expect("json"));
        } else {
            println!("(chi_h, c1^2) = {p}");
            println!("region 0 <= c1^2 <= 8 chi_h - 1: {}", region_check(p));
            if let Some(m) = model {
                println!("odd simply connected model: {m}");
            }
        }
        return 0;
    }
    if let Some(v) = &args.check {
        let (chi, c) = pair(v);
        let ok = region_check(GeoPoint::new(chi, c));
        if json {
            println!("{}", serde_json::json!({ "chi_h": chi, "c1sq": c, "region": ok }));
        } else {
            println!("({chi}, {c}) in region: {ok}");
        }
        return if ok { 0 } else { 1 };
    }
    let (chi, c) = pair(args.realize.as_deref().expect("clap enforces one mode"));
    match realize_pair(GeoPoint::new(chi, c), &Budget::from_env()) {
        Ok(r) => {
            if json {
                println!("{}", serde_json::to_string_pretty(&r).expect("json"));
            } else {
                println!("({chi}, {c}): {}", r.recipe.construction);
                println!("  skipped surgery: {} in {}", r.recipe.skipped, r.recipe.summand);
                let gens: Vec<String> = r.recipe.torus_generators.iter().map(|w| w.to_string()).collect();
                println!("  torus circles: {}", gens.join(", "));
                println!("  pi1(N): {}", r.pi1.verdict);
                println!("  surjectivity index: {:?}", r.surjectivity.index);
                println!("  meridian {} trivial in complement: {}", r.recipe.meridian(), r.meridian_trivial());
            }
            if r.pi1.verdict.is_conclusive() && r.surjectivity.holds() && r.meridian_trivial() {
                0
            } else {
                2
            }
        }
        Err(e @ GeoError::OutOfRange { .. }) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn print_catalog(json: bool) -> u8 {
    let entries = catalog();
    if json {
        println!("{}", serde_json::to_string_pretty(&entries).expect("json"));
        return 0;
    }
    for c in &entries {
        let m = &c.example;
        println!("{}({})", c.constructor, c.parameters);
        println!("  example e={} sigma={} symplectic={} generators={}", m.e, m.sigma, m.symplectic, m.pi1.generators().len());
        for (name, s) in &m.surfaces {
            println!("  surface {name}: genus {} self-intersection {}", s.genus, s.self_intersection);
        }
        for (site, t) in &m.tori {
            println!("  site {site}: curve {} push-off {}", t.curve, t.pushoff);
        }
    }
    0
}

fn replay(path: &Path) -> u8 {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return EXIT_USAGE;
        }
    };
    let report = match Report::from_json(&text) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}: not a report: {e}", path.display());
            return EXIT_USAGE;
        }
    };
    let outcomes = replay_report(&report);
    let mut code = 0;
    for o in &outcomes {
        match &o.result {
            Ok(s) => println!("ok    {} {}: {} step(s) checked", o.entry, o.what, s.steps_checked),
            Err(e) => {
                println!("FAIL  {} {}: {e}", o.entry, o.what);
                code = 1;
            }
        }
    }
    println!("{} certificate(s) replayed", outcomes.len());
    code
}
