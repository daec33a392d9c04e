//! `quantsafe` command-line front-end.
//!
//! Exit codes: 0 when an answer was produced (whatever it is), 2 for
//! malformed or invalid input, 3 for unsupported requests, 1 otherwise.

mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

use quantsafe::format::serialize_automaton;
use quantsafe::gen::{seeded_automaton, GenParams};
use quantsafe::limitedness::unlimited_witness;
use quantsafe::{
    decompose, determinize_inf, evaluate_lasso, is_constant, is_limited, is_live, is_safe, parse_automaton,
    parse_distance_automaton, parse_nfa, safety_closure_inf, top_value, Automaton, LassoWord, Rational,
    ValueFunction,
};

use report::{Input, Report, WitnessJson};

#[derive(Parser)]
#[command(name = "quantsafe", version, about = "Safety and liveness analysis of quantitative automata")]
struct Cli {
    /// Print JSON reports instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Also render values with N decimal digits.
    #[arg(long, global = true, value_name = "N")]
    decimal: Option<usize>,
    /// Worker threads when the input is a directory.
    #[arg(long, global = true, value_name = "N", default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Value of a lasso word u·v^ω.
    Eval {
        file: PathBuf,
        /// Shorthand for `--loop` with an empty prefix.
        #[arg(long, conflicts_with_all = ["prefix", "cycle"])]
        lasso: Option<String>,
        #[arg(long)]
        prefix: Option<String>,
        #[arg(long = "loop")]
        cycle: Option<String>,
    },
    /// Top value and a lasso attaining it.
    Top(Target),
    /// Safety closure as an Inf-automaton.
    Closure {
        file: PathBuf,
        /// Determinize the closure.
        #[arg(long)]
        det: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Is the automaton constant?
    Constant(Target),
    /// Is the automaton safe?
    Safety(Target),
    /// Is the automaton live?
    Liveness(Target),
    /// Safety-liveness decomposition.
    Decompose {
        file: PathBuf,
        /// Write B.qa, C.qa and manifest.json into DIR.
        #[arg(short, long, value_name = "DIR")]
        output: Option<PathBuf>,
    },
    /// Limitedness of a distance automaton.
    Limited(Target),
    /// Seeded random automaton.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        states: usize,
        #[arg(long, default_value_t = 2)]
        letters: usize,
        #[arg(long)]
        valfn: String,
        #[arg(long)]
        discount: Option<String>,
        #[arg(long)]
        deterministic: bool,
        /// Comma-separated weight pool.
        #[arg(long)]
        weights: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Automaton over {a,b,#} that is constant iff the NFA is universal.
    Gadget {
        nfa: PathBuf,
        #[arg(long)]
        valfn: String,
        #[arg(long)]
        discount: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// A file, or a directory whose `.qa` files are analysed one by one.
#[derive(Args)]
struct Target {
    path: PathBuf,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Unsupported(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Other(_) => 1,
            Failure::Input(_) => 2,
            Failure::Unsupported(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Unsupported(m) | Failure::Other(m) => m,
        }
    }
}

impl From<quantsafe::Error> for Failure {
    fn from(e: quantsafe::Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else if e.is_unsupported() {
            Failure::Unsupported(e.to_string())
        } else {
            Failure::Other(e.to_string())
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

struct Opts {
    json: bool,
    decimal: Option<usize>,
}

fn read(path: &Path) -> Outcome<(String, Input)> {
    let bytes = fs::read(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let input = Input::new(&path.display().to_string(), &bytes);
    let text = String::from_utf8(bytes).map_err(|_| Failure::Input(format!("{}: not UTF-8", path.display())))?;
    Ok((text, input))
}

fn load(path: &Path) -> Outcome<(Automaton, Input)> {
    let (text, input) = read(path)?;
    let a = parse_automaton(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok((a, input))
}

fn write_out(output: Option<&Path>, text: &str) -> Outcome<()> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Other(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit(opts: &Opts, r: &Report) -> String {
    if opts.json {
        serde_json::to_string(r).expect("report serializes") + "\n"
    } else {
        r.human()
    }
}

fn parse_valfn(tag: &str, discount: Option<&str>) -> Outcome<ValueFunction> {
    let d = discount
        .map(|s| s.parse::<Rational>().map_err(|e| Failure::Input(format!("discount `{s}`: {e}"))))
        .transpose()?;
    Ok(ValueFunction::from_tag(tag, d)?)
}

fn cmd_eval(opts: &Opts, file: &Path, lasso: Option<&str>, prefix: Option<&str>, cycle: Option<&str>) -> Outcome<String> {
    let start = Instant::now();
    let (a, input) = load(file)?;
    let (u, v) = match (lasso, cycle) {
        (Some(v), _) => ("", v),
        (None, Some(v)) => (prefix.unwrap_or(""), v),
        (None, None) => return Err(Failure::Input("eval needs --lasso or --loop".into())),
    };
    let w = LassoWord::parse(a.alphabet(), u, v)?;
    let x = evaluate_lasso(&a, &w)?;
    if !opts.json {
        return Ok(match opts.decimal {
            Some(d) => format!("{x} (~{})\n", x.to_decimal(d)),
            None => format!("{x}\n"),
        });
    }
    let mut r = Report::new(input, "eval");
    r.set_value(x, opts.decimal);
    r.witness = Some(WitnessJson::lasso(a.alphabet(), &w));
    r.elapsed_ms = elapsed(start);
    Ok(emit(opts, &r))
}

fn elapsed(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn cmd_top(opts: &Opts, file: &Path) -> Outcome<String> {
    let start = Instant::now();
    let (a, input) = load(file)?;
    let (top, w) = top_value(&a);
    let mut r = Report::new(input, "top");
    r.set_value(top, opts.decimal);
    r.witness = Some(WitnessJson::lasso(a.alphabet(), &w));
    r.method.push(format!("top value over lasso runs of a {} automaton", a.valfn()));
    r.elapsed_ms = elapsed(start);
    Ok(emit(opts, &r))
}

fn cmd_verdict(opts: &Opts, file: &Path, question: &str) -> Outcome<String> {
    let start = Instant::now();
    let (a, input) = load(file)?;
    let v = match question {
        "constant" => is_constant(&a)?,
        "safe" => is_safe(&a)?,
        _ => is_live(&a)?,
    };
    let mut r = Report::new(input, question);
    r.set_verdict(a.alphabet(), &v, opts.decimal);
    r.elapsed_ms = elapsed(start);
    Ok(emit(opts, &r))
}

fn cmd_limited(opts: &Opts, file: &Path) -> Outcome<String> {
    let start = Instant::now();
    let (text, input) = read(file)?;
    let d = parse_distance_automaton(&text).map_err(|e| Failure::Input(format!("{}: {e}", file.display())))?;
    let limited = is_limited(&d)?;
    let mut r = Report::new(input, "limited");
    r.answer = Some(limited);
    r.method.push("stabilization monoid of the distance automaton".into());
    if !limited {
        let w = unlimited_witness(&d)?;
        r.witness = Some(WitnessJson::lasso(d.alphabet(), &w.word));
        r.method.push(format!(
            "every run on the witness has mean cost at least {} (bound {})",
            w.min_mean, w.bound
        ));
    }
    r.elapsed_ms = elapsed(start);
    Ok(emit(opts, &r))
}

fn cmd_closure(file: &Path, det: bool, output: Option<&Path>) -> Outcome<String> {
    let (a, _) = load(file)?;
    let mut c = safety_closure_inf(&a)?;
    if det {
        c = determinize_inf(&c)?;
    }
    write_out(output, &serialize_automaton(&c))?;
    Ok(String::new())
}

fn cmd_decompose(opts: &Opts, file: &Path, output: Option<&Path>) -> Outcome<String> {
    let start = Instant::now();
    let (a, input) = load(file)?;
    let d = decompose(&a)?;
    let b_text = serialize_automaton(&d.safety);
    let c_text = serialize_automaton(&d.liveness);
    let mut r = Report::new(input, "decompose");
    r.set_value(d.top, opts.decimal);
    r.method.push("safety component: safety closure".into());
    r.method.push("liveness component: top value wherever the source agrees with the closure".into());
    match output {
        Some(dir) => {
            let io = |e: std::io::Error| Failure::Other(format!("{}: {e}", dir.display()));
            fs::create_dir_all(dir).map_err(io)?;
            fs::write(dir.join("B.qa"), &b_text).map_err(io)?;
            fs::write(dir.join("C.qa"), &c_text).map_err(io)?;
            let manifest = json!({
                "schema_version": report::SCHEMA_VERSION,
                "tool": "quantsafe",
                "version": env!("CARGO_PKG_VERSION"),
                "source": { "path": r.input.path, "sha256": r.input.sha256 },
                "valfn": a.valfn().tag(),
                "top": d.top.to_string(),
                "safety": "B.qa",
                "liveness": "C.qa",
            });
            let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
            fs::write(dir.join("manifest.json"), text).map_err(io)?;
            r.details.insert("output".into(), json!(dir.display().to_string()));
        }
        None => {
            r.details.insert("safety".into(), json!(b_text));
            r.details.insert("liveness".into(), json!(c_text));
        }
    }
    r.elapsed_ms = elapsed(start);
    if opts.json {
        return Ok(emit(opts, &r));
    }
    let mut out = format!("top: {}\n", r.value.as_deref().unwrap_or(""));
    match output {
        Some(dir) => out.push_str(&format!("wrote {}\n", dir.display())),
        None => out.push_str(&format!("# safety component\n{b_text}# liveness component\n{c_text}")),
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen(
    seed: u64,
    states: usize,
    letters: usize,
    valfn: &str,
    discount: Option<&str>,
    deterministic: bool,
    weights: Option<&str>,
    output: Option<&Path>,
) -> Outcome<String> {
    let vf = parse_valfn(valfn, discount)?;
    let mut p = GenParams::new(states, letters, vf).deterministic(deterministic);
    if let Some(ws) = weights {
        let pool = ws
            .split(',')
            .map(|s| s.trim().parse::<Rational>().map_err(|e| Failure::Input(format!("weight `{s}`: {e}"))))
            .collect::<Outcome<Vec<_>>>()?;
        p = p.weights(pool);
    }
    let a = seeded_automaton(seed, &p)?;
    let header = format!(
        "# generated: seed {seed}, {states} states, {letters} letters{}\n",
        if deterministic { ", deterministic" } else { "" }
    );
    write_out(output, &(header + &serialize_automaton(&a)))?;
    Ok(String::new())
}

fn cmd_gadget(nfa: &Path, valfn: &str, discount: Option<&str>, output: Option<&Path>) -> Outcome<String> {
    let (text, _) = read(nfa)?;
    let n = parse_nfa(&text).map_err(|e| Failure::Input(format!("{}: {e}", nfa.display())))?;
    let vf = parse_valfn(valfn, discount)?;
    let g = quantsafe::gadget::gadget(&n, vf)?;
    write_out(output, &serialize_automaton(&g))?;
    Ok(String::new())
}

/// Runs `f` on `path`, or on every `.qa` file below it when it is a directory.
fn batch(jobs: usize, opts: &Opts, path: &Path, f: impl Fn(&Path) -> Outcome<String> + Sync) -> Outcome<String> {
    if !path.is_dir() {
        return f(path);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "qa"))
        .collect();
    files.sort();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Failure::Other(e.to_string()))?;
    let results: Vec<Outcome<String>> = pool.install(|| files.par_iter().map(|p| f(p)).collect());
    let mut out = String::new();
    let mut failed = 0;
    let mut code = 0;
    for (p, r) in files.iter().zip(results) {
        match r {
            Ok(s) if opts.json => out.push_str(&s),
            Ok(s) => out.push_str(&format!("== {}\n{s}", p.display())),
            Err(e) => {
                eprintln!("error: {}", e.message());
                failed += 1;
                if code == 0 {
                    code = e.code();
                }
            }
        }
    }
    if failed == 0 {
        return Ok(out);
    }
    print!("{out}");
    let msg = format!("{failed} of {} files failed", files.len());
    Err(match code {
        2 => Failure::Input(msg),
        3 => Failure::Unsupported(msg),
        _ => Failure::Other(msg),
    })
}

fn run(cli: Cli) -> Outcome<String> {
    let opts = Opts {
        json: cli.json,
        decimal: cli.decimal,
    };
    let jobs = cli.jobs;
    match cli.cmd {
        Cmd::Eval {
            file,
            lasso,
            prefix,
            cycle,
        } => cmd_eval(&opts, &file, lasso.as_deref(), prefix.as_deref(), cycle.as_deref()),
        Cmd::Top(t) => batch(jobs, &opts, &t.path, |p| cmd_top(&opts, p)),
        Cmd::Closure { file, det, output } => cmd_closure(&file, det, output.as_deref()),
        Cmd::Constant(t) => batch(jobs, &opts, &t.path, |p| cmd_verdict(&opts, p, "constant")),
        Cmd::Safety(t) => batch(jobs, &opts, &t.path, |p| cmd_verdict(&opts, p, "safe")),
        Cmd::Liveness(t) => batch(jobs, &opts, &t.path, |p| cmd_verdict(&opts, p, "live")),
        Cmd::Decompose { file, output } => cmd_decompose(&opts, &file, output.as_deref()),
        Cmd::Limited(t) => batch(jobs, &opts, &t.path, |p| cmd_limited(&opts, p)),
        Cmd::Gen {
            seed,
            states,
            letters,
            valfn,
            discount,
            deterministic,
            weights,
            output,
        } => cmd_gen(
            seed,
            states,
            letters,
            &valfn,
            discount.as_deref(),
            deterministic,
            weights.as_deref(),
            output.as_deref(),
        ),
        Cmd::Gadget {
            nfa,
            valfn,
            discount,
            output,
        } => cmd_gadget(&nfa, &valfn, discount.as_deref(), output.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
