//! The `u3kit` command line: argument parsing, input loading, and JSON output around the
//! library operations.

pub mod expr;
pub mod output;
pub mod selftest;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bohr::{bogolyubov, bohr_set, coset_progression_in_bohr, find_regular_rho, is_regular};
use crate::error::Error;
use crate::experiments::{
    ap_free_search, density_increment_f5, fw_counterexample, quadratic_correlation_scan, szemeredi_driver, FwSpec,
    IncrementParams, ScanMode, SearchStrategy,
};
use crate::forms::{count_aps, gvn_slack, lambda_k};
use crate::group::{e, GroupFunction, GroupSpec, Subgroup, DEFAULT_BUDGET};
use crate::inverse_f5::{quadratic_obstruction_with, PipelineParams};
use crate::nil::{
    bracket_to_nilsystem, hall_petresco_check, hall_petresco_next, nilsequence, Coord, Cutoff, NilFunction, NilPoint,
    NilSystem, Term,
};
use crate::norms::{gowers_norm, gowers_recursive, u3_oracle_bracket, u3_oracle_coset, Method};
use crate::quadratic::{classify_global_quadratic, BracketQuadratic};

pub use expr::{parse_expr, parse_phase};
pub use output::{InputDigest, RunManifest};

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Exit status for malformed invocations.
pub const EXIT_USAGE: i32 = 2;
/// Exit status for errors raised by the library.
pub const EXIT_DOMAIN: i32 = 3;
/// Environment variable consulted when `--seed` is absent.
pub const SEED_ENV: &str = "U3KIT_SEED";

#[derive(Debug, Parser)]
#[command(name = "u3kit", version, about = "Gowers norms, Bohr sets, quadratic phases and nilsequences on finite abelian groups")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Also write the JSON output to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write a CSV table to this file (scan).
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Worker threads (defaults to the available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Random seed; falls back to U3KIT_SEED, then 0.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

/// A function given inline or as a JSON file.
#[derive(Debug, Args)]
pub struct FnInput {
    /// Group such as Z/101, F5^3 or Z/4xZ/9 (required with --expr).
    #[arg(long)]
    pub group: Option<String>,
    /// Expression such as "e((3*x^2+x)/101)" or "ind{0,1,2,4}".
    #[arg(long, conflicts_with = "input")]
    pub expr: Option<String>,
    /// GroupFunction JSON file, or the output of another subcommand.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

/// A set in `F_5^n` or another group.
#[derive(Debug, Args)]
pub struct SetInput {
    /// Group; `--n k` is shorthand for F5^k.
    #[arg(long, conflicts_with = "n")]
    pub group: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated element indices, or a JSON file with indices or coordinate arrays.
    #[arg(long)]
    pub set: String,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Direct,
    Recursive,
    Fourier,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OracleKind {
    Coset,
    Bracket,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StrategyArg {
    Greedy,
    Exhaustive,
}

#[derive(Debug, Args)]
pub struct IncrementArgs {
    #[command(flatten)]
    pub set: SetInput,
    /// Skip the four-term progression check.
    #[arg(long)]
    pub force: bool,
    /// Pipeline eta (defaults to the U3 norm of the balanced function).
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub tie_tolerance: f64,
    /// Do not take candidates from the whole-group coset oracle.
    #[arg(long)]
    pub no_oracle: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Gowers U^d norm of a function.
    Norm {
        #[command(flatten)]
        f: FnInput,
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Recursive)]
        method: MethodArg,
    },
    /// Local u^3 bias on a coset (exact) or against bracket quadratics on Z/N.
    U3Oracle {
        #[command(flatten)]
        f: FnInput,
        #[arg(long, value_enum, default_value_t = OracleKind::Coset)]
        kind: OracleKind,
        /// Coset representative (element index).
        #[arg(long, default_value_t = 0)]
        coset: usize,
        /// Subgroup generators (element indices); the whole group when absent.
        #[arg(long)]
        gens: Option<String>,
        /// Bracket frequencies.
        #[arg(long = "S")]
        s: Option<String>,
        #[arg(long, default_value_t = 2)]
        grid: u32,
    },
    /// Count k-term progressions in a set.
    Aps {
        #[arg(long)]
        group: String,
        #[arg(long)]
        set: String,
        #[arg(long, default_value_t = 4)]
        k: usize,
    },
    /// Generalized von Neumann slack for k functions (one --expr per function).
    Gvn {
        #[arg(long)]
        group: String,
        #[arg(long, required = true)]
        expr: Vec<String>,
    },
    /// Bohr set size and regularity, optionally with a regular radius and a coset progression.
    Bohr {
        #[arg(long)]
        group: String,
        #[arg(long = "S")]
        s: String,
        #[arg(long)]
        rho: f64,
        /// Search for a regular radius in [eps, 2 eps].
        #[arg(long)]
        find_regular: Option<f64>,
        #[arg(long)]
        progression: bool,
    },
    /// Large spectrum S with B(S, 1/4) inside 2A - 2A.
    Bogolyubov {
        #[arg(long)]
        group: String,
        #[arg(long)]
        set: String,
        /// Density parameter (defaults to |A|/N).
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Proper coset progression between two Bohr sets.
    Progression {
        #[arg(long)]
        group: String,
        #[arg(long = "S")]
        s: String,
        #[arg(long)]
        rho: f64,
    },
    /// Recover (M, xi, c) from a global quadratic phase given as a polynomial mod 1.
    QuadClassify {
        #[arg(long)]
        group: String,
        /// Phase such as "(x1^2 + 2*x1*x2)/5".
        #[arg(long)]
        phase: String,
    },
    /// Evaluate e(bq(x)) for a bracket quadratic and its U^3 norm.
    Bracket {
        /// BracketQuadratic JSON (inline or file).
        #[arg(long)]
        bq: String,
    },
    /// Quadratic obstruction on F_p^n from the inverse pipeline.
    InverseF5 {
        #[command(flatten)]
        f: FnInput,
        /// Shorthand for --group F5^n.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        graph_threshold: Option<f64>,
        #[arg(long, default_value_t = 1e-9)]
        tie_tolerance: f64,
        /// Skip the exhaustive oracle on each coset of W.
        #[arg(long)]
        no_oracle: bool,
    },
    /// Sample a nilsequence F(T_g^n x0) on Z/N.
    Nilseq {
        /// NilSystem JSON (inline or file).
        #[arg(long, required_unless_present = "bracket")]
        system: Option<String>,
        /// builtin:one, builtin:e, builtin:chi_e, or NilFunction JSON (inline or file).
        #[arg(long = "F", default_value = "builtin:chi_e")]
        func: String,
        /// Starting point as per-factor coordinate blocks (defaults to the origin).
        #[arg(long)]
        x0: Option<String>,
        /// Realize the cutoff-weighted phase of this BracketQuadratic instead.
        #[arg(long, conflicts_with = "system")]
        bracket: Option<String>,
        #[arg(long = "N")]
        n: Option<u64>,
    },
    /// Hall-Petresco prediction from given points, or a random consistency check.
    HpCheck {
        /// JSON list of k-1 points.
        #[arg(long)]
        points: Option<String>,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// The Furstenberg-Weiss function on Z/N.
    Fw {
        #[arg(long = "N")]
        n: u64,
    },
    /// Largest correlation with e((a x^2 + b x)/N).
    Scan {
        #[command(flatten)]
        f: FnInput,
        #[arg(long, value_enum, default_value_t = ModeArg::Sampled)]
        mode: ModeArg,
    },
    /// One density-increment step for a set in F_5^n.
    Increment(IncrementArgs),
    /// Iterated density increments until a terminal state.
    Driver(IncrementArgs),
    /// A set without proper k-term progressions.
    ApFree {
        #[arg(long)]
        group: String,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, value_enum, default_value_t = StrategyArg::Greedy)]
        strategy: StrategyArg,
    },
    /// Fast invariant checks across all modules.
    Selftest,
}

/// Failure of a command: bad usage or a library error.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Output of one command before it is wrapped with its manifest.
pub struct Outcome {
    pub result: Value,
    pub group: Option<String>,
    pub csv: Option<String>,
    /// Domain failure reported after the result is printed.
    pub failure: Option<Error>,
}

impl Outcome {
    fn new(result: impl Serialize, group: Option<&GroupSpec>) -> CliResult<Self> {
        let result = serde_json::to_value(result).map_err(|e| Error::Io(e.to_string()))?;
        Ok(Self { result, group: group.map(|g| g.to_string()), csv: None, failure: None })
    }
}

struct Ctx {
    seed: u64,
    inputs: Vec<InputDigest>,
}

impl Ctx {
    fn read(&mut self, path: &Path) -> CliResult<String> {
        let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.inputs.push(InputDigest::new(path.display().to_string(), &bytes));
        String::from_utf8(bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())).into())
    }

    fn inline(&mut self, label: &str, text: &str) {
        self.inputs.push(InputDigest::new(label, text.as_bytes()));
    }

    /// Inline JSON, or the contents of a file when `arg` does not start with `{` or `[`.
    fn json_arg(&mut self, label: &str, arg: &str) -> CliResult<Value> {
        let t = arg.trim_start();
        let text = if t.starts_with('{') || t.starts_with('[') {
            self.inline(label, arg);
            arg.to_string()
        } else {
            self.read(Path::new(arg))?
        };
        serde_json::from_str(&text).map_err(|e| Error::Parse { pos: e.column(), msg: format!("{label}: {e}") }.into())
    }

    fn function(&mut self, input: &FnInput, default_group: Option<GroupSpec>) -> CliResult<GroupFunction> {
        let group = match (&input.group, default_group) {
            (Some(s), _) => Some(s.parse::<GroupSpec>()?),
            (None, g) => g,
        };
        match (&input.expr, &input.input) {
            (Some(expr), _) => {
                let g = group.ok_or_else(|| CliError::Usage("--expr needs --group".into()))?;
                self.inline("expr", expr);
                Ok(parse_expr(expr, &g)?)
            }
            (None, Some(path)) => {
                let text = self.read(path)?;
                let f = function_from_json(&text)?;
                if let Some(g) = group {
                    if g != f.group {
                        return Err(Error::SpecMismatch.into());
                    }
                }
                Ok(f)
            }
            (None, None) => Err(CliError::Usage("one of --expr or --input is required".into())),
        }
    }

    fn set(&mut self, g: &GroupSpec, arg: &str) -> CliResult<Vec<usize>> {
        let path = Path::new(arg);
        if path.extension().is_some_and(|e| e == "json") || path.is_file() {
            let text = self.read(path)?;
            return set_from_json(g, &text);
        }
        self.inline("set", arg);
        parse_list(arg)?
            .into_iter()
            .map(|x| if x < g.len() { Ok(x) } else { Err(Error::SpecMismatch.into()) })
            .collect()
    }
}

/// A GroupFunction from its JSON form, or from a command output whose `result` (or
/// `result.function`) is one.
pub fn function_from_json(text: &str) -> crate::Result<GroupFunction> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse { pos: e.column(), msg: e.to_string() })?;
    let v = match v.get("result") {
        Some(r) => r.get("function").unwrap_or(r).clone(),
        None => v,
    };
    serde_json::from_value(v).map_err(|e| Error::Parse { pos: 0, msg: format!("not a GroupFunction: {e}") })
}

/// Element indices from a JSON array of indices or coordinate arrays, optionally under `"set"`.
pub fn set_from_json(g: &GroupSpec, text: &str) -> CliResult<Vec<usize>> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse { pos: e.column(), msg: e.to_string() })?;
    let v = v.get("set").cloned().unwrap_or(v);
    let items = v.as_array().ok_or_else(|| Error::Parse { pos: 0, msg: "expected an array of elements".into() })?;
    items
        .iter()
        .map(|item| match item {
            Value::Number(n) => match n.as_u64() {
                Some(x) if (x as usize) < g.len() => Ok(x as usize),
                _ => Err(Error::SpecMismatch.into()),
            },
            Value::Array(c) => {
                let coords: Option<Vec<i64>> = c.iter().map(Value::as_i64).collect();
                match coords {
                    Some(c) if c.len() == g.rank() => Ok(g.index_of_ints(&c)),
                    _ => Err(Error::SpecMismatch.into()),
                }
            }
            _ => Err(Error::Parse { pos: 0, msg: format!("bad element {item}") }.into()),
        })
        .collect()
}

fn parse_list(s: &str) -> crate::Result<Vec<usize>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut pos = 0;
    s.split(',')
        .map(|t| {
            let r = t.trim().parse::<usize>().map_err(|_| Error::Parse { pos, msg: format!("bad integer {t:?}") });
            pos += t.len() + 1;
            r
        })
        .collect()
}

fn group_arg(s: &str) -> CliResult<GroupSpec> {
    Ok(s.parse::<GroupSpec>()?)
}

fn set_group(set: &SetInput) -> CliResult<GroupSpec> {
    match (&set.group, set.n) {
        (Some(g), _) => group_arg(g),
        (None, Some(n)) => Ok(GroupSpec::fp_power(5, n)),
        (None, None) => Err(CliError::Usage("one of --group or --n is required".into())),
    }
}

fn builtin_function(name: &str, sys: &NilSystem) -> CliResult<NilFunction> {
    let last = sys.factors.len().checked_sub(1).map(|f| Coord { factor: f, coord: sys.factors[f].dim() - 1 });
    let first = (!sys.factors.is_empty()).then_some(Coord { factor: 0, coord: 0 });
    let terms = match (name, first, last) {
        ("one", _, _) => vec![],
        ("e", _, Some(l)) => vec![Term::Exp { at: l, scale: 1.0 }],
        ("chi_e", Some(f), Some(l)) => vec![Term::Chi { at: f, power: 1 }, Term::Exp { at: l, scale: 1.0 }],
        _ => return Err(CliError::Usage(format!("unknown builtin {name:?} (one, e, chi_e) or empty system"))),
    };
    Ok(NilFunction { terms, cutoff: Cutoff::default() })
}

fn from_value<T: serde::de::DeserializeOwned>(label: &str, v: Value) -> CliResult<T> {
    serde_json::from_value(v).map_err(|e| Error::Parse { pos: 0, msg: format!("{label}: {e}") }.into())
}

fn increment_params(a: &IncrementArgs, seed: u64) -> IncrementParams {
    IncrementParams {
        seed,
        eta: a.eta,
        tie_tolerance: a.tie_tolerance,
        force: a.force,
        oracle: !a.no_oracle,
        ..IncrementParams::default()
    }
}

fn dispatch(cmd: &Command, ctx: &mut Ctx) -> CliResult<Outcome> {
    match cmd {
        Command::Norm { f, d, method } => {
            let f = ctx.function(f, None)?;
            let method = match method {
                MethodArg::Direct => Method::Direct,
                MethodArg::Recursive => Method::Recursive,
                MethodArg::Fourier => Method::Fourier,
            };
            Outcome::new(gowers_norm(&f, *d, method)?, Some(&f.group))
        }
        Command::U3Oracle { f, kind, coset, gens, s, grid } => {
            let f = ctx.function(f, None)?;
            let g = f.group.clone();
            let report = match kind {
                OracleKind::Coset => {
                    let h = match gens {
                        Some(list) => Subgroup::generated_by(&g, &parse_list(list)?)?,
                        None => Subgroup::whole(&g),
                    };
                    u3_oracle_coset(&f, *coset, &h, DEFAULT_BUDGET)?
                }
                OracleKind::Bracket => {
                    let s = s.as_deref().ok_or_else(|| CliError::Usage("--kind bracket needs --S".into()))?;
                    let s: Vec<u64> = parse_list(s)?.into_iter().map(|x| x as u64).collect();
                    let region: Vec<usize> = (0..g.len()).collect();
                    u3_oracle_bracket(&f, &region, &s, *grid, DEFAULT_BUDGET)?
                }
            };
            Outcome::new(report, Some(&g))
        }
        Command::Aps { group, set, k } => {
            let g = group_arg(group)?;
            let a = ctx.set(&g, set)?;
            Outcome::new(count_aps(&g, &a, *k)?, Some(&g))
        }
        Command::Gvn { group, expr } => {
            let g = group_arg(group)?;
            let fs = expr
                .iter()
                .map(|s| {
                    ctx.inline("expr", s);
                    parse_expr(s, &g)
                })
                .collect::<crate::Result<Vec<_>>>()?;
            let lambda = lambda_k(&fs)?;
            let slack = gvn_slack(&fs)?;
            Outcome::new(json!({"k": fs.len(), "lambda": [lambda.re, lambda.im], "slack": slack}), Some(&g))
        }
        Command::Bohr { group, s, rho, find_regular, progression } => {
            let g = group_arg(group)?;
            ctx.inline("S", s);
            let s = parse_list(s)?;
            let b = bohr_set(&g, &s, *rho)?;
            let mut out = json!({
                "S": s, "rho": rho, "size": b.len(), "density": b.density(),
                "regular": is_regular(&b), "members": b.members,
            });
            if let Some(eps) = find_regular {
                out["regular_rho"] = json!(find_regular_rho(&g, &s, *eps)?);
            }
            if *progression {
                out["progression"] = serde_json::to_value(coset_progression_in_bohr(&g, &s, *rho)?)
                    .map_err(|e| Error::Io(e.to_string()))?;
            }
            Outcome::new(out, Some(&g))
        }
        Command::Bogolyubov { group, set, delta } => {
            let g = group_arg(group)?;
            let a = ctx.set(&g, set)?;
            let delta = delta.unwrap_or(a.len() as f64 / g.order() as f64);
            Outcome::new(bogolyubov(&g, &a, delta)?, Some(&g))
        }
        Command::Progression { group, s, rho } => {
            let g = group_arg(group)?;
            ctx.inline("S", s);
            Outcome::new(coset_progression_in_bohr(&g, &parse_list(s)?, *rho)?, Some(&g))
        }
        Command::QuadClassify { group, phase } => {
            let g = group_arg(group)?;
            ctx.inline("phase", phase);
            Outcome::new(classify_global_quadratic(&parse_phase(phase, &g)?)?, Some(&g))
        }
        Command::Bracket { bq } => {
            let bq: BracketQuadratic = from_value("bracket quadratic", ctx.json_arg("bq", bq)?)?;
            let g = GroupSpec::new(vec![bq.n])?;
            let f = GroupFunction::from_fn(&g, |x| e(bq.eval_real(x[0] as i64)));
            let u3 = gowers_recursive(&f, 3)?;
            Outcome::new(json!({"bracket": bq, "gowers_u3": u3, "function": f}), Some(&g))
        }
        Command::InverseF5 { f, n, eta, graph_threshold, tie_tolerance, no_oracle } => {
            let f = ctx.function(f, n.map(|n| GroupSpec::fp_power(5, n)))?;
            let mut params = PipelineParams::new(*eta, ctx.seed);
            params.graph_threshold = *graph_threshold;
            params.tie_tolerance = *tie_tolerance;
            params.oracle = !no_oracle;
            Outcome::new(quadratic_obstruction_with(&f, &params)?, Some(&f.group))
        }
        Command::Nilseq { system, func, x0, bracket, n } => {
            let (sys, function, start, n) = match bracket {
                Some(bq) => {
                    let bq: BracketQuadratic = from_value("bracket quadratic", ctx.json_arg("bracket", bq)?)?;
                    let c = bracket_to_nilsystem(&bq, Cutoff::default())?;
                    let n = n.unwrap_or(bq.n);
                    (c.system, c.function, c.x0, n)
                }
                None => {
                    let system = system.as_deref().ok_or_else(|| CliError::Usage("--system is required".into()))?;
                    let sys: NilSystem = from_value("nil system", ctx.json_arg("system", system)?)?;
                    let function = match func.strip_prefix("builtin:") {
                        Some(name) => builtin_function(name, &sys)?,
                        None => from_value("nil function", ctx.json_arg("F", func)?)?,
                    };
                    let start = match x0 {
                        Some(x) => from_value::<NilPoint>("x0", ctx.json_arg("x0", x)?)?,
                        None => sys.origin(),
                    };
                    let n = n.ok_or_else(|| CliError::Usage("--N is required".into()))?;
                    (sys, function, start, n)
                }
            };
            let f = nilsequence(&function, &sys, &start, n)?;
            Outcome::new(f.clone(), Some(&f.group))
        }
        Command::HpCheck { points, k, samples } => match points {
            Some(p) => {
                let pts: Vec<Vec<f64>> = from_value("points", ctx.json_arg("points", p)?)?;
                Outcome::new(json!({"k": k, "next": hall_petresco_next(&pts, *k)?}), None)
            }
            None => Outcome::new(hall_petresco_check(*samples, ctx.seed)?, None),
        },
        Command::Fw { n } => {
            let spec = FwSpec::new(*n)?;
            let f = fw_counterexample(*n)?;
            let mut out = Outcome::new(&f, Some(&f.group))?;
            out.result["M"] = json!(spec.m);
            Ok(out)
        }
        Command::Scan { f, mode } => {
            let f = ctx.function(f, None)?;
            let mode = match mode {
                ModeArg::Exhaustive => ScanMode::Exhaustive,
                ModeArg::Sampled => ScanMode::Sampled,
            };
            let report = quadratic_correlation_scan(&f, mode, ctx.seed)?;
            let mut csv = String::from("a,b,correlation\n");
            for r in &report.rows {
                csv.push_str(&format!("{},{},{}\n", r.a, r.b, output::format_f64(r.correlation)));
            }
            let mut out = Outcome::new(report, Some(&f.group))?;
            out.csv = Some(csv);
            Ok(out)
        }
        Command::Increment(a) => {
            let g = set_group(&a.set)?;
            let set = ctx.set(&g, &a.set.set)?;
            Outcome::new(density_increment_f5(&g, &set, &increment_params(a, ctx.seed))?, Some(&g))
        }
        Command::Driver(a) => {
            let g = set_group(&a.set)?;
            let set = ctx.set(&g, &a.set.set)?;
            Outcome::new(szemeredi_driver(&g, &set, &increment_params(a, ctx.seed))?, Some(&g))
        }
        Command::ApFree { group, k, strategy } => {
            let g = group_arg(group)?;
            let strategy = match strategy {
                StrategyArg::Greedy => SearchStrategy::Greedy,
                StrategyArg::Exhaustive => SearchStrategy::Exhaustive,
            };
            let set = ap_free_search(&g, *k, strategy, ctx.seed)?;
            Outcome::new(json!({"k": k, "size": set.len(), "set": set}), Some(&g))
        }
        Command::Selftest => {
            let report = selftest::selftest(ctx.seed);
            let failed = (!report.passed).then(|| {
                let names: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
                Error::InvalidArgument(format!("self-test failures: {}", names.join(", ")))
            });
            let mut out = Outcome::new(report, None)?;
            out.failure = failed;
            Ok(out)
        }
    }
}

fn resolve_seed(flag: Option<u64>) -> CliResult<u64> {
    match flag {
        Some(s) => Ok(s),
        None => match std::env::var(SEED_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| CliError::Usage(format!("{SEED_ENV}={v:?} is not an integer"))),
            Err(_) => Ok(0),
        },
    }
}

fn report_error(e: &Error) {
    let body = json!({"error": {"name": e.name(), "message": e.to_string()}});
    eprint!("{}", output::to_json(&body));
}

/// Run the command line and return the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let command_line: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli, command_line) {
        Ok(None) => EXIT_OK,
        Ok(Some(e)) | Err(CliError::Domain(e)) => {
            report_error(&e);
            EXIT_DOMAIN
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
    }
}

/// Execute a parsed command, print its JSON, and return any failure reported after printing.
fn execute(cli: &Cli, command_line: Vec<String>) -> CliResult<Option<Error>> {
    let seed = resolve_seed(cli.common.seed)?;
    if let Some(k) = cli.common.threads {
        if k == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        // A second initialization in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    let start = Instant::now();
    let mut ctx = Ctx { seed, inputs: Vec::new() };
    let outcome = dispatch(&cli.command, &mut ctx)?;
    let manifest = RunManifest {
        command_line,
        seed,
        version: env!("CARGO_PKG_VERSION").into(),
        group: outcome.group,
        inputs: ctx.inputs,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let text = output::to_json(&output::envelope(&manifest, outcome.result));
    if let Some(path) = &cli.common.out {
        std::fs::write(path, &text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    if let Some(path) = &cli.common.csv {
        let csv = outcome.csv.ok_or_else(|| CliError::Usage("--csv is not supported by this subcommand".into()))?;
        std::fs::write(path, csv).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    print!("{text}");
    Ok(outcome.failure)
}
