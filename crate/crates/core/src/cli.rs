//! Command-line front end.
//!
//! Exit status is 0 on success, 1 when the protocol itself is at fault
//! (parse, projection, typing or verification failures, reported as JSON
//! on stdout) and 2 for bad invocations.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::io::IsTerminal;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value as Json};

use crate::projection::project;
use crate::properties::{verify_trace, verify_tree, CheckReport};
use crate::quantum::QuantumState;
use crate::semantics::{
    config_json, explore_interleavings, run_exhaustive, run_sample, trace_json, tree_json, Configuration,
    DEFAULT_MAX_STEPS,
};
use crate::syntax::{
    free_process_vars, parse_expr, parse_file, GlobalType, ProtocolFile, Role, SyntaxError, Value,
};
use crate::semantics::{eval_expr, subst_process};
use crate::typecheck::{derive_system, type_system, ClassicalEnv, QubitEnv, TypeError};

const DEFAULT_MAX_DEPTH: usize = 512;
const DEFAULT_MAX_STATES: usize = 100_000;

#[derive(Parser, Debug)]
#[command(name = "qmpst", version, about = "Check and run quantum multiparty protocols")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
struct Input {
    /// Protocol file
    file: String,
    /// Override a parameter, e.g. `--param xs=[1,0]`
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    /// Initial amplitudes of a register qubit, e.g. `--init q=0.6,0.8`
    #[arg(long = "init", value_name = "QUBIT=A,B")]
    init: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Parse and print the file in normal form
    Parse(Input),
    /// Print the projection of the global type onto one role
    Project {
        #[arg(long)]
        role: String,
        #[command(flatten)]
        input: Input,
    },
    /// Type-check the system against the global type
    Check {
        /// Include the typing derivation in the report
        #[arg(long)]
        derivation: bool,
        #[command(flatten)]
        input: Input,
    },
    /// Execute the system
    Simulate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Mode::Sample)]
        mode: Mode,
        /// Run every metatheory check on the result
        #[arg(long)]
        verify: bool,
        /// Also explore every scheduling of independent redexes
        #[arg(long)]
        interleavings: bool,
        #[arg(long = "max-depth")]
        max_depth: Option<usize>,
        #[command(flatten)]
        input: Input,
    },
    /// Compare the sampled traces of two seeds
    TraceDiff {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        against: u64,
        #[command(flatten)]
        input: Input,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Sample,
    Exhaustive,
}

/// A protocol ready to run: parameters substituted, sugar removed and the
/// register allocated.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub file: ProtocolFile,
    pub global: Option<GlobalType>,
    pub config: Configuration,
    pub gamma: ClassicalEnv,
}

impl Loaded {
    pub fn sigma(&self) -> QubitEnv {
        self.config.state.qubits().iter().cloned().collect()
    }

    /// Type-checks the initial configuration, locating errors by line.
    pub fn check(&self) -> Result<(), Vec<TypeError>> {
        let g = self.global.as_ref().ok_or_else(|| vec![missing_global()])?;
        type_system(&self.gamma, &self.sigma(), &self.config.system, g).map_err(|es| self.locate(es))
    }

    fn locate(&self, mut es: Vec<TypeError>) -> Vec<TypeError> {
        for e in &mut es {
            if let Some(r) = &e.location.role {
                if let Some(l) = self.file.role_lines.get(&Role::new(r.as_str())) {
                    e.location.line.get_or_insert(*l);
                }
            }
        }
        es
    }
}

fn missing_global() -> TypeError {
    TypeError::new(
        crate::typecheck::TypeErrorKind::ProjectionMismatch,
        "the file declares no global type",
    )
}

#[derive(Debug)]
pub enum LoadError {
    Usage(String),
    Syntax(SyntaxError),
}

impl From<SyntaxError> for LoadError {
    fn from(e: SyntaxError) -> Self {
        LoadError::Syntax(e)
    }
}

fn parse_value(src: &str) -> Result<Value, LoadError> {
    let e = parse_expr(src).map_err(|e| LoadError::Usage(format!("bad value `{src}`: {e}")))?;
    eval_expr(&e).map_err(|e| LoadError::Usage(format!("bad value `{src}`: {e}")))
}

fn split_kv(s: &str) -> Result<(&str, &str), LoadError> {
    s.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .ok_or_else(|| LoadError::Usage(format!("expected NAME=VALUE, got `{s}`")))
}

fn parse_amplitude(s: &str) -> Result<Complex64, LoadError> {
    s.trim()
        .parse::<Complex64>()
        .map_err(|_| LoadError::Usage(format!("bad amplitude `{s}`")))
}

/// Loads protocol text with parameter overrides (`name=value`) and initial
/// qubit amplitudes (`qubit=a,b`).
pub fn load_str(src: &str, params: &[String], init: &[String]) -> Result<Loaded, LoadError> {
    let file = parse_file(src)?;
    let mut values = file.params.clone();
    for p in params {
        let (k, v) = split_kv(p)?;
        values.insert(k.to_string(), parse_value(v)?);
    }
    let mut system = file.system.clone().unwrap_or_default().desugar();
    for p in system.roles.values_mut() {
        for (k, v) in &values {
            *p = subst_process(p, k, v);
        }
    }
    let names: Vec<String> = match &file.register {
        Some(r) => r.clone(),
        None => {
            let mut fv = BTreeSet::new();
            for p in system.roles.values() {
                fv.extend(free_process_vars(p));
            }
            fv.into_iter().collect()
        }
    };
    let mut inits: BTreeMap<String, (Complex64, Complex64)> = BTreeMap::new();
    for i in init {
        let (q, v) = split_kv(i)?;
        let (a, b) = v
            .split_once(',')
            .ok_or_else(|| LoadError::Usage(format!("expected QUBIT=A,B, got `{i}`")))?;
        if !names.iter().any(|n| n == q) {
            return Err(LoadError::Usage(format!("`{q}` is not a register qubit")));
        }
        inits.insert(q.to_string(), (parse_amplitude(a)?, parse_amplitude(b)?));
    }
    let mut amps = vec![Complex64::new(1.0, 0.0)];
    for n in &names {
        let (a, b) = inits
            .get(n)
            .copied()
            .unwrap_or((Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)));
        amps = amps.iter().flat_map(|x| [x * a, x * b]).collect();
    }
    let state = QuantumState::from_amplitudes(names, amps)
        .map_err(|e| LoadError::Usage(format!("bad initial register: {e}")))?;
    let global = file.global.clone();
    Ok(Loaded {
        file,
        global,
        config: Configuration::new(state, system),
        gamma: ClassicalEnv::new(),
    })
}

struct Out {
    stdout: String,
    status: i32,
}

fn ok(v: String) -> Out {
    Out { stdout: v, status: 0 }
}

fn domain(v: Json) -> Out {
    Out {
        stdout: pretty(&v) + "\n",
        status: 1,
    }
}

fn pretty(v: &Json) -> String {
    serde_json::to_string_pretty(v).expect("json values serialise")
}

fn syntax_report(e: &SyntaxError) -> Json {
    match e {
        SyntaxError::Parse(p) => json!({
            "status": "error",
            "error": "parse",
            "line": p.line,
            "col": p.col,
            "expected": p.expected,
            "found": p.found,
        }),
        other => json!({ "status": "error", "error": "syntax", "message": other.to_string() }),
    }
}

fn type_report(es: &[TypeError]) -> Json {
    json!({ "status": "error", "error": "type", "errors": es })
}

fn checks_json(rs: &[CheckReport]) -> Json {
    json!(rs)
}

fn load(input: &Input) -> Result<Loaded, Out> {
    let src = std::fs::read_to_string(&input.file).map_err(|e| Out {
        stdout: String::new(),
        status: usage(&format!("cannot read {}: {e}", input.file)),
    })?;
    match load_str(&src, &input.params, &input.init) {
        Ok(l) => Ok(l),
        Err(LoadError::Syntax(e)) => Err(domain(syntax_report(&e))),
        Err(LoadError::Usage(m)) => Err(Out {
            stdout: String::new(),
            status: usage(&m),
        }),
    }
}

fn usage(msg: &str) -> i32 {
    eprintln!("{}: {msg}", paint("error", "31"));
    2
}

fn color_enabled() -> bool {
    std::env::var("QMPST_COLOR").map(|v| v != "0").unwrap_or(true) && std::io::stderr().is_terminal()
}

fn paint(s: &str, code: &str) -> String {
    if color_enabled() {
        format!("\x1b[{code}m{s}\x1b[0m")
    } else {
        s.to_string()
    }
}

fn exec(cmd: Cmd) -> Out {
    match cmd {
        Cmd::Parse(input) => match load(&input) {
            Ok(l) => ok(l.file.to_string()),
            Err(o) => o,
        },
        Cmd::Project { role, input } => {
            let l = match load(&input) {
                Ok(l) => l,
                Err(o) => return o,
            };
            let Some(g) = &l.global else {
                return domain(type_report(&[missing_global()]));
            };
            match project(g, &Role::new(role.as_str())) {
                Ok(t) => ok(format!("{t}\n")),
                Err(e) => domain(json!({ "status": "error", "error": "projection", "errors": [e] })),
            }
        }
        Cmd::Check { derivation, input } => {
            let l = match load(&input) {
                Ok(l) => l,
                Err(o) => return o,
            };
            let Some(g) = &l.global else {
                return domain(type_report(&[missing_global()]));
            };
            let roles: Vec<String> = l.config.system.roles.keys().map(|r| r.to_string()).collect();
            if derivation {
                match derive_system(&l.gamma, &l.sigma(), &l.config.system, g) {
                    Ok(d) => ok(pretty(&json!({ "status": "ok", "roles": roles, "derivation": d })) + "\n"),
                    Err(es) => domain(type_report(&l.locate(es))),
                }
            } else {
                match l.check() {
                    Ok(()) => ok(pretty(&json!({ "status": "ok", "roles": roles })) + "\n"),
                    Err(es) => domain(type_report(&es)),
                }
            }
        }
        Cmd::Simulate {
            seed,
            mode,
            verify,
            interleavings,
            max_depth,
            input,
        } => {
            let l = match load(&input) {
                Ok(l) => l,
                Err(o) => return o,
            };
            if l.global.is_some() {
                if let Err(es) = l.check() {
                    return domain(type_report(&es));
                }
            }
            simulate(&l, seed, mode, verify, interleavings, max_depth)
        }
        Cmd::TraceDiff { seed, against, input } => {
            let l = match load(&input) {
                Ok(l) => l,
                Err(o) => return o,
            };
            let run = |s| run_sample(&l.config, s, DEFAULT_MAX_STEPS).map(|t| trace_json(&t));
            let (a, b) = match (run(seed), run(against)) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(e), _) | (_, Err(e)) => {
                    return domain(json!({ "status": "error", "error": "semantics", "message": e.to_string() }))
                }
            };
            let sa = a["steps"].as_array().cloned().unwrap_or_default();
            let sb = b["steps"].as_array().cloned().unwrap_or_default();
            let first = (0..sa.len().max(sb.len())).find(|&i| sa.get(i) != sb.get(i));
            let same = a == b;
            let report = json!({
                "identical": same,
                "first_difference": first,
                "left": { "seed": seed, "steps": sa.len() },
                "right": { "seed": against, "steps": sb.len() },
            });
            Out {
                stdout: pretty(&report) + "\n",
                status: if same { 0 } else { 1 },
            }
        }
    }
}

fn simulate(l: &Loaded, seed: u64, mode: Mode, verify: bool, interleavings: bool, max_depth: Option<usize>) -> Out {
    let sem_err = |e: crate::semantics::SemanticsError| {
        domain(json!({ "status": "error", "error": "semantics", "message": e.to_string() }))
    };
    let (mut report, checks) = match mode {
        Mode::Sample => {
            let t = match run_sample(&l.config, seed, max_depth.unwrap_or(DEFAULT_MAX_STEPS)) {
                Ok(t) => t,
                Err(e) => return sem_err(e),
            };
            let checks = match (&l.global, verify) {
                (Some(g), true) => Some(verify_trace(&t, g, &l.gamma)),
                _ => None,
            };
            (trace_json(&t), checks)
        }
        Mode::Exhaustive => {
            let t = match run_exhaustive(&l.config, max_depth.unwrap_or(DEFAULT_MAX_DEPTH)) {
                Ok(t) => t,
                Err(e) => return sem_err(e),
            };
            let checks = match (&l.global, verify) {
                (Some(g), true) => Some(verify_tree(&t, g, &l.gamma)),
                _ => None,
            };
            (tree_json(&t), checks)
        }
    };
    if interleavings {
        match explore_interleavings(&l.config, DEFAULT_MAX_STATES) {
            Ok(i) => {
                report["interleavings"] = json!({
                    "states": i.states,
                    "terminal": i.terminal.iter().map(config_json).collect::<Vec<_>>(),
                    "stuck": i.stuck.iter().map(config_json).collect::<Vec<_>>(),
                });
            }
            Err(e) => return sem_err(e),
        }
    }
    let mut status = 0;
    if verify {
        let checks = checks.unwrap_or_default();
        if checks.iter().any(|c| !c.pass) {
            status = 1;
        }
        report["checks"] = checks_json(&checks);
    }
    Out {
        stdout: pretty(&report) + "\n",
        status,
    }
}

/// Runs the command line and returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut cmd = <Cli as clap::CommandFactory>::command();
    if !color_enabled() {
        cmd = cmd.color(clap::ColorChoice::Never);
    }
    let cli = match cmd.try_get_matches_from(argv).and_then(|m| <Cli as clap::FromArgMatches>::from_arg_matches(&m)) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let out = exec(cli.cmd);
    print!("{}", out.stdout);
    if out.status == 1 {
        eprintln!("{}", paint("failed", "31"));
    }
    out.status
}
