mod runlog;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use lnc_core::code::{direct_sum, is_solution, lift_scalar, simulate_decode, CodeAssignment, ScalarCode};
use lnc_core::constructions::{
    mersenne_report, prop4_build, prop4_spotcheck, scaled_prop4_report, scaled_prop4_tuple, thm5_build,
    thm5_invariants, thm5_params,
};
use lnc_core::network::{compose_algorithm1, gen_combination, gen_n_omega_d, gen_swirl, Network};
use lnc_core::report::{render_table, report_paper_suite};
use lnc_core::search::{gl5_prune, swirl_full_search, swirl_prefix_search, verify_witnesses};
use lnc_core::solvability::{brute_force_scalar, check_conditions, decide_scalar, ConditionTuple, Witness};
use lnc_core::{Budget, Field};

use runlog::{sha256_hex, stable_bytes, InputDigest, RunRecord};

const EXIT_INVALID: u8 = 1;
const EXIT_BUDGET: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "lnc", version, about = "Linear network coding solvability toolkit")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for parallel searches (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Wall-clock cap per search phase in ms; overrides LNC_BUDGET_MS.
    #[arg(long, global = true)]
    budget_ms: Option<u64>,
    /// Directory for runs.ndjson; overrides LNC_LOG_DIR (default .lnc).
    #[arg(long, global = true)]
    log_dir: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Field parameters, primitive polynomial and companion matrix.
    Field(FieldArgs),
    #[command(subcommand)]
    Net(NetCmd),
    #[command(subcommand)]
    Code(CodeCmd),
    #[command(subcommand)]
    Check(CheckCmd),
    #[command(subcommand)]
    Construct(ConstructCmd),
    #[command(subcommand)]
    Search(SearchCmd),
    /// Send random messages through a coded network and decode them.
    Simulate {
        net: PathBuf,
        code: PathBuf,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Run the acceptance battery and summarize pass/fail per claim.
    Report {
        /// Criterion ids to run (default: all).
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u8>,
        /// Print a plain-text table instead of JSON.
        #[arg(long)]
        table: bool,
    },
}

#[derive(Args)]
struct FieldArgs {
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 1)]
    k: u32,
    /// Coefficients (low degree first) of an element to lift through phi.
    #[arg(long, value_delimiter = ',')]
    phi: Option<Vec<u64>>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Swirl,
    NOmegaD,
    Combination,
    Composite,
}

#[derive(Args)]
struct NetSel {
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    #[arg(long)]
    omega: Option<usize>,
    /// Out-degrees of the third layer, comma separated.
    #[arg(long, value_delimiter = ',')]
    d: Vec<usize>,
    /// Number of middle nodes of a combination network.
    #[arg(long)]
    n: Option<usize>,
    /// Read the network from a JSON file instead.
    #[arg(long, conflicts_with = "family")]
    net: Option<PathBuf>,
}

#[derive(Subcommand)]
enum NetCmd {
    /// Generate a network of a known family.
    Gen {
        #[command(flatten)]
        sel: NetSel,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Sizes, source dimension and receiver flow of a network file.
    Info { net: PathBuf },
}

#[derive(Subcommand)]
enum CodeCmd {
    /// Check that a code solves a network; scalar codes are lifted first.
    Verify { net: PathBuf, code: PathBuf },
    /// Lift a scalar code over GF(p^k) to a k-dimensional code over GF(p).
    Lift {
        code: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Direct sum of codes over the same prime field.
    Dsum {
        #[arg(long)]
        net: PathBuf,
        #[arg(required = true, num_args = 1..)]
        codes: Vec<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CheckCmd {
    /// Scalar linear solvability over GF(q).
    Scalar {
        #[command(flatten)]
        sel: NetSel,
        #[arg(long)]
        q: u64,
        /// Exhaustive search instead of the closed form.
        #[arg(long)]
        brute: bool,
        /// Write a found scalar code here.
        #[arg(long)]
        witness_out: Option<PathBuf>,
    },
    /// Rank conditions of a matrix tuple (either lemma form).
    #[command(alias = "vector-conditions")]
    Conditions { tuple: PathBuf },
}

#[derive(Subcommand)]
enum ConstructCmd {
    /// Divisor certificate and sampled rank checks for the GF(2) family.
    Prop4 {
        #[arg(long, default_value_t = 3)]
        l: u32,
        #[arg(long, default_value_t = 484)]
        omega: u64,
        /// Number of sampled products; pairs use min(this, 100).
        #[arg(long, default_value_t = 1000)]
        spotcheck: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Parameters, invariants and certificate of the odd-characteristic family.
    Thm5 {
        #[arg(long, default_value_t = 3)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        l: u64,
        /// Source dimension (default: the certificate's threshold).
        #[arg(long)]
        omega: Option<u64>,
        #[arg(long, default_value_t = 100)]
        spotcheck: usize,
        /// Skip the certificate, which needs p^L as an exact integer.
        #[arg(long)]
        params_only: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Small-block analog of the GF(2) family on an instantiated network.
    Scaled {
        #[arg(long, default_value_t = 4)]
        omega: usize,
        #[arg(long, default_value_t = 3)]
        d: usize,
        /// Write the twisted tuple here.
        #[arg(long)]
        tuple_out: Option<PathBuf>,
    },
    /// Split of 2^e - 1 into two composite-exponent factors.
    Mersenne {
        #[arg(long, value_delimiter = ',')]
        exponents: Vec<u32>,
    },
}

#[derive(Subcommand)]
enum SearchCmd {
    /// Exhaustive search for Swirl tuples over GF(2)^L.
    Swirl {
        #[arg(long)]
        omega: usize,
        #[arg(long = "L")]
        dim: usize,
        /// Enumerate all complete tuples for a small omega instead.
        #[arg(long)]
        prefix: bool,
        /// Checkpoint file; progress is resumed from it when present.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Write the enumerated tuples here (prefix mode).
        #[arg(long)]
        tuples_out: Option<PathBuf>,
    },
    /// Non-existence certificate over GF(2)^5.
    Gl5,
}

enum Fail {
    Budget(String),
    Invalid(String),
}

impl From<lnc_core::Error> for Fail {
    fn from(e: lnc_core::Error) -> Self {
        if e.is_budget() {
            Fail::Budget(e.to_string())
        } else {
            Fail::Invalid(e.to_string())
        }
    }
}

impl From<std::io::Error> for Fail {
    fn from(e: std::io::Error) -> Self {
        Fail::Invalid(e.to_string())
    }
}

impl From<serde_json::Error> for Fail {
    fn from(e: serde_json::Error) -> Self {
        Fail::Invalid(e.to_string())
    }
}

type Res<T> = std::result::Result<T, Fail>;

/// Command result: JSON for stdout plus a flag for incomplete searches.
struct Output {
    value: Value,
    incomplete: bool,
    text: Option<String>,
}

impl Output {
    fn json(value: impl Serialize) -> Res<Self> {
        Ok(Output {
            value: serde_json::to_value(value)?,
            incomplete: false,
            text: None,
        })
    }
}

struct Ctx {
    seed: u64,
    budget: Budget,
    inputs: Vec<InputDigest>,
}

impl Ctx {
    fn read<T: serde::de::DeserializeOwned>(&mut self, path: &Path) -> Res<T> {
        let bytes = fs::read(path).map_err(|e| Fail::Invalid(format!("{}: {e}", path.display())))?;
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        serde_json::from_slice(&bytes).map_err(|e| Fail::Invalid(format!("{}: {e}", path.display())))
    }

    /// A vector code, or a scalar one lifted through phi.
    fn read_code(&mut self, path: &Path) -> Res<CodeAssignment> {
        let raw: Value = self.read(path)?;
        if raw.get("field").is_some() {
            let scalar: ScalarCode = serde_json::from_value(raw)?;
            return Ok(lift_scalar(&scalar)?);
        }
        Ok(serde_json::from_value(raw)?)
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Res<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn network_from(sel: &NetSel, ctx: &mut Ctx) -> Res<Network> {
    if let Some(path) = &sel.net {
        return ctx.read(path);
    }
    let need_omega = || sel.omega.ok_or_else(|| Fail::Invalid("--omega is required for this family".into()));
    match sel.family {
        None => Err(Fail::Invalid("give --family or --net".into())),
        Some(FamilyArg::Swirl) => Ok(gen_swirl(need_omega()?, &ctx.budget)?),
        Some(FamilyArg::NOmegaD) => {
            let omega = sel.omega.unwrap_or(sel.d.len());
            Ok(gen_n_omega_d(omega, &sel.d, &ctx.budget)?)
        }
        Some(FamilyArg::Combination) => {
            let n = sel.n.ok_or_else(|| Fail::Invalid("--n is required for combination".into()))?;
            Ok(gen_combination(n)?)
        }
        Some(FamilyArg::Composite) => {
            let n = sel.n.ok_or_else(|| Fail::Invalid("--n is required for composite".into()))?;
            let base = gen_swirl(need_omega()?, &ctx.budget)?;
            Ok(compose_algorithm1(&base, n)?)
        }
    }
}

fn net_summary(net: &Network) -> Value {
    json!({
        "family": net.family(),
        "omega": net.omega(),
        "nodes": net.num_nodes(),
        "edges": net.num_edges(),
        "receivers": net.receivers().len(),
    })
}

fn run(cmd: Cmd, ctx: &mut Ctx) -> Res<Output> {
    match cmd {
        Cmd::Field(args) => {
            let field = Field::gf(args.p, args.k)?;
            let phi = match args.phi {
                Some(c) => Some(field.phi(field.from_coeffs(&c)?)),
                None => None,
            };
            Output::json(json!({
                "field": field.spec(),
                "order": field.order(),
                "gamma": field.coeffs(field.gamma()),
                "companion": field.companion(),
                "phi": phi,
            }))
        }
        Cmd::Net(NetCmd::Gen { sel, output }) => {
            let net = network_from(&sel, ctx)?;
            let mut out = net_summary(&net);
            out["sha256"] = json!(sha256_hex(&serde_json::to_vec(&net)?));
            match output {
                Some(path) => {
                    write_json(&path, &net)?;
                    out["written"] = json!(path.display().to_string());
                }
                None => out["network"] = serde_json::to_value(&net)?,
            }
            Output::json(out)
        }
        Cmd::Net(NetCmd::Info { net }) => {
            let net: Network = ctx.read(&net)?;
            let mut out = net_summary(&net);
            out["deficient_receivers"] = json!(net.deficient_receivers());
            Output::json(out)
        }
        Cmd::Code(CodeCmd::Verify { net, code }) => {
            let net: Network = ctx.read(&net)?;
            let code = ctx.read_code(&code)?;
            Output::json(is_solution(&net, &code)?)
        }
        Cmd::Code(CodeCmd::Lift { code, output }) => {
            let scalar: ScalarCode = ctx.read(&code)?;
            let lifted = lift_scalar(&scalar)?;
            if let Some(path) = output {
                write_json(&path, &lifted)?;
            }
            Output::json(lifted)
        }
        Cmd::Code(CodeCmd::Dsum { net, codes, output }) => {
            let net: Network = ctx.read(&net)?;
            let codes = codes.iter().map(|c| ctx.read_code(c)).collect::<Res<Vec<_>>>()?;
            let sum = direct_sum(&net, &codes)?;
            if let Some(path) = output {
                write_json(&path, &sum)?;
            }
            Output::json(sum)
        }
        Cmd::Check(CheckCmd::Scalar {
            sel,
            q,
            brute,
            witness_out,
        }) => {
            let net = network_from(&sel, ctx)?;
            let verdict = if brute || witness_out.is_some() {
                brute_force_scalar(&net, q, &ctx.budget)?
            } else {
                decide_scalar(&net, q, &ctx.budget)?
            };
            if let (Some(path), Some(Witness::Code { code })) = (&witness_out, &verdict.witness) {
                write_json(path, code)?;
            }
            let mut out = serde_json::to_value(&verdict)?;
            out["q"] = json!(q);
            Output::json(out)
        }
        Cmd::Check(CheckCmd::Conditions { tuple }) => {
            let tuple: ConditionTuple = ctx.read(&tuple)?;
            Output::json(check_conditions(&tuple, &ctx.budget)?)
        }
        Cmd::Construct(ConstructCmd::Prop4 {
            l,
            omega,
            spotcheck,
            output,
        }) => {
            let build = prop4_build(l, omega)?;
            let sample = prop4_spotcheck(&build, spotcheck.min(100), spotcheck, ctx.seed);
            let out = json!({
                "params": build.params.summary(),
                "certificate": build.certificate,
                "spotcheck": sample,
            });
            if let Some(path) = output {
                write_json(&path, &out)?;
            }
            Output::json(out)
        }
        Cmd::Construct(ConstructCmd::Thm5 {
            p,
            l,
            omega,
            spotcheck,
            params_only,
            output,
        }) => {
            let params = thm5_params(p)?;
            let mut out = json!({ "params": params, "invariants": thm5_invariants(&params, l) });
            if !params_only {
                let omega = match omega {
                    Some(w) => w,
                    None => thm5_build(&params, l, 1)?.certificate.omega_threshold,
                };
                let build = thm5_build(&params, l, omega)?;
                out["certificate"] = serde_json::to_value(&build.certificate)?;
                out["spotcheck"] = serde_json::to_value(build.family.spotcheck(spotcheck, omega, ctx.seed))?;
            }
            if let Some(path) = output {
                write_json(&path, &out)?;
            }
            Output::json(out)
        }
        Cmd::Construct(ConstructCmd::Scaled { omega, d, tuple_out }) => {
            if let Some(path) = tuple_out {
                write_json(&path, &scaled_prop4_tuple(omega, d, true)?)?;
            }
            Output::json(scaled_prop4_report(omega, d, &ctx.budget)?)
        }
        Cmd::Construct(ConstructCmd::Mersenne { exponents }) => {
            let exps = if exponents.is_empty() {
                (2..=31).collect()
            } else {
                exponents
            };
            Output::json(mersenne_report(&exps))
        }
        Cmd::Search(SearchCmd::Swirl {
            omega,
            dim,
            prefix,
            resume,
            tuples_out,
        }) => {
            let outcome = if prefix {
                let (outcome, tuples) = swirl_prefix_search(omega, dim, &ctx.budget)?;
                if let Some(path) = tuples_out {
                    write_json(&path, &tuples)?;
                }
                let mut v = serde_json::to_value(&outcome)?;
                v["tuples"] = json!(tuples.len());
                v
            } else {
                let outcome = swirl_full_search(omega, dim, &ctx.budget, resume.as_deref())?;
                let mut v = serde_json::to_value(&outcome)?;
                v["witnesses_verified"] = json!(verify_witnesses(&outcome, &ctx.budget)?);
                v
            };
            let incomplete = outcome["exhausted"] == json!(false);
            Ok(Output {
                value: outcome,
                incomplete,
                text: None,
            })
        }
        Cmd::Search(SearchCmd::Gl5) => {
            let cert = gl5_prune(&ctx.budget)?;
            let incomplete = !cert.outcome.exhausted;
            Ok(Output {
                value: serde_json::to_value(&cert)?,
                incomplete,
                text: None,
            })
        }
        Cmd::Simulate { net, code, trials } => {
            let net: Network = ctx.read(&net)?;
            let code = ctx.read_code(&code)?;
            Output::json(simulate_decode(&net, &code, trials, ctx.seed)?)
        }
        Cmd::Report { criteria, table } => {
            let suite = report_paper_suite(&ctx.budget, &criteria)?;
            Ok(Output {
                text: table.then(|| render_table(&suite)),
                value: serde_json::to_value(&suite)?,
                incomplete: false,
            })
        }
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let outcome = json!({ "usage": e.kind().to_string() });
            let rec = RunRecord {
                output_sha256: sha256_hex(&stable_bytes(&outcome)),
                argv,
                config: Value::Null,
                inputs: Vec::new(),
                exit_code: code.into(),
                wall_s: start.elapsed().as_secs_f64(),
                outcome,
            };
            write_record(None, &rec);
            return ExitCode::from(code);
        }
    };
    let mut budget = Budget::from_env();
    if cli.budget_ms.is_some() {
        budget.time_ms = cli.budget_ms;
    }
    if let Some(n) = cli.threads {
        // only fails if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let config = json!({ "seed": cli.seed, "threads": cli.threads, "budget": budget });
    let mut ctx = Ctx {
        seed: cli.seed,
        budget,
        inputs: Vec::new(),
    };

    let (code, mut value, text) = match run(cli.cmd, &mut ctx) {
        Ok(out) => (if out.incomplete { EXIT_BUDGET } else { 0 }, out.value, out.text),
        Err(Fail::Budget(msg)) => (EXIT_BUDGET, json!({ "error": "budget", "message": msg }), None),
        Err(Fail::Invalid(msg)) => (EXIT_INVALID, json!({ "error": "invalid", "message": msg }), None),
    };
    if let Value::Object(map) = &mut value {
        let wall = json!(start.elapsed().as_secs_f64());
        match map.get_mut("timing") {
            Some(Value::Object(t)) => {
                t.insert("wall_s".into(), wall);
            }
            _ => {
                map.insert("timing".into(), json!({ "wall_s": wall }));
            }
        }
    }
    let shown = match text {
        Some(t) => t,
        None => serde_json::to_string_pretty(&value).expect("json values serialize") + "\n",
    };
    // a closed pipe downstream is not an error of the command
    let _ = std::io::stdout().lock().write_all(shown.as_bytes());
    if let Some(msg) = value.get("message").and_then(Value::as_str) {
        eprintln!("lnc: {msg}");
    }
    let output_sha256 = sha256_hex(&stable_bytes(&value));
    if let Value::Object(map) = &mut value {
        map.remove("timing");
    }
    let rec = RunRecord {
        argv,
        config,
        inputs: ctx.inputs,
        output_sha256,
        exit_code: code.into(),
        wall_s: start.elapsed().as_secs_f64(),
        outcome: value,
    };
    write_record(cli.log_dir, &rec);
    ExitCode::from(code)
}

fn write_record(dir: Option<PathBuf>, rec: &RunRecord) {
    let dir = dir.unwrap_or_else(runlog::log_dir);
    if let Err(e) = runlog::append(&dir, rec) {
        eprintln!("lnc: cannot write run log in {}: {e}", dir.display());
    }
}
