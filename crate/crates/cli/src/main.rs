mod manifest;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use rqa_core::agent::{self, Pipeline, TakenSet};
use rqa_core::bench::factoring::{default_widths, gen_corpus_factoring, gen_factoring, BitSource, FactoringInstance};
use rqa_core::bench::{gen_random_3sat, gen_satisfiable_3sat, run_experiment, ExperimentConfig};
use rqa_core::{cnf, encoder, par, seed};

use manifest::{RunManifest, SamplerKind};

/// Reinforcement quantum annealing workbench.
#[derive(Parser)]
#[command(name = "rqa-forge", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a DIMACS formula into an Ising model (JSON).
    Encode(EncodeArgs),
    /// Run one pipeline on one formula. Exit 0 if every clause is satisfied, 1 if not.
    Solve(SolveArgs),
    /// Run a corpus × method × budget experiment and write CSV + JSON reports.
    Bench(BenchArgs),
    /// Generate benchmark instances as DIMACS files plus a manifest.
    Gen(GenArgs),
}

#[derive(Args)]
struct EncodeArgs {
    input: PathBuf,
    /// Influence factors, one per clause (whitespace or comma separated).
    #[arg(long)]
    rho: Option<PathBuf>,
    /// Output file; JSON goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct RunFlags {
    /// TOML run manifest; flags override its fields.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    method: Vec<Pipeline>,
    #[arg(long, value_delimiter = ',')]
    budget: Vec<usize>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    theta1: Option<f64>,
    #[arg(long)]
    theta2: Option<f64>,
    #[arg(long, value_parser = parse_taken_set)]
    taken_set: Option<TakenSet>,
    #[arg(long, value_enum)]
    env: Option<SamplerKind>,
    /// Inverse temperature of the exact sampler.
    #[arg(long)]
    beta_eff: Option<f64>,
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long)]
    beta_start: Option<f64>,
    #[arg(long)]
    beta_end: Option<f64>,
    #[arg(long)]
    gauges: Option<usize>,
    #[arg(long)]
    quantize_bits: Option<u32>,
    /// Root seed (falls back to the manifest, then RQA_FORGE_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
    /// Record wall-clock times (outputs are then not byte-reproducible).
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct SolveArgs {
    /// DIMACS file; may instead come from the manifest.
    input: Option<PathBuf>,
    #[command(flatten)]
    run: RunFlags,
}

#[derive(Args)]
struct BenchArgs {
    /// Built-in manifest: desk or paper-shape.
    #[arg(long, conflicts_with = "manifest")]
    preset: Option<String>,
    /// Print the resolved manifest and exit.
    #[arg(long)]
    print_manifest: bool,
    #[command(flatten)]
    run: RunFlags,
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    kind: GenKind,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    force: bool,
}

#[derive(Subcommand)]
enum GenKind {
    /// Multiplier-circuit CNF for one target, or a corpus of semiprimes.
    Factoring {
        /// Number to factor.
        #[arg(required_unless_present = "bit_limit")]
        target: Option<u64>,
        #[arg(long, requires = "target")]
        n1: Option<u32>,
        #[arg(long, requires = "target")]
        n2: Option<u32>,
        /// Generate every semiprime below 2^bit_limit instead.
        #[arg(long, conflicts_with = "target")]
        bit_limit: Option<u32>,
        #[arg(long, default_value_t = 63)]
        var_limit: usize,
    },
    /// Uniform random 3-SAT.
    Random3sat {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = rqa_core::bench::random::DEFAULT_RATIO)]
        ratio: f64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Keep only satisfiable draws.
        #[arg(long)]
        satisfiable: bool,
    },
}

fn parse_taken_set(s: &str) -> Result<TakenSet, String> {
    match s {
        "satisfied" => Ok(TakenSet::Satisfied),
        "unsatisfied" => Ok(TakenSet::Unsatisfied),
        _ => Err(format!("expected satisfied or unsatisfied, got '{s}'")),
    }
}

impl RunFlags {
    /// Manifest (or `base`) with every given flag written over it.
    fn apply(&self, base: RunManifest) -> Result<RunManifest> {
        let mut m = match &self.manifest {
            Some(p) => RunManifest::load(p)?,
            None => base,
        };
        if !self.method.is_empty() {
            m.methods = Some(self.method.clone());
        }
        if !self.budget.is_empty() {
            m.budgets = Some(self.budget.clone());
        }
        macro_rules! over {
            ($($dst:expr => $src:expr),*) => { $(if let Some(v) = $src { $dst = Some(v); })* };
        }
        over!(
            m.repeats => self.repeats,
            m.episodes => self.episodes,
            m.theta1 => self.theta1,
            m.theta2 => self.theta2,
            m.taken_set => self.taken_set,
            m.seed => self.seed,
            m.workers => self.workers,
            m.env.sampler => self.env,
            m.env.beta_eff => self.beta_eff,
            m.env.sweeps => self.sweeps,
            m.env.beta_start => self.beta_start,
            m.env.beta_end => self.beta_end,
            m.env.gauges => self.gauges,
            m.env.quantize_bits => self.quantize_bits
        );
        if self.timing {
            m.timing = Some(true);
        }
        Ok(m)
    }

    /// The flag is relative to the working directory, the manifest field to
    /// the manifest.
    fn out_path(&self, m: &RunManifest) -> Option<PathBuf> {
        self.out.clone().or_else(|| m.out.as_ref().map(|p| m.resolve(p)))
    }
}

fn refuse_overwrite(path: &Path, force: bool) -> Result<()> {
    if path.exists() && !force {
        bail!("{} already exists (pass --force to overwrite)", path.display());
    }
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn read_formula(path: &Path) -> Result<cnf::CnfFormula> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    cnf::parse_dimacs(&text).with_context(|| format!("parsing {}", path.display()))
}

fn parse_rho(text: &str) -> Result<Vec<f64>> {
    text.split(|c: char| c.is_whitespace() || matches!(c, ',' | '[' | ']'))
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().with_context(|| format!("bad influence factor '{t}'")))
        .collect()
}

fn cmd_encode(a: &EncodeArgs) -> Result<()> {
    let f = read_formula(&a.input)?;
    let rho = match &a.rho {
        Some(p) => {
            let rho = parse_rho(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?;
            if rho.len() != f.num_clauses() {
                bail!("{} influence factors given for {} clauses", rho.len(), f.num_clauses());
            }
            rho
        }
        None => vec![0.0; f.num_clauses()],
    };
    if let Some(out) = &a.out {
        refuse_overwrite(out, a.force)?;
    }
    let enc = encoder::encode(&f, &rho)?;
    let json = serde_json::to_string_pretty(&enc)? + "\n";

    let (min, mean) = if enc.margins.is_empty() {
        (0.0, 0.0)
    } else {
        let min = enc.margins.iter().copied().fold(f64::INFINITY, f64::min);
        (min, enc.margins.iter().sum::<f64>() / enc.margins.len() as f64)
    };
    let summary = format!(
        "clauses {}  spins {}  D min {min:.6}  D mean {mean:.6}  rho shift {:.6}",
        f.num_clauses(),
        enc.model.num_spins(),
        enc.rho_shift
    );
    match &a.out {
        Some(out) => {
            write_file(out, &json)?;
            println!("{summary}");
        }
        None => {
            std::io::stdout().write_all(json.as_bytes())?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn single<T: Copy>(what: &str, given: Option<&Vec<T>>, default: T) -> Result<T> {
    match given.map(Vec::as_slice) {
        None | Some([]) => Ok(default),
        Some([v]) => Ok(*v),
        Some(_) => bail!("solve takes a single {what}"),
    }
}

/// Returns whether every clause was satisfied.
fn cmd_solve(a: &SolveArgs) -> Result<bool> {
    let m = a.run.apply(RunManifest::default())?;
    let (name, formula) = match &a.input {
        Some(p) => (p.display().to_string(), read_formula(p)?),
        None => {
            let mut corpus = m.corpus()?;
            if corpus.len() != 1 {
                bail!("solve needs exactly one instance, the manifest names {}", corpus.len());
            }
            let i = corpus.remove(0);
            (i.name, i.formula)
        }
    };
    let method = single("method", m.methods.as_ref(), Pipeline::Rqa)?;
    let budget = single("budget", m.budgets.as_ref(), 1000)?;
    let env = m.env_config()?;
    let cfg = m.agent_config();
    let root = m.seed()?;
    let out = a.run.out_path(&m);
    if let Some(out) = &out {
        refuse_overwrite(out, a.run.force)?;
    }

    let start = Instant::now();
    let result = par::with_workers(m.workers.unwrap_or(0), || {
        agent::run(method, &formula, &env, budget, &cfg, seed::derive(root, "solve"))
    })?;
    let wall = start.elapsed().as_secs_f64() * 1e3;
    let result = if m.timing == Some(true) { result } else { result.without_timing() };
    let json = serde_json::to_string_pretty(&result)? + "\n";
    let summary = format!(
        "{name}: {method} budget {budget}: unsatisfied {}/{}  runtime {wall:.1} ms",
        result.unsat_count,
        formula.num_clauses()
    );
    match &out {
        Some(out) => {
            write_file(out, &json)?;
            println!("{summary}");
        }
        None => {
            std::io::stdout().write_all(json.as_bytes())?;
            eprintln!("{summary}");
        }
    }
    Ok(result.is_satisfied())
}

fn cmd_bench(a: &BenchArgs) -> Result<()> {
    let base = match &a.preset {
        Some(p) => RunManifest::preset(p)?,
        None if a.run.manifest.is_some() => RunManifest::default(),
        None => bail!("bench needs --manifest or --preset"),
    };
    let m = a.run.apply(base)?;
    if a.print_manifest {
        print!("{}", m.to_toml()?);
        return Ok(());
    }
    let defaults = ExperimentConfig::default();
    let cfg = ExperimentConfig {
        methods: m.methods.clone().unwrap_or(defaults.methods),
        budgets: m.budgets.clone().unwrap_or(defaults.budgets),
        env: m.env_config()?,
        agent: m.agent_config(),
        repeats: m.repeats.unwrap_or(defaults.repeats),
        seed: m.seed()?,
        record_timing: m.timing == Some(true),
    };
    let dir = a.run.out_path(&m).unwrap_or_else(|| PathBuf::from("rqa-report"));
    let (csv_path, json_path) = (dir.join("results.csv"), dir.join("summary.json"));
    refuse_overwrite(&csv_path, a.run.force)?;
    refuse_overwrite(&json_path, a.run.force)?;
    let corpus = m.corpus()?;

    let report = par::with_workers(m.workers.unwrap_or(0), || run_experiment(&corpus, &cfg))?;
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    write_file(&csv_path, &report.to_csv_string())?;
    write_file(&json_path, &(report.summary_json()? + "\n"))?;
    println!("{} instances; mean unsatisfied clauses by budget:", corpus.len());
    print!("{}", report.mean_table());
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}

fn factoring_dimacs(inst: &FactoringInstance) -> String {
    let bits = |bs: &[BitSource]| {
        bs.iter()
            .map(|b| match b {
                BitSource::Var(v) => v.to_string(),
                BitSource::Const(c) => if *c { "T" } else { "F" }.to_string(),
            })
            .collect::<Vec<_>>()
            .join(" ")
    };
    format!(
        "c factoring {} = x1 * x2 ({}x{} bits)\nc x1 bits, least significant first: {}\nc x2 bits, least significant first: {}\n{}",
        inst.target,
        inst.n1,
        inst.n2,
        bits(&inst.x1_bits),
        bits(&inst.x2_bits),
        cnf::serialize_dimacs(&inst.cnf)
    )
}

fn cmd_gen(a: &GenArgs) -> Result<()> {
    let files: Vec<(String, String)> = match &a.kind {
        GenKind::Factoring { target: Some(q), n1, n2, .. } => {
            let (d1, d2) = default_widths(*q);
            let inst = gen_factoring(*q, n1.unwrap_or(d1), n2.unwrap_or(d2))?;
            vec![(inst.name(), factoring_dimacs(&inst))]
        }
        GenKind::Factoring { target: None, bit_limit, var_limit, .. } => {
            let bit_limit = bit_limit.expect("clap requires a target or --bit-limit");
            gen_corpus_factoring(bit_limit, *var_limit)?.iter().map(|i| (i.name(), factoring_dimacs(i))).collect()
        }
        GenKind::Random3sat { n, ratio, count, seed: s, satisfiable } => {
            let formulas = if *satisfiable {
                gen_satisfiable_3sat(*count, *n, *ratio, *s)?
            } else {
                (0..*count as u64)
                    .map(|k| gen_random_3sat(*n, *ratio, seed::derive_indexed(*s, "random3sat", k)))
                    .collect::<Result<_, _>>()?
            };
            formulas
                .iter()
                .enumerate()
                .map(|(k, f)| {
                    let header = format!("c random 3-SAT n={n} ratio={ratio} seed={s} index={k}\n");
                    (format!("r3sat-n{n}-s{s}-{k:03}"), header + &cnf::serialize_dimacs(f))
                })
                .collect()
        }
    };
    if files.is_empty() {
        bail!("no instances matched the parameters");
    }
    let dir = a.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let manifest_path = dir.join("manifest.toml");
    refuse_overwrite(&manifest_path, a.force)?;
    for (name, _) in &files {
        refuse_overwrite(&dir.join(format!("{name}.cnf")), a.force)?;
    }
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut instances = Vec::new();
    for (name, text) in &files {
        let file = format!("{name}.cnf");
        write_file(&dir.join(&file), text)?;
        instances.push(PathBuf::from(file));
    }
    let manifest = RunManifest { instances, ..Default::default() };
    write_file(&manifest_path, &manifest.to_toml()?)?;
    println!("wrote {} instance(s) and {}", files.len(), manifest_path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.cmd {
        Command::Encode(a) => cmd_encode(a).map(|_| true),
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a).map(|_| true),
        Command::Gen(a) => cmd_gen(a).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("rqa-forge: {e:#}");
            ExitCode::from(2)
        }
    }
}
