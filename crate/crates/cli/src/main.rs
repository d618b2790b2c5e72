use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use fyoung::dsl::{self, ParseContext};
use fyoung::identities::{moment_phi_n_oracle, moment_table};
use fyoung::substitution::{pullback_integral, DEFAULT_CHECK_DEPTH};
use fyoung::{verify, ConvergenceConfig, HolderData, Ifs, IfsSpec, IntegralResult, KFunction, Permutation, Scalar, Status};

/// Enumeration cap override, in words per level.
const MAX_WORDS_VAR: &str = "FY_MAX_WORDS";

#[derive(Parser, Debug)]
#[command(name = "fyoung", version, about = "Young-type integrals on self-similar sets")]
struct Cli {
    /// Worker threads for level sums (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(clap::Args, Debug)]
struct Convergence {
    /// Maximum level to compute.
    #[arg(long)]
    depth: Option<usize>,
    /// Convergence tolerance, as a decimal or p/q.
    #[arg(long)]
    tol: Option<String>,
    /// Consecutive levels required by the stopping rules.
    #[arg(long)]
    consecutive: Option<usize>,
    /// Run in f64 instead of exact rationals.
    #[arg(long)]
    float: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute φ_n(f, g) level by level and classify the sequence.
    Integrate {
        #[arg(long)]
        ifs: PathBuf,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        #[command(flatten)]
        conv: Convergence,
        /// Hölder data for f as "alpha,seminorm,sup_norm"; enables tail bounds.
        #[arg(long, requires = "holder_g")]
        holder_f: Option<String>,
        #[arg(long, requires = "holder_f")]
        holder_g: Option<String>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Moments φ(x^m, c) on the middle-third Cantor set.
    Moments {
        #[arg(long, default_value_t = 6)]
        max_m: u32,
        /// Level at which the boundary-sum oracle is evaluated.
        #[arg(long, default_value_t = 8)]
        oracle_depth: usize,
    },
    /// Similarity dimension of an IFS.
    Dimension {
        #[arg(long)]
        ifs: PathBuf,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Integrate over both sides of a digit-permutation substitution.
    Substitute {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// Digit permutation, e.g. "0,2,1".
        #[arg(long)]
        rho: String,
        /// Function on the target set.
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        #[arg(long, default_value_t = DEFAULT_CHECK_DEPTH)]
        check_depth: usize,
        #[command(flatten)]
        conv: Convergence,
    },
    /// Run the built-in checks.
    Verify,
    /// Integrability of (c_{k,p}, c_{k,q}) over a (p, q) grid.
    Sweep {
        #[arg(long, default_value_t = 1)]
        k: u32,
        /// p and q range over i/(grid+1) for i = 1..=grid.
        #[arg(long, default_value_t = 4)]
        grid: u32,
        #[command(flatten)]
        conv: Convergence,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building the thread pool")
            .and_then(|pool| pool.install(|| run(cli.command))),
        None => run(cli.command),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> anyhow::Result<u8> {
    match command {
        Command::Integrate { ifs, f, g, conv, holder_f, holder_g, format, output } => {
            cmd_integrate(&ifs, &f, &g, &conv, holder_f.zip(holder_g), format, output.as_deref())
        }
        Command::Moments { max_m, oracle_depth } => cmd_moments(max_m, oracle_depth),
        Command::Dimension { ifs, tol } => {
            println!("{}", load_ifs(&ifs)?.similarity_dimension(tol));
            Ok(0)
        }
        Command::Substitute { source, target, rho, f, g, check_depth, conv } => {
            cmd_substitute(&source, &target, &rho, &f, &g, check_depth, &conv)
        }
        Command::Verify => {
            let report = verify::run_all();
            print!("{}", report.render());
            Ok(if report.all_passed() { 0 } else { 1 })
        }
        Command::Sweep { k, grid, conv } => cmd_sweep(k, grid, &conv),
    }
}

fn word_cap() -> anyhow::Result<Option<u64>> {
    match std::env::var(MAX_WORDS_VAR) {
        Ok(v) => Ok(Some(v.trim().parse().with_context(|| format!("{MAX_WORDS_VAR}={v:?} is not a word count"))?)),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => bail!("{MAX_WORDS_VAR}: {e}"),
    }
}

fn with_cap(ifs: Ifs) -> anyhow::Result<Ifs> {
    Ok(match word_cap()? {
        Some(cap) => ifs.with_word_cap(cap),
        None => ifs,
    })
}

fn load_ifs(path: &Path) -> anyhow::Result<Ifs> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let ifs = IfsSpec::parse_json(&text)
        .and_then(|s| s.build())
        .with_context(|| format!("loading IFS from {}", path.display()))?;
    with_cap(ifs)
}

fn parse_fn(text: &str, ctx: &ParseContext) -> anyhow::Result<KFunction> {
    dsl::parse_with(text, ctx).with_context(|| format!("parsing {text:?}"))
}

fn parse_holder(text: &str) -> anyhow::Result<HolderData> {
    let parts: Vec<&str> = text.split(',').collect();
    let [alpha, semi, sup] = parts[..] else {
        bail!("Hölder data {text:?} must be \"alpha,seminorm,sup_norm\"");
    };
    Ok(HolderData::new(Scalar::parse(alpha)?, Scalar::parse(semi)?, Scalar::parse(sup)?)?)
}

impl Convergence {
    fn config(&self, ifs: &Ifs) -> anyhow::Result<ConvergenceConfig> {
        let mut cfg = ConvergenceConfig::for_ifs(ifs);
        if let Some(d) = self.depth {
            cfg = cfg.with_max_depth(d);
        }
        if let Some(t) = &self.tol {
            cfg.tol = Scalar::parse(t).with_context(|| format!("parsing tolerance {t:?}"))?;
        }
        if let Some(c) = self.consecutive {
            cfg.consecutive = c;
        }
        if self.float {
            cfg.tol = cfg.tol.to_float();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn status_code(status: Status) -> u8 {
    match status {
        Status::Converged => 0,
        Status::Diverged => 2,
        Status::BudgetExhausted => 3,
    }
}

fn summary(r: &IntegralResult) -> String {
    let mut line = format!("status={}", r.status);
    if let Some(e) = &r.estimate {
        line += &format!(" estimate={e}");
    }
    if let Some(g) = &r.growth_ratio {
        line += &format!(" growth_ratio={g}");
    }
    line
}

fn emit(text: &str, output: Option<&Path>) -> anyhow::Result<()> {
    match output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => Ok(io::stdout().lock().write_all(text.as_bytes())?),
    }
}

fn cmd_integrate(
    ifs_path: &Path,
    f: &str,
    g: &str,
    conv: &Convergence,
    holder: Option<(String, String)>,
    format: Format,
    output: Option<&Path>,
) -> anyhow::Result<u8> {
    let mut ifs = load_ifs(ifs_path)?;
    let ctx = ParseContext::default();
    let (mut f, mut g) = (parse_fn(f, &ctx)?, parse_fn(g, &ctx)?);
    if conv.float {
        ifs = ifs.to_float();
        f = f.to_float();
        g = g.to_float();
    }
    let mut cfg = conv.config(&ifs)?;
    if let Some((hf, hg)) = holder {
        cfg = cfg.with_holder(parse_holder(&hf)?, parse_holder(&hg)?);
    }
    let r = fyoung::integrate(&ifs, &f, &g, &cfg)?;
    let text = match format {
        Format::Csv => format!("{}# {}\n", r.to_csv(), summary(&r)),
        Format::Json => serde_json::to_string_pretty(&r)? + "\n",
    };
    emit(&text, output)?;
    Ok(status_code(r.status))
}

fn cmd_moments(max_m: u32, oracle_depth: usize) -> anyhow::Result<u8> {
    let table = moment_table(max_m)?;
    let mut out = String::from("m\tphi\tdecimal\toracle\n");
    for (m, v) in table.values.iter().enumerate() {
        let oracle = moment_phi_n_oracle(m as u32, oracle_depth)?;
        out += &format!("{m}\t{v}\t{}\t{}\n", v.decimal(12), oracle.decimal(12));
    }
    emit(&out, None)?;
    Ok(0)
}

fn cmd_substitute(
    source: &Path,
    target: &Path,
    rho: &str,
    f: &str,
    g: &str,
    check_depth: usize,
    conv: &Convergence,
) -> anyhow::Result<u8> {
    let (mut source, mut target) = (load_ifs(source)?, load_ifs(target)?);
    let ctx = ParseContext { source: Some(source.clone()), target: Some(target.clone()), check_depth: Some(check_depth) };
    let (mut f, mut g) = (parse_fn(f, &ctx)?, parse_fn(g, &ctx)?);
    if conv.float {
        source = source.to_float();
        target = target.to_float();
        f = f.to_float();
        g = g.to_float();
    }
    let rho = Permutation::parse(rho)?;
    let map = fyoung::SubstitutionMap::new(source, target, rho, check_depth)?;
    if !map.is_well_defined() {
        println!("verdict\t{}", map.verdict());
        bail!("the substitution is not well defined");
    }
    let map = Arc::new(map);
    let mut cfg = conv.config(map.source())?;
    let target_cfg = conv.config(map.target())?;
    cfg.max_depth = cfg.max_depth.min(target_cfg.max_depth);
    let r = pullback_integral(&map, &f, &g, &cfg)?;
    let mut out = String::new();
    out += &format!("phi1\t{}\n", summary(&r.source));
    out += &format!("phi2\t{}\n", summary(&r.target));
    out += &format!("sign_class\t{}\n", r.sign_class);
    out += &format!("verdict\t{}\n", map.verdict());
    if let Some(holds) = r.level_identity {
        out += &format!("level_identity\t{}\n", if holds { "holds" } else { "fails" });
    }
    emit(&out, None)?;
    Ok(status_code(r.source.status).max(status_code(r.target.status)))
}

/// Region of the (p, q) plane for the pair `(c_{k,p}, c_{k,q})`.
fn region(k: u32, p: &Scalar, q: &Scalar) -> &'static str {
    let edge = Scalar::ratio(1, k as i64 + 1);
    if *q <= edge {
        "integrable"
    } else if p * q >= edge {
        "(i)"
    } else {
        "(ii)"
    }
}

fn cmd_sweep(k: u32, grid: u32, conv: &Convergence) -> anyhow::Result<u8> {
    if grid == 0 {
        bail!("--grid must be positive");
    }
    let mut ifs = with_cap(Ifs::cantor(k))?;
    if conv.float {
        ifs = ifs.to_float();
    }
    let cfg = conv.config(&ifs)?;
    let values: Vec<Scalar> = (1..=grid).map(|i| Scalar::ratio(i as i64, grid as i64 + 1)).collect();
    let mut out = String::from("k\tp\tq\tregion\tstatus\testimate\n");
    for p in &values {
        for q in &values {
            let f = KFunction::cantor(k, p.clone())?;
            let g = KFunction::cantor(k, q.clone())?;
            let (f, g) = if conv.float { (f.to_float(), g.to_float()) } else { (f, g) };
            let r = fyoung::integrate(&ifs, &f, &g, &cfg)?;
            let est = r.estimate.as_ref().map(Scalar::render).unwrap_or_default();
            out += &format!("{k}\t{p}\t{q}\t{}\t{}\t{est}\n", region(k, p, q), r.status);
        }
    }
    emit(&out, None)?;
    Ok(0)
}
