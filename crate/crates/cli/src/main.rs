use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use digraph_order::extension;
use digraph_order::report::{group_summary, run_report};
use digraph_order::store::{cmd_build, load_store};
use digraph_order::theorem::verify_theorem;
use digraph_order::{CanonicalCode, Error, PosetStore};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(
    name = "digraph-order",
    version,
    about = "Substructure order of finite digraphs"
)]
struct Cli {
    /// Store directory written by `build`. Without it, the needed levels are built in memory.
    #[arg(long, global = true)]
    store: Option<PathBuf>,

    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Worker threads for parallel stages.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build levels 1..=N and write them with a manifest.
    Build {
        #[arg(long, default_value_t = 4)]
        max_level: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Number of digraphs on each level.
    Counts { dir: Option<PathBuf> },
    /// Cover graph of the lower levels.
    Hasse {
        dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Dot)]
        format: Format,
        #[arg(long, default_value_t = 3)]
        max_level: usize,
    },
    /// Lower and upper covers of one digraph given as `n:code`.
    Covers {
        /// Either a store directory followed by a token, or just a token.
        #[arg(num_args = 1..=2, required = true)]
        args: Vec<String>,
    },
    /// Enumerate automorphisms of the order restricted to levels 1..=N.
    Aut {
        dir: Option<PathBuf>,
        #[arg(long)]
        levels: usize,
    },
    /// The group generated by the local rules.
    Group { dir: Option<PathBuf> },
    /// Which automorphisms of D_from extend one level up, and in how many ways.
    Extend {
        dir: Option<PathBuf>,
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
    },
    /// Check that every automorphism fixing levels 1 to 3 is one of the 768 local ones.
    VerifyTheorem { dir: Option<PathBuf> },
    /// Run every check and exit nonzero if any fails.
    Report { dir: Option<PathBuf> },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Dot,
}

struct Ctx {
    store_flag: Option<PathBuf>,
    json: bool,
}

impl Ctx {
    /// Loads the store from an explicit directory or `--store`, or builds
    /// levels `1..=need` in memory when neither is given.
    fn store(&self, dir: Option<&Path>, need: usize) -> Result<PosetStore> {
        match dir.or(self.store_flag.as_deref()) {
            Some(d) => {
                let store =
                    load_store(d).with_context(|| format!("loading store from {}", d.display()))?;
                if store.max_level() < need {
                    bail!(
                        "store at {} holds {} levels but {need} are needed; run `build --max-level {need}`",
                        d.display(),
                        store.max_level()
                    );
                }
                Ok(store)
            }
            None => Ok(PosetStore::build(need)?),
        }
    }

    fn emit(&self, value: serde_json::Value, text: impl FnOnce() -> String) -> Result<()> {
        let mut out = std::io::stdout().lock();
        if self.json {
            serde_json::to_writer_pretty(&mut out, &value)?;
            writeln!(out)?;
        } else {
            write!(out, "{}", text())?;
        }
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let ctx = Ctx {
        store_flag: cli.store,
        json: cli.json,
    };

    match cli.command {
        Command::Build { max_level, out } => {
            let dir = out
                .or_else(|| ctx.store_flag.clone())
                .context("build needs --out DIR or --store DIR")?;
            let manifest = cmd_build(max_level, &dir)?;
            ctx.emit(serde_json::to_value(&manifest)?, || {
                let mut s = String::new();
                for l in &manifest.levels {
                    s.push_str(&format!(
                        "level {}: {} digraphs ({}, sha256 {})\n",
                        l.n, l.count, l.file, l.sha256
                    ));
                }
                s.push_str(&format!(
                    "total: {}\nstore: {}\n",
                    manifest.total,
                    dir.display()
                ));
                s
            })?;
        }

        Command::Counts { dir } => {
            let store = ctx.store(dir.as_deref(), 4)?;
            let counts = store.counts();
            let levels: serde_json::Map<_, _> = counts
                .iter()
                .enumerate()
                .map(|(i, c)| ((i + 1).to_string(), json!(c)))
                .collect();
            ctx.emit(json!({ "levels": levels, "total": store.total() }), || {
                let mut s = String::new();
                for (i, c) in counts.iter().enumerate() {
                    s.push_str(&format!("level {}: {c}\n", i + 1));
                }
                s.push_str(&format!("total: {}\n", store.total()));
                s
            })?;
        }

        Command::Hasse {
            dir,
            format,
            max_level,
        } => {
            let store = ctx.store(dir.as_deref(), max_level)?;
            let Format::Dot = format;
            let mut s = String::from("digraph hasse {\n  rankdir=BT;\n  node [shape=box];\n");
            for n in 1..=max_level {
                s.push_str(&format!("  subgraph level{n} {{ rank=same;"));
                for c in store.codes(n) {
                    s.push_str(&format!(" \"{c}\";"));
                }
                s.push_str(" }\n");
            }
            for n in 2..=max_level {
                for c in store.codes(n) {
                    for low in store.lower_covers(c)? {
                        s.push_str(&format!("  \"{low}\" -> \"{c}\";\n"));
                    }
                }
            }
            s.push_str("}\n");
            print!("{s}");
        }

        Command::Covers { args } => {
            let (dir, token) = match args.as_slice() {
                [token] => (None, token),
                [dir, token] => (Some(PathBuf::from(dir)), token),
                _ => unreachable!("clap enforces one or two arguments"),
            };
            let code: CanonicalCode = token.parse()?;
            let n = code.n();
            let store = ctx.store(dir.as_deref(), n)?;
            if !store.contains(&code) {
                bail!(Error::UnknownDigraph(token.clone()));
            }
            let lower = store.lower_covers(&code)?;
            let upper = if n < store.max_level() {
                Some(store.upper_covers(&code)?)
            } else if dir.is_none()
                && ctx.store_flag.is_none()
                && n < digraph_order::digraph::MAX_VERTICES
            {
                let bigger = PosetStore::build(n + 1)?;
                Some(bigger.upper_covers(&code)?)
            } else {
                None
            };
            let names = |v: &[CanonicalCode]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>();
            ctx.emit(
                json!({
                    "digraph": code.to_string(),
                    "lower": names(&lower),
                    "upper": upper.as_deref().map(names),
                }),
                || {
                    let mut s = format!(
                        "{code}\nlower covers ({}): {}\n",
                        lower.len(),
                        names(&lower).join(" ")
                    );
                    match &upper {
                        Some(u) => s.push_str(&format!(
                            "upper covers ({}): {}\n",
                            u.len(),
                            names(u).join(" ")
                        )),
                        None => s.push_str("upper covers: level not stored\n"),
                    }
                    s
                },
            )?;
        }

        Command::Aut { dir, levels } => {
            let store = ctx.store(dir.as_deref(), levels.min(3))?;
            match extension::enumerate_aut(&store, levels) {
                Ok(maps) => {
                    ctx.emit(json!({ "levels": levels, "order": maps.len() }), || {
                        format!("|Aut D{levels}| = {}\n", maps.len())
                    })?;
                }
                Err(Error::TooLarge { n, estimate }) => {
                    eprintln!("refusing to enumerate Aut D{n}: about {estimate} elements");
                    return Ok(ExitCode::from(3));
                }
                Err(e) => return Err(e.into()),
            }
        }

        Command::Group { dir } => {
            let store = ctx.store(dir.as_deref(), 4)?;
            let (_, _, summary) = group_summary(&store)?;
            ctx.emit(serde_json::to_value(&summary)?, || {
                let mut s = format!("order: {}\n", summary.order);
                for (n, r) in &summary.restrictions {
                    s.push_str(&format!("distinct restrictions to D{n}: {r}\n"));
                }
                for r in &summary.relations {
                    s.push_str(&format!(
                        "[{}] {}\n",
                        if r.holds { "ok" } else { "FAIL" },
                        r.name
                    ));
                }
                s
            })?;
        }

        Command::Extend { dir, from, to } => {
            if to != from + 1 {
                bail!("--to must be --from plus one");
            }
            let store = ctx.store(dir.as_deref(), to)?;
            let summary = extension::summarize(&store, from)?;
            ctx.emit(serde_json::to_value(&summary)?, || {
                format!(
                    "automorphisms of D{from}: {}\nextendible to D{to}: {} (subgroup: {})\nextensions per automorphism: {} = {}\n|Aut D{to}| = {} ({})\n",
                    summary.candidates,
                    summary.extendible,
                    summary.extendible_is_subgroup,
                    summary
                        .factor_formula
                        .iter()
                        .map(|(k, m)| format!("{k}!^{m}"))
                        .collect::<Vec<_>>()
                        .join(" * "),
                    summary.factor,
                    summary.aut_upper_level_order,
                    summary.aut_upper_level_order_approx,
                )
            })?;
        }

        Command::VerifyTheorem { dir } => {
            let store = ctx.store(dir.as_deref(), 4)?;
            let (gens, group, _) = group_summary(&store)?;
            let cert = verify_theorem(&store, &gens, &group)?;
            ctx.emit(serde_json::to_value(&cert)?, || {
                let mut s = cert.transcript.join("\n");
                s.push_str(&format!(
                    "\nverdict: {}\n",
                    if cert.valid { "valid" } else { "INVALID" }
                ));
                s
            })?;
            if !cert.valid {
                return Ok(ExitCode::FAILURE);
            }
        }

        Command::Report { dir } => {
            let store = ctx.store(dir.as_deref(), 4)?;
            let report = run_report(&store)?;
            ctx.emit(serde_json::to_value(&report)?, || report.transcript())?;
            if !report.all_pass {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
