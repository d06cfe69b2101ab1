use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use agspace::classify::{classify, StructureReport};
use agspace::derived::{
    build_derived, derived_identity, derived_inverse, sample_left_invertive, DerivedAlgebra,
    MATERIALIZE_LIMIT,
};
use agspace::enumerate::{enumerate_models, ModelClass, SearchSpec};
use agspace::identity::{self, holds_all, Identity, Verdict};
use agspace::parallelogram::{
    verify_parallelogram_space, AxiomReport, Par, Parallelogram, WitnessPair,
};
use agspace::{CayleyTable, ElementId};
use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Derived algebras up to this order are classified exhaustively.
const EXHAUSTIVE_DERIVED_ORDER: usize = 64;

#[derive(Parser, Debug)]
#[command(
    name = "agspace",
    version,
    about = "Classify finite groupoids, explore parallelogram spaces and enumerate small models"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
struct Global {
    /// Machine-readable JSON output
    #[arg(long, global = true, conflicts_with = "quiet")]
    json: bool,
    /// Print nothing; only the exit code matters
    #[arg(long, short, global = true)]
    quiet: bool,
    /// Lift the default order bounds
    #[arg(long, global = true)]
    force: bool,
    /// Worker threads
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    threads: Option<u32>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Report where a table sits in the groupoid hierarchy
    Classify { file: PathBuf },
    /// Check identities exhaustively
    Identities {
        file: PathBuf,
        /// Identity source, e.g. "(x*y)*z = (z*y)*x"; repeatable
        #[arg(long = "check", value_name = "SRC", required_unless_present = "preset")]
        check: Vec<String>,
        /// Named preset, or "all"
        #[arg(long, value_name = "NAME")]
        preset: Option<String>,
    },
    /// Parallelogram relation
    #[command(subcommand)]
    Par(ParCommand),
    /// Build the algebra of parallelograms under componentwise product
    Derive {
        file: PathBuf,
        /// Write the derived table here instead of standard output
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Classify the derived algebra
        #[arg(long)]
        classify: bool,
        /// Largest derived order to build
        #[arg(long, default_value_t = MATERIALIZE_LIMIT)]
        max_order: usize,
        /// Sampled triples when the derived algebra is too large to check exhaustively
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Enumerate all models of a class at one order
    Enumerate {
        #[arg(long)]
        order: usize,
        #[arg(long, value_parser = parse_class)]
        class: ModelClass,
        #[arg(long)]
        up_to_iso: bool,
        #[arg(long, conflicts_with = "emit")]
        count_only: bool,
        /// Write each model to DIR/<class>_<order>_<seq>.tbl
        #[arg(long, value_name = "DIR")]
        emit: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum ParCommand {
    /// The unique d with Par(a,b,c,d)
    Fourth {
        file: PathBuf,
        a: ElementId,
        b: ElementId,
        c: ElementId,
    },
    /// Decide Par(a,b,c,d)
    Holds {
        file: PathBuf,
        a: ElementId,
        b: ElementId,
        c: ElementId,
        d: ElementId,
        /// List every witness pair (p, q)
        #[arg(long)]
        witnesses: bool,
    },
    /// Build a parallelogram from one of the standard constructions
    Construct {
        file: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long, num_args = 1.., required = true, allow_negative_numbers = false)]
        args: Vec<ElementId>,
    },
    /// Check the parallelogram-space axioms
    Axioms { file: PathBuf },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Method {
    T3,
    T4,
    T5,
    C2,
}

fn parse_class(s: &str) -> Result<ModelClass, String> {
    s.parse().map_err(|e: agspace::Error| e.to_string())
}

/// What a command concluded, mapped onto the exit code.
enum Outcome {
    True,
    False,
}

struct Out {
    global: Global,
}

impl Out {
    fn text(&self, line: impl AsRef<str>) {
        if !self.global.quiet && !self.global.json {
            raw(&format!("{}\n", line.as_ref()));
        }
    }

    fn json<T: Serialize>(&self, value: &T) -> anyhow::Result<()> {
        if self.global.json {
            raw(&format!("{}\n", serde_json::to_string_pretty(value)?));
        }
        Ok(())
    }
}

/// Writes to standard output; a closed pipe downstream is not an error.
fn raw(text: &str) {
    let mut stdout = std::io::stdout().lock();
    let _ = stdout
        .write_all(text.as_bytes())
        .and_then(|_| stdout.flush());
}

fn load(path: &Path) -> anyhow::Result<CayleyTable> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let table: CayleyTable = text
        .parse()
        .with_context(|| format!("{}", path.display()))?;
    Ok(table)
}

fn verdict_text(v: &Verdict) -> String {
    match (&v.holds, &v.counterexample) {
        (true, _) => "HOLDS".into(),
        (false, Some(ce)) => format!("FAILS {ce}"),
        (false, None) => "FAILS".into(),
    }
}

fn print_report(out: &Out, r: &StructureReport) -> anyhow::Result<()> {
    out.json(r)?;
    out.text(format!("order: {}", r.order));
    match r.left_identity {
        Some(e) => out.text(format!("left_identity: {e}")),
        None => out.text("left_identity: none"),
    }
    for (name, v) in r.flags() {
        let value = match &v.counterexample {
            Some(ce) if !v.holds => format!("false ({ce})"),
            _ => v.holds.to_string(),
        };
        out.text(format!("{name}: {value}"));
    }
    Ok(())
}

#[derive(Serialize)]
struct IdentityLine {
    name: String,
    holds: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    counterexample: Option<agspace::Assignment>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn cmd_identities(
    out: &Out,
    file: &Path,
    check: &[String],
    preset: Option<&str>,
) -> anyhow::Result<Outcome> {
    let table = load(file)?;
    let mut jobs: Vec<(String, Vec<Identity>)> = Vec::new();
    for src in check {
        jobs.push((src.clone(), vec![Identity::parse(src)?]));
    }
    match preset {
        Some("all") => jobs.extend(
            identity::preset_catalog()
                .into_iter()
                .map(|p| (p.name.to_string(), p.identities)),
        ),
        Some(name) => {
            let p = identity::preset(name)?;
            jobs.push((p.name.to_string(), p.identities));
        }
        None => {}
    }
    let mut lines = Vec::new();
    for (name, ids) in jobs {
        let line = match holds_all(&table, &ids) {
            Ok(v) => {
                out.text(format!("{name} {}", verdict_text(&v)));
                IdentityLine {
                    name,
                    holds: Some(v.holds),
                    counterexample: v.counterexample,
                    error: None,
                }
            }
            Err(e) => {
                out.text(format!("{name} ERROR {e}"));
                IdentityLine {
                    name,
                    holds: None,
                    counterexample: None,
                    error: Some(e.to_string()),
                }
            }
        };
        lines.push(line);
    }
    out.json(&lines)?;
    if let Some(bad) = lines.iter().find(|l| l.error.is_some()) {
        bail!("{}: {}", bad.name, bad.error.as_deref().unwrap_or_default());
    }
    Ok(if lines.iter().all(|l| l.holds == Some(true)) {
        Outcome::True
    } else {
        Outcome::False
    })
}

#[derive(Serialize)]
struct HoldsReport {
    quadruple: [ElementId; 4],
    holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    fourth_vertex: Option<ElementId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witnesses: Option<Vec<WitnessPair>>,
}

#[derive(Serialize)]
struct ConstructReport {
    parallelogram: Parallelogram,
    #[serde(skip_serializing_if = "Option::is_none")]
    non_trivial: Option<bool>,
}

fn cmd_par(out: &Out, cmd: &ParCommand) -> anyhow::Result<Outcome> {
    match cmd {
        ParCommand::Fourth { file, a, b, c } => {
            let table = load(file)?;
            let par = Par::new(&table)?;
            let d = par.fourth_vertex(*a, *b, *c)?;
            out.json(&serde_json::json!({ "a": a, "b": b, "c": c, "d": d }))?;
            out.text(d.to_string());
            Ok(Outcome::True)
        }
        ParCommand::Holds {
            file,
            a,
            b,
            c,
            d,
            witnesses,
        } => {
            let table = load(file)?;
            let par = Par::new(&table)?;
            let holds = par.holds(*a, *b, *c, *d)?;
            let fourth = par.fourth_vertex(*a, *b, *c).ok();
            let pairs = if *witnesses && holds {
                Some(par.witnesses(*a, *b, *c, *d)?)
            } else {
                None
            };
            out.json(&HoldsReport {
                quadruple: [*a, *b, *c, *d],
                holds,
                fourth_vertex: fourth,
                witnesses: pairs.clone(),
            })?;
            if holds {
                out.text("HOLDS");
                for w in pairs.iter().flatten() {
                    out.text(format!("q={} p={}", w.q, w.p));
                }
                Ok(Outcome::True)
            } else {
                match fourth {
                    Some(v) => out.text(format!("FAILS (fourth vertex is {v})")),
                    None => out.text("FAILS"),
                }
                Ok(Outcome::False)
            }
        }
        ParCommand::Construct { file, method, args } => {
            let table = load(file)?;
            let par = Par::new(&table)?;
            let want = match method {
                Method::T3 => 3,
                Method::T4 | Method::T5 => 2,
                Method::C2 => 1,
            };
            if args.len() != want {
                bail!(
                    "--method {method:?} takes {want} arguments, got {}",
                    args.len()
                );
            }
            let (p, non_trivial) = match method {
                Method::T3 => (par.construct_t3(args[0], args[1], args[2])?, None),
                Method::T4 => (par.construct_t4(args[0], args[1])?, None),
                Method::T5 => (par.construct_t5(args[0], args[1])?, None),
                Method::C2 => {
                    let (p, flag) = par.construct_c2(args[0])?;
                    (p, Some(flag))
                }
            };
            out.json(&ConstructReport {
                parallelogram: p,
                non_trivial,
            })?;
            out.text(if p.valid {
                p.to_string()
            } else {
                format!("{p} (not a parallelogram)")
            });
            if let Some(flag) = non_trivial {
                out.text(format!("non-trivial: {flag}"));
            }
            Ok(if p.valid {
                Outcome::True
            } else {
                Outcome::False
            })
        }
        ParCommand::Axioms { file } => {
            let table = load(file)?;
            let report: AxiomReport = verify_parallelogram_space(&table, out.global.force)?;
            out.json(&report)?;
            for (name, v) in report.axioms() {
                match &v.counterexample {
                    Some(ce) if !v.holds => {
                        let ce: Vec<String> = ce.iter().map(ToString::to_string).collect();
                        out.text(format!("{name} FAILS {}", ce.join(",")));
                    }
                    _ if !v.holds => out.text(format!("{name} FAILS")),
                    _ => out.text(format!("{name} HOLDS")),
                }
            }
            Ok(if report.all_hold() {
                Outcome::True
            } else {
                Outcome::False
            })
        }
    }
}

#[derive(Serialize)]
struct SampledReport {
    order: usize,
    identity: Option<ElementId>,
    inverses: bool,
    left_invertive_samples: usize,
    left_invertive_counterexample: Option<[ElementId; 3]>,
}

/// Identity and inverses exhaustively, the left invertive law by sampling.
fn sampled_check(
    derived: &DerivedAlgebra,
    samples: usize,
    seed: u64,
) -> anyhow::Result<SampledReport> {
    let identity = derived_identity(derived).ok();
    let inverses =
        identity.is_some() && (0..derived.order()).all(|i| derived_inverse(derived, i).is_ok());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counterexample = sample_left_invertive(derived, samples, &mut rng)?;
    Ok(SampledReport {
        order: derived.order(),
        identity,
        inverses,
        left_invertive_samples: samples,
        left_invertive_counterexample: counterexample,
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_derive(
    out: &Out,
    file: &Path,
    output: Option<&Path>,
    want_classify: bool,
    max_order: usize,
    samples: usize,
    seed: u64,
) -> anyhow::Result<Outcome> {
    let base = load(file)?;
    let derived = build_derived(&base, max_order)?;
    match output {
        Some(path) => {
            fs::write(path, derived.to_text()?)
                .with_context(|| format!("cannot write {}", path.display()))?;
        }
        None if !want_classify => {
            if !out.global.quiet {
                raw(&derived.to_text()?);
            }
            return Ok(Outcome::True);
        }
        None => {}
    }
    if !want_classify {
        out.text(format!("derived order {}", derived.order()));
        return Ok(Outcome::True);
    }
    let exhaustive = derived.order() <= EXHAUSTIVE_DERIVED_ORDER || out.global.force;
    match derived.table() {
        Some(table) if exhaustive => {
            let report = classify(table);
            print_report(out, &report)?;
            Ok(
                if report.is_ag_group.holds || report.is_quasigroup.holds && report.is_medial.holds
                {
                    Outcome::True
                } else {
                    Outcome::False
                },
            )
        }
        _ => {
            let r = sampled_check(&derived, samples, seed)?;
            out.json(&r)?;
            out.text(format!("order: {}", r.order));
            match r.identity {
                Some(e) => out.text(format!("left_identity: {e}")),
                None => out.text("left_identity: none"),
            }
            out.text(format!("has_inverses: {}", r.inverses));
            match r.left_invertive_counterexample {
                None => out.text(format!(
                    "is_left_invertive: true ({} sampled triples)",
                    r.left_invertive_samples
                )),
                Some([x, y, z]) => {
                    out.text(format!("is_left_invertive: false (x={x},y={y},z={z})"))
                }
            }
            let ok =
                r.identity.is_some() && r.inverses && r.left_invertive_counterexample.is_none();
            Ok(if ok { Outcome::True } else { Outcome::False })
        }
    }
}

fn cmd_enumerate(
    out: &Out,
    order: usize,
    class: ModelClass,
    up_to_iso: bool,
    count_only: bool,
    emit: Option<&Path>,
) -> anyhow::Result<Outcome> {
    let spec = SearchSpec::new(order, class)
        .up_to_iso(up_to_iso)
        .count_only(count_only)
        .force(out.global.force);
    let result = enumerate_models(&spec)?;
    if let Some(dir) = emit {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        for (seq, model) in result.models.iter().enumerate() {
            let path = dir.join(format!("{class}_{order}_{seq}.tbl"));
            fs::write(&path, model.to_text())
                .with_context(|| format!("cannot write {}", path.display()))?;
        }
    }
    let models: Vec<Vec<u32>> = result.models.iter().map(|m| m.entries().to_vec()).collect();
    out.json(&serde_json::json!({
        "class": class.name(),
        "order": order,
        "up_to_iso": up_to_iso,
        "count": result.count,
        "models": if count_only { None } else { Some(models) },
    }))?;
    out.text(result.count.to_string());
    if emit.is_none() && !count_only {
        for m in &result.models {
            out.text("");
            out.text(m.to_text().trim_end());
        }
    }
    Ok(Outcome::True)
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    if let Some(n) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build_global()?;
    }
    let out = Out { global: cli.global };
    match &cli.command {
        Command::Classify { file } => {
            let report = classify(&load(file)?);
            print_report(&out, &report)?;
            Ok(Outcome::True)
        }
        Command::Identities {
            file,
            check,
            preset,
        } => cmd_identities(&out, file, check, preset.as_deref()),
        Command::Par(cmd) => cmd_par(&out, cmd),
        Command::Derive {
            file,
            output,
            classify,
            max_order,
            samples,
            seed,
        } => cmd_derive(
            &out,
            file,
            output.as_deref(),
            *classify,
            *max_order,
            *samples,
            *seed,
        ),
        Command::Enumerate {
            order,
            class,
            up_to_iso,
            count_only,
            emit,
        } => cmd_enumerate(
            &out,
            *order,
            *class,
            *up_to_iso,
            *count_only,
            emit.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::True) => ExitCode::SUCCESS,
        Ok(Outcome::False) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
