use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;

use polysphere::chirotope::{
    bfp_search, bfp_verify, complete_search, default_seed, diagram_partial_chirotope, diagram_search_root,
    prove_nonpolytopal, random_descent, BfpCertificate, BfpOutcome, PartialChirotope, ProofCertificate, SearchConfig,
    Sign, Verdict,
};
use polysphere::complex::{canonical_labeling, FaceLattice, FacetList, PVector};
use polysphere::enumerate::{classify, resume, ClassifyError, ClassifyOptions, Frontier};
use polysphere::geomcert::{embeddability_report, verify_diagram, verify_fan, PointConfiguration};
use polysphere::replay::{replay, ReplayError};

/// Enumeration and realizability certificates for 2-simple 2-simplicial
/// 3-spheres.
#[derive(Parser)]
#[command(name = "polysphere", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Face lattice checks and flag vector of a facet list.
    Check { file: PathBuf },
    /// Classify 2s2s spheres with n vertices.
    Enumerate(EnumerateArgs),
    /// Rank-5 propagation from one seed; expects a contradiction.
    ProveNonpolytopal {
        file: PathBuf,
        /// Seed tuple, comma separated, e.g. 7,8,10,2,9.
        #[arg(long, value_parser = parse_tuple)]
        seed: Option<Tuple>,
        /// Seed sign.
        #[arg(long, default_value = "+", value_parser = parse_sign, allow_hyphen_values = true)]
        sign: Sign,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Recheck a proof certificate step by step.
    Replay {
        certificate: PathBuf,
        /// Facet list for facet and ridge rules.
        #[arg(long)]
        facets: Option<PathBuf>,
        /// Chirotope the GIVEN steps refer to.
        #[arg(long)]
        given: Option<PathBuf>,
    },
    /// Forced partial chirotope of a diagram.
    DiagramChirotope {
        file: PathBuf,
        #[arg(long, value_parser = parse_facet)]
        base: usize,
        /// Write the proof certificate here.
        #[arg(long)]
        certificate: Option<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Refute a diagram by search and final polynomials.
    DiagramRefute(RefuteArgs),
    /// Biquadratic final polynomials.
    #[command(subcommand)]
    Bfp(BfpCommand),
    /// Check diagram coordinates against a sphere.
    VerifyDiagram {
        coords: PathBuf,
        facets: PathBuf,
        #[arg(long, value_parser = parse_facet)]
        base: usize,
    },
    /// Check fan ray generators against a sphere.
    VerifyFan { coords: PathBuf, facets: PathBuf },
    /// Simple vertices and tetrahedral facets.
    EmbedReport { file: PathBuf },
    /// Dual sphere, written on the facets of the input.
    Dual { file: PathBuf },
    /// Canonical labeling.
    Canon { file: PathBuf },
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long)]
    n: Option<usize>,
    /// Restrict to one edge count.
    #[arg(long)]
    m: Option<usize>,
    /// Restrict to one p-vector, as p4,p5,...
    #[arg(long, value_parser = parse_tuple)]
    p: Option<Tuple>,
    #[arg(long, env = "POLYSPHERE_JOBS", value_parser = clap::value_parser!(u32).range(1..))]
    jobs: Option<u32>,
    /// Wall-clock budget in seconds.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    budget: Option<u64>,
    /// Continue from a saved frontier.
    #[arg(long, conflicts_with_all = ["n", "m", "p"])]
    resume: Option<PathBuf>,
    /// Where to save the frontier when the budget runs out.
    #[arg(long, default_value = "polysphere.frontier")]
    frontier: PathBuf,
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Allow runs with 11 or more vertices.
    #[arg(long)]
    long_running: bool,
}

#[derive(Args)]
struct RefuteArgs {
    file: PathBuf,
    #[arg(long, value_parser = parse_facet)]
    base: usize,
    /// Nodes with this many determined signs go to the final polynomial
    /// search.
    #[arg(long, default_value_t = 435)]
    floor: usize,
    /// Number of frontier nodes reached by random descents.
    #[arg(long, default_value_t = 61, conflicts_with = "full")]
    sample: usize,
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    /// Explore the whole search tree.
    #[arg(long, requires = "long_running")]
    full: bool,
    #[arg(long)]
    long_running: bool,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    budget: Option<u64>,
}

#[derive(Subcommand)]
enum BfpCommand {
    /// Look for a final polynomial of a partial chirotope.
    Search {
        chirotope: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Check a final polynomial certificate.
    Verify { chirotope: PathBuf, certificate: PathBuf },
}

/// Comma separated integers.
#[derive(Clone, Debug)]
struct Tuple(Vec<usize>);

fn parse_tuple(s: &str) -> Result<Tuple, String> {
    s.split(',').map(|x| x.trim().parse::<usize>().map_err(|e| format!("`{x}`: {e}"))).collect::<Result<_, _>>().map(Tuple)
}

fn parse_sign(s: &str) -> Result<Sign, String> {
    match s {
        "+" | "+1" | "1" => Ok(Sign::Pos),
        "-" | "-1" => Ok(Sign::Neg),
        _ => Err(format!("expected + or -, got `{s}`")),
    }
}

/// Facets are named `F1`, `F2`, ... as in reports.
fn parse_facet(s: &str) -> Result<usize, String> {
    let k: usize = s.trim_start_matches(['F', 'f']).parse().map_err(|_| format!("expected F<k>, got `{s}`"))?;
    k.checked_sub(1).ok_or_else(|| "facets are numbered from F1".to_string())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn facet_list(path: &Path) -> Result<FacetList> {
    FacetList::parse(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn chirotope(path: &Path) -> Result<PartialChirotope> {
    PartialChirotope::parse(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn check_base(fl: &FacetList, base: usize) -> Result<()> {
    if base >= fl.len() {
        bail!("F{} does not exist; the sphere has {} facets", base + 1, fl.len());
    }
    Ok(())
}

fn usage(msg: &str) -> Result<ExitCode> {
    eprintln!("error: {msg}");
    Ok(ExitCode::from(2))
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn verdict_key(v: &Verdict) -> &'static str {
    match v {
        Verdict::Contradiction(_) => "contradiction",
        Verdict::Completed => "completed",
        Verdict::Exhausted => "exhausted",
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Check { file } => {
            let fl = facet_list(&file)?;
            let lattice = match FaceLattice::new(&fl) {
                Ok(l) => l,
                Err(e) => {
                    println!("lattice: {e}");
                    println!("RESULT: lattice=invalid");
                    return Ok(ExitCode::from(1));
                }
            };
            let fv = lattice.flag_vector();
            let s2 = lattice.is_2simple() && lattice.is_2simplicial();
            let euler = lattice.is_eulerian();
            let p: Vec<String> = fl.p_vector().from_four().iter().map(|x| x.to_string()).collect();
            println!("flag vector: {fv}");
            println!("p-vector: ({})", p.join(","));
            println!("2-simple: {}", yes(lattice.is_2simple()));
            println!("2-simplicial: {}", yes(lattice.is_2simplicial()));
            println!("Eulerian: {}", yes(euler));
            if let Some(v) = lattice.euler_violation() {
                println!("violation: {v:?}");
            }
            println!("RESULT: flag={fv} 2s2s={} eulerian={}", yes(s2), yes(euler));
            Ok(if s2 && euler { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Enumerate(args) => enumerate(args),
        Command::ProveNonpolytopal { file, seed, sign, out } => {
            let fl = facet_list(&file)?;
            let seed = match seed {
                Some(s) => s.0,
                None => default_seed(&fl).context("no facet has a vertex outside it")?,
            };
            if seed.len() != 5 || seed.iter().any(|&v| v >= fl.n_vertices()) {
                bail!("seed must be five vertices below {}", fl.n_vertices());
            }
            let cert = prove_nonpolytopal(&fl, &seed, sign);
            emit(out.as_deref(), &cert.to_text())?;
            let ok = cert.is_contradiction();
            println!(
                "RESULT: verdict={} steps={} justified={}",
                verdict_key(&cert.verdict),
                cert.steps.len(),
                yes(cert.justification.is_some())
            );
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Replay { certificate, facets, given } => {
            let text = read(&certificate)?;
            let cert = ProofCertificate::parse(&text).with_context(|| format!("parsing {}", certificate.display()))?;
            let fl = facets.as_deref().map(facet_list).transpose()?;
            let given = given.as_deref().map(chirotope).transpose()?;
            match replay(&cert, fl.as_ref(), given.as_ref()) {
                Ok(s) => {
                    println!(
                        "RESULT: replay=valid steps={} determined={} verdict={} seed-justified={}",
                        s.steps,
                        s.determined,
                        verdict_key(&cert.verdict),
                        yes(s.seed_justified)
                    );
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    let line = match &e {
                        ReplayError::Step { step, .. } => {
                            let tag = format!("STEP {step}:");
                            text.lines().position(|l| l.starts_with(&tag)).map(|i| i + 1)
                        }
                        _ => text.lines().position(|l| l.starts_with("VERDICT")).map(|i| i + 1),
                    };
                    match line {
                        Some(l) => eprintln!("invalid at line {l}: {e}"),
                        None => eprintln!("invalid: {e}"),
                    }
                    println!("RESULT: replay=invalid");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::DiagramChirotope { file, base, certificate, out } => {
            let fl = facet_list(&file)?;
            check_base(&fl, base)?;
            let (pc, cert) = diagram_partial_chirotope(&fl, base);
            if let Some(p) = certificate {
                fs::write(&p, cert.to_text()).with_context(|| format!("writing {}", p.display()))?;
            }
            emit(out.as_deref(), &pc.to_text())?;
            println!(
                "RESULT: base=F{} determined={} total={} verdict={}",
                base + 1,
                pc.determined(),
                pc.n_bases(),
                verdict_key(&cert.verdict)
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::DiagramRefute(args) => diagram_refute(args),
        Command::Bfp(BfpCommand::Search { chirotope: path, out }) => {
            let pc = chirotope(&path)?;
            match bfp_search(&pc)? {
                BfpOutcome::Found(cert) => {
                    emit(out.as_deref(), &cert.to_text())?;
                    println!("RESULT: bfp=found inequalities={}", cert.inequalities.len());
                    Ok(ExitCode::SUCCESS)
                }
                BfpOutcome::None { .. } => {
                    println!("RESULT: bfp=none");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::Bfp(BfpCommand::Verify { chirotope: path, certificate }) => {
            let pc = chirotope(&path)?;
            let cert = BfpCertificate::parse(&read(&certificate)?)
                .with_context(|| format!("parsing {}", certificate.display()))?;
            match bfp_verify(&pc, &cert) {
                Ok(()) => {
                    println!("RESULT: bfp=valid inequalities={}", cert.inequalities.len());
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    eprintln!("invalid: {e}");
                    println!("RESULT: bfp=invalid");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::VerifyDiagram { coords, facets, base } => {
            let pc = PointConfiguration::parse(&read(&coords)?).with_context(|| format!("parsing {}", coords.display()))?;
            let fl = facet_list(&facets)?;
            let report = verify_diagram(&pc, &fl, base)?;
            print!("{}", report.to_text());
            println!("RESULT: verdict={}", if report.passed() { "pass" } else { "fail" });
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::VerifyFan { coords, facets } => {
            let pc = PointConfiguration::parse(&read(&coords)?).with_context(|| format!("parsing {}", coords.display()))?;
            let fl = facet_list(&facets)?;
            let report = verify_fan(&pc, &fl)?;
            print!("{}", report.to_text());
            println!("RESULT: verdict={}", if report.passed() { "pass" } else { "fail" });
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::EmbedReport { file } => {
            let fl = facet_list(&file)?;
            let r = embeddability_report(&fl);
            print!("{}", r.to_text());
            println!(
                "RESULT: simple-vertices={} facets-without-simple-vertex={}",
                r.simple_vertices.len(),
                r.facets_without_simple_vertex.len()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Dual { file } => {
            let fl = facet_list(&file)?;
            let dual = FaceLattice::new(&fl)?.dual();
            print!("{}", dual.facet_list().to_text());
            println!("RESULT: vertices={} facets={}", dual.n_vertices(), dual.facet_list().len());
            Ok(ExitCode::SUCCESS)
        }
        Command::Canon { file } => {
            let fl = facet_list(&file)?;
            let (canon, perm) = canonical_labeling(&fl);
            print!("{}", canon.to_text());
            let p: Vec<String> = perm.iter().map(|x| x.to_string()).collect();
            println!("RESULT: relabeling={}", p.join(","));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn enumerate(args: EnumerateArgs) -> Result<ExitCode> {
    let opts = ClassifyOptions {
        budget: args.budget.map(Duration::from_secs),
        m: args.m,
        p: args.p.as_ref().map(|t| PVector::from_p4(&t.0)),
        jobs: args.jobs.map(|j| j as usize),
        ..Default::default()
    };
    let result = match (&args.resume, args.n) {
        (Some(path), _) => {
            let frontier = Frontier::parse(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
            if frontier.n >= 11 && !args.long_running {
                return usage(&format!("n = {} needs --long-running", frontier.n));
            }
            resume(frontier, &opts)
        }
        (None, Some(n)) => {
            if n >= 11 {
                if !args.long_running {
                    return usage(&format!("n = {n} is not a desk-scale run; pass --long-running to start it anyway"));
                }
                eprintln!("note: n = {n} takes from minutes to weeks depending on the search strategy and cores");
            }
            classify(n, &opts)
        }
        (None, None) => return usage("pass --n or --resume"),
    };
    let (class, code) = match result {
        Ok(c) => (c, ExitCode::SUCCESS),
        Err(ClassifyError::BudgetExceeded { partial, frontier }) => {
            fs::write(&args.frontier, frontier.to_text())
                .with_context(|| format!("writing {}", args.frontier.display()))?;
            eprintln!("budget exhausted; frontier saved to {}", args.frontier.display());
            (*partial, ExitCode::from(3))
        }
        Err(e) => return Err(e.into()),
    };
    let mut text = String::new();
    for s in &class.spheres {
        let p: Vec<String> = s.p_vector.from_four().iter().map(|x| x.to_string()).collect();
        text.push_str(&format!("# flag-vector: {}\n# p-vector: ({})\n", s.flag_vector, p.join(",")));
        text.push_str(&s.facet_list.to_text());
    }
    emit(args.out.as_deref(), &text)?;
    let status = if code == ExitCode::SUCCESS { "complete" } else { "budget-exhausted" };
    println!(
        "RESULT: n={} spheres={} tasks={} status={status}",
        class.n,
        class.spheres.len(),
        class.stats.tasks
    );
    Ok(code)
}

fn diagram_refute(args: RefuteArgs) -> Result<ExitCode> {
    let fl = facet_list(&args.file)?;
    check_base(&fl, args.base)?;
    let root = match diagram_search_root(&fl, args.base) {
        Ok(e) => e,
        Err(c) => {
            println!("propagation alone is contradictory: {c:?}");
            println!("RESULT: base=F{} refuted=yes by=propagation", args.base + 1);
            return Ok(ExitCode::SUCCESS);
        }
    };
    if args.full {
        eprintln!("note: the full frontier of a large diagram can take days of final polynomial searches");
        let config = SearchConfig {
            floor: Some(args.floor),
            prune_with_bfp: true,
            budget: args.budget.map(Duration::from_secs),
            ..Default::default()
        };
        let out = complete_search(&root, &config, None);
        let refuted = out.is_refutation();
        println!(
            "RESULT: base=F{} refuted={} nodes={} dead-ends={} bfp={} survivors={}",
            args.base + 1,
            yes(refuted),
            out.nodes,
            out.dead_ends,
            out.refuted.len(),
            out.completions.len() + out.frontier.len()
        );
        return Ok(if out.interrupted.is_some() {
            ExitCode::from(3)
        } else if refuted {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(1)
        });
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.rng_seed);
    let (mut refuted, mut dead_ends, mut failed) = (0, 0, 0);
    let mut sampled = 0;
    while sampled < args.sample {
        let Some(node) = random_descent(&root, args.floor, &mut rng) else {
            dead_ends += 1;
            if dead_ends > 100 * args.sample.max(1) {
                bail!("random descents keep dying before the floor");
            }
            continue;
        };
        sampled += 1;
        match bfp_search(&node)? {
            BfpOutcome::Found(cert) if bfp_verify(&node, &cert).is_ok() => {
                refuted += 1;
                println!("node {sampled}: determined={} bfp={}", node.determined(), cert.inequalities.len());
            }
            _ => {
                failed += 1;
                println!("node {sampled}: determined={} bfp=none", node.determined());
            }
        }
    }
    println!(
        "RESULT: base=F{} sampled={sampled} refuted={refuted} unrefuted={failed} dead-ends={dead_ends}",
        args.base + 1
    );
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
