use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use formal_core::gog::{spanning_tree, GraphOfGroups};
use formal_core::lattice::{
    closure_coset, covers, extendable, hermite, smith_form, ClosureEmbedding, Coset, Covering, IntMatrix,
};
use formal_core::merz::{
    build_gsigma, sample_ae_sentence, verify_formal_solution, verify_hom, verify_retraction, EqSystem,
    FormalCertificate, HomCheck,
};
use formal_core::modular::{flat_automorphism, DehnTwist, FlatVariant};
use formal_core::target::{GroupHom, Target};
use formal_core::testseq::{dominates_growth, gen_merz_word, stable_kernel_sample, ParametricHom};
use formal_core::words::{check_cprime, parse_ratio, pieces, Cprime};
use formal_core::{Error, Result, Word};
use num_bigint::BigInt;

#[derive(Parser)]
#[command(name = "formal", version, about = "Graphs of groups, test sequences, lattices and formal solutions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    WithK,
    PureB,
}

#[derive(Subcommand)]
enum Command {
    /// Freely reduce a word.
    Reduce { word: String },
    /// Primitive root and exponent of a non-trivial word.
    Root { word: String },
    /// Maximal pieces of a tuple of cyclic words.
    Pieces {
        #[arg(required = true)]
        words: Vec<String>,
    },
    /// Check the C'(p) small cancellation condition.
    Cprime {
        #[arg(long)]
        p: String,
        #[arg(required = true)]
        words: Vec<String>,
    },
    /// Validate a graph of groups file.
    Validate { gog: PathBuf },
    /// Presentation of the fundamental group over the default spanning tree.
    Pi1 { gog: PathBuf },
    /// Normal form of a path `[v:] label ; edge ; label …`.
    Nf {
        gog: PathBuf,
        #[arg(long)]
        path: String,
    },
    /// Decide whether a word over the presentation generators is trivial.
    Trivial {
        gog: PathBuf,
        #[arg(long)]
        word: String,
    },
    /// Dehn twist along an edge; checks that it is an automorphism.
    Twist {
        gog: PathBuf,
        #[arg(long)]
        edge: String,
        /// Edge-group coordinates of the twisting element.
        #[arg(long, allow_hyphen_values = true)]
        by: String,
        #[arg(long)]
        word: Option<String>,
        #[arg(long)]
        path: Option<String>,
    },
    /// Matrix of the flat automorphism α_n.
    Flatauto {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[arg(long)]
        b: usize,
        #[arg(long, value_enum, default_value = "pure-b")]
        variant: Variant,
    },
    /// The word x y x y^2 x ⋯ x y^{nL} x.
    Merzword {
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long = "L")]
        l: u64,
        #[arg(long)]
        n: u64,
    },
    /// Sample growth domination of a parametric family on [from, to].
    Growth {
        family: PathBuf,
        #[arg(long = "a", required = true)]
        a_gens: Vec<String>,
        #[arg(long = "b", required = true)]
        b_gens: Vec<String>,
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
    },
    /// Classify words by triviality under a family on [from, to].
    KernelSample {
        family: PathBuf,
        #[arg(long = "word", required = true)]
        words: Vec<String>,
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
    },
    /// Column Hermite form H = M·U.
    Hermite {
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
    },
    /// Smith form U·M·V = S.
    Smith {
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
    },
    /// Decide whether cosets `offset | basis` cover Z^dim.
    Cover {
        #[arg(long)]
        dim: usize,
        #[arg(long = "coset", allow_hyphen_values = true)]
        cosets: Vec<String>,
    },
    /// The coset of exponent vectors that extend through a closure embedding.
    ClosureCoset {
        #[command(flatten)]
        embedding: EmbeddingArgs,
    },
    /// Whether an exponent vector extends through a closure embedding.
    Extendable {
        #[command(flatten)]
        embedding: EmbeddingArgs,
        #[arg(long, allow_hyphen_values = true)]
        p: String,
    },
    /// Presentation of G_Σ for an equation system file.
    Gsigma { system: PathBuf },
    /// Check that a map on generators kills the relators.
    VerifyHom {
        #[command(flatten)]
        hom: HomArgs,
    },
    /// Check a homomorphism that fixes the given generators.
    VerifyRetraction {
        #[command(flatten)]
        hom: HomArgs,
        #[arg(long = "fixed", required = true)]
        fixed: Vec<String>,
    },
    /// Check a formal-solution certificate against an equation system.
    VerifyFormal {
        system: PathBuf,
        certificate: PathBuf,
        /// Graph of groups the certificate maps into; a free group otherwise.
        #[arg(long)]
        gog: Option<PathBuf>,
    },
    /// Search bounded witnesses of a ∀∃ sentence at sampled universal values.
    AeSample {
        system: PathBuf,
        #[arg(long = "sample", required = true)]
        samples: Vec<String>,
        #[arg(long)]
        bound: usize,
    },
}

#[derive(clap::Args)]
struct EmbeddingArgs {
    /// Generator fixed by the embedding.
    #[arg(long)]
    fixed: Option<String>,
    /// Target generators z_j, in order.
    #[arg(long = "target", required = true)]
    targets: Vec<String>,
    /// Images `a=word` of the free generators.
    #[arg(long = "image", required = true)]
    images: Vec<String>,
}

#[derive(clap::Args)]
struct HomArgs {
    /// Images `g -> word, …`.
    #[arg(long)]
    hom: String,
    /// Relators to check; defaults to the relators of `--system`.
    #[arg(long = "relator")]
    relators: Vec<String>,
    #[arg(long)]
    system: Option<PathBuf>,
    #[arg(long)]
    gog: Option<PathBuf>,
}

/// Result block plus whether the checked property holds.
struct Outcome {
    lines: Vec<String>,
    ok: bool,
}

impl Outcome {
    fn ok(lines: Vec<String>) -> Self {
        Outcome { lines, ok: true }
    }

    fn verdict(ok: bool, lines: Vec<String>) -> Self {
        Outcome { lines, ok }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn load_gog(path: &Path) -> Result<GraphOfGroups> {
    GraphOfGroups::parse(&read(path)?)
}

fn target(gog: &Option<PathBuf>) -> Result<Target> {
    Ok(match gog {
        Some(p) => Target::Gog(Arc::new(load_gog(p)?)),
        None => Target::Free,
    })
}

fn words(texts: &[String]) -> Result<Vec<Word>> {
    texts.iter().map(|t| Word::parse(t)).collect()
}

fn ints(text: &str) -> Result<Vec<i64>> {
    text.split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad integer `{t}`"))))
        .collect()
}

fn bigints(text: &str) -> Result<Vec<BigInt>> {
    text.split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad integer `{t}`"))))
        .collect()
}

fn embedding(args: &EmbeddingArgs) -> Result<ClosureEmbedding> {
    let images = args
        .images
        .iter()
        .map(|s| s.split_once('=').map(|(a, w)| (a.trim(), w.trim())))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::Parse("images are `name=word`".into()))?;
    let fixed: Vec<&str> = args.fixed.iter().map(String::as_str).collect();
    let targets: Vec<&str> = args.targets.iter().map(String::as_str).collect();
    ClosureEmbedding::from_images(&fixed, &targets, &images)
}

fn fmt_vec(v: &[BigInt]) -> String {
    v.iter().map(BigInt::to_string).collect::<Vec<_>>().join(" ")
}

fn hom_and_relators(args: &HomArgs) -> Result<(GroupHom, Vec<Word>)> {
    let h = GroupHom::parse(&args.hom, target(&args.gog)?)?;
    let mut rels = words(&args.relators)?;
    if let Some(p) = &args.system {
        rels.extend(build_gsigma(&EqSystem::parse(&read(p)?)?).relators);
    }
    Ok((h, rels))
}

fn hom_lines(check: &HomCheck, lines: &mut Vec<String>) {
    if let HomCheck::Fails { index, relator, image } = check {
        lines.push(format!("failing_index: {index}"));
        lines.push(format!("relator: {relator}"));
        lines.push(format!("image: {image}"));
    }
}

fn run(command: Command) -> Result<Outcome> {
    Ok(match command {
        Command::Reduce { word } => Outcome::ok(vec![format!("word: {}", Word::parse(&word)?)]),
        Command::Root { word } => {
            let (r, k) = Word::parse(&word)?.primitive_root()?;
            Outcome::ok(vec![format!("root: {r}"), format!("exponent: {k}")])
        }
        Command::Pieces { words: ws } => {
            let ps = pieces(&words(&ws)?);
            let mut lines = vec![format!("count: {}", ps.len())];
            lines.extend(ps.iter().map(|p| format!("piece: {p}")));
            Outcome::ok(lines)
        }
        Command::Cprime { p, words: ws } => match check_cprime(&words(&ws)?, parse_ratio(&p)?)? {
            Cprime::Holds => Outcome::ok(vec!["holds: true".into()]),
            Cprime::Fails { piece, entry } => Outcome::verdict(
                false,
                vec!["holds: false".into(), format!("piece: {piece}"), format!("entry: {entry}")],
            ),
        },
        Command::Validate { gog } => {
            let v = load_gog(&gog)?.violations();
            let mut lines = vec![format!("valid: {}", v.is_empty())];
            lines.extend(v.iter().map(|x| format!("violation: {x}")));
            Outcome::verdict(v.is_empty(), lines)
        }
        Command::Pi1 { gog } => {
            let g = load_gog(&gog)?;
            let pi1 = g.fundamental_group(&spanning_tree(g.graph())?)?;
            Outcome::ok(vec![
                format!("presentation: {}", pi1.presentation),
                format!("edge_letters: {}", pi1.edge_letters),
                format!("killed: {}", if pi1.killed.is_empty() { "none".to_string() } else { pi1.killed.join(" ") }),
            ])
        }
        Command::Nf { gog, path } => {
            let g = load_gog(&gog)?;
            let nf = g.normal_form(&g.parse_path(&path)?)?;
            Outcome::ok(vec![format!("nf: {}", g.format_path(&nf)), format!("length: {}", nf.len())])
        }
        Command::Trivial { gog, word } => {
            let g = load_gog(&gog)?;
            let w = Word::parse(&word)?;
            let nf = g.normal_form(&g.word_to_path(&w)?)?;
            let trivial = nf.is_empty() && nf.labels[0].is_identity();
            let mut lines = vec![format!("trivial: {trivial}")];
            if !trivial {
                lines.push(format!("nf: {}", g.format_path(&nf)));
            }
            Outcome::verdict(trivial, lines)
        }
        Command::Twist { gog, edge, by, word, path } => {
            let g = load_gog(&gog)?;
            g.validate()?;
            let t = DehnTwist::new(&g, &edge, ints(&by)?)?;
            let lt = t.labels(&g);
            let mut lines = Vec::new();
            if let Some(w) = word {
                lines.push(format!("image: {}", lt.apply_word(&g, &Word::parse(&w)?)?));
            }
            if let Some(p) = path {
                lines.push(format!("nf: {}", g.format_path(&lt.apply(&g, &g.parse_path(&p)?)?)));
            }
            let ok = lt.verify(&g)?;
            lines.push(format!("automorphism: {ok}"));
            Outcome::verdict(ok, lines)
        }
        Command::Flatauto { n, k, b, variant } => {
            let v = match variant {
                Variant::WithK => FlatVariant::WithK,
                Variant::PureB => FlatVariant::PureB,
            };
            let a = flat_automorphism(n, k, b, v)?;
            Outcome::ok(vec![format!("matrix: {}", a.matrix), format!("det: {}", a.matrix.det()?)])
        }
        Command::Merzword { x, y, l, n } => {
            let w = gen_merz_word(&Word::parse(&x)?, &Word::parse(&y)?, l, n)?;
            Outcome::ok(vec![format!("word: {w}"), format!("length: {}", w.len())])
        }
        Command::Growth { family, a_gens, b_gens, from, to } => {
            let h = ParametricHom::parse(&read(&family)?, Target::Free)?;
            let a: Vec<&str> = a_gens.iter().map(String::as_str).collect();
            let b: Vec<&str> = b_gens.iter().map(String::as_str).collect();
            let r = dominates_growth(&h, &a, &b, from..=to)?;
            let mut lines: Vec<String> = r
                .rows
                .iter()
                .map(|row| format!("n{}: min_a={} max_b={} ratio={}", row.n, row.min_a, row.max_b, r.ratio(row)))
                .collect();
            lines.push(format!("decreasing: {}", r.decreasing));
            lines.push(format!("below_inverse_n: {}", r.below_inverse_n));
            lines.push(format!("dominates: {}", r.passes()));
            Outcome::verdict(r.passes(), lines)
        }
        Command::KernelSample { family, words: ws, from, to } => {
            let h = ParametricHom::parse(&read(&family)?, Target::Free)?;
            let ws = words(&ws)?;
            let classes = stable_kernel_sample(&h, &ws, from..=to)?;
            let mut lines = Vec::new();
            for (w, c) in ws.iter().zip(&classes) {
                lines.push(format!("word: {w}"));
                lines.push(format!("class: {c}"));
            }
            Outcome::ok(lines)
        }
        Command::Hermite { matrix } => {
            let m = IntMatrix::parse(&matrix)?;
            let h = hermite(&m);
            Outcome::ok(vec![format!("H: {}", h.h), format!("U: {}", h.u), format!("rank: {}", h.rank())])
        }
        Command::Smith { matrix } => {
            let (u, s, v) = smith_form(&IntMatrix::parse(&matrix)?);
            Outcome::ok(vec![format!("U: {u}"), format!("S: {s}"), format!("V: {v}")])
        }
        Command::Cover { dim, cosets } => {
            let cs = cosets.iter().map(|c| Coset::parse(c)).collect::<Result<Vec<_>>>()?;
            match covers(&cs, dim)? {
                Covering::Covered => Outcome::ok(vec!["covered: true".into()]),
                Covering::Uncovered(w) => {
                    Outcome::verdict(false, vec!["covered: false".into(), format!("witness: {}", fmt_vec(&w))])
                }
            }
        }
        Command::ClosureCoset { embedding: e } => {
            let c = closure_coset(&embedding(&e)?)?;
            Outcome::ok(vec![format!("coset: {c}"), format!("index: {}", c.lattice().index())])
        }
        Command::Extendable { embedding: e, p } => {
            let ok = extendable(&bigints(&p)?, &embedding(&e)?)?;
            Outcome::verdict(ok, vec![format!("extendable: {ok}")])
        }
        Command::Gsigma { system } => {
            let g = build_gsigma(&EqSystem::parse(&read(&system)?)?);
            Outcome::ok(vec![format!("presentation: {g}")])
        }
        Command::VerifyHom { hom } => {
            let (h, rels) = hom_and_relators(&hom)?;
            let check = verify_hom(&h, &rels)?;
            let mut lines = vec![format!("hom: {}", check.is_ok())];
            hom_lines(&check, &mut lines);
            Outcome::verdict(check.is_ok(), lines)
        }
        Command::VerifyRetraction { hom, fixed } => {
            let (h, rels) = hom_and_relators(&hom)?;
            let check = verify_hom(&h, &rels)?;
            let fixed: Vec<&str> = fixed.iter().map(String::as_str).collect();
            let moved = verify_retraction(&h, &fixed)?;
            let ok = check.is_ok() && moved.is_none();
            let mut lines = vec![format!("retraction: {ok}"), format!("hom: {}", check.is_ok())];
            hom_lines(&check, &mut lines);
            if let Some(g) = moved {
                lines.push(format!("moved: {g} -> {}", h.image(&g).expect("checked")));
            }
            Outcome::verdict(ok, lines)
        }
        Command::VerifyFormal { system, certificate, gog } => {
            let sys = EqSystem::parse(&read(&system)?)?;
            let cert = FormalCertificate::parse(&read(&certificate)?, target(&gog)?)?;
            let report = verify_formal_solution(&cert, &sys)?;
            let mut lines = vec![format!("formal: {}", report.passes())];
            lines.extend(report.failures.iter().map(|f| format!("failure: {f}")));
            Outcome::verdict(report.passes(), lines)
        }
        Command::AeSample { system, samples, bound } => {
            let sys = EqSystem::parse(&read(&system)?)?;
            let homs = samples.iter().map(|s| GroupHom::parse(s, Target::Free)).collect::<Result<Vec<_>>>()?;
            let verdicts = sample_ae_sentence(&sys, &homs, bound)?;
            let mut lines = Vec::new();
            for (s, v) in homs.iter().zip(&verdicts) {
                lines.push(format!("sample: {s}"));
                lines.push(format!("verdict: {v}"));
            }
            Outcome::ok(lines)
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(out) => {
            for l in &out.lines {
                println!("{l}");
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
