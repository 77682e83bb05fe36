//! `microset`: command-line access to the cover, dust and sampling tools.
//!
//! Exit codes: 0 success, 1 verified negative result, 2 usage or input
//! error, 3 internal invariant failure.

mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use microset::baire::{sample_compact, typicality_report};
use microset::covers::{default_witnesses, greedy_strong_cover, merge_covers, KsOutcome};
use microset::dust::{gap_table, generate, hmeasure_profile, survivor_refute, validate_certificate};
use microset::io::{from_document, to_document, Schema};
use microset::{
    ball_membership, hausdorff_bracket, lemma_epsilon, verify_cover, BallSpec, CoverSeq, DigitalSet, DustSpec,
    DustTree, Error, Precision, SampleSpec, Scalar, SurvivorCertificate,
};
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "microset", version, about = "Exact certificates for microscopic sets")]
struct Cli {
    /// Denominator for root enclosures, as an integer or `10^k`.
    #[arg(long, global = true, default_value = "10^12", value_parser = parse_precision)]
    precision: Precision,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DustArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    b: u64,
    #[arg(long)]
    depth: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Build the dust tree and write it as JSON.
    DustGenerate {
        #[command(flatten)]
        spec: DustArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Exact volume and gap table, cross-checked against the tree.
    DustGaps {
        #[command(flatten)]
        spec: DustArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Upper bounds of the alpha-sum of level diameters for k = 1..=k_max.
    DustHmeasure {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        b: u64,
        #[arg(long)]
        alpha: Scalar,
        #[arg(long, default_value_t = 60)]
        k_max: u32,
        #[arg(long, default_value = "1/1000000000")]
        threshold: Scalar,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Find a dust cube missed by a cover, or re-check a certificate.
    DustRefute {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        cover: PathBuf,
        /// Validate this certificate instead of producing one.
        #[arg(long)]
        certificate: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a cover's budget and coverage of a digital set.
    CoverVerify {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        cover: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Greedy strong cover search.
    CoverSearch {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        eps: Scalar,
        #[arg(long, default_value_t = 256)]
        max_pieces: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Interleave covers built for eps^m into one cover for eps.
    CoverMerge {
        #[arg(long)]
        eps: Scalar,
        #[arg(required = true)]
        covers: Vec<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Membership in a basic open set and the stability radius.
    BallCheck {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        ball: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Certified bracket of the Hausdorff distance between two sets.
    Hausdorff {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Seeded random sets and strong-coverability frequencies.
    BaireSample {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        b: u64,
        #[arg(long)]
        depth: u32,
        #[arg(long)]
        density: Scalar,
        #[arg(long, default_value_t = 1)]
        trials: u32,
        /// Comma-separated values of s for the 1/s budgets.
        #[arg(long, value_delimiter = ',', default_value = "2")]
        s: Vec<u64>,
        #[arg(long, default_value_t = 256)]
        max_pieces: usize,
        /// Write the trial-0 set here.
        #[arg(long)]
        set_output: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Draw a planar dust level or the boxes of a cover.
    RenderSvg {
        #[arg(long, conflicts_with = "cover", required_unless_present = "cover")]
        tree: Option<PathBuf>,
        #[arg(long)]
        level: Option<u32>,
        #[arg(long)]
        cover: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn parse_precision(s: &str) -> Result<Precision, String> {
    let den = match s.strip_prefix("10^") {
        Some(k) => {
            let k: u32 = k.parse().map_err(|e| format!("bad exponent: {e}"))?;
            return Ok(Precision::pow10(k));
        }
        None => s.parse::<Scalar>().map_err(|e| e.to_string())?,
    };
    if den.denom() != &1.into() {
        return Err("precision must be an integer".into());
    }
    Precision::new(den.numer().clone()).map_err(|e| e.to_string())
}

/// A failed run: exit code and message.
struct Failure(u8, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Invariant(_) | Error::Precision(_) => 3,
            _ => 2,
        };
        Failure(code, e.to_string())
    }
}

type Outcome = Result<u8, Failure>;

fn read<T: Schema + DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure(2, format!("{}: {e}", path.display())))?;
    from_document(&text).map_err(|e| Failure(2, format!("{}: {e}", path.display())))
}

fn emit_text(text: &str, output: Option<&Path>) -> Result<(), Failure> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Failure(2, format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit<T: Schema + Serialize>(value: &T, output: Option<&Path>) -> Result<(), Failure> {
    emit_text(&to_document(value), output)
}

fn emit_plain<T: Serialize>(value: &T, output: Option<&Path>) -> Result<(), Failure> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    emit_text(&s, output)
}

fn spec_of(a: &DustArgs) -> Result<DustSpec, Failure> {
    Ok(DustSpec::new(a.n, a.b, a.depth)?)
}

#[derive(Serialize)]
struct BallReport {
    member: bool,
    epsilon: Option<Scalar>,
}

#[derive(Serialize)]
struct CertificateCheck {
    valid: bool,
    problems: Vec<String>,
}

fn run(cli: Cli) -> Outcome {
    let prec = &cli.precision;
    match cli.command {
        Command::DustGenerate { spec, output } => {
            let tree = generate(&spec_of(&spec)?)?;
            emit(&tree, output.as_deref())?;
            Ok(0)
        }
        Command::DustGaps { spec, output } => {
            emit(&gap_table(&spec_of(&spec)?)?, output.as_deref())?;
            Ok(0)
        }
        Command::DustHmeasure {
            n,
            b,
            alpha,
            k_max,
            threshold,
            output,
        } => {
            let spec = DustSpec::new(n, b, 1)?;
            let profile = hmeasure_profile(&spec, &alpha, k_max, &threshold, prec)?;
            emit_plain(&profile, output.as_deref())?;
            Ok(if profile.first_below.is_some() { 0 } else { 1 })
        }
        Command::DustRefute {
            tree,
            cover,
            certificate,
            output,
        } => {
            let tree: DustTree = read(&tree)?;
            let cover: CoverSeq = read(&cover)?;
            if let Some(path) = certificate {
                let cert: SurvivorCertificate = read(&path)?;
                let problems = validate_certificate(&tree, &cover, &cert)?;
                let check = CertificateCheck {
                    valid: problems.is_empty(),
                    problems,
                };
                emit_plain(&check, output.as_deref())?;
                return Ok(if check.valid { 0 } else { 1 });
            }
            match survivor_refute(&tree, &cover, prec)? {
                Ok(cert) => {
                    // a certificate we cannot re-validate is a bug
                    let problems = validate_certificate(&tree, &cover, &cert)?;
                    if !problems.is_empty() {
                        return Err(Failure(3, format!("fresh certificate fails: {problems:?}")));
                    }
                    emit(&cert, output.as_deref())?;
                    Ok(0)
                }
                Err(failure) => {
                    emit_plain(&failure, output.as_deref())?;
                    Err(Failure(
                        3,
                        format!("no survivor at level {} under a valid budget", failure.level),
                    ))
                }
            }
        }
        Command::CoverVerify { set, cover, output } => {
            let e: DigitalSet = read(&set)?;
            let cover: CoverSeq = read(&cover)?;
            let report = verify_cover(&e, &cover)?;
            emit(&report, output.as_deref())?;
            if let Some(v) = &report.first_violation {
                eprintln!("budget violated at position {}", v.position);
            }
            Ok(if report.is_ok() { 0 } else { 1 })
        }
        Command::CoverSearch {
            set,
            eps,
            max_pieces,
            output,
        } => {
            let e: DigitalSet = read(&set)?;
            match greedy_strong_cover(&e, &eps, max_pieces, prec)? {
                Ok(cover) => {
                    emit(&cover, output.as_deref())?;
                    Ok(0)
                }
                Err(reason) => {
                    emit_plain(&KsOutcome::Unknown { reason }, output.as_deref())?;
                    Ok(1)
                }
            }
        }
        Command::CoverMerge { eps, covers, output } => {
            let covers = covers.iter().map(|p| read::<CoverSeq>(p)).collect::<Result<Vec<_>, _>>()?;
            let merged = merge_covers(&covers, &eps)?;
            emit(&merged, output.as_deref())?;
            Ok(0)
        }
        Command::BallCheck { set, ball, output } => {
            let k: DigitalSet = read(&set)?;
            let ball: BallSpec = read(&ball)?;
            let member = ball_membership(&k, &ball)?;
            let epsilon = if member {
                let w = default_witnesses(&k, &ball)?;
                Some(lemma_epsilon(&k, &ball, &w, prec)?)
            } else {
                None
            };
            emit_plain(&BallReport { member, epsilon }, output.as_deref())?;
            Ok(if member { 0 } else { 1 })
        }
        Command::Hausdorff { a, b, depth, output } => {
            let a: DigitalSet = read(&a)?;
            let b: DigitalSet = read(&b)?;
            let depth = depth.unwrap_or(a.depth().max(b.depth()) + 1);
            emit(&hausdorff_bracket(&a, &b, depth, prec)?, output.as_deref())?;
            Ok(0)
        }
        Command::BaireSample {
            seed,
            n,
            b,
            depth,
            density,
            trials,
            s,
            max_pieces,
            set_output,
            csv,
            output,
        } => {
            let spec = SampleSpec {
                seed,
                n,
                b,
                depth,
                density,
                trials,
            };
            if let Some(p) = set_output {
                emit(&sample_compact(&spec)?, Some(&p))?;
            }
            let report = typicality_report(&spec, &s, max_pieces, prec)?;
            if let Some(p) = csv {
                emit_text(&report.to_csv(), Some(&p))?;
            }
            emit(&report, output.as_deref())?;
            Ok(0)
        }
        Command::RenderSvg {
            tree,
            level,
            cover,
            output,
        } => {
            let doc = match (tree, cover) {
                (Some(t), _) => {
                    let tree: DustTree = read(&t)?;
                    svg::dust_level(&tree, level.unwrap_or(tree.depth()))?
                }
                (None, Some(c)) => svg::cover_boxes(&read::<CoverSeq>(&c)?)?,
                (None, None) => unreachable!("clap requires one input"),
            };
            emit_text(&doc, Some(&output))?;
            Ok(0)
        }
    }
}

fn init_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("MICROSET_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .map_err(|_| Failure(2, format!("MICROSET_THREADS={v} is not a number")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure(3, e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match init_threads().and_then(|_| run(cli)) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
