//! Command dispatcher and JSON reporting.
//!
//! Every command produces a [`Report`]. Exit codes: 0 on success, 2 when a
//! verification flag is false, 1 on usage or computation errors.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::algebra::{Flavor, Grading};
use crate::approx::{approximate, ApproxOptions, TieBreak};
use crate::charp::{center_bracket, center_bracket_shifted, check_center_symplecto, phi_p, phi_p_gf};
use crate::error::Error;
use crate::morphism::{check_symplecto, check_weyl_endo, relation_violations, truncated_inverse, EndoJson};
use crate::scalars::{Field, FieldSpec, Gf, GfSpec, Rational};
use crate::singlift::{hn_scan, lift, LiftOptions};
use crate::tame::{evaluate, invert_word, random_corpus, TameWordJson};
use crate::text::{parse_center, print_center};
use crate::{Endo, Side, TameWord};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "tamelift", version, about = "Exact Weyl/Poisson algebra toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the defining relations of an endomorphism.
    Check(CheckArgs),
    /// Compose two endomorphisms: the result is a∘b.
    Compose(ComposeArgs),
    /// Invert a tame word, or an endomorphism modulo an order.
    Invert(InvertArgs),
    /// Tame approximation of a symplectomorphism.
    Approximate(ApproxArgs),
    /// Restriction to the center in characteristic p.
    #[command(name = "phi-p")]
    PhiP(PhiPArgs),
    /// Lift a symplectomorphism to the Weyl algebra.
    Lift(LiftArgs),
    /// Singularity-trick scan for membership in H_N.
    Singscan(ScanArgs),
    /// Poisson bracket on the center of a characteristic-p Weyl algebra.
    Bracket(BracketArgs),
    /// Seeded corpus of tame words and their evaluations.
    Corpus(CorpusArgs),
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long)]
    side: Option<String>,
    #[arg(long)]
    endo: PathBuf,
}

#[derive(Args, Debug)]
struct ComposeArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct InvertArgs {
    /// A tame word (rational coefficients).
    #[arg(long, conflicts_with = "endo")]
    word: Option<PathBuf>,
    #[arg(long, requires = "order")]
    endo: Option<PathBuf>,
    #[arg(long)]
    order: Option<i64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ApproxArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    order: i64,
    #[arg(long, default_value = "forward")]
    tie_break: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PhiPArgs {
    #[arg(long)]
    prime: u64,
    #[arg(long)]
    endo: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LiftArgs {
    #[arg(long)]
    order: i64,
    #[arg(long, value_delimiter = ',', default_value = "3,5")]
    primes: Vec<u64>,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    certificate: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[arg(long = "N")]
    big_n: i64,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long)]
    seed: u64,
    /// Defaults to the identity of the chosen flavor.
    #[arg(long)]
    endo: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value = "standard")]
    flavor: String,
    #[arg(long, default_value = "P")]
    side: String,
}

#[derive(Args, Debug)]
struct BracketArgs {
    #[arg(long)]
    prime: u64,
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long)]
    a: String,
    #[arg(long)]
    b: String,
    /// Number of randomly shifted coefficient lifts to compare against.
    #[arg(long, default_value_t = 0, requires = "seed")]
    shifted: usize,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct CorpusArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    count: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorJson {
    pub kind: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub millis: u128,
}

/// Outcome of one command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub argv: Vec<String>,
    #[serde(rename = "inputsDigest")]
    pub inputs_digest: String,
    pub results: Value,
    pub verification: BTreeMap<String, bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.error.is_some() {
            1
        } else if self.verification.values().all(|v| *v) {
            0
        } else {
            2
        }
    }

    /// Pretty JSON without the timing field.
    pub fn canonical_json(&self) -> String {
        let r = Report { timing: None, ..self.clone() };
        serde_json::to_string_pretty(&r).expect("report serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

enum Failure {
    Usage(String),
    Io(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn to_json(&self) -> ErrorJson {
        match self {
            Failure::Usage(m) => ErrorJson { kind: "Usage".into(), message: m.clone() },
            Failure::Io(m) => ErrorJson { kind: "Io".into(), message: m.clone() },
            Failure::Lib(e) => {
                let dbg = format!("{e:?}");
                let kind = dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string();
                ErrorJson { kind, message: e.to_string() }
            }
        }
    }
}

type Outcome = std::result::Result<(Value, BTreeMap<String, bool>), Failure>;

/// 64-bit FNV-1a.
fn fnv1a(bytes: &[u8], mut h: u64) -> u64 {
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

struct Ctx {
    digest: u64,
}

impl Ctx {
    fn read(&mut self, path: &PathBuf) -> std::result::Result<String, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        self.digest = fnv1a(text.as_bytes(), self.digest);
        Ok(text)
    }

    fn read_json<T: serde::de::DeserializeOwned>(&mut self, path: &PathBuf) -> std::result::Result<T, Failure> {
        let text = self.read(path)?;
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
    }
}

fn write_json<T: Serialize>(path: &Option<PathBuf>, v: &T) -> std::result::Result<(), Failure> {
    if let Some(p) = path {
        let text = serde_json::to_string_pretty(v).expect("output serializes");
        std::fs::write(p, text + "\n").map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn parse_side_name(s: &str) -> std::result::Result<Side, Failure> {
    match s {
        "P" | "p" => Ok(Side::P),
        "W" | "w" => Ok(Side::W),
        "Center" | "center" | "Z" => Ok(Side::Center),
        _ => Err(Failure::Usage(format!("unknown side {s:?}"))),
    }
}

fn parse_flavor(s: &str, n: usize) -> std::result::Result<Flavor, Failure> {
    let (base, aux) = match s.strip_suffix("+aux") {
        Some(b) => (b, true),
        None => (s, false),
    };
    let f = match base.to_ascii_lowercase().as_str() {
        "standard" => Flavor::standard(n),
        "haug" | "haugmented" | "h" => Flavor::h_augmented(n),
        "skew" => Flavor::skew(n),
        _ => return Err(Failure::Usage(format!("unknown flavor {s:?}"))),
    };
    Ok(if aux { f.with_aux() } else { f })
}

fn flags(entries: &[(&str, bool)]) -> BTreeMap<String, bool> {
    entries.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Runs `body` with the endomorphism decoded over the field named in its JSON.
macro_rules! with_endo {
    ($j:expr, |$e:ident| $body:expr) => {
        match $j.field {
            FieldSpec::Rationals => {
                let $e = Endo::<Rational>::from_json(&$j)?;
                $body
            }
            FieldSpec::FiniteField { .. } => {
                let $e = Endo::<Gf>::from_json(&$j)?;
                $body
            }
        }
    };
}

fn check_generic<F: Field>(e: &Endo<F>) -> Outcome {
    let violations = relation_violations(e);
    let (key, ok) = match e.side {
        Side::P => ("symplecto", check_symplecto(e)),
        _ => ("weylEndo", check_weyl_endo(e)),
    };
    Ok((json!({ key: ok, "violations": violations }), flags(&[(key, ok)])))
}

fn cmd_check(a: &CheckArgs, ctx: &mut Ctx) -> Outcome {
    let mut j: EndoJson = ctx.read_json(&a.endo)?;
    if let Some(s) = &a.side {
        j.side = parse_side_name(s)?;
    }
    if j.side == Side::Center {
        let e = Endo::<Gf>::from_json(&j)?;
        let ok = check_center_symplecto(&e)?;
        return Ok((json!({ "centerSymplecto": ok }), flags(&[("centerSymplecto", ok)])));
    }
    with_endo!(j, |e| check_generic(&e))
}

fn compose_generic<F: Field>(a: &Endo<F>, bj: &EndoJson, out: &Option<PathBuf>) -> Outcome {
    let b = Endo::<F>::from_json(bj)?;
    let c = a.compose(&b)?.to_json();
    write_json(out, &c)?;
    Ok((json!({ "endo": c }), BTreeMap::new()))
}

fn cmd_compose(a: &ComposeArgs, ctx: &mut Ctx) -> Outcome {
    let aj: EndoJson = ctx.read_json(&a.a)?;
    let bj: EndoJson = ctx.read_json(&a.b)?;
    if aj.field != bj.field {
        return Err(Error::FieldMismatch.into());
    }
    with_endo!(aj, |e| compose_generic(&e, &bj, &a.out))
}

fn invert_endo_generic<F: Field>(e: &Endo<F>, order: i64, out: &Option<PathBuf>) -> Outcome {
    let g = if e.side == Side::W { Grading::quantum() } else { Grading::standard() };
    let inv = truncated_inverse(e, order, &g)?;
    let j = inv.endo.to_json();
    write_json(out, &j)?;
    let back = e.compose_truncated(&inv.endo, &g, order)?;
    let ok = back.is_identity();
    Ok((json!({ "endo": j, "order": order }), flags(&[("identityModOrder", ok)])))
}

fn cmd_invert(a: &InvertArgs, ctx: &mut Ctx) -> Outcome {
    if let Some(wp) = &a.word {
        let wj: TameWordJson = ctx.read_json(wp)?;
        let w = TameWord::<Rational>::from_json(&wj, &())?;
        let inv = invert_word(&w, &())?;
        let e = evaluate(&w, w.side, w.flavor, &())?;
        let ei = evaluate(&inv, w.side, w.flavor, &())?;
        let ok = e.compose(&ei)?.is_identity();
        let j = inv.to_json();
        write_json(&a.out, &j)?;
        return Ok((json!({ "word": j }), flags(&[("identity", ok)])));
    }
    let Some(ep) = &a.endo else { return Err(Failure::Usage("invert needs --word or --endo".into())) };
    let order = a.order.ok_or_else(|| Failure::Usage("--endo needs --order".into()))?;
    let j: EndoJson = ctx.read_json(ep)?;
    with_endo!(j, |e| invert_endo_generic(&e, order, &a.out))
}

fn cmd_approximate(a: &ApproxArgs, ctx: &mut Ctx) -> Outcome {
    let tie_break = match a.tie_break.to_ascii_lowercase().as_str() {
        "forward" => TieBreak::Forward,
        "reverse" => TieBreak::Reverse,
        other => return Err(Failure::Usage(format!("unknown tie-break {other:?}"))),
    };
    let j: EndoJson = ctx.read_json(&a.input)?;
    let sigma = Endo::<Rational>::from_json(&j)?;
    let ap = approximate(&sigma, a.order, ApproxOptions { tie_break })?;
    let wj = ap.word.to_json();
    write_json(&a.out, &wj)?;
    let monotone = ap.stages.windows(2).all(|w| w[1].rank_after > w[0].rank_after);
    Ok((
        json!({ "word": wj, "residualRank": ap.residual_rank, "stages": ap.stages }),
        flags(&[("residualRank", ap.residual_rank >= a.order), ("monotoneStages", monotone)]),
    ))
}

fn cmd_phi_p(a: &PhiPArgs, ctx: &mut Ctx) -> Outcome {
    let j: EndoJson = ctx.read_json(&a.endo)?;
    let psi = match &j.field {
        FieldSpec::Rationals => {
            let spec = GfSpec::prime(a.prime)?;
            phi_p(&Endo::<Rational>::from_json(&j)?, &spec)?
        }
        FieldSpec::FiniteField { p, .. } => {
            if *p != a.prime {
                return Err(Error::FieldMismatch.into());
            }
            phi_p_gf(&Endo::<Gf>::from_json(&j)?)?
        }
    };
    let ok = check_center_symplecto(&psi)?;
    let pj = psi.to_json();
    write_json(&a.out, &pj)?;
    Ok((json!({ "center": pj }), flags(&[("centerSymplecto", ok)])))
}

fn cmd_lift(a: &LiftArgs, ctx: &mut Ctx) -> Outcome {
    let j: EndoJson = ctx.read_json(&a.input)?;
    let sigma = Endo::<Rational>::from_json(&j)?;
    let l = lift(&sigma, &LiftOptions::new(a.order, a.primes.clone()))?;
    let lj = l.lifted.to_json();
    write_json(&a.out, &lj)?;
    write_json(&a.certificate, &l.certificate)?;
    let c = &l.certificate;
    let v = flags(&[
        ("stabilization", c.stabilization),
        ("primes", c.primes.iter().all(|p| p.consistent)),
        ("canonicity", c.canonicity),
        ("commutationH", c.commutation_h.ok()),
        ("commutationSpecialized", c.commutation_specialized.ok()),
        ("inverseCertified", c.inverse_certified),
    ]);
    Ok((json!({ "lifted": lj, "liftedH": l.lifted_h.to_json(), "word": l.word.to_json(), "certificate": c }), v))
}

fn cmd_singscan(a: &ScanArgs, ctx: &mut Ctx) -> Outcome {
    let verdict = match &a.endo {
        Some(p) => {
            let j: EndoJson = ctx.read_json(p)?;
            with_endo!(j, |e| hn_scan(&e, a.big_n, a.samples, a.seed)?)
        }
        None => {
            let flavor = parse_flavor(&a.flavor, a.n)?;
            let side = parse_side_name(&a.side)?;
            hn_scan(&Endo::<Rational>::identity(side, flavor, ()), a.big_n, a.samples, a.seed)?
        }
    };
    Ok((json!({ "verdict": verdict }), BTreeMap::new()))
}

fn cmd_bracket(a: &BracketArgs) -> Outcome {
    let spec = GfSpec::prime(a.prime)?;
    let flavor = Flavor::standard(a.n);
    let x = parse_center::<Gf>(&a.a, flavor, &spec)?;
    let y = parse_center::<Gf>(&a.b, flavor, &spec)?;
    let b = center_bracket(&x, &y)?;
    let mut v = BTreeMap::new();
    if a.shifted > 0 {
        let seed = a.seed.ok_or_else(|| Failure::Usage("--shifted needs --seed".into()))?;
        let mut same = true;
        for i in 0..a.shifted as u64 {
            same &= center_bracket_shifted(&x, &y, seed.wrapping_add(i))? == b;
        }
        v.insert("liftIndependent".to_string(), same);
    }
    Ok((json!({ "bracket": print_center(&b) }), v))
}

fn cmd_corpus(a: &CorpusArgs) -> Outcome {
    let words = random_corpus::<Rational>(a.count, a.seed, &());
    let mut items = Vec::with_capacity(words.len());
    for w in &words {
        let sigma = evaluate(w, Side::P, w.flavor, &())?;
        items.push(json!({ "word": w.to_json(), "sigma": sigma.to_json() }));
    }
    let items = Value::Array(items);
    write_json(&a.out, &items)?;
    Ok((json!({ "count": words.len(), "items": items }), BTreeMap::new()))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Check(_) => "check",
        Command::Compose(_) => "compose",
        Command::Invert(_) => "invert",
        Command::Approximate(_) => "approximate",
        Command::PhiP(_) => "phi-p",
        Command::Lift(_) => "lift",
        Command::Singscan(_) => "singscan",
        Command::Bracket(_) => "bracket",
        Command::Corpus(_) => "corpus",
    }
}

/// Parses `argv` (without the program name) and executes the command.
pub fn run_command(argv: &[String]) -> Report {
    let start = Instant::now();
    let mut ctx = Ctx { digest: argv.iter().fold(0xcbf2_9ce4_8422_2325, |h, a| fnv1a(a.as_bytes(), fnv1a(&[0], h))) };
    let full = std::iter::once("tamelift".to_string()).chain(argv.iter().cloned());
    let (command, outcome) = match Cli::try_parse_from(full) {
        Err(e) => (argv.first().cloned().unwrap_or_default(), Err(Failure::Usage(e.to_string()))),
        Ok(cli) => {
            let out = match &cli.command {
                Command::Check(a) => cmd_check(a, &mut ctx),
                Command::Compose(a) => cmd_compose(a, &mut ctx),
                Command::Invert(a) => cmd_invert(a, &mut ctx),
                Command::Approximate(a) => cmd_approximate(a, &mut ctx),
                Command::PhiP(a) => cmd_phi_p(a, &mut ctx),
                Command::Lift(a) => cmd_lift(a, &mut ctx),
                Command::Singscan(a) => cmd_singscan(a, &mut ctx),
                Command::Bracket(a) => cmd_bracket(a),
                Command::Corpus(a) => cmd_corpus(a),
            };
            (command_name(&cli.command).to_string(), out)
        }
    };
    let (results, verification, error) = match outcome {
        Ok((r, v)) => (r, v, None),
        Err(f) => (Value::Null, BTreeMap::new(), Some(f.to_json())),
    };
    Report {
        schema: SCHEMA_VERSION,
        command,
        argv: argv.to_vec(),
        inputs_digest: format!("fnv1a64:{:016x}", ctx.digest),
        results,
        verification,
        error,
        timing: Some(Timing { millis: start.elapsed().as_millis() }),
    }
}

pub fn main_entry() -> i32 {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let full = std::iter::once("tamelift".to_string()).chain(argv.iter().cloned());
    if let Err(e) = Cli::try_parse_from(full) {
        use clap::error::ErrorKind;
        if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
            print!("{e}");
            return if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand { 1 } else { 0 };
        }
    }
    let report = run_command(&argv);
    println!("{}", report.to_json());
    report.exit_code()
}
