//! Command-line front end: argument parsing, report formatting and exit codes.
//!
//! Exit codes: 0 success, 1 parse or usage error, 2 hypothesis violation,
//! 3 enumeration budget exceeded, 4 inconclusive, 5 certificate rejected.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use concordance::certificate::{certify_independence, verify_certificate, CertifyError, CertifyOptions, IndependenceCertificate, Mode};
use concordance::cover::{cover_homology, whitehead_cover, CoverError, PatternCover};
use concordance::knot::{alexander_polynomial, KnotExpr};
use concordance::obstruction::{parse_rational, Budget, CgProfile, ObstructionError};
use concordance::poly::abs_eval_at_minus_one;
use concordance::signature::{signature_function, CirclePoint, SignatureEngine, SignatureError};
use concordance::subgroups::{enumerate_subgroups, HomocyclicGroup};
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_HYPOTHESIS: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;
pub const EXIT_REJECTED: i32 = 5;

#[derive(Parser, Debug)]
#[command(name = "concordance", version, about = "Signatures, branched covers and Casson-Gordon obstructions for satellite knots")]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Levine-Tristram signature at a point, or the step function on a grid.
    Sig {
        knot: String,
        #[arg(long, conflicts_with = "function")]
        at: Option<String>,
        #[arg(long)]
        function: bool,
        #[arg(long, default_value_t = 60)]
        den_bound: u64,
    },
    /// Alexander polynomial and determinant.
    Alex { knot: String },
    /// Homology and linking form of the 2-fold branched cover.
    Cover { knot: String },
    /// Cover data of the twisted Whitehead pattern P(a,b).
    #[command(allow_negative_numbers = true)]
    Whitehead { a: i64, b: i64 },
    /// Subgroups of (Z_{p^k})^N of a given order.
    Subgroups {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        order: u64,
        /// Print the canonical generators of every subgroup.
        #[arg(long)]
        list: bool,
    },
    /// Independence certificate for a family of satellites.
    Certify {
        #[arg(long)]
        pattern: String,
        #[arg(long, default_value = "zero")]
        profile: String,
        /// Knot expressions separated by ';'.
        #[arg(long)]
        family: String,
        #[arg(long, default_value = "ordering")]
        mode: Mode,
        /// Largest group order enumerated in exhaustive mode.
        #[arg(long, default_value_t = 729)]
        budget: u64,
        #[arg(long, default_value_t = 3)]
        max_per_side: usize,
        /// Only consider subgroups isotropic for the linking form.
        #[arg(long)]
        self_annihilating: bool,
    },
    /// Whitehead pattern example: multiples of the mirrored (2, |4ab-1|) torus knot.
    #[command(allow_negative_numbers = true)]
    Demo {
        #[arg(long, default_value_t = 1)]
        a: i64,
        #[arg(long, default_value_t = 1)]
        b: i64,
        #[arg(long, default_value_t = 3)]
        count: usize,
        #[arg(long, default_value = "exhaustive")]
        mode: Mode,
        #[arg(long, default_value_t = 729)]
        budget: u64,
    },
    /// Re-verify a certificate emitted by `certify` or `demo`.
    Verify { file: PathBuf },
}

/// Error carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(m: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: m.into() }
    }
}

impl From<CoverError> for Failure {
    fn from(e: CoverError) -> Self {
        let code = match e {
            CoverError::DegenerateWhitehead { .. } => EXIT_HYPOTHESIS,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<SignatureError> for Failure {
    fn from(e: SignatureError) -> Self {
        Failure::usage(e.to_string())
    }
}

impl From<concordance::knot::KnotError> for Failure {
    fn from(e: concordance::knot::KnotError) -> Self {
        Failure::usage(e.to_string())
    }
}

impl From<ObstructionError> for Failure {
    fn from(e: ObstructionError) -> Self {
        let code = match &e {
            ObstructionError::BudgetExceeded { .. } => EXIT_BUDGET,
            ObstructionError::Cover(CoverError::DegenerateWhitehead { .. }) => EXIT_HYPOTHESIS,
            ObstructionError::EmptySelection => EXIT_HYPOTHESIS,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<CertifyError> for Failure {
    fn from(e: CertifyError) -> Self {
        match e {
            CertifyError::Hypothesis(_) => Failure { code: EXIT_HYPOTHESIS, message: e.to_string() },
            CertifyError::Inconclusive { .. } => Failure { code: EXIT_INCONCLUSIVE, message: e.to_string() },
            CertifyError::Verification(_) => Failure { code: EXIT_REJECTED, message: e.to_string() },
            CertifyError::Obstruction(o) => o.into(),
            CertifyError::Signature(s) => s.into(),
        }
    }
}

struct Report {
    json: Value,
    text: String,
}

fn knot(s: &str) -> Result<KnotExpr, Failure> {
    KnotExpr::parse(s).map_err(|e| Failure::usage(format!("knot expression '{s}': {e}")))
}

pub fn parse_pattern(s: &str) -> Result<PatternCover, Failure> {
    let bad = || Failure::usage(format!("pattern '{s}': expected whitehead:a,b"));
    let rest = s.strip_prefix("whitehead:").ok_or_else(bad)?;
    let (a, b) = rest.split_once(',').ok_or_else(bad)?;
    let a: i64 = a.trim().parse().map_err(|_| bad())?;
    let b: i64 = b.trim().parse().map_err(|_| bad())?;
    Ok(whitehead_cover(a, b)?)
}

pub fn parse_profile(s: &str) -> Result<CgProfile, Failure> {
    if s == "zero" {
        return Ok(CgProfile::Zero);
    }
    if let Some(b) = s.strip_prefix("bound:") {
        let b = parse_rational(b).ok_or_else(|| Failure::usage(format!("profile bound '{b}' is not a rational number")))?;
        return Ok(CgProfile::bounded(b)?);
    }
    if let Some(path) = s.strip_prefix("file:") {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("profile file {path}: {e}")))?;
        return Ok(CgProfile::from_json(&text)?);
    }
    Err(Failure::usage(format!("profile '{s}': expected zero, bound:B or file:PATH")))
}

pub fn parse_family(s: &str) -> Result<Vec<KnotExpr>, Failure> {
    let fam: Vec<KnotExpr> = s.split(';').map(str::trim).filter(|t| !t.is_empty()).map(knot).collect::<Result<_, _>>()?;
    if fam.is_empty() {
        return Err(Failure::usage("family is empty"));
    }
    Ok(fam)
}

/// Multiplicities `1, m₁(n−1)+1, …` for the demo family.
pub fn demo_multiples(n: u64, count: usize) -> Vec<i64> {
    let mut out = vec![1i64];
    while out.len() < count {
        out.push(out.last().unwrap() * (n as i64 - 1) + 1);
    }
    out.truncate(count);
    out
}

fn sig(knot_s: &str, at: Option<&str>, function: bool, den_bound: u64) -> Result<Report, Failure> {
    let k = knot(knot_s)?;
    if function {
        let f = signature_function(&k, den_bound)?;
        let mut text = format!("knot: {k}\ndenominator bound: {den_bound}\njumps:");
        for j in f.jumps() {
            let _ = write!(text, " {j}({})", f.value_at(j).unwrap());
        }
        text.push_str("\nplateaus:\n");
        for p in f.plateaus() {
            let _ = writeln!(text, "  ({}, {}] value {} (after {})", p.first, p.last, p.value, p.after);
        }
        let jumps: Vec<Value> = f.jumps().iter().map(|j| json!({"at": j, "value": f.value_at(*j)})).collect();
        let json = json!({"knot": k, "denominator_bound": den_bound, "jumps": jumps, "plateaus": f.plateaus()});
        return Ok(Report { json, text });
    }
    let at = at.ok_or_else(|| Failure::usage("sig needs --at j/p or --function"))?;
    let x: CirclePoint = at.parse()?;
    let e = SignatureEngine::from_expr(&k)?;
    let (s, nu, jump) = (e.signature(x), e.nullity(x), e.is_jump(x));
    Ok(Report {
        json: json!({"knot": k, "at": x, "signature": s, "nullity": nu, "jump": jump}),
        text: format!("{s}\n"),
    })
}

fn alex(knot_s: &str) -> Result<Report, Failure> {
    let k = knot(knot_s)?;
    let v = k.evaluate()?;
    let d = alexander_polynomial(&v);
    let det = abs_eval_at_minus_one(&d);
    Ok(Report {
        json: json!({"knot": k, "size": v.size(), "genus": v.genus(), "alexander": d.to_string(), "coefficients": d.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>(), "determinant": det.to_string()}),
        text: format!("alexander: {d}\ndeterminant: {det}\ngenus bound: {}\n", v.genus()),
    })
}

fn rational_matrix<T: std::fmt::Display>(m: &[Vec<T>]) -> Vec<Vec<String>> {
    m.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect()
}

fn cover(knot_s: &str) -> Result<Report, Failure> {
    let k = knot(knot_s)?;
    let h = cover_homology(&k.evaluate()?)?;
    let lk = rational_matrix(&h.linking);
    let mut text = format!("group: {}\norder: {}\n", h.group, h.group.order());
    for (i, g) in h.generators.iter().enumerate() {
        let _ = writeln!(text, "generator {i}: {g:?}");
    }
    let _ = writeln!(text, "linking: {lk:?}");
    Ok(Report {
        json: json!({"knot": k, "invariant_factors": h.group.invariants(), "order": h.group.order(), "generators": h.generators, "linking": lk}),
        text,
    })
}

fn whitehead(a: i64, b: i64) -> Result<Report, Failure> {
    let c = whitehead_cover(a, b)?;
    let lk = rational_matrix(&c.linking);
    Ok(Report {
        json: json!({"pattern": c.label, "invariant_factors": c.group.invariants(), "order": c.group.order(), "generator": "m1", "v1": c.v1, "v2": c.v2, "winding_number": c.winding_number, "linking": lk, "embedding": "1 -> 1/n"}),
        text: format!(
            "group: {}\ngenerator: m1\nv1: {:?}\nv2: {:?}\nwinding number: {}\nlinking: {lk:?}\n",
            c.group, c.v1, c.v2, c.winding_number
        ),
    })
}

fn subgroups(p: u64, k: u32, n: usize, order: u64, list: bool) -> Result<Report, Failure> {
    let g = HomocyclicGroup::new(p, k, n).map_err(|e| Failure::usage(e.to_string()))?;
    let subs = enumerate_subgroups(&g, order).map_err(|e| Failure::usage(e.to_string()))?;
    let gens: Vec<Vec<Vec<u64>>> = subs.iter().map(|s| s.generators(&g)).collect();
    let mut text = format!("(Z{}^{})^{}: {} subgroups of order {order}\n", p, k, n, subs.len());
    if list {
        for s in &gens {
            let _ = writeln!(text, "  {s:?}");
        }
    }
    let mut json = json!({"p": p, "k": k, "n": n, "order": order, "count": subs.len()});
    if list {
        json["subgroups"] = json!(gens);
    }
    Ok(Report { json, text })
}

fn certificate_text(c: &IndependenceCertificate) -> String {
    let mut t = format!(
        "pattern: {} (cover {}, n = {})\nprofile: {}\nprime: {}^{}\nmode: {}\n",
        c.pattern.label, c.pattern.group, c.n, c.profile, c.prime, c.exponent, c.options.mode
    );
    t.push_str("ordering ledger (min/max signature over j/n):\n");
    for r in &c.ordering.knots {
        let _ = writeln!(t, "  [{}] {}: {}/{}", r.index, r.knot, r.min, r.max);
    }
    t.push_str("selection ranges:\n");
    for r in &c.selection.rows {
        let _ = writeln!(t, "  [{}] [{}, {}]{}", r.index, r.lo, r.hi, if r.selected { " selected" } else { "" });
    }
    let _ = writeln!(t, "selected: {:?}", c.selection.selected);
    if c.options.mode == Mode::Exhaustive {
        let subs: usize = c.combinations.iter().map(|r| r.certificate.subgroup_count).sum();
        let _ = writeln!(t, "combinations obstructed: {} ({} candidate subgroups)", c.combinations.len(), subs);
    }
    t
}

fn certify(pattern: &str, profile: &str, family: &str, options: CertifyOptions) -> Result<Report, Failure> {
    let pattern = parse_pattern(pattern)?;
    let profile = parse_profile(profile)?;
    let family = parse_family(family)?;
    let cert = certify_independence(&pattern, &profile, &family, &options)?;
    Ok(Report { text: certificate_text(&cert), json: serde_json::to_value(&cert).expect("certificate serializes") })
}

fn demo(a: i64, b: i64, count: usize, mode: Mode, budget: u64) -> Result<Report, Failure> {
    let pattern = whitehead_cover(a, b)?;
    let n = pattern.group.order();
    let base = KnotExpr::mirror(KnotExpr::torus(n as i64));
    let family: Vec<KnotExpr> = demo_multiples(n, count).into_iter().map(|m| KnotExpr::multiple(m, base.clone())).collect();
    let options = CertifyOptions { mode, budget: Budget { max_group_order: budget, ..Budget::default() }, self_annihilating: false };
    let cert = certify_independence(&pattern, &CgProfile::Zero, &family, &options)?;
    let report = verify_certificate(&cert)?;
    let mut text = certificate_text(&cert);
    let _ = writeln!(text, "verified: {} combinations, {} subgroups, {} witnesses", report.combinations, report.subgroups, report.witnesses);
    Ok(Report { text, json: serde_json::to_value(&cert).expect("certificate serializes") })
}

fn verify(path: &PathBuf) -> Result<Report, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let cert: IndependenceCertificate = serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let r = verify_certificate(&cert)?;
    Ok(Report {
        json: json!({"verified": true, "combinations": r.combinations, "subgroups": r.subgroups, "witnesses": r.witnesses}),
        text: format!("verified: {} combinations, {} subgroups, {} witnesses\n", r.combinations, r.subgroups, r.witnesses),
    })
}

fn execute(cli: &Cli) -> Result<Report, Failure> {
    match &cli.command {
        Command::Sig { knot, at, function, den_bound } => sig(knot, at.as_deref(), *function, *den_bound),
        Command::Alex { knot } => alex(knot),
        Command::Cover { knot } => cover(knot),
        Command::Whitehead { a, b } => whitehead(*a, *b),
        Command::Subgroups { p, k, n, order, list } => subgroups(*p, *k, *n, *order, *list),
        Command::Certify { pattern, profile, family, mode, budget, max_per_side, self_annihilating } => {
            if *budget == 0 || *max_per_side == 0 {
                return Err(Failure::usage("budget and max-per-side must be positive"));
            }
            let options = CertifyOptions {
                mode: *mode,
                budget: Budget { max_group_order: *budget, max_per_side: *max_per_side },
                self_annihilating: *self_annihilating,
            };
            certify(pattern, profile, family, options)
        }
        Command::Demo { a, b, count, mode, budget } => demo(*a, *b, *count, *mode, *budget),
        Command::Verify { file } => verify(file),
    }
}

/// Runs the tool on `argv` (including the program name); returns the exit code.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if code == EXIT_OK { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    match execute(&cli) {
        Ok(report) => {
            let body = match cli.format {
                Format::Json => serde_json::to_string_pretty(&report.json).expect("json") + "\n",
                Format::Text => report.text,
            };
            match &cli.output {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, body) {
                        let _ = writeln!(err, "error: {}: {e}", path.display());
                        return EXIT_USAGE;
                    }
                }
                None => {
                    let _ = out.write_all(body.as_bytes());
                }
            }
            EXIT_OK
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
