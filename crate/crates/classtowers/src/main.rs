//! Command-line frontend: class group inspection, group construction,
//! pattern computation, radicand classification, batch surveys, and the
//! verification run.
//!
//! Exit codes: 0 success, 1 usage error, 2 precondition violation,
//! 3 internal invariant failure. Progress and diagnostics go to stderr;
//! stdout carries only data.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use classtowers::arith;
use classtowers::artin;
use classtowers::pcgroup::{lower_central_series, PcError, Subgroup};
use classtowers::quadclass;
use classtowers::survey;
use classtowers::towers::{self, ThreeStageFamily, ThreeStageParams};

const EXIT_PRECONDITION: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(name = "classtowers", version, about = "2-class tower groups of special Dirichlet fields: class groups, Artin patterns, surveys")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Class group of an imaginary quadratic discriminant
    #[command(allow_negative_numbers = true)]
    Classgroup {
        /// negative discriminant, 0 or 1 mod 4
        d: i64,
        /// also list the reduced forms
        #[arg(long)]
        forms: bool,
    },
    /// Construct G_{m,n} and print its basic invariants and presentation
    Group { m: u32, n: u32 },
    /// Computed Artin pattern of G_{m,n}
    Pattern { m: u32, n: u32 },
    /// Full dossier for a radicand: admission, parameters, tree position,
    /// predicted pattern
    Classify { d: u64 },
    /// Symbolic three-stage classifier for parameter u and a TKT family
    Classify3 {
        u: u32,
        /// E6, E14, E6-E14, E8, E9 or E8-E9
        family: String,
        /// descendant variant digit (4|5|6 for E6-E14, 2|4|6 for E8-E9)
        variant: u32,
    },
    /// Scan all radicands lo < d < hi and emit accepted records
    Survey {
        lo: u64,
        hi: u64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// write records here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// cache directory; reruns re-aggregate from disk
        #[arg(long)]
        cache: Option<PathBuf>,
        /// print the minimal-radicand table instead of the records
        #[arg(long)]
        table: bool,
    },
    /// Compare computed and predicted patterns over 1..=mmax x 1..=nmax
    Verify { mmax: u32, nmax: u32 },
}

struct CmdError {
    code: u8,
    msg: String,
}

impl CmdError {
    fn precondition(msg: impl Into<String>) -> Self {
        CmdError {
            code: EXIT_PRECONDITION,
            msg: msg.into(),
        }
    }

    fn internal(msg: impl Into<String>) -> Self {
        CmdError {
            code: EXIT_INTERNAL,
            msg: msg.into(),
        }
    }
}

impl From<towers::TowerError> for CmdError {
    fn from(e: towers::TowerError) -> Self {
        match &e {
            towers::TowerError::Internal(_) => CmdError::internal(e.to_string()),
            towers::TowerError::Pc(PcError::Inconsistent(_)) => CmdError::internal(e.to_string()),
            _ => CmdError::precondition(e.to_string()),
        }
    }
}

impl From<quadclass::QuadError> for CmdError {
    fn from(e: quadclass::QuadError) -> Self {
        CmdError::precondition(e.to_string())
    }
}

impl From<artin::ArtinError> for CmdError {
    fn from(e: artin::ArtinError) -> Self {
        CmdError::precondition(e.to_string())
    }
}

impl From<survey::SurveyError> for CmdError {
    fn from(e: survey::SurveyError) -> Self {
        CmdError::precondition(e.to_string())
    }
}

impl From<io::Error> for CmdError {
    fn from(e: io::Error) -> Self {
        CmdError::precondition(format!("i/o error: {}", e))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}

fn run(cmd: Cmd) -> Result<(), CmdError> {
    match cmd {
        Cmd::Classgroup { d, forms } => classgroup(d, forms),
        Cmd::Group { m, n } => group(m, n),
        Cmd::Pattern { m, n } => pattern(m, n),
        Cmd::Classify { d } => classify(d),
        Cmd::Classify3 { u, family, variant } => classify3(u, &family, variant),
        Cmd::Survey {
            lo,
            hi,
            format,
            out,
            cache,
            table,
        } => run_survey(lo, hi, format, out, cache, table),
        Cmd::Verify { mmax, nmax } => verify(mmax, nmax),
    }
}

fn classgroup(d: i64, forms: bool) -> Result<(), CmdError> {
    let cg = quadclass::class_group(d)?;
    println!("discriminant = {}", cg.discriminant);
    println!("h = {}", cg.order);
    let invs: Vec<String> = cg.invariants.iter().map(|i| i.to_string()).collect();
    println!("invariants = ({})", invs.join(","));
    if forms {
        for f in quadclass::reduced_forms(d)? {
            println!("({},{},{})", f.a, f.b, f.c);
        }
    }
    Ok(())
}

fn group(m: u32, n: u32) -> Result<(), CmdError> {
    let g = towers::build_group(m, n)?;
    let (_, class, coclass) = lower_central_series(&g);
    println!("G_{{{},{}}}: order {} = 2^{}", m, n, g.order(), g.log_order());
    println!("class = {}, coclass = {}", class, coclass);
    let ab = Subgroup::whole(&g).abelian_invariants();
    println!("abelianization = {}", ab);
    println!("presentation:");
    print!("{}", g.presentation().to_text());
    Ok(())
}

fn pattern(m: u32, n: u32) -> Result<(), CmdError> {
    let g = towers::build_group(m, n)?;
    let p = artin::artin_pattern(&g)?;
    print!("{}", p);
    Ok(())
}

fn classify(d: u64) -> Result<(), CmdError> {
    let profile = arith::profile_radicand(d)
        .map_err(|e| CmdError::precondition(format!("d = {} rejected: {}", d, e)))?;
    let params = towers::params_from_radicand(&profile)?;
    let position = towers::tree_position(params);
    println!("d = {} = {} * {} * {}", d, profile.p1, profile.p2, profile.q);
    println!(
        "p1 = {} (1 mod 8), p2 = {} (5 mod 8), q = {} (3 mod 4)",
        profile.p1, profile.p2, profile.q
    );
    println!(
        "(p1|p2) = {}, (p1|q) = {}, (p2|q) = {}",
        profile.legendre_p1_p2, profile.legendre_p1_q, profile.legendre_p2_q
    );
    let h2_1 = quadclass::two_class_number(-(profile.p1 as i64))?;
    let h2_2 = quadclass::two_class_number(-((profile.p2 * profile.q) as i64))?;
    println!(
        "h2(Q(sqrt(-{}))) = {}, h2(Q(sqrt(-{}))) = {}",
        profile.p1,
        h2_1,
        profile.p2 * profile.q,
        h2_2
    );
    println!("(m, n) = ({}, {})", params.m, params.n);
    println!("position: {}", position);
    println!("predicted pattern:");
    print!("{}", towers::predicted_pattern2(params));
    Ok(())
}

fn classify3(u: u32, family: &str, variant: u32) -> Result<(), CmdError> {
    let family = ThreeStageFamily::parse(family)
        .ok_or_else(|| CmdError::precondition(format!("unknown family {:?}", family)))?;
    let params = ThreeStageParams::new(u, family, variant)?;
    let (g, meta) = towers::three_stage_identifiers(&params);
    println!("family {}, u = {}, variant {}", family, u, variant);
    println!("G      = {}", g);
    println!("G/G''  = {}", meta);
    println!("predicted pattern:");
    print!("{}", towers::predicted_pattern3(&params));
    Ok(())
}

fn run_survey(
    lo: u64,
    hi: u64,
    format: Format,
    out: Option<PathBuf>,
    cache: Option<PathBuf>,
    table: bool,
) -> Result<(), CmdError> {
    let (records, summary) = match cache {
        Some(dir) => {
            let (records, summary, hit) = survey::survey_cached(&dir, lo, hi)?;
            eprintln!(
                "{} {} records for ({}, {})",
                if hit { "cache hit:" } else { "cache write:" },
                records.len(),
                lo,
                hi
            );
            (records, summary)
        }
        None => survey::survey(lo, hi)?,
    };
    for (d, msg) in &summary.errors {
        eprintln!("d = {}: {}", d, msg);
    }
    let mut sink: BufWriter<Box<dyn Write>> = BufWriter::new(match &out {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout()),
    });
    if table {
        writeln!(sink, "m,n,d")?;
        for ((m, n), d) in &summary.table {
            writeln!(sink, "{},{},{}", m, n, d)?;
        }
    } else {
        match format {
            Format::Csv => survey::export_csv(&records, &mut sink)?,
            Format::Json => survey::export_json(&records, &mut sink)?,
        }
    }
    sink.flush()?;
    eprintln!("accepted = {}", summary.count);
    Ok(())
}

fn verify(mmax: u32, nmax: u32) -> Result<(), CmdError> {
    let reports = towers::verify_box(mmax, nmax)?;
    let mut failures = 0;
    for r in &reports {
        if r.pass {
            println!("PASS ({},{})", r.m, r.n);
        } else {
            failures += 1;
            println!("FAIL ({},{})", r.m, r.n);
            for d in &r.diffs {
                println!("  {}", d);
            }
        }
    }
    eprintln!("{} of {} cells pass", reports.len() - failures, reports.len());
    if failures > 0 {
        return Err(CmdError::internal(format!("{} cells failed", failures)));
    }
    Ok(())
}
