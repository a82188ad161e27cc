//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage, parse or other errors, 2 when
//! `analyze --expect-positive` finds a certificate of non-positivity. The seed
//! is `--seed`, else the `POSMAP_SEED` environment variable, else 0.

pub mod analyze;
pub mod mapfile;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{outer, ToleranceConfig};
use crate::mapcore::{self, LinearMap};
use crate::parallelogram::{self, QuadraticFunction};
use crate::random;
use analyze::{Effort, Selection};
use mapfile::{FloatFormat, MapFile};

pub const TOOL: &str = "posmap";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "posmap", version, about = "Analyze linear maps between matrix algebras given by their Choi matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a map file for a named family.
    Gen(GenArgs),
    /// Run analyses on a map file and print a report.
    Analyze(AnalyzeArgs),
    /// Tabulate eta -> phi(eta eta*) on the polarization vectors.
    Tabulate(TabulateArgs),
    /// Rebuild a map from a tabulation or a built-in quadratic function.
    Reconstruct(ReconstructArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GenKind {
    Choi,
    Transpose,
    Identity,
    Kraus,
    Cokraus,
    Functional,
    RandomPos,
}

#[derive(Debug, Args)]
struct GenArgs {
    kind: GenKind,
    /// Matrix size for identity and transpose.
    #[arg(long)]
    dim: Option<usize>,
    /// Input dimension for random families (default 3).
    #[arg(long = "k")]
    k: Option<usize>,
    /// Output dimension for random families (default: same as --k).
    #[arg(long = "h")]
    h: Option<usize>,
    /// Rank of the functional's matrix M (default: --k).
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "decimal")]
    float_format: FloatFormat,
    /// Output path; standard output when omitted.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TolArgs {
    #[arg(long)]
    eps_psd: Option<f64>,
    #[arg(long)]
    eps_rank: Option<f64>,
    #[arg(long)]
    eps_eq: Option<f64>,
    #[arg(long)]
    opt_tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
}

impl TolArgs {
    fn config(&self) -> Result<ToleranceConfig> {
        let d = ToleranceConfig::default();
        let t = ToleranceConfig {
            eps_psd: self.eps_psd.unwrap_or(d.eps_psd),
            eps_rank: self.eps_rank.unwrap_or(d.eps_rank),
            eps_eq: self.eps_eq.unwrap_or(d.eps_eq),
            opt_tol: self.opt_tol.unwrap_or(d.opt_tol),
            max_iters: self.max_iters.unwrap_or(d.max_iters),
        };
        t.validate()?;
        Ok(t)
    }
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    path: PathBuf,
    #[arg(long)]
    positivity: bool,
    /// Test s-positivity through the Schmidt-rank-s search.
    #[arg(long, value_name = "S")]
    k_pos: Option<usize>,
    #[arg(long)]
    cp: bool,
    #[arg(long)]
    cocp: bool,
    #[arg(long)]
    schwarz: bool,
    #[arg(long)]
    rank1: bool,
    #[arg(long)]
    faces: bool,
    #[arg(long)]
    decomp: bool,
    #[arg(long)]
    minorant: bool,
    /// Every analysis (also the default when no analysis flag is given).
    #[arg(long)]
    all: bool,
    /// Exit with code 2 if positivity is refuted.
    #[arg(long)]
    expect_positive: bool,
    /// Emit the machine-readable report instead of text.
    #[arg(long)]
    json: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Restarts for the local searches.
    #[arg(long, default_value_t = 50)]
    restarts: usize,
    #[command(flatten)]
    tol: TolArgs,
}

#[derive(Debug, Args)]
struct TabulateArgs {
    path: PathBuf,
    #[arg(long, value_enum, default_value = "decimal")]
    float_format: FloatFormat,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Builtin {
    /// `eta -> ||eta||^2 I`, the restriction of `X -> Tr(X) I`.
    Tracemap,
}

#[derive(Debug, Args)]
struct ReconstructArgs {
    /// Tabulation file written by `tabulate`.
    #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
    table: Option<PathBuf>,
    #[arg(long, value_enum)]
    builtin: Option<Builtin>,
    /// Input dimension of the built-in function.
    #[arg(long = "k", default_value_t = 2)]
    k: usize,
    /// Output dimension of the built-in function (default: --k).
    #[arg(long = "h")]
    h: Option<usize>,
    #[arg(long, value_enum, default_value = "decimal")]
    float_format: FloatFormat,
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    tol: TolArgs,
}

/// Seed precedence: explicit flag, then `POSMAP_SEED`, then 0.
pub fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("POSMAP_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| Error::BadParams(format!("POSMAP_SEED={v:?} is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

/// Parses `args` (including the program name) and runs the command, writing
/// to `out` and `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    return 0;
                }
                _ => 1,
            };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(&a, out).map(|_| 0),
        Command::Analyze(a) => cmd_analyze(&a, out),
        Command::Tabulate(a) => cmd_tabulate(&a, out).map(|_| 0),
        Command::Reconstruct(a) => cmd_reconstruct(&a, out).map(|_| 0),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn emit(text: &str, path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(|e| Error::Io(e.to_string())),
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn positive_dim(name: &str, v: usize) -> Result<usize> {
    if v == 0 {
        return Err(Error::BadParams(format!("--{name} must be positive")));
    }
    Ok(v)
}

/// Builds the map file for `posmap gen`.
fn generate(a: &GenArgs) -> Result<MapFile> {
    let seed = resolve_seed(a.seed)?;
    let mut rng = random::rng_from_seed(seed);
    let dim = positive_dim("dim", a.dim.unwrap_or(2))?;
    let k = positive_dim("k", a.k.unwrap_or(3))?;
    let h = positive_dim("h", a.h.unwrap_or(k))?;
    let kind = a.kind.to_possible_value().expect("no skipped variants").get_name().to_string();
    let mut provenance = format!("{TOOL} gen {kind}");
    let mut generator = None;
    let map = match a.kind {
        GenKind::Choi => mapcore::choi_example(),
        GenKind::Identity => {
            provenance.push_str(&format!(" --dim {dim}"));
            mapcore::identity_map(dim)
        }
        GenKind::Transpose => {
            provenance.push_str(&format!(" --dim {dim}"));
            mapcore::transpose_map(dim)
        }
        GenKind::Kraus | GenKind::Cokraus => {
            provenance.push_str(&format!(" --k {k} --h {h} --seed {seed}"));
            let g = random::gaussian_matrix(&mut rng, h, k);
            let map = if a.kind == GenKind::Kraus { mapcore::from_kraus(&g) } else { mapcore::from_cokraus(&g) };
            generator = Some((kind.clone(), g));
            map
        }
        GenKind::Functional => {
            let rank = a.rank.unwrap_or(k);
            if rank == 0 || rank > k {
                return Err(Error::BadParams(format!("--rank must lie in 1..={k}")));
            }
            provenance.push_str(&format!(" --k {k} --h {h} --rank {rank} --seed {seed}"));
            let m = random::psd_matrix(&mut rng, k, rank);
            let u = random::unit_ket(&mut rng, h);
            mapcore::from_functional(&m, &outer(&u, &u), &ToleranceConfig::default())?
        }
        GenKind::RandomPos => {
            provenance.push_str(&format!(" --k {k} --h {h} --seed {seed}"));
            random_positive_map(&mut rng, k, h)?
        }
    };
    Ok(MapFile { map, name: Some(kind), provenance: Some(provenance), generator })
}

/// A sum of one or two Kraus and one or two co-Kraus terms: positive and
/// decomposable by construction.
pub fn random_positive_map(rng: &mut random::SeededRng, k: usize, h: usize) -> Result<LinearMap> {
    let mut phi = mapcore::zero_map(k, h);
    let nk = rng.random_range(1..=2);
    let nc = rng.random_range(1..=2);
    for _ in 0..nk {
        phi = mapcore::scale_add(1.0, &phi, 1.0, &mapcore::from_kraus(&random::gaussian_matrix(rng, h, k)))?;
    }
    for _ in 0..nc {
        phi = mapcore::scale_add(1.0, &phi, 1.0, &mapcore::from_cokraus(&random::gaussian_matrix(rng, h, k)))?;
    }
    Ok(phi)
}

fn cmd_gen(a: &GenArgs, out: &mut dyn Write) -> Result<()> {
    let file = generate(a)?;
    emit(&mapfile::write_map(&file, a.float_format), a.out.as_deref(), out)
}

fn cmd_analyze(a: &AnalyzeArgs, out: &mut dyn Write) -> Result<i32> {
    let tol = a.tol.config()?;
    let seed = resolve_seed(a.seed)?;
    let file = mapfile::read_map(&read_file(&a.path)?)?;
    let mut sel = Selection {
        positivity: a.positivity || a.expect_positive,
        k_pos: a.k_pos,
        cp: a.cp,
        cocp: a.cocp,
        schwarz: a.schwarz,
        rank1: a.rank1,
        faces: a.faces,
        minorant: a.minorant,
        decomp: a.decomp,
    };
    if a.all || (sel.is_empty() && !a.expect_positive) {
        let all = Selection::all(&file.map);
        sel = Selection { k_pos: sel.k_pos.or(all.k_pos), ..all };
    }
    let effort = Effort { restarts: a.restarts.max(1), ..Effort::default() };
    let analyses = analyze::run_analyses(&file, &sel, &effort, &tol, seed)?;
    let refuted = analyses.iter().any(|x| x.analysis == "positivity" && x.verdict == "not_positive");
    let input = json!({
        "path": a.path.display().to_string(),
        "name": file.name,
        "dim_in": file.map.dim_in(),
        "dim_out": file.map.dim_out(),
    });
    let text = if a.json {
        let doc = json!({
            "tool": TOOL,
            "version": VERSION,
            "seed": seed,
            "tolerances": tol,
            "input": input,
            "analyses": analyses.iter().map(|x| x.to_json()).collect::<Vec<Value>>(),
        });
        let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Error::Parse(e.to_string()))?;
        s.push('\n');
        s
    } else {
        let mut s = format!("{TOOL} {VERSION}  seed {seed}\n");
        s.push_str(&format!(
            "input: {} ({} -> {}){}\n",
            a.path.display(),
            file.map.dim_in(),
            file.map.dim_out(),
            file.name.as_ref().map(|n| format!(" name {n}")).unwrap_or_default()
        ));
        s.push_str(&format!(
            "tolerances: eps_psd {:e}, eps_rank {:e}, eps_eq {:e}, opt_tol {:e}, max_iters {}\n",
            tol.eps_psd, tol.eps_rank, tol.eps_eq, tol.opt_tol, tol.max_iters
        ));
        for x in &analyses {
            s.push_str(&format!("{:<12} {:<18} {}\n", x.analysis, x.verdict, x.summary));
        }
        s
    };
    emit(&text, None, out)?;
    Ok(if a.expect_positive && refuted { 2 } else { 0 })
}

fn cmd_tabulate(a: &TabulateArgs, out: &mut dyn Write) -> Result<()> {
    let file = mapfile::read_map(&read_file(&a.path)?)?;
    let q = QuadraticFunction::from_map(&file.map);
    let entries = q.tabulate()?;
    emit(&mapfile::write_table(q.dim_in(), q.dim_out(), &entries, a.float_format), a.out.as_deref(), out)
}

fn cmd_reconstruct(a: &ReconstructArgs, out: &mut dyn Write) -> Result<()> {
    let tol = a.tol.config()?;
    let (q, name, provenance) = match (&a.table, a.builtin) {
        (Some(path), _) => {
            let (k, h, entries) = mapfile::read_table(&read_file(path)?)?;
            (QuadraticFunction::from_table(k, h, entries)?, "reconstructed".to_string(), format!("{TOOL} reconstruct --table {}", path.display()))
        }
        (None, Some(Builtin::Tracemap)) => {
            let k = positive_dim("k", a.k)?;
            let h = positive_dim("h", a.h.unwrap_or(k))?;
            (QuadraticFunction::trace_map(k, h), "tracemap".to_string(), format!("{TOOL} reconstruct --builtin tracemap --k {k} --h {h}"))
        }
        (None, None) => return Err(Error::BadParams("give --table or --builtin".into())),
    };
    let phi = parallelogram::reconstruct(&q, &tol)?;
    let file = MapFile { map: phi, name: Some(name), provenance: Some(provenance), generator: None };
    emit(&mapfile::write_map(&file, a.float_format), a.out.as_deref(), out)
}
