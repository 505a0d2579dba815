//! Command-line front end: vocabulary extraction, pocket-conditioned
//! generation, metric evaluation, weight filtering, docking prep and
//! trajectory export.
//!
//! Exit codes: 0 success, 1 usage, 2 input parse error, 3 runtime
//! failure (placement, optimizer, attachment).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use confrag::assemble::{self, Limits, PolicyKind};
use confrag::metrics::{self, AnglePattern, DeConfig, EvalOptions, SigmaConvention};
use confrag::molgraph::{parse_pocket_pdb, parse_sdf, write_sdf, Molecule, Pocket};
use confrag::motif::{extract_vocabulary, Vocabulary};
use confrag::Error as CoreError;

const EXIT_USAGE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(
    name = "confrag",
    about = "Fragment-wise molecule assembly around conformation-preserving motifs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract a motif vocabulary from an SDF corpus.
    ExtractVocab(ExtractVocabArgs),
    /// Generate molecules inside a pocket from a vocabulary.
    Assemble(AssembleArgs),
    /// Compare generated molecules against reference (and optionally
    /// force-field optimized) sets.
    Eval(EvalArgs),
    /// Apply the per-pocket molecular-weight range protocol to a
    /// directory of SDF files.
    MwFilter(MwFilterArgs),
    /// Prepare conformer-matched docking inputs.
    PrepDocking(PrepDockingArgs),
    /// Export masked training trajectories for a ligand/pocket pair.
    ExportTraj(ExportTrajArgs),
}

#[derive(Args)]
struct ExtractVocabArgs {
    /// Input SDF corpus.
    #[arg(long)]
    sdf: PathBuf,
    /// Output vocabulary file.
    #[arg(long)]
    out: PathBuf,
    /// Minimum motif frequency to keep.
    #[arg(long, default_value_t = 1)]
    min_freq: u64,
}

#[derive(Args)]
struct AssembleArgs {
    /// Pocket PDB file.
    #[arg(long)]
    pocket: PathBuf,
    /// Vocabulary file from extract-vocab.
    #[arg(long)]
    vocab: PathBuf,
    /// Output SDF path.
    #[arg(long)]
    out: PathBuf,
    /// Number of molecules to generate.
    #[arg(long, default_value_t = 1)]
    n_samples: usize,
    /// Generation policy (random | greedy-clash-free).
    #[arg(long, default_value = "random")]
    policy: String,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Maximum number of placed motifs per molecule.
    #[arg(long, default_value_t = 16)]
    max_steps: usize,
    /// Stop growing before the weight passes this cap (Da).
    #[arg(long)]
    mw_cap: Option<f64>,
    /// Minimum ligand-pocket heavy-atom distance (Å).
    #[arg(long, default_value_t = 1.2)]
    clash_floor: f64,
    /// Optional TRAJ v1 log of per-molecule generation histories.
    #[arg(long)]
    traj_out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Generated molecules (SDF).
    #[arg(long)]
    generated: PathBuf,
    /// Reference molecules (SDF).
    #[arg(long)]
    reference: PathBuf,
    /// Force-field optimized conformers matched 1:1 to the generated
    /// records (SDF).
    #[arg(long)]
    ff: Option<PathBuf>,
    /// Report base path; writes <out> (TSV) and <out>.kv.
    #[arg(long)]
    out: PathBuf,
    /// Angle patterns, comma separated.
    #[arg(long, default_value = "CCC,CCO,CNC,NCC,CC=O")]
    patterns: String,
    /// Distance bin width in Å.
    #[arg(long, default_value_t = metrics::DISTANCE_BIN_WIDTH)]
    bins_distance: f64,
    /// Angle bin width in degrees.
    #[arg(long, default_value_t = metrics::ANGLE_BIN_WIDTH)]
    bins_angle: f64,
    /// Differential-evolution seed for conformer matching.
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args)]
struct MwFilterArgs {
    /// Directory of per-pocket SDF files.
    #[arg(long)]
    in_dir: PathBuf,
    /// Output directory for filtered SDFs and the ranges table.
    #[arg(long)]
    out_dir: PathBuf,
    /// Standard-deviation convention (population | sample).
    #[arg(long, default_value = "population")]
    sigma: String,
}

#[derive(Args)]
struct PrepDockingArgs {
    /// Generated molecules (SDF).
    #[arg(long)]
    generated: PathBuf,
    /// Force-field optimized conformers (SDF), matched by record order.
    #[arg(long)]
    ff: PathBuf,
    /// Output SDF of conformer-matched structures.
    #[arg(long)]
    out: PathBuf,
    /// Manifest TSV path (defaults to <out>.manifest.tsv).
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args)]
struct ExportTrajArgs {
    /// Ligand SDF (every record is exported).
    #[arg(long)]
    ligands: PathBuf,
    /// Pocket PDB file.
    #[arg(long)]
    pocket: PathBuf,
    /// Output TRAJ v1 path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let _ = err.print();
            // Help/version requests are not usage errors.
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(PathBuf, std::io::Error),
    Core(CoreError),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Io(path, err) => write!(f, "{}: {err}", path.display()),
            CliError::Core(err) => write!(f, "{err}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> CliError {
        CliError::Core(err)
    }
}

fn exit_code_for(err: &CliError) -> u8 {
    match err {
        CliError::Usage(_) => EXIT_USAGE,
        CliError::Io(..) => EXIT_PARSE,
        CliError::Core(core) => match core {
            CoreError::Parse { .. } | CoreError::InvalidMolecule { .. } => EXIT_PARSE,
            _ => EXIT_RUNTIME,
        },
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::ExtractVocab(args) => cmd_extract_vocab(args),
        Command::Assemble(args) => cmd_assemble(args),
        Command::Eval(args) => cmd_eval(args),
        Command::MwFilter(args) => cmd_mw_filter(args),
        Command::PrepDocking(args) => cmd_prep_docking(args),
        Command::ExportTraj(args) => cmd_export_traj(args),
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        }
    }
    std::fs::write(path, bytes).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn load_sdf(path: &Path) -> Result<Vec<Molecule>, CliError> {
    Ok(parse_sdf(&read_file(path)?)?)
}

fn load_pocket(path: &Path) -> Result<Pocket, CliError> {
    Ok(parse_pocket_pdb(&read_file(path)?)?)
}

fn load_vocab(path: &Path) -> Result<Vocabulary, CliError> {
    Ok(Vocabulary::read(&read_file(path)?)?)
}

/// FNV-1a fingerprint of the effective configuration, embedded in
/// reports for provenance.
fn config_fingerprint(config: &str) -> String {
    let mut hash: u64 = 0xcbf29ce484222325;
    for byte in config.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}

fn cmd_extract_vocab(args: ExtractVocabArgs) -> Result<(), CliError> {
    let molecules = load_sdf(&args.sdf)?;
    let vocab = extract_vocabulary(&molecules, args.min_freq)?;
    write_file(&args.out, &vocab.write())?;
    let (rings, chains) = vocab.kind_split();
    println!(
        "vocabulary: {} motifs ({rings} ring-like, {chains} chain-like) from {} molecules",
        vocab.len(),
        molecules.len()
    );
    Ok(())
}

fn cmd_assemble(args: AssembleArgs) -> Result<(), CliError> {
    let policy = PolicyKind::parse(&args.policy)
        .ok_or_else(|| CliError::Usage(format!("unknown policy '{}'", args.policy)))?;
    let pocket = load_pocket(&args.pocket)?;
    let vocab = load_vocab(&args.vocab)?;
    let limits = Limits {
        max_steps: args.max_steps,
        mw_cap: args.mw_cap,
        clash_floor: args.clash_floor,
        ..Limits::default()
    };

    let outcomes = assemble::run_batch(&pocket, &vocab, policy, &limits, args.seed, args.n_samples);
    let mut molecules = Vec::new();
    let mut histories = Vec::new();
    let mut failures = 0;
    for (i, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(state) => {
                let mut mol = state.ligand().clone();
                mol.set_name(format!("gen-{i}"));
                histories.push((format!("gen-{i}"), state.history().to_vec()));
                molecules.push(mol);
            }
            Err(err) => {
                failures += 1;
                eprintln!("warning: sample {i} failed: {err}");
            }
        }
    }
    write_file(&args.out, &write_sdf(&molecules)?)?;
    if let Some(traj_path) = &args.traj_out {
        write_file(traj_path, &assemble::write_generation_log(&histories))?;
    }
    println!(
        "assembled {} molecules ({failures} failures) with policy {} seed {}",
        molecules.len(),
        policy.name(),
        args.seed
    );
    Ok(())
}

fn parse_patterns(text: &str) -> Result<Vec<AnglePattern>, CliError> {
    text.split(',')
        .filter(|t| !t.is_empty())
        .map(|t| AnglePattern::parse(t.trim()).map_err(CliError::from))
        .collect()
}

fn cmd_eval(args: EvalArgs) -> Result<(), CliError> {
    let generated = load_sdf(&args.generated)?;
    let reference = load_sdf(&args.reference)?;
    let ff = match &args.ff {
        Some(path) => Some(load_sdf(path)?),
        None => None,
    };
    let options = EvalOptions {
        patterns: parse_patterns(&args.patterns)?,
        de: DeConfig {
            seed: args.seed,
            ..DeConfig::default()
        },
        distance_bin: args.bins_distance,
        angle_bin: args.bins_angle,
    };
    let report = metrics::evaluate(&generated, &reference, ff.as_deref(), &options)?;
    let config = format!(
        "eval gen={} ref={} ff={} patterns={} bins_distance={} bins_angle={} seed={}",
        args.generated.display(),
        args.reference.display(),
        args.ff
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| "none".into()),
        args.patterns,
        args.bins_distance,
        args.bins_angle,
        args.seed
    );
    let fingerprint = config_fingerprint(&config);
    write_file(&args.out, report.to_tsv(&fingerprint).as_bytes())?;
    let kv_path = kv_path_for(&args.out);
    write_file(&kv_path, report.to_kv(&fingerprint).as_bytes())?;
    println!(
        "eval report written to {} and {}",
        args.out.display(),
        kv_path.display()
    );
    Ok(())
}

fn kv_path_for(out: &Path) -> PathBuf {
    let mut name = out
        .file_name()
        .map(|n| n.to_string_lossy().to_string())
        .unwrap_or_else(|| "report".into());
    name.push_str(".kv");
    out.with_file_name(name)
}

fn cmd_mw_filter(args: MwFilterArgs) -> Result<(), CliError> {
    let convention = match args.sigma.as_str() {
        "population" => SigmaConvention::Population,
        "sample" => SigmaConvention::Sample,
        other => {
            return Err(CliError::Usage(format!(
                "unknown sigma convention '{other}'"
            )))
        }
    };
    let mut entries: Vec<PathBuf> = std::fs::read_dir(&args.in_dir)
        .map_err(|e| CliError::Io(args.in_dir.clone(), e))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().map(|x| x == "sdf").unwrap_or(false))
        .collect();
    entries.sort();

    std::fs::create_dir_all(&args.out_dir).map_err(|e| CliError::Io(args.out_dir.clone(), e))?;
    let mut pockets = BTreeMap::new();
    for path in &entries {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_default();
        pockets.insert(stem, load_sdf(path)?);
    }
    let mut table = String::from("pocket\tmu\tsigma\tlo\thi\tkept\ttotal\n");
    for (pocket_id, molecules) in &pockets {
        let weights: Vec<f64> = molecules.iter().map(|m| m.molecular_weight()).collect();
        let range = match metrics::mw_range_single(pocket_id, &weights, convention) {
            Ok(range) => range,
            Err(err) => {
                eprintln!("warning: pocket '{pocket_id}' skipped: {err}");
                continue;
            }
        };
        let kept = metrics::mw_filter(molecules, &range);
        table.push_str(&format!(
            "{pocket_id}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{}\t{}\n",
            range.mean,
            range.std_dev,
            range.lower,
            range.upper,
            kept.len(),
            molecules.len()
        ));
        write_file(
            &args.out_dir.join(format!("{pocket_id}.sdf")),
            &write_sdf(&kept)?,
        )?;
    }
    write_file(&args.out_dir.join("ranges.tsv"), table.as_bytes())?;
    print!("{table}");
    Ok(())
}

fn cmd_prep_docking(args: PrepDockingArgs) -> Result<(), CliError> {
    let generated = load_sdf(&args.generated)?;
    let ff = load_sdf(&args.ff)?;
    let config = DeConfig {
        seed: args.seed,
        ..DeConfig::default()
    };
    let prep = metrics::prepare_docking_inputs(&generated, &ff, &config)?;
    write_file(&args.out, &prep.matched_sdf()?)?;
    let manifest_path = args
        .manifest
        .clone()
        .unwrap_or_else(|| args.out.with_extension("manifest.tsv"));
    write_file(&manifest_path, prep.manifest_tsv().as_bytes())?;
    println!(
        "wrote {} matched conformers and manifest {}",
        prep.matches.len(),
        manifest_path.display()
    );
    Ok(())
}

fn cmd_export_traj(args: ExportTrajArgs) -> Result<(), CliError> {
    let ligands = load_sdf(&args.ligands)?;
    let pocket = load_pocket(&args.pocket)?;
    let mut steps = Vec::new();
    for (i, ligand) in ligands.iter().enumerate() {
        steps.extend(assemble::build_trajectories(
            ligand,
            &pocket,
            args.seed.wrapping_add(i as u64),
        )?);
    }
    write_file(&args.out, &assemble::write_trajectories(&steps))?;
    println!("exported {} training steps", steps.len());
    Ok(())
}
