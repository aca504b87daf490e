//! The six subcommands. Each resolves its settings against the optional
//! config file, runs the core pipeline, writes JSON/CSV artifacts plus a
//! `manifest.txt` into the output directory, and prints a short summary.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use textpart_core::{
    cross_validated_grid, cross_validated_importance, generate, labeling_agreement, load_corpus,
    run_hypothesis, subsample_for_sim, tfidf_matrix, write_jsonl, AbundanceMode, Corpus,
    EmbedConfig, Error, GridResult, GridSpec, HypothesisSpec, IdfMode, ImportanceSpec,
    KMeansConfig, Label, LabelMap, NormMode, Representation, Result, SuperVerse, SynthSpec,
};

use crate::config::Ctx;
use crate::out;

#[derive(Args)]
pub struct CommonArgs {
    /// Key=value settings file; command-line flags take precedence.
    #[arg(long, value_name = "FILE")]
    pub config: Option<String>,
    /// Class names as two comma-separated strings, e.g. "P,nonP".
    #[arg(long, value_name = "A,B")]
    pub labels: Option<String>,
    /// Token stream(s) to analyze: lexeme, pos_low, pos_high. Comma-separated.
    #[arg(long, value_name = "REP[,REP]")]
    pub rep: Option<String>,
    /// Directory the artifacts land in; created if missing.
    #[arg(long, value_name = "DIR")]
    pub out: Option<String>,
    /// Master seed; every random choice derives from it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker-pool size; absent means one per core. Never changes results.
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
}

#[derive(Args)]
pub struct CorpusArg {
    /// Corpus in JSON-lines form, one verse per line.
    #[arg(long, value_name = "FILE")]
    pub corpus: Option<String>,
}

#[derive(Args)]
pub struct SweepArgs {
    /// Window half-widths to sweep: numbers and/or spans, e.g. "1..10" or "1,2,4..6".
    #[arg(long, value_name = "SPANS")]
    pub windows: Option<String>,
    /// N-gram orders to sweep, same syntax.
    #[arg(long, value_name = "SPANS")]
    pub ngrams: Option<String>,
}

#[derive(Args)]
pub struct CellArgs {
    /// Cross-validation subsamples per grid cell.
    #[arg(long)]
    pub sims: Option<usize>,
    /// Verses drawn per subsample.
    #[arg(long)]
    pub subsample: Option<usize>,
    /// Floor on verses of each class within a subsample.
    #[arg(long)]
    pub min_class: Option<usize>,
    /// Inverse-document-frequency variant: smooth or plain.
    #[arg(long, value_name = "MODE")]
    pub idf: Option<IdfMode>,
    /// Row normalization: l2 or none.
    #[arg(long, value_name = "MODE")]
    pub norm: Option<NormMode>,
    /// K-means restarts per clustering.
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Lloyd iteration cap per restart.
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Early-stop threshold on loss improvement.
    #[arg(long)]
    pub tol: Option<f64>,
}

/// Shared per-cell settings; `default_sims` differs between subcommands
/// (20 for optimization, 5 for null testing).
struct CellSettings {
    simulations: usize,
    subsample_size: usize,
    min_per_class: usize,
    idf: IdfMode,
    norm: NormMode,
    kmeans: KMeansConfig,
}

fn cell_settings(ctx: &mut Ctx, cell: &CellArgs, default_sims: usize) -> Result<CellSettings> {
    Ok(CellSettings {
        simulations: ctx.resolve(cell.sims, "sims", default_sims)?,
        subsample_size: ctx.resolve(cell.subsample, "subsample", 250)?,
        min_per_class: ctx.resolve(cell.min_class, "min_class", 50)?,
        idf: ctx.resolve(cell.idf, "idf", IdfMode::Smooth)?,
        norm: ctx.resolve(cell.norm, "norm", NormMode::L2)?,
        kmeans: KMeansConfig {
            restarts: ctx.resolve(cell.restarts, "restarts", 50)?,
            max_iters: ctx.resolve(cell.max_iters, "max_iters", 300)?,
            tol: ctx.resolve(cell.tol, "tol", 0.0)?,
            // Per-cell seeds are derived from the master seed downstream.
            seed: 0,
        },
    })
}

fn grid_template(
    ctx: &mut Ctx,
    sweep: &SweepArgs,
    cell: &CellArgs,
    seed: u64,
    default_sims: usize,
) -> Result<GridSpec> {
    let full: Vec<usize> = (1..=10).collect();
    let windows = ctx.resolve_list(sweep.windows.clone(), "windows", &full)?;
    let ngrams = ctx.resolve_list(sweep.ngrams.clone(), "ngrams", &full)?;
    let cs = cell_settings(ctx, cell, default_sims)?;
    Ok(GridSpec {
        representation: Representation::Lexeme,
        windows,
        ngrams,
        simulations: cs.simulations,
        subsample_size: cs.subsample_size,
        min_per_class: cs.min_per_class,
        idf: cs.idf,
        norm: cs.norm,
        kmeans: cs.kmeans,
        seed,
    })
}

/// The output directory, which is deliberately kept out of the manifest.
fn out_dir(ctx: &Ctx, cli: Option<String>, required: bool) -> Result<Option<PathBuf>> {
    let value = match cli {
        Some(v) => Some(v),
        None => ctx.peek::<String>("out")?,
    };
    match (value, required) {
        (Some(v), _) => Ok(Some(PathBuf::from(v))),
        (None, true) => Err(Error::Config("`--out` directory is required".into())),
        (None, false) => Ok(None),
    }
}

/// The worker-pool size, likewise never recorded.
fn pool_size(ctx: &Ctx, cli: Option<usize>) -> Result<Option<usize>> {
    match cli {
        Some(v) => Ok(Some(v)),
        None => ctx.peek("threads"),
    }
}

#[cfg(feature = "parallel")]
fn with_pool<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> Result<T> + Send,
) -> Result<T> {
    match threads {
        Some(n) if n > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Io(std::io::Error::other(e)))?;
            pool.install(f)
        }
        _ => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_pool<T>(_threads: Option<usize>, f: impl FnOnce() -> Result<T>) -> Result<T> {
    f()
}

fn load(path: &str, labels: &LabelMap) -> Result<Corpus> {
    load_corpus(Path::new(path), labels).map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{path}: {io}"))),
        other => other,
    })
}

/// A two-entry object keyed by the class names.
fn class_map(labels: &LabelMap, a: serde_json::Value, b: serde_json::Value) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    map.insert(labels.name(Label::A).to_string(), a);
    map.insert(labels.name(Label::B).to_string(), b);
    serde_json::Value::Object(map)
}

fn grid_summary(rep: Representation, result: &GridResult) {
    println!(
        "[{rep}] optimum: window={} ngram={} mean={:.4} std={:.4}{}",
        result.optimum.window,
        result.optimum.ngram,
        result.optimum.mean,
        result.optimum.std,
        if result.selection_divergence {
            " (selection rules disagree)"
        } else {
            ""
        }
    );
}

// ---------------------------------------------------------------- validate

#[derive(Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub corpus: CorpusArg,
    /// Second corpus whose labeling is compared position by position.
    #[arg(long, value_name = "FILE")]
    pub agree: Option<String>,
}

pub fn validate(a: ValidateArgs) -> Result<()> {
    let mut ctx = Ctx::new("validate", a.common.config.as_deref())?;
    let corpus_path = ctx.require(a.corpus.corpus, "corpus")?;
    let labels = ctx.resolve_labels(a.common.labels)?;
    let reps = ctx.resolve_reps_opt(a.common.rep)?;
    let agree = ctx.resolve_opt(a.agree, "agree")?;
    let _seed = ctx.resolve(a.common.seed, "seed", 0u64)?;
    let out = out_dir(&ctx, a.common.out, false)?;

    let corpus = load(&corpus_path, &labels)?;
    if let Some(reps) = &reps {
        for &rep in reps {
            corpus.stream_check(rep)?;
        }
    }
    let agreement = match &agree {
        Some(path) => {
            let other = load(path, &labels)?;
            Some(labeling_agreement(&corpus.labels(), &other.labels())?)
        }
        None => None,
    };

    let counts = corpus.class_counts();
    let name_a = labels.name(Label::A).to_string();
    let name_b = labels.name(Label::B).to_string();
    println!("corpus: {} ({} verses)", corpus.name, corpus.len());
    println!("classes: {name_a}={} {name_b}={}", counts[0], counts[1]);
    let streams: Vec<&str> = corpus
        .available_streams()
        .iter()
        .map(|r| r.as_str())
        .collect();
    println!("streams: {}", streams.join(" "));
    let mut sizes_by_class = serde_json::Map::new();
    for label in [Label::A, Label::B] {
        let blocks = corpus.ranked_blocks(label);
        let sizes: Vec<usize> = blocks.iter().map(|b| b.len()).collect();
        let shown: Vec<String> = sizes.iter().map(|s| s.to_string()).collect();
        println!(
            "blocks[{}]: count={} sizes={}",
            labels.name(label),
            blocks.len(),
            shown.join(",")
        );
        sizes_by_class.insert(
            labels.name(label).to_string(),
            serde_json::json!(sizes),
        );
    }
    if let Some(f) = agreement {
        println!("agreement: {f}");
    }

    if let Some(out) = out {
        fs::create_dir_all(&out)?;
        let blocks: Vec<serde_json::Value> = corpus
            .all_blocks()
            .iter()
            .map(|b| {
                serde_json::json!({
                    "label": labels.name(b.label),
                    "start": b.start,
                    "end": b.end,
                    "length": b.len(),
                })
            })
            .collect();
        let result = serde_json::json!({
            "name": corpus.name,
            "verses": corpus.len(),
            "class_counts": class_map(&labels, counts[0].into(), counts[1].into()),
            "streams": streams,
            "blocks": blocks,
            "block_sizes": sizes_by_class,
            "agreement": agreement,
        });
        out::write_json(&out, "validate.json", &out::envelope(&ctx, result))?;
        fs::write(out.join("blocks.csv"), out::blocks_csv(&corpus))?;
        fs::write(out.join("manifest.txt"), ctx.manifest_text())?;
    }
    Ok(())
}

// ---------------------------------------------------------------- optimize

#[derive(Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub corpus: CorpusArg,
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[command(flatten)]
    pub cell: CellArgs,
    /// Also dump the first subsample's tf-idf matrix at the optimum cell.
    #[arg(long)]
    pub dump_matrix: bool,
}

pub fn optimize(a: OptimizeArgs) -> Result<()> {
    let mut ctx = Ctx::new("optimize", a.common.config.as_deref())?;
    let corpus_path = ctx.require(a.corpus.corpus, "corpus")?;
    let labels = ctx.resolve_labels(a.common.labels)?;
    let reps = ctx.resolve_reps(a.common.rep)?;
    let seed = ctx.resolve(a.common.seed, "seed", 0u64)?;
    let template = grid_template(&mut ctx, &a.sweep, &a.cell, seed, 20)?;
    let dump = ctx.resolve_flag(a.dump_matrix, "dump_matrix")?;
    let out = out_dir(&ctx, a.common.out, true)?.expect("required");
    let threads = pool_size(&ctx, a.common.threads)?;

    let corpus = load(&corpus_path, &labels)?;
    fs::create_dir_all(&out)?;
    for &rep in &reps {
        let spec = GridSpec {
            representation: rep,
            ..template.clone()
        };
        let result = with_pool(threads, || cross_validated_grid(&corpus, &spec))?;
        let payload = serde_json::to_value(&result).expect("grid result serializes");
        out::write_json(&out, &format!("grid_{rep}.json"), &out::envelope(&ctx, payload))?;
        fs::write(
            out.join(format!("mean_ba_{rep}.csv")),
            out::grid_csv(&result.windows, &result.ngrams, &result.mean_ba),
        )?;
        fs::write(
            out.join(format!("std_ba_{rep}.csv")),
            out::grid_csv(&result.windows, &result.ngrams, &result.std_ba),
        )?;
        if dump {
            dump_matrix(&corpus, &spec, &result, &out)?;
        }
        grid_summary(rep, &result);
    }
    fs::write(out.join("manifest.txt"), ctx.manifest_text())?;
    Ok(())
}

/// Rebuilds the embedding the first simulation saw at the optimum cell and
/// writes it as a coordinate-list matrix plus a vocabulary table.
fn dump_matrix(corpus: &Corpus, spec: &GridSpec, result: &GridResult, out: &Path) -> Result<()> {
    let sub = subsample_for_sim(corpus, spec, 0)?;
    let supers: Vec<SuperVerse> = sub
        .iter()
        .map(|&c| corpus.window(c, result.optimum.window, spec.representation))
        .collect();
    let cfg = EmbedConfig {
        representation: spec.representation,
        window_k: result.optimum.window,
        ngram_n: result.optimum.ngram,
        idf: spec.idf,
        norm: spec.norm,
    };
    let (matrix, vocab) = tfidf_matrix(&supers, &cfg)?;
    let rep = spec.representation;
    let mut w = std::io::BufWriter::new(fs::File::create(out.join(format!("matrix_{rep}.tsv")))?);
    matrix.write_coo(&mut w)?;
    w.flush()?;
    let mut w = std::io::BufWriter::new(fs::File::create(out.join(format!("vocab_{rep}.tsv")))?);
    vocab.write_tsv(&mut w)?;
    w.flush()?;
    Ok(())
}

// -------------------------------------------------------------------- test

#[derive(Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub corpus: CorpusArg,
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[command(flatten)]
    pub cell: CellArgs,
    /// Override the shift-schedule spacing (defaults to the largest window).
    #[arg(long, value_name = "K")]
    pub max_window: Option<usize>,
    /// Use every cyclic shift 1..N instead of the spaced schedule.
    #[arg(long)]
    pub dense_shifts: bool,
    /// Score null relabelings at the observed optimum cell only.
    #[arg(long)]
    pub fixed_cell: bool,
    /// Also run a permutation null with this many draws.
    #[arg(long, value_name = "N")]
    pub with_permutation: Option<usize>,
}

pub fn test(a: TestArgs) -> Result<()> {
    let mut ctx = Ctx::new("test", a.common.config.as_deref())?;
    let corpus_path = ctx.require(a.corpus.corpus, "corpus")?;
    let labels = ctx.resolve_labels(a.common.labels)?;
    let reps = ctx.resolve_reps(a.common.rep)?;
    let seed = ctx.resolve(a.common.seed, "seed", 0u64)?;
    // Null testing re-optimizes the whole grid per shift; five subsamples
    // per cell keep that tractable.
    let template = grid_template(&mut ctx, &a.sweep, &a.cell, seed, 5)?;
    let max_window = ctx.resolve_opt(a.max_window, "max_window")?;
    let dense = ctx.resolve_flag(a.dense_shifts, "dense_shifts")?;
    let fixed_cell = ctx.resolve_flag(a.fixed_cell, "fixed_cell")?;
    let permutations = ctx.resolve_opt(a.with_permutation, "permutations")?;
    let out = out_dir(&ctx, a.common.out, true)?.expect("required");
    let threads = pool_size(&ctx, a.common.threads)?;

    let corpus = load(&corpus_path, &labels)?;
    fs::create_dir_all(&out)?;
    for &rep in &reps {
        let spec = HypothesisSpec {
            grid: GridSpec {
                representation: rep,
                ..template.clone()
            },
            max_window,
            dense,
            fixed_cell,
            permutations,
        };
        let report = with_pool(threads, || run_hypothesis(&corpus, &spec))?;
        let payload = serde_json::to_value(&report).expect("hypothesis report serializes");
        out::write_json(
            &out,
            &format!("hypothesis_{rep}.json"),
            &out::envelope(&ctx, payload),
        )?;
        fs::write(
            out.join(format!("null_cyclic_{rep}.csv")),
            out::null_csv(&report.cyclic),
        )?;
        if let Some(perm) = &report.permutation {
            fs::write(
                out.join(format!("null_permutation_{rep}.csv")),
                out::null_csv(perm),
            )?;
        }
        println!(
            "[{rep}] observed: window={} ngram={} mean={:.4} std={:.4}",
            report.observed.optimum.window,
            report.observed.optimum.ngram,
            report.observed.optimum.mean,
            report.observed.optimum.std,
        );
        println!(
            "[{rep}] cyclic null: p={:.4} over {} shifts{}",
            report.cyclic.p_value,
            report.cyclic.values.len(),
            if report.cyclic.degenerate {
                " (degenerate)"
            } else {
                ""
            }
        );
        if let Some(perm) = &report.permutation {
            println!(
                "[{rep}] permutation null: p={:.4} over {} draws{}",
                perm.p_value,
                perm.values.len(),
                if perm.degenerate { " (degenerate)" } else { "" }
            );
        }
    }
    fs::write(out.join("manifest.txt"), ctx.manifest_text())?;
    Ok(())
}

// ---------------------------------------------------------------- features

#[derive(Args)]
pub struct FeaturesArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub corpus: CorpusArg,
    #[command(flatten)]
    pub cell: CellArgs,
    /// Window half-width of the embedding.
    #[arg(long, value_name = "K")]
    pub window: Option<usize>,
    /// N-gram order of the embedding.
    #[arg(long, value_name = "N")]
    pub ngram: Option<usize>,
    /// Keep top features until this share of axis mass is explained.
    #[arg(long, value_name = "SHARE")]
    pub ev_level: Option<f64>,
    /// Per-cluster abundance basis: tfidf or docfreq.
    #[arg(long, value_name = "MODE")]
    pub abundance: Option<AbundanceMode>,
}

pub fn features(a: FeaturesArgs) -> Result<()> {
    let mut ctx = Ctx::new("features", a.common.config.as_deref())?;
    let corpus_path = ctx.require(a.corpus.corpus, "corpus")?;
    let labels = ctx.resolve_labels(a.common.labels)?;
    let reps = ctx.resolve_reps(a.common.rep)?;
    let seed = ctx.resolve(a.common.seed, "seed", 0u64)?;
    let window = ctx.resolve(a.window, "window", 1usize)?;
    let ngram = ctx.resolve(a.ngram, "ngram", 1usize)?;
    let cs = cell_settings(&mut ctx, &a.cell, 100)?;
    let ev_level = ctx.resolve(a.ev_level, "ev_level", 0.75)?;
    let abundance = ctx.resolve(a.abundance, "abundance", AbundanceMode::Tfidf)?;
    let out = out_dir(&ctx, a.common.out, true)?.expect("required");
    let threads = pool_size(&ctx, a.common.threads)?;

    let corpus = load(&corpus_path, &labels)?;
    fs::create_dir_all(&out)?;
    for &rep in &reps {
        let spec = ImportanceSpec {
            representation: rep,
            window,
            ngram,
            idf: cs.idf,
            norm: cs.norm,
            simulations: cs.simulations,
            subsample_size: cs.subsample_size,
            min_per_class: cs.min_per_class,
            kmeans: cs.kmeans,
            ev_level,
            abundance,
            seed,
        };
        let report = with_pool(threads, || cross_validated_importance(&corpus, &spec))?;
        let payload = serde_json::to_value(&report).expect("feature report serializes");
        out::write_json(
            &out,
            &format!("features_{rep}.json"),
            &out::envelope(&ctx, payload),
        )?;
        fs::write(
            out.join(format!("features_{rep}.csv")),
            out::features_csv(&labels, &report),
        )?;
        println!(
            "[{rep}] {} features in union vocabulary, {} kept at ev {}",
            report.n_features_union,
            report.rows.len(),
            report.ev_level
        );
        for r in report.rows.iter().take(10) {
            println!(
                "  {:+.4} (±{:.4})  {}  cluster={} abundance={:+.3}",
                r.mean_loading,
                r.std_loading,
                r.feature,
                labels.name(r.cluster),
                r.abundance
            );
        }
    }
    fs::write(out.join("manifest.txt"), ctx.manifest_text())?;
    Ok(())
}

// ----------------------------------------------------------- block-removal

#[derive(Args)]
pub struct BlockRemovalArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub corpus: CorpusArg,
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[command(flatten)]
    pub cell: CellArgs,
    /// Removal experiments over 1-based length ranks: "1,2,3,1+2" runs
    /// four, the last removing the two largest blocks together.
    #[arg(long, value_name = "SPEC")]
    pub removals: Option<String>,
    /// Class whose blocks are removed; defaults to the first class.
    #[arg(long, value_name = "NAME")]
    pub block_label: Option<String>,
}

pub fn block_removal(a: BlockRemovalArgs) -> Result<()> {
    let mut ctx = Ctx::new("block-removal", a.common.config.as_deref())?;
    let corpus_path = ctx.require(a.corpus.corpus, "corpus")?;
    let labels = ctx.resolve_labels(a.common.labels)?;
    let reps = ctx.resolve_reps(a.common.rep)?;
    let seed = ctx.resolve(a.common.seed, "seed", 0u64)?;
    let template = grid_template(&mut ctx, &a.sweep, &a.cell, seed, 20)?;
    let removals = ctx.resolve_removals(a.removals)?;
    let target_name = ctx.resolve(
        a.block_label,
        "block_label",
        labels.name(Label::A).to_string(),
    )?;
    let target = labels.parse(&target_name).ok_or_else(|| {
        Error::Config(format!(
            "unknown class {target_name:?} (expected {:?} or {:?})",
            labels.name(Label::A),
            labels.name(Label::B)
        ))
    })?;
    let out = out_dir(&ctx, a.common.out, true)?.expect("required");
    let threads = pool_size(&ctx, a.common.threads)?;

    let corpus = load(&corpus_path, &labels)?;
    // Reject impossible ranks before any grid work runs.
    let block_count = corpus.ranked_blocks(target).len();
    for group in &removals {
        for &rank in group {
            if rank == 0 || rank > block_count {
                return Err(Error::BlockRankOutOfRange {
                    rank,
                    count: block_count,
                });
            }
        }
    }
    fs::create_dir_all(&out)?;
    for &rep in &reps {
        let spec = GridSpec {
            representation: rep,
            ..template.clone()
        };
        let mut rows = Vec::new();
        let mut csv = String::from(
            "removal,verses_removed,verses_remaining,window,ngram,mean_ba,std_ba\n",
        );
        // The untouched corpus first, as the comparison point.
        let mut experiments: Vec<(String, Vec<usize>)> = vec![("none".to_string(), Vec::new())];
        for group in &removals {
            let parts: Vec<String> = group.iter().map(|r| r.to_string()).collect();
            experiments.push((parts.join("+"), group.clone()));
        }
        for (name, group) in &experiments {
            let reduced;
            let subject = if group.is_empty() {
                &corpus
            } else {
                reduced = corpus.remove_blocks(target, group)?;
                &reduced
            };
            let removed = corpus.len() - subject.len();
            let result = with_pool(threads, || cross_validated_grid(subject, &spec))?;
            println!(
                "[{rep}] removal {name}: window={} ngram={} mean={:.4} std={:.4} ({} verses removed)",
                result.optimum.window,
                result.optimum.ngram,
                result.optimum.mean,
                result.optimum.std,
                removed
            );
            csv.push_str(&format!(
                "{name},{removed},{},{},{},{},{}\n",
                subject.len(),
                result.optimum.window,
                result.optimum.ngram,
                result.optimum.mean,
                result.optimum.std
            ));
            rows.push(serde_json::json!({
                "removal": name,
                "ranks": group,
                "verses_removed": removed,
                "verses_remaining": subject.len(),
                "optimum": result.optimum,
                "optimum_by_mean": result.optimum_by_mean,
                "selection_divergence": result.selection_divergence,
            }));
        }
        let payload = serde_json::json!({
            "block_label": labels.name(target),
            "experiments": rows,
        });
        out::write_json(
            &out,
            &format!("block_removal_{rep}.json"),
            &out::envelope(&ctx, payload),
        )?;
        fs::write(out.join(format!("block_removal_{rep}.csv")), csv)?;
    }
    fs::write(out.join("manifest.txt"), ctx.manifest_text())?;
    Ok(())
}

// ------------------------------------------------------------------- synth

#[derive(Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Verse count.
    #[arg(long)]
    pub verses: Option<usize>,
    /// Tokens per verse and stream.
    #[arg(long)]
    pub tokens: Option<usize>,
    /// Shared background vocabulary size.
    #[arg(long)]
    pub vocab: Option<usize>,
    /// Class-exclusive token types per class.
    #[arg(long)]
    pub exclusive: Option<usize>,
    /// Class-distribution separation in [0, 1]; 0 plants no signal.
    #[arg(long)]
    pub divergence: Option<f64>,
    /// N-gram scale the planted signal lives at: 1 or 2.
    #[arg(long)]
    pub scale: Option<u8>,
    /// Mean block length of the first class.
    #[arg(long)]
    pub block_a: Option<f64>,
    /// Mean block length of the second class.
    #[arg(long)]
    pub block_b: Option<f64>,
    /// Corpus name stamped on the records.
    #[arg(long)]
    pub name: Option<String>,
}

pub fn synth(a: SynthArgs) -> Result<()> {
    let mut ctx = Ctx::new("synth", a.common.config.as_deref())?;
    let labels = ctx.resolve_labels(a.common.labels)?;
    let _reps = ctx.resolve_reps_opt(a.common.rep)?;
    let seed = ctx.resolve(a.common.seed, "seed", 0u64)?;
    let d = SynthSpec::default();
    let spec = SynthSpec {
        verses: ctx.resolve(a.verses, "verses", d.verses)?,
        tokens_per_verse: ctx.resolve(a.tokens, "tokens", d.tokens_per_verse)?,
        vocab_size: ctx.resolve(a.vocab, "vocab", d.vocab_size)?,
        exclusive_per_class: ctx.resolve(a.exclusive, "exclusive", d.exclusive_per_class)?,
        divergence: ctx.resolve(a.divergence, "divergence", d.divergence)?,
        signal_scale: ctx.resolve(a.scale, "scale", d.signal_scale)?,
        block_len_a: ctx.resolve(a.block_a, "block_a", d.block_len_a)?,
        block_len_b: ctx.resolve(a.block_b, "block_b", d.block_len_b)?,
        seed,
    };
    let name = ctx.resolve(a.name, "name", "synthetic".to_string())?;
    let out = out_dir(&ctx, a.common.out, true)?.expect("required");

    let mut corpus = generate(&spec)?;
    corpus.name = name;
    corpus.label_map = labels.clone();
    fs::create_dir_all(&out)?;
    let path = out.join("corpus.jsonl");
    let mut w = std::io::BufWriter::new(fs::File::create(&path)?);
    write_jsonl(&corpus, &mut w)?;
    w.flush()?;

    let counts = corpus.class_counts();
    let name_a = labels.name(Label::A).to_string();
    let name_b = labels.name(Label::B).to_string();
    let result = serde_json::json!({
        "file": "corpus.jsonl",
        "verses": corpus.len(),
        "class_counts": class_map(&labels, counts[0].into(), counts[1].into()),
        "blocks": class_map(
            &labels,
            corpus.blocks(Label::A).len().into(),
            corpus.blocks(Label::B).len().into(),
        ),
    });
    out::write_json(&out, "synth.json", &out::envelope(&ctx, result))?;
    fs::write(out.join("manifest.txt"), ctx.manifest_text())?;
    println!(
        "wrote {} ({} verses; {name_a}={} {name_b}={})",
        path.display(),
        corpus.len(),
        counts[0],
        counts[1]
    );
    Ok(())
}
