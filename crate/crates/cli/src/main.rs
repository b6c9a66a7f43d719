use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use destruct::encoding::{de_for_set, DeVariant};
use destruct::generate::{
    intersection_array, rooks_4x4, sample_simple_regular, shrikhande, theory_regime_warning, DrgCheck,
};
use destruct::io::{format_edge_list, parse_key_values, parse_labels, read_edge_list, LoadedGraph};
use destruct::nn::{load_checkpoint, save_checkpoint, Aggregation, ModelConfig, ModelKind, ModelParams, Readout};
use destruct::pipeline::experiments::{drg_results, fig2a_results};
use destruct::pipeline::{
    build_task_dataset, config_hash, drg_experiment, evaluate, fig2a_experiment, fmt_num, format_results,
    mean_ci95, planted_triangle_dataset, prepare, train, Fig2aConfig, Optimizer, ResultRow, SplitFractions,
    TaskDataset, TaskKind, TrainConfig,
};
use destruct::wl::{distinguishes, distinguishes_tuples};
use destruct::{Graph, TargetTuple};

type AnyResult<T> = Result<T, Box<dyn std::error::Error>>;

/// Distance encodings, WL oracles and DE-augmented GNN experiments.
#[derive(Parser, Debug)]
#[command(name = "destruct", version)]
struct Cli {
    /// Seed for every random choice; overrides seeds from config files.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Also write a gnuplot script next to each CSV output.
    #[arg(long, global = true)]
    gnuplot_stub: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Distance encodings.
    #[command(subcommand)]
    De(DeCommand),
    /// Weisfeiler-Lehman tests.
    #[command(subcommand)]
    Wl(WlCommand),
    /// Graph generators.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Distance-regular graph tools.
    #[command(subcommand)]
    Drg(DrgCommand),
    /// Expressiveness experiments.
    #[command(subcommand)]
    Exp(ExpCommand),
    /// Train a model on a node, link or triangle task.
    Train(TrainArgs),
    /// Evaluate a checkpoint on the test split of a task.
    Eval(EvalArgs),
}

#[derive(Subcommand, Debug)]
enum DeCommand {
    /// Print the encoding of every node relative to a target set as CSV.
    Compute {
        /// Edge-list file.
        #[arg(long)]
        graph: PathBuf,
        /// Target node ids (dense ids), comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        set: Vec<usize>,
        #[arg(long, value_enum, default_value_t = DeKind::Spd)]
        variant: DeKind,
        /// Largest encoded distance.
        #[arg(long, default_value_t = 3)]
        d_max: usize,
        /// Number of random-walk steps.
        #[arg(long, default_value_t = 4)]
        d_rw: usize,
        /// PageRank damping.
        #[arg(long, default_value_t = 0.9)]
        damping: f64,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum DeKind {
    Spd,
    Lp,
    Ppr,
}

#[derive(Subcommand, Debug)]
enum WlCommand {
    /// Print DISTINGUISHED or NOT-DISTINGUISHED.
    Test {
        #[arg(long)]
        g1: PathBuf,
        #[arg(long)]
        g2: PathBuf,
        /// 1 for 1-WL, 2 for 2-FWL.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        order: u8,
        /// Target tuple in the first graph, comma separated.
        #[arg(long, value_delimiter = ',', requires = "s2")]
        s1: Option<Vec<usize>>,
        /// Target tuple in the second graph, comma separated.
        #[arg(long, value_delimiter = ',', requires = "s1")]
        s2: Option<Vec<usize>>,
    },
}

#[derive(Subcommand, Debug)]
enum GenCommand {
    /// Uniform simple random regular graphs.
    Regular {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        /// Number of graphs; graph `i` uses seed `seed + i`.
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Resampling budget per graph.
        #[arg(long, default_value_t = 1_000_000)]
        max_tries: usize,
        /// Output file (one graph) or directory (several); stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Shrikhande or 4x4 Rook's graph.
    Drg {
        #[arg(long, value_enum)]
        name: DrgName,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum DrgName {
    Shrikhande,
    Rook,
}

#[derive(Subcommand, Debug)]
enum DrgCommand {
    /// Print the intersection array or a witness that the graph is not
    /// distance-regular.
    Check {
        #[arg(long)]
        graph: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum ExpCommand {
    /// Indistinguishable node pairs of random regular graphs per depth.
    Fig2a {
        /// Graph sizes, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "16,32,64,128")]
        ns: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        r: usize,
        /// Total nodes sampled per size.
        #[arg(long, default_value_t = 2000)]
        node_budget: usize,
        /// Deepest layer compared (default: two past the boundary).
        #[arg(long)]
        max_layers: Option<usize>,
        #[arg(long, default_value_t = 50)]
        hidden: usize,
        /// Parameter draws per comparison.
        #[arg(long, default_value_t = 3)]
        trials: usize,
        /// Slack in the layer boundary.
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        /// Compare at most this many random pairs per graph.
        #[arg(long)]
        max_pairs: Option<usize>,
        /// CSV output; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Shrikhande vs Rook's battery with one PASS/FAIL line per clause.
    Drg {
        /// Parameter draws for the node comparisons.
        #[arg(long, default_value_t = 100)]
        draws: usize,
        /// CSV output (the report always goes to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Edge-list file.
    #[arg(long, conflicts_with_all = ["dataset", "planted"])]
    graph: Option<PathBuf>,
    /// Dataset name under $DESTRUCT_DATA_DIR (`<name>/edges.txt`,
    /// optional `<name>/labels.txt`).
    #[arg(long, conflicts_with = "planted")]
    dataset: Option<String>,
    /// Synthetic triangle task on a random 3-regular graph with this many nodes.
    #[arg(long)]
    planted: Option<usize>,
    /// Node label file for the node task.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = TaskArg::Link)]
    task: TaskArg,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum TaskArg {
    Node,
    Link,
    Triangle,
}

impl From<TaskArg> for TaskKind {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::Node => TaskKind::Node,
            TaskArg::Link => TaskKind::Link,
            TaskArg::Triangle => TaskKind::Triangle,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModelArg {
    Wlgnn,
    DegnnSpd,
    DegnnLp,
    DeagnnSpd,
    DeagnnPr,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Wlgnn => ModelKind::Wlgnn,
            ModelArg::DegnnSpd => ModelKind::DegnnSpd,
            ModelArg::DegnnLp => ModelKind::DegnnLp,
            ModelArg::DeagnnSpd => ModelKind::DeagnnSpd,
            ModelArg::DeagnnPr => ModelKind::DeagnnPr,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum AggArg {
    Gcn,
    Gin,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ReadoutArg {
    Diff,
    SumDiff,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum OptimizerArg {
    Sgd,
    Adam,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    /// key=value file with model and training settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    dropout: Option<f64>,
    #[arg(long)]
    d_max: Option<usize>,
    #[arg(long)]
    d_rw: Option<usize>,
    /// Hops aggregated per layer by the ring-controlled model.
    #[arg(long)]
    prop_depth: Option<usize>,
    #[arg(long)]
    damping: Option<f64>,
    #[arg(long, value_enum)]
    agg: Option<AggArg>,
    #[arg(long, value_enum)]
    readout: Option<ReadoutArg>,
    #[arg(long, value_enum)]
    optimizer: Option<OptimizerArg>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    max_epochs: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    /// Keep the last epoch instead of selecting on validation.
    #[arg(long)]
    no_val_select: bool,
    /// Independent runs with model and training seeds offset by 0..N.
    #[arg(long, default_value_t = 1)]
    seeds: usize,
    /// Where to save the model of the first run.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// CSV output; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    checkpoint: PathBuf,
    /// CSV output; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_output(out: Option<&Path>, text: &str) -> AnyResult<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn read_graph(path: &Path) -> AnyResult<LoadedGraph> {
    read_edge_list(path).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn parse_tuple(g: &Graph, nodes: &[usize]) -> AnyResult<TargetTuple> {
    Ok(TargetTuple::new(g, nodes)?)
}

fn de_compute(
    graph: &Path,
    set: &[usize],
    variant: DeKind,
    d_max: usize,
    d_rw: usize,
    damping: f64,
    out: Option<&Path>,
) -> AnyResult<()> {
    let g = read_graph(graph)?.graph;
    let s = parse_tuple(&g, set)?;
    let v = match variant {
        DeKind::Spd => DeVariant::SpdOneHot { d_max },
        DeKind::Lp => DeVariant::LandingProb { d_rw, lenient: false },
        DeKind::Ppr => DeVariant::Ppr { damping, tol: 1e-12 },
    };
    let table = de_for_set(&g, &s, &v)?;
    let mut text = String::from("node");
    for k in 0..table.dim() {
        text.push_str(&format!(",de{k}"));
    }
    text.push('\n');
    for u in 0..g.n() {
        text.push_str(&u.to_string());
        for x in table.row(u) {
            text.push(',');
            text.push_str(&fmt_num(*x));
        }
        text.push('\n');
    }
    write_output(out, &text)
}

fn wl_test(g1: &Path, g2: &Path, order: u8, s1: Option<&[usize]>, s2: Option<&[usize]>) -> AnyResult<()> {
    let a = read_graph(g1)?.graph;
    let b = read_graph(g2)?.graph;
    let split = match (s1, s2) {
        (Some(x), Some(y)) => distinguishes_tuples(&a, &parse_tuple(&a, x)?, &b, &parse_tuple(&b, y)?, order)?,
        _ => distinguishes(&a, &b, order)?,
    };
    println!("{}", if split { "DISTINGUISHED" } else { "NOT-DISTINGUISHED" });
    Ok(())
}

fn gen_regular(n: usize, r: usize, seed: u64, count: usize, max_tries: usize, out: Option<&Path>) -> AnyResult<()> {
    if let Some(w) = theory_regime_warning(n, r) {
        eprintln!("{w}");
    }
    if count == 0 {
        return Err("--count must be at least 1".into());
    }
    if count > 1 && out.is_none() {
        return Err("--out DIR is required when --count > 1".into());
    }
    for i in 0..count {
        let s = seed.wrapping_add(i as u64);
        let g = sample_simple_regular(n, r, s, max_tries)?;
        let text = format_edge_list(&g);
        match out {
            Some(dir) if count > 1 => {
                fs::create_dir_all(dir)?;
                fs::write(dir.join(format!("regular-n{n}-r{r}-s{s}.txt")), text)?;
            }
            other => write_output(other, &text)?,
        }
    }
    Ok(())
}

fn drg_check(graph: &Path) -> AnyResult<()> {
    let g = read_graph(graph)?.graph;
    match intersection_array(&g)? {
        DrgCheck::Drg(a) => println!("{a}"),
        DrgCheck::NotDrg(w) => println!("NOT-DRG {w}"),
    }
    Ok(())
}

fn gnuplot_fig2a(csv: &Path) -> String {
    let name = csv.file_name().map_or("results.csv".into(), |n| n.to_string_lossy().into_owned());
    format!(
        "# Fraction of indistinguishable node pairs against depth, one curve per n.\n\
         set datafile separator ','\n\
         set xlabel 'layers L'\n\
         set ylabel 'indistinguishable fraction'\n\
         set key top right\n\
         extract(n) = sprintf(\"< awk -F, '$3 ~ /^indistinguishable_fraction;n=%d;/ {{ split($3, a, \\\"L=\\\"); print a[2] \\\",\\\" $4 }}' {name}\", n)\n\
         plot for [n in \"16 32 64 128\"] extract(n+0) using 1:2 with linespoints title 'n='.n\n"
    )
}

fn gnuplot_bars(csv: &Path, title: &str) -> String {
    let name = csv.file_name().map_or("results.csv".into(), |n| n.to_string_lossy().into_owned());
    format!(
        "# {title}\n\
         set datafile separator ','\n\
         set style data histograms\n\
         set style fill solid\n\
         set xtics rotate by -30\n\
         plot '{name}' every ::1 using 4:xtic(3) title '{title}'\n"
    )
}

fn write_stub(out: Option<&Path>, enabled: bool, script: impl FnOnce(&Path) -> String) -> AnyResult<()> {
    if !enabled {
        return Ok(());
    }
    let path = out.ok_or("--gnuplot-stub needs --out")?;
    fs::write(path.with_extension("gp"), script(path))?;
    Ok(())
}

fn data_dir() -> AnyResult<PathBuf> {
    std::env::var_os("DESTRUCT_DATA_DIR")
        .map(PathBuf::from)
        .ok_or_else(|| "DESTRUCT_DATA_DIR is not set".into())
}

fn load_dataset(args: &DataArgs, seed: u64) -> AnyResult<(TaskDataset, Vec<(&'static str, String)>)> {
    let kind = TaskKind::from(args.task);
    let mut desc = vec![("task", kind.to_string()), ("data_seed", seed.to_string())];
    if let Some(n) = args.planted {
        if kind != TaskKind::Triangle {
            return Err("--planted provides a triangle task only".into());
        }
        desc.push(("planted", n.to_string()));
        return Ok((planted_triangle_dataset(n, SplitFractions::default(), seed)?, desc));
    }
    let (loaded, label_path) = match (&args.graph, &args.dataset) {
        (Some(path), _) => {
            desc.push(("graph", path.display().to_string()));
            (read_graph(path)?, args.labels.clone())
        }
        (None, Some(name)) => {
            let dir = data_dir()?.join(name);
            desc.push(("dataset", name.clone()));
            let default_labels = dir.join("labels.txt");
            let labels = args.labels.clone().or(default_labels.exists().then_some(default_labels));
            (read_graph(&dir.join("edges.txt"))?, labels)
        }
        (None, None) => return Err("one of --graph, --dataset or --planted is required".into()),
    };
    let labels = match (&label_path, kind) {
        (Some(p), TaskKind::Node) => {
            let text = fs::read_to_string(p)?;
            Some(parse_labels(&text, loaded.graph.n(), loaded.original_ids.as_deref())?)
        }
        _ => None,
    };
    let ds = build_task_dataset(&loaded.graph, kind, labels.as_deref(), SplitFractions::default(), seed)?;
    Ok((ds, desc))
}

fn resolve_configs(a: &TrainArgs, seed: Option<u64>) -> AnyResult<(ModelConfig, TrainConfig)> {
    let mut model = ModelConfig::default();
    let mut tc = TrainConfig::default();
    if let Some(path) = &a.config {
        let map: BTreeMap<String, String> = parse_key_values(&fs::read_to_string(path)?)?;
        if let Some(k) = map
            .keys()
            .find(|k| !ModelConfig::KEYS.contains(&k.as_str()) && !TrainConfig::KEYS.contains(&k.as_str()))
        {
            return Err(format!("unknown config key {k:?} in {}", path.display()).into());
        }
        model.apply_key_values(&map)?;
        tc.apply_key_values(&map)?;
    }
    if let Some(s) = seed {
        model.seed = s;
        tc.seed = s;
    }
    if let Some(m) = a.model {
        model.kind = m.into();
    }
    macro_rules! set {
        ($target:ident . $field:ident, $value:expr) => {
            if let Some(v) = $value {
                $target.$field = v;
            }
        };
    }
    set!(model.layers, a.layers);
    set!(model.hidden, a.hidden);
    set!(model.dropout, a.dropout);
    set!(model.d_max, a.d_max);
    set!(model.d_rw, a.d_rw);
    set!(model.prop_depth, a.prop_depth);
    set!(model.damping, a.damping);
    set!(
        model.agg,
        a.agg.map(|x| match x {
            AggArg::Gcn => Aggregation::Gcn,
            AggArg::Gin => Aggregation::Gin,
        })
    );
    set!(
        model.readout,
        a.readout.map(|x| match x {
            ReadoutArg::Diff => Readout::Difference,
            ReadoutArg::SumDiff => Readout::SumDifference,
        })
    );
    set!(
        tc.optimizer,
        a.optimizer.map(|x| match x {
            OptimizerArg::Sgd => Optimizer::Sgd,
            OptimizerArg::Adam => Optimizer::Adam,
        })
    );
    set!(tc.lr, a.lr);
    set!(tc.batch_size, a.batch_size);
    set!(tc.max_epochs, a.max_epochs);
    set!(tc.patience, a.patience);
    if a.no_val_select {
        tc.select_on_validation = false;
    }
    model.validate()?;
    tc.validate()?;
    Ok((model, tc))
}

fn metric_rows(experiment: &str, hash: &str, prefix: &str, values: &[(&str, Vec<f64>)]) -> Vec<ResultRow> {
    values
        .iter()
        .filter(|(_, v)| !v.is_empty())
        .map(|(name, v)| {
            let (mean, ci) = mean_ci95(v);
            ResultRow {
                experiment: experiment.into(),
                config_hash: hash.into(),
                metric: format!("{prefix}{name}"),
                value: mean,
                ci95: ci,
            }
        })
        .collect()
}

fn run_train(a: &TrainArgs, seed: Option<u64>, stub: bool) -> AnyResult<()> {
    let (model, tc) = resolve_configs(a, seed)?;
    if a.seeds == 0 {
        return Err("--seeds must be at least 1".into());
    }
    let (ds, desc) = load_dataset(&a.data, seed.unwrap_or(model.seed))?;
    let data = prepare(&ds, &model)?;
    let mut pairs = model.to_key_values();
    pairs.extend(tc.to_key_values());
    pairs.extend(desc);
    pairs.push(("seeds", a.seeds.to_string()));
    let hash = config_hash(pairs.iter().map(|(k, v)| (*k, v.clone())));
    let experiment = format!("train-{}-{}", ds.kind, model.kind);
    let (mut aucs, mut accs, mut losses, mut epochs) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut rows = Vec::new();
    for i in 0..a.seeds as u64 {
        let mut m = model.clone();
        m.seed = model.seed.wrapping_add(i);
        let mut t = tc.clone();
        t.seed = tc.seed.wrapping_add(i);
        let outcome = train(&m, &data, &t)?;
        let metrics = evaluate(&outcome.params, &data.test)?;
        if i == 0 {
            if let Some(path) = &a.checkpoint {
                save_checkpoint(&outcome.params, path)?;
            }
        }
        if let Some(x) = metrics.auc {
            aucs.push(x);
        }
        accs.push(metrics.accuracy);
        losses.push(metrics.loss);
        epochs.push(outcome.best_epoch as f64);
        rows.push(ResultRow {
            experiment: experiment.clone(),
            config_hash: hash.clone(),
            metric: format!("test_{};run={i}", if metrics.auc.is_some() { "auc" } else { "accuracy" }),
            value: metrics.auc.unwrap_or(metrics.accuracy),
            ci95: None,
        });
    }
    rows.extend(metric_rows(
        &experiment,
        &hash,
        "",
        &[("test_auc", aucs), ("test_accuracy", accs), ("test_loss", losses), ("best_epoch", epochs)],
    ));
    let comments: Vec<String> = pairs.iter().map(|(k, v)| format!("{k}={v}")).collect();
    write_output(a.out.as_deref(), &format_results(&rows, &comments))?;
    write_stub(a.out.as_deref(), stub, |p| gnuplot_bars(p, "test metrics"))
}

fn run_eval(a: &EvalArgs, seed: Option<u64>, stub: bool) -> AnyResult<()> {
    let params: ModelParams = load_checkpoint(&a.checkpoint)?;
    let (ds, desc) = load_dataset(&a.data, seed.unwrap_or(params.config.seed))?;
    let data = prepare(&ds, &params.config)?;
    if data.in_dim != params.in_dim || data.tuple_size != params.tuple_size || data.task != params.task {
        return Err("checkpoint does not match the task's input width, tuple size or label set".into());
    }
    let metrics = evaluate(&params, &data.test)?;
    let mut pairs = params.config.to_key_values();
    pairs.extend(desc);
    let hash = config_hash(pairs.iter().map(|(k, v)| (*k, v.clone())));
    let experiment = format!("eval-{}-{}", ds.kind, params.config.kind);
    let mut values = vec![("test_accuracy", vec![metrics.accuracy]), ("test_loss", vec![metrics.loss])];
    if let Some(x) = metrics.auc {
        values.insert(0, ("test_auc", vec![x]));
    }
    let rows = metric_rows(&experiment, &hash, "", &values);
    let comments: Vec<String> = pairs.iter().map(|(k, v)| format!("{k}={v}")).collect();
    write_output(a.out.as_deref(), &format_results(&rows, &comments))?;
    write_stub(a.out.as_deref(), stub, |p| gnuplot_bars(p, "test metrics"))
}

fn run(cli: Cli) -> AnyResult<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err("--threads must be at least 1".into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    let seed = cli.seed;
    let stub = cli.gnuplot_stub;
    match cli.command {
        Command::De(DeCommand::Compute {
            graph,
            set,
            variant,
            d_max,
            d_rw,
            damping,
            out,
        }) => de_compute(&graph, &set, variant, d_max, d_rw, damping, out.as_deref()),
        Command::Wl(WlCommand::Test { g1, g2, order, s1, s2 }) => {
            wl_test(&g1, &g2, order, s1.as_deref(), s2.as_deref())
        }
        Command::Gen(GenCommand::Regular {
            n,
            r,
            count,
            max_tries,
            out,
        }) => gen_regular(n, r, seed.unwrap_or(0), count, max_tries, out.as_deref()),
        Command::Gen(GenCommand::Drg { name, out }) => {
            let g = match name {
                DrgName::Shrikhande => shrikhande(),
                DrgName::Rook => rooks_4x4(),
            };
            write_output(out.as_deref(), &format_edge_list(&g))
        }
        Command::Drg(DrgCommand::Check { graph }) => drg_check(&graph),
        Command::Exp(ExpCommand::Fig2a {
            ns,
            r,
            node_budget,
            max_layers,
            hidden,
            trials,
            epsilon,
            max_pairs,
            out,
        }) => {
            let cfg = Fig2aConfig {
                ns,
                r,
                node_budget,
                max_layers,
                hidden,
                trials,
                epsilon,
                max_pairs_per_graph: max_pairs,
                seed: seed.unwrap_or(0),
            };
            for &n in &cfg.ns {
                if let Some(w) = theory_regime_warning(n, r) {
                    eprintln!("{w}");
                }
            }
            let rows = fig2a_experiment(&cfg)?;
            let comments: Vec<String> = cfg.to_key_values().iter().map(|(k, v)| format!("{k}={v}")).collect();
            write_output(out.as_deref(), &format_results(&fig2a_results(&cfg, &rows), &comments))?;
            write_stub(out.as_deref(), stub, gnuplot_fig2a)
        }
        Command::Exp(ExpCommand::Drg { draws, out }) => {
            let s = seed.unwrap_or(0);
            let report = drg_experiment(draws, s)?;
            print!("{report}");
            if let Some(path) = out.as_deref() {
                fs::write(path, format_results(&drg_results(&report, draws, s), &[]))?;
            }
            write_stub(out.as_deref(), stub, |p| gnuplot_bars(p, "clause passed (1) or failed (0)"))
        }
        Command::Train(a) => run_train(&a, seed, stub),
        Command::Eval(a) => run_eval(&a, seed, stub),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 1,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
