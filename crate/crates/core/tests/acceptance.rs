//! Acceptance checks, one `PASS`/`FAIL` line per criterion.
//!
//! Failing criteria are reported without failing the run; set
//! `DESTRUCT_ACCEPTANCE_STRICT=1` to turn any `FAIL` into a non-zero exit.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use destruct::catalog::catalog_up_to;
use destruct::encoding::{landing_probabilities, personalized_pagerank, spd_from, walk_counts};
use destruct::generate::{configuration_model_regular, rooks_4x4, shrikhande};
use destruct::io::read_edge_list;
use destruct::nn::*;
use destruct::pipeline::*;
use destruct::wl::{distinguishes, fwl2_refine, wl1_refine};
use destruct::{apply_permutation, Graph, Permutation, TargetTuple};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = destruct::Result<(bool, String)>;

fn report(id: usize, name: &str, limit: Duration, check: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let result = check();
    let took = start.elapsed();
    let (pass, detail) = match result {
        Ok((ok, detail)) => {
            let in_time = took <= limit;
            let timing = if in_time { String::new() } else { format!("; over the {limit:?} budget") };
            (ok && in_time, format!("{detail}{timing}"))
        }
        Err(e) => (false, format!("error: {e}")),
    };
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("{tag} criterion {id} ({name}, {:.1}s): {detail}", took.as_secs_f64());
    pass
}

fn random_graph(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edge_list(&edges, Some(n)).unwrap()
}

fn drg_battery() -> Outcome {
    let r = drg_experiment(100, 0)?;
    let lines: Vec<String> = r.clauses.iter().map(|c| c.to_string()).collect();
    Ok((r.all_pass(), lines.join(" | ")))
}

fn fig2a() -> Outcome {
    let cfg = Fig2aConfig::default();
    let rows = fig2a_experiment(&cfg)?;
    let mut pass = true;
    let mut parts = Vec::new();
    for &n in &cfg.ns {
        let per: Vec<&Fig2aRow> = rows.iter().filter(|r| r.n == n).collect();
        let bound = (0.55 * (n as f64).ln() / 2f64.ln()).ceil() as usize + 1;
        let at_zero = per[0].fraction();
        let deep = per
            .iter()
            .filter(|r| r.layers >= bound)
            .map(|r| r.fraction())
            .fold(0.0, f64::max);
        let rises = per.windows(2).filter(|w| w[1].fraction() > w[0].fraction() + 0.02).count();
        let ok = at_zero >= 0.99 && deep <= 0.01 && rises == 0 && per.iter().any(|r| r.layers >= bound);
        pass &= ok;
        let curve: Vec<String> = per.iter().map(|r| format!("{:.4}", r.fraction())).collect();
        parts.push(format!(
            "n={n} {} L=0 {at_zero:.4}, max over L>={bound} {deep:.4}, automorphic floor {:.4}, curve [{}]",
            if ok { "ok" } else { "out of bounds" },
            per[0].automorphic_fraction(),
            curve.join(" ")
        ));
    }
    Ok((pass, parts.join("; ")))
}

fn configuration_model() -> Outcome {
    let mut simple = 0;
    let mut irregular = 0;
    for seed in 0..1000 {
        let pairing = configuration_model_regular(100, 3, seed)?;
        if pairing.simple {
            simple += 1;
            let g = pairing.into_graph()?;
            if g.n() != 100 || g.is_regular() != Some(3) {
                irregular += 1;
            }
        }
    }
    let frac = simple as f64 / 1000.0;
    Ok((
        (0.08..=0.20).contains(&frac) && irregular == 0,
        format!("simple fraction {frac:.3} (theory {:.3}), {irregular} accepted graphs not 3-regular", (-2f64).exp()),
    ))
}

fn wl_soundness() -> Outcome {
    let levels = catalog_up_to(7)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut false_alarms = 0;
    let mut graphs = 0;
    let mut wl1_merged = 0usize;
    let mut fwl2_merged = 0usize;
    let mut dominance_violations = 0usize;
    for level in &levels {
        let mut by1: BTreeMap<_, usize> = BTreeMap::new();
        let mut by2: BTreeMap<_, usize> = BTreeMap::new();
        let mut joint: BTreeMap<_, usize> = BTreeMap::new();
        for g in level {
            graphs += 1;
            let pi = Permutation::random(g.n(), &mut rng);
            let h = apply_permutation(g, &pi)?;
            for order in [1, 2] {
                if distinguishes(g, &h, order)? {
                    false_alarms += 1;
                }
            }
            let c1 = format!("{:?}", wl1_refine(g, None)?.config());
            let c2 = format!("{:?}", fwl2_refine(g)?.config());
            *by1.entry(c1.clone()).or_default() += 1;
            *by2.entry(c2.clone()).or_default() += 1;
            *joint.entry((c1, c2)).or_default() += 1;
        }
        let merged = |m: &BTreeMap<_, usize>| m.values().map(|&k| k * (k - 1) / 2).sum::<usize>();
        wl1_merged += merged(&by1);
        fwl2_merged += merged(&by2);
        // Each 2-FWL class must sit inside a single 1-WL class.
        dominance_violations += joint.len() - by2.len();
    }
    let c6 = Graph::from_edge_list(&(0..6).map(|i| (i, (i + 1) % 6)).collect::<Vec<_>>(), None)?;
    let k = Graph::from_edge_list(&[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)], None)?;
    let wl1 = distinguishes(&c6, &k, 1)?;
    let wl2 = distinguishes(&c6, &k, 2)?;
    Ok((
        false_alarms == 0 && dominance_violations == 0 && !wl1 && wl2,
        format!(
            "{graphs} classes on <=7 nodes, {false_alarms} isomorphic pairs reported distinguished, \
             non-isomorphic pairs merged: 1-WL {wl1_merged}, 2-FWL {fwl2_merged}; \
             C6 vs 2K3: 1-WL {wl1}, 2-FWL {wl2}"
        ),
    ))
}

/// Column-stochastic random-walk matrix.
fn walk_matrix(g: &Graph) -> Vec<Vec<f64>> {
    let n = g.n();
    let mut w = vec![vec![0.0; n]; n];
    for (u, v) in g.edges() {
        w[u][v] = 1.0 / g.degree(v) as f64;
        w[v][u] = 1.0 / g.degree(u) as f64;
    }
    w
}

fn dense_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] != 0.0 {
                for j in 0..n {
                    out[i][j] += a[i][k] * b[k][j];
                }
            }
        }
    }
    out
}

/// Solves `m x = b` by Gaussian elimination with partial pivoting.
fn dense_solve(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())).unwrap();
        m.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            if f != 0.0 {
                for k in col..n {
                    m[row][k] -= f * m[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| m[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / m[row][row];
    }
    x
}

fn loss_of(p: &ModelParams, inst: &Instance, label: usize) -> destruct::Result<f64> {
    let pass = forward(p, inst, None)?;
    Ok(predict_and_loss(&pass.z, p, label)?.loss)
}

fn gradient_error(p: &ModelParams, inst: &Instance, label: usize) -> destruct::Result<f64> {
    let (_, _, grads) = loss_and_gradients(p, inst, label, None)?;
    let step = 1e-5;
    let mut worst: f64 = 0.0;
    for (t, g) in grads.iter().enumerate() {
        let mut num = vec![0.0; g.as_slice().len()];
        for (i, slot) in num.iter_mut().enumerate() {
            let mut q = p.clone();
            q.tensors[t].as_mut_slice()[i] += step;
            let up = loss_of(&q, inst, label)?;
            q.tensors[t].as_mut_slice()[i] -= 2.0 * step;
            let down = loss_of(&q, inst, label)?;
            *slot = (up - down) / (2.0 * step);
        }
        let diff = g.as_slice().iter().zip(&num).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let nn = num.iter().map(|x| x * x).sum::<f64>().sqrt();
        worst = worst.max(diff / g.norm().max(nn).max(1e-6));
    }
    Ok(worst)
}

const KINDS: [ModelKind; 5] = [
    ModelKind::Wlgnn,
    ModelKind::DegnnSpd,
    ModelKind::DegnnLp,
    ModelKind::DeagnnSpd,
    ModelKind::DeagnnPr,
];

fn numerical_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut lp_err: f64 = 0.0;
    let mut ppr_err: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.gen_range(2..=50);
        let g = random_graph(n, rng.gen_range(0.05..0.5), &mut rng);
        let sources: Vec<usize> = (0..n).filter(|&v| g.degree(v) > 0).collect();
        if sources.is_empty() {
            continue;
        }
        let v = sources[rng.gen_range(0..sources.len())];
        let d_rw = rng.gen_range(1..=6);
        let w = walk_matrix(&g);
        let table = landing_probabilities(&g, v, d_rw)?;
        let mut power = w.clone();
        for k in 0..d_rw {
            for u in 0..n {
                lp_err = lp_err.max((table.row(u)[k] - power[u][v]).abs());
            }
            power = dense_mul(&power, &w);
        }
        let damping = rng.gen_range(0.1..0.95);
        let x = personalized_pagerank(&g, v, damping, 1e-10)?;
        let m: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 } - damping * w[i][j]).collect())
            .collect();
        let e: Vec<f64> = (0..n).map(|i| if i == v { 1.0 } else { 0.0 }).collect();
        let exact = dense_solve(m, e);
        for u in 0..n {
            ppr_err = ppr_err.max((x[u] - exact[u]).abs());
        }
    }
    let mut grad_err: f64 = 0.0;
    for i in 0..50 {
        let g = random_graph(10, 0.35, &mut rng);
        let size = 1 + i % 3;
        let nodes = rand::seq::index::sample(&mut rng, 10, size).into_vec();
        let s = TargetTuple::new(&g, &nodes)?;
        let mut c = ModelConfig::new(KINDS[i % KINDS.len()]);
        c.layers = 1 + i % 3;
        c.hidden = 5;
        c.seed = i as u64;
        c.agg = if (i / 5) % 2 == 0 { Aggregation::Gcn } else { Aggregation::Gin };
        let task = if size == 1 && i % 2 == 0 { Task::Multiclass(3) } else { Task::Binary };
        let inst = Instance::new(&g, &s, &c, None)?;
        let p = ModelParams::init(&c, task, inst.feats.cols(), size)?;
        let label = rng.gen_range(0..task.outputs().max(2));
        grad_err = grad_err.max(gradient_error(&p, &inst, label)?);
    }
    Ok((
        lp_err <= 1e-12 && ppr_err <= 1e-8 && grad_err < 1e-4,
        format!(
            "landing probabilities max |err| {lp_err:.2e}, PageRank max |err| {ppr_err:.2e}, \
             gradients max relative error {grad_err:.2e}"
        ),
    ))
}

fn walk_count_lemma() -> Outcome {
    let mut tables = Vec::new();
    let mut within_class_violations = 0;
    for g in [shrikhande(), rooks_4x4()] {
        let mut table: BTreeMap<(u32, usize), u128> = BTreeMap::new();
        for v in 0..g.n() {
            let spd = spd_from(&g, v)?;
            for len in 1..=8 {
                let counts = walk_counts(&g, v, len)?;
                for u in 0..g.n() {
                    let d = spd.get(u).expect("connected");
                    match table.get(&(d, len)) {
                        Some(&c) if c != counts[u] => within_class_violations += 1,
                        Some(_) => {}
                        None => {
                            table.insert((d, len), counts[u]);
                        }
                    }
                }
            }
        }
        tables.push(table);
    }
    let same = tables[0] == tables[1];
    Ok((
        within_class_violations == 0 && same,
        format!(
            "{within_class_violations} counts differ within an SPD class, {} (SPD, length) entries, tables {}",
            tables[0].len(),
            if same { "identical" } else { "differ" }
        ),
    ))
}

fn mean_auc(ms: &[Metrics]) -> (f64, Option<f64>) {
    let aucs: Vec<f64> = ms.iter().map(|m| m.auc.unwrap_or(f64::NAN)).collect();
    mean_ci95(&aucs)
}

fn task_configs(kind: ModelKind) -> (ModelConfig, TrainConfig) {
    let mut c = ModelConfig::new(kind);
    c.hidden = 20;
    c.layers = 2;
    let tc = TrainConfig {
        optimizer: Optimizer::Adam,
        lr: 1e-2,
        max_epochs: 100,
        ..Default::default()
    };
    (c, tc)
}

fn run_task(ds: &TaskDataset, kind: ModelKind) -> destruct::Result<(f64, String)> {
    let (c, tc) = task_configs(kind);
    let start = Instant::now();
    let ms = train_over_seeds(ds, &c, &tc, 5)?;
    let (mean, ci) = mean_auc(&ms);
    let took = start.elapsed();
    if took > Duration::from_secs(30 * 60) {
        return Err(destruct::Error::Config(format!("{kind} run took {took:?}")));
    }
    Ok((mean, format!("{kind} AUC {mean:.4} ± {:.4} ({:.0}s)", ci.unwrap_or(0.0), took.as_secs_f64())))
}

fn training_targets() -> Outcome {
    let ns_dir = std::env::var_os("DESTRUCT_DATA_DIR").map(|d| PathBuf::from(d).join("ns"));
    if let Some(dir) = ns_dir.filter(|d| d.join("edges.txt").exists()) {
        let g = read_edge_list(&dir.join("edges.txt"))?.graph;
        let link = build_task_dataset(&g, TaskKind::Link, None, SplitFractions::default(), 0)?;
        let (de, de_text) = run_task(&link, ModelKind::DegnnSpd)?;
        let (gcn, gcn_text) = run_task(&link, ModelKind::Wlgnn)?;
        let tri = build_task_dataset(&g, TaskKind::Triangle, None, SplitFractions::default(), 0)?;
        let (de_tri, tri_text) = run_task(&tri, ModelKind::DegnnSpd)?;
        return Ok((
            de >= 0.96 && gcn <= 0.90 && de_tri >= 0.97,
            format!("NS link: {de_text}, {gcn_text}; NS triangle: {tri_text}"),
        ));
    }
    let ds = planted_triangle_dataset(2000, SplitFractions::default(), 0)?;
    let positives = ds.instances.iter().filter(|i| i.label == 1).count();
    let (de, de_text) = run_task(&ds, ModelKind::DegnnSpd)?;
    let (plain, plain_text) = run_task(&ds, ModelKind::Wlgnn)?;
    Ok((
        de >= 0.95 && plain <= 0.65,
        format!(
            "NS data not found under DESTRUCT_DATA_DIR, synthetic fallback on a 3-regular graph \
             with {positives} planted triangles: {de_text}; {plain_text}"
        ),
    ))
}

fn invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut perm_mismatch = 0;
    let mut ego_mismatch = 0;
    for i in 0..200 {
        let n = rng.gen_range(2..=20);
        let g = random_graph(n, rng.gen_range(0.05..0.5), &mut rng);
        let size = rng.gen_range(1..=3usize).min(n);
        let nodes = rand::seq::index::sample(&mut rng, n, size).into_vec();
        let s = TargetTuple::new(&g, &nodes)?;
        let mut c = ModelConfig::new(KINDS[i % KINDS.len()]);
        c.layers = rng.gen_range(1..=3);
        c.hidden = 8;
        c.prop_depth = rng.gen_range(1..=3);
        c.seed = i as u64;
        c.agg = if rng.gen::<bool>() { Aggregation::Gcn } else { Aggregation::Gin };
        let pi = Permutation::random(n, &mut rng);
        let moved = apply_permutation(&g, &pi)?;
        let a = Instance::new(&g, &s, &c, None)?;
        let b = Instance::new(&moved, &s.permuted(&pi), &c, None)?;
        let p = ModelParams::init(&c, Task::Binary, a.feats.cols(), size)?;
        let (fa, fb) = (forward(&p, &a, None)?, forward(&p, &b, None)?);
        let rows_match = fa
            .acts
            .iter()
            .zip(&fb.acts)
            .all(|(x, y)| (0..n).all(|v| x.row(v) == y.row(pi.apply(v))));
        if fa.z != fb.z || !rows_match {
            perm_mismatch += 1;
        }

        let scale = g.max_degree() as f64;
        let full = full_graph_instance(&g, &s, &c, scale)?;
        let ego = if c.kind == ModelKind::DeagnnPr {
            // PageRank weights reach the whole component.
            let masked = masked_with_degrees(&g, &s, scale)?;
            let e = extract_ego(&masked, &s, n)?;
            Instance::new(&e.graph, &e.targets, &c, None)?
        } else {
            ego_instance(&g, &s, &c, scale)?
        };
        let p = ModelParams::init(&c, Task::Binary, full.feats.cols(), size)?;
        if forward(&p, &ego, None)?.z != forward(&p, &full, None)?.z {
            ego_mismatch += 1;
        }
    }
    Ok((
        perm_mismatch == 0 && ego_mismatch == 0,
        format!("200 draws: {perm_mismatch} relabeling mismatches, {ego_mismatch} ego-network mismatches"),
    ))
}

fn main() {
    let min = |m: u64| Duration::from_secs(60 * m);
    let results = [
        report(1, "distance-regular battery", min(1), drg_battery),
        report(2, "indistinguishable pairs on random regular graphs", min(10), fig2a),
        report(3, "configuration model", min(1), configuration_model),
        report(4, "WL oracle soundness", min(5), wl_soundness),
        report(5, "numerical oracles", min(30), numerical_oracles),
        report(6, "walk counts by distance class", min(1), walk_count_lemma),
        report(7, "training targets", min(60), training_targets),
        report(8, "invariance suite", min(10), invariance),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("{passed}/{} criteria pass", results.len());
    if passed < results.len() && std::env::var_os("DESTRUCT_ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
