use destruct::nn::*;
use destruct::pipeline::{ego_instance, full_graph_instance};
use destruct::{apply_permutation, Graph, Permutation, TargetTuple};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KINDS: [ModelKind; 5] = [
    ModelKind::Wlgnn,
    ModelKind::DegnnSpd,
    ModelKind::DegnnLp,
    ModelKind::DeagnnSpd,
    ModelKind::DeagnnPr,
];

struct Draw {
    g: Graph,
    s: TargetTuple,
    config: ModelConfig,
    rng: ChaCha8Rng,
}

fn draw(seed: u64, n: usize, density: f64, kind: usize, size: usize) -> Draw {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < density {
                edges.push((u, v));
            }
        }
    }
    let g = Graph::from_edge_list(&edges, Some(n)).unwrap();
    let nodes = rand::seq::index::sample(&mut rng, n, size.min(n)).into_vec();
    let s = TargetTuple::new(&g, &nodes).unwrap();
    let mut config = ModelConfig::new(KINDS[kind]);
    config.layers = 1 + (seed % 3) as usize;
    config.hidden = 6;
    config.seed = seed;
    config.agg = if seed % 2 == 0 { Aggregation::Gcn } else { Aggregation::Gin };
    config.prop_depth = 1 + (seed % 3) as usize;
    Draw { g, s, config, rng }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn relabeling_leaves_outputs_bitwise_unchanged(
        seed in any::<u64>(),
        n in 2usize..=20,
        density in 0.1f64..0.6,
        kind in 0usize..5,
        size in 1usize..=3,
    ) {
        let Draw { g, s, config, mut rng } = draw(seed, n, density, kind, size);
        let pi = Permutation::random(n, &mut rng);
        let moved = apply_permutation(&g, &pi).unwrap();
        let ps = s.permuted(&pi);
        let a = Instance::new(&g, &s, &config, None).unwrap();
        let b = Instance::new(&moved, &ps, &config, None).unwrap();
        let p = ModelParams::init(&config, Task::Binary, a.feats.cols(), s.len()).unwrap();
        let fa = forward(&p, &a, None).unwrap();
        let fb = forward(&p, &b, None).unwrap();
        prop_assert_eq!(&fa.z, &fb.z);
        for (la, lb) in fa.acts.iter().zip(&fb.acts) {
            for v in 0..n {
                prop_assert_eq!(la.row(v), lb.row(pi.apply(v)));
            }
        }
    }

    #[test]
    fn ego_network_matches_full_graph(
        seed in any::<u64>(),
        n in 2usize..=20,
        density in 0.05f64..0.4,
        kind in 0usize..4,
        size in 1usize..=3,
    ) {
        let Draw { g, s, config, .. } = draw(seed, n, density, kind, size);
        let scale = g.max_degree() as f64;
        let ego = ego_instance(&g, &s, &config, scale).unwrap();
        let full = full_graph_instance(&g, &s, &config, scale).unwrap();
        let p = ModelParams::init(&config, Task::Binary, full.feats.cols(), s.len()).unwrap();
        prop_assert_eq!(forward(&p, &ego, None).unwrap().z, forward(&p, &full, None).unwrap().z);
    }
}

#[test]
fn shrinking_the_radius_breaks_the_match() {
    // A path long enough that one missing hop changes the readout.
    let edges: Vec<_> = (0..7).map(|i| (i, i + 1)).collect();
    let g = Graph::from_edge_list(&edges, None).unwrap();
    let s = TargetTuple::single(&g, 0).unwrap();
    let mut config = ModelConfig::new(ModelKind::DegnnSpd);
    config.layers = 3;
    config.hidden = 8;
    let scale = g.max_degree() as f64;
    let full = full_graph_instance(&g, &s, &config, scale).unwrap();
    let p = ModelParams::init(&config, Task::Binary, full.feats.cols(), 1).unwrap();
    let mut short = config.clone();
    short.layers = 2;
    let truncated = ego_instance(&g, &s, &short, scale).unwrap();
    assert!(truncated.feats.rows() < full.feats.rows());
    let exact = ego_instance(&g, &s, &config, scale).unwrap();
    assert_eq!(forward(&p, &exact, None).unwrap().z, forward(&p, &full, None).unwrap().z);
}
