//! Random regular graphs and the distance-regular corpus.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::encoding::{spd_from, UNREACHABLE};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// One pairing of the configuration model.
#[derive(Debug, Clone)]
pub struct Pairing {
    pub n: usize,
    /// Pairs in stub order; may contain loops and repeated pairs.
    pub edges: Vec<(usize, usize)>,
    pub simple: bool,
}

impl Pairing {
    pub fn into_graph(self) -> Result<Graph> {
        Graph::from_edge_list(&self.edges, Some(self.n))
    }
}

/// Independent RNG stream for (seed, stream).
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn check_params(n: usize, r: usize) -> Result<()> {
    if r == 0 || r >= n {
        return Err(Error::InvalidParameter(format!(
            "degree {r} impossible on {n} nodes"
        )));
    }
    if (n * r) % 2 == 1 {
        return Err(Error::OddStubCount { n, r });
    }
    Ok(())
}

fn pair_stubs(n: usize, r: usize, rng: &mut ChaCha8Rng) -> Pairing {
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(r)).collect();
    stubs.shuffle(rng);
    let mut edges: Vec<(usize, usize)> = stubs.chunks_exact(2).map(|p| (p[0], p[1])).collect();
    let mut seen: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    seen.sort_unstable();
    let loops = seen.iter().any(|&(a, b)| a == b);
    let multi = seen.windows(2).any(|w| w[0] == w[1]);
    edges.shrink_to_fit();
    Pairing {
        n,
        edges,
        simple: !loops && !multi,
    }
}

/// Uniform random pairing of `n·r` stubs.
pub fn configuration_model_regular(n: usize, r: usize, seed: u64) -> Result<Pairing> {
    check_params(n, r)?;
    Ok(pair_stubs(n, r, &mut stream_rng(seed, 0)))
}

/// Advisory message when `r` lies outside `r < sqrt(2 ln n)`.
pub fn theory_regime_warning(n: usize, r: usize) -> Option<String> {
    let bound = (2.0 * (n as f64).ln()).sqrt();
    ((r as f64) >= bound).then(|| {
        format!("warning: r={r} is not below sqrt(2 ln n)={bound:.3} for n={n}")
    })
}

/// Rejection-samples the configuration model until the pairing is simple,
/// which is uniform over simple labeled r-regular graphs.
pub fn sample_simple_regular(n: usize, r: usize, seed: u64, max_tries: usize) -> Result<Graph> {
    check_params(n, r)?;
    let mut rng = stream_rng(seed, 0);
    for _ in 0..max_tries {
        let p = pair_stubs(n, r, &mut rng);
        if p.simple {
            return p.into_graph();
        }
    }
    Err(Error::SamplingExhausted {
        n,
        r,
        tries: max_tries,
    })
}

/// Cayley graph on Z4×Z4 with connection set ±(1,0), ±(0,1), ±(1,1).
pub fn shrikhande() -> Graph {
    let id = |i: usize, j: usize| (i % 4) * 4 + (j % 4);
    let mut edges = Vec::new();
    for i in 0..4 {
        for j in 0..4 {
            for (di, dj) in [(1, 0), (0, 1), (1, 1)] {
                edges.push((id(i, j), id(i + di, j + dj)));
            }
        }
    }
    Graph::from_edge_list(&edges, Some(16)).expect("valid construction")
}

/// Rook moves on a 4×4 board: same row or same column.
pub fn rooks_4x4() -> Graph {
    let mut edges = Vec::new();
    for a in 0..16 {
        for b in a + 1..16 {
            if a / 4 == b / 4 || a % 4 == b % 4 {
                edges.push((a, b));
            }
        }
    }
    Graph::from_edge_list(&edges, Some(16)).expect("valid construction")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionArray {
    /// `b_0 … b_{Δ-1}`
    pub b: Vec<usize>,
    /// `c_1 … c_Δ`
    pub c: Vec<usize>,
}

impl IntersectionArray {
    pub fn diameter(&self) -> usize {
        self.c.len()
    }
}

impl fmt::Display for IntersectionArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "{{{};{}}}", join(&self.b), join(&self.c))
    }
}

/// Two ordered pairs at the same distance whose neighbor counts differ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NotDrgWitness {
    pub first: (usize, usize),
    pub second: (usize, usize),
    pub distance: usize,
}

impl fmt::Display for NotDrgWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "NOT-DRG: pairs ({},{}) and ({},{}) at distance {} have different neighbor counts",
            self.first.0, self.first.1, self.second.0, self.second.1, self.distance
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DrgCheck {
    Drg(IntersectionArray),
    NotDrg(NotDrgWitness),
}

/// For each ordered pair `(v, u)` at distance `j`, counts neighbors of `v` at
/// distance `j+1` and `j-1` from `u`, and the degree of `v`. These must be
/// constant per `j` for a distance-regular graph.
pub fn intersection_array(g: &Graph) -> Result<DrgCheck> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = g.n();
    // Per distance j: (b_j, c_j, degree) and the pair that fixed them.
    let mut classes: Vec<Option<((usize, usize, usize), (usize, usize))>> = Vec::new();
    for u in 0..n {
        let table = spd_from(g, u)?;
        let d = table.raw();
        for v in 0..n {
            debug_assert_ne!(d[v], UNREACHABLE);
            let j = d[v] as usize;
            let mut b = 0;
            let mut c = 0;
            for &w in g.neighbors(v) {
                let dw = d[w] as usize;
                if dw == j + 1 {
                    b += 1;
                } else if dw + 1 == j {
                    c += 1;
                }
            }
            let key = (b, c, g.degree(v));
            if classes.len() <= j {
                classes.resize(j + 1, None);
            }
            match classes[j] {
                None => classes[j] = Some((key, (v, u))),
                Some((k, first)) if k != key => {
                    return Ok(DrgCheck::NotDrg(NotDrgWitness {
                        first,
                        second: (v, u),
                        distance: j,
                    }))
                }
                _ => {}
            }
        }
    }
    let keys: Vec<(usize, usize, usize)> = classes
        .into_iter()
        .map(|c| c.expect("every distance up to the diameter occurs").0)
        .collect();
    let diameter = keys.len() - 1;
    Ok(DrgCheck::Drg(IntersectionArray {
        b: keys[..diameter].iter().map(|k| k.0).collect(),
        c: keys[1..].iter().map(|k| k.1).collect(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::brute_force_isomorphic;

    fn array(b: &[usize], c: &[usize]) -> DrgCheck {
        DrgCheck::Drg(IntersectionArray {
            b: b.to_vec(),
            c: c.to_vec(),
        })
    }

    #[test]
    fn configuration_model_basics() {
        let p = configuration_model_regular(2, 1, 5).unwrap();
        assert!(p.simple);
        assert_eq!(p.edges.len(), 1);
        assert!(matches!(
            configuration_model_regular(5, 3, 0),
            Err(Error::OddStubCount { .. })
        ));
        for seed in 0..50 {
            let p = configuration_model_regular(20, 3, seed).unwrap();
            let mut deg = vec![0; 20];
            for (a, b) in p.edges {
                deg[a] += 1;
                deg[b] += 1;
            }
            assert!(deg.iter().all(|&d| d == 3));
        }
    }

    #[test]
    fn simple_fraction_near_exp_minus_two() {
        let simple = (0..1000)
            .filter(|&s| configuration_model_regular(100, 3, s).unwrap().simple)
            .count();
        let frac = simple as f64 / 1000.0;
        assert!((0.08..=0.20).contains(&frac), "{frac}");
    }

    #[test]
    fn small_regular_samples() {
        let k4 = Graph::from_edge_list(&[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], None).unwrap();
        let g = sample_simple_regular(4, 3, 1, 1000).unwrap();
        assert_eq!(g, k4);

        let k33 = Graph::from_edge_list(
            &[(0, 3), (0, 4), (0, 5), (1, 3), (1, 4), (1, 5), (2, 3), (2, 4), (2, 5)],
            None,
        )
        .unwrap();
        let prism = Graph::from_edge_list(
            &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (0, 3), (1, 4), (2, 5)],
            None,
        )
        .unwrap();
        // Labeled counts are 720/72 = 10 and 720/12 = 60, so K3,3 has mass 1/7.
        let trials = 1400;
        let mut k = 0;
        for seed in 0..trials {
            let g = sample_simple_regular(6, 3, seed, 10_000).unwrap();
            assert_eq!(g.is_regular(), Some(3));
            let is_k33 = brute_force_isomorphic(&g, &k33, None, None).unwrap();
            assert!(is_k33 || brute_force_isomorphic(&g, &prism, None, None).unwrap());
            k += is_k33 as usize;
        }
        let expected = [trials as f64 / 7.0, trials as f64 * 6.0 / 7.0];
        let observed = [k as f64, (trials - k as u64) as f64];
        let chi2: f64 = observed
            .iter()
            .zip(expected)
            .map(|(o, e)| (o - e) * (o - e) / e)
            .sum();
        // 1 degree of freedom, p = 0.001.
        assert!(chi2 < 10.83, "chi2 = {chi2}");
    }

    #[test]
    fn sampling_errors() {
        assert!(matches!(
            sample_simple_regular(30, 5, 0, 0),
            Err(Error::SamplingExhausted { .. })
        ));
        assert!(sample_simple_regular(3, 3, 0, 10).is_err());
    }

    #[test]
    fn corpus_graphs() {
        let s = shrikhande();
        let r = rooks_4x4();
        for g in [&s, &r] {
            assert_eq!(g.n(), 16);
            assert_eq!(g.num_edges(), 48);
            assert_eq!(g.is_regular(), Some(6));
            assert_eq!(intersection_array(g).unwrap(), array(&[6, 3], &[1, 2]));
        }
        assert_eq!(s.clique_number(), 3);
        assert_eq!(r.clique_number(), 4);
    }

    #[test]
    fn intersection_array_examples() {
        let c6: Vec<_> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
        let c6 = Graph::from_edge_list(&c6, None).unwrap();
        assert_eq!(intersection_array(&c6).unwrap(), array(&[2, 1, 1], &[1, 1, 2]));
        let k4 = Graph::from_edge_list(&[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], None).unwrap();
        assert_eq!(intersection_array(&k4).unwrap(), array(&[3], &[1]));
        let path = Graph::from_edge_list(&[(0, 1), (1, 2)], None).unwrap();
        assert!(matches!(intersection_array(&path).unwrap(), DrgCheck::NotDrg(_)));
        let split = Graph::from_edge_list(&[(0, 1), (2, 3)], None).unwrap();
        assert!(matches!(intersection_array(&split), Err(Error::Disconnected)));
    }

    #[test]
    fn drg_counts_are_consistent() {
        for g in [shrikhande(), rooks_4x4()] {
            if let DrgCheck::Drg(a) = intersection_array(&g).unwrap() {
                let k = a.b[0];
                for j in 1..a.diameter() {
                    assert!(a.b[j] + a.c[j - 1] <= k);
                }
                assert_eq!(a.c[0], 1);
            }
        }
        assert_eq!(format!("{}", array(&[6, 3], &[1, 2]).clone_array()), "{6,3;1,2}");
    }

    impl DrgCheck {
        fn clone_array(&self) -> IntersectionArray {
            match self {
                DrgCheck::Drg(a) => a.clone(),
                DrgCheck::NotDrg(_) => panic!(),
            }
        }
    }

    #[test]
    fn warning_is_advisory() {
        assert!(theory_regime_warning(100, 3).is_none());
        assert!(theory_regime_warning(10, 3).is_some());
    }
}
