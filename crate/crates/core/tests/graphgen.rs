use bootperc::graphgen::{
    clamped_pair_count, edge_probability, induced_subgraph, sample_chung_lu,
    sample_chung_lu_bernoulli, sample_coupled_kernel, sample_gnp,
};
use bootperc::{build_weights, Graph, RngStream, WeightSequence};
use proptest::prelude::*;

// 0.999 quantile of chi-square with 63 degrees of freedom.
const CHI2_63_999: f64 = 103.442;

fn pattern(g: &Graph) -> usize {
    let mut bits = 0;
    let mut k = 0;
    for i in 0..4 {
        for j in i + 1..4 {
            if g.has_edge(i, j) {
                bits |= 1 << k;
            }
            k += 1;
        }
    }
    bits
}

fn chi_square_n4(sampler: fn(&WeightSequence, &mut RngStream) -> Graph, master: u64) -> f64 {
    let ws = build_weights(4, 2.5, 2.0 / 3.0, 1.0).unwrap();
    let mut probs = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            probs.push(edge_probability(&ws, i, j).unwrap());
        }
    }
    let samples = 100_000;
    let mut counts = [0usize; 64];
    for s in 0..samples {
        let mut rng = RngStream::new(master, s);
        counts[pattern(&sampler(&ws, &mut rng))] += 1;
    }
    (0..64)
        .map(|bits| {
            let p: f64 = probs
                .iter()
                .enumerate()
                .map(|(k, &p)| if bits >> k & 1 == 1 { p } else { 1.0 - p })
                .product();
            let e = p * samples as f64;
            (counts[bits] as f64 - e).powi(2) / e
        })
        .sum()
}

#[test]
fn edge_patterns_match_product_law() {
    let fast = chi_square_n4(sample_chung_lu, 11);
    let oracle = chi_square_n4(sample_chung_lu_bernoulli, 12);
    assert!(fast < CHI2_63_999, "fast sampler chi2 = {fast}");
    assert!(oracle < CHI2_63_999, "pair sampler chi2 = {oracle}");
}

#[test]
fn expected_degree_without_clamping() {
    let n = 2000;
    let ws = build_weights(n, 2.5, 0.4, 1.0).unwrap();
    assert_eq!(clamped_pair_count(&ws), 0);
    let w = ws.weights();
    let total = ws.total();

    let samples = 2000;
    let mut deg = vec![0u64; n];
    for s in 0..samples {
        let g = sample_chung_lu(&ws, &mut RngStream::new(21, s));
        for (v, d) in deg.iter_mut().enumerate() {
            *d += g.degree(v) as u64;
        }
    }

    let mut within3 = 0;
    for i in 0..n {
        let mean = deg[i] as f64 / samples as f64;
        let expect = w[i] * (total - w[i]) / total;
        let var: f64 = (0..n)
            .filter(|&j| j != i)
            .map(|j| {
                let p = w[i] * w[j] / total;
                p * (1.0 - p)
            })
            .sum();
        let z = (mean - expect).abs() / (var / samples as f64).sqrt();
        // 2000 simultaneous checks: the 3 sigma band admits a few strays.
        assert!(
            z < 5.0,
            "vertex {i}: mean {mean}, expected {expect}, z = {z}"
        );
        if z <= 3.0 {
            within3 += 1;
        }
    }
    assert!(
        within3 as f64 >= 0.99 * n as f64,
        "{within3}/{n} within 3 sigma"
    );
}

#[test]
fn uniform_weights_edge_frequency() {
    let ws = WeightSequence::from_weights(vec![1.0; 3]).unwrap();
    let samples = 30_000;
    let mut hits = [0usize; 3];
    for s in 0..samples {
        let g = sample_chung_lu(&ws, &mut RngStream::new(31, s));
        for (k, (u, v)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
            hits[k] += g.has_edge(u, v) as usize;
        }
    }
    let sigma = (samples as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
    for h in hits {
        assert!(
            (h as f64 - samples as f64 / 3.0).abs() < 3.0 * sigma,
            "{hits:?}"
        );
    }
}

#[test]
fn gnp_mean_edge_count() {
    let samples = 1000;
    let edges: Vec<f64> = (0..samples)
        .map(|s| {
            sample_gnp(100, 0.1, &mut RngStream::new(41, s))
                .unwrap()
                .m() as f64
        })
        .collect();
    let mean = edges.iter().sum::<f64>() / samples as f64;
    let sigma = (4950.0 * 0.1 * 0.9 / samples as f64).sqrt();
    assert!((mean - 495.0).abs() < 3.0 * sigma, "mean {mean}");
}

#[test]
fn coupled_marginal_matches_gnp() {
    let ws = build_weights(1000, 2.5, 2.0 / 3.0, 1.0).unwrap();
    assert_eq!(ws.kernel_size(10.0), 31);
    let p_f = 100.0 / ws.total();
    let samples = 1000;
    let mut coupled = 0usize;
    let mut plain = 0usize;
    for s in 0..samples {
        let ck = sample_coupled_kernel(&ws, 10.0, &mut RngStream::new(51, s)).unwrap();
        assert_eq!(ck.p_f, p_f);
        coupled += ck.gnp.m();
        plain += sample_gnp(31, p_f, &mut RngStream::new(52, s)).unwrap().m();
    }
    let pairs = 465.0;
    let sigma = (pairs * p_f * (1.0 - p_f) / samples as f64).sqrt();
    for total in [coupled, plain] {
        let mean = total as f64 / samples as f64;
        assert!(
            (mean - pairs * p_f).abs() < 3.0 * sigma,
            "mean {mean} vs {}",
            pairs * p_f
        );
    }
}

#[test]
fn sampling_is_deterministic() {
    let ws = build_weights(5000, 2.3, 0.6, 1.0).unwrap();
    let a = sample_chung_lu(&ws, &mut RngStream::new(3, 9));
    let b = sample_chung_lu(&ws, &mut RngStream::new(3, 9));
    assert_eq!(a, b);
    assert_ne!(a, sample_chung_lu(&ws, &mut RngStream::new(3, 10)));
    let g1 = sample_gnp(3000, 0.002, &mut RngStream::new(3, 9)).unwrap();
    assert_eq!(
        g1,
        sample_gnp(3000, 0.002, &mut RngStream::new(3, 9)).unwrap()
    );
}

#[test]
fn fast_and_pair_samplers_agree_on_edge_count() {
    let ws = build_weights(800, 2.5, 2.0 / 3.0, 1.0).unwrap();
    let samples = 400;
    let mean = |f: fn(&WeightSequence, &mut RngStream) -> Graph, m: u64| {
        (0..samples)
            .map(|s| f(&ws, &mut RngStream::new(m, s)).m() as f64)
            .sum::<f64>()
            / samples as f64
    };
    let a = mean(sample_chung_lu, 61);
    let b = mean(sample_chung_lu_bernoulli, 62);
    let expect = bootperc::graphgen::expected_edges(&ws);
    // Edge count variance is at most its mean.
    let sigma = (expect / samples as f64).sqrt();
    assert!((a - expect).abs() < 4.0 * sigma, "fast {a} vs {expect}");
    assert!((b - expect).abs() < 4.0 * sigma, "pair {b} vs {expect}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn samplers_produce_valid_graphs(
        n in 1usize..400,
        beta in 2.05f64..2.95,
        zeta_frac in 0.1f64..1.0,
        seed in any::<u64>(),
    ) {
        let ws = build_weights(n, beta, zeta_frac / (beta - 1.0), 1.0).unwrap();
        let mut rng = RngStream::new(seed, 0);
        let g = sample_chung_lu(&ws, &mut rng);
        prop_assert_eq!(g.n(), n);
        g.validate().unwrap();
        sample_chung_lu_bernoulli(&ws, &mut rng).validate().unwrap();
        let p = rng.uniform();
        sample_gnp(n, p, &mut rng).unwrap().validate().unwrap();
    }

    #[test]
    fn coupling_is_contained(
        n in 50usize..2000,
        beta in 2.05f64..2.95,
        q in 0.0f64..1.0,
        seed in any::<u64>(),
    ) {
        let ws = build_weights(n, beta, 1.0 / (beta - 1.0), 1.0).unwrap();
        let f = ws.max_weight().powf(q);
        let ck = sample_coupled_kernel(&ws, f, &mut RngStream::new(seed, 1)).unwrap();
        ck.gnp.validate().unwrap();
        ck.cl_kernel.validate().unwrap();
        prop_assert_eq!(ck.gnp.n(), ws.kernel_size(f));
        for (u, v) in ck.gnp.edges() {
            prop_assert!(ck.cl_kernel.has_edge(u, v));
        }
    }

    #[test]
    fn induced_subgraph_keeps_exactly_internal_edges(
        edges in prop::collection::vec((0usize..30, 0usize..30), 0..120),
        keep in prop::collection::btree_set(0usize..30, 0..30),
    ) {
        let g = Graph::from_edges(30, edges.into_iter().filter(|(u, v)| u != v)).unwrap();
        let s: Vec<usize> = keep.into_iter().collect();
        let h = induced_subgraph(&g, &s).unwrap();
        h.validate().unwrap();
        prop_assert_eq!(h.n(), s.len());
        for a in 0..s.len() {
            for b in a + 1..s.len() {
                prop_assert_eq!(h.has_edge(a, b), g.has_edge(s[a], s[b]));
            }
        }
    }

    #[test]
    fn edge_list_round_trip(
        edges in prop::collection::vec((0usize..40, 0usize..40), 0..200),
    ) {
        let g = Graph::from_edges(40, edges.into_iter().filter(|(u, v)| u != v)).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        prop_assert_eq!(Graph::read_edge_list(&buf[..]).unwrap(), g);
    }
}
