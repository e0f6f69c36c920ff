//! Samplers for `CL(w)` and `G(N, p)`, and the coupling between `G(N_f, p_f)`
//! and the kernel-induced subgraph `CL[Ker_f]`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::RngStream;
use crate::weights::WeightSequence;

/// `p_ij = min(w_i w_j / W, 1)`.
pub fn edge_probability(ws: &WeightSequence, i: usize, j: usize) -> Result<f64> {
    let n = ws.n();
    for v in [i, j] {
        if v >= n {
            return Err(Error::VertexOutOfRange { vertex: v, n });
        }
    }
    if i == j {
        return Err(Error::invalid(format!(
            "no edge probability for the self-pair ({i}, {i})"
        )));
    }
    Ok(pair_probability(ws.weight(i), ws.weight(j), ws.total()))
}

#[inline]
fn pair_probability(wi: f64, wj: f64, total: f64) -> f64 {
    (wi * wj / total).min(1.0)
}

/// Number of pairs `i < j` whose probability is clamped to 1.
pub fn clamped_pair_count(ws: &WeightSequence) -> u64 {
    let w = ws.weights();
    let total = ws.total();
    let mut count = 0u64;
    for (i, &wi) in w.iter().enumerate() {
        // w is nonincreasing, so the partners with wi * wj >= W form a prefix.
        let reach = w.partition_point(|&wj| wi * wj >= total);
        if reach <= i + 1 {
            break;
        }
        count += (reach - i - 1) as u64;
    }
    count
}

/// Geometric skip: number of failures before the next success at rate `p`,
/// given `log_q = ln(1 - p)`.
#[inline]
fn skip(rng: &mut RngStream, log_q: f64) -> usize {
    let s = (rng.uniform_open0().ln() / log_q).floor();
    if s >= usize::MAX as f64 {
        usize::MAX
    } else {
        s as usize
    }
}

/// Samples `CL(w)` in expected `O(n + m)` time.
///
/// For each `i`, candidates `j > i` are visited with geometric jumps at the
/// current upper bound `p_{i,j}` (weights are nonincreasing in `j`) and accepted
/// with probability `p_ij / bound`.
pub fn sample_chung_lu(ws: &WeightSequence, rng: &mut RngStream) -> Graph {
    let n = ws.n();
    let w = ws.weights();
    let total = ws.total();
    let mut pairs = Vec::with_capacity((total / 2.0) as usize + 16);
    for i in 0..n.saturating_sub(1) {
        let mut j = i + 1;
        let mut p = pair_probability(w[i], w[j], total);
        while j < n && p > 0.0 {
            if p < 1.0 {
                j = j.saturating_add(skip(rng, (-p).ln_1p()));
            }
            if j < n {
                let q = pair_probability(w[i], w[j], total);
                if rng.uniform() < q / p {
                    pairs.push((i, j));
                }
                p = q;
                j += 1;
            }
        }
    }
    Graph::from_sorted_pairs(n, pairs)
}

/// Index of pair `(i, j)`, `i < j < n`, in row-major upper-triangular order.
#[inline]
fn pair_index(i: usize, j: usize, n: usize) -> u64 {
    let (i, j, n) = (i as u64, j as u64, n as u64);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Samples `CL(w)` with one uniform per pair, `O(n^2)`. Reference sampler for
/// small instances.
pub fn sample_chung_lu_bernoulli(ws: &WeightSequence, rng: &mut RngStream) -> Graph {
    let n = ws.n();
    let w = ws.weights();
    let total = ws.total();
    let base = rng.position();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let u = rng.uniform_at(base + pair_index(i, j, n));
            if u < pair_probability(w[i], w[j], total) {
                pairs.push((i, j));
            }
        }
    }
    rng.advance((n as u64) * (n as u64).saturating_sub(1) / 2);
    Graph::from_sorted_pairs(n, pairs)
}

/// Samples `G(N, p)` by geometric skipping over the lower triangle.
pub fn sample_gnp(n: usize, p: f64, rng: &mut RngStream) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("p must lie in [0,1], got {p}")));
    }
    if p == 0.0 || n < 2 {
        return Ok(Graph::empty(n));
    }
    if p == 1.0 {
        return Ok(Graph::complete(n));
    }
    let log_q = (-p).ln_1p();
    let mut pairs = Vec::new();
    // Row v holds candidates w < v; `w` walks across rows.
    let mut v = 1usize;
    let mut w = 0usize;
    let mut first = true;
    while v < n {
        let jump = skip(rng, log_q);
        w = if first {
            first = false;
            jump
        } else {
            w.saturating_add(1).saturating_add(jump)
        };
        while w >= v && v < n {
            w -= v;
            v += 1;
        }
        if v < n {
            pairs.push((w, v));
        }
    }
    pairs.sort_unstable();
    Ok(Graph::from_sorted_pairs(n, pairs))
}

/// A jointly sampled pair with `edges(gnp) ⊆ edges(cl_kernel)`.
#[derive(Clone, Debug)]
pub struct CoupledKernel {
    pub gnp: Graph,
    pub cl_kernel: Graph,
    /// `min(f^2 / W, 1)`.
    pub p_f: f64,
}

/// Couples `G(N_f, p_f)` with `CL[Ker_f]` through one shared uniform per pair.
/// Kernel vertices keep their order, so vertex `k` of both graphs is vertex `k`
/// of the full sequence.
pub fn sample_coupled_kernel(
    ws: &WeightSequence,
    f: f64,
    rng: &mut RngStream,
) -> Result<CoupledKernel> {
    let nf = ws.kernel_size(f);
    if nf == 0 {
        return Err(Error::EmptyKernel(f));
    }
    let w = ws.weights();
    let total = ws.total();
    let p_f = (f * f / total).min(1.0);
    let base = rng.position();
    let mut gnp = Vec::new();
    let mut cl = Vec::new();
    for i in 0..nf {
        for j in i + 1..nf {
            let u = rng.uniform_at(base + pair_index(i, j, nf));
            if u < pair_probability(w[i], w[j], total) {
                cl.push((i, j));
            }
            if u < p_f {
                gnp.push((i, j));
            }
        }
    }
    rng.advance((nf as u64) * (nf as u64 - 1) / 2);
    Ok(CoupledKernel {
        gnp: Graph::from_sorted_pairs(nf, gnp),
        cl_kernel: Graph::from_sorted_pairs(nf, cl),
        p_f,
    })
}

/// Subgraph induced by `s`, relabelled `0..|s|` in increasing vertex order.
pub fn induced_subgraph(g: &Graph, s: &[usize]) -> Result<Graph> {
    let n = g.n();
    let mut keep: Vec<usize> = s.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if let Some(&v) = keep.last() {
        if v >= n {
            return Err(Error::VertexOutOfRange { vertex: v, n });
        }
    }
    let mut label = vec![usize::MAX; n];
    for (new, &old) in keep.iter().enumerate() {
        label[old] = new;
    }
    let mut pairs = Vec::new();
    for (new_u, &old_u) in keep.iter().enumerate() {
        for &old_v in g.neighbors(old_u) {
            let new_v = label[old_v];
            if new_v != usize::MAX && new_v > new_u {
                pairs.push((new_u, new_v));
            }
        }
    }
    Ok(Graph::from_sorted_pairs(keep.len(), pairs))
}

/// Summary printed by the CLI after sampling.
#[derive(Clone, Debug, Serialize)]
pub struct SampleStats {
    pub n: usize,
    pub m: usize,
    pub clamped_pairs: u64,
    pub expected_edges: f64,
}

/// Expected edge count `sum_{i<j} p_ij` in `O(n log n)` plus the clamped prefix.
pub fn expected_edges(ws: &WeightSequence) -> f64 {
    let w = ws.weights();
    let total = ws.total();
    // suffix[k] = sum_{j >= k} w_j
    let mut suffix = vec![0.0; w.len() + 1];
    for k in (0..w.len()).rev() {
        suffix[k] = suffix[k + 1] + w[k];
    }
    let mut e = 0.0;
    for (i, &wi) in w.iter().enumerate() {
        let reach = w.partition_point(|&wj| wi * wj >= total).max(i + 1);
        e += (reach - i - 1) as f64;
        e += wi * suffix[reach] / total;
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::build_weights;

    #[test]
    fn edge_probability_examples() {
        let mut w = vec![100.0, 100.0];
        w.extend(std::iter::repeat_n(1.0, 2800));
        let ws = WeightSequence::from_weights(w).unwrap();
        assert_eq!(ws.total(), 3000.0);
        assert_eq!(edge_probability(&ws, 0, 1).unwrap(), 1.0);
        assert_eq!(edge_probability(&ws, 5, 6).unwrap(), 1.0 / 3000.0);
        assert!(edge_probability(&ws, 3, 3).is_err());
        assert!(edge_probability(&ws, 0, 5000).is_err());
    }

    #[test]
    fn forced_edge() {
        let ws = WeightSequence::from_weights(vec![2.0, 2.0]).unwrap();
        for s in 0..20 {
            let g = sample_chung_lu(&ws, &mut RngStream::new(s, 0));
            assert_eq!(g.m(), 1);
        }
    }

    #[test]
    fn clamped_pairs_counted() {
        let ws = WeightSequence::from_weights(vec![10.0, 10.0, 5.0, 1.0]).unwrap();
        // W = 26; products >= 26: (0,1)=100, (0,2)=50, (1,2)=50
        assert_eq!(clamped_pair_count(&ws), 3);
        let brute = (0..4)
            .flat_map(|i| (i + 1..4).map(move |j| (i, j)))
            .filter(|&(i, j)| ws.weight(i) * ws.weight(j) >= ws.total())
            .count() as u64;
        assert_eq!(brute, 3);
    }

    #[test]
    fn expected_edges_matches_pair_sum() {
        let ws = build_weights(300, 2.5, 2.0 / 3.0, 1.0).unwrap();
        let brute: f64 = (0..300)
            .flat_map(|i| (i + 1..300).map(move |j| (i, j)))
            .map(|(i, j)| edge_probability(&ws, i, j).unwrap())
            .sum();
        assert!((expected_edges(&ws) - brute).abs() < 1e-9 * brute);
    }

    #[test]
    fn pair_index_is_dense() {
        let n = 7;
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                assert_eq!(pair_index(i, j, n), k);
                k += 1;
            }
        }
    }

    #[test]
    fn gnp_extremes() {
        let mut rng = RngStream::new(0, 0);
        assert_eq!(sample_gnp(50, 0.0, &mut rng).unwrap().m(), 0);
        assert_eq!(sample_gnp(50, 1.0, &mut rng).unwrap().m(), 50 * 49 / 2);
        assert!(sample_gnp(50, 1.5, &mut rng).is_err());
        assert!(sample_gnp(50, -0.1, &mut rng).is_err());
        assert_eq!(sample_gnp(1, 0.5, &mut rng).unwrap().m(), 0);
    }

    #[test]
    fn induced_examples() {
        let tri = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(induced_subgraph(&tri, &[0, 1, 2]).unwrap(), tri);
        let e = induced_subgraph(&tri, &[]).unwrap();
        assert_eq!((e.n(), e.m()), (0, 0));
        let pair = induced_subgraph(&tri, &[2, 0]).unwrap();
        assert_eq!((pair.n(), pair.m()), (2, 1));
        assert!(induced_subgraph(&tri, &[3]).is_err());
    }

    #[test]
    fn coupled_equal_weights_coincide() {
        let ws = WeightSequence::from_weights(vec![5.0; 40]).unwrap();
        let ck = sample_coupled_kernel(&ws, 5.0, &mut RngStream::new(3, 1)).unwrap();
        assert_eq!(ck.gnp, ck.cl_kernel);
        assert!(ck.gnp.m() > 0);
    }

    #[test]
    fn coupled_empty_kernel() {
        let ws = build_weights(100, 2.5, 0.5, 1.0).unwrap();
        assert!(matches!(
            sample_coupled_kernel(&ws, 1e6, &mut RngStream::new(0, 0)),
            Err(Error::EmptyKernel(_))
        ));
    }
}
