//! Bootstrap percolation with activation threshold `r`.
//!
//! Rounds are synchronous: a vertex joins in round `k + 1` iff at least `r` of
//! its neighbours were infected by the end of round `k`. Seeds are round 0.

use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::RngStream;
use crate::weights::WeightSequence;

/// How the initial infected set `A_0` is chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedSpec {
    Explicit(Vec<usize>),
    /// `a` vertices uniformly at random.
    Uniform {
        a: usize,
    },
    /// Each vertex independently with probability `a / n`.
    Bernoulli {
        a: f64,
    },
    /// The `a` vertices of smallest weight.
    SmallestWeights {
        a: usize,
    },
    /// `a` vertices uniformly from `Ker_f`.
    UniformInKernel {
        f: f64,
        a: usize,
    },
}

/// Draws a seed set, sorted ascending.
pub fn select_seeds(
    spec: &SeedSpec,
    n: usize,
    ws: Option<&WeightSequence>,
    rng: &mut RngStream,
) -> Result<Vec<usize>> {
    let need_ws = |what: &str| -> Result<&WeightSequence> {
        let ws =
            ws.ok_or_else(|| Error::invalid(format!("{what} seeding requires a weight sequence")))?;
        if ws.n() != n {
            return Err(Error::invalid(format!(
                "weight sequence has {} entries but the graph has {n} vertices",
                ws.n()
            )));
        }
        Ok(ws)
    };
    let too_many = |a: usize, pool: usize| {
        Error::invalid(format!(
            "cannot seed {a} vertices from a population of {pool}"
        ))
    };

    let mut seeds = match *spec {
        SeedSpec::Explicit(ref s) => {
            if let Some(&v) = s.iter().find(|&&v| v >= n) {
                return Err(Error::VertexOutOfRange { vertex: v, n });
            }
            s.clone()
        }
        SeedSpec::Uniform { a } => {
            if a > n {
                return Err(too_many(a, n));
            }
            index::sample(rng, n, a).into_vec()
        }
        SeedSpec::Bernoulli { a } => {
            if !(a >= 0.0 && a <= n as f64) {
                return Err(Error::invalid(format!(
                    "Bernoulli seeding needs 0 <= a <= n = {n}, got {a}"
                )));
            }
            let p = a / n as f64;
            (0..n).filter(|_| rng.uniform() < p).collect()
        }
        SeedSpec::SmallestWeights { a } => {
            need_ws("smallest-weight")?;
            if a > n {
                return Err(too_many(a, n));
            }
            (n - a..n).collect()
        }
        SeedSpec::UniformInKernel { f, a } => {
            let ws = need_ws("kernel")?;
            let k = ws.kernel_size(f);
            if k == 0 {
                return Err(Error::EmptyKernel(f));
            }
            if a > k {
                return Err(too_many(a, k));
            }
            index::sample(rng, k, a).into_vec()
        }
    };
    seeds.sort_unstable();
    seeds.dedup();
    Ok(seeds)
}

/// Full record of one bootstrap percolation run.
#[derive(Clone, Debug, PartialEq)]
pub struct PercolationTrace {
    pub r: u32,
    /// `A_0`, sorted.
    pub seed: Vec<usize>,
    /// Vertices newly infected in rounds `1, 2, ...`; each round sorted.
    pub rounds: Vec<Vec<usize>>,
    /// `A_f`, sorted.
    pub final_set: Vec<usize>,
    /// Round in which each vertex became infected, `Some(0)` for seeds.
    pub infection_round: Vec<Option<u32>>,
}

impl PercolationTrace {
    pub fn final_size(&self) -> usize {
        self.final_set.len()
    }

    pub fn no_evolution(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn is_infected(&self, v: usize) -> bool {
        self.infection_round[v].is_some()
    }

    /// Re-derives every trace invariant against `g`.
    pub fn verify(&self, g: &Graph) -> Result<()> {
        let n = g.n();
        let fail = |m: String| Err(Error::invalid(m));
        if self.infection_round.len() != n {
            return fail("infection_round length differs from n".into());
        }
        let mut union: Vec<usize> = self.seed.clone();
        for round in &self.rounds {
            union.extend_from_slice(round);
        }
        union.sort_unstable();
        let before = union.len();
        union.dedup();
        if union.len() != before {
            return fail("rounds overlap each other or the seed".into());
        }
        if union != self.final_set {
            return fail("seed plus rounds does not equal the final set".into());
        }
        if self.rounds.len() > n {
            return fail("more rounds than vertices".into());
        }
        let r = self.r as usize;
        for v in 0..n {
            let k = count_neighbors_in_set(g, v, &self.final_set);
            match self.infection_round[v] {
                Some(0) => {}
                Some(_) if k < r => {
                    return fail(format!(
                        "vertex {v} infected with {k} < r infected neighbours"
                    ))
                }
                None if k >= r => {
                    return fail(format!(
                        "vertex {v} uninfected with {k} >= r infected neighbours"
                    ))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// JSON-friendly view: sizes and a histogram instead of per-vertex rounds.
    pub fn summary(&self) -> TraceSummary {
        let mut histogram = vec![0usize; self.rounds.len() + 1];
        let mut never = 0;
        for r in &self.infection_round {
            match r {
                Some(k) => histogram[*k as usize] += 1,
                None => never += 1,
            }
        }
        TraceSummary {
            r: self.r,
            seed: self.seed.clone(),
            rounds: self.rounds.clone(),
            final_size: self.final_size(),
            infection_round_histogram: histogram,
            never_infected: never,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub r: u32,
    pub seed: Vec<usize>,
    pub rounds: Vec<Vec<usize>>,
    pub final_size: usize,
    /// Entry `k` counts vertices infected in round `k`.
    pub infection_round_histogram: Vec<usize>,
    pub never_infected: usize,
}

fn check_run_inputs(g: &Graph, seed: &[usize], r: u32) -> Result<()> {
    if r == 0 {
        return Err(Error::invalid("activation threshold r must be at least 1"));
    }
    if r == 1 {
        log::warn!("running bootstrap percolation with r = 1 (connectivity check)");
    }
    let n = g.n();
    if let Some(&v) = seed.iter().find(|&&v| v >= n) {
        return Err(Error::VertexOutOfRange { vertex: v, n });
    }
    Ok(())
}

/// Runs the process to its fixed point in `O(n + m)`.
pub fn run_bootstrap(g: &Graph, seed: &[usize], r: u32) -> Result<PercolationTrace> {
    run(g, seed, r, None)
}

/// Same process with every round's frontier shuffled before it is expanded.
/// The result must not depend on the shuffle.
pub fn run_bootstrap_shuffled(
    g: &Graph,
    seed: &[usize],
    r: u32,
    rng: &mut RngStream,
) -> Result<PercolationTrace> {
    run(g, seed, r, Some(rng))
}

fn run(
    g: &Graph,
    seed: &[usize],
    r: u32,
    mut shuffle: Option<&mut RngStream>,
) -> Result<PercolationTrace> {
    check_run_inputs(g, seed, r)?;
    let n = g.n();
    let mut round_of: Vec<Option<u32>> = vec![None; n];
    let mut hits = vec![0u32; n];

    let mut frontier: Vec<usize> = Vec::with_capacity(seed.len());
    for &v in seed {
        if round_of[v].is_none() {
            round_of[v] = Some(0);
            frontier.push(v);
        }
    }
    frontier.sort_unstable();
    let seed_set = frontier.clone();

    let mut rounds = Vec::new();
    let mut k = 0u32;
    while !frontier.is_empty() {
        if let Some(rng) = shuffle.as_deref_mut() {
            frontier.shuffle(rng);
        }
        let mut next = Vec::new();
        for &v in &frontier {
            for &u in g.neighbors(v) {
                if round_of[u].is_none() {
                    hits[u] += 1;
                    if hits[u] == r {
                        round_of[u] = Some(k + 1);
                        next.push(u);
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        next.sort_unstable();
        rounds.push(next.clone());
        frontier = next;
        k += 1;
    }

    let final_set = (0..n).filter(|&v| round_of[v].is_some()).collect();
    Ok(PercolationTrace {
        r,
        seed: seed_set,
        rounds,
        final_set,
        infection_round: round_of,
    })
}

/// Rescans every vertex until nothing changes. Reference implementation for
/// small graphs.
pub fn brute_force_bootstrap(g: &Graph, seed: &[usize], r: u32) -> Result<Vec<usize>> {
    check_run_inputs(g, seed, r)?;
    let n = g.n();
    let mut infected = vec![false; n];
    for &v in seed {
        infected[v] = true;
    }
    loop {
        let mut changed = false;
        for v in 0..n {
            if !infected[v] {
                let k = g.neighbors(v).iter().filter(|&&u| infected[u]).count();
                if k >= r as usize {
                    infected[v] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    Ok((0..n).filter(|&v| infected[v]).collect())
}

/// `d_S(v)`: neighbours of `v` inside `s`. `s` must be sorted ascending.
pub fn count_neighbors_in_set(g: &Graph, v: usize, s: &[usize]) -> usize {
    debug_assert!(s.windows(2).all(|w| w[0] < w[1]), "s must be sorted");
    let nb = g.neighbors(v);
    if s.len() < nb.len() {
        s.iter().filter(|x| nb.binary_search(x).is_ok()).count()
    } else {
        nb.iter().filter(|x| s.binary_search(x).is_ok()).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k4() -> Graph {
        Graph::complete(4)
    }

    fn star(leaves: usize) -> Graph {
        Graph::from_edges(leaves + 1, (1..=leaves).map(|l| (0, l))).unwrap()
    }

    #[test]
    fn k4_two_seeds() {
        let t = run_bootstrap(&k4(), &[0, 1], 2).unwrap();
        assert_eq!(t.rounds, vec![vec![2, 3]]);
        assert_eq!(t.final_set, vec![0, 1, 2, 3]);
        t.verify(&k4()).unwrap();
        assert_eq!(
            brute_force_bootstrap(&k4(), &[0, 1], 2).unwrap(),
            vec![0, 1, 2, 3]
        );
    }

    #[test]
    fn path_middle() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let t = run_bootstrap(&g, &[0, 2], 2).unwrap();
        assert_eq!(t.rounds, vec![vec![1]]);
        assert_eq!(t.final_set, vec![0, 1, 2]);
    }

    #[test]
    fn star_two_leaves() {
        let g = star(5);
        let t = run_bootstrap(&g, &[1, 2], 2).unwrap();
        assert_eq!(t.final_set, vec![0, 1, 2]);
        assert_eq!(t.infection_round[0], Some(1));
        t.verify(&g).unwrap();
    }

    #[test]
    fn empty_seed() {
        let t = run_bootstrap(&k4(), &[], 2).unwrap();
        assert!(t.final_set.is_empty());
        assert!(t.rounds.is_empty());
        assert!(t.no_evolution());
    }

    #[test]
    fn full_seed_brute_force() {
        assert_eq!(
            brute_force_bootstrap(&k4(), &[0, 1, 2, 3], 3).unwrap(),
            vec![0, 1, 2, 3]
        );
    }

    #[test]
    fn duplicate_seeds_collapse() {
        let t = run_bootstrap(&k4(), &[1, 1, 0], 2).unwrap();
        assert_eq!(t.seed, vec![0, 1]);
        t.verify(&k4()).unwrap();
    }

    #[test]
    fn rejects_bad_input() {
        assert!(run_bootstrap(&k4(), &[4], 2).is_err());
        assert!(run_bootstrap(&k4(), &[0], 0).is_err());
        assert!(run_bootstrap(&k4(), &[0], 1).is_ok());
    }

    #[test]
    fn count_neighbors_examples() {
        assert_eq!(count_neighbors_in_set(&k4(), 0, &[1, 2]), 2);
        assert_eq!(count_neighbors_in_set(&k4(), 0, &[]), 0);
        assert_eq!(count_neighbors_in_set(&star(5), 0, &[3, 4]), 2);
    }

    #[test]
    fn seed_examples() {
        let mut rng = RngStream::new(0, 0);
        assert_eq!(
            select_seeds(&SeedSpec::Explicit(vec![5, 1]), 10, None, &mut rng).unwrap(),
            vec![1, 5]
        );
        let ws = WeightSequence::from_weights(vec![9.0, 8.0, 7.0, 2.0, 1.0, 1.0]).unwrap();
        assert_eq!(
            select_seeds(&SeedSpec::SmallestWeights { a: 3 }, 6, Some(&ws), &mut rng).unwrap(),
            vec![3, 4, 5]
        );
        assert_eq!(
            select_seeds(&SeedSpec::Uniform { a: 6 }, 6, None, &mut rng).unwrap(),
            (0..6).collect::<Vec<_>>()
        );
        let k = select_seeds(
            &SeedSpec::UniformInKernel { f: 7.0, a: 2 },
            6,
            Some(&ws),
            &mut rng,
        )
        .unwrap();
        assert_eq!(k.len(), 2);
        assert!(k.iter().all(|&v| v < 3));
    }

    #[test]
    fn seed_errors() {
        let mut rng = RngStream::new(0, 0);
        let ws = WeightSequence::from_weights(vec![3.0, 2.0, 1.0]).unwrap();
        assert!(select_seeds(&SeedSpec::Uniform { a: 4 }, 3, None, &mut rng).is_err());
        assert!(select_seeds(&SeedSpec::SmallestWeights { a: 1 }, 3, None, &mut rng).is_err());
        assert!(select_seeds(
            &SeedSpec::UniformInKernel { f: 2.0, a: 3 },
            3,
            Some(&ws),
            &mut rng
        )
        .is_err());
        assert!(select_seeds(
            &SeedSpec::UniformInKernel { f: 9.0, a: 1 },
            3,
            Some(&ws),
            &mut rng
        )
        .is_err());
        assert!(select_seeds(&SeedSpec::Explicit(vec![3]), 3, None, &mut rng).is_err());
        assert!(select_seeds(&SeedSpec::Bernoulli { a: 4.0 }, 3, None, &mut rng).is_err());
    }

    #[test]
    fn bernoulli_mean() {
        let mut rng = RngStream::new(5, 5);
        let n = 1000;
        let total: usize = (0..400)
            .map(|_| {
                select_seeds(&SeedSpec::Bernoulli { a: 20.0 }, n, None, &mut rng)
                    .unwrap()
                    .len()
            })
            .sum();
        let mean = total as f64 / 400.0;
        // sd of the mean ~ sqrt(20 * 0.98 / 400) ~ 0.22
        assert!((mean - 20.0).abs() < 1.0, "{mean}");
    }

    #[test]
    fn summary_histogram() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let s = run_bootstrap(&g, &[0, 2], 2).unwrap().summary();
        assert_eq!(s.final_size, 3);
        assert_eq!(s.infection_round_histogram, vec![2, 1]);
        assert_eq!(s.never_infected, 0);
    }
}
