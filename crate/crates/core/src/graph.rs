//! Immutable undirected simple graphs in compressed sparse row form.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Self {
            offsets: vec![0; n + 1],
            targets: Vec::new(),
        }
    }

    pub fn complete(n: usize) -> Self {
        let pairs = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Self::from_sorted_pairs(n, pairs.collect())
    }

    /// Builds a graph from arbitrary undirected pairs. Duplicates collapse; self-loops
    /// and out-of-range endpoints are rejected.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut pairs = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::VertexOutOfRange {
                    vertex: u.max(v),
                    n,
                });
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop at vertex {u}")));
            }
            pairs.push((u.min(v), u.max(v)));
        }
        pairs.sort_unstable();
        pairs.dedup();
        Ok(Self::from_sorted_pairs(n, pairs))
    }

    /// `pairs` must be sorted, unique, with `u < v < n`.
    pub(crate) fn from_sorted_pairs(n: usize, pairs: Vec<(usize, usize)>) -> Self {
        debug_assert!(pairs.windows(2).all(|w| w[0] < w[1]));
        let mut degree = vec![0usize; n + 1];
        for &(u, v) in &pairs {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut acc = 0;
        offsets.push(0);
        for d in &degree[..n] {
            acc += d;
            offsets.push(acc);
        }
        let mut cursor = offsets[..n].to_vec();
        let mut targets = vec![0usize; acc];
        // Sorted input yields sorted rows: the lower endpoints reach row v in
        // increasing order, before any of v's own upper neighbours.
        for &(u, v) in &pairs {
            targets[cursor[u]] = v;
            cursor[u] += 1;
            targets[cursor[v]] = u;
            cursor[v] += 1;
        }
        Self { offsets, targets }
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn m(&self) -> usize {
        self.targets.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && v < self.n() && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Structural check: sorted rows, no loops, no duplicates, symmetric.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        for u in 0..n {
            let row = self.neighbors(u);
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid(format!("row {u} not strictly increasing")));
            }
            for &v in row {
                if v >= n {
                    return Err(Error::VertexOutOfRange { vertex: v, n });
                }
                if v == u {
                    return Err(Error::invalid(format!("self-loop at {u}")));
                }
                if self.neighbors(v).binary_search(&u).is_err() {
                    return Err(Error::invalid(format!("edge {u}-{v} not symmetric")));
                }
            }
        }
        Ok(())
    }

    /// Writes `# n=<n> m=<m>` followed by one `u v` line per edge with `u < v`.
    pub fn write_edge_list(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "# n={} m={}", self.n(), self.m())?;
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}")?;
        }
        Ok(())
    }

    pub fn read_edge_list(input: impl BufRead) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        let header = loop {
            match lines.next() {
                None => return Err(parse_err(1, "missing `# n=<n> m=<m>` header")),
                Some((i, line)) => {
                    let line = line.map_err(|e| parse_err(i + 1, &e.to_string()))?;
                    if !line.trim().is_empty() {
                        break (i + 1, line);
                    }
                }
            }
        };
        let (n, m) = parse_header(&header.1).ok_or_else(|| {
            parse_err(
                header.0,
                &format!("expected `# n=<n> m=<m>`, got `{}`", header.1),
            )
        })?;

        let mut pairs = Vec::with_capacity(m);
        for (i, line) in lines {
            let line = line.map_err(|e| parse_err(i + 1, &e.to_string()))?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let mut it = t.split_whitespace();
            let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
                return Err(parse_err(i + 1, &format!("expected `u v`, got `{t}`")));
            };
            let u: usize = a.parse().map_err(|_| parse_err(i + 1, "bad vertex id"))?;
            let v: usize = b.parse().map_err(|_| parse_err(i + 1, "bad vertex id"))?;
            pairs.push((u, v));
        }
        let g = Self::from_edges(n, pairs)?;
        if g.m() != m {
            return Err(Error::Parse {
                location: "header".into(),
                message: format!(
                    "header declares m={m} but file holds {} distinct edges",
                    g.m()
                ),
            });
        }
        Ok(g)
    }
}

fn parse_err(line: usize, message: &str) -> Error {
    Error::Parse {
        location: format!("line {line}"),
        message: message.to_string(),
    }
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let rest = line.trim().strip_prefix('#')?;
    let mut n = None;
    let mut m = None;
    for tok in rest.split_whitespace() {
        if let Some(v) = tok.strip_prefix("n=") {
            n = v.parse().ok();
        } else if let Some(v) = tok.strip_prefix("m=") {
            m = v.parse().ok();
        }
    }
    Some((n?, m?))
}
