//! Deterministic power-law weight sequences.
//!
//! Weights are stored sorted nonincreasing, so every kernel `{i : w_i >= f}` is
//! a prefix `0..N_f` and every band between two cutoffs is a contiguous range.

use std::io::{BufRead, Write};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed above `1/(beta-1)` when validating `zeta`, so decimal inputs
/// like `0.6667` for `2/3` are accepted.
pub const ZETA_SLACK: f64 = 1e-4;

/// Power-law metadata of a weight sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    pub beta: f64,
    pub zeta: f64,
    pub x0: f64,
    /// Largest weight; at most `n^zeta`.
    pub max_weight: f64,
    /// Sandwich constants measured over `[x0, max_weight]`.
    pub gamma1: f64,
    pub gamma2: f64,
    /// Number of leading vertices whose weight equals `n^zeta`.
    pub plateau: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightSequence {
    weights: Vec<f64>,
    total: f64,
    law: Option<PowerLaw>,
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if beta > 2.0 && beta < 3.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "beta must lie in (2,3), got {beta}"
        )))
    }
}

pub(crate) fn check_zeta(beta: f64, zeta: f64) -> Result<()> {
    let max = 1.0 / (beta - 1.0);
    if zeta > 0.0 && zeta <= max + ZETA_SLACK {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "zeta must lie in (0, 1/(beta-1)] = (0, {max}], got {zeta}"
        )))
    }
}

/// Compensated (Neumaier) summation.
pub(crate) fn exact_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Canonical family `w_i = min(n^zeta, x0 (n/i)^{1/(beta-1)})`, `i = 1..=n`.
pub fn build_weights(n: usize, beta: f64, zeta: f64, x0: f64) -> Result<WeightSequence> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    check_beta(beta)?;
    check_zeta(beta, zeta)?;
    if !(x0 > 0.0 && x0.is_finite()) {
        return Err(Error::invalid(format!("x0 must be positive, got {x0}")));
    }
    let nf = n as f64;
    let cap = nf.powf(zeta);
    if x0 > cap {
        return Err(Error::invalid(format!(
            "x0 = {x0} exceeds the maximum weight n^zeta = {cap}"
        )));
    }
    let inv = 1.0 / (beta - 1.0);
    let weights: Vec<f64> = (1..=n)
        .map(|i| cap.min(x0 * (nf / i as f64).powf(inv)))
        .collect();
    let plateau = weights.partition_point(|&w| w >= cap);
    let max_weight = weights[0];
    let (gamma1, gamma2) = measure_gammas(&weights, beta, x0, max_weight);
    let law = PowerLaw {
        beta,
        zeta,
        x0,
        max_weight,
        gamma1,
        gamma2,
        plateau,
    };
    Ok(WeightSequence::with_law(weights, law))
}

/// The Chung-Lu family `w_i = d (beta-2)/(beta-1) (n/(i+i0))^{1/(beta-1)}`,
/// `i = 1..=n`.
pub fn alt_weights_chung_lu(n: usize, beta: f64, d: f64, i0: f64) -> Result<WeightSequence> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    check_beta(beta)?;
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::invalid(format!("d must be positive, got {d}")));
    }
    if !(i0 >= 0.0 && i0.is_finite()) {
        return Err(Error::invalid(format!("i0 must be nonnegative, got {i0}")));
    }
    let nf = n as f64;
    let inv = 1.0 / (beta - 1.0);
    let scale = d * (beta - 2.0) / (beta - 1.0);
    let weights: Vec<f64> = (1..=n)
        .map(|i| scale * (nf / (i as f64 + i0)).powf(inv))
        .collect();
    let max_weight = weights[0];
    let limit = nf.powf(inv);
    if max_weight > limit {
        return Err(Error::invalid(format!(
            "maximum weight {max_weight} exceeds n^(1/(beta-1)) = {limit}; increase i0"
        )));
    }
    let x0 = weights[n - 1];
    let zeta = if n > 1 {
        max_weight.ln() / nf.ln()
    } else {
        0.0
    };
    let (gamma1, gamma2) = measure_gammas(&weights, beta, x0, max_weight);
    let plateau = weights.partition_point(|&w| w >= max_weight);
    let law = PowerLaw {
        beta,
        zeta,
        x0,
        max_weight,
        gamma1,
        gamma2,
        plateau,
    };
    Ok(WeightSequence::with_law(weights, law))
}

/// Extremes of `tail(x) * x^{beta-1}` over `x in [lo, hi]`.
///
/// The tail is constant on each interval between consecutive distinct weights,
/// so the supremum sits at a right endpoint and the infimum at a left one.
fn measure_gammas(weights: &[f64], beta: f64, lo: f64, hi: f64) -> (f64, f64) {
    let n = weights.len() as f64;
    let e = beta - 1.0;
    let tail = |x: f64| weights.partition_point(|&w| w >= x) as f64 / n;

    let mut points: Vec<f64> = Vec::with_capacity(weights.len() + 2);
    points.push(lo);
    points.extend(weights.iter().rev().copied().filter(|&w| w > lo && w < hi));
    if hi > lo {
        points.push(hi);
    }
    points.dedup();

    let t0 = tail(lo) * lo.powf(e);
    let (mut g1, mut g2) = (t0, t0);
    for pair in points.windows(2) {
        let t = tail(pair[1]);
        g1 = g1.min(t * pair[0].powf(e));
        g2 = g2.max(t * pair[1].powf(e));
    }
    (g1, g2)
}

impl WeightSequence {
    fn with_law(weights: Vec<f64>, law: PowerLaw) -> Self {
        let total = exact_sum(weights.iter().copied());
        Self {
            weights,
            total,
            law: Some(law),
        }
    }

    /// Wraps an arbitrary positive nonincreasing sequence without power-law metadata.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("weight sequence is empty"));
        }
        if let Some(i) = weights.iter().position(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::invalid(format!(
                "weight {i} must be positive and finite, got {}",
                weights[i]
            )));
        }
        if let Some(i) = weights.windows(2).position(|p| p[0] < p[1]) {
            return Err(Error::invalid(format!(
                "weights must be nonincreasing: w[{i}] = {} < w[{}] = {}",
                weights[i],
                i + 1,
                weights[i + 1]
            )));
        }
        let total = exact_sum(weights.iter().copied());
        Ok(Self {
            weights,
            total,
            law: None,
        })
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn law(&self) -> Option<&PowerLaw> {
        self.law.as_ref()
    }

    pub fn max_weight(&self) -> f64 {
        self.weights[0]
    }

    pub fn min_weight(&self) -> f64 {
        self.weights[self.weights.len() - 1]
    }

    /// `W_[n]`.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// Fraction of vertices with weight at least `x`.
    pub fn tail(&self, x: f64) -> f64 {
        self.kernel_size(x) as f64 / self.n() as f64
    }

    /// `N_f = |{i : w_i >= f}|`.
    pub fn kernel_size(&self, f: f64) -> usize {
        self.weights.partition_point(|&w| w >= f)
    }

    /// The `f`-kernel as a prefix of the vertex range. Empty above the maximum weight.
    pub fn kernel(&self, f: f64) -> Range<usize> {
        0..self.kernel_size(f)
    }

    /// `W_S`, or `W_[n]` when `subset` is `None`.
    pub fn total_weight(&self, subset: Option<&[usize]>) -> Result<f64> {
        match subset {
            None => Ok(self.total),
            Some(s) => {
                let n = self.n();
                if let Some(&v) = s.iter().find(|&&v| v >= n) {
                    return Err(Error::VertexOutOfRange { vertex: v, n });
                }
                Ok(exact_sum(s.iter().map(|&i| self.weights[i])))
            }
        }
    }

    /// Weight of a contiguous vertex range.
    pub fn range_weight(&self, range: Range<usize>) -> f64 {
        exact_sum(self.weights[range].iter().copied())
    }

    /// `sum_i w_i^r`.
    pub fn moment_sum(&self, r: u32) -> f64 {
        exact_sum(self.weights.iter().map(|w| w.powi(r as i32)))
    }

    /// Splits `Ker_C` into the bands driven by `f_{j+1} = f_j^{beta-2} C`.
    pub fn band_decomposition(&self, f0: f64, c: f64) -> Result<BandDecomposition> {
        let law = self
            .law
            .as_ref()
            .ok_or(Error::MissingPowerLaw("band decomposition"))?;
        let beta = law.beta;
        if c.is_nan() || c <= 1.0 {
            return Err(Error::invalid(format!("C must exceed 1, got {c}")));
        }
        let floor = c.powf(2.0 / (3.0 - beta));
        if f0 < floor {
            return Err(Error::BandFloor { f0, floor });
        }
        // n^zeta rarely lands exactly on the requested cutoff.
        let f0 = if f0 > law.max_weight && f0 <= law.max_weight * (1.0 + 1e-9) {
            law.max_weight
        } else {
            f0
        };
        if f0 > law.max_weight {
            return Err(Error::invalid(format!(
                "f0 = {f0} exceeds the maximum weight {}",
                law.max_weight
            )));
        }

        let mut cutoffs = vec![f0];
        loop {
            let next = cutoffs[cutoffs.len() - 1].powf(beta - 2.0) * c;
            if next < floor {
                break;
            }
            cutoffs.push(next);
        }

        let mut bands = Vec::with_capacity(cutoffs.len() + 1);
        let mut start = 0;
        for &f in &cutoffs {
            let end = self.kernel_size(f);
            bands.push(start..end);
            start = end;
        }
        bands.push(start..self.kernel_size(c).max(start));

        Ok(BandDecomposition {
            beta,
            c,
            f0,
            psi: c.ln() / f0.ln(),
            cutoffs,
            bands,
        })
    }

    pub fn write_to(&self, mut out: impl Write) -> std::io::Result<()> {
        for w in &self.weights {
            writeln!(out, "{w}")?;
        }
        Ok(())
    }

    /// Reads one weight per line. Blank lines are ignored.
    pub fn read_from(input: impl BufRead) -> Result<Self> {
        let mut weights = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse {
                location: format!("line {}", idx + 1),
                message: e.to_string(),
            })?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            let w: f64 = t.parse().map_err(|_| Error::Parse {
                location: format!("line {}", idx + 1),
                message: format!("expected a decimal weight, got `{t}`"),
            })?;
            weights.push(w);
        }
        Self::from_weights(weights)
    }
}

/// Weight bands `Lambda_0 .. Lambda_{T+1}` of `Ker_C`.
#[derive(Clone, Debug, PartialEq)]
pub struct BandDecomposition {
    pub beta: f64,
    pub c: f64,
    pub f0: f64,
    /// `ln C / ln f0`.
    pub psi: f64,
    /// `f_0 > f_1 > ... > f_T`.
    pub cutoffs: Vec<f64>,
    /// `Lambda_0 = Ker_{f0}`, `Lambda_j = {f_j <= w < f_{j-1}}`, and the remainder of `Ker_C` last.
    pub bands: Vec<Range<usize>>,
}

impl BandDecomposition {
    /// Number of recursion steps `T`.
    pub fn t(&self) -> usize {
        self.cutoffs.len() - 1
    }

    pub fn floor(&self) -> f64 {
        self.c.powf(2.0 / (3.0 - self.beta))
    }

    /// `f_0^{g^{(j)}(1)}` with `g(x) = (beta-2) x + psi`.
    pub fn cutoff_by_iteration(&self, j: usize) -> f64 {
        let mut e = 1.0;
        for _ in 0..j {
            e = (self.beta - 2.0) * e + self.psi;
        }
        self.f0.powf(e)
    }

    /// Per-band Chernoff failure bounds `exp(-eps^2 |Lambda_j| / 2)` for `j >= 1`.
    pub fn failure_bounds(&self, eps: f64) -> Vec<f64> {
        self.bands[1..]
            .iter()
            .map(|b| (-eps * eps * b.len() as f64 / 2.0).exp())
            .collect()
    }

    /// Union of all bands, which equals `Ker_C`.
    pub fn covered(&self) -> Range<usize> {
        0..self.bands.last().map_or(0, |b| b.end)
    }
}
