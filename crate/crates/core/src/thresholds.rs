//! Closed-form threshold quantities.
//!
//! Seed-size thresholds for `CL(w)`, the Erdős–Rényi bootstrap thresholds
//! `T_c`, `A_c`, `B_c`, the limiting final-size functions `phi` and `phi1`,
//! the kernel cutoff `f(n)`, and the first-round infection bounds used by the
//! subcritical and supercritical arguments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weights::{check_beta, check_zeta, WeightSequence};

/// A power `n^exponent` together with its exponent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Power {
    pub exponent: f64,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `1/2 < zeta <= 1/(beta-1)`: the `f`-kernel is a clique.
    SharpCaseI,
    /// `(r-1)/(2r-beta+1) < zeta <= 1/2`.
    SharpCaseII,
    /// `zeta <= (r-1)/(2r-beta+1)`: thresholds `a_c` and `a_c^+` differ.
    GapCaseIII,
}

fn check_r(r: u32) -> Result<()> {
    if r >= 2 {
        Ok(())
    } else {
        Err(Error::invalid(format!("r must be at least 2, got {r}")))
    }
}

fn check_n(n: f64) -> Result<()> {
    if n >= 1.0 && n.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("n must be at least 1, got {n}")))
    }
}

pub(crate) fn ln_factorial(k: u32) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

fn factorial(k: u32) -> f64 {
    (2..=k).map(f64::from).product()
}

/// Lower edge `(r-1)/(2r-beta+1)` of the sharp-threshold range of `zeta`.
pub fn gap_boundary(beta: f64, r: u32) -> f64 {
    let r = r as f64;
    (r - 1.0) / (2.0 * r - beta + 1.0)
}

/// `a_c(n) = n^{(r(1-zeta) + zeta(beta-1) - 1)/r}`.
pub fn critical_a(n: f64, beta: f64, zeta: f64, r: u32) -> Result<Power> {
    check_n(n)?;
    check_beta(beta)?;
    check_zeta(beta, zeta)?;
    check_r(r)?;
    let rf = r as f64;
    let exponent = (rf * (1.0 - zeta) + zeta * (beta - 1.0) - 1.0) / rf;
    Ok(Power {
        exponent,
        value: n.powf(exponent),
    })
}

/// `a_c^+(n) = n^{1 - zeta (r-beta+2)/(r-1)}`, defined for `zeta <= (r-1)/(2r-beta+1)`.
pub fn critical_a_plus(n: f64, beta: f64, zeta: f64, r: u32) -> Result<Power> {
    check_n(n)?;
    check_beta(beta)?;
    check_r(r)?;
    let edge = gap_boundary(beta, r);
    if !(zeta > 0.0 && zeta <= edge) {
        return Err(Error::invalid(format!(
            "a_c^+ is only defined for 0 < zeta <= (r-1)/(2r-beta+1) = {edge}, got {zeta}; use critical_a"
        )));
    }
    let rf = r as f64;
    let exponent = 1.0 - zeta * (rf - beta + 2.0) / (rf - 1.0);
    Ok(Power {
        exponent,
        value: n.powf(exponent),
    })
}

pub fn classify_regime(beta: f64, zeta: f64, r: u32) -> Result<Regime> {
    check_beta(beta)?;
    check_zeta(beta, zeta)?;
    check_r(r)?;
    Ok(if zeta > 0.5 {
        Regime::SharpCaseI
    } else if zeta > gap_boundary(beta, r) {
        Regime::SharpCaseII
    } else {
        Regime::GapCaseIII
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErThresholds {
    #[serde(rename = "N")]
    pub n: f64,
    pub p: f64,
    pub r: u32,
    pub t_c: f64,
    pub a_c: f64,
    pub b_c: f64,
}

/// `T_c = ((r-1)!/(N p^r))^{1/(r-1)}`, `A_c = (1-1/r) T_c`,
/// `B_c = N (pN)^{r-1}/(r-1)! e^{-pN}`.
pub fn er_thresholds(n: f64, p: f64, r: u32) -> Result<ErThresholds> {
    check_n(n)?;
    check_r(r)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("p must lie in (0,1), got {p}")));
    }
    let rf = r as f64;
    let lf = ln_factorial(r - 1);
    let t_c = ((lf - n.ln() - rf * p.ln()) / (rf - 1.0)).exp();
    let a_c = (1.0 - 1.0 / rf) * t_c;
    let b_c = (n.ln() + (rf - 1.0) * (p * n).ln() - lf - p * n).exp();
    Ok(ErThresholds {
        n,
        p,
        r,
        t_c,
        a_c,
        b_c,
    })
}

/// The root in `[0,1]` of `r x - x^r = (r-1) alpha`, by bisection to machine precision.
pub fn phi(alpha: f64, r: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!(
            "alpha must lie in [0,1], got {alpha}"
        )));
    }
    check_r(r)?;
    let rf = r as f64;
    let target = (rf - 1.0) * alpha;
    // h is nondecreasing on [0,1], h(0) <= 0 <= h(1).
    let h = |x: f64| rf * x - x.powi(r as i32) - target;
    if alpha == 0.0 {
        return Ok(0.0);
    }
    if alpha == 1.0 {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if h(hi).abs() < h(lo).abs() { hi } else { lo })
}

/// `phi1(alpha) = (r/(r-1)) phi(alpha)/alpha`, with `phi1(0) = 1`.
pub fn phi1(alpha: f64, r: u32) -> Result<f64> {
    let v = phi(alpha, r)?;
    if alpha == 0.0 {
        return Ok(1.0);
    }
    let rf = r as f64;
    Ok(rf / (rf - 1.0) * v / alpha)
}

/// `f(n) = [(r-1)! W^r / (gamma1 n a^{r-1})]^{1/(2r-beta+1)}`.
pub fn f_choice(n: f64, w_total: f64, a: f64, gamma1: f64, beta: f64, r: u32) -> Result<f64> {
    check_r(r)?;
    for (name, v) in [("n", n), ("W", w_total), ("a", a), ("gamma1", gamma1)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::invalid(format!("{name} must be positive, got {v}")));
        }
    }
    let rf = r as f64;
    let ln_bracket =
        ln_factorial(r - 1) + rf * w_total.ln() - gamma1.ln() - n.ln() - (rf - 1.0) * a.ln();
    Ok((ln_bracket / (2.0 * rf - beta + 1.0)).exp())
}

/// Validity checks for a kernel cutoff on a concrete sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FChoiceFlags {
    pub kernel_size: usize,
    /// `f < n^zeta` (below the largest weight).
    pub below_max_weight: bool,
    /// `a < N_f`.
    pub seeds_fit_kernel: bool,
    /// `a f < n`.
    pub sublinear_product: bool,
}

pub fn f_choice_flags(f: f64, a: f64, ws: &WeightSequence) -> FChoiceFlags {
    let cap = ws
        .law()
        .map_or(ws.max_weight(), |l| (ws.n() as f64).powf(l.zeta));
    let kernel_size = ws.kernel_size(f);
    FChoiceFlags {
        kernel_size,
        below_max_weight: f < cap,
        seeds_fit_kernel: a < kernel_size as f64,
        sublinear_product: a * f < ws.n() as f64,
    }
}

/// A probability from a bound formula, clamped to 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounded {
    pub value: f64,
    pub clamped: bool,
}

/// `p_Inf = (a f x0 / W)^r / (2 r!)`. Flagged when `a f x0 > W`.
pub fn p_inf(a: f64, f: f64, x0: f64, w_total: f64, r: u32) -> Bounded {
    let x = a * f * x0 / w_total;
    let raw = x.powi(r as i32) / (2.0 * factorial(r));
    Bounded {
        value: raw.min(1.0),
        clamped: x > 1.0 || raw > 1.0,
    }
}

/// `(e w a / (r n))^r`: bound on the probability that a vertex of weight `w` has
/// `r` neighbours among Bernoulli(`a/n`) seeds.
pub fn first_moment_term(w: f64, n: f64, a: f64, r: u32) -> f64 {
    (std::f64::consts::E * w * a / (r as f64 * n)).powi(r as i32)
}

/// `sum_i (e w_i a / (r n))^r`, an upper bound on the expected number of
/// vertices with at least `r` seeded neighbours.
pub fn first_moment_bound(ws: &WeightSequence, a: f64, r: u32) -> Result<f64> {
    let n = ws.n() as f64;
    if !(a >= 0.0 && a <= n) {
        return Err(Error::invalid(format!("a must lie in [0, n], got {a}")));
    }
    if r == 0 {
        return Err(Error::invalid("r must be positive"));
    }
    let scale = (std::f64::consts::E * a / (r as f64 * n)).powi(r as i32);
    Ok(scale * ws.moment_sum(r))
}

/// The condition a supercritical instance is checked against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessCondition {
    /// `N_f p_Inf > r`.
    KernelFirstRound,
    /// `N_f p_f^r > 1` and `N_f p_Inf > r`.
    DenseKernel,
    /// `N_f p_Inf > T_c(N_f, p_f)`.
    AboveErThreshold,
}

/// One evaluation of the supercritical chain at a cutoff `f`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessEval {
    pub f: f64,
    pub n_f: usize,
    pub p_f: f64,
    pub p_inf: f64,
    pub p_inf_clamped: bool,
    pub n_f_p_inf: f64,
    pub n_f_p_f_r: f64,
    pub t_c: Option<f64>,
    pub kernel_empty: bool,
    /// `f^2 >= W`, so every kernel pair is an edge.
    pub kernel_complete: bool,
    /// Smallest ratio left-hand side / right-hand side over the regime's conditions.
    pub margin: f64,
    pub satisfied: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupercriticalWitness {
    pub regime: Regime,
    pub condition: WitnessCondition,
    pub a: f64,
    /// `a / a_c` in the sharp regimes, `sqrt(a / a_c^+)` in the gap regime.
    pub omega: f64,
    /// At `f = n^zeta / omega^{1 + 1/r}`.
    pub scaled_cutoff: WitnessEval,
    /// Best cutoff over all kernel boundaries with `a f x0 <= W`.
    pub best: Option<WitnessEval>,
    pub satisfied: bool,
}

fn evaluate_cutoff(
    ws: &WeightSequence,
    x0: f64,
    a: f64,
    r: u32,
    f: f64,
    cond: WitnessCondition,
) -> WitnessEval {
    let total = ws.total();
    let n_f = ws.kernel_size(f);
    let rf = r as f64;
    let p_f = (f * f / total).min(1.0);
    let pi = p_inf(a, f, x0, total, r);
    let nf = n_f as f64;
    let n_f_p_inf = nf * pi.value;
    let n_f_p_f_r = nf * p_f.powi(r as i32);
    let t_c = if n_f > 0 && p_f > 0.0 && p_f < 1.0 {
        er_thresholds(nf, p_f, r).ok().map(|t| t.t_c)
    } else if n_f > 0 && p_f >= 1.0 {
        Some(rf)
    } else {
        None
    };
    let margin = if n_f == 0 {
        0.0
    } else {
        match cond {
            WitnessCondition::KernelFirstRound => n_f_p_inf / rf,
            WitnessCondition::DenseKernel => (n_f_p_f_r / 1.0).min(n_f_p_inf / rf),
            WitnessCondition::AboveErThreshold => t_c.map_or(0.0, |t| n_f_p_inf / t),
        }
    };
    WitnessEval {
        f,
        n_f,
        p_f,
        p_inf: pi.value,
        p_inf_clamped: pi.clamped,
        n_f_p_inf,
        n_f_p_f_r,
        t_c,
        kernel_empty: n_f == 0,
        kernel_complete: f * f >= total,
        margin,
        satisfied: margin > 1.0,
    }
}

/// Evaluates the regime's supercritical condition on a concrete instance.
pub fn supercritical_witness(ws: &WeightSequence, a: f64, r: u32) -> Result<SupercriticalWitness> {
    let law = ws
        .law()
        .ok_or(Error::MissingPowerLaw("supercritical witness"))?;
    let (beta, zeta, x0) = (law.beta, law.zeta, law.x0);
    let n = ws.n() as f64;
    let regime = classify_regime(beta, zeta, r)?;
    let (condition, omega) = match regime {
        Regime::SharpCaseI => (
            WitnessCondition::KernelFirstRound,
            a / critical_a(n, beta, zeta, r)?.value,
        ),
        Regime::SharpCaseII => (
            WitnessCondition::DenseKernel,
            a / critical_a(n, beta, zeta, r)?.value,
        ),
        Regime::GapCaseIII => (
            WitnessCondition::AboveErThreshold,
            (a / critical_a_plus(n, beta, zeta, r)?.value).sqrt(),
        ),
    };
    let scaled_f = n.powf(zeta) / omega.powf(1.0 + 1.0 / r as f64);
    let scaled_cutoff = evaluate_cutoff(ws, x0, a, r, scaled_f, condition);

    // Every distinct kernel is Ker_{w_k} for some k; p_Inf needs a f x0 <= W.
    let f_max = if a > 0.0 {
        ws.total() / (a * x0)
    } else {
        f64::INFINITY
    };
    let mut best: Option<WitnessEval> = None;
    let w = ws.weights();
    for k in 0..w.len() {
        if k > 0 && w[k] == w[k - 1] {
            continue;
        }
        if w[k] > f_max {
            continue;
        }
        let e = evaluate_cutoff(ws, x0, a, r, w[k], condition);
        if best.is_none_or(|b| e.margin > b.margin) {
            best = Some(e);
        }
    }
    let satisfied = best.is_some_and(|b| b.satisfied) || scaled_cutoff.satisfied;
    Ok(SupercriticalWitness {
        regime,
        condition,
        a,
        omega,
        scaled_cutoff,
        best,
        satisfied,
    })
}

/// Every closed-form quantity for one parameter point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub n: f64,
    pub beta: f64,
    pub zeta: f64,
    pub r: u32,
    pub a_c: f64,
    pub a_c_exponent: f64,
    pub a_c_plus: Option<f64>,
    pub a_c_plus_exponent: Option<f64>,
    pub regime: Regime,
    pub a: Option<f64>,
    pub f_n: Option<f64>,
    pub f_flags: Option<FChoiceFlags>,
    pub p_inf: Option<f64>,
    pub p_inf_clamped: bool,
    pub first_moment_bound: Option<f64>,
    pub witness: Option<SupercriticalWitness>,
}

/// Builds a report. The `a`-dependent fields need both `a` and a weight sequence;
/// `gamma1` overrides the sequence's measured constant in `f(n)`.
pub fn threshold_report(
    n: f64,
    beta: f64,
    zeta: f64,
    r: u32,
    a: Option<f64>,
    ws: Option<&WeightSequence>,
    gamma1: Option<f64>,
) -> Result<ThresholdReport> {
    let ac = critical_a(n, beta, zeta, r)?;
    let regime = classify_regime(beta, zeta, r)?;
    let plus = match regime {
        Regime::GapCaseIII => Some(critical_a_plus(n, beta, zeta, r)?),
        _ => None,
    };
    let mut report = ThresholdReport {
        n,
        beta,
        zeta,
        r,
        a_c: ac.value,
        a_c_exponent: ac.exponent,
        a_c_plus: plus.map(|p| p.value),
        a_c_plus_exponent: plus.map(|p| p.exponent),
        regime,
        a,
        f_n: None,
        f_flags: None,
        p_inf: None,
        p_inf_clamped: false,
        first_moment_bound: None,
        witness: None,
    };
    if let (Some(a), Some(ws)) = (a, ws) {
        let law = ws.law().ok_or(Error::MissingPowerLaw("threshold report"))?;
        let g1 = gamma1.unwrap_or(law.gamma1);
        if a > 0.0 {
            let f = f_choice(n, ws.total(), a, g1, beta, r)?;
            let pi = p_inf(a, f, law.x0, ws.total(), r);
            report.f_n = Some(f);
            report.f_flags = Some(f_choice_flags(f, a, ws));
            report.p_inf = Some(pi.value);
            report.p_inf_clamped = pi.clamped;
        } else {
            report.p_inf = Some(0.0);
        }
        report.first_moment_bound = Some(first_moment_bound(ws, a, r)?);
        report.witness = Some(supercritical_witness(ws, a, r)?);
    }
    Ok(report)
}
