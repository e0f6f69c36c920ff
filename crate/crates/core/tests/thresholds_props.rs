use bootperc::thresholds::{
    classify_regime, critical_a, critical_a_plus, er_thresholds, first_moment_bound, gap_boundary,
    phi, phi1, supercritical_witness, Regime,
};
use bootperc::{build_weights, run_bootstrap, sample_chung_lu, select_seeds, RngStream, SeedSpec};
use proptest::prelude::*;

#[test]
fn phi_residual_and_monotone_on_grid() {
    for r in [2u32, 3, 4] {
        let rf = r as f64;
        let mut prev = 0.0;
        for k in 0..1000 {
            let alpha = k as f64 / 999.0;
            let x = phi(alpha, r).unwrap();
            assert!((0.0..=1.0).contains(&x));
            let residual = rf * x - x.powi(r as i32) - (rf - 1.0) * alpha;
            assert!(
                residual.abs() <= 1e-12,
                "r={r} alpha={alpha} residual={residual}"
            );
            assert!(x >= prev);
            prev = x;
        }
    }
}

#[test]
fn phi_r2_closed_form() {
    for k in 0..=1000 {
        let alpha = k as f64 / 1000.0;
        let closed = 1.0 - (1.0 - alpha).sqrt();
        assert!((phi(alpha, 2).unwrap() - closed).abs() <= 1e-10);
    }
}

#[test]
fn phi1_continuous_at_zero() {
    for r in [2u32, 3, 4, 6] {
        assert_eq!(phi1(0.0, r).unwrap(), 1.0);
        assert!((phi1(1e-8, r).unwrap() - 1.0).abs() <= 1e-4);
    }
}

#[test]
fn critical_a_r_independent_at_max_zeta() {
    for beta in [2.1, 2.5, 2.9] {
        let zeta = 1.0 / (beta - 1.0);
        let base = critical_a(1e6, beta, zeta, 2).unwrap();
        for r in 3..=6 {
            let v = critical_a(1e6, beta, zeta, r).unwrap();
            assert!(
                (v.exponent - base.exponent).abs() <= 1e-15,
                "beta={beta} r={r}"
            );
            assert!((v.value / base.value - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn first_moment_dominates_monte_carlo() {
    let n = 10_000;
    let ws = build_weights(n, 2.5, 2.0 / 3.0, 1.0).unwrap();
    for (r, a) in [(2u32, 5.0), (2, 30.0), (3, 60.0)] {
        let bound = first_moment_bound(&ws, a, r).unwrap();
        let replicas = 300;
        let counts: Vec<f64> = (0..replicas)
            .map(|rep| {
                let mut rng = RngStream::new(99, rep);
                let g = sample_chung_lu(&ws, &mut rng);
                let seeds = select_seeds(&SeedSpec::Bernoulli { a }, n, None, &mut rng).unwrap();
                // A vertex with r seeded neighbours joins in round 1 unless it is a seed.
                let t = run_bootstrap(&g, &seeds, r).unwrap();
                let first = t.rounds.first().map_or(0, Vec::len);
                let seeded_hit = seeds
                    .iter()
                    .filter(|&&s| bootperc::count_neighbors_in_set(&g, s, &seeds) >= r as usize)
                    .count();
                (first + seeded_hit) as f64
            })
            .collect();
        let mean = counts.iter().sum::<f64>() / replicas as f64;
        let sd =
            (counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (replicas - 1) as f64).sqrt();
        assert!(
            mean <= bound + 3.0 * sd / (replicas as f64).sqrt(),
            "r={r} a={a}: {mean} vs {bound}"
        );
    }
}

#[test]
fn witness_brackets_the_transition() {
    let n = 100_000;
    let ws = build_weights(n, 2.5, 2.0 / 3.0, 1.0).unwrap();
    let a_c = critical_a(n as f64, 2.5, 2.0 / 3.0, 2).unwrap().value;
    assert!(supercritical_witness(&ws, 20.0 * a_c, 2).unwrap().satisfied);
    assert!(!supercritical_witness(&ws, 0.1 * a_c, 2).unwrap().satisfied);
}

proptest! {
    #[test]
    fn phi_root_any_alpha(alpha in 0.0f64..=1.0, r in 2u32..8) {
        let rf = r as f64;
        let x = phi(alpha, r).unwrap();
        prop_assert!((rf * x - x.powi(r as i32) - (rf - 1.0) * alpha).abs() <= 1e-12);
        prop_assert!(x >= (rf - 1.0) * alpha / rf - 1e-15);
    }

    #[test]
    fn er_identity(n in 10.0f64..1e8, p in 1e-9f64..0.5, r in 2u32..7) {
        let t = er_thresholds(n, p, r).unwrap();
        let rf = r as f64;
        prop_assert!((t.a_c - (1.0 - 1.0 / rf) * t.t_c).abs() <= 1e-12 * t.a_c.abs());
        prop_assert!(t.b_c >= 0.0);
    }

    #[test]
    fn critical_a_decreasing_in_zeta(beta in 2.05f64..2.95, r in 2u32..6, z1 in 0.01f64..1.0, z2 in 0.01f64..1.0) {
        let zmax = 1.0 / (beta - 1.0);
        let (lo, hi) = (z1.min(z2) * zmax, z1.max(z2) * zmax);
        let a = critical_a(1e6, beta, lo, r).unwrap().exponent;
        let b = critical_a(1e6, beta, hi, r).unwrap().exponent;
        prop_assert!(b <= a + 1e-15);
    }

    #[test]
    fn regimes_partition_zeta(beta in 2.05f64..2.95, r in 2u32..6, q in 0.001f64..1.0) {
        let zeta = q / (beta - 1.0);
        let regime = classify_regime(beta, zeta, r).unwrap();
        let edge = gap_boundary(beta, r);
        match regime {
            Regime::SharpCaseI => prop_assert!(zeta > 0.5),
            Regime::SharpCaseII => prop_assert!(zeta > edge && zeta <= 0.5),
            Regime::GapCaseIII => {
                prop_assert!(zeta <= edge);
                let plus = critical_a_plus(1e6, beta, zeta, r).unwrap();
                prop_assert!(plus.exponent >= critical_a(1e6, beta, zeta, r).unwrap().exponent - 1e-12);
            }
        }
    }
}
