//! Independent oracles for the analytical model: numerical quadrature of the
//! defining integral for `Y_T`, brute-force subset enumeration for the
//! last-opportunity average, and structural properties of the update map.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod support;

use support::{choose, enumerated_subset_average, integrate};
use trickle_core::model::{
    solve_fixed_point, subset_cdf_average, update_map, yt_pmf, SolverConfig, TimingModel,
};
use trickle_core::redundancy::{assign_k, KAssignment, Policy};
use trickle_core::topology::{generate_grid, generate_random_udg, Topology};

#[test]
fn yt_pmf_sums_to_one() {
    for y in 0..=64 {
        let sum: f64 = yt_pmf(y).unwrap().pmf.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-12, "y={y}: sum={sum}");
    }
}

#[test]
fn yt_pmf_matches_quadrature() {
    for y in 0..=20usize {
        let pmf = yt_pmf(y).unwrap().pmf;
        for (n, &closed) in pmf.iter().enumerate() {
            let c = choose(y, n);
            let density = move |u: f64| 2.0 * c * u.powi(n as i32) * (1.0 - u).powi((y - n) as i32);
            let numeric = integrate(&density, 0.5, 1.0, 1e-14);
            assert!(
                (closed - numeric).abs() <= 1e-10,
                "y={y} n={n}: {closed} vs {numeric}"
            );
        }
    }
}

#[test]
fn subset_dp_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut cases = 0;
    while cases < 1200 {
        let y = rng.random_range(1..=10usize);
        let n = rng.random_range(1..=y);
        let k = rng.random_range(1..=n);
        let probs: Vec<f64> = (0..y)
            .map(|_| match rng.random_range(0..10) {
                0 => 0.0,
                1 => 1.0,
                _ => rng.random::<f64>(),
            })
            .collect();
        let dp = subset_cdf_average(&probs, n, k).unwrap();
        let brute = enumerated_subset_average(&probs, n, k);
        assert!(
            (dp - brute).abs() <= 1e-12,
            "y={y} n={n} k={k} probs={probs:?}: {dp} vs {brute}"
        );
        cases += 1;
    }
}

#[test]
fn grid_symmetry_classes_agree() {
    let g = generate_grid(7, 7, 1.0, 2f64.sqrt()).unwrap();
    // Dihedral images of (r, c) on the 7x7 lattice.
    let orbit = |r: usize, c: usize| {
        let m = 6;
        [
            (r, c),
            (c, r),
            (m - r, c),
            (r, m - c),
            (m - r, m - c),
            (c, m - r),
            (m - c, r),
            (m - c, m - r),
        ]
    };
    for timing in [TimingModel::Marginal, TimingModel::MeanInstant] {
        for policy in [
            Policy::Fixed { k: 1 },
            Policy::Fixed { k: 3 },
            Policy::Heuristic { step: 3, offset: 0 },
        ] {
            let k = assign_k(&g, policy).unwrap();
            let s = solve_fixed_point(
                &g,
                &k,
                &SolverConfig {
                    timing,
                    ..Default::default()
                },
            )
            .unwrap();
            assert!(s.converged);
            let p = s.p_tx();
            for r in 0..7 {
                for c in 0..7 {
                    let here = p[r * 7 + c];
                    for (rr, cc) in orbit(r, c) {
                        assert!(
                            (p[rr * 7 + cc] - here).abs() <= 1e-9,
                            "{policy} ({r},{c}) vs ({rr},{cc})"
                        );
                    }
                }
            }
        }
    }
}

fn small_topology() -> impl Strategy<Value = Topology> {
    (2usize..14, 1.0f64..4.0, 0.5f64..2.0, any::<u64>())
        .prop_map(|(n, side, range, seed)| generate_random_udg(n, side, range, seed).unwrap())
}

fn probs_for(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), Just(1.0), 0.0f64..=1.0], n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn update_map_stays_in_unit_cube(
        (t, p) in small_topology().prop_flat_map(|t| { let n = t.len(); (Just(t), probs_for(n)) }),
        kmax in 1u32..5,
        marginal in any::<bool>(),
    ) {
        let timing = if marginal { TimingModel::Marginal } else { TimingModel::MeanInstant };
        let k = KAssignment {
            k: (0..t.len()).map(|i| 1 + (i as u32 % kmax)).collect(),
            policy: Policy::Fixed { k: 1 },
        };
        let out = update_map(&t, &k, &p, timing).unwrap();
        prop_assert!(out.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn update_map_is_monotone(
        (t, p) in small_topology().prop_flat_map(|t| { let n = t.len(); (Just(t), probs_for(n)) }),
        k0 in 1u32..4,
        node_seed in any::<usize>(),
        shrink in 0.0f64..=1.0,
    ) {
        let n = t.len();
        let i = node_seed % n;
        for timing in [TimingModel::Marginal, TimingModel::MeanInstant] {
            let base = KAssignment { k: vec![k0; n], policy: Policy::Fixed { k: k0 } };
            let before = update_map(&t, &base, &p, timing).unwrap();

            // Raising K_i cannot lower node i's update.
            let mut raised = base.clone();
            raised.k[i] += 1;
            let after = update_map(&t, &raised, &p, timing).unwrap();
            prop_assert!(after[i] >= before[i] - 1e-12);

            // Lowering a neighbor's probability cannot lower node i's update.
            if let Some(&j) = t.neighbors(i).first() {
                let mut q = p.clone();
                q[j] *= shrink;
                let after = update_map(&t, &base, &q, timing).unwrap();
                prop_assert!(after[i] >= before[i] - 1e-12);
            }
        }
    }

    #[test]
    fn topology_json_round_trip(t in small_topology()) {
        let back = Topology::from_json(&t.to_json().unwrap()).unwrap();
        prop_assert_eq!(&back, &t);
        // Explicit-edge form round-trips too.
        let explicit = Topology::from_edges(
            t.nodes().iter().map(|n| n.position).collect(),
            &t.edges(),
        ).unwrap();
        let back = Topology::from_json(&explicit.to_json().unwrap()).unwrap();
        prop_assert_eq!(back.edges(), t.edges());
    }

    #[test]
    fn adjacency_is_symmetric_and_irreflexive(t in small_topology()) {
        for i in 0..t.len() {
            prop_assert!(!t.neighbors(i).contains(&i));
            for &j in t.neighbors(i) {
                prop_assert!(t.neighbors(j).contains(&i));
            }
            prop_assert_eq!(t.degree(i), t.neighbors(i).len());
        }
    }
}
