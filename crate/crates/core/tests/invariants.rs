use std::collections::BTreeSet;

use graph_uncertainty::bounds::{improved_bound, signal_dependent_bound, SortedMagnitudes, Variant};
use graph_uncertainty::graph::random_graph;
use graph_uncertainty::oracle::{support_feasible, SupportPair, DEFAULT_RANK_TOL};
use graph_uncertainty::rihaczek::{rihaczek, Convention};
use graph_uncertainty::spectral::{
    dft_basis, eig_sym, gft, igft, orthonormality_error, GraphSignal, SpectralBasis, DEFAULT_EIG_TOL,
};
use graph_uncertainty::{DenseMatrix, Graph};
use num_complex::Complex64;
use proptest::prelude::*;

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n, 0.2f64..=1.0, any::<u64>()).prop_map(|(n, p, seed)| random_graph(n, p, seed).unwrap())
}

fn laplacian_basis(g: &Graph) -> SpectralBasis {
    eig_sym(&g.laplacian(), DEFAULT_EIG_TOL).unwrap()
}

/// Eigenbasis of a dense random symmetric matrix: a generic orthonormal basis
/// with no graph structure behind it.
fn generic_basis_strategy(max_n: usize) -> impl Strategy<Value = SpectralBasis> {
    (2..=max_n)
        .prop_flat_map(|n| (Just(n), prop::collection::vec(-1.0f64..1.0, n * n)))
        .prop_map(|(n, vals)| {
            let m = DenseMatrix::from_fn(n, n, |r, c| vals[r.min(c) * n + r.max(c)]);
            eig_sym(&m, DEFAULT_EIG_TOL).unwrap()
        })
}

fn any_basis_strategy(max_n: usize) -> impl Strategy<Value = SpectralBasis> {
    prop_oneof![
        graph_strategy(max_n).prop_map(|g| laplacian_basis(&g)),
        generic_basis_strategy(max_n),
        (1..=max_n).prop_map(|n| dft_basis(n).unwrap()),
    ]
}

fn signal_for(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, n).prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-3))
}

fn max_entry_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn laplacian_is_symmetric_psd_with_constant_null_vector(g in graph_strategy(12)) {
        let l = g.laplacian();
        prop_assert_eq!(l.max_asymmetry(), 0.0);
        for r in l.mul_vec(&vec![1.0; g.n()]) {
            prop_assert!(r.abs() < 1e-10);
        }
        let b = laplacian_basis(&g);
        prop_assert!(b.eigenvalues().iter().all(|&x| x > -1e-9));
        prop_assert!(g.adjacency().as_slice().iter().all(|&v| v == 0.0 || v == 1.0));
    }

    #[test]
    fn laplacian_basis_invariants(g in graph_strategy(12)) {
        let b = laplacian_basis(&g);
        let n = g.n();
        prop_assert!(orthonormality_error(&b) < 1e-9);
        prop_assert!(b.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(b.eigenvalues()[0].abs() < 1e-8);
        let c = 1.0 / (n as f64).sqrt();
        for v in 0..n {
            prop_assert!((b.entry(v, 0).re - c).abs() < 1e-8);
        }
        // U diag(lambda) U^T reproduces L.
        let l = g.laplacian();
        for r in 0..n {
            for col in 0..n {
                let rebuilt: f64 = (0..n)
                    .map(|k| b.entry(r, k).re * b.eigenvalues()[k] * b.entry(col, k).re)
                    .sum();
                prop_assert!((rebuilt - l[(r, col)]).abs() < 1e-8);
            }
        }
        prop_assert_eq!(&b, &laplacian_basis(&g));
    }

    #[test]
    fn transform_round_trip_and_parseval(
        b in any_basis_strategy(10),
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = b.n();
        for _ in 0..100 {
            let x = GraphSignal(
                (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
            );
            let spec = gft(&b, &x).unwrap();
            prop_assert!((x.energy() - spec.energy()).abs() < 1e-10);
            let back = igft(&b, &spec).unwrap();
            prop_assert!(max_entry_diff(&back.0, &x.0) < 1e-10);
        }
    }

    #[test]
    fn rihaczek_energy_marginals_and_sandwich(
        (g, x) in graph_strategy(12).prop_flat_map(|g| { let n = g.n(); (Just(g), signal_for(n)) }),
    ) {
        let b = laplacian_basis(&g);
        let x = GraphSignal::from_real(&x);
        let graph = rihaczek(&b, &x, Convention::Graph).unwrap();
        let classical = rihaczek(&b, &x, Convention::Classical).unwrap();
        for d in [&graph, &classical] {
            prop_assert!((d.total() - 1.0).norm() < 1e-10);
            let (vr, sr) = d.marginal_residuals();
            prop_assert!(vr < 1e-10 && sr < 1e-10);
            let l1 = d.l1_norm();
            prop_assert!(l1 >= 1.0 - 1e-10);
            prop_assert!(l1 <= d.l1_upper_bound() + 1e-10);
        }
        prop_assert!(max_entry_diff(graph.entries().as_slice(), classical.entries().as_slice()) < 1e-12);
    }

    #[test]
    fn classical_convention_energy_on_complex_data(
        n in 1usize..12,
        parts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 12),
    ) {
        let b = dft_basis(n).unwrap();
        let x = GraphSignal(parts[..n].iter().map(|&(re, im)| Complex64::new(re, im)).collect());
        prop_assume!(x.energy() > 1e-6);
        let d = rihaczek(&b, &x, Convention::Classical).unwrap();
        prop_assert!((d.total() - 1.0).norm() < 1e-10);
        let (vr, sr) = d.marginal_residuals();
        prop_assert!(vr < 1e-10 && sr < 1e-10);
    }

    #[test]
    fn bound_chain_window_and_equivalence(b in any_basis_strategy(12)) {
        let n = b.n() as f64;
        let s = SortedMagnitudes::from_basis(&b).unwrap();
        prop_assert!((s.total_energy() - n).abs() < 1e-9);
        prop_assert!(s.values().windows(2).all(|w| w[0] >= w[1]));
        let classical = s.classical_bound();
        let sq = improved_bound(&b, Variant::Squared).unwrap();
        let lin = improved_bound(&b, Variant::Linear).unwrap();
        prop_assert!(sq.improved_q >= classical - 1e-12);
        prop_assert!(lin.improved_q >= sq.improved_q - 1e-12);
        for r in [&sq, &lin] {
            prop_assert!(r.terminated && !r.clamped);
            prop_assert!(r.improved_q >= 1.0 - 1e-12 && r.improved_q <= n + 1e-9);
            prop_assert!(r.iterations.windows(2).all(|w| w[0].ceil_q < w[1].ceil_q));
            let (_, direct) = s.direct_search(r.variant).unwrap();
            prop_assert!((direct - r.improved_q).abs() < 1e-9);
        }
        for v in Variant::BOTH {
            for p in 1..s.len() {
                prop_assert!(s.qn(p + 1, v).unwrap() >= s.qn(p, v).unwrap() - 1e-12);
            }
        }
        prop_assert!((s.sum_bound().unwrap() - 2.0 * lin.improved_q.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn signal_dependent_bound_dominates_sorted_prefix(
        b in any_basis_strategy(8),
        m_mask in 1u16..256,
        k_mask in 1u16..256,
    ) {
        let n = b.n();
        let pick = |mask: u16| -> BTreeSet<usize> {
            let set: BTreeSet<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            if set.is_empty() { [0].into() } else { set }
        };
        let (m, k) = (pick(m_mask), pick(k_mask));
        let s = SortedMagnitudes::from_basis(&b).unwrap();
        let dependent = signal_dependent_bound(&b, &m, &k).unwrap();
        let prefix = s.qn(m.len() * k.len(), Variant::Squared).unwrap();
        prop_assert!(dependent >= prefix - 1e-9);
    }

    #[test]
    fn feasibility_is_monotone_under_enlargement(
        g in graph_strategy(7),
        m_mask in 1u16..128,
        k_mask in 1u16..128,
        extra in 0usize..7,
    ) {
        let b = laplacian_basis(&g);
        let n = b.n();
        let pick = |mask: u16| -> BTreeSet<usize> {
            let set: BTreeSet<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            if set.is_empty() { [0].into() } else { set }
        };
        let (m, k) = (pick(m_mask), pick(k_mask));
        let base = support_feasible(&b, &SupportPair::new(m.clone(), k.clone(), n).unwrap(), DEFAULT_RANK_TOL).unwrap();
        if base.feasible && !base.marginal {
            let mut bigger_m = m.clone();
            bigger_m.insert(extra % n);
            let mut bigger_k = k.clone();
            bigger_k.insert(extra % n);
            for (mm, kk) in [(bigger_m, k.clone()), (m.clone(), bigger_k)] {
                let f = support_feasible(&b, &SupportPair::new(mm, kk, n).unwrap(), DEFAULT_RANK_TOL).unwrap();
                prop_assert!(f.feasible);
            }
        }
    }
}
