use approx::assert_relative_eq;
use distdiv::dataset::format_sig9;
use distdiv::knn::NeighborIndex;
use distdiv::oracle::brute_force_max_trace;
use distdiv::tasks::{
    auc, cluster_trace_accuracy, knn_classify, max_trace, mds_embed, midranks, spearman, ClusterAssignment,
};
use distdiv::{
    correction_factor, divergence_matrix, estimate_d_alpha, estimate_l2_squared, load_dataset, save_dataset,
    CrossDivergences, Dataset, DivergenceMatrix, EstimatorConfig, Group, Points, Provenance,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Points in general position: distinct coordinates on a fine lattice plus a
/// per-row offset, so exact ties between distances are rare but possible.
fn points(dim: usize, n: std::ops::Range<usize>) -> impl Strategy<Value = Points> {
    prop::collection::vec(prop::collection::vec(-1000i32..1000, dim), n).prop_map(move |rows| {
        let data: Vec<f64> = rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |&v| v as f64 / 100.0 + i as f64 * 1e-7))
            .collect();
        Points::new(data, dim).unwrap()
    })
}

fn brute_kth(points: &Points, k: usize) -> Vec<f64> {
    (0..points.len())
        .map(|i| {
            let mut d: Vec<f64> = (0..points.len())
                .filter(|&j| j != i)
                .map(|j| {
                    points.row(i).iter().zip(points.row(j)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
                })
                .collect();
            d.sort_by(f64::total_cmp);
            d[k - 1]
        })
        .collect()
}

fn scaled(p: &Points, s: f64, shift: f64) -> Points {
    Points::new(p.as_slice().iter().map(|v| v * s + shift).collect(), p.dim()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kd_tree_matches_brute_force(p in (1usize..5).prop_flat_map(|d| points(d, 2..120)), k in 1usize..8) {
        prop_assume!(k < p.len());
        let fast = NeighborIndex::build(&p).unwrap().kth_nn_within(k).unwrap();
        prop_assert_eq!(fast, brute_kth(&p, k));
    }

    #[test]
    fn kth_distance_is_monotone_in_k(p in points(2, 10..80)) {
        let idx = NeighborIndex::build(&p).unwrap();
        let d: Vec<Vec<f64>> = (1..6).map(|k| idx.kth_nn_within(k).unwrap()).collect();
        for w in d.windows(2) {
            prop_assert!(w[0].iter().zip(&w[1]).all(|(a, b)| a <= b));
        }
    }

    #[test]
    fn kth_distance_scales_with_the_data(p in points(3, 10..80), k in 1usize..6) {
        let base = NeighborIndex::build(&p).unwrap().kth_nn_within(k).unwrap();
        let doubled = NeighborIndex::build(&scaled(&p, 2.0, 0.0)).unwrap().kth_nn_within(k).unwrap();
        for (a, b) in base.iter().zip(&doubled) {
            prop_assert_eq!(2.0 * a, *b);
        }
    }

    #[test]
    fn renyi_is_affine_invariant(x in points(2, 30..60), y in points(2, 30..60), s in 0.1f64..10.0, t in -50f64..50.0) {
        let a = estimate_d_alpha(&x, &y, 3, 0.5).unwrap();
        let b = estimate_d_alpha(&scaled(&x, s, t), &scaled(&y, s, t), 3, 0.5).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-9);
    }

    #[test]
    fn l2_scales_as_inverse_volume(x in points(2, 30..60), y in points(2, 30..60), s in 0.1f64..10.0) {
        let a = estimate_l2_squared(&x, &y, 4).unwrap();
        let b = estimate_l2_squared(&scaled(&x, s, 0.0), &scaled(&y, s, 0.0), 4).unwrap();
        // L² has units of 1/volume; d = 2
        assert_relative_eq!(b * s * s, a, max_relative = 1e-9, epsilon = 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn correction_factor_is_symmetric_about_one(k in 2usize..60, alpha in 0.01f64..0.99) {
        let a = correction_factor(k, alpha).unwrap();
        let b = correction_factor(k, 2.0 - alpha).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn symmetrized_matrix_is_symmetric(groups in prop::collection::vec(points(1, 8..20), 2..5)) {
        let ds = Dataset::new(
            groups.into_iter().enumerate().map(|(i, p)| Group::new(format!("g{i}"), p, None).unwrap()).collect(),
        ).unwrap();
        for cfg in [EstimatorConfig::renyi(0.5, 3), EstimatorConfig::l2(3)] {
            let w = divergence_matrix(&ds, &cfg).unwrap();
            prop_assert!(w.is_symmetric());
            prop_assert!((0..w.len()).all(|i| w.get(i, i) == 0.0));
        }
    }

    #[test]
    fn auc_depends_only_on_order(scores in prop::collection::vec(-5f64..5.0, 2..40), flip in any::<u64>()) {
        let flags: Vec<bool> = (0..scores.len()).map(|i| (flip >> (i % 64)) & 1 == 1).collect();
        prop_assume!(flags.iter().any(|&f| f) && flags.iter().any(|&f| !f));
        let a = auc(&scores, &flags).unwrap();
        let cubed: Vec<f64> = scores.iter().map(|s| s * s * s + s).collect();
        prop_assert_eq!(a, auc(&cubed, &flags).unwrap());
        let negated: Vec<f64> = scores.iter().map(|s| -s).collect();
        assert_relative_eq!(auc(&negated, &flags).unwrap(), 1.0 - a, epsilon = 1e-12);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    // Two labels and an odd vote count rule out count ties, the only place the
    // mean-divergence tie rule could see more than ranks.
    #[test]
    fn classification_uses_only_ranks(values in prop::collection::vec(0f64..4.0, 12), k in prop::sample::select(vec![1usize, 3, 5])) {
        let w = CrossDivergences {
            row_ids: vec!["a".into(), "b".into()],
            col_ids: (0..6).map(|j| format!("t{j}")).collect(),
            values: DMatrix::from_row_slice(2, 6, &values),
        };
        let labels = ["x", "y", "x", "y", "y", "x"];
        let squared = CrossDivergences { values: w.values.map(|v| v * v), ..w.clone() };
        prop_assert_eq!(knn_classify(&w, &labels, k).unwrap(), knn_classify(&squared, &labels, k).unwrap());
    }

    #[test]
    fn trace_accuracy_ignores_cluster_names(clusters in prop::collection::vec(0usize..4, 1..40), shift in 1usize..4) {
        let truth: Vec<String> = clusters.iter().enumerate().map(|(i, c)| format!("L{}", (c + i % 2) % 4)).collect();
        let ids: Vec<String> = (0..clusters.len()).map(|i| i.to_string()).collect();
        let a = ClusterAssignment { ids: ids.clone(), cluster: clusters.clone(), n_clusters: 4 };
        let b = ClusterAssignment { ids, cluster: clusters.iter().map(|c| (c + shift) % 4).collect(), n_clusters: 4 };
        prop_assert_eq!(cluster_trace_accuracy(&truth, &a).unwrap(), cluster_trace_accuracy(&truth, &b).unwrap());
    }

    #[test]
    fn assignment_matches_exhaustive_search(counts in prop::collection::vec(prop::collection::vec(0i64..50, 1..6), 1..6)) {
        prop_assert_eq!(max_trace(&counts), brute_force_max_trace(&counts));
    }

    #[test]
    fn mds_recovers_euclidean_configurations(coords in prop::collection::vec((-10f64..10.0, -10f64..10.0), 3..12)) {
        let n = coords.len();
        let dist = |i: usize, j: usize| ((coords[i].0 - coords[j].0).powi(2) + (coords[i].1 - coords[j].1).powi(2)).sqrt();
        let w = DivergenceMatrix::new((0..n).map(|i| i.to_string()).collect(), DMatrix::from_fn(n, n, dist), Provenance::File).unwrap();
        let e = mds_embed(&w, 2).unwrap();
        for i in 0..n {
            for j in 0..n {
                let got = (e.coords.row(i) - e.coords.row(j)).norm();
                prop_assert!((got - dist(i, j)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn rank_statistics(values in prop::collection::vec(-3i32..3, 1..30)) {
        let v: Vec<f64> = values.iter().map(|&x| x as f64).collect();
        let n = v.len() as f64;
        assert_relative_eq!(midranks(&v).iter().sum::<f64>(), n * (n + 1.0) / 2.0);
        let distinct = v.iter().any(|&x| x != v[0]);
        if distinct {
            let exp: Vec<f64> = v.iter().map(|x| x.exp()).collect();
            assert_relative_eq!(spearman(&v, &exp), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn nine_digit_format_round_trips(v in prop::num::f64::NORMAL) {
        let back: f64 = format_sig9(v).parse().unwrap();
        prop_assert!((back - v).abs() <= 5e-9 * v.abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn dataset_directory_round_trip(
        groups in prop::collection::vec(
            prop::collection::vec([prop::num::f64::NORMAL | prop::num::f64::ZERO; 2], 1..8),
            1..5,
        ),
        labeled in any::<bool>(),
    ) {
        let ds = Dataset::new(
            groups
                .into_iter()
                .enumerate()
                .map(|(i, v)| {
                    let label = labeled.then(|| format!("class {}", i % 2));
                    Group::new(format!("grp{i}"), Points::from_rows(&v).unwrap(), label).unwrap()
                })
                .collect(),
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_dataset(&ds, dir.path()).unwrap();
        let back = load_dataset(dir.path()).unwrap();
        prop_assert_eq!(back.ids(), ds.ids());
        for (a, b) in ds.groups().iter().zip(back.groups()) {
            prop_assert_eq!(a.points(), b.points());
            prop_assert_eq!(a.label(), b.label());
        }
    }
}
