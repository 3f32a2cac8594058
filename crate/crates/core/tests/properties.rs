//! Randomized invariants over the statistical primitives.

use proptest::prelude::*;

use riskcal::fwer::{bonferroni, fixed_sequence, holm, TestGraph};
use riskcal::grid::ParameterGrid;
use riskcal::loss::{pfdr_transform, LossMatrix, LossTensor};
use riskcal::pvalues::{clt_pvalue, combine_max, hb_pvalue, PValueMatrix, PValueMethod, PValueVector};

proptest! {
    #[test]
    fn hb_pvalue_is_bounded_and_monotone(
        r1 in 0.0f64..=1.0,
        r2 in 0.0f64..=1.0,
        n in 1usize..400,
        alpha in 0.01f64..0.99,
    ) {
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let p_lo = hb_pvalue(lo, n, alpha).unwrap();
        let p_hi = hb_pvalue(hi, n, alpha).unwrap();
        prop_assert!((0.0..=1.0).contains(&p_lo));
        prop_assert!((0.0..=1.0).contains(&p_hi));
        prop_assert!(p_lo <= p_hi + 1e-12);
    }

    #[test]
    fn clt_pvalue_is_bounded(
        r in 0.0f64..=1.0,
        sigma in 0.0f64..=0.5,
        n in 2usize..400,
        alpha in 0.01f64..0.99,
    ) {
        let p = clt_pvalue(r, sigma, n, alpha).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn combine_max_dominates_each_risk(
        values in proptest::collection::vec(0.0f64..=1.0, 6..=24),
    ) {
        let n_risks = 3;
        let n_params = values.len() / n_risks;
        let values = values[..n_params * n_risks].to_vec();
        let matrix = PValueMatrix::new(n_params, n_risks, values, PValueMethod::Hb).unwrap();
        let combined = combine_max(&matrix);
        for j in 0..n_params {
            for l in 0..n_risks {
                prop_assert!(combined.values[j] >= matrix.get(j, l));
            }
        }
    }

    #[test]
    fn pfdr_transform_stays_in_unit_interval(
        rows in proptest::collection::vec((0.0f64..=1.0, proptest::bool::ANY), 2..40),
        alpha in 0.01f64..0.99,
    ) {
        let n = rows.len();
        let numerator: Vec<f64> = rows.iter().map(|(v, r)| if *r { *v } else { 0.0 }).collect();
        let indicator: Vec<f64> = rows.iter().map(|(_, r)| if *r { 1.0 } else { 0.0 }).collect();
        let num = LossMatrix::new(n, 1, numerator, true).unwrap();
        let ind = LossMatrix::new(n, 1, indicator, true).unwrap();
        let out = pfdr_transform(&num, &ind, alpha).unwrap();
        for i in 0..n {
            let v = out.get(i, 0);
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&v));
        }
    }

    #[test]
    fn single_start_fixed_sequence_rejects_a_prefix(
        values in proptest::collection::vec(0.0f64..=1.0, 1..30),
        delta in 0.01f64..0.5,
    ) {
        let p = PValueVector::new(values, PValueMethod::Hb).unwrap();
        let set = fixed_sequence(&p, delta, &[0]).unwrap();
        let k = set.rejected.len();
        prop_assert_eq!(&set.rejected, &(0..k).collect::<Vec<_>>());
    }

    #[test]
    fn holm_dominates_bonferroni(
        values in proptest::collection::vec(0.0f64..=1.0, 1..30),
        delta in 0.01f64..0.5,
    ) {
        let p = PValueVector::new(values, PValueMethod::Hb).unwrap();
        let b = bonferroni(&p, delta).unwrap();
        let h = holm(&p, delta).unwrap();
        prop_assert!(b.rejected.iter().all(|j| h.contains(*j)));
    }

    #[test]
    fn loss_tensor_csv_round_trips(
        data in proptest::collection::vec(0.0f64..=1.0, 12..=12),
    ) {
        let slice_a = LossMatrix::new(3, 2, data[..6].to_vec(), true).unwrap();
        let slice_b = LossMatrix::new(3, 2, data[6..].to_vec(), true).unwrap();
        let tensor = LossTensor::new(vec![slice_a, slice_b]).unwrap();
        let text = tensor.to_csv();
        let back = LossTensor::from_csv(&text).unwrap();
        prop_assert_eq!(back.to_csv(), text);
    }

    #[test]
    fn test_graph_json_round_trips(
        budgets in proptest::collection::vec(0.0f64..=0.05, 2..=5),
        seed_weights in proptest::collection::vec(0.0f64..=1.0, 25..=25),
    ) {
        let n = budgets.len();
        let mut weights = vec![0.0; n * n];
        for i in 0..n {
            let row = &seed_weights[i * n..(i + 1) * n];
            let sum: f64 = row.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, w)| w).sum();
            if sum > 0.0 {
                for j in 0..n {
                    if j != i {
                        weights[i * n + j] = row[j] / sum * 0.999;
                    }
                }
            }
        }
        let graph = TestGraph::new(budgets, weights).unwrap();
        let back = TestGraph::from_json(&graph.to_json()).unwrap();
        prop_assert_eq!(back.to_json(), graph.to_json());
    }

    #[test]
    fn grid_json_round_trips(
        start in -5.0f64..5.0,
        step in 0.01f64..1.0,
        len in 2usize..20,
    ) {
        let values: Vec<Vec<f64>> = (0..len).map(|i| vec![start + step * i as f64]).collect();
        let grid = ParameterGrid::new(values, None).unwrap();
        let back = ParameterGrid::from_json(&grid.to_json()).unwrap();
        prop_assert_eq!(back.to_json(), grid.to_json());
    }
}
