use jointsel::selector::{per_class_topk, ClasswiseLosses};
use proptest::prelude::*;

fn losses_and_labels() -> impl Strategy<Value = (Vec<f64>, Vec<i8>)> {
    (1usize..30).prop_flat_map(|n| {
        (
            prop::collection::vec(
                prop_oneof![9 => (0u8..20).prop_map(|v| f64::from(v) * 0.5), 1 => Just(f64::INFINITY)],
                n,
            ),
            prop::collection::vec(prop::bool::ANY.prop_map(|b| if b { 1i8 } else { -1 }), n),
        )
    })
}

fn select(losses: &[f64], labels: &[i8], k: usize) -> Vec<f64> {
    per_class_topk(ClasswiseLosses { losses, labels }, k).weights
}

proptest! {
    #[test]
    fn cardinality_is_exact((losses, labels) in losses_and_labels(), k in 1usize..12) {
        let w = select(&losses, &labels, k);
        for label in [-1i8, 1] {
            let eligible = (0..labels.len()).filter(|&j| labels[j] == label && losses[j].is_finite()).count();
            let chosen = (0..labels.len()).filter(|&j| labels[j] == label && w[j] == 1.0).count();
            prop_assert_eq!(chosen, eligible.min(k));
        }
        prop_assert!(w.iter().zip(&losses).all(|(&wi, l)| wi == 0.0 || l.is_finite()));
    }

    // Distinct losses, so the index tie-break cannot interfere.
    #[test]
    fn permutation_equivariant(
        (losses, labels) in (1usize..20).prop_flat_map(|n| (
            Just((0..n).map(|i| i as f64 * 0.75).collect::<Vec<_>>()).prop_shuffle(),
            prop::collection::vec(prop::bool::ANY.prop_map(|b| if b { 1i8 } else { -1 }), n),
        )),
        k in 1usize..8,
        perm_seed in prop::collection::vec(0u32..1000, 20),
    ) {
        let n = losses.len();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.sort_by_key(|&i| (perm_seed[i], i));
        let pl: Vec<f64> = perm.iter().map(|&i| losses[i]).collect();
        let py: Vec<i8> = perm.iter().map(|&i| labels[i]).collect();
        let w = select(&losses, &labels, k);
        let pw = select(&pl, &py, k);
        for (pos, &i) in perm.iter().enumerate() {
            prop_assert_eq!(pw[pos], w[i]);
        }
    }

    #[test]
    fn monotone_in_losses((losses, labels) in losses_and_labels(), k in 1usize..12, pick in 0usize..30, bump in 0.5f64..5.0) {
        let w = select(&losses, &labels, k);
        let j = pick % losses.len();
        let mut changed = losses.clone();
        if w[j] == 1.0 {
            changed[j] = (losses[j] - bump).max(0.0);
        } else if losses[j].is_finite() {
            changed[j] = losses[j] + bump;
        }
        prop_assert_eq!(select(&changed, &labels, k), w);
    }
}

#[test]
fn short_class_warns_once_per_class() {
    let sel = per_class_topk(
        ClasswiseLosses {
            losses: &[1.0, f64::INFINITY, 0.5, 0.2],
            labels: &[-1, -1, 1, 1],
        },
        3,
    );
    assert_eq!(sel.weights, vec![1.0, 0.0, 1.0, 1.0]);
    assert_eq!(sel.warnings.len(), 2);
    assert_eq!(sel.warnings[0].available, 1);
}
