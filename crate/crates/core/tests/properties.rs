use hardy_ns::hardy::{
    best_nonlocal_vertex, compute_pn, evaluate_pp, max_success_lhv, max_success_ns,
    ArgumentKind, HardyArgument, PpOutcome, RelabelSearch, Relabeling,
};
use hardy_ns::nosignaling::{is_valid_box, JointBox, Scenario};
use hardy_ns::rational::{int, ratio};
use hardy_ns::vertices::{all_strategies, deterministic_box, enumerate_vertices, VertexKind};
use proptest::prelude::*;

fn perm(d: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..d).collect::<Vec<_>>()).prop_shuffle()
}

fn relabeling(d: usize) -> impl Strategy<Value = Relabeling> {
    (perm(d), perm(d), perm(d), perm(d), any::<bool>(), any::<bool>()).prop_map(
        |(a0, a1, b0, b1, swap_alice, swap_bob)| Relabeling {
            alice: [a0, a1],
            bob: [b0, b1],
            swap_alice,
            swap_bob,
        },
    )
}

fn kind() -> impl Strategy<Value = ArgumentKind> {
    prop_oneof![Just(ArgumentKind::Conventional), Just(ArgumentKind::Relaxed)]
}

fn mixture(parts: &[(JointBox, u32)]) -> JointBox {
    let total: u32 = parts.iter().map(|(_, w)| w).sum();
    let s = parts[0].0.scenario();
    let mut table = vec![int(0); s.num_coords()];
    for (b, w) in parts {
        for (t, p) in table.iter_mut().zip(b.table()) {
            *t += p * ratio(*w as i64, total as i64);
        }
    }
    JointBox::new(s, table).unwrap()
}

fn scenarios() -> impl Strategy<Value = Scenario> {
    prop_oneof![
        (2usize..=4).prop_map(|d| Scenario::symmetric(d).unwrap()),
        Just(Scenario::from_dims([2, 3, 2, 3]).unwrap()),
        Just(Scenario::parties(2, 4).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn vertex_mixtures_are_valid_and_round_trip(
        s in scenarios(),
        picks in prop::collection::vec((any::<prop::sample::Index>(), 1u32..20), 1..6),
    ) {
        let verts = enumerate_vertices(s, VertexKind::All);
        let parts: Vec<(JointBox, u32)> = picks
            .iter()
            .map(|(i, w)| (verts[i.index(verts.len())].table.clone(), *w))
            .collect();
        let b = mixture(&parts);
        prop_assert!(is_valid_box(&b).is_valid());
        prop_assert_eq!(JointBox::from_json_str(&b.to_json_string()).unwrap(), b);
    }

    #[test]
    fn optimum_is_relabeling_invariant(
        (d, r) in (2usize..=3).prop_flat_map(|d| (Just(d), relabeling(d))),
        k in kind(),
        reversed in any::<bool>(),
    ) {
        let s = Scenario::symmetric(d).unwrap();
        let base = HardyArgument::new(k, s, int(0), Relabeling::identity(s)).unwrap();
        let moved = HardyArgument::new(k, s, int(0), r).unwrap().with_reversed(reversed);
        let a = max_success_ns(&base).unwrap();
        let b = max_success_ns(&moved).unwrap();
        prop_assert_eq!(&a.optimum, &b.optimum);
        prop_assert_eq!(
            evaluate_pp(&b.witness, &moved).unwrap(),
            PpOutcome::Satisfied(b.optimum.clone())
        );
        prop_assert_eq!(max_success_lhv(&moved).unwrap().optimum, int(0));
    }

    #[test]
    fn relaxed_optimum_monotone_in_p(
        d in 2usize..=3,
        n1 in 0i64..100,
        n2 in 0i64..100,
    ) {
        let s = Scenario::symmetric(d).unwrap();
        let (lo, hi) = (n1.min(n2), n1.max(n2));
        let at = |n: i64| {
            let arg = HardyArgument::relaxed_with_bound(s, ratio(n, 100)).unwrap();
            max_success_ns(&arg).unwrap().optimum
        };
        let (a, b) = (at(lo), at(hi));
        prop_assert!(a <= b);
        prop_assert!(b <= int(1));
    }

    #[test]
    fn pn_bounds_pp(
        d in 2usize..=3,
        picks in prop::collection::vec((any::<prop::sample::Index>(), 1u32..10), 0..4),
        w in 1u32..10,
    ) {
        let s = Scenario::symmetric(d).unwrap();
        let arg = HardyArgument::relaxed(s);
        let (_, v, _) = best_nonlocal_vertex(&arg).unwrap().unwrap();
        // deterministic boxes meeting the zero conditions keep the mixture admissible
        let admissible: Vec<JointBox> = all_strategies(s)
            .into_iter()
            .map(|st| deterministic_box(s, st))
            .filter(|b| matches!(evaluate_pp(b, &arg).unwrap(), PpOutcome::Satisfied(_)))
            .collect();
        let mut parts = vec![(v, w)];
        for (i, w) in &picks {
            parts.push((admissible[i.index(admissible.len())].clone(), *w));
        }
        let b = mixture(&parts);
        let pp = match evaluate_pp(&b, &arg).unwrap() {
            PpOutcome::Satisfied(pp) => pp,
            other => return Err(TestCaseError::fail(format!("{other:?}"))),
        };
        let rep = compute_pn(&b, &arg, RelabelSearch::Exhaustive).unwrap();
        prop_assert_eq!(&rep.pp, &pp);
        prop_assert!(pp <= rep.pn);
        prop_assert!(rep.pn <= int(1));
        prop_assert!(rep.ppc() >= int(0));
        let cyclic = compute_pn(&b, &arg, RelabelSearch::Cyclic).unwrap();
        prop_assert!(cyclic.pn <= rep.pn);
    }
}
