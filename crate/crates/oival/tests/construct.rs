use oival::construct::*;
use oival::seqcore::*;
use proptest::prelude::*;

fn seq(s: &str) -> IncSeq {
    parse_seq(s).unwrap()
}

/// Indices `n <= h` with `y(n) <= x(n)`, by direct comparison.
fn le_inf_count(y: &IncSeq, x: &IncSeq, h: u64) -> usize {
    let (yv, xv) = (y.prefix(h).unwrap(), x.prefix(h).unwrap());
    yv.iter().zip(&xv).filter(|(a, b)| a <= b).count()
}

/// Closed intervals `[y(n), y(n+1)]`, `n <= h`, disjoint from the sorted list `xs`.
fn closed_omitted(xs: &[u64], y: &IncSeq, h: u64) -> Vec<u64> {
    let yv = y.prefix(h + 1).unwrap();
    (0..h as usize)
        .filter(|&i| !xs.iter().any(|&v| yv[i] <= v && v <= yv[i + 1]))
        .map(|i| i as u64 + 1)
        .collect()
}

#[test]
fn split_examples() {
    let s = split_by_g(&IncSeq::identity(), 500).unwrap();
    assert_eq!(s.a.prefix(500).unwrap(), (1..=500).map(|n| 2 * n - 1).collect::<Vec<_>>());
    assert_eq!(s.a_compl.prefix(500).unwrap(), (1..=500).map(|n| 2 * n).collect::<Vec<_>>());
    assert_eq!(s.witnesses_a.len(), 500);
    assert_eq!(s.witnesses_compl.len(), 500);
    let s = split_by_g(&seq("arith(2,2)"), 1000).unwrap();
    let mut want: Vec<u64> = vec![2, 3];
    want.extend(8..16);
    want.extend(32..64);
    want.extend(128..256);
    assert_eq!(s.a.upto(255).unwrap(), want);
    let (a, ac) = (s.a.upto(10_000).unwrap(), s.a_compl.upto(10_000).unwrap());
    let mut all: Vec<u64> = a.iter().chain(&ac).copied().collect();
    all.sort_unstable();
    assert_eq!(all, (1..=10_000).collect::<Vec<_>>());
    assert!(le_inf_count(&seq("arith(2,2)"), &s.a, 1000) == s.witnesses_a.len());
}

#[test]
fn omit_examples() {
    let o = omit_closed_family(&[IncSeq::identity()], 3).unwrap();
    let xs = o.s.upto(100).unwrap();
    assert!(closed_omitted(&xs, &IncSeq::identity(), 90).len() >= 3);
    assert!(!o.s.is_full().unwrap());
    let ys = [seq("arith(2,2)"), seq("arith(1,2)")];
    let o = omit_closed_family(&ys, 5).unwrap();
    let xs = o.s.upto(1000).unwrap();
    for (y, w) in ys.iter().zip(&o.witnesses) {
        let direct = closed_omitted(&xs, y, 400);
        assert!(direct.len() >= 5);
        assert_eq!(&direct, w);
    }
}

#[test]
fn dominator_examples() {
    let d = interval_union_dominator(&[IncSeq::identity()], &IncSeq::identity(), 5, 1000).unwrap();
    assert!(le_inf_count(&IncSeq::identity(), &d.c, 1000) >= 5);
    assert!(!d.b.is_full().unwrap());
    let ys = [seq("arith(2,2)"), seq("arith(3,3)")];
    let d = interval_union_dominator(&ys, &seq("arith(2,2)"), 10, 100_000).unwrap();
    for (y, w) in ys.iter().zip(&d.witnesses) {
        assert!(w.len() >= 10);
        assert_eq!(le_inf_count(y, &d.c, 100_000), w.len());
    }
    // c is the union of the a-blocks indexed by b.
    let bv = d.b.upto(200).unwrap();
    let want: Vec<u64> = bv.iter().flat_map(|&n| [2 * n, 2 * n + 1]).filter(|&v| v <= 400).collect();
    assert_eq!(d.c.upto(400).unwrap(), want);
}

#[test]
fn split_step_examples() {
    let r = split_step(&[IncSeq::identity()], &IncSeq::identity(), 10, 10_000).unwrap();
    assert!(le_inf_count(&IncSeq::identity(), &r.s, 10_000) >= 10);
    assert!(le_inf_count(&IncSeq::identity(), &r.s_compl, 10_000) >= 10);
    let (s, sc) = (r.s.upto(5000).unwrap(), r.s_compl.upto(5000).unwrap());
    assert_eq!(s.len() + sc.len(), 5000);
    assert!(s.iter().all(|v| sc.binary_search(v).is_err()));
    let a = seq("arith(3,1)");
    let r = split_step(&[seq("arith(2,2)")], &a, 10, 10_000).unwrap();
    assert!(r.compl_omitted.len() >= 10);
    assert!(le_inf_count(&a, &r.s_compl, 10_000) >= 10);
}

#[test]
fn scale_step_examples() {
    let prior = ScalePrefix { kind: ScaleKind::LeStar, members: vec![IncSeq::identity()] };
    let s = scale_step(ScaleKind::LeStar, &prior, &IncSeq::identity()).unwrap();
    assert!(s.prefix(1000).unwrap().iter().enumerate().all(|(i, &v)| v > i as u64 + 1));
    let prior = ScalePrefix { kind: ScaleKind::Sqe, members: vec![seq("arith(2,2)")] };
    let s = scale_step(ScaleKind::Sqe, &prior, &IncSeq::identity()).unwrap();
    let sv = s.prefix(200).unwrap();
    for w in sv.windows(2) {
        assert!((w[0]..=w[1]).filter(|v| v % 2 == 0).count() >= 2);
    }
    assert!(relate(Rel::Sqe, &seq("arith(2,2)"), &s, 500).unwrap().holds());
    assert!(matches!(
        scale_step(ScaleKind::Sqe, &ScalePrefix::new(ScaleKind::LeStar), &s),
        Err(ConstructError::KindMismatch { .. })
    ));
}

#[test]
fn tower_step_examples() {
    let prior = ScalePrefix { kind: ScaleKind::Tower, members: vec![seq("arith(2,2)")] };
    let t = tower_step(&prior, &IncSeq::identity(), 500).unwrap();
    let tv = t.prefix(500).unwrap();
    assert!(tv.iter().enumerate().all(|(i, &v)| v % 2 == 0 && v > i as u64));
    let prior = ScalePrefix { kind: ScaleKind::Tower, members: vec![seq("arith(2,2)"), seq("arith(4,4)")] };
    let t = tower_step(&prior, &seq("arith(10,1)"), 500).unwrap();
    assert_eq!(t.prefix(5).unwrap(), vec![12, 16, 20, 24, 28]);
    let t = tower_step(&ScalePrefix::new(ScaleKind::Tower), &IncSeq::identity(), 10).unwrap();
    assert_eq!(t, IncSeq::identity());
    let bad = ScalePrefix { kind: ScaleKind::Tower, members: vec![seq("arith(2,2)"), seq("arith(1,2)")] };
    assert_eq!(tower_step(&bad, &IncSeq::identity(), 100), Err(ConstructError::NotATower(1)));
}

#[test]
fn tower_from_scale_examples() {
    let scale = ScalePrefix { kind: ScaleKind::LeStar, members: vec![IncSeq::identity()] };
    let t = tower_from_scale(&scale, &seq("arith(2,2)"), 100).unwrap();
    assert_eq!(t.sets[0], (1..=100).collect::<Vec<_>>());
    let scale = ScalePrefix { kind: ScaleKind::LeStar, members: vec![seq("arith(2,2)")] };
    assert_eq!(tower_from_scale(&scale, &IncSeq::identity(), 100), Err(ConstructError::EmptyTransform(1)));
    let scale = ScalePrefix { kind: ScaleKind::LeStar, members: vec![IncSeq::identity(), seq("arith(1,2)")] };
    let t = tower_from_scale(&scale, &seq("arith(3,3)"), 100).unwrap();
    assert_eq!(t.sets[0], t.sets[1]);
    assert_eq!(t.crossings, vec![(1, 2, 1)]);
}

#[test]
fn pseudointersection_examples() {
    let p = pseudointersection(&[seq("arith(2,2)"), seq("arith(4,4)")], 100).unwrap();
    assert_eq!(p, (1..=25).map(|n| 4 * n).collect::<Vec<_>>());
    assert_eq!(
        pseudointersection(&[seq("arith(2,2)"), seq("arith(1,2)")], 100),
        Err(ConstructError::CenteredCheckFailed(100))
    );
    assert_eq!(pseudointersection(&[seq("arith(3,5)")], 30).unwrap(), vec![3, 8, 13, 18, 23, 28]);
}

#[test]
fn disjointify_examples() {
    let b = disjointify(&[seq("arith(2,2)"), seq("arith(2,2)")], 3).unwrap();
    assert_eq!(b, vec![vec![2, 4, 8], vec![6, 10, 12]]);
    assert_eq!(disjointify(&[seq("arith(1,2)")], 1).unwrap(), vec![vec![1]]);
}

#[test]
fn oracle_families() {
    assert_eq!(OracleFamily::new(vec![], OracleRole::Dominating), Err(ConstructError::EmptyFamily));
    assert_eq!(
        OracleFamily::new(vec![IncSeq::identity(), IncSeq::identity()], OracleRole::Unbounded),
        Err(ConstructError::DuplicateOracle(1))
    );
}

#[test]
fn built_prefixes_are_valid() {
    let oracle = OracleFamily::new(
        vec![seq("arith(1,3)"), seq("list(5,6;arith(9,2))"), IncSeq::identity()],
        OracleRole::Dominating,
    )
    .unwrap();
    for kind in [ScaleKind::LeStar, ScaleKind::Sqe, ScaleKind::Tower] {
        let p = build_prefix(kind, &oracle, 16, 2000).unwrap();
        assert_eq!(p.members.len(), 16);
        let certs = p.certificates(2000).unwrap();
        assert_eq!(certs.len(), 16 * 15 / 2);
        assert!(certs.iter().all(|c| c.verdict.holds()), "{kind:?}");
    }
}

fn step1() -> impl Strategy<Value = IncSeq> {
    (prop::collection::btree_set(1u64..30, 0..5), 1u64..10).prop_map(|(p, gap)| {
        let p: Vec<u64> = p.into_iter().collect();
        let start = p.last().copied().unwrap_or(0) + gap;
        IncSeq::list(p, start, 1).unwrap()
    })
}

fn slow(max_step: u64) -> impl Strategy<Value = IncSeq> {
    (prop::collection::btree_set(1u64..30, 0..5), 1u64..10, 1..=max_step).prop_map(|(p, gap, d)| {
        let p: Vec<u64> = p.into_iter().collect();
        let start = p.last().copied().unwrap_or(0) + gap;
        IncSeq::list(p, start, d).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn splitter_tiles_and_dominates(g in step1()) {
        let s = split_by_g(&g, 2000).unwrap();
        let (a, ac) = (s.a.upto(2000).unwrap(), s.a_compl.upto(2000).unwrap());
        prop_assert_eq!(a.len() + ac.len(), 2000);
        prop_assert!(a.iter().all(|v| ac.binary_search(v).is_err()));
        prop_assert_eq!(le_inf_count(&g, &s.a, 2000), s.witnesses_a.len());
        prop_assert_eq!(le_inf_count(&g, &s.a_compl, 2000), s.witnesses_compl.len());
        // Witnesses keep coming in the upper half.
        prop_assert!(s.witnesses_a.iter().any(|&n| n > 1000));
        prop_assert!(s.witnesses_compl.iter().any(|&n| n > 1000));
    }

    #[test]
    fn omission_per_member(ys in prop::collection::vec(slow(4), 1..4), rounds in 1u64..6) {
        let o = omit_closed_family(&ys, rounds).unwrap();
        let top = o.gaps.last().unwrap().1 + 2;
        let xs = o.s.upto(top).unwrap();
        for (y, w) in ys.iter().zip(&o.witnesses) {
            let h = y.count_le(top).unwrap().saturating_sub(1);
            prop_assert!(closed_omitted(&xs, y, h).len() as u64 >= rounds);
            prop_assert!(w.len() as u64 >= rounds);
        }
    }

    #[test]
    fn dominator_witnesses_cover_omissions(ys in prop::collection::vec(step1(), 1..4), a in slow(3)) {
        let d = interval_union_dominator(&ys, &a, 5, 20_000).unwrap();
        let miss_b = d.b.min_missing().unwrap().unwrap();
        for (i, y) in ys.iter().enumerate() {
            prop_assert!(d.witnesses[i].len() >= 5);
            prop_assert_eq!(le_inf_count(y, &d.c, 20_000), d.witnesses[i].len());
            // Each omitted quotient interval below the horizon yields a witness.
            let ty = IncSeq::tilde(y.clone());
            let reach = d.omitted[i].iter().filter(|&&m| {
                let q = IncSeq::quot(ty.clone(), a.clone());
                let top = q.nth(m + 1).unwrap();
                ty.count_le(a.nth(top + 1).unwrap()).unwrap() < 20_000
            }).count() as u64;
            prop_assert!(d.witnesses[i].len() as u64 + miss_b >= reach);
        }
    }

    #[test]
    fn le_star_steps_extend(oracle in prop::collection::vec(slow(4), 1..4)) {
        let mut uniq: Vec<IncSeq> = Vec::new();
        for o in oracle {
            if !uniq.contains(&o) {
                uniq.push(o);
            }
        }
        let fam = OracleFamily::new(uniq, OracleRole::Dominating).unwrap();
        let p = build_prefix(ScaleKind::LeStar, &fam, 6, 500).unwrap();
        for j in 1..p.members.len() {
            let new = p.members[j].prefix(500).unwrap();
            for i in 0..j {
                prop_assert!(p.members[i].prefix(500).unwrap() != new);
            }
        }
        prop_assert!(p.is_valid(500).unwrap());
    }

    #[test]
    fn sqe_prefixes_are_transitive(oracle in prop::collection::vec(slow(4), 1..4)) {
        let mut uniq: Vec<IncSeq> = Vec::new();
        for o in oracle {
            if !uniq.contains(&o) {
                uniq.push(o);
            }
        }
        let fam = OracleFamily::new(uniq.clone(), OracleRole::Dominating).unwrap();
        let p = build_prefix(ScaleKind::Sqe, &fam, 5, 400).unwrap();
        for k in 0..p.members.len() {
            for i in 0..k {
                prop_assert!(sqe_by_containment(&p.members[i], &p.members[k], 40).unwrap());
            }
            let f = &uniq[k % uniq.len()];
            prop_assert!(relate(Rel::LeStar, f, &p.members[k], 400).unwrap().holds());
        }
    }

    /// Members `arith(a, d)` with `d | 12` and `a ≡ r (mod d)` all contain a tail of `r + 12ℕ`.
    #[test]
    fn tower_chains(
        r in 1u64..=12,
        members in prop::collection::vec((prop::sample::select(vec![1u64, 2, 3, 4, 6, 12]), 0u64..5), 1..4),
    ) {
        let mut uniq: Vec<IncSeq> = Vec::new();
        for (d, j) in members {
            let o = IncSeq::arith((r - 1) % d + 1 + d * j, d).unwrap();
            if !uniq.contains(&o) {
                uniq.push(o);
            }
        }
        let fam = OracleFamily::new(uniq.clone(), OracleRole::Dominating).unwrap();
        let p = build_prefix(ScaleKind::Tower, &fam, 6, 400).unwrap();
        for j in 0..p.members.len() {
            let tj = p.members[j].prefix(300).unwrap();
            let f = uniq[j % uniq.len()].prefix(300).unwrap();
            prop_assert!(f.iter().zip(&tj).all(|(a, b)| a <= b));
            for i in 0..j {
                let ti = &p.members[i];
                prop_assert!(tj.iter().all(|&v| ti.contains(v).unwrap()));
            }
        }
    }

    #[test]
    fn tower_rejects_disjoint_oracle(d in 2u64..8, a in 1u64..8, b in 1u64..8) {
        prop_assume!(a % d != b % d);
        let fam = OracleFamily::new(vec![IncSeq::arith(a, d).unwrap(), IncSeq::arith(b, d).unwrap()], OracleRole::Dominating)
            .unwrap();
        prop_assert!(matches!(
            build_prefix(ScaleKind::Tower, &fam, 2, 200),
            Err(ConstructError::CenteredCheckFailed(200))
        ));
    }

    #[test]
    fn tower_transform_crossings(oracle in prop::collection::vec(slow(3), 1..4), g in slow(6)) {
        let mut uniq: Vec<IncSeq> = Vec::new();
        for o in oracle {
            if !uniq.contains(&o) {
                uniq.push(o);
            }
        }
        let fam = OracleFamily::new(uniq, OracleRole::Dominating).unwrap();
        let scale = build_prefix(ScaleKind::LeStar, &fam, 4, 300).unwrap();
        if let Ok(t) = tower_from_scale(&scale, &g, 300) {
            for &(i, j, from) in &t.crossings {
                let (ti, tj) = (&t.sets[i - 1], &t.sets[j - 1]);
                prop_assert!(tj.iter().all(|n| *n < from || ti.binary_search(n).is_ok()));
            }
        }
    }

    #[test]
    fn disjointify_is_disjoint(fams in prop::collection::vec(slow(4), 1..5), take in 1usize..8) {
        let b = disjointify(&fams, take).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for (bi, a) in b.iter().zip(&fams) {
            prop_assert_eq!(bi.len(), take);
            for &v in bi {
                prop_assert!(a.contains(v).unwrap());
                prop_assert!(seen.insert(v));
            }
        }
    }
}
