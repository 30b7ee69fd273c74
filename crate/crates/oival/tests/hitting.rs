use oival::covers::ClopenSet;
use oival::hitting::*;
use oival::seqcore::*;
use proptest::prelude::*;

fn seq(s: &str) -> IncSeq {
    parse_seq(s).unwrap()
}

fn sel(s: &str) -> BlockSelector {
    parse_selector(s).unwrap()
}

fn linear_min(n: u64) -> u64 {
    1 + n * (n - 1) / 2
}

#[test]
fn default_partitions() {
    let lin = default_partition(Growth::Linear);
    let blocks: Vec<Vec<u64>> = (1..=3).map(|n| lin.block(n).unwrap().collect()).collect();
    assert_eq!(blocks, vec![vec![1], vec![2, 3], vec![4, 5, 6]]);
    let dbl = default_partition(Growth::Doubling);
    assert_eq!(dbl.block(3).unwrap().collect::<Vec<_>>(), vec![4, 5, 6, 7]);
    for (part, count) in [(lin, 2000), (dbl, 60)] {
        let mut next = 1;
        for n in 1..=count {
            let b = part.block(n).unwrap();
            assert_eq!(*b.start(), next);
            next = b.end() + 1;
        }
    }
    for n in 1..=60 {
        assert_eq!(default_partition(Growth::Linear).start(n).unwrap(), linear_min(n));
        assert_eq!(default_partition(Growth::Doubling).start(n).unwrap(), 1 << (n - 1));
    }
}

#[test]
fn basic_open_examples() {
    let lin = BlockPartition::Linear;
    assert_eq!(basic_open(&lin, 2, 3).unwrap(), ClopenSet::avoiding(3));
    assert_eq!(basic_open(&lin, 2, 5), Err(HitError::MOutOfBlock { n: 2, m: 5 }));
    // A finite set lies in every O^n_m once the blocks pass its maximum.
    let x = Point::finite(vec![2, 5, 9]).unwrap();
    for n in 5..=20 {
        for m in lin.block(n).unwrap() {
            assert!(basic_open(&lin, n, m).unwrap().contains(&x).unwrap());
        }
    }
    assert!(!basic_open(&lin, 3, 5).unwrap().contains(&x).unwrap());
}

#[test]
fn hitting_count_examples() {
    let g = sel("part=linear;width=2");
    let full = Point::Infinite(perturb(&IncSeq::identity(), &g));
    assert_eq!(hitting_count(&full, &g, 50).unwrap(), 50);
    let evens = Point::Infinite(seq("arith(2,2)"));
    let minima = sel("part=linear;width=1");
    let expected = (1..=100).filter(|&n| linear_min(n).is_multiple_of(2)).count() as u64;
    assert_eq!(hitting_count(&evens, &minima, 100).unwrap(), expected);
    assert_eq!(hitting_count(&Point::finite(vec![]).unwrap(), &g, 30).unwrap(), 0);
}

#[test]
fn kun_embed_examples() {
    let s = IncSeq::identity();
    let g = sel("part=doubling;width=1");
    let e = kun_embed(1, &g, &s, 40).unwrap();
    let sp = e.s_prime.prefix(40).unwrap();
    for (i, v) in sp.iter().enumerate() {
        assert!((i as u64) < *v);
        assert!(v.is_power_of_two(), "{v} is a block minimum");
    }
    let s = seq("arith(2,2)");
    let g = sel("part=linear;width=2");
    let e = kun_embed(2, &g, &s, 10_000).unwrap();
    assert!(check_kun(2, &s, &e).unwrap());
    let sp = e.s_prime.prefix(10_000).unwrap();
    assert!(sp.iter().enumerate().all(|(i, &v)| 2 * (i as u64 + 1) <= v));
    let image = perturb(&IncSeq::identity(), &g);
    assert!(sp.iter().all(|&v| image.contains(v).unwrap()));
    assert_eq!(kun_embed(3, &g, &s, 10), Err(HitError::NeedsConstWidth));
}

/// Largest number of `s'` points strictly between `s(n)` and `s(n+2)`, by direct scan.
fn windows(s: &IncSeq, sp: &IncSeq, h: u64) -> u64 {
    let sv = s.prefix(h + 2).unwrap();
    let pts = sp.upto(sv[h as usize + 1]).unwrap();
    (0..h as usize).map(|i| pts.iter().filter(|&&v| sv[i] < v && v < sv[i + 2]).count() as u64).max().unwrap()
}

#[test]
fn sparse_embed_examples() {
    let s = seq("arith(10,10)");
    let e = sparse_embed(&s, 1, &sel("part=linear;width=1"), 2000).unwrap();
    assert!(windows(&s, &e.s_prime, 2000) <= 1);
    let chosen = e.s_prime.upto(20_000).unwrap();
    for w in chosen.windows(2) {
        assert!((w[0] + 1..w[1]).filter(|v| v % 10 == 0).count() >= 2);
    }
    let e = sparse_embed(&s, 3, &sel("part=linear;width=3"), 2000).unwrap();
    let m = windows(&s, &e.s_prime, 2000);
    assert!(m <= 3);
    assert_eq!(max_window(&s, &e.s_prime, 2000).unwrap(), m);
    assert!(e.t_prefix.len() > 10);
}

#[test]
fn guard_values() {
    let a = seq("arith(2,2)");
    let c = perturbation_guard(Width::Const(1), &a, 1000).unwrap();
    assert_eq!(c[..6], [1, 6, 20, 62, 188, 566]);
    let c = perturbation_guard(Width::Id, &a, 1000).unwrap();
    assert_eq!(c[..4], [1, 6, 50, 2602]);
    assert!(c.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn perturb_examples() {
    let g = sel("part=linear;width=2");
    let evens = perturb(&seq("arith(2,2)"), &g).upto(5000).unwrap();
    let odds = perturb(&seq("arith(1,2)"), &g).upto(5000).unwrap();
    assert!(evens.iter().all(|v| odds.binary_search(v).is_err()));
    let s = seq("list(1,4,5;arith(9,3))");
    let out = perturb(&s, &g).upto(linear_min(81) - 1).unwrap();
    for n in 1..=80 {
        let inside = out.iter().filter(|&&v| linear_min(n) <= v && v < linear_min(n + 1)).count() as u64;
        let want = if s.contains(n).unwrap() { 2.min(n) } else { 0 };
        assert_eq!(inside, want, "block {n}");
    }
}

#[test]
fn defeat_examples() {
    let part = BlockPartition::Linear;
    let selection: Vec<Vec<u64>> = (1..=30).map(|n| vec![linear_min(n) + (n - 1) / 2]).collect();
    let g = induced_selector(&part, &selection).unwrap();
    let own = Point::Infinite(perturb(&IncSeq::identity(), &g));
    let sample = vec![Point::Infinite(seq("arith(2,2)")), own];
    let r = defeat_gamma_selection(&part, &sample, &selection, 20).unwrap();
    assert_eq!(r.point, 1);
    assert_eq!(r.failures, (1..=30).collect::<Vec<_>>());
    let ragged = induced_selector(&part, &[vec![1], vec![2], vec![4, 5, 6]]);
    assert_eq!(ragged, Err(HitError::GroupShape));
    assert_eq!(
        defeat_gamma_selection(&part, &sample, &[], 1),
        Err(HitError::NoDefeaterInSample { threshold: 1 })
    );
}

#[test]
fn pair_selections_against_a_two_hitting_sample() {
    let part = BlockPartition::Linear;
    let sample: Vec<Point> = ["part=linear;width=2", "part=linear;width=2;pos=(2,3)"]
        .iter()
        .map(|g| Point::Infinite(perturb(&IncSeq::identity(), &sel(g))))
        .collect();
    // Block 1 has a single element, so its group is truncated.
    let selection: Vec<Vec<u64>> = (1..=25).map(|n| part.block(n).unwrap().take(2).collect()).collect();
    assert_eq!(induced_selector(&part, &selection).unwrap().width(), Width::Const(2));
    let r = defeat_gamma_selection(&part, &sample, &selection, 20).unwrap();
    assert_eq!(r.point, 0);
    assert_eq!(r.failures.len(), 25);
}

#[test]
fn greedy_selection_is_defeated_by_its_own_union() {
    let part = BlockPartition::Linear;
    let sample = vec![Point::Infinite(seq("arith(1,2)")), Point::Infinite(seq("arith(2,2)"))];
    let selection = greedy_selection(&part, &sample, 1, 40).unwrap();
    let g = induced_selector(&part, &selection).unwrap();
    let mut with_defeater = sample.clone();
    with_defeater.push(Point::Infinite(perturb(&IncSeq::identity(), &g)));
    let r = defeat_gamma_selection(&part, &with_defeater, &selection, 20).unwrap();
    assert_eq!(r.point, 2);
    assert_eq!(r.failures.len(), 40);
}

#[test]
fn subset_refinement_example() {
    let s = seq("arith(2,2)");
    let g = sel("part=linear;width=1");
    let sp = subset_refinement(&s, &g, 200).unwrap();
    let image = perturb(&IncSeq::identity(), &g);
    let pts = sp.prefix(201).unwrap();
    assert!(pts.iter().all(|&v| image.contains(v).unwrap()));
    for w in pts.windows(2) {
        assert!((w[0]..=w[1]).filter(|v| v % 2 == 0).count() >= 2);
    }
    assert!(refinement_holds(&s, &sp, 200).unwrap());
}

/// Eventually-arithmetic `s` given by a sorted prefix and tail.
fn ea_spec() -> impl Strategy<Value = String> {
    (prop::collection::btree_set(1u64..40, 0..6), 1u64..20, 1u64..6).prop_map(|(p, gap, d)| {
        let p: Vec<u64> = p.into_iter().collect();
        let start = p.last().copied().unwrap_or(0) + gap;
        if p.is_empty() {
            format!("arith({start},{d})")
        } else {
            let p: Vec<String> = p.iter().map(u64::to_string).collect();
            format!("list({};arith({start},{d}))", p.join(","))
        }
    })
}

/// Subsets of `[1, 200]` that leave out whole `c`-intervals at random.
fn guard_sample(c: Vec<u64>) -> impl Strategy<Value = Vec<u64>> {
    (prop::collection::vec(any::<bool>(), c.len()), prop::collection::vec(any::<bool>(), 200)).prop_map(
        move |(omit, keep)| {
            (1..=200u64)
                .filter(|&v| {
                    let i = c.partition_point(|&x| x < v);
                    let inside = i > 0 && i < c.len() && c[i - 1] < v && v < c[i];
                    keep[v as usize - 1] && !(inside && omit[i - 1])
                })
                .collect()
        },
    )
}

fn guard_c() -> Vec<u64> {
    perturbation_guard(Width::Id, &seq("arith(2,2)"), 200).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn guard_brute_force(s in guard_sample(guard_c())) {
        let c = guard_c();
        let g = sel("part=linear;width=id");
        // With width id on the linear partition, g(m) is all of I_m.
        let mut b = vec![false; 201];
        for &m in &s {
            for v in linear_min(m)..linear_min(m + 1) {
                if v <= 200 {
                    b[v as usize] = true;
                }
            }
        }
        let mut checked = Vec::new();
        for n in 0..c.len() - 1 {
            let (lo, hi) = (c[n], c[n + 1]);
            if hi > 200 {
                break;
            }
            if s.iter().any(|&v| lo < v && v < hi) {
                continue;
            }
            checked.push(n as u64 + 1);
            let found = (1..=100u64).any(|i| {
                let (al, ah) = (2 * i, 2 * i + 2);
                al >= lo && ah <= hi && (al + 1..ah).all(|v| !b[v as usize])
            });
            prop_assert!(found, "c-interval {n} of {s:?}");
        }
        let p = Point::finite(s.clone()).unwrap();
        let (lib_checked, failed) = check_guard(&c, &seq("arith(2,2)"), &g, &p, 200).unwrap();
        prop_assert_eq!(lib_checked, checked);
        prop_assert!(failed.is_empty());
    }

    #[test]
    fn perturb_is_injective(a in ea_spec(), b in ea_spec()) {
        let g = sel("part=linear;width=2");
        let (sa, sb) = (seq(&a), seq(&b));
        let h = 60;
        let same_input = sa.upto(h).unwrap() == sb.upto(h).unwrap();
        let same_output = perturb(&sa, &g).upto(linear_min(h + 1) - 1).unwrap()
            == perturb(&sb, &g).upto(linear_min(h + 1) - 1).unwrap();
        prop_assert_eq!(same_input, same_output);
    }

    #[test]
    fn kun_embed_dominates(s in ea_spec(), k in 1u64..4) {
        let g = sel(&format!("part=linear;width={k}"));
        let s = seq(&s);
        let e = kun_embed(k, &g, &s, 300).unwrap();
        prop_assert!(check_kun(k, &s, &e).unwrap());
        let (sv, sp) = (s.prefix(300).unwrap(), e.s_prime.prefix(300).unwrap());
        prop_assert!(sv.iter().zip(&sp).all(|(x, y)| x <= y));
    }

    #[test]
    fn sparse_embed_windows(s in ea_spec(), k in 1u64..4) {
        let g = sel(&format!("part=doubling;width={k}"));
        let s = seq(&s);
        let e = sparse_embed(&s, k, &g, 300).unwrap();
        prop_assert!(windows(&s, &e.s_prime, 300) <= k);
    }

    #[test]
    fn refinement_preserves_sqe(s in ea_spec()) {
        let s = seq(&s);
        let g = sel("part=linear;width=1");
        let sp = subset_refinement(&s, &g, 100).unwrap();
        let pts = sp.prefix(101).unwrap();
        for w in pts.windows(2) {
            prop_assert!(s.count_le(w[1]).unwrap() - s.count_le(w[0] - 1).unwrap() >= 2);
        }
    }

    /// Points beyond `c(2n)` leave many `tilde(a)`-intervals empty, which turn into
    /// infinitely-often domination witnesses.
    #[test]
    fn guarded_perturbation_gives_witnesses(s in ea_spec()) {
        let a = seq("arith(3,1)");
        let ta = IncSeq::tilde(a.clone());
        let c = perturbation_guard(Width::Const(1), &ta, 5000).unwrap();
        let g = sel("part=linear;width=1");
        let s = seq(&s);
        let x = Point::Infinite(perturb(&s, &g));
        let top = c.len() as u64 / 2;
        let w = (1..=top).filter(|&n| s.nth(n).unwrap() >= c[2 * n as usize - 1]).max().unwrap_or(0);
        let h = ta.count_le(c[2 * top as usize - 1]).unwrap();
        let omitted = omitted_indices(&x, &ta, Bracket::Open, h).unwrap().len() as u64;
        prop_assert!(omitted >= w, "{omitted} < {w}");
        let miss = x.min_missing().unwrap().unwrap();
        let Point::Infinite(xs) = &x else { unreachable!() };
        let v = relate(Rel::LeInf, &a, xs, ta.nth(h).unwrap()).unwrap();
        prop_assert!(v.witnesses().len() as u64 + miss >= omitted);
    }
}
