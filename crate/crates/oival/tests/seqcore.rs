use oival::seqcore::*;
use proptest::prelude::*;

fn seq(s: &str) -> IncSeq {
    parse_seq(s).unwrap()
}

fn pt(s: &str) -> Point {
    parse_point(s).unwrap()
}

/// Eventually-arithmetic sequence evaluated without the library.
#[derive(Debug, Clone)]
struct Ea {
    prefix: Vec<u64>,
    start: u64,
    step: u64,
}

impl Ea {
    fn at(&self, n: u64) -> u64 {
        let len = self.prefix.len() as u64;
        if n <= len {
            self.prefix[(n - 1) as usize]
        } else {
            self.start + (n - len - 1) * self.step
        }
    }

    fn spec(&self) -> String {
        let p: Vec<String> = self.prefix.iter().map(u64::to_string).collect();
        if p.is_empty() {
            format!("arith({},{})", self.start, self.step)
        } else {
            format!("list({};arith({},{}))", p.join(","), self.start, self.step)
        }
    }

    fn seq(&self) -> IncSeq {
        seq(&self.spec())
    }

    fn contains(&self, k: u64) -> bool {
        self.prefix.contains(&k) || (k >= self.start && (k - self.start).is_multiple_of(self.step))
    }
}

fn ea(max_step: u64) -> impl Strategy<Value = Ea> {
    (prop::collection::btree_set(1u64..60, 0..6), 1u64..40, 1..=max_step).prop_map(|(p, gap, step)| {
        let prefix: Vec<u64> = p.into_iter().collect();
        let start = prefix.last().copied().unwrap_or(0) + gap;
        Ea { prefix, start, step }
    })
}

/// Iterates `y` on `min y^c` by brute force.
fn naive_tilde(y: &Ea, n: usize) -> Vec<u64> {
    let mut k = 1;
    while y.contains(k) {
        k += 1;
        if k > 10_000 {
            return (1..=n as u64).map(|i| y.at(i)).collect();
        }
    }
    let mut out = Vec::new();
    let mut cur = k;
    for _ in 0..n {
        cur = y.at(cur);
        out.push(cur);
    }
    out
}

#[test]
fn nth_examples() {
    assert_eq!(IncSeq::identity().nth(5).unwrap(), 5);
    assert_eq!(seq("arith(2,2)").nth(3).unwrap(), 6);
    let odds = seq("compl(arith(2,2); cert=arith(1,2))");
    assert_eq!(odds.nth(3).unwrap(), 5);
    assert_eq!(odds.prefix(4).unwrap(), vec![1, 3, 5, 7]);
    assert_eq!(IncSeq::identity().nth(0), Err(SeqError::ZeroIndex));
}

#[test]
fn complement_needs_a_valid_certificate() {
    assert!(parse_seq("compl(arith(2,2); cert=arith(2,2))").is_err());
    // The complement is {1,3,...,65}; the certificate leaves it at its 34th entry.
    let evens: Vec<String> = (1..=33).map(|k| (2 * k).to_string()).collect();
    let c = seq(&format!("compl(list({};arith(67,1)); cert=arith(1,2))", evens.join(",")));
    assert_eq!(c.nth(33).unwrap(), 65);
    assert_eq!(c.nth(34), Err(SeqError::DescriptorExhausted(34)));
}

#[test]
fn dist_examples() {
    assert_eq!(dist(&pt("{1,2}"), &pt("{1,3}"), 10).unwrap().to_string(), "1/2");
    assert_eq!(dist(&pt("{}"), &pt("{4}"), 10).unwrap().to_string(), "1/4");
    assert_eq!(dist(&pt("{1}"), &pt("{1}"), 10), Err(SeqError::IndistinguishableUpToHorizon(10)));
    assert_eq!(dist(&pt("arith(2,2)"), &pt("arith(1,1)"), 10).unwrap().den, 1);
}

#[test]
fn tilde_examples() {
    assert_eq!(IncSeq::tilde(IncSeq::identity()).prefix(5).unwrap(), vec![1, 2, 3, 4, 5]);
    assert_eq!(IncSeq::tilde(seq("arith(2,2)")).prefix(5).unwrap(), vec![2, 4, 8, 16, 32]);
    assert_eq!(IncSeq::tilde(seq("arith(5,1)")).prefix(4).unwrap(), vec![5, 9, 13, 17]);
}

#[test]
fn interval_examples() {
    let iv = interval(&IncSeq::identity(), 2, Bracket::Open).unwrap();
    assert!(iv.is_empty());
    let ev = seq("arith(2,2)");
    let iv = interval(&ev, 2, Bracket::Open).unwrap();
    assert_eq!(iv.elements().collect::<Vec<_>>(), vec![5]);
    let iv = interval(&ev, 1, Bracket::Closed).unwrap();
    assert_eq!(iv.elements().collect::<Vec<_>>(), vec![2, 3, 4]);
    let iv = Interval::with(3, 7, Bracket::ClosedOpen).unwrap();
    assert_eq!(iv.elements().collect::<Vec<_>>(), vec![3, 4, 5, 6]);
    let iv = Interval::with(3, 7, Bracket::OpenClosed).unwrap();
    assert_eq!(iv.elements().collect::<Vec<_>>(), vec![4, 5, 6, 7]);
    assert!(Interval::with(4, 4, Bracket::Closed).is_err());
}

#[test]
fn omission_examples() {
    let iv = Interval::with(4, 6, Bracket::Open).unwrap();
    assert!(!omits(&pt("arith(1,2)"), &iv).unwrap());
    assert!(omits(&pt("arith(2,2)"), &iv).unwrap());
    assert!(omits(&pt("{}"), &iv).unwrap());

    let ev = seq("arith(2,2)");
    assert!(omitted_indices(&pt("arith(1,2)"), &ev, Bracket::Open, 10).unwrap().is_empty());
    assert_eq!(omitted_indices(&pt("arith(2,2)"), &ev, Bracket::Open, 4).unwrap(), vec![1, 2, 3, 4]);
    let x = pt("list(1;arith(8,1))");
    let t = IncSeq::tilde(ev);
    assert_eq!(omitted_indices(&x, &t, Bracket::Open, 2).unwrap(), vec![1, 2]);
}

#[test]
fn relate_examples() {
    let v = relate(Rel::Le, &IncSeq::identity(), &seq("arith(2,2)"), 100).unwrap();
    assert_eq!(v.witnesses(), (1..=100).collect::<Vec<_>>().as_slice());

    let v = relate(Rel::Sqe, &seq("arith(4,4)"), &seq("arith(16,16)"), 50).unwrap();
    assert!(v.holds());
    assert!(v.violations.is_empty());

    let v = relate(Rel::SubStar, &seq("arith(2,2)"), &seq("arith(1,2)"), 100).unwrap();
    assert!(v.fails());
    assert_eq!(&v.violations[..3], &[2, 4, 6]);
    assert_eq!(v.violations.len(), 100);

    let v = relate(Rel::LeStar, &IncSeq::identity(), &seq("arith(2,2)"), 100).unwrap();
    assert!(v.holds());
}

#[test]
fn relate_exact_answers() {
    // 2n+10 <= 3n from n = 10 on.
    let v = relate(Rel::LeStar, &seq("arith(12,2)"), &seq("arith(3,3)"), 5).unwrap();
    assert!(v.holds());
    assert_eq!(v.violations, (1..=9).collect::<Vec<_>>());
    assert_eq!(v.witnesses().first(), Some(&10));
    // Eventually 3n > 2n+10; the last witness is n = 10.
    let v = relate(Rel::LeInf, &seq("arith(3,3)"), &seq("arith(12,2)"), 100).unwrap();
    assert_eq!(v.outcome, Outcome::FailsAt(11));
    let v = relate(Rel::LeStar, &seq("arith(3,3)"), &seq("arith(12,2)"), 100).unwrap();
    assert_eq!(v.outcome, Outcome::FailsAt(100));
    // Each closed interval [6n, 6n+6] holds exactly one of 3, 9, 15, ...
    let v = relate(Rel::Sqe, &seq("arith(3,6)"), &seq("arith(6,6)"), 40).unwrap();
    assert!(!v.holds());
    let v = relate(Rel::SubStar, &seq("list(3;arith(8,4))"), &seq("arith(2,2)"), 40).unwrap();
    assert!(v.holds());
    assert_eq!(v.violations, vec![3]);
}

#[test]
fn relate_names_round_trip() {
    for r in Rel::ALL {
        assert_eq!(r.name().parse::<Rel>().unwrap(), r);
    }
    assert!("lt".parse::<Rel>().is_err());
}

#[test]
fn quotient_examples() {
    let ev = seq("arith(2,2)");
    assert_eq!(quotient(&pt("arith(2,2)"), &ev, 10).unwrap(), (1..=10).collect::<Vec<_>>());
    assert!(quotient(&pt("arith(100,100)"), &IncSeq::identity(), 10).unwrap().is_empty());
    assert_eq!(quotient(&pt("arith(1,2)"), &ev, 5).unwrap(), vec![1, 2, 3, 4, 5]);
    // The library's quotient stream agrees with the finite form.
    let q = IncSeq::quot(seq("arith(7,7)"), seq("arith(2,2)"));
    // 7, 14, 21, 28 fall in [6,8), [14,16), [20,22), [28,30).
    assert_eq!(q.prefix(4).unwrap(), vec![3, 7, 10, 14]);
    assert_eq!(quotient(&pt("arith(7,7)"), &ev, 14).unwrap(), vec![3, 7, 10, 14]);
}

#[test]
fn omit0_examples() {
    let v = omit0_check(&pt("list(1;arith(8,1))"), &seq("arith(2,2)"), 2).unwrap();
    assert!(v.holds());
    assert_eq!(v.witnesses(), &[2]);
    let v = omit0_check(&pt("arith(1,2)"), &seq("arith(2,2)"), 10).unwrap();
    assert!(v.holds());
    assert!(v.witnesses().is_empty());
    assert_eq!(omit0_check(&pt("id"), &seq("arith(2,2)"), 10), Err(SeqError::XEqualsN));
}

#[test]
fn dsl_reports_positions() {
    let e = parse_seq("arith(2, 0)").unwrap_err();
    assert_eq!(e.offset, 9);
    let e = parse_seq("arith(2,2) x").unwrap_err();
    assert_eq!(e.offset, 11);
    let e = parse_seq("foo(1)").unwrap_err();
    assert_eq!(e.offset, 0);
    assert!(parse_seq(" list( 1 , 3 ; arith( 5 , 2 ) ) ").is_ok());
}

#[test]
fn dsl_display_round_trips() {
    for s in [
        "id",
        "arith(2,2)",
        "pow(3)",
        "list(1,3;arith(5,2))",
        "compl(arith(2,2);cert=arith(1,2))",
        "iunion(arith(1,2),tilde(arith(2,2)))",
        "quot(arith(3,3),id)",
        "bunion(arith(2,2);part=linear;width=2;pos=(1,2))",
        "bunion(id;part=const(3);width=1;pre=((2),(5)))",
        "bunion(id;part=bounds(list(1;arith(3,2)));width=id)",
    ] {
        assert_eq!(seq(s).to_string(), s);
    }
    assert_eq!(pt("{3,1,2}").to_string(), "{1,2,3}");
}

#[test]
fn iunion_matches_definition() {
    let s = seq("iunion(arith(1,2),tilde(arith(2,2)))");
    // Blocks [2,4) and [8,16) and [32,64).
    let mut want: Vec<u64> = vec![2, 3];
    want.extend(8..16);
    want.extend(32..64);
    assert_eq!(s.upto(63).unwrap(), want);
    assert_eq!(s.count_le(40).unwrap(), 2 + 8 + 9);
    assert!(s.contains(33).unwrap());
    assert!(!s.contains(20).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tilde_increasing_and_above_y(y in ea(4)) {
        let t = IncSeq::tilde(y.seq());
        let vals: Vec<u64> = t.iter().take(300).map_while(Result::ok).collect();
        prop_assert!(!vals.is_empty());
        prop_assert_eq!(&vals[..], &naive_tilde(&y, vals.len())[..]);
        for (i, w) in vals.windows(2).enumerate() {
            prop_assert!(w[0] < w[1], "index {}", i + 1);
        }
        for (i, &v) in vals.iter().enumerate() {
            prop_assert!(y.at(i as u64 + 1) <= v);
        }
    }

    #[test]
    fn below_first_gap_y_exceeds_index(y in ea(4)) {
        let s = y.seq();
        if let Some(k) = s.min_missing().unwrap() {
            for n in k..k + 500 {
                prop_assert!(n < y.at(n));
            }
        }
    }

    #[test]
    fn complement_is_an_involution(y in ea(4), h in 1u64..300) {
        let s = y.seq();
        if let Some(cert) = cert_for(&y) {
            let c = IncSeq::compl(s.clone(), cert).unwrap();
            let cc = IncSeq::compl(c, s.clone()).unwrap();
            prop_assert_eq!(cc.prefix(h).unwrap(), s.prefix(h).unwrap());
        }
    }

    #[test]
    fn sqe_criteria_agree(a in ea(5), b in ea(9), h in 1u64..60) {
        let (sa, sb) = (a.seq(), b.seq());
        let v = relate(Rel::Sqe, &sa, &sb, h).unwrap();
        for n in 1..=h {
            let two = v.violations.binary_search(&n).is_err();
            prop_assert_eq!(two, sqe_by_containment(&sa, &sb, n).unwrap(), "n = {}", n);
        }
    }

    #[test]
    fn relation_chain(a in ea(5), b in ea(5), h in 1u64..400) {
        let (sa, sb) = (a.seq(), b.seq());
        let star = relate(Rel::LeStar, &sa, &sb, h).unwrap();
        let le = relate(Rel::Le, &sa, &sb, star.horizon).unwrap();
        let inf = relate(Rel::LeInf, &sa, &sb, h).unwrap();
        if le.holds() {
            prop_assert!(!star.fails());
        }
        if star.holds() {
            prop_assert!(inf.holds());
        }
        for w in star.witnesses() {
            prop_assert!(a.at(*w) <= b.at(*w));
        }
    }

    #[test]
    fn eventual_domination_is_exact(a in ea(5), b in ea(5)) {
        // Decide by brute force far beyond both prefixes and crossing points.
        let far = 20_000u64;
        let truth = a.at(far) <= b.at(far) && a.at(far + 1) <= b.at(far + 1);
        let v = relate(Rel::LeStar, &a.seq(), &b.seq(), 10).unwrap();
        prop_assert_eq!(v.holds(), truth);
        prop_assert_eq!(v.fails(), !truth);
    }

    #[test]
    fn almost_inclusion_is_exact(a in ea(6), b in ea(6)) {
        let tail_in = (5_000u64..5_000 + 60).all(|n| b.contains(a.at(n)));
        let v = relate(Rel::SubStar, &a.seq(), &b.seq(), 10).unwrap();
        prop_assert_eq!(v.holds(), tail_in);
        for &e in &v.violations {
            prop_assert!(!b.contains(e));
        }
    }

    #[test]
    fn omit0_inequality(x in ea(1), y in ea(1)) {
        let (sx, sy) = (Point::Infinite(x.seq()), y.seq());
        match omit0_check(&sx, &sy, 300) {
            Err(SeqError::XEqualsN) => prop_assert!(x.prefix.is_empty() && x.start == 1),
            r => prop_assert!(r.unwrap().holds()),
        }
    }

    #[test]
    fn omitted_tilde_intervals_give_witnesses(x in ea(1), y in ea(1), h in 5u64..60) {
        let (sx, sy) = (x.seq(), y.seq());
        let Some(k) = sx.min_missing().unwrap() else { return Ok(()); };
        let t = IncSeq::tilde(sy.clone());
        let w = omitted_indices(&Point::Infinite(sx.clone()), &t, Bracket::Open, h).unwrap().len() as u64;
        let h2 = t.nth(h).unwrap();
        let v = relate(Rel::LeInf, &sy, &sx, h2).unwrap();
        let count = (1..=h2).filter(|&n| y.at(n) <= x.at(n)).count() as u64;
        prop_assert!(count + k >= w);
        if v.holds() {
            prop_assert_eq!(v.witnesses().iter().filter(|&&n| n <= h2).count() as u64, count);
        }
    }

    #[test]
    fn quotient_stream_matches_finite_form(x in ea(7), a in ea(3), h in 1u64..80) {
        let q = IncSeq::quot(x.seq(), a.seq());
        let want = quotient(&Point::Infinite(x.seq()), &a.seq(), h).unwrap();
        let got: Vec<u64> = q.iter().map(Result::unwrap).take_while(|&n| n <= h).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn counts_match_enumeration(a in ea(5), k in 1u64..500) {
        let s = a.seq();
        let brute = (1..).map(|n| a.at(n)).take_while(|&v| v <= k).count() as u64;
        prop_assert_eq!(s.count_le(k).unwrap(), brute);
        prop_assert_eq!(s.contains(k).unwrap(), a.contains(k));
        let c = IncSeq::iunion(s.clone(), IncSeq::identity());
        prop_assert_eq!(c.count_le(k).unwrap(), brute);
    }

    #[test]
    fn dsl_round_trip(a in ea(5), b in ea(5)) {
        let s = IncSeq::iunion(IncSeq::tilde(a.seq()), b.seq());
        prop_assert_eq!(parse_seq(&s.to_string()).unwrap(), s);
    }
}

/// Elements outside `y` when there are infinitely many: the gaps below the
/// tail, then one residue class the tail never meets.
fn cert_for(y: &Ea) -> Option<IncSeq> {
    if y.step == 1 {
        return None;
    }
    let r = y.start + 1;
    let prefix: Vec<u64> = (1..r).filter(|k| !y.contains(*k)).collect();
    Some(if prefix.is_empty() {
        IncSeq::arith(r, y.step).unwrap()
    } else {
        IncSeq::list(prefix, r, y.step).unwrap()
    })
}
