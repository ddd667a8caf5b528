//! Acceptance suite. Runs without the libtest harness so that one line per
//! criterion is always printed; exits non-zero if any criterion fails.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::rc::Rc;
use std::time::{Duration, Instant};

use hsmc_core::checker::{check, mod_check};
use hsmc_core::conp::{provide_counterex, witnessed_elements};
use hsmc_core::descriptor::{
    build_bk_descriptor, epsilon, scan, scan_reference, tau, DescriptorInterner, DescriptorSequence,
    Indistinguishability,
};
use hsmc_core::formula::{nest_b, parse, Formula, Modality};
use hsmc_core::kripke::{Kripke, StateId};
use hsmc_core::oracle::{exact_eval, exact_mod_check, oracle_mod_check, OracleConfig};
use hsmc_core::random::{random_formula, random_kripke, FormulaShape, KripkeShape};
use hsmc_core::reductions::{decode_assignment, qbf_to_kripke, sat_to_kripke, Cnf, Qbf};
use hsmc_core::unravel::{unravel, Direction, ForwardUnravel, Pruning, SummaryUnravel};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn load(name: &str) -> Kripke {
    let path = format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"));
    Kripke::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn f(src: &str) -> Formula {
    parse(src).unwrap_or_else(|e| panic!("{src}: {e}"))
}

fn within(start: Instant, limit: Duration) -> Outcome {
    let t = start.elapsed();
    if t <= limit {
        Ok(format!("{:.2}s", t.as_secs_f64()))
    } else {
        Err(format!("took {:.2}s, limit {:.0}s", t.as_secs_f64(), limit.as_secs_f64()))
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn k2_suite() -> Outcome {
    let start = Instant::now();
    let k = load("k2.kripke");
    let nested = "<B>(<A>p & <B>(<A>p & <B><A>p))";
    let cases = [
        ("v0 v1 v0 v1", "<A>q", true),
        ("v0 v1 v0", "<A>q", false),
        ("v0 v1 v0 v1", "<Ai>p", true),
        ("v1 v0 v1", "<Ai>p", false),
        ("v1 v0 v1 v0 v1 v0 v1", nested, true),
        ("v1 v0 v1 v0 v1", nested, false),
        ("v0 v0 v0 v1 v0", "<B>(<A>q & <B><A>p)", true),
        ("v0 v1 v0 v0 v0", "<B>(<A>q & <B><A>p)", false),
    ];
    for (track, src, want) in cases {
        let t = k.parse_track(track).unwrap();
        let phi = f(src);
        let got = check(&k, nest_b(&phi).unwrap(), &phi, &t).unwrap();
        ensure(got == want, || format!("{track} |= {src}: got {got}"))?;
        ensure(exact_eval(&k, t.states(), &phi).unwrap() == want, || format!("oracle disagrees on {track}"))?;
    }
    within(start, Duration::from_secs(1))
}

fn sched_suite() -> Outcome {
    let start = Instant::now();
    let k = load("sched.kripke");
    let chi = |p: &str, q: &str| format!("(<E><Ai>{p} & <E><Ai>{q})");
    let cases = [
        (format!("[E](<E>^4 T -> ({} | {} | {}))", chi("p1", "p2"), chi("p1", "p3"), chi("p2", "p3")), true),
        ("[E](<E>^10 T -> <E><Ai>p3)".to_string(), false),
        ("[E](<E>^6 T -> (<E><Ai>p1 & <E><Ai>p2 & <E><Ai>p3))".to_string(), false),
    ];
    let cfg = OracleConfig { depth_bound: 14 };
    for (src, want) in &cases {
        let phi = f(src);
        let got = oracle_mod_check(&k, &phi, &cfg).unwrap();
        ensure(got.holds == *want, || format!("{src}: got {}", got.holds))?;
        if let Some(t) = &got.counterexample {
            ensure(t.states()[0] == k.initial() && !exact_eval(&k, t.states(), &phi).unwrap(), || {
                format!("bad counterexample {}", k.format_states(t.states()))
            })?;
        }
    }
    within(start, Duration::from_secs(30))
}

fn mutex_suite() -> Outcome {
    let start = Instant::now();
    let k = load("mutex.kripke");
    let none = "!r0 & !r1 & !e0 & !e1";
    let mutual = f("[E]!(e0 & e1)");
    let ce = provide_counterex(&k, &mutual).unwrap().ok_or("no counterexample for [E]!(e0 & e1)")?;
    let t = ce.track.states();
    ensure(k.is_track(t) && t[0] == k.initial(), || "counterexample is not an initial track".into())?;
    ensure(!exact_eval(&k, t, &mutual).unwrap(), || "counterexample satisfies the formula".into())?;
    ensure(exact_eval(&k, t, &ce.violated).unwrap(), || "violated subformula does not hold".into())?;
    let cases = [
        ("[A](r0 -> <A>e0 | <A><A>e0)".to_string(), true),
        (format!("[A](r0 & r1 -> [A](e0 | e1 | ({none})))"), true),
        (format!("[A](r0 -> [A](e0 | ({none})))"), false),
        ("x0 -> <Bi>x0".to_string(), true),
    ];
    for (src, want) in &cases {
        let phi = f(src);
        let got = mod_check(&k, &phi).unwrap();
        ensure(got.holds == *want, || format!("{src}: got {}", got.holds))?;
        ensure(exact_mod_check(&k, &phi).unwrap().holds == *want, || format!("oracle disagrees on {src}"))?;
    }
    let mut out = within(start, Duration::from_secs(60))?;
    out.push_str(&format!(", counterexample {}", k.format_states(t)));
    Ok(out)
}

fn descriptor_goldens() -> Outcome {
    let start = Instant::now();
    let four = load("four.kripke");
    let rho = four.parse_track("v0 v0 v0 v1 v2 v1 v2 v3 v3 v2 v2").unwrap();
    let gamma = "{v0,v1,v2}";
    let delta = "{v0,v1,v2,v3}";
    let want = format!(
        "(v0,{{}},v0)[(v0,{{v0}},v0)](v0,{{v0}},v1)(v0,{{v0,v1}},v2)\
         [(v0,{gamma},v1)(v0,{gamma},v2)](v0,{gamma},v3)\
         [(v0,{delta},v3)(v0,{delta},v2)(v0,{delta},v2)]"
    );
    let got = DescriptorSequence::of_track(rho.states()).display_inline(&four);
    ensure(got == want, || format!("sequence dump\n  got  {got}\n  want {want}"))?;

    let k2 = load("k2.kripke");
    let t = k2.parse_track("v0 v1 v0 v0 v0 v0 v1").unwrap();
    let d = build_bk_descriptor(t.states(), 2, u128::MAX).unwrap();
    ensure(d.children().len() == 4, || format!("B2 root has {} children", d.children().len()))?;
    let kids: Vec<usize> = d.children().iter().map(|c| c.children().len()).collect();
    ensure(kids.iter().copied().collect::<std::collections::BTreeSet<_>>() == [0, 1, 2, 3].into(), || {
        format!("grandchild counts {kids:?}")
    })?;

    let rho = four.parse_track(LONG_TRACK).unwrap();
    let seq = DescriptorSequence::of_track(rho.states());
    let cluster = seq.clusters().into_iter().find(|c| c.start == 3).ok_or("no cluster at position 3")?;
    ensure(cluster.end == seq.len() - 1 && cluster.members.len() == 3, || "unexpected cluster".into())?;
    let configs: Vec<String> = scan(&seq, &cluster, 3).iter().map(|s| s.configuration.to_string()).collect();
    let want: Vec<&str> = SCAN_CONFIGURATIONS.split_whitespace().collect();
    ensure(configs == want, || format!("configurations {configs:?}"))?;
    ensure(configs.windows(2).all(|w| w[0] > w[1]), || "configurations not decreasing".into())?;
    within(start, Duration::from_secs(5))
}

const LONG_TRACK: &str = "v0 v1 v2 v3 v3 v2 v3 v3 v2 v3 v2 v3 v3 v2 v3 v2 v1 v3 v2 v3 v2 v1 v2 v1 v3 v2 v2 v3 v2";
const CONTRACTED: &str = "v0 v1 v2 v3 v3 v2 v3 v3 v2 v3 v2 v3 v2 v1 v3 v2 v3 v2 v1 v2 v1 v3 v2";
const SCAN_CONFIGURATIONS: &str =
    "210000 120000 111000 110100 102000 101100 100200 100110 100101 100020 100011 100002 \
                    030000 021000 012000 011100 010200 003000 002100 001200 000300 000210 000201 000120 000111";

/// Runs the forward unravelling, skipping every subtree that cannot lead
/// to `target`, and reports whether `target` itself was emitted.
fn emitted_along(k: &Kripke, target: &[StateId], budget: usize) -> bool {
    let mut walk = ForwardUnravel::new(k, target[0], budget);
    while let Some(t) = walk.next_track() {
        if t == target {
            return true;
        }
        if !target.starts_with(t) {
            walk.skip_subtree();
        }
    }
    false
}

fn contraction() -> Outcome {
    let start = Instant::now();
    let k = load("four.kripke");
    let rho = k.parse_track(LONG_TRACK).unwrap();
    let rho2 = k.parse_track(CONTRACTED).unwrap();
    ensure(emitted_along(&k, rho2.states(), 3), || "contracted track not emitted".into())?;
    ensure(!emitted_along(&k, rho.states(), 3), || "original track emitted".into())?;
    let a = build_bk_descriptor(rho.states(), 3, u128::MAX).unwrap();
    let b = build_bk_descriptor(rho2.states(), 3, u128::MAX).unwrap();
    ensure(a.canonical() == b.canonical(), || "B3-descriptors differ".into())?;
    let seq = DescriptorSequence::of_track(rho2.states());
    let mut ind = Indistinguishability::new(seq.elements());
    let pair = (0..seq.len()).find_map(|j| ind.previous(j).filter(|&i| ind.is_k_indistinguishable(i, j, 3)));
    ensure(pair.is_none(), || format!("contracted track has a 3-indistinguishable pair {pair:?}"))?;
    within(start, Duration::from_secs(300))
}

/// Largest number of initial B2 classes a structure may have in the
/// equivalence suite.
const CLASS_LIMIT: usize = 2000;

fn initial_classes(k: &Kripke, budget: usize, limit: usize) -> usize {
    let interner = Rc::new(RefCell::new(DescriptorInterner::new()));
    let mut walk = SummaryUnravel::forward(k, interner, k.initial(), budget, Pruning::Descriptor);
    let mut n = 0;
    while n <= limit && walk.next_track().is_some() {
        n += 1;
    }
    n
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let props = vec!["p".to_string(), "q".to_string()];
    let shape = FormulaShape {
        props: props.clone(),
        modalities: vec![Modality::A, Modality::Abar, Modality::B, Modality::Bbar, Modality::Ebar],
        max_modalities: 3,
        max_nest_b: 2,
        max_size: 10,
    };
    let (mut rejected, mut violated, mut by_depth) = (0, 0, BTreeMap::new());
    for _ in 0..200 {
        let n = rng.gen_range(1..=4);
        let kshape = KripkeShape { states: n, edge_probability: 0.3, props: props.clone(), label_probability: 0.5 };
        let k = loop {
            let k = random_kripke(&mut rng, &kshape);
            if initial_classes(&k, 2, CLASS_LIMIT) <= CLASS_LIMIT {
                break k;
            }
            rejected += 1;
        };
        for _ in 0..200 {
            let depth = rng.gen_range(0..3);
            let phi = loop {
                let phi = random_formula(&mut rng, &shape);
                if nest_b(&phi).unwrap() == depth {
                    break phi;
                }
            };
            *by_depth.entry(depth).or_insert(0) += 1;
            let got = mod_check(&k, &phi).unwrap();
            let want = exact_mod_check(&k, &phi).unwrap();
            ensure(got.holds == want.holds, || format!("disagreement on {phi}\n{}", k.serialize()))?;
            if let Some(t) = got.counterexample {
                violated += 1;
                ensure(!exact_eval(&k, t.states(), &phi).unwrap(), || format!("bad counterexample for {phi}"))?;
            }
        }
    }
    Ok(format!(
        "{:.2}s, 40000 pairs, 0 disagreements, {violated} violated, nest_b counts {by_depth:?}, {rejected} structures redrawn",
        start.elapsed().as_secs_f64()
    ))
}

fn random_track(rng: &mut impl Rng, k: &Kripke, len: usize) -> Vec<StateId> {
    let mut t = vec![rng.gen_range(0..k.num_states())];
    while t.len() < len {
        let succ = k.successors(*t.last().unwrap());
        t.push(succ[rng.gen_range(0..succ.len())]);
    }
    t
}

fn indistinguishability() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let props = vec!["p".to_string()];
    let (mut pairs, mut positive, mut clusters) = (0, 0, 0);
    for _ in 0..100 {
        let n = rng.gen_range(1..=3);
        let shape = KripkeShape { states: n, edge_probability: 0.6, props: props.clone(), label_probability: 0.5 };
        let k = random_kripke(&mut rng, &shape);
        let len = rng.gen_range(2..=12);
        let t = random_track(&mut rng, &k, len);
        let seq = DescriptorSequence::of_track(&t);
        let mut ind = Indistinguishability::new(seq.elements());
        for budget in 1..=2 {
            let canon: Vec<String> = (0..seq.len())
                .map(|i| build_bk_descriptor(&t[..i + 2], budget, u128::MAX).unwrap().canonical().to_string())
                .collect();
            for j in 0..seq.len() {
                for i in 0..j {
                    let same = canon[i] == canon[j];
                    let ind_ij = ind.is_k_indistinguishable(i, j, budget);
                    ensure(same == ind_ij, || format!("positions {i},{j} k={budget} of {t:?}: {ind_ij} vs {same}"))?;
                    pairs += 1;
                    positive += usize::from(same);
                }
            }
        }
        for c in seq.clusters() {
            // With as many arrays as positions no level is capped.
            let span = c.end - c.start + 1;
            for s in [1, 2, 3, span] {
                clusters += 1;
                let fast = scan(&seq, &c, s);
                let (slow, counts) = scan_reference(&seq, &c, s, &mut ind);
                ensure(fast == slow, || format!("scan mismatch on {t:?}, s={s}"))?;
                if s == span {
                    ensure(counts.c == 0 && counts.e == 0, || format!("cases c/e fired: {counts:?}"))?;
                }
            }
        }
    }
    Ok(format!(
        "{:.2}s, {pairs} pairs ({positive} indistinguishable), {clusters} cluster scans",
        start.elapsed().as_secs_f64()
    ))
}

fn reductions() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut true_qbfs = 0;
    for _ in 0..100 {
        let n = rng.gen_range(0..=4);
        let q = Qbf::random(&mut rng, n, 8);
        let (k, xi) = qbf_to_kripke(&q);
        let got = mod_check(&k, &xi).unwrap().holds;
        ensure(got == q.eval(), || format!("QBF disagreement on {q}"))?;
        true_qbfs += usize::from(got);
    }
    let mut sat = 0;
    for _ in 0..200 {
        let n = rng.gen_range(1..=6);
        let m = rng.gen_range(1..=4 * n + 2);
        let cnf = Cnf::random(&mut rng, n, m, 3);
        let (k, gamma) = sat_to_kripke(&cnf);
        let ce = provide_counterex(&k, &gamma).unwrap();
        ensure(ce.is_some() == cnf.brute_force().is_some(), || format!("SAT disagreement on {cnf}"))?;
        ensure(mod_check(&k, &gamma).unwrap().holds == ce.is_none(), || format!("engines disagree on {cnf}"))?;
        if let Some(ce) = ce {
            sat += 1;
            ensure(cnf.eval(&decode_assignment(&k, ce.track.states())), || format!("bad assignment for {cnf}"))?;
        }
    }
    let mut out = within(start, Duration::from_secs(600))?;
    out.push_str(&format!(", {true_qbfs}/100 QBFs true, {sat}/200 CNFs satisfiable"));
    Ok(out)
}

fn bound_laws() -> Outcome {
    let start = Instant::now();
    ensure(tau(2, 0) == BigUint::from(84u32), || format!("tau(2,0) = {}", tau(2, 0)))?;
    ensure(tau(1, 1) == BigUint::from(18u32), || format!("tau(1,1) = {}", tau(1, 1)))?;
    ensure(epsilon(2, 2) == BigUint::from(3u32), || format!("epsilon(2,2) = {}", epsilon(2, 2)))?;
    for n in 0..=10u64 {
        for t in 1..=10u64 {
            let e = epsilon(n, t);
            ensure(e <= BigUint::from(n + 1).pow((t - 1) as u32) && e <= BigUint::from(t).pow(n as u32), || {
                format!("epsilon({n},{t}) = {e}")
            })?;
            if n <= 6 && t <= 6 {
                ensure(e == BigUint::from(count_tuples(n, t)), || format!("epsilon({n},{t}) miscounted"))?;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let props = vec!["p".to_string()];
    let mut emitted = 0;
    for _ in 0..30 {
        let n = rng.gen_range(1..=3);
        let shape = KripkeShape { states: n, edge_probability: 0.4, props: props.clone(), label_probability: 0.5 };
        let k = random_kripke(&mut rng, &shape);
        let bound = 2 + n * n;
        for budget in 0..=2usize {
            let cap = tau(n as u64, budget as u64);
            for v in 0..n {
                for dir in [Direction::Forward, Direction::Backward] {
                    for t in unravel(&k, v, budget, dir).take(20_000) {
                        emitted += 1;
                        ensure(BigUint::from(t.len()) <= cap, || format!("emission of length {}", t.len()))?;
                        ensure(budget > 0 || t.len() <= bound, || "k=0 emission too long".into())?;
                    }
                }
            }
        }
        for v in 0..n {
            for dir in [Direction::Forward, Direction::Backward] {
                let w = witnessed_elements(&k, v, dir);
                for d in w.elements() {
                    let t = w.realize(d).ok_or("unrealizable element")?;
                    ensure(t.len() <= bound, || format!("realization of length {}", t.len()))?;
                }
            }
        }
    }
    let mut out = within(start, Duration::from_secs(60))?;
    out.push_str(&format!(", {emitted} emissions"));
    Ok(out)
}

/// Tuples of `t` naturals summing to `n`, by enumeration.
fn count_tuples(n: u64, t: u64) -> u64 {
    if t == 1 {
        return 1;
    }
    (0..=n).map(|first| count_tuples(n - first, t - 1)).sum()
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("K2 golden verdicts", k2_suite),
        ("scheduler verdicts via oracle", sched_suite),
        ("mutual exclusion verdicts", mutex_suite),
        ("descriptor goldens", descriptor_goldens),
        ("contraction", contraction),
        ("oracle equivalence", oracle_equivalence),
        ("indistinguishability and scan", indistinguishability),
        ("reduction round trips", reductions),
        ("bound laws", bound_laws),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filter.is_empty() && !filter.iter().any(|f| f == &n.to_string()) {
            continue;
        }
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match result {
            Ok(detail) => println!("criterion {n} PASS  {name} ({detail})"),
            Err(why) => {
                failed += 1;
                println!("criterion {n} FAIL  {name}: {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
