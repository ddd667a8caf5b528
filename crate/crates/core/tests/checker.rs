use hsmc_core::checker::{mod_check, mod_check_with, CheckError, CheckOptions, Mode};
use hsmc_core::formula::{nest_b, parse, Modality};
use hsmc_core::kripke::Kripke;
use hsmc_core::oracle::{exact_eval, exact_mod_check};
use hsmc_core::random::{random_formula, random_kripke, FormulaShape, KripkeShape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn load(name: &str) -> Kripke {
    let path = format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"));
    Kripke::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn shape(max_nest_b: usize) -> FormulaShape {
    FormulaShape {
        props: vec!["p".into(), "q".into()],
        modalities: vec![Modality::A, Modality::Abar, Modality::B, Modality::Bbar, Modality::Ebar],
        max_modalities: 3,
        max_nest_b,
        max_size: 10,
    }
}

#[test]
fn literal_and_quotient_modes_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let literal = CheckOptions { mode: Mode::Literal, max_tau: None, ..CheckOptions::default() };
    let fshape = shape(1);
    for _ in 0..25 {
        let n = rng.gen_range(1..=2);
        let kshape =
            KripkeShape { states: n, edge_probability: 0.5, props: fshape.props.clone(), label_probability: 0.5 };
        let k = random_kripke(&mut rng, &kshape);
        for _ in 0..20 {
            let f = random_formula(&mut rng, &fshape);
            let a = mod_check_with(&k, &f, &literal).unwrap();
            let b = mod_check(&k, &f).unwrap();
            assert_eq!(a.holds, b.holds, "{f}\n{}", k.serialize());
            assert_eq!(b.holds, exact_mod_check(&k, &f).unwrap().holds, "{f}");
        }
    }
}

#[test]
fn counterexamples_fail_and_jobs_do_not_change_them() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let fshape = shape(2);
    let parallel = CheckOptions { jobs: 3, ..CheckOptions::default() };
    let mut violated = 0;
    for _ in 0..20 {
        let n = rng.gen_range(1..=3);
        let kshape =
            KripkeShape { states: n, edge_probability: 0.4, props: fshape.props.clone(), label_probability: 0.5 };
        let k = random_kripke(&mut rng, &kshape);
        for _ in 0..10 {
            let f = random_formula(&mut rng, &fshape);
            if nest_b(&f).unwrap() > 1 && n > 2 {
                continue;
            }
            let one = mod_check(&k, &f).unwrap();
            let many = mod_check_with(&k, &f, &parallel).unwrap();
            assert_eq!(one, many, "{f}");
            if let Some(t) = &one.counterexample {
                violated += 1;
                assert_eq!(t.states()[0], k.initial());
                assert!(!exact_eval(&k, t.states(), &f).unwrap(), "{f}");
            }
        }
    }
    assert!(violated > 0);
}

#[test]
fn refusals() {
    let k = load("k2.kripke");
    assert!(matches!(mod_check(&k, &parse("<E>p").unwrap()), Err(CheckError::ContainsE)));
    let tight = CheckOptions { max_tau: Some(10), ..CheckOptions::default() };
    assert!(matches!(mod_check_with(&k, &parse("<B>p").unwrap(), &tight), Err(CheckError::TauTooLarge { .. })));
}

#[test]
fn mutex_representative_verdicts() {
    let k = load("mutex.kripke");
    let none = "!r0 & !r1 & !e0 & !e1";
    assert!(mod_check(&k, &parse("[A](r0 -> <A>e0 | <A><A>e0)").unwrap()).unwrap().holds);
    assert!(mod_check(&k, &parse(&format!("[A](r0 & r1 -> [A](e0 | e1 | ({none})))")).unwrap()).unwrap().holds);
    let v = mod_check(&k, &parse(&format!("[A](r0 -> [A](e0 | ({none})))")).unwrap()).unwrap();
    assert!(!v.holds && v.counterexample.is_some());
    assert!(mod_check(&k, &parse("x0 -> <Bi>x0").unwrap()).unwrap().holds);
}
