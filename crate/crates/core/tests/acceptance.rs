//! Acceptance suite. Prints one PASS or FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::thread;

use iltab::gen::{il_axioms, random_formula};
use iltab::semantics::random_model_with_vars;
use iltab::tableau::ProverResult;
use iltab::{
    check_frame, parse, prove, render, run, verify_hintikka, Bounds, Formula, FrameCondition,
    Label, LabelStructure, Model, Preset, Verdict,
};
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{
    check_structure_items, force, formula_strategy, naive_close, random_condition, random_label_set,
};

type Outcome = Result<String, String>;

const CORPUS_SIZE: usize = 300;
const CORPUS_SEED: u64 = 0x5eed;

fn il() -> FrameCondition {
    Preset::Il.condition()
}

fn f(s: &str) -> Formula {
    parse(s).unwrap()
}

fn root_interp(w: usize) -> BTreeMap<Label, usize> {
    BTreeMap::from([(Label::root(), w)])
}

fn criterion_1() -> Outcome {
    let (a, b, c) = (f("p"), f("q"), f("r"));
    let mut goals = il_axioms(&a, &b, &c);
    let (ca, cb) = (f("p & []q"), f("<>r |> q"));
    goals.extend(il_axioms(&ca, &cb, &a));
    goals.push(("Lemma i", f("<>p -> <>(p & []~p)")));
    goals.push(("Lemma ii", f("p |> p & []~p")));
    goals.push(("Lemma i'", f("<>(p |> q) -> <>((p |> q) & []~(p |> q))")));
    let mut failed = Vec::new();
    for (name, goal) in &goals {
        let res = prove(goal, &il(), Bounds::default()).unwrap();
        if !res.verdict.is_closed() {
            failed.push(format!("{name} [{goal}] is {}", res.verdict.status()));
        }
    }
    if failed.is_empty() {
        Ok(format!("{} instances closed under IL", goals.len()))
    } else {
        Err(failed.join("; "))
    }
}

fn separation(name: &str, goal: &Formula, logic: Preset) -> Result<String, String> {
    let strong = prove(goal, &logic.condition(), Bounds::default()).unwrap();
    if !strong.verdict.is_closed() {
        return Err(format!(
            "{name} under {} is {}",
            logic.name(),
            strong.verdict.status()
        ));
    }
    let weak = prove(goal, &il(), Bounds::default()).unwrap();
    let Verdict::Open { model, .. } = &weak.verdict else {
        return Err(format!("{name} under IL is {}", weak.verdict.status()));
    };
    model
        .check_invariants()
        .map_err(|e| format!("{name} countermodel breaks a frame law: {e}"))?;
    let frame_fails = check_frame(model, &logic.condition()).is_err();
    let refuted: Vec<usize> = (0..model.len())
        .filter(|&w| !force(model, w, goal, &BTreeMap::new()))
        .collect();
    if !frame_fails && refuted.is_empty() {
        return Err(format!(
            "{name} countermodel is an {} frame validating the goal",
            logic.name()
        ));
    }
    Ok(format!(
        "{name}: {} closed in {} stages, IL countermodel with {} worlds ({} frame check {}, refuted at {} worlds)",
        logic.name(),
        strong.stages,
        model.len(),
        logic.name(),
        if frame_fails { "fails" } else { "passes" },
        refuted.len()
    ))
}

fn criterion_2() -> Outcome {
    let p = f("p |> q -> [](p |> q)");
    let m = f("p |> q -> p & []r |> q & []r");
    let a = separation("P", &p, Preset::Ilp)?;
    let b = separation("M", &m, Preset::Ilm)?;
    Ok(format!("{a}; {b}"))
}

struct CorpusRun {
    goal: Formula,
    result: ProverResult,
}

fn corpus() -> Vec<CorpusRun> {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    let goals: Vec<Formula> = (0..CORPUS_SIZE)
        .map(|_| {
            let nvars = rng.gen_range(1..=3);
            let depth = rng.gen_range(1..=4);
            random_formula(&mut rng, depth, &["p", "q", "r"][..nvars])
        })
        .collect();
    let workers = thread::available_parallelism()
        .map_or(4, |n| n.get())
        .min(16);
    let chunk = goals.len().div_ceil(workers);
    thread::scope(|s| {
        let handles: Vec<_> = goals
            .chunks(chunk)
            .map(|part| {
                s.spawn(move || {
                    part.iter()
                        .map(|g| CorpusRun {
                            goal: g.clone(),
                            result: prove(g, &il(), Bounds::default()).unwrap(),
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().unwrap())
            .collect()
    })
}

fn tally(runs: &[CorpusRun]) -> String {
    let count = |k: &str| {
        runs.iter()
            .filter(|r| r.result.verdict.status() == k)
            .count()
    };
    format!(
        "{} closed, {} open, {} exhausted, {} unsupported",
        count("closed"),
        count("open"),
        count("exhausted"),
        count("unsupported")
    )
}

fn criterion_3(runs: &[CorpusRun]) -> Outcome {
    let mut bad = Vec::new();
    let mut open = 0;
    for run in runs {
        match &run.result.verdict {
            Verdict::Open { branch, model } => {
                open += 1;
                if let Err(v) = verify_hintikka(branch) {
                    bad.push(format!(
                        "{}: Hintikka clause {}",
                        run.goal,
                        v.clause.numeral()
                    ));
                    continue;
                }
                let interp: BTreeMap<Label, usize> = model
                    .worlds()
                    .iter()
                    .enumerate()
                    .map(|(i, w)| (w.parse().unwrap(), i))
                    .collect();
                for item in &branch.formulas {
                    let w = interp[&item.label];
                    let lib = model.eval(w, &item.formula, Some(&interp)).unwrap();
                    if !lib || !force(model, w, &item.formula, &interp) {
                        bad.push(format!("{}: {item} fails in the extracted model", run.goal));
                    }
                }
            }
            Verdict::Unsupported(reason) => {
                bad.push(format!("{}: unsupported ({reason})", run.goal))
            }
            _ => {}
        }
    }
    if bad.is_empty() {
        Ok(format!(
            "{} formulas ({}); {open} open branches verified",
            runs.len(),
            tally(runs)
        ))
    } else {
        Err(format!("{} violations, first: {}", bad.len(), bad[0]))
    }
}

fn criterion_4(runs: &[CorpusRun]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED ^ 4);
    let vars: Vec<String> = ["p", "q", "r"].iter().map(|s| s.to_string()).collect();
    let models: Vec<Model> = (0..200)
        .map(|_| random_model_with_vars(rng.gen_range(1..=6), &il(), rng.gen(), &vars).unwrap())
        .collect();
    let mut closed = 0;
    let mut bad = Vec::new();
    for run in runs.iter().filter(|r| r.result.verdict.is_closed()) {
        closed += 1;
        for (k, m) in models.iter().enumerate() {
            for w in 0..m.len() {
                if !force(m, w, &run.goal, &BTreeMap::new()) || !m.eval(w, &run.goal, None).unwrap()
                {
                    bad.push(format!("{} fails at world {w} of model {k}", run.goal));
                }
            }
        }
    }
    if closed == 0 {
        return Err("no closed verdicts in the corpus".into());
    }
    if bad.is_empty() {
        Ok(format!(
            "{closed} closed goals hold on all 200 random IL models"
        ))
    } else {
        Err(format!("{} counterexamples, first: {}", bad.len(), bad[0]))
    }
}

fn criterion_5() -> Outcome {
    let gamma = [f("<>p"), f("p |> q"), f("q |> p")];
    let bounds = Bounds {
        max_stages: 200,
        ..Bounds::default()
    };
    let res = run(&gamma, &il(), bounds).unwrap();
    if !matches!(res.verdict, Verdict::Exhausted) {
        return Err(format!("verdict is {}", res.verdict.status()));
    }
    if res.stages != 200 {
        return Err(format!(
            "stopped after {} stages instead of at the bound",
            res.stages
        ));
    }
    let trace = &res.label_trace;
    if let Some(i) = trace.windows(2).position(|w| w[1] < w[0]) {
        return Err(format!("label count drops at stage {}", i + 2));
    }
    let checkpoints: Vec<usize> = (1..=4).map(|k| trace[k * trace.len() / 4 - 1]).collect();
    if checkpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(format!(
            "label count stalls between quarter checkpoints {checkpoints:?}"
        ));
    }
    Ok(format!(
        "exhausted at stage {} with label counts {:?} at each quarter",
        res.stages, checkpoints
    ))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let conditions = [
        il(),
        Preset::Ilp.condition(),
        random_condition(&mut rng, "random-a"),
        random_condition(&mut rng, "random-b"),
    ];
    let sets: Vec<Vec<Label>> = (0..200).map(|_| random_label_set(&mut rng, 12)).collect();
    let mut checked = 0;
    let mut fired = [0usize; 4];
    for (k, cond) in conditions.iter().enumerate() {
        for lambda in &sets {
            let ls = LabelStructure::close(lambda, cond);
            let (r, s) = naive_close(lambda, cond);
            if ls.r_pairs() != r || ls.s_triples() != s {
                return Err(format!(
                    "mismatch on {{{}}} under {}",
                    lambda
                        .iter()
                        .map(Label::to_string)
                        .collect::<Vec<_>>()
                        .join(", "),
                    cond.name()
                ));
            }
            check_structure_items(lambda, &ls.r_pairs(), &ls.s_triples(), cond)
                .map_err(|e| format!("item check under {}: {e}", cond.name()))?;
            if k >= 2 && ls.s_triples() != LabelStructure::close(lambda, &il()).s_triples() {
                fired[k] += 1;
            }
            checked += 1;
        }
    }
    Ok(format!(
        "{checked} closures agree with the naive fixpoint; random condition `{}` adds tuples on {} sets, `{}` on {}",
        conditions[2].to_string().trim_end().replace('\n', " / "),
        fired[2],
        conditions[3].to_string().trim_end().replace('\n', " / "),
        fired[3]
    ))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let vars = ["p", "q", "r"];
    let owned: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
    let mut mismatches = Vec::new();
    for _ in 0..100 {
        let m = random_model_with_vars(rng.gen_range(1..=6), &il(), rng.gen(), &owned).unwrap();
        let x = rng.gen_range(0..m.len());
        let a = random_formula(&mut rng, 3, &vars);
        let b = random_formula(&mut rng, 3, &vars);
        let lhs = Formula::rhd(a.clone(), b.clone());
        let rhs = Formula::boxed(Formula::imp(
            a.clone(),
            Formula::neg(Formula::box_at(Label::root(), Formula::neg(b.clone()))),
        ));
        let interp = root_interp(x);
        let l = m.eval(x, &lhs, Some(&interp)).unwrap();
        let r = m.eval(x, &rhs, Some(&interp)).unwrap();
        if l != r || l != force(&m, x, &lhs, &interp) || r != force(&m, x, &rhs, &interp) {
            mismatches.push(format!("{lhs} at world {x}"));
        }
    }
    if mismatches.is_empty() {
        Ok("100 model/world/formula triples agree".into())
    } else {
        Err(format!(
            "{} mismatches, first: {}",
            mismatches.len(),
            mismatches[0]
        ))
    }
}

fn criterion_8() -> Outcome {
    let text = "p |> q -> p & []r |> q & []r";
    let parsed = f(text);
    let full = f("((p |> q) -> ((p & ([]r)) |> (q & ([]r))))");
    if parsed != full {
        return Err(format!("`{text}` parsed as `{parsed}`"));
    }
    if render(&parsed) != text {
        return Err(format!("`{text}` renders as `{}`", render(&parsed)));
    }
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: 1000,
            failure_persistence: None,
            ..Config::default()
        },
        proptest::test_runner::TestRng::deterministic_rng(
            proptest::test_runner::RngAlgorithm::ChaCha,
        ),
    );
    runner
        .run(&formula_strategy(), |g| {
            let back = parse(&render(&g))
                .map_err(|e| proptest::test_runner::TestCaseError::fail(e.to_string()))?;
            proptest::prop_assert_eq!(back, g);
            Ok(())
        })
        .map_err(|e| format!("round trip: {e}"))?;
    Ok("precedence example matches its full parenthesisation; 1000 random round trips".into())
}

fn main() -> ExitCode {
    let runs = corpus();
    let results: Vec<(usize, &str, Outcome)> = vec![
        (1, "axiom suite", criterion_1()),
        (2, "extension separation", criterion_2()),
        (3, "countermodel oracle", criterion_3(&runs)),
        (4, "soundness sampling", criterion_4(&runs)),
        (5, "non-termination sentinel", criterion_5()),
        (6, "closure-engine oracle", criterion_6()),
        (7, "translation identity", criterion_7()),
        (8, "parser", criterion_8()),
    ];
    let mut all = true;
    for (n, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS criterion {n} ({name}): {detail}"),
            Err(detail) => {
                all = false;
                println!("FAIL criterion {n} ({name}): {detail}");
            }
        }
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
