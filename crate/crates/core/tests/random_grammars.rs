//! Driver against oracle on small random grammars.

use proptest::prelude::*;
use taglr::oracle::{all_strings, derive_strings};
use taglr::{build_lazy, EngineError, parse, parse_grammar_text, validate, Grammar, ParseOptions, Symbol};

struct Rng(u64);

impl Rng {
    fn next(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0
    }

    fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }
}

const LABELS: [&str; 2] = ["S", "T"];
const TERMINALS: [&str; 3] = ["a", "b", "c"];

fn constraint(rng: &mut Rng, aux_names: &[(String, &str)], label: &str) -> String {
    match rng.below(6) {
        0 | 1 => ":na".into(),
        2 => {
            let names: Vec<&str> = aux_names
                .iter()
                .filter(|(_, l)| *l == label)
                .map(|(n, _)| n.as_str())
                .filter(|_| rng.below(2) == 0)
                .collect();
            if names.is_empty() {
                String::new()
            } else {
                format!(":adj({})", names.join(","))
            }
        }
        _ => String::new(),
    }
}

/// Renders a random subtree. `foot` is consumed by the first leaf slot
/// chosen for it.
fn subtree(rng: &mut Rng, depth: u32, aux: &[(String, &str)], foot: &mut Option<String>) -> String {
    let leafy = depth == 0 || rng.below(3) == 0;
    if leafy && foot.is_none() {
        return match rng.below(3) {
            0 => "()".into(),
            _ => format!("\"{}\"", TERMINALS[rng.below(3) as usize]),
        };
    }
    let label = LABELS[rng.below(2) as usize];
    let c = constraint(rng, aux, label);
    let n = 1 + rng.below(2);
    let foot_at = foot.as_ref().map(|_| rng.below(n));
    let mut kids = Vec::new();
    for i in 0..n {
        if foot_at == Some(i) && depth <= 1 || (foot_at == Some(i) && rng.below(2) == 0) {
            let f = foot.take().unwrap();
            kids.push(format!("({f}*{})", constraint(rng, aux, &f)));
        } else if foot_at == Some(i) {
            kids.push(subtree(rng, depth.saturating_sub(1), aux, foot));
        } else {
            let mut none = None;
            kids.push(subtree(rng, depth.saturating_sub(1), aux, &mut none));
        }
    }
    if let Some(f) = foot.take() {
        kids.push(format!("({f}*{})", constraint(rng, aux, &f)));
    }
    format!("({label}{c} {})", kids.join(" "))
}

fn tree(rng: &mut Rng, label: &str, aux: &[(String, &str)], foot: bool) -> String {
    let c = constraint(rng, aux, label);
    let mut foot = foot.then(|| label.to_string());
    let n = 1 + rng.below(2);
    let mut kids: Vec<String> = (0..n).map(|_| subtree(rng, 2, aux, &mut None)).collect();
    if let Some(f) = foot.take() {
        let at = rng.below(n + 1) as usize;
        if rng.below(2) == 0 {
            kids.insert(at, format!("({f}*{})", constraint(rng, aux, &f)));
        } else {
            let mut slot = Some(f);
            kids.insert(at, subtree(rng, 2, aux, &mut slot));
        }
    }
    format!("({label}{c} {})", kids.join(" "))
}

fn random_grammar(seed: u64) -> Option<Grammar> {
    let mut rng = Rng(seed | 1);
    let aux: Vec<(String, &str)> = (0..1 + rng.below(3))
        .map(|i| (format!("b{i}"), LABELS[rng.below(2) as usize]))
        .collect();
    let mut text = String::from("start S\n");
    for i in 0..1 + rng.below(2) {
        let label = if i == 0 { "S" } else { LABELS[rng.below(2) as usize] };
        text += &format!("initial a{i} : {}\n", tree(&mut rng, label, &aux, false));
    }
    for (name, label) in &aux {
        text += &format!("aux {name} : {}\n", tree(&mut rng, label, &aux, true));
    }
    let g = parse_grammar_text(&text).ok()?;
    if !validate(&g).is_empty() || g.auxiliary_trees().any(|t| t.terminals().is_empty()) {
        return None;
    }
    Some(g)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    /// Budget overruns are skipped: some random grammars are too ambiguous
    /// for a depth-first search at this budget. Disagreements and internal
    /// inconsistencies are failures.
    #[test]
    fn driver_matches_oracle(seed in any::<u64>()) {
        let Some(g) = random_grammar(seed) else { return Ok(()) };
        let alphabet: Vec<Symbol> = g.terminals().into_iter().collect();
        let max_len = 4;
        let language = derive_strings(&g, max_len);
        let mut fsa = build_lazy(&g);
        let opts = ParseOptions { trace: false, step_budget: 5_000 };
        let mut inputs = all_strings(&alphabet, max_len);
        inputs.push(Vec::new());
        for s in inputs {
            match parse(&mut fsa, &g, &s, &opts) {
                Ok(out) => prop_assert_eq!(out.accepted(), language.contains(&s), "{:?}\n{}", s, g),
                Err(EngineError::StepBudgetExceeded { .. }) => {}
                Err(e) => return Err(TestCaseError::fail(format!("{e} on {s:?}\n{g}"))),
            }
        }
    }
}
