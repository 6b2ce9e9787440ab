use std::io::Cursor;
use std::path::PathBuf;

use taglr::{export_dot, fixtures, parse_grammar_text};
use taglr_cli::{run, Reply, Session, EXIT_BUDGET, EXIT_OK, EXIT_REJECT, EXIT_USAGE};

fn grammar(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "grammars", name].iter().collect();
    path.to_string_lossy().into_owned()
}

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn taglr(args: &[&str]) -> Run {
    taglr_with_input(args, "")
}

fn taglr_with_input(args: &[&str], input: &str) -> Run {
    let mut argv = vec!["taglr"];
    argv.extend_from_slice(args);
    let mut stdin = Cursor::new(input.as_bytes().to_vec());
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut stdin, &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

#[test]
fn shipped_grammars_match_fixtures() {
    let read = |n: &str| parse_grammar_text(&std::fs::read_to_string(grammar(n)).unwrap()).unwrap();
    assert_eq!(read("G1.tag").to_string(), fixtures::g1().to_string());
    assert_eq!(read("G2.tag").to_string(), fixtures::g2().to_string());
    assert_eq!(read("G_CONFLICT.tag").to_string(), fixtures::g_conflict().to_string());
}

#[test]
fn parse_exit_codes() {
    let g1 = grammar("G1.tag");
    let r = taglr(&["parse", &g1, "a", "e", "c"]);
    assert_eq!(r.code, EXIT_OK);
    assert_eq!(r.out, "accept\n");
    let r = taglr(&["parse", &g1, "a", "e"]);
    assert_eq!(r.code, EXIT_REJECT);
    assert_eq!(r.out, "reject\n");
    assert_eq!(taglr(&["parse", &g1, "--string", "a a e c c"]).code, EXIT_OK);
    assert_eq!(taglr(&["parse", &g1, "a", "x"]).code, EXIT_REJECT);
}

#[test]
fn trace_and_stats() {
    let r = taglr(&["parse", &grammar("G2.tag"), "a", "b", "e", "c", "d", "--trace", "--stats"]);
    assert_eq!(r.code, EXIT_OK);
    let resumes: Vec<&str> = r.out.lines().filter(|l| l.contains("action=resume")).collect();
    assert!(resumes[0].contains("k=1") && resumes[1].contains("k=3"), "{}", r.out);
    assert!(r.out.lines().any(|l| l.starts_with("steps=")));
}

#[test]
fn usage_and_grammar_errors() {
    assert_eq!(taglr(&[]).code, EXIT_USAGE);
    assert_eq!(taglr(&["frobnicate"]).code, EXIT_USAGE);
    assert_eq!(taglr(&["parse", "/nonexistent.tag", "a"]).code, EXIT_USAGE);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.tag");
    std::fs::write(&bad, "start S\ninitial alpha : (S \"e\"\n").unwrap();
    let r = taglr(&["check", bad.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_USAGE);
    assert!(r.err.contains("syntax error"), "{}", r.err);
    assert_eq!(taglr(&["--help"]).code, EXIT_OK);
}

#[test]
fn step_budget_exit_code() {
    let lp = grammar("LOOP.tag");
    let r = taglr(&["parse", &lp, "e", "e", "--budget", "200"]);
    assert_eq!(r.code, EXIT_BUDGET);
    assert!(r.err.contains("step budget of 200 exceeded"), "{}", r.err);
    // Unknown tokens are rejected before any search.
    assert_eq!(taglr(&["parse", &lp, "f", "--budget", "200"]).code, EXIT_REJECT);
}

#[test]
fn check_and_build() {
    let r = taglr(&["check", &grammar("G_CONFLICT.tag")]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.out.contains("conflict state"), "{}", r.out);
    assert!(r.out.contains("reduce-root <beta,") && r.out.contains("reduce-root <beta2,"), "{}", r.out);
    let dir = tempfile::tempdir().unwrap();
    let snap = dir.path().join("g1.json");
    let r = taglr(&["build", &grammar("G1.tag"), "--mode", "lazy", "-o", snap.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_OK);
    assert_eq!(r.out, "1 states, 0 expanded, 0 conflicted\n");
    let r = taglr(&["parse", &grammar("G1.tag"), "a", "e", "c", "--table", snap.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_OK);
}

#[test]
fn snapshot_for_other_grammar() {
    let dir = tempfile::tempdir().unwrap();
    let snap = dir.path().join("g1.json");
    let snap = snap.to_str().unwrap();
    assert_eq!(taglr(&["build", &grammar("G1.tag"), "-o", snap]).code, EXIT_OK);
    let g2 = grammar("G2.tag");
    let r = taglr(&["parse", &g2, "b", "e", "d", "--table", snap]);
    assert_eq!(r.code, EXIT_USAGE);
    assert!(r.err.contains("snapshot was built for grammar"), "{}", r.err);
    let r = taglr(&["parse", &g2, "b", "e", "d", "--table", snap, "--force-rekernel"]);
    assert_eq!(r.code, EXIT_OK);
}

#[test]
fn dot_from_grammar_and_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let snap = dir.path().join("lazy.json");
    let snap = snap.to_str().unwrap();
    taglr(&["build", &grammar("G1.tag"), "--mode", "lazy", "-o", snap]);
    let r = taglr(&["dot", snap]);
    assert_eq!(r.code, EXIT_OK);
    let golden: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "tests", "golden", "lazy_g1.dot"]
        .iter()
        .collect();
    assert_eq!(r.out, std::fs::read_to_string(golden).unwrap());
    let file = dir.path().join("g2.dot");
    let r = taglr(&["dot", &grammar("G2.tag"), "-o", file.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_OK);
    let text = std::fs::read_to_string(file).unwrap();
    assert!(text.starts_with("digraph") && text.contains("peripheries=2"));
}

#[test]
fn oracle_subcommand() {
    let r = taglr(&["oracle", &grammar("G2.tag"), "--maxlen", "6", "--compare"]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.out.contains("0 disagreements"), "{}", r.out);
    let r = taglr(&["oracle", &grammar("G1.tag"), "--maxlen", "5"]);
    assert_eq!(r.out, "a a e c c\na e c\ne\n3 strings\n");
}

#[test]
fn purge_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let snap = dir.path().join("s.json");
    let snap_s = snap.to_str().unwrap();
    let r = taglr_with_input(
        &["repl", &grammar("G1.tag")],
        &format!(":parse a e c\n:add {}\n:save {snap_s}\n:quit\n", fixtures::GAMMA_DECL),
    );
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let r = taglr(&["purge", snap_s]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.out.starts_with("purged ") && !r.out.starts_with("purged 0 "), "{}", r.out);
    assert_eq!(taglr(&["parse", &grammar("G2.tag"), "a", "b", "e", "c", "d", "--table", snap_s]).code, EXIT_OK);
}

#[test]
fn repl_replay() {
    let input = format!(
        ":parse a e c\n:add {}\n:parse a b e c d\n:stats\n:rm gamma\n:parse a b e c d\n:quit\n:parse e\n",
        fixtures::GAMMA_DECL
    );
    let r = taglr_with_input(&["repl", &grammar("G1.tag")], &input);
    assert_eq!(r.code, EXIT_OK);
    let lines: Vec<&str> = r.out.lines().collect();
    assert_eq!(lines[0], "accept");
    let rekerneled = lines.iter().find(|l| l.starts_with("rekerneled: ")).unwrap();
    assert!(rekerneled.split_whitespace().skip(1).any(|id| id == "0"), "{rekerneled}");
    let verdicts: Vec<&&str> = lines
        .iter()
        .filter(|l| l.starts_with("accept") || l.starts_with("reject"))
        .collect();
    assert_eq!(verdicts.len(), 3);
    assert!(verdicts[2].starts_with("reject"), "{}", r.out);
    let stats = lines.iter().find(|l| l.starts_with("last edit:")).unwrap();
    let reused: usize = stats.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(reused > 0, "{stats}");
}

#[test]
fn repl_save_load_matches_in_memory() {
    let dir = tempfile::tempdir().unwrap();
    let snap = dir.path().join("s.json");
    let g2 = fixtures::g2();
    let mut memory = Session::new(fixtures::g1());
    let mut persisted = Session::new(fixtures::g1());
    for s in [&mut memory, &mut persisted] {
        s.execute(":parse a e c");
        s.execute(&format!(":add {}", fixtures::GAMMA_DECL));
    }
    persisted.execute(&format!(":save {}", snap.display()));
    let mut reloaded = Session::new(g2);
    let Reply::Text(t) = reloaded.execute(&format!(":load {}", snap.display())) else { panic!() };
    assert!(t.starts_with("loaded"), "{t}");
    assert_eq!(export_dot(reloaded.fsa()), export_dot(persisted.fsa()));
    for input in ["e", "a e c", "b e d", "a b e c d", "a b e d c", "a a b b e c c d d"] {
        assert_eq!(
            memory.execute(&format!(":parse {input}")),
            reloaded.execute(&format!(":parse {input}")),
            "{input}"
        );
    }
}

#[test]
fn repl_survives_errors() {
    let mut s = Session::new(fixtures::g1());
    for bad in [":add (S", ":rm nosuch", ":rm alpha", ":frob", ":load /nonexistent"] {
        let Reply::Text(t) = s.execute(bad) else { panic!() };
        assert!(t.starts_with("error"), "{bad}: {t}");
    }
    assert_eq!(s.execute(":parse a e c"), Reply::Text("accept".into()));
    assert_eq!(s.execute(":quit"), Reply::Quit);
}
