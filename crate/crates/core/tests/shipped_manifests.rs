use std::path::PathBuf;

use m4kit::manifest::{parse, run, RunOptions, Status};

fn shipped() -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../manifests");
    let mut out: Vec<(PathBuf, String)> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "m4"))
        .map(|p| {
            let text = std::fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect();
    out.sort();
    out
}

#[test]
fn every_manifest_round_trips() {
    let all = shipped();
    assert!(all.len() >= 8, "found {}", all.len());
    for (path, text) in all {
        let m = parse(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let again = parse(&m.to_string()).unwrap();
        assert_eq!(m.stmts(), again.stmts(), "{}", path.display());
    }
}

#[test]
fn every_manifest_builds() {
    let options = RunOptions { certify: false, ..RunOptions::default() };
    for (path, text) in shipped() {
        // realizations certify regardless of mode; they are covered elsewhere
        if text.contains("realize(") {
            continue;
        }
        let report = run(&parse(&text).unwrap(), &options).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(report.status, Status::Pass, "{}: {:#?}", path.display(), report.expectations);
    }
}

#[test]
fn run_is_deterministic() {
    let text = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../manifests/x1_tilde.m4")).unwrap();
    let m = parse(&text).unwrap();
    let a = run(&m, &RunOptions::default()).unwrap();
    let b = run(&m, &RunOptions::default()).unwrap();
    let strip = |r: &m4kit::manifest::Report| {
        r.entries.iter().map(|e| (e.name.clone(), e.certificate.clone(), e.manifold.clone())).collect::<Vec<_>>()
    };
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(a.expectations, b.expectations);
}
