//! Replays the checked-in fuzz seeds so they run on a stable toolchain too.

use std::fs;
use std::path::PathBuf;

use contact_pairs::expr::parse;

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(PathBuf, String)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| {
            let path = entry.unwrap().path();
            let text = fs::read_to_string(&path).unwrap();
            (path, text)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty());
    out
}

#[test]
fn config_seeds() {
    let mut accepted = 0;
    for (path, text) in seeds("config_load") {
        match cpairs::parse_config(&text) {
            Ok(_) => accepted += 1,
            Err(e) => assert!(!e.issues().is_empty(), "{}", path.display()),
        }
    }
    assert!(accepted >= 3);
}

#[test]
fn expression_seeds() {
    let point = [0.3, -1.1, 2.0, 0.7, 5.5, -0.2];
    for (path, text) in seeds("expr_parse") {
        if let Ok(e) = parse(&text, point.len()) {
            let again = parse(&e.to_string(), point.len()).unwrap();
            let (a, b) = (e.eval(&point).unwrap(), again.eval(&point).unwrap());
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{}", path.display());
        }
    }
}
