//! Acceptance criterion 10: identical run configurations (including the
//! seed) reproduce byte-identical output bodies.

use std::process::Command;

fn run(args: &[&str]) -> (Vec<u8>, i32) {
    let output = Command::new(env!("CARGO_BIN_EXE_rallyprob"))
        .args(args)
        .output()
        .expect("spawn");
    (output.stdout, output.status.code().unwrap_or(-1))
}

#[test]
fn criterion_10_byte_identical_reruns() {
    let configs: [&[&str]; 6] = [
        &["set-prob", "--m", "5", "--n", "21", "--grid", "0.1"],
        &["match-prob", "--m", "2", "--n", "11", "--g", "3", "--pa", "0.55", "--pb", "0.6"],
        &["score-dist", "--m", "2", "--n", "11", "--pa", "0.45", "--pb", "0.55"],
        &["duration-dist", "--m", "5", "--n", "21", "--p", "0.3", "--format", "json-lines"],
        &["compare", "--old", "5,21,1", "--new", "2,11,1", "--pb", "0.5", "--grid", "0.1:0.5:0.1"],
        &["simulate", "--m", "2", "--n", "11", "--pa", "0.6", "--pb", "0.4", "--trials", "50000", "--seed", "314"],
    ];
    for args in configs {
        let (first, code1) = run(args);
        let (second, code2) = run(args);
        assert_eq!(code1, 0, "{args:?} failed");
        assert_eq!(code2, 0);
        assert!(!first.is_empty());
        assert_eq!(first, second, "rerun of {args:?} differed");
    }
    println!("acceptance criterion 10 PASS: identical run configs reproduce byte-identical output for all subcommands");
}
