//! End-to-end CLI acceptance: expression round-tripping, byte determinism,
//! exit codes, and pinned outputs for the documented examples.

use diffkit_core::parse::parse_diffpoly;
use diffkit_core::scalars::DiffFieldCtx;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diffkit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr_str(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf8 stderr")
}

#[test]
fn criterion_12_cli_round_trip_and_determinism() {
    // Parse -> print -> parse is a fixpoint on a mixed corpus.
    let ord1 = DiffFieldCtx::rationals(1);
    let part2 = DiffFieldCtx::partial_field(2);
    let part1 = DiffFieldCtx::partial_field(1);
    let ord2 = DiffFieldCtx::rationals(2);
    let corpus: Vec<(&DiffFieldCtx, usize, &str)> = vec![
        (&ord1, 2, "x1"),
        (&ord1, 2, "x2 - x1"),
        (&ord1, 2, "d1(x1) - x1"),
        (&ord1, 2, "d1(d1(x1)) + x1"),
        (&ord1, 2, "D[3](x2) - x1*x2"),
        (&ord1, 2, "x1^2 + x2^2 - 1"),
        (&ord1, 2, "x1*x2 - 1"),
        (&ord1, 2, "(x1 + x2)^3"),
        (&ord1, 2, "x1^5 - 2*x1^3 + x1 - 7"),
        (&ord1, 2, "d1(x1^2)"),
        (&ord1, 2, "d1(x1*x2)"),
        (&ord1, 2, "D[2](x1)^2 + x1*D[3](x1)"),
        (&ord1, 2, "x1*d1(x1) - 1"),
        (&ord1, 2, "-x1^2"),
        (&ord1, 2, "(-x1)^2"),
        (&ord1, 2, "x1/2 + x2/3"),
        (&ord1, 2, "7"),
        (&ord1, 2, "0"),
        (&ord1, 2, "-3/4"),
        (&ord1, 2, "(x1 + 1)*(x1 - 1)"),
        (&ord1, 2, "2^10*x1"),
        (&ord1, 2, "x2^2 - x1^3 - x1 - 1"),
        (&ord1, 2, "d1(x2)*x1 - d1(x1)*x2"),
        (&ord1, 2, "D[1](x1)*D[2](x2) - D[2](x1)*D[1](x2)"),
        (&part2, 1, "u1"),
        (&part2, 1, "u1*u2 - 1"),
        (&part2, 1, "x1 - u1^2"),
        (&part2, 1, "D[1,0](x1) - u2*x1"),
        (&part2, 1, "D[0,1](x1) - u1*x1"),
        (&part2, 1, "D[2,1](x1)^3 + u1*x1"),
        (&part2, 1, "d1(u1*x1)"),
        (&part2, 1, "d2(x1^2) - u2"),
        (&part2, 1, "D[1,1](x1) - D[1,0](x1)*D[0,1](x1)"),
        (&part2, 1, "u1^3*u2^2*x1 - u1*u2"),
        (&part2, 1, "(x1 - u1)*(x1 - u2)"),
        (&part2, 1, "d1(d2(x1)) + x1/5"),
        (&part1, 3, "x3 - x1*x2"),
        (&part1, 3, "d1(x3) - u1"),
        (&part1, 3, "x1*x2*x3 - u1^4"),
        (&part1, 3, "D[2](x2) - D[1](x1) - x3"),
        (&part1, 3, "x2^2 - u1*x1^2"),
        (&part1, 3, "d1(x1)*d1(x2)*d1(x3)"),
        (&part1, 3, "(x1 + u1)^2 - x2"),
        (&part1, 3, "u1*(D[1](x1) - 1)"),
        (&ord2, 2, "D[1,0](x1) - x2"),
        (&ord2, 2, "D[0,1](x2) - x1"),
        (&ord2, 2, "D[1,1](x1) - D[2,0](x2)"),
        (&ord2, 2, "x1^2*x2 - x2^2*x1 + 1"),
        (&ord2, 2, "d2(d1(x1)) - x1"),
        (&ord2, 2, "D[0,2](x1) + D[2,0](x1)"),
        (&ord2, 2, "(D[1,0](x1) + D[0,1](x1))^2"),
        (&ord2, 2, "x1/2 - 3*x2/4 + 5/6"),
    ];
    assert!(corpus.len() >= 50);
    for (ctx, n, text) in &corpus {
        let first = parse_diffpoly(ctx, *n, text).unwrap();
        let printed = first.to_string();
        let second = parse_diffpoly(ctx, *n, &printed).unwrap();
        assert_eq!(first, second, "round trip changed {text}");
        assert_eq!(printed, second.to_string(), "printing is not a fixpoint for {text}");
    }

    // Identical invocations produce identical bytes.
    let args = [
        "--N", "6", "--json", "solve", "--system", "d1(x1) - x1", "--init", "x1=1",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    // Reading the primary input from a file changes nothing.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("system.txt");
    std::fs::write(&path, "d1(x1) - x1").unwrap();
    let from_file = run(&[
        "--N", "6", "--json", "--file", path.to_str().unwrap(), "solve", "--init", "x1=1",
    ]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(from_file.stdout, a.stdout);

    // Pinned example outputs, byte for byte.
    assert_eq!(
        stdout_str(&a),
        concat!(
            "{\"series\":[{\"var\":\"x1\",\"coeffs\":[",
            "{\"alpha\":[0],\"value\":\"1\"},{\"alpha\":[1],\"value\":\"1\"},",
            "{\"alpha\":[2],\"value\":\"1/2\"},{\"alpha\":[3],\"value\":\"1/6\"},",
            "{\"alpha\":[4],\"value\":\"1/24\"},{\"alpha\":[5],\"value\":\"1/120\"},",
            "{\"alpha\":[6],\"value\":\"1/720\"}],",
            "\"display\":\"1 + 1*t1 + 1/2*t1^2 + 1/6*t1^3 + 1/24*t1^4 + 1/120*t1^5 + 1/720*t1^6\"}],",
            "\"precision\":6}\n"
        )
    );

    let bound = run(&["--m", "1", "--n", "1", "bound", "--r", "4"]);
    assert_eq!(bound.status.code(), Some(0));
    assert_eq!(stdout_str(&bound), "4\n");

    let pv = run(&["--N", "3", "--json", "pv", "--A", "[[0,1],[0,0]]"]);
    assert_eq!(pv.status.code(), Some(0));
    assert_eq!(
        stdout_str(&pv),
        "{\"Z\":[[\"1\",\"1*t1\"],[\"0\",\"1\"]],\"precision\":3}\n"
    );

    let twist = run(&[
        "--m", "1", "--field", "ratfn:1", "--N", "2", "--json", "twist", "--a", "u1",
        "--phi", "[\"u1^2\"]",
    ]);
    assert_eq!(twist.status.code(), Some(0));
    assert_eq!(
        stdout_str(&twist),
        concat!(
            "{\"coeffs\":[{\"alpha\":[0],\"value\":\"u1^2\"},",
            "{\"alpha\":[1],\"value\":\"-2*u1 + 1\"},{\"alpha\":[2],\"value\":\"1\"}],",
            "\"display\":\"u1^2 - (2*u1 - 1)*t1 + 1*t1^2\",\"precision\":2}\n"
        )
    );

    // Exit code 2 with a structured error for rejected input.
    let sl2 = run(&[
        "--m", "2", "--N", "3", "--json", "pv", "--A",
        "[[[0,1],[0,0]],[[0,0],[1,0]]]",
    ]);
    assert_eq!(sl2.status.code(), Some(2));
    assert!(sl2.stdout.is_empty());
    assert_eq!(
        stderr_str(&sl2),
        concat!(
            "{\"error\":{\"kind\":\"integrability-violation\",",
            "\"message\":\"integrability violation between A1 and A2: ",
            "residual [[-1, 0], [0, 1]]\"}}\n"
        )
    );

    let syntax = run(&["--json", "solve", "--system", "d1(x1) -", "--init", "x1=1"]);
    assert_eq!(syntax.status.code(), Some(2));
    assert!(stderr_str(&syntax).contains("\"kind\":\"syntax\""));

    // Exit code 3 when a guard trips instead of hanging.
    let blowup = run(&["--m", "4", "--n", "2", "bound", "--r", "3"]);
    assert_eq!(blowup.status.code(), Some(3));
    assert!(stderr_str(&blowup).contains("\"kind\":\"resource-limit\""));

    // Unknown subcommands fail with a usage error.
    let usage = run(&["frobnicate"]);
    assert_eq!(usage.status.code(), Some(2));

    println!("ACCEPTANCE 12 CLI round trips, determinism, exit codes, pinned examples: PASS");
}
