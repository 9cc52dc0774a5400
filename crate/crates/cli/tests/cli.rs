use std::io::Write;
use std::process::{Command as Proc, Output, Stdio};

use keller_cli::{parse_input, render_json, run_job, Command, Construction};
use keller_core::Error;
use serde_json::Value;

fn keller(args: &[&str], stdin: &str) -> Output {
    let mut child = Proc::new(env!("CARGO_BIN_EXE_keller"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child
        .stdin
        .take()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> serde_json::Map<String, Value> {
    serde_json::from_slice(&out.stdout).expect("JSON report")
}

#[test]
fn parses_a_two_variable_map() {
    let spec = parse_input("ring zp p=5 prec=2 / map n=2 / F1 = X1 - X1^5 / F2 = X2 - X2^5").unwrap();
    let f = spec.map.unwrap();
    assert_eq!(f.dim(), 2);
    assert_eq!(f.ring().cardinality(), Some(25));
    assert_eq!(spec.command, Command::Check);
    assert_eq!(spec.options.trials, 20);
    assert_eq!(spec.options.seed, 0);
    assert_eq!(spec.options.budget, 10_000_000);
}

#[test]
fn parse_errors_carry_positions() {
    match parse_input("ring zp p=5 prec=2\nmap n=1\nF1 = X1^^2") {
        Err(keller_cli::CliError::Core(Error::Parse { line, column, .. })) => {
            assert_eq!((line, column), (3, 9));
        }
        other => panic!("expected a parse error, got {other:?}"),
    }
    assert!(matches!(
        parse_input("ring zp p=6 prec=2"),
        Err(keller_cli::CliError::Core(Error::Validation(_)))
    ));
}

#[test]
fn canonical_text_round_trips() {
    let spec = parse_input(
        "ring unram p=3 deg=2 prec=2\nmap n=2\nF1 = (X1 + t*X2)^3 - 7*X2 + 2\nF2 = X2 - 4*X1^2*X2",
    )
    .unwrap();
    let f = spec.map.unwrap();
    let again = parse_input(&f.canonical_text()).unwrap().map.unwrap();
    assert_eq!(again, f);
    assert_eq!(again.canonical_text(), f.canonical_text());
}

fn residue_zeros_of_x_minus_x5() -> u64 {
    // every pair over F_5 is a zero since x^5 = x
    let mut count = 0;
    for a in 0i64..5 {
        for b in 0i64..5 {
            if (a - a.pow(5)).rem_euclid(5) == 0 && (b - b.pow(5)).rem_euclid(5) == 0 {
                count += 1;
            }
        }
    }
    count
}

#[test]
fn check_on_the_char_p_counterexample() {
    let mut spec = parse_input("ring fpt p=5 prec=2\nmap n=2").unwrap();
    spec.command = Command::Construct;
    spec.options.construction = Some(Construction::CharP);
    let r = run_job(&spec).unwrap();
    assert_eq!(r["verdict"], "not-unimodular");
    assert_eq!(r["zero_count"], residue_zeros_of_x_minus_x5());
    assert_eq!(r["keller"], true);

    let out = keller(&["-", "--json"], "ring fpt p=5 prec=2 / map n=2 / F1 = X1 - X1^5 / F2 = X2 - X2^5");
    assert!(out.status.success());
    let r = json(&out);
    assert_eq!(r["verdict"], "not-unimodular");
    assert_eq!(r["zero_count"], 25);
    assert_eq!(r["points_checked"], 25);
}

#[test]
fn lift_of_x2_minus_2_mod_7() {
    let out = keller(&["-", "--cmd", "lift", "--json"], "ring zp p=7 prec=4\nF1 = X1^2 - 2");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    let root: i64 = r["root"].as_str().unwrap().parse().unwrap();
    // scan oracle
    let roots: Vec<i64> = (0..2401).filter(|x| (x * x - 2) % 2401 == 0).collect();
    assert!(roots.contains(&root));
    assert_eq!(root % 7, 3);
    assert_eq!(r["root_residue"], "3");
}

#[test]
fn g_example_report() {
    let out = keller(
        &["-", "--cmd", "construct", "--construction", "g-example", "--json"],
        "ring fpt p=5 prec=2\nmap n=2",
    );
    assert!(out.status.success());
    let r = json(&out);
    assert_eq!(r["keller"], true);
    assert_eq!(r["unimodular"], true);
    // g∘g is not zero on F_5 (g∘g(4) = 4), so this is reported false
    assert_eq!(r["self_composition_residue_zero"], false);
}

#[test]
fn not_unimodular_exits_zero_and_errors_exit_nonzero() {
    let out = keller(&["-"], "ring zp p=5 prec=2 / map n=1 / F1 = 5*X1");
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("not-unimodular"));

    let out = keller(&["-", "--json"], "ring zp p=5 prec=2\nF1 = X1^^2");
    assert!(!out.status.success());
    let r = json(&out);
    assert_eq!(r["error_kind"], "parse");

    let out = keller(&["-", "--json"], "ring zp p=6 prec=2");
    assert!(!out.status.success());
    assert_eq!(json(&out)["error_kind"], "validation");

    let out = keller(&["-", "--cmd", "probe", "--json"], "ring zp p=5 prec=2 / map n=1 / F1 = X1^2");
    assert!(!out.status.success());
    assert_eq!(json(&out)["error_kind"], "precondition");

    let out = keller(&["-", "--cmd", "bogus"], "ring zp p=5 prec=2");
    assert!(!out.status.success());
}

#[test]
fn budget_exceeded_is_a_verdict() {
    let out = keller(
        &["-", "--budget", "10", "--json"],
        "ring zp p=5 prec=1 / map n=2 / F1 = X1 / F2 = X2",
    );
    assert!(out.status.success());
    let r = json(&out);
    assert_eq!(r["verdict"], "budget-exceeded");
    assert_eq!(r["required"], 25);
}

#[test]
fn reports_are_deterministic() {
    let doc = "ring zp p=3 prec=2\nmap n=2\nF1 = X1 + X2^2\nF2 = X2";
    for args in [
        vec!["-", "--json"],
        vec!["-", "--json", "--cmd", "probe", "--trials", "6", "--seed", "11"],
        vec!["-", "--cmd", "fiber", "--point", "1,2"],
    ] {
        let a = keller(&args, doc);
        let b = keller(&args, doc);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout);
    }
    let spec = parse_input(doc).unwrap();
    assert_eq!(render_json(&run_job(&spec).unwrap()), render_json(&run_job(&spec).unwrap()));
}

#[test]
fn out_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("map.txt");
    let report = dir.path().join("report.json");
    std::fs::write(&input, "ring zp p=5 prec=2\nmap n=1\nF1 = X1 + 1\n").unwrap();
    let out = keller(
        &[input.to_str().unwrap(), "--json", "--out", report.to_str().unwrap()],
        "",
    );
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let r: serde_json::Map<String, Value> =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["verdict"], "unimodular");
    assert_eq!(r["witness"], "(0)");
}

#[test]
fn other_constructions_and_commands() {
    let out = keller(
        &["-", "--cmd", "construct", "--construction", "quasi-druzkowski", "--matrix", "1,1;-1,-1", "--json"],
        "ring zp p=5 prec=3",
    );
    assert!(out.status.success());
    assert_eq!(json(&out)["u"], "(-1,1)");

    let out = keller(
        &["-", "--cmd", "construct", "--construction", "sl-completion", "--point", "5,2,1", "--json"],
        "ring zp p=5 prec=3",
    );
    assert!(out.status.success());
    let first_column: Vec<String> = json(&out)["matrix"]
        .as_str()
        .unwrap()
        .split(';')
        .map(|row| row.split(',').next().unwrap().to_string())
        .collect();
    assert_eq!(first_column, ["5", "2", "1"]);

    let out = keller(&["-", "--cmd", "restrict", "--json"], "ring unram p=2 deg=2 prec=2\nF1 = X1 + t");
    assert!(out.status.success());
    let r = json(&out);
    assert_eq!(r["restricted_dim"], 2);
    assert_eq!(r["restricted_ring"], "ring zp p=2 prec=2");

    let out = keller(&["-", "--cmd", "bound", "--degree", "4", "--json"], "ring zp p=5 prec=1 / map n=82");
    assert!(out.status.success());
    assert_eq!(json(&out)["rhs"], "5.252772");

    let out = keller(&["-", "--cmd", "fiber", "--json"], "ring zp p=3 prec=2 / map n=1 / F1 = X1 + 3");
    assert!(out.status.success());
    let r = json(&out);
    assert_eq!(r["fiber_size"], 1);
    assert_eq!(r["fiber"], "(6)");
}
