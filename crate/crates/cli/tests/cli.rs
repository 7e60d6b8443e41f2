use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use dynspec_cli::docs::{GlueDoc, LatticeInfo, PowerDoc, SalemReport, TwistDoc, TwistSplitDoc};
use dynspec_cli::input::parse_str;
use dynspec_core::realize::{Decision, RationalIsometryDecision, VerificationReport};
use dynspec_core::{Isometry, ObstructionReport, RealizationCertificate};
use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

macro_rules! dynspec {
    ($($a:expr),* $(,)?) => {
        run(&[$(std::ffi::OsString::from($a)),*])
    };
}

fn run(args: &[std::ffi::OsString]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynspec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

struct Built {
    _dir: tempfile::TempDir,
    path: PathBuf,
    text: String,
}

fn k3_certificate() -> &'static Built {
    static CELL: OnceLock<Built> = OnceLock::new();
    CELL.get_or_init(|| {
        let o = dynspec!("build-certificate", data("s4.json"));
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k3.json");
        std::fs::write(&path, &o.stdout).unwrap();
        Built {
            _dir: dir,
            path,
            text: stdout(&o),
        }
    })
}

#[test]
fn certify_salem_exit_codes() {
    let o = dynspec!("certify-salem", data("lehmer.json"));
    assert_eq!(o.status.code(), Some(0));
    let r: SalemReport = parse_str(&stdout(&o), "out").unwrap();
    assert!(r.salem);
    assert_eq!(r.certificate.unwrap().degree, 10);

    let o = dynspec!("certify-salem", data("phi5.json"));
    assert_eq!(o.status.code(), Some(1));
    let r: SalemReport = parse_str(&stdout(&o), "out").unwrap();
    assert_eq!(r.rejection.unwrap().code, "wrong_root_pattern");
}

#[test]
fn realizable_lehmer_enriques() {
    let o = dynspec!("realizable", data("lehmer.json"), "--class", "enriques");
    assert_eq!(o.status.code(), Some(0));
    let d: Decision = parse_str(&stdout(&o), "out").unwrap();
    assert!(d.realizable);
    assert_eq!(d.reason, "clause (2): d = b2, square class");

    let o = dynspec!("realizable", data("lehmer.json"), "--class", "torus", "--projective",);
    assert_eq!(o.status.code(), Some(1));

    let o = dynspec!(
        "realizable",
        data("s4.json"),
        "--class",
        "torus",
        "--projective",
        "--format",
        "text",
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("realizable: yes\n"));
}

#[test]
fn realizable_rejects_non_salem() {
    let o = dynspec!("realizable", data("phi5.json"), "--class", "k3");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not a Salem polynomial"));
}

#[test]
fn rational_isometry_named_lattices() {
    let o = dynspec!("rational-isometry", data("s4.json"), "3U");
    assert_eq!(o.status.code(), Some(0));
    let d: RationalIsometryDecision = parse_str(&stdout(&o), "out").unwrap();
    assert_eq!(d.clause, Some(1));
    let o = dynspec!("rational-isometry", data("s4.json"), "E8");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn positivity_determinant_bound_and_witness() {
    let o = dynspec!("positivity", data("twisted.json"));
    assert_eq!(o.status.code(), Some(0));
    let r: ObstructionReport = parse_str(&stdout(&o), "out").unwrap();
    assert_eq!(json(&o)["method"], "determinant_bound");
    assert!(r.witnesses.is_empty());

    let o = dynspec!("positivity", data("companion.json"));
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["status"], "not_positive");
    let g = [[2i64, 3], [3, 2]];
    for w in v["witnesses"].as_array().unwrap() {
        let r: Vec<i64> = w["root"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c.as_str().unwrap().parse().unwrap())
            .collect();
        let n: i64 = (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| r[i] * g[i][j] * r[j])
            .sum();
        assert_eq!(n, -2);
    }
}

#[test]
fn positivity_forced_search_agrees() {
    let o = dynspec!("positivity", data("twisted.json"), "--search");
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["method"], "exhaustive_search");
    assert_eq!(v["search"]["roots"], 0);
}

#[test]
fn twist_and_power_integral() {
    let o = dynspec!("twist", data("companion.json"), "--element", "11");
    assert_eq!(o.status.code(), Some(0));
    let d: TwistDoc = parse_str(&stdout(&o), "out").unwrap();
    assert_eq!(d.determinant, (-605).into());
    assert_eq!(d.isometry.lattice().gram()[(0, 1)], 33.into());

    // twisting by w - 3 = f + f^-1 - 3 kills the form of x^2 - 3x + 1
    let o = dynspec!("twist", data("companion.json"), "--element", "-3,1");
    assert_eq!(o.status.code(), Some(2));

    let o = dynspec!("power-integral", data("conjugate.json"));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let d: PowerDoc = parse_str(&stdout(&o), "out").unwrap();
    assert!(d.isometry.is_integral());
    let f: Isometry = parse_str(&std::fs::read_to_string(data("conjugate.json")).unwrap(), "input").unwrap();
    assert!(d.power > 1);
    assert_eq!(f.pow(d.power).matrix(), d.isometry.matrix());
    assert!((1..d.power).all(|k| !f.pow(k).is_integral()));
}

#[test]
fn twist_split_check_search_and_explicit() {
    let o = dynspec!("twist-split-check", data("companion.json"), "--exponent", "2");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let d: TwistSplitDoc = parse_str(&stdout(&o), "out").unwrap();
    assert!(d.passed);
    assert_eq!(d.prime, 41.into());
    assert_eq!(d.p_valuation, 4);

    let o = dynspec!(
        "twist-split-check",
        data("companion.json"),
        "--element",
        "41",
        "--prime",
        "41",
    );
    assert_eq!(o.status.code(), Some(0));

    let o = dynspec!(
        "twist-split-check",
        data("companion.json"),
        "--element",
        "7",
        "--prime",
        "41",
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn lattice_and_glue() {
    let o = dynspec!("lattice", "3U+2E8");
    assert_eq!(o.status.code(), Some(0));
    let i: LatticeInfo = parse_str(&stdout(&o), "out").unwrap();
    assert_eq!(i.signature, (3, 19));
    assert!(i.even && i.unimodular);

    let o = dynspec!("glue", "E6", "A2");
    assert_eq!(o.status.code(), Some(0));
    let g: GlueDoc = parse_str(&stdout(&o), "out").unwrap();
    let l = g.overlattice.unwrap();
    assert_eq!(l.rank(), 8);
    assert_eq!(l.determinant(), 1.into());
    assert_eq!(l.roots().unwrap().len(), 240);

    let o = dynspec!("glue", "A2", "A2");
    assert_eq!(o.status.code(), Some(1));

    let o = dynspec!("lattice", "no-such-lattice");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn build_and_verify_k3() {
    let b = k3_certificate();
    let c: RealizationCertificate = parse_str(&b.text, "certificate").unwrap();
    assert_eq!(c.kernel.signature, (1, 3));
    assert_eq!(c.charpoly.last().unwrap().multiplicity, 18);
    let o = dynspec!("verify", &b.path);
    assert_eq!(o.status.code(), Some(0));
    let r: VerificationReport = parse_str(&stdout(&o), "out").unwrap();
    assert!(r.verified);
}

#[test]
fn build_is_deterministic() {
    let b = k3_certificate();
    let o = dynspec!("build-certificate", data("s4.json"));
    assert_eq!(stdout(&o), b.text);
}

#[test]
fn verify_tampered_certificate() {
    let b = k3_certificate();
    let mut v: Value = serde_json::from_str(&b.text).unwrap();
    let x: dynspec_core::BigInt = v["isometry"][0][0].as_str().unwrap().parse().unwrap();
    v["isometry"][0][0] = Value::String((x + 1u32).to_string());
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("tampered.json");
    std::fs::write(&p, serde_json::to_string(&v).unwrap()).unwrap();
    let o = dynspec!("verify", &p, "--format", "text");
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.starts_with("verified: no\n"));
    assert!(out.contains("[FAIL] isometry"));
}

#[test]
fn strict_parsing_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let b = k3_certificate();
    let mut v: Value = serde_json::from_str(&b.text).unwrap();
    v["kernel"]["note"] = "x".into();
    let p = dir.path().join("extra.json");
    std::fs::write(&p, serde_json::to_string(&v).unwrap()).unwrap();
    let o = dynspec!("verify", &p);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("field `kernel.note`"), "{}", stderr(&o));

    let p = dir.path().join("poly.json");
    std::fs::write(&p, r#"{"coefficients": ["1", "-1", "one"]}"#).unwrap();
    let o = dynspec!("certify-salem", &p);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("field `coefficients`"));

    std::fs::write(&p, r#"{"coefficients": ["1", "-3", "1"]} trailing"#).unwrap();
    let o = dynspec!("certify-salem", &p);
    assert_eq!(o.status.code(), Some(2));

    let p = dir.path().join("iso.json");
    std::fs::write(
        &p,
        r#"{"lattice": {"rank": 2, "gram": [["2", "3"], ["3", "2"]]}, "matrix": [["0", "-1"], ["1", "3/0"]]}"#,
    )
    .unwrap();
    let o = dynspec!("positivity", &p);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("zero denominator"), "{}", stderr(&o));
}

#[test]
fn text_and_json_outputs_are_deterministic() {
    let lehmer = data("lehmer.json");
    let companion = data("companion.json");
    assert_eq!(
        dynspec!("certify-salem", &lehmer).stdout,
        dynspec!("certify-salem", &lehmer).stdout
    );
    assert_eq!(
        dynspec!("positivity", &companion).stdout,
        dynspec!("positivity", &companion).stdout
    );
    let a = dynspec!("lattice", "U+E8", "--format", "text");
    assert_eq!(a.stdout, dynspec!("lattice", "U+E8", "--format", "text").stdout);
}

#[test]
fn build_rejects_mismatched_seed() {
    let o = dynspec!("build-certificate", data("lehmer.json"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no curated k3 seed"));
}
