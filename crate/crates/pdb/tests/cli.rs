use pdb::cli::{run, EXIT_OK, EXIT_PARSE, EXIT_REFUTED, EXIT_RESOURCE, EXIT_TYPE};
use pdb::corpus::{fixture, GOLDEN_FILES};
use pdb::format::{parse_expected, ExpectedRow};

fn pdb(args: &[&str]) -> (u8, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut argv = vec!["pdb"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn path(name: &str) -> String {
    fixture(name).display().to_string()
}

#[test]
fn golden_distributions() {
    for f in GOLDEN_FILES {
        let (code, out, err) = pdb(&["run", &path(f), "--grid", "n=1,2,3", "--format", "lines"]);
        assert_eq!(code, EXIT_OK, "{f}: {err}");
        let got: Vec<ExpectedRow> = out
            .lines()
            .filter_map(|l| l.strip_prefix("dist\t"))
            .flat_map(|l| parse_expected(l).unwrap())
            .collect();
        let golden = std::fs::read_to_string(fixture(&f.replace(".pdb", ".expected"))).unwrap();
        assert_eq!(got, parse_expected(&golden).unwrap(), "{f}");
    }
}

#[test]
fn check_exit_codes() {
    let (code, out, _) = pdb(&["check", &path("privk.pdb"), "--emit-weight"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("adv : Str[n] * Str[n] * (Str[n] -o Bool); · |- PrivkOtp :: exp : Bool"), "{out}");
    assert!(out.contains("W = 5*n + 20"), "{out}");
    let (code, out, _) = pdb(&["check", &path("ill_typed.pdb"), "--format", "lines"]);
    assert_eq!(code, EXIT_TYPE);
    assert!(out.starts_with("check\tproc\tReuse\terror\t"), "{out}");
    let (code, _, err) = pdb(&["check", &path("malformed.pdb")]);
    assert_eq!(code, EXIT_PARSE);
    assert!(err.contains("malformed.pdb:3:"), "{err}");
    assert_eq!(pdb(&["check", "/nonexistent.pdb"]).0, EXIT_PARSE);
    let (code, out, _) = pdb(&["check", &path("fairflip.pdb"), "--emit-derivation", "--format", "lines"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.lines().any(|l| l.starts_with("derivation\tFairFlip\t(")), "{out}");
}

#[test]
fn run_outputs() {
    let (code, out, _) = pdb(&["run", &path("fairflip.pdb"), "--grid", "n=2"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "FairFlip n=2\n  1/2 out exp false\n  1/2 out exp true\n  cost 1 <= bound 3\n");
    let (code, out, _) = pdb(&["run", &path("servers.pdb"), "--proc", "Game", "--grid", "n=1", "--format", "lines"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "dist\tGame\tn=1\t1\t0\ncost\tGame\tn=1\t2\t6\n");
    for sched in ["rightmost", "seed:7"] {
        let (code, out, _) = pdb(&["run", &path("fairflip.pdb"), "--grid", "n=1", "--sched", sched, "--format", "lines"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("dist\tFairFlip\tn=1\t1/2\tout exp true"));
    }
    assert_eq!(pdb(&["run", &path("fairflip.pdb"), "--sched", "random"]).0, EXIT_PARSE);
    assert_eq!(pdb(&["run", &path("fairflip.pdb"), "--grid", "k=1"]).0, EXIT_PARSE);
    let (code, _, err) = pdb(&["run", &path("runaway.pdb"), "--ceiling", "500", "--grid", "n=1"]);
    assert_eq!(code, EXIT_RESOURCE);
    assert!(err.contains("ceiling 500"), "{err}");
}

#[test]
fn weights() {
    let (code, out, _) = pdb(&["weight", &path("fairflip.pdb"), "--grid", "n=0..1", "--format", "lines"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "weight\tFairFlip\t3\nvalue\tFairFlip\tn=0\t3\nvalue\tFairFlip\tn=1\t3\n");
    assert_eq!(pdb(&["weight", &path("ill_typed.pdb")]).0, EXIT_TYPE);
}

#[test]
fn equivalences() {
    let (code, out, _) = pdb(&["equiv", "out x true", "out x false", "--channel", "x", "--grid", "n=1", "--format", "lines"]);
    assert_eq!(code, EXIT_REFUTED);
    assert_eq!(out, "gap\t[]\tn=1\t1\trefuted\n");
    let f = path("collision.pdb");
    let args = ["equiv", "Forward", "Rewrite", "--file", &f, "--ctx", "FixedInput", "--grid", "n=2,3", "--format", "lines"];
    let (code, out, _) = pdb(&args);
    assert_eq!(code, EXIT_REFUTED);
    assert_eq!(out, "gap\tFixedInput\tn=2\t1/4\trefuted\ngap\tFixedInput\tn=3\t1/8\trefuted\n");
    let mut args = args.to_vec();
    args.extend(["--eps", "1/4"]);
    assert_eq!(pdb(&args).0, EXIT_OK);
    assert_eq!(pdb(&["equiv", "out x true", "out x true", "--eps", "2"]).0, EXIT_PARSE);
    assert_eq!(pdb(&["equiv", "out x (", "0"]).0, EXIT_PARSE);
}

#[test]
fn diamond_and_demo() {
    let (code, out, _) = pdb(&["diamond", &path("otp.pdb"), "--grid", "n=1", "--format", "lines"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.lines().all(|l| l.ends_with("\tok")), "{out}");
    let (code, out, _) = pdb(&["demo-crypto", "--grid", "n=1..2", "--format", "lines"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.lines().filter(|l| l.starts_with("step")).all(|l| l.starts_with("step\tok\t")), "{out}");
    assert!(out.lines().filter(|l| l.starts_with("gap")).all(|l| l.ends_with("\t0")), "{out}");
}

#[test]
fn usage_errors() {
    assert_eq!(pdb(&["frobnicate"]).0, EXIT_PARSE);
    assert_eq!(pdb(&["--help"]).0, EXIT_OK);
}
