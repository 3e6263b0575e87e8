//! End-to-end tests of the `equideform` binary: documented examples, report
//! determinism and every exit code.

use std::path::{Path, PathBuf};
use std::process::Command;

use equideform::action::{dihedral_p, standard_cyclic_p, tame_cyclic};
use equideform::deform::{ArtinianRing, DerivationSpace, Lift, RelativeContext};
use equideform::groups::Subgroup;
use equideform::io::{to_canonical, LiftFile};
use equideform::maps::{ModuleTag, Tower};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

/// Runs the binary; returns the exit code, standard output and standard error.
fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_equideform"))
        .args(args)
        .env_remove("EQUIDEFORM_PREC")
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("exited normally"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn run_json(args: &[&str]) -> (i32, Value) {
    let (code, stdout, stderr) = run(args);
    let v = serde_json::from_str(&stdout).unwrap_or_else(|e| panic!("no JSON report ({e}); stderr: {stderr}"));
    (code, v)
}

fn action_path(name: &str) -> String {
    fixture(&format!("actions/{name}.json")).display().to_string()
}

fn write_lift(dir: &Path, name: &str, l: &Lift) -> String {
    let path = dir.join(name);
    std::fs::write(&path, to_canonical(&LiftFile::from_lift(l)).unwrap()).unwrap();
    path.display().to_string()
}

#[test]
fn ramify_reports_the_documented_invariants() {
    let (code, r) = run_json(&["ramify", &action_path("std_cyclic_3")]);
    assert_eq!(code, 0);
    let res = &r["results"];
    assert_eq!(res["filtration"]["G1"], 3);
    assert_eq!(res["filtration"]["G2"], 1);
    assert_eq!(res["conductor"], 1);
    assert_eq!(res["different"], 4);
    assert_eq!(res["different_consistent"], true);

    let (code, r) = run_json(&["ramify", &action_path("tame_cyclic_5_4")]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["filtration"]["G1"], 1);
    assert_eq!(r["results"]["different"], 3);

    let (code, r) = run_json(&["ramify", &action_path("dihedral_5")]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["weakly_ramified"], true);
}

#[test]
fn reports_are_byte_identical_and_carry_the_envelope() {
    let args = ["check", &action_path("dihedral_5"), "--which", "boundary", "--trials", "5", "--seed", "3"];
    let (c1, a, _) = run(&args);
    let (c2, b, _) = run(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["tool"], "equideform");
    assert_eq!(v["command"], "check");
    assert_eq!(v["config"]["seed"], 3);
    assert_eq!(v["input_digest"].as_str().unwrap().len(), 64);
    assert!(v.get("timing_ms").is_none());
    let (_, t) = run_json(&["ramify", &action_path("std_cyclic_5"), "--timing"]);
    assert!(t["timing_ms"].is_u64());
}

#[test]
fn out_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let (code, stdout, _) = run(&["ramify", &action_path("std_cyclic_5"), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["results"]["conductor"], 1);
}

#[test]
fn tangent_dimensions_of_the_documented_fixtures() {
    for (name, dim) in [("std_cyclic_5", 1), ("dihedral_5", 1), ("metacyclic_5_4", 0)] {
        let (code, r) = run_json(&["cohomology", &action_path(name), "--degree", "1"]);
        assert_eq!(code, 0, "{name}");
        assert_eq!(r["results"]["dimension"], dim, "{name}");
        assert_eq!(r["results"]["audit"]["stable"], true, "{name}");
        assert_eq!(r["results"]["basis"].as_array().unwrap().len(), dim as usize);
    }
    let (_, r) = run_json(&["cohomology", &action_path("std_cyclic_5")]);
    let text = r["results"]["basis"][0]["1"].as_str().unwrap();
    assert!(text.ends_with("d/dt") && text.contains('t'), "{text}");
}

#[test]
fn cohomology_of_a_subgroup_and_in_degree_two() {
    let (code, r) = run_json(&["cohomology", &action_path("dihedral_5"), "--subgroup", "1"]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["subgroup_order"], 5);
    assert_eq!(r["results"]["dimension"], 1);
    let (code, r) = run_json(&["cohomology", &action_path("std_cyclic_5"), "--degree", "2"]);
    assert_eq!(code, 0);
    assert!(r["results"]["dimension"].is_u64());
    assert_eq!(r["results"]["audit"]["stable"], true);
}

#[test]
fn diagrams_pass_on_the_documented_fixtures() {
    for (name, which) in [("dihedral_5", "boundary"), ("dihedral_5", "bijection"), ("metacyclic_3_2", "fibered"), ("dihedral_5", "induction")] {
        let (code, r) = run_json(&["check", &action_path(name), "--which", which, "--trials", "10"]);
        assert_eq!(code, 0, "{name} {which}: {r}");
        assert_eq!(r["results"]["report"]["passed"], true);
    }
}

#[test]
fn quotient_emits_a_loadable_action_file() {
    let (code, r) = run_json(&["quotient", &action_path("dihedral_5")]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["quotient_order"], 2);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.json");
    std::fs::write(&path, to_canonical(&r["results"]["action"]).unwrap()).unwrap();
    let (code, q) = run_json(&["ramify", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(q["results"]["order"], 2);
    assert_eq!(q["results"]["filtration"]["G1"], 1);
}

#[test]
fn corpus_lists_and_writes_every_fixture() {
    let (code, r) = run_json(&["corpus"]);
    assert_eq!(code, 0);
    let names: Vec<&str> = r["results"]["fixtures"].as_array().unwrap().iter().map(|f| f["name"].as_str().unwrap()).collect();
    for n in ["std_cyclic_3", "std_cyclic_5", "std_cyclic_7", "tame_cyclic_5_4", "dihedral_5", "metacyclic_5_4", "metacyclic_3_2", "z2xz2", "z4"] {
        assert!(names.contains(&n), "{n}");
    }
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = run_json(&["corpus", "--write", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0);
    for f in r["results"]["fixtures"].as_array().unwrap() {
        let rel = f["path"].as_str().unwrap();
        let written = std::fs::read(dir.path().join(rel)).unwrap();
        assert_eq!(written, std::fs::read(fixture(rel)).unwrap(), "{rel}");
    }
}

#[test]
fn hsmap_classes_of_the_bundled_cocycles() {
    let g = fixture("groups/z2xz2.json");
    let m = fixture("modules/z2xz2_trivial.json");
    let (code, r) = run_json(&["hsmap", g.to_str().unwrap(), m.to_str().unwrap(), fixture("cocycles/z2xz2_xy.json").to_str().unwrap(), "--audit"]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["vanishes"], false);
    assert_eq!(r["results"]["audit"]["passed"], true);
    let (code, r) = run_json(&["hsmap", g.to_str().unwrap(), m.to_str().unwrap(), fixture("cocycles/z2xz2_inflation.json").to_str().unwrap(), "--audit"]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["vanishes"], true);
    assert_eq!(r["results"]["audit"]["in_image_of_inflation"], true);
    assert_eq!(r["results"]["audit"]["kernel_law"], true);

    // the zero cocycle
    let dir = tempfile::tempdir().unwrap();
    let zero = dir.path().join("zero.json");
    let values: Vec<Vec<u64>> = vec![vec![0]; 16];
    std::fs::write(&zero, serde_json::json!({ "degree": 2, "dim": 1, "values": values }).to_string()).unwrap();
    let (code, r) = run_json(&["hsmap", g.to_str().unwrap(), m.to_str().unwrap(), zero.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["vanishes"], true);
}

#[test]
fn absolute_obstructions() {
    let dir = tempfile::tempdir().unwrap();
    let field_ext = r#"{"vars": 1, "ideal": [[3]]}"#;

    // a nonzero tangent direction of the standard Z/5 action is obstructed
    let probe = standard_cyclic_p(5, 60).unwrap();
    // representatives are known to a precision set by the truncation, so
    // the lift is built at a finer truncation than the one audited
    let lv = Tower::levels_for(&probe, &Subgroup::whole(probe.group()), Some(32)).unwrap();
    let a = standard_cyclic_p(5, lv.prec).unwrap();
    let space = DerivationSpace::new(&a, Some(32)).unwrap();
    let ring = ArtinianRing::truncated(a.field(), 2).unwrap();
    let c = space.frame().representative(&[1], None).unwrap();
    let l = Lift::trivial(&a, &ring).unwrap().twist(1, &c).unwrap();
    let path = write_lift(dir.path(), "z5.json", &l);
    let (code, r) = run_json(&["obstruct", &path, "--extension", field_ext, "--trunc", "16"]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["results"]["kind"], "absolute");
    assert_eq!(r["results"]["obstruction"]["vanishes"], false);
    assert_eq!(r["results"]["audit"]["stable"], true);

    // tame lifts are never obstructed; the ring may also be given as a file
    let t = tame_cyclic(5, 4, 2, 40).unwrap();
    let l = Lift::trivial(&t, &ring).unwrap();
    let path = write_lift(dir.path(), "tame.json", &l);
    let ring_file = dir.path().join("ring.json");
    std::fs::write(&ring_file, field_ext).unwrap();
    let (code, r) = run_json(&["obstruct", &path, "--extension", ring_file.to_str().unwrap(), "--trunc", "8"]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["results"]["obstruction"]["vanishes"], true);
}

fn dihedral_tower(m: i64) -> Tower {
    let probe = dihedral_p(5, 60).unwrap();
    let n = Subgroup::generated_by(probe.group(), &(0..probe.group().order()).filter(|&x| probe.group().element_order(x) == 5).collect::<Vec<_>>());
    let lv = Tower::levels_for(&probe, &n, Some(m)).unwrap();
    Tower::new(&dihedral_p(5, lv.prec).unwrap(), &n, Some(m)).unwrap()
}

#[test]
fn relative_obstruction_of_a_compatible_pair_recovers_a_lift() {
    let t = dihedral_tower(20);
    let ctx = RelativeContext::new(&t).unwrap();
    let k = t.field();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pres = t.presentation(ModuleTag::GroupFull).unwrap();
    let x = t.random_vector(ModuleTag::GroupFull, &pres.random_coords(&mut rng), &mut rng).unwrap();
    let xn = t.tangent_restriction(&x).unwrap().coords;
    let xq = t.tangent_induction(&x).unwrap().coords;
    let kappa = ctx.trivial_lift(&ArtinianRing::residue_field(k, 1)).unwrap();
    let kn = ctx.first_order_lift(ModuleTag::SubgroupFull, &xn, Some(&mut rng)).unwrap();
    let kq = ctx.first_order_lift(ModuleTag::QuotientSharp, &xq, Some(&mut rng)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (pa, pn, pq) = (write_lift(dir.path(), "a.json", &kappa), write_lift(dir.path(), "n.json", &kn), write_lift(dir.path(), "q.json", &kq));
    let ext = r#"{"vars": 1, "ideal": [[2]]}"#;
    let (code, r) = run_json(&["obstruct", &pa, "--extension", ext, "--relative", &pn, &pq, "--trunc", "20"]);
    assert_eq!(code, 0, "{r}");
    let res = &r["results"];
    assert_eq!(res["kind"], "relative");
    assert_eq!(res["vanishes"], true);
    assert_eq!(res["audit"]["stable"], true);
    let done: LiftFile = serde_json::from_value(res["completion"].clone()).unwrap();
    let l = done.lift().unwrap();
    l.validate().unwrap();
    assert_eq!(l.base().group().order(), 10);

    // the subgroup may be named explicitly, and must then agree
    let n_gens = t.subgroup().elements()[1].to_string();
    let (code, _) = run_json(&["obstruct", &pa, "--extension", ext, "--relative", &pn, &pq, "--trunc", "20", "--subgroup", &n_gens]);
    assert_eq!(code, 0);
    let (code, _) = run_json(&["obstruct", &pa, "--extension", ext, "--relative", &pn, &pq, "--trunc", "20", "--subgroup", "0"]);
    assert_eq!(code, 2);

    // lifts in the wrong fibers: κ_A is a nonzero first-order lift, built
    // at a finer truncation so that it carries enough precision
    let fine = dihedral_tower(32);
    let ctx = RelativeContext::new(&fine).unwrap();
    let pres = fine.presentation(ModuleTag::GroupFull).unwrap();
    let x = std::iter::repeat_with(|| pres.random_coords(&mut rng)).find(|x| x.iter().any(|&c| c != 0)).unwrap();
    let kappa = ctx.first_order_lift(ModuleTag::GroupFull, &x, None).unwrap();
    let big = ArtinianRing::truncated(k, 3).unwrap();
    let (pa, pn, pq) = (
        write_lift(dir.path(), "a2.json", &kappa),
        write_lift(dir.path(), "n2.json", &ctx.trivial_subgroup_lift(&big).unwrap()),
        write_lift(dir.path(), "q2.json", &ctx.trivial_quotient_lift(&big).unwrap()),
    );
    let (code, r) = run_json(&["obstruct", &pa, "--extension", r#"{"vars": 1, "ideal": [[3]]}"#, "--relative", &pn, &pq, "--trunc", "20"]);
    assert_eq!(code, 6, "{r}");
    assert_eq!(r["error"]["kind"], "fiber-mismatch");
}

#[test]
fn invalid_inputs_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"p": 5, "prec": 20, "group": {"name": "x", "order": 2, "table": [[0,1],[1,1]]}, "series": {}}"#).unwrap();
    let (code, r) = run_json(&["ramify", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(r["error"]["kind"], "invalid");
    let (code, _) = run_json(&["ramify", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(code, 2);
    let (code, _) = run_json(&["cohomology", &action_path("std_cyclic_5"), "--degree", "3"]);
    assert_eq!(code, 2);
    let (code, _) = run_json(&["quotient", &action_path("metacyclic_3_2"), "--subgroup", "9"]);
    assert_eq!(code, 2);
    // usage errors
    let (code, _, stderr) = run(&["check", &action_path("dihedral_5"), "--which", "nonsense"]);
    assert_eq!(code, 2);
    assert!(!stderr.is_empty());
    let (code, _, _) = run(&["frobnicate"]);
    assert_eq!(code, 2);
}

#[test]
fn precision_shortfalls_exit_with_code_three() {
    let (code, r) = run_json(&["ramify", &action_path("std_cyclic_5"), "--prec", "100000"]);
    assert_eq!(code, 3);
    assert_eq!(r["error"]["kind"], "precision");
    // a truncated action no longer supports the default derivation module
    let (code, _) = run_json(&["cohomology", &action_path("std_cyclic_5"), "--prec", "12"]);
    assert_eq!(code, 3);
    // the environment variable supplies the default
    let out = Command::new(env!("CARGO_BIN_EXE_equideform"))
        .args(["ramify", &action_path("std_cyclic_5")])
        .env("EQUIDEFORM_PREC", "100000")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn an_unstable_degree_zero_audit_exits_with_code_four() {
    // 𝔡^G is infinite-dimensional: its truncations do not stabilize
    let (code, r) = run_json(&["cohomology", &action_path("std_cyclic_5"), "--degree", "0"]);
    assert_eq!(code, 4);
    let d = &r["error"]["details"];
    assert!(d["dimension"].is_u64() && d["audit"]["dimension"].is_u64());
    assert_ne!(d["dimension"], d["audit"]["dimension"]);
}

#[test]
fn non_coboundary_restrictions_exit_with_code_seven() {
    let (code, r) = run_json(&[
        "hsmap",
        fixture("groups/z4.json").to_str().unwrap(),
        fixture("modules/z4_trivial.json").to_str().unwrap(),
        fixture("cocycles/z4_carry.json").to_str().unwrap(),
    ]);
    assert_eq!(code, 7);
    assert_eq!(r["error"]["kind"], "not-coboundary");
}
