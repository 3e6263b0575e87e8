//! Acceptance checks. Each numbered criterion is evaluated independently
//! and reported on one `PASS`/`FAIL` line; the process exits non-zero if
//! any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use equideform::action::{standard_cyclic_p, tame_cyclic, wild_times_tame, LocalAction};
use equideform::deform::{ArtinianRing, DerivationSpace, RelativeContext, SmallExtension};
use equideform::groups::{
    coboundary, cohomology, hs_class, hs_map, inflate, is_cocycle, restrict, Cochain, CocycleSolver, FiniteGroup, GModule, QuotientGroup, Subgroup,
};
use equideform::io::{fixture_action, fixture_precision};
use equideform::linalg::{axpy, Matrix, PrimeField, Subspace};
use equideform::maps::{
    check_boundary_diagram, check_fibered_image, check_induction_square, check_restriction_bijection, effective_h90_split, DiagramReport, EdgeStatus, ModuleTag,
    SplitOutcome, Tower,
};
use equideform::series::Series;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every bundled action fixture.
const ACTIONS: [&str; 7] = ["std_cyclic_3", "std_cyclic_5", "std_cyclic_7", "tame_cyclic_5_4", "dihedral_5", "metacyclic_3_2", "metacyclic_5_4"];

/// Outcome of one criterion: pass/fail and a one-line summary.
struct Verdict {
    passed: bool,
    detail: String,
}

impl Verdict {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self { passed, detail: detail.into() }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The fixture action at its bundled precision.
fn action(name: &str) -> LocalAction {
    fixture_action(name, fixture_precision(name).unwrap()).unwrap().unwrap()
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

/// The first ramification group, the default normal subgroup of towers.
fn inertia(a: &LocalAction) -> Subgroup {
    let r = a.ramification().unwrap();
    r.filtration.get(1).cloned().unwrap_or_else(|| Subgroup::trivial(a.group()))
}

fn audit_truncation(m: i64) -> i64 {
    (3 * m + 1) / 2
}

fn tangent_dim(a: &LocalAction, m: Option<i64>) -> (usize, i64) {
    let s = DerivationSpace::new(a, m).unwrap();
    (s.cohomology().dim(), s.levels().m)
}

fn criterion_1() -> Verdict {
    let expected = [("std_cyclic_3", 1), ("std_cyclic_5", 1), ("std_cyclic_7", 1), ("dihedral_5", 1), ("metacyclic_5_4", 0)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, want) in expected {
        let a = action(name);
        let start = Instant::now();
        let (dim, _) = tangent_dim(&a, None);
        let took = start.elapsed();
        let good = dim == want && took < Duration::from_secs(10);
        ok &= good;
        parts.push(format!("{name} dim {dim} (expected {want}, {})", secs(took)));
    }
    Verdict::new(ok, parts.join("; "))
}

fn criterion_2() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [3u64, 5, 7] {
        let start = Instant::now();
        let a = standard_cyclic_p(p, 40).unwrap();
        let r = a.ramification().unwrap();
        let took = start.elapsed();
        let good = r.conductor == 1 && r.different_order == 2 * (p as i64 - 1) && r.derivative_order == Some(r.different_order) && took < Duration::from_secs(1);
        ok &= good;
        parts.push(format!("Z/{p}: conductor {} different {} / {:?}", r.conductor, r.different_order, r.derivative_order));
    }
    for (p, m, zeta) in [(5u64, 4u64, 2u64), (7, 3, 2), (7, 6, 3), (11, 5, 3)] {
        let start = Instant::now();
        let a = tame_cyclic(p, m, zeta, 40).unwrap();
        let r = a.ramification().unwrap();
        let took = start.elapsed();
        let good = r.different_order == m as i64 - 1 && r.derivative_order == Some(r.different_order) && took < Duration::from_secs(1);
        ok &= good;
        parts.push(format!("tame Z/{m} (p={p}): different {}", r.different_order));
    }
    Verdict::new(ok, parts.join("; "))
}

fn dihedral_tower(m: Option<i64>) -> Tower {
    let a = action("dihedral_5");
    let n = inertia(&a);
    Tower::new(&a, &n, m).unwrap()
}

fn criterion_3() -> Verdict {
    let t = dihedral_tower(None);
    let r = check_restriction_bijection(&t).unwrap();
    let g = r.dims.get("H1(G,D)").copied();
    let nq = r.dims.get("H1(N,D)^Q").copied();
    let rank = r.ranks.get("res").copied();
    let ok = r.passed && g.is_some() && g == nq && rank == g;
    Verdict::new(ok, format!("D5 ⊇ Z/5: rank {rank:?}, dim H¹(G) {g:?}, dim H¹(N)^(G/N) {nq:?}"))
}

/// Whether a report passed, and its number of failed edges.
fn edges_ok(r: &DiagramReport) -> (bool, usize) {
    let failed = r.edges.iter().filter(|e| e.status == EdgeStatus::Fail).count();
    (r.passed && failed == 0, failed)
}

fn criterion_4() -> Verdict {
    const TRIALS: usize = 100;
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, name) in ACTIONS.iter().enumerate() {
        let a = action(name);
        let n = inertia(&a);
        let t = Tower::new(&a, &n, None).unwrap();
        let mut r = rng(40 + i as u64);
        let mut worst = Duration::ZERO;
        let mut failures = 0;
        let mut all = true;
        let mut run = |f: &mut dyn FnMut(&mut ChaCha8Rng) -> DiagramReport| {
            let start = Instant::now();
            let rep = f(&mut r);
            worst = worst.max(start.elapsed());
            let (good, failed) = edges_ok(&rep);
            failures += failed;
            all &= good;
        };
        run(&mut |r| check_induction_square(&t, TRIALS, r).unwrap());
        run(&mut |r| check_boundary_diagram(&t, TRIALS, r).unwrap());
        run(&mut |r| check_fibered_image(&t, r).unwrap());
        let good = all && failures == 0 && worst < Duration::from_secs(60);
        ok &= good;
        parts.push(format!("{name} {}{}", if good { "ok" } else { "FAILED" }, format_args!(" ({} max)", secs(worst))));
    }
    Verdict::new(ok, format!("{TRIALS} trials per edge; {}", parts.join(", ")))
}

/// A random Laurent series `Σ_{i=lo}^{hi} c_i t^i` to precision `prec`.
fn random_series(f: PrimeField, lo: i64, hi: i64, prec: i64, r: &mut dyn RngCore) -> Series {
    let coeffs: Vec<u64> = (lo..=hi).map(|_| r.next_u64() % f.p()).collect();
    Series::from_coeffs(f, lo, prec, &coeffs)
}

fn criterion_5() -> Verdict {
    const COCYCLES: usize = 100;
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, name) in ACTIONS.iter().enumerate() {
        let a = action(name);
        let space = DerivationSpace::new(&a, None).unwrap();
        let lattice = space.cohomology();
        let g = a.group();
        let d = a.ramification().unwrap().different_order;
        let required = d - g.order() as i64 + 1;
        let prec = lattice.fine_series(&vec![0; lattice.fine_module().dim()]).prec();
        let f = a.field();
        let mut r = rng(50 + i as u64);
        let (mut split, mut bad) = (0, 0);
        for _ in 0..COCYCLES {
            // a class of the different ideal plus the coboundary of a random
            // Laurent series
            let x = lattice.random_coords(&mut r);
            let lat = lattice.random_cocycle(&x, &mut r);
            let lo = r.gen_range(-6..6);
            let beta = random_series(f, lo, lo + 12, prec, &mut r);
            let cocycle: Vec<Series> = (0..g.order()).map(|h| lat[h].add(&a.act(h, &beta).unwrap().sub(&beta))).collect();
            let Some(i_start) = cocycle.iter().filter(|s| !s.is_zero()).map(|s| s.val()).min() else {
                continue;
            };
            let j_start = i_start - required;
            match effective_h90_split(&a, &cocycle, i_start, j_start) {
                Ok((SplitOutcome::Split { .. }, Some(alpha))) => {
                    let in_j = alpha.is_zero() || alpha.val() >= j_start;
                    // the valuation inequality with N = G
                    let bound = alpha.is_zero() || alpha.val() >= i_start + g.order() as i64 - d - 1;
                    let exact = (0..g.order()).all(|h| a.act(h, &alpha).unwrap().sub(&alpha).agrees_with(&cocycle[h]));
                    if in_j && bound && exact {
                        split += 1;
                    } else {
                        bad += 1;
                    }
                }
                _ => bad += 1,
            }
        }
        ok &= bad == 0 && split > 0;
        parts.push(format!("{name} {split}/{COCYCLES}"));
    }
    Verdict::new(ok, format!("split with α ∈ J and the valuation bound: {}", parts.join(", ")))
}

/// `M = 𝔽_p²` on which the elements outside `kernel` act by `[[1,1],[0,1]]`.
fn unipotent(g: &FiniteGroup, f: PrimeField, kernel: &Subgroup) -> GModule {
    let action = (0..g.order())
        .map(|x| {
            let off = u64::from(!kernel.contains(x));
            Matrix::from_rows(f, 2, &[vec![1, off], vec![0, 1]]).unwrap()
        })
        .collect();
    GModule::new(g.clone(), f, 2, action).unwrap()
}

/// The sign character of `g` with kernel `kernel`.
fn sign(g: &FiniteGroup, f: PrimeField, kernel: &Subgroup) -> GModule {
    let action = (0..g.order())
        .map(|x| Matrix::from_rows(f, 1, &[vec![if kernel.contains(x) { 1 } else { f.neg(1) }]]).unwrap())
        .collect();
    GModule::new(g.clone(), f, 1, action).unwrap()
}

/// Exhaustive kernel-law check on one `(G, N, M)`; returns the number of
/// classes examined, or a description of the first violation.
fn kernel_law(m: &GModule, n: &Subgroup, r: &mut ChaCha8Rng) -> Result<usize, String> {
    let f = m.field();
    let grp = m.group();
    let q = QuotientGroup::new(grp, n).map_err(|e| e.to_string())?;
    let (mq, emb) = m.invariant_module(n, &q).map_err(|e| e.to_string())?;
    let mn = m.restrict(n);
    let h2g = cohomology(m, 2).map_err(|e| e.to_string())?;
    let h2n = cohomology(&mn, 2).map_err(|e| e.to_string())?;
    let h2q = cohomology(&mq, 2).map_err(|e| e.to_string())?;
    let h1n = cohomology(&mn, 1).map_err(|e| e.to_string())?;
    let res: Vec<Vec<u64>> = h2g.reps().iter().map(|z| h2n.coords(&restrict(z, n)).unwrap()).collect();
    let ker_res = if res.is_empty() {
        Subspace::from_vectors(f, 0, &[]).unwrap()
    } else {
        Matrix::from_cols(f, h2n.dim(), &res).unwrap().kernel()
    };
    let inf: Vec<Vec<u64>> = h2q.reps().iter().map(|z| h2g.coords(&inflate(z, &q, grp.order(), &emb)).unwrap()).collect();
    let im_inf = Subspace::from_vectors(f, h2g.dim(), &inf).unwrap();
    if !im_inf.is_subspace_of(&ker_res) {
        return Err("im(inf) ⊄ ker(res)".into());
    }
    let solver = CocycleSolver::new(&mn);
    let z1n = solver.z1_basis();
    // every element of ker(res)
    let d = ker_res.dim();
    let total = (f.p() as usize).pow(d as u32);
    for idx in 0..total {
        let mut coeffs = Vec::with_capacity(d);
        let mut k = idx;
        for _ in 0..d {
            coeffs.push((k % f.p() as usize) as u64);
            k /= f.p() as usize;
        }
        let mut v = vec![0u64; h2g.dim()];
        for (c, b) in coeffs.iter().zip(ker_res.basis()) {
            axpy(f, &mut v, *c, b);
        }
        let mut reference: Option<Vec<u64>> = None;
        for round in 0..4 {
            // vary the cocycle within its class and the cochain f
            let mut eta = h2g.combination(&v);
            if round > 0 {
                let b = Cochain::from_fn(1, grp.order(), m.dim(), |a| if a[0] == 0 { vec![0; m.dim()] } else { (0..m.dim()).map(|_| r.gen_range(0..f.p())).collect() });
                eta = eta.add_scaled(f, 1, &coboundary(m, &b).unwrap());
            }
            let eta_n = restrict(&eta, n);
            let mut fc = solver.solve_coboundary(|x, y| eta_n.value(&[x, y]).to_vec()).ok_or("restriction of a class in ker(res) is not a coboundary")?;
            if round > 1 {
                for z in &z1n {
                    fc = fc.add_scaled(f, r.gen_range(0..f.p()), z);
                }
            }
            let xis = hs_map(m, n, &q, &eta, &fc).map_err(|e| e.to_string())?;
            if !xis.iter().all(|xi| is_cocycle(&mn, xi).unwrap()) {
                return Err(format!("some ξ_q is not a cocycle for class {v:?}"));
            }
            let (hm, c) = hs_class(m, n, &q, &eta, &fc, &h1n).map_err(|e| e.to_string())?;
            if !is_cocycle(&hm, &c).unwrap() {
                return Err(format!("the class map is not a cocycle for class {v:?}"));
            }
            let coords = cohomology(&hm, 1).unwrap().coords(&c).unwrap();
            match &reference {
                None => reference = Some(coords),
                Some(r0) if *r0 != coords => return Err(format!("the class depends on choices for {v:?}")),
                Some(_) => {}
            }
        }
        let vanishes = reference.unwrap().iter().all(|&x| x == 0);
        if vanishes != im_inf.contains(&v) {
            return Err(format!("class {v:?}: vanishes = {vanishes} but inflated = {}", im_inf.contains(&v)));
        }
    }
    Ok(total)
}

fn criterion_6() -> Verdict {
    let start = Instant::now();
    let f2 = PrimeField::new(2).unwrap();
    let f3 = PrimeField::new(3).unwrap();
    let z4 = FiniteGroup::cyclic(4);
    let z4n = Subgroup::generated_by(&z4, &[2]);
    let v4 = FiniteGroup::product(&FiniteGroup::cyclic(2), &FiniteGroup::cyclic(2));
    let v4n = Subgroup::new(&v4, &[0, 2]).unwrap();
    let v4k = Subgroup::generated_by(&v4, &[1]);
    let s3 = FiniteGroup::symmetric3();
    let a3 = Subgroup::generated_by(&s3, &[(1..6).find(|&x| s3.element_order(x) == 3).unwrap()]);
    let cases: Vec<(&str, GModule, Subgroup)> = vec![
        ("Z4⊃Z2 𝔽2", GModule::trivial(z4.clone(), f2, 1), z4n.clone()),
        ("Z4⊃Z2 𝔽2² unipotent", unipotent(&z4, f2, &z4n), z4n),
        ("V4⊃Z2 𝔽2", GModule::trivial(v4.clone(), f2, 1), v4n.clone()),
        ("V4⊃Z2 𝔽2² unipotent", unipotent(&v4, f2, &v4k), v4n),
        ("S3⊃A3 𝔽3", GModule::trivial(s3.clone(), f3, 1), a3.clone()),
        ("S3⊃A3 𝔽3 sign", sign(&s3, f3, &a3), a3),
    ];
    let mut r = rng(60);
    let mut ok = true;
    let mut parts = Vec::new();
    for (label, m, n) in &cases {
        match kernel_law(m, n, &mut r) {
            Ok(k) => parts.push(format!("{label}: {k} classes")),
            Err(e) => {
                ok = false;
                parts.push(format!("{label}: {e}"));
            }
        }
    }
    let took = start.elapsed();
    ok &= took < Duration::from_secs(120);
    Verdict::new(ok, format!("{} ({})", parts.join("; "), secs(took)))
}

fn criterion_7() -> Verdict {
    const INSTANCES: usize = 20;
    let towers: Vec<(&str, Tower)> = vec![
        ("dihedral_5", dihedral_tower(None)),
        ("metacyclic_3_2", {
            let a = action("metacyclic_3_2");
            Tower::new(&a, &inertia(&a), None).unwrap()
        }),
        ("metacyclic_5_4", {
            let a = action("metacyclic_5_4");
            Tower::new(&a, &inertia(&a), None).unwrap()
        }),
        ("tame_cyclic_5_4", {
            let a = action("tame_cyclic_5_4");
            let two = (0..a.group().order()).find(|&x| a.group().element_order(x) == 2).unwrap();
            Tower::new(&a, &Subgroup::generated_by(a.group(), &[two]), None).unwrap()
        }),
        // the bundled towers only produce vanishing obstructions; this one
        // has a wild quotient and also yields non-zero ones
        ("wild_times_tame(5,2,4) ⊇ Z/2", {
            let probe = wild_times_tame(5, 2, 4, 60).unwrap();
            let two = (0..probe.group().order()).filter(|&x| probe.group().element_order(x) == 2).collect::<Vec<_>>();
            let n = Subgroup::generated_by(probe.group(), &two);
            let prec = Tower::levels_for(&probe, &n, Some(12)).unwrap().prec;
            Tower::new(&wild_times_tame(5, 2, 4, prec).unwrap(), &n, Some(12)).unwrap()
        }),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, (name, t)) in towers.iter().enumerate() {
        let ctx = RelativeContext::new(t).unwrap();
        let k = t.field();
        let big = ArtinianRing::dual_numbers(k);
        let e = SmallExtension::new(&big, &big.residue_ring()).unwrap();
        let kappa = ctx.trivial_lift(e.small()).unwrap();
        let mut r = rng(70 + i as u64);
        let (mut zero, mut nonzero, mut discrepancies) = (0, 0, 0);
        for trial in 0..INSTANCES {
            // alternately a pair induced by a lift of G, and an arbitrary
            // invariant class of N with an arbitrary class of G/N
            let (xn, xq) = if trial % 2 == 0 {
                let coords = t.presentation(ModuleTag::GroupFull).unwrap().random_coords(&mut r);
                let x = t.random_vector(ModuleTag::GroupFull, &coords, &mut r).unwrap();
                (t.tangent_restriction(&x).unwrap().coords, t.tangent_induction(&x).unwrap().coords)
            } else {
                let v = t.random_invariant(&mut r).unwrap();
                (v.coords, t.presentation(ModuleTag::QuotientSharp).unwrap().random_coords(&mut r))
            };
            let kn = ctx.first_order_lift(ModuleTag::SubgroupFull, &xn, Some(&mut r)).unwrap();
            let kq = ctx.first_order_lift(ModuleTag::QuotientSharp, &xq, Some(&mut r)).unwrap();
            let plain = ctx.relative_obstruction(&kappa, &kn, &kq, &e, None).unwrap();
            let a1 = ctx.relative_obstruction(&kappa, &kn, &kq, &e, Some(&mut r)).unwrap();
            let a2 = ctx.relative_obstruction(&kappa, &kn, &kq, &e, Some(&mut r)).unwrap();
            let key = |o: &equideform::deform::RelativeObstruction| o.components.iter().map(|c| c.obstruction.clone()).collect::<Vec<_>>();
            let stable = key(&plain) == key(&a1) && key(&plain) == key(&a2);
            // complete_lift verifies both differences vanish before returning a lift
            let done = ctx.complete_lift(&kappa, &kn, &kq, &e, Some(&mut r)).unwrap();
            let compatible_vanishes = trial % 2 == 1 || plain.vanishes();
            if !stable || plain.vanishes() != done.is_some() || !compatible_vanishes {
                discrepancies += 1;
            }
            if plain.vanishes() {
                zero += 1;
            } else {
                nonzero += 1;
            }
        }
        ok &= discrepancies == 0;
        parts.push(format!("{name}: {zero} zero / {nonzero} nonzero, {discrepancies} discrepancies"));
    }
    Verdict::new(ok, format!("{INSTANCES} instances each; {}", parts.join("; ")))
}

fn criterion_8() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    let mut compare = |label: String, a: usize, b: usize| {
        ok &= a == b;
        if a != b {
            parts.push(format!("{label}: {a} vs {b}"));
        }
    };
    for name in ["std_cyclic_3", "std_cyclic_5", "std_cyclic_7", "dihedral_5", "metacyclic_5_4"] {
        let a = action(name);
        let (d, m) = tangent_dim(&a, None);
        let (d2, _) = tangent_dim(&a, Some(audit_truncation(m)));
        compare(format!("{name} H¹ at M={m}"), d, d2);
    }
    for name in ACTIONS {
        let a = action(name);
        let n = inertia(&a);
        let t = Tower::new(&a, &n, None).unwrap();
        let m = t.levels().m;
        let t2 = Tower::new(&a, &n, Some(audit_truncation(m))).unwrap();
        let mut r = rng(80);
        let dims = |t: &Tower, r: &mut ChaCha8Rng| {
            let mut all = check_induction_square(t, 1, r).unwrap().dims;
            all.extend(check_boundary_diagram(t, 1, r).unwrap().dims);
            all.extend(check_fibered_image(t, r).unwrap().dims);
            if let Ok(b) = check_restriction_bijection(t) {
                all.extend(b.dims);
            }
            all
        };
        let (x, y) = (dims(&t, &mut r), dims(&t2, &mut r));
        for (key, v) in &x {
            compare(format!("{name} {key} at M={m}"), *v, y.get(key).copied().unwrap_or(usize::MAX));
        }
    }
    let detail = if parts.is_empty() { "all dimensions agree at M and 1.5·M".to_string() } else { parts.join("; ") };
    Verdict::new(ok, detail)
}

fn main() {
    let criteria: [(usize, &str, fn() -> Verdict); 8] = [
        (1, "tangent dimensions", criterion_1),
        (2, "different and conductor", criterion_2),
        (3, "restriction bijection for D5", criterion_3),
        (4, "diagram suites", criterion_4),
        (5, "effective Hilbert 90", criterion_5),
        (6, "kernel law", criterion_6),
        (7, "relative obstruction round trips", criterion_7),
        (8, "truncation stabilization", criterion_8),
    ];
    // listing (as done by `cargo test -- --list`) has nothing to enumerate
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let only: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (n, label, run) in criteria {
        if only.is_some_and(|k| k != n) {
            continue;
        }
        let start = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default();
            Verdict::new(false, format!("panicked: {msg}"))
        });
        if !v.passed {
            failed += 1;
        }
        println!("criterion {n} ({label}): {} — {} [{}]", if v.passed { "PASS" } else { "FAIL" }, v.detail, secs(start.elapsed()));
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
