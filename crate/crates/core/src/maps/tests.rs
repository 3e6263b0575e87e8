use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::action::{moebius, wild_square, dihedral_p, metacyclic, standard_cyclic_p, tame_cyclic, wild_times_tame};
use crate::groups::Subgroup;

fn action_for(name: &str, prec: i64) -> LocalAction {
    match name {
        "Z3" => standard_cyclic_p(3, prec),
        "Z5" => standard_cyclic_p(5, prec),
        "D5" => dihedral_p(5, prec),
        "D3" => dihedral_p(3, prec),
        "M54" => metacyclic(5, 4, 2, prec),
        "W524" => wild_times_tame(5, 2, 4, prec),
        "W322" => wild_times_tame(3, 2, 2, prec),
        "T54" => tame_cyclic(5, 4, 2, prec),
        "S32" => wild_square(3, 2, prec),
        "S52" => wild_square(5, 2, prec),
        _ => unreachable!(),
    }
    .unwrap()
}

/// The subgroup generated by all elements whose order is `k`.
fn by_order(action: &LocalAction, k: usize) -> Subgroup {
    let g = action.group();
    let gens: Vec<usize> = (0..g.order()).filter(|&x| g.element_order(x) == k).collect();
    Subgroup::generated_by(g, &gens)
}

fn tower(name: &str, n_order: usize) -> Tower {
    tower_m(name, n_order, None)
}

fn tower_m(name: &str, n_order: usize, m: Option<i64>) -> Tower {
    let probe = action_for(name, 60);
    let n = match n_order {
        _ if name.starts_with('S') => {
            let s = probe.find(&moebius(probe.field(), 1, 60)).unwrap();
            Subgroup::generated_by(probe.group(), &[s])
        }
        1 => Subgroup::trivial(probe.group()),
        k if k == probe.group().order() => Subgroup::whole(probe.group()),
        k => by_order(&probe, k),
    };
    assert_eq!(n.order(), n_order);
    let levels = Tower::levels_for(&probe, &n, m).unwrap();
    let action = action_for(name, levels.prec);
    Tower::new(&action, &n, m).unwrap()
}

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(7)
}

fn assert_passed(r: &DiagramReport) {
    assert!(r.passed, "{}: failing edges {:?}\n{:#?}", r.diagram, r.failures(), r);
}

#[test]
fn alpha_splits_subgroup_cocycles() {
    let t = tower("D5", 5);
    let split = Splitting::new(t.action(), t.subgroup()).unwrap();
    let n = t.subgroup();
    for j in 0..t.dim(ModuleTag::SubgroupFull) {
        let v = t.basis_vector(ModuleTag::SubgroupFull, j).unwrap();
        let alpha = split.alpha(&v.values).unwrap();
        assert!(alpha.val() >= split.valuation_bound(&v.values));
        for (i, &s) in n.elements().iter().enumerate() {
            let d = t.action().act(s, &alpha).unwrap().sub(&alpha);
            assert!(d.agrees_with(&v.values[i]), "class {j}, element {s}");
            assert!(d.prec() >= t.levels().c_t);
        }
    }
}

#[test]
fn hilbert90_rejects_non_cocycles() {
    let a = standard_cyclic_p(3, 40).unwrap();
    let n = Subgroup::whole(a.group());
    let f = a.field();
    let bad = vec![Series::zero(f, 30), Series::monomial(f, 4, 1, 30), Series::zero(f, 30)];
    assert!(matches!(hilbert90_alpha(&a, &n, &bad), Err(MapsError::NotCocycle(_))));
}

#[test]
fn effective_split_respects_the_bound() {
    let a = standard_cyclic_p(3, 60).unwrap();
    let f = a.field();
    // a_g = β(f_g) − β with β = t^3 lies in t^4 k[[t]]
    let beta = Series::monomial(f, 3, 1, 50);
    let cocycle: Vec<Series> = (0..3).map(|g| a.act(g, &beta).unwrap().sub(&beta)).collect();
    assert!(cocycle.iter().all(|s| s.is_zero() || s.val() >= 5));
    // δ = 4, |G| = 3: need i − j ≥ 2
    let (out, alpha) = effective_h90_split(&a, &cocycle, 5, 3).unwrap();
    assert!(matches!(out, SplitOutcome::Split { .. }));
    let alpha = alpha.unwrap();
    assert!(alpha.val() >= 3);
    let (out, _) = effective_h90_split(&a, &cocycle, 5, 4).unwrap();
    assert_eq!(out, SplitOutcome::BoundNotMet { required: 2, actual: 1 });
}

#[test]
fn trivial_subgroup_induction_is_the_identity() {
    let t = tower("Z5", 1);
    assert_eq!(t.dim(ModuleTag::GroupFull), t.dim(ModuleTag::QuotientSharp));
    for j in 0..t.dim(ModuleTag::GroupFull) {
        let v = t.basis_vector(ModuleTag::GroupFull, j).unwrap();
        let w = t.tangent_induction(&v).unwrap();
        assert_eq!(w.coords, v.coords);
    }
}

#[test]
fn whole_group_restriction_is_the_identity() {
    let t = tower("Z3", 3);
    assert_eq!(t.quotient().order(), 1);
    assert_eq!(t.dim(ModuleTag::QuotientSharp), 0);
    for j in 0..t.dim(ModuleTag::GroupFull) {
        let v = t.basis_vector(ModuleTag::GroupFull, j).unwrap();
        assert_eq!(t.tangent_restriction(&v).unwrap().coords, v.coords);
    }
    assert_passed(&check_boundary_diagram(&t, 2, &mut rng()).unwrap());
}

#[test]
fn dihedral_diagrams_commute() {
    let t = tower("D5", 5);
    let mut r = rng();
    assert_passed(&check_induction_square(&t, 3, &mut r).unwrap());
    assert_passed(&check_boundary_diagram(&t, 3, &mut r).unwrap());
    assert_passed(&check_fibered_image(&t, &mut r).unwrap());
    assert_passed(&check_restriction_bijection(&t).unwrap());
}

#[test]
fn wild_quotient_diagrams_commute() {
    let t = tower("W524", 2);
    assert_eq!(t.quotient().order(), 5);
    let mut r = rng();
    let b = check_boundary_diagram(&t, 3, &mut r).unwrap();
    assert_passed(&b);
    assert!(b.dims["H1(Q,D#/D^N)"] > 0, "{b:#?}");
    assert_passed(&check_induction_square(&t, 3, &mut r).unwrap());
    assert_passed(&check_fibered_image(&t, &mut r).unwrap());
    let bij = check_restriction_bijection(&t).unwrap();
    assert_eq!(bij.edges[0].status, EdgeStatus::Skipped);
}

#[test]
fn small_wild_quotient_diagrams_commute() {
    let t = tower("W322", 2);
    let mut r = rng();
    assert_passed(&check_boundary_diagram(&t, 4, &mut r).unwrap());
    assert_passed(&check_fibered_image(&t, &mut r).unwrap());
}

#[test]
fn metacyclic_diagrams_commute() {
    let t = tower("M54", 5);
    let mut r = rng();
    assert_passed(&check_induction_square(&t, 2, &mut r).unwrap());
    assert_passed(&check_boundary_diagram(&t, 2, &mut r).unwrap());
    assert_passed(&check_restriction_bijection(&t).unwrap());
}

#[test]
fn gamma_is_independent_of_choices() {
    let t = tower("W524", 2);
    let mut r = rng();
    for x in t.invariant_basis().to_vec() {
        let k = t.basis_combination(ModuleTag::SubgroupFull, &x).unwrap();
        let base = t.gamma(&k, None).unwrap();
        for _ in 0..3 {
            assert_eq!(t.gamma(&k, Some(&mut r)).unwrap().coords, base.coords);
        }
    }
}

#[test]
fn gamma_rejects_non_invariant_classes() {
    for (name, n) in [("D5", 5), ("D3", 3), ("M54", 5), ("W524", 2)] {
        let t = tower(name, n);
        let dim = t.dim(ModuleTag::SubgroupFull);
        if t.invariant_basis().len() == dim {
            continue;
        }
        for j in 0..dim {
            let v = t.basis_vector(ModuleTag::SubgroupFull, j).unwrap();
            if t.invariant_coords(&v).is_err() {
                assert!(matches!(t.gamma(&v, None), Err(MapsError::NotInvariant)));
                assert!(matches!(t.transgression(&v, None), Err(MapsError::NotInvariant)));
                return;
            }
        }
    }
}

#[test]
fn low_precision_is_reported() {
    let a = dihedral_p(5, 30).unwrap();
    let n = by_order(&a, 5);
    let e = Tower::new(&a, &n, None).unwrap_err();
    assert!(e.is_precision(), "{e}");
}

#[test]
fn doubly_wild_diagrams_commute() {
    // N = ⟨u ↦ u + 1⟩ ⊂ an order-25 group whose quotient is wild as well
    let t = tower_m("S52", 5, Some(40));
    assert_eq!(t.subgroup().order(), 5);
    assert!(!t.invariant_basis().is_empty());
    let mut r = rng();
    let b = check_boundary_diagram(&t, 2, &mut r).unwrap();
    assert_passed(&b);
    let edge = b.edges.iter().find(|e| e.name == "partial-gamma-equals-transgression").unwrap();
    assert_eq!(edge.status, EdgeStatus::Pass);
    assert!(edge.trials > 0);
    assert!(b.ranks["partial"] > 0 && b.ranks["sigma"] > 0);
    assert_passed(&check_induction_square(&t, 2, &mut r).unwrap());
    assert_passed(&check_fibered_image(&t, &mut r).unwrap());
}
