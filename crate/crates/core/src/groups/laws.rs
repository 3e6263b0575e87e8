//! Brute-force checks of the exactness laws relating restriction, inflation,
//! transgression and the class-valued map of [`super::hs_class`] on small
//! groups.

use super::*;
use crate::linalg::{Matrix, PrimeField, Subspace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Instance {
    label: &'static str,
    module: GModule,
    n: Subgroup,
}

fn field(p: u64) -> PrimeField {
    PrimeField::new(p).unwrap()
}

fn regular(g: &FiniteGroup, f: PrimeField) -> GModule {
    let n = g.order();
    let action = (0..n)
        .map(|a| {
            let mut m = Matrix::zeros(f, n, n);
            for b in 0..n {
                m.set(g.mul(a, b), b, 1);
            }
            m
        })
        .collect();
    GModule::new(g.clone(), f, n, action).unwrap()
}

fn character(g: &FiniteGroup, f: PrimeField, kernel: &Subgroup) -> GModule {
    let action = (0..g.order())
        .map(|x| Matrix::from_rows(f, 1, &[vec![if kernel.contains(x) { 1 } else { f.neg(1) }]]).unwrap())
        .collect();
    GModule::new(g.clone(), f, 1, action).unwrap()
}

fn element_of_order(g: &FiniteGroup, k: usize) -> usize {
    (1..g.order()).find(|&x| g.element_order(x) == k).unwrap()
}

fn instances() -> Vec<Instance> {
    let mut out = Vec::new();
    let z4 = FiniteGroup::cyclic(4);
    out.push(Instance {
        label: "Z4>Z2 F2",
        module: GModule::trivial(z4.clone(), field(2), 1),
        n: Subgroup::generated_by(&z4, &[2]),
    });
    let v4 = FiniteGroup::product(&FiniteGroup::cyclic(2), &FiniteGroup::cyclic(2));
    out.push(Instance {
        label: "V4>Z2 F2",
        module: GModule::trivial(v4.clone(), field(2), 1),
        n: Subgroup::new(&v4, &[0, 2]).unwrap(),
    });
    out.push(Instance {
        label: "V4>Z2 F2[V4]",
        module: regular(&v4, field(2)),
        n: Subgroup::new(&v4, &[0, 2]).unwrap(),
    });
    let s3 = FiniteGroup::symmetric3();
    let a3 = Subgroup::generated_by(&s3, &[element_of_order(&s3, 3)]);
    out.push(Instance {
        label: "S3>A3 F3",
        module: GModule::trivial(s3.clone(), field(3), 1),
        n: a3.clone(),
    });
    out.push(Instance {
        label: "S3>A3 sign F3",
        module: character(&s3, field(3), &a3),
        n: a3.clone(),
    });
    out.push(Instance {
        label: "S3>A3 F2",
        module: GModule::trivial(s3.clone(), field(2), 1),
        n: a3,
    });
    let d4 = FiniteGroup::dihedral(4);
    let r4 = element_of_order(&d4, 4);
    out.push(Instance {
        label: "D4>Z4 F2",
        module: GModule::trivial(d4.clone(), field(2), 1),
        n: Subgroup::generated_by(&d4, &[r4]),
    });
    out.push(Instance {
        label: "D4>Z(D4) F2",
        module: GModule::trivial(d4.clone(), field(2), 1),
        n: Subgroup::generated_by(&d4, &[d4.mul(r4, r4)]),
    });
    let z6 = FiniteGroup::cyclic(6);
    out.push(Instance {
        label: "Z6>Z3 F3",
        module: GModule::trivial(z6.clone(), field(3), 1),
        n: Subgroup::generated_by(&z6, &[2]),
    });
    let d6 = FiniteGroup::dihedral(6);
    let r6 = element_of_order(&d6, 6);
    let c6 = Subgroup::generated_by(&d6, &[r6]);
    out.push(Instance {
        label: "D6>Z6 sign F3",
        module: character(&d6, field(3), &c6),
        n: c6,
    });
    let z2z4 = FiniteGroup::product(&FiniteGroup::cyclic(2), &FiniteGroup::cyclic(4));
    out.push(Instance {
        label: "Z2xZ4>Z4 F2",
        module: GModule::trivial(z2z4.clone(), field(2), 1),
        n: Subgroup::generated_by(&z2z4, &[1]),
    });
    out
}

fn image_space(f: PrimeField, ambient: usize, cols: &[Vec<u64>]) -> Subspace {
    Subspace::from_vectors(f, ambient, cols).unwrap()
}

fn linear_map(f: PrimeField, rows: usize, cols: &[Vec<u64>]) -> Matrix {
    if cols.is_empty() {
        return Matrix::zeros(f, rows, 0);
    }
    Matrix::from_cols(f, rows, cols).unwrap()
}

#[test]
fn inflation_restriction_exact_in_degree_one() {
    for inst in instances() {
        let m = &inst.module;
        let f = m.field();
        let q = QuotientGroup::new(m.group(), &inst.n).unwrap();
        let (mq, emb) = m.invariant_module(&inst.n, &q).unwrap();
        let h1g = cohomology(m, 1).unwrap();
        let h1n = cohomology(&m.restrict(&inst.n), 1).unwrap();
        let h1q = cohomology(&mq, 1).unwrap();
        let res: Vec<Vec<u64>> = h1g.reps().iter().map(|z| h1n.coords(&restrict(z, &inst.n)).unwrap()).collect();
        let ker = linear_map(f, h1n.dim(), &res).kernel();
        let inf: Vec<Vec<u64>> = h1q
            .reps()
            .iter()
            .map(|z| h1g.coords(&inflate(z, &q, m.group().order(), &emb)).unwrap())
            .collect();
        let im = image_space(f, h1g.dim(), &inf);
        assert_eq!(im, ker, "{}", inst.label);
        // inflation is injective in degree one
        assert_eq!(im.dim(), h1q.dim(), "{}", inst.label);
    }
}

#[test]
fn transgression_kernel_is_restriction_image() {
    for inst in instances() {
        let m = &inst.module;
        let f = m.field();
        let q = QuotientGroup::new(m.group(), &inst.n).unwrap();
        let (mq, _) = m.invariant_module(&inst.n, &q).unwrap();
        let h1g = cohomology(m, 1).unwrap();
        let h1n = cohomology(&m.restrict(&inst.n), 1).unwrap();
        let h2q = cohomology(&mq, 2).unwrap();
        let inv = invariants_of_h1(m, &inst.n, &q, &h1n).unwrap();
        let to_q = |c: &Cochain| {
            // values lie in M^N; express in the invariant basis
            let sub = m.fixed_space(inst.n.elements());
            Cochain::from_fn(2, q.order(), sub.dim(), |a| coords_in(&sub, c.value(a)))
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut tg_cols = Vec::new();
        for v in &inv {
            let d = h1n.combination(v);
            let t1 = transgression(m, &inst.n, &q, &d, None).unwrap();
            let t2 = transgression(m, &inst.n, &q, &d, Some(&mut rng)).unwrap();
            let c1 = h2q.coords(&to_q(&t1.value)).unwrap();
            let c2 = h2q.coords(&to_q(&t2.value)).unwrap();
            assert_eq!(c1, c2, "{}: transgression depends on the choice of b", inst.label);
            tg_cols.push(c1);
        }
        // ker tg (in invariant coordinates) versus the image of restriction
        let ker_inv = linear_map(f, h2q.dim(), &tg_cols).kernel();
        let ker: Vec<Vec<u64>> = ker_inv
            .basis()
            .iter()
            .map(|w| {
                let mut out = vec![0u64; h1n.dim()];
                for (vi, &c) in inv.iter().zip(w) {
                    crate::linalg::axpy(f, &mut out, c, vi);
                }
                out
            })
            .collect();
        let res: Vec<Vec<u64>> = h1g.reps().iter().map(|z| h1n.coords(&restrict(z, &inst.n)).unwrap()).collect();
        assert_eq!(
            image_space(f, h1n.dim(), &ker),
            image_space(f, h1n.dim(), &res),
            "{}",
            inst.label
        );
    }
}

#[test]
fn z4_transgression_is_nonzero() {
    let g = FiniteGroup::cyclic(4);
    let m = GModule::trivial(g.clone(), field(2), 1);
    let n = Subgroup::generated_by(&g, &[2]);
    let q = QuotientGroup::new(&g, &n).unwrap();
    let h1n = cohomology(&m.restrict(&n), 1).unwrap();
    let inv = invariants_of_h1(&m, &n, &q, &h1n).unwrap();
    assert_eq!(inv.len(), 1);
    let (mq, _) = m.invariant_module(&n, &q).unwrap();
    let t = transgression(&m, &n, &q, &h1n.combination(&inv[0]), None).unwrap();
    assert!(!cohomology(&mq, 2).unwrap().is_trivial(&t.value).unwrap());
}

fn hs_coords(inst: &Instance, eta: &Cochain, rng: Option<&mut ChaCha8Rng>) -> Vec<u64> {
    let m = &inst.module;
    let q = QuotientGroup::new(m.group(), &inst.n).unwrap();
    let mn = m.restrict(&inst.n);
    let cs = CocycleSolver::new(&mn);
    let re = restrict(eta, &inst.n);
    let mut fc = cs.solve_coboundary(|x, y| re.value(&[x, y]).to_vec()).expect("restriction is a coboundary");
    if let Some(rng) = rng {
        for z in cs.z1_basis() {
            fc = fc.add_scaled(m.field(), rng.gen_range(0..m.field().p()), &z);
        }
    }
    let h1n = cohomology(&mn, 1).unwrap();
    let (hm, c) = hs_class(m, &inst.n, &q, eta, &fc, &h1n).unwrap();
    let h = cohomology(&hm, 1).unwrap();
    assert!(is_cocycle(&hm, &c).unwrap(), "{}: class map is not a cocycle", inst.label);
    h.coords(&c).unwrap()
}

#[test]
fn hs_kernel_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for inst in instances() {
        let m = &inst.module;
        let f = m.field();
        let grp = m.group();
        let q = QuotientGroup::new(grp, &inst.n).unwrap();
        let (mq, emb) = m.invariant_module(&inst.n, &q).unwrap();
        let h2g = cohomology(m, 2).unwrap();
        let h2n = cohomology(&m.restrict(&inst.n), 2).unwrap();
        let h2q = cohomology(&mq, 2).unwrap();
        let res: Vec<Vec<u64>> = h2g.reps().iter().map(|z| h2n.coords(&restrict(z, &inst.n)).unwrap()).collect();
        let kerres = linear_map(f, h2n.dim(), &res).kernel();
        let inf: Vec<Vec<u64>> = h2q
            .reps()
            .iter()
            .map(|z| h2g.coords(&inflate(z, &q, grp.order(), &emb)).unwrap())
            .collect();
        let im_inf = image_space(f, h2g.dim(), &inf);
        assert!(im_inf.is_subspace_of(&kerres), "{}", inst.label);
        let mut xi_cols = Vec::new();
        for v in kerres.basis() {
            let eta = h2g.combination(v);
            let c0 = hs_coords(&inst, &eta, None);
            // independence of f and of the cocycle representative
            let c1 = hs_coords(&inst, &eta, Some(&mut rng));
            assert_eq!(c0, c1, "{}: depends on f", inst.label);
            let b = Cochain::from_fn(1, grp.order(), m.dim(), |a| {
                if a[0] == 0 {
                    vec![0; m.dim()]
                } else {
                    (0..m.dim()).map(|_| rng.gen_range(0..f.p())).collect()
                }
            });
            let eta2 = eta.add_scaled(f, 1, &coboundary(m, &b).unwrap());
            assert_eq!(c0, hs_coords(&inst, &eta2, None), "{}: depends on the representative", inst.label);
            xi_cols.push(c0);
        }
        let rows = xi_cols.first().map_or(0, |c| c.len());
        let ker_xi = linear_map(f, rows, &xi_cols).kernel();
        let ker_in_h2: Vec<Vec<u64>> = ker_xi
            .basis()
            .iter()
            .map(|w| {
                let mut out = vec![0u64; h2g.dim()];
                for (vi, &c) in kerres.basis().iter().zip(w) {
                    crate::linalg::axpy(f, &mut out, c, vi);
                }
                out
            })
            .collect();
        assert_eq!(image_space(f, h2g.dim(), &ker_in_h2), im_inf, "{}: kernel law", inst.label);
    }
}

#[test]
fn klein_product_class_detected() {
    // the product of the two coordinate characters restricts to zero on the
    // first factor and is not inflated from the second
    let inst = &instances()[1];
    let m = &inst.module;
    let eta = Cochain::from_fn(2, 4, 1, |a| vec![((a[0] >> 1) & (a[1] & 1)) as u64]);
    assert!(is_cocycle(m, &eta).unwrap());
    let c = hs_coords(inst, &eta, None);
    assert!(c.iter().any(|&x| x != 0));
}

#[test]
fn dihedral_invariants_vanish() {
    for p in [3usize, 5, 7] {
        let g = FiniteGroup::dihedral(p);
        let f = field(p as u64);
        let m = GModule::trivial(g.clone(), f, 1);
        let n = Subgroup::generated_by(&g, &[element_of_order(&g, p)]);
        let q = QuotientGroup::new(&g, &n).unwrap();
        let h1n = cohomology(&m.restrict(&n), 1).unwrap();
        assert_eq!(h1n.dim(), 1);
        assert!(invariants_of_h1(&m, &n, &q, &h1n).unwrap().is_empty());
    }
}

#[test]
fn conjugation_action_laws() {
    for inst in instances() {
        let m = &inst.module;
        let grp = m.group();
        let h1n = cohomology(&m.restrict(&inst.n), 1).unwrap();
        for r in h1n.reps() {
            for &s in inst.n.elements() {
                assert_eq!(h1n.coords(&gmodn_action(m, &inst.n, s, r)).unwrap(), h1n.coords(r).unwrap());
            }
            for g in 0..grp.order() {
                for h in 0..grp.order() {
                    let lhs = gmodn_action(m, &inst.n, g, &gmodn_action(m, &inst.n, h, r));
                    let rhs = gmodn_action(m, &inst.n, grp.mul(g, h), r);
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }
}

#[test]
fn coboundary_table_example() {
    let g = FiniteGroup::cyclic(2);
    let m = GModule::trivial(g, field(2), 1);
    let fc = Cochain::from_fn(1, 2, 1, |a| vec![a[0] as u64]);
    let d = coboundary(&m, &fc).unwrap();
    assert!(d.is_zero());
    assert_eq!(cohomology(&m, 1).unwrap().dim(), 1);
    let h4 = cohomology(&GModule::trivial(FiniteGroup::cyclic(4), field(3), 2), 0).unwrap();
    assert_eq!(h4.dim(), 2);
}
