use cubic_census::algebra::{
    cubic_root_count, cubic_roots_in_p1, prime_power, AlgebraError, BinForm, ExtField, FieldOp, Fq, FqElem,
};
use cubic_census::curvepts::ClosedPoint;
use proptest::prelude::*;

const ORDERS: [u32; 7] = [2, 3, 4, 5, 7, 8, 9];

// Polynomial arithmetic on digit vectors mod the field's modulus.
fn digits(f: &Fq, a: FqElem) -> Vec<u32> {
    let (p, e) = (f.p(), f.spec().e);
    (0..e).map(|i| (a as u32 / p.pow(i)) % p).collect()
}

fn undigits(f: &Fq, v: &[u32]) -> FqElem {
    let p = f.p();
    v.iter().rev().fold(0u32, |acc, &d| acc * p + d) as FqElem
}

fn oracle_mul(f: &Fq, a: FqElem, b: FqElem) -> FqElem {
    let p = f.p();
    let m = &f.spec().modulus;
    let e = m.len() - 1;
    let (x, y) = (digits(f, a), digits(f, b));
    let mut prod = vec![0u32; 2 * e];
    for i in 0..e {
        for j in 0..e {
            prod[i + j] = (prod[i + j] + x[i] * y[j]) % p;
        }
    }
    for i in (e..2 * e).rev() {
        let c = prod[i];
        if c == 0 {
            continue;
        }
        for j in 0..=e {
            prod[i - e + j] = (prod[i - e + j] + (p - c) * m[j] % p) % p;
        }
    }
    undigits(f, &prod[..e])
}

fn oracle_add(f: &Fq, a: FqElem, b: FqElem) -> FqElem {
    let p = f.p();
    let v: Vec<u32> = digits(f, a).iter().zip(digits(f, b)).map(|(x, y)| (x + y) % p).collect();
    undigits(f, &v)
}

#[test]
fn field_tables_match_polynomial_arithmetic() {
    for q in ORDERS {
        let f = Fq::new(q).unwrap();
        assert_eq!(f.q(), q);
        for a in f.elements() {
            for b in f.elements() {
                assert_eq!(f.add(a, b), oracle_add(&f, a, b), "q={q} {a}+{b}");
                assert_eq!(f.mul(a, b), oracle_mul(&f, a, b), "q={q} {a}*{b}");
                assert_eq!(f.add(f.sub(a, b), b), a);
            }
            if a != 0 {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            }
            assert_eq!(f.frobenius(a), f.pow(a, f.p() as u64));
        }
    }
}

#[test]
fn field_examples() {
    let f4 = Fq::new(4).unwrap();
    assert_eq!(f4.spec().modulus, vec![1, 1, 1]);
    // z is digit vector (0,1)
    assert_eq!(f4.mul(2, 2), 3);
    let f2 = Fq::new(2).unwrap();
    assert_eq!(f2.add(1, 1), 0);
    let f3 = Fq::new(3).unwrap();
    assert_eq!(f3.inv(2).unwrap(), 2);
    assert_eq!(f3.inv(0), Err(AlgebraError::ZeroInverse));
    assert_eq!(f3.arith(FieldOp::Inv, 0, 0), Err(AlgebraError::ZeroInverse));
    assert!(Fq::new(6).is_err());
    assert!(Fq::new(16).is_err());
    assert_eq!(prime_power(9), Some((3, 2)));
    assert_eq!(prime_power(12), None);
}

#[test]
fn extension_fields_are_fields() {
    for (q, d) in [(2, 3), (2, 4), (3, 2), (4, 2), (3, 3)] {
        let f = Fq::new(q).unwrap();
        let e = ExtField::new(&f, d).unwrap();
        assert_eq!(e.size(), q.pow(d));
        let g = e.generator();
        // the generator has full multiplicative order
        let n = e.size() - 1;
        let mut x = 1u32;
        for i in 1..=n {
            x = e.mul(x, g);
            assert_eq!(x == 1, i == n, "q={q} d={d} order check at {i}");
        }
        for a in e.elements() {
            assert_eq!(e.pow(a, e.size() as u64), a);
            assert_eq!(e.pth_root(e.pow(a, e.characteristic() as u64)), a);
            assert_eq!(e.frobenius(a), e.pow(a, q as u64));
            let in_base = (0..d).fold(a, |y, _| e.pow(y, q as u64)) == a;
            assert!(in_base);
            let fixed = e.pow(a, q as u64) == a;
            assert_eq!(fixed, e.to_base(a).is_some());
        }
        for c in f.elements() {
            assert_eq!(e.to_base(e.from_base(c)), Some(c));
        }
    }
}

#[test]
fn binform_eval_examples() {
    let f2 = Fq::new(2).unwrap();
    let f = BinForm::new(2, vec![1, 0, 1]);
    assert_eq!(f.eval(&f2, 1, 1), 0);
    let f3 = Fq::new(3).unwrap();
    let m = BinForm::new(2, vec![0, 1, 0]);
    for a in f3.elements() {
        for b in f3.elements() {
            assert_eq!(m.eval(&f3, a, b), f3.mul(a, b));
        }
    }
    let g = BinForm::new(2, vec![1, 1, 1]);
    assert_eq!(g.eval(&f2, 0, 1), 1);
}

#[test]
fn binform_factor_examples() {
    let f2 = Fq::new(2).unwrap();
    // t0^2 t1 + t0 t1^2
    let f = BinForm::new(3, vec![0, 1, 1, 0]);
    let fac = f.factor(&f2).unwrap();
    assert_eq!(fac.unit, 1);
    assert_eq!(
        fac.factors,
        vec![
            (ClosedPoint::Finite(vec![0, 1]), 1),
            (ClosedPoint::Finite(vec![1, 1]), 1),
            (ClosedPoint::Infinity, 1),
        ]
    );
    let g = BinForm::new(2, vec![1, 1, 1]).factor(&f2).unwrap();
    assert_eq!(g.factors, vec![(ClosedPoint::Finite(vec![1, 1, 1]), 1)]);
    let f3 = Fq::new(3).unwrap();
    let c = BinForm::constant(2).factor(&f3).unwrap();
    assert_eq!((c.unit, c.factors.len()), (2, 0));
    assert_eq!(BinForm::zero(3).factor(&f2), Err(AlgebraError::ZeroForm));
}

fn arb_form(q: u32, max_deg: usize) -> impl Strategy<Value = BinForm> {
    (0..=max_deg).prop_flat_map(move |d| {
        proptest::collection::vec(0..q as u8, d + 1)
            .prop_filter("nonzero", |v| v.iter().any(|&x| x != 0))
            .prop_map(move |v| BinForm::new(d as i64, v))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn factor_expands_back((q, form) in prop::sample::select(vec![2u32, 3, 4, 5]).prop_flat_map(|q| (Just(q), arb_form(q, 8)))) {
        let f = Fq::new(q).unwrap();
        let fac = form.factor(&f).unwrap();
        prop_assert_eq!(fac.expand(&f), form.clone());
        let total: u32 = fac.factors.iter().map(|(p, m)| p.degree() * m).sum();
        prop_assert_eq!(total as i64, form.degree());
    }

    #[test]
    fn factor_of_product_is_union(a in arb_form(3, 5), b in arb_form(3, 5)) {
        let f = Fq::new(3).unwrap();
        let fa = a.factor(&f).unwrap();
        let fb = b.factor(&f).unwrap();
        let fab = a.mul(&f, &b).factor(&f).unwrap();
        let mut merged: Vec<(ClosedPoint, u32)> = vec![];
        for (p, m) in fa.factors.iter().chain(fb.factors.iter()) {
            match merged.iter_mut().find(|(x, _)| x == p) {
                Some(e) => e.1 += m,
                None => merged.push((p.clone(), *m)),
            }
        }
        merged.sort();
        prop_assert_eq!(fab.factors, merged);
        prop_assert_eq!(fab.unit, f.mul(fa.unit, fb.unit));
    }

    #[test]
    fn cubic_roots_match_point_loop(
        (q, d) in prop::sample::select(vec![(2u32, 1u32), (2, 2), (2, 3), (3, 1), (3, 2), (4, 1), (4, 2), (5, 1), (9, 1)]),
        raw in proptest::collection::vec(any::<u32>(), 4),
    ) {
        let f = Fq::new(q).unwrap();
        let e = ExtField::new(&f, d).unwrap();
        let c: [u32; 4] = std::array::from_fn(|i| raw[i] % e.size());
        let mut expected = vec![];
        for a in e.elements() {
            // c0 a^3 + c1 a^2 + c2 a + c3
            let v = [c[0], c[1], c[2], c[3]].iter().fold(0, |acc, &x| e.add(e.mul(acc, a), x));
            if v == 0 {
                expected.push((a, 1));
            }
        }
        if c[0] == 0 {
            expected.push((1, 0));
        }
        let mut got = cubic_roots_in_p1(&e, c);
        got.sort();
        expected.sort();
        prop_assert_eq!(cubic_root_count(&e, c) as usize, expected.len());
        prop_assert_eq!(got, expected);
    }
}

#[test]
fn cubic_root_examples() {
    let f2 = Fq::new(2).unwrap();
    let e = ExtField::new(&f2, 1).unwrap();
    // x^3 + x y^2
    let mut r = cubic_roots_in_p1(&e, [1, 0, 1, 0]);
    r.sort();
    assert_eq!(r, vec![(0, 1), (1, 1)]);
    assert_eq!(cubic_roots_in_p1(&e, [1, 0, 0, 0]), vec![(0, 1)]);
    assert_eq!(cubic_roots_in_p1(&e, [0, 0, 0, 0]).len(), 3);
}
