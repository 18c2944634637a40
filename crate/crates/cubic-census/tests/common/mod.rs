#![allow(dead_code)]

use cubic_census::algebra::{BinForm, ExtField, Fq, FqElem};
use cubic_census::curvepts::{FiberPoint, PointSet};
use cubic_census::sections::SectionSpace;

fn int_in(e: &ExtField, n: usize) -> u32 {
    e.from_int(n as i64)
}

/// Value and first derivative of a slot polynomial at point i, in the
/// point's local coordinate (t at finite points, t1/t0 at infinity).
pub fn slot_jet(space: &SectionSpace, ps: &PointSet, c: &[FqElem], slot: usize, i: usize) -> (u32, u32) {
    let a = space.slot(c, slot);
    if a.is_empty() {
        return (0, 0);
    }
    let e = ps.residue_field(i);
    if ps.is_infinity(i) {
        let d = a.len() - 1;
        return (a[d] as u32, if d >= 1 { a[d - 1] as u32 } else { 0 });
    }
    let theta = ps.info(i).theta;
    let mut val = 0u32;
    let mut der = 0u32;
    let mut pw = 1u32;
    for (j, &x) in a.iter().enumerate() {
        let x = e.from_base(x);
        val = e.add(val, e.mul(x, pw));
        if j + 1 < a.len() {
            let next = a[j + 1];
            der = e.add(der, e.mul(e.mul(int_in(e, j + 1), e.from_base(next)), pw));
        }
        pw = e.mul(pw, theta);
    }
    (val, der)
}

pub type Jets = [(u32, u32); 4];

pub fn jets(space: &SectionSpace, ps: &PointSet, c: &[FqElem], i: usize) -> Jets {
    std::array::from_fn(|s| slot_jet(space, ps, c, s, i))
}

/// (F, dF/dfiber, dF/dbase) at a fiber point, from the slot jets.
pub fn jacobian_from(e: &ExtField, jets: &Jets, fp: FiberPoint) -> [u32; 3] {
    match fp {
        FiberPoint::Infinity => {
            // chart x = 1, v = y/x: F = sum A_i v^i at v = 0
            [jets[0].0, jets[1].0, jets[0].1]
        }
        FiberPoint::Affine(a) => {
            // chart y = 1, u = x: F = sum A_i u^(3-i)
            let mut f = 0;
            let mut fu = 0;
            let mut ft = 0;
            for (s, &(v, d)) in jets.iter().enumerate() {
                let p = 3 - s;
                f = e.add(f, e.mul(v, e.pow(a, p as u64)));
                ft = e.add(ft, e.mul(d, e.pow(a, p as u64)));
                if p >= 1 {
                    fu = e.add(fu, e.mul(e.mul(int_in(e, p), v), e.pow(a, p as u64 - 1)));
                }
            }
            [f, fu, ft]
        }
    }
}

pub fn jacobian(space: &SectionSpace, ps: &PointSet, c: &[FqElem], i: usize, fp: FiberPoint) -> [u32; 3] {
    jacobian_from(ps.residue_field(i), &jets(space, ps, c, i), fp)
}

pub fn fibral(space: &SectionSpace, ps: &PointSet, c: &[FqElem], i: usize) -> bool {
    (0..4).all(|s| slot_jet(space, ps, c, s, i).0 == 0)
}

pub fn singular_at(space: &SectionSpace, ps: &PointSet, c: &[FqElem], i: usize, fp: FiberPoint) -> bool {
    jacobian(space, ps, c, i, fp).iter().all(|&x| x == 0)
}

/// Bad above point i: fibral, or singular at some relative-degree-1 point.
pub fn bad_oracle(space: &SectionSpace, ps: &PointSet, c: &[FqElem], i: usize) -> bool {
    let j = jets(space, ps, c, i);
    if j.iter().all(|x| x.0 == 0) {
        return true;
    }
    let e = ps.residue_field(i);
    ps.fiber_points(i).into_iter().any(|fp| match fp {
        FiberPoint::Infinity => jacobian_from(e, &j, fp).iter().all(|&x| x == 0),
        FiberPoint::Affine(a) => {
            // Horner for F first; the derivatives only where F vanishes
            let f = j.iter().fold(0, |acc, &(v, _)| e.add(e.mul(acc, a), v));
            f == 0 && jacobian_from(e, &j, fp).iter().all(|&x| x == 0)
        }
    })
}

pub fn smooth_oracle(space: &SectionSpace, ps: &PointSet, c: &[FqElem], max_degree: u32) -> bool {
    ps.up_to_degree(max_degree).all(|i| !bad_oracle(space, ps, c, i))
}

/// Value of s at a fiber point over point i, from the coefficients.
pub fn value_at(space: &SectionSpace, ps: &PointSet, c: &[FqElem], i: usize, fp: FiberPoint) -> u32 {
    jacobian(space, ps, c, i, fp)[0]
}

/// All coefficient vectors of a space, in encoding order.
pub fn all_sections(space: &SectionSpace) -> Vec<Vec<FqElem>> {
    (0..space.size() as u64).map(|i| space.decode(i).coeffs).collect()
}


fn all_forms(f: &Fq, deg: i64) -> Vec<BinForm> {
    let q = f.q() as u64;
    let len = (deg + 1) as u32;
    (0..q.pow(len))
        .map(|mut idx| {
            let c = (0..len)
                .map(|_| {
                    let d = (idx % q) as FqElem;
                    idx /= q;
                    d
                })
                .collect();
            BinForm::new(deg, c)
        })
        .collect()
}

/// Horizontally reducible: zero, divisible by x, or vanishing at (C1 : -C0)
/// for some forms C0, C1 of degrees c, c - k with C1 != 0.
pub fn reducible_oracle(space: &SectionSpace, c: &[FqElem]) -> bool {
    if space.is_zero(c) || space.a3_zero(c) {
        return true;
    }
    let f = space.field();
    let (l, k) = (space.l(), space.k());
    let slots: Vec<(usize, BinForm)> =
        (0..4).filter(|&i| space.slot_len(i) > 0).map(|i| (i, space.slot_form(c, i))).collect();
    for cdeg in k..=l {
        let c0s = all_forms(f, cdeg);
        let c1s: Vec<BinForm> = all_forms(f, cdeg - k).into_iter().filter(|x| !x.is_zero()).collect();
        for c1 in &c1s {
            for c0 in &c0s {
                let m0 = c0.scale(f, f.neg(1));
                let mut acc = BinForm::zero(l + 3 * cdeg - 3 * k);
                for (i, a) in &slots {
                    let term = a.mul(f, &c1.pow(f, 3 - *i as u32)).mul(f, &m0.pow(f, *i as u32));
                    acc = acc.add(f, &term);
                }
                if acc.is_zero() {
                    return true;
                }
            }
        }
    }
    false
}
