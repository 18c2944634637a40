//! Binary cubic sections A0 x^3 + A1 x^2 y + A2 x y^2 + A3 y^3 with
//! deg Ai = l - i k, their encoding, discriminant, fiber restriction and the
//! action of the automorphism group of O + O(-k).

use std::collections::HashMap;

use num_bigint::BigUint;

use crate::algebra::{cubic_root_count, BinForm, ExtField, Fq, FqElem};
use crate::curvepts::{Divisor, FiberPoint, PointSet};

pub const DEFAULT_CAP: u128 = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SectionsError {
    #[error("space ({l},{k}) has {required} sections, above the cap of {cap}")]
    CapExceeded { l: i64, k: i64, required: u128, cap: u128 },
    #[error("subset is not invariant: section {from} maps to {to} outside it")]
    NotInvariant { from: u64, to: u64 },
    #[error("group element for k = {got} applied to a space with k = {want}")]
    WrongGroup { got: i64, want: i64 },
}

#[derive(Debug, Clone)]
pub struct SectionSpace {
    fq: Fq,
    l: i64,
    k: i64,
    lens: [usize; 4],
    offs: [usize; 4],
    dim: usize,
}

impl PartialEq for SectionSpace {
    fn eq(&self, other: &Self) -> bool {
        self.fq == other.fq && self.l == other.l && self.k == other.k
    }
}

impl SectionSpace {
    pub fn new(fq: &Fq, l: i64, k: i64) -> Self {
        assert!(k >= 0, "k must be non-negative");
        let mut lens = [0usize; 4];
        let mut offs = [0usize; 4];
        let mut dim = 0;
        for i in 0..4 {
            lens[i] = (l - i as i64 * k + 1).max(0) as usize;
            offs[i] = dim;
            dim += lens[i];
        }
        SectionSpace { fq: fq.clone(), l, k, lens, offs, dim }
    }

    pub fn field(&self) -> &Fq {
        &self.fq
    }
    pub fn l(&self) -> i64 {
        self.l
    }
    pub fn k(&self) -> i64 {
        self.k
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    /// N(l,k) = 2l - 3k.
    pub fn n(&self) -> i64 {
        2 * self.l - 3 * self.k
    }
    pub fn slot_degree(&self, i: usize) -> i64 {
        self.l - i as i64 * self.k
    }
    pub fn slot_len(&self, i: usize) -> usize {
        self.lens[i]
    }
    pub fn slot_offset(&self, i: usize) -> usize {
        self.offs[i]
    }
    /// Number of sections, q^dim.
    pub fn size(&self) -> u128 {
        (self.fq.q() as u128).pow(self.dim as u32)
    }

    pub fn check_cap(&self, cap: u128) -> Result<(), SectionsError> {
        let required = self.size();
        if required > cap {
            return Err(SectionsError::CapExceeded { l: self.l, k: self.k, required, cap });
        }
        Ok(())
    }

    pub fn slot<'a>(&self, c: &'a [FqElem], i: usize) -> &'a [FqElem] {
        &c[self.offs[i]..self.offs[i] + self.lens[i]]
    }

    pub fn slot_form(&self, c: &[FqElem], i: usize) -> BinForm {
        BinForm::new(self.slot_degree(i), self.slot(c, i).to_vec())
    }

    pub fn forms(&self, s: &Section) -> [BinForm; 4] {
        [0, 1, 2, 3].map(|i| self.slot_form(&s.coeffs, i))
    }

    pub fn from_forms(&self, forms: &[BinForm; 4]) -> Section {
        let mut coeffs = Vec::with_capacity(self.dim);
        for (i, f) in forms.iter().enumerate() {
            assert_eq!(f.degree(), self.slot_degree(i), "slot {i} has the wrong degree");
            coeffs.extend_from_slice(f.coeffs());
        }
        Section { coeffs }
    }

    pub fn zero(&self) -> Section {
        Section { coeffs: vec![0; self.dim] }
    }

    /// Little-endian base-q index of a coefficient vector.
    pub fn encode(&self, c: &[FqElem]) -> u64 {
        let q = self.fq.q() as u64;
        c.iter().rev().fold(0u64, |acc, &x| acc * q + x as u64)
    }

    pub fn decode(&self, mut idx: u64) -> Section {
        let q = self.fq.q() as u64;
        let coeffs = (0..self.dim)
            .map(|_| {
                let d = (idx % q) as u8;
                idx /= q;
                d
            })
            .collect();
        Section { coeffs }
    }

    pub fn decode_into(&self, mut idx: u64, out: &mut [FqElem]) {
        let q = self.fq.q() as u64;
        for c in out.iter_mut() {
            *c = (idx % q) as u8;
            idx /= q;
        }
    }

    /// Next coefficient vector in encoding order; false after the last one.
    #[inline]
    pub fn increment(&self, c: &mut [FqElem]) -> bool {
        let q = self.fq.q() as u8;
        for x in c.iter_mut() {
            *x += 1;
            if *x < q {
                return true;
            }
            *x = 0;
        }
        false
    }

    pub fn enumerate(&self, cap: u128) -> Result<impl Iterator<Item = Section> + '_, SectionsError> {
        self.check_cap(cap)?;
        Ok((0..self.size() as u64).map(move |i| self.decode(i)))
    }

    pub fn is_zero(&self, c: &[FqElem]) -> bool {
        c.iter().all(|&x| x == 0)
    }

    /// A3 = 0, i.e. divisible by x.
    pub fn a3_zero(&self, c: &[FqElem]) -> bool {
        self.slot(c, 3).iter().all(|&x| x == 0)
    }

    pub fn discriminant(&self, s: &Section) -> BinForm {
        discriminant_of(&self.fq, &self.forms(s))
    }

    /// Values and t-derivatives of the four slots at point i, in the residue
    /// field. At infinity the local coordinate is t1/t0.
    pub fn fiber_jet(&self, c: &[FqElem], ps: &PointSet, i: usize) -> ([u32; 4], [u32; 4]) {
        let info = ps.info(i);
        let e = ps.residue_field(i);
        let mut val = [0u32; 4];
        let mut der = [0u32; 4];
        for slot in 0..4 {
            let a = self.slot(c, slot);
            if a.is_empty() {
                continue;
            }
            if ps.is_infinity(i) {
                let d = a.len() - 1;
                val[slot] = a[d] as u32;
                if d >= 1 {
                    der[slot] = a[d - 1] as u32;
                }
            } else {
                let (v, dv) = horner_with_derivative(e, a, info.theta);
                val[slot] = v;
                der[slot] = dv;
            }
        }
        (val, der)
    }

    /// Coefficients of s restricted to the fiber over point i.
    pub fn restrict_to_fiber(&self, c: &[FqElem], ps: &PointSet, i: usize) -> [u32; 4] {
        let info = ps.info(i);
        let e = ps.residue_field(i);
        let mut val = [0u32; 4];
        for slot in 0..4 {
            let a = self.slot(c, slot);
            if a.is_empty() {
                continue;
            }
            val[slot] = if ps.is_infinity(i) { a[a.len() - 1] as u32 } else { horner(e, a, info.theta) };
        }
        val
    }

    /// Number of relative-degree-1 roots of s over point i.
    pub fn r_p(&self, c: &[FqElem], ps: &PointSet, i: usize) -> u32 {
        cubic_root_count(ps.residue_field(i), self.restrict_to_fiber(c, ps, i))
    }

    pub fn a_p(&self, c: &[FqElem], ps: &PointSet, i: usize) -> i64 {
        self.r_p(c, ps, i) as i64 - 1
    }

    pub fn r_d(&self, c: &[FqElem], ps: &PointSet, d: &Divisor) -> i64 {
        d.points.iter().map(|&i| self.r_p(c, ps, i) as i64).product()
    }

    pub fn a_d(&self, c: &[FqElem], ps: &PointSet, d: &Divisor) -> i64 {
        d.points.iter().map(|&i| self.a_p(c, ps, i)).product()
    }

    /// Whether s vanishes at a relative-degree-1 point over point i.
    pub fn vanishes_at(&self, c: &[FqElem], ps: &PointSet, i: usize, fp: FiberPoint) -> bool {
        let e = ps.residue_field(i);
        let v = self.restrict_to_fiber(c, ps, i);
        eval_cubic(e, v, fp) == 0
    }
}

#[inline]
pub fn horner(e: &ExtField, a: &[FqElem], x: u32) -> u32 {
    a.iter().rev().fold(0u32, |acc, &c| e.add(e.mul(acc, x), c as u32))
}

#[inline]
pub fn horner_with_derivative(e: &ExtField, a: &[FqElem], x: u32) -> (u32, u32) {
    let mut v = 0u32;
    let mut dv = 0u32;
    for &c in a.iter().rev() {
        dv = e.add(e.mul(dv, x), v);
        v = e.add(e.mul(v, x), c as u32);
    }
    (v, dv)
}

/// Value of the cubic c0 x^3 + c1 x^2 y + c2 x y^2 + c3 y^3 at a fiber point.
pub fn eval_cubic(e: &ExtField, c: [u32; 4], fp: FiberPoint) -> u32 {
    match fp {
        FiberPoint::Infinity => c[0],
        FiberPoint::Affine(a) => {
            let mut acc = 0;
            for &ci in &c {
                acc = e.add(e.mul(acc, a), ci);
            }
            acc
        }
    }
}

pub fn discriminant_of(f: &Fq, a: &[BinForm; 4]) -> BinForm {
    let [a0, a1, a2, a3] = a;
    let t1 = a0.mul(f, a0).mul(f, a3).mul(f, a3).scale(f, f.from_int(-27));
    let t2 = a0.mul(f, a1).mul(f, a2).mul(f, a3).scale(f, f.from_int(18));
    let t3 = a0.mul(f, a2).mul(f, a2).mul(f, a2).scale(f, f.from_int(-4));
    let t4 = a1.mul(f, a1).mul(f, a1).mul(f, a3).scale(f, f.from_int(-4));
    let t5 = a1.mul(f, a1).mul(f, a2).mul(f, a2);
    t1.add(f, &t2).add(f, &t3).add(f, &t4).add(f, &t5)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Section {
    pub coeffs: Vec<FqElem>,
}

/// Par(N): pairs with 2l - 3k = N and l >= 3k >= 0.
pub fn par_set(n: i64) -> Vec<(i64, i64)> {
    if n < 0 {
        return vec![];
    }
    (0..=n / 3).filter(|k| (n + 3 * k) % 2 == 0).map(|k| ((n + 3 * k) / 2, k)).collect()
}

/// |Gamma_k|.
pub fn gamma_order(q: u32, k: i64) -> BigUint {
    let q = BigUint::from(q);
    let one = BigUint::from(1u32);
    if k == 0 {
        (&q * &q - &q) * (&q * &q - &one)
    } else {
        let qm1 = &q - &one;
        &qm1 * &qm1 * q.pow(k as u32 + 1)
    }
}

/// An automorphism of O + O(-k). With M = [[a, b], [c, d]] the substitution
/// is x -> a x + c y, y -> b x + d y; for k >= 1, M = [[g1, n], [0, g2]]
/// with n a form of degree k.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GammaElem {
    Gl2 { a: FqElem, b: FqElem, c: FqElem, d: FqElem },
    Tri { k: i64, g1: FqElem, g2: FqElem, n: BinForm },
}

impl GammaElem {
    pub fn identity(k: i64) -> Self {
        if k == 0 {
            GammaElem::Gl2 { a: 1, b: 0, c: 0, d: 1 }
        } else {
            GammaElem::Tri { k, g1: 1, g2: 1, n: BinForm::zero(k) }
        }
    }

    pub fn swap() -> Self {
        GammaElem::Gl2 { a: 0, b: 1, c: 1, d: 0 }
    }

    pub fn k(&self) -> i64 {
        match self {
            GammaElem::Gl2 { .. } => 0,
            GammaElem::Tri { k, .. } => *k,
        }
    }

    pub fn det(&self, f: &Fq) -> FqElem {
        match self {
            GammaElem::Gl2 { a, b, c, d } => f.sub(f.mul(*a, *d), f.mul(*b, *c)),
            GammaElem::Tri { g1, g2, .. } => f.mul(*g1, *g2),
        }
    }

    /// Matrix product self * other; acting by self*other means acting by
    /// other first, then self.
    pub fn compose(&self, f: &Fq, other: &GammaElem) -> GammaElem {
        match (self, other) {
            (GammaElem::Gl2 { a, b, c, d }, GammaElem::Gl2 { a: a2, b: b2, c: c2, d: d2 }) => GammaElem::Gl2 {
                a: f.add(f.mul(*a, *a2), f.mul(*b, *c2)),
                b: f.add(f.mul(*a, *b2), f.mul(*b, *d2)),
                c: f.add(f.mul(*c, *a2), f.mul(*d, *c2)),
                d: f.add(f.mul(*c, *b2), f.mul(*d, *d2)),
            },
            (GammaElem::Tri { k, g1, g2, n }, GammaElem::Tri { k: k2, g1: h1, g2: h2, n: m }) => {
                assert_eq!(k, k2);
                GammaElem::Tri {
                    k: *k,
                    g1: f.mul(*g1, *h1),
                    g2: f.mul(*g2, *h2),
                    n: m.scale(f, *g1).add(f, &n.scale(f, *h2)),
                }
            }
            _ => panic!("composing elements of different groups"),
        }
    }

    pub fn inverse(&self, f: &Fq) -> GammaElem {
        match self {
            GammaElem::Gl2 { a, b, c, d } => {
                let di = f.inv(self.det(f)).expect("invertible");
                GammaElem::Gl2 { a: f.mul(*d, di), b: f.mul(f.neg(*b), di), c: f.mul(f.neg(*c), di), d: f.mul(*a, di) }
            }
            GammaElem::Tri { k, g1, g2, n } => {
                let i1 = f.inv(*g1).unwrap();
                let i2 = f.inv(*g2).unwrap();
                GammaElem::Tri { k: *k, g1: i1, g2: i2, n: n.scale(f, f.neg(f.mul(i1, i2))) }
            }
        }
    }

    /// Coefficient forms of the images of x and y: ([x-coef, y-coef] of phi(x),
    /// [x-coef, y-coef] of phi(y)).
    fn images(&self) -> ([BinForm; 2], [BinForm; 2]) {
        match self {
            GammaElem::Gl2 { a, b, c, d } => (
                [BinForm::constant(*a), BinForm::constant(*c)],
                [BinForm::constant(*b), BinForm::constant(*d)],
            ),
            GammaElem::Tri { k, g1, g2, n } => {
                ([BinForm::constant(*g1), BinForm::zero(-k)], [n.clone(), BinForm::constant(*g2)])
            }
        }
    }

    /// Image of a fiber point under the inverse substitution, i.e. the point
    /// where gamma . s vanishes when s vanishes at `fp`. Works over the
    /// residue field of point i.
    pub fn move_fiber_point(&self, f: &Fq, ps: &PointSet, i: usize, fp: FiberPoint) -> FiberPoint {
        let e = ps.residue_field(i);
        let inv = self.inverse(f);
        // v0 M^{-1} for v0 the fiber point as a row vector
        let (x0, y0) = match fp {
            FiberPoint::Affine(a) => (a, 1),
            FiberPoint::Infinity => (1, 0),
        };
        let (px, py) = inv.images();
        let ev = |g: &BinForm| -> u32 {
            if g.degree() < 0 {
                0
            } else if ps.is_infinity(i) {
                *g.coeffs().last().unwrap() as u32
            } else {
                horner(e, g.coeffs(), ps.info(i).theta)
            }
        };
        // row vector (x0, y0) times [[px0, py0], [px1, py1]]
        let nx = e.add(e.mul(x0, ev(&px[0])), e.mul(y0, ev(&px[1])));
        let ny = e.add(e.mul(x0, ev(&py[0])), e.mul(y0, ev(&py[1])));
        if ny == 0 {
            FiberPoint::Infinity
        } else {
            FiberPoint::Affine(e.div(nx, ny).unwrap())
        }
    }
}

/// Every element of Gamma_k.
pub fn enumerate_gamma(f: &Fq, k: i64) -> Vec<GammaElem> {
    let mut out = vec![];
    if k == 0 {
        for a in f.elements() {
            for b in f.elements() {
                for c in f.elements() {
                    for d in f.elements() {
                        let g = GammaElem::Gl2 { a, b, c, d };
                        if g.det(f) != 0 {
                            out.push(g);
                        }
                    }
                }
            }
        }
    } else {
        let nlen = (k + 1) as usize;
        let count = (f.q() as u64).pow(nlen as u32);
        for g1 in 1..f.q() as u8 {
            for g2 in 1..f.q() as u8 {
                for idx in 0..count {
                    let mut nc = vec![0u8; nlen];
                    let mut x = idx;
                    for c in nc.iter_mut() {
                        *c = (x % f.q() as u64) as u8;
                        x /= f.q() as u64;
                    }
                    out.push(GammaElem::Tri { k, g1, g2, n: BinForm::new(k, nc) });
                }
            }
        }
    }
    out
}

/// gamma . s = det(gamma)^{-1} s(phi(x), phi(y)).
pub fn gamma_act(space: &SectionSpace, g: &GammaElem, s: &Section) -> Result<Section, SectionsError> {
    if g.k() != space.k() {
        return Err(SectionsError::WrongGroup { got: g.k(), want: space.k() });
    }
    let f = space.field();
    let (px, py) = g.images();
    let forms = space.forms(s);
    let mut out: [BinForm; 4] = [0, 1, 2, 3].map(|j| BinForm::zero(space.slot_degree(j)));
    for (i, ai) in forms.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        // expand phi(x)^(3-i) phi(y)^i; entry j multiplies x^(3-j) y^j
        let mut prod: Vec<BinForm> = vec![BinForm::constant(1)];
        let factors = std::iter::repeat(&px).take(3 - i).chain(std::iter::repeat(&py).take(i));
        for lin in factors {
            let m = prod.len();
            let mut next: Vec<BinForm> = Vec::with_capacity(m + 1);
            for j in 0..=m {
                let from_x = (j < m).then(|| prod[j].mul(f, &lin[0]));
                let from_y = (j > 0).then(|| prod[j - 1].mul(f, &lin[1]));
                next.push(match (from_x, from_y) {
                    (Some(a), Some(b)) => a.add(f, &b),
                    (Some(a), None) => a,
                    (None, Some(b)) => b,
                    (None, None) => unreachable!(),
                });
            }
            prod = next;
        }
        for (j, pj) in prod.iter().enumerate() {
            if space.slot_degree(j) < 0 {
                continue;
            }
            out[j] = out[j].add(f, &ai.mul(f, pj));
        }
    }
    let di = f.inv(g.det(f)).expect("invertible");
    let out = out.map(|a| a.scale(f, di));
    Ok(space.from_forms(&out))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Orbit {
    pub rep: u64,
    pub size: u64,
    pub stabilizer: u64,
}

/// Orbits of the group on a subset given by sorted encoded indices.
pub fn orbit_stabilizer(
    space: &SectionSpace,
    group: &[GammaElem],
    members: &[u64],
) -> Result<Vec<Orbit>, SectionsError> {
    let pos: HashMap<u64, usize> = members.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let mut seen = vec![false; members.len()];
    let mut out = vec![];
    for (i, &m) in members.iter().enumerate() {
        if seen[i] {
            continue;
        }
        let s = space.decode(m);
        let mut stab = 0u64;
        let mut orbit = vec![];
        for g in group {
            let img = space.encode(&gamma_act(space, g, &s)?.coeffs);
            if img == m {
                stab += 1;
            }
            match pos.get(&img) {
                Some(&j) => {
                    if !seen[j] {
                        seen[j] = true;
                        orbit.push(img);
                    }
                }
                None => return Err(SectionsError::NotInvariant { from: m, to: img }),
            }
        }
        seen[i] = true;
        out.push(Orbit { rep: m, size: orbit.len().max(1) as u64, stabilizer: stab });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn par_examples() {
        assert_eq!(par_set(0), vec![(0, 0)]);
        assert_eq!(par_set(6), vec![(3, 0), (6, 2)]);
        assert_eq!(par_set(4), vec![(2, 0)]);
        assert!(par_set(1).is_empty());
        assert!(par_set(-1).is_empty());
    }

    #[test]
    fn sizes() {
        let f2 = Fq::new(2).unwrap();
        assert_eq!(SectionSpace::new(&f2, 0, 0).size(), 16);
        assert_eq!(SectionSpace::new(&f2, 1, 0).size(), 256);
        assert_eq!(SectionSpace::new(&f2, 3, 1).size(), 1024);
        assert!(SectionSpace::new(&f2, 4, 0).check_cap(1 << 10).is_err());
    }

    #[test]
    fn gamma_orders() {
        for q in [2u32, 3, 4] {
            let f = Fq::new(q).unwrap();
            for k in 0..3 {
                assert_eq!(BigUint::from(enumerate_gamma(&f, k).len()), gamma_order(q, k));
            }
        }
    }
}
