use super::ext::ExtField;
use super::field::{Fq, FqElem};
use super::poly::{self, Poly};
use super::AlgebraError;
use crate::curvepts::ClosedPoint;

/// Homogeneous form in (t0, t1). `coeffs[i]` multiplies t0^i t1^(deg-i).
/// A negative degree stands for the zero slot of that degree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinForm {
    deg: i64,
    coeffs: Vec<FqElem>,
}

impl BinForm {
    pub fn new(deg: i64, coeffs: Vec<FqElem>) -> Self {
        assert_eq!(coeffs.len() as i64, (deg + 1).max(0), "coefficient count must be deg + 1");
        BinForm { deg, coeffs }
    }

    pub fn zero(deg: i64) -> Self {
        BinForm { deg, coeffs: vec![0; (deg + 1).max(0) as usize] }
    }

    pub fn constant(c: FqElem) -> Self {
        BinForm { deg: 0, coeffs: vec![c] }
    }

    pub fn degree(&self) -> i64 {
        self.deg
    }
    pub fn coeffs(&self) -> &[FqElem] {
        &self.coeffs
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn eval(&self, f: &Fq, a: FqElem, b: FqElem) -> FqElem {
        let mut acc = 0;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let term = f.mul(c, f.mul(f.pow(a, i as u64), f.pow(b, (self.deg as usize - i) as u64)));
            acc = f.add(acc, term);
        }
        acc
    }

    pub fn eval_ext(&self, e: &ExtField, a: u32, b: u32) -> u32 {
        let mut acc = 0;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let term = e.mul(c as u32, e.mul(e.pow(a, i as u64), e.pow(b, (self.deg as usize - i) as u64)));
            acc = e.add(acc, term);
        }
        acc
    }

    pub fn add(&self, f: &Fq, other: &BinForm) -> BinForm {
        assert_eq!(self.deg, other.deg, "forms of different degree");
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| f.add(a, b)).collect();
        BinForm { deg: self.deg, coeffs }
    }

    pub fn sub(&self, f: &Fq, other: &BinForm) -> BinForm {
        assert_eq!(self.deg, other.deg, "forms of different degree");
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| f.sub(a, b)).collect();
        BinForm { deg: self.deg, coeffs }
    }

    pub fn scale(&self, f: &Fq, c: FqElem) -> BinForm {
        BinForm { deg: self.deg, coeffs: self.coeffs.iter().map(|&a| f.mul(a, c)).collect() }
    }

    pub fn mul(&self, f: &Fq, other: &BinForm) -> BinForm {
        let deg = self.deg + other.deg;
        let mut out = BinForm::zero(deg);
        if self.deg < 0 || other.deg < 0 {
            return out;
        }
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out.coeffs[i + j] = f.add(out.coeffs[i + j], f.mul(a, b));
            }
        }
        out
    }

    pub fn pow(&self, f: &Fq, n: u32) -> BinForm {
        let mut acc = BinForm::constant(1);
        for _ in 0..n {
            acc = acc.mul(f, self);
        }
        acc
    }

    /// Exact division; None when `other` does not divide `self`.
    pub fn div_exact(&self, f: &Fq, other: &BinForm) -> Option<BinForm> {
        let deg = self.deg - other.deg;
        if self.is_zero() {
            return Some(BinForm::zero(deg));
        }
        if deg < 0 || other.is_zero() {
            return None;
        }
        // Work in the t1-dehomogenization, tracking the t1 power separately.
        let (qt, r) = poly::divrem(f, &self.dehomogenize(), &other.dehomogenize());
        if !r.is_empty() {
            return None;
        }
        let mut coeffs = qt;
        if coeffs.len() as i64 > deg + 1 {
            return None;
        }
        coeffs.resize((deg + 1) as usize, 0);
        let out = BinForm { deg, coeffs };
        (out.mul(f, other) == *self).then_some(out)
    }

    /// Polynomial in t = t0/t1.
    pub fn dehomogenize(&self) -> Poly {
        poly::trim(self.coeffs.clone())
    }

    /// The binary form of a closed point (t1 for infinity).
    pub fn of_point(pt: &ClosedPoint) -> BinForm {
        match pt {
            ClosedPoint::Infinity => BinForm { deg: 1, coeffs: vec![1, 0] },
            ClosedPoint::Finite(p) => BinForm { deg: p.len() as i64 - 1, coeffs: p.clone() },
        }
    }

    pub fn factor(&self, f: &Fq) -> Result<Factorization, AlgebraError> {
        Factorer::new(f, self.deg.max(0) as usize).factor(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub unit: FqElem,
    pub factors: Vec<(ClosedPoint, u32)>,
}

impl Factorization {
    pub fn expand(&self, f: &Fq) -> BinForm {
        let mut acc = BinForm::constant(self.unit);
        for (pt, m) in &self.factors {
            acc = acc.mul(f, &BinForm::of_point(pt).pow(f, *m));
        }
        acc
    }
}

/// Trial division by cached monic irreducibles.
#[derive(Debug, Clone)]
pub struct Factorer {
    f: Fq,
    irreducibles: Vec<Vec<Poly>>,
}

impl Factorer {
    /// Can factor forms of degree up to `max_deg`.
    pub fn new(f: &Fq, max_deg: usize) -> Self {
        let irreducibles = (0..=max_deg / 2)
            .map(|m| if m == 0 { vec![] } else { poly::monic_irreducibles(f, m) })
            .collect();
        Factorer { f: f.clone(), irreducibles }
    }

    pub fn from_lists(f: &Fq, irreducibles: Vec<Vec<Poly>>) -> Self {
        Factorer { f: f.clone(), irreducibles }
    }

    pub fn factor(&self, form: &BinForm) -> Result<Factorization, AlgebraError> {
        let f = &self.f;
        if form.is_zero() {
            return Err(AlgebraError::ZeroForm);
        }
        let mut p = form.dehomogenize();
        let dp = p.len() as i64 - 1;
        let inf = (form.deg - dp) as u32;
        let unit = *p.last().unwrap();
        p = poly::monic(f, &p);
        let mut factors: Vec<(ClosedPoint, u32)> = vec![];
        let mut m = 1;
        while 2 * m < p.len() {
            assert!(m < self.irreducibles.len(), "factorer built for smaller degrees");
            for pi in &self.irreducibles[m] {
                let mut mult = 0;
                loop {
                    let (qt, r) = poly::divrem(f, &p, pi);
                    if !r.is_empty() {
                        break;
                    }
                    p = qt;
                    mult += 1;
                }
                if mult > 0 {
                    factors.push((ClosedPoint::Finite(pi.clone()), mult));
                }
                if 2 * m >= p.len() {
                    break;
                }
            }
            m += 1;
        }
        if p.len() > 1 {
            match factors.iter_mut().find(|(pt, _)| *pt == ClosedPoint::Finite(p.clone())) {
                Some(entry) => entry.1 += 1,
                None => factors.push((ClosedPoint::Finite(p), 1)),
            }
        }
        if inf > 0 {
            factors.push((ClosedPoint::Infinity, inf));
        }
        factors.sort();
        Ok(Factorization { unit, factors })
    }
}

/// Roots in P^1 of a binary cubic c0 x^3 + c1 x^2 y + c2 x y^2 + c3 y^3
/// over F_{q^m}, as normalized pairs: (a, 1) or (1, 0).
pub fn cubic_roots_in_p1(e: &ExtField, c: [u32; 4]) -> Vec<(u32, u32)> {
    if c.iter().all(|&x| x == 0) {
        let mut all: Vec<(u32, u32)> = e.elements().map(|a| (a, 1)).collect();
        all.push((1, 0));
        return all;
    }
    let mut out: Vec<(u32, u32)> = affine_roots(e, &[c[3], c[2], c[1], c[0]]).into_iter().map(|a| (a, 1)).collect();
    if c[0] == 0 {
        out.push((1, 0));
    }
    out
}

/// Number of distinct roots in P^1(F_{q^m}); q^m + 1 for the zero cubic.
pub fn cubic_root_count(e: &ExtField, c: [u32; 4]) -> u32 {
    if c.iter().all(|&x| x == 0) {
        return e.size() + 1;
    }
    let inf = (c[0] == 0) as u32;
    inf + affine_root_count(e, [c[3], c[2], c[1], c[0]])
}

// --- small polynomials over an extension field, low degree first ---

fn etrim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn erem(e: &ExtField, a: &[u32], b: &[u32]) -> Vec<u32> {
    let db = b.len() - 1;
    let inv = e.inv(b[db]).unwrap();
    let mut r = etrim(a.to_vec());
    while r.len() > db {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - db;
        let c = e.mul(lead, inv);
        for i in 0..=db {
            r[shift + i] = e.sub(r[shift + i], e.mul(c, b[i]));
        }
        r = etrim(r);
    }
    r
}

fn emulmod(e: &ExtField, a: &[u32], b: &[u32], m: &[u32]) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u32; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = e.add(out[i + j], e.mul(x, y));
        }
    }
    erem(e, &out, m)
}

fn epowmod(e: &ExtField, base: &[u32], mut n: u64, m: &[u32]) -> Vec<u32> {
    let mut acc = erem(e, &[1], m);
    let mut b = erem(e, base, m);
    while n > 0 {
        if n & 1 == 1 {
            acc = emulmod(e, &acc, &b, m);
        }
        b = emulmod(e, &b, &b, m);
        n >>= 1;
    }
    acc
}

fn egcd(e: &ExtField, a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut x = etrim(a.to_vec());
    let mut y = etrim(b.to_vec());
    while !y.is_empty() {
        let r = erem(e, &x, &y);
        x = y;
        y = r;
    }
    if let Some(&l) = x.last() {
        let inv = e.inv(l).unwrap();
        x.iter_mut().for_each(|c| *c = e.mul(*c, inv));
    }
    x
}

fn esub(e: &ExtField, a: &[u32], b: &[u32]) -> Vec<u32> {
    let n = a.len().max(b.len());
    etrim((0..n).map(|i| e.sub(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0))).collect())
}

/// u^Q mod m by repeated q-th powers.
fn u_to_the_size(e: &ExtField, m: &[u32]) -> Vec<u32> {
    let mut x = erem(e, &[0, 1], m);
    for _ in 0..e.degree() {
        x = epowmod(e, &x, e.base_order() as u64, m);
    }
    x
}

/// gcd(f, u^Q - u), the product of the distinct linear factors of f.
fn split_part(e: &ExtField, f: &[u32]) -> Vec<u32> {
    let f = etrim(f.to_vec());
    if f.len() <= 1 {
        return vec![1];
    }
    if f.len() == 2 {
        return egcd(e, &f, &f);
    }
    let h = esub(e, &u_to_the_size(e, &f), &[0, 1]);
    egcd(e, &f, &h)
}

fn affine_root_count(e: &ExtField, f: [u32; 4]) -> u32 {
    let g = split_part(e, &f);
    (g.len() - 1) as u32
}

fn affine_roots(e: &ExtField, f: &[u32]) -> Vec<u32> {
    let g = split_part(e, f);
    let mut roots = vec![];
    split_into_roots(e, &g, &mut roots);
    roots.sort_unstable();
    roots
}

/// Equal-degree splitting of a squarefree product of distinct linear factors.
fn split_into_roots(e: &ExtField, g: &[u32], out: &mut Vec<u32>) {
    match g.len() {
        0 | 1 => {}
        2 => out.push(e.neg(e.div(g[0], g[1]).unwrap())),
        _ => {
            let size = e.size() as u64;
            for a in 1..e.size() {
                let h = if e.characteristic() == 2 {
                    // trace of a*u down to F_2
                    let bits = size.trailing_zeros();
                    let au = erem(e, &[0, a], g);
                    let mut acc = au.clone();
                    let mut cur = au;
                    for _ in 1..bits {
                        cur = emulmod(e, &cur, &cur, g);
                        acc = etrim((0..acc.len().max(cur.len()))
                            .map(|i| e.add(*acc.get(i).unwrap_or(&0), *cur.get(i).unwrap_or(&0)))
                            .collect());
                    }
                    acc
                } else {
                    let w = epowmod(e, &[a, 1], (size - 1) / 2, g);
                    esub(e, &w, &[1])
                };
                let d = egcd(e, g, &h);
                if d.len() > 1 && d.len() < g.len() {
                    let other = ediv_exact(e, g, &d);
                    split_into_roots(e, &d, out);
                    split_into_roots(e, &other, out);
                    return;
                }
            }
            unreachable!("no splitting element found");
        }
    }
}

fn ediv_exact(e: &ExtField, a: &[u32], b: &[u32]) -> Vec<u32> {
    let db = b.len() - 1;
    let inv = e.inv(b[db]).unwrap();
    let mut r = a.to_vec();
    let mut qt = vec![0u32; a.len() - db];
    while r.len() > db {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - db;
        let c = e.mul(lead, inv);
        qt[shift] = c;
        for i in 0..=db {
            r[shift + i] = e.sub(r[shift + i], e.mul(c, b[i]));
        }
        r = etrim(r);
        if r.len() <= db {
            break;
        }
    }
    etrim(qt)
}

/// Affine points u where f = c0 u^3 + c1 u^2 + c2 u + c3 has a root of
/// multiplicity at least 2, with c given as [c0, c1, c2, c3]. Multiple roots
/// of a cubic over a finite field are always rational.
pub fn multiple_affine_roots(e: &ExtField, c: [u32; 4]) -> Vec<u32> {
    let f = etrim(vec![c[3], c[2], c[1], c[0]]);
    if f.len() <= 2 {
        return vec![];
    }
    let df = etrim(
        f.iter()
            .enumerate()
            .skip(1)
            .map(|(i, &x)| e.mul(x, e.from_int(i as i64)))
            .collect(),
    );
    if df.is_empty() {
        // f is a polynomial in u^p
        let p = e.characteristic() as usize;
        if f.len() != p + 1 {
            return vec![];
        }
        let r = e.pth_root(e.neg(e.div(f[0], f[p]).unwrap()));
        return vec![r];
    }
    let h = egcd(e, &f, &df);
    match h.len() {
        2 => vec![e.neg(h[0])],
        3 => {
            if e.characteristic() == 2 {
                vec![e.pth_root(h[0])]
            } else {
                vec![e.neg(e.div(h[1], e.from_int(2)).unwrap())]
            }
        }
        _ => vec![],
    }
}
