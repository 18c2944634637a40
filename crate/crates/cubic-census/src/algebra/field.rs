use std::fmt;

use super::AlgebraError;

/// Description of F_q = F_p[z]/(modulus).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldSpec {
    pub p: u32,
    pub e: u32,
    /// Monic, low degree first, length e + 1.
    pub modulus: Vec<u32>,
}

impl FieldSpec {
    pub fn q(&self) -> u32 {
        self.p.pow(self.e)
    }

    /// Picks the first irreducible modulus in digit order.
    pub fn for_order(q: u32) -> Result<Self, AlgebraError> {
        let (p, e) = prime_power(q).ok_or(AlgebraError::UnsupportedOrder(q))?;
        if q > 9 {
            return Err(AlgebraError::UnsupportedOrder(q));
        }
        if e == 1 {
            return Ok(FieldSpec { p, e, modulus: vec![0, 1] });
        }
        for idx in 0..p.pow(e) {
            let mut m: Vec<u32> = (0..e).map(|i| (idx / p.pow(i)) % p).collect();
            m.push(1);
            let spec = FieldSpec { p, e, modulus: m };
            if spec.modulus_is_irreducible() {
                return Ok(spec);
            }
        }
        unreachable!("an irreducible polynomial of every degree exists")
    }

    /// Root absence is enough for e <= 3; for larger e we also rule out
    /// quadratic factors by trial division.
    pub fn modulus_is_irreducible(&self) -> bool {
        let p = self.p;
        let m = &self.modulus;
        if m.len() != self.e as usize + 1 || *m.last().unwrap() != 1 {
            return false;
        }
        if self.e == 1 {
            return true;
        }
        let has_root = (0..p).any(|a| {
            let mut acc = 0u32;
            for &c in m.iter().rev() {
                acc = (acc * a + c) % p;
            }
            acc == 0
        });
        if has_root {
            return false;
        }
        if self.e <= 3 {
            return true;
        }
        for c0 in 0..p {
            for c1 in 0..p {
                if prime_poly_rem(m, &[c0, c1, 1], p).iter().all(|&x| x == 0) {
                    return false;
                }
            }
        }
        true
    }
}

fn prime_poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let inv_lead = mod_inv(b[db], p);
    while r.len() > db {
        let lead = *r.last().unwrap();
        if lead != 0 {
            let f = lead * inv_lead % p;
            let shift = r.len() - 1 - db;
            for (i, &bc) in b.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p * p - f * bc % p) % p;
            }
        }
        r.pop();
    }
    r
}

fn mod_inv(a: u32, p: u32) -> u32 {
    (1..p).find(|&x| a * x % p == 1).expect("nonzero residue")
}

/// Returns (p, e) when q = p^e with p prime.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q % d == 0)?;
    let mut r = q;
    let mut e = 0;
    while r % p == 0 {
        r /= p;
        e += 1;
    }
    (r == 1).then_some((p, e))
}

/// Element of F_q: index whose base-p digits are the coordinates in the power
/// basis of the modulus.
pub type FqElem = u8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Mul,
    Inv,
    Pow(u64),
}

/// F_q with full operation tables.
#[derive(Clone)]
pub struct Fq {
    spec: FieldSpec,
    q: usize,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
}

impl fmt::Debug for Fq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.q)
    }
}

impl PartialEq for Fq {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Fq {
    pub fn new(q: u32) -> Result<Self, AlgebraError> {
        Self::from_spec(FieldSpec::for_order(q)?)
    }

    pub fn from_spec(spec: FieldSpec) -> Result<Self, AlgebraError> {
        let q = spec.q();
        if prime_power(spec.p) != Some((spec.p, 1)) || q > 9 {
            return Err(AlgebraError::UnsupportedOrder(q));
        }
        if !spec.modulus_is_irreducible() {
            return Err(AlgebraError::ReducibleModulus);
        }
        let p = spec.p;
        let e = spec.e as usize;
        let q = q as usize;
        let digits = |a: usize| -> Vec<u32> { (0..e).map(|i| (a as u32 / p.pow(i as u32)) % p).collect() };
        let undigits = |d: &[u32]| -> u8 { d.iter().rev().fold(0u32, |acc, &x| acc * p + x) as u8 };
        let mut add = vec![0u8; q * q];
        let mut mul = vec![0u8; q * q];
        for a in 0..q {
            let da = digits(a);
            for b in 0..q {
                let db = digits(b);
                let s: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[a * q + b] = undigits(&s);
                let mut prod = vec![0u32; 2 * e - 1];
                for i in 0..e {
                    for j in 0..e {
                        prod[i + j] = (prod[i + j] + da[i] * db[j]) % p;
                    }
                }
                let r = if e == 1 { prod } else { prime_poly_rem(&prod, &spec.modulus, p) };
                let mut r = r;
                r.resize(e, 0);
                mul[a * q + b] = undigits(&r);
            }
        }
        let neg = (0..q).map(|a| (0..q).find(|&b| add[a * q + b] == 0).unwrap() as u8).collect();
        let inv = (0..q)
            .map(|a| if a == 0 { 0 } else { (1..q).find(|&b| mul[a * q + b] == 1).unwrap() as u8 })
            .collect();
        Ok(Fq { spec, q, add, mul, neg, inv })
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }
    pub fn q(&self) -> u32 {
        self.q as u32
    }
    pub fn p(&self) -> u32 {
        self.spec.p
    }
    pub fn elements(&self) -> impl Iterator<Item = FqElem> {
        0..self.q as u8
    }

    #[inline]
    pub fn add(&self, a: FqElem, b: FqElem) -> FqElem {
        self.add[a as usize * self.q + b as usize]
    }
    #[inline]
    pub fn sub(&self, a: FqElem, b: FqElem) -> FqElem {
        self.add(a, self.neg[b as usize])
    }
    #[inline]
    pub fn neg(&self, a: FqElem) -> FqElem {
        self.neg[a as usize]
    }
    #[inline]
    pub fn mul(&self, a: FqElem, b: FqElem) -> FqElem {
        self.mul[a as usize * self.q + b as usize]
    }
    pub fn inv(&self, a: FqElem) -> Result<FqElem, AlgebraError> {
        if a == 0 {
            Err(AlgebraError::ZeroInverse)
        } else {
            Ok(self.inv[a as usize])
        }
    }
    pub fn div(&self, a: FqElem, b: FqElem) -> Result<FqElem, AlgebraError> {
        Ok(self.mul(a, self.inv(b)?))
    }
    pub fn pow(&self, a: FqElem, mut n: u64) -> FqElem {
        let mut base = a;
        let mut acc = 1;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            n >>= 1;
        }
        acc
    }
    pub fn frobenius(&self, a: FqElem) -> FqElem {
        self.pow(a, self.p() as u64)
    }

    /// Image of an integer in the prime field.
    pub fn from_int(&self, n: i64) -> FqElem {
        n.rem_euclid(self.p() as i64) as u8
    }

    pub fn digits(&self, a: FqElem) -> Vec<u32> {
        let p = self.p();
        (0..self.spec.e).map(|i| (a as u32 / p.pow(i)) % p).collect()
    }

    pub fn arith(&self, op: FieldOp, a: FqElem, b: FqElem) -> Result<FqElem, AlgebraError> {
        match op {
            FieldOp::Add => Ok(self.add(a, b)),
            FieldOp::Mul => Ok(self.mul(a, b)),
            FieldOp::Inv => self.inv(a),
            FieldOp::Pow(n) => Ok(self.pow(a, n)),
        }
    }

    pub(crate) fn add_table(&self) -> &[u8] {
        &self.add
    }
    pub(crate) fn neg_table(&self) -> &[u8] {
        &self.neg
    }
}
