use super::field::{Fq, FqElem};
use super::AlgebraError;

/// Largest extension we are willing to tabulate.
pub const MAX_EXT_SIZE: u64 = 1 << 22;

/// F_{q^d} = F_q[z]/(m) with m primitive, elements encoded as base-q digit
/// strings (digit i is the coefficient of z^i). Elements below q are the
/// embedded copy of F_q.
#[derive(Clone)]
pub struct ExtField {
    q: u32,
    p: u32,
    d: u32,
    size: u32,
    modulus: Vec<u8>,
    exp: Vec<u32>,
    log: Vec<u32>,
    base_add: Vec<u8>,
    base_neg: Vec<u8>,
    place: Vec<u32>,
}

impl std::fmt::Debug for ExtField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "F_{}^{}", self.q, self.d)
    }
}

impl ExtField {
    pub fn new(fq: &Fq, d: u32) -> Result<Self, AlgebraError> {
        let q = fq.q();
        let size64 = (q as u64).pow(d);
        if d == 0 || size64 > MAX_EXT_SIZE {
            return Err(AlgebraError::ExtensionTooLarge { q, d });
        }
        let size = size64 as u32;
        let place: Vec<u32> = (0..d).map(|i| q.pow(i)).collect();
        let mut proto = ExtField {
            q,
            p: fq.p(),
            d,
            size,
            modulus: vec![],
            exp: vec![],
            log: vec![],
            base_add: fq.add_table().to_vec(),
            base_neg: fq.neg_table().to_vec(),
            place,
        };
        let qd = q.pow(d);
        for idx in 0..qd {
            let mut m: Vec<u8> = (0..d).map(|i| ((idx / q.pow(i)) % q) as u8).collect();
            if m[0] == 0 {
                continue;
            }
            m.push(1);
            if let Some(exp) = proto.power_cycle(fq, &m) {
                let mut log = vec![0u32; size as usize];
                for (i, &x) in exp.iter().enumerate().take(size as usize - 1) {
                    log[x as usize] = i as u32;
                }
                proto.modulus = m;
                proto.exp = exp;
                proto.log = log;
                return Ok(proto);
            }
        }
        unreachable!("primitive polynomials exist in every degree")
    }

    /// Powers of z modulo m; returns the doubled table when z has full order.
    fn power_cycle(&self, fq: &Fq, m: &[u8]) -> Option<Vec<u32>> {
        let n = self.size as usize - 1;
        let d = self.d as usize;
        let mut exp = Vec::with_capacity(2 * n);
        let mut cur = vec![0u8; d];
        cur[0] = 1;
        for i in 0..n {
            let enc = self.encode(&cur);
            if i > 0 && enc == 1 {
                return None;
            }
            exp.push(enc);
            // multiply by z
            let top = cur[d - 1];
            for j in (1..d).rev() {
                cur[j] = cur[j - 1];
            }
            cur[0] = 0;
            if top != 0 {
                for j in 0..d {
                    cur[j] = fq.sub(cur[j], fq.mul(top, m[j]));
                }
            }
        }
        if self.encode(&cur) != 1 {
            return None;
        }
        let first = exp.clone();
        exp.extend(first);
        Some(exp)
    }

    fn encode(&self, digits: &[u8]) -> u32 {
        digits.iter().rev().fold(0u32, |acc, &x| acc * self.q + x as u32)
    }

    pub fn decode(&self, a: u32) -> Vec<u8> {
        (0..self.d).map(|i| ((a / self.place[i as usize]) % self.q) as u8).collect()
    }

    pub fn size(&self) -> u32 {
        self.size
    }
    pub fn degree(&self) -> u32 {
        self.d
    }
    pub fn base_order(&self) -> u32 {
        self.q
    }
    pub fn characteristic(&self) -> u32 {
        self.p
    }
    pub fn modulus(&self) -> &[u8] {
        &self.modulus
    }

    #[inline]
    pub fn from_base(&self, c: FqElem) -> u32 {
        c as u32
    }

    pub fn to_base(&self, a: u32) -> Option<FqElem> {
        (a < self.q).then_some(a as u8)
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.p == 2 {
            return a ^ b;
        }
        if a == 0 {
            return b;
        }
        if b == 0 {
            return a;
        }
        let q = self.q;
        let (mut x, mut y, mut out, mut pl) = (a, b, 0u32, 1u32);
        while x > 0 || y > 0 {
            let s = self.base_add[((x % q) * q + y % q) as usize] as u32;
            out += s * pl;
            pl *= q;
            x /= q;
            y /= q;
        }
        out
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if self.p == 2 || a == 0 {
            return a;
        }
        let q = self.q;
        let (mut x, mut out, mut pl) = (a, 0u32, 1u32);
        while x > 0 {
            out += self.base_neg[(x % q) as usize] as u32 * pl;
            pl *= q;
            x /= q;
        }
        out
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    pub fn inv(&self, a: u32) -> Result<u32, AlgebraError> {
        if a == 0 {
            return Err(AlgebraError::ZeroInverse);
        }
        let n = self.size - 1;
        Ok(self.exp[((n - self.log[a as usize]) % n) as usize])
    }

    pub fn div(&self, a: u32, b: u32) -> Result<u32, AlgebraError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: u32, n: u64) -> u32 {
        if n == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let m = (self.size - 1) as u64;
        self.exp[((self.log[a as usize] as u64 * (n % m)) % m) as usize]
    }

    /// x ↦ x^q, the generator of Gal(F_{q^d}/F_q).
    pub fn frobenius(&self, a: u32) -> u32 {
        self.pow(a, self.q as u64)
    }

    /// Inverse of x ↦ x^p.
    pub fn pth_root(&self, a: u32) -> u32 {
        self.pow(a, self.size as u64 / self.p as u64)
    }

    /// Multiplicative generator (the class of z).
    pub fn generator(&self) -> u32 {
        self.exp[1]
    }

    /// Integer image in the prime field.
    pub fn from_int(&self, n: i64) -> u32 {
        n.rem_euclid(self.p as i64) as u32
    }

    pub fn elements(&self) -> impl Iterator<Item = u32> {
        0..self.size
    }
}
