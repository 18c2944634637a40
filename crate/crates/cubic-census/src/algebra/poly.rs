//! Dense univariate polynomials over F_q, low degree first, no trailing zeros.

use super::field::{Fq, FqElem};

pub type Poly = Vec<FqElem>;

pub fn trim(mut a: Poly) -> Poly {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

/// Degree, with the zero polynomial reported as None.
pub fn degree(a: &[FqElem]) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

pub fn add(f: &Fq, a: &[FqElem], b: &[FqElem]) -> Poly {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| f.add(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0)))
        .collect();
    trim(out)
}

pub fn sub(f: &Fq, a: &[FqElem], b: &[FqElem]) -> Poly {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| f.sub(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0)))
        .collect();
    trim(out)
}

pub fn mul(f: &Fq, a: &[FqElem], b: &[FqElem]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u8; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = f.add(out[i + j], f.mul(x, y));
        }
    }
    trim(out)
}

pub fn scale(f: &Fq, a: &[FqElem], c: FqElem) -> Poly {
    trim(a.iter().map(|&x| f.mul(x, c)).collect())
}

/// Quotient and remainder; panics on division by zero.
pub fn divrem(f: &Fq, a: &[FqElem], b: &[FqElem]) -> (Poly, Poly) {
    let db = degree(b).expect("division by zero polynomial");
    let inv = f.inv(b[db]).unwrap();
    let mut r = trim(a.to_vec());
    if r.len() <= db {
        return (vec![], r);
    }
    let mut qt = vec![0u8; r.len() - db];
    while r.len() > db {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - db;
        let c = f.mul(lead, inv);
        qt[shift] = c;
        for i in 0..=db {
            r[shift + i] = f.sub(r[shift + i], f.mul(c, b[i]));
        }
        r = trim(r);
    }
    (trim(qt), r)
}

pub fn rem(f: &Fq, a: &[FqElem], b: &[FqElem]) -> Poly {
    divrem(f, a, b).1
}

pub fn monic(f: &Fq, a: &[FqElem]) -> Poly {
    match a.last() {
        None => vec![],
        Some(&l) => scale(f, a, f.inv(l).unwrap()),
    }
}

pub fn gcd(f: &Fq, a: &[FqElem], b: &[FqElem]) -> Poly {
    let mut x = trim(a.to_vec());
    let mut y = trim(b.to_vec());
    while !y.is_empty() {
        let r = rem(f, &x, &y);
        x = y;
        y = r;
    }
    monic(f, &x)
}

pub fn powmod(f: &Fq, base: &[FqElem], mut n: u64, m: &[FqElem]) -> Poly {
    let mut acc: Poly = rem(f, &[1], m);
    let mut b = rem(f, base, m);
    while n > 0 {
        if n & 1 == 1 {
            acc = rem(f, &mul(f, &acc, &b), m);
        }
        b = rem(f, &mul(f, &b, &b), m);
        n >>= 1;
    }
    acc
}

/// t^(q^r) mod m, by r rounds of q-th powering.
fn frob_power_of_t(f: &Fq, r: u32, m: &[FqElem]) -> Poly {
    let mut x = rem(f, &[0, 1], m);
    for _ in 0..r {
        x = powmod(f, &x, f.q() as u64, m);
    }
    x
}

/// Rabin's test for monic irreducibility.
pub fn is_irreducible(f: &Fq, a: &[FqElem]) -> bool {
    let Some(n) = degree(a) else { return false };
    if n == 0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    let t: Poly = vec![0, 1];
    if sub(f, &frob_power_of_t(f, n as u32, a), &rem(f, &t, a)).iter().any(|&c| c != 0) {
        return false;
    }
    for r in prime_factors(n as u32) {
        let h = sub(f, &frob_power_of_t(f, n as u32 / r, a), &t);
        if degree(&gcd(f, &h, a)) != Some(0) {
            return false;
        }
    }
    true
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = vec![];
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// All monic irreducibles of degree m, in digit order of their lower
/// coefficients.
pub fn monic_irreducibles(f: &Fq, m: usize) -> Vec<Poly> {
    let q = f.q() as u64;
    let count = q.pow(m as u32);
    let mut out = vec![];
    for idx in 0..count {
        let mut a: Poly = (0..m).map(|i| ((idx / q.pow(i as u32)) % q) as u8).collect();
        a.push(1);
        if is_irreducible(f, &a) {
            out.push(a);
        }
    }
    out
}

pub fn derivative(f: &Fq, a: &[FqElem]) -> Poly {
    trim(
        a.iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| f.mul(c, f.from_int(i as i64)))
            .collect(),
    )
}

pub fn eval(f: &Fq, a: &[FqElem], x: FqElem) -> FqElem {
    a.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn irreducible_counts_match_gauss() {
        // number of monic irreducibles of degree n over F_q
        let gauss = |q: i64, n: i64| -> i64 {
            let mu = |m: i64| -> i64 {
                let mut m = m;
                let mut s = 1;
                let mut d = 2;
                while d * d <= m {
                    if m % d == 0 {
                        m /= d;
                        if m % d == 0 {
                            return 0;
                        }
                        s = -s;
                    }
                    d += 1;
                }
                if m > 1 {
                    s = -s;
                }
                s
            };
            (1..=n).filter(|e| n % e == 0).map(|e| mu(e) * q.pow((n / e) as u32)).sum::<i64>() / n
        };
        for q in [2u32, 3, 4] {
            let f = Fq::new(q).unwrap();
            for n in 1..=4 {
                assert_eq!(monic_irreducibles(&f, n).len() as i64, gauss(q as i64, n as i64), "q={q} n={n}");
            }
        }
    }
}
