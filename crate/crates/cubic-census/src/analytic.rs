//! The model side over exact rationals: Z(T), the model Phi/Psi/F/G, the
//! model Theta, and the partial-fraction constants.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::curvepts::divisor_series;
use crate::sections::{gamma_order, par_set};

pub type Q = BigRational;

fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

fn qpow(q: u32, e: i64) -> Q {
    let b = Q::from_integer(BigInt::from(q));
    if e >= 0 {
        num_traits::pow(b, e as usize)
    } else {
        num_traits::pow(b, (-e) as usize).recip()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalyticError {
    #[error("series expansion needs a denominator with nonzero constant term")]
    SingularAtZero,
    #[error("unexpected pole structure: {0}")]
    PoleStructure(String),
}

/// Polynomial in T over Q, low degree first, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly(pub Vec<Q>);

impl Poly {
    pub fn new(mut c: Vec<Q>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        Poly(c)
    }
    pub fn from_ints(c: &[i64]) -> Self {
        Poly::new(c.iter().map(|&x| qi(x)).collect())
    }
    pub fn constant(c: Q) -> Self {
        Poly::new(vec![c])
    }
    pub fn one() -> Self {
        Poly::constant(Q::one())
    }
    /// 1 - c T^e
    pub fn one_minus(c: Q, e: usize) -> Self {
        let mut v = vec![Q::zero(); e + 1];
        v[0] = Q::one();
        v[e] = -c;
        Poly::new(v)
    }
    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }
    pub fn coeff(&self, i: usize) -> Q {
        self.0.get(i).cloned().unwrap_or_else(Q::zero)
    }
    pub fn lead(&self) -> Q {
        self.0.last().cloned().unwrap_or_else(Q::zero)
    }
    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }
    pub fn sub(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }
    pub fn scale(&self, c: &Q) -> Poly {
        Poly::new(self.0.iter().map(|x| x * c).collect())
    }
    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::default();
        }
        let mut out = vec![Q::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
    pub fn divrem(&self, d: &Poly) -> (Poly, Poly) {
        let dd = d.degree().expect("division by zero polynomial");
        let lead = d.lead();
        let mut r = self.0.clone();
        if r.len() <= dd {
            return (Poly::default(), self.clone());
        }
        let mut quo = vec![Q::zero(); r.len() - dd];
        for s in (0..quo.len()).rev() {
            let c = &r[s + dd] / &lead;
            for (i, b) in d.0.iter().enumerate() {
                r[s + i] -= &c * b;
            }
            quo[s] = c;
        }
        (Poly::new(quo), Poly::new(r))
    }
    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.lead().recip())
    }
    pub fn gcd(&self, o: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.divrem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }
    /// (g, s, t) with s a + t b = g monic.
    pub fn ext_gcd(&self, o: &Poly) -> (Poly, Poly, Poly) {
        let (mut r0, mut r1) = (self.clone(), o.clone());
        let (mut s0, mut s1) = (Poly::one(), Poly::default());
        let (mut t0, mut t1) = (Poly::default(), Poly::one());
        while !r1.is_zero() {
            let (qt, r) = r0.divrem(&r1);
            r0 = std::mem::replace(&mut r1, r);
            let s = s0.sub(&qt.mul(&s1));
            s0 = std::mem::replace(&mut s1, s);
            let t = t0.sub(&qt.mul(&t1));
            t0 = std::mem::replace(&mut t1, t);
        }
        let inv = r0.lead().recip();
        (r0.scale(&inv), s0.scale(&inv), t0.scale(&inv))
    }
    pub fn eval(&self, x: &Q) -> Q {
        self.0.iter().rev().fold(Q::zero(), |acc, c| acc * x + c)
    }
}

/// num / den with den normalized to constant term 1 (or monic when den(0) = 0).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFn {
    pub num: Poly,
    pub den: Poly,
}

impl RationalFn {
    pub fn new(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let g = num.gcd(&den);
        let (mut num, mut den) = if g.is_zero() { (num, den) } else { (num.divrem(&g).0, den.divrem(&g).0) };
        let norm = if den.coeff(0).is_zero() { den.lead() } else { den.coeff(0) };
        num = num.scale(&norm.recip());
        den = den.scale(&norm.recip());
        RationalFn { num, den }
    }
    pub fn poly(p: Poly) -> Self {
        RationalFn::new(p, Poly::one())
    }
    pub fn mul(&self, o: &RationalFn) -> RationalFn {
        RationalFn::new(self.num.mul(&o.num), self.den.mul(&o.den))
    }
    pub fn add(&self, o: &RationalFn) -> RationalFn {
        RationalFn::new(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den))
    }
    pub fn sub(&self, o: &RationalFn) -> RationalFn {
        RationalFn::new(self.num.mul(&o.den).sub(&o.num.mul(&self.den)), self.den.mul(&o.den))
    }
    pub fn eval(&self, x: &Q) -> Q {
        self.num.eval(x) / self.den.eval(x)
    }
    /// Power series through T^order.
    pub fn expand(&self, order: usize) -> Result<SeriesQ, AnalyticError> {
        if self.den.coeff(0).is_zero() {
            return Err(AnalyticError::SingularAtZero);
        }
        Ok(SeriesQ::from_poly(&self.num, order).div(&SeriesQ::from_poly(&self.den, order)))
    }
}

/// Truncated power series through T^order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesQ {
    pub coeffs: Vec<Q>,
}

impl SeriesQ {
    pub fn zero(order: usize) -> Self {
        SeriesQ { coeffs: vec![Q::zero(); order + 1] }
    }
    pub fn from_poly(p: &Poly, order: usize) -> Self {
        SeriesQ { coeffs: (0..=order).map(|i| p.coeff(i)).collect() }
    }
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }
    pub fn coeff(&self, i: usize) -> Q {
        self.coeffs.get(i).cloned().unwrap_or_else(Q::zero)
    }
    pub fn add(&self, o: &SeriesQ) -> SeriesQ {
        let n = self.order().min(o.order());
        SeriesQ { coeffs: (0..=n).map(|i| &self.coeffs[i] + &o.coeffs[i]).collect() }
    }
    pub fn sub(&self, o: &SeriesQ) -> SeriesQ {
        let n = self.order().min(o.order());
        SeriesQ { coeffs: (0..=n).map(|i| &self.coeffs[i] - &o.coeffs[i]).collect() }
    }
    pub fn mul(&self, o: &SeriesQ) -> SeriesQ {
        let n = self.order().min(o.order());
        let mut out = vec![Q::zero(); n + 1];
        for i in 0..=n {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=n - i {
                out[i + j] += &self.coeffs[i] * &o.coeffs[j];
            }
        }
        SeriesQ { coeffs: out }
    }
    /// self / o, needing o(0) != 0.
    pub fn div(&self, o: &SeriesQ) -> SeriesQ {
        let n = self.order().min(o.order());
        let inv0 = o.coeffs[0].recip();
        let mut out: Vec<Q> = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let mut acc = self.coeffs[i].clone();
            for j in 1..=i {
                acc -= &o.coeffs[j] * &out[i - j];
            }
            out.push(acc * &inv0);
        }
        SeriesQ { coeffs: out }
    }
}

/// Z(T) = 1 / ((1 - T)(1 - qT)).
pub fn zeta_p1(q: u32) -> RationalFn {
    RationalFn::new(Poly::one(), Poly::one_minus(Q::one(), 1).mul(&Poly::one_minus(qi(q as i64), 1)))
}

/// Model Phi^ir(l, k, D) for deg D = d.
pub fn phi_hat(q: u32, l: i64, k: i64, d: i64) -> Q {
    if l - 3 * k >= d {
        qpow(q, 4 * l - 6 * k + 4 - d) - qpow(q, 3 * l - 3 * k + 3)
    } else {
        Q::zero()
    }
}

/// Monic irreducible counts per degree 1..=n (infinity included in degree 1).
pub fn closed_point_counts(q: u32, n: usize) -> Vec<u64> {
    let mobius = |m: u64| -> i64 {
        let mut m = m;
        let mut s = 1;
        let mut p = 2;
        while p * p <= m {
            if m % p == 0 {
                m /= p;
                if m % p == 0 {
                    return 0;
                }
                s = -s;
            }
            p += 1;
        }
        if m > 1 {
            -s
        } else {
            s
        }
    };
    let mut out = vec![0u64; n + 1];
    for (d, slot) in out.iter_mut().enumerate().skip(1) {
        let d = d as u64;
        let s: i128 = (1..=d)
            .filter(|e| d % e == 0)
            .map(|e| mobius(e) as i128 * (q as i128).pow((d / e) as u32))
            .sum();
        *slot = (s / d as i128) as u64 + u64::from(d == 1);
    }
    out
}

/// sum over reduced D of degree d of mu(D), d = 0..=n.
pub fn mobius_divisor_sums(q: u32, n: usize) -> Vec<i128> {
    divisor_series(&closed_point_counts(q, n), n, -1)
}

fn gamma_q(q: u32, k: i64) -> Q {
    Q::from_integer(BigInt::from(gamma_order(q, k)))
}

/// Model Psi(N) as the direct triple sum.
pub fn psi_hat(q: u32, n: i64) -> Q {
    if n < 0 {
        return Q::zero();
    }
    let mu = mobius_divisor_sums(q, n as usize);
    let mut acc = Q::zero();
    for d in 0..=n {
        if mu[d as usize] == 0 {
            continue;
        }
        for (l, k) in par_set(n - d) {
            acc += phi_hat(q, l, k, d) * qi(mu[d as usize] as i64) / gamma_q(q, k);
        }
    }
    acc
}

/// Closed form of sum Psi_hat(N) T^N.
pub fn fhat_closed_form(q: u32) -> RationalFn {
    let qq = |e: i64| qpow(q, e);
    let num = Poly::one_minus(qq(3), 3).mul(&Poly::one_minus(qq(4), 3)).mul(&Poly::one_minus(-qq(6), 3));
    let den = Poly::one_minus(qq(5), 3).mul(&Poly::one_minus(qq(4), 2)).mul(&Poly::one_minus(qq(3), 2));
    let pre = qq(2) / (qq(2) - Q::one());
    RationalFn::new(num.scale(&pre), den)
}

/// The other displayed prefactor, (q^4 - q^3)/|Gamma_0|.
pub fn fhat_prefactor_from_group(q: u32) -> Q {
    (qpow(q, 4) - qpow(q, 3)) / gamma_q(q, 0)
}

/// (1/|Gamma_0|)(1 + T)/(1 - T/q).
pub fn aut_series(q: u32) -> RationalFn {
    let num = Poly::from_ints(&[1, 1]).scale(&gamma_q(q, 0).recip());
    RationalFn::new(num, Poly::one_minus(qpow(q, -1), 1))
}

/// sum_{k <= order} T^k / |Gamma_k| term by term.
pub fn aut_series_direct(q: u32, order: usize) -> SeriesQ {
    SeriesQ { coeffs: (0..=order as i64).map(|k| gamma_q(q, k).recip()).collect() }
}

/// G_hat = (1 - T)(1 - qT) F_hat.
pub fn ghat(q: u32) -> RationalFn {
    let z_inv = Poly::one_minus(Q::one(), 1).mul(&Poly::one_minus(qi(q as i64), 1));
    fhat_closed_form(q).mul(&RationalFn::poly(z_inv))
}

/// Theta_hat(0..=n_max) from the expansion of G_hat.
pub fn theta_hat(q: u32, n_max: usize) -> Vec<Q> {
    ghat(q).expand(n_max + 2).expect("regular at 0").coeffs[..=n_max].to_vec()
}

/// Theta_hat(N) from the Psi_hat recurrence.
pub fn theta_hat_recurrence(q: u32, n: i64) -> Q {
    psi_hat(q, n) - qi(q as i64 + 1) * psi_hat(q, n - 1) + qi(q as i64) * psi_hat(q, n - 2)
}

/// Partial fractions of G_hat over (1 - q^2 T)(1 - q^5 T^3)(1 - q^3 T^2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constants {
    pub c1: Q,
    pub c2: [Q; 3],
    /// numerator over 1 - q^5 T^3
    pub block: Poly,
    /// numerator over 1 - q^3 T^2, polynomial part folded in
    pub p: Poly,
}

impl Constants {
    pub fn main_part(&self, q: u32) -> RationalFn {
        RationalFn::new(Poly::constant(self.c1.clone()), Poly::one_minus(qpow(q, 2), 1))
    }
    pub fn secondary_part(&self, q: u32) -> RationalFn {
        RationalFn::new(self.block.clone(), Poly::one_minus(qpow(q, 5), 3))
    }
    pub fn remainder_part(&self, q: u32) -> RationalFn {
        RationalFn::new(self.p.clone(), Poly::one_minus(qpow(q, 3), 2))
    }
    /// main + secondary + remainder, which must equal G_hat.
    pub fn reconstruct(&self, q: u32) -> RationalFn {
        self.main_part(q).add(&self.secondary_part(q)).add(&self.remainder_part(q))
    }
}

pub fn extract_constants(q: u32) -> Result<Constants, AnalyticError> {
    let g = ghat(q);
    let d1 = Poly::one_minus(qpow(q, 2), 1);
    let d2 = Poly::one_minus(qpow(q, 5), 3);
    let d3 = Poly::one_minus(qpow(q, 3), 2);
    let full = d1.mul(&d2).mul(&d3);
    let (cof, rem) = full.divrem(&g.den);
    if !rem.is_zero() {
        return Err(AnalyticError::PoleStructure(format!("denominator {:?} does not divide the expected one", g.den)));
    }
    let num = g.num.mul(&cof);
    let (poly_part, r) = num.divrem(&full);
    // r / (d1 d2 d3) = a/d1 + b/d2 + c/d3
    let part = |di: &Poly, rest: &Poly| -> Result<Poly, AnalyticError> {
        let (gg, s, _) = rest.ext_gcd(di);
        if gg.degree() != Some(0) {
            return Err(AnalyticError::PoleStructure("repeated factor".into()));
        }
        Ok(r.mul(&s).divrem(di).1)
    };
    let a = part(&d1, &d2.mul(&d3))?;
    let b = part(&d2, &d1.mul(&d3))?;
    let c = part(&d3, &d1.mul(&d2))?;
    let p = c.add(&poly_part.mul(&d3));
    let c1 = a.coeff(0);
    let c2 = [0, 1, 2].map(|i| -b.coeff(i));
    let out = Constants { c1, c2, block: b, p };
    if out.reconstruct(q) != g {
        return Err(AnalyticError::PoleStructure("partial fractions do not reconstruct G_hat".into()));
    }
    Ok(out)
}

/// c1 from its closed form, (1 - q^-3)(1 + q^-1).
pub fn c1_formula(q: u32) -> Q {
    (Q::one() - qpow(q, -3)) * (Q::one() + qpow(q, -1))
}

/// c2^i from the case list.
pub fn c2_formula(q: u32) -> [Q; 3] {
    let pre = (Q::one() - qpow(q, -2)) * qpow(q, -1);
    [qpow(q, 0) + qpow(q, 1), qpow(q, 2) + qpow(q, 3), qpow(q, 4)].map(|x| x * &pre)
}

/// 1 / (q^-1 (q - 1) Z(q^-3)).
pub fn c1_via_zeta(q: u32) -> Q {
    let z3 = zeta_p1(q).eval(&qpow(q, -3));
    (qpow(q, -1) * qi(q as i64 - 1) * z3).recip()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub n: i64,
    pub theta_hat: Q,
    pub main: Q,
    pub secondary: Q,
    /// theta_hat - main + secondary
    pub remainder: Q,
}

pub fn main_theorem_decomposition(q: u32, n: i64, consts: &Constants, theta_hat: &Q) -> Decomposition {
    let main = &consts.c1 * qpow(q, 2 * n);
    let secondary = &consts.c2[Integer::mod_floor(&n, &3) as usize] * qpow(q, 5 * Integer::div_floor(&n, &3));
    Decomposition { n, theta_hat: theta_hat.clone(), remainder: theta_hat - &main + &secondary, main, secondary }
}

/// |remainder| / q^{3N/2} as a float, for monitoring.
pub fn remainder_ratio(q: u32, d: &Decomposition) -> f64 {
    approx(&d.remainder).abs() / (q as f64).powf(1.5 * d.n as f64)
}

/// Float approximation of an exact rational.
pub fn approx(x: &Q) -> f64 {
    let n = x.numer().to_string().parse::<f64>().unwrap_or(f64::NAN);
    let d = x.denom().to_string().parse::<f64>().unwrap_or(f64::NAN);
    n / d
}
