//! Closed points and reduced divisors of P^1 over F_q.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::Arc;

use crate::algebra::{AlgebraError, BinForm, ExtField, Factorer, Fq, FqElem};

/// A closed point: a monic irreducible in t = t0/t1, or the point (1:0).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ClosedPoint {
    Finite(Vec<FqElem>),
    Infinity,
}

impl ClosedPoint {
    pub fn degree(&self) -> u32 {
        match self {
            ClosedPoint::Finite(p) => p.len() as u32 - 1,
            ClosedPoint::Infinity => 1,
        }
    }
}

/// Written as a polynomial in t with coefficients as element indices, or `inf`.
impl std::fmt::Display for ClosedPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let ClosedPoint::Finite(c) = self else { return write!(f, "inf") };
        let mut terms = vec![];
        for (i, &x) in c.iter().enumerate().rev() {
            if x == 0 {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "t".to_string(),
                _ => format!("t^{i}"),
            };
            terms.push(match (x, mono.is_empty()) {
                (_, true) => x.to_string(),
                (1, false) => mono,
                (_, false) => format!("{x}{mono}"),
            });
        }
        write!(f, "{}", terms.join("+"))
    }
}

impl Ord for ClosedPoint {
    fn cmp(&self, other: &Self) -> Ordering {
        let key = |p: &ClosedPoint| match p {
            ClosedPoint::Finite(c) => (p.degree(), false, c.clone()),
            ClosedPoint::Infinity => (1, true, vec![]),
        };
        key(self).cmp(&key(other))
    }
}

impl PartialOrd for ClosedPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone)]
pub struct PointInfo {
    pub point: ClosedPoint,
    pub degree: u32,
    /// A root of the point's polynomial in F_{q^degree}; 0 for infinity,
    /// where the local coordinate is t1/t0.
    pub theta: u32,
}

/// All closed points up to a degree bound, with residue fields and roots.
#[derive(Debug, Clone)]
pub struct PointSet {
    fq: Fq,
    max_degree: u32,
    points: Vec<PointInfo>,
    exts: Vec<Arc<ExtField>>,
    index: HashMap<ClosedPoint, usize>,
    factorer: Factorer,
}

impl PointSet {
    pub fn new(fq: &Fq, max_degree: u32) -> Result<Self, AlgebraError> {
        let max_degree = max_degree.max(1);
        let mut points = vec![PointInfo { point: ClosedPoint::Infinity, degree: 1, theta: 0 }];
        let mut exts = vec![];
        for d in 1..=max_degree {
            let e = ExtField::new(fq, d)?;
            let mut seen = vec![false; e.size() as usize];
            for a in e.elements() {
                if seen[a as usize] {
                    continue;
                }
                let mut orbit = vec![a];
                let mut b = e.frobenius(a);
                while b != a {
                    orbit.push(b);
                    b = e.frobenius(b);
                }
                for &x in &orbit {
                    seen[x as usize] = true;
                }
                if orbit.len() as u32 != d {
                    continue;
                }
                // minimal polynomial prod (t - x)
                let mut mp: Vec<u32> = vec![1];
                for &x in &orbit {
                    let mut next = vec![0u32; mp.len() + 1];
                    for (i, &c) in mp.iter().enumerate() {
                        next[i + 1] = e.add(next[i + 1], c);
                        next[i] = e.sub(next[i], e.mul(c, x));
                    }
                    mp = next;
                }
                let coeffs: Vec<FqElem> =
                    mp.iter().map(|&c| e.to_base(c).expect("minimal polynomial over F_q")).collect();
                points.push(PointInfo { point: ClosedPoint::Finite(coeffs), degree: d, theta: a });
            }
            exts.push(Arc::new(e));
        }
        points.sort_by(|a, b| a.point.cmp(&b.point));
        let index = points.iter().enumerate().map(|(i, p)| (p.point.clone(), i)).collect();
        let mut lists: Vec<Vec<Vec<FqElem>>> = vec![vec![]; max_degree as usize + 1];
        for p in &points {
            if let ClosedPoint::Finite(c) = &p.point {
                lists[p.degree as usize].push(c.clone());
            }
        }
        let factorer = Factorer::from_lists(fq, lists);
        Ok(PointSet { fq: fq.clone(), max_degree, points, exts, index, factorer })
    }

    pub fn field(&self) -> &Fq {
        &self.fq
    }
    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }
    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
    pub fn info(&self, i: usize) -> &PointInfo {
        &self.points[i]
    }
    pub fn points(&self) -> &[PointInfo] {
        &self.points
    }
    pub fn closed_points(&self) -> Vec<ClosedPoint> {
        self.points.iter().map(|p| p.point.clone()).collect()
    }
    pub fn index_of(&self, p: &ClosedPoint) -> Option<usize> {
        self.index.get(p).copied()
    }
    pub fn degree(&self, i: usize) -> u32 {
        self.points[i].degree
    }
    /// Residue field of degree d.
    pub fn ext(&self, d: u32) -> &Arc<ExtField> {
        &self.exts[d as usize - 1]
    }
    pub fn residue_field(&self, i: usize) -> &Arc<ExtField> {
        self.ext(self.points[i].degree)
    }
    pub fn is_infinity(&self, i: usize) -> bool {
        self.points[i].point == ClosedPoint::Infinity
    }
    /// Indices of points of degree at most d.
    pub fn up_to_degree(&self, d: u32) -> impl Iterator<Item = usize> + '_ {
        (0..self.points.len()).filter(move |&i| self.points[i].degree <= d)
    }

    /// Factor a nonzero form into point indices with multiplicities. Needs every
    /// irreducible factor to have degree at most `max_degree`.
    pub fn factor(&self, f: &BinForm) -> Result<(FqElem, Vec<(usize, u32)>), AlgebraError> {
        let fac = self.factorer.factor(f)?;
        let pts = fac
            .factors
            .iter()
            .map(|(p, m)| (self.index_of(p).expect("point beyond the point-set degree bound"), *m))
            .collect();
        Ok((fac.unit, pts))
    }

    /// Relative-degree-1 points of the fiber over point i, in marking order.
    pub fn fiber_points(&self, i: usize) -> Vec<FiberPoint> {
        let e = self.residue_field(i);
        let mut out: Vec<FiberPoint> = e.elements().map(FiberPoint::Affine).collect();
        out.push(FiberPoint::Infinity);
        out
    }
}

/// Enumerates the closed points of degree at most `max_degree`.
pub fn enumerate_closed_points(fq: &Fq, max_degree: u32) -> Result<Vec<ClosedPoint>, AlgebraError> {
    Ok(PointSet::new(fq, max_degree)?.closed_points())
}

/// A reduced effective divisor: sorted distinct indices into a PointSet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Divisor {
    pub points: Vec<usize>,
}

impl Divisor {
    pub fn empty() -> Self {
        Divisor { points: vec![] }
    }
    pub fn single(i: usize) -> Self {
        Divisor { points: vec![i] }
    }
    pub fn degree(&self, ps: &PointSet) -> u32 {
        self.points.iter().map(|&i| ps.degree(i)).sum()
    }
    pub fn omega(&self) -> usize {
        self.points.len()
    }
    pub fn mu(&self) -> i64 {
        if self.points.len() % 2 == 0 {
            1
        } else {
            -1
        }
    }
    pub fn contains(&self, i: usize) -> bool {
        self.points.binary_search(&i).is_ok()
    }
    /// Sub-divisors, in subset order.
    pub fn subdivisors(&self) -> Vec<Divisor> {
        let n = self.points.len();
        (0..1u32 << n)
            .map(|mask| Divisor {
                points: (0..n).filter(|b| mask >> b & 1 == 1).map(|b| self.points[b]).collect(),
            })
            .collect()
    }
    pub fn minus(&self, other: &Divisor) -> Divisor {
        Divisor { points: self.points.iter().copied().filter(|p| !other.contains(*p)).collect() }
    }
    /// The product of the point forms.
    pub fn form(&self, ps: &PointSet) -> BinForm {
        let f = ps.field();
        self.points
            .iter()
            .fold(BinForm::constant(1), |acc, &i| acc.mul(f, &BinForm::of_point(&ps.info(i).point)))
    }
}

/// All reduced effective divisors of degree exactly d, in canonical order.
pub fn enumerate_divisors(ps: &PointSet, d: u32) -> Vec<Divisor> {
    assert!(d <= ps.max_degree() || d == 0, "divisor degree beyond the point set");
    let mut out = vec![];
    let mut cur = vec![];
    fn rec(ps: &PointSet, start: usize, left: u32, cur: &mut Vec<usize>, out: &mut Vec<Divisor>) {
        if left == 0 {
            out.push(Divisor { points: cur.clone() });
            return;
        }
        for i in start..ps.len() {
            let d = ps.degree(i);
            if d <= left {
                cur.push(i);
                rec(ps, i + 1, left - d, cur, out);
                cur.pop();
            }
        }
    }
    rec(ps, 0, d, &mut cur, &mut out);
    out.sort();
    out
}

/// A relative-degree-1 point of a fiber: (a:1) or (1:0) over the residue field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FiberPoint {
    Affine(u32),
    Infinity,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Marking {
    pub assignments: Vec<(usize, FiberPoint)>,
}

impl Marking {
    pub fn divisor(&self) -> Divisor {
        Divisor { points: self.assignments.iter().map(|a| a.0).collect() }
    }
}

pub fn enumerate_markings(ps: &PointSet, d: &Divisor) -> Vec<Marking> {
    let mut out = vec![Marking { assignments: vec![] }];
    for &p in &d.points {
        let fibers = ps.fiber_points(p);
        out = out
            .into_iter()
            .flat_map(|m| {
                fibers.iter().map(move |&fp| {
                    let mut a = m.assignments.clone();
                    a.push((p, fp));
                    Marking { assignments: a }
                })
            })
            .collect();
    }
    out
}

/// Number of effective divisors of degree d on P^1: (q^{d+1} - 1)/(q - 1).
pub fn effective_divisor_count(q: u64, d: u32) -> u128 {
    let q = q as u128;
    (q.pow(d + 1) - 1) / (q - 1)
}

/// Count of closed points of each degree 1..=max, from the point set.
pub fn point_counts(ps: &PointSet) -> Vec<u64> {
    let mut c = vec![0u64; ps.max_degree() as usize + 1];
    for p in ps.points() {
        c[p.degree as usize] += 1;
    }
    c
}

/// Coefficients of prod_P (1 + sign T^{deg P}) through T^n, from point
/// counts per degree.
pub fn divisor_series(counts: &[u64], n: usize, sign: i64) -> Vec<i128> {
    let mut s = vec![0i128; n + 1];
    s[0] = 1;
    for (d, &c) in counts.iter().enumerate().skip(1) {
        if d > n {
            break;
        }
        // (1 + sign T^d)^c by the binomial theorem
        let mut binom = vec![1i128];
        for j in 0..n / d {
            let next = binom[j] * (c as i128 - j as i128) / (j as i128 + 1);
            binom.push(next);
        }
        let old = s.clone();
        for (i, si) in s.iter_mut().enumerate().skip(d) {
            for (j, b) in binom.iter().enumerate().skip(1) {
                if d * j > i {
                    break;
                }
                *si += (sign as i128).pow(j as u32) * b * old[i - d * j];
            }
        }
    }
    s
}
