//! Per-section geometry: reducibility, smoothness, badness above a point,
//! the marking subspaces Van/Sing/Fib/SingFib, and the local elementary
//! transformation.

use std::sync::Arc;

use crate::algebra::{multiple_affine_roots, poly, BinForm, Fq, FqElem};
use crate::curvepts::{ClosedPoint, Divisor, FiberPoint, Marking, PointSet};
use crate::sections::{eval_cubic, gamma_act, GammaElem, Section, SectionSpace, SectionsError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClassifyError {
    #[error("the zero section has no smoothness")]
    ZeroSection,
    #[error("reducibility work {required} exceeds the cap of {cap}")]
    CapExceeded { required: u128, cap: u128 },
    #[error("point set reaches degree {have}, need {need}")]
    PointSetTooSmall { have: u32, need: u32 },
    #[error("elementary transformation precondition failed: {0}")]
    Precondition(&'static str),
    #[error(transparent)]
    Sections(#[from] SectionsError),
}

/// The horizontally reducible sections of a space: zero, x-reducible (A3 = 0),
/// or a product L Q with L = C0 x + C1 y, C1 != 0.
#[derive(Debug, Clone)]
pub struct ReducibleSet {
    space: SectionSpace,
    bits: Vec<u64>,
}

impl ReducibleSet {
    /// Work needed to build the set: sum over c of (#normalized L) * (#Q).
    pub fn work(space: &SectionSpace) -> u128 {
        let q = space.field().q() as u128;
        let (l, k) = (space.l(), space.k());
        let mut total = 0u128;
        let mut c = k;
        while c <= l - 2 * k {
            let nl = q.pow((c + 1) as u32) * (q.pow((c - k + 1) as u32) - 1) / (q - 1);
            let dq: i64 = (0..3).map(|j| (l - c - j * k + 1).max(0)).sum();
            total += nl * q.pow(dq as u32);
            c += 1;
        }
        total
    }

    pub fn build(space: &SectionSpace, cap: u128) -> Result<Self, ClassifyError> {
        space.check_cap(cap)?;
        let required = Self::work(space);
        if required > cap {
            return Err(ClassifyError::CapExceeded { required, cap });
        }
        let f = space.field();
        let q = f.q() as u64;
        let (l, k) = (space.l(), space.k());
        let nbits = space.size() as usize;
        let mut bits = vec![0u64; nbits.div_ceil(64)];
        let dim = space.dim();
        let mut c = k;
        while c <= l - 2 * k {
            let dq = [l - c, l - c - k, l - c - 2 * k];
            let qlen: usize = dq.iter().map(|d| (d + 1).max(0) as usize).sum();
            let c0_len = (c + 1) as usize;
            let c1_len = (c - k + 1) as usize;
            let mut lc = vec![0u8; c0_len + c1_len];
            loop {
                let c1 = &lc[c0_len..];
                // normalized: the top nonzero coefficient of C1 equals 1
                if let Some(top) = c1.iter().rposition(|&x| x != 0) {
                    if c1[top] == 1 {
                        let c0f = BinForm::new(c, lc[..c0_len].to_vec());
                        let c1f = BinForm::new(c - k, c1.to_vec());
                        // images of the Q basis vectors
                        let mut images: Vec<Vec<u8>> = Vec::with_capacity(qlen);
                        for (j, &d) in dq.iter().enumerate() {
                            for m in 0..(d + 1).max(0) as usize {
                                let mut b = [BinForm::zero(dq[0]), BinForm::zero(dq[1]), BinForm::zero(dq[2])];
                                let mut cs = vec![0u8; (d + 1) as usize];
                                cs[m] = 1;
                                b[j] = BinForm::new(d, cs);
                                let prod = [
                                    c0f.mul(f, &b[0]),
                                    c0f.mul(f, &b[1]).add(f, &c1f.mul(f, &b[0])),
                                    c0f.mul(f, &b[2]).add(f, &c1f.mul(f, &b[1])),
                                    c1f.mul(f, &b[2]),
                                ];
                                images.push(space.from_forms(&prod).coeffs);
                            }
                        }
                        let mut qd = vec![0u8; qlen];
                        let mut acc = vec![0u8; dim];
                        loop {
                            // step the Q odometer, adding the image of each touched digit
                            let mut j = 0;
                            let mut done = true;
                            while j < qlen {
                                // digits are element indices, so add the actual difference
                                let old = qd[j];
                                qd[j] = if ((old + 1) as u64) < q { old + 1 } else { 0 };
                                let delta = f.sub(qd[j], old);
                                for (a, &b) in acc.iter_mut().zip(&images[j]) {
                                    *a = f.add(*a, f.mul(delta, b));
                                }
                                if qd[j] != 0 {
                                    done = false;
                                    break;
                                }
                                j += 1;
                            }
                            if done {
                                break;
                            }
                            let idx = space.encode(&acc) as usize;
                            bits[idx / 64] |= 1 << (idx % 64);
                        }
                    }
                }
                if !increment(&mut lc, q as u8) {
                    break;
                }
            }
            c += 1;
        }
        Ok(ReducibleSet { space: space.clone(), bits })
    }

    pub fn space(&self) -> &SectionSpace {
        &self.space
    }

    /// Membership by encoded index and coefficient vector.
    #[inline]
    pub fn contains(&self, idx: u64, c: &[FqElem]) -> bool {
        self.space.a3_zero(c) || (self.bits[idx as usize / 64] >> (idx % 64)) & 1 == 1
    }

    pub fn contains_section(&self, s: &Section) -> bool {
        self.contains(self.space.encode(&s.coeffs), &s.coeffs)
    }

    pub fn class_of(&self, idx: u64, c: &[FqElem]) -> ReducibilityClass {
        if self.space.is_zero(c) {
            ReducibilityClass::Zero
        } else if self.space.a3_zero(c) {
            ReducibilityClass::XReducible
        } else if self.contains(idx, c) {
            ReducibilityClass::SpeciallyReducible
        } else {
            ReducibilityClass::Irreducible
        }
    }
}

fn increment(c: &mut [u8], q: u8) -> bool {
    for x in c.iter_mut() {
        *x += 1;
        if *x < q {
            return true;
        }
        *x = 0;
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum ReducibilityClass {
    Zero,
    XReducible,
    SpeciallyReducible,
    Irreducible,
}

/// Why a section is bad above a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Badness {
    Fibral,
    Singular(FiberPoint),
}

/// Smoothness of vanishing schemes, with candidate points from the
/// discriminant.
#[derive(Debug, Clone)]
pub struct SmoothnessChecker {
    space: SectionSpace,
    ps: Arc<PointSet>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmoothReport {
    pub smooth: bool,
    pub bad: Vec<(usize, Badness)>,
}

/// Degree bound for closed points the checker may need.
pub fn smoothness_degree_bound(space: &SectionSpace) -> u32 {
    (2 * space.n()).max(2 * space.l()).max(1) as u32
}

impl SmoothnessChecker {
    pub fn new(space: &SectionSpace, ps: Arc<PointSet>) -> Result<Self, ClassifyError> {
        let need = smoothness_degree_bound(space);
        if ps.max_degree() < need {
            return Err(ClassifyError::PointSetTooSmall { have: ps.max_degree(), need });
        }
        Ok(SmoothnessChecker { space: space.clone(), ps })
    }

    pub fn points(&self) -> &Arc<PointSet> {
        &self.ps
    }

    /// Fibral, or singular at a relative-degree-1 point of the fiber.
    pub fn bad_above(&self, c: &[FqElem], i: usize) -> Option<Badness> {
        let e = self.ps.residue_field(i);
        let (val, der) = self.space.fiber_jet(c, &self.ps, i);
        if val.iter().all(|&v| v == 0) {
            return Some(Badness::Fibral);
        }
        // (1:0) is a multiple root iff c0 = c1 = 0; local chart v = y/x
        if val[0] == 0 && val[1] == 0 && der[0] == 0 {
            return Some(Badness::Singular(FiberPoint::Infinity));
        }
        for r in multiple_affine_roots(e, val) {
            if eval_cubic(e, der, FiberPoint::Affine(r)) == 0 {
                return Some(Badness::Singular(FiberPoint::Affine(r)));
            }
        }
        None
    }

    fn candidates(&self, c: &[FqElem]) -> Candidates {
        let s = Section { coeffs: c.to_vec() };
        let delta = self.space.discriminant(&s);
        if delta.is_zero() {
            let bound = (2 * self.space.l()).max(1) as u32;
            Candidates::Sweep(self.ps.up_to_degree(bound).collect())
        } else {
            let (_, pts) = self.ps.factor(&delta).expect("nonzero discriminant");
            Candidates::Factors(pts.into_iter().map(|p| p.0).collect())
        }
    }

    pub fn is_smooth(&self, c: &[FqElem]) -> Result<SmoothReport, ClassifyError> {
        if self.space.is_zero(c) {
            return Err(ClassifyError::ZeroSection);
        }
        let pts = match self.candidates(c) {
            Candidates::Factors(p) | Candidates::Sweep(p) => p,
        };
        let bad: Vec<(usize, Badness)> = pts.into_iter().filter_map(|i| self.bad_above(c, i).map(|b| (i, b))).collect();
        Ok(SmoothReport { smooth: bad.is_empty(), bad })
    }

    /// Same verdict as `is_smooth`, stopping at the first bad point.
    pub fn smooth(&self, c: &[FqElem]) -> bool {
        if self.space.is_zero(c) {
            return false;
        }
        let pts = match self.candidates(c) {
            Candidates::Factors(p) | Candidates::Sweep(p) => p,
        };
        pts.into_iter().all(|i| self.bad_above(c, i).is_none())
    }
}

enum Candidates {
    Factors(Vec<usize>),
    Sweep(Vec<usize>),
}

/// Whether gcd(A0..A3) is a unit.
pub fn is_primitive(space: &SectionSpace, c: &[FqElem]) -> bool {
    let f = space.field();
    let mut g: Vec<FqElem> = vec![];
    let mut inf_divides = true;
    for i in 0..4 {
        let a = space.slot(c, i);
        if a.iter().all(|&x| x == 0) {
            continue;
        }
        g = poly::gcd(f, &g, &poly::trim(a.to_vec()));
        if a[a.len() - 1] != 0 {
            inf_divides = false;
        }
    }
    !space.is_zero(c) && g.len() == 1 && !inf_divides
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionClass {
    pub reducibility: ReducibilityClass,
    pub smooth: bool,
    pub primitive: bool,
    pub bad_points: Vec<ClosedPoint>,
}

impl SectionClass {
    pub fn is_zero(&self) -> bool {
        self.reducibility == ReducibilityClass::Zero
    }
    pub fn x_reducible(&self) -> bool {
        self.reducibility == ReducibilityClass::XReducible
    }
    pub fn specially_reducible(&self) -> bool {
        self.reducibility == ReducibilityClass::SpeciallyReducible
    }
    pub fn horizontally_irreducible(&self) -> bool {
        self.reducibility == ReducibilityClass::Irreducible
    }
}

pub fn classify(red: &ReducibleSet, sm: &SmoothnessChecker, s: &Section) -> SectionClass {
    let space = red.space();
    let idx = space.encode(&s.coeffs);
    let reducibility = red.class_of(idx, &s.coeffs);
    let primitive = is_primitive(space, &s.coeffs);
    if reducibility == ReducibilityClass::Zero {
        return SectionClass { reducibility, smooth: false, primitive, bad_points: vec![] };
    }
    let rep = sm.is_smooth(&s.coeffs).expect("nonzero");
    let bad_points = rep.bad.iter().map(|(i, _)| sm.points().info(*i).point.clone()).collect();
    SectionClass { reducibility, smooth: rep.smooth, primitive, bad_points }
}

// ---------------------------------------------------------------------------
// Linear conditions at markings

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    VanishAtMarking,
    SingularExtra,
    Fibral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubspaceKind {
    Van,
    Sing,
    Fib,
    SingFib,
}

#[derive(Debug, Clone)]
pub struct LinearConditionSystem {
    pub space: SectionSpace,
    pub rows: Vec<Vec<FqElem>>,
    pub kinds: Vec<RowKind>,
}

impl LinearConditionSystem {
    pub fn empty(space: &SectionSpace) -> Self {
        LinearConditionSystem { space: space.clone(), rows: vec![], kinds: vec![] }
    }

    pub fn build(space: &SectionSpace, ps: &PointSet, kind: SubspaceKind, marking: &Marking) -> Self {
        let mut sys = Self::empty(space);
        for &(i, fp) in &marking.assignments {
            match kind {
                SubspaceKind::Van => sys.add_point_conditions(ps, i, fp, false),
                SubspaceKind::Sing => sys.add_point_conditions(ps, i, fp, true),
                SubspaceKind::Fib => sys.add_fibral(ps, i),
                SubspaceKind::SingFib => {
                    sys.add_point_conditions(ps, i, fp, true);
                    sys.add_fibral(ps, i);
                }
            }
        }
        sys
    }

    pub fn fib(space: &SectionSpace, ps: &PointSet, d: &Divisor) -> Self {
        let mut sys = Self::empty(space);
        for &i in &d.points {
            sys.add_fibral(ps, i);
        }
        sys
    }

    pub fn intersect(mut self, other: &LinearConditionSystem) -> Self {
        assert!(self.space == other.space);
        self.rows.extend(other.rows.iter().cloned());
        self.kinds.extend(other.kinds.iter().copied());
        self
    }

    /// Ext-valued functionals on the coefficient basis, for the value, the
    /// fiber derivative and the base derivative at (point i, fp).
    fn point_functionals(&self, ps: &PointSet, i: usize, fp: FiberPoint) -> [Vec<u32>; 3] {
        let space = &self.space;
        let e = ps.residue_field(i);
        let theta = ps.info(i).theta;
        let inf = ps.is_infinity(i);
        let mut val = vec![0u32; space.dim()];
        let mut dfib = vec![0u32; space.dim()];
        let mut dbase = vec![0u32; space.dim()];
        for slot in 0..4 {
            let (w, dw) = match fp {
                FiberPoint::Affine(a) => {
                    let w = e.pow(a, 3 - slot as u64);
                    let dw = if slot < 3 { e.mul(e.from_int(3 - slot as i64), e.pow(a, 2 - slot as u64)) } else { 0 };
                    (w, dw)
                }
                FiberPoint::Infinity => ((slot == 0) as u32, (slot == 1) as u32),
            };
            let deg = space.slot_degree(slot);
            for m in 0..space.slot_len(slot) {
                let j = space.slot_offset(slot) + m;
                let (bv, bd) = if inf {
                    ((m as i64 == deg) as u32, (m as i64 == deg - 1) as u32)
                } else {
                    let bv = e.pow(theta, m as u64);
                    let bd = if m == 0 { 0 } else { e.mul(e.from_int(m as i64), e.pow(theta, m as u64 - 1)) };
                    (bv, bd)
                };
                val[j] = e.mul(bv, w);
                dfib[j] = e.mul(bv, dw);
                dbase[j] = e.mul(bd, w);
            }
        }
        [val, dfib, dbase]
    }

    fn push_ext_rows(&mut self, ps: &PointSet, i: usize, func: &[u32], kind: RowKind) {
        let e = ps.residue_field(i);
        let d = e.degree() as usize;
        let digits: Vec<Vec<u8>> = func.iter().map(|&x| e.decode(x)).collect();
        for r in 0..d {
            self.rows.push(digits.iter().map(|dg| dg[r]).collect());
            self.kinds.push(kind);
        }
    }

    fn add_point_conditions(&mut self, ps: &PointSet, i: usize, fp: FiberPoint, singular: bool) {
        let [val, dfib, dbase] = self.point_functionals(ps, i, fp);
        self.push_ext_rows(ps, i, &val, RowKind::VanishAtMarking);
        if singular {
            self.push_ext_rows(ps, i, &dfib, RowKind::SingularExtra);
            self.push_ext_rows(ps, i, &dbase, RowKind::SingularExtra);
        }
    }

    fn add_fibral(&mut self, ps: &PointSet, i: usize) {
        let space = self.space.clone();
        let e = ps.residue_field(i);
        let theta = ps.info(i).theta;
        for slot in 0..4 {
            let mut func = vec![0u32; space.dim()];
            let deg = space.slot_degree(slot);
            for m in 0..space.slot_len(slot) {
                let j = space.slot_offset(slot) + m;
                func[j] = if ps.is_infinity(i) { (m as i64 == deg) as u32 } else { e.pow(theta, m as u64) };
            }
            self.push_ext_rows(ps, i, &func, RowKind::Fibral);
        }
    }

    /// Reduced row echelon form and pivot columns.
    fn rref(&self) -> (Vec<Vec<FqElem>>, Vec<usize>) {
        let f = self.space.field();
        let mut m: Vec<Vec<FqElem>> = self.rows.clone();
        let ncols = self.space.dim();
        let mut pivots = vec![];
        let mut r = 0;
        for col in 0..ncols {
            let Some(p) = (r..m.len()).find(|&i| m[i][col] != 0) else { continue };
            m.swap(r, p);
            let inv = f.inv(m[r][col]).unwrap();
            for x in m[r].iter_mut() {
                *x = f.mul(*x, inv);
            }
            for i in 0..m.len() {
                if i != r && m[i][col] != 0 {
                    let c = m[i][col];
                    let (a, b) = if i < r { let (x, y) = m.split_at_mut(r); (&mut x[i], &y[0]) } else { let (x, y) = m.split_at_mut(i); (&mut y[0], &x[r]) };
                    for (u, &v) in a.iter_mut().zip(b.iter()) {
                        *u = f.sub(*u, f.mul(c, v));
                    }
                }
            }
            pivots.push(col);
            r += 1;
            if r == m.len() {
                break;
            }
        }
        m.truncate(r);
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    pub fn nullity(&self) -> usize {
        self.space.dim() - self.rank()
    }

    /// q^(dim - rank).
    pub fn solution_count(&self) -> u128 {
        (self.space.field().q() as u128).pow(self.nullity() as u32)
    }

    pub fn nullspace(&self) -> Vec<Vec<FqElem>> {
        let f = self.space.field();
        let (m, pivots) = self.rref();
        let n = self.space.dim();
        let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![0u8; n];
                v[fc] = 1;
                for (row, &pc) in m.iter().zip(&pivots) {
                    v[pc] = f.neg(row[fc]);
                }
                v
            })
            .collect()
    }

    /// Every solution, in odometer order over the nullspace basis.
    pub fn solutions(&self) -> Vec<Vec<FqElem>> {
        let f = self.space.field();
        let basis = self.nullspace();
        let q = f.q() as u8;
        let n = self.space.dim();
        let mut coeffs = vec![0u8; basis.len()];
        let mut cur = vec![0u8; n];
        let mut out = vec![cur.clone()];
        loop {
            let mut j = 0;
            let mut done = true;
            while j < basis.len() {
                let old = coeffs[j];
                coeffs[j] = if old + 1 < q { old + 1 } else { 0 };
                let delta = f.sub(coeffs[j], old);
                for (a, &b) in cur.iter_mut().zip(&basis[j]) {
                    *a = f.add(*a, f.mul(delta, b));
                }
                if coeffs[j] != 0 {
                    done = false;
                    break;
                }
                j += 1;
            }
            if done {
                break;
            }
            out.push(cur.clone());
        }
        out
    }

    pub fn contains(&self, c: &[FqElem]) -> bool {
        let f = self.space.field();
        self.rows
            .iter()
            .all(|row| row.iter().zip(c).fold(0u8, |acc, (&a, &b)| f.add(acc, f.mul(a, b))) == 0)
    }
}

pub fn subspace(space: &SectionSpace, ps: &PointSet, kind: SubspaceKind, marking: &Marking) -> LinearConditionSystem {
    LinearConditionSystem::build(space, ps, kind, marking)
}

// ---------------------------------------------------------------------------
// Elementary transformation at a rational point

#[derive(Debug, Clone)]
pub struct ElmResult {
    /// Change of basis applied before transforming.
    pub gamma: GammaElem,
    pub target: SectionSpace,
    pub section: Section,
    /// Where the transformed section vanishes over the same point.
    pub marking: FiberPoint,
}

/// Which standard fiber point a marking can be moved to.
fn standardize(space: &SectionSpace, ps: &PointSet, i: usize, fp: FiberPoint) -> (GammaElem, FiberPoint) {
    let f = space.field();
    let k = space.k();
    match fp {
        FiberPoint::Affine(0) => (GammaElem::identity(k), FiberPoint::Affine(0)),
        _ if k == 0 => {
            // (0,1) M = second row of M, proportional to the marking
            let g = match fp {
                FiberPoint::Affine(a) => GammaElem::Gl2 { a: 1, b: 0, c: a as u8, d: 1 },
                FiberPoint::Infinity => GammaElem::swap(),
            };
            (g, FiberPoint::Affine(0))
        }
        FiberPoint::Infinity => (GammaElem::identity(k), FiberPoint::Infinity),
        FiberPoint::Affine(a) => {
            // (1,0) M = (g1, n) proportional to (a, 1): n = 1/a at the point
            let inv = f.inv(a as u8).unwrap();
            let mut nc = vec![0u8; (k + 1) as usize];
            if ps.is_infinity(i) {
                nc[k as usize] = inv;
            } else {
                nc[0] = inv;
            }
            (GammaElem::Tri { k, g1: 1, g2: 1, n: BinForm::new(k, nc) }, FiberPoint::Infinity)
        }
    }
}

/// The elementary transformation of a section singular at (P, fp), P rational.
/// At (0:1): (A0, A1, A2, A3) -> (pi A0, A1, A2/pi, A3/pi^2) in (l+1, k+1).
/// At (1:0): (A0, A1, A2, A3) -> (A0/pi^2, A1/pi, A2, pi A3) in (l-2, k-1).
pub fn elm_transform_local(
    space: &SectionSpace,
    ps: &PointSet,
    i: usize,
    fp: FiberPoint,
    s: &Section,
) -> Result<ElmResult, ClassifyError> {
    if ps.degree(i) != 1 {
        return Err(ClassifyError::Precondition("point must be rational"));
    }
    let f = space.field();
    let (gamma, std_fp) = standardize(space, ps, i, fp);
    let s1 = gamma_act(space, &gamma, s)?;
    let pi = BinForm::of_point(&ps.info(i).point);
    let pi2 = pi.mul(f, &pi);
    let [a0, a1, a2, a3] = space.forms(&s1);
    let (l, k) = (space.l(), space.k());
    let (target, forms, marking) = match std_fp {
        FiberPoint::Affine(_) => {
            let b2 = a2.div_exact(f, &pi).ok_or(ClassifyError::Precondition("P must divide A2"))?;
            let b3 = a3.div_exact(f, &pi2).ok_or(ClassifyError::Precondition("P^2 must divide A3"))?;
            (SectionSpace::new(f, l + 1, k + 1), [pi.mul(f, &a0), a1, b2, b3], FiberPoint::Infinity)
        }
        FiberPoint::Infinity => {
            if k < 1 {
                return Err(ClassifyError::Precondition("k must be positive"));
            }
            let b0 = a0.div_exact(f, &pi2).ok_or(ClassifyError::Precondition("P^2 must divide A0"))?;
            let b1 = a1.div_exact(f, &pi).ok_or(ClassifyError::Precondition("P must divide A1"))?;
            (SectionSpace::new(f, l - 2, k - 1), [b0, b1, a2, pi.mul(f, &a3)], FiberPoint::Affine(0))
        }
    };
    let section = target.from_forms(&forms);
    Ok(ElmResult { gamma, target, section, marking })
}

/// The space and marking on the other side of the transformation for a
/// marking that can be put in standard position (for rank comparisons).
pub fn elm_target(space: &SectionSpace, ps: &PointSet, i: usize, fp: FiberPoint) -> Option<(SectionSpace, GammaElem, FiberPoint)> {
    let f = space.field();
    let d = ps.degree(i) as i64;
    let (l, k) = (space.l(), space.k());
    if d == 1 {
        let (g, std) = standardize(space, ps, i, fp);
        return match std {
            FiberPoint::Affine(_) => Some((SectionSpace::new(f, l + 1, k + 1), g, FiberPoint::Infinity)),
            FiberPoint::Infinity if k >= 1 => Some((SectionSpace::new(f, l - 2, k - 1), g, FiberPoint::Affine(0))),
            _ => None,
        };
    }
    match fp {
        FiberPoint::Affine(0) => Some((SectionSpace::new(f, l + d, k + d), GammaElem::identity(k), FiberPoint::Infinity)),
        FiberPoint::Infinity if k >= d => {
            Some((SectionSpace::new(f, l - 2 * d, k - d), GammaElem::identity(k), FiberPoint::Affine(0)))
        }
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// Restriction dichotomy

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DichotomyOutcome {
    pub hypothesis: bool,
    pub surjective: bool,
    pub kernel_reducible: bool,
}

impl DichotomyOutcome {
    pub fn holds(&self) -> bool {
        !self.hypothesis || self.surjective || self.kernel_reducible
    }
}

/// Both branches of the dichotomy for the restriction map to a marking.
pub fn dichotomy(space: &SectionSpace, ps: &PointSet, red: &ReducibleSet, marking: &Marking) -> DichotomyOutcome {
    let deg_d = marking.divisor().degree(ps) as i64;
    let (l, k) = (space.l(), space.k());
    let hypothesis = 2 * (l - 2 * k) >= deg_d + k;
    let van = subspace(space, ps, SubspaceKind::Van, marking);
    let surjective = van.rank() as i64 == deg_d;
    let kernel_reducible = van
        .solutions()
        .iter()
        .all(|c| red.contains(space.encode(c), c));
    DichotomyOutcome { hypothesis, surjective, kernel_reducible }
}

/// Convenience: the F_q field of a space.
pub fn field_of(space: &SectionSpace) -> &Fq {
    space.field()
}
