//! Brute-force aggregates over section spaces: root-counting sums R and Phi,
//! the sieve quantity Psi, the smooth count Theta, orbit censuses and the
//! exact identities tying them together.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{Fq, FqElem};
use crate::classify::{
    smoothness_degree_bound, ClassifyError, LinearConditionSystem, ReducibleSet, SmoothnessChecker, SubspaceKind,
};
use crate::curvepts::{enumerate_divisors, enumerate_markings, Divisor, Marking, PointSet};
use crate::sections::{enumerate_gamma, gamma_order, orbit_stabilizer, par_set, SectionSpace, SectionsError};

const CHUNK: u64 = 1 << 12;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CountsError {
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Sections(#[from] SectionsError),
    #[error("{0}")]
    Setup(String),
}

/// Section classes that sums can range over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassTag {
    /// only the zero section
    Z,
    /// nonzero with A3 = 0
    Xr,
    /// horizontally reducible, not divisible by x
    Sr,
    /// horizontally irreducible
    Ir,
    /// A3 != 0
    Xir,
    /// nonzero and horizontally reducible
    Hr,
    All,
}

impl ClassTag {
    pub fn holds(self, space: &SectionSpace, red: &ReducibleSet, idx: u64, c: &[FqElem]) -> bool {
        let zero = space.is_zero(c);
        let a3 = space.a3_zero(c);
        match self {
            ClassTag::Z => zero,
            ClassTag::Xr => !zero && a3,
            ClassTag::Xir => !a3,
            ClassTag::All => true,
            ClassTag::Sr => !a3 && red.contains(idx, c),
            ClassTag::Ir => !red.contains(idx, c),
            ClassTag::Hr => !zero && red.contains(idx, c),
        }
    }
}

/// Everything needed to classify the sections of one space.
pub struct SpaceContext {
    pub space: SectionSpace,
    pub ps: Arc<PointSet>,
    pub red: ReducibleSet,
    pub smooth: SmoothnessChecker,
}

impl SpaceContext {
    pub fn new(fq: &Fq, l: i64, k: i64, ps: Arc<PointSet>, cap: u128) -> Result<Self, CountsError> {
        let space = SectionSpace::new(fq, l, k);
        let red = ReducibleSet::build(&space, cap)?;
        let smooth = SmoothnessChecker::new(&space, ps.clone())?;
        Ok(SpaceContext { space, ps, red, smooth })
    }

    /// Point set big enough for smoothness checks and divisors up to `dmax`.
    pub fn standalone(fq: &Fq, l: i64, k: i64, dmax: u32, cap: u128) -> Result<Self, CountsError> {
        let space = SectionSpace::new(fq, l, k);
        let deg = smoothness_degree_bound(&space).max(dmax);
        let ps = Arc::new(PointSet::new(fq, deg).map_err(|e| CountsError::Setup(e.to_string()))?);
        Self::new(fq, l, k, ps, cap)
    }

    fn for_each_section<F: FnMut(u64, &[FqElem])>(&self, mut f: F) {
        let mut c = vec![0u8; self.space.dim()];
        let mut idx = 0u64;
        loop {
            f(idx, &c);
            idx += 1;
            if !self.space.increment(&mut c) {
                break;
            }
        }
    }

    /// R^alpha(D) = sum over V^alpha of r_D.
    pub fn r_alpha(&self, d: &Divisor, alpha: ClassTag) -> i128 {
        let mut total = 0i128;
        self.for_each_section(|idx, c| {
            if alpha.holds(&self.space, &self.red, idx, c) {
                total += self.space.r_d(c, &self.ps, d) as i128;
            }
        });
        total
    }

    /// Phi^alpha(D) = sum over V^alpha of a_D.
    pub fn phi_alpha(&self, d: &Divisor, alpha: ClassTag) -> i128 {
        let mut total = 0i128;
        self.for_each_section(|idx, c| {
            if alpha.holds(&self.space, &self.red, idx, c) {
                total += self.space.a_d(c, &self.ps, d) as i128;
            }
        });
        total
    }

    /// Number of members of a linear system's solution set in the class.
    pub fn count_in_class(&self, sys: &LinearConditionSystem, alpha: ClassTag) -> u128 {
        sys.solutions()
            .iter()
            .filter(|c| alpha.holds(&self.space, &self.red, self.space.encode(c), c))
            .count() as u128
    }

    /// Truncated prod_P (1 - a_P(s) T^deg P) over points of degree <= dmax.
    pub fn local_factor_profile(&self, c: &[FqElem], dmax: usize) -> Vec<i128> {
        let mut poly = vec![0i128; dmax + 1];
        poly[0] = 1;
        for i in self.ps.up_to_degree(dmax as u32) {
            let a = self.space.a_p(c, &self.ps, i) as i128;
            let d = self.ps.degree(i) as usize;
            if a == 0 {
                continue;
            }
            for j in (d..=dmax).rev() {
                poly[j] -= a * poly[j - d];
            }
        }
        poly
    }

    /// Whether s is bad above every point of D.
    pub fn bad_above_all(&self, c: &[FqElem], d: &Divisor) -> bool {
        d.points.iter().all(|&i| self.smooth.bad_above(c, i).is_some())
    }

    /// Smooth, horizontally irreducible, with identically zero discriminant.
    pub fn is_inseparable(&self, c: &[FqElem]) -> bool {
        self.space.discriminant(&crate::sections::Section { coeffs: c.to_vec() }).is_zero()
    }
}

/// Orbit summary of the group on the smooth irreducible sections.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitSummary {
    pub orbits: u64,
    /// orbits whose stabilizer has order 3
    pub c3: u64,
    pub insep_orbits: u64,
    /// stabilizer order -> number of orbits
    pub stabilizers: BTreeMap<u64, u64>,
}

/// Classification tallies for one space plus ir local-factor sums.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceTally {
    pub l: i64,
    pub k: i64,
    pub size: u128,
    pub zero: u128,
    pub xr: u128,
    pub sr: u128,
    pub ir: u128,
    pub sm_ir: u128,
    pub insep: u128,
    /// coefficient d: sum over ir sections of the T^d coefficient of the local-factor product
    pub profile: Vec<i128>,
    pub orbits: Option<OrbitSummary>,
}

impl SpaceTally {
    fn merge(mut self, o: SpaceTally) -> SpaceTally {
        self.size += o.size;
        self.zero += o.zero;
        self.xr += o.xr;
        self.sr += o.sr;
        self.ir += o.ir;
        self.sm_ir += o.sm_ir;
        self.insep += o.insep;
        if self.profile.len() < o.profile.len() {
            self.profile.resize(o.profile.len(), 0);
        }
        for (a, b) in self.profile.iter_mut().zip(o.profile) {
            *a += b;
        }
        self
    }
}

/// One pass over a space: classes, smoothness and ir local-factor profiles
/// through degree `dmax`. The reduction is an exact integer sum, so the
/// result does not depend on how the range is split.
pub fn space_pass(ctx: &SpaceContext, dmax: usize) -> SpaceTally {
    let space = &ctx.space;
    let total = space.size() as u64;
    let char3 = space.field().p() == 3;
    let chunks: Vec<u64> = (0..total.div_ceil(CHUNK)).collect();
    let mut t = chunks
        .par_iter()
        .map(|&ch| {
            let start = ch * CHUNK;
            let end = (start + CHUNK).min(total);
            let mut t = SpaceTally { profile: vec![0; dmax + 1], ..Default::default() };
            let mut c = vec![0u8; space.dim()];
            space.decode_into(start, &mut c);
            for idx in start..end {
                t.size += 1;
                match ctx.red.class_of(idx, &c) {
                    crate::classify::ReducibilityClass::Zero => t.zero += 1,
                    crate::classify::ReducibilityClass::XReducible => t.xr += 1,
                    crate::classify::ReducibilityClass::SpeciallyReducible => t.sr += 1,
                    crate::classify::ReducibilityClass::Irreducible => {
                        t.ir += 1;
                        if ctx.smooth.smooth(&c) {
                            t.sm_ir += 1;
                            if char3 && ctx.is_inseparable(&c) {
                                t.insep += 1;
                            }
                        }
                        for (a, b) in t.profile.iter_mut().zip(ctx.local_factor_profile(&c, dmax)) {
                            *a += b;
                        }
                    }
                }
                space.increment(&mut c);
            }
            t
        })
        .reduce(SpaceTally::default, SpaceTally::merge);
    t.l = space.l();
    t.k = space.k();
    t.profile.resize(dmax + 1, 0);
    t
}

/// Encoded indices of the smooth irreducible sections.
pub fn smooth_irreducible_members(ctx: &SpaceContext) -> Vec<u64> {
    let space = &ctx.space;
    let total = space.size() as u64;
    let chunks: Vec<u64> = (0..total.div_ceil(CHUNK)).collect();
    let parts: Vec<Vec<u64>> = chunks
        .par_iter()
        .map(|&ch| {
            let start = ch * CHUNK;
            let end = (start + CHUNK).min(total);
            let mut out = vec![];
            let mut c = vec![0u8; space.dim()];
            space.decode_into(start, &mut c);
            for idx in start..end {
                if !ctx.red.contains(idx, &c) && ctx.smooth.smooth(&c) {
                    out.push(idx);
                }
                space.increment(&mut c);
            }
            out
        })
        .collect();
    parts.concat()
}

/// Orbits of the automorphism group on the smooth irreducible sections.
pub fn orbit_summary(ctx: &SpaceContext) -> Result<OrbitSummary, CountsError> {
    let members = smooth_irreducible_members(ctx);
    let group = enumerate_gamma(ctx.space.field(), ctx.space.k());
    let orbits = orbit_stabilizer(&ctx.space, &group, &members)?;
    let char3 = ctx.space.field().p() == 3;
    let mut s = OrbitSummary::default();
    for o in &orbits {
        s.orbits += 1;
        *s.stabilizers.entry(o.stabilizer).or_insert(0) += 1;
        if o.stabilizer == 3 {
            s.c3 += 1;
        }
        if char3 && ctx.is_inseparable(&ctx.space.decode(o.rep).coeffs) {
            s.insep_orbits += 1;
        }
    }
    Ok(s)
}

fn ratio(num: impl Into<BigInt>, den: &BigUint) -> BigRational {
    BigRational::new(num.into(), BigInt::from(den.clone()))
}

/// Shared state for censuses over one field: a point set and memoized
/// per-space tallies.
pub struct Census {
    fq: Fq,
    ps: Arc<PointSet>,
    cap: u128,
    n_max: i64,
    tallies: BTreeMap<(i64, i64), SpaceTally>,
    contexts: BTreeMap<(i64, i64), Arc<SpaceContext>>,
}

impl Census {
    pub fn new(q: u32, n_max: i64, cap: u128) -> Result<Self, CountsError> {
        let fq = Fq::new(q).map_err(|e| CountsError::Setup(e.to_string()))?;
        let deg = (2 * n_max).max(1) as u32;
        let ps = Arc::new(PointSet::new(&fq, deg).map_err(|e| CountsError::Setup(e.to_string()))?);
        Ok(Census { fq, ps, cap, n_max, tallies: BTreeMap::new(), contexts: BTreeMap::new() })
    }

    pub fn field(&self) -> &Fq {
        &self.fq
    }
    pub fn q(&self) -> u32 {
        self.fq.q()
    }
    pub fn n_max(&self) -> i64 {
        self.n_max
    }
    pub fn points(&self) -> &Arc<PointSet> {
        &self.ps
    }

    pub fn context(&mut self, l: i64, k: i64) -> Result<Arc<SpaceContext>, CountsError> {
        if let Some(c) = self.contexts.get(&(l, k)) {
            return Ok(c.clone());
        }
        let ctx = Arc::new(SpaceContext::new(&self.fq, l, k, self.ps.clone(), self.cap)?);
        self.contexts.insert((l, k), ctx.clone());
        Ok(ctx)
    }

    /// Profile length needed for a space so that Psi reaches n_max.
    fn dmax(&self, l: i64, k: i64) -> usize {
        (self.n_max - (2 * l - 3 * k)).max(0) as usize
    }

    /// Seed a tally, e.g. from a cache. Ignored if its profile is too short.
    pub fn insert_tally(&mut self, t: SpaceTally) -> bool {
        if t.profile.len() < self.dmax(t.l, t.k) + 1 {
            return false;
        }
        self.tallies.insert((t.l, t.k), t);
        true
    }

    pub fn tallies(&self) -> impl Iterator<Item = &SpaceTally> {
        self.tallies.values()
    }

    pub fn tally(&mut self, l: i64, k: i64) -> Result<&SpaceTally, CountsError> {
        if !self.tallies.contains_key(&(l, k)) {
            let ctx = self.context(l, k)?;
            let t = space_pass(&ctx, self.dmax(l, k));
            self.tallies.insert((l, k), t);
        }
        Ok(&self.tallies[&(l, k)])
    }

    pub fn orbits(&mut self, l: i64, k: i64) -> Result<OrbitSummary, CountsError> {
        self.tally(l, k)?;
        if let Some(o) = &self.tallies[&(l, k)].orbits {
            return Ok(o.clone());
        }
        let ctx = self.context(l, k)?;
        let o = orbit_summary(&ctx)?;
        self.tallies.get_mut(&(l, k)).unwrap().orbits = Some(o.clone());
        Ok(o)
    }

    /// Theta(N) = sum over Par(N) of |V^{sm,ir}| / |Gamma_k|.
    pub fn theta(&mut self, n: i64) -> Result<BigRational, CountsError> {
        let q = self.q();
        let mut acc = BigRational::zero();
        for (l, k) in par_set(n) {
            let t = self.tally(l, k)?;
            acc += ratio(BigInt::from(t.sm_ir), &gamma_order(q, k));
        }
        Ok(acc)
    }

    /// Psi(N) from the local-factor profiles.
    pub fn psi(&mut self, n: i64) -> Result<BigRational, CountsError> {
        assert!(n <= self.n_max, "psi beyond the census range");
        let q = self.q();
        let mut acc = BigRational::zero();
        for n1 in 0..=n.max(-1) {
            for (l, k) in par_set(n1) {
                let t = self.tally(l, k)?;
                acc += ratio(BigInt::from(t.profile[(n - n1) as usize]), &gamma_order(q, k));
            }
        }
        Ok(acc)
    }

    /// Orbit census at degree N.
    pub fn cover_census(&mut self, n: i64) -> Result<CoverCensus, CountsError> {
        let mut c = CoverCensus { n, theta: self.theta(n)?, ..Default::default() };
        for (l, k) in par_set(n) {
            let o = self.orbits(l, k)?;
            c.orbits += o.orbits;
            c.c3 += o.c3;
            c.insep += o.insep_orbits;
        }
        c.cov3 = c.orbits - c.insep;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverCensus {
    pub n: i64,
    pub theta: BigRational,
    /// all orbits on smooth irreducible sections
    pub orbits: u64,
    pub c3: u64,
    pub insep: u64,
    /// separable covers up to isomorphism
    pub cov3: u64,
}

impl Default for CoverCensus {
    fn default() -> Self {
        CoverCensus { n: 0, theta: BigRational::zero(), orbits: 0, c3: 0, insep: 0, cov3: 0 }
    }
}

impl CoverCensus {
    /// #orbits = Theta + (2/3) c3, since orbits with stabilizer 3 are weighted 1/3.
    pub fn consistent(&self) -> bool {
        let lhs = BigRational::from_integer(BigInt::from(self.orbits));
        let rhs = &self.theta + BigRational::new(BigInt::from(2 * self.c3), BigInt::from(3));
        lhs == rhs
    }
}

pub fn theta_bruteforce(census: &mut Census, n: i64) -> Result<BigRational, CountsError> {
    census.theta(n)
}

pub fn psi_bruteforce(census: &mut Census, n: i64) -> Result<BigRational, CountsError> {
    if n < 0 {
        return Ok(BigRational::zero());
    }
    census.psi(n)
}

/// Psi(N) the long way: divisor-major sums of mu(D) Phi^ir(l, k, D).
pub fn psi_divisor_major(census: &mut Census, n: i64) -> Result<BigRational, CountsError> {
    let q = census.q();
    let mut acc = BigRational::zero();
    for d in 0..=n.max(-1) {
        let divisors = enumerate_divisors(census.points(), d as u32);
        for (l, k) in par_set(n - d) {
            let ctx = census.context(l, k)?;
            let s: i128 = divisors.iter().map(|dv| dv.mu() as i128 * ctx.phi_alpha(dv, ClassTag::Ir)).sum();
            acc += ratio(BigInt::from(s), &gamma_order(q, k));
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecurrenceRow {
    pub n: i64,
    pub theta: BigRational,
    pub psi: BigRational,
    /// Psi(N) - (q+1) Psi(N-1) + q Psi(N-2) - Theta(N)
    pub residual: BigRational,
}

impl RecurrenceRow {
    pub fn holds(&self) -> bool {
        self.residual.is_zero()
    }
}

pub fn verify_theta_psi_recurrence(census: &mut Census, n_max: i64) -> Result<Vec<RecurrenceRow>, CountsError> {
    let q = BigRational::from_integer(BigInt::from(census.q()));
    let mut psis = vec![];
    let mut rows = vec![];
    for n in 0..=n_max {
        let psi = psi_bruteforce(census, n)?;
        psis.push(psi.clone());
        let theta = theta_bruteforce(census, n)?;
        let get = |m: i64| if m < 0 { BigRational::zero() } else { psis[m as usize].clone() };
        let model = get(n) - (&q + BigRational::one()) * get(n - 1) + &q * get(n - 2);
        rows.push(RecurrenceRow { n, residual: model - &theta, theta, psi });
    }
    Ok(rows)
}

/// Weighted sum over degree-N spaces of |Sing(marking)^ir| (or |Van|),
/// over all markings of D.
pub fn weighted_marking_sum(
    census: &mut Census,
    n: i64,
    d: &Divisor,
    kind: SubspaceKind,
) -> Result<BigRational, CountsError> {
    let q = census.q();
    let markings = enumerate_markings(census.points(), d);
    let mut acc = BigRational::zero();
    for (l, k) in par_set(n) {
        let ctx = census.context(l, k)?;
        let total: u128 = markings
            .iter()
            .map(|m| {
                let sys = LinearConditionSystem::build(&ctx.space, &ctx.ps, kind, m);
                ctx.count_in_class(&sys, ClassTag::Ir)
            })
            .sum();
        acc += ratio(BigInt::from(total), &gamma_order(q, k));
    }
    Ok(acc)
}

/// Sing side at degree N against the Van side at degree N - deg D.
pub fn verify_elm_sum_identity(
    census: &mut Census,
    n: i64,
    d: &Divisor,
) -> Result<(BigRational, BigRational), CountsError> {
    let deg = d.degree(census.points()) as i64;
    let lhs = weighted_marking_sum(census, n, d, SubspaceKind::Sing)?;
    let rhs = weighted_marking_sum(census, n - deg, d, SubspaceKind::Van)?;
    Ok((lhs, rhs))
}

/// Direct count of ir sections bad above every point of D, and the
/// inclusion-exclusion over Sing / SingFib / Fib.
pub fn sieve_identity(ctx: &SpaceContext, d: &Divisor) -> (i128, i128) {
    let mut direct = 0i128;
    ctx.for_each_section(|idx, c| {
        if !ctx.red.contains(idx, c) && ctx.bad_above_all(c, d) {
            direct += 1;
        }
    });
    let mut triple = 0i128;
    let n = d.points.len();
    // each point goes to D1 (Sing), D2 (SingFib, sign -1) or D3 (Fib)
    for code in 0..3usize.pow(n as u32) {
        let mut parts = [vec![], vec![], vec![]];
        let mut x = code;
        for &p in &d.points {
            parts[x % 3].push(p);
            x /= 3;
        }
        let d1 = Divisor { points: parts[0].clone() };
        let d2 = Divisor { points: parts[1].clone() };
        let d3 = Divisor { points: parts[2].clone() };
        let fib = LinearConditionSystem::fib(&ctx.space, &ctx.ps, &d3);
        let mut s = 0i128;
        for m1 in enumerate_markings(&ctx.ps, &d1) {
            let sing = LinearConditionSystem::build(&ctx.space, &ctx.ps, SubspaceKind::Sing, &m1);
            for m2 in enumerate_markings(&ctx.ps, &d2) {
                let sf = LinearConditionSystem::build(&ctx.space, &ctx.ps, SubspaceKind::SingFib, &m2);
                let sys = sing.clone().intersect(&sf).intersect(&fib);
                s += ctx.count_in_class(&sys, ClassTag::Ir) as i128;
            }
        }
        triple += d2.mu() as i128 * s;
    }
    (direct, triple)
}

/// Observed constants for the reducible and irreducible root-sum bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundObservation {
    pub l: i64,
    pub k: i64,
    pub divisor_degree: u32,
    pub phi_hr: i128,
    pub hr_bound: f64,
    pub phi_ir: i128,
    pub ir_bound: f64,
}

impl BoundObservation {
    pub fn hr_constant(&self) -> f64 {
        self.phi_hr.unsigned_abs() as f64 / self.hr_bound
    }
    pub fn ir_constant(&self) -> f64 {
        self.phi_ir.unsigned_abs() as f64 / self.ir_bound
    }
}

pub fn observe_bounds(ctx: &SpaceContext, d: &Divisor) -> BoundObservation {
    let q = ctx.space.field().q() as f64;
    let (l, k) = (ctx.space.l(), ctx.space.k());
    let w = 3f64.powi(d.omega() as i32);
    BoundObservation {
        l,
        k,
        divisor_degree: d.degree(&ctx.ps),
        phi_hr: ctx.phi_alpha(d, ClassTag::Hr),
        hr_bound: w * q.powi((3 * l - 3 * k) as i32),
        phi_ir: ctx.phi_alpha(d, ClassTag::Ir),
        ir_bound: w * q.powi((4 * l - 6 * k) as i32),
    }
}

/// The pieces of Psi(N) from each (N', (l,k)), for reports.
pub fn psi_terms(census: &mut Census, n: i64) -> Result<Vec<(i64, i64, i64, BigRational)>, CountsError> {
    let q = census.q();
    let mut out = vec![];
    for n1 in 0..=n {
        for (l, k) in par_set(n1) {
            let t = census.tally(l, k)?;
            out.push((n1, l, k, ratio(BigInt::from(t.profile[(n - n1) as usize]), &gamma_order(q, k))));
        }
    }
    Ok(out)
}

/// Markings used by the sampled sieve dimension report.
pub fn marking_ranks(ctx: &SpaceContext, m: &Marking) -> [usize; 4] {
    [SubspaceKind::Van, SubspaceKind::Sing, SubspaceKind::Fib, SubspaceKind::SingFib]
        .map(|kind| LinearConditionSystem::build(&ctx.space, &ctx.ps, kind, m).rank())
}
