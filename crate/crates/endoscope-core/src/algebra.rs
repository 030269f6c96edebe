//! Restricted enveloping algebras with PBW bases and rank-one divided-power
//! algebras, with straightening multiplication and hypothesis checkers.
//!
//! A PBW monomial `u_1^{e_1} ⋯ u_n^{e_n}` (`0 ≤ e_i < p`) is indexed by
//! `Σ e_i p^{i-1}`, so `u_1` is the least significant digit.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactfield::{Field, RowSpace, Scalar};
use crate::rootdata::{Root, RootSystem, RootType};

pub type Mono = u64;
pub type Terms = Vec<(Mono, Scalar)>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("(ad u_{i})^p applied to u_{j} is nonzero")]
    RestrictednessViolation { i: usize, j: usize },
    #[error("Jacobi identity fails on generators ({0}, {1}, {2})")]
    JacobiViolation(usize, usize, usize),
    #[error("dimension p^n = {p}^{n} exceeds the supported cap")]
    CapExceeded { p: u32, n: usize },
    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),
    #[error("field error: {0}")]
    Field(#[from] crate::exactfield::FieldError),
}

/// Binomial coefficient `C(a, b)` for `a < p`, reduced mod `p`.
fn small_binom(a: u64, b: u64, p: u32) -> u32 {
    if b > a {
        return 0;
    }
    let p64 = p as u64;
    let (mut num, mut den) = (1u64, 1u64);
    for i in 0..b {
        num = num * ((a - i) % p64) % p64;
        den = den * ((i + 1) % p64) % p64;
    }
    let f = Field::prime(p).expect("prime");
    f.mul(num as u32, f.inv(den as u32).expect("b < p"))
}

/// `C(n, k) mod p` by Lucas's theorem.
pub fn binom_mod(mut n: u64, mut k: u64, p: u32) -> u32 {
    if k > n {
        return 0;
    }
    let p64 = p as u64;
    let mut acc = 1u64;
    while k > 0 || n > 0 {
        let (nd, kd) = (n % p64, k % p64);
        if kd > nd {
            return 0;
        }
        acc = acc * small_binom(nd, kd, p) as u64 % p64;
        n /= p64;
        k /= p64;
    }
    acc as u32
}

/// Where an algebra came from; used for labels and cache keys.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    RootSystem { kind: RootType, rank: usize },
    ElementaryAbelian { rank: usize },
    DirectProduct(Box<Origin>, Box<Origin>),
    Presentation,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::RootSystem { kind, rank } => write!(f, "u({kind}{rank})"),
            Origin::ElementaryAbelian { rank } => write!(f, "E{rank}"),
            Origin::DirectProduct(a, b) => write!(f, "{a}x{b}"),
            Origin::Presentation => write!(f, "custom"),
        }
    }
}

/// Serializable presentation: brackets keyed `"i,j"` (1-based, `i < j`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Presentation {
    pub p: u32,
    pub n: usize,
    pub brackets: BTreeMap<String, Vec<(usize, u32)>>,
    pub ppowers: BTreeMap<String, Vec<(usize, u32)>>,
    #[serde(default)]
    pub heights: Vec<usize>,
    #[serde(default)]
    pub roots: Option<Vec<Root>>,
    pub origin: Origin,
}

type Cache<K> = RwLock<HashMap<K, Arc<Terms>>>;

/// Restricted enveloping algebra on generators `u_1..u_n` with a PBW basis.
pub struct PbwAlgebra {
    p: u32,
    n: usize,
    field: Field,
    origin: Origin,
    roots: Option<Vec<Root>>,
    heights: Vec<usize>,
    /// `brackets[i][j] = [u_i, u_j]` as `(k, coef)`, all `k > max(i, j)`.
    brackets: Vec<Vec<Vec<(usize, Scalar)>>>,
    ppowers: Vec<Vec<(usize, Scalar)>>,
    pw: Vec<u64>,
    gen_cache: Cache<(Mono, usize)>,
    mul_cache: Cache<(Mono, Mono)>,
}

impl fmt::Debug for PbwAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PbwAlgebra({}, p={}, n={})", self.origin, self.p, self.n)
    }
}

impl PbwAlgebra {
    /// General constructor. Brackets are given for `i < j` (0-based) and
    /// extended by antisymmetry; every target index must exceed both `i` and `j`.
    pub fn from_brackets(
        p: u32,
        n: usize,
        pairs: &[((usize, usize), Vec<(usize, i64)>)],
        ppowers: Vec<Vec<(usize, i64)>>,
        heights: Vec<usize>,
        roots: Option<Vec<Root>>,
        origin: Origin,
    ) -> Result<PbwAlgebra, AlgebraError> {
        let field = Field::prime(p)?;
        let pw = powers(p, n)?;
        let mut brackets = vec![vec![Vec::new(); n]; n];
        for ((i, j), terms) in pairs {
            let (i, j) = (*i, *j);
            if i >= n || j >= n || i == j {
                return Err(AlgebraError::InvalidPresentation(format!("bad bracket pair ({i},{j})")));
            }
            let mut acc: BTreeMap<usize, Scalar> = BTreeMap::new();
            for &(k, c) in terms {
                if k <= i.max(j) || k >= n {
                    return Err(AlgebraError::InvalidPresentation(format!(
                        "[u_{},u_{}] has a term on u_{} out of PBW order",
                        i + 1,
                        j + 1,
                        k + 1
                    )));
                }
                let e = acc.entry(k).or_insert(0);
                *e = field.add(*e, field.from_i64(c));
            }
            let fwd: Vec<(usize, Scalar)> = acc.into_iter().filter(|&(_, c)| c != 0).collect();
            let back = fwd.iter().map(|&(k, c)| (k, field.neg(c))).collect();
            brackets[i][j] = fwd;
            brackets[j][i] = back;
        }
        let mut pp = vec![Vec::new(); n];
        for (i, terms) in ppowers.into_iter().enumerate().take(n) {
            pp[i] = terms
                .into_iter()
                .map(|(k, c)| (k, field.from_i64(c)))
                .filter(|&(_, c)| c != 0)
                .collect();
            if pp[i].iter().any(|&(k, _)| k <= i) {
                return Err(AlgebraError::InvalidPresentation(format!("p-power of u_{} out of PBW order", i + 1)));
            }
        }
        let heights = if heights.len() == n { heights } else { vec![1; n] };
        let alg = PbwAlgebra {
            p,
            n,
            field,
            origin,
            roots,
            heights,
            brackets,
            ppowers: pp,
            pw,
            gen_cache: RwLock::new(HashMap::new()),
            mul_cache: RwLock::new(HashMap::new()),
        };
        alg.check_jacobi()?;
        alg.check_restricted()?;
        Ok(alg)
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn field(&self) -> &Field {
        &self.field
    }
    pub fn origin(&self) -> &Origin {
        &self.origin
    }
    pub fn roots(&self) -> Option<&[Root]> {
        self.roots.as_deref()
    }
    pub fn heights(&self) -> &[usize] {
        &self.heights
    }
    pub fn id(&self) -> String {
        format!("{}/p{}", self.origin, self.p)
    }
    /// `p^n`, or `None` if it does not fit in a `u64`.
    pub fn dim(&self) -> Option<u64> {
        (self.p as u64).checked_pow(self.n as u32)
    }
    /// Dimension as `usize` when the algebra is small enough to hold dense vectors.
    pub fn dim_small(&self) -> Option<usize> {
        self.dim().filter(|&d| d <= 1 << 24).map(|d| d as usize)
    }
    pub fn bracket(&self, i: usize, j: usize) -> &[(usize, Scalar)] {
        &self.brackets[i][j]
    }
    pub fn ppower(&self, i: usize) -> &[(usize, Scalar)] {
        &self.ppowers[i]
    }

    pub fn gen_mono(&self, i: usize) -> Mono {
        self.pw[i]
    }
    pub fn exponents(&self, m: Mono) -> Vec<u32> {
        let mut v = Vec::with_capacity(self.n);
        let mut c = m;
        for _ in 0..self.n {
            v.push((c % self.p as u64) as u32);
            c /= self.p as u64;
        }
        v
    }
    pub fn monomial(&self, exps: &[u32]) -> Mono {
        exps.iter().zip(&self.pw).map(|(&e, &w)| e as u64 * w).sum()
    }
    #[inline]
    fn exponent(&self, m: Mono, i: usize) -> u32 {
        ((m / self.pw[i]) % self.p as u64) as u32
    }
    fn last_gen(&self, m: Mono) -> Option<usize> {
        (0..self.n).rev().find(|&i| self.exponent(m, i) != 0)
    }
    /// `u_1^{p-1} ⋯ u_n^{p-1}` restricted to generators `s..n` (0-based `s`).
    pub fn top_monomial_from(&self, s: usize) -> Mono {
        (s..self.n).map(|i| (self.p as u64 - 1) * self.pw[i]).sum()
    }
    pub fn degree(&self, m: Mono) -> u32 {
        self.exponents(m).iter().sum()
    }

    fn accumulate(&self, acc: &mut HashMap<Mono, Scalar>, terms: &[(Mono, Scalar)], c: Scalar) {
        if c == 0 {
            return;
        }
        for &(m, x) in terms {
            let e = acc.entry(m).or_insert(0);
            *e = self.field.add(*e, self.field.mul(x, c));
        }
    }

    fn finish(acc: HashMap<Mono, Scalar>) -> Terms {
        let mut v: Terms = acc.into_iter().filter(|&(_, c)| c != 0).collect();
        v.sort_unstable();
        v
    }

    /// `m · u_j` expressed in the PBW basis.
    pub fn mono_gen(&self, m: Mono, j: usize) -> Arc<Terms> {
        if let Some(hit) = self.gen_cache.read().unwrap().get(&(m, j)) {
            return hit.clone();
        }
        let out = Arc::new(self.mono_gen_uncached(m, j));
        self.gen_cache.write().unwrap().insert((m, j), out.clone());
        out
    }

    fn mono_gen_uncached(&self, m: Mono, j: usize) -> Terms {
        let Some(k) = self.last_gen(m) else {
            return vec![(self.pw[j], 1)];
        };
        if k < j {
            return vec![(m + self.pw[j], 1)];
        }
        let mut acc: HashMap<Mono, Scalar> = HashMap::new();
        if k == j {
            if self.exponent(m, j) + 1 < self.p {
                return vec![(m + self.pw[j], 1)];
            }
            // m = m' u_j^{p-1}, so m u_j = m' u_j^{[p]}
            let base = m - (self.p as u64 - 1) * self.pw[j];
            for &(l, c) in &self.ppowers[j] {
                self.accumulate(&mut acc, &self.mono_gen(base, l), c);
            }
            return Self::finish(acc);
        }
        // k > j: m = m' u_k, and u_k u_j = u_j u_k + [u_k, u_j]
        let base = m - self.pw[k];
        let left = self.mono_gen(base, j);
        for &(t, c) in left.iter() {
            self.accumulate(&mut acc, &self.mono_gen(t, k), c);
        }
        for &(l, c) in &self.brackets[k][j] {
            self.accumulate(&mut acc, &self.mono_gen(base, l), c);
        }
        Self::finish(acc)
    }

    /// Product of two PBW monomials.
    pub fn mono_mul(&self, a: Mono, b: Mono) -> Arc<Terms> {
        if b == 0 {
            return Arc::new(vec![(a, 1)]);
        }
        if let Some(hit) = self.mul_cache.read().unwrap().get(&(a, b)) {
            return hit.clone();
        }
        let t = self.last_gen(b).unwrap();
        let head = self.mono_mul(a, b - self.pw[t]);
        let mut acc: HashMap<Mono, Scalar> = HashMap::new();
        for &(m, c) in head.iter() {
            self.accumulate(&mut acc, &self.mono_gen(m, t), c);
        }
        let out = Arc::new(Self::finish(acc));
        self.mul_cache.write().unwrap().insert((a, b), out.clone());
        out
    }

    pub fn multiply(&self, a: &AlgebraElement, b: &AlgebraElement) -> AlgebraElement {
        let mut acc: HashMap<Mono, Scalar> = HashMap::new();
        for (&ma, &ca) in &a.terms {
            for (&mb, &cb) in &b.terms {
                self.accumulate(&mut acc, &self.mono_mul(ma, mb), self.field.mul(ca, cb));
            }
        }
        AlgebraElement::from_map(acc)
    }

    pub fn power(&self, x: &AlgebraElement, k: u32) -> AlgebraElement {
        let mut acc = AlgebraElement::one();
        for _ in 0..k {
            acc = self.multiply(&acc, x);
        }
        acc
    }

    pub fn commutator(&self, a: &AlgebraElement, b: &AlgebraElement) -> AlgebraElement {
        self.multiply(a, b).sub(&self.multiply(b, a), &self.field)
    }

    pub fn generator(&self, i: usize) -> AlgebraElement {
        AlgebraElement::monomial(self.pw[i])
    }

    /// `Σ a_i u_i`.
    pub fn linear(&self, coeffs: &[Scalar]) -> AlgebraElement {
        let mut e = AlgebraElement::zero();
        for (i, &c) in coeffs.iter().enumerate() {
            if c != 0 {
                e.terms.insert(self.pw[i], c);
            }
        }
        e
    }

    // Lie-level computations on linear combinations of generators.
    fn lie_bracket(&self, a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
        let mut out = vec![0; self.n];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                if y == 0 {
                    continue;
                }
                let c = self.field.mul(x, y);
                for &(k, z) in &self.brackets[i][j] {
                    out[k] = self.field.add(out[k], self.field.mul(c, z));
                }
            }
        }
        out
    }

    fn unit_vec(&self, i: usize) -> Vec<Scalar> {
        let mut v = vec![0; self.n];
        v[i] = 1;
        v
    }

    fn check_jacobi(&self) -> Result<(), AlgebraError> {
        for i in 0..self.n {
            for j in i + 1..self.n {
                for k in j + 1..self.n {
                    let (x, y, z) = (self.unit_vec(i), self.unit_vec(j), self.unit_vec(k));
                    let a = self.lie_bracket(&x, &self.lie_bracket(&y, &z));
                    let b = self.lie_bracket(&y, &self.lie_bracket(&z, &x));
                    let c = self.lie_bracket(&z, &self.lie_bracket(&x, &y));
                    let bad = (0..self.n).any(|t| self.field.add(self.field.add(a[t], b[t]), c[t]) != 0);
                    if bad {
                        return Err(AlgebraError::JacobiViolation(i + 1, j + 1, k + 1));
                    }
                }
            }
        }
        Ok(())
    }

    /// `(ad u_i)^p (u_j) = [u_i^{[p]}, u_j]` on generators.
    fn check_restricted(&self) -> Result<(), AlgebraError> {
        for i in 0..self.n {
            let ui = self.unit_vec(i);
            let pp = self.lie_vec_of_ppower(i);
            for j in 0..self.n {
                let mut v = self.unit_vec(j);
                for _ in 0..self.p {
                    v = self.lie_bracket(&ui, &v);
                }
                let target = self.lie_bracket(&pp, &self.unit_vec(j));
                if v != target {
                    return Err(AlgebraError::RestrictednessViolation { i: i + 1, j: j + 1 });
                }
            }
        }
        Ok(())
    }

    fn lie_vec_of_ppower(&self, i: usize) -> Vec<Scalar> {
        let mut v = vec![0; self.n];
        for &(k, c) in &self.ppowers[i] {
            v[k] = c;
        }
        v
    }

    pub fn presentation(&self) -> Presentation {
        let mut brackets = BTreeMap::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if !self.brackets[i][j].is_empty() {
                    let v = self.brackets[i][j].iter().map(|&(k, c)| (k + 1, c)).collect();
                    brackets.insert(format!("{},{}", i + 1, j + 1), v);
                }
            }
        }
        let mut ppowers = BTreeMap::new();
        for i in 0..self.n {
            if !self.ppowers[i].is_empty() {
                ppowers.insert(format!("{}", i + 1), self.ppowers[i].iter().map(|&(k, c)| (k + 1, c)).collect());
            }
        }
        Presentation {
            p: self.p,
            n: self.n,
            brackets,
            ppowers,
            heights: self.heights.clone(),
            roots: self.roots.clone(),
            origin: self.origin.clone(),
        }
    }

    pub fn from_presentation(pres: &Presentation) -> Result<PbwAlgebra, AlgebraError> {
        let bad = |s: &str| AlgebraError::InvalidPresentation(format!("cannot parse key {s:?}"));
        let mut pairs = Vec::new();
        for (key, terms) in &pres.brackets {
            let (a, b) = key.split_once(',').ok_or_else(|| bad(key))?;
            let i: usize = a.trim().parse().map_err(|_| bad(key))?;
            let j: usize = b.trim().parse().map_err(|_| bad(key))?;
            if i == 0 || j == 0 || terms.iter().any(|&(k, _)| k == 0) {
                return Err(bad(key));
            }
            pairs.push(((i - 1, j - 1), terms.iter().map(|&(k, c)| (k - 1, c as i64)).collect()));
        }
        let mut pp = vec![Vec::new(); pres.n];
        for (key, terms) in &pres.ppowers {
            let i: usize = key.trim().parse().map_err(|_| bad(key))?;
            if i == 0 || i > pres.n {
                return Err(bad(key));
            }
            pp[i - 1] = terms.iter().map(|&(k, c)| (k - 1, c as i64)).collect();
        }
        PbwAlgebra::from_brackets(
            pres.p,
            pres.n,
            &pairs,
            pp,
            pres.heights.clone(),
            pres.roots.clone(),
            pres.origin.clone(),
        )
    }

    /// The algebra with generators permuted: new generator `t` is old `order[t]`.
    /// Multiplication still uses the original PBW order, so this is only a view
    /// for the order-sensitive hypothesis checker.
    pub fn generator_vectors(&self, order: &[usize]) -> Option<Vec<Vec<Scalar>>> {
        let d = self.dim_small()?;
        Some(
            order
                .iter()
                .map(|&i| {
                    let mut v = vec![0; d];
                    v[self.pw[i] as usize] = 1;
                    v
                })
                .collect(),
        )
    }
}

fn powers(p: u32, n: usize) -> Result<Vec<u64>, AlgebraError> {
    let mut pw = Vec::with_capacity(n);
    let mut x: u64 = 1;
    for _ in 0..n {
        pw.push(x);
        x = x.checked_mul(p as u64).ok_or(AlgebraError::CapExceeded { p, n })?;
    }
    Ok(pw)
}

/// Sparse element of a PBW algebra.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AlgebraElement {
    terms: BTreeMap<Mono, Scalar>,
}

impl AlgebraElement {
    pub fn zero() -> Self {
        AlgebraElement { terms: BTreeMap::new() }
    }
    pub fn one() -> Self {
        Self::monomial(0)
    }
    pub fn monomial(m: Mono) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(m, 1);
        AlgebraElement { terms }
    }
    pub fn from_terms(terms: impl IntoIterator<Item = (Mono, Scalar)>, field: &Field) -> Self {
        let mut acc: HashMap<Mono, Scalar> = HashMap::new();
        for (m, c) in terms {
            let e = acc.entry(m).or_insert(0);
            *e = field.add(*e, c);
        }
        Self::from_map(acc)
    }
    fn from_map(acc: HashMap<Mono, Scalar>) -> Self {
        AlgebraElement { terms: acc.into_iter().filter(|&(_, c)| c != 0).collect() }
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn coefficient(&self, m: Mono) -> Scalar {
        self.terms.get(&m).copied().unwrap_or(0)
    }
    pub fn terms(&self) -> impl Iterator<Item = (Mono, Scalar)> + '_ {
        self.terms.iter().map(|(&m, &c)| (m, c))
    }
    pub fn len(&self) -> usize {
        self.terms.len()
    }
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn add(&self, other: &Self, field: &Field) -> Self {
        Self::from_terms(self.terms().chain(other.terms()), field)
    }
    pub fn sub(&self, other: &Self, field: &Field) -> Self {
        Self::from_terms(self.terms().chain(other.terms().map(|(m, c)| (m, field.neg(c)))), field)
    }
    pub fn scale(&self, c: Scalar, field: &Field) -> Self {
        Self::from_terms(self.terms().map(|(m, x)| (m, field.mul(x, c))), field)
    }
}

/// Root-vector generators ordered by height, brackets from the Chevalley
/// constants reduced mod `p`, all p-powers zero.
pub fn build_restricted_enveloping(rs: &RootSystem, p: u32) -> Result<PbwAlgebra, AlgebraError> {
    let roots = rs.positive_roots();
    let n = roots.len();
    let sc = rs.structure_constants();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let c = sc.get(i, j);
            if c != 0 {
                let sum: Root = roots[i].iter().zip(&roots[j]).map(|(a, b)| a + b).collect();
                let k = rs.index_of(&sum).expect("sum of roots with nonzero constant is a root");
                pairs.push(((i, j), vec![(k, c)]));
            }
        }
    }
    PbwAlgebra::from_brackets(
        p,
        n,
        &pairs,
        vec![Vec::new(); n],
        rs.heights().to_vec(),
        Some(roots.to_vec()),
        Origin::RootSystem { kind: rs.kind(), rank: rs.rank() },
    )
}

/// Group algebra of `(Z/p)^n`, i.e. `k[t_1..t_n]/(t_i^p)`.
pub fn elementary_abelian(p: u32, n: usize) -> Result<PbwAlgebra, AlgebraError> {
    PbwAlgebra::from_brackets(p, n, &[], vec![Vec::new(); n], vec![1; n], None, Origin::ElementaryAbelian { rank: n })
}

/// Tensor product of two PBW algebras; generators merged by height (stable,
/// first factor first on ties) so brackets stay in PBW order.
pub fn direct_product(a: &PbwAlgebra, b: &PbwAlgebra) -> Result<PbwAlgebra, AlgebraError> {
    if a.p != b.p {
        return Err(AlgebraError::InvalidPresentation("characteristics differ".into()));
    }
    let mut slots: Vec<(usize, usize, usize)> = Vec::new(); // (height, factor, index)
    for i in 0..a.n {
        slots.push((a.heights[i], 0, i));
    }
    for i in 0..b.n {
        slots.push((b.heights[i], 1, i));
    }
    slots.sort();
    let pos: HashMap<(usize, usize), usize> = slots.iter().enumerate().map(|(t, &(_, f, i))| ((f, i), t)).collect();
    let n = slots.len();
    let mut pairs = Vec::new();
    for (f, alg) in [(0usize, a), (1, b)] {
        for i in 0..alg.n {
            for j in 0..alg.n {
                let (ti, tj) = (pos[&(f, i)], pos[&(f, j)]);
                if ti < tj && !alg.brackets[i][j].is_empty() {
                    let t = alg.brackets[i][j].iter().map(|&(k, c)| (pos[&(f, k)], c as i64)).collect();
                    pairs.push(((ti, tj), t));
                }
            }
        }
    }
    let heights = slots.iter().map(|s| s.0).collect();
    let roots = match (a.roots(), b.roots()) {
        (Some(ra), Some(rb)) => Some(
            slots
                .iter()
                .map(|&(_, f, i)| {
                    // roots of the product live in the direct sum of the two lattices
                    let (la, lb) = (ra[0].len(), rb[0].len());
                    let mut v = vec![0; la + lb];
                    if f == 0 {
                        v[..la].copy_from_slice(&ra[i]);
                    } else {
                        v[la..].copy_from_slice(&rb[i]);
                    }
                    v
                })
                .collect(),
        ),
        _ => None,
    };
    PbwAlgebra::from_brackets(
        a.p,
        n,
        &pairs,
        vec![Vec::new(); n],
        heights,
        roots,
        Origin::DirectProduct(Box::new(a.origin.clone()), Box::new(b.origin.clone())),
    )
}

/// Rank-one divided-power algebra `Dist(U_r)` with basis `γ_0..γ_{p^r-1}`.
#[derive(Debug)]
pub struct DividedPowerAlgebra {
    p: u32,
    r: u32,
    dim: usize,
    field: Field,
}

pub const DIVIDED_POWER_CAP: usize = 1 << 15;

impl DividedPowerAlgebra {
    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn r(&self) -> u32 {
        self.r
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn field(&self) -> &Field {
        &self.field
    }
    pub fn id(&self) -> String {
        format!("Dist(U{})/p{}", self.r, self.p)
    }
    /// `γ_i γ_j = C(i+j, i) γ_{i+j}`, zero past the top.
    pub fn mul_basis(&self, i: usize, j: usize) -> Option<(usize, Scalar)> {
        let s = i + j;
        if s >= self.dim {
            return None;
        }
        let c = binom_mod(s as u64, i as u64, self.p);
        (c != 0).then_some((s, c))
    }
    /// Index of generator `x_j = γ_{p^j}`.
    pub fn generator_index(&self, j: u32) -> usize {
        (self.p as usize).pow(j)
    }
    pub fn num_generators(&self) -> usize {
        self.r as usize
    }
}

pub fn build_divided_power(p: u32, r: u32) -> Result<DividedPowerAlgebra, AlgebraError> {
    let field = Field::prime(p)?;
    let dim = (p as u64).checked_pow(r).filter(|&d| d as usize <= DIVIDED_POWER_CAP && r >= 1);
    let Some(dim) = dim else {
        return Err(AlgebraError::CapExceeded { p, n: r as usize });
    };
    Ok(DividedPowerAlgebra { p, r, dim: dim as usize, field })
}

/// Any finite-dimensional algebra with an explicit basis and basis-product rule.
pub trait FiniteAlgebra {
    fn field(&self) -> &Field;
    fn dim(&self) -> usize;
    /// Product of basis elements `b_i b_j` as sparse coordinates.
    fn mul_basis(&self, i: usize, j: usize) -> Vec<(usize, Scalar)>;

    fn mul_vec(&self, a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
        let f = self.field().clone();
        let mut out = vec![0; self.dim()];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                if y == 0 {
                    continue;
                }
                let c = f.mul(x, y);
                for (k, z) in self.mul_basis(i, j) {
                    out[k] = f.add(out[k], f.mul(c, z));
                }
            }
        }
        out
    }
}

impl FiniteAlgebra for PbwAlgebra {
    fn field(&self) -> &Field {
        &self.field
    }
    fn dim(&self) -> usize {
        self.dim_small().expect("algebra too large for dense vectors")
    }
    fn mul_basis(&self, i: usize, j: usize) -> Vec<(usize, Scalar)> {
        self.mono_mul(i as u64, j as u64).iter().map(|&(m, c)| (m as usize, c)).collect()
    }
}

impl FiniteAlgebra for DividedPowerAlgebra {
    fn field(&self) -> &Field {
        &self.field
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn mul_basis(&self, i: usize, j: usize) -> Vec<(usize, Scalar)> {
        DividedPowerAlgebra::mul_basis(self, i, j).into_iter().collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Clause {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl Clause {
    fn new(name: &str, passed: bool, witness: Option<String>) -> Clause {
        Clause { name: name.to_string(), passed, witness }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LiftDisposition {
    /// `x^p = 0`
    ClauseA,
    /// `x^p = y u_n` with `y` a unit
    ClauseB,
    Neither,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LiftRecord {
    pub coefficients: Vec<Scalar>,
    pub disposition: LiftDisposition,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HypothesisReport {
    pub algebra: String,
    pub n: usize,
    pub clauses: Vec<Clause>,
    /// `(s, passed)` for the annihilation identities, `s` 1-based.
    pub annihilation: Vec<(usize, bool)>,
    pub restricted: bool,
    pub lifts: Vec<LiftRecord>,
    pub passed: bool,
}

impl HypothesisReport {
    pub fn clause(&self, name: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.name == name)
    }
    fn finalize(mut self) -> Self {
        self.passed = self.clauses.iter().all(|c| c.passed) && self.annihilation.iter().all(|a| a.1) && self.restricted;
        self
    }
}

fn fmt_terms(alg: &PbwAlgebra, t: &[(Mono, Scalar)]) -> String {
    let parts: Vec<String> = t
        .iter()
        .map(|&(m, c)| {
            let e = alg.exponents(m);
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &x)| x > 0)
                .map(|(i, &x)| if x == 1 { format!("u{}", i + 1) } else { format!("u{}^{}", i + 1, x) })
                .collect();
            let mono = if mono.is_empty() { "1".to_string() } else { mono.join("") };
            if c == 1 {
                mono
            } else {
                format!("{c}*{mono}")
            }
        })
        .collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

/// Hypothesis checks in the natural generator order, by direct multiplication.
///
/// Clauses: (a) `u_i^p = 0`; (b) `[u_i, u_j] ∈ I_i` where `I_i` is spanned by
/// the monomials involving some `u_l` with `l > i`; (c) `u_n` central;
/// (d) `dim = p^n`, certified by the Jacobi identity and restrictedness on
/// generators together with associativity on generator triples.
/// The annihilation identities `u_j · u_s^{p-1} ⋯ u_n^{p-1} = 0` for `j ≥ s`
/// are checked for every `s`.
pub fn check_hypothesis1(alg: &PbwAlgebra) -> HypothesisReport {
    let n = alg.n;
    let f = alg.field();
    let mut clauses = Vec::new();

    let mut bad = None;
    for i in 0..n {
        let x = alg.power(&alg.generator(i), alg.p);
        if !x.is_zero() {
            bad = Some(format!("u{}^p = {}", i + 1, fmt_terms(alg, &x.terms().collect::<Vec<_>>())));
            break;
        }
    }
    clauses.push(Clause::new("a", bad.is_none(), bad));

    let mut bad = None;
    'outer: for i in 0..n {
        for j in 0..n {
            let c = alg.commutator(&alg.generator(i), &alg.generator(j));
            let in_ideal = c.terms().all(|(m, _)| alg.exponents(m)[i + 1..].iter().any(|&e| e > 0));
            if !in_ideal {
                bad = Some(format!("[u{},u{}] = {}", i + 1, j + 1, fmt_terms(alg, &c.terms().collect::<Vec<_>>())));
                break 'outer;
            }
        }
    }
    clauses.push(Clause::new("b", bad.is_none(), bad));

    let mut bad = None;
    if n > 0 {
        for j in 0..n {
            let c = alg.commutator(&alg.generator(n - 1), &alg.generator(j));
            if !c.is_zero() {
                bad = Some(format!("[u{},u{}] != 0", n, j + 1));
                break;
            }
        }
    }
    clauses.push(Clause::new("c", bad.is_none(), bad));

    let restricted = alg.check_jacobi().is_ok() && alg.check_restricted().is_ok();
    let mut bad = None;
    'assoc: for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let (a, b, c) = (alg.generator(i), alg.generator(j), alg.generator(k));
                let l = alg.multiply(&alg.multiply(&a, &b), &c);
                let r = alg.multiply(&a, &alg.multiply(&b, &c));
                if l != r {
                    bad = Some(format!("associativity fails on (u{},u{},u{})", i + 1, j + 1, k + 1));
                    break 'assoc;
                }
            }
        }
    }
    if !restricted && bad.is_none() {
        bad = Some("Jacobi or restrictedness fails".into());
    }
    clauses.push(Clause::new("d", bad.is_none(), bad));

    let mut annihilation = Vec::new();
    for s in 0..n {
        let w = alg.top_monomial_from(s);
        let ok = (s..n).all(|j| alg.mono_mul(alg.gen_mono(j), w).is_empty());
        annihilation.push((s + 1, ok));
    }
    let _ = f;
    HypothesisReport {
        algebra: alg.id(),
        n,
        clauses,
        annihilation,
        restricted,
        lifts: Vec::new(),
        passed: false,
    }
    .finalize()
}

/// Classify a lift candidate `x`.
pub fn check_hypothesis3_lift(alg: &PbwAlgebra, x: &AlgebraElement) -> (LiftDisposition, AlgebraElement) {
    let xp = alg.power(x, alg.p);
    if xp.is_zero() {
        return (LiftDisposition::ClauseA, xp);
    }
    let un = alg.gen_mono(alg.n - 1);
    let in_ideal = xp.terms().all(|(m, _)| alg.exponent(m, alg.n - 1) >= 1);
    if in_ideal && xp.coefficient(un) != 0 {
        (LiftDisposition::ClauseB, xp)
    } else {
        (LiftDisposition::Neither, xp)
    }
}

/// All projective `F_p` combinations `x` of `u_1..u_{n-1}` with `x^p ∈ A u_n`,
/// classified by [`check_hypothesis3_lift`].
pub fn lift_sweep(alg: &PbwAlgebra) -> Vec<LiftRecord> {
    let n = alg.n;
    if n < 2 {
        return Vec::new();
    }
    let p = alg.p;
    let m = n - 1;
    let mut out = Vec::new();
    let total = (p as u64).pow(m as u32);
    for code in 1..total {
        let mut coeffs = vec![0u32; n];
        let mut c = code;
        for slot in coeffs.iter_mut().take(m) {
            *slot = (c % p as u64) as u32;
            c /= p as u64;
        }
        if coeffs.iter().find(|&&x| x != 0) != Some(&1) {
            continue;
        }
        let x = alg.linear(&coeffs);
        let xp = alg.power(&x, p);
        if !xp.terms().all(|(mm, _)| alg.exponent(mm, n - 1) >= 1) {
            continue;
        }
        let (disposition, _) = check_hypothesis3_lift(alg, &x);
        coeffs.truncate(m);
        out.push(LiftRecord { coefficients: coeffs, disposition });
    }
    out
}

/// Order-independent hypothesis check for an algebra given by an explicit
/// basis product and a list of generators (as coordinate vectors).
///
/// Ideals are computed as subspace closures, so this is only for small
/// algebras. Used both for unusual generator orders and as a test oracle.
pub fn check_hypothesis1_generic<A: FiniteAlgebra>(alg: &A, gens: &[Vec<Scalar>], label: &str) -> HypothesisReport {
    let f = alg.field().clone();
    let p = f.p();
    let d = alg.dim();
    let m = gens.len();
    let mul = |a: &[Scalar], b: &[Scalar]| alg.mul_vec(a, b);
    let sub = |a: &[Scalar], b: &[Scalar]| -> Vec<Scalar> { a.iter().zip(b).map(|(&x, &y)| f.sub(x, y)).collect() };
    let zero = |v: &[Scalar]| v.iter().all(|&x| x == 0);
    let mut one = vec![0; d];
    // the identity is the basis element fixed by left multiplication with everything
    let id = (0..d).find(|&i| (0..d).all(|j| alg.mul_basis(i, j) == vec![(j, 1)])).unwrap_or(0);
    one[id] = 1;
    let pow = |x: &[Scalar], k: u32| -> Vec<Scalar> {
        let mut acc = one.clone();
        for _ in 0..k {
            acc = mul(&acc, x);
        }
        acc
    };
    let ideal = |from: usize| -> RowSpace {
        let mut rs = RowSpace::new(&f, d);
        let mut queue: Vec<Vec<Scalar>> = gens[from..].to_vec();
        while let Some(v) = queue.pop() {
            if rs.insert(&v) {
                for g in gens {
                    queue.push(mul(g, &v));
                    queue.push(mul(&v, g));
                }
            }
        }
        rs
    };
    let mut clauses = Vec::new();
    let a_bad = (0..m).find(|&i| !zero(&pow(&gens[i], p)));
    clauses.push(Clause::new("a", a_bad.is_none(), a_bad.map(|i| format!("g{}^p != 0", i + 1))));

    let mut b_bad = None;
    'b: for i in 0..m {
        let ii = ideal(i + 1);
        for j in 0..m {
            let c = sub(&mul(&gens[i], &gens[j]), &mul(&gens[j], &gens[i]));
            if !ii.contains(&c) {
                b_bad = Some(format!("[g{},g{}] not in I_{}", i + 1, j + 1, i + 1));
                break 'b;
            }
        }
    }
    clauses.push(Clause::new("b", b_bad.is_none(), b_bad));

    let c_bad = (0..m).find(|&j| {
        let c = sub(&mul(&gens[m - 1], &gens[j]), &mul(&gens[j], &gens[m - 1]));
        !zero(&c)
    });
    clauses.push(Clause::new("c", c_bad.is_none(), c_bad.map(|j| format!("[g{},g{}] != 0", m, j + 1))));

    // PBW monomials in the generators must form a basis
    let mut span = RowSpace::new(&f, d);
    let count = (p as u64).pow(m as u32);
    for code in 0..count {
        let mut acc = one.clone();
        let mut c = code;
        for g in gens {
            let e = (c % p as u64) as u32;
            c /= p as u64;
            for _ in 0..e {
                acc = mul(&acc, g);
            }
        }
        span.insert(&acc);
    }
    let d_ok = span.dim() == d && count as usize == d;
    clauses.push(Clause::new(
        "d",
        d_ok,
        (!d_ok).then(|| format!("monomials span {} of {} (p^n = {count})", span.dim(), d)),
    ));

    let mut annihilation = Vec::new();
    for s in 0..m {
        let mut w = one.clone();
        for g in &gens[s..] {
            w = mul(&w, &pow(g, p - 1));
        }
        let js = ideal(s);
        let ok = js.basis().iter().all(|b| zero(&mul(b, &w)));
        annihilation.push((s + 1, ok));
    }
    HypothesisReport {
        algebra: label.to_string(),
        n: m,
        clauses,
        annihilation,
        restricted: true,
        lifts: Vec::new(),
        passed: false,
    }
    .finalize()
}

/// The hypothesis check for a PBW algebra with its generators listed in the
/// given order (a permutation of `0..n`).
pub fn check_hypothesis1_ordered(alg: &PbwAlgebra, order: &[usize]) -> Option<HypothesisReport> {
    let gens = alg.generator_vectors(order)?;
    if alg.dim_small()? > 4096 {
        return None;
    }
    Some(check_hypothesis1_generic(alg, &gens, &format!("{} (reordered)", alg.id())))
}

/// The divided-power algebra with generators `γ_1, γ_p, …, γ_{p^{r-1}}`.
pub fn check_divided_power_generators(dp: &DividedPowerAlgebra) -> HypothesisReport {
    let gens: Vec<Vec<Scalar>> = (0..dp.r)
        .map(|j| {
            let mut v = vec![0; dp.dim];
            v[dp.generator_index(j)] = 1;
            v
        })
        .collect();
    check_hypothesis1_generic(dp, &gens, &dp.id())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootdata::build_root_system;

    fn upa(kind: RootType, rank: usize, p: u32) -> PbwAlgebra {
        build_restricted_enveloping(&build_root_system(kind, rank).unwrap(), p).unwrap()
    }

    #[test]
    fn lucas_matches_direct_binomials() {
        fn exact(n: u64, k: u64) -> u128 {
            let mut r: u128 = 1;
            for i in 0..k {
                r = r * (n - i) as u128 / (i + 1) as u128;
            }
            r
        }
        for p in [2u32, 3, 5, 7] {
            for n in 0..40u64 {
                for k in 0..=n {
                    assert_eq!(binom_mod(n, k, p) as u128, exact(n, k) % p as u128, "C({n},{k}) mod {p}");
                }
            }
        }
    }

    #[test]
    fn a2_p3_relation() {
        let a = upa(RootType::A, 2, 3);
        assert_eq!(a.n(), 3);
        assert_eq!(a.dim(), Some(27));
        let (u1, u2, u3) = (a.generator(0), a.generator(1), a.generator(2));
        let lhs = a.multiply(&u2, &u1);
        let u1u2 = a.multiply(&u1, &u2);
        let c = a.bracket(0, 1)[0].1;
        // u2 u1 = u1 u2 - [u1,u2]; the Chevalley sign makes [u1,u2] = ±u3
        let expected = u1u2.sub(&u3.scale(c, a.field()), a.field());
        assert_eq!(lhs, expected);
        assert!(c == 1 || c == 2);
        for j in 0..3 {
            assert!(a.commutator(&u3, &a.generator(j)).is_zero());
        }
    }

    #[test]
    fn dihedral_relation_at_p2() {
        let a = upa(RootType::A, 2, 2);
        let (u1, u2) = (a.generator(0), a.generator(1));
        let x = a.multiply(&u1, &u2);
        let y = a.multiply(&u2, &u1);
        let x2 = a.multiply(&x, &x);
        assert_eq!(x2, a.multiply(&y, &y));
        assert!(!x2.is_zero());
    }

    #[test]
    fn unit_and_socle() {
        for (k, l, p) in [(RootType::A, 2, 3), (RootType::B, 2, 2), (RootType::A, 3, 2), (RootType::G, 2, 2)] {
            let a = upa(k, l, p);
            let x = a.linear(&(0..a.n()).map(|i| (i as u32 % (p - 1)) + 1).collect::<Vec<_>>());
            assert_eq!(a.multiply(&AlgebraElement::one(), &x), x);
            assert_eq!(a.multiply(&x, &AlgebraElement::one()), x);
            let top = AlgebraElement::monomial(a.top_monomial_from(0));
            for j in 0..a.n() {
                assert!(a.multiply(&top, &a.generator(j)).is_zero());
                assert!(a.multiply(&a.generator(j), &top).is_zero());
            }
        }
    }

    #[test]
    fn brackets_match_commutators() {
        for (k, l, p) in [(RootType::B, 3, 3), (RootType::C, 3, 2), (RootType::G, 2, 5), (RootType::D, 4, 2)] {
            let a = upa(k, l, p);
            for i in 0..a.n() {
                for j in i + 1..a.n() {
                    let c = a.commutator(&a.generator(i), &a.generator(j));
                    let e = AlgebraElement::from_terms(a.bracket(i, j).iter().map(|&(t, c)| (a.gen_mono(t), c)), a.field());
                    assert_eq!(c, e);
                }
            }
        }
    }

    #[test]
    fn g2_builds_at_p2_with_vanishing_even_constants() {
        let a = upa(RootType::G, 2, 2);
        assert_eq!(a.n(), 6);
        let rs = build_root_system(RootType::G, 2).unwrap();
        let sc = rs.structure_constants();
        for (i, j, c) in sc.nonzero_pairs() {
            assert_eq!(a.bracket(i, j).is_empty(), c % 2 == 0);
        }
        // oracle: (ad u_i)^2 = 0 on generators after reduction
        for i in 0..6 {
            for j in 0..6 {
                let once = a.commutator(&a.generator(i), &a.generator(j));
                assert!(a.commutator(&a.generator(i), &once).is_zero());
            }
        }
    }

    #[test]
    fn unit_constant_b2_presentation_is_not_restricted() {
        // [u_s,u_l] = u_{s+l}, [u_s,u_{s+l}] = u_{2s+l} with all p-powers zero at p=2
        let err = PbwAlgebra::from_brackets(
            2,
            4,
            &[((0, 1), vec![(2, 1)]), ((0, 2), vec![(3, 1)])],
            vec![Vec::new(); 4],
            vec![1, 1, 2, 3],
            None,
            Origin::Presentation,
        )
        .unwrap_err();
        assert_eq!(err, AlgebraError::RestrictednessViolation { i: 1, j: 2 });
    }

    #[test]
    fn out_of_order_presentation_rejected() {
        let err = PbwAlgebra::from_brackets(2, 3, &[((1, 2), vec![(0, 1)])], vec![], vec![], None, Origin::Presentation);
        assert!(matches!(err, Err(AlgebraError::InvalidPresentation(_))));
    }

    #[test]
    fn divided_power_products() {
        let d = build_divided_power(3, 1).unwrap();
        assert_eq!(d.mul_basis(1, 1), Some((2, 2)));
        let d = build_divided_power(2, 2).unwrap();
        assert_eq!(d.mul_basis(1, 2), Some((3, 1)));
        assert_eq!(d.mul_basis(2, 2), None);
        assert_eq!(d.mul_basis(1, 1), None);
        assert!(build_divided_power(2, 16).is_err());
        // commutative, and γ_1^k = k! γ_k for k < p
        let d = build_divided_power(5, 2).unwrap();
        for i in 0..25 {
            for j in 0..25 {
                assert_eq!(d.mul_basis(i, j), d.mul_basis(j, i));
            }
        }
        let mut fact = 1u32;
        let mut v = vec![0u32; 25];
        v[0] = 1;
        let mut g1 = vec![0u32; 25];
        g1[1] = 1;
        for k in 1..5 {
            v = d.mul_vec(&v, &g1);
            fact = fact * k as u32 % 5;
            assert_eq!(v[k], fact);
        }
    }

    #[test]
    fn hypothesis_passes_small_types() {
        for (k, l) in [(RootType::A, 2), (RootType::B, 2), (RootType::G, 2), (RootType::A, 3), (RootType::C, 3)] {
            for p in [2, 3, 5] {
                let a = upa(k, l, p);
                let rep = check_hypothesis1(&a);
                assert!(rep.passed, "{k}{l} p={p}: {rep:?}");
                assert_eq!(rep.annihilation.len(), a.n());
            }
        }
    }

    #[test]
    fn generic_checker_agrees_in_natural_order() {
        for (k, l, p) in [(RootType::A, 2, 2), (RootType::A, 2, 3), (RootType::B, 2, 2), (RootType::A, 3, 2)] {
            let a = upa(k, l, p);
            let order: Vec<usize> = (0..a.n()).collect();
            let g = check_hypothesis1_ordered(&a, &order).unwrap();
            let d = check_hypothesis1(&a);
            assert!(g.passed && d.passed);
            assert_eq!(g.annihilation, d.annihilation);
        }
    }

    #[test]
    fn reversed_order_fails_centrality() {
        let a = upa(RootType::A, 2, 3);
        let rep = check_hypothesis1_ordered(&a, &[2, 1, 0]).unwrap();
        assert!(!rep.passed);
        assert!(!rep.clause("c").unwrap().passed);
    }

    #[test]
    fn divided_power_on_gamma_generators() {
        let dp = build_divided_power(2, 2).unwrap();
        let rep = check_divided_power_generators(&dp);
        // γ_1^2 = C(2,1)γ_2 = 0 and γ_2^2 = C(4,2)γ_4 = 0; the algebra is k[x,y]/(x^2,y^2)
        assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn lift_examples() {
        let a = upa(RootType::A, 2, 2);
        let (d, xp) = check_hypothesis3_lift(&a, &a.linear(&[1, 1, 0]));
        assert_eq!(d, LiftDisposition::ClauseB);
        assert_eq!(xp, a.generator(2));
        assert_eq!(check_hypothesis3_lift(&a, &a.generator(0)).0, LiftDisposition::ClauseA);
        let sweep = lift_sweep(&a);
        assert_eq!(sweep.len(), 3);
        assert!(sweep.iter().all(|r| r.disposition != LiftDisposition::Neither));
    }

    #[test]
    fn presentation_round_trip() {
        let a = upa(RootType::B, 3, 3);
        let pres = a.presentation();
        let b = PbwAlgebra::from_presentation(&pres).unwrap();
        assert_eq!(b.presentation(), pres);
        assert!(pres.brackets.keys().all(|k| k.split(',').all(|x| x.parse::<usize>().unwrap() >= 1)));
    }

    #[test]
    fn product_of_rank_one_pieces() {
        let a1 = upa(RootType::A, 1, 3);
        let a2 = upa(RootType::A, 2, 3);
        let prod = direct_product(&a2, &a1).unwrap();
        assert_eq!(prod.n(), 4);
        assert_eq!(prod.heights(), &[1, 1, 1, 2]);
        assert!(check_hypothesis1(&prod).passed);
    }
}
