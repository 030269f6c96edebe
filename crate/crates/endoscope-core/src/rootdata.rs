//! Root systems of simple type in Bourbaki numbering, Chevalley structure
//! constants, and the Weyl dimension formula.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RootError {
    #[error("invalid root system type {kind}{rank}")]
    InvalidType { kind: String, rank: usize },
    #[error("rank {0} is too small (need at least 2)")]
    RankTooSmall(usize),
    #[error("weight {0:?} is not dominant")]
    NotDominant(Vec<i64>),
    #[error("weight has {got} coordinates, root system has rank {rank}")]
    WeightLength { got: usize, rank: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RootType {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl fmt::Display for RootType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RootType::A => "A",
            RootType::B => "B",
            RootType::C => "C",
            RootType::D => "D",
            RootType::E => "E",
            RootType::F => "F",
            RootType::G => "G",
        };
        f.write_str(s)
    }
}

impl FromStr for RootType {
    type Err = RootError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(RootType::A),
            "B" => Ok(RootType::B),
            "C" => Ok(RootType::C),
            "D" => Ok(RootType::D),
            "E" => Ok(RootType::E),
            "F" => Ok(RootType::F),
            "G" => Ok(RootType::G),
            other => Err(RootError::InvalidType { kind: other.to_string(), rank: 0 }),
        }
    }
}

/// Parse labels such as `"B2"`, `"E6"`, `"g2"`.
pub fn parse_label(label: &str) -> Result<(RootType, usize), RootError> {
    let label = label.trim();
    let bad = || RootError::InvalidType { kind: label.to_string(), rank: 0 };
    let mut chars = label.chars();
    let head = chars.next().ok_or_else(bad)?;
    let kind: RootType = head.to_string().parse().map_err(|_| bad())?;
    let rank: usize = chars.as_str().parse().map_err(|_| bad())?;
    Ok((kind, rank))
}

pub fn is_valid_type(kind: RootType, rank: usize) -> bool {
    match kind {
        RootType::A => (1..=8).contains(&rank),
        RootType::B => (2..=8).contains(&rank),
        RootType::C => (3..=8).contains(&rank),
        RootType::D => (4..=8).contains(&rank),
        RootType::E => (6..=8).contains(&rank),
        RootType::F => rank == 4,
        RootType::G => rank == 2,
    }
}

/// Symmetrized Cartan matrix `(α_i, α_j)` scaled to integers.
fn gram_matrix(kind: RootType, l: usize) -> Vec<Vec<i64>> {
    let mut g = vec![vec![0i64; l]; l];
    let chain = |g: &mut Vec<Vec<i64>>, norm: i64| {
        for i in 0..l {
            g[i][i] = norm;
            if i + 1 < l {
                g[i][i + 1] = -norm / 2;
                g[i + 1][i] = -norm / 2;
            }
        }
    };
    match kind {
        RootType::A => chain(&mut g, 2),
        RootType::B => {
            chain(&mut g, 2);
            g[l - 1][l - 1] = 1;
        }
        RootType::C => {
            chain(&mut g, 2);
            g[l - 1][l - 1] = 4;
            g[l - 2][l - 1] = -2;
            g[l - 1][l - 2] = -2;
        }
        RootType::D => {
            chain(&mut g, 2);
            // α_l attaches to α_{l-2}, not α_{l-1}
            g[l - 2][l - 1] = 0;
            g[l - 1][l - 2] = 0;
            g[l - 3][l - 1] = -1;
            g[l - 1][l - 3] = -1;
        }
        RootType::E => {
            for i in 0..l {
                g[i][i] = 2;
            }
            let mut edge = |a: usize, b: usize| {
                g[a - 1][b - 1] = -1;
                g[b - 1][a - 1] = -1;
            };
            edge(1, 3);
            edge(2, 4);
            edge(3, 4);
            for i in 4..l {
                edge(i, i + 1);
            }
        }
        RootType::F => {
            g = vec![vec![4, -2, 0, 0], vec![-2, 4, -2, 0], vec![0, -2, 2, -1], vec![0, 0, -1, 2]];
        }
        RootType::G => {
            g = vec![vec![2, -3], vec![-3, 6]];
        }
    }
    g
}

pub type Root = Vec<i64>;

#[derive(Debug)]
pub struct RootSystem {
    kind: RootType,
    rank: usize,
    gram: Vec<Vec<i64>>,
    positive: Vec<Root>,
    heights: Vec<usize>,
    index: HashMap<Root, usize>,
    structure: OnceLock<Arc<StructureConstants>>,
}

impl Serialize for RootSystem {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Shape<'a> {
            #[serde(rename = "type")]
            kind: String,
            rank: usize,
            positive_roots: &'a [Root],
            heights: &'a [usize],
        }
        Shape { kind: self.kind.to_string(), rank: self.rank, positive_roots: &self.positive, heights: &self.heights }
            .serialize(s)
    }
}

fn root_cache() -> &'static Mutex<HashMap<(RootType, usize), Arc<RootSystem>>> {
    static C: OnceLock<Mutex<HashMap<(RootType, usize), Arc<RootSystem>>>> = OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Build (or fetch from the process-wide cache) the root system of the given type.
pub fn build_root_system(kind: RootType, rank: usize) -> Result<Arc<RootSystem>, RootError> {
    if !is_valid_type(kind, rank) {
        return Err(RootError::InvalidType { kind: kind.to_string(), rank });
    }
    let mut cache = root_cache().lock().unwrap();
    if let Some(rs) = cache.get(&(kind, rank)) {
        return Ok(rs.clone());
    }
    let rs = Arc::new(RootSystem::generate(kind, rank));
    cache.insert((kind, rank), rs.clone());
    Ok(rs)
}

/// Canonical order: ascending height, ties broken so that `α_1` precedes `α_2`
/// (descending lexicographic order of coefficient vectors).
fn root_order(a: &Root, b: &Root) -> std::cmp::Ordering {
    let ha: i64 = a.iter().sum();
    let hb: i64 = b.iter().sum();
    ha.cmp(&hb).then_with(|| b.cmp(a))
}

impl RootSystem {
    fn generate(kind: RootType, l: usize) -> RootSystem {
        let gram = gram_matrix(kind, l);
        let mut all: Vec<Root> = Vec::new();
        let mut set: HashMap<Root, ()> = HashMap::new();
        let mut layer: Vec<Root> = (0..l)
            .map(|i| {
                let mut r = vec![0; l];
                r[i] = 1;
                r
            })
            .collect();
        while !layer.is_empty() {
            for r in &layer {
                set.insert(r.clone(), ());
            }
            all.extend(layer.iter().cloned());
            let mut next: Vec<Root> = Vec::new();
            for beta in &layer {
                for i in 0..l {
                    // α_i-string through β: q = p - <β, α_i^∨>
                    let mut p = 0;
                    let mut probe = beta.clone();
                    loop {
                        probe[i] -= 1;
                        if set.contains_key(&probe) {
                            p += 1;
                        } else {
                            break;
                        }
                    }
                    let pairing = 2 * (0..l).map(|j| beta[j] * gram[j][i]).sum::<i64>() / gram[i][i];
                    if p - pairing > 0 {
                        let mut up = beta.clone();
                        up[i] += 1;
                        if !next.contains(&up) {
                            next.push(up);
                        }
                    }
                }
            }
            layer = next;
        }
        all.sort_by(root_order);
        let heights = all.iter().map(|r| r.iter().sum::<i64>() as usize).collect();
        let index = all.iter().enumerate().map(|(i, r)| (r.clone(), i)).collect();
        RootSystem { kind, rank: l, gram, positive: all, heights, index, structure: OnceLock::new() }
    }

    pub fn kind(&self) -> RootType {
        self.kind
    }
    pub fn rank(&self) -> usize {
        self.rank
    }
    pub fn label(&self) -> String {
        format!("{}{}", self.kind, self.rank)
    }
    pub fn positive_roots(&self) -> &[Root] {
        &self.positive
    }
    pub fn num_positive(&self) -> usize {
        self.positive.len()
    }
    pub fn heights(&self) -> &[usize] {
        &self.heights
    }
    pub fn height(&self, i: usize) -> usize {
        self.heights[i]
    }
    pub fn index_of(&self, r: &[i64]) -> Option<usize> {
        self.index.get(r).copied()
    }
    pub fn is_positive_root(&self, r: &[i64]) -> bool {
        self.index.contains_key(r)
    }
    pub fn is_root(&self, r: &[i64]) -> bool {
        if r.iter().all(|&c| c >= 0) {
            self.is_positive_root(r)
        } else if r.iter().all(|&c| c <= 0) {
            let neg: Root = r.iter().map(|c| -c).collect();
            self.is_positive_root(&neg)
        } else {
            false
        }
    }
    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }
    pub fn inner(&self, a: &[i64], b: &[i64]) -> i64 {
        let l = self.rank;
        let mut s = 0;
        for i in 0..l {
            if a[i] == 0 {
                continue;
            }
            for j in 0..l {
                s += a[i] * self.gram[i][j] * b[j];
            }
        }
        s
    }
    /// `<β, α^∨> = 2(β,α)/(α,α)`.
    pub fn pairing(&self, beta: &[i64], alpha: &[i64]) -> i64 {
        2 * self.inner(beta, alpha) / self.inner(alpha, alpha)
    }
    pub fn highest_root(&self) -> &Root {
        self.positive.last().unwrap()
    }
    pub fn max_height(&self) -> usize {
        *self.heights.last().unwrap()
    }

    /// Largest `k` with `β - kα` a root.
    pub fn string_down(&self, alpha: &[i64], beta: &[i64]) -> i64 {
        let mut k = 0;
        let mut probe: Root = beta.to_vec();
        loop {
            for (x, a) in probe.iter_mut().zip(alpha) {
                *x -= a;
            }
            if self.is_root(&probe) && probe.iter().any(|&c| c != 0) {
                k += 1;
            } else {
                return k;
            }
        }
    }

    /// The Chevalley structure constants, computed once and memoized.
    pub fn structure_constants(&self) -> Arc<StructureConstants> {
        self.structure.get_or_init(|| Arc::new(StructureConstants::compute(self))).clone()
    }

    /// `⟨λ+ρ, α^∨⟩ / ⟨ρ, α^∨⟩` multiplied over all positive roots.
    pub fn weyl_dimension(&self, lambda: &[i64]) -> Result<BigUint, RootError> {
        if lambda.len() != self.rank {
            return Err(RootError::WeightLength { got: lambda.len(), rank: self.rank });
        }
        if lambda.iter().any(|&x| x < 0) {
            return Err(RootError::NotDominant(lambda.to_vec()));
        }
        let mut num = BigUint::one();
        let mut den = BigUint::one();
        for r in &self.positive {
            // (α,α) cancels between numerator and denominator
            let mut a = 0u64;
            let mut b = 0u64;
            for i in 0..self.rank {
                let w = (r[i] * self.gram[i][i]) as u64;
                a += w * (lambda[i] as u64 + 1);
                b += w;
            }
            num *= a;
            den *= b;
        }
        debug_assert!((&num % &den) == BigUint::from(0u32));
        Ok(num / den)
    }

    /// The three roots of greatest height in ascending order.
    ///
    /// When two roots share the next-to-maximal height (type A) they are
    /// returned in canonical root order; otherwise `β_1` is the lexicographically
    /// least root of height `h-2` that reaches `β_2` by a simple root `α_i` such
    /// that `α_i + α_j` is a root, where `β_3 = β_2 + α_j`.
    pub fn top_three_roots(&self) -> Result<[Root; 3], RootError> {
        if self.rank < 2 {
            return Err(RootError::RankTooSmall(self.rank));
        }
        let h = self.max_height();
        let beta3 = self.highest_root().clone();
        let at = |ht: usize| -> Vec<&Root> {
            self.positive.iter().zip(&self.heights).filter(|(_, &x)| x == ht).map(|(r, _)| r).collect()
        };
        let below = at(h - 1);
        if below.len() >= 2 {
            return Ok([below[0].clone(), below[1].clone(), beta3]);
        }
        let beta2 = below[0].clone();
        let diff = |a: &Root, b: &Root| -> Root { a.iter().zip(b).map(|(x, y)| x - y).collect() };
        let aj = diff(&beta3, &beta2);
        let mut cands = at(h - 2);
        cands.sort();
        for cand in cands {
            let ai = diff(&beta2, cand);
            let sum: Root = ai.iter().zip(&aj).map(|(x, y)| x + y).collect();
            if self.is_positive_root(&sum) && ai.iter().all(|&c| c >= 0) {
                return Ok([cand.clone(), beta2, beta3]);
            }
        }
        let fallback = at(h - 2)[0].clone();
        Ok([fallback, beta2, beta3])
    }

    /// Classical count of positive roots.
    pub fn expected_num_positive(kind: RootType, l: usize) -> usize {
        match kind {
            RootType::A => l * (l + 1) / 2,
            RootType::B | RootType::C => l * l,
            RootType::D => l * (l - 1),
            RootType::E => match l {
                6 => 36,
                7 => 63,
                _ => 120,
            },
            RootType::F => 24,
            RootType::G => 6,
        }
    }
}

/// Integer structure constants `[e_α, e_β] = N_{α,β} e_{α+β}` on positive roots.
#[derive(Debug, Clone)]
pub struct StructureConstants {
    n: usize,
    table: HashMap<(usize, usize), i64>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
struct Frac(i64, i64);

impl Frac {
    fn new(n: i64, d: i64) -> Frac {
        let g = gcd(n.abs(), d.abs()).max(1);
        let s = if d < 0 { -1 } else { 1 };
        Frac(s * n / g, s * d / g)
    }
    fn add(self, o: Frac) -> Frac {
        Frac::new(self.0 * o.1 + o.0 * self.1, self.1 * o.1)
    }
    fn mul(self, o: Frac) -> Frac {
        Frac::new(self.0 * o.0, self.1 * o.1)
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl StructureConstants {
    /// Extraspecial-pair algorithm: on each extraspecial pair `N = +(p+1)`,
    /// every other constant follows from the four-root relation and the
    /// three-root cyclic identity.
    fn compute(rs: &RootSystem) -> StructureConstants {
        let n = rs.num_positive();
        let roots = rs.positive_roots();
        let mut sc = StructureConstants { n, table: HashMap::new() };
        let add = |a: &Root, b: &Root| -> Root { a.iter().zip(b).map(|(x, y)| x + y).collect() };
        // process positive roots ζ in height order
        for (z, zeta) in roots.iter().enumerate() {
            let mut special: Vec<(usize, usize)> = Vec::new();
            for i in 0..z {
                for j in i + 1..z {
                    if add(&roots[i], &roots[j]) == *zeta {
                        special.push((i, j));
                    }
                }
            }
            if special.is_empty() {
                continue;
            }
            let (a, b) = special[0];
            let p = rs.string_down(&roots[a], &roots[b]);
            sc.table.insert((a, b), p + 1);
            sc.table.insert((b, a), -(p + 1));
            let nab = p + 1;
            let zz = rs.inner(zeta, zeta);
            for &(x, y) in &special[1..] {
                let alpha = &roots[a];
                let beta = &roots[b];
                let xi = &roots[x];
                let eta = &roots[y];
                let neg = |r: &Root| -> Root { r.iter().map(|c| -c).collect() };
                let term = |s1: &Root, s2: &Root, s3: &Root, s4: &Root| -> Frac {
                    // N_{s1,s2} N_{s3,s4} / (s1+s2, s1+s2)
                    let sum = add(s1, s2);
                    if !rs.is_root(&sum) {
                        return Frac(0, 1);
                    }
                    let n1 = sc.general(rs, s1, s2);
                    let n2 = sc.general(rs, s3, s4);
                    Frac::new(n1 * n2, rs.inner(&sum, &sum))
                };
                let t2 = term(beta, &neg(xi), alpha, &neg(eta));
                let t3 = term(&neg(xi), alpha, beta, &neg(eta));
                let val = Frac::new(zz, nab).mul(t2.add(t3));
                assert_eq!(val.1, 1, "non-integral structure constant");
                sc.table.insert((x, y), val.0);
                sc.table.insert((y, x), -val.0);
            }
        }
        sc
    }

    /// `N_{r,s}` for arbitrary roots, using `N_{-r,-s} = -N_{r,s}` and the
    /// cyclic identity `N_{r,s}/(t,t) = N_{s,t}/(r,r) = N_{t,r}/(s,s)` when `r+s+t = 0`.
    fn general(&self, rs: &RootSystem, r: &[i64], s: &[i64]) -> i64 {
        let sum: Root = r.iter().zip(s).map(|(x, y)| x + y).collect();
        if !rs.is_root(&sum) || sum.iter().all(|&c| c == 0) {
            return 0;
        }
        let pos = |v: &[i64]| v.iter().all(|&c| c >= 0);
        let neg = |v: &[i64]| -> Root { v.iter().map(|c| -c).collect() };
        match (pos(r), pos(s)) {
            (true, true) => self.get(rs.index_of(r).unwrap(), rs.index_of(s).unwrap()),
            (false, false) => -self.get(rs.index_of(&neg(r)).unwrap(), rs.index_of(&neg(s)).unwrap()),
            _ => {
                let t = neg(&sum);
                let tt = rs.inner(&t, &t);
                // pick the pair among (s,t), (t,r) whose members share a sign
                if pos(&t) == pos(s) {
                    let v = self.general(rs, s, &t) * tt;
                    let rr = rs.inner(r, r);
                    debug_assert_eq!(v % rr, 0);
                    v / rr
                } else {
                    let v = self.general(rs, &t, r) * tt;
                    let ss = rs.inner(s, s);
                    debug_assert_eq!(v % ss, 0);
                    v / ss
                }
            }
        }
    }

    /// `N_{i,j}` for positive root indices; zero when `α_i + α_j` is not a root.
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.table.get(&(i, j)).copied().unwrap_or(0)
    }

    pub fn num_roots(&self) -> usize {
        self.n
    }

    /// All nonzero `(i, j, N)` with `i < j`.
    pub fn nonzero_pairs(&self) -> Vec<(usize, usize, i64)> {
        let mut v: Vec<_> = self.table.iter().filter(|((i, j), _)| i < j).map(|(&(i, j), &c)| (i, j, c)).collect();
        v.sort();
        v
    }
}
