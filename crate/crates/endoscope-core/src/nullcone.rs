//! Equations of the restricted nullcone `𝒱(A) = {[ā] : (Σ a_i u_i)^p = 0}`,
//! its projection forgetting the central coordinate, rational points, and a
//! line-graph connectedness certificate.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{Mono, PbwAlgebra};
use crate::exactfield::{Field, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NullconeError {
    #[error("symbolic expansion exceeded {0} terms")]
    TooLarge(usize),
    #[error("equations involve the last coordinate, so the projection is not defined")]
    DependsOnLast,
    #[error("at most {MAX_VARS} variables supported, got {0}")]
    TooManyVariables(usize),
    #[error("point enumeration over {0} points exceeds the cap")]
    EnumerationCap(u64),
}

pub const MAX_VARS: usize = 32;
const BITS: u32 = 4;
const TERM_BUDGET: usize = 40_000_000;
/// Largest projective point count enumerated explicitly.
pub const POINT_CAP: u64 = 1 << 24;
/// With the hub-star condition available, enumerate only up to this count.
const HUB_STAR_ENUM_CAP: u64 = 1 << 20;
/// Up to this many points the line graph is built on all pairs.
const PAIRWISE_CAP: usize = 6000;

/// Monomial `Π a_i^{e_i}` packed as 4-bit exponents, variable `i` at bits `4i`.
pub type ExpKey = u128;

fn exp_of(k: ExpKey, i: usize) -> u32 {
    ((k >> (BITS as usize * i)) & 0xf) as u32
}
fn var_key(i: usize) -> ExpKey {
    1u128 << (BITS as usize * i)
}
fn key_degree(k: ExpKey, n: usize) -> u32 {
    (0..n).map(|i| exp_of(k, i)).sum()
}

/// Graded lexicographic order with `a_1 > a_2 > ⋯`.
fn grlex(a: ExpKey, b: ExpKey, n: usize) -> Ordering {
    key_degree(a, n).cmp(&key_degree(b, n)).then_with(|| {
        for i in 0..n {
            match exp_of(a, i).cmp(&exp_of(b, i)) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    })
}

/// Polynomial over `F_p`, terms sorted by decreasing grlex order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    nvars: usize,
    terms: Vec<(ExpKey, Scalar)>,
}

impl Poly {
    fn from_map(nvars: usize, map: HashMap<ExpKey, Scalar>) -> Poly {
        let mut terms: Vec<_> = map.into_iter().filter(|&(_, c)| c != 0).collect();
        terms.sort_by(|a, b| grlex(b.0, a.0, nvars));
        Poly { nvars, terms }
    }
    pub fn nvars(&self) -> usize {
        self.nvars
    }
    pub fn terms(&self) -> &[(ExpKey, Scalar)] {
        &self.terms
    }
    pub fn exponents(&self, key: ExpKey) -> Vec<u32> {
        (0..self.nvars).map(|i| exp_of(key, i)).collect()
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn involves(&self, var: usize) -> bool {
        self.terms.iter().any(|&(k, _)| exp_of(k, var) != 0)
    }
    pub fn is_homogeneous_of(&self, d: u32) -> bool {
        self.terms.iter().all(|&(k, _)| key_degree(k, self.nvars) == d)
    }
    /// Scale so the leading coefficient is 1.
    pub fn monic(&self, f: &Field) -> Poly {
        let Some(&(_, lc)) = self.terms.first() else {
            return self.clone();
        };
        let inv = f.inv(lc).unwrap();
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|&(k, c)| (k, f.mul(c, inv))).collect() }
    }
    /// Value at a point whose coordinates live in `f` (which must contain
    /// the coefficient field).
    pub fn eval(&self, f: &Field, x: &[Scalar]) -> Scalar {
        let mut acc = 0;
        for &(k, c) in &self.terms {
            let mut t = c;
            for (i, &xi) in x.iter().enumerate() {
                let e = exp_of(k, i);
                if e != 0 {
                    if xi == 0 {
                        t = 0;
                        break;
                    }
                    t = f.mul(t, f.pow(xi, e as u64));
                }
            }
            acc = f.add(acc, t);
        }
        acc
    }
    /// Drop the variables from index `keep` on (they must not occur).
    fn truncate_vars(&self, keep: usize) -> Poly {
        Poly { nvars: keep, terms: self.terms.clone() }
    }
    fn var_name(i: usize, nvars: usize) -> String {
        if nvars <= 26 {
            ((b'a' + i as u8) as char).to_string()
        } else {
            format!("a{}", i + 1)
        }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (t, &(k, c)) in self.terms.iter().enumerate() {
            if t > 0 {
                f.write_str("+")?;
            }
            let mut body = String::new();
            for i in 0..self.nvars {
                let e = exp_of(k, i);
                if e > 0 {
                    body.push_str(&Self::var_name(i, self.nvars));
                    if e > 1 {
                        body.push_str(&format!("^{e}"));
                    }
                }
            }
            if c != 1 || body.is_empty() {
                write!(f, "{c}")?;
            }
            f.write_str(&body)?;
        }
        Ok(())
    }
}

/// Equations of `𝒱(A)` in the variables `a_1..a_n`.
#[derive(Clone, Debug, Serialize)]
pub struct NullconeVariety {
    pub algebra: String,
    pub p: u32,
    pub nvars: usize,
    #[serde(serialize_with = "ser_polys")]
    pub equations: Vec<Poly>,
}

/// The equations viewed in `a_1..a_{n-1}`.
#[derive(Clone, Debug, Serialize)]
pub struct ProjectedVariety {
    pub algebra: String,
    pub p: u32,
    pub nvars: usize,
    #[serde(serialize_with = "ser_polys")]
    pub equations: Vec<Poly>,
}

fn ser_polys<S: serde::Serializer>(v: &[Poly], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|p| p.to_string()))
}

/// Expand `(Σ a_i u_i)^p` with polynomial coefficients.
pub fn nullcone_equations(alg: &PbwAlgebra) -> Result<NullconeVariety, NullconeError> {
    let n = alg.n();
    if n > MAX_VARS {
        return Err(NullconeError::TooManyVariables(n));
    }
    let f = alg.field().clone();
    let p = alg.p();
    // element of A ⊗ F_p[a] as monomial -> polynomial
    let mut cur: HashMap<Mono, HashMap<ExpKey, Scalar>> = HashMap::new();
    for i in 0..n {
        cur.entry(alg.gen_mono(i)).or_default().insert(var_key(i), 1);
    }
    for _ in 1..p {
        let entries: Vec<_> = cur.into_iter().collect();
        // right-multiply each monomial by each generator in parallel, then merge
        let partial: Vec<HashMap<Mono, HashMap<ExpKey, Scalar>>> = entries
            .par_iter()
            .map(|(m, poly)| {
                let mut out: HashMap<Mono, HashMap<ExpKey, Scalar>> = HashMap::new();
                for j in 0..n {
                    let prod = alg.mono_gen(*m, j);
                    for &(m2, c) in prod.iter() {
                        let slot = out.entry(m2).or_default();
                        for (&k, &x) in poly {
                            let e = slot.entry(k + var_key(j)).or_insert(0);
                            *e = f.add(*e, f.mul(x, c));
                        }
                    }
                }
                out
            })
            .collect();
        let mut next: HashMap<Mono, HashMap<ExpKey, Scalar>> = HashMap::new();
        let mut size = 0usize;
        for part in partial {
            for (m, poly) in part {
                let slot = next.entry(m).or_default();
                for (k, x) in poly {
                    let e = slot.entry(k).or_insert(0);
                    *e = f.add(*e, x);
                }
            }
        }
        for poly in next.values_mut() {
            poly.retain(|_, c| *c != 0);
            size += poly.len();
        }
        next.retain(|_, poly| !poly.is_empty());
        if size > TERM_BUDGET {
            return Err(NullconeError::TooLarge(TERM_BUDGET));
        }
        cur = next;
    }
    let mut by_mono: Vec<(Mono, Poly)> = cur.into_iter().map(|(m, poly)| (m, Poly::from_map(n, poly).monic(&f))).collect();
    by_mono.sort_by_key(|&(m, _)| m);
    let mut equations: Vec<Poly> = Vec::new();
    for (_, poly) in by_mono {
        if !poly.is_zero() && !equations.contains(&poly) {
            equations.push(poly);
        }
    }
    equations.sort_by(cmp_polys);
    Ok(NullconeVariety { algebra: alg.id(), p, nvars: n, equations })
}

fn cmp_polys(a: &Poly, b: &Poly) -> Ordering {
    let n = a.nvars;
    for (x, y) in a.terms.iter().zip(&b.terms) {
        match grlex(y.0, x.0, n).then(x.1.cmp(&y.1)) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.terms.len().cmp(&b.terms.len())
}

impl NullconeVariety {
    pub fn contains(&self, f: &Field, x: &[Scalar]) -> bool {
        self.equations.iter().all(|e| e.eval(f, x) == 0)
    }
    pub fn projected(&self) -> Result<ProjectedVariety, NullconeError> {
        let last = self.nvars - 1;
        if self.equations.iter().any(|e| e.involves(last)) {
            return Err(NullconeError::DependsOnLast);
        }
        Ok(ProjectedVariety {
            algebra: self.algebra.clone(),
            p: self.p,
            nvars: last,
            equations: self.equations.iter().map(|e| e.truncate_vars(last)).collect(),
        })
    }
    pub fn equation_strings(&self) -> Vec<String> {
        self.equations.iter().map(|e| e.to_string()).collect()
    }
}

impl ProjectedVariety {
    pub fn contains(&self, f: &Field, x: &[Scalar]) -> bool {
        self.equations.iter().all(|e| e.eval(f, x) == 0)
    }
    pub fn equation_strings(&self) -> Vec<String> {
        self.equations.iter().map(|e| e.to_string()).collect()
    }
}

/// Number of points of `ℙ^{m-1}(F_q)`.
pub fn projective_count(q: u64, m: usize) -> Option<u64> {
    if m == 0 {
        return Some(0);
    }
    q.checked_pow(m as u32).map(|t| (t - 1) / (q - 1))
}

/// The `idx`-th canonical representative (first nonzero coordinate 1), in
/// order of the leading position and then lexicographically.
fn projective_point(q: u64, m: usize, mut idx: u64) -> Vec<Scalar> {
    let mut x = vec![0; m];
    for lead in 0..m {
        let block = q.pow((m - lead - 1) as u32);
        if idx < block {
            x[lead] = 1;
            for slot in (lead + 1..m).rev() {
                x[slot] = (idx % q) as Scalar;
                idx /= q;
            }
            return x;
        }
        idx -= block;
    }
    unreachable!("index out of range")
}

fn enumerate_points(
    f: &Field,
    m: usize,
    test: impl Fn(&[Scalar]) -> bool + Sync,
) -> Result<Vec<Vec<Scalar>>, NullconeError> {
    let q = f.q() as u64;
    let total = projective_count(q, m).ok_or(NullconeError::EnumerationCap(u64::MAX))?;
    if total > POINT_CAP {
        return Err(NullconeError::EnumerationCap(total));
    }
    Ok((0..total)
        .into_par_iter()
        .filter_map(|i| {
            let x = projective_point(q, m, i);
            test(&x).then_some(x)
        })
        .collect())
}

/// Points of `𝒱(A)` over `F_{p^e}`.
pub fn nullcone_points(var: &NullconeVariety, e: u32) -> Result<Vec<Vec<Scalar>>, NullconeError> {
    let f = Field::new(var.p, e).expect("valid field");
    enumerate_points(&f, var.nvars, |x| var.contains(&f, x))
}

/// Points of the projected variety over `F_{p^e}`.
pub fn projected_points(var: &ProjectedVariety, e: u32) -> Result<Vec<Vec<Scalar>>, NullconeError> {
    let f = Field::new(var.p, e).expect("valid field");
    enumerate_points(&f, var.nvars, |x| var.contains(&f, x))
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentReport {
    pub algebra: String,
    pub e: u32,
    /// `None` when points were not enumerated (symbolic certificate only).
    pub num_points: Option<u64>,
    pub num_components: usize,
    pub representatives: Vec<Vec<Scalar>>,
    pub method: String,
    pub note: String,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Every point of the line through `x` and `y` lies on the variety.
fn line_inside(var: &ProjectedVariety, f: &Field, x: &[Scalar], y: &[Scalar]) -> bool {
    let mut z = vec![0; x.len()];
    for t in 1..f.q() {
        for i in 0..x.len() {
            z[i] = f.add(y[i], f.mul(t, x[i]));
        }
        if !var.contains(f, &z) {
            return false;
        }
    }
    true
}

/// `u_{n-1}` commutes with every generator modulo `span(u_n)`, `u_n` is
/// central and both have vanishing p-power. For `p ≥ 3` the Jacobson
/// formula then gives `(v + t u_{n-1})^p = v^p`, so every point of 𝒱̂ is
/// joined to `[0,…,0,1]` by a line inside the variety.
pub fn hub_star_condition(alg: &PbwAlgebra) -> bool {
    let n = alg.n();
    if alg.p() < 3 || n < 2 {
        return false;
    }
    let hub = n - 2;
    let last = n - 1;
    (0..n).all(|j| {
        let hb = if j == hub { &[][..] } else if j < hub { alg.bracket(j, hub) } else { alg.bracket(hub, j) };
        let lb = if j == last { &[][..] } else { alg.bracket(j, last) };
        hb.iter().all(|&(k, _)| k == last) && lb.is_empty()
    }) && alg.ppower(hub).is_empty()
        && alg.ppower(last).is_empty()
}

fn components_generic(var: &ProjectedVariety, f: &Field, pts: &[Vec<Scalar>]) -> (usize, Vec<Vec<Scalar>>, String) {
    let n = pts.len();
    let mut uf = UnionFind::new(n);
    let method;
    if n <= PAIRWISE_CAP {
        let edges: Vec<(usize, usize)> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                (i + 1..n).filter(move |&j| line_inside(var, f, &pts[i], &pts[j])).map(move |j| (i, j))
            })
            .collect();
        for (i, j) in edges {
            uf.union(i, j);
        }
        method = "all-pairs line graph".to_string();
    } else {
        // hubs: coordinate points on the variety
        let hubs: Vec<usize> = (0..n).filter(|&i| pts[i].iter().filter(|&&c| c != 0).count() == 1).collect();
        let edges: Vec<(usize, usize)> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                hubs.iter().filter(move |&&h| h != i && line_inside(var, f, &pts[h], &pts[i])).map(move |&h| (i, h))
            })
            .collect();
        for (i, j) in edges {
            uf.union(i, j);
        }
        method = "hub line graph (subgraph; component count is an upper bound)".to_string();
    }
    let mut reps: Vec<usize> = Vec::new();
    for i in 0..n {
        if uf.find(i) == i {
            reps.push(i);
        }
    }
    (reps.len(), reps.into_iter().map(|i| pts[i].clone()).collect(), method)
}

const PROXY_NOTE: &str = "components of the line graph on rational points; \
a single component certifies connectedness, several components are evidence only";

/// Count components of the line graph on the `F_{p^e}`-points of 𝒱̂(A).
pub fn connectedness_certificate(alg: &PbwAlgebra, e: u32) -> Result<ComponentReport, NullconeError> {
    let f = Field::new(alg.p(), e).expect("valid field");
    let hub_star = hub_star_condition(alg);
    let m = alg.n().saturating_sub(1);
    let projected_total = projective_count(f.q() as u64, m).unwrap_or(u64::MAX);
    if hub_star && projected_total > HUB_STAR_ENUM_CAP {
        return Ok(hub_star_report(alg, e));
    }
    let var = match nullcone_equations(alg) {
        Ok(v) => v,
        Err(NullconeError::TooLarge(_)) if hub_star => return Ok(hub_star_report(alg, e)),
        Err(err) => return Err(err),
    };
    let proj = var.projected()?;
    let pts = projected_points(&proj, e)?;
    let (count, reps, mut method) = components_generic(&proj, &f, &pts);
    if hub_star {
        method.push_str("; hub-star condition also holds");
    }
    Ok(ComponentReport {
        algebra: alg.id(),
        e,
        num_points: Some(pts.len() as u64),
        num_components: count,
        representatives: reps,
        method,
        note: PROXY_NOTE.to_string(),
    })
}

fn hub_star_report(alg: &PbwAlgebra, e: u32) -> ComponentReport {
    let m = alg.n() - 1;
    let mut hub = vec![0; m];
    hub[m - 1] = 1;
    ComponentReport {
        algebra: alg.id(),
        e,
        num_points: None,
        num_components: 1,
        representatives: vec![hub],
        method: "hub-star: every point is joined to [0,...,0,1] by a line in the variety".to_string(),
        note: "symbolic; holds over every extension field".to_string(),
    }
}
