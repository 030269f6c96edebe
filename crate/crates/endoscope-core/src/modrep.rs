//! Finite-dimensional modules given by action matrices of algebra generators.
//!
//! Both algebra families have a monomial basis `g_1^{e_1} ⋯ g_n^{e_n}`
//! (`e_i < p`) in their generators: PBW monomials for `u(𝔲)`, and
//! `x_0^{e_0} ⋯ x_{r-1}^{e_{r-1}}` for divided powers, where `x_j = γ_{p^j}`
//! and the monomial is a nonzero multiple of `γ_{Σ e_j p^j}`. Everything
//! that only needs the algebra structure works with that basis; tensor
//! products and duals use the Hopf structure of each family.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{binom_mod, AlgebraElement, DividedPowerAlgebra, PbwAlgebra};
use crate::exactfield::{nilpotent_jordan_type, Field, JordanType, Matrix, RowSpace, Scalar};
use crate::rootdata::RootType;
use crate::algebra::Origin;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModError {
    #[error("relation violated: {0}")]
    RelationViolation(String),
    #[error("modules live over different algebras")]
    AlgebraMismatch,
    #[error("modules live over different fields")]
    FieldMismatch,
    #[error("expected {expected} action matrices of size {dim}, got {got}")]
    Shape { expected: usize, dim: usize, got: String },
    #[error("projective splitting failed: {0}")]
    SplittingFailure(String),
    #[error("isomorphism test inconclusive: {0}")]
    Inconclusive(String),
    #[error("operation needs a {0} algebra")]
    WrongAlgebraKind(&'static str),
}

#[derive(Clone)]
pub enum AlgebraRef {
    Pbw(Arc<PbwAlgebra>),
    DividedPower(Arc<DividedPowerAlgebra>),
}

impl fmt::Debug for AlgebraRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl PartialEq for AlgebraRef {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (AlgebraRef::Pbw(a), AlgebraRef::Pbw(b)) => Arc::ptr_eq(a, b) || a.presentation() == b.presentation(),
            (AlgebraRef::DividedPower(a), AlgebraRef::DividedPower(b)) => a.p() == b.p() && a.r() == b.r(),
            _ => false,
        }
    }
}

impl From<Arc<PbwAlgebra>> for AlgebraRef {
    fn from(a: Arc<PbwAlgebra>) -> Self {
        AlgebraRef::Pbw(a)
    }
}
impl From<Arc<DividedPowerAlgebra>> for AlgebraRef {
    fn from(a: Arc<DividedPowerAlgebra>) -> Self {
        AlgebraRef::DividedPower(a)
    }
}

impl AlgebraRef {
    pub fn p(&self) -> u32 {
        match self {
            AlgebraRef::Pbw(a) => a.p(),
            AlgebraRef::DividedPower(a) => a.p(),
        }
    }
    pub fn num_generators(&self) -> usize {
        match self {
            AlgebraRef::Pbw(a) => a.n(),
            AlgebraRef::DividedPower(a) => a.num_generators(),
        }
    }
    /// `p^n`; panics if the algebra is too large for dense module work.
    pub fn dim(&self) -> usize {
        (self.p() as usize).checked_pow(self.num_generators() as u32).expect("algebra dimension overflow")
    }
    pub fn id(&self) -> String {
        match self {
            AlgebraRef::Pbw(a) => a.id(),
            AlgebraRef::DividedPower(a) => a.id(),
        }
    }
    pub fn prime_field(&self) -> Field {
        Field::prime(self.p()).unwrap()
    }
    pub fn as_pbw(&self) -> Option<&Arc<PbwAlgebra>> {
        match self {
            AlgebraRef::Pbw(a) => Some(a),
            _ => None,
        }
    }
    pub fn as_divided_power(&self) -> Option<&Arc<DividedPowerAlgebra>> {
        match self {
            AlgebraRef::DividedPower(a) => Some(a),
            _ => None,
        }
    }
    fn digits(&self, m: usize) -> Vec<u32> {
        let p = self.p() as usize;
        let mut c = m;
        (0..self.num_generators())
            .map(|_| {
                let d = (c % p) as u32;
                c /= p;
                d
            })
            .collect()
    }
    /// Left multiplication by generator `i` on the monomial basis.
    fn left_regular(&self, i: usize, m: usize) -> Vec<(usize, Scalar)> {
        match self {
            AlgebraRef::Pbw(a) => a.mono_mul(a.gen_mono(i), m as u64).iter().map(|&(t, c)| (t as usize, c)).collect(),
            AlgebraRef::DividedPower(a) => {
                let p = a.p() as usize;
                let w = p.pow(i as u32);
                if (m / w) % p + 1 < p {
                    vec![(m + w, 1)]
                } else {
                    vec![]
                }
            }
        }
    }
}

/// Sparse row-major view of a matrix, for repeated matrix-vector products.
#[derive(Clone, Debug)]
pub struct SparseMat {
    field: Field,
    rows: Vec<Vec<(usize, Scalar)>>,
    cols: usize,
}

impl SparseMat {
    pub fn from_dense(m: &Matrix) -> SparseMat {
        let rows = (0..m.rows())
            .map(|i| m.row(i).iter().enumerate().filter(|(_, &x)| x != 0).map(|(j, &x)| (j, x)).collect())
            .collect();
        SparseMat { field: m.field().clone(), rows, cols: m.cols() }
    }
    pub fn apply(&self, v: &[Scalar]) -> Vec<Scalar> {
        let f = &self.field;
        if f.is_prime_field() {
            let p = f.p() as u64;
            self.rows
                .iter()
                .map(|row| {
                    let mut acc = 0u64;
                    for &(j, x) in row {
                        acc += x as u64 * v[j] as u64;
                    }
                    (acc % p) as u32
                })
                .collect()
        } else {
            self.rows
                .iter()
                .map(|row| row.iter().fold(0, |acc, &(j, x)| f.add(acc, f.mul(x, v[j]))))
                .collect()
        }
    }
    /// Row vector times matrix.
    pub fn apply_left(&self, v: &[Scalar]) -> Vec<Scalar> {
        let f = &self.field;
        let mut out = vec![0; self.cols];
        for (i, row) in self.rows.iter().enumerate() {
            let c = v[i];
            if c == 0 {
                continue;
            }
            for &(j, x) in row {
                out[j] = f.add(out[j], f.mul(c, x));
            }
        }
        out
    }
}

#[derive(Clone)]
pub struct ModuleRep {
    algebra: AlgebraRef,
    field: Field,
    dim: usize,
    mats: Vec<Matrix>,
}

impl fmt::Debug for ModuleRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ModuleRep(dim {} over {} / {:?})", self.dim, self.algebra.id(), self.field)
    }
}

#[derive(Serialize)]
struct ModuleJson<'a> {
    algebra_id: String,
    field: String,
    dim: usize,
    matrices: Vec<&'a [Scalar]>,
}

impl Serialize for ModuleRep {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ModuleJson {
            algebra_id: self.algebra.id(),
            field: format!("{:?}", self.field),
            dim: self.dim,
            matrices: self.mats.iter().map(|m| m.data()).collect(),
        }
        .serialize(s)
    }
}

fn is_zero_vec(v: &[Scalar]) -> bool {
    v.iter().all(|&x| x == 0)
}

impl ModuleRep {
    /// Validated module from action matrices of the generators.
    pub fn new(algebra: AlgebraRef, mats: Vec<Matrix>) -> Result<ModuleRep, ModError> {
        let n = algebra.num_generators();
        let dim = mats.first().map_or(0, |m| m.rows());
        let field = mats.first().map_or_else(|| algebra.prime_field(), |m| m.field().clone());
        if mats.len() != n || mats.iter().any(|m| m.rows() != dim || m.cols() != dim) {
            return Err(ModError::Shape {
                expected: n,
                dim,
                got: format!("{:?}", mats.iter().map(|m| (m.rows(), m.cols())).collect::<Vec<_>>()),
            });
        }
        if field.p() != algebra.p() || mats.iter().any(|m| *m.field() != field) {
            return Err(ModError::FieldMismatch);
        }
        let m = ModuleRep { algebra, field, dim, mats };
        m.validate()?;
        Ok(m)
    }

    /// Empty-dimension module (`M = 0`).
    pub fn zero(algebra: &AlgebraRef, field: &Field) -> ModuleRep {
        let mats = (0..algebra.num_generators()).map(|_| Matrix::zeros(field, 0, 0)).collect();
        ModuleRep { algebra: algebra.clone(), field: field.clone(), dim: 0, mats }
    }

    /// `d` copies of the trivial module.
    pub fn trivial(algebra: &AlgebraRef, d: usize) -> ModuleRep {
        let f = algebra.prime_field();
        let mats = (0..algebra.num_generators()).map(|_| Matrix::zeros(&f, d, d)).collect();
        ModuleRep { algebra: algebra.clone(), field: f, dim: d, mats }
    }

    /// Left regular module on the monomial basis.
    pub fn regular(algebra: &AlgebraRef) -> ModuleRep {
        let f = algebra.prime_field();
        let d = algebra.dim();
        let mats = (0..algebra.num_generators())
            .map(|i| {
                let mut m = Matrix::zeros(&f, d, d);
                for col in 0..d {
                    for (row, c) in algebra.left_regular(i, col) {
                        m.set(row, col, c);
                    }
                }
                m
            })
            .collect();
        ModuleRep { algebra: algebra.clone(), field: f, dim: d, mats }
    }

    fn validate(&self) -> Result<(), ModError> {
        let f = &self.field;
        let p = self.algebra.p();
        match &self.algebra {
            AlgebraRef::Pbw(a) => {
                let n = a.n();
                for i in 0..n {
                    for j in i + 1..n {
                        let lhs = self.mats[i].commutator(&self.mats[j]);
                        let mut rhs = Matrix::zeros(f, self.dim, self.dim);
                        for &(k, c) in a.bracket(i, j) {
                            rhs.add_scaled(&self.mats[k], c);
                        }
                        if lhs != rhs {
                            return Err(ModError::RelationViolation(format!("[u{},u{}]", i + 1, j + 1)));
                        }
                    }
                    let lhs = self.mats[i].pow(p);
                    let mut rhs = Matrix::zeros(f, self.dim, self.dim);
                    for &(k, c) in a.ppower(i) {
                        rhs.add_scaled(&self.mats[k], c);
                    }
                    if lhs != rhs {
                        return Err(ModError::RelationViolation(format!("u{}^p", i + 1)));
                    }
                }
            }
            AlgebraRef::DividedPower(a) => {
                let r = a.num_generators();
                for i in 0..r {
                    for j in i + 1..r {
                        if !self.mats[i].commutator(&self.mats[j]).is_zero() {
                            return Err(ModError::RelationViolation(format!("[x{i},x{j}]")));
                        }
                    }
                    if !self.mats[i].pow(p).is_zero() {
                        return Err(ModError::RelationViolation(format!("x{i}^p")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn algebra(&self) -> &AlgebraRef {
        &self.algebra
    }
    pub fn field(&self) -> &Field {
        &self.field
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn matrices(&self) -> &[Matrix] {
        &self.mats
    }
    pub fn matrix(&self, i: usize) -> &Matrix {
        &self.mats[i]
    }

    /// Same module with scalars extended to `K ⊇ F_p`.
    pub fn extend_scalars(&self, k: &Field) -> ModuleRep {
        if *k == self.field {
            return self.clone();
        }
        assert!(self.field.is_prime_field(), "only prime-field modules can be extended");
        let mats = self.mats.iter().map(|m| m.over(k)).collect();
        ModuleRep { algebra: self.algebra.clone(), field: k.clone(), dim: self.dim, mats }
    }

    fn same_context(&self, other: &ModuleRep) -> Result<(), ModError> {
        if self.algebra != other.algebra {
            return Err(ModError::AlgebraMismatch);
        }
        if self.field != other.field {
            return Err(ModError::FieldMismatch);
        }
        Ok(())
    }

    pub fn direct_sum(&self, other: &ModuleRep) -> Result<ModuleRep, ModError> {
        self.same_context(other)?;
        let d = self.dim + other.dim;
        let mats = self
            .mats
            .iter()
            .zip(&other.mats)
            .map(|(a, b)| {
                let mut m = Matrix::zeros(&self.field, d, d);
                for i in 0..self.dim {
                    for j in 0..self.dim {
                        m.set(i, j, a.get(i, j));
                    }
                }
                for i in 0..other.dim {
                    for j in 0..other.dim {
                        m.set(self.dim + i, self.dim + j, b.get(i, j));
                    }
                }
                m
            })
            .collect();
        Ok(ModuleRep { algebra: self.algebra.clone(), field: self.field.clone(), dim: d, mats })
    }

    /// `ρ(γ_i)` for a divided-power module: `Π_j ρ(x_j)^{i_j} / i_j!`.
    pub fn gamma_matrix(&self, i: usize) -> Matrix {
        let a = self.algebra.as_divided_power().expect("divided-power module");
        let f = &self.field;
        let digits = self.algebra.digits(i);
        assert!(i < a.dim());
        let mut acc = Matrix::identity(f, self.dim);
        let mut fact = 1u32;
        for (j, &e) in digits.iter().enumerate() {
            for k in 1..=e {
                acc = self.mats[j].mul(&acc);
                fact = f.mul(fact, f.from_i64(k as i64));
            }
        }
        acc.scale(f.inv(fact).unwrap())
    }

    /// Action matrix of a monomial in the generators.
    pub fn monomial_matrix(&self, m: usize) -> Matrix {
        let digits = self.algebra.digits(m);
        let mut acc = Matrix::identity(&self.field, self.dim);
        for (i, &e) in digits.iter().enumerate().rev() {
            for _ in 0..e {
                acc = self.mats[i].mul(&acc);
            }
        }
        acc
    }

    /// Action of a PBW algebra element, coefficients read in the module's field.
    pub fn element_matrix(&self, x: &AlgebraElement) -> Matrix {
        let mut acc = Matrix::zeros(&self.field, self.dim, self.dim);
        for (m, c) in x.terms() {
            acc.add_scaled(&self.monomial_matrix(m as usize), c);
        }
        acc
    }

    /// `Σ a_i ρ(g_i)`.
    pub fn linear_combination(&self, coeffs: &[Scalar]) -> Matrix {
        let mut acc = Matrix::zeros(&self.field, self.dim, self.dim);
        for (m, &c) in self.mats.iter().zip(coeffs) {
            acc.add_scaled(m, c);
        }
        acc
    }

    pub fn sparse_generators(&self) -> Vec<SparseMat> {
        self.mats.iter().map(SparseMat::from_dense).collect()
    }
}

/// Construct and validate a module.
pub fn make_module(algebra: &AlgebraRef, mats: Vec<Matrix>) -> Result<ModuleRep, ModError> {
    ModuleRep::new(algebra.clone(), mats)
}

pub fn tensor(m: &ModuleRep, n: &ModuleRep) -> Result<ModuleRep, ModError> {
    m.same_context(n)?;
    let f = &m.field;
    let (im, in_) = (Matrix::identity(f, m.dim), Matrix::identity(f, n.dim));
    let mats = match &m.algebra {
        AlgebraRef::Pbw(_) => m.mats.iter().zip(&n.mats).map(|(a, b)| a.kron(&in_).add(&im.kron(b))).collect(),
        AlgebraRef::DividedPower(a) => (0..a.num_generators())
            .map(|j| {
                let t = a.generator_index(j as u32);
                let mut acc = Matrix::zeros(f, m.dim * n.dim, m.dim * n.dim);
                for i in 0..=t {
                    let (x, y) = (m.gamma_matrix(i), n.gamma_matrix(t - i));
                    if !x.is_zero() && !y.is_zero() {
                        acc = acc.add(&x.kron(&y));
                    }
                }
                acc
            })
            .collect(),
    };
    Ok(ModuleRep { algebra: m.algebra.clone(), field: f.clone(), dim: m.dim * n.dim, mats })
}

pub fn dual(m: &ModuleRep) -> ModuleRep {
    let mats = match &m.algebra {
        AlgebraRef::Pbw(_) => m.mats.iter().map(|a| a.transpose().neg()).collect(),
        AlgebraRef::DividedPower(a) => (0..a.num_generators())
            .map(|j| {
                let t = m.mats[j].transpose();
                if a.generator_index(j as u32) % 2 == 1 {
                    t.neg()
                } else {
                    t
                }
            })
            .collect(),
    };
    ModuleRep { algebra: m.algebra.clone(), field: m.field.clone(), dim: m.dim, mats }
}

/// Pull back along a map from `source` into the PBW algebra of `m`, given by
/// the images of the source generators.
pub fn restrict_along(m: &ModuleRep, source: &AlgebraRef, images: &[AlgebraElement]) -> Result<ModuleRep, ModError> {
    if m.algebra.as_pbw().is_none() {
        return Err(ModError::WrongAlgebraKind("PBW"));
    }
    if images.len() != source.num_generators() {
        return Err(ModError::Shape {
            expected: source.num_generators(),
            dim: m.dim,
            got: format!("{} images", images.len()),
        });
    }
    let mats = images.iter().map(|x| m.element_matrix(x)).collect();
    ModuleRep::new(source.clone(), mats)
}

/// Common kernel of the listed generators, with the induced action of all
/// generators (validated).
pub fn invariants(m: &ModuleRep, gens: &[usize]) -> Result<ModuleRep, ModError> {
    let f = &m.field;
    let mut stacked = Matrix::zeros(f, 0, m.dim);
    for &g in gens {
        stacked = stacked.vstack(&m.mats[g]);
    }
    let basis = stacked.nullspace();
    let sub = restrict_to_subspace(m, &basis)
        .ok_or_else(|| ModError::RelationViolation("fixed points are not stable under the action".into()))?;
    sub.validate()?;
    Ok(sub)
}

/// Induced action on the subspace spanned by the columns of `basis`, or
/// `None` if the subspace is not invariant.
pub fn restrict_to_subspace(m: &ModuleRep, basis: &Matrix) -> Option<ModuleRep> {
    let k = basis.cols();
    let f = &m.field;
    if k == 0 {
        return Some(ModuleRep::zero(&m.algebra, f));
    }
    let rows = basis.transpose().pivot_columns();
    let bp = basis.select_rows(&rows);
    let inv = bp.inverse()?;
    let mut mats = Vec::with_capacity(m.mats.len());
    for g in &m.mats {
        let image = g.mul(basis);
        let x = inv.mul(&image.select_rows(&rows));
        if basis.mul(&x) != image {
            return None;
        }
        mats.push(x);
    }
    Some(ModuleRep { algebra: m.algebra.clone(), field: f.clone(), dim: k, mats })
}

/// Induced action on `M / S` where `S` is spanned by the columns of `basis`
/// (assumed invariant).
pub fn quotient(m: &ModuleRep, basis: &Matrix) -> ModuleRep {
    let f = &m.field;
    let mut rs = RowSpace::new(f, m.dim);
    for j in 0..basis.cols() {
        rs.insert(&basis.column(j));
    }
    let mut comp = Vec::new();
    for c in 0..m.dim {
        let mut e = vec![0; m.dim];
        e[c] = 1;
        if rs.insert(&e) {
            comp.push(c);
        }
    }
    // coordinates with respect to [S | e_comp]
    let mut full = basis.clone();
    for &c in &comp {
        let mut e = vec![0; m.dim];
        e[c] = 1;
        full = full.hstack(&Matrix::from_columns(f, m.dim, &[e]));
    }
    let inv = full.inverse().expect("completed basis");
    let s = basis.cols();
    let q = comp.len();
    let mats = m
        .mats
        .iter()
        .map(|g| {
            let coords = inv.mul(&g.mul(&full));
            let mut out = Matrix::zeros(f, q, q);
            for i in 0..q {
                for j in 0..q {
                    out.set(i, j, coords.get(s + i, s + j));
                }
            }
            out
        })
        .collect();
    ModuleRep { algebra: m.algebra.clone(), field: f.clone(), dim: q, mats }
}

/// Apply `ρ(socle monomial)` to `v`, right-to-left: `g_n^{p-1}` first.
fn apply_socle(gens: &[SparseMat], p: u32, v: &[Scalar]) -> Vec<Scalar> {
    let mut w = v.to_vec();
    for g in gens.iter().rev() {
        for _ in 0..p - 1 {
            if is_zero_vec(&w) {
                return w;
            }
            w = g.apply(&w);
        }
    }
    w
}

/// Rank of the socle element's action: the number of free summands.
pub fn free_rank(m: &ModuleRep) -> usize {
    if m.dim == 0 {
        return 0;
    }
    let gens = m.sparse_generators();
    let p = m.algebra.p();
    let mut rs = RowSpace::new(&m.field, m.dim);
    for c in 0..m.dim {
        let mut e = vec![0; m.dim];
        e[c] = 1;
        let w = apply_socle(&gens, p, &e);
        if !is_zero_vec(&w) {
            rs.insert(&w);
        }
    }
    rs.dim()
}

/// `ρ(b) v` for every monomial `b`, indexed by monomial.
fn orbit_vectors(m: &ModuleRep, gens: &[SparseMat], v: &[Scalar]) -> Vec<Vec<Scalar>> {
    let p = m.algebra.p() as usize;
    let n = m.algebra.num_generators();
    let dim_a = m.algebra.dim();
    let mut out: Vec<Vec<Scalar>> = Vec::with_capacity(dim_a);
    out.push(v.to_vec());
    for b in 1..dim_a {
        // b = g_t · b' with t the first generator present
        let mut t = 0;
        let mut w = 1usize;
        while (b / w).is_multiple_of(p) {
            t += 1;
            w *= p;
        }
        debug_assert!(t < n);
        let prev = &out[b - w];
        out.push(if is_zero_vec(prev) { vec![0; m.dim] } else { gens[t].apply(prev) });
    }
    out
}

/// `λ ρ(b)` for every monomial `b`.
fn orbit_covectors(m: &ModuleRep, gens: &[SparseMat], lam: &[Scalar]) -> Vec<Vec<Scalar>> {
    let p = m.algebra.p() as usize;
    let dim_a = m.algebra.dim();
    let mut out: Vec<Vec<Scalar>> = Vec::with_capacity(dim_a);
    out.push(lam.to_vec());
    for b in 1..dim_a {
        // b = b'' · g_t with t the last generator present
        let mut t = 0;
        let mut w = 1usize;
        let mut lw = 1usize;
        let mut lt = 0;
        while w <= b {
            if !(b / w).is_multiple_of(p) {
                lt = t;
                lw = w;
            }
            t += 1;
            w *= p;
        }
        let prev = &out[b - lw];
        out.push(if is_zero_vec(prev) { vec![0; m.dim] } else { gens[lt].apply_left(prev) });
    }
    out
}

#[derive(Clone, Debug)]
pub struct StrippedModule {
    pub free_rank: usize,
    pub residual: ModuleRep,
}

/// Split `M ≅ A^r ⊕ N` with `N` projective-free.
pub fn strip_projectives(m: &ModuleRep) -> Result<StrippedModule, ModError> {
    let f = m.field.clone();
    let d = m.dim;
    if d == 0 {
        return Ok(StrippedModule { free_rank: 0, residual: m.clone() });
    }
    let gens = m.sparse_generators();
    let p = m.algebra.p();
    let dim_a = m.algebra.dim();
    // socle preimages: standard vectors whose socle images are independent
    let mut rs = RowSpace::new(&f, d);
    let mut seeds = Vec::new();
    for c in 0..d {
        let mut e = vec![0; d];
        e[c] = 1;
        let w = apply_socle(&gens, p, &e);
        if !is_zero_vec(&w) && rs.insert(&w) {
            seeds.push(e);
        }
    }
    let r = seeds.len();
    if r == 0 {
        return Ok(StrippedModule { free_rank: 0, residual: m.clone() });
    }
    if r * dim_a > d {
        return Err(ModError::SplittingFailure(format!("free rank {r} exceeds dim {d} / {dim_a}")));
    }
    // ψ: A^r → M, columns ρ(b) m_i
    let mut cols: Vec<Vec<Scalar>> = Vec::with_capacity(r * dim_a);
    for s in &seeds {
        cols.extend(orbit_vectors(m, &gens, s));
    }
    let y = Matrix::from_columns(&f, d, &cols);
    let prow = y.transpose().pivot_columns();
    if prow.len() != r * dim_a {
        return Err(ModError::SplittingFailure("free submodule map is not injective".into()));
    }
    let yp_inv = y
        .select_rows(&prow)
        .inverse()
        .ok_or_else(|| ModError::SplittingFailure("singular pivot block".into()))?;
    let top = dim_a - 1;
    // λ_i picks the socle coordinate of the i-th free summand
    let mut constraints: Vec<Vec<Scalar>> = Vec::with_capacity(r * dim_a);
    for i in 0..r {
        let row = yp_inv.row(i * dim_a + top);
        let mut lam = vec![0; d];
        for (k, &pr) in prow.iter().enumerate() {
            lam[pr] = row[k];
        }
        constraints.extend(orbit_covectors(m, &gens, &lam));
    }
    let c = Matrix::from_vec(&f, constraints.len(), d, constraints.concat());
    let nb = c.nullspace();
    if nb.cols() != d - r * dim_a {
        return Err(ModError::SplittingFailure(format!(
            "complement has dim {} but expected {}",
            nb.cols(),
            d - r * dim_a
        )));
    }
    let residual = restrict_to_subspace(m, &nb)
        .ok_or_else(|| ModError::SplittingFailure("complement is not a submodule".into()))?;
    Ok(StrippedModule { free_rank: r, residual })
}

/// Column basis of `rad M = Σ_i ρ(g_i) M`.
pub fn radical_basis(m: &ModuleRep) -> RowSpace {
    let mut rs = RowSpace::new(&m.field, m.dim);
    for g in &m.mats {
        for j in 0..m.dim {
            rs.insert(&g.column(j));
        }
    }
    rs
}

/// Dimensions of `rad^k M / rad^{k+1} M` until zero.
pub fn radical_layers(m: &ModuleRep) -> Vec<usize> {
    let mut layers = Vec::new();
    let mut current: Vec<Vec<Scalar>> = (0..m.dim)
        .map(|c| {
            let mut e = vec![0; m.dim];
            e[c] = 1;
            e
        })
        .collect();
    let mut prev_dim = m.dim;
    while prev_dim > 0 {
        let mut rs = RowSpace::new(&m.field, m.dim);
        for v in &current {
            for g in &m.mats {
                rs.insert(&g.mul_vec(v));
            }
        }
        layers.push(prev_dim - rs.dim());
        prev_dim = rs.dim();
        current = rs.basis().to_vec();
    }
    layers
}

/// Dimensions of the socle series layers.
pub fn socle_layers(m: &ModuleRep) -> Vec<usize> {
    let f = &m.field;
    let mut layers = Vec::new();
    let mut s_dim = 0;
    // annihilator rows of the current socle term (starts as all of M*, i.e. S = 0)
    let mut ann = Matrix::identity(f, m.dim);
    while s_dim < m.dim {
        let mut stacked = Matrix::zeros(f, 0, m.dim);
        for g in &m.mats {
            stacked = stacked.vstack(&ann.mul(g));
        }
        let next = stacked.nullspace();
        layers.push(next.cols() - s_dim);
        s_dim = next.cols();
        if layers.last() == Some(&0) {
            break;
        }
        ann = next.transpose().nullspace().transpose();
    }
    layers
}

/// Minimal projective cover data: top generators and the cover matrix.
struct Cover {
    tops: Vec<Vec<Scalar>>,
    /// `d × g·dimA`, column `(i, b)` is `ρ(b) t_i`
    phi: Matrix,
}

fn projective_cover(m: &ModuleRep) -> Cover {
    let f = &m.field;
    let mut rs = radical_basis(m);
    let mut tops = Vec::new();
    for c in 0..m.dim {
        let mut e = vec![0; m.dim];
        e[c] = 1;
        if rs.insert(&e) {
            tops.push(e);
        }
    }
    let gens = m.sparse_generators();
    let mut cols = Vec::new();
    for t in &tops {
        cols.extend(orbit_vectors(m, &gens, t));
    }
    Cover { tops, phi: Matrix::from_columns(f, m.dim, &cols) }
}

/// Left-regular action on `A^g` (block diagonal).
fn free_module(alg: &AlgebraRef, field: &Field, g: usize) -> ModuleRep {
    let reg = ModuleRep::regular(alg).extend_scalars(field);
    let mut out = ModuleRep::zero(alg, field);
    for _ in 0..g {
        out = out.direct_sum(&reg).unwrap();
    }
    out
}

/// `Ω(M)`: kernel of the minimal projective cover, projective summands removed.
pub fn syzygy(m: &ModuleRep) -> ModuleRep {
    if m.dim == 0 {
        return m.clone();
    }
    let cover = projective_cover(m);
    let free = free_module(&m.algebra, &m.field, cover.tops.len());
    let kernel = cover.phi.nullspace();
    let k = restrict_to_subspace(&free, &kernel).expect("kernel of a module map is a submodule");
    strip_projectives(&k).expect("splitting exists over a self-injective algebra").residual
}

/// `Ω^{-1}(M) = Ω(M*)*`.
pub fn cosyzygy(m: &ModuleRep) -> ModuleRep {
    dual(&syzygy(&dual(m)))
}

/// `Ω^k(M)` for any integer `k`.
pub fn syzygy_power(m: &ModuleRep, k: i64) -> ModuleRep {
    let mut out = m.clone();
    for _ in 0..k.unsigned_abs() {
        out = if k > 0 { syzygy(&out) } else { cosyzygy(&out) };
    }
    out
}

/// Basis of `Hom_A(M, N)` as `dim N × dim M` matrices.
pub fn hom_space(m: &ModuleRep, n: &ModuleRep) -> Result<Vec<Matrix>, ModError> {
    m.same_context(n)?;
    let f = m.field.clone();
    let (dm, dn) = (m.dim, n.dim);
    if dm == 0 || dn == 0 {
        return Ok(Vec::new());
    }
    let cover = projective_cover(m);
    let g = cover.tops.len();
    let dim_a = m.algebra.dim();
    let kernel = cover.phi.nullspace();
    // ρ_N(b) for every monomial b
    let n_gens = n.sparse_generators();
    let mut rho_n: Vec<Matrix> = Vec::with_capacity(dim_a);
    {
        let cols_per_b: Vec<Vec<Vec<Scalar>>> = (0..dn)
            .map(|c| {
                let mut e = vec![0; dn];
                e[c] = 1;
                orbit_vectors(n, &n_gens, &e)
            })
            .collect();
        for b in 0..dim_a {
            let cols: Vec<Vec<Scalar>> = (0..dn).map(|c| cols_per_b[c][b].clone()).collect();
            rho_n.push(Matrix::from_columns(&f, dn, &cols));
        }
    }
    // unknowns: n_i ∈ N for each top generator, flattened as i*dn + row
    let mut rs = RowSpace::new(&f, g * dn);
    for kc in 0..kernel.cols() {
        let kv = kernel.column(kc);
        // Σ_{i,b} k_{i,b} ρ_N(b) n_i = 0, one scalar equation per row of N
        let mut block = vec![vec![0 as Scalar; g * dn]; dn];
        for i in 0..g {
            for b in 0..dim_a {
                let c = kv[i * dim_a + b];
                if c == 0 {
                    continue;
                }
                let rb = &rho_n[b];
                for (row, eq) in block.iter_mut().enumerate() {
                    f.axpy(&mut eq[i * dn..(i + 1) * dn], rb.row(row), c);
                }
            }
        }
        for eq in block {
            if !is_zero_vec(&eq) {
                rs.insert(&eq);
            }
        }
    }
    let sol = rs.to_matrix();
    let sol = if sol.rows() == 0 { Matrix::zeros(&f, 1, g * dn) } else { sol };
    let null = sol.nullspace();
    // Φ(ρ_M(b) t_i) = ρ_N(b) n_i; invert on a basis of M drawn from the cover columns
    let pcols = cover.phi.pivot_columns();
    let basis_inv = cover.phi.select_columns(&pcols).inverse().expect("cover is surjective");
    let mut out = Vec::with_capacity(null.cols());
    for s in 0..null.cols() {
        let x = null.column(s);
        let imgs: Vec<Vec<Scalar>> = pcols
            .iter()
            .map(|&col| {
                let (i, b) = (col / dim_a, col % dim_a);
                rho_n[b].mul_vec(&x[i * dn..(i + 1) * dn])
            })
            .collect();
        let img = Matrix::from_columns(&f, dn, &imgs);
        out.push(img.mul(&basis_inv));
    }
    Ok(out)
}

/// Result of an isomorphism test.
#[derive(Clone, Debug)]
pub enum IsoOutcome {
    Isomorphic(Matrix),
    NotIsomorphic(String),
}

impl IsoOutcome {
    pub fn is_iso(&self) -> bool {
        matches!(self, IsoOutcome::Isomorphic(_))
    }
}

fn jordan_signature(m: &ModuleRep) -> Vec<Option<JordanType>> {
    let p = m.algebra.p();
    m.mats.iter().map(|g| nilpotent_jordan_type(g, p).ok()).collect()
}

const ISO_SEARCH_BUDGET: u64 = 1 << 20;

/// Decide `M ≅ N`.
///
/// Cheap invariants first (dimension, radical and socle layers, Jordan types
/// of the generators, Hom dimensions). Then an invertible element is sought in
/// `Hom(M, N)`: basis elements, seeded random combinations, and finally an
/// exhaustive projective search over `F_{p^e}` for `e ≤ 3`. An exhaustive
/// search that fails over a field with more than `dim M` elements proves the
/// generic determinant vanishes, hence no isomorphism exists even after any
/// field extension.
pub fn is_isomorphic(m: &ModuleRep, n: &ModuleRep) -> Result<IsoOutcome, ModError> {
    m.same_context(n)?;
    let no = |s: &str| Ok(IsoOutcome::NotIsomorphic(s.to_string()));
    if m.dim != n.dim {
        return no("dimensions differ");
    }
    if m.dim == 0 {
        return Ok(IsoOutcome::Isomorphic(Matrix::zeros(&m.field, 0, 0)));
    }
    if m.mats == n.mats {
        return Ok(IsoOutcome::Isomorphic(Matrix::identity(&m.field, m.dim)));
    }
    if radical_layers(m) != radical_layers(n) {
        return no("radical layers differ");
    }
    if socle_layers(m) != socle_layers(n) {
        return no("socle layers differ");
    }
    if jordan_signature(m) != jordan_signature(n) {
        return no("generator Jordan types differ");
    }
    let hmn = hom_space(m, n)?;
    let end_m = hom_space(m, m)?.len();
    if hmn.len() != end_m || hom_space(n, m)?.len() != end_m || hom_space(n, n)?.len() != end_m {
        return no("Hom dimensions differ");
    }
    if hmn.is_empty() {
        return no("no homomorphisms");
    }
    for phi in &hmn {
        if phi.is_invertible() {
            return Ok(IsoOutcome::Isomorphic(phi.clone()));
        }
    }
    let d = m.dim as u64;
    let s = hmn.len();
    let base = &m.field;
    let mut rng = ChaCha8Rng::seed_from_u64(0x150_150);
    let fields: Vec<Field> = if base.is_prime_field() {
        (1..=3).filter_map(|e| Field::new(base.p(), e).ok()).collect()
    } else {
        vec![base.clone()]
    };
    for k in &fields {
        let hk: Vec<Matrix> = hmn.iter().map(|h| h.over(k)).collect();
        let combo = |c: &[Scalar]| {
            let mut acc = Matrix::zeros(k, m.dim, m.dim);
            for (h, &x) in hk.iter().zip(c) {
                acc.add_scaled(h, x);
            }
            acc
        };
        for _ in 0..64 {
            let c: Vec<Scalar> = (0..s).map(|_| rng.gen_range(0..k.q())).collect();
            let phi = combo(&c);
            if phi.det() != 0 {
                return Ok(IsoOutcome::Isomorphic(phi));
            }
        }
        let q = k.q() as u64;
        let total = q.checked_pow(s as u32);
        if let Some(total) = total.filter(|&t| t <= ISO_SEARCH_BUDGET) {
            let mut found = None;
            let mut c = vec![0 as Scalar; s];
            for code in 1..total {
                let mut x = code;
                for slot in c.iter_mut() {
                    *slot = (x % q) as Scalar;
                    x /= q;
                }
                if c.iter().find(|&&v| v != 0) != Some(&1) {
                    continue;
                }
                let phi = combo(&c);
                if phi.det() != 0 {
                    found = Some(phi);
                    break;
                }
            }
            if let Some(phi) = found {
                return Ok(IsoOutcome::Isomorphic(phi));
            }
            if q > d {
                return no("generic intertwiner determinant vanishes identically");
            }
        }
    }
    Err(ModError::Inconclusive(format!("Hom space of dimension {s} too large to search exhaustively")))
}

/// The natural `(ℓ+1)`-dimensional module of `u(𝔲)` for type `A_ℓ`: root
/// vectors act by signed elementary matrices, signs chosen to match the
/// structure constants.
pub fn natural_rep_type_a(alg: &Arc<PbwAlgebra>) -> Result<ModuleRep, ModError> {
    let Origin::RootSystem { kind: RootType::A, rank } = alg.origin() else {
        return Err(ModError::WrongAlgebraKind("type A"));
    };
    let l = *rank;
    let roots = alg.roots().expect("root-system algebra carries roots").to_vec();
    let f = alg.field().clone();
    let n = roots.len();
    // root α_i + ... + α_{j-1} ↔ E_{i,j}
    let span = |r: &[i64]| -> (usize, usize) {
        let i = r.iter().position(|&c| c != 0).unwrap();
        let j = r.iter().rposition(|&c| c != 0).unwrap() + 1;
        (i, j)
    };
    let mut eps = vec![1 as Scalar; n];
    for t in 0..n {
        let (i, j) = span(&roots[t]);
        if j - i == 1 {
            continue;
        }
        // split as (i..m) + (m..j) with m = i+1
        let a = (0..n).find(|&s| span(&roots[s]) == (i, i + 1)).unwrap();
        let b = (0..n).find(|&s| span(&roots[s]) == (i + 1, j)).unwrap();
        // [ε_a E_{i,i+1}, ε_b E_{i+1,j}] = ε_a ε_b E_{i,j} must equal c · ε_t E_{i,j}
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let c = alg.bracket(lo, hi).iter().find(|&&(k, _)| k == t).map(|&(_, c)| c).unwrap_or(0);
        let c = if a < b { c } else { f.neg(c) };
        let cinv = f.inv(c).ok_or_else(|| ModError::RelationViolation("vanishing type A constant".into()))?;
        eps[t] = f.mul(f.mul(eps[a], eps[b]), cinv);
    }
    let mats = (0..n)
        .map(|t| {
            let (i, j) = span(&roots[t]);
            let mut m = Matrix::zeros(&f, l + 1, l + 1);
            m.set(i, j, eps[t]);
            m
        })
        .collect();
    ModuleRep::new(AlgebraRef::Pbw(alg.clone()), mats)
}

/// Deterministic random module over a local algebra: strictly upper
/// triangular matrices satisfying the relations, found by rejection.
pub fn random_module(alg: &AlgebraRef, d: usize, rng: &mut impl Rng, tries: usize) -> Option<ModuleRep> {
    let f = alg.prime_field();
    let n = alg.num_generators();
    for _ in 0..tries {
        let mats: Vec<Matrix> = (0..n)
            .map(|_| {
                let mut m = Matrix::zeros(&f, d, d);
                for i in 0..d {
                    for j in i + 1..d {
                        m.set(i, j, rng.gen_range(0..f.p()));
                    }
                }
                m
            })
            .collect();
        if let Ok(m) = ModuleRep::new(alg.clone(), mats) {
            return Some(m);
        }
    }
    None
}

/// Weyl-style binomial check used by module builders.
pub fn binom(n: u64, k: u64, p: u32) -> Scalar {
    binom_mod(n, k, p)
}

/// Orbit of a vector under all monomials, exposed for diagnostics.
pub fn cyclic_submodule(m: &ModuleRep, v: &[Scalar]) -> Matrix {
    let gens = m.sparse_generators();
    let mut rs = RowSpace::new(&m.field, m.dim);
    for w in orbit_vectors(m, &gens, v) {
        rs.insert(&w);
    }
    rs.to_matrix().transpose()
}

/// Map from monomial index to exponent digits, exposed for callers that
/// iterate over the monomial basis.
pub fn monomial_digits(alg: &AlgebraRef, m: usize) -> Vec<u32> {
    alg.digits(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{build_divided_power, build_restricted_enveloping, elementary_abelian};
    use crate::rootdata::build_root_system;

    fn ea(p: u32, n: usize) -> AlgebraRef {
        AlgebraRef::Pbw(Arc::new(elementary_abelian(p, n).unwrap()))
    }
    fn upa(kind: RootType, l: usize, p: u32) -> AlgebraRef {
        AlgebraRef::Pbw(Arc::new(build_restricted_enveloping(&build_root_system(kind, l).unwrap(), p).unwrap()))
    }

    #[test]
    fn regular_module_is_valid_and_free() {
        for alg in [ea(2, 2), ea(3, 2), upa(RootType::A, 2, 2), upa(RootType::A, 2, 3), upa(RootType::B, 2, 2)] {
            let reg = ModuleRep::regular(&alg);
            assert!(reg.validate().is_ok());
            assert_eq!(reg.dim(), alg.dim());
            assert_eq!(free_rank(&reg), 1);
            let inv = invariants(&reg, &(0..alg.num_generators()).collect::<Vec<_>>()).unwrap();
            assert_eq!(inv.dim(), 1);
        }
    }

    #[test]
    fn bracket_violation_rejected() {
        let alg = upa(RootType::A, 2, 3);
        let f = alg.prime_field();
        let mut a = Matrix::zeros(&f, 2, 2);
        a.set(0, 1, 1);
        let mut b = Matrix::zeros(&f, 2, 2);
        b.set(1, 0, 1);
        let z = Matrix::zeros(&f, 2, 2);
        let err = make_module(&alg, vec![a, b, z]).unwrap_err();
        assert!(matches!(err, ModError::RelationViolation(_)));
    }

    #[test]
    fn tensor_examples() {
        let alg = ea(2, 1);
        let f = alg.prime_field();
        let j2 = make_module(&alg, vec![Matrix::from_i64_rows(&f, &[vec![0, 0], vec![1, 0]])]).unwrap();
        let t = tensor(&j2, &j2).unwrap();
        assert_eq!(t.dim(), 4);
        assert_eq!(nilpotent_jordan_type(t.matrix(0), 2).unwrap(), JordanType::from_blocks(2, &[2, 2]));
        let k = ModuleRep::trivial(&alg, 1);
        assert_eq!(tensor(&k, &j2).unwrap().matrices(), j2.matrices());
        let a = upa(RootType::A, 2, 2);
        let reg = ModuleRep::regular(&a);
        let rk = tensor(&reg, &ModuleRep::trivial(&a, 1)).unwrap();
        assert!(is_isomorphic(&rk, &reg).unwrap().is_iso());
    }

    #[test]
    fn strip_examples() {
        let alg = ea(3, 2);
        let reg = ModuleRep::regular(&alg);
        let two = reg.direct_sum(&reg).unwrap();
        let s = strip_projectives(&two).unwrap();
        assert_eq!((s.free_rank, s.residual.dim()), (2, 0));
        let k = ModuleRep::trivial(&alg, 1);
        let s = strip_projectives(&k.direct_sum(&reg).unwrap()).unwrap();
        assert_eq!((s.free_rank, s.residual.dim()), (1, 1));
        assert!(s.residual.matrices().iter().all(|m| m.is_zero()));
    }

    #[test]
    fn syzygies_over_truncated_polynomials() {
        for p in [2u32, 3, 5] {
            let alg = ea(p, 1);
            let k = ModuleRep::trivial(&alg, 1);
            let om = syzygy(&k);
            assert_eq!(om.dim(), p as usize - 1);
            let om2 = syzygy(&om);
            assert!(is_isomorphic(&om2, &k).unwrap().is_iso());
        }
    }

    #[test]
    fn syzygy_dimensions_rank_two() {
        // oracle: the minimal resolution of k over k[x,y]/(x^p,y^p) has
        // free ranks 1,2,3,...; alternating sums give the syzygy dimensions
        for p in [2u32, 3] {
            let alg = ea(p, 2);
            let q = (p * p) as i64;
            let mut m = ModuleRep::trivial(&alg, 1);
            let mut expected = 1i64;
            for j in 1..=4i64 {
                m = syzygy(&m);
                expected = j * q - expected;
                assert_eq!(m.dim() as i64, expected, "p={p} j={j}");
            }
        }
    }

    #[test]
    fn omega_and_inverse_at_p2() {
        let alg = ea(2, 2);
        let k = ModuleRep::trivial(&alg, 1);
        let om = syzygy(&k);
        let co = cosyzygy(&k);
        assert_eq!((om.dim(), co.dim()), (3, 3));
        assert!(!is_isomorphic(&om, &co).unwrap().is_iso());
        assert!(is_isomorphic(&dual(&om), &co).unwrap().is_iso());
        assert!(is_isomorphic(&syzygy(&co), &k).unwrap().is_iso());
    }

    #[test]
    fn hom_space_dimensions() {
        let alg = ea(2, 2);
        let k = ModuleRep::trivial(&alg, 1);
        let reg = ModuleRep::regular(&alg);
        assert_eq!(hom_space(&k, &reg).unwrap().len(), 1);
        assert_eq!(hom_space(&reg, &k).unwrap().len(), 1);
        assert_eq!(hom_space(&reg, &reg).unwrap().len(), 4);
        for h in hom_space(&reg, &reg).unwrap() {
            for g in reg.matrices() {
                assert_eq!(h.mul(g), g.mul(&h));
            }
        }
    }

    #[test]
    fn natural_type_a_modules() {
        for (l, p) in [(1, 2), (2, 2), (2, 3), (3, 2), (4, 5)] {
            let rs = build_root_system(RootType::A, l).unwrap();
            let alg = Arc::new(build_restricted_enveloping(&rs, p).unwrap());
            let v = natural_rep_type_a(&alg).unwrap();
            assert_eq!(v.dim(), l + 1);
        }
        let rs = build_root_system(RootType::A, 1).unwrap();
        let alg = Arc::new(build_restricted_enveloping(&rs, 2).unwrap());
        let v = natural_rep_type_a(&alg).unwrap();
        assert_eq!(nilpotent_jordan_type(v.matrix(0), 2).unwrap(), JordanType::from_blocks(2, &[2]));
    }

    #[test]
    fn restriction_of_regular_along_first_generator() {
        let a = upa(RootType::A, 2, 2);
        let pbw = a.as_pbw().unwrap().clone();
        let reg = ModuleRep::regular(&a);
        let t = ea(2, 1);
        let r = restrict_along(&reg, &t, &[pbw.generator(0)]).unwrap();
        assert_eq!(nilpotent_jordan_type(r.matrix(0), 2).unwrap(), JordanType::from_blocks(2, &[2, 2, 2, 2]));
        let k = ModuleRep::trivial(&a, 1);
        let rk = restrict_along(&k, &t, &[pbw.generator(1)]).unwrap();
        assert_eq!(rk.dim(), 1);
    }

    #[test]
    fn divided_power_tensor_and_dual_are_modules() {
        let dp: AlgebraRef = Arc::new(build_divided_power(2, 2).unwrap()).into();
        let reg = ModuleRep::regular(&dp);
        let t = tensor(&reg, &reg).unwrap();
        assert!(t.validate().is_ok());
        assert_eq!(free_rank(&t), 4);
        assert!(dual(&reg).validate().is_ok());
        assert_eq!(free_rank(&dual(&reg)), 1);
    }

    #[test]
    fn layers() {
        let alg = ea(2, 2);
        let reg = ModuleRep::regular(&alg);
        assert_eq!(radical_layers(&reg), vec![1, 2, 1]);
        assert_eq!(socle_layers(&reg), vec![1, 2, 1]);
        let k = ModuleRep::trivial(&alg, 1);
        let om = syzygy(&k);
        assert_eq!(radical_layers(&om), vec![2, 1]);
        assert_eq!(radical_layers(&cosyzygy(&k)), vec![1, 2]);
    }
}
