//! Endotriviality certificates, Jordan types at p-points, local syzygy
//! degrees and the fixed-dimension census.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{elementary_abelian, AlgebraElement, PbwAlgebra};
use crate::exactfield::{nilpotent_jordan_type, Field, JordanType, Matrix, Scalar};
use crate::modrep::{
    dual, free_rank, is_isomorphic, restrict_along, strip_projectives, syzygy_power, tensor, AlgebraRef,
    IsoOutcome, ModError, ModuleRep,
};
use crate::nullcone::{nullcone_equations, projective_count, NullconeError, NullconeVariety};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EndoError {
    #[error(transparent)]
    Module(#[from] ModError),
    #[error(transparent)]
    Nullcone(#[from] NullconeError),
    #[error("point has no nonzero coordinate before the last, so E_a is undefined")]
    InvalidPoint,
    #[error("point is not on the nullcone")]
    NotOnNullcone,
    #[error("restriction to E_a is not a syzygy of k (residual dim {0})")]
    NotEndotrivialLocally(usize),
    #[error("census would enumerate {tuples} tuples, above the exhaustive cap {cap}")]
    BudgetExceeded { tuples: u128, cap: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EndotrivialCertificate {
    pub dim: usize,
    pub algebra_dim: usize,
    pub free_rank: usize,
    pub residual_dim: usize,
    pub verdict: bool,
    /// `d² ≡ 1 mod p^n`
    pub congruence: bool,
}

/// Exact test: `M ⊗ M* ≅ k ⊕ A^r` iff `d² = 1 + r·dim A`.
pub fn is_endotrivial(m: &ModuleRep) -> EndotrivialCertificate {
    let d = m.dim();
    let dim_a = m.algebra().dim();
    let congruence = (d * d) % dim_a == 1 % dim_a;
    if d == 0 {
        return EndotrivialCertificate { dim: 0, algebra_dim: dim_a, free_rank: 0, residual_dim: 0, verdict: false, congruence };
    }
    let t = tensor(m, &dual(m)).expect("same algebra");
    let r = free_rank(&t);
    let residual_dim = d * d - r * dim_a;
    EndotrivialCertificate { dim: d, algebra_dim: dim_a, free_rank: r, residual_dim, verdict: residual_dim == 1, congruence }
}

/// `v_ā = Σ a_i u_i` with coordinates in `F_{p^e}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PPoint {
    pub field: Field,
    pub coeffs: Vec<Scalar>,
}

impl Serialize for PPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.coeffs.iter())
    }
}

impl PPoint {
    pub fn new(field: &Field, coeffs: Vec<Scalar>) -> PPoint {
        PPoint { field: field.clone(), coeffs }
    }
    /// Some coordinate before the last is nonzero.
    pub fn defines_local_subalgebra(&self) -> bool {
        self.coeffs[..self.coeffs.len() - 1].iter().any(|&c| c != 0)
    }
    pub fn element(&self, alg: &PbwAlgebra) -> AlgebraElement {
        AlgebraElement::from_terms((0..alg.n()).map(|i| (alg.gen_mono(i), self.coeffs[i])), &self.field)
    }
    fn matrix_on(&self, m: &ModuleRep) -> Matrix {
        m.extend_scalars(&self.field).linear_combination(&self.coeffs)
    }
}

/// Points of the nullcone of the algebra over `F_{p^e}`. Divided-power
/// algebras are commutative with `x_j^p = 0`, so every point qualifies.
pub fn variety_points(alg: &AlgebraRef, e: u32) -> Result<Vec<PPoint>, EndoError> {
    let f = Field::new(alg.p(), e).expect("valid field");
    let pts = match alg {
        AlgebraRef::Pbw(a) => crate::nullcone::nullcone_points(&variety_of(a)?, e)?,
        AlgebraRef::DividedPower(a) => {
            let var = NullconeVariety { algebra: a.id(), p: a.p(), nvars: a.num_generators(), equations: vec![] };
            crate::nullcone::nullcone_points(&var, e)?
        }
    };
    Ok(pts.into_iter().map(|c| PPoint::new(&f, c)).collect())
}

fn variety_of(a: &Arc<PbwAlgebra>) -> Result<NullconeVariety, EndoError> {
    Ok(nullcone_equations(a)?)
}

pub fn jordan_type_at_point(m: &ModuleRep, pt: &PPoint) -> JordanType {
    nilpotent_jordan_type(&pt.matrix_on(m), m.algebra().p()).expect("points of the nullcone act p-nilpotently")
}

#[derive(Clone, Debug, Serialize)]
pub struct JordanScan {
    pub e: u32,
    pub points_checked: usize,
    pub passed: bool,
    pub witness: Option<(PPoint, String)>,
    pub types: Vec<String>,
}

/// Necessary condition only: every point has type `[1]+m[p]` or `[p-1]+m[p]`.
pub fn constant_jordan_scan(m: &ModuleRep, e: u32) -> Result<JordanScan, EndoError> {
    let pts = variety_points(m.algebra(), e)?;
    let ext = m.extend_scalars(&Field::new(m.algebra().p(), e).unwrap());
    let jts: Vec<JordanType> = pts.par_iter().map(|pt| jordan_type_at_point(&ext, pt)).collect();
    let mut types: Vec<String> = Vec::new();
    let mut witness = None;
    for (pt, jt) in pts.iter().zip(&jts) {
        let s = jt.to_string();
        if !types.contains(&s) {
            types.push(s.clone());
        }
        if witness.is_none() && !jt.is_endotrivial_shape() {
            witness = Some((pt.clone(), s));
        }
    }
    Ok(JordanScan { e, points_checked: pts.len(), passed: witness.is_none(), witness, types })
}

/// `dim Ω^m(k)` over a rank-two elementary abelian algebra.
pub fn rank_two_syzygy_dim(m: i64, p: u32) -> usize {
    let q = (p * p) as usize;
    let s = (m.unsigned_abs() as usize).div_ceil(2);
    if m == 0 {
        1
    } else if m.unsigned_abs().is_multiple_of(2) {
        1 + s * q
    } else {
        s * q - 1
    }
}

fn rank_two_degree_from_dim(d: usize, p: u32) -> Option<u64> {
    let q = (p * p) as usize;
    if d == 0 {
        None
    } else if d == 1 {
        Some(0)
    } else if (d - 1).is_multiple_of(q) {
        Some(2 * ((d - 1) / q) as u64)
    } else if (d + 1).is_multiple_of(q) {
        Some(2 * ((d + 1) / q) as u64 - 1)
    } else {
        None
    }
}

/// The restriction `M|_{E_ā}` along `s ↦ v_ā`, `t ↦ u_n`.
pub fn restrict_to_local(m: &ModuleRep, pt: &PPoint) -> Result<ModuleRep, EndoError> {
    let AlgebraRef::Pbw(a) = m.algebra() else {
        return Err(ModError::WrongAlgebraKind("PBW").into());
    };
    if !pt.defines_local_subalgebra() {
        return Err(EndoError::InvalidPoint);
    }
    let e: AlgebraRef = Arc::new(elementary_abelian(a.p(), 2).unwrap()).into();
    let ext = m.extend_scalars(&pt.field);
    let un = AlgebraElement::monomial(a.gen_mono(a.n() - 1));
    restrict_along(&ext, &e, &[pt.element(a), un]).map_err(|err| match err {
        ModError::RelationViolation(_) => EndoError::NotOnNullcone,
        other => other.into(),
    })
}

/// `m_ā` with `M|_{E_ā} ≅ Ω^{m_ā}(k) ⊕ (proj)`.
pub fn local_syzygy_degree(m: &ModuleRep, pt: &PPoint) -> Result<i64, EndoError> {
    let r = restrict_to_local(m, pt)?;
    let n = strip_projectives(&r)?.residual;
    let p = m.algebra().p();
    let abs = rank_two_degree_from_dim(n.dim(), p).ok_or(EndoError::NotEndotrivialLocally(n.dim()))?;
    let k = ModuleRep::trivial(n.algebra(), 1).extend_scalars(n.field());
    if abs == 0 {
        return Ok(0);
    }
    if is_isomorphic(&syzygy_power(&n, -(abs as i64)), &k)?.is_iso() {
        return Ok(abs as i64);
    }
    if is_isomorphic(&syzygy_power(&n, abs as i64), &k)?.is_iso() {
        return Ok(-(abs as i64));
    }
    Err(EndoError::NotEndotrivialLocally(n.dim()))
}

#[derive(Clone, Debug, Serialize)]
pub struct ProfileEntry {
    pub point: PPoint,
    pub jordan_type: String,
    /// rank of `w_ā = v_ā^{p-1} u_n^{p-1}`; `None` where `E_ā` is undefined
    pub w_rank: Option<usize>,
    pub local_degree: Option<i64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RankProfile {
    pub e: u32,
    pub dim: usize,
    pub entries: Vec<ProfileEntry>,
}

impl RankProfile {
    pub fn distinct_ranks(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.entries.iter().filter_map(|e| e.w_rank).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
    pub fn distinct_degrees(&self) -> Vec<i64> {
        let mut v: Vec<i64> = self.entries.iter().filter_map(|e| e.local_degree).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Jordan type, `w_ā`-rank and (optionally) `m_ā` at every point over `F_{p^e}`.
pub fn rank_profile(m: &ModuleRep, e: u32, with_degrees: bool) -> Result<RankProfile, EndoError> {
    let AlgebraRef::Pbw(a) = m.algebra() else {
        return Err(ModError::WrongAlgebraKind("PBW").into());
    };
    let f = Field::new(a.p(), e).unwrap();
    let ext = m.extend_scalars(&f);
    let p = a.p();
    let un = ext.matrix(a.n() - 1).pow(p - 1);
    let pts = variety_points(m.algebra(), e)?;
    let entries: Result<Vec<ProfileEntry>, EndoError> = pts
        .into_par_iter()
        .map(|pt| {
            let v = pt.matrix_on(&ext);
            let jordan_type = nilpotent_jordan_type(&v, p).expect("p-nilpotent").to_string();
            let valid = pt.defines_local_subalgebra();
            let w_rank = valid.then(|| v.pow(p - 1).mul(&un).rank());
            let local_degree = if valid && with_degrees { Some(local_syzygy_degree(&ext, &pt)?) } else { None };
            Ok(ProfileEntry { point: pt, jordan_type, w_rank, local_degree })
        })
        .collect();
    Ok(RankProfile { e, dim: m.dim(), entries: entries? })
}

pub const CENSUS_EXHAUSTIVE_CAP: u64 = 1 << 18;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CensusMode {
    Exhaustive,
    Random,
}

#[derive(Clone, Debug, Serialize)]
pub struct CensusClass {
    pub module: ModuleRep,
    /// `m` with `M ≅ Ω^m(k) ⊕ (proj)` when found within the search range
    pub stable_class: Option<i64>,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CensusResult {
    pub algebra: String,
    pub dim: usize,
    pub mode: CensusMode,
    pub tuples_examined: u64,
    pub modules: u64,
    pub endotrivial: u64,
    pub classes: Vec<CensusClass>,
    /// endotrivial modules whose class could not be decided
    pub undecided: usize,
    /// exhaustive enumeration finished
    pub complete: bool,
}

/// Strictly upper triangular tuple number `idx` (base-p digits fill the
/// entries generator by generator, row-major).
fn tuple_from_index(alg: &AlgebraRef, d: usize, mut idx: u64) -> Vec<Matrix> {
    let f = alg.prime_field();
    let p = f.p() as u64;
    (0..alg.num_generators())
        .map(|_| {
            let mut m = Matrix::zeros(&f, d, d);
            for i in 0..d {
                for j in i + 1..d {
                    m.set(i, j, (idx % p) as Scalar);
                    idx /= p;
                }
            }
            m
        })
        .collect()
}

/// Find `m` with `|m| ≤ bound` and `M ≅ Ω^m(k) ⊕ (proj)`.
pub fn stable_syzygy_class(m: &ModuleRep, bound: i64) -> Result<Option<i64>, EndoError> {
    let n = strip_projectives(m)?.residual;
    let k = ModuleRep::trivial(m.algebra(), 1).extend_scalars(m.field());
    for s in 0..=bound {
        for mm in if s == 0 { vec![0] } else { vec![s, -s] } {
            let om = syzygy_power(&k, mm);
            if om.dim() == n.dim() && is_isomorphic(&om, &n)?.is_iso() {
                return Ok(Some(mm));
            }
        }
    }
    Ok(None)
}

/// Endotrivial modules of dimension `d` up to isomorphism. Every module over
/// a local algebra has a basis making all generators strictly upper
/// triangular, so enumerating those tuples reaches every class.
pub fn census(alg: &AlgebraRef, d: usize, mode: CensusMode, budget: u64, seed: u64) -> Result<CensusResult, EndoError> {
    let p = alg.p() as u128;
    let entries = (alg.num_generators() * d * d.saturating_sub(1) / 2) as u32;
    let total = p.checked_pow(entries).unwrap_or(u128::MAX);
    let dim_a = alg.dim();
    let mut result = CensusResult {
        algebra: alg.id(),
        dim: d,
        mode,
        tuples_examined: 0,
        modules: 0,
        endotrivial: 0,
        classes: vec![],
        undecided: 0,
        complete: mode == CensusMode::Exhaustive,
    };
    if mode == CensusMode::Exhaustive && total > CENSUS_EXHAUSTIVE_CAP as u128 {
        return Err(EndoError::BudgetExceeded { tuples: total, cap: CENSUS_EXHAUSTIVE_CAP });
    }
    if d == 0 || (d * d) % dim_a != 1 % dim_a {
        // the certificate forces d² = 1 + r·dim A
        result.tuples_examined = 0;
        return Ok(result);
    }
    let indices: Vec<u64> = match mode {
        CensusMode::Exhaustive => (0..total as u64).collect(),
        CensusMode::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..budget).map(|_| if total > u64::MAX as u128 { rng.gen() } else { rng.gen_range(0..total as u64) }).collect()
        }
    };
    result.tuples_examined = indices.len() as u64;
    let hits: Vec<(bool, Option<ModuleRep>)> = indices
        .par_iter()
        .map(|&i| match ModuleRep::new(alg.clone(), tuple_from_index(alg, d, i)) {
            Ok(m) => {
                let ok = is_endotrivial(&m).verdict;
                (true, ok.then_some(m))
            }
            Err(_) => (false, None),
        })
        .collect();
    for (valid, hit) in hits {
        result.modules += valid as u64;
        let Some(m) = hit else { continue };
        result.endotrivial += 1;
        let mut placed = false;
        let mut undecided = false;
        for class in result.classes.iter_mut() {
            match is_isomorphic(&class.module, &m) {
                Ok(IsoOutcome::Isomorphic(_)) => {
                    class.multiplicity += 1;
                    placed = true;
                    break;
                }
                Ok(IsoOutcome::NotIsomorphic(_)) => {}
                Err(_) => undecided = true,
            }
        }
        if !placed {
            if undecided {
                result.undecided += 1;
            } else {
                result.classes.push(CensusClass { module: m, stable_class: None, multiplicity: 1 });
            }
        }
    }
    for class in result.classes.iter_mut() {
        class.stable_class = stable_syzygy_class(&class.module, 4)?;
    }
    Ok(result)
}

/// Total number of projective points over `F_{p^e}` in `n` coordinates.
pub fn point_count(p: u32, e: u32, n: usize) -> Option<u64> {
    projective_count((p as u64).pow(e), n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::build_restricted_enveloping;
    use crate::modrep::{cosyzygy, natural_rep_type_a, syzygy};
    use crate::rootdata::{build_root_system, RootType};

    fn ea(p: u32, n: usize) -> AlgebraRef {
        Arc::new(elementary_abelian(p, n).unwrap()).into()
    }
    fn upa(kind: RootType, l: usize, p: u32) -> AlgebraRef {
        Arc::new(build_restricted_enveloping(&build_root_system(kind, l).unwrap(), p).unwrap()).into()
    }

    #[test]
    fn certificates() {
        let e = ea(3, 2);
        let k = ModuleRep::trivial(&e, 1);
        let c = is_endotrivial(&k);
        assert!(c.verdict);
        assert_eq!(c.free_rank, 0);
        let om = syzygy(&k);
        let c = is_endotrivial(&om);
        assert_eq!((c.dim, c.free_rank, c.residual_dim, c.verdict), (8, 7, 1, true));
        // the natural module of u(A2) at p=2 is endotrivial even though 3 ≢ ±1 mod 8
        let a2 = upa(RootType::A, 2, 2);
        let v = natural_rep_type_a(a2.as_pbw().unwrap()).unwrap();
        let c = is_endotrivial(&v);
        assert_eq!((c.free_rank, c.residual_dim, c.verdict), (1, 1, true));
        let a3 = upa(RootType::A, 3, 2);
        let v = natural_rep_type_a(a3.as_pbw().unwrap()).unwrap();
        let c = is_endotrivial(&v);
        assert!(!c.verdict && !c.congruence);
        assert!(!is_endotrivial(&ModuleRep::trivial(&e, 2)).verdict);
    }

    #[test]
    fn natural_a2_oracle_via_adjoint_action() {
        // gl_3 under ad of the strictly upper triangular matrices, built by
        // hand: ad(E12) ad(E23) ad(E13) E31 = -E13 ≠ 0, so End(k^3) has a free
        // summand of dim 8 and the complement is one-dimensional.
        let f = Field::prime(2).unwrap();
        let e = |i: usize, j: usize| {
            let mut m = Matrix::zeros(&f, 3, 3);
            m.set(i, j, 1);
            m
        };
        let ad = |x: &Matrix, y: &Matrix| x.commutator(y);
        let top = ad(&e(0, 1), &ad(&e(1, 2), &ad(&e(0, 2), &e(2, 0))));
        assert_eq!(top, e(0, 2));
    }

    #[test]
    fn jordan_types_at_points() {
        let a = upa(RootType::A, 2, 3);
        let reg = ModuleRep::regular(&a);
        let f = Field::prime(3).unwrap();
        for pt in variety_points(&a, 1).unwrap() {
            assert_eq!(jordan_type_at_point(&reg, &pt), JordanType::from_blocks(3, &[3; 9]));
        }
        let om = syzygy(&ModuleRep::trivial(&a, 1));
        assert_eq!(om.dim(), 26);
        let jt = jordan_type_at_point(&om, &PPoint::new(&f, vec![1, 0, 0]));
        assert_eq!(jt.to_string(), "8[3]+1[2]");
    }

    #[test]
    fn scans() {
        let a = upa(RootType::A, 2, 3);
        let k = ModuleRep::trivial(&a, 1);
        assert!(constant_jordan_scan(&k, 1).unwrap().passed);
        assert!(constant_jordan_scan(&syzygy(&k), 1).unwrap().passed);
        let kk = ModuleRep::trivial(&a, 2);
        let s = constant_jordan_scan(&kk, 1).unwrap();
        assert!(!s.passed);
        assert_eq!(s.witness.unwrap().1, "2[1]");
    }

    #[test]
    fn local_degrees() {
        let a = upa(RootType::A, 2, 3);
        let k = ModuleRep::trivial(&a, 1);
        let om = syzygy(&k);
        let co = cosyzygy(&k);
        for pt in variety_points(&a, 1).unwrap().into_iter().filter(|p| p.defines_local_subalgebra()) {
            assert_eq!(local_syzygy_degree(&k, &pt).unwrap(), 0);
            assert_eq!(local_syzygy_degree(&om, &pt).unwrap(), 1);
            assert_eq!(local_syzygy_degree(&co, &pt).unwrap(), -1);
        }
    }

    #[test]
    fn profiles() {
        let a = upa(RootType::A, 3, 2);
        let reg = ModuleRep::regular(&a);
        let prof = rank_profile(&reg, 1, false).unwrap();
        assert_eq!(prof.distinct_ranks(), vec![16]);
        let k = ModuleRep::trivial(&a, 1);
        assert_eq!(rank_profile(&k, 1, true).unwrap().distinct_ranks(), vec![0]);
    }

    #[test]
    fn syzygy_dimension_formula() {
        assert_eq!(rank_two_syzygy_dim(2, 3), 10);
        assert_eq!(rank_two_syzygy_dim(-3, 2), 7);
        for p in [2, 3] {
            for m in 0..7i64 {
                assert_eq!(rank_two_degree_from_dim(rank_two_syzygy_dim(m, p), p), Some(m as u64));
            }
        }
    }

    #[test]
    fn small_census() {
        let e = ea(2, 2);
        let c1 = census(&e, 1, CensusMode::Exhaustive, 0, 0).unwrap();
        assert_eq!(c1.classes.len(), 1);
        assert_eq!(c1.classes[0].stable_class, Some(0));
        assert!(census(&e, 2, CensusMode::Exhaustive, 0, 0).unwrap().classes.is_empty());
        let big = census(&e, 8, CensusMode::Exhaustive, 0, 0);
        assert!(matches!(big, Err(EndoError::BudgetExceeded { .. })));
    }
}
