//! Weyl modules for SL₂ restricted to `Dist(U_r)`, their decomposition and
//! endotriviality scans, plus dimension screens for higher rank.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{binom_mod, build_divided_power, DividedPowerAlgebra};
use crate::endotest::is_endotrivial;
use crate::exactfield::Matrix;
use crate::modrep::{dual, is_isomorphic, strip_projectives, tensor, AlgebraRef, ModError, ModuleRep};
use crate::rootdata::{RootError, RootSystem};

/// Largest `(λ+1)·p^r` accepted by [`weyl_module`].
pub const WEYL_CAP: u64 = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WeylError {
    #[error("(λ+1)·p^r = {0} exceeds the cap")]
    CapExceeded(u64),
    #[error("invalid divided-power algebra: p={p}, r={r}")]
    BadAlgebra { p: u32, r: u32 },
    #[error(transparent)]
    Module(#[from] ModError),
    #[error(transparent)]
    Root(#[from] RootError),
}

#[derive(Clone, Debug)]
pub struct WeylModule {
    pub p: u32,
    pub r: u32,
    pub lambda: u64,
    pub module: ModuleRep,
}

fn dist(p: u32, r: u32) -> Result<Arc<DividedPowerAlgebra>, WeylError> {
    build_divided_power(p, r).map(Arc::new).map_err(|_| WeylError::BadAlgebra { p, r })
}

/// `V(λ)` with `γ_j w_t = C(t+j, j) w_{t+j}` (zero past `w_λ`).
pub fn weyl_module(p: u32, r: u32, lambda: u64) -> Result<WeylModule, WeylError> {
    let alg = dist(p, r)?;
    let size = (lambda + 1).saturating_mul((p as u64).saturating_pow(r));
    if size > WEYL_CAP {
        return Err(WeylError::CapExceeded(size));
    }
    let f = alg.field().clone();
    let d = lambda as usize + 1;
    let mats = (0..r)
        .map(|j| {
            let step = alg.generator_index(j);
            let mut m = Matrix::zeros(&f, d, d);
            for t in 0..d.saturating_sub(step) {
                m.set(t + step, t, binom_mod((t + step) as u64, step as u64, p));
            }
            m
        })
        .collect();
    let module = ModuleRep::new(AlgebraRef::DividedPower(alg), mats)?;
    Ok(WeylModule { p, r, lambda, module })
}

/// `ρ(γ_i)` straight from the closed form, independent of the generators.
pub fn closed_form_gamma(p: u32, lambda: u64, i: usize) -> Matrix {
    let f = crate::exactfield::Field::prime(p).unwrap();
    let d = lambda as usize + 1;
    let mut m = Matrix::zeros(&f, d, d);
    for t in 0..d.saturating_sub(i) {
        m.set(t + i, t, binom_mod((t + i) as u64, i as u64, p));
    }
    m
}

/// `C((i-1)p^r + p^r - 1, p^r - 1) ≢ 0 mod p` for `1 ≤ i ≤ n`.
pub fn decomposition_binomials_nonvanishing(p: u32, r: u32, n: u64) -> bool {
    let q = (p as u64).pow(r);
    (1..=n).all(|i| binom_mod((i - 1) * q + q - 1, q - 1, p) != 0)
}

#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    pub p: u32,
    pub r: u32,
    pub n: u64,
    pub dim: usize,
    pub free_rank: usize,
    pub residual_dim: usize,
    pub residual_trivial: bool,
    pub binomials_nonvanishing: bool,
}

/// Split `V(np^r)|_{U_r}` as `k ⊕ (kU_r)^{⊕n}`.
pub fn weyl_restriction_decomposition(p: u32, r: u32, n: u64) -> Result<Decomposition, WeylError> {
    let q = (p as u64).pow(r);
    let v = weyl_module(p, r, n * q)?;
    let s = strip_projectives(&v.module)?;
    let residual_trivial = s.residual.dim() == 1 && s.residual.matrices().iter().all(|m| m.is_zero());
    Ok(Decomposition {
        p,
        r,
        n,
        dim: v.module.dim(),
        free_rank: s.free_rank,
        residual_dim: s.residual.dim(),
        residual_trivial,
        binomials_nonvanishing: decomposition_binomials_nonvanishing(p, r, n),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeylScanRow {
    pub lambda: u64,
    pub dim: usize,
    /// free rank of `V(λ) ⊗ V(λ)*`
    pub free_rank: usize,
    pub residual_dim: usize,
    pub verdict: bool,
    /// `λ ≡ 0` or `-2 mod p^r`
    pub expected: bool,
}

pub fn expected_endotrivial(p: u32, r: u32, lambda: u64) -> bool {
    let q = (p as u64).pow(r);
    lambda.is_multiple_of(q) || (lambda + 2).is_multiple_of(q)
}

/// Certificate for `V(λ)|_{U_r}`, `0 ≤ λ ≤ λ_max`. The verdict over `U_r`
/// agrees with the one over `G_r` because every π-point of `(SL₂)_r`
/// factors through a conjugate of `U_r`; that reduction is cited, not
/// computed.
pub fn endotrivial_weyl_scan(p: u32, r: u32, lambda_max: u64) -> Result<Vec<WeylScanRow>, WeylError> {
    (0..=lambda_max)
        .into_par_iter()
        .map(|lambda| {
            let v = weyl_module(p, r, lambda)?;
            let c = is_endotrivial(&v.module);
            Ok(WeylScanRow {
                lambda,
                dim: c.dim,
                free_rank: c.free_rank,
                residual_dim: c.residual_dim,
                verdict: c.verdict,
                expected: expected_endotrivial(p, r, lambda),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScreenResult {
    pub lambda: Vec<i64>,
    #[serde(serialize_with = "ser_big")]
    pub dim: BigUint,
    /// exponent `N` of the modulus `p^N`, `N = r·|Φ⁺|`
    pub modulus_exponent: usize,
    #[serde(serialize_with = "ser_big")]
    pub residue: BigUint,
    pub passed: bool,
    /// `d² ≡ 1 mod p^N` forces `d ≡ ±1 mod p^N` only for odd `p`; at `p = 2`
    /// it forces `d ≡ ±1 mod 2^{N-1}`, so a failed screen proves nothing there
    pub sound: bool,
}

fn ser_big<S: serde::Serializer>(x: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

/// `dim V(λ) ≡ ±1 mod p^{r|Φ⁺|}`.
pub fn dimension_screen(rs: &RootSystem, p: u32, r: u32, lambda: &[i64]) -> Result<ScreenResult, WeylError> {
    let dim = rs.weyl_dimension(lambda)?;
    let n = r as usize * rs.num_positive();
    let modulus = BigUint::from(p).pow(n as u32);
    let residue = &dim % &modulus;
    let one = BigUint::one();
    let passed = residue == one || (&residue + &one) % &modulus == BigUint::zero();
    Ok(ScreenResult { lambda: lambda.to_vec(), dim, modulus_exponent: n, residue, passed, sound: p != 2 })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RangeRow {
    pub lambda: u64,
    pub dim: usize,
    pub verdict: bool,
    pub congruence: bool,
}

/// Certificates for `V(λ)`, `0 ≤ λ ≤ p-1`, where `V(λ) = L(λ) = T(λ)`.
pub fn simple_tilting_range_check(p: u32, r: u32) -> Result<Vec<RangeRow>, WeylError> {
    (0..p as u64)
        .map(|lambda| {
            let v = weyl_module(p, r, lambda)?;
            let c = is_endotrivial(&v.module);
            Ok(RangeRow { lambda, dim: c.dim, verdict: c.verdict, congruence: c.congruence })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderTwoCheck {
    pub p: u32,
    pub tensor_dim: usize,
    pub free_rank: usize,
    pub residual_dim: usize,
    pub residual_trivial: bool,
}

/// `V(p-2) ⊗ V(p-2)` over `Dist(U_1)` strips to `k`.
pub fn order_two_check(p: u32) -> Result<OrderTwoCheck, WeylError> {
    let v = weyl_module(p, 1, p as u64 - 2)?;
    let t = tensor(&v.module, &v.module)?;
    let s = strip_projectives(&t)?;
    Ok(OrderTwoCheck {
        p,
        tensor_dim: t.dim(),
        free_rank: s.free_rank,
        residual_dim: s.residual.dim(),
        residual_trivial: s.residual.dim() == 1 && s.residual.matrices().iter().all(|m| m.is_zero()),
    })
}

/// `S^λ(W)` for the natural module `W = ⟨X, Y⟩` with `u(t): Y ↦ Y + tX`.
/// On `s_i = X^{λ-i} Y^i` the coefficient of `t^j` gives
/// `γ_j s_i = C(i, j) s_{i-j}`.
pub fn symmetric_power(p: u32, r: u32, lambda: u64) -> Result<ModuleRep, WeylError> {
    let alg = dist(p, r)?;
    let f = alg.field().clone();
    let d = lambda as usize + 1;
    let mats = (0..r)
        .map(|j| {
            let step = alg.generator_index(j);
            let mut m = Matrix::zeros(&f, d, d);
            for i in step..d {
                m.set(i - step, i, binom_mod(i as u64, step as u64, p));
            }
            m
        })
        .collect();
    Ok(ModuleRep::new(AlgebraRef::DividedPower(alg), mats)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct SymmetricCheck {
    pub lambda: u64,
    pub iso_to_dual_weyl: bool,
    pub iso_to_weyl: bool,
}

/// Compare `S^λ(W)` with `V(λ)` and `V(λ)*` for `λ ≤ λ_max`.
pub fn symmetric_power_cross_check(p: u32, r: u32, lambda_max: u64) -> Result<Vec<SymmetricCheck>, WeylError> {
    (0..=lambda_max)
        .map(|lambda| {
            let s = symmetric_power(p, r, lambda)?;
            let v = weyl_module(p, r, lambda)?.module;
            Ok(SymmetricCheck {
                lambda,
                iso_to_dual_weyl: is_isomorphic(&s, &dual(&v))?.is_iso(),
                iso_to_weyl: is_isomorphic(&s, &v)?.is_iso(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactfield::{nilpotent_jordan_type, JordanType};
    use crate::modrep::free_rank;
    use crate::rootdata::{build_root_system, RootType};

    /// Exact binomial, for comparison with the Lucas evaluation.
    fn big_binom(n: u64, k: u64) -> BigUint {
        let mut acc = BigUint::one();
        for i in 0..k {
            acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
        }
        acc
    }

    #[test]
    fn weyl_examples() {
        let v = weyl_module(3, 1, 0).unwrap();
        assert_eq!(v.module.dim(), 1);
        assert!(v.module.matrix(0).is_zero());
        let v = weyl_module(3, 1, 2).unwrap();
        assert_eq!(v.module.matrix(0).get(2, 1), 2);
        let v = weyl_module(2, 2, 4).unwrap();
        let g3 = v.module.gamma_matrix(3);
        assert_eq!(g3.get(3, 0), 1);
        assert_eq!(g3.get(4, 1), 0);
        assert_eq!(g3, closed_form_gamma(2, 4, 3));
    }

    #[test]
    fn generator_products_match_closed_form() {
        for (p, r, lambda) in [(2, 3, 11), (3, 2, 13), (5, 1, 7), (2, 2, 9)] {
            let v = weyl_module(p, r, lambda).unwrap();
            let q = (p as usize).pow(r);
            for i in 0..q {
                assert_eq!(v.module.gamma_matrix(i), closed_form_gamma(p, lambda, i), "p={p} r={r} i={i}");
            }
        }
    }

    #[test]
    fn lucas_agrees_with_exact_binomials() {
        for p in [2u32, 3, 5] {
            for n in 0..40u64 {
                for k in 0..=n {
                    let exact = big_binom(n, k) % BigUint::from(p);
                    assert_eq!(BigUint::from(binom_mod(n, k, p)), exact);
                }
            }
        }
        assert!(decomposition_binomials_nonvanishing(2, 3, 5));
        assert!(decomposition_binomials_nonvanishing(5, 1, 5));
    }

    #[test]
    fn decomposition_examples() {
        let d = weyl_restriction_decomposition(3, 1, 2).unwrap();
        assert_eq!((d.dim, d.free_rank, d.residual_dim, d.residual_trivial), (7, 2, 1, true));
        let d = weyl_restriction_decomposition(2, 3, 1).unwrap();
        assert_eq!((d.dim, d.free_rank, d.residual_trivial), (9, 1, true));
        let d = weyl_restriction_decomposition(2, 2, 0).unwrap();
        assert_eq!((d.dim, d.free_rank), (1, 0));
        let v = weyl_module(3, 1, 3).unwrap();
        assert_eq!(free_rank(&v.module), 1);
    }

    #[test]
    fn scan_examples() {
        let rows = endotrivial_weyl_scan(3, 1, 10).unwrap();
        let hits: Vec<u64> = rows.iter().filter(|r| r.verdict).map(|r| r.lambda).collect();
        assert_eq!(hits, vec![0, 1, 3, 4, 6, 7, 9, 10]);
        let rows = endotrivial_weyl_scan(2, 1, 8).unwrap();
        assert!(rows.iter().all(|r| r.verdict == (r.lambda % 2 == 0)));
        let rows = endotrivial_weyl_scan(2, 2, 8).unwrap();
        let hits: Vec<u64> = rows.iter().filter(|r| r.verdict).map(|r| r.lambda).collect();
        assert_eq!(hits, vec![0, 2, 4, 6, 8]);
    }

    #[test]
    fn screens() {
        let a2 = build_root_system(RootType::A, 2).unwrap();
        let s = dimension_screen(&a2, 2, 1, &[1, 0]).unwrap();
        assert_eq!(s.dim, BigUint::from(3u32));
        assert!(!s.passed);
        assert!(!s.sound);
        assert!(dimension_screen(&a2, 3, 1, &[0, 0]).unwrap().passed);
        let a1 = build_root_system(RootType::A, 1).unwrap();
        let s = dimension_screen(&a1, 3, 1, &[3]).unwrap();
        assert!(s.passed && s.sound);
    }

    #[test]
    fn range_checks() {
        let hits = |p, r| -> Vec<u64> {
            simple_tilting_range_check(p, r).unwrap().into_iter().filter(|x| x.verdict).map(|x| x.lambda).collect()
        };
        assert_eq!(hits(5, 1), vec![0, 3]);
        assert_eq!(hits(2, 1), vec![0]);
        assert_eq!(hits(3, 2), vec![0]);
        for p in [2, 3, 5, 7] {
            let c = order_two_check(p).unwrap();
            assert!(c.residual_trivial, "p={p}");
        }
    }

    #[test]
    fn symmetric_powers_are_dual_weyl_modules() {
        for (p, r) in [(2, 1), (2, 2), (3, 1), (3, 2)] {
            for row in symmetric_power_cross_check(p, r, 6).unwrap() {
                assert!(row.iso_to_dual_weyl, "p={p} r={r} λ={}", row.lambda);
            }
        }
        // V(2) over Dist(U_2) at p=2 is cyclic with a 2-dim socle; S^2(W) is not
        let rows = symmetric_power_cross_check(2, 2, 2).unwrap();
        assert!(!rows[2].iso_to_weyl);
        let v = weyl_module(2, 1, 2).unwrap();
        assert_eq!(nilpotent_jordan_type(v.module.matrix(0), 2).unwrap(), JordanType::from_blocks(2, &[2, 1]));
    }
}
