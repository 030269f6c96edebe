//! Randomized corpus shared by the property suites and the acceptance target.
//!
//! Modules are built from `Ω^m(k)` by tensor, dual and (co)syzygy, then
//! conjugated by a random change of basis. Each sample carries the syzygy
//! degree its construction predicts.

#![allow(dead_code)]

use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use endoscope_core::algebra::{build_restricted_enveloping, elementary_abelian, PbwAlgebra};
use endoscope_core::endotest::{variety_points, PPoint};
use endoscope_core::modrep::{cosyzygy, dual, make_module, syzygy, syzygy_power, tensor, AlgebraRef, ModuleRep};
use endoscope_core::rootdata::{build_root_system, RootType};
use endoscope_core::Matrix;

pub const CASES: u32 = 200;

pub struct Base {
    pub name: &'static str,
    pub alg: AlgebraRef,
    pub pbw: Arc<PbwAlgebra>,
    /// `Ω^m(k)` keyed by `m`
    pub syz: Vec<(i64, ModuleRep)>,
    /// points of the rank variety over the prime field defining local subalgebras
    pub points: Vec<PPoint>,
}

#[derive(Clone, Copy, Debug)]
pub enum Op {
    Plain,
    Dual,
    Syzygy,
    Cosyzygy,
    Tensor,
}

pub const OPS: [Op; 5] = [Op::Plain, Op::Dual, Op::Syzygy, Op::Cosyzygy, Op::Tensor];

/// Largest module the suites build; keeps `M ⊗ M*` at desk scale.
const DIM_CAP: usize = 30;

fn base(name: &'static str, alg: PbwAlgebra, degrees: std::ops::RangeInclusive<i64>) -> Base {
    let pbw = Arc::new(alg);
    let a: AlgebraRef = pbw.clone().into();
    let k = ModuleRep::trivial(&a, 1);
    let syz = degrees.map(|m| (m, syzygy_power(&k, m))).collect();
    let points = variety_points(&a, 1).unwrap().into_iter().filter(|p| p.defines_local_subalgebra()).collect();
    Base { name, alg: a, pbw, syz, points }
}

/// Algebras that satisfy the standing hypothesis and have connected projected nullcone.
pub fn bases() -> &'static [Base] {
    static B: OnceLock<Vec<Base>> = OnceLock::new();
    B.get_or_init(|| {
        let a2 = build_root_system(RootType::A, 2).unwrap();
        vec![
            base("E2/p2", elementary_abelian(2, 2).unwrap(), -3..=3),
            base("E2/p3", elementary_abelian(3, 2).unwrap(), -2..=2),
            base("A2/p3", build_restricted_enveloping(&a2, 3).unwrap(), -1..=1),
        ]
    })
}

pub struct Sample {
    pub label: String,
    pub module: ModuleRep,
    pub degree: i64,
}

fn lookup(b: &Base, m: i64) -> Option<&ModuleRep> {
    b.syz.iter().find(|(k, _)| *k == m).map(|(_, x)| x)
}

/// Deterministic construction from the drawn indices; `None` when the
/// requested module is outside the corpus or over the size cap.
pub fn build(b: &Base, op: Op, i: usize, j: usize) -> Option<Sample> {
    let (m1, x) = &b.syz[i % b.syz.len()];
    let (m2, y) = &b.syz[j % b.syz.len()];
    let (module, degree) = match op {
        Op::Plain => (x.clone(), *m1),
        Op::Dual => (dual(x), -m1),
        Op::Syzygy => {
            lookup(b, m1 + 1)?;
            (syzygy(x), m1 + 1)
        }
        Op::Cosyzygy => {
            lookup(b, m1 - 1)?;
            (cosyzygy(x), m1 - 1)
        }
        Op::Tensor => {
            if x.dim() * y.dim() > DIM_CAP {
                return None;
            }
            (tensor(x, y).unwrap(), m1 + m2)
        }
    };
    if module.dim() > DIM_CAP {
        return None;
    }
    Some(Sample { label: format!("{} {op:?} Ω^{m1},Ω^{m2}", b.name), module, degree })
}

pub fn random_invertible(field: &endoscope_core::Field, d: usize, rng: &mut impl Rng) -> Matrix {
    loop {
        let data = (0..d * d).map(|_| rng.gen_range(0..field.q())).collect();
        let g = Matrix::from_vec(field, d, d, data);
        if g.is_invertible() {
            return g;
        }
    }
}

/// `g⁻¹ ρ g` for a random invertible `g` drawn from `seed`.
pub fn conjugate(m: &ModuleRep, seed: u64) -> ModuleRep {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_invertible(m.field(), m.dim(), &mut rng);
    let gi = g.inverse().unwrap();
    let mats = m.matrices().iter().map(|a| gi.mul(a).mul(&g)).collect();
    make_module(m.algebra(), mats).unwrap()
}

/// A sample from the drawn indices, falling back to `Ω^{m1}(k)` itself.
pub fn draw(alg: usize, op: usize, i: usize, j: usize, seed: u64) -> Sample {
    let b = &bases()[alg % bases().len()];
    let s = build(b, OPS[op % OPS.len()], i, j).unwrap_or_else(|| build(b, Op::Plain, i, j).unwrap());
    Sample { module: conjugate(&s.module, seed), ..s }
}

pub fn base_of(s: &Sample) -> &'static Base {
    bases().iter().find(|b| &b.alg == s.module.algebra()).unwrap()
}
