//! Endotriviality under the module operations, local syzygy degrees and
//! restriction, on the randomized corpus in `common`.

mod common;

use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use endoscope_core::algebra::elementary_abelian;
use endoscope_core::endotest::{constant_jordan_scan, is_endotrivial, local_syzygy_degree, restrict_to_local};
use endoscope_core::modrep::{random_module, restrict_along, AlgebraRef, ModuleRep};

use common::{base_of, bases, draw, CASES};

fn config() -> ProptestConfig {
    ProptestConfig { cases: CASES, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn closed_under_tensor_dual_syzygy(alg in 0usize..3, op in 0usize..5, i in 0usize..8, j in 0usize..8, seed: u64) {
        let s = draw(alg, op, i, j, seed);
        let cert = is_endotrivial(&s.module);
        prop_assert!(cert.verdict, "{}: free rank {} residual {}", s.label, cert.free_rank, cert.residual_dim);
        prop_assert!(cert.congruence);
    }

    #[test]
    fn certificate_implies_jordan_scan(alg in 0usize..3, op in 0usize..5, i in 0usize..8, j in 0usize..8, seed: u64) {
        let s = draw(alg, op, i, j, seed);
        prop_assert!(is_endotrivial(&s.module).verdict);
        let scan = constant_jordan_scan(&s.module, 1).unwrap();
        prop_assert!(scan.passed, "{}: {:?}", s.label, scan.witness);
    }

    #[test]
    fn certificate_and_scan_on_arbitrary_modules(p_idx in 0usize..2, d in 1usize..6, seed: u64) {
        let b = &bases()[p_idx];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if let Some(m) = random_module(&b.alg, d, &mut rng, 50) {
            let cert = is_endotrivial(&m);
            let scan = constant_jordan_scan(&m, 1).unwrap();
            // the scan is a necessary condition
            prop_assert!(!cert.verdict || scan.passed);
            if !scan.passed {
                prop_assert!(!cert.verdict);
            }
        }
    }

    #[test]
    fn local_degree_is_constant(alg in 0usize..3, op in 0usize..5, i in 0usize..8, j in 0usize..8, seed: u64) {
        let s = draw(alg, op, i, j, seed);
        let b = base_of(&s);
        for pt in &b.points {
            let deg = local_syzygy_degree(&s.module, pt).unwrap();
            prop_assert_eq!(deg, s.degree, "{} at {:?}", s.label, pt.coeffs);
        }
    }

    #[test]
    fn restriction_preserves_endotriviality(alg in 0usize..3, op in 0usize..5, i in 0usize..8, j in 0usize..8, seed: u64, pick: usize) {
        let s = draw(alg, op, i, j, seed);
        let b = base_of(&s);
        let pt = &b.points[pick % b.points.len()];
        let local = restrict_to_local(&s.module, pt).unwrap();
        prop_assert!(is_endotrivial(&local).verdict, "{} on E at {:?}", s.label, pt.coeffs);
        // the cyclic subalgebra k[t]/(t^p), t ↦ v_ā
        let cyclic: AlgebraRef = Arc::new(elementary_abelian(b.pbw.p(), 1).unwrap()).into();
        let line = restrict_along(&s.module, &cyclic, &[pt.element(&b.pbw)]).unwrap();
        prop_assert!(is_endotrivial(&line).verdict);
    }

    #[test]
    fn non_endotrivial_sums_are_rejected(alg in 0usize..3, i in 0usize..8, j in 0usize..8) {
        let b = &bases()[alg];
        let x = &b.syz[i % b.syz.len()].1;
        let y = &b.syz[j % b.syz.len()].1;
        let sum = x.direct_sum(y).unwrap();
        prop_assert!(!is_endotrivial(&sum).verdict);
        let k2 = ModuleRep::trivial(&b.alg, 2);
        prop_assert!(!constant_jordan_scan(&k2, 1).unwrap().passed);
    }
}
