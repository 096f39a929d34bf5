//! Block formulas against the dense-matrix route, plus the closed-form
//! properties of the block angles and level labels.

use donorspin_core::half::HalfInt;
use donorspin_core::linalg::symmetric_eigen_sorted;
use donorspin_core::system::SpinSystem;

fn m(v: i32) -> HalfInt {
    HalfInt::from_int(v)
}

/// Pairs every block level with the dense-diagonalization eigenpair of
/// maximal eigenvector overlap and compares energies. This is the
/// brute-force check that the per-m decomposition is exact.
#[test]
fn block_energies_match_dense_oracle_over_field_sweep() {
    let sys = SpinSystem::si_bi();
    let started = std::time::Instant::now();
    for k in 1..=200 {
        let b = 0.03 * k as f64;
        let levels = sys.eigensystem(b).unwrap();
        let vblock = sys.eigenvector_matrix(&levels);
        let h = sys.full_hamiltonian(b).unwrap();
        let (vals, vecs) = symmetric_eigen_sorted(&h);
        let scale = vals.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));

        let mut used = [false; 20];
        for level in &levels {
            let col = vblock.column(level.label - 1);
            let mut best = (0usize, 0.0_f64);
            for (j, &taken) in used.iter().enumerate() {
                if taken {
                    continue;
                }
                let overlap = col.dot(&vecs.column(j)).abs();
                if overlap > best.1 {
                    best = (j, overlap);
                }
            }
            assert!(
                best.1 > 0.999,
                "B = {b}: level {} pairs with overlap {}",
                level.label,
                best.1
            );
            used[best.0] = true;
            let err = (level.energy - vals[best.0]).abs();
            assert!(
                err <= 1e-10 * scale,
                "B = {b}: label {} energy error {err:.3e} (scale {scale:.3e})",
                level.label
            );
        }
    }
    // desk-scale budget for the whole sweep
    assert!(started.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn oracle_is_hermitian_and_conserves_total_z_projection() {
    let sys = SpinSystem::si_bi();
    let basis = sys.basis();
    let jz = basis.s_z() + basis.i_z();
    for b in [0.0, 0.1, 1.0, 6.0] {
        let h = sys.full_hamiltonian(b).unwrap();
        let herm = (&h - h.transpose()).norm();
        assert!(herm < 1e-14 * h.norm().max(1.0));
        let comm = (&h * &jz - &jz * &h).norm() / sys.hyperfine();
        assert!(comm < 1e-12, "B = {b}: [H, Jz]/A = {comm:.3e}");
    }
}

#[test]
fn si_p_zero_field_hyperfine_splitting() {
    // singlet-triplet structure: eigenvalues A/4 (x3) and -3A/4
    let sys = SpinSystem::si_p();
    let h = sys.full_hamiltonian(0.0).unwrap();
    let (vals, _) = symmetric_eigen_sorted(&h);
    let a = sys.hyperfine();
    assert!((vals[0] + 0.75 * a).abs() < 1e-10 * a);
    for k in 1..4 {
        assert!((vals[k] - 0.25 * a).abs() < 1e-10 * a);
    }
}

#[test]
fn uncoupled_level_sits_near_minus_quarter_a_at_the_one_dim_cancellation() {
    let sys = SpinSystem::si_bi();
    let delta = sys.zeeman_ratio();
    let block = sys.block_at_tilde(m(-5), 5.0).unwrap();
    let e = 0.5 * (block.energy_factor(donorspin_core::Branch::Minus).unwrap());
    // closed form (-1/2 + 45 delta)/2 in units of A
    assert!((e - 0.5 * (-0.5 + 45.0 * delta)).abs() < 1e-12);
    assert!((e + 0.25).abs() < 0.02, "E/A = {e}");
}

#[test]
fn theta_decreases_with_field_and_respects_case_bounds() {
    let sys = SpinSystem::si_bi();
    for mm in sys.m_values() {
        let block0 = sys.block(mm, 0.0).unwrap();
        if block0.dimensionality == 1 {
            assert_eq!(block0.theta, 0.0);
            continue;
        }
        // the maximum is attained at B = 0
        let bound = if mm.doubled() > 0 {
            (block0.omega / mm.value()).atan()
        } else if mm.doubled() == 0 {
            std::f64::consts::FRAC_PI_2
        } else {
            std::f64::consts::FRAC_PI_2 + (mm.value().abs() / block0.omega).atan()
        };
        assert!(
            (block0.theta - bound).abs() < 1e-12,
            "m = {mm}: theta(0) = {} vs bound {bound}",
            block0.theta
        );
        let mut prev = block0.theta;
        for k in 1..=100 {
            let b = 0.06 * k as f64;
            let th = sys.block(mm, b).unwrap().theta;
            assert!(th < prev, "theta must decrease with B (m = {mm}, B = {b})");
            assert!((0.0..std::f64::consts::PI).contains(&th));
            prev = th;
        }
        let far = sys.block(mm, 1.0e4).unwrap().theta;
        assert!(far > 0.0 && far < 1e-2);
        assert!(far <= bound);
    }
}

#[test]
fn coefficients_are_normalized_everywhere() {
    let sys = SpinSystem::si_bi();
    for k in 0..=60 {
        let b = 0.1 * k as f64;
        for level in sys.eigensystem(b).unwrap() {
            let norm = level.coeff_a * level.coeff_a + level.coeff_b * level.coeff_b;
            assert!((norm - 1.0).abs() < 1e-14);
            if !level.is_uncoupled() {
                assert!(level.coeff_a > 0.0, "sign convention a > 0");
            }
        }
    }
}
