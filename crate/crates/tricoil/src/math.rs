//! Shared numerical kernels: elliptic integrals, sphere sampling, small helpers.

use nalgebra::Vector3;

/// Vacuum permeability, T·m/A.
pub const MU_0: f64 = 4.0e-7 * std::f64::consts::PI;

/// Complete elliptic integral of the first kind K(m), parameter convention
/// (same as scipy: m = k²).
///
/// Computed with the arithmetic-geometric mean, which converges quadratically
/// to full f64 precision. Polynomial fits top out near 1e-8 relative error,
/// which is not enough for the finite-difference consistency checks downstream.
pub fn ellipk(m: f64) -> f64 {
    assert!((0.0..1.0).contains(&m), "ellipk: m must be in [0,1), got {m}");
    let mut a = 1.0_f64;
    let mut b = (1.0 - m).sqrt();
    while (a - b).abs() > f64::EPSILON * a {
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    std::f64::consts::FRAC_PI_2 / a
}

/// Complete elliptic integral of the second kind E(m), same parameter
/// convention and AGM scheme as [`ellipk`].
pub fn ellipe(m: f64) -> f64 {
    assert!((0.0..=1.0).contains(&m), "ellipe: m must be in [0,1], got {m}");
    if m == 1.0 {
        return 1.0;
    }
    let mut a = 1.0_f64;
    let mut b = (1.0 - m).sqrt();
    let mut c2_sum = 0.5 * m; // 2^(n-1) c_n² accumulated, n = 0 term
    let mut pow2 = 1.0_f64;
    while (a - b).abs() > f64::EPSILON * a {
        let c = 0.5 * (a - b);
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
        c2_sum += pow2 * c * c;
        pow2 *= 2.0;
    }
    (std::f64::consts::FRAC_PI_2 / a) * (1.0 - c2_sum)
}

/// Quasi-uniform unit directions on S² via a golden-angle Fibonacci lattice.
///
/// The polar coordinate runs z = 1 - 2i/(n-1), so both poles are included
/// exactly. Deterministic and seedless.
pub fn fibonacci_sphere(n: usize) -> Vec<Vector3<f64>> {
    assert!(n >= 2, "fibonacci_sphere needs at least 2 samples");
    let golden_angle = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * i as f64 / (n - 1) as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let az = golden_angle * i as f64;
            Vector3::new(r * az.cos(), r * az.sin(), z)
        })
        .collect()
}

/// Exact rotation by 120° about +z. cos = -1/2 exactly, sin = √3/2.
pub fn rotation_z_120() -> nalgebra::Matrix3<f64> {
    let s = 3.0_f64.sqrt() * 0.5;
    nalgebra::Matrix3::new(-0.5, -s, 0.0, s, -0.5, 0.0, 0.0, 0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values computed with mpmath to 16 digits.
    const CASES_K: &[(f64, f64)] = &[
        (0.1, 1.6124413487202194),
        (0.5, 1.8540746773013719),
        (0.9, 2.5780921133481733),
        (0.99, 3.6956373629898742),
    ];
    const CASES_E: &[(f64, f64)] = &[
        (0.1, 1.5307576368977631),
        (0.5, 1.3506438810476755),
        (0.9, 1.1047747327040733),
        (0.99, 1.0159935450252240),
    ];

    #[test]
    fn elliptic_integrals_match_reference() {
        for &(m, want) in CASES_K {
            assert!((ellipk(m) - want).abs() < 1e-14, "K({m})");
        }
        for &(m, want) in CASES_E {
            assert!((ellipe(m) - want).abs() < 1e-14, "E({m})");
        }
        assert!((ellipk(0.0) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((ellipe(0.0) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(ellipe(1.0), 1.0);
    }

    #[test]
    fn legendre_relation() {
        // K(m) E(1-m) + E(m) K(1-m) - K(m) K(1-m) = π/2 for every m.
        for &m in &[0.05, 0.2, 0.5, 0.77, 0.93] {
            let lhs = ellipk(m) * ellipe(1.0 - m) + ellipe(m) * ellipk(1.0 - m)
                - ellipk(m) * ellipk(1.0 - m);
            assert!((lhs - std::f64::consts::FRAC_PI_2).abs() < 1e-13, "m={m}");
        }
    }

    #[test]
    fn fibonacci_lattice_has_unit_norm_and_poles() {
        let dirs = fibonacci_sphere(512);
        assert_eq!(dirs.len(), 512);
        for d in &dirs {
            assert!((d.norm() - 1.0).abs() < 1e-12);
        }
        assert!((dirs[0] - Vector3::new(0.0, 0.0, 1.0)).norm() < 1e-12);
        assert!((dirs[511] - Vector3::new(0.0, 0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn fibonacci_lattice_is_roughly_uniform() {
        // Mean direction of a balanced lattice stays near zero.
        let dirs = fibonacci_sphere(512);
        let mean: Vector3<f64> = dirs.iter().sum::<Vector3<f64>>() / 512.0;
        assert!(mean.norm() < 0.01, "mean = {mean:?}");
    }

    #[test]
    fn rotation_z_120_cubed_is_identity() {
        let r = rotation_z_120();
        let r3 = r * r * r;
        assert!((r3 - nalgebra::Matrix3::identity()).norm() < 1e-15);
    }
}
