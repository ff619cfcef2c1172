//! Elliptic special-function kernel.
//!
//! Provides the complete elliptic integral K(k) of the first kind and the
//! Jacobi elliptic cosine cn(u, k), both through arithmetic-geometric mean
//! iteration. Modulus convention: k itself (not the parameter m = k^2),
//! with 0 <= k < 1.

use crate::error::{Error, Result};

/// Maximum AGM iterations. Quadratic convergence reaches f64 accuracy in
/// well under 10 iterations for any k bounded away from 1; 40 is a hard cap.
const AGM_MAX_ITER: usize = 40;
const AGM_TOL: f64 = 1e-16;

/// Elliptic modulus k together with the complementary modulus k' = sqrt(1 - k^2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticModulus {
    k: f64,
    k_prime: f64,
}

impl EllipticModulus {
    /// Builds a modulus from k, requiring 0 <= k < 1.
    pub fn new(k: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&k) {
            return Err(Error::Domain(format!(
                "elliptic modulus must satisfy 0 <= k < 1, got {k}"
            )));
        }
        Ok(Self {
            k,
            k_prime: (1.0 - k * k).sqrt(),
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn k_prime(&self) -> f64 {
        self.k_prime
    }
}

/// Complete elliptic integral of the first kind,
/// K(k) = ∫₀¹ dx / (sqrt(1 - x²) sqrt(1 - k²x²)),
/// computed as π / (2·AGM(1, k')).
pub fn complete_elliptic_k(modulus: EllipticModulus) -> f64 {
    let mut a = 1.0_f64;
    let mut b = modulus.k_prime();
    for _ in 0..AGM_MAX_ITER {
        if (a - b).abs() < AGM_TOL * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    std::f64::consts::FRAC_PI_2 / a
}

/// Jacobi elliptic cn(u, k) by the descending-Landen (AGM) method.
///
/// Arguments are reduced by the period 4K and the symmetry cn(2K - u) = -cn(u)
/// so any finite u is accepted. Errors on non-finite u.
pub fn jacobi_cn(u: f64, modulus: EllipticModulus) -> Result<f64> {
    Ok(jacobi_sn_cn_dn(u, modulus)?.1)
}

/// Full Jacobi triple (sn, cn, dn). Internal building block: the profile
/// solver needs sn·dn for the analytic derivative of cn.
pub(crate) fn jacobi_sn_cn_dn(u: f64, modulus: EllipticModulus) -> Result<(f64, f64, f64)> {
    if !u.is_finite() {
        return Err(Error::Domain(format!("jacobi_cn requires finite u, got {u}")));
    }
    let k = modulus.k();
    // Landen descent is ill-conditioned for tiny k; the degenerate limit is exact.
    if k < 1e-12 {
        return Ok((u.sin(), u.cos(), 1.0));
    }

    // Reduce u into [0, 2K] using period 4K, then track signs.
    let big_k = complete_elliptic_k(modulus);
    let period = 4.0 * big_k;
    let mut v = u.rem_euclid(period); // [0, 4K)
    let mut sn_sign = 1.0;
    let mut cn_sign = 1.0;
    if v > 2.0 * big_k {
        // cn(u + 2K) = -cn(u), sn(u + 2K) = -sn(u)
        v -= 2.0 * big_k;
        sn_sign = -1.0;
        cn_sign = -1.0;
    }

    // AGM ladder.
    let mut a = vec![1.0_f64];
    let mut c = vec![k];
    let mut b = modulus.k_prime();
    let mut n = 0;
    while c[n].abs() > AGM_TOL * a[n] && n < AGM_MAX_ITER {
        let an = 0.5 * (a[n] + b);
        let cn1 = 0.5 * (a[n] - b);
        b = (a[n] * b).sqrt();
        a.push(an);
        c.push(cn1);
        n += 1;
    }

    // Descending phase recurrence.
    let mut phi = (1u64 << n) as f64 * a[n] * v;
    for i in (1..=n).rev() {
        let s = (c[i] / a[i]) * phi.sin();
        phi = 0.5 * (phi + s.clamp(-1.0, 1.0).asin());
    }
    let sn = phi.sin();
    let cn = phi.cos();
    let dn = (1.0 - (k * sn) * (k * sn)).sqrt();
    Ok((sn_sign * sn, cn_sign * cn, dn))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn modulus(k: f64) -> EllipticModulus {
        EllipticModulus::new(k).unwrap()
    }

    /// Independent oracle: adaptive Simpson quadrature of the defining
    /// integral, with the substitution x = sin θ to remove the endpoint
    /// singularity: K(k) = ∫₀^{π/2} dθ / sqrt(1 - k² sin²θ).
    fn k_by_quadrature(k: f64) -> f64 {
        let f = |theta: f64| 1.0 / (1.0 - (k * theta.sin()).powi(2)).sqrt();
        let mut n = 64;
        let mut prev = f64::NAN;
        loop {
            let h = PI / 2.0 / n as f64;
            let mut s = f(0.0) + f(PI / 2.0);
            for i in 1..n {
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
            }
            let val = s * h / 3.0;
            if (val - prev).abs() < 1e-15 * val.abs() {
                return val;
            }
            prev = val;
            n *= 2;
        }
    }

    #[test]
    fn modulus_invariant() {
        for k in [0.0, 0.3, 0.5, 0.999] {
            let m = modulus(k);
            assert!((m.k() * m.k() + m.k_prime() * m.k_prime() - 1.0).abs() < 4.0 * f64::EPSILON);
        }
        assert!(EllipticModulus::new(1.0).is_err());
        assert!(EllipticModulus::new(-0.1).is_err());
    }

    #[test]
    fn k_at_zero_is_half_pi() {
        assert!((complete_elliptic_k(modulus(0.0)) - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn k_matches_quadrature_oracle() {
        // Frozen values computed with the quadrature oracle below and
        // cross-checked against the AGM route.
        let k_half_sqrt2 = complete_elliptic_k(modulus(1.0 / 2.0_f64.sqrt()));
        assert!((k_half_sqrt2 - 1.854074677301372).abs() < 1e-14 * 1.854074677301372);
        let k_half = complete_elliptic_k(modulus(0.5));
        assert!((k_half - 1.685_750_354_812_596).abs() < 1e-14 * 1.685_750_354_812_596);
        for k in [0.1, 0.3, 0.5, 1.0 / 2.0_f64.sqrt(), 0.9, 0.99] {
            let agm = complete_elliptic_k(modulus(k));
            let quad = k_by_quadrature(k);
            assert!(
                ((agm - quad) / quad).abs() < 1e-13,
                "k={k}: agm={agm} quad={quad}"
            );
        }
    }

    #[test]
    fn k_monotone_in_modulus() {
        let mut prev = complete_elliptic_k(modulus(0.0));
        for i in 1..1000 {
            let k = i as f64 / 1000.0 * 0.999;
            let val = complete_elliptic_k(modulus(k));
            assert!(val > prev, "K not increasing at k={k}");
            prev = val;
        }
    }

    #[test]
    fn cn_at_zero_is_one() {
        assert!((jacobi_cn(0.0, modulus(0.3)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cn_degenerates_to_cosine() {
        let v = jacobi_cn(1.0, modulus(0.0)).unwrap();
        assert!((v - 0.5403023058681398).abs() < 1e-15);
    }

    #[test]
    fn cn_quarter_period_zero() {
        let m = modulus(1.0 / 2.0_f64.sqrt());
        let big_k = complete_elliptic_k(m);
        assert!(jacobi_cn(big_k, m).unwrap().abs() < 1e-13);
    }

    #[test]
    fn cn_rejects_non_finite() {
        assert!(jacobi_cn(f64::NAN, modulus(0.5)).is_err());
        assert!(jacobi_cn(f64::INFINITY, modulus(0.5)).is_err());
    }

    #[test]
    fn cn_symmetry_and_periodicity() {
        let m = modulus(0.65);
        let big_k = complete_elliptic_k(m);
        for i in 0..50 {
            let u = (i as f64 / 50.0) * 2.0 * big_k;
            let a = jacobi_cn(2.0 * big_k - u, m).unwrap();
            let b = -jacobi_cn(u, m).unwrap();
            assert!((a - b).abs() < 1e-12, "u={u}: {a} vs {b}");
            let c = jacobi_cn(u + 4.0 * big_k, m).unwrap();
            assert!((c - jacobi_cn(u, m).unwrap()).abs() < 1e-11);
        }
    }

    #[test]
    fn cn_derivative_matches_minus_sn_dn() {
        // d/du cn = -sn·dn, central differences with step 1e-6.
        let m = modulus(0.7);
        let big_k = complete_elliptic_k(m);
        for i in 0..100 {
            let u = (i as f64 + 0.5) / 100.5 * big_k;
            let h = 1e-6;
            let fd =
                (jacobi_cn(u + h, m).unwrap() - jacobi_cn(u - h, m).unwrap()) / (2.0 * h);
            let (sn, _, dn) = jacobi_sn_cn_dn(u, m).unwrap();
            assert!((fd + sn * dn).abs() < 1e-6, "u={u}: fd={fd}, -sn*dn={}", -sn * dn);
        }
    }

    proptest! {
        #[test]
        fn cn_sn_pythagorean(k in 0.0..0.95f64, frac in -1.0..1.0f64) {
            let m = modulus(k);
            let big_k = complete_elliptic_k(m);
            let u = frac * 2.0 * big_k;
            let (sn, cn, _) = jacobi_sn_cn_dn(u, m).unwrap();
            prop_assert!(cn.abs() <= 1.0 + 1e-14);
            prop_assert!((cn * cn + sn * sn - 1.0).abs() < 1e-12);
        }
    }
}
