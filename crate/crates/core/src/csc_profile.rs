//! The free-boundary Duffing problem behind the constant scalar curvature
//! metrics: for each (m, R) there is a unique even positive profile f on
//! [-T, T] with f'' = -f^3 + beta*f, f(+-T) = 0 and f'(+-T) = -+m, where
//! beta = -(R - 8)/2.
//!
//! The profile is constructed twice: in closed form, f(t) = f_max * cn(mu*t, k),
//! and by adaptive Runge-Kutta integration of the initial value problem at the
//! peak. Agreement of the two routes (in particular of the detected half-length
//! T) is the testable shadow of the uniqueness statement.

use serde::{Deserialize, Serialize};

use crate::curvature::CurvatureState;
use crate::error::{Error, Result};
use crate::ode::Dopri5;
use crate::special_fn::{complete_elliptic_k, jacobi_sn_cn_dn, EllipticModulus};

/// Selects one metric g_m(R): the Hirzebruch index m and the scalar curvature R.
/// beta = -(R - 8)/2 is always derived, never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub m: u32,
    pub scalar_curvature: f64,
}

impl SolverParams {
    pub fn new(m: u32, scalar_curvature: f64) -> Result<Self> {
        if m < 1 {
            return Err(Error::Domain("Hirzebruch index m must be >= 1".into()));
        }
        if !scalar_curvature.is_finite() {
            return Err(Error::Domain("scalar curvature must be finite".into()));
        }
        Ok(Self {
            m,
            scalar_curvature,
        })
    }

    pub fn beta(&self) -> f64 {
        -(self.scalar_curvature - 8.0) / 2.0
    }

    /// Right-hand side of the Duffing equation, f'' = -f^3 + beta*f.
    pub fn fpp(&self, f: f64) -> f64 {
        -f * f * f + self.beta() * f
    }

    /// First-integral residual 2(f')^2 + f^4 - 2*beta*f^2 - 2m^2
    /// (zero along any solution of the boundary value problem).
    pub fn first_integral_residual(&self, f: f64, fp: f64) -> f64 {
        2.0 * fp * fp + f.powi(4) - 2.0 * self.beta() * f * f - 2.0 * (self.m as f64).powi(2)
    }

    /// The elliptic constants of the closed-form solution.
    pub fn constants(&self) -> EllipticConstants {
        derive_constants(self)
    }
}

/// Constants of the closed-form solution.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EllipticConstants {
    /// Elliptic modulus, k^2 = (1 + beta / sqrt(2m^2 + beta^2)) / 2.
    pub k: f64,
    /// Quarter period K(k).
    #[serde(rename = "K")]
    pub big_k: f64,
    /// Half-length of the interval, T = K(k) / (2m^2 + beta^2)^{1/4}.
    #[serde(rename = "T")]
    pub t_half: f64,
    /// Peak value f(0) = sqrt(beta + sqrt(beta^2 + 2m^2)).
    pub f_max: f64,
}

impl EllipticConstants {
    /// Frequency mu = (2m^2 + beta^2)^{1/4} = K(k) / T; recomputed rather
    /// than stored so the serialized profile carries no redundant field.
    pub fn mu(&self) -> f64 {
        self.big_k / self.t_half
    }
}

/// Computes (k, K, T, f_max, mu) for the given parameters.
pub fn derive_constants(params: &SolverParams) -> EllipticConstants {
    let beta = params.beta();
    let s = (2.0 * (params.m as f64).powi(2) + beta * beta).sqrt();
    let k = ((1.0 + beta / s) / 2.0).sqrt();
    let modulus = EllipticModulus::new(k).expect("k < 1 for finite beta");
    let big_k = complete_elliptic_k(modulus);
    let mu = s.sqrt();
    EllipticConstants {
        k,
        big_k,
        t_half: big_k / mu,
        f_max: (beta + s).sqrt(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    ClosedForm,
    NumericIvp,
}

/// One grid sample of the profile.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub f: f64,
    pub fp: f64,
    pub fpp: f64,
}

/// A solved profile on [-T, T]: elliptic constants plus a sampled grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricProfile {
    pub m: u32,
    pub scalar_curvature: f64,
    pub beta: f64,
    #[serde(flatten)]
    pub consts: EllipticConstants,
    pub generator: Generator,
    pub samples: Vec<Sample>,
}

impl MetricProfile {
    pub fn params(&self) -> SolverParams {
        SolverParams {
            m: self.m,
            scalar_curvature: self.scalar_curvature,
        }
    }

    /// Full 5-jet (f, f', f'', f''', f'''') at |t| <= T.
    ///
    /// f and f' come from cn evaluation; the higher derivatives close
    /// through the ODE: f'' = -f^3 + beta*f, f''' = (-3f^2 + beta) f',
    /// f'''' = (-3f^2 + beta) f'' - 6 f (f')^2. Finite differences are
    /// never involved, so the jet stays exact down to f = 0.
    pub fn jet(&self, t: f64) -> Result<CurvatureState> {
        if t.abs() > self.consts.t_half * (1.0 + 1e-12) + 1e-15 {
            return Err(Error::Domain(format!(
                "jet requested at t = {t} outside [-T, T] with T = {}",
                self.consts.t_half
            )));
        }
        let (f, fp) = self.eval(t);
        let beta = self.beta;
        let fpp = -f * f * f + beta * f;
        let fppp = (-3.0 * f * f + beta) * fp;
        let fpppp = (-3.0 * f * f + beta) * fpp - 6.0 * f * fp * fp;
        Ok(CurvatureState::new(t, f, fp, fpp, fppp, fpppp))
    }

    /// (f, f') at arbitrary t from the closed-form generator.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let modulus = EllipticModulus::new(self.consts.k).expect("stored modulus valid");
        let mu = self.consts.mu();
        let u = mu * t;
        let (sn, cn, dn) = jacobi_sn_cn_dn(u, modulus).expect("finite argument");
        let f = self.consts.f_max * cn;
        let fp = -self.consts.f_max * mu * sn * dn;
        (f, fp)
    }
}

/// Chebyshev-spaced nodes on [-T, T]; density near the endpoints, where the
/// curvature combinations need the resolution.
fn chebyshev_nodes(t_half: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| -t_half * (std::f64::consts::PI * i as f64 / (n - 1) as f64).cos())
        .collect()
}

/// Solves the boundary value problem in closed form on an n-node grid.
pub fn solve_closed_form(params: &SolverParams, n: usize) -> Result<MetricProfile> {
    let consts = derive_constants(params);
    let beta = params.beta();
    let mut profile = MetricProfile {
        m: params.m,
        scalar_curvature: params.scalar_curvature,
        beta,
        consts,
        generator: Generator::ClosedForm,
        samples: Vec::with_capacity(n),
    };
    for t in chebyshev_nodes(consts.t_half, n) {
        let (mut f, mut fp) = profile.eval(t);
        // Pin the endpoints exactly: cn(±K) is zero only to round-off.
        if (t.abs() - consts.t_half).abs() < 1e-14 * consts.t_half.max(1.0) {
            f = 0.0;
            fp = -t.signum() * params.m as f64;
        }
        profile.samples.push(Sample {
            t,
            f,
            fp,
            fpp: -f * f * f + beta * f,
        });
    }
    Ok(profile)
}

/// Solves the same problem by integrating the initial value problem
/// f(0) = f_max, f'(0) = 0 outward from the peak, detecting the first zero
/// of f by bisection. The detected zero is the numeric T.
pub fn solve_numeric_ivp(params: &SolverParams, tol: f64, n: usize) -> Result<MetricProfile> {
    if !(1e-13..=1e-6).contains(&tol) {
        return Err(Error::Domain(format!(
            "tolerance must lie in [1e-13, 1e-6], got {tol}"
        )));
    }
    let consts = derive_constants(params);
    let beta = params.beta();
    let rhs = move |_t: f64, y: &[f64; 2]| [y[1], -y[0] * y[0] * y[0] + beta * y[0]];
    let y0 = [consts.f_max, 0.0];

    // Outward sweep to the first sign change of f.
    let t_limit = 4.0 * consts.t_half;
    let mut last_positive: (f64, [f64; 2]) = (0.0, y0);
    let mut crossing: Option<(f64, [f64; 2])> = None;
    {
        let mut integrator = Dopri5::new(rhs, tol);
        integrator
            .integrate(
                0.0,
                y0,
                t_limit,
                |t, y| {
                    if y[0] <= 0.0 {
                        crossing = Some((t, *y));
                        true
                    } else {
                        last_positive = (t, *y);
                        false
                    }
                },
                |_, _| {},
            )
            .map_err(|e| Error::Convergence(e.into()))?;
    }
    let (t_hi, _) = crossing.ok_or_else(|| {
        Error::Convergence(format!(
            "no zero of f bracketed by t = {t_limit} (integrator bug: the zero exists analytically)"
        ))
    })?;

    // Bisect the event to 1e-14, re-integrating from the last positive state.
    let (mut t_lo, y_lo) = last_positive;
    let mut t_hi = t_hi;
    let base = (t_lo, y_lo);
    while t_hi - t_lo > 1e-14 {
        let mid = 0.5 * (t_lo + t_hi);
        let mut integrator = Dopri5::new(rhs, tol);
        let y_mid = integrator
            .integrate_to(base.0, base.1, mid)
            .map_err(|e| Error::Convergence(e.into()))?;
        if y_mid[0] > 0.0 {
            t_lo = mid;
        } else {
            t_hi = mid;
        }
    }
    let t_detected = 0.5 * (t_lo + t_hi);

    // Fill the Chebyshev grid for t >= 0 by integrating node to node,
    // then mirror: f is even.
    let nodes = chebyshev_nodes(t_detected, n);
    let mut samples = vec![
        Sample {
            t: 0.0,
            f: 0.0,
            fp: 0.0,
            fpp: 0.0
        };
        n
    ];
    let mut state = y0;
    let mut t_cur = 0.0;
    let mut integrator = Dopri5::new(rhs, tol);
    // The middle Chebyshev node of an odd grid is zero only to round-off;
    // clamp so it is filled by the forward sweep rather than skipped.
    for (idx, &t) in nodes.iter().enumerate().filter(|(_, t)| **t > -1e-12) {
        let target = t.clamp(0.0, t_detected);
        state = integrator
            .integrate_to(t_cur, state, target)
            .map_err(|e| Error::Convergence(e.into()))?;
        t_cur = target;
        let (mut f, fp) = (state[0], state[1]);
        if idx == n - 1 {
            f = f.max(0.0);
        }
        samples[idx] = Sample {
            t,
            f,
            fp,
            fpp: -f * f * f + beta * f,
        };
        // Mirror across t = 0.
        let j = n - 1 - idx;
        samples[j] = Sample {
            t: -t,
            f,
            fp: -fp,
            fpp: samples[idx].fpp,
        };
    }

    let mut consts = consts;
    consts.t_half = t_detected;
    Ok(MetricProfile {
        m: params.m,
        scalar_curvature: params.scalar_curvature,
        beta,
        consts,
        generator: Generator::NumericIvp,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn constants_at_m1_r8() {
        let p = SolverParams::new(1, 8.0).unwrap();
        let c = derive_constants(&p);
        // beta = 0: k^2 = 1/2, f_max = 2^{1/4}, T = K(1/sqrt2)/2^{1/4}.
        assert!((c.k - 1.0 / SQRT2).abs() < 1e-15);
        assert!((c.f_max - 2.0_f64.powf(0.25)).abs() < 4.0 * f64::EPSILON);
        let t_expected = 1.854074677301372 / 2.0_f64.powf(0.25);
        assert!((c.t_half - t_expected).abs() < 1e-13);
        assert!((c.mu() - 2.0_f64.powf(0.25)).abs() < 1e-14);
    }

    #[test]
    fn constants_invariants_random_params() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let m = rng.gen_range(1..=5);
            let r = rng.gen_range(-40.0..40.0);
            let p = SolverParams::new(m, r).unwrap();
            let c = derive_constants(&p);
            let beta = p.beta();
            let s = (2.0 * (m as f64).powi(2) + beta * beta).sqrt();
            assert!((c.k * c.k - (1.0 + beta / s) / 2.0).abs() < 4.0 * f64::EPSILON);
            assert!((c.t_half - c.big_k / s.sqrt()).abs() < 1e-13 * c.t_half);
            assert!((c.f_max * c.f_max - (beta + s)).abs() < 4.0 * f64::EPSILON * (beta + s).abs());
            // Boundary identity f_max * mu * k' = m (closed-form f'(T) = -m).
            let kp = (1.0 - c.k * c.k).sqrt();
            assert!(
                (c.f_max * c.mu() * kp - m as f64).abs() < 1e-12,
                "m={m} R={r}"
            );
        }
    }

    #[test]
    fn closed_form_peak_and_boundary() {
        let p = SolverParams::new(1, 8.0).unwrap();
        let profile = solve_closed_form(&p, 129).unwrap();
        let c = profile.consts;
        let (f0, fp0) = profile.eval(0.0);
        assert!((f0 - 1.189207115002721).abs() < 1e-12);
        assert!(fp0.abs() < 1e-13);
        let (ft, fpt) = profile.eval(c.t_half);
        assert!(ft.abs() < 1e-12);
        assert!((fpt + 1.0).abs() < 1e-11);

        let p2 = SolverParams::new(2, 8.0).unwrap();
        let prof2 = solve_closed_form(&p2, 65).unwrap();
        let (_, fpt2) = prof2.eval(prof2.consts.t_half);
        assert!((fpt2 + 2.0).abs() < 1e-11);
    }

    #[test]
    fn profile_invariants() {
        for (m, r) in [(1, 8.0), (2, 0.0), (3, 24.0), (1, -8.0)] {
            let p = SolverParams::new(m, r).unwrap();
            let profile = solve_closed_form(&p, 257).unwrap();
            let n = profile.samples.len();
            for (i, s) in profile.samples.iter().enumerate() {
                // Evenness against the mirrored node.
                let ms = &profile.samples[n - 1 - i];
                assert!((s.f - ms.f).abs() < 1e-12, "evenness at t={}", s.t);
                // First integral.
                assert!(
                    p.first_integral_residual(s.f, s.fp).abs() < 1e-10,
                    "FI at t={} for (m,R)=({m},{r})",
                    s.t
                );
                // Positivity inside, monotone increase on [-T, 0).
                if i > 0 && i < n - 1 {
                    assert!(s.f > 0.0);
                    if s.t < -1e-12 {
                        assert!(s.fp > 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn numeric_ivp_matches_closed_form() {
        let p = SolverParams::new(1, 8.0).unwrap();
        let closed = solve_closed_form(&p, 201).unwrap();
        let numeric = solve_numeric_ivp(&p, 1e-12, 201).unwrap();
        assert!(
            (numeric.consts.t_half - closed.consts.t_half).abs() < 1e-11,
            "T mismatch: {} vs {}",
            numeric.consts.t_half,
            closed.consts.t_half
        );
        for (a, b) in closed.samples.iter().zip(&numeric.samples) {
            assert!((a.f - b.f).abs() < 1e-9, "f mismatch at t={}", a.t);
        }
    }

    #[test]
    fn numeric_ivp_first_integral_along_trajectory() {
        let p = SolverParams::new(1, 0.0).unwrap();
        let numeric = solve_numeric_ivp(&p, 1e-12, 201).unwrap();
        let sup = numeric
            .samples
            .iter()
            .map(|s| p.first_integral_residual(s.f, s.fp).abs())
            .fold(0.0_f64, f64::max);
        assert!(sup < 1e-10, "sup FI residual = {sup}");
    }

    #[test]
    fn numeric_ivp_boundary_slope() {
        let p = SolverParams::new(3, 24.0).unwrap();
        let numeric = solve_numeric_ivp(&p, 1e-12, 129).unwrap();
        let last = numeric.samples.last().unwrap();
        assert!((last.fp + 3.0).abs() < 1e-9, "f'(T) = {}", last.fp);
    }

    #[test]
    fn ivp_rejects_bad_tolerance() {
        let p = SolverParams::new(1, 8.0).unwrap();
        assert!(solve_numeric_ivp(&p, 1e-5, 65).is_err());
        assert!(solve_numeric_ivp(&p, 1e-14, 65).is_err());
    }

    #[test]
    fn jet_values_at_peak() {
        let p = SolverParams::new(1, 8.0).unwrap();
        let profile = solve_closed_form(&p, 65).unwrap();
        let jet = profile.jet(0.0).unwrap();
        assert!((jet.f - 2.0_f64.powf(0.25)).abs() < 1e-12);
        assert!(jet.fp.abs() < 1e-13);
        assert!((jet.fpp + 2.0_f64.powf(0.75)).abs() < 1e-12);
        assert!(jet.fppp.abs() < 1e-12);
        assert!(profile.jet(10.0).is_err());
    }

    #[test]
    fn jet_vanishing_even_derivatives_at_boundary() {
        let p = SolverParams::new(2, -8.0).unwrap();
        let profile = solve_closed_form(&p, 65).unwrap();
        let jet = profile.jet(profile.consts.t_half).unwrap();
        assert!(jet.f.abs() < 1e-12);
        assert!(jet.fpp.abs() < 1e-11);
        assert!(jet.fpppp.abs() < 1e-10);
    }

    #[test]
    fn rejects_m_zero() {
        assert!(SolverParams::new(0, 8.0).is_err());
    }
}
