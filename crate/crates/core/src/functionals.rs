//! Global quantities of the metrics g_m(R): volume, Yamabe value, the
//! quadratic B_t functional, the closed definite integrals, the
//! Chern-Gauss-Bonnet check, the restricted-Weyl Euler-Lagrange pairing,
//! and the first-eigenvalue bounds. Everything is computed twice where
//! possible: closed form against independent quadrature.

use serde::{Deserialize, Serialize};

use crate::csc_profile::{MetricProfile, SolverParams};
use crate::curvature::{csc_bach_regular, norm_invariants, CurvatureState};
use crate::error::{Error, Result};
use crate::quadrature;

const PI: f64 = std::f64::consts::PI;
const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Relative target for all functional quadratures.
const QUAD_TOL: f64 = 1e-10;
/// Panel count the doubling starts from; the integrands are single-bump
/// analytic curves, but a one-panel estimate can agree with a two-panel
/// one by accident.
const QUAD_PANELS: usize = 8;

/// The four closed definite integrals over (-T, T):
/// T, int f, int f^3, int f^5.
#[derive(Debug, Clone, Copy)]
pub struct ClosedIntegrals {
    pub t_half: f64,
    pub int_f: f64,
    pub int_f3: f64,
    pub int_f5: f64,
}

/// T = K(k)/(2m^2+beta^2)^{1/4}, int f = 2 sqrt2 asin k,
/// int f^3 = 2 beta sqrt2 asin k + 2m,
/// int f^5 = (2m^2+3beta^2) sqrt2 asin k + 3 m beta.
pub fn closed_integrals(params: &SolverParams) -> Result<ClosedIntegrals> {
    let c = params.constants();
    let m = params.m as f64;
    let beta = params.beta();
    let asin_k = c.k.asin();
    Ok(ClosedIntegrals {
        t_half: c.t_half,
        int_f: 2.0 * SQRT2 * asin_k,
        int_f3: 2.0 * beta * SQRT2 * asin_k + 2.0 * m,
        int_f5: (2.0 * m * m + 3.0 * beta * beta) * SQRT2 * asin_k + 3.0 * m * beta,
    })
}

/// (2 pi^2 / m) int_{-T}^{T} f(t) phi(jet(t)) dt by adaptive composite
/// Gauss-Legendre. The 1/m is the covering-map volume correction.
pub fn quadrature_weighted<F>(profile: &MetricProfile, mut phi: F) -> Result<f64>
where
    F: FnMut(&CurvatureState) -> Result<f64>,
{
    let t_half = profile.consts.t_half;
    let raw = quadrature::integrate_from(
        |t| {
            let jet = profile.jet(t)?;
            Ok(jet.f * phi(&jet)?)
        },
        -t_half,
        t_half,
        QUAD_TOL,
        QUAD_PANELS,
    )?;
    Ok(2.0 * PI * PI / profile.m as f64 * raw)
}

/// Total volume: (2 pi^2 / m) int f dt = 4 sqrt2 pi^2 asin(k) / m.
pub fn volume(params: &SolverParams) -> Result<f64> {
    let c = params.constants();
    Ok(4.0 * SQRT2 * PI * PI * c.k.asin() / params.m as f64)
}

/// Yamabe value 2 * 2^{1/4} pi R sqrt(asin(k)/m), cross-checked against
/// R sqrt(Vol) to 1e-10 relative.
pub fn yamabe_value(params: &SolverParams) -> Result<f64> {
    let c = params.constants();
    let r = params.scalar_curvature;
    let closed = 2.0 * 2.0_f64.powf(0.25) * PI * r * (c.k.asin() / params.m as f64).sqrt();
    let via_volume = r * volume(params)?.sqrt();
    if (closed - via_volume).abs() > 1e-10 * closed.abs().max(1.0) {
        return Err(Error::Inconsistency(format!(
            "Yamabe routes disagree: {closed} vs {via_volume}"
        )));
    }
    Ok(closed)
}

/// Slope and intercept of the affine-in-t value of the B_t functional:
/// bt(t) = slope * t + intercept, with slope = R^2 Vol.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BtCoefficients {
    pub slope: f64,
    pub intercept: f64,
}

impl BtCoefficients {
    pub fn at(&self, t: f64) -> f64 {
        self.slope * t + self.intercept
    }
}

/// Closed-form value of int |W|^2 + t int R^2:
/// (2 pi^2/m)(72 m^2 + ((6t+59)/3) R^2 - 272 R + 960) sqrt2 asin(k)
/// - 4 pi^2 (19 R - 120), returned as (slope, intercept) in t.
pub fn bt_coefficients(params: &SolverParams) -> Result<BtCoefficients> {
    let c = params.constants();
    let m = params.m as f64;
    let r = params.scalar_curvature;
    let asin_k = c.k.asin();
    let pref = 2.0 * PI * PI / m * SQRT2 * asin_k;
    let slope = pref * 2.0 * r * r;
    let intercept = pref * (72.0 * m * m + 59.0 / 3.0 * r * r - 272.0 * r + 960.0)
        - 4.0 * PI * PI * (19.0 * r - 120.0);
    Ok(BtCoefficients { slope, intercept })
}

/// bt_coefficients evaluated at one t.
pub fn bt_value(params: &SolverParams, t: f64) -> Result<f64> {
    Ok(bt_coefficients(params)?.at(t))
}

/// int_{-T}^{T} f (|W|^2/4 + R^2/24 - |tsRic|^2/2) dt. By Chern-Gauss-
/// Bonnet (8 pi^2 chi = 32 pi^2 on every Sigma_m, and the orbit volume
/// element contributes 2 pi^2/m) this equals 16 m. The Weyl norm here is
/// the full 4-tensor norm, hence the 1/4 in front of it.
pub fn cgb_check(profile: &MetricProfile) -> Result<f64> {
    let integral = quadrature_weighted(profile, |jet| {
        let d = norm_invariants(jet)?;
        Ok(d.w_sq / 4.0 + d.r_sq / 24.0 - d.tsric_sq / 2.0)
    })?;
    Ok(integral * profile.m as f64 / (2.0 * PI * PI))
}

/// A Gaussian perturbation direction for the restricted Weyl functional.
#[derive(Debug, Clone, Copy)]
pub struct Bump {
    pub center: f64,
    pub sigma: f64,
    pub amplitude: f64,
}

impl Bump {
    /// (b, b', b'') at t.
    pub fn jet(&self, t: f64) -> (f64, f64, f64) {
        let u = (t - self.center) / self.sigma;
        let b = self.amplitude * (-0.5 * u * u).exp();
        let bp = -u / self.sigma * b;
        let bpp = (u * u - 1.0) / (self.sigma * self.sigma) * b;
        (b, bp, bpp)
    }
}

/// A fixed spread of interior bumps, deterministic by construction.
pub fn standard_bumps(t_half: f64, n: usize) -> Vec<Bump> {
    (0..n)
        .map(|i| {
            let s = if n > 1 {
                i as f64 / (n - 1) as f64
            } else {
                0.5
            };
            Bump {
                center: t_half * (s - 0.5), // spread over [-T/2, T/2]
                sigma: t_half * (0.05 + 0.05 * s),
                amplitude: 0.5 + 1.2 * (1.0 - s),
            }
        })
        .collect()
}

const FD_EPS: f64 = 1e-5;

/// |W|^2 from a raw (f, f', f'') triple, with no CSC assumption.
fn weyl_sq_raw(f: f64, fp: f64, fpp: f64) -> f64 {
    let f2 = f * f;
    let r = -2.0 * fpp / f - 2.0 * f2 + 8.0;
    (r * r - 12.0 * f2 * r + 144.0 * fp * fp + 36.0 * f2 * f2) / 3.0
}

/// Central finite-difference directional derivative of
/// F(f) = (2 pi^2/m) int f |W|^2 dt in direction `bump`, together with
/// the predicted pairing (2 pi^2/m) int b B_3 dt (B_3 via the CSC-regular
/// route, so it is valid up to the boundary).
///
/// Returns (derivative, pairing); their ratio is the empirical
/// proportionality constant of the Euler-Lagrange identity.
pub fn weyl_el_pairing(profile: &MetricProfile, bump: &Bump) -> Result<(f64, f64)> {
    let t_half = profile.consts.t_half;
    let params = profile.params();

    // The perturbed profile must stay positive where it is evaluated.
    for i in 1..400 {
        let t = -t_half + 2.0 * t_half * i as f64 / 400.0;
        let (f, _) = profile.eval(t);
        let (b, _, _) = bump.jet(t);
        if f > 1e-4 && f - FD_EPS * b.abs() <= 0.0 {
            return Err(Error::Precondition(format!(
                "perturbed profile goes nonpositive near t = {t}"
            )));
        }
    }

    let f_at = |t: f64, eps: f64| -> Result<f64> {
        let jet = profile.jet(t)?;
        let (b, bp, bpp) = bump.jet(t);
        let ft = jet.f + eps * b;
        let fpt = jet.fp + eps * bp;
        let fppt = jet.fpp + eps * bpp;
        Ok(ft * weyl_sq_raw(ft, fpt, fppt))
    };
    let prefactor = 2.0 * PI * PI / profile.m as f64;
    let fp_int = quadrature::integrate_from(
        |t| f_at(t, FD_EPS),
        -t_half,
        t_half,
        QUAD_TOL,
        QUAD_PANELS * 2,
    )?;
    let fm_int = quadrature::integrate_from(
        |t| f_at(t, -FD_EPS),
        -t_half,
        t_half,
        QUAD_TOL,
        QUAD_PANELS * 2,
    )?;
    let derivative = prefactor * (fp_int - fm_int) / (2.0 * FD_EPS);

    let pairing = prefactor
        * quadrature::integrate_from(
            |t| {
                let (f, fp) = profile.eval(t);
                let (b, _, _) = bump.jet(t);
                Ok(b * csc_bach_regular(&params, f, fp)?.b3)
            },
            -t_half,
            t_half,
            QUAD_TOL,
            QUAD_PANELS * 2,
        )?;
    Ok((derivative, pairing))
}

/// Relative mismatch |derivative - c * pairing| / max(|derivative|, 1).
pub fn weyl_el_residual(profile: &MetricProfile, bump: &Bump, c: f64) -> Result<f64> {
    let (derivative, pairing) = weyl_el_pairing(profile, bump)?;
    Ok((derivative - c * pairing).abs() / derivative.abs().max(1.0))
}

/// Calibrates the proportionality constant on the first bump and returns
/// (c, max relative spread of c across the remaining bumps).
pub fn weyl_el_consistency(profile: &MetricProfile, bumps: &[Bump]) -> Result<(f64, f64)> {
    if bumps.is_empty() {
        return Err(Error::Precondition("no bumps supplied".into()));
    }
    let (d0, p0) = weyl_el_pairing(profile, &bumps[0])?;
    if p0.abs() < 1e-12 {
        return Err(Error::Precondition(
            "calibration bump pairs to zero".into(),
        ));
    }
    let c = d0 / p0;
    let mut spread = 0.0_f64;
    for bump in &bumps[1..] {
        let (d, p) = weyl_el_pairing(profile, bump)?;
        let ci = d / p;
        spread = spread.max((ci - c).abs() / c.abs());
    }
    Ok((c, spread))
}

/// Stability classification: the artifact only ever certifies the
/// unstable direction (lambda_1 <= 8 < R/3 once R > 24).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityTag {
    #[serde(rename = "unstable_R_gt_24")]
    UnstableRGt24,
    BoundInconclusive,
}

/// First-eigenvalue bounds for the fiber direction:
/// lower = K(k)^2 / (2 pi^2 sqrt(2m^2+beta^2) asin^2 k),
/// upper = sqrt2 / asin(k); the total space additionally has
/// lambda_1 <= 8.
pub fn eigen_bounds(params: &SolverParams) -> Result<(f64, f64, StabilityTag)> {
    let c = params.constants();
    let m = params.m as f64;
    let beta = params.beta();
    let asin_k = c.k.asin();
    let s = (2.0 * m * m + beta * beta).sqrt();
    let lower = c.big_k * c.big_k / (2.0 * PI * PI * s * asin_k * asin_k);
    let upper = SQRT2 / asin_k;
    let tag = if params.scalar_curvature > 24.0 {
        StabilityTag::UnstableRGt24
    } else {
        StabilityTag::BoundInconclusive
    };
    Ok((lower, upper, tag))
}

/// One full functional evaluation of g_m(R).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub m: u32,
    pub scalar_curvature: f64,
    pub volume: f64,
    pub yamabe: f64,
    pub bt: BtCoefficients,
    pub int_f: f64,
    pub int_f3: f64,
    pub int_f5: f64,
    pub cgb_integral: f64,
    /// Empirical Euler-Lagrange proportionality constant of the
    /// restricted Weyl functional.
    pub weyl_restricted: f64,
    pub eigen_lower: f64,
    pub eigen_upper: f64,
    pub stability: StabilityTag,
}

/// Evaluates every functional of one profile, cross-checking closed forms
/// against quadrature as it goes.
pub fn report(profile: &MetricProfile) -> Result<FunctionalReport> {
    let params = profile.params();
    let ints = closed_integrals(&params)?;
    let vol = volume(&params)?;
    let yamabe = yamabe_value(&params)?;
    let bt = bt_coefficients(&params)?;
    let cgb = cgb_check(profile)?;
    let bumps = standard_bumps(profile.consts.t_half, 3);
    let (weyl_c, _) = weyl_el_consistency(profile, &bumps)?;
    let (eigen_lower, eigen_upper, stability) = eigen_bounds(&params)?;

    // Quadrature cross-checks on the closed integrals and B_t.
    let m = profile.m as f64;
    let pref = 2.0 * PI * PI / m;
    let q_vol = quadrature_weighted(profile, |_| Ok(1.0))?;
    if (q_vol - vol).abs() > 1e-8 * vol.abs().max(1.0) {
        return Err(Error::Inconsistency(format!(
            "volume: quadrature {q_vol} vs closed {vol}"
        )));
    }
    let q_f3 = quadrature_weighted(profile, |jet| Ok(jet.f * jet.f))?;
    let c_f3 = pref * ints.int_f3;
    if (q_f3 - c_f3).abs() > 1e-8 * c_f3.abs().max(1.0) {
        return Err(Error::Inconsistency(format!(
            "int f^3: quadrature {q_f3} vs closed {c_f3}"
        )));
    }
    let q_w = quadrature_weighted(profile, |jet| Ok(norm_invariants(jet)?.w_sq))?;
    let q_r2 = quadrature_weighted(profile, |jet| Ok(norm_invariants(jet)?.r_sq))?;
    for t in [0.0, 1.0] {
        let quad = q_w + t * q_r2;
        let closed = bt.at(t);
        if (quad - closed).abs() > 1e-7 * closed.abs().max(1.0) {
            return Err(Error::Inconsistency(format!(
                "B_t at t={t}: quadrature {quad} vs closed {closed}"
            )));
        }
    }

    Ok(FunctionalReport {
        m: profile.m,
        scalar_curvature: profile.scalar_curvature,
        volume: vol,
        yamabe,
        bt,
        int_f: ints.int_f,
        int_f3: ints.int_f3,
        int_f5: ints.int_f5,
        cgb_integral: cgb,
        weyl_restricted: weyl_c,
        eigen_lower,
        eigen_upper,
        stability,
    })
}
