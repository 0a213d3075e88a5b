//! The space-time cutoff family ψ_R, ψ*_R built from a C² profile η,
//! its derivatives on the parabolic region P(R), empirical estimation of
//! the four derivative-bound constants C₁–C₄, and the layer integral
//! behind the log 2 layer-cake step.
//!
//! The profile is fixed as the quintic smoothstep on the transition band:
//! η(s) = 1 on [0,1/2], η(s) = 1 − q(2s−1) on (1/2,1) with
//! q(σ) = σ³(10 − 15σ + 6σ²), η(s) = 0 on [1,∞). q has vanishing first
//! and second derivatives at σ ∈ {0,1}, so η is C² globally with
//! closed-form derivatives.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quad;

/// Band excluded near r = 1 when sampling the (iv) ratio: (1−1/r)/log r → 1
/// there, and both numerator and the r·log r weight vanish.
const R_EXCLUSION_BAND: f64 = 1e-8;
/// Safety factor applied to sampled suprema.
const SAFETY: f64 = 1.1;

/// Which value `psi_eval` returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsiValue {
    Psi,
    PsiStar,
    Dt,
    Dtt,
    Dr,
    Lap,
}

/// Cutoff family for a given nonlinearity power p: ψ_R = η(s_R)^{2p'} with
/// s_R(r,t) = ((r−1)² + t)/R and p' = p/(p−1).
#[derive(Debug, Clone, Copy)]
pub struct CutoffSpec {
    pub p: f64,
    /// Hölder conjugate p' = p/(p−1).
    pub p_conj: f64,
}

/// The four empirical Lemma-2.4 constants (suprema of the derivative
/// ratios over P(R), already including the safety factor).
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct CutoffConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

/// η(s), η'(s), η''(s) for the quintic-smoothstep profile.
fn eta_all(s: f64) -> (f64, f64, f64) {
    if s <= 0.5 {
        (1.0, 0.0, 0.0)
    } else if s >= 1.0 {
        (0.0, 0.0, 0.0)
    } else {
        let sigma = 2.0 * s - 1.0;
        let q = sigma * sigma * sigma * (10.0 - 15.0 * sigma + 6.0 * sigma * sigma);
        let dq = 30.0 * sigma * sigma * (1.0 - sigma) * (1.0 - sigma);
        let ddq = 60.0 * sigma * (1.0 - sigma) * (1.0 - 2.0 * sigma);
        (1.0 - q, -2.0 * dq, -4.0 * ddq)
    }
}

pub fn eta(s: f64) -> f64 {
    eta_all(s).0
}

pub fn eta_star(s: f64) -> f64 {
    if s < 0.5 {
        0.0
    } else {
        eta(s)
    }
}

impl CutoffSpec {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::Config(format!("cutoff: p must be in (1, ∞), got {p}")));
        }
        Ok(Self { p, p_conj: p / (p - 1.0) })
    }

    fn exponent(&self) -> f64 {
        2.0 * self.p_conj
    }

    /// s_R(r, t) = ((r−1)² + t)/R.
    pub fn s_r(r_cap: f64, r: f64, t: f64) -> f64 {
        ((r - 1.0) * (r - 1.0) + t) / r_cap
    }

    /// Evaluate ψ_R, ψ*_R or a derivative of ψ_R at (r, t).
    ///
    /// `Lap` is the 2D radial Laplacian ∂²_r + (1/r)∂_r of ψ_R. Everything
    /// vanishes identically outside P(R), and ψ_R = 1 on P(R/2).
    pub fn psi_eval(&self, r_cap: f64, r: f64, t: f64, what: PsiValue) -> Result<f64> {
        self.psi_eval_drift(r_cap, r, t, what, 1.0)
    }

    /// Same as `psi_eval` but with a configurable drift coefficient so the
    /// Laplacian can be the N-dimensional radial one ∂²_r + (N−1)/r ∂_r.
    pub fn psi_eval_drift(
        &self,
        r_cap: f64,
        r: f64,
        t: f64,
        what: PsiValue,
        drift: f64,
    ) -> Result<f64> {
        if r_cap <= 0.0 {
            return Err(Error::Domain(format!("psi_eval: R must be > 0, got {r_cap}")));
        }
        if r < 1.0 || t < 0.0 {
            return Err(Error::Domain(format!("psi_eval: need r ≥ 1 and t ≥ 0, got ({r}, {t})")));
        }
        let s = Self::s_r(r_cap, r, t);
        let (e, d1, d2) = eta_all(s);
        let m = self.exponent();
        let v = match what {
            PsiValue::Psi => e.powf(m),
            PsiValue::PsiStar => eta_star(s).powf(m),
            PsiValue::Dt => m * e.powf(m - 1.0) * d1 / r_cap,
            PsiValue::Dtt => {
                (m * (m - 1.0) * e.powf(m - 2.0) * d1 * d1 + m * e.powf(m - 1.0) * d2)
                    / (r_cap * r_cap)
            }
            PsiValue::Dr => m * e.powf(m - 1.0) * d1 * 2.0 * (r - 1.0) / r_cap,
            PsiValue::Lap => {
                let g = 2.0 * (r - 1.0) / r_cap;
                // Δs_R = 2/R + drift·(1/r)·2(r−1)/R; drift = 1 is the 2D case (2/R)(2−1/r)
                let lap_s = 2.0 / r_cap + drift * 2.0 * (r - 1.0) / (r * r_cap);
                m * (m - 1.0) * e.powf(m - 2.0) * d1 * d1 * g * g
                    + m * e.powf(m - 1.0) * (d2 * g * g + d1 * lap_s)
            }
        };
        // derivatives vanish wherever η is flat; avoid -0.0 noise
        Ok(if v == 0.0 { 0.0 } else { v })
    }

    /// The four Lemma-2.4 ratios at (r, t) ∈ P(R) in algebraically
    /// cancelled form (the η-power cancellation
    /// η^{2p'−1}·η^{−2p'/p} = η is exact, so no 0/0 can arise):
    ///   (ii)  |∂_t ψ_R|·R·(ψ*)^{−1/p}          = 2p'·η|η'|
    ///   (iii) |∂²_t ψ_R|·R²·(ψ*)^{−1/p}        = |2p'(2p'−1)η'² + 2p'ηη''|
    ///   (iv)  |∂_r ψ_R|·R·(r log r)⁻¹·(ψ*)^{−1/p} = 2p'·η|η'|·2(r−1)/(r log r)
    ///   (v)   |Δψ_R|·R·(ψ*)^{−1/p}  with ξ = 4(r−1)²/R
    ///         = |2p'(2p'−1)η'²ξ + 2p'η(η''ξ + 2η'(2−1/r))|
    pub fn lemma_ratios(&self, r_cap: f64, r: f64, t: f64) -> [f64; 4] {
        let s = Self::s_r(r_cap, r, t);
        if s <= 0.5 || s >= 1.0 {
            return [0.0; 4];
        }
        let (e, d1, d2) = eta_all(s);
        let m = self.exponent();
        let xi = 4.0 * (r - 1.0) * (r - 1.0) / r_cap;
        let ratio1 = m * e * d1.abs();
        let ratio2 = (m * (m - 1.0) * d1 * d1 + m * e * d2).abs();
        let ratio3 = if r - 1.0 < R_EXCLUSION_BAND {
            // limit value: (1−1/r)/log r → 1 as r → 1
            2.0 * ratio1
        } else {
            ratio1 * 2.0 * (r - 1.0) / (r * r.ln())
        };
        let ratio4 = (m * (m - 1.0) * d1 * d1 * xi + m * e * (d2 * xi + 2.0 * d1 * (2.0 - 1.0 / r)))
            .abs();
        [ratio1, ratio2, ratio3, ratio4]
    }

    /// Empirical suprema of the four Lemma-2.4 ratios over sampled points of
    /// P(R) for every R in `r_list`, times a 1.1 safety factor. Sampling is
    /// seeded and deterministic.
    pub fn estimate_constants(
        &self,
        r_list: &[f64],
        sample_density: usize,
        seed: u64,
    ) -> Result<CutoffConstants> {
        if r_list.is_empty() {
            return Err(Error::Config("estimate_constants: empty R list".into()));
        }
        for &r_cap in r_list {
            if r_cap < 1.0 {
                return Err(Error::Config(format!(
                    "estimate_constants: all R must be ≥ 1, got {r_cap}"
                )));
            }
        }
        if sample_density < 1000 {
            return Err(Error::Config(format!(
                "estimate_constants: need ≥ 1000 samples per region, got {sample_density}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sup = [0.0f64; 4];
        for &r_cap in r_list {
            for _ in 0..sample_density {
                // stratify in s over the active band [1/2, 1), then split
                // (r−1)² + t = s·R between the two coordinates
                let s = 0.5 + 0.5 * rng.gen::<f64>();
                let a2_frac = rng.gen::<f64>();
                let a = (a2_frac * s * r_cap).sqrt().max(R_EXCLUSION_BAND);
                let r = 1.0 + a;
                let t = (s * r_cap - a * a).max(0.0);
                let ratios = self.lemma_ratios(r_cap, r, t);
                for (acc, v) in sup.iter_mut().zip(ratios) {
                    if !v.is_finite() {
                        return Err(Error::Numerical(
                            "estimate_constants: non-finite ratio (invariant violation)".into(),
                        ));
                    }
                    if v > *acc {
                        *acc = v;
                    }
                }
            }
        }
        Ok(CutoffConstants {
            c1: SAFETY * sup[0],
            c2: SAFETY * sup[1],
            c3: SAFETY * sup[2],
            c4: SAFETY * sup[3],
        })
    }

    /// ∫_{max(s,1/2)}^{1} η(σ)^{2p'} σ⁻¹ dσ — the inner layer integral of
    /// the layer-cake step. Always ≤ log 2.
    pub fn layer_integral(&self, s: f64) -> Result<f64> {
        if s < 0.0 {
            return Err(Error::Domain(format!("layer_integral: s must be ≥ 0, got {s}")));
        }
        let lo = s.max(0.5);
        if lo >= 1.0 {
            return Ok(0.0);
        }
        let m = self.exponent();
        quad::adaptive(|sigma| eta(sigma).powf(m) / sigma, lo, 1.0, 1e-12)
    }
}
