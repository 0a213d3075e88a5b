//! Problem parameters, radial initial data, the log-weighted data moment,
//! the admissibility ray condition on it, and the angle/constant selection
//! (ξ₀, c₀) that feeds the certifier.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

/// Default angular tolerance for the ray-membership test (the forbidden set
/// {−ρλ : ρ ≥ 0} has measure zero; exact float equality is meaningless).
pub const ANGLE_TOL: f64 = 1e-9;
/// Default clamp margin keeping |ξ₀| away from π/2.
pub const DEFAULT_MARGIN: f64 = 0.1;

/// Harmonic-weight mode: Φ = log r on the planar exterior domain, or
/// Φ = 1 − r^{2−N} for the N-dimensional exterior problem (N ≥ 3).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WeightMode {
    Log2D,
    PowerND(u32),
}

impl WeightMode {
    /// Φ(r).
    pub fn phi(self, r: f64) -> f64 {
        match self {
            WeightMode::Log2D => r.ln(),
            WeightMode::PowerND(n) => 1.0 - r.powi(2 - n as i32),
        }
    }

    /// Radial surface measure μ(r) with ∫ F dx = ∫ F(r) μ(r) dr:
    /// 2πr in the plane, |S^{N−1}| r^{N−1} in N dimensions.
    pub fn measure(self, r: f64) -> f64 {
        match self {
            WeightMode::Log2D => 2.0 * std::f64::consts::PI * r,
            WeightMode::PowerND(n) => sphere_surface(n) * r.powi(n as i32 - 1),
        }
    }

    /// Drift coefficient d in the radial Laplacian ∂²_r + (d/r)∂_r.
    pub fn laplace_drift(self) -> f64 {
        match self {
            WeightMode::Log2D => 1.0,
            WeightMode::PowerND(n) => (n - 1) as f64,
        }
    }
}

/// |S^{n−1}| = 2 π^{n/2} / Γ(n/2).
pub fn sphere_surface(n: u32) -> f64 {
    // Γ(n/2) by the recurrence from Γ(1) = 1 or Γ(1/2) = √π
    let mut gamma;
    let mut x;
    if n % 2 == 0 {
        gamma = 1.0;
        x = 1.0;
    } else {
        gamma = std::f64::consts::PI.sqrt();
        x = 0.5;
    }
    while x < n as f64 / 2.0 - 0.25 {
        gamma *= x;
        x += 1.0;
    }
    2.0 * std::f64::consts::PI.powf(n as f64 / 2.0) / gamma
}

/// The tuple (τ, ζ, λ, p, ε) plus the weight-mode selector.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ModelParams {
    /// 0: parabolic/dispersive first-order form; 1: damped wave.
    pub tau: u8,
    /// Damping phase in [−π/2, π/2].
    pub zeta: f64,
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub p: f64,
    pub epsilon: f64,
    pub weight_mode: WeightMode,
}

impl ModelParams {
    pub fn lambda(&self) -> Complex64 {
        Complex64::new(self.lambda_re, self.lambda_im)
    }

    pub fn damping(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.zeta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tau > 1 {
            return Err(Error::Config(format!("model.tau must be 0 or 1, got {}", self.tau)));
        }
        if !(self.zeta.abs() <= std::f64::consts::FRAC_PI_2) {
            return Err(Error::Config(format!("model.zeta must lie in [−π/2, π/2], got {}", self.zeta)));
        }
        if !self.lambda().is_finite() {
            // λ = 0 is a valid simulation (pure decay); certification
            // separately requires λ ≠ 0
            return Err(Error::Config("model.lambda must be finite".into()));
        }
        if !(self.p > 1.0) || !self.p.is_finite() {
            return Err(Error::Config(format!("model.p must be in (1, ∞), got {}", self.p)));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::Config(format!("model.epsilon must be > 0, got {}", self.epsilon)));
        }
        if let WeightMode::PowerND(n) = self.weight_mode {
            if n < 3 {
                return Err(Error::Config(format!("weight_mode PowerND requires N ≥ 3, got {n}")));
            }
        }
        Ok(())
    }
}

/// Named radial shapes on [1, ∞). All vanish outside their support and at
/// r = 1 (Dirichlet compatibility); all but `Indicator` are C².
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Profile {
    /// C^∞ bump exp(1 − 1/(1−x²)) on (r_lo, r_hi), x the affine map to (−1,1).
    Bump { r_lo: f64, r_hi: f64 },
    /// Indicator of [r_lo + edge, r_hi − edge] mollified with quintic
    /// smoothstep ramps of width `edge`.
    Annulus { r_lo: f64, r_hi: f64, edge: f64 },
    /// Gaussian exp(−((r−center)/width)²) windowed to [center−5w, center+5w].
    GaussianRing { center: f64, width: f64 },
    /// Sharp indicator of [r_lo, r_hi] (diagnostics / quadrature oracles).
    Indicator { r_lo: f64, r_hi: f64 },
    /// Tabulated samples with linear interpolation; zero outside the table.
    Tabulated { rs: Vec<f64>, values: Vec<f64> },
}

fn smoothstep(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
    }
}

impl Profile {
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Profile::Bump { r_lo, r_hi }
            | Profile::Annulus { r_lo, r_hi, .. }
            | Profile::Indicator { r_lo, r_hi } => (r_lo, r_hi),
            Profile::GaussianRing { center, width } => (center - 5.0 * width, center + 5.0 * width),
            Profile::Tabulated { ref rs, .. } => (
                rs.first().copied().unwrap_or(1.0),
                rs.last().copied().unwrap_or(1.0),
            ),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.support();
        if !(lo > 1.0 && hi > lo && hi.is_finite()) {
            return Err(Error::Config(format!(
                "profile support [{lo}, {hi}] must satisfy 1 < r_lo < r_hi < ∞"
            )));
        }
        match *self {
            Profile::Annulus { r_lo, r_hi, edge } => {
                if !(edge > 0.0 && 2.0 * edge <= r_hi - r_lo) {
                    return Err(Error::Config(format!(
                        "annulus edge {edge} must be in (0, (r_hi−r_lo)/2]"
                    )));
                }
            }
            Profile::GaussianRing { width, .. } => {
                if !(width > 0.0) {
                    return Err(Error::Config("gaussian ring width must be > 0".into()));
                }
            }
            Profile::Tabulated { ref rs, ref values } => {
                if rs.len() != values.len() || rs.len() < 2 {
                    return Err(Error::Config("tabulated profile needs ≥ 2 matching samples".into()));
                }
                if !rs.windows(2).all(|w| w[0] < w[1]) {
                    return Err(Error::Config("tabulated radii must be strictly increasing".into()));
                }
                if !values.iter().all(|v| v.is_finite()) {
                    return Err(Error::Config("tabulated values must be finite".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Real shape value at radius r.
    pub fn eval(&self, r: f64) -> f64 {
        let (lo, hi) = self.support();
        if r <= lo || r >= hi {
            // Indicator is closed on its support; everything else is 0 there anyway
            if let Profile::Indicator { r_lo, r_hi } = *self {
                return if r >= r_lo && r <= r_hi { 1.0 } else { 0.0 };
            }
            return 0.0;
        }
        match *self {
            Profile::Bump { r_lo, r_hi } => {
                let x = (2.0 * r - (r_lo + r_hi)) / (r_hi - r_lo);
                (1.0 - 1.0 / (1.0 - x * x)).exp()
            }
            Profile::Annulus { r_lo, r_hi, edge } => {
                smoothstep((r - r_lo) / edge).min(smoothstep((r_hi - r) / edge))
            }
            Profile::GaussianRing { center, width } => {
                let g = (-(r - center) * (r - center) / (width * width)).exp();
                let (lo, hi) = self.support();
                g * smoothstep((r - lo) / width) * smoothstep((hi - r) / width)
            }
            Profile::Indicator { .. } => 1.0,
            Profile::Tabulated { ref rs, ref values } => {
                match rs.binary_search_by(|x| x.total_cmp(&r)) {
                    Ok(i) => values[i],
                    Err(i) => {
                        let (x0, x1) = (rs[i - 1], rs[i]);
                        let w = (r - x0) / (x1 - x0);
                        values[i - 1] * (1.0 - w) + values[i] * w
                    }
                }
            }
        }
    }
}

/// A radial complex field: real shape times a complex amplitude.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DataComponent {
    pub profile: Profile,
    pub amplitude_re: f64,
    pub amplitude_im: f64,
}

impl DataComponent {
    pub fn amplitude(&self) -> Complex64 {
        Complex64::new(self.amplitude_re, self.amplitude_im)
    }

    pub fn eval(&self, r: f64) -> Complex64 {
        self.amplitude() * self.profile.eval(r)
    }
}

/// Radial initial data (f, g); g is only used when τ = 1. Compact support
/// in (1, ∞) makes the log-moment hypothesis hold by construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InitialData {
    pub f: DataComponent,
    pub g: Option<DataComponent>,
}

impl InitialData {
    pub fn validate(&self) -> Result<()> {
        self.f.profile.validate()?;
        if let Some(g) = &self.g {
            g.profile.validate()?;
        }
        Ok(())
    }

    /// Union of the component supports.
    pub fn support(&self) -> (f64, f64) {
        let (mut lo, mut hi) = self.f.profile.support();
        if let Some(g) = &self.g {
            let (glo, ghi) = g.profile.support();
            lo = lo.min(glo);
            hi = hi.max(ghi);
        }
        (lo, hi)
    }
}

/// Output of the angle selection: Re[λ⁻¹ e^{iξ₀} I] ≥ c₀ > 0.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AngleCertificate {
    pub xi0: f64,
    pub c0: f64,
    pub moment_re: f64,
    pub moment_im: f64,
}

impl AngleCertificate {
    pub fn moment(&self) -> Complex64 {
        Complex64::new(self.moment_re, self.moment_im)
    }
}

/// I = ∫ (τ g(r) + e^{iζ} f(r)) · W(r) · μ(r) dr over the data support,
/// with W the harmonic weight and μ the mode-matched radial measure.
pub fn initial_moment(data: &InitialData, params: &ModelParams) -> Result<Complex64> {
    params.validate()?;
    data.validate()?;
    let (lo, hi) = data.support();
    let phase = params.damping();
    let tau = params.tau as f64;
    let mode = params.weight_mode;
    let mut bad_value = false;
    let moment = quad::adaptive(
        |r| {
            let mut v = phase * data.f.eval(r);
            if tau > 0.0 {
                if let Some(g) = &data.g {
                    v += g.eval(r);
                }
            }
            if !v.is_finite() {
                bad_value = true;
                return Complex64::new(0.0, 0.0);
            }
            v * (mode.phi(r) * mode.measure(r))
        },
        lo,
        hi,
        quad::DEFAULT_TOL,
    )?;
    if bad_value {
        return Err(Error::Config("initial data profile produced non-finite values".into()));
    }
    Ok(moment)
}

/// Ray condition of the main hypothesis: true iff I ∉ {−ρλ : ρ ≥ 0}.
pub fn check_admissible(moment: Complex64, lambda: Complex64) -> Result<bool> {
    if lambda.norm() == 0.0 {
        return Err(Error::Config("lambda must be nonzero".into()));
    }
    if moment.norm() == 0.0 {
        return Ok(false); // ρ = 0 case
    }
    let mut d = moment.arg() - (-lambda).arg();
    // normalize angular distance to [−π, π]
    while d > std::f64::consts::PI {
        d -= 2.0 * std::f64::consts::PI;
    }
    while d < -std::f64::consts::PI {
        d += 2.0 * std::f64::consts::PI;
    }
    Ok(d.abs() >= ANGLE_TOL)
}

/// Select ξ₀ ∈ (−π/2, π/2) and c₀ > 0 with Re[λ⁻¹ e^{iξ₀} I] ≥ c₀:
/// with φ = arg(λ⁻¹I), take ξ₀ = clamp(−φ, ±(π/2 − margin)) and
/// c₀ = |λ⁻¹I| cos(ξ₀ + φ). Errors when the data moment is inadmissible or
/// lies within the margin of the forbidden ray (c₀ ≤ 0).
pub fn choose_angle(moment: Complex64, lambda: Complex64, margin: f64) -> Result<AngleCertificate> {
    if !(margin > 0.0 && margin < std::f64::consts::FRAC_PI_4) {
        return Err(Error::Config(format!("choose_angle margin must be in (0, π/4), got {margin}")));
    }
    if !check_admissible(moment, lambda)? {
        return Err(Error::Admissibility(
            "data moment lies on the ray {−ρλ: ρ ≥ 0}; Theorem-type hypothesis violated".into(),
        ));
    }
    let w = moment / lambda;
    let phi = w.arg();
    let half = std::f64::consts::FRAC_PI_2;
    let xi0 = (-phi).clamp(-half + margin, half - margin);
    let c0 = w.norm() * (xi0 + phi).cos();
    if !(c0 > 0.0) {
        return Err(Error::Admissibility(format!(
            "degenerate admissibility: moment within margin of the forbidden ray (c0 = {c0:.3e})"
        )));
    }
    Ok(AngleCertificate {
        xi0,
        c0,
        moment_re: moment.re,
        moment_im: moment.im,
    })
}


#[cfg(test)]
mod prop_tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        /// The ray condition is invariant under positive real scaling of
        /// both the moment and λ.
        #[test]
        fn admissibility_scale_invariant(
            re in -5.0f64..5.0, im in -5.0f64..5.0,
            lre in -5.0f64..5.0, lim in -5.0f64..5.0,
            s in 1e-3f64..1e3,
        ) {
            let i = Complex64::new(re, im);
            let l = Complex64::new(lre, lim);
            prop_assume!(l.norm() > 1e-6);
            let base = check_admissible(i, l).unwrap();
            prop_assert_eq!(base, check_admissible(i * s, l).unwrap());
            prop_assert_eq!(base, check_admissible(i * s, l * s).unwrap());
        }

        /// Whenever choose_angle succeeds, re-evaluating the projection
        /// reproduces c₀ and the angle stays strictly inside (−π/2, π/2).
        #[test]
        fn angle_certificate_is_self_consistent(
            re in -5.0f64..5.0, im in -5.0f64..5.0,
            lre in -5.0f64..5.0, lim in -5.0f64..5.0,
        ) {
            let i = Complex64::new(re, im);
            let l = Complex64::new(lre, lim);
            prop_assume!(l.norm() > 1e-6 && i.norm() > 1e-6);
            if let Ok(cert) = choose_angle(i, l, 0.1) {
                let projected = (Complex64::from_polar(1.0, cert.xi0) * (i / l)).re;
                prop_assert!(projected >= cert.c0 * (1.0 - 1e-12));
                prop_assert!(cert.c0 > 0.0);
                prop_assert!(cert.xi0.abs() <= std::f64::consts::FRAC_PI_2 - 0.1 + 1e-15);
            }
        }
    }
}
