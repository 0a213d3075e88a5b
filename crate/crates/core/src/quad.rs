//! Adaptive quadrature and space-time integration over the parabolic
//! region P(R) = {(r,t) : (r−1)² + t ≤ R, r ≥ 1, t ≥ 0} in radial
//! coordinates (measure dx = 2πr dr for radial functions on the plane).

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Scalar types the adaptive rule can accumulate (real or complex).
pub trait Integrable:
    Copy + std::ops::Add<Output = Self> + std::ops::Sub<Output = Self> + std::ops::Mul<f64, Output = Self>
{
    const ZERO: Self;
    fn norm(self) -> f64;
}

impl Integrable for f64 {
    const ZERO: Self = 0.0;
    fn norm(self) -> f64 {
        self.abs()
    }
}

impl Integrable for Complex64 {
    const ZERO: Self = Complex64::new(0.0, 0.0);
    fn norm(self) -> f64 {
        num_complex::Complex::norm(self)
    }
}

// Gauss-Kronrod 7-15 pair, positive half of the nodes on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_813,
    0.949_107_912_342_759,
    0.864_864_423_359_769,
    0.741_531_185_599_394,
    0.586_087_235_467_691,
    0.405_845_151_377_397,
    0.207_784_955_007_898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529,
    0.063_092_092_629_979,
    0.104_790_010_322_250,
    0.140_653_259_715_525,
    0.169_004_726_639_267,
    0.190_350_578_064_785,
    0.204_432_940_075_298,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_870,
    0.279_705_391_489_277,
    0.381_830_050_505_119,
    0.417_959_183_673_469,
];

/// Default relative tolerance for adaptive integration.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default relative tolerance for nested P(R) integration.
pub const DEFAULT_PR_TOL: f64 = 1e-8;

const MAX_SUBDIVISIONS: usize = 100_000;

struct KronrodResult<T> {
    kronrod: T,
    err: f64,
}

fn kronrod15<T: Integrable>(f: &mut impl FnMut(f64) -> T, a: f64, b: f64) -> KronrodResult<T> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let f_mid = f(mid);
    let mut kronrod = f_mid * WGK[7];
    let mut gauss = f_mid * WG[3];
    for (i, &x) in XGK.iter().enumerate().take(7) {
        let dx = half * x;
        let pair = f(mid - dx) + f(mid + dx);
        kronrod = kronrod + pair * WGK[i];
        if i % 2 == 1 {
            gauss = gauss + pair * WG[i / 2];
        }
    }
    kronrod = kronrod * half;
    gauss = gauss * half;
    let err = (kronrod - gauss).norm();
    KronrodResult { kronrod, err }
}

/// Adaptively integrate `f` over `[a, b]` to relative tolerance `rel_tol`.
///
/// Bisection on the interval with the largest error first; fails with the
/// achieved estimate if the subdivision budget is exhausted.
pub fn adaptive<T: Integrable>(
    mut f: impl FnMut(f64) -> T,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<T> {
    if a == b {
        return Ok(T::ZERO);
    }
    // (a, b, estimate, err), kept as a stack; worst interval is split first.
    let first = kronrod15(&mut f, a, b);
    let mut intervals: Vec<(f64, f64, T, f64)> = vec![(a, b, first.kronrod, first.err)];
    let mut splits = 0usize;
    loop {
        let mut total = T::ZERO;
        let mut total_err = 0.0;
        for &(_, _, v, e) in &intervals {
            total = total + v;
            total_err += e;
        }
        let target = rel_tol * total.norm().max(f64::MIN_POSITIVE);
        if total_err <= target || total_err == 0.0 {
            return Ok(total);
        }
        if splits >= MAX_SUBDIVISIONS {
            return Err(Error::Numerical(format!(
                "quadrature did not converge on [{a}, {b}]: achieved estimate {:.6e} with error {:.3e} (target {:.3e})",
                total.norm(),
                total_err,
                target
            )));
        }
        // split the worst interval
        let (worst_idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (lo, hi, _, _) = intervals.swap_remove(worst_idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // interval at floating-point resolution; keep its estimate
            let r = kronrod15(&mut f, lo, hi);
            intervals.push((lo, hi, r.kronrod, 0.0));
            continue;
        }
        let left = kronrod15(&mut f, lo, mid);
        let right = kronrod15(&mut f, mid, hi);
        intervals.push((lo, mid, left.kronrod, left.err));
        intervals.push((mid, hi, right.kronrod, right.err));
        splits += 1;
    }
}

/// ∫₁^{1+√R} ∫₀^{R−(r−1)²} f(r,t) dt · 2πr dr by nested adaptive quadrature.
///
/// The region is graph-bounded in t, so the inner integral is 1D over
/// [0, R−(r−1)²] and the outer over r ∈ [1, 1+√R].
pub fn integrate_pr<T: Integrable>(
    f: impl Fn(f64, f64) -> T,
    r_cap: f64,
    rel_tol: f64,
) -> Result<T> {
    if r_cap <= 0.0 {
        return Err(Error::Domain(format!("integrate_pr: R must be > 0, got {r_cap}")));
    }
    let inner_tol = (rel_tol * 0.1).max(1e-14);
    let mut inner_failure: Option<Error> = None;
    let outer = adaptive(
        |r| {
            let t_hi = r_cap - (r - 1.0) * (r - 1.0);
            if t_hi <= 0.0 {
                return T::ZERO;
            }
            match adaptive(|t| f(r, t), 0.0, t_hi, inner_tol) {
                Ok(v) => v * (2.0 * std::f64::consts::PI * r),
                Err(e) => {
                    if inner_failure.is_none() {
                        inner_failure = Some(e);
                    }
                    T::ZERO
                }
            }
        },
        1.0,
        1.0 + r_cap.sqrt(),
        rel_tol,
    );
    if let Some(e) = inner_failure {
        return Err(e);
    }
    outer
}

/// ∬_{P(R)} log r dx dt, the mass of the harmonic weight Φ(r)=log r on P(R).
pub fn phi_mass(r_cap: f64) -> Result<f64> {
    integrate_pr(|r, _t| r.ln(), r_cap, DEFAULT_PR_TOL)
}

/// Closed-form upper bound πR(√R+1)² log(√R+1) for `phi_mass`.
pub fn phi_mass_bound(r_cap: f64) -> f64 {
    let s = r_cap.sqrt() + 1.0;
    std::f64::consts::PI * r_cap * s * s * s.ln()
}

/// Trapezoid rule on sampled data (xs strictly increasing).
pub fn trapz(xs: &[f64], ys: &[f64]) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    let mut acc = 0.0;
    for i in 1..xs.len() {
        acc += 0.5 * (ys[i] + ys[i - 1]) * (xs[i] - xs[i - 1]);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        // ∫₀¹ x³ dx = 1/4; K15 is exact for polynomials far beyond cubic
        let v = adaptive(|x| x * x * x, 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 0.25).abs() < 1e-14);
    }

    #[test]
    fn oscillatory_to_tolerance() {
        // ∫₀^{2π} sin²(10x) dx = π
        let v = adaptive(|x: f64| (10.0 * x).sin().powi(2), 0.0, 2.0 * std::f64::consts::PI, 1e-12)
            .unwrap();
        assert!((v - std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn complex_integrand() {
        // ∫₀^π e^{ix} dx = 2i
        let v = adaptive(
            |x| Complex64::new(x.cos(), x.sin()),
            0.0,
            std::f64::consts::PI,
            1e-12,
        )
        .unwrap();
        assert!((v - Complex64::new(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn zero_integrand() {
        let v = integrate_pr(|_, _| 0.0, 5.0, 1e-8).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn unit_integrand_r1() {
        // 2π ∫₁² (1−(r−1)²) r dr = 2π·11/12 (antiderivative oracle:
        // ∫₀¹ (1−s²)(1+s) ds = 1 + 1/2 − 1/3 − 1/4 = 11/12)
        let oracle = 2.0 * std::f64::consts::PI * (11.0 / 12.0);
        let v = integrate_pr(|_, _| 1.0, 1.0, 1e-10).unwrap();
        assert!((v - oracle).abs() < 1e-8 * oracle, "got {v}, oracle {oracle}");
    }

    #[test]
    fn phi_mass_r1_against_oracle() {
        // 2π ∫₁² (1−(r−1)²) r ln r dr via the 1D antiderivative oracle
        let inner = adaptive(|r: f64| (1.0 - (r - 1.0) * (r - 1.0)) * r * r.ln(), 1.0, 2.0, 1e-12)
            .unwrap();
        let oracle = 2.0 * std::f64::consts::PI * inner;
        let v = phi_mass(1.0).unwrap();
        assert!((v - oracle).abs() < 1e-6 * oracle);
        // headline numbers: quadrature ≈ 1.92 against bound ≈ 8.71
        assert!((v - 1.92).abs() < 0.01, "phi_mass(1) = {v}");
        assert!((phi_mass_bound(1.0) - 8.710).abs() < 0.01);
        assert!(v <= phi_mass_bound(1.0));
    }

    #[test]
    fn phi_mass_shrinks_to_zero() {
        let v = phi_mass(1e-6).unwrap();
        assert!(v.abs() < 1e-9);
    }

    #[test]
    fn pr_monotone_in_r_and_linear() {
        let f = |r: f64, t: f64| (r - 1.0) + t * 0.5;
        let a = integrate_pr(f, 2.0, 1e-9).unwrap();
        let b = integrate_pr(f, 4.0, 1e-9).unwrap();
        assert!(b > a);
        let doubled = integrate_pr(|r, t| 2.0 * f(r, t), 2.0, 1e-9).unwrap();
        assert!((doubled - 2.0 * a).abs() < 1e-7 * doubled.abs());
    }

    #[test]
    fn trapz_linear_exact() {
        let xs = [0.0, 0.5, 2.0];
        let ys = [1.0, 2.0, 5.0];
        assert!((trapz(&xs, &ys) - 6.0).abs() < 1e-15);
    }
}
