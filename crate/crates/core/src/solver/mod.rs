//! Radial time-evolution of the evolution equation on the truncated
//! exterior domain [1, r_max] with homogeneous Dirichlet at both ends,
//! blow-up detection, and lifespan estimation.
//!
//! τ = 0 solves ∂_t u = e^{−iζ}Δu + e^{−iζ}λ|u|^p with the diffusion term
//! implicit (complex tridiagonal solve per step) and the nonlinearity
//! explicit. τ = 1 solves the damped wave system in (u, v = ∂_t u) with a
//! kick-drift (leapfrog family) wave step under CFL and the damping folded
//! implicitly into the kick. ζ = ±π/2 switches the τ = 0 branch to a
//! norm-preserving implicit-midpoint linear step (experimental, opt-in).

mod tridiag;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{InitialData, ModelParams};

/// Uniform radial grid on [1, r_max] including both endpoints.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RadialGrid {
    pub r_max: f64,
    pub n: usize,
}

impl RadialGrid {
    pub fn new(r_max: f64, n: usize) -> Result<Self> {
        let grid = Self { r_max, n };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 64 {
            return Err(Error::Config(format!("grid.n must be ≥ 64, got {}", self.n)));
        }
        if !(self.r_max > 1.0 && self.r_max.is_finite()) {
            return Err(Error::Config(format!("grid.r_max must be > 1, got {}", self.r_max)));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.r_max - 1.0) / (self.n - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.n).map(|i| 1.0 + h * i as f64).collect()
    }

    /// Same spacing, radius scaled by `factor` (domain-enlargement retry).
    pub fn enlarged(&self, factor: f64) -> Self {
        let h = self.spacing();
        let r_max = 1.0 + (self.r_max - 1.0) * factor;
        let n = ((r_max - 1.0) / h).round() as usize + 1;
        Self { r_max, n }
    }
}

/// Time-stepping options.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Horizon: stop (as survived) when t reaches this.
    pub t_end: f64,
    /// Accuracy-scale cap on dt.
    pub dt_max: f64,
    /// Reaction time-scale safety factor: dt ≤ safety·m^{1−p}/(|λ|(p−1)).
    pub dt_safety: f64,
    pub max_steps: usize,
    /// Blow-up threshold on max|u|.
    pub m_threshold: f64,
    /// Required dt contraction backing a blow-up declaration (cap; the
    /// effective requirement also scales with (M/m₀)^{p−1}).
    pub dt_contraction_floor: f64,
    /// Outer-boundary leak tolerance, relative to max|u₀|.
    pub leak_tol: f64,
    /// Test hook: drop the diffusion term (per-node reaction ODE).
    pub disable_diffusion: bool,
    /// Opt-in for the experimental dispersive scheme at ζ = ±π/2.
    pub allow_dispersive: bool,
    /// Snapshot budget (thinned, geometrically densified near blow-up).
    pub max_snapshots: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            t_end: 100.0,
            dt_max: 0.05,
            dt_safety: 0.02,
            max_steps: 2_000_000,
            m_threshold: 1e8,
            dt_contraction_floor: 1e6,
            leak_tol: 1e-6,
            disable_diffusion: false,
            allow_dispersive: false,
            max_snapshots: 2000,
        }
    }
}

/// One stored field snapshot.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub field: Vec<Complex64>,
    /// Pinned snapshots survive thinning (blow-up densification).
    pub pinned: bool,
}

/// Time-stamped evolution record.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub rs: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    /// Dense per-step rows (t, dt, max_r|u|).
    pub series: Vec<[f64; 3]>,
    /// Max |u| seen on the outer 5% of the grid over the whole run.
    pub boundary_leak: f64,
    pub initial_maxnorm: f64,
    pub reached_threshold: bool,
    pub steps_exhausted: bool,
}

impl Trajectory {
    pub fn last_time(&self) -> f64 {
        self.series.last().map(|row| row[0]).unwrap_or(0.0)
    }

    pub fn last_maxnorm(&self) -> f64 {
        self.series.last().map(|row| row[2]).unwrap_or(self.initial_maxnorm)
    }
}

/// Outcome of lifespan estimation on a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LifespanStatus {
    BlowUp { t_est: f64, t_lo: f64, t_hi: f64 },
    SurvivedTo(f64),
    Inconclusive(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LifespanEstimate {
    pub status: LifespanStatus,
    pub threshold_hit: f64,
}

/// Exact blow-up time ε^{1−p}/(λ(p−1)) of the reaction ODE u' = λu^p,
/// u(0) = ε (validation oracle; requires real λ > 0 and ζ = 0).
pub fn ode_oracle(params: &ModelParams) -> Result<f64> {
    if !(params.p > 1.0) {
        return Err(Error::Domain(format!("ode_oracle: p must be > 1, got {}", params.p)));
    }
    if params.lambda_im != 0.0 || !(params.lambda_re > 0.0) || params.zeta != 0.0 {
        return Err(Error::Domain("ode_oracle: requires real λ > 0 and ζ = 0".into()));
    }
    Ok(params.epsilon.powf(1.0 - params.p) / (params.lambda_re * (params.p - 1.0)))
}

fn max_abs(field: &[Complex64]) -> f64 {
    field.iter().fold(0.0f64, |acc, v| acc.max(v.norm()))
}

enum Scheme {
    /// τ = 0, |ζ| < π/2: implicit diffusion, explicit reaction.
    Dissipative,
    /// τ = 0, |ζ| = π/2: implicit-midpoint linear step (experimental).
    Dispersive,
    /// τ = 1: kick-drift wave with implicit damping.
    Wave,
}

struct Stepper {
    scheme: Scheme,
    mu: Complex64,     // e^{−iζ}
    damping: Complex64, // e^{iζ}
    lambda: Complex64,
    p: f64,
    drift: f64,
    rs: Vec<f64>,
    h: f64,
    diffusion: bool,
    // workspaces
    diag_a: Vec<Complex64>,
    diag_b: Vec<Complex64>,
    diag_c: Vec<Complex64>,
    rhs: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Stepper {
    /// (Lu)_i with the radial Laplacian u'' + (drift/r)u'; endpoints
    /// Dirichlet-zero.
    fn laplacian(&self, u: &[Complex64], i: usize) -> Complex64 {
        let h2 = self.h * self.h;
        let lo = u[i - 1];
        let hi = u[i + 1];
        (lo - u[i] * 2.0 + hi) / h2 + (hi - lo) * (self.drift / (2.0 * self.h * self.rs[i]))
    }

    /// One τ=0 step: (I − θ dt μL) u⁺ = u + (1−θ) dt μLu + dt μλ|u|^p, with
    /// θ = 1 (backward Euler) dissipative, θ = 1/2 (midpoint) dispersive.
    fn step_first_order(&mut self, u: &mut [Complex64], dt: f64, theta_m: f64) {
        let n = u.len();
        if self.diffusion {
            let h2 = self.h * self.h;
            for i in 1..n - 1 {
                let off = self.drift / (2.0 * self.h * self.rs[i]);
                let k = self.mu * (dt * theta_m);
                self.diag_a[i] = -k * (1.0 / h2 - off);
                self.diag_b[i] = Complex64::new(1.0, 0.0) + k * (2.0 / h2);
                self.diag_c[i] = -k * (1.0 / h2 + off);
                let mut rhs = u[i] + self.mu * self.lambda * (dt * u[i].norm().powf(self.p));
                if theta_m < 1.0 {
                    rhs += self.mu * ((1.0 - theta_m) * dt) * self.laplacian(u, i);
                }
                self.rhs[i] = rhs;
            }
            // Dirichlet rows
            self.diag_a[0] = Complex64::new(0.0, 0.0);
            self.diag_b[0] = Complex64::new(1.0, 0.0);
            self.diag_c[0] = Complex64::new(0.0, 0.0);
            self.rhs[0] = Complex64::new(0.0, 0.0);
            self.diag_a[n - 1] = Complex64::new(0.0, 0.0);
            self.diag_b[n - 1] = Complex64::new(1.0, 0.0);
            self.diag_c[n - 1] = Complex64::new(0.0, 0.0);
            self.rhs[n - 1] = Complex64::new(0.0, 0.0);
            tridiag::solve_in_place(&self.diag_a, &self.diag_b, &self.diag_c, &mut self.rhs, &mut self.scratch);
            u.copy_from_slice(&self.rhs);
        } else {
            // reaction-only test hook: per-node ODE u' = μλ|u|^p
            for ui in u.iter_mut() {
                *ui += self.mu * self.lambda * (dt * ui.norm().powf(self.p));
            }
        }
    }

    /// One τ=1 kick-drift step with implicit damping:
    /// v⁺ = (v + dt(Lu + λ|u|^p)) / (1 + dt e^{iζ}), u⁺ = u + dt v⁺.
    fn step_wave(&mut self, u: &mut [Complex64], v: &mut [Complex64], dt: f64) {
        let n = u.len();
        let denom = Complex64::new(1.0, 0.0) + self.damping * dt;
        for i in 1..n - 1 {
            let lap = if self.diffusion {
                self.laplacian(u, i)
            } else {
                Complex64::new(0.0, 0.0)
            };
            let force = lap + self.lambda * u[i].norm().powf(self.p);
            v[i] = (v[i] + force * dt) / denom;
        }
        v[0] = Complex64::new(0.0, 0.0);
        v[n - 1] = Complex64::new(0.0, 0.0);
        for i in 1..n - 1 {
            u[i] += v[i] * dt;
        }
        u[0] = Complex64::new(0.0, 0.0);
        u[n - 1] = Complex64::new(0.0, 0.0);
    }
}

/// Time-evolve the problem and return the trajectory. Errors with a
/// "domain too small" numerical failure when the outer-boundary leak
/// exceeds `leak_tol·max|u₀|` (see [`evolve_auto`] for the retry wrapper).
pub fn evolve(
    params: &ModelParams,
    data: &InitialData,
    grid: &RadialGrid,
    opts: &SolveOptions,
) -> Result<Trajectory> {
    params.validate()?;
    data.validate()?;
    grid.validate()?;
    if !(opts.dt_safety > 0.0 && opts.dt_max > 0.0 && opts.t_end > 0.0) {
        return Err(Error::Config("solver options must have positive dt_max, dt_safety, t_end".into()));
    }
    let half_pi = std::f64::consts::FRAC_PI_2;
    let scheme = if params.tau == 1 {
        Scheme::Wave
    } else if (params.zeta.abs() - half_pi).abs() < 1e-12 {
        if !opts.allow_dispersive {
            return Err(Error::Config(
                "ζ = ±π/2 with τ = 0 needs the experimental dispersive scheme (allow_dispersive)".into(),
            ));
        }
        Scheme::Dispersive
    } else if params.zeta.abs() < half_pi {
        Scheme::Dissipative
    } else {
        return Err(Error::Config(format!("|ζ| must be ≤ π/2, got {}", params.zeta)));
    };

    let (_, support_hi) = data.support();
    if opts.disable_diffusion {
        // reaction-only hook has no spatial coupling; grid is a sample rack
    } else if grid.r_max < support_hi + 1.0 {
        return Err(Error::Config(format!(
            "grid.r_max = {} must exceed the data support {} by a diffusion margin ≥ 1",
            grid.r_max, support_hi
        )));
    }

    let rs = grid.nodes();
    let n = rs.len();
    let h = grid.spacing();
    let eps = params.epsilon;
    let mut u: Vec<Complex64> = rs.iter().map(|&r| data.f.eval(r) * eps).collect();
    u[0] = Complex64::new(0.0, 0.0);
    u[n - 1] = Complex64::new(0.0, 0.0);
    let mut v: Vec<Complex64> = if params.tau == 1 {
        let mut v: Vec<Complex64> = match &data.g {
            Some(g) => rs.iter().map(|&r| g.eval(r) * eps).collect(),
            None => vec![Complex64::new(0.0, 0.0); n],
        };
        v[0] = Complex64::new(0.0, 0.0);
        v[n - 1] = Complex64::new(0.0, 0.0);
        v
    } else {
        Vec::new()
    };

    let m0 = max_abs(&u);
    if m0 == 0.0 && params.tau == 0 {
        return Err(Error::Config("initial data is identically zero on the grid".into()));
    }
    let leak_cap = opts.leak_tol * m0.max(if params.tau == 1 { max_abs(&v) } else { 0.0 });
    let outer_start = n - (n / 20).max(2);

    let mut stepper = Stepper {
        scheme,
        mu: Complex64::from_polar(1.0, -params.zeta),
        damping: params.damping(),
        lambda: params.lambda(),
        p: params.p,
        drift: params.weight_mode.laplace_drift(),
        rs: rs.clone(),
        h,
        diffusion: !opts.disable_diffusion,
        diag_a: vec![Complex64::new(0.0, 0.0); n],
        diag_b: vec![Complex64::new(0.0, 0.0); n],
        diag_c: vec![Complex64::new(0.0, 0.0); n],
        rhs: vec![Complex64::new(0.0, 0.0); n],
        scratch: vec![Complex64::new(0.0, 0.0); n],
    };

    let lam_norm = params.lambda().norm();
    let reaction_dt = |m: f64| -> f64 {
        if lam_norm == 0.0 || m == 0.0 {
            f64::INFINITY
        } else {
            opts.dt_safety * m.powf(1.0 - params.p) / (lam_norm * (params.p - 1.0))
        }
    };
    let cfl_dt = if params.tau == 1 { 0.9 * h } else { f64::INFINITY };

    let mut t = 0.0f64;
    let mut m = m0;
    let mut series: Vec<[f64; 3]> = Vec::new();
    let mut snapshots: Vec<Snapshot> = vec![Snapshot { t: 0.0, field: u.clone(), pinned: true }];
    let mut snap_stride = 1usize;
    let mut last_snap_m = m0;
    let mut boundary_leak = 0.0f64;
    let mut reached_threshold = false;
    let mut steps_exhausted = false;
    let mut dt_prev = f64::INFINITY;

    let mut step = 0usize;
    loop {
        if t >= opts.t_end {
            break;
        }
        if step >= opts.max_steps {
            steps_exhausted = true;
            break;
        }
        let mut dt = opts.dt_max.min(reaction_dt(m)).min(cfl_dt).min(1.25 * dt_prev);
        dt = dt.min(opts.t_end - t).max(1e-300);
        match stepper.scheme {
            Scheme::Dissipative => stepper.step_first_order(&mut u, dt, 1.0),
            Scheme::Dispersive => stepper.step_first_order(&mut u, dt, 0.5),
            Scheme::Wave => stepper.step_wave(&mut u, &mut v, dt),
        }
        t += dt;
        dt_prev = dt;
        step += 1;
        m = max_abs(&u);
        series.push([t, dt, m]);

        // snapshot policy: stride-thinned, pinned on max-norm jumps
        let pin = m >= 1.3 * last_snap_m || m <= last_snap_m / 1.3;
        if pin || step % snap_stride == 0 {
            snapshots.push(Snapshot { t, field: u.clone(), pinned: pin });
            last_snap_m = m;
            if snapshots.len() >= opts.max_snapshots.max(64) {
                let mut kept = Vec::with_capacity(opts.max_snapshots + 64);
                for (idx, s) in snapshots.drain(..).enumerate() {
                    if s.pinned || idx % 2 == 0 {
                        kept.push(s);
                    }
                }
                snapshots = kept;
                snap_stride *= 2;
            }
        }

        if step % 16 == 0 || m >= opts.m_threshold {
            let outer = max_abs(&u[outer_start..]);
            boundary_leak = boundary_leak.max(outer);
            if !opts.disable_diffusion && outer > leak_cap && leak_cap > 0.0 {
                return Err(Error::Numerical(format!(
                    "domain too small: boundary leak {outer:.3e} exceeds {leak_cap:.3e} at t = {t:.4}; increase r_max beyond {}",
                    grid.r_max
                )));
            }
        }

        if !m.is_finite() || m >= opts.m_threshold {
            reached_threshold = true;
            break;
        }
    }

    if snapshots.last().map(|s| s.t) != Some(t) && !series.is_empty() {
        snapshots.push(Snapshot { t, field: u.clone(), pinned: true });
    }

    Ok(Trajectory {
        rs,
        snapshots,
        series,
        boundary_leak,
        initial_maxnorm: m0,
        reached_threshold,
        steps_exhausted,
    })
}

/// `evolve` with the domain-enlargement retry: on a "domain too small"
/// failure the grid is scaled ×1.5 (same spacing) and rerun, up to 4 times.
pub fn evolve_auto(
    params: &ModelParams,
    data: &InitialData,
    grid: &RadialGrid,
    opts: &SolveOptions,
) -> Result<(Trajectory, RadialGrid)> {
    let mut grid = *grid;
    let mut last_err = None;
    for _ in 0..6 {
        match evolve(params, data, &grid, opts) {
            Ok(traj) => return Ok((traj, grid)),
            Err(Error::Numerical(msg)) if msg.starts_with("domain too small") => {
                last_err = Some(Error::Numerical(msg));
                grid = grid.enlarged(1.5);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::Numerical("domain enlargement retries exhausted".into())))
}

/// Number of trailing max-norm samples used for the m^{1−p} extrapolation.
const EXTRAPOLATION_SAMPLES: usize = 8;

/// Classify a trajectory: blow-up (with extrapolated time and bracket),
/// survival, or inconclusive. Blow-up needs the threshold hit AND the
/// adaptive dt to have contracted like a genuine reaction runaway.
pub fn detect_blowup(
    traj: &Trajectory,
    params: &ModelParams,
    m_threshold: f64,
) -> Result<LifespanEstimate> {
    if traj.series.is_empty() {
        return Err(Error::Config("detect_blowup: empty max-norm series".into()));
    }
    let m_last = traj.last_maxnorm();
    let t_last = traj.last_time();
    if !traj.reached_threshold || !(m_last >= m_threshold) {
        let status = if traj.steps_exhausted {
            LifespanStatus::Inconclusive("step count exceeded before horizon or blow-up".into())
        } else {
            LifespanStatus::SurvivedTo(t_last)
        };
        return Ok(LifespanEstimate { status, threshold_hit: m_last });
    }

    // dt contraction gate: genuine power-law blow-up contracts dt by about
    // (M/m₀)^{p−1}; demand the configured floor capped by 1% of that scale
    let dt_first = traj.series[0][1];
    let k = traj.series.len().min(EXTRAPOLATION_SAMPLES);
    let tail = &traj.series[traj.series.len() - k..];
    let dt_tail = tail.iter().map(|row| row[1]).fold(f64::INFINITY, f64::min);
    let contraction = dt_first / dt_tail;
    let expected = (m_threshold / traj.initial_maxnorm).powf(params.p - 1.0);
    let required = (0.01 * expected).min(1e6).max(10.0);
    if !m_last.is_finite() || contraction < required {
        return Ok(LifespanEstimate {
            status: LifespanStatus::Inconclusive(format!(
                "possible instability: threshold hit with dt contraction {contraction:.2e} < required {required:.2e}"
            )),
            threshold_hit: m_last,
        });
    }

    // linear extrapolation of y = m^{1−p} to its zero crossing (exact for
    // the reaction ODE, asymptotically exact near parabolic blow-up)
    let one_minus_p = 1.0 - params.p;
    let (mut st, mut sy, mut sty, mut stt) = (0.0, 0.0, 0.0, 0.0);
    let t0 = tail[0][0];
    for row in tail {
        let x = row[0] - t0;
        let y = row[2].powf(one_minus_p);
        st += x;
        sy += y;
        sty += x * y;
        stt += x * x;
    }
    let kf = k as f64;
    let denom = kf * stt - st * st;
    let slope = if denom.abs() > 0.0 { (kf * sty - st * sy) / denom } else { 0.0 };
    let intercept = (sy - slope * st) / kf;
    if !(slope < 0.0) {
        return Ok(LifespanEstimate {
            status: LifespanStatus::Inconclusive(
                "threshold hit but m^{1−p} extrapolation found no decreasing trend".into(),
            ),
            threshold_hit: m_last,
        });
    }
    let t_est = (t0 - intercept / slope).max(t_last);
    let lam = params.lambda().norm();
    let reaction_time = if lam > 0.0 {
        m_last.powf(one_minus_p) / (lam * (params.p - 1.0))
    } else {
        0.0
    };
    Ok(LifespanEstimate {
        status: LifespanStatus::BlowUp { t_est, t_lo: t_last, t_hi: t_est + reaction_time },
        threshold_hit: m_last,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DataComponent, Profile, WeightMode};

    fn heat_params(p: f64, epsilon: f64) -> ModelParams {
        ModelParams {
            tau: 0,
            zeta: 0.0,
            lambda_re: 1.0,
            lambda_im: 0.0,
            p,
            epsilon,
            weight_mode: WeightMode::Log2D,
        }
    }

    fn indicator_data(lo: f64, hi: f64) -> InitialData {
        InitialData {
            f: DataComponent {
                profile: Profile::Indicator { r_lo: lo, r_hi: hi },
                amplitude_re: 1.0,
                amplitude_im: 0.0,
            },
            g: None,
        }
    }

    fn bump_data() -> InitialData {
        InitialData {
            f: DataComponent {
                profile: Profile::Bump { r_lo: 1.5, r_hi: 3.0 },
                amplitude_re: 1.0,
                amplitude_im: 0.0,
            },
            g: None,
        }
    }

    fn ode_opts() -> SolveOptions {
        SolveOptions {
            disable_diffusion: true,
            dt_safety: 0.005,
            dt_max: 1.0,
            t_end: 1e4,
            ..SolveOptions::default()
        }
    }

    #[test]
    fn ode_oracle_values() {
        assert!((ode_oracle(&heat_params(2.0, 0.1)).unwrap() - 10.0).abs() < 1e-12);
        let mut p = heat_params(2.0, 0.1);
        p.lambda_re = 2.0;
        assert!((ode_oracle(&p).unwrap() - 5.0).abs() < 1e-12);
        assert!((ode_oracle(&heat_params(1.5, 0.04)).unwrap() - 10.0).abs() < 1e-12);
        let mut bad = heat_params(2.0, 0.1);
        bad.zeta = 0.3;
        assert!(ode_oracle(&bad).is_err());
    }

    #[test]
    fn ode_mode_blowup_p2_within_one_percent() {
        let params = heat_params(2.0, 0.1);
        let grid = RadialGrid::new(4.0, 64).unwrap();
        let traj = evolve(&params, &indicator_data(1.5, 3.5), &grid, &ode_opts()).unwrap();
        let est = detect_blowup(&traj, &params, 1e8).unwrap();
        match est.status {
            LifespanStatus::BlowUp { t_est, t_lo, t_hi } => {
                assert!((t_est - 10.0).abs() < 0.1, "t_est = {t_est}");
                assert!(t_lo <= t_est && t_est <= t_hi);
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn ode_mode_blowup_p15_within_one_percent() {
        let params = heat_params(1.5, 0.04);
        let grid = RadialGrid::new(4.0, 64).unwrap();
        let traj = evolve(&params, &indicator_data(1.5, 3.5), &grid, &ode_opts()).unwrap();
        let est = detect_blowup(&traj, &params, 1e8).unwrap();
        match est.status {
            LifespanStatus::BlowUp { t_est, .. } => {
                assert!((t_est - 10.0).abs() < 0.1, "t_est = {t_est}");
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn pure_heat_decays_monotonically() {
        let mut params = heat_params(2.0, 1.0);
        params.lambda_re = 0.0;
        let grid = RadialGrid::new(16.0, 300).unwrap();
        let opts = SolveOptions { t_end: 2.0, dt_max: 0.01, ..SolveOptions::default() };
        let traj = evolve(&params, &bump_data(), &grid, &opts).unwrap();
        let mut prev = f64::INFINITY;
        for row in &traj.series {
            assert!(row[2] <= prev * (1.0 + 1e-12), "max-norm must not grow");
            prev = row[2];
        }
        let est = detect_blowup(&traj, &params, 1e8).unwrap();
        assert!(matches!(est.status, LifespanStatus::SurvivedTo(t) if (t - 2.0).abs() < 1e-9));
    }

    #[test]
    fn dirichlet_invariant_exact() {
        let params = heat_params(1.5, 1.0);
        let grid = RadialGrid::new(10.0, 128).unwrap();
        let opts = SolveOptions { t_end: 0.5, ..SolveOptions::default() };
        let traj = evolve(&params, &bump_data(), &grid, &opts).unwrap();
        for snap in &traj.snapshots {
            assert_eq!(snap.field[0], Complex64::new(0.0, 0.0));
            assert_eq!(snap.field.last().copied().unwrap(), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn zeta_conjugation_symmetry() {
        let mut plus = heat_params(1.5, 1.0);
        plus.zeta = 0.7;
        let mut minus = plus;
        minus.zeta = -0.7;
        let grid = RadialGrid::new(10.0, 128).unwrap();
        let opts = SolveOptions { t_end: 0.4, ..SolveOptions::default() };
        let a = evolve(&plus, &bump_data(), &grid, &opts).unwrap();
        let b = evolve(&minus, &bump_data(), &grid, &opts).unwrap();
        assert_eq!(a.snapshots.len(), b.snapshots.len());
        for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
            assert_eq!(sa.t, sb.t);
            for (x, y) in sa.field.iter().zip(&sb.field) {
                assert!((x - y.conj()).norm() <= 1e-12 * x.norm().max(1e-30), "{x} vs {y}");
            }
        }
    }

    #[test]
    fn wave_case_runs_and_stays_dirichlet() {
        let mut params = heat_params(1.5, 1.0);
        params.tau = 1;
        let grid = RadialGrid::new(12.0, 256).unwrap();
        let opts = SolveOptions { t_end: 1.0, ..SolveOptions::default() };
        let traj = evolve(&params, &bump_data(), &grid, &opts).unwrap();
        assert!(traj.series.len() > 10);
        for snap in &traj.snapshots {
            assert_eq!(snap.field[0], Complex64::new(0.0, 0.0));
        }
        // CFL honored
        let h = grid.spacing();
        for row in &traj.series {
            assert!(row[1] <= 0.9 * h + 1e-15);
        }
    }

    #[test]
    fn dispersive_requires_flag() {
        let mut params = heat_params(1.5, 1.0);
        params.zeta = std::f64::consts::FRAC_PI_2;
        let grid = RadialGrid::new(10.0, 128).unwrap();
        let opts = SolveOptions { t_end: 0.5, ..SolveOptions::default() };
        assert!(matches!(evolve(&params, &bump_data(), &grid, &opts), Err(Error::Config(_))));
        let opts = SolveOptions { allow_dispersive: true, ..opts };
        let traj = evolve(&params, &bump_data(), &grid, &opts).unwrap();
        assert!(traj.series.len() > 3);
        assert!(traj.last_maxnorm().is_finite());
    }

    #[test]
    fn leak_detection_and_auto_enlargement() {
        // linear heat diffusing out of a too-small domain trips the guard
        let mut params = heat_params(2.0, 1.0);
        params.lambda_re = 0.0;
        let grid = RadialGrid::new(4.5, 64).unwrap();
        let opts = SolveOptions { t_end: 2.0, leak_tol: 1e-8, dt_max: 0.02, ..SolveOptions::default() };
        let err = evolve(&params, &bump_data(), &grid, &opts);
        assert!(matches!(&err, Err(Error::Numerical(msg)) if msg.starts_with("domain too small")), "{err:?}");
        let (traj, final_grid) = evolve_auto(&params, &bump_data(), &grid, &opts).unwrap();
        assert!(final_grid.r_max > grid.r_max);
        assert!(traj.boundary_leak <= 1e-8 * traj.initial_maxnorm);
    }

    #[test]
    fn inconclusive_when_threshold_without_contraction() {
        // fabricate a spiky trajectory: threshold reached at constant dt
        let traj = Trajectory {
            rs: vec![1.0, 2.0],
            snapshots: vec![],
            series: vec![[0.1, 0.1, 1.0], [0.2, 0.1, 1e9]],
            boundary_leak: 0.0,
            initial_maxnorm: 1.0,
            reached_threshold: true,
            steps_exhausted: false,
        };
        let est = detect_blowup(&traj, &heat_params(2.0, 1.0), 1e8).unwrap();
        assert!(matches!(est.status, LifespanStatus::Inconclusive(_)));
    }

    #[test]
    fn full_pde_blowup_detected() {
        let params = heat_params(1.5, 1.0);
        let grid = RadialGrid::new(14.0, 512).unwrap();
        let opts = SolveOptions { t_end: 50.0, ..SolveOptions::default() };
        let (traj, _) = evolve_auto(&params, &bump_data(), &grid, &opts).unwrap();
        let est = detect_blowup(&traj, &params, 1e8).unwrap();
        match est.status {
            LifespanStatus::BlowUp { t_est, t_lo, t_hi } => {
                assert!(t_est > 0.0 && t_lo <= t_est && t_est <= t_hi);
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
    }
}
