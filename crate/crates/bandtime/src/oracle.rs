//! Independent brute-force verifiers backing the test suite and the
//! `verify` command. Every routine here deliberately uses a numerical
//! pathway (integration rule, grid, integrator) disjoint from the module
//! it checks: fixed-step RK4 against the transfer matrices, resampled
//! trapezoid overlaps against the Simpson spectral quadrature, spatial
//! quadrature against the asymptotic projection shortcut.

use num_complex::Complex64;

use crate::band::{BandGrid, ChannelAmplitude, GaugePhase};
use crate::error::{Error, Result};
use crate::par;
use crate::scattering::{PotentialSpec, ScatteringSolution};
use crate::timeop::{eigenstate_overlap, evolve};

/// Integrate -1/2 psi'' + V psi = eps psi across the structure with
/// fixed-step RK4, imposing the delta jump conditions exactly, and extract
/// (t, r) from asymptotic matching. The result is accepted only if halving
/// the step changes t and r by less than 1e-8 relative.
pub fn ode_scattering(
    potential: &PotentialSpec,
    eps: f64,
    step: f64,
) -> Result<(Complex64, Complex64)> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::validation(format!(
            "scattering energy must be positive, got {eps}"
        )));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::validation("integration step must be positive"));
    }
    let coarse = ode_scattering_fixed(potential, eps, step);
    let fine = ode_scattering_fixed(potential, eps, step / 2.0);
    let dt = (coarse.0 - fine.0).norm() / fine.0.norm().max(1e-300);
    let dr = (coarse.1 - fine.1).norm() / fine.1.norm().max(1.0);
    if dt > 1e-8 || dr > 1e-8 {
        return Err(Error::numerical(format!(
            "ODE integration not converged at step {step}: dt = {dt:.3e}, dr = {dr:.3e}"
        )));
    }
    Ok(fine)
}

fn ode_scattering_fixed(potential: &PotentialSpec, eps: f64, step: f64) -> (Complex64, Complex64) {
    let k = (2.0 * eps).sqrt();
    let ik = Complex64::new(0.0, k);
    let Some((x_min, x_max)) = potential.support() else {
        return (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    };

    // boundaries in descending order; start from the transmitted wave
    // e^{i k x} at x_max and march leftward through each constant region
    let mut boundaries: Vec<f64> = potential
        .deltas()
        .iter()
        .map(|d| d.position)
        .chain(
            potential
                .segments()
                .iter()
                .flat_map(|s| [s.start, s.end]),
        )
        .collect();
    boundaries.sort_by(|a, b| b.partial_cmp(a).unwrap());
    boundaries.dedup();

    let mut psi = (ik * x_max).exp();
    let mut dpsi = ik * psi;
    let mut x = x_max;
    for (j, &b) in boundaries.iter().enumerate() {
        debug_assert!(b <= x);
        // leftward jump at the boundary: psi'(b-) = psi'(b+) - 2 lambda psi(b)
        if x > b {
            // integrate the constant region (b, x)
            let u = potential.value_at(0.5 * (b + x));
            let len = x - b;
            let n = (len / step).ceil().max(1.0) as usize;
            let h = -len / n as f64;
            let c = 2.0 * (u - eps);
            for _ in 0..n {
                let f = |y: (Complex64, Complex64)| (y.1, c * y.0);
                let y = (psi, dpsi);
                let k1 = f(y);
                let k2 = f((y.0 + 0.5 * h * k1.0, y.1 + 0.5 * h * k1.1));
                let k3 = f((y.0 + 0.5 * h * k2.0, y.1 + 0.5 * h * k2.1));
                let k4 = f((y.0 + h * k3.0, y.1 + h * k3.1));
                psi += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
                dpsi += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            }
            x = b;
        }
        let lambda: f64 = potential
            .deltas()
            .iter()
            .filter(|d| d.position == b)
            .map(|d| d.strength)
            .sum();
        if lambda != 0.0 {
            dpsi -= 2.0 * lambda * psi;
        }
        let _ = j;
    }
    debug_assert_eq!(x, x_min);

    // match psi = A e^{ikx} + B e^{-ikx} at x_min
    let e = (ik * x_min).exp();
    let a = 0.5 * (psi + dpsi / ik) / e;
    let b = 0.5 * (psi - dpsi / ik) * e;
    (1.0 / a, b / a)
}

/// Cubic (4-point Lagrange) resampling onto a `factor`-times finer uniform
/// grid; pathway deliberately different from anything in `band`.
fn cubic_resample(samples: &[Complex64], factor: usize) -> Vec<Complex64> {
    let n = samples.len();
    let m = (n - 1) * factor + 1;
    let mut out = Vec::with_capacity(m);
    for j in 0..m {
        let pos = j as f64 / factor as f64;
        let i = pos.floor() as usize;
        if i >= n - 1 {
            out.push(samples[n - 1]);
            continue;
        }
        let i0 = i.saturating_sub(1).min(n - 4);
        let s = pos - i0 as f64;
        let y = &samples[i0..i0 + 4];
        let w0 = -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0;
        let w1 = s * (s - 2.0) * (s - 3.0) / 2.0;
        let w2 = -s * (s - 1.0) * (s - 3.0) / 2.0;
        let w3 = s * (s - 1.0) * (s - 2.0) / 6.0;
        out.push(y[0] * w0 + y[1] * w1 + y[2] * w2 + y[3] * w3);
    }
    out
}

/// Overlaps c_m recomputed by trapezoid quadrature on a 10x finer
/// cubic-resampled grid, with the gauge integral rebuilt by cumulative
/// trapezoid on the fine grid. Comparison target for `timeop`.
pub fn brute_force_overlaps(
    g: &ChannelAmplitude,
    gauge: &GaugePhase,
    ms: &[i64],
) -> Result<Vec<Complex64>> {
    g.grid().check_matches(gauge.grid())?;
    const FACTOR: usize = 10;
    let grid = g.grid();
    let fine_g = cubic_resample(g.samples(), FACTOR);
    let eta_c: Vec<Complex64> = gauge
        .eta(g.channel())
        .iter()
        .map(|&e| Complex64::new(e, 0.0))
        .collect();
    let fine_eta: Vec<f64> = cubic_resample(&eta_c, FACTOR).iter().map(|z| z.re).collect();
    let hf = grid.spacing() / FACTOR as f64;
    let mut phi = Vec::with_capacity(fine_eta.len());
    let mut acc = 0.0;
    phi.push(0.0);
    for w in fine_eta.windows(2) {
        acc += 0.5 * (w[0] + w[1]) * hf;
        phi.push(acc);
    }
    let nf = fine_g.len();
    let delta_eps = grid.delta_eps();
    let eps0 = grid.eps0();
    let overlaps: Vec<Complex64> = par::map_indexed(ms.len(), |idx| {
        let tau = 2.0 * std::f64::consts::PI * ms[idx] as f64 / delta_eps;
        let mut sum = Complex64::new(0.0, 0.0);
        for j in 0..nf {
            let eps = eps0 + j as f64 * hf;
            let v = fine_g[j] * Complex64::from_polar(1.0, tau * eps - phi[j]);
            let w = if j == 0 || j == nf - 1 { 0.5 } else { 1.0 };
            sum += w * v;
        }
        sum * hf / delta_eps.sqrt()
    });
    Ok(overlaps)
}

/// Residual of the evolution identity <tau_m | g> = <tau_0 | e^{+i H tau_m} g>.
pub fn evolution_overlap_check(
    g: &ChannelAmplitude,
    gauge: &GaugePhase,
    m: i64,
) -> Result<f64> {
    let lhs = eigenstate_overlap(g, m, gauge)?;
    let tau = 2.0 * std::f64::consts::PI * m as f64 / g.grid().delta_eps();
    let rhs = eigenstate_overlap(&evolve(g, -tau), 0, gauge)?;
    Ok((lhs - rhs).norm())
}

/// Spatial-quadrature oracle for the von Neumann projection: builds the
/// arrival packet phi(x) once on a wide window and evaluates the exact
/// overlap <psi_{eps,R} | phi> by Simpson in x, to be compared against the
/// asymptotic shortcut t*(eps) A(eps) e^{-i k x_R}.
pub struct PacketOracle {
    band: BandGrid,
    x_r: f64,
    xs: Vec<f64>,
    phi: Vec<Complex64>,
    h: f64,
}

impl PacketOracle {
    /// Window [-half_width, half_width] with the given spatial step
    /// (rounded to an even interval count for Simpson).
    pub fn new(band: &BandGrid, x_r: f64, half_width: f64, step: f64) -> Result<Self> {
        if half_width <= x_r.abs() {
            return Err(Error::validation(
                "oracle window must contain the arrival position",
            ));
        }
        let mut n = (2.0 * half_width / step).ceil() as usize;
        if n % 2 == 1 {
            n += 1;
        }
        let h = 2.0 * half_width / n as f64;
        let xs: Vec<f64> = (0..=n).map(|i| -half_width + i as f64 * h).collect();
        let (a, _) = crate::band::cos2_amplitude(band);
        let n_eps = band.len();
        let energies: Vec<f64> = band.energies().collect();
        let phi: Vec<Complex64> = par::map_indexed(xs.len(), |ix| {
            let x = xs[ix];
            let integrand: Vec<Complex64> = (0..n_eps)
                .map(|i| {
                    let k = (2.0 * energies[i]).sqrt();
                    Complex64::from_polar(
                        a[i] / (2.0 * std::f64::consts::PI * k).sqrt(),
                        k * (x - x_r),
                    )
                })
                .collect();
            band.integrate(&integrand).expect("lengths match")
        });
        Ok(PacketOracle {
            band: *band,
            x_r,
            xs,
            phi,
            h,
        })
    }

    /// Exact overlap <psi_{eps,R} | phi> by Simpson quadrature in x.
    pub fn exact_overlap(&self, solution: &ScatteringSolution) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        let n = self.xs.len();
        for (i, (&x, ph)) in self.xs.iter().zip(&self.phi).enumerate() {
            let w = if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            sum += w * solution.value(x).conj() * ph;
        }
        sum * (self.h / 3.0)
    }

    /// The shortcut t*(eps) A(eps) e^{-i k x_R} used by the projection.
    pub fn asymptotic_overlap(&self, solution: &ScatteringSolution) -> Complex64 {
        let (a, _) = crate::band::cos2_amplitude(&self.band);
        let i = self
            .band
            .energies()
            .position(|e| (e - solution.energy).abs() < 0.5 * self.band.spacing())
            .expect("energy on the oracle band");
        solution.transmission.conj()
            * a[i]
            * Complex64::from_polar(1.0, -solution.wavenumber * self.x_r)
    }
}

/// Max Schrödinger residual |-1/2 psi'' + (V - eps) psi| / max|psi| of a
/// solved eigenstate, measured with a 4th-order five-point second-derivative
/// stencil on a fine spatial grid, skipping points within two steps of any
/// interface or delta.
pub fn schrodinger_residual(
    solution: &ScatteringSolution,
    potential: &PotentialSpec,
    dx: f64,
) -> f64 {
    let (x_min, x_max) = potential.support().unwrap_or((0.0, 0.0));
    let lo = x_min - 5.0;
    let hi = x_max + 5.0;
    let n = ((hi - lo) / dx).ceil() as usize;
    let boundaries: Vec<f64> = potential
        .deltas()
        .iter()
        .map(|d| d.position)
        .chain(potential.segments().iter().flat_map(|s| [s.start, s.end]))
        .collect();

    let values: Vec<Complex64> = (0..=n)
        .map(|i| solution.value(lo + i as f64 * dx))
        .collect();
    let max_abs = values.iter().map(|v| v.norm()).fold(0.0_f64, f64::max);

    let mut worst = 0.0_f64;
    for i in 2..n.saturating_sub(1) {
        let x = lo + i as f64 * dx;
        if boundaries.iter().any(|b| (x - b).abs() <= 2.0 * dx) {
            continue;
        }
        let second = (-values[i - 2] + 16.0 * values[i - 1] - 30.0 * values[i]
            + 16.0 * values[i + 1]
            - values[i + 2])
            / (12.0 * dx * dx);
        let resid = (-0.5 * second + (potential.value_at(x) - solution.energy) * values[i]).norm();
        worst = worst.max(resid / max_abs);
    }
    worst
}

/// Max over the deltas of |psi'(x0+) - psi'(x0-) - 2 lambda psi(x0)|,
/// evaluated from the analytic region derivatives.
pub fn delta_jump_residual(solution: &ScatteringSolution, potential: &PotentialSpec) -> f64 {
    let mut worst = 0.0_f64;
    for d in potential.deltas() {
        let x0 = d.position;
        let jump = solution.derivative(x0) - solution.derivative_from_left(x0);
        let resid = (jump - 2.0 * d.strength * solution.value(x0)).norm();
        worst = worst.max(resid);
    }
    worst
}
