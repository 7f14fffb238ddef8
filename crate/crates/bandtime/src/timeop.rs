//! Spectral machinery of the band time operator tau = i d/deps + eta(eps):
//! quantized eigenvalues tau_m = 2 pi m / delta_eps, eigenstate overlaps,
//! arrival-time distributions and moments, the modulus/phase variance
//! split, time evolution and the mod-delta_eps energy shift.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::band::{
    nonzero_runs, segment_integral, stencil_derivative, unwrap_phase, BandGrid, Channel,
    ChannelAmplitude, GaugePhase,
};
use crate::error::{Error, Result};
use crate::par;

/// Quantized times tau_m = (2 pi / delta_eps) m for m in [m_min, m_max].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    delta_eps: f64,
    m_min: i64,
    m_max: i64,
}

impl TimeGrid {
    pub fn new(delta_eps: f64, m_min: i64, m_max: i64) -> Result<Self> {
        if delta_eps <= 0.0 || m_min > m_max {
            return Err(Error::validation("invalid time grid"));
        }
        if m_min > 0 || m_max < 0 {
            return Err(Error::validation("time grid must include tau_0 = 0"));
        }
        Ok(TimeGrid {
            delta_eps,
            m_min,
            m_max,
        })
    }

    pub fn tau(&self, m: i64) -> f64 {
        2.0 * PI * m as f64 / self.delta_eps
    }

    /// Spacing 2 pi / delta_eps between adjacent eigenvalues.
    pub fn quantum(&self) -> f64 {
        2.0 * PI / self.delta_eps
    }

    pub fn m_min(&self) -> i64 {
        self.m_min
    }

    pub fn m_max(&self) -> i64 {
        self.m_max
    }

    pub fn len(&self) -> usize {
        (self.m_max - self.m_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Normalized time eigenfunction g_{tau_m}(eps) =
/// e^{-i tau_m eps} e^{i Phi_eta(eps)} / sqrt(delta_eps) on one channel.
pub fn eigenfunction(
    grid: &BandGrid,
    channel: Channel,
    m: i64,
    gauge: &GaugePhase,
) -> Result<ChannelAmplitude> {
    grid.check_matches(gauge.grid())?;
    let tau = 2.0 * PI * m as f64 / grid.delta_eps();
    let norm = 1.0 / grid.delta_eps().sqrt();
    let phi = gauge.phi(channel);
    let samples = (0..grid.len())
        .map(|i| Complex64::from_polar(norm, -tau * grid.energy(i) + phi[i]))
        .collect();
    ChannelAmplitude::new(*grid, channel, samples)
}

/// Overlap c_m = <tau_m | g> by band quadrature:
/// (1/sqrt(delta_eps)) int deps e^{+i tau_m eps} e^{-i Phi_eta(eps)} g(eps).
pub fn eigenstate_overlap(
    g: &ChannelAmplitude,
    m: i64,
    gauge: &GaugePhase,
) -> Result<Complex64> {
    g.grid().check_matches(gauge.grid())?;
    Ok(overlap_unchecked(g, m, gauge))
}

fn overlap_unchecked(g: &ChannelAmplitude, m: i64, gauge: &GaugePhase) -> Complex64 {
    let grid = g.grid();
    let tau = 2.0 * PI * m as f64 / grid.delta_eps();
    let phi = gauge.phi(g.channel());
    let integrand: Vec<Complex64> = g
        .samples()
        .iter()
        .enumerate()
        .map(|(i, z)| z * Complex64::from_polar(1.0, tau * grid.energy(i) - phi[i]))
        .collect();
    grid.integrate(&integrand).expect("lengths match by construction") / grid.delta_eps().sqrt()
}

/// Controls for the adaptive eigenvalue range of `distribution`.
#[derive(Debug, Clone, Copy)]
pub struct DistributionOptions {
    /// Stop once the captured probability mass reaches 1 - tail_tol.
    pub tail_tol: f64,
    /// Hard cap on |m|; exceeding it is a numerical failure.
    pub m_cap: i64,
}

impl Default for DistributionOptions {
    fn default() -> Self {
        DistributionOptions {
            tail_tol: 1e-3,
            m_cap: 1 << 14,
        }
    }
}

/// Arrival-time probabilities P_m = |c_m|^2 on the adaptively grown range,
/// with the discrete moments and the captured-mass bookkeeping.
#[derive(Debug, Clone)]
pub struct ArrivalDistribution {
    time_grid: TimeGrid,
    probabilities: Vec<f64>,
    captured: f64,
    mean: f64,
    second_moment: f64,
    std_dev: f64,
}

impl ArrivalDistribution {
    pub fn time_grid(&self) -> &TimeGrid {
        &self.time_grid
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn probability(&self, m: i64) -> f64 {
        self.probabilities[(m - self.time_grid.m_min) as usize]
    }

    /// Iterate (m, tau_m, P_m) in ascending m.
    pub fn entries(&self) -> impl Iterator<Item = (i64, f64, f64)> + '_ {
        self.probabilities.iter().enumerate().map(move |(i, &p)| {
            let m = self.time_grid.m_min + i as i64;
            (m, self.time_grid.tau(m), p)
        })
    }

    /// Total captured probability mass Sum P_m.
    pub fn captured(&self) -> f64 {
        self.captured
    }

    /// Estimate of the mass outside the captured range.
    pub fn tail_mass(&self) -> f64 {
        (1.0 - self.captured).max(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn second_moment(&self) -> f64 {
        self.second_moment
    }

    pub fn std_dev(&self) -> f64 {
        self.std_dev
    }

    pub fn variance(&self) -> f64 {
        self.std_dev * self.std_dev
    }
}

/// P_m = |<tau_m | g>|^2 with the range grown adaptively (|m| <= 64, then
/// doubling) until the captured mass reaches 1 - tail_tol. Per-m overlaps
/// run in parallel; sums are reduced in fixed ascending-m order.
pub fn distribution(
    g: &ChannelAmplitude,
    gauge: &GaugePhase,
    opts: DistributionOptions,
) -> Result<ArrivalDistribution> {
    g.grid().check_matches(gauge.grid())?;
    let norm = g.norm();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::validation(format!(
            "distribution requires a normalized amplitude, got norm {norm}"
        )));
    }

    let mut half: i64 = 64;
    let mut probs = compute_probs(g, gauge, -half, half);
    loop {
        let captured: f64 = probs.iter().sum();
        if captured >= 1.0 - opts.tail_tol {
            break;
        }
        if 2 * half > opts.m_cap {
            return Err(Error::TailNotCaptured {
                captured,
                m_reached: half,
                m_cap: opts.m_cap,
            });
        }
        let lower = compute_probs(g, gauge, -2 * half, -half - 1);
        let upper = compute_probs(g, gauge, half + 1, 2 * half);
        let mut next = lower;
        next.extend_from_slice(&probs);
        next.extend_from_slice(&upper);
        probs = next;
        half *= 2;
    }

    let time_grid = TimeGrid::new(g.grid().delta_eps(), -half, half)?;
    let mut captured = 0.0;
    let mut mean = 0.0;
    let mut second = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        let tau = time_grid.tau(time_grid.m_min + i as i64);
        captured += p;
        mean += p * tau;
        second += p * tau * tau;
    }
    if captured > 1.0 + 1e-10 {
        return Err(Error::numerical(format!(
            "captured probability mass {captured} exceeds 1 beyond quadrature tolerance"
        )));
    }
    // the cancellation noise of second - mean^2 scales with the moment
    // magnitude, so the roundoff floor does too
    let var = second - mean * mean;
    if var < -1e-12 * second.max(1.0) {
        return Err(Error::numerical(format!(
            "negative arrival-time variance {var}"
        )));
    }
    Ok(ArrivalDistribution {
        time_grid,
        probabilities: probs,
        captured,
        mean,
        second_moment: second,
        std_dev: var.max(0.0).sqrt(),
    })
}

fn compute_probs(g: &ChannelAmplitude, gauge: &GaugePhase, m_lo: i64, m_hi: i64) -> Vec<f64> {
    let count = (m_hi - m_lo + 1) as usize;
    par::map_indexed(count, |i| {
        overlap_unchecked(g, m_lo + i as i64, gauge).norm_sqr()
    })
}

/// Mean arrival time in the energy-band representation together with the
/// imaginary residue of the quadrature (zero in exact arithmetic for
/// edge-supported states).
#[derive(Debug, Clone, Copy)]
pub struct Expectation {
    pub time: f64,
    pub imag_residue: f64,
}

const IMAG_RESIDUE_TOL: f64 = 1e-8;

/// tau-bar = int g* [i d/deps + eta] g deps via the module stencil and
/// quadrature. Errors if the imaginary residue exceeds 1e-8.
pub fn expectation_energy_rep(g: &ChannelAmplitude, gauge: &GaugePhase) -> Result<Expectation> {
    g.grid().check_matches(gauge.grid())?;
    let val = operator_quadratic_form(g, gauge)?;
    let residue = val.im.abs();
    if residue > IMAG_RESIDUE_TOL {
        return Err(Error::numerical(format!(
            "imaginary residue {residue:.3e} of the time expectation exceeds {IMAG_RESIDUE_TOL:.0e}"
        )));
    }
    Ok(Expectation {
        time: val.re,
        imag_residue: residue,
    })
}

fn operator_quadratic_form(g: &ChannelAmplitude, gauge: &GaugePhase) -> Result<Complex64> {
    let grid = g.grid();
    let dg = grid.differentiate(g.samples())?;
    let eta = gauge.eta(g.channel());
    let integrand: Vec<Complex64> = g
        .samples()
        .iter()
        .zip(dg.iter())
        .zip(eta)
        .map(|((z, dz), &e)| z.conj() * (Complex64::new(0.0, 1.0) * dz + e * z))
        .collect();
    grid.integrate(&integrand)
}

/// Second moment <g| tau^2 |g> = int |i g' + eta g|^2 deps, computed
/// directly from the stencil derivative (no polar decomposition).
pub fn operator_second_moment(g: &ChannelAmplitude, gauge: &GaugePhase) -> Result<f64> {
    g.grid().check_matches(gauge.grid())?;
    let grid = g.grid();
    let dg = grid.differentiate(g.samples())?;
    let eta = gauge.eta(g.channel());
    let integrand: Vec<f64> = g
        .samples()
        .iter()
        .zip(dg.iter())
        .zip(eta)
        .map(|((z, dz), &e)| (Complex64::new(0.0, 1.0) * dz + e * z).norm_sqr())
        .collect();
    grid.integrate_real(&integrand)
}

/// The variance split into the gauge-independent modulus-dispersion term
/// int (d|g|/deps)^2 and the phase term
/// int |g|^2 (eta - chi')^2 - (int |g|^2 (eta - chi'))^2.
/// Integrals are taken per contiguous run where |g| stays above
/// 1e-10 max|g|; `segment_count` reports how many runs contributed.
#[derive(Debug, Clone, Copy)]
pub struct VarianceDecomposition {
    pub modulus_term: f64,
    pub phase_term: f64,
    /// int |g|^2 (eta - chi') deps: the mean entering the phase term,
    /// equal to the time expectation for edge-supported states.
    pub phase_mean: f64,
    pub segment_count: usize,
}

impl VarianceDecomposition {
    pub fn total(&self) -> f64 {
        self.modulus_term + self.phase_term
    }
}

const MODULUS_FLOOR: f64 = 1e-10;

pub fn variance_decomposition(
    g: &ChannelAmplitude,
    gauge: &GaugePhase,
) -> Result<VarianceDecomposition> {
    g.grid().check_matches(gauge.grid())?;
    let grid = g.grid();
    let h = grid.spacing();
    let moduli: Vec<f64> = g.samples().iter().map(|z| z.norm()).collect();
    let eta = gauge.eta(g.channel());

    let runs = nonzero_runs(&moduli, MODULUS_FLOOR, 5);
    if runs.is_empty() {
        return Err(Error::numerical(
            "amplitude modulus below floor everywhere; cannot decompose variance",
        ));
    }

    let mut modulus_term = 0.0;
    let mut w_x = 0.0;
    let mut w_norm = 0.0;
    let mut per_run: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(runs.len());
    for run in &runs {
        // extend the modulus run by one sample on each side so that the
        // (d|g|)^2 integral covers the touch-down points at the zeros
        let lo = run.start.saturating_sub(1);
        let hi = (run.end + 1).min(moduli.len());
        let dmod = stencil_derivative(&moduli[lo..hi], h);
        let sq: Vec<f64> = dmod.iter().map(|d| d * d).collect();
        modulus_term += segment_integral(&sq, h);

        let chi = unwrap_phase(&g.samples()[run.clone()]);
        let dchi = stencil_derivative(&chi, h);
        let w2: Vec<f64> = moduli[run.clone()].iter().map(|m| m * m).collect();
        let x: Vec<f64> = dchi
            .iter()
            .zip(&eta[run.clone()])
            .map(|(dc, e)| e - dc)
            .collect();
        let ix: Vec<f64> = w2.iter().zip(&x).map(|(w, x)| w * x).collect();
        w_x += segment_integral(&ix, h);
        w_norm += segment_integral(&w2, h);
        per_run.push((w2, x));
    }

    // two-pass variance: integrating |g|^2 (X - mean)^2 directly keeps the
    // invariance under constant gauge shifts at roundoff level
    let mean = w_x / w_norm;
    let mut phase_term = 0.0;
    for (w2, x) in &per_run {
        let centered: Vec<f64> = w2
            .iter()
            .zip(x)
            .map(|(w, x)| w * (x - mean) * (x - mean))
            .collect();
        phase_term += segment_integral(&centered, h);
    }

    Ok(VarianceDecomposition {
        modulus_term,
        phase_term,
        phase_mean: w_x,
        segment_count: runs.len(),
    })
}

/// Time evolution e^{-i H dt} in the band representation: multiply the
/// samples by e^{-i eps_i dt}. Norm-preserving.
pub fn evolve(g: &ChannelAmplitude, dt: f64) -> ChannelAmplitude {
    let grid = *g.grid();
    let samples = g
        .samples()
        .iter()
        .enumerate()
        .map(|(i, z)| z * Complex64::from_polar(1.0, -grid.energy(i) * dt))
        .collect();
    ChannelAmplitude::new(grid, g.channel(), samples).expect("length preserved")
}

/// The energy-shift operator e^{-i eps' tau} for eps' = j * spacing:
/// a circular shift of the gauge-stripped samples by j grid steps, with
/// the band's two edge points identified. Shifting by N - 1 steps is the
/// identity; spectral features wrap around the band instead of leaving it.
pub fn energy_shift(
    g: &ChannelAmplitude,
    gauge: &GaugePhase,
    steps: i64,
) -> Result<ChannelAmplitude> {
    g.grid().check_matches(gauge.grid())?;
    let grid = g.grid();
    let n = grid.len();
    let cycle = (n - 1) as i64;
    let phi = gauge.phi(g.channel());

    let stripped: Vec<Complex64> = g
        .samples()
        .iter()
        .zip(phi)
        .map(|(z, p)| z * Complex64::from_polar(1.0, -p))
        .collect();
    let mut shifted = Vec::with_capacity(n);
    for i in 0..cycle {
        let src = (i + steps).rem_euclid(cycle) as usize;
        shifted.push(stripped[src]);
    }
    shifted.push(shifted[0]);
    let samples = shifted
        .into_iter()
        .zip(phi)
        .map(|(z, p)| z * Complex64::from_polar(1.0, *p))
        .collect();
    ChannelAmplitude::new(*grid, g.channel(), samples)
}

/// <g| [tau, H] |g> evaluated with the module stencils; equals i for
/// normalized states supported inside the band.
pub fn commutator_expectation(g: &ChannelAmplitude, gauge: &GaugePhase) -> Result<Complex64> {
    g.grid().check_matches(gauge.grid())?;
    let grid = g.grid();
    let eta = gauge.eta(g.channel());
    let i = Complex64::new(0.0, 1.0);

    let hg: Vec<Complex64> = g
        .samples()
        .iter()
        .enumerate()
        .map(|(j, z)| z * grid.energy(j))
        .collect();
    let dhg = grid.differentiate(&hg)?;
    let dg = grid.differentiate(g.samples())?;

    let integrand: Vec<Complex64> = (0..grid.len())
        .map(|j| {
            let tau_hg = i * dhg[j] + eta[j] * hg[j];
            let h_tau_g = grid.energy(j) * (i * dg[j] + eta[j] * g.samples()[j]);
            g.samples()[j].conj() * (tau_hg - h_tau_g)
        })
        .collect();
    grid.integrate(&integrand)
}

/// Mean and variance of the energy in the state g.
pub fn energy_moments(g: &ChannelAmplitude) -> Result<(f64, f64)> {
    let grid = g.grid();
    let w: Vec<f64> = g.samples().iter().map(|z| z.norm_sqr()).collect();
    let we: Vec<f64> = w
        .iter()
        .enumerate()
        .map(|(i, w)| w * grid.energy(i))
        .collect();
    let wee: Vec<f64> = w
        .iter()
        .enumerate()
        .map(|(i, w)| w * grid.energy(i) * grid.energy(i))
        .collect();
    let mean = grid.integrate_real(&we)?;
    let second = grid.integrate_real(&wee)?;
    Ok((mean, second - mean * mean))
}
