//! States on a finite energy band with periodic boundary conditions:
//! uniform grids, Simpson quadrature, stencil differentiation, channel
//! amplitudes, and the gauge phases eta_alpha(eps) entering the time
//! operator.
//!
//! One quadrature rule (composite Simpson on the endpoint-inclusive odd-N
//! grid) is used for every norm, overlap and moment so that Parseval-type
//! identities hold to roundoff rather than to mixed-rule error.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Range, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Uniform energy grid over the band (eps0, eps0 + delta_eps), both
/// endpoints included. N is odd so composite Simpson applies directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandGrid {
    eps0: f64,
    delta_eps: f64,
    n: usize,
}

impl BandGrid {
    pub fn new(eps0: f64, delta_eps: f64, n: usize) -> Result<Self> {
        if !eps0.is_finite() || eps0 <= 0.0 {
            return Err(Error::validation(format!(
                "band start must be positive and finite, got {eps0}"
            )));
        }
        if !delta_eps.is_finite() || delta_eps <= 0.0 {
            return Err(Error::validation(format!(
                "band width must be positive and finite, got {delta_eps}"
            )));
        }
        if n < 3 || n % 2 == 0 {
            return Err(Error::validation(format!(
                "grid point count must be odd and >= 3 (Simpson rule), got {n}"
            )));
        }
        Ok(BandGrid {
            eps0,
            delta_eps,
            n,
        })
    }

    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    pub fn delta_eps(&self) -> f64 {
        self.delta_eps
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing delta_eps / (N - 1).
    pub fn spacing(&self) -> f64 {
        self.delta_eps / (self.n - 1) as f64
    }

    pub fn energy(&self, i: usize) -> f64 {
        self.eps0 + self.delta_eps * i as f64 / (self.n - 1) as f64
    }

    pub fn energies(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.energy(i))
    }

    /// Time quantum 2 pi / delta_eps of the band.
    pub fn time_quantum(&self) -> f64 {
        2.0 * PI / self.delta_eps
    }

    pub fn check_matches(&self, other: &BandGrid) -> Result<()> {
        if self != other {
            return Err(Error::validation(format!(
                "band grids differ: ({}, {}, {}) vs ({}, {}, {})",
                self.eps0, self.delta_eps, self.n, other.eps0, other.delta_eps, other.n
            )));
        }
        Ok(())
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::validation(format!(
                "sample count {len} does not match grid point count {}",
                self.n
            )));
        }
        Ok(())
    }

    /// Composite Simpson integral of complex samples over the band.
    pub fn integrate(&self, samples: &[Complex64]) -> Result<Complex64> {
        self.check_len(samples.len())?;
        Ok(simpson(samples, self.spacing()))
    }

    /// Composite Simpson integral of real samples over the band.
    pub fn integrate_real(&self, samples: &[f64]) -> Result<f64> {
        self.check_len(samples.len())?;
        Ok(simpson(samples, self.spacing()))
    }

    /// Running integral Phi(eps_i) = int_{eps0}^{eps_i}, Phi(eps0) = 0.
    /// Each sub-interval is integrated with the local parabola through the
    /// three nearest samples, so pairs of intervals sum to plain Simpson.
    pub fn cumulative_integral(&self, samples: &[f64]) -> Result<Vec<f64>> {
        self.check_len(samples.len())?;
        Ok(cumulative_simpson(samples, self.spacing()))
    }

    /// Stencil derivative of complex samples: 4th-order in the interior,
    /// 2nd-order one-sided at the two edge points.
    pub fn differentiate(&self, samples: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(samples.len())?;
        Ok(stencil_derivative(samples, self.spacing()))
    }

    pub fn differentiate_real(&self, samples: &[f64]) -> Result<Vec<f64>> {
        self.check_len(samples.len())?;
        Ok(stencil_derivative(samples, self.spacing()))
    }
}

fn simpson<T>(samples: &[T], h: f64) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T>,
{
    let n = samples.len();
    debug_assert!(n >= 3 && n % 2 == 1);
    let mut acc = samples[0] * 1.0;
    for (i, &s) in samples.iter().enumerate().take(n - 1).skip(1) {
        acc = acc + s * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc = acc + samples[n - 1] * 1.0;
    acc * (h / 3.0)
}

/// Simpson-consistent integral on an arbitrary contiguous run of samples.
/// Odd run lengths reduce to composite Simpson; even lengths integrate the
/// first interval with a parabola through the first three points.
pub(crate) fn segment_integral<T>(samples: &[T], h: f64) -> T
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let n = samples.len();
    assert!(n >= 3, "segment too short to integrate");
    if n % 2 == 1 {
        return simpson(samples, h);
    }
    let head =
        (samples[0] * 5.0 + samples[1] * 8.0 - samples[2] * 1.0) * (h / 12.0);
    head + simpson(&samples[1..], h)
}

fn cumulative_simpson(samples: &[f64], h: f64) -> Vec<f64> {
    let n = samples.len();
    let mut out = vec![0.0; n];
    if n < 3 {
        return out;
    }
    // forward parabola on even intervals, backward on odd: each interval
    // pair then sums to the plain Simpson pair, so the cumulative values
    // at even points agree with the composite rule to roundoff
    for j in 0..n - 1 {
        let inc = if j % 2 == 0 {
            h * (5.0 * samples[j] + 8.0 * samples[j + 1] - samples[j + 2]) / 12.0
        } else {
            h * (-samples[j - 1] + 8.0 * samples[j] + 5.0 * samples[j + 1]) / 12.0
        };
        out[j + 1] = out[j] + inc;
    }
    out
}

/// First-derivative stencil on a uniform run: 4th-order central in the
/// interior, 4th-order skewed at the points next to the ends, 2nd-order
/// one-sided at the two edge points. Exact for polynomials of degree <= 4
/// away from the edge points.
pub(crate) fn stencil_derivative<T>(samples: &[T], h: f64) -> Vec<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let n = samples.len();
    assert!(n >= 5, "stencil derivative needs at least 5 samples");
    let s = samples;
    let mut out = Vec::with_capacity(n);
    out.push((s[1] * 4.0 - s[0] * 3.0 - s[2] * 1.0) * (1.0 / (2.0 * h)));
    out.push(
        (s[2] * 18.0 - s[0] * 3.0 - s[1] * 10.0 - s[3] * 6.0 + s[4] * 1.0)
            * (1.0 / (12.0 * h)),
    );
    for i in 2..n - 2 {
        out.push(
            (s[i - 2] * 1.0 - s[i - 1] * 8.0 + s[i + 1] * 8.0 - s[i + 2] * 1.0)
                * (1.0 / (12.0 * h)),
        );
    }
    out.push(
        (s[n - 1] * 3.0 + s[n - 2] * 10.0 - s[n - 3] * 18.0 + s[n - 4] * 6.0
            - s[n - 5] * 1.0)
            * (1.0 / (12.0 * h)),
    );
    out.push((s[n - 1] * 3.0 - s[n - 2] * 4.0 + s[n - 3] * 1.0) * (1.0 / (2.0 * h)));
    out
}

/// Cumulative unwrap of the arguments of complex samples: each step is
/// folded into (-pi, pi] before accumulation.
pub fn unwrap_phase(samples: &[Complex64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(samples.len());
    if samples.is_empty() {
        return out;
    }
    let mut prev = samples[0].arg();
    out.push(prev);
    let mut acc = prev;
    for z in &samples[1..] {
        let ph = z.arg();
        let mut d = ph - prev;
        while d > PI {
            d -= 2.0 * PI;
        }
        while d <= -PI {
            d += 2.0 * PI;
        }
        acc += d;
        out.push(acc);
        prev = ph;
    }
    out
}

/// The cos^2 spectral profile A(eps) = N_A cos^2((eps - eps1) pi / delta_eps)
/// with eps1 the band center, normalized so that int A^2 deps = 1.
/// The endpoint samples are exact zeros; the analytic normalization is
/// N_A = sqrt(8 / (3 delta_eps)).
pub fn cos2_amplitude(grid: &BandGrid) -> (Vec<f64>, f64) {
    let na = (8.0 / (3.0 * grid.delta_eps())).sqrt();
    let n = grid.len();
    let samples = (0..n)
        .map(|i| {
            if i == 0 || i == n - 1 {
                0.0
            } else {
                let y = PI * (i as f64 / (n - 1) as f64 - 0.5);
                na * y.cos().powi(2)
            }
        })
        .collect();
    (samples, na)
}

/// cos^2 profile rescaled to a sub-band window [center - width/2,
/// center + width/2], zero outside, normalized to unit L2 norm on the grid.
/// Keeps the edge-vanishing support needed by the time-operator domain.
pub fn windowed_cos2_amplitude(grid: &BandGrid, center: f64, width: f64) -> Result<Vec<f64>> {
    if width <= 0.0 {
        return Err(Error::validation("sub-band width must be positive"));
    }
    let lo = center - width / 2.0;
    let hi = center + width / 2.0;
    if lo < grid.eps0() || hi > grid.eps0() + grid.delta_eps() {
        return Err(Error::validation(format!(
            "sub-band ({lo}, {hi}) not contained in the band"
        )));
    }
    let mut samples: Vec<f64> = grid
        .energies()
        .map(|eps| {
            if eps <= lo || eps >= hi {
                0.0
            } else {
                let y = (eps - center) * PI / width;
                y.cos().powi(2)
            }
        })
        .collect();
    let sq: Vec<f64> = samples.iter().map(|a| a * a).collect();
    let norm = grid.integrate_real(&sq)?.sqrt();
    if norm <= 0.0 {
        return Err(Error::validation(
            "sub-band window contains no interior grid points",
        ));
    }
    for a in &mut samples {
        *a /= norm;
    }
    Ok(samples)
}

/// Degeneracy label of the scattering states at fixed energy: right- or
/// left-incident channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Right,
    Left,
}

impl Channel {
    fn index(self) -> usize {
        match self {
            Channel::Right => 0,
            Channel::Left => 1,
        }
    }
}

/// Complex amplitude g(eps, alpha) of a state in the energy-band
/// representation, sampled on the grid for one channel.
#[derive(Debug, Clone)]
pub struct ChannelAmplitude {
    grid: BandGrid,
    channel: Channel,
    samples: Vec<Complex64>,
}

impl ChannelAmplitude {
    pub fn new(grid: BandGrid, channel: Channel, samples: Vec<Complex64>) -> Result<Self> {
        grid.check_len(samples.len())?;
        Ok(ChannelAmplitude {
            grid,
            channel,
            samples,
        })
    }

    pub fn from_fn(
        grid: BandGrid,
        channel: Channel,
        f: impl Fn(f64) -> Complex64,
    ) -> Self {
        let samples = grid.energies().map(f).collect();
        ChannelAmplitude {
            grid,
            channel,
            samples,
        }
    }

    pub fn grid(&self) -> &BandGrid {
        &self.grid
    }

    pub fn channel(&self) -> Channel {
        self.channel
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn norm_squared(&self) -> f64 {
        let sq: Vec<f64> = self.samples.iter().map(|z| z.norm_sqr()).collect();
        simpson(&sq, self.grid.spacing())
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Rescale to unit norm. Idempotent to roundoff.
    pub fn normalize(&mut self) -> Result<()> {
        let norm = self.norm();
        if !(norm.is_finite() && norm > 1e-300) {
            return Err(Error::numerical(format!(
                "cannot normalize amplitude with norm {norm}"
            )));
        }
        for z in &mut self.samples {
            *z /= norm;
        }
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// Relative size of the band-edge samples, max(|g_0|, |g_{N-1}|) / max|g|.
    /// States in the time-operator domain should keep this below ~1e-8.
    pub fn edge_support_defect(&self) -> f64 {
        let max = self
            .samples
            .iter()
            .map(|z| z.norm())
            .fold(0.0_f64, f64::max);
        if max == 0.0 {
            return 0.0;
        }
        let n = self.samples.len();
        self.samples[0].norm().max(self.samples[n - 1].norm()) / max
    }

    pub fn is_edge_supported(&self, tol: f64) -> bool {
        self.edge_support_defect() < tol
    }
}

/// Channel-diagonal gauge freedom of the time operator: samples of
/// eta_alpha(eps) together with the accumulated phase
/// Phi_alpha(eps) = int_{eps0}^{eps} eta_alpha, anchored at Phi(eps0) = 0.
/// The anchor only fixes a global phase of the time eigenstates.
#[derive(Debug, Clone)]
pub struct GaugePhase {
    grid: BandGrid,
    eta: [Vec<f64>; 2],
    phi: [Vec<f64>; 2],
}

impl GaugePhase {
    pub fn from_samples(grid: BandGrid, eta_right: Vec<f64>, eta_left: Vec<f64>) -> Result<Self> {
        grid.check_len(eta_right.len())?;
        grid.check_len(eta_left.len())?;
        let phi_r = grid.cumulative_integral(&eta_right)?;
        let phi_l = grid.cumulative_integral(&eta_left)?;
        Ok(GaugePhase {
            grid,
            eta: [eta_right, eta_left],
            phi: [phi_r, phi_l],
        })
    }

    /// eta_{R/L}(eps) = -T0: the zero-time eigenstate is built from the
    /// incoming scattering states at initial time T0.
    pub fn constant(grid: BandGrid, t0: f64) -> Self {
        let eta = vec![-t0; grid.len()];
        GaugePhase::from_samples(grid, eta.clone(), eta).expect("constant gauge is always valid")
    }

    pub fn zero(grid: BandGrid) -> Self {
        GaugePhase::constant(grid, 0.0)
    }

    /// Free-particle arrival gauge eta(eps) = x0 / sqrt(2 eps), the energy
    /// derivative of k x0. Its zero-time eigenstate approximates the
    /// position eigenstate at x0.
    pub fn spatial_arrival(grid: BandGrid, x0: f64) -> Self {
        let eta: Vec<f64> = grid.energies().map(|eps| x0 / (2.0 * eps).sqrt()).collect();
        GaugePhase::from_samples(grid, eta.clone(), eta)
            .expect("arrival gauge is always valid on a positive band")
    }

    /// Same gauge with a constant added to eta on both channels.
    pub fn shifted(&self, c: f64) -> Self {
        let shift = |v: &Vec<f64>| v.iter().map(|e| e + c).collect::<Vec<f64>>();
        GaugePhase::from_samples(self.grid, shift(&self.eta[0]), shift(&self.eta[1]))
            .expect("shifting preserves validity")
    }

    pub fn grid(&self) -> &BandGrid {
        &self.grid
    }

    pub fn eta(&self, channel: Channel) -> &[f64] {
        &self.eta[channel.index()]
    }

    /// Accumulated phase Phi(eps_i) on the given channel.
    pub fn phi(&self, channel: Channel) -> &[f64] {
        &self.phi[channel.index()]
    }
}

/// Unitary change of energy-band representation: multiplies the samples by
/// e^{i Phi_nu(eps)} on the amplitude's channel. Moduli are untouched, so
/// the norm is preserved exactly.
pub fn gauge_transform(g: &ChannelAmplitude, nu: &GaugePhase) -> Result<ChannelAmplitude> {
    g.grid().check_matches(nu.grid())?;
    let phi = nu.phi(g.channel());
    let samples = g
        .samples()
        .iter()
        .zip(phi)
        .map(|(z, p)| z * Complex64::from_polar(1.0, *p))
        .collect();
    ChannelAmplitude::new(*g.grid(), g.channel(), samples)
}

/// Contiguous runs where |g| stays above tol * max|g|; runs shorter than
/// `min_len` are dropped. Used to split phase-sensitive integrals at the
/// zeros of the modulus.
pub(crate) fn nonzero_runs(moduli: &[f64], tol: f64, min_len: usize) -> Vec<Range<usize>> {
    let max = moduli.iter().copied().fold(0.0_f64, f64::max);
    let floor = tol * max;
    let mut runs = Vec::new();
    let mut start = None;
    for (i, &m) in moduli.iter().enumerate() {
        if m > floor {
            if start.is_none() {
                start = Some(i);
            }
        } else if let Some(s) = start.take() {
            if i - s >= min_len {
                runs.push(s..i);
            }
        }
    }
    if let Some(s) = start {
        if moduli.len() - s >= min_len {
            runs.push(s..moduli.len());
        }
    }
    runs
}
