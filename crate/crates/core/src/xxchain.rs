//! Single-excitation hopping chain: closed-form spectrum, end-to-end arrival
//! probability, heralded transfer and power-law fits of the arrival peak.
//!
//! The open chain `H = J Σ (|j⟩⟨j+1| + h.c.)` on sites `1..=L` has eigenvalues
//! `2J cos(πm/(L+1))` with eigenvectors `sqrt(2/(L+1)) sin(πmj/(L+1))`. Adding end
//! fields `J(|1⟩⟨1| + |L⟩⟨L|)` gives the one-excitation sector of the Heisenberg chain,
//! with eigenvalues `2J cos(πk/L)` and cosine eigenvectors. Every propagator here is
//! evaluated in these bases without building a matrix.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{SparseOperator, TripletBuilder};

/// Hard cap on heralded measurement rounds.
pub const MAX_HERALD_ROUNDS: usize = 1_000_000;
/// Upper bound on the coarse grid step of [`HoppingChain::max_arrival`].
pub const ARRIVAL_GRID_STEP: f64 = 0.05;
/// Golden-section refinement stops once the bracket is below this.
pub const ARRIVAL_REFINE_TOL: f64 = 1e-6;

/// Diagonal terms on the two end sites.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Pure XX hopping.
    #[default]
    Open,
    /// End fields equal to the coupling, as in the one-excitation Heisenberg chain.
    Heisenberg,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoppingChain {
    len: usize,
    coupling: f64,
    boundary: Boundary,
}

impl HoppingChain {
    pub fn new(len: usize) -> Result<Self> {
        Self::with_coupling(len, 1.0)
    }

    pub fn heisenberg(len: usize) -> Result<Self> {
        Ok(Self::new(len)?.with_boundary(Boundary::Heisenberg))
    }

    pub fn with_coupling(len: usize, coupling: f64) -> Result<Self> {
        if len < 2 {
            return Err(Error::InvalidArgument(format!("chain length {len} < 2")));
        }
        Ok(Self { len, coupling, boundary: Boundary::Open })
    }

    pub fn with_boundary(self, boundary: Boundary) -> Self {
        Self { boundary, ..self }
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    /// Sparse matrix of the chain on sites `0..L` (0-based).
    pub fn matrix(&self) -> SparseOperator {
        let mut b = TripletBuilder::new(self.len);
        for j in 0..self.len - 1 {
            b.push_hermitian_pair(j, j + 1, C64::new(self.coupling, 0.0));
        }
        if self.boundary == Boundary::Heisenberg {
            b.push(0, 0, C64::new(self.coupling, 0.0));
            b.push(self.len - 1, self.len - 1, C64::new(self.coupling, 0.0));
        }
        b.build_hermitian().expect("hopping chain is hermitian by construction")
    }

    /// Eigenvalue of mode `m` in `1..=L` (descending in `m`).
    fn mode_energy(&self, m: usize) -> f64 {
        match self.boundary {
            Boundary::Open => 2.0 * self.coupling * (PI * m as f64 / (self.len + 1) as f64).cos(),
            Boundary::Heisenberg => 2.0 * self.coupling * (PI * (m - 1) as f64 / self.len as f64).cos(),
        }
    }

    /// Amplitude of mode `m` on site `j` (both 1-based).
    fn mode_amplitude(&self, m: usize, j: usize) -> f64 {
        match self.boundary {
            Boundary::Open => {
                let l1 = (self.len + 1) as f64;
                (2.0 / l1).sqrt() * (PI * (m * j) as f64 / l1).sin()
            }
            Boundary::Heisenberg => {
                let l = self.len as f64;
                let k = (m - 1) as f64;
                let norm = if m == 1 { (1.0 / l).sqrt() } else { (2.0 / l).sqrt() };
                norm * (PI * k * (j as f64 - 0.5) / l).cos()
            }
        }
    }

    /// Closed-form spectrum, ascending: `{2J cos(πm/(L+1))}` for the open chain,
    /// `{2J cos(πk/L) : k = 0..L}` with Heisenberg end fields.
    pub fn analytic_spectrum(&self) -> Vec<f64> {
        let mut e: Vec<f64> = (1..=self.len).map(|m| self.mode_energy(m)).collect();
        e.sort_by(f64::total_cmp);
        e
    }

    /// `⟨to| e^{-iHt} |from⟩`, sites 1-based.
    pub fn amplitude(&self, from: usize, to: usize, t: f64) -> C64 {
        (1..=self.len)
            .map(|m| {
                self.mode_amplitude(m, from)
                    * self.mode_amplitude(m, to)
                    * C64::from_polar(1.0, -self.mode_energy(m) * t)
            })
            .sum()
    }

    /// `e^{-iHt} |from⟩` over all sites (index `j - 1` holds site `j`).
    pub fn amplitudes_from(&self, from: usize, t: f64) -> Vec<C64> {
        (1..=self.len).map(|to| self.amplitude(from, to, t)).collect()
    }

    /// `e^{-iHt} ψ` for an arbitrary single-excitation state.
    pub fn propagate(&self, psi: &[C64], t: f64) -> Vec<C64> {
        let modes: Vec<C64> = (1..=self.len)
            .map(|m| {
                let overlap: C64 = psi.iter().enumerate().map(|(j, a)| a * self.mode_amplitude(m, j + 1)).sum();
                overlap * C64::from_polar(1.0, -self.mode_energy(m) * t)
            })
            .collect();
        (1..=self.len).map(|j| modes.iter().enumerate().map(|(k, c)| c * self.mode_amplitude(k + 1, j)).sum()).collect()
    }

    /// `|⟨L| e^{-iHt} |1⟩|²`
    pub fn arrival_probability(&self, t: f64) -> f64 {
        self.amplitude(1, self.len, t).norm_sqr()
    }

    /// Maximum of the arrival probability on `[0, window]`: coarse grid with step
    /// at most [`ARRIVAL_GRID_STEP`], then golden-section refinement of the best cell.
    pub fn max_arrival(&self, window: f64) -> Result<(f64, f64)> {
        self.max_arrival_from(1, window)
    }

    /// As [`Self::max_arrival`] for `|⟨L| e^{-iHt} |start⟩|²`.
    pub fn max_arrival_from(&self, start: usize, window: f64) -> Result<(f64, f64)> {
        self.check_site(start)?;
        let arrival = |t: f64| self.amplitude(start, self.len, t).norm_sqr();
        if window.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::InvalidArgument(format!("window {window} must be positive")));
        }
        let cells = (window / ARRIVAL_GRID_STEP).ceil() as usize;
        let step = window / cells as f64;
        let (best, _) = (0..=cells).map(|i| (i, arrival(i as f64 * step))).fold((0, f64::NEG_INFINITY), |acc, x| {
            if x.1 > acc.1 {
                x
            } else {
                acc
            }
        });
        let lo = best.saturating_sub(1) as f64 * step;
        let hi = ((best + 1).min(cells)) as f64 * step;
        let t = golden_max(arrival, lo, hi, ARRIVAL_REFINE_TOL);
        let grid_t = best as f64 * step;
        let (p_refined, p_grid) = (arrival(t), arrival(grid_t));
        Ok(if p_refined >= p_grid { (t, p_refined) } else { (grid_t, p_grid) })
    }

    /// Default herald period: time of the first arrival peak, searched over `t ≤ L`.
    /// Fixed periods commensurate with the spectrum can leave modes that never reach
    /// site `L` at a measurement time; the peak time avoids that in practice.
    pub fn default_period(&self) -> f64 {
        self.default_period_from(1)
    }

    pub fn default_period_from(&self, start: usize) -> f64 {
        self.max_arrival_from(start, self.len as f64).map(|(t, _)| t).unwrap_or(1.0)
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site == 0 || site > self.len {
            return Err(Error::InvalidArgument(format!("site {site} outside 1..={}", self.len)));
        }
        Ok(())
    }

    /// Measures site `L` every `period`; on failure the projected state is renormalized
    /// and evolution continues. Stops once the cumulative success reaches `1 - epsilon`.
    pub fn heralded_transfer(&self, epsilon: f64, period: f64) -> Result<TransferTrace> {
        self.heralded_transfer_from(1, epsilon, period)
    }

    pub fn heralded_transfer_from(&self, start: usize, epsilon: f64, period: f64) -> Result<TransferTrace> {
        self.check_site(start)?;
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidArgument(format!("epsilon {epsilon} outside (0, 1)")));
        }
        if !(period > 0.0) {
            return Err(Error::InvalidArgument(format!("period {period} must be positive")));
        }
        match self.herald_capped(start, epsilon, period, MAX_HERALD_ROUNDS) {
            (trace, true) => Ok(trace),
            _ => Err(Error::HeraldCap { rounds: MAX_HERALD_ROUNDS }),
        }
    }

    /// Heralded transfer with at most `max_rounds` measurements. Returns the trace so far
    /// and whether the target success was reached. Arguments are not validated.
    pub fn herald_capped(&self, start: usize, epsilon: f64, period: f64, max_rounds: usize) -> (TransferTrace, bool) {
        let n = self.len;
        // propagator[to][from], symmetric
        let propagator: Vec<Vec<C64>> = (1..=n).map(|to| self.amplitudes_from(to, period)).collect();
        let mut psi = vec![C64::new(0.0, 0.0); n];
        psi[start - 1] = C64::new(1.0, 0.0);
        let mut trace = TransferTrace::default();
        let mut survival = 1.0;
        for round in 1..=max_rounds {
            psi = propagator.iter().map(|row| row.iter().zip(&psi).map(|(u, a)| u * a).sum()).collect();
            let p = psi[self.len - 1].norm_sqr().min(1.0);
            survival *= 1.0 - p;
            trace.times.push(round as f64 * period);
            trace.probabilities.push(p);
            trace.cumulative.push(1.0 - survival);
            if 1.0 - survival >= 1.0 - epsilon {
                return (trace, true);
            }
            psi[self.len - 1] = C64::new(0.0, 0.0);
            let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            psi.iter_mut().for_each(|z| *z /= norm);
        }
        (trace, false)
    }

    /// Herald period with the shortest simulated total time among a fixed grid of
    /// multiples `0.5 ..= 2.0` of the first peak time. Avoids periods at which part of
    /// the state never reaches site `L`.
    pub fn tuned_period_from(&self, start: usize, epsilon: f64) -> Result<f64> {
        self.check_site(start)?;
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidArgument(format!("epsilon {epsilon} outside (0, 1)")));
        }
        let peak = self.default_period_from(start);
        let mut best: Option<(f64, f64)> = None;
        for k in 0..=TUNING_STEPS {
            let period = peak * (0.5 + 1.5 * k as f64 / TUNING_STEPS as f64);
            let budget = best.map_or(TUNING_ROUND_CAP, |(_, time)| ((time / period) as usize).min(MAX_HERALD_ROUNDS));
            if let (trace, true) = self.herald_capped(start, epsilon, period, budget) {
                if best.is_none_or(|(_, time)| trace.total_time() < time) {
                    best = Some((period, trace.total_time()));
                }
            }
        }
        best.map(|(p, _)| p).ok_or(Error::HeraldCap { rounds: MAX_HERALD_ROUNDS })
    }
}

/// Number of grid intervals searched by [`HoppingChain::tuned_period_from`].
pub const TUNING_STEPS: usize = 24;
/// Round cap for each candidate period while tuning.
pub const TUNING_ROUND_CAP: usize = 100_000;

/// Per-round record of a heralded transfer.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TransferTrace {
    pub times: Vec<f64>,
    /// Conditional arrival probability observed in each round.
    pub probabilities: Vec<f64>,
    /// Probability that the herald has fired by the end of each round.
    pub cumulative: Vec<f64>,
}

impl TransferTrace {
    pub fn rounds(&self) -> usize {
        self.times.len()
    }

    pub fn total_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn success(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    /// CSV with header `t,p,cumulative_success`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,p,cumulative_success\n");
        for ((t, p), c) in self.times.iter().zip(&self.probabilities).zip(&self.cumulative) {
            writeln!(out, "{t},{p},{c}").unwrap();
        }
        out
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Least-squares slope of `ln p` against `ln L`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InsufficientRange("need at least two points".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientRange("all lengths identical".into()));
    }
    Ok(sxy / sxx)
}

/// Peak arrival probability within `t ≤ 2L` for each length.
pub fn arrival_peaks(lengths: &[usize], boundary: Boundary) -> Result<Vec<(usize, f64, f64)>> {
    use rayon::prelude::*;
    lengths
        .par_iter()
        .map(|&l| {
            let (t, p) = HoppingChain::new(l)?.with_boundary(boundary).max_arrival(2.0 * l as f64)?;
            Ok((l, t, p))
        })
        .collect()
}

/// Fitted exponent of the peak arrival probability versus chain length, for the
/// Heisenberg-boundary transfer chain. Requires at least five lengths spanning a factor of eight.
pub fn fit_arrival_exponent(lengths: &[usize]) -> Result<f64> {
    fit_arrival_exponent_with(lengths, Boundary::Heisenberg)
}

pub fn fit_arrival_exponent_with(lengths: &[usize], boundary: Boundary) -> Result<f64> {
    let (lo, hi) = (lengths.iter().min(), lengths.iter().max());
    match (lo, hi) {
        (Some(&lo), Some(&hi)) if lengths.len() >= 5 && hi >= 8 * lo => {}
        _ => return Err(Error::InsufficientRange(format!("need >= 5 lengths spanning a factor 8, got {lengths:?}"))),
    }
    let peaks = arrival_peaks(lengths, boundary)?;
    fit_power_law(&peaks.iter().map(|&(l, _, p)| (l as f64, p)).collect::<Vec<_>>())
}
