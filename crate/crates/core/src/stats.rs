//! Path functionals and ensemble estimators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sde::CLAMP_FLOOR;

/// Left-Riemann average of `series` (sampled every `dt` from `t = 0`) over
/// `[t_start, t_end]`.
pub fn time_average(series: &[f64], dt: f64, t_start: f64, t_end: f64) -> Result<f64> {
    let window = || Error::Window {
        start: t_start,
        end: t_end,
        t_end: dt * series.len().saturating_sub(1) as f64,
    };
    if !(dt > 0.0) || !(t_start >= 0.0) || !(t_start < t_end) {
        return Err(window());
    }
    let first = (t_start / dt).round() as usize;
    let last = (t_end / dt).round() as usize;
    if last >= series.len() || last <= first {
        return Err(window());
    }
    let slice = &series[first..last];
    Ok(slice.iter().sum::<f64>() / slice.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtinctionExponent {
    /// `ln I(T) / T`.
    pub terminal: f64,
    /// Least-squares slope of `ln I` over the second half of the grid.
    pub slope: f64,
}

fn positive_log(v: f64) -> f64 {
    if v > 0.0 {
        v.ln()
    } else {
        CLAMP_FLOOR.ln()
    }
}

/// Both extinction-rate estimators for an infected series sampled every `dt`.
/// Non-positive samples count as the clamp floor.
pub fn extinction_exponent(i_series: &[f64], dt: f64) -> Result<ExtinctionExponent> {
    let n = i_series.len();
    let start = n / 2;
    if n - start < 10 {
        return Err(Error::TooFewPoints {
            needed: 20,
            got: n,
        });
    }
    let t_end = dt * (n - 1) as f64;
    let terminal = positive_log(i_series[n - 1]) / t_end;

    let window = &i_series[start..];
    let m = window.len() as f64;
    // Regress on centred time indices.
    let mid = 0.5 * (m - 1.0);
    let mean_y = window.iter().map(|&v| positive_log(v)).sum::<f64>() / m;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (k, &v) in window.iter().enumerate() {
        let x = k as f64 - mid;
        sxy += x * (positive_log(v) - mean_y);
        sxx += x * x;
    }
    Ok(ExtinctionExponent {
        terminal,
        slope: sxy / sxx / dt,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bins {
    Count(usize),
    Width(f64),
}

/// Density-normalised histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `densities.len() + 1` increasing edges.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub densities: Vec<f64>,
    /// Set when all values were identical; the histogram is then one unit-width bin.
    pub degenerate: bool,
}

fn check_values(values: &[f64]) -> Result<()> {
    if values.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: values.len(),
        });
    }
    if let Some(k) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue(k));
    }
    Ok(())
}

impl Histogram {
    /// Bins `values` on `[min, max]`.
    pub fn new(values: &[f64], bins: Bins) -> Result<Self> {
        check_values(values)?;
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if lo == hi {
            return Ok(Histogram {
                edges: vec![lo - 0.5, lo + 0.5],
                counts: vec![values.len() as u64],
                densities: vec![1.0],
                degenerate: true,
            });
        }
        let count = match bins {
            Bins::Count(c) if c >= 1 => c,
            Bins::Width(w) if w > 0.0 && w.is_finite() => ((hi - lo) / w).ceil().max(1.0) as usize,
            other => return Err(Error::InvalidArgument(format!("invalid bin specification {other:?}"))),
        };
        let width = match bins {
            Bins::Width(w) => w,
            Bins::Count(_) => (hi - lo) / count as f64,
        };
        let edges: Vec<f64> = (0..=count)
            .map(|k| if k == count && matches!(bins, Bins::Count(_)) { hi } else { lo + k as f64 * width })
            .collect();
        Self::on_edges(values, edges)
    }

    /// Bins `values` on caller-supplied edges. Values outside the edges are
    /// dropped from the counts but still count towards normalisation, so the
    /// total mass reports coverage.
    pub fn on_edges(values: &[f64], edges: Vec<f64>) -> Result<Self> {
        check_values(values)?;
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("edges must be strictly increasing".into()));
        }
        let nbins = edges.len() - 1;
        let mut counts = vec![0u64; nbins];
        let last = edges[nbins];
        for &v in values {
            if v < edges[0] || v > last {
                continue;
            }
            let k = edges.partition_point(|&e| e <= v).saturating_sub(1).min(nbins - 1);
            counts[k] += 1;
        }
        let total = values.len() as f64;
        let densities = counts
            .iter()
            .zip(edges.windows(2))
            .map(|(&c, w)| c as f64 / (total * (w[1] - w[0])))
            .collect();
        Ok(Histogram {
            edges,
            counts,
            densities,
            degenerate: false,
        })
    }

    pub fn widths(&self) -> impl Iterator<Item = f64> + '_ {
        self.edges.windows(2).map(|w| w[1] - w[0])
    }

    /// `Σ density·width`; 1 when every value fell inside the edges.
    pub fn mass(&self) -> f64 {
        self.densities.iter().zip(self.widths()).map(|(d, w)| d * w).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.densities.iter().zip(self.widths()).map(|(d, w)| d * w).collect()
    }

    /// Centre of the fullest bin.
    pub fn mode(&self) -> f64 {
        let k = (0..self.counts.len())
            .max_by(|&a, &b| self.densities[a].total_cmp(&self.densities[b]).then(b.cmp(&a)))
            .unwrap_or(0);
        0.5 * (self.edges[k] + self.edges[k + 1])
    }

    /// Unimodality up to sampling noise: moving away from the fullest bin,
    /// counts never climb more than `z` Poisson standard deviations above
    /// their running minimum.
    pub fn is_unimodal(&self, z: f64) -> bool {
        let Some(peak) = (0..self.counts.len()).max_by_key(|&k| self.counts[k]) else {
            return true;
        };
        let rises = |range: &mut dyn Iterator<Item = usize>| {
            let mut low = f64::INFINITY;
            for k in range {
                let c = self.counts[k] as f64;
                if c > low && c - low > z * (c + low).sqrt().max(1.0) {
                    return true;
                }
                low = low.min(c);
            }
            false
        };
        !rises(&mut (0..=peak).rev()) && !rises(&mut (peak..self.counts.len()))
    }
}

/// Total-variation distance between two histograms on identical edges.
pub fn total_variation(a: &Histogram, b: &Histogram) -> Result<f64> {
    if a.edges != b.edges {
        return Err(Error::InvalidArgument("histograms must share edges".into()));
    }
    Ok(0.5
        * a.probabilities()
            .iter()
            .zip(b.probabilities())
            .map(|(p, q)| (p - q).abs())
            .sum::<f64>())
}

/// Evenly spaced edges spanning every value of every sample.
pub fn common_edges(samples: &[&[f64]], bins: usize) -> Result<Vec<f64>> {
    let all = samples.iter().flat_map(|s| s.iter().copied());
    let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    if !(lo.is_finite() && hi.is_finite()) || bins == 0 {
        return Err(Error::InvalidArgument("need finite values and at least one bin".into()));
    }
    let (lo, hi) = if lo == hi { (lo - 0.5, hi + 0.5) } else { (lo, hi) };
    let width = (hi - lo) / bins as f64;
    Ok((0..=bins).map(|k| if k == bins { hi } else { lo + k as f64 * width }).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moment {
    pub mean: f64,
    pub std_err: f64,
}

/// Sample mean and its standard error.
pub fn mean_with_error(values: &[f64]) -> Moment {
    let n = values.len() as f64;
    if values.is_empty() {
        return Moment { mean: f64::NAN, std_err: f64::NAN };
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return Moment { mean, std_err: f64::NAN };
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Moment {
        mean,
        std_err: (var / n).sqrt(),
    }
}

/// Empirical `E[N^{np}(t)]` at one sample time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSample {
    pub t: f64,
    pub empirical: f64,
    pub bound: f64,
    /// `empirical / (slack · bound)`; at most 1 when the bound holds.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentBoundReport {
    pub n: u32,
    pub p: f64,
    pub samples: Vec<MomentSample>,
    pub max_ratio: f64,
}

impl MomentBoundReport {
    pub fn holds(&self) -> bool {
        self.max_ratio <= 1.0
    }
}

/// `N0^{q}·e^{−(qΓ/2)t} + 2Δ/Γ` with `q = n·p`.
pub fn moment_bound(n0: f64, n: u32, p: f64, delta: f64, gamma: f64, t: f64) -> f64 {
    let q = f64::from(n) * p;
    n0.powf(q) * (-0.5 * q * gamma * t).exp() + 2.0 * delta / gamma
}

/// Compares ensemble moments of the total population with the closed-form
/// bound. `totals[j]` holds every path's `N` at `times[j]`.
#[allow(clippy::too_many_arguments)]
pub fn moment_bound_check(
    times: &[f64],
    totals: &[Vec<f64>],
    n0: f64,
    n: u32,
    p: f64,
    delta: f64,
    gamma: f64,
    slack: f64,
) -> Result<MomentBoundReport> {
    if !(gamma > 0.0) {
        return Err(Error::GammaNonPositive { gamma });
    }
    if times.len() != totals.len() {
        return Err(Error::InvalidArgument("one sample vector per time required".into()));
    }
    let q = f64::from(n) * p;
    let samples: Vec<MomentSample> = times
        .iter()
        .zip(totals)
        .map(|(&t, values)| {
            let empirical = values.iter().map(|v| v.powf(q)).sum::<f64>() / values.len() as f64;
            let bound = moment_bound(n0, n, p, delta, gamma, t);
            MomentSample {
                t,
                empirical,
                bound,
                ratio: empirical / (slack * bound),
            }
        })
        .collect();
    let max_ratio = samples.iter().map(|s| s.ratio).fold(f64::NEG_INFINITY, f64::max);
    Ok(MomentBoundReport { n, p, samples, max_ratio })
}
