use super::{CorrelationTrace, FrequencyGrid, Spectrum};
use crate::error::{PolaronError, Result};
use num_complex::Complex64;
use rayon::prelude::*;

/// Default ratio |g(τ_end)| / max|g| above which a trace counts as truncated.
pub const DEFAULT_DECAY_FLOOR: f64 = 1e-3;

const WINDOW_FRACTION: f64 = 0.05;

/// Raised-cosine taper that is one everywhere except the final 5% of the
/// trace, where it falls smoothly to zero.
fn endpoint_window(n: usize) -> Vec<f64> {
    let taper = ((n as f64) * WINDOW_FRACTION).ceil() as usize;
    let start = n.saturating_sub(taper);
    (0..n)
        .map(|i| {
            if i < start || taper == 0 {
                1.0
            } else {
                let x = (i - start + 1) as f64 / taper as f64;
                0.5 * (1.0 + (std::f64::consts::PI * x).cos())
            }
        })
        .collect()
}

/// Re ∫₀^∞ g(τ) e^{iδτ} dτ on every grid detuning δ.
pub fn half_fourier(trace: &CorrelationTrace, grid: &FrequencyGrid) -> Result<Spectrum> {
    half_fourier_with_floor(trace, grid, DEFAULT_DECAY_FLOOR)
}

pub fn half_fourier_with_floor(
    trace: &CorrelationTrace,
    grid: &FrequencyGrid,
    floor: f64,
) -> Result<Spectrum> {
    let values = complex_half_fourier_with_floor(trace, grid, floor)?
        .into_iter()
        .map(|v| v.re)
        .collect();
    Ok(Spectrum::new(grid.points(), values))
}

/// ∫₀^∞ g(τ) e^{iδτ} dτ with both quadratures kept.
pub fn complex_half_fourier(
    trace: &CorrelationTrace,
    grid: &FrequencyGrid,
) -> Result<Vec<Complex64>> {
    complex_half_fourier_with_floor(trace, grid, DEFAULT_DECAY_FLOOR)
}

fn complex_half_fourier_with_floor(
    trace: &CorrelationTrace,
    grid: &FrequencyGrid,
    floor: f64,
) -> Result<Vec<Complex64>> {
    if grid.is_empty() || trace.values.is_empty() {
        return Err(PolaronError::EmptyGrid);
    }
    let peak = trace.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let tail = trace.values.last().map(|v| v.norm()).unwrap_or(0.0);
    if peak > 0.0 && tail > floor * peak {
        return Err(PolaronError::NonDecayingTrace { ratio: tail / peak });
    }
    let n = trace.values.len();
    let window = endpoint_window(n);
    let weighted: Vec<Complex64> = trace
        .values
        .iter()
        .zip(&window)
        .enumerate()
        .map(|(i, (v, w))| {
            let trap = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            v * (w * trap * trace.dt)
        })
        .collect();
    Ok(grid
        .points()
        .par_iter()
        .map(|&delta| transform_at(&weighted, trace.dt, delta))
        .collect())
}

/// S(δ) = Re ∫₀^∞ g(τ) e^{−iδτ} dτ, the emission-side transform of a
/// correlation g(τ) = ⟨O†(t+τ)O(t)⟩ against the detuning δ = ω − ω_x′.
pub fn emission_transform(trace: &CorrelationTrace, grid: &FrequencyGrid) -> Result<Spectrum> {
    let conj = CorrelationTrace {
        dt: trace.dt,
        values: trace.values.iter().map(|v| v.conj()).collect(),
    };
    half_fourier(&conj, grid)
}

fn transform_at(weighted: &[Complex64], dt: f64, delta: f64) -> Complex64 {
    const REANCHOR: usize = 512;
    let step = Complex64::from_polar(1.0, delta * dt);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut phase = Complex64::new(1.0, 0.0);
    for (i, v) in weighted.iter().enumerate() {
        if i % REANCHOR == 0 {
            phase = Complex64::from_polar(1.0, delta * dt * i as f64);
        }
        sum += v * phase;
        phase *= step;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn decay_trace(gamma: f64, t_end: f64, dt: f64) -> CorrelationTrace {
        CorrelationTrace::from_fn(dt, t_end, |t| Complex64::new((-0.5 * gamma * t).exp(), 0.0))
            .unwrap()
    }

    #[test]
    fn exponential_decay_gives_lorentzian_peak() {
        let trace = decay_trace(0.1, 400.0, 0.01);
        let grid = FrequencyGrid::new(0.0, 0.0, 1).unwrap();
        let s = half_fourier(&trace, &grid).unwrap();
        assert!((s.values[0] - 20.0).abs() < 0.02);
    }

    #[test]
    fn constant_trace_is_rejected() {
        let trace = CorrelationTrace::from_fn(0.1, 50.0, |_| Complex64::new(1.0, 0.0)).unwrap();
        let grid = FrequencyGrid::new(-1.0, 1.0, 11).unwrap();
        assert!(matches!(
            half_fourier(&trace, &grid),
            Err(PolaronError::NonDecayingTrace { .. })
        ));
    }

    #[test]
    fn empty_grid_is_rejected() {
        let trace = decay_trace(1.0, 10.0, 0.1);
        let grid = FrequencyGrid {
            start: 0.0,
            end: 0.0,
            len: 0,
        };
        assert_eq!(half_fourier(&trace, &grid), Err(PolaronError::EmptyGrid));
    }

    #[test]
    fn positive_carrier_lands_at_negative_detuning() {
        // g = e^{-iω₀τ} e^{-τ/2} peaks where δ = ω₀.
        let trace = CorrelationTrace::from_fn(0.01, 60.0, |t| {
            Complex64::from_polar((-0.5 * t).exp(), -2.0 * t)
        })
        .unwrap();
        let grid = FrequencyGrid::new(-4.0, 4.0, 81).unwrap();
        let s = half_fourier(&trace, &grid).unwrap();
        let imax = s
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!((s.omega[imax] - 2.0).abs() < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn matches_analytic_lorentzian(log_gamma in -3.0f64..0.0) {
            let gamma = 10f64.powf(log_gamma);
            let t_end = 20.0 / gamma;
            let dt = (0.05 / gamma).min(0.05);
            let trace = decay_trace(gamma, t_end, dt);
            let grid = FrequencyGrid::new(-5.0 * gamma, 5.0 * gamma, 41).unwrap();
            let s = half_fourier(&trace, &grid).unwrap();
            let peak = 2.0 / gamma;
            for (w, v) in s.omega.iter().zip(&s.values) {
                let exact = 0.5 * gamma / (w * w + 0.25 * gamma * gamma);
                prop_assert!((v - exact).abs() < 5e-3 * peak);
            }
        }
    }
}
