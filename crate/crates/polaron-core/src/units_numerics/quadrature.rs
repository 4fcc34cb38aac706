use crate::error::{PolaronError, Result};
use num_complex::Complex64;
use std::collections::BinaryHeap;

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const MAX_SEGMENTS: usize = 20_000;

/// Longest kernel support accepted by [`phonon_kernel_integral`].
pub const KERNEL_CUTOFF_LIMIT_PS: f64 = 100.0;

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    let kronrod = kronrod * half;
    let gauss = gauss * half;
    (kronrod, (kronrod - gauss).norm())
}

struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss-Kronrod quadrature of a complex integrand on
/// [a, b], starting from `initial_panels` equal panels.
pub fn integrate_adaptive<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    initial_panels: usize,
    rtol: f64,
    atol: f64,
) -> Result<Complex64> {
    if b == a {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let panels = initial_panels.max(1);
    let width = (b - a) / panels as f64;
    let mut heap = BinaryHeap::with_capacity(panels * 2);
    let mut total = Complex64::new(0.0, 0.0);
    let mut total_err = 0.0;
    for k in 0..panels {
        let lo = a + width * k as f64;
        let hi = if k + 1 == panels { b } else { lo + width };
        let (value, error) = gk15(&f, lo, hi);
        total += value;
        total_err += error;
        heap.push(Segment {
            a: lo,
            b: hi,
            value,
            error,
        });
    }
    while total_err > atol.max(rtol * total.norm()) {
        if heap.len() >= MAX_SEGMENTS {
            return Err(PolaronError::QuadratureFailure { error: total_err });
        }
        let worst = heap.pop().expect("heap never empties");
        let mid = 0.5 * (worst.a + worst.b);
        let (lv, le) = gk15(&f, worst.a, mid);
        let (rv, re) = gk15(&f, mid, worst.b);
        total += lv + rv - worst.value;
        total_err += le + re - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: lv,
            error: le,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: rv,
            error: re,
        });
        if !total.re.is_finite() || !total.im.is_finite() {
            return Err(PolaronError::QuadratureFailure {
                error: f64::INFINITY,
            });
        }
    }
    // Re-sum to shed the rounding drift of the incremental updates.
    Ok(heap.iter().map(|s| s.value).sum())
}

/// ∫₀^∞ kernel(τ) e^{-iδτ} dτ for kernels that decay on the ps scale.
///
/// The upper limit is the point beyond which |kernel| stays below 1e-10 of
/// its peak for at least 10 ps.
pub fn phonon_kernel_integral<K: Fn(f64) -> Complex64>(kernel: K, delta: f64) -> Result<Complex64> {
    const SCAN_STEP: f64 = 0.02;
    const QUIET_SPAN: f64 = 10.0;
    let mut peak: f64 = 0.0;
    let mut last_loud = 0.0;
    let mut tau = 0.0;
    loop {
        let m = kernel(tau).norm();
        if m > peak {
            peak = m;
        }
        if m >= 1e-10 * peak && m > 0.0 {
            last_loud = tau;
        }
        if tau - last_loud >= QUIET_SPAN {
            break;
        }
        if last_loud > KERNEL_CUTOFF_LIMIT_PS {
            return Err(PolaronError::SlowDecay {
                limit_ps: KERNEL_CUTOFF_LIMIT_PS,
            });
        }
        tau += SCAN_STEP;
    }
    if peak == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let cutoff = last_loud + SCAN_STEP;
    // Panels no wider than a quarter period of the carrier or 0.5 ps.
    let mut width: f64 = 0.5;
    if delta != 0.0 {
        width = width.min(0.5 * std::f64::consts::PI / delta.abs());
    }
    let panels = (cutoff / width).ceil() as usize;
    integrate_adaptive(
        |t| kernel(t) * Complex64::from_polar(1.0, -delta * t),
        0.0,
        cutoff,
        panels,
        1e-8,
        1e-14 * peak,
    )
}
