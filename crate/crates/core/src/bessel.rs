//! Integer-order Bessel functions J_n(x).
//!
//! Small arguments (x² ≤ n + 1) use the power series, whose terms then shrink
//! by at least a factor four. Everything else runs Miller's backward
//! recurrence from well above max(n, |x|), normalized by the identity
//! J₀ + 2 Σ_{k≥1} J_{2k} = 1.

const RESCALE_ABOVE: f64 = 1e250;
const RESCALE_BY: f64 = 1e-250;

/// J_order(x) for finite x.
pub fn bessel_j(order: u32, x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    let sign = if x < 0.0 && order % 2 == 1 { -1.0 } else { 1.0 };
    let ax = x.abs();
    if ax == 0.0 {
        return if order == 0 { 1.0 } else { 0.0 };
    }
    let n = order as usize;
    if ax * ax <= (n + 1) as f64 {
        return sign * series(n, ax);
    }
    sign * miller(n, ax, Some(n))[0]
}

/// J_0(x), …, J_nmax(x) in one backward sweep.
pub fn bessel_j_all(nmax: usize, x: f64) -> Vec<f64> {
    if !x.is_finite() {
        return vec![f64::NAN; nmax + 1];
    }
    let ax = x.abs();
    let mut out = if ax == 0.0 {
        let mut v = vec![0.0; nmax + 1];
        v[0] = 1.0;
        v
    } else if ax * ax <= 1.0 {
        (0..=nmax).map(|n| series(n, ax)).collect()
    } else {
        miller(nmax, ax, None)
    };
    if x < 0.0 {
        for (n, v) in out.iter_mut().enumerate() {
            if n % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

fn series(n: usize, x: f64) -> f64 {
    let h = x / 2.0;
    let mut lead = 1.0;
    for j in 1..=n {
        lead *= h / j as f64;
        if lead == 0.0 {
            return 0.0;
        }
    }
    let q = -h * h;
    let mut term = lead;
    let mut sum = lead;
    for k in 1..200 {
        term *= q / (k as f64 * (n + k) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn start_order(nmax: usize, x: f64) -> usize {
    let top = (nmax as f64).max(x);
    let m = top + 30.0 + 15.0 * x.cbrt() + (60.0 * top).sqrt();
    let m = m.ceil() as usize;
    m + (m % 2)
}

/// Backward recurrence for x > 0. Returns all orders 0..=nmax, or only the
/// single order `only` when requested.
fn miller(nmax: usize, x: f64, only: Option<usize>) -> Vec<f64> {
    let m = start_order(nmax, x);
    let keep_all = only.is_none();
    let mut out = if keep_all {
        vec![0.0; nmax + 1]
    } else {
        vec![0.0]
    };
    let mut jp = 0.0f64;
    let mut j = 1e-280f64;
    let mut sum = 0.0f64;
    let two_over_x = 2.0 / x;
    let mut k = m;
    loop {
        // j holds J_k (unnormalized), jp holds J_{k+1}.
        if k % 2 == 0 {
            sum += if k == 0 { j } else { 2.0 * j };
        }
        if keep_all {
            if k <= nmax {
                out[k] = j;
            }
        } else if Some(k) == only {
            out[0] = j;
        }
        if k == 0 {
            break;
        }
        let jm = k as f64 * two_over_x * j - jp;
        jp = j;
        j = jm;
        k -= 1;
        if j.abs() > RESCALE_ABOVE {
            j *= RESCALE_BY;
            jp *= RESCALE_BY;
            sum *= RESCALE_BY;
            if keep_all {
                for v in out.iter_mut().skip(k + 1) {
                    *v *= RESCALE_BY;
                }
            } else {
                out[0] *= RESCALE_BY;
            }
        }
    }
    for v in out.iter_mut() {
        *v /= sum;
    }
    out
}
