use nalgebra::linalg::Hessenberg;
use num_complex::Complex64;

use super::DenseMatrix;
use crate::error::{Error, Result};

/// Sweeps allowed per eigenvalue is this times `max(10, n)`.
const SWEEPS_PER_ROW: usize = 30;

/// Eigenvalues of a general square matrix.
///
/// The matrix is balanced, reduced to Hessenberg form, and then deflated
/// with Francis double-shift QR sweeps, using an exceptional shift after
/// every 10 stalled sweeps. Returned in no particular order. Fails with
/// [`Error::NoConvergence`] if one eigenvalue needs more than
/// `30 · max(10, n)` sweeps.
pub fn eig_general(m: &DenseMatrix) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    super::ensure_finite(m)?;
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let mut a = m.clone();
    balance(&mut a);
    let mut h = Hessenberg::new(a).h();
    hessenberg_qr(&mut h)
}

/// Diagonal similarity by powers of two that evens out row and column norms.
fn balance(a: &mut DenseMatrix) {
    const RADIX: f64 = 2.0;
    let n = a.nrows();
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                a.row_mut(i).scale_mut(1.0 / f);
                a.column_mut(i).scale_mut(f);
            }
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix; `h` is overwritten.
fn hessenberg_qr(h: &mut DenseMatrix) -> Result<Vec<Complex64>> {
    let n = h.nrows() as isize;
    let mut out = vec![Complex64::new(0.0, 0.0); n as usize];
    let mut anorm = 0.0;
    for i in 0..n {
        for j in (i - 1).max(0)..n {
            anorm += h[(i as usize, j as usize)].abs();
        }
    }
    let eps = f64::EPSILON;
    let max_sweeps = SWEEPS_PER_ROW * (n as usize).max(10);
    macro_rules! at {
        ($i:expr, $j:expr) => {
            h[(($i) as usize, ($j) as usize)]
        };
    }

    let mut nn = n - 1;
    // accumulated exceptional shift
    let mut t = 0.0;
    while nn >= 0 {
        let mut its = 0;
        loop {
            // look for a negligible subdiagonal element
            let mut l = nn;
            while l > 0 {
                let mut s = at!(l - 1, l - 1).abs() + at!(l, l).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if at!(l, l - 1).abs() <= eps * s {
                    at!(l, l - 1) = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = at!(nn, nn);
            if l == nn {
                out[nn as usize] = Complex64::new(x + t, 0.0);
                nn -= 1;
                break;
            }
            let mut y = at!(nn - 1, nn - 1);
            let mut w = at!(nn, nn - 1) * at!(nn - 1, nn);
            if l == nn - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + z.copysign(p);
                    let hi = x + z;
                    out[(nn - 1) as usize] = Complex64::new(hi, 0.0);
                    out[nn as usize] = Complex64::new(if z != 0.0 { x - w / z } else { hi }, 0.0);
                } else {
                    out[nn as usize] = Complex64::new(x + p, -z);
                    out[(nn - 1) as usize] = Complex64::new(x + p, z);
                }
                nn -= 2;
                break;
            }
            if its == max_sweeps {
                return Err(Error::NoConvergence { iterations: its });
            }
            if its > 0 && its % 10 == 0 {
                t += x;
                for i in 0..=nn {
                    at!(i, i) -= x;
                }
                let s = at!(nn, nn - 1).abs() + at!(nn - 1, nn - 2).abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;

            // two consecutive small subdiagonal elements
            let (mut p, mut q, mut r);
            let mut m = nn - 2;
            loop {
                let z = at!(m, m);
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / at!(m + 1, m) + at!(m, m + 1);
                q = at!(m + 1, m + 1) - z - rr - ss;
                r = at!(m + 2, m + 1);
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = at!(m, m - 1).abs() * (q.abs() + r.abs());
                let v = p.abs() * (at!(m - 1, m - 1).abs() + z.abs() + at!(m + 1, m + 1).abs());
                if u <= eps * v {
                    break;
                }
                m -= 1;
            }
            for i in m..nn - 1 {
                at!(i + 2, i) = 0.0;
                if i != m {
                    at!(i + 2, i - 1) = 0.0;
                }
            }

            // double-shift QR sweep on rows l..=nn, columns m..=nn
            for k in m..nn {
                if k != m {
                    p = at!(k, k - 1);
                    q = at!(k + 1, k - 1);
                    r = if k + 1 != nn { at!(k + 2, k - 1) } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s == 0.0 {
                    continue;
                }
                if k == m {
                    if l != m {
                        at!(k, k - 1) = -at!(k, k - 1);
                    }
                } else {
                    at!(k, k - 1) = -s * x;
                }
                p += s;
                x = p / s;
                y = q / s;
                let z = r / s;
                q /= p;
                r /= p;
                for j in k..=nn {
                    let mut pp = at!(k, j) + q * at!(k + 1, j);
                    if k + 1 != nn {
                        pp += r * at!(k + 2, j);
                        at!(k + 2, j) -= pp * z;
                    }
                    at!(k + 1, j) -= pp * y;
                    at!(k, j) -= pp * x;
                }
                let mmin = if nn < k + 3 { nn } else { k + 3 };
                for i in l..=mmin {
                    let mut pp = x * at!(i, k) + y * at!(i, k + 1);
                    if k + 1 != nn {
                        pp += z * at!(i, k + 2);
                        at!(i, k + 2) -= pp * r;
                    }
                    at!(i, k + 1) -= pp * q;
                    at!(i, k) -= pp;
                }
            }
        }
    }
    Ok(out)
}
