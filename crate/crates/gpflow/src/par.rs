//! Deterministic parallel kernels.
//!
//! Reductions split the data into fixed-size chunks, reduce each chunk
//! sequentially, and combine the partial results in index order. The result
//! is bitwise reproducible regardless of thread count or scheduling.

use num_complex::Complex64;
use rayon::prelude::*;

/// Chunk length for parallel reductions. Fixed so the reduction tree (and
/// therefore the floating-point result) never depends on the thread pool.
const CHUNK: usize = 1 << 14;

/// Below this length the parallel dispatch overhead dominates.
const PAR_MIN: usize = 1 << 15;

fn seq_dot(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter()
        .zip(v)
        .fold(Complex64::ZERO, |acc, (a, b)| acc + a.conj() * b)
}

/// Unweighted sesquilinear dot product, conjugate-linear in `u`.
pub fn dot(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    debug_assert_eq!(u.len(), v.len());
    if u.len() < PAR_MIN {
        return seq_dot(u, v);
    }
    u.par_chunks(CHUNK)
        .zip(v.par_chunks(CHUNK))
        .map(|(a, b)| seq_dot(a, b))
        .collect::<Vec<_>>()
        .into_iter()
        .sum()
}

/// Real chunked sum of `f(k)` over `0..n`.
pub fn sum_f64<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    if n < PAR_MIN {
        return (0..n).map(&f).sum();
    }
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n);
            (lo..hi).map(&f).sum::<f64>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum()
}

/// Fill `out[k] = f(k)` in parallel; purely elementwise, so deterministic.
pub fn fill_with<F>(out: &mut [Complex64], f: F)
where
    F: Fn(usize) -> Complex64 + Sync,
{
    if out.len() < PAR_MIN {
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = f(k);
        }
        return;
    }
    out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
        let base = c * CHUNK;
        for (off, slot) in chunk.iter_mut().enumerate() {
            *slot = f(base + off);
        }
    });
}

/// `y[k] += a * x[k]`.
pub fn axpy(a: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    debug_assert_eq!(x.len(), y.len());
    if y.len() < PAR_MIN {
        for (yk, xk) in y.iter_mut().zip(x) {
            *yk += a * xk;
        }
        return;
    }
    y.par_chunks_mut(CHUNK)
        .zip(x.par_chunks(CHUNK))
        .for_each(|(yc, xc)| {
            for (yk, xk) in yc.iter_mut().zip(xc) {
                *yk += a * xk;
            }
        });
}

/// `p[k] = r[k] + b * p[k]` (CG direction update).
pub fn xpby(r: &[Complex64], b: Complex64, p: &mut [Complex64]) {
    debug_assert_eq!(r.len(), p.len());
    if p.len() < PAR_MIN {
        for (pk, rk) in p.iter_mut().zip(r) {
            *pk = rk + b * *pk;
        }
        return;
    }
    p.par_chunks_mut(CHUNK)
        .zip(r.par_chunks(CHUNK))
        .for_each(|(pc, rc)| {
            for (pk, rk) in pc.iter_mut().zip(rc) {
                *pk = rk + b * *pk;
            }
        });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunked_dot_matches_sequential() {
        let n = (PAR_MIN + 123).max(3 * CHUNK + 7);
        let u: Vec<Complex64> = (0..n)
            .map(|k| Complex64::new((k as f64).sin(), (k as f64 * 0.7).cos()))
            .collect();
        let v: Vec<Complex64> = (0..n)
            .map(|k| Complex64::new((k as f64 * 1.3).cos(), (k as f64).sqrt()))
            .collect();
        let par = dot(&u, &v);
        // Same chunking applied sequentially gives the identical result.
        let mut expect = Complex64::ZERO;
        for c in 0..n.div_ceil(CHUNK) {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n);
            expect += seq_dot(&u[lo..hi], &v[lo..hi]);
        }
        assert_eq!(par, expect);
    }

    #[test]
    fn chunked_sum_is_reproducible() {
        let n = PAR_MIN + 999;
        let a = sum_f64(n, |k| 1.0 / (1.0 + k as f64));
        let b = sum_f64(n, |k| 1.0 / (1.0 + k as f64));
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
