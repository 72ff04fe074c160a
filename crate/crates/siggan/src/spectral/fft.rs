//! Radix-2 FFT plus the O(N^2) reference transform it is checked against.
//!
//! Convention: forward kernel `e^{-2*pi*i*k*n/N}` without normalization,
//! inverse kernel `e^{+2*pi*i*k*n/N}` scaled by `1/N`, so
//! `ifft(fft(x)) == x` and Parseval reads `sum |x|^2 = (1/N) sum |X|^2`.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

fn check_pair(re: &[f64], im: &[f64]) -> Result<usize> {
    let n = re.len();
    if n != im.len() {
        return Err(Error::Invalid(format!(
            "fft needs matching re/im lengths, got {} and {}",
            n,
            im.len()
        )));
    }
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::Invalid(format!(
            "fft length must be a nonzero power of two, got {n}"
        )));
    }
    Ok(n)
}

fn fft_in_place(re: &mut [f64], im: &mut [f64], inverse: bool) -> Result<()> {
    let n = check_pair(re, im)?;
    // bit-reversal permutation
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            re.swap(i, j);
            im.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                // direct twiddle evaluation keeps error flat across stages
                let ang = sign * TAU * (k as f64) / (len as f64);
                let (wi, wr) = ang.sin_cos();
                let a = start + k;
                let b = a + half;
                let tr = re[b] * wr - im[b] * wi;
                let ti = re[b] * wi + im[b] * wr;
                re[b] = re[a] - tr;
                im[b] = im[a] - ti;
                re[a] += tr;
                im[a] += ti;
            }
        }
        len <<= 1;
    }
    if inverse {
        let scale = 1.0 / n as f64;
        for v in re.iter_mut() {
            *v *= scale;
        }
        for v in im.iter_mut() {
            *v *= scale;
        }
    }
    Ok(())
}

/// In-place forward transform.
pub fn fft(re: &mut [f64], im: &mut [f64]) -> Result<()> {
    fft_in_place(re, im, false)
}

/// In-place inverse transform (includes the `1/N` factor).
pub fn ifft(re: &mut [f64], im: &mut [f64]) -> Result<()> {
    fft_in_place(re, im, true)
}

/// Forward transform of a real signal; returns `(re, im)` of the full spectrum.
pub fn fft_real(x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut re = x.to_vec();
    let mut im = vec![0.0; x.len()];
    fft(&mut re, &mut im)?;
    Ok((re, im))
}

/// Quadratic-time reference transform, any length >= 1. Reduces the phase
/// argument modulo N before evaluating so large products stay accurate.
pub fn dft_naive(re: &[f64], im: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = re.len();
    if n != im.len() || n == 0 {
        return Err(Error::Invalid("dft needs equal nonzero lengths".into()));
    }
    let mut out_re = vec![0.0; n];
    let mut out_im = vec![0.0; n];
    for f in 0..n {
        let mut sr = 0.0;
        let mut si = 0.0;
        for t in 0..n {
            let ang = -TAU * ((f * t) % n) as f64 / n as f64;
            let (s, c) = ang.sin_cos();
            sr += re[t] * c - im[t] * s;
            si += re[t] * s + im[t] * c;
        }
        out_re[f] = sr;
        out_im[f] = si;
    }
    Ok((out_re, out_im))
}

/// Smallest power of two >= `n`.
pub fn next_pow2(n: usize) -> usize {
    n.next_power_of_two()
}
