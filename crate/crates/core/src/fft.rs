//! Complex FFT for arbitrary lengths.
//!
//! Lengths whose prime factors are all small use a mixed-radix decimation in
//! time; anything with a large prime factor goes through Bluestein's chirp-z
//! transform on a power-of-two grid. Forward transforms use `exp(-2πi nk/N)`.
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Mul, Sub};

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    #[inline]
    pub const fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    #[inline]
    pub fn expi(theta: f64) -> Self {
        Self { re: theta.cos(), im: theta.sin() }
    }

    #[inline]
    pub fn conj(self) -> Self {
        Self { re: self.re, im: -self.im }
    }

    #[inline]
    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    #[inline]
    pub fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }

    #[inline]
    pub fn scale(self, s: f64) -> Self {
        Self { re: self.re * s, im: self.im * s }
    }
}

impl Add for Complex {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self { re: self.re + o.re, im: self.im + o.im }
    }
}

impl Sub for Complex {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Mul for Complex {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Self { re: self.re * o.re - self.im * o.im, im: self.re * o.im + self.im * o.re }
    }
}

const MAX_DIRECT_RADIX: usize = 31;

#[derive(Debug, Clone)]
enum Algorithm {
    MixedRadix { factors: Vec<(usize, usize)>, twiddles: Vec<Complex> },
    Bluestein { chirp: Vec<Complex>, kernel_fft: Vec<Complex>, inner: alloc::boxed::Box<FftPlan> },
}

/// A precomputed forward transform of fixed length.
#[derive(Debug, Clone)]
pub struct FftPlan {
    len: usize,
    algorithm: Algorithm,
}

fn factorize(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    while n % 4 == 0 {
        out.push(4);
        n /= 4;
    }
    let mut p = 2;
    while n > 1 {
        while n % p == 0 {
            out.push(p);
            n /= p;
        }
        p += if p == 2 { 1 } else { 2 };
        if p * p > n && n > 1 {
            out.push(n);
            break;
        }
    }
    out
}

impl FftPlan {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "FFT length must be positive");
        let primes = factorize(len);
        if primes.iter().all(|&p| p <= MAX_DIRECT_RADIX) {
            let mut factors = Vec::with_capacity(primes.len());
            let mut rest = len;
            for p in primes {
                rest /= p;
                factors.push((p, rest));
            }
            let twiddles = (0..len).map(|i| Complex::expi(-2.0 * PI * i as f64 / len as f64)).collect();
            return Self { len, algorithm: Algorithm::MixedRadix { factors, twiddles } };
        }
        let m = (2 * len - 1).next_power_of_two();
        let chirp: Vec<Complex> = (0..len)
            .map(|k| {
                // k^2 mod 2n keeps the angle small
                let k2 = (k as u128 * k as u128 % (2 * len as u128)) as f64;
                Complex::expi(-PI * k2 / len as f64)
            })
            .collect();
        let inner = FftPlan::new(m);
        let mut kernel = vec![Complex::default(); m];
        kernel[0] = chirp[0].conj();
        for k in 1..len {
            kernel[k] = chirp[k].conj();
            kernel[m - k] = chirp[k].conj();
        }
        let kernel_fft = inner.forward(&kernel);
        Self { len, algorithm: Algorithm::Bluestein { chirp, kernel_fft, inner: alloc::boxed::Box::new(inner) } }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Forward DFT of `input` (length must equal the plan length).
    pub fn forward(&self, input: &[Complex]) -> Vec<Complex> {
        assert_eq!(input.len(), self.len);
        match &self.algorithm {
            Algorithm::MixedRadix { factors, .. } if factors.is_empty() => input.to_vec(),
            Algorithm::MixedRadix { factors, twiddles } => {
                let mut out = vec![Complex::default(); self.len];
                let mut scratch = vec![Complex::default(); MAX_DIRECT_RADIX.max(4)];
                work(&mut out, input, 0, 1, factors, twiddles, &mut scratch);
                out
            }
            Algorithm::Bluestein { chirp, kernel_fft, inner } => {
                let m = inner.len();
                let mut a = vec![Complex::default(); m];
                for k in 0..self.len {
                    a[k] = input[k] * chirp[k];
                }
                let fa = inner.forward(&a);
                let prod: Vec<Complex> = fa.iter().zip(kernel_fft).map(|(x, y)| *x * *y).collect();
                let conv = inner.inverse_unscaled(&prod);
                let s = 1.0 / m as f64;
                (0..self.len).map(|k| (conv[k] * chirp[k]).scale(s)).collect()
            }
        }
    }

    /// Inverse DFT without the 1/N factor.
    pub fn inverse_unscaled(&self, input: &[Complex]) -> Vec<Complex> {
        let conj: Vec<Complex> = input.iter().map(|c| c.conj()).collect();
        self.forward(&conj).into_iter().map(Complex::conj).collect()
    }

    /// Inverse DFT including the 1/N factor.
    pub fn inverse(&self, input: &[Complex]) -> Vec<Complex> {
        let s = 1.0 / self.len as f64;
        self.inverse_unscaled(input).into_iter().map(|c| c.scale(s)).collect()
    }
}

fn work(
    out: &mut [Complex],
    input: &[Complex],
    offset: usize,
    stride: usize,
    factors: &[(usize, usize)],
    twiddles: &[Complex],
    scratch: &mut [Complex],
) {
    let (p, m) = factors[0];
    if m == 1 {
        for (q, o) in out.iter_mut().enumerate().take(p) {
            *o = input[offset + q * stride];
        }
    } else {
        for q in 0..p {
            work(&mut out[q * m..(q + 1) * m], input, offset + q * stride, stride * p, &factors[1..], twiddles, scratch);
        }
    }
    match p {
        2 => butterfly2(out, stride, twiddles, m),
        4 => butterfly4(out, stride, twiddles, m),
        _ => butterfly_generic(out, stride, twiddles, m, p, scratch),
    }
}

fn butterfly2(out: &mut [Complex], stride: usize, tw: &[Complex], m: usize) {
    for u in 0..m {
        let t = out[u + m] * tw[u * stride];
        let a = out[u];
        out[u] = a + t;
        out[u + m] = a - t;
    }
}

fn butterfly4(out: &mut [Complex], stride: usize, tw: &[Complex], m: usize) {
    for u in 0..m {
        let a0 = out[u];
        let a1 = out[u + m] * tw[u * stride];
        let a2 = out[u + 2 * m] * tw[2 * u * stride];
        let a3 = out[u + 3 * m] * tw[3 * u * stride];
        let s02 = a0 + a2;
        let d02 = a0 - a2;
        let s13 = a1 + a3;
        let d13 = a1 - a3;
        // -i * d13
        let rot = Complex::new(d13.im, -d13.re);
        out[u] = s02 + s13;
        out[u + m] = d02 + rot;
        out[u + 2 * m] = s02 - s13;
        out[u + 3 * m] = d02 - rot;
    }
}

fn butterfly_generic(out: &mut [Complex], stride: usize, tw: &[Complex], m: usize, p: usize, scratch: &mut [Complex]) {
    let n = tw.len();
    for u in 0..m {
        for q in 0..p {
            scratch[q] = out[u + q * m];
        }
        for q1 in 0..p {
            let k = u + q1 * m;
            let mut acc = scratch[0];
            let step = (stride * k) % n;
            let mut idx = 0usize;
            for s in scratch.iter().take(p).skip(1) {
                idx += step;
                if idx >= n {
                    idx -= n;
                }
                acc = acc + *s * tw[idx];
            }
            out[k] = acc;
        }
    }
}

/// Forward DFT of two real sequences with one complex transform.
/// Returns the full spectra of `a` and `b`.
pub fn forward_real_pair(plan: &FftPlan, a: &[f64], b: &[f64]) -> (Vec<Complex>, Vec<Complex>) {
    let n = plan.len();
    let z: Vec<Complex> = a.iter().zip(b).map(|(&x, &y)| Complex::new(x, y)).collect();
    let zf = plan.forward(&z);
    let mut fa = Vec::with_capacity(n);
    let mut fb = Vec::with_capacity(n);
    for k in 0..n {
        let zk = zf[k];
        let zc = zf[(n - k) % n].conj();
        fa.push((zk + zc).scale(0.5));
        let d = zk - zc;
        // (zk - conj(z_{n-k})) / 2i
        fb.push(Complex::new(d.im * 0.5, -d.re * 0.5));
    }
    (fa, fb)
}
