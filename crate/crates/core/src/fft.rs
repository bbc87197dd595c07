//! Discrete Fourier transforms of arbitrary length.
//!
//! Power-of-two lengths use an iterative radix-2 Cooley-Tukey transform.
//! Short lengths of other sizes use the direct O(n^2) sum. Lengths `m * 2^a`
//! with a small odd `m` (384 = 3 * 128) split into `m` radix-2 transforms;
//! anything else goes through Bluestein's chirp-z reformulation.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, AddAssign, Mul, Sub};

use crate::math;

/// Largest non-power-of-two length handled by the direct sum.
pub const DIRECT_MAX_LEN: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const ZERO: Complex = Complex { re: 0.0, im: 0.0 };

    #[inline]
    pub const fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    /// `exp(i * phase)`
    #[inline]
    pub fn cis(phase: f64) -> Self {
        Self::new(math::cos(phase), math::sin(phase))
    }

    #[inline]
    pub fn conj(self) -> Self {
        Self::new(self.re, -self.im)
    }

    #[inline]
    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    #[inline]
    pub fn abs(self) -> f64 {
        math::hypot(self.re, self.im)
    }

    #[inline]
    pub fn scale(self, s: f64) -> Self {
        Self::new(self.re * s, self.im * s)
    }
}

impl Add for Complex {
    type Output = Complex;
    #[inline]
    fn add(self, o: Complex) -> Complex {
        Complex::new(self.re + o.re, self.im + o.im)
    }
}

impl AddAssign for Complex {
    #[inline]
    fn add_assign(&mut self, o: Complex) {
        self.re += o.re;
        self.im += o.im;
    }
}

impl Sub for Complex {
    type Output = Complex;
    #[inline]
    fn sub(self, o: Complex) -> Complex {
        Complex::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Complex {
    type Output = Complex;
    #[inline]
    fn mul(self, o: Complex) -> Complex {
        Complex::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

/// `exp(-2 pi i k / n)` for `k` in `0..count`.
fn twiddles(n: usize, count: usize) -> Vec<Complex> {
    (0..count).map(|k| Complex::cis(-2.0 * PI * (k as f64) / (n as f64))).collect()
}

#[derive(Debug, Clone)]
struct Radix2 {
    n: usize,
    twiddles: Vec<Complex>,
    bitrev: Vec<u32>,
}

impl Radix2 {
    fn new(n: usize) -> Self {
        debug_assert!(n.is_power_of_two());
        let bits = n.trailing_zeros();
        let bitrev = (0..n as u32).map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (32 - bits) }).collect();
        Self { n, twiddles: twiddles(n, n / 2), bitrev }
    }

    fn forward(&self, buf: &mut [Complex]) {
        let n = self.n;
        for i in 0..n {
            let j = self.bitrev[i] as usize;
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for block in buf.chunks_exact_mut(len) {
                let (lo, hi) = block.split_at_mut(half);
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let a = lo[k];
                    let b = hi[k] * w;
                    lo[k] = a + b;
                    hi[k] = a - b;
                }
            }
            len <<= 1;
        }
    }

    /// Unnormalized inverse.
    fn inverse(&self, buf: &mut [Complex]) {
        for c in buf.iter_mut() {
            *c = c.conj();
        }
        self.forward(buf);
        for c in buf.iter_mut() {
            *c = c.conj();
        }
    }
}

#[derive(Debug, Clone)]
struct Direct {
    n: usize,
    twiddles: Vec<Complex>,
}

impl Direct {
    fn new(n: usize) -> Self {
        Self { n, twiddles: twiddles(n, n) }
    }

    fn forward(&self, buf: &mut [Complex], scratch: &mut Vec<Complex>) {
        let n = self.n;
        scratch.clear();
        scratch.extend_from_slice(&buf[..n]);
        for (k, out) in buf.iter_mut().enumerate().take(n) {
            let mut acc = Complex::ZERO;
            let mut idx = 0usize;
            for x in scratch.iter() {
                acc += *x * self.twiddles[idx];
                idx += k;
                if idx >= n {
                    idx -= n;
                }
            }
            *out = acc;
        }
    }
}

/// Decimation in time by a small odd factor `m`: `X[k] = sum_r W^(rk) Y_r[k mod n2]`
/// where `Y_r` is the radix-2 transform of `x[r], x[r + m], ...`.
#[derive(Debug, Clone)]
struct MixedRadix {
    n: usize,
    m: usize,
    inner: Radix2,
    twiddles: Vec<Complex>,
}

impl MixedRadix {
    fn new(m: usize, n2: usize) -> Self {
        let n = m * n2;
        Self { n, m, inner: Radix2::new(n2), twiddles: twiddles(n, n) }
    }

    fn forward(&self, buf: &mut [Complex], scratch: &mut Vec<Complex>) {
        let (n, m, n2) = (self.n, self.m, self.inner.n);
        scratch.clear();
        scratch.resize(n, Complex::ZERO);
        for (r, sub) in scratch.chunks_exact_mut(n2).enumerate() {
            for (j, v) in sub.iter_mut().enumerate() {
                *v = buf[j * m + r];
            }
            self.inner.forward(sub);
        }
        for (k, out) in buf.iter_mut().enumerate().take(n) {
            let kk = k % n2;
            let mut acc = scratch[kk];
            let mut idx = k;
            for r in 1..m {
                acc += scratch[r * n2 + kk] * self.twiddles[idx];
                idx += k;
                if idx >= n {
                    idx -= n;
                }
            }
            *out = acc;
        }
    }
}

#[derive(Debug, Clone)]
struct Bluestein {
    n: usize,
    inner: Radix2,
    chirp: Vec<Complex>,
    kernel_spectrum: Vec<Complex>,
}

impl Bluestein {
    fn new(n: usize) -> Self {
        let m = (2 * n - 1).next_power_of_two();
        let inner = Radix2::new(m);
        // exp(-i pi k^2 / n), reducing k^2 mod 2n first to keep the phase small
        let two_n = 2 * n as u64;
        let chirp: Vec<Complex> = (0..n as u64)
            .map(|k| {
                let r = (k * k) % two_n;
                Complex::cis(-PI * (r as f64) / (n as f64))
            })
            .collect();
        let mut kernel = vec![Complex::ZERO; m];
        kernel[0] = chirp[0].conj();
        for k in 1..n {
            let c = chirp[k].conj();
            kernel[k] = c;
            kernel[m - k] = c;
        }
        inner.forward(&mut kernel);
        Self { n, inner, chirp, kernel_spectrum: kernel }
    }

    fn forward(&self, buf: &mut [Complex], scratch: &mut Vec<Complex>) {
        let m = self.inner.n;
        scratch.clear();
        scratch.resize(m, Complex::ZERO);
        for k in 0..self.n {
            scratch[k] = buf[k] * self.chirp[k];
        }
        self.inner.forward(scratch);
        for (s, k) in scratch.iter_mut().zip(&self.kernel_spectrum) {
            *s = *s * *k;
        }
        self.inner.inverse(scratch);
        let inv_m = 1.0 / m as f64;
        for k in 0..self.n {
            buf[k] = (scratch[k] * self.chirp[k]).scale(inv_m);
        }
    }
}

#[derive(Debug, Clone)]
enum Kernel {
    Radix2(Radix2),
    Direct(Direct),
    MixedRadix(MixedRadix),
    Bluestein(Bluestein),
}

/// Forward DFT plan for one length: `X_k = sum_j x_j exp(-2 pi i j k / n)`.
#[derive(Debug, Clone)]
pub struct Fft {
    len: usize,
    kernel: Kernel,
}

impl Fft {
    /// Panics if `len == 0`.
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "DFT length must be positive");
        let kernel = if len.is_power_of_two() {
            Kernel::Radix2(Radix2::new(len))
        } else if len <= DIRECT_MAX_LEN {
            Kernel::Direct(Direct::new(len))
        } else if len >> len.trailing_zeros() <= DIRECT_MAX_LEN {
            let m = len >> len.trailing_zeros();
            Kernel::MixedRadix(MixedRadix::new(m, len / m))
        } else {
            Kernel::Bluestein(Bluestein::new(len))
        };
        Self { len, kernel }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// In-place forward transform of `buf[..len]`.
    pub fn forward(&self, buf: &mut [Complex]) {
        let mut scratch = Vec::new();
        self.forward_with_scratch(buf, &mut scratch);
    }

    pub fn forward_with_scratch(&self, buf: &mut [Complex], scratch: &mut Vec<Complex>) {
        assert!(buf.len() >= self.len);
        match &self.kernel {
            Kernel::Radix2(k) => k.forward(&mut buf[..self.len]),
            Kernel::Direct(k) => k.forward(buf, scratch),
            Kernel::MixedRadix(k) => k.forward(buf, scratch),
            Kernel::Bluestein(k) => k.forward(buf, scratch),
        }
    }
}

/// 2D DFT of a real row-major `height x width` raster; output row-major with
/// the same layout and no frequency shift.
pub fn dft2_real(data: &[f64], width: usize, height: usize) -> Vec<Complex> {
    assert_eq!(data.len(), width * height);
    assert!(width > 0 && height > 0);
    let row_fft = Fft::new(width);
    let mut out = vec![Complex::ZERO; width * height];
    let mut scratch = Vec::new();

    // Rows, two at a time: z = a + i b, then split with conjugate symmetry.
    let mut packed = vec![Complex::ZERO; width];
    let mut y = 0;
    while y + 1 < height {
        let (ra, rb) = (&data[y * width..(y + 1) * width], &data[(y + 1) * width..(y + 2) * width]);
        for x in 0..width {
            packed[x] = Complex::new(ra[x], rb[x]);
        }
        row_fft.forward_with_scratch(&mut packed, &mut scratch);
        for k in 0..width {
            let zk = packed[k];
            let zn = packed[(width - k) % width].conj();
            let a = (zk + zn).scale(0.5);
            let d = (zk - zn).scale(0.5);
            // d / i
            let b = Complex::new(d.im, -d.re);
            out[y * width + k] = a;
            out[(y + 1) * width + k] = b;
        }
        y += 2;
    }
    if y < height {
        let row = &mut out[y * width..(y + 1) * width];
        for (o, v) in row.iter_mut().zip(&data[y * width..(y + 1) * width]) {
            *o = Complex::new(*v, 0.0);
        }
        row_fft.forward_with_scratch(row, &mut scratch);
    }

    // Columns 0..=width/2; the rest follow from X[-ky][-kx] = conj(X[ky][kx]).
    // Gathered a block of neighbouring columns at a time so each row read is
    // contiguous.
    const BLOCK: usize = 8;
    let col_fft = Fft::new(height);
    let mut columns = vec![Complex::ZERO; BLOCK * height];
    let half = width / 2;
    let ncols = half.min(width - 1) + 1;
    for x0 in (0..ncols).step_by(BLOCK) {
        let b = BLOCK.min(ncols - x0);
        for yy in 0..height {
            let row = &out[yy * width + x0..yy * width + x0 + b];
            for (j, v) in row.iter().enumerate() {
                columns[j * height + yy] = *v;
            }
        }
        for col in columns.chunks_exact_mut(height).take(b) {
            col_fft.forward_with_scratch(col, &mut scratch);
        }
        for yy in 0..height {
            let row = &mut out[yy * width + x0..yy * width + x0 + b];
            for (j, v) in row.iter_mut().enumerate() {
                *v = columns[j * height + yy];
            }
        }
    }
    for x in (half + 1)..width {
        let mx = width - x;
        for yy in 0..height {
            let my = (height - yy) % height;
            out[yy * width + x] = out[my * width + mx].conj();
        }
    }
    out
}
