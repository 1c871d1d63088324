//! Dense third-order tensors and the t-SVD algebra built on the mode-3 DFT.
//!
//! A [`Tensor3`] of shape `I1 x I2 x I3` is stored frontal-slice major: entry
//! `(i1, i2, i3)` lives at `i1 + I1 * (i2 + I2 * i3)`, so every frontal slice
//! is a contiguous column-major `I1 x I2` block. Frontal slice indices are
//! zero-based throughout the Rust API.
//!
//! The forward transform is the unnormalised DFT along mode 3 and the inverse
//! carries the `1 / I3` factor. Spectra of real tensors are conjugate
//! symmetric, which `t_product` and `t_svd` exploit by computing slices
//! `0..=I3/2` only and mirroring the rest.

use std::ops::{Add, Mul, Sub};

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex;
use num_traits::Zero;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Shape of a third-order tensor.
pub type Dims3 = (usize, usize, usize);

#[inline]
fn offset(dims: Dims3, i1: usize, i2: usize, i3: usize) -> usize {
    i1 + dims.0 * (i2 + dims.1 * i3)
}

/// Dense real third-order tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3<T> {
    data: Vec<T>,
    dims: Dims3,
}

impl<T: Scalar> Tensor3<T> {
    /// Zero tensor. Panics if any dimension is zero.
    pub fn zeros(i1: usize, i2: usize, i3: usize) -> Self {
        assert!(i1 > 0 && i2 > 0 && i3 > 0, "tensor dimensions must be positive");
        Self {
            data: vec![T::zero(); i1 * i2 * i3],
            dims: (i1, i2, i3),
        }
    }

    pub fn from_fn<F>(dims: Dims3, mut f: F) -> Self
    where
        F: FnMut(usize, usize, usize) -> T,
    {
        let mut t = Self::zeros(dims.0, dims.1, dims.2);
        for i3 in 0..dims.2 {
            for i2 in 0..dims.1 {
                for i1 in 0..dims.0 {
                    t.data[offset(dims, i1, i2, i3)] = f(i1, i2, i3);
                }
            }
        }
        t
    }

    /// Wraps a frontal-slice-major buffer.
    pub fn from_vec(dims: Dims3, data: Vec<T>) -> Result<Self> {
        if dims.0 == 0 || dims.1 == 0 || dims.2 == 0 || data.len() != dims.0 * dims.1 * dims.2 {
            return Err(Error::DimensionMismatch {
                context: "Tensor3::from_vec",
                expected: format!("{} entries for positive dims {:?}", dims.0 * dims.1 * dims.2, dims),
                actual: format!("{} entries", data.len()),
            });
        }
        Ok(Self { data, dims })
    }

    /// Builds a tensor whose frontal slices are the given matrices.
    pub fn from_slices(slices: &[DMatrix<T>]) -> Result<Self> {
        let first = slices.first().ok_or(Error::EmptyInput)?;
        let (rows, cols) = first.shape();
        let mut data = Vec::with_capacity(rows * cols * slices.len());
        for s in slices {
            if s.shape() != (rows, cols) {
                return Err(Error::DimensionMismatch {
                    context: "Tensor3::from_slices",
                    expected: format!("{rows}x{cols}"),
                    actual: format!("{}x{}", s.nrows(), s.ncols()),
                });
            }
            data.extend_from_slice(s.as_slice());
        }
        Self::from_vec((rows, cols, slices.len()), data)
    }

    /// Identity tensor: identity matrix in frontal slice 0, zeros elsewhere.
    pub fn identity(n: usize, depth: usize) -> Self {
        let mut t = Self::zeros(n, n, depth);
        for i in 0..n {
            t.data[offset(t.dims, i, i, 0)] = T::one();
        }
        t
    }

    #[inline]
    pub fn dims(&self) -> Dims3 {
        self.dims
    }

    #[inline]
    pub fn get(&self, i1: usize, i2: usize, i3: usize) -> T {
        self.data[offset(self.dims, i1, i2, i3)]
    }

    #[inline]
    pub fn set(&mut self, i1: usize, i2: usize, i3: usize, value: T) {
        let o = offset(self.dims, i1, i2, i3);
        self.data[o] = value;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    /// Frontal slice `i3` as an `I1 x I2` matrix.
    pub fn slice(&self, i3: usize) -> DMatrix<T> {
        let len = self.dims.0 * self.dims.1;
        DMatrix::from_column_slice(self.dims.0, self.dims.1, &self.data[i3 * len..(i3 + 1) * len])
    }

    pub fn set_slice(&mut self, i3: usize, m: &DMatrix<T>) {
        assert_eq!(m.shape(), (self.dims.0, self.dims.1), "slice shape");
        let len = self.dims.0 * self.dims.1;
        self.data[i3 * len..(i3 + 1) * len].copy_from_slice(m.as_slice());
    }

    /// Mode-3 fibre at `(i1, i2)`.
    pub fn tube(&self, i1: usize, i2: usize) -> Vec<T> {
        (0..self.dims.2).map(|i3| self.get(i1, i2, i3)).collect()
    }

    pub fn norm_squared(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &x| acc + x * x)
    }

    pub fn frobenius_norm(&self) -> T {
        self.norm_squared().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &x| acc.max(x.magnitude()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.finite())
    }

    pub fn scale(&self, factor: T) -> Self {
        Self {
            data: self.data.iter().map(|&x| x * factor).collect(),
            dims: self.dims,
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert_eq!(self.dims, other.dims, "tensor shapes differ");
        Self {
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
            dims: self.dims,
        }
    }
}

impl<T: Scalar> Add for &Tensor3<T> {
    type Output = Tensor3<T>;
    fn add(self, rhs: Self) -> Tensor3<T> {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl<T: Scalar> Sub for &Tensor3<T> {
    type Output = Tensor3<T>;
    fn sub(self, rhs: Self) -> Tensor3<T> {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl<T: Scalar> Mul<T> for &Tensor3<T> {
    type Output = Tensor3<T>;
    fn mul(self, rhs: T) -> Tensor3<T> {
        self.scale(rhs)
    }
}

/// Complex mode-3 spectrum of a third-order tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTensor<T> {
    data: Vec<Complex<T>>,
    dims: Dims3,
}

impl<T: Scalar> SpectrumTensor<T> {
    pub fn zeros(i1: usize, i2: usize, i3: usize) -> Self {
        assert!(i1 > 0 && i2 > 0 && i3 > 0, "tensor dimensions must be positive");
        Self {
            data: vec![Complex::zero(); i1 * i2 * i3],
            dims: (i1, i2, i3),
        }
    }

    #[inline]
    pub fn dims(&self) -> Dims3 {
        self.dims
    }

    #[inline]
    pub fn get(&self, i1: usize, i2: usize, i3: usize) -> Complex<T> {
        self.data[offset(self.dims, i1, i2, i3)]
    }

    #[inline]
    pub fn set(&mut self, i1: usize, i2: usize, i3: usize, value: Complex<T>) {
        let o = offset(self.dims, i1, i2, i3);
        self.data[o] = value;
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn slice(&self, i3: usize) -> DMatrix<Complex<T>> {
        let len = self.dims.0 * self.dims.1;
        DMatrix::from_column_slice(self.dims.0, self.dims.1, &self.data[i3 * len..(i3 + 1) * len])
    }

    pub fn set_slice(&mut self, i3: usize, m: &DMatrix<Complex<T>>) {
        assert_eq!(m.shape(), (self.dims.0, self.dims.1), "slice shape");
        let len = self.dims.0 * self.dims.1;
        self.data[i3 * len..(i3 + 1) * len].copy_from_slice(m.as_slice());
    }

    /// Copies slice `from` into slice `to`, optionally conjugating.
    fn copy_slice(&mut self, from: usize, to: usize, conjugate: bool) {
        let len = self.dims.0 * self.dims.1;
        for i in 0..len {
            let z = self.data[from * len + i];
            self.data[to * len + i] = if conjugate { z.conj() } else { z };
        }
    }

    pub fn norm_squared(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    /// Largest `|slice(n) - conj(slice(I3 - n))|` over `n = 1..I3`.
    pub fn conjugate_symmetry_defect(&self) -> T {
        let n = self.dims.2;
        let len = self.dims.0 * self.dims.1;
        let mut worst = T::zero();
        for k in 1..n {
            for i in 0..len {
                let d = self.data[k * len + i] - self.data[(n - k) * len + i].conj();
                worst = worst.max(d.norm_sqr().sqrt());
            }
        }
        worst
    }
}

fn transform_tubes<T: Scalar>(buf: &mut [Complex<T>], len: usize, inverse: bool) {
    let mut planner = FftPlanner::<T>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(len)
    } else {
        planner.plan_fft_forward(len)
    };
    // rustfft processes the buffer as consecutive length-`len` transforms.
    fft.process(buf);
}

/// Unnormalised forward DFT of every mode-3 tube.
pub fn fft_mode3<T: Scalar>(t: &Tensor3<T>) -> SpectrumTensor<T> {
    let (a, b, n) = t.dims;
    let tubes = a * b;
    let mut buf = vec![Complex::<T>::zero(); tubes * n];
    for k in 0..n {
        for tube in 0..tubes {
            buf[tube * n + k] = Complex::new(t.data[tube + tubes * k], T::zero());
        }
    }
    transform_tubes(&mut buf, n, false);
    let mut out = SpectrumTensor::zeros(a, b, n);
    for k in 0..n {
        for tube in 0..tubes {
            out.data[tube + tubes * k] = buf[tube * n + k];
        }
    }
    out
}

/// Relative imaginary residue above which an inverse transform is rejected.
fn non_real_tolerance<T: Scalar>() -> T {
    T::lit(1e-8).max(T::epsilon() * T::lit(1e3))
}

/// Inverse DFT (with `1 / I3` normalisation) of every mode-3 tube, discarding
/// the imaginary round-off.
pub fn ifft_mode3<T: Scalar>(s: &SpectrumTensor<T>) -> Result<Tensor3<T>> {
    let (a, b, n) = s.dims;
    let tubes = a * b;
    let mut buf = vec![Complex::<T>::zero(); tubes * n];
    for k in 0..n {
        for tube in 0..tubes {
            buf[tube * n + k] = s.data[tube + tubes * k];
        }
    }
    transform_tubes(&mut buf, n, true);
    let inv_n = T::one() / T::from_usize_lossy(n);
    let mut max_imag = T::zero();
    let mut max_value = T::zero();
    let mut out = Tensor3::zeros(a, b, n);
    for k in 0..n {
        for tube in 0..tubes {
            let z = buf[tube * n + k] * inv_n;
            max_imag = max_imag.max(z.im.magnitude());
            max_value = max_value.max(z.norm_sqr().sqrt());
            out.data[tube + tubes * k] = z.re;
        }
    }
    if max_imag > non_real_tolerance::<T>() * max_value {
        return Err(Error::NonRealResult {
            max_imag: max_imag.to_f64_lossy(),
            max_value: max_value.to_f64_lossy(),
        });
    }
    Ok(out)
}

/// Slices of the half spectrum `0..=n/2`, with the slice each mirrors onto.
fn half_spectrum(n: usize) -> impl Iterator<Item = (usize, Option<usize>)> {
    (0..=n / 2).map(move |k| {
        let mirror = n - k;
        if k == 0 || mirror == k {
            (k, None)
        } else {
            (k, Some(mirror))
        }
    })
}

/// Tensor-tensor product: slice-wise matrix products in the mode-3 spectrum.
pub fn t_product<T: Scalar>(x: &Tensor3<T>, y: &Tensor3<T>) -> Result<Tensor3<T>> {
    let (i1, i2, i3) = x.dims;
    let (j1, j2, j3) = y.dims;
    if i2 != j1 || i3 != j3 {
        return Err(Error::DimensionMismatch {
            context: "t_product",
            expected: format!("{i2}x?x{i3} right operand"),
            actual: format!("{j1}x{j2}x{j3}"),
        });
    }
    let fx = fft_mode3(x);
    let fy = fft_mode3(y);
    let mut prod = SpectrumTensor::zeros(i1, j2, i3);
    for (k, mirror) in half_spectrum(i3) {
        let p = fx.slice(k) * fy.slice(k);
        prod.set_slice(k, &p);
        if let Some(m) = mirror {
            prod.copy_slice(k, m, true);
        }
    }
    ifft_mode3(&prod)
}

/// Tensor transpose: transposes every frontal slice and reverses slices
/// `1..I3`.
pub fn t_transpose<T: Scalar>(x: &Tensor3<T>) -> Tensor3<T> {
    let (a, b, n) = x.dims;
    let mut out = Tensor3::zeros(b, a, n);
    for k in 0..n {
        let src = if k == 0 { 0 } else { n - k };
        out.set_slice(k, &x.slice(src).transpose());
    }
    out
}

/// Factors of a t-SVD `x = u * s * t_transpose(v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TSvd<T> {
    pub u: Tensor3<T>,
    pub s: Tensor3<T>,
    pub v: Tensor3<T>,
}

impl<T: Scalar> TSvd<T> {
    pub fn reconstruct(&self) -> Result<Tensor3<T>> {
        t_product(&t_product(&self.u, &self.s)?, &t_transpose(&self.v))
    }
}

/// Extends a matrix with orthonormal columns to a full `n x n` unitary basis.
///
/// Candidates are the standard basis vectors; at each step the one with the
/// largest residual against the current basis is orthogonalised (twice) and
/// appended, so every accepted residual has squared norm at least `1 / n`.
fn complete_basis<F: ComplexField>(partial: &DMatrix<F>, n: usize) -> DMatrix<F> {
    let mut cols: Vec<nalgebra::DVector<F>> = partial.column_iter().map(|c| c.into_owned()).collect();
    let project_out = |v: &mut nalgebra::DVector<F>, basis: &[nalgebra::DVector<F>]| {
        for _ in 0..2 {
            for q in basis {
                let coeff = q.dotc(v);
                v.axpy(-coeff, q, F::one());
            }
        }
    };
    while cols.len() < n {
        let mut best: Option<(F::RealField, nalgebra::DVector<F>)> = None;
        for i in 0..n {
            let mut e = nalgebra::DVector::<F>::zeros(n);
            e[i] = F::one();
            project_out(&mut e, &cols);
            let norm = e.norm();
            if best.as_ref().is_none_or(|(b, _)| norm > *b) {
                best = Some((norm, e));
            }
        }
        let (norm, mut v) = best.expect("n > 0");
        v.unscale_mut(norm);
        cols.push(v);
    }
    DMatrix::from_columns(&cols)
}

/// Full SVD `a = u * diag(sigma) * v^H` with square unitary `u` and `v`.
fn full_svd<F: ComplexField>(a: DMatrix<F>) -> (DMatrix<F>, Vec<F::RealField>, DMatrix<F>) {
    let (m, n) = a.shape();
    let svd = a.svd(true, true);
    let u = svd.u.expect("requested U");
    let v = svd.v_t.expect("requested V^T").adjoint();
    let sigma = svd.singular_values.iter().cloned().collect();
    (complete_basis(&u, m), sigma, complete_basis(&v, n))
}

fn to_complex<T: Scalar>(m: &DMatrix<T>) -> DMatrix<Complex<T>> {
    m.map(|x| Complex::new(x, T::zero()))
}

/// Tensor SVD via per-slice SVDs of the mode-3 spectrum.
///
/// Only slices `0..=I3/2` are decomposed; the remaining slices are complex
/// conjugates. The DC slice (and the Nyquist slice for even `I3`) is real for
/// a real input, so it is decomposed as a real matrix to keep the factors real
/// after the inverse transform.
pub fn t_svd<T: Scalar>(x: &Tensor3<T>) -> Result<TSvd<T>> {
    let (i1, i2, i3) = x.dims;
    let fx = fft_mode3(x);
    let mut fu = SpectrumTensor::zeros(i1, i1, i3);
    let mut fs = SpectrumTensor::zeros(i1, i2, i3);
    let mut fv = SpectrumTensor::zeros(i2, i2, i3);
    for (k, mirror) in half_spectrum(i3) {
        let slice = fx.slice(k);
        let (u, sigma, v) = if mirror.is_none() {
            let (u, sigma, v) = full_svd(slice.map(|z| z.re));
            (to_complex(&u), sigma, to_complex(&v))
        } else {
            full_svd(slice)
        };
        let mut s = DMatrix::<Complex<T>>::zeros(i1, i2);
        for (d, &sv) in sigma.iter().enumerate() {
            s[(d, d)] = Complex::new(sv, T::zero());
        }
        fu.set_slice(k, &u);
        fs.set_slice(k, &s);
        fv.set_slice(k, &v);
        if let Some(m) = mirror {
            fu.copy_slice(k, m, true);
            fs.copy_slice(k, m, true);
            fv.copy_slice(k, m, true);
        }
    }
    Ok(TSvd {
        u: ifft_mode3(&fu)?,
        s: ifft_mode3(&fs)?,
        v: ifft_mode3(&fv)?,
    })
}

/// Largest valid low-frequency parameter for depth `n`.
#[inline]
pub fn max_low_freq(n: usize) -> usize {
    n / 2 + 1
}

pub(crate) fn check_low_freq(low_freq: usize, n: usize) -> Result<()> {
    let max = max_low_freq(n);
    if low_freq == 0 || low_freq > max {
        return Err(Error::InvalidLowFrequencyParameter { low_freq, max });
    }
    Ok(())
}

/// Keeps the DC slice and the first `low_freq - 1` harmonics (with their
/// conjugate mirrors) of the spectrum and zeroes everything else.
pub fn keep_low_frequencies<T: Scalar>(spectrum: &SpectrumTensor<T>, low_freq: usize) -> Result<SpectrumTensor<T>> {
    let (a, b, n) = spectrum.dims;
    check_low_freq(low_freq, n)?;
    let len = a * b;
    let mut out = SpectrumTensor::zeros(a, b, n);
    out.data[..len].copy_from_slice(&spectrum.data[..len]);
    for k in 1..low_freq {
        out.data[k * len..(k + 1) * len].copy_from_slice(&spectrum.data[k * len..(k + 1) * len]);
        let mirror = n - k;
        if mirror != k {
            out.copy_slice(k, mirror, true);
        }
    }
    Ok(out)
}

/// Tensor low-frequency approximation: orthogonal projection of `b` onto the
/// tensors whose mode-3 spectrum is supported on the `2L - 1` lowest
/// frequencies.
pub fn tlfa_truncate<T: Scalar>(b: &Tensor3<T>, low_freq: usize) -> Result<Tensor3<T>> {
    check_low_freq(low_freq, b.dims.2)?;
    let spectrum = fft_mode3(b);
    ifft_mode3(&keep_low_frequencies(&spectrum, low_freq)?)
}
