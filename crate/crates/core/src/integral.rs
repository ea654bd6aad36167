//! Exact summed-area tables.
//!
//! An [`IntegralImage`] over a `width x height` plane has `(height + 1) x (width + 1)`
//! cells, where cell `(i, j)` holds the sum of all source values with row `< i`
//! and column `< j`. Row 0 and column 0 are zero, and the sum over the `k x k`
//! window anchored at `(u, v)` is
//!
//! ```text
//! I(u + k, v + k) + I(u, v) - I(u + k, v) - I(u, v + k)
//! ```
//!
//! Sources are products of samples held as exact integers. Real-valued samples
//! (the bilinear SR reference, luma planes) enter as fixed-point integers with
//! [`FRAC_BITS`] fractional bits, so prefix sums never round.

use alloc::vec::Vec;

use crate::{Error, FloatRaster, Raster, Result};

/// Fractional bits of the fixed-point representation of real samples.
pub const FRAC_BITS: u32 = 16;

/// Accumulator cell type of an integral image.
pub trait Accumulator: Copy + core::fmt::Debug + PartialEq {
    const ZERO: Self;
    /// Largest total the type holds exactly, `None` for inexact (floating) types.
    const EXACT_LIMIT: Option<u128>;

    fn add(self, rhs: Self) -> Self;
    fn sub(self, rhs: Self) -> Self;
}

// Integer corners combine with wrapping arithmetic: whenever the true window
// sum fits the type, the modular result is exact.
macro_rules! int_accumulator {
    ($t:ty) => {
        impl Accumulator for $t {
            const ZERO: Self = 0;
            const EXACT_LIMIT: Option<u128> = Some(<$t>::MAX as u128);

            #[inline(always)]
            fn add(self, rhs: Self) -> Self {
                self.wrapping_add(rhs)
            }

            #[inline(always)]
            fn sub(self, rhs: Self) -> Self {
                self.wrapping_sub(rhs)
            }
        }
    };
}

int_accumulator!(u64);
int_accumulator!(u128);

impl Accumulator for f64 {
    const ZERO: Self = 0.0;
    const EXACT_LIMIT: Option<u128> = None;

    #[inline(always)]
    fn add(self, rhs: Self) -> Self {
        self + rhs
    }

    #[inline(always)]
    fn sub(self, rhs: Self) -> Self {
        self - rhs
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegralImage<A> {
    width: usize,
    height: usize,
    cells: Vec<A>,
}

impl<A: Accumulator> IntegralImage<A> {
    fn build_with<T: Copy>(width: usize, height: usize, source: &[T], conv: impl Fn(T) -> A) -> Self {
        debug_assert_eq!(source.len(), width * height);
        Self::build_by(width, height, |i| conv(source[i]))
    }

    /// Table over the plane whose value at flat index `i` is `value(i)`.
    #[inline(always)]
    fn build_by(width: usize, height: usize, value: impl Fn(usize) -> A) -> Self {
        Self::build_rows(width, height, |row, out| {
            for (j, cell) in out.iter_mut().enumerate() {
                *cell = value(row * width + j);
            }
        })
    }

    /// Table over the plane whose rows `fill(row, buffer)` writes in turn.
    #[inline(always)]
    fn build_rows(width: usize, height: usize, mut fill: impl FnMut(usize, &mut [A])) -> Self {
        let stride = width + 1;
        let mut cells = alloc::vec![A::ZERO; stride * (height + 1)];
        let mut values = alloc::vec![A::ZERO; width];
        for row in 0..height {
            fill(row, &mut values);
            let (above, below) = cells.split_at_mut((row + 1) * stride);
            let above = &above[row * stride..];
            let below = &mut below[..stride];
            let mut running = A::ZERO;
            for j in 0..width {
                running = running.add(values[j]);
                below[j + 1] = above[j + 1].add(running);
            }
        }
        Self { width, height, cells }
    }

    /// Source plane width.
    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    /// Source plane height.
    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    /// Cell `(i, j)`: the sum over source rows `< i` and columns `< j`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> A {
        self.cells[i * (self.width + 1) + j]
    }

    /// Sum of the `rows x cols` rectangle with top-left source pixel `(top, left)`.
    pub fn rect_sum(&self, top: usize, left: usize, rows: usize, cols: usize) -> Result<A> {
        if top + rows > self.height || left + cols > self.width {
            return Err(Error::WindowOutOfBounds);
        }
        Ok(self.rect_sum_unchecked(top, left, rows, cols))
    }

    #[inline(always)]
    pub(crate) fn rect_sum_unchecked(&self, top: usize, left: usize, rows: usize, cols: usize) -> A {
        let stride = self.width + 1;
        let a = top * stride + left;
        let b = (top + rows) * stride + left;
        self.cells[b + cols].add(self.cells[a]).sub(self.cells[b]).sub(self.cells[a + cols])
    }

    /// Sum over the `k x k` window anchored at row `u`, column `v`.
    pub fn window_sum(&self, u: usize, v: usize, k: usize) -> Result<A> {
        self.rect_sum(u, v, k, k)
    }
}

impl IntegralImage<f64> {
    /// Floating-point table over a real plane. Not exact; used for the
    /// gradient-based alternative metrics only.
    pub fn from_real(width: usize, height: usize, source: &[f64]) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        if source.len() != width * height {
            return Err(Error::BufferLength { expected: width * height, actual: source.len() });
        }
        Ok(Self::build_with(width, height, source, |v| v))
    }
}

/// Builds the exact table of an integer product plane.
///
/// Fails with [`Error::AccumulatorOverflow`] when `max_value * width * height`
/// might not fit `A`.
pub fn build_integral<A>(plane: &ProductPlane) -> Result<IntegralImage<A>>
where
    A: Accumulator + From<u64>,
{
    let limit = A::EXACT_LIMIT.ok_or(Error::AccumulatorOverflow)?;
    if !fits(plane.max_value, plane.width * plane.height, limit) {
        return Err(Error::AccumulatorOverflow);
    }
    Ok(IntegralImage::build_with(plane.width, plane.height, &plane.data, A::from))
}

#[inline]
fn fits(max_value: u64, count: usize, limit: u128) -> bool {
    u128::from(max_value).checked_mul(count as u128).is_some_and(|total| total <= limit)
}

/// An exact table sized to its plane: 64-bit cells when the worst-case total
/// fits, 128-bit cells otherwise.
#[derive(Clone, Debug)]
pub enum ExactIntegral {
    Narrow(IntegralImage<u64>),
    Wide(IntegralImage<u128>),
}

impl ExactIntegral {
    pub fn build(plane: &ProductPlane) -> Result<Self> {
        if fits(plane.max_value, plane.width * plane.height, u128::from(u64::MAX)) {
            build_integral(plane).map(Self::Narrow)
        } else {
            build_integral(plane).map(Self::Wide)
        }
    }

    /// A table that is only read through `k x k` window sums.
    ///
    /// Corners combine modulo the cell width, so 64-bit cells suffice whenever
    /// one window's total fits, even if the whole plane's does not. Individual
    /// cells of such a table are prefix sums modulo `2^64`.
    pub fn for_windows(plane: &ProductPlane, k: usize) -> Result<Self> {
        if fits(plane.max_value, k * k, u128::from(u64::MAX)) {
            Ok(Self::Narrow(IntegralImage::build_with(plane.width, plane.height, &plane.data, |v| v)))
        } else {
            Self::build(plane)
        }
    }

    pub fn window_sum(&self, u: usize, v: usize, k: usize) -> Result<u128> {
        match self {
            Self::Narrow(ii) => ii.window_sum(u, v, k).map(u128::from),
            Self::Wide(ii) => ii.window_sum(u, v, k),
        }
    }

    /// Calls `f(index, sum)` for the `k x k` window at every anchor of a
    /// `rows x cols` grid with the given stride, in row-major order.
    pub(crate) fn for_each_window(
        &self,
        rows: usize,
        cols: usize,
        stride: usize,
        k: usize,
        mut f: impl FnMut(usize, u128),
    ) {
        match self {
            Self::Narrow(ii) => {
                for r in 0..rows {
                    for c in 0..cols {
                        f(r * cols + c, u128::from(ii.rect_sum_unchecked(r * stride, c * stride, k, k)));
                    }
                }
            }
            Self::Wide(ii) => {
                for r in 0..rows {
                    for c in 0..cols {
                        f(r * cols + c, ii.rect_sum_unchecked(r * stride, c * stride, k, k));
                    }
                }
            }
        }
    }
}

/// Exact `k x k` window sums of one channel of `a * b`, at the anchors of a
/// grid with a fixed stride.
///
/// Every window corner lies on the lattice of pitch `gcd(stride, k)`, so only
/// those cells are stored; each holds the sum of one `step x step` block of
/// products. The product plane itself is never materialised.
#[derive(Clone, Debug)]
pub struct WindowTable {
    step: usize,
    k: usize,
    table: ExactIntegral,
}

impl WindowTable {
    pub fn of_product<'a>(
        a: impl Into<PlaneSource<'a>>,
        b: impl Into<PlaneSource<'a>>,
        channel: usize,
        k: usize,
        stride: usize,
    ) -> Result<Self> {
        let (a, b) = (a.into(), b.into());
        let (w, h, c) = a.shape();
        if b.shape() != (w, h, c) || channel >= c {
            return Err(Error::ShapeMismatch);
        }
        if k == 0 || stride == 0 {
            return Err(Error::InvalidGeometry("window size and stride must be positive"));
        }
        let step = gcd(k, stride);
        let max_value = a.max_value() * b.max_value();
        let table = if fits(max_value, k * k, u128::from(u64::MAX)) {
            ExactIntegral::Narrow(lattice_table(a, b, channel, step))
        } else if fits(max_value, w * h, u128::MAX) {
            ExactIntegral::Wide(lattice_table(a, b, channel, step))
        } else {
            return Err(Error::AccumulatorOverflow);
        };
        Ok(Self { step, k, table })
    }

    /// Lattice pitch in source pixels.
    pub fn step(&self) -> usize {
        self.step
    }

    /// Sum over the window anchored at `(u, v)`; both must be multiples of [`step`](Self::step).
    pub fn window_sum(&self, u: usize, v: usize) -> Result<u128> {
        if !u.is_multiple_of(self.step) || !v.is_multiple_of(self.step) {
            return Err(Error::InvalidGeometry("anchor is off the table lattice"));
        }
        let n = self.k / self.step;
        let (u, v) = (u / self.step, v / self.step);
        match &self.table {
            ExactIntegral::Narrow(ii) => ii.rect_sum(u, v, n, n).map(u128::from),
            ExactIntegral::Wide(ii) => ii.rect_sum(u, v, n, n),
        }
    }

    /// Calls `f(index, sum)` for every anchor of a `rows x cols` grid, row-major.
    /// The grid must fit the plane and `stride` must be the one the table was built for.
    pub(crate) fn for_each_window(&self, rows: usize, cols: usize, stride: usize, f: impl FnMut(usize, u128)) {
        debug_assert_eq!(stride % self.step, 0);
        self.table.for_each_window(rows, cols, stride / self.step, self.k / self.step, f);
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn lattice_table<A>(a: PlaneSource<'_>, b: PlaneSource<'_>, channel: usize, step: usize) -> IntegralImage<A>
where
    A: Accumulator + From<u64>,
{
    fn build<A, X, Y>(w: usize, h: usize, c: usize, ch: usize, step: usize, x: &[X], y: &[Y]) -> IntegralImage<A>
    where
        A: Accumulator + From<u64>,
        X: Copy + Into<u64>,
        Y: Copy + Into<u64>,
    {
        let (bw, bh) = (w / step, h / step);
        IntegralImage::build_rows(bw, bh, |block_row, out| {
            out.fill(A::ZERO);
            for row in block_row * step..(block_row + 1) * step {
                let x = &x[row * w * c..][..bw * step * c];
                let y = &y[row * w * c..][..bw * step * c];
                for (j, cell) in out.iter_mut().enumerate() {
                    let mut sum = 0u64;
                    for t in 0..step {
                        let at = (j * step + t) * c + ch;
                        sum += x[at].into() * y[at].into();
                    }
                    *cell = cell.add(A::from(sum));
                }
            }
        })
    }
    let (w, h, c) = a.shape();
    match (a, b) {
        (PlaneSource::Bytes(x), PlaneSource::Bytes(y)) => build(w, h, c, channel, step, x.data(), y.data()),
        (PlaneSource::Bytes(x), PlaneSource::Fixed(y)) => build(w, h, c, channel, step, x.data(), y.data()),
        (PlaneSource::Fixed(x), PlaneSource::Bytes(y)) => build(w, h, c, channel, step, x.data(), y.data()),
        (PlaneSource::Fixed(x), PlaneSource::Fixed(y)) => build(w, h, c, channel, step, x.data(), y.data()),
    }
}

/// Real samples stored as non-negative integers scaled by `2^FRAC_BITS`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedRaster {
    width: usize,
    height: usize,
    channels: usize,
    max_value: u32,
    data: Vec<u32>,
}

impl FixedRaster {
    /// Rounds `v * 2^16` half away from zero. Samples must lie in `[0, 2^16)`.
    pub fn from_float(raster: &FloatRaster) -> Result<Self> {
        let scale = f64::from(1u32 << FRAC_BITS);
        let (mut lowest, mut highest) = (0.0f64, 0.0f64);
        let data: Vec<u32> = raster
            .data()
            .iter()
            .map(|&v| {
                // for x >= 0, floor(x + 0.5) rounds half away from zero, exactly
                let shifted = f64::from(v) * scale + 0.5;
                lowest = lowest.min(f64::from(v));
                highest = highest.max(shifted);
                shifted as u32
            })
            .collect();
        if lowest < 0.0 || highest >= 4_294_967_296.0 {
            return Err(Error::FixedPointRange);
        }
        let max_value = data.iter().copied().max().unwrap_or(0);
        Ok(Self { width: raster.width(), height: raster.height(), channels: raster.channels(), max_value, data })
    }

    /// Lossless fixed-point copy of an 8-bit raster.
    pub fn from_bytes(raster: &Raster) -> Self {
        let data: Vec<u32> = raster.data().iter().map(|&v| u32::from(v) << FRAC_BITS).collect();
        Self {
            width: raster.width(),
            height: raster.height(),
            channels: raster.channels(),
            max_value: data.iter().copied().max().unwrap_or(0),
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn data(&self) -> &[u32] {
        &self.data
    }

    pub fn max_value(&self) -> u32 {
        self.max_value
    }
}

/// One operand of a product plane: 8-bit samples or fixed-point reals.
#[derive(Clone, Copy, Debug)]
pub enum PlaneSource<'a> {
    Bytes(&'a Raster),
    Fixed(&'a FixedRaster),
}

impl<'a> From<&'a Raster> for PlaneSource<'a> {
    fn from(r: &'a Raster) -> Self {
        Self::Bytes(r)
    }
}

impl<'a> From<&'a FixedRaster> for PlaneSource<'a> {
    fn from(r: &'a FixedRaster) -> Self {
        Self::Fixed(r)
    }
}

impl PlaneSource<'_> {
    fn shape(&self) -> (usize, usize, usize) {
        match self {
            Self::Bytes(r) => (r.width(), r.height(), r.channels()),
            Self::Fixed(r) => (r.width(), r.height(), r.channels()),
        }
    }

    pub(crate) fn frac_bits(&self) -> u32 {
        match self {
            Self::Bytes(_) => 0,
            Self::Fixed(_) => FRAC_BITS,
        }
    }

    fn max_value(&self) -> u64 {
        match self {
            Self::Bytes(_) => 255,
            Self::Fixed(r) => u64::from(r.max_value),
        }
    }

    #[inline(always)]
    fn at(&self, i: usize) -> u64 {
        match self {
            Self::Bytes(r) => u64::from(r.data()[i]),
            Self::Fixed(r) => u64::from(r.data()[i]),
        }
    }
}

/// Element-wise product of two operands for one channel.
///
/// Each value is an exact integer equal to the real product times
/// `2^scale_bits`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductPlane {
    pub width: usize,
    pub height: usize,
    pub scale_bits: u32,
    /// Upper bound on every value, used for the accumulator check.
    pub max_value: u64,
    pub data: Vec<u64>,
}

pub fn product_plane<'a>(
    a: impl Into<PlaneSource<'a>>,
    b: impl Into<PlaneSource<'a>>,
    channel: usize,
) -> Result<ProductPlane> {
    let (a, b) = (a.into(), b.into());
    let (w, h, c) = a.shape();
    if b.shape() != (w, h, c) || channel >= c {
        return Err(Error::ShapeMismatch);
    }
    let data = match (a, b) {
        // the common HR/SR cases get monomorphic loops
        (PlaneSource::Bytes(x), PlaneSource::Bytes(y)) => x.data()[channel..]
            .iter()
            .step_by(c)
            .zip(y.data()[channel..].iter().step_by(c))
            .map(|(&p, &q)| u64::from(p) * u64::from(q))
            .collect(),
        (PlaneSource::Bytes(x), PlaneSource::Fixed(y)) | (PlaneSource::Fixed(y), PlaneSource::Bytes(x)) => x.data()
            [channel..]
            .iter()
            .step_by(c)
            .zip(y.data()[channel..].iter().step_by(c))
            .map(|(&p, &q)| u64::from(p) * u64::from(q))
            .collect(),
        _ => (0..w * h).map(|i| a.at(i * c + channel) * b.at(i * c + channel)).collect(),
    };
    Ok(ProductPlane {
        width: w,
        height: h,
        scale_bits: a.frac_bits() + b.frac_bits(),
        max_value: a.max_value() * b.max_value(),
        data,
    })
}

/// Product planes for every channel.
pub fn product_planes<'a>(a: impl Into<PlaneSource<'a>>, b: impl Into<PlaneSource<'a>>) -> Result<Vec<ProductPlane>> {
    let (a, b) = (a.into(), b.into());
    let (_, _, c) = a.shape();
    (0..c).map(|ch| product_plane(a, b, ch)).collect()
}
