//! Mergeable ℓ1 sketches of integer vectors given as a stream of `(i, v)`
//! updates.
//!
//! [`L1Sketch`] projects the vector onto `w` rows of pseudorandom standard
//! Cauchy coefficients. By 1-stability each row is distributed as
//! `‖x‖₁ · C`, and the median of `|C|` is 1, so the median of the absolute
//! rows estimates the norm with no correction factor. Coefficients are a
//! pure function of `(seed, row, i)`; nothing is stored per coordinate.
//!
//! Rows are kept in fixed point (`i128`, 24 fractional bits) and combined
//! with wrapping arithmetic. That makes the sketch exactly linear: update
//! order, sharding and merging never change a single bit of the rows.
//!
//! [`ExactL1`] is a dense-counter backend with the same interface.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

/// Default rows per group, multiplied by `1/δ²`.
pub const DEFAULT_C0: f64 = 8.0;
/// Distinct coordinates buffered before their updates are projected.
pub const DEFAULT_BUFFER: usize = 4096;

const FRAC_BITS: i32 = 24;
const ONE: f64 = (1u64 << FRAC_BITS) as f64;
// Coefficients beyond this magnitude (probability below 1e-11) are clamped so
// a fixed-point coefficient always fits in 61 bits.
const MAX_COEFF: f64 = (1u64 << 36) as f64;
const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const HEADER_BYTES: usize = 32;

#[derive(Debug, Error, PartialEq)]
pub enum SketchError {
    #[error("delta must lie in (0, 1), got {0}")]
    DeltaOutOfRange(f64),
    #[error("group count t must be odd and positive, got {0}")]
    BadGroupCount(u64),
    #[error("c0 must be positive, got {0}")]
    BadC0(f64),
    #[error("sketches differ in width or seed and cannot be merged")]
    Incompatible,
    #[error("serialized sketch is malformed: {0}")]
    Malformed(&'static str),
}

#[inline(always)]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `tan(πv)` for `v ∈ (-½, ½)`.
///
/// Rational approximation on `[0, π/4]` (Cephes coefficients); the outer
/// half of the range uses `tan(π/2 − x) = 1/tan(x)` by swapping numerator
/// and denominator. The swap is a bit select to keep the loop branch-free.
#[inline(always)]
#[allow(clippy::excessive_precision)]
fn tan_pi(v: f64) -> f64 {
    let a = v.abs();
    let far = a > 0.25;
    let r = a.min(0.5 - a);
    let x = std::f64::consts::PI * r;
    let z = x * x;
    let p = (-1.309_369_391_813_837_776_46E4 * z + 1.153_516_648_385_874_161_40E6) * z
        - 1.795_652_519_764_848_779_88E7;
    let q = (((z + 1.368_129_634_706_929_546_78E4) * z - 1.320_892_344_402_109_674_47E6) * z
        + 2.500_838_018_233_579_158_39E7)
        * z
        - 5.386_957_559_294_546_298_81E7;
    let num = x * q + x * z * p;
    let mask = (far as u64).wrapping_neg();
    let n = f64::from_bits((q.to_bits() & mask) | (num.to_bits() & !mask));
    let d = f64::from_bits((num.to_bits() & mask) | (q.to_bits() & !mask));
    (n / d).copysign(v)
}

#[inline(always)]
fn coordinate_key(seed_key: u64, i: u64) -> u64 {
    mix(seed_key.wrapping_add(i.wrapping_mul(GOLDEN)))
}

/// Standard Cauchy variate for one (coordinate, row) pair.
#[inline(always)]
fn cauchy(key: u64, row: u64) -> f64 {
    let h = mix(key.wrapping_add(row));
    // u uniform on the open interval (0, 1)
    let u = ((h >> 11) as f64 + 0.5) * (f64::EPSILON / 2.0);
    tan_pi(u - 0.5).clamp(-MAX_COEFF, MAX_COEFF)
}

#[inline(always)]
fn fixed(c: f64) -> i128 {
    // round half away from zero without a libm call
    let x = c * ONE;
    (x + 0.5f64.copysign(x)) as i64 as i128
}

/// Rows per median group.
fn group_width(delta: f64, c0: f64) -> usize {
    (c0 / (delta * delta)).ceil() as usize
}

fn median_in_place(xs: &mut [f64]) -> f64 {
    let n = xs.len();
    if n == 0 {
        return 0.0;
    }
    let mid = n / 2;
    let (lo, &mut hi, _) = xs.select_nth_unstable_by(mid, f64::total_cmp);
    if n % 2 == 1 {
        hi
    } else {
        let below = lo.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (below + hi) / 2.0
    }
}

#[derive(Debug, Clone)]
pub struct L1Sketch {
    groups: usize,
    seed: u64,
    seed_key: u64,
    scale: f64,
    rows: Vec<i128>,
    pending: BTreeMap<u64, i128>,
    buffer_cap: usize,
}

impl L1Sketch {
    pub fn new(delta: f64, t: u64, seed: u64) -> Result<Self, SketchError> {
        Self::with_c0(delta, t, seed, DEFAULT_C0)
    }

    pub fn with_c0(delta: f64, t: u64, seed: u64, c0: f64) -> Result<Self, SketchError> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(SketchError::DeltaOutOfRange(delta));
        }
        if t == 0 || t.is_multiple_of(2) {
            return Err(SketchError::BadGroupCount(t));
        }
        if !(c0 > 0.0 && c0.is_finite()) {
            return Err(SketchError::BadC0(c0));
        }
        let w = group_width(delta, c0) * t as usize;
        Ok(Self::from_parts(w, t as usize, seed, 1.0, vec![0; w]))
    }

    fn from_parts(w: usize, groups: usize, seed: u64, scale: f64, rows: Vec<i128>) -> Self {
        debug_assert_eq!(rows.len(), w);
        L1Sketch {
            groups,
            seed,
            seed_key: mix(seed),
            scale,
            rows,
            pending: BTreeMap::new(),
            buffer_cap: DEFAULT_BUFFER,
        }
    }

    /// Multiplier applied to every estimate (the real value of one integer
    /// update unit).
    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    /// Number of distinct coordinates to coalesce before projecting; 0
    /// projects every update immediately.
    pub fn with_buffer(mut self, cap: usize) -> Self {
        self.buffer_cap = cap;
        self.flush();
        self
    }

    pub fn width(&self) -> usize {
        self.rows.len()
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// The Cauchy coefficient of coordinate `i` in row `row`.
    pub fn coefficient(&self, row: usize, i: u64) -> f64 {
        cauchy(coordinate_key(self.seed_key, i), row as u64)
    }

    pub fn update(&mut self, i: u64, v: i64) {
        if v == 0 {
            return;
        }
        *self.pending.entry(i).or_insert(0) += i128::from(v);
        if self.pending.len() > self.buffer_cap {
            self.flush();
        }
    }

    /// Projects all buffered updates into the rows.
    pub fn flush(&mut self) {
        let pending = std::mem::take(&mut self.pending);
        Self::project(self.seed_key, &mut self.rows, &pending);
    }

    fn project(seed_key: u64, rows: &mut [i128], updates: &BTreeMap<u64, i128>) {
        for (&i, &v) in updates {
            if v == 0 {
                continue;
            }
            let key = coordinate_key(seed_key, i);
            for (r, row) in rows.iter_mut().enumerate() {
                *row = row.wrapping_add(v.wrapping_mul(fixed(cauchy(key, r as u64))));
            }
        }
    }

    /// Rows with pending updates applied, in fixed point.
    fn settled_rows(&self) -> std::borrow::Cow<'_, [i128]> {
        if self.pending.is_empty() {
            std::borrow::Cow::Borrowed(&self.rows)
        } else {
            let mut rows = self.rows.clone();
            Self::project(self.seed_key, &mut rows, &self.pending);
            std::borrow::Cow::Owned(rows)
        }
    }

    /// Row values as reals (before `scale`).
    pub fn rows(&self) -> Vec<f64> {
        self.settled_rows().iter().map(|&r| r as f64 / ONE).collect()
    }

    pub fn estimate(&self) -> f64 {
        let rows = self.settled_rows();
        let per_group = rows.len() / self.groups;
        let mut group_medians: Vec<f64> = rows
            .chunks(per_group)
            .map(|g| {
                let mut abs: Vec<f64> = g.iter().map(|&r| (r as f64 / ONE).abs()).collect();
                median_in_place(&mut abs)
            })
            .collect();
        median_in_place(&mut group_medians) * self.scale
    }

    pub fn merge(&mut self, other: &L1Sketch) -> Result<(), SketchError> {
        if self.rows.len() != other.rows.len() || self.seed != other.seed || self.groups != other.groups {
            return Err(SketchError::Incompatible);
        }
        self.flush();
        let theirs = other.settled_rows();
        for (a, b) in self.rows.iter_mut().zip(theirs.iter()) {
            *a = a.wrapping_add(*b);
        }
        Ok(())
    }

    /// Heap bytes currently held (rows plus the coalescing buffer).
    pub fn memory_bytes(&self) -> usize {
        self.rows.capacity() * std::mem::size_of::<i128>()
            + self.pending.len() * (std::mem::size_of::<u64>() + std::mem::size_of::<i128>() + 16)
    }

    /// Little-endian layout: `w`, `t`, `seed` as u64, `scale` as f64, then
    /// `w` rows as f64.
    pub fn to_bytes(&self) -> Vec<u8> {
        let rows = self.settled_rows();
        let mut out = Vec::with_capacity(HEADER_BYTES + 8 * rows.len());
        out.extend_from_slice(&(rows.len() as u64).to_le_bytes());
        out.extend_from_slice(&(self.groups as u64).to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        out.extend_from_slice(&self.scale.to_le_bytes());
        for &r in rows.iter() {
            out.extend_from_slice(&(r as f64 / ONE).to_le_bytes());
        }
        out
    }

    /// Inverse of [`to_bytes`](Self::to_bytes). Rows whose magnitude exceeds
    /// 2^29 come back rounded to 53 significant bits.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SketchError> {
        let word = |k: usize| -> [u8; 8] { bytes[8 * k..8 * k + 8].try_into().expect("8 bytes") };
        if bytes.len() < HEADER_BYTES {
            return Err(SketchError::Malformed("truncated header"));
        }
        let w = u64::from_le_bytes(word(0)) as usize;
        let t = u64::from_le_bytes(word(1)) as usize;
        let seed = u64::from_le_bytes(word(2));
        let scale = f64::from_le_bytes(word(3));
        if t == 0 || t.is_multiple_of(2) || !w.is_multiple_of(t) || w == 0 {
            return Err(SketchError::Malformed("inconsistent width and group count"));
        }
        if bytes.len() != HEADER_BYTES + 8 * w {
            return Err(SketchError::Malformed("row count does not match width"));
        }
        let rows = (0..w)
            .map(|k| (f64::from_le_bytes(word(4 + k)) * ONE).round() as i128)
            .collect();
        Ok(Self::from_parts(w, t, seed, scale, rows))
    }
}

/// Exact ℓ1 of a streamed integer vector using one signed counter per
/// touched coordinate.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExactL1 {
    counts: HashMap<u64, i128>,
}

impl ExactL1 {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn update(&mut self, i: u64, v: i64) {
        if v != 0 {
            *self.counts.entry(i).or_insert(0) += i128::from(v);
        }
    }

    pub fn get(&self, i: u64) -> i128 {
        self.counts.get(&i).copied().unwrap_or(0)
    }

    /// Exact ℓ1 norm in update units.
    pub fn norm(&self) -> u128 {
        self.counts.values().map(|v| v.unsigned_abs()).sum()
    }

    pub fn estimate(&self) -> f64 {
        self.norm() as f64
    }

    pub fn merge(&mut self, other: &ExactL1) {
        for (&i, &v) in &other.counts {
            *self.counts.entry(i).or_insert(0) += v;
        }
    }

    /// Nonzero coordinates.
    pub fn entries(&self) -> impl Iterator<Item = (u64, i128)> + '_ {
        self.counts.iter().filter(|(_, &v)| v != 0).map(|(&i, &v)| (i, v))
    }

    pub fn memory_bytes(&self) -> usize {
        self.counts.capacity() * (std::mem::size_of::<u64>() + std::mem::size_of::<i128>() + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizing_rule() {
        assert_eq!(L1Sketch::new(0.5, 1, 0).unwrap().width(), 32);
        assert_eq!(L1Sketch::new(0.1, 1, 0).unwrap().width(), 800);
        assert_eq!(L1Sketch::new(0.5, 3, 0).unwrap().width(), 96);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(L1Sketch::new(0.0, 1, 0).unwrap_err(), SketchError::DeltaOutOfRange(0.0));
        assert_eq!(L1Sketch::new(1.0, 1, 0).unwrap_err(), SketchError::DeltaOutOfRange(1.0));
        assert_eq!(L1Sketch::new(0.5, 2, 0).unwrap_err(), SketchError::BadGroupCount(2));
        assert_eq!(L1Sketch::new(0.5, 0, 0).unwrap_err(), SketchError::BadGroupCount(0));
    }

    #[test]
    fn coefficients_are_deterministic() {
        let a = L1Sketch::new(0.3, 1, 42).unwrap();
        let b = L1Sketch::new(0.3, 1, 42).unwrap();
        let c = L1Sketch::new(0.3, 1, 43).unwrap();
        for row in 0..a.width() {
            assert_eq!(a.coefficient(row, 17).to_bits(), b.coefficient(row, 17).to_bits());
        }
        assert!((0..a.width()).any(|r| a.coefficient(r, 17) != c.coefficient(r, 17)));
    }

    #[test]
    fn tan_kernel_matches_std() {
        let mut worst: f64 = 0.0;
        for k in 1..20_000 {
            let v = -0.49 + 0.98 * f64::from(k) / 20_000.0;
            let exact = (std::f64::consts::PI * v).tan();
            if exact != 0.0 {
                worst = worst.max(((tan_pi(v) - exact) / exact).abs());
            }
        }
        assert!(worst < 1e-13, "relative error {worst}");
    }

    #[test]
    fn coefficient_median_is_one() {
        let s = L1Sketch::new(0.5, 1, 9).unwrap();
        let mut abs: Vec<f64> = (0..200_001u64).map(|i| s.coefficient(0, i).abs()).collect();
        let med = median_in_place(&mut abs);
        assert!((med - 1.0).abs() < 0.02, "median |C| = {med}");
    }

    #[test]
    fn cancelling_updates_leave_rows_zero() {
        let mut s = L1Sketch::new(0.5, 1, 1).unwrap().with_buffer(0);
        s.update(5, 1);
        s.update(5, -1);
        assert!(s.rows().iter().all(|&r| r == 0.0));
        assert_eq!(s.estimate(), 0.0);
    }

    #[test]
    fn zero_stream_estimates_zero() {
        assert_eq!(L1Sketch::new(0.2, 3, 5).unwrap().estimate(), 0.0);
    }

    #[test]
    fn merge_adds_rows() {
        let mut a = L1Sketch::new(0.4, 1, 7).unwrap();
        let mut b = L1Sketch::new(0.4, 1, 7).unwrap();
        a.update(1, 3);
        b.update(2, -4);
        let mut both = L1Sketch::new(0.4, 1, 7).unwrap();
        both.update(1, 3);
        both.update(2, -4);
        let (ra, rb) = (a.settled_rows().into_owned(), b.settled_rows().into_owned());
        a.merge(&b).unwrap();
        let sum: Vec<i128> = ra.iter().zip(&rb).map(|(x, y)| x + y).collect();
        assert_eq!(a.settled_rows().as_ref(), sum.as_slice());
        assert_eq!(a.settled_rows(), both.settled_rows());
        let other_seed = L1Sketch::new(0.4, 1, 8).unwrap();
        assert_eq!(a.merge(&other_seed), Err(SketchError::Incompatible));
    }

    #[test]
    fn buffering_does_not_change_rows() {
        let updates: Vec<(u64, i64)> = (0..300).map(|k| ((k * 7919) % 53, (k as i64 % 11) - 5)).collect();
        let mut direct = L1Sketch::new(0.5, 1, 3).unwrap().with_buffer(0);
        let mut buffered = L1Sketch::new(0.5, 1, 3).unwrap().with_buffer(4);
        for &(i, v) in &updates {
            direct.update(i, v);
        }
        for &(i, v) in updates.iter().rev() {
            buffered.update(i, v);
        }
        assert_eq!(direct.settled_rows(), buffered.settled_rows());
    }

    #[test]
    fn serialization_round_trip() {
        let mut s = L1Sketch::new(0.5, 3, 11).unwrap().with_scale(0.25);
        for i in 0..40 {
            s.update(i, (i as i64) - 20);
        }
        let bytes = s.to_bytes();
        assert_eq!(bytes.len(), 32 + 8 * s.width());
        let back = L1Sketch::from_bytes(&bytes).unwrap();
        assert_eq!(back.width(), s.width());
        assert_eq!(back.groups(), 3);
        assert_eq!(back.scale(), 0.25);
        assert_eq!(back.estimate(), s.estimate());
        assert!(L1Sketch::from_bytes(&bytes[..40]).is_err());
    }

    #[test]
    fn even_median_averages_middle_pair() {
        assert_eq!(median_in_place(&mut [4.0, 1.0, 3.0, 2.0]), 2.5);
        assert_eq!(median_in_place(&mut [5.0, 1.0, 3.0]), 3.0);
    }

    #[test]
    fn exact_backend() {
        let mut e = ExactL1::new();
        e.update(1, 5);
        e.update(2, -3);
        e.update(1, -1);
        assert_eq!(e.norm(), 7);
        let mut f = ExactL1::new();
        f.update(2, 3);
        e.merge(&f);
        assert_eq!(e.norm(), 4);
        assert_eq!(e.entries().count(), 1);
    }
}
