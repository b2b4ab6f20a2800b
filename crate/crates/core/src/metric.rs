//! Point storage and distance oracles.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use core::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Dense index of a point inside a [`Dataset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointId(pub u32);

impl PointId {
    /// The id as a slice index.
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for PointId {
    #[inline]
    fn from(i: usize) -> Self {
        debug_assert!(i <= u32::MAX as usize);
        PointId(i as u32)
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// An immutable set of `n` points in `dim` dimensions, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    coords: Vec<f64>,
}

impl Dataset {
    /// Wraps a row-major coordinate buffer.
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::RaggedData {
                len: coords.len(),
                dim,
            });
        }
        let n = coords.len() / dim;
        if n > u32::MAX as usize {
            return Err(Error::TooManyPoints(n));
        }
        if let Some(pos) = coords.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                point: pos / dim,
                dim: pos % dim,
            });
        }
        Ok(Dataset { dim, coords })
    }

    /// Builds a dataset from equally sized rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptyDataset)?.as_ref().len();
        let mut coords = Vec::with_capacity(first * rows.len());
        for (row, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != first {
                return Err(Error::RowWidth {
                    row,
                    expected: first,
                    found: r.len(),
                });
            }
            coords.extend_from_slice(r);
        }
        Dataset::new(first, coords)
    }

    /// Number of points.
    #[inline]
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    /// Always false; a dataset holds at least one point.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Dimension of every point.
    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coordinates of one point.
    #[inline]
    pub fn point(&self, id: PointId) -> &[f64] {
        let start = id.index() * self.dim;
        &self.coords[start..start + self.dim]
    }

    /// The raw row-major buffer.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Iterator over all ids in ascending order.
    pub fn ids(&self) -> impl ExactSizeIterator<Item = PointId> + Clone {
        (0..self.len() as u32).map(PointId)
    }
}

/// The built-in distance functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    /// L2 distance.
    Euclidean,
    /// L1 distance.
    Manhattan,
    /// Angle between the two vectors, in `[0, π]`.
    Angular,
}

impl Metric {
    /// Lower-case name as used on the command line.
    pub fn name(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Manhattan => "manhattan",
            Metric::Angular => "angular",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "manhattan" => Ok(Metric::Manhattan),
            "angular" => Ok(Metric::Angular),
            _ => Err(Error::Config(
                "metric must be euclidean, manhattan or angular",
            )),
        }
    }
}

const LANES: usize = 8;

#[inline]
fn squared_l2(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; LANES];
    let mut ca = a.chunks_exact(LANES);
    let mut cb = b.chunks_exact(LANES);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for l in 0..LANES {
            let d = x[l] - y[l];
            acc[l] += d * d;
        }
    }
    let mut tail = 0.0;
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        let d = x - y;
        tail += d * d;
    }
    acc.iter().sum::<f64>() + tail
}

#[inline]
fn l1(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; LANES];
    let mut ca = a.chunks_exact(LANES);
    let mut cb = b.chunks_exact(LANES);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for l in 0..LANES {
            acc[l] += libm::fabs(x[l] - y[l]);
        }
    }
    let mut tail = 0.0;
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        tail += libm::fabs(x - y);
    }
    acc.iter().sum::<f64>() + tail
}

// Angle via 2·atan2(|u − v|, |u + v|) on the normalized vectors; unlike
// acos(u·v) this stays accurate for nearly parallel vectors.
#[inline]
fn angle(a: &[f64], inv_a: f64, b: &[f64], inv_b: f64) -> f64 {
    let mut diff = 0.0;
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(b) {
        let u = x * inv_a;
        let v = y * inv_b;
        diff += (u - v) * (u - v);
        sum += (u + v) * (u + v);
    }
    2.0 * libm::atan2(libm::sqrt(diff), libm::sqrt(sum))
}

/// A distance function bound to a dataset, counting every evaluation.
///
/// The oracle is `Sync`; concurrent workers either call [`distance`] directly
/// or take a [`Tally`], which counts locally and merges on drop.
///
/// [`distance`]: DistanceOracle::distance
#[derive(Debug)]
pub struct DistanceOracle<'a> {
    data: &'a Dataset,
    metric: Metric,
    inv_norms: Vec<f64>,
    evals: AtomicU64,
}

impl<'a> DistanceOracle<'a> {
    /// Binds `metric` to `data`.
    ///
    /// Fails with [`Error::ZeroVector`] if the metric is angular and some
    /// point is the zero vector.
    pub fn new(data: &'a Dataset, metric: Metric) -> Result<Self> {
        let inv_norms = if metric == Metric::Angular {
            let mut inv = Vec::with_capacity(data.len());
            for id in data.ids() {
                let norm = libm::sqrt(data.point(id).iter().map(|x| x * x).sum::<f64>());
                if norm == 0.0 || !norm.is_finite() {
                    return Err(Error::ZeroVector(id));
                }
                inv.push(1.0 / norm);
            }
            inv
        } else {
            Vec::new()
        };
        Ok(DistanceOracle {
            data,
            metric,
            inv_norms,
            evals: AtomicU64::new(0),
        })
    }

    /// The underlying dataset.
    #[inline]
    pub fn dataset(&self) -> &'a Dataset {
        self.data
    }

    /// The metric kind.
    #[inline]
    pub fn metric(&self) -> Metric {
        self.metric
    }

    /// Number of points in the dataset.
    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    /// Always false.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// `d(a, b)`; counts one evaluation.
    #[inline]
    pub fn distance(&self, a: PointId, b: PointId) -> f64 {
        self.evals.fetch_add(1, Ordering::Relaxed);
        self.eval(a, b)
    }

    /// A local counter handle for hot loops.
    #[inline]
    pub fn tally(&self) -> Tally<'_, 'a> {
        Tally {
            oracle: self,
            count: 0,
        }
    }

    /// Total evaluations so far.
    pub fn evaluations(&self) -> u64 {
        self.evals.load(Ordering::Relaxed)
    }

    /// Sets the evaluation counter back to zero.
    pub fn reset_evaluations(&self) {
        self.evals.store(0, Ordering::Relaxed);
    }

    #[inline]
    fn eval(&self, a: PointId, b: PointId) -> f64 {
        let x = self.data.point(a);
        let y = self.data.point(b);
        match self.metric {
            Metric::Euclidean => libm::sqrt(squared_l2(x, y)),
            Metric::Manhattan => l1(x, y),
            Metric::Angular => angle(x, self.inv_norms[a.index()], y, self.inv_norms[b.index()]),
        }
    }
}

/// Worker-local evaluation counter; adds its count to the oracle when dropped.
#[derive(Debug)]
pub struct Tally<'o, 'a> {
    oracle: &'o DistanceOracle<'a>,
    count: u64,
}

impl Tally<'_, '_> {
    /// `d(a, b)`; counts one evaluation locally.
    #[inline]
    pub fn distance(&mut self, a: PointId, b: PointId) -> f64 {
        self.count += 1;
        self.oracle.eval(a, b)
    }

    /// Evaluations counted by this handle and not yet merged.
    pub fn pending(&self) -> u64 {
        self.count
    }
}

impl Drop for Tally<'_, '_> {
    fn drop(&mut self) {
        if self.count > 0 {
            self.oracle.evals.fetch_add(self.count, Ordering::Relaxed);
        }
    }
}

/// Minimum distance between two non-empty point sets.
pub fn set_distance(oracle: &DistanceOracle<'_>, u: &[PointId], v: &[PointId]) -> Result<f64> {
    if u.is_empty() || v.is_empty() {
        return Err(Error::Precondition("set_distance needs two non-empty sets"));
    }
    let mut tally = oracle.tally();
    let mut best = f64::INFINITY;
    for &a in u {
        for &b in v {
            let d = tally.distance(a, b);
            if d < best {
                best = d;
            }
        }
    }
    Ok(best)
}

/// Single-scan diameter estimate: the farthest distance from one seed-chosen
/// point. The value lies in `[Δ/2, Δ]` and costs exactly `n − 1` evaluations.
pub fn estimate_diameter(oracle: &DistanceOracle<'_>, seed: u64) -> f64 {
    let n = oracle.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let anchor = PointId(rng.random_range(0..n as u32));
    let mut tally = oracle.tally();
    let mut far = 0.0f64;
    for q in oracle.dataset().ids() {
        if q != anchor {
            far = far.max(tally.distance(anchor, q));
        }
    }
    far
}
