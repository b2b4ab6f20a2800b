//! Randomized Gonzalez sampling for k-center with outliers, and the coarse
//! partition it induces.
//!
//! Each round looks at the `ceil((1+δ)·z̃)` points farthest from the current
//! center set `E`, and adds a small uniform sample of them to `E`. The loop
//! stops once even those farthest points are within the stopping threshold,
//! so at most `ceil((1+δ)·z̃) − 1` points end up uncovered.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metric::{Dataset, DistanceOracle, PointId};
use crate::select::farthest_with_min;

/// Which acceleration variant builds the partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Every sampled point becomes a center; balls have radius `r`.
    Metric1,
    /// Each batch is thinned to a maximal independent set of its `< r`
    /// graph; centers are pairwise `≥ r` apart and balls have radius `2r`.
    Metric2,
}

impl Variant {
    /// Lower-case name as used on the command line.
    pub fn name(self) -> &'static str {
        match self {
            Variant::Metric1 => "metric1",
            Variant::Metric2 => "metric2",
        }
    }
}

/// Parameters of the coarse partition.
#[derive(Debug, Clone, PartialEq)]
pub struct GonzalezParams {
    /// Target radius; the stopping threshold is `r` (metric1) or `2r` (metric2).
    pub r: f64,
    /// Upper bound on the number of outliers.
    pub z_tilde: usize,
    /// Slack on the outlier count, `Q` holds `ceil((1+δ)·z̃)` points.
    pub delta: f64,
    /// Failure probability knob of the sampling bounds, in `(0, 1)`.
    pub eta: f64,
    /// Acceleration variant.
    pub variant: Variant,
    /// Seed of the sampling RNG.
    pub seed: u64,
    /// Cap on the number of batches; defaults to `10·(1 + ceil(n/z̃))`.
    pub max_rounds: Option<usize>,
}

impl GonzalezParams {
    /// Parameters with `δ = 1`, `η = 0.1` and the default round cap.
    pub fn new(r: f64, z_tilde: usize, variant: Variant, seed: u64) -> Self {
        GonzalezParams {
            r,
            z_tilde,
            delta: 1.0,
            eta: 0.1,
            variant,
            seed,
            max_rounds: None,
        }
    }

    /// Checks the parameters against a dataset of `n` points.
    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::Config("r must be a positive finite number"));
        }
        if self.z_tilde == 0 {
            return Err(Error::Config("z_tilde must be at least 1"));
        }
        if self.z_tilde >= n {
            return Err(Error::Config(
                "z_tilde must be smaller than the number of points",
            ));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::Config("delta must be a positive finite number"));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::Config("eta must lie strictly between 0 and 1"));
        }
        if self.max_rounds == Some(0) {
            return Err(Error::Config("max_rounds must be positive"));
        }
        if self.q_size() > n {
            return Err(Error::Config(
                "(1 + delta) * z_tilde exceeds the number of points",
            ));
        }
        Ok(())
    }

    /// `γ = z̃ / n`.
    pub fn gamma(&self, n: usize) -> f64 {
        self.z_tilde as f64 / n as f64
    }

    /// Size of the round-0 batch: `min(n, ceil(ln(1/η) / (1 − γ)))`.
    pub fn initial_batch_size(&self, n: usize) -> usize {
        initial_batch_size(n, self.gamma(n), self.eta)
    }

    /// Nominal size of later batches: `ceil((1+δ)/δ · ln(1/η))`.
    pub fn round_batch_size(&self) -> usize {
        round_batch_size(self.delta, self.eta)
    }

    /// `|Q_j| = ceil((1+δ)·z̃)`.
    pub fn q_size(&self) -> usize {
        q_size(self.delta, self.z_tilde)
    }

    /// Ball radius of the partition, also the stopping threshold.
    pub fn cover_radius(&self) -> f64 {
        match self.variant {
            Variant::Metric1 => self.r,
            Variant::Metric2 => 2.0 * self.r,
        }
    }

    /// Effective round cap for `n` points.
    pub fn max_rounds_for(&self, n: usize) -> usize {
        self.max_rounds
            .unwrap_or_else(|| 10 * (1 + n.div_ceil(self.z_tilde.max(1))))
    }
}

fn ceil_count(x: f64) -> usize {
    // `as` saturates, so an infinite bound becomes usize::MAX.
    (libm::ceil(x) as usize).max(1)
}

fn initial_batch_size(n: usize, gamma: f64, eta: f64) -> usize {
    ceil_count(libm::log(1.0 / eta) / (1.0 - gamma)).min(n)
}

fn round_batch_size(delta: f64, eta: f64) -> usize {
    ceil_count((1.0 + delta) / delta * libm::log(1.0 / eta))
}

fn q_size(delta: f64, z: usize) -> usize {
    ceil_count((1.0 + delta) * z as f64)
}

/// Points added to the center set in one round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Batch {
    /// 0 for the initial batch.
    pub round: usize,
    /// Sampled points, in sampling order.
    pub members: Vec<PointId>,
}

/// Draws the round-0 batch uniformly without replacement from all points.
pub fn sample_initial_batch(
    data: &Dataset,
    params: &GonzalezParams,
    rng: &mut ChaCha8Rng,
) -> Batch {
    let n = data.len();
    let size = params.initial_batch_size(n);
    Batch {
        round: 0,
        members: sample_from(rng, n, size, PointId::from),
    }
}

fn sample_from(
    rng: &mut ChaCha8Rng,
    len: usize,
    amount: usize,
    id: impl Fn(usize) -> PointId,
) -> Vec<PointId> {
    index::sample(rng, len, amount.min(len))
        .into_iter()
        .map(id)
        .collect()
}

/// Greedy maximal independent set of the graph joining members closer than
/// `r`: a member is kept iff it is at least `r` from every member kept before
/// it.
pub fn filtration_mis(batch: &Batch, r: f64, oracle: &DistanceOracle<'_>) -> Batch {
    let mut tally = oracle.tally();
    let mut kept: Vec<PointId> = Vec::with_capacity(batch.members.len());
    for &p in &batch.members {
        if kept.iter().all(|&k| tally.distance(k, p) >= r) {
            kept.push(p);
        }
    }
    Batch {
        round: batch.round,
        members: kept,
    }
}

/// Centers, assignment and uncovered set produced by the sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarsePartition {
    centers: Vec<PointId>,
    center_round: Vec<usize>,
    center_dists: Vec<f64>,
    nearest: Vec<u32>,
    nearest_dist: Vec<f64>,
    members: Vec<Vec<PointId>>,
    uncovered: Vec<PointId>,
    cover_radius: f64,
    rounds_run: usize,
    hit_max_rounds: bool,
}

impl CoarsePartition {
    /// The center set `E`, in insertion order.
    pub fn centers(&self) -> &[PointId] {
        &self.centers
    }

    /// Number of centers.
    pub fn num_centers(&self) -> usize {
        self.centers.len()
    }

    /// Round in which center `i` was added.
    pub fn center_round(&self, i: usize) -> usize {
        self.center_round[i]
    }

    /// Stored distance between centers `i` and `j`.
    #[inline]
    pub fn center_distance(&self, i: usize, j: usize) -> f64 {
        self.center_dists[i * self.centers.len() + j]
    }

    /// Index (into [`centers`](Self::centers)) of the nearest center of `p`,
    /// and the distance to it.
    #[inline]
    pub fn nearest(&self, p: PointId) -> (usize, f64) {
        (
            self.nearest[p.index()] as usize,
            self.nearest_dist[p.index()],
        )
    }

    /// Covered points whose nearest center is center `i`, ascending.
    pub fn members(&self, i: usize) -> &[PointId] {
        &self.members[i]
    }

    /// Points farther than the cover radius from every center, ascending.
    pub fn uncovered(&self) -> &[PointId] {
        &self.uncovered
    }

    /// Whether `p` lies outside every ball.
    #[inline]
    pub fn is_uncovered(&self, p: PointId) -> bool {
        self.nearest_dist[p.index()] > self.cover_radius
    }

    /// Ball radius: `r` for metric1, `2r` for metric2.
    pub fn cover_radius(&self) -> f64 {
        self.cover_radius
    }

    /// Number of batches drawn, including the initial one.
    pub fn rounds_run(&self) -> usize {
        self.rounds_run
    }

    /// True if the loop ended on the round cap rather than the stopping rule.
    pub fn hit_max_rounds(&self) -> bool {
        self.hit_max_rounds
    }

    /// Number of points the partition was built over.
    pub fn num_points(&self) -> usize {
        self.nearest.len()
    }
}

/// Running state of the sampler: the center set and every point's distance
/// to it.
struct Grower<'o, 'a> {
    oracle: &'o DistanceOracle<'a>,
    dist: Vec<f64>,
    nearest: Vec<u32>,
    centers: Vec<PointId>,
    center_round: Vec<usize>,
}

#[cfg(feature = "parallel")]
const UPDATE_CHUNK: usize = 4096;

fn absorb_chunk(
    oracle: &DistanceOracle<'_>,
    center: PointId,
    idx: u32,
    base: usize,
    dist: &mut [f64],
    nearest: &mut [u32],
) {
    let mut tally = oracle.tally();
    for (i, (d, nn)) in dist.iter_mut().zip(nearest.iter_mut()).enumerate() {
        let x = tally.distance(center, PointId::from(base + i));
        // strict: on ties the earlier center keeps the point
        if x < *d {
            *d = x;
            *nn = idx;
        }
    }
}

impl<'o, 'a> Grower<'o, 'a> {
    fn new(oracle: &'o DistanceOracle<'a>) -> Self {
        let n = oracle.len();
        Grower {
            oracle,
            dist: vec![f64::INFINITY; n],
            nearest: vec![u32::MAX; n],
            centers: Vec::new(),
            center_round: Vec::new(),
        }
    }

    fn absorb(&mut self, batch: &Batch) {
        for &c in &batch.members {
            let idx = self.centers.len() as u32;
            self.centers.push(c);
            self.center_round.push(batch.round);
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                let oracle = self.oracle;
                self.dist
                    .par_chunks_mut(UPDATE_CHUNK)
                    .zip(self.nearest.par_chunks_mut(UPDATE_CHUNK))
                    .enumerate()
                    .for_each(|(k, (d, nn))| absorb_chunk(oracle, c, idx, k * UPDATE_CHUNK, d, nn));
            }
            #[cfg(not(feature = "parallel"))]
            absorb_chunk(self.oracle, c, idx, 0, &mut self.dist, &mut self.nearest);
        }
    }

    fn next_batch(&self, rng: &mut ChaCha8Rng, q: &[PointId], size: usize, round: usize) -> Batch {
        Batch {
            round,
            members: sample_from(rng, q.len(), size, |i| q[i]),
        }
    }
}

/// Runs the sampler with the distance-based stopping rule and assembles the
/// coarse partition.
///
/// Every new center updates the distance-to-`E` of all `n` points. Under
/// [`Variant::Metric2`] each batch, the initial one included, is passed
/// through [`filtration_mis`] before it joins `E`. The loop stops when the
/// `ceil((1+δ)·z̃)` farthest points are all within the cover radius of `E`,
/// or when the round cap is reached (reported by
/// [`CoarsePartition::hit_max_rounds`]).
pub fn build_coarse_partition(
    oracle: &DistanceOracle<'_>,
    params: &GonzalezParams,
) -> Result<CoarsePartition> {
    let data = oracle.dataset();
    let n = data.len();
    params.validate(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let threshold = params.cover_radius();
    let q_size = params.q_size();
    let round_size = params.round_batch_size();
    let max_rounds = params.max_rounds_for(n);
    let filter = |b: Batch| match params.variant {
        Variant::Metric1 => b,
        Variant::Metric2 => filtration_mis(&b, params.r, oracle),
    };

    let mut grower = Grower::new(oracle);
    grower.absorb(&filter(sample_initial_batch(data, params, &mut rng)));
    let mut rounds_run = 1;
    let mut hit_max_rounds = false;
    loop {
        let (q, q_dist) = farthest_with_min(&grower.dist, q_size)?;
        if q_dist <= threshold {
            break;
        }
        if rounds_run >= max_rounds {
            hit_max_rounds = true;
            break;
        }
        let batch = grower.next_batch(&mut rng, &q, round_size, rounds_run);
        grower.absorb(&filter(batch));
        rounds_run += 1;
    }

    let Grower {
        dist,
        nearest,
        centers,
        center_round,
        ..
    } = grower;
    let k = centers.len();
    let mut center_dists = vec![0.0; k * k];
    let mut tally = oracle.tally();
    for i in 0..k {
        for j in i + 1..k {
            let d = tally.distance(centers[i], centers[j]);
            center_dists[i * k + j] = d;
            center_dists[j * k + i] = d;
        }
    }
    drop(tally);

    let mut members = vec![Vec::new(); k];
    let mut uncovered = Vec::new();
    for p in data.ids() {
        if dist[p.index()] > threshold {
            uncovered.push(p);
        } else {
            members[nearest[p.index()] as usize].push(p);
        }
    }

    Ok(CoarsePartition {
        centers,
        center_round,
        center_dists,
        nearest,
        nearest_dist: dist,
        members,
        uncovered,
        cover_radius: threshold,
        rounds_run,
        hit_max_rounds,
    })
}

/// The plain randomized Gonzalez procedure with a fixed number of batches
/// and no stopping rule or filtration. `z` is the outlier count of the
/// k-center instance. Returns the center set.
pub fn randomized_gonzalez(
    oracle: &DistanceOracle<'_>,
    z: usize,
    delta: f64,
    eta: f64,
    rounds: usize,
    seed: u64,
) -> Result<Vec<PointId>> {
    let n = oracle.len();
    if rounds == 0 {
        return Err(Error::Config("at least one round is required"));
    }
    let params = GonzalezParams {
        delta,
        eta,
        ..GonzalezParams::new(1.0, z, Variant::Metric1, seed)
    };
    params.validate(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grower = Grower::new(oracle);
    grower.absorb(&sample_initial_batch(oracle.dataset(), &params, &mut rng));
    for round in 1..rounds {
        let (q, _) = farthest_with_min(&grower.dist, params.q_size())?;
        let batch = grower.next_batch(&mut rng, &q, params.round_batch_size(), round);
        grower.absorb(&batch);
    }
    Ok(grower.centers)
}
