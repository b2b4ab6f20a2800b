//! Planar blob data lifted into `ℝ^D` by a random affine map.
//!
//! Blob centers are uniform in a square box, blob points uniform in discs
//! around them, and outliers uniform in the box inflated by `spread` times its
//! side on every edge. The plane is then embedded with `x ↦ Ax + b`, `A` a `D×2`
//! matrix of independent standard normals and `b` a normal shift scaled by
//! the box size. The data keeps intrinsic dimension 2 whatever `D` is.

use std::str::FromStr;

use metric_dbscan::Dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Shape of a synthetic dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    /// Total number of points.
    pub n: usize,
    /// Ambient dimension `D`.
    pub dim: usize,
    /// Number of blobs.
    pub k_blobs: usize,
    /// Radius of each blob in the plane.
    pub blob_radius: f64,
    /// Number of outliers, included in `n`.
    pub outlier_count: usize,
    /// Side of the square holding the blob centers.
    pub box_size: f64,
    /// Outlier box margin, as a fraction of `box_size` added on every edge.
    pub spread: f64,
    /// RNG seed.
    pub seed: u64,
    /// Use `A = I`, `b = 0` instead of a random map (requires `dim = 2`).
    pub identity_embedding: bool,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n: 2000,
            dim: 16,
            k_blobs: 10,
            blob_radius: 2.0,
            outlier_count: 20,
            box_size: 100.0,
            spread: 0.05,
            seed: 0,
            identity_embedding: false,
        }
    }
}

impl SyntheticSpec {
    /// Checks the field ranges.
    pub fn validate(&self) -> Result<(), String> {
        if self.k_blobs == 0 {
            return Err("synthetic spec needs at least one blob".into());
        }
        if self.n < self.k_blobs + self.outlier_count {
            return Err("synthetic spec needs n >= k + outliers".into());
        }
        if self.dim < 2 {
            return Err("synthetic spec needs dim >= 2".into());
        }
        if !(self.blob_radius >= 0.0 && self.blob_radius.is_finite()) {
            return Err("blob radius must be finite and non-negative".into());
        }
        if !(self.box_size > 0.0 && self.box_size.is_finite()) {
            return Err("box size must be finite and positive".into());
        }
        if !(self.spread >= 0.0 && self.spread.is_finite()) {
            return Err("spread must be finite and non-negative".into());
        }
        if self.identity_embedding && self.dim != 2 {
            return Err("identity embedding requires dim = 2".into());
        }
        Ok(())
    }
}

/// Parses `key=value` pairs separated by commas, e.g.
/// `n=20000,dim=500,k=10,radius=2,outliers=200,box=100,spread=0.05,seed=1`. Missing keys
/// keep their defaults; `outliers` defaults to 1% of `n`.
impl FromStr for SyntheticSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut spec = SyntheticSpec::default();
        let mut outliers = None;
        for pair in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, got {pair:?}"))?;
            let bad = |_| format!("bad value for {key}: {value:?}");
            match key.trim() {
                "n" => spec.n = value.parse().map_err(bad)?,
                "dim" | "d" | "D" => spec.dim = value.parse().map_err(bad)?,
                "k" | "blobs" => spec.k_blobs = value.parse().map_err(bad)?,
                "radius" => {
                    spec.blob_radius = value.parse().map_err(|_| format!("bad radius {value:?}"))?
                }
                "outliers" => outliers = Some(value.parse().map_err(bad)?),
                "box" => spec.box_size = value.parse().map_err(|_| format!("bad box {value:?}"))?,
                "spread" => {
                    spec.spread = value.parse().map_err(|_| format!("bad spread {value:?}"))?
                }
                "seed" => spec.seed = value.parse().map_err(bad)?,
                "identity" => {
                    spec.identity_embedding = value
                        .parse()
                        .map_err(|_| format!("bad identity {value:?}"))?
                }
                other => return Err(format!("unknown synthetic key {other:?}")),
            }
        }
        spec.outlier_count = outliers.unwrap_or(spec.n / 100);
        spec.validate()?;
        Ok(spec)
    }
}

/// A generated dataset with its ground truth.
#[derive(Debug, Clone)]
pub struct Synthetic {
    /// Embedded points.
    pub dataset: Dataset,
    /// Blob index of every point, `None` for planted outliers.
    pub truth: Vec<Option<usize>>,
    /// The planar points before embedding.
    pub planar: Vec<[f64; 2]>,
    /// Blob centers in the plane.
    pub blob_centers: Vec<[f64; 2]>,
    /// `A`, row-major `D×2`.
    pub linear: Vec<f64>,
    /// `b`, length `D`.
    pub shift: Vec<f64>,
}

impl Synthetic {
    /// `A·x + b`.
    pub fn embed(&self, x: [f64; 2]) -> Vec<f64> {
        embed_point(&self.linear, &self.shift, x)
    }
}

fn embed_point(linear: &[f64], shift: &[f64], x: [f64; 2]) -> Vec<f64> {
    linear
        .chunks_exact(2)
        .zip(shift)
        .map(|(row, b)| row[0] * x[0] + row[1] * x[1] + b)
        .collect()
}

fn in_disc(rng: &mut ChaCha8Rng, center: [f64; 2], radius: f64) -> [f64; 2] {
    let angle = rng.random_range(0.0..std::f64::consts::TAU);
    let rho = radius * rng.random::<f64>().sqrt();
    [center[0] + rho * angle.cos(), center[1] + rho * angle.sin()]
}

/// Generates a dataset; identical specs give bit-identical output.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Synthetic, String> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let side = spec.box_size;
    let blob_centers: Vec<[f64; 2]> = (0..spec.k_blobs)
        .map(|_| [rng.random_range(0.0..side), rng.random_range(0.0..side)])
        .collect();

    let inliers = spec.n - spec.outlier_count;
    let mut planar = Vec::with_capacity(spec.n);
    let mut truth = Vec::with_capacity(spec.n);
    for i in 0..inliers {
        let b = i % spec.k_blobs;
        planar.push(in_disc(&mut rng, blob_centers[b], spec.blob_radius));
        truth.push(Some(b));
    }
    let (lo, hi) = (-spec.spread * side, (1.0 + spec.spread) * side);
    for _ in 0..spec.outlier_count {
        planar.push([rng.random_range(lo..hi), rng.random_range(lo..hi)]);
        truth.push(None);
    }

    let (linear, shift) = if spec.identity_embedding {
        (vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 0.0])
    } else {
        let linear: Vec<f64> = (0..2 * spec.dim)
            .map(|_| Distribution::<f64>::sample(&StandardNormal, &mut rng))
            .collect();
        let shift: Vec<f64> = (0..spec.dim)
            .map(|_| side * Distribution::<f64>::sample(&StandardNormal, &mut rng))
            .collect();
        (linear, shift)
    };

    let mut coords = Vec::with_capacity(spec.n * spec.dim);
    for x in &planar {
        coords.extend(embed_point(&linear, &shift, *x));
    }
    let dataset = Dataset::new(spec.dim, coords).map_err(|e| e.to_string())?;
    Ok(Synthetic {
        dataset,
        truth,
        planar,
        blob_centers,
        linear,
        shift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use metric_dbscan::PointId;

    fn norm(v: &[f64]) -> f64 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    #[test]
    fn parses_key_values() {
        let s: SyntheticSpec = "n=500,dim=8,k=3,radius=0.5,box=10,spread=0.2,seed=4"
            .parse()
            .unwrap();
        assert_eq!(s.spread, 0.2);
        assert_eq!((s.n, s.dim, s.k_blobs, s.seed), (500, 8, 3, 4));
        assert_eq!(s.outlier_count, 5);
        assert!("n=5,k=10".parse::<SyntheticSpec>().is_err());
        assert!("dim=1".parse::<SyntheticSpec>().is_err());
        assert!("foo=1".parse::<SyntheticSpec>().is_err());
        assert!("spread=-1".parse::<SyntheticSpec>().is_err());
    }

    #[test]
    fn single_blob_stays_within_its_diameter() {
        let spec = SyntheticSpec {
            n: 300,
            k_blobs: 1,
            outlier_count: 0,
            ..SyntheticSpec::default()
        };
        let s = generate_synthetic(&spec).unwrap();
        for a in &s.planar {
            for b in &s.planar {
                let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                assert!(d <= 2.0 * spec.blob_radius + 1e-12);
            }
        }
    }

    #[test]
    fn identity_embedding_is_a_no_op() {
        let spec = SyntheticSpec {
            dim: 2,
            identity_embedding: true,
            ..SyntheticSpec::default()
        };
        let s = generate_synthetic(&spec).unwrap();
        for (i, x) in s.planar.iter().enumerate() {
            assert_eq!(s.dataset.point(PointId::from(i)), x);
        }
    }

    #[test]
    fn embedded_differences_are_linear_images() {
        let s = generate_synthetic(&SyntheticSpec::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let i = rng.random_range(0..s.planar.len());
            let j = rng.random_range(0..s.planar.len());
            let (x, y) = (s.planar[i], s.planar[j]);
            let diff = [x[0] - y[0], x[1] - y[1]];
            let direct: Vec<f64> = s
                .linear
                .chunks_exact(2)
                .map(|r| r[0] * diff[0] + r[1] * diff[1])
                .collect();
            let embedded: Vec<f64> = s
                .dataset
                .point(PointId::from(i))
                .iter()
                .zip(s.dataset.point(PointId::from(j)))
                .map(|(a, b)| a - b)
                .collect();
            let (dn, en) = (norm(&direct), norm(&embedded));
            assert!((dn - en).abs() <= 1e-9 * dn.max(1.0), "{dn} vs {en}");
        }
    }

    #[test]
    fn embedding_keeps_blob_centers_apart() {
        let s = generate_synthetic(&SyntheticSpec::default()).unwrap();
        // smallest singular value of A from the 2×2 Gram matrix AᵀA
        let (mut g00, mut g01, mut g11) = (0.0, 0.0, 0.0);
        for r in s.linear.chunks_exact(2) {
            g00 += r[0] * r[0];
            g01 += r[0] * r[1];
            g11 += r[1] * r[1];
        }
        let tr = g00 + g11;
        let det = g00 * g11 - g01 * g01;
        let sigma_min = ((tr - (tr * tr - 4.0 * det).sqrt()) / 2.0).sqrt();
        let c = &s.blob_centers;
        for i in 0..c.len() {
            for j in i + 1..c.len() {
                let planar = ((c[i][0] - c[j][0]).powi(2) + (c[i][1] - c[j][1]).powi(2)).sqrt();
                let a = s.embed(c[i]);
                let b = s.embed(c[j]);
                let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
                assert!(norm(&diff) >= sigma_min * planar * (1.0 - 1e-9));
            }
        }
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let spec = SyntheticSpec {
            seed: 77,
            ..SyntheticSpec::default()
        };
        let a = generate_synthetic(&spec).unwrap();
        let b = generate_synthetic(&spec).unwrap();
        assert_eq!(a.dataset, b.dataset);
        assert_eq!(a.truth, b.truth);
        let other = generate_synthetic(&SyntheticSpec { seed: 78, ..spec }).unwrap();
        assert_ne!(a.dataset, other.dataset);
    }
}
