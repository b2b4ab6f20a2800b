//! CSV point files and clustering result files.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use metric_dbscan::{Clustering, Dataset, Label, LabelSet, PointId};

/// Failures while reading or writing data files.
#[derive(Debug, thiserror::Error)]
pub enum DataError {
    /// The file could not be read or written.
    #[error("{}: {source}", path.display())]
    Io {
        /// File involved.
        path: PathBuf,
        /// Underlying error.
        source: std::io::Error,
    },
    /// The file content is malformed.
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        /// File involved.
        path: PathBuf,
        /// 1-based line number.
        line: usize,
        /// What went wrong.
        message: String,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DataError + '_ {
    move |source| DataError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn tokens(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
}

/// Parses point rows from text. Fields are separated by commas and/or
/// whitespace; a first line whose first field is not a number is a header.
/// Errors carry a 1-based line number.
pub fn parse_points(text: &str) -> Result<Dataset, (usize, String)> {
    let mut coords = Vec::new();
    let mut width = None;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let mut fields = tokens(line).peekable();
        let Some(first) = fields.peek() else {
            continue;
        };
        if i == 0 && first.parse::<f64>().is_err() {
            continue;
        }
        let start = coords.len();
        for t in fields {
            let x: f64 = t
                .parse()
                .map_err(|_| (lineno, format!("cannot parse {t:?} as a number")))?;
            if !x.is_finite() {
                return Err((lineno, format!("non-finite value {t:?}")));
            }
            coords.push(x);
        }
        let w = coords.len() - start;
        match width {
            None => width = Some(w),
            Some(expected) if expected != w => {
                return Err((lineno, format!("expected {expected} values, found {w}")));
            }
            Some(_) => {}
        }
    }
    let Some(dim) = width else {
        return Err((text.lines().count().max(1), "no data rows".into()));
    };
    Dataset::new(dim, coords).map_err(|e| (0, e.to_string()))
}

/// Loads a point file.
pub fn load_points(path: &Path) -> Result<Dataset, DataError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_points(&text).map_err(|(line, message)| DataError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    })
}

/// Writes one point per line, comma separated, at 17 significant digits so
/// that [`load_points`] reads back identical values.
pub fn save_points(path: &Path, data: &Dataset) -> Result<(), DataError> {
    let mut out = String::with_capacity(data.coords().len() * 24);
    for id in data.ids() {
        for (j, x) in data.point(id).iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{x:.16e}");
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(io_err(path))
}

/// Header line of clustering files.
pub const CLUSTERING_HEADER: &str = "point_index,label,cluster_id";

/// Writes `point_index,label,cluster_id` rows in ascending point order;
/// noise has cluster id `-1`.
pub fn save_clustering(
    path: &Path,
    labels: &LabelSet,
    clustering: &Clustering,
) -> Result<(), DataError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let write = |w: &mut BufWriter<fs::File>| -> std::io::Result<()> {
        writeln!(w, "{CLUSTERING_HEADER}")?;
        for (i, label) in labels.labels().iter().enumerate() {
            let id = clustering
                .cluster_of(PointId::from(i))
                .map_or(-1, i64::from);
            writeln!(w, "{i},{},{id}", label.name())?;
        }
        w.flush()
    };
    write(&mut w).map_err(io_err(path))
}

/// One row of a clustering file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClusteringRow {
    /// Point index.
    pub index: usize,
    /// Point label.
    pub label: Label,
    /// Cluster id, `None` for noise.
    pub cluster: Option<u32>,
}

/// Reads a file written by [`save_clustering`].
pub fn load_clustering(path: &Path) -> Result<Vec<ClusteringRow>, DataError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let parse_err = |line: usize, message: String| DataError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let [index, label, cluster] = f[..] else {
            return Err(parse_err(i + 1, "expected three fields".into()));
        };
        let index = index
            .parse()
            .map_err(|_| parse_err(i + 1, format!("bad index {index:?}")))?;
        let label = match label {
            "core" => Label::Core,
            "border" => Label::Border,
            "outlier" => Label::Outlier,
            other => return Err(parse_err(i + 1, format!("bad label {other:?}"))),
        };
        let cluster: i64 = cluster
            .parse()
            .map_err(|_| parse_err(i + 1, format!("bad cluster id {cluster:?}")))?;
        rows.push(ClusteringRow {
            index,
            label,
            cluster: u32::try_from(cluster).ok(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use metric_dbscan::{brute_force_dbscan, DbscanParams, DistanceOracle, Metric};

    #[test]
    fn parses_plain_rows() {
        let d = parse_points("0,0\n3,4\n").unwrap();
        assert_eq!((d.len(), d.dim()), (2, 2));
        assert_eq!(d.point(PointId(1)), &[3.0, 4.0]);
    }

    #[test]
    fn skips_header_and_accepts_whitespace() {
        let d = parse_points("x,y\n0 0\n3\t4\n\n").unwrap();
        assert_eq!(d.coords(), &[0.0, 0.0, 3.0, 4.0]);
    }

    #[test]
    fn reports_line_numbers() {
        assert_eq!(parse_points("1,2\n3\n").unwrap_err().0, 2);
        assert_eq!(parse_points("x,y\n1,2\n1,inf\n").unwrap_err().0, 3);
        assert_eq!(parse_points("1,2\nfoo,3\n").unwrap_err().0, 2);
        assert!(parse_points("").is_err());
        assert!(parse_points("x,y\n").is_err());
        assert_eq!(parse_points("nan,1\n").unwrap_err().0, 1);
    }

    #[test]
    fn points_round_trip_bit_exactly() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let coords: Vec<f64> = (0..300)
            .map(|_| rng.random_range(-1e6..1e6) * rng.random::<f64>().powi(7))
            .collect();
        let data = Dataset::new(3, coords).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        save_points(&path, &data).unwrap();
        let back = load_points(&path).unwrap();
        assert_eq!(back.dim(), 3);
        for (a, b) in data.coords().iter().zip(back.coords()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn clustering_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");

        let one = Dataset::new(1, vec![0.0]).unwrap();
        let o = DistanceOracle::new(&one, Metric::Euclidean).unwrap();
        let (l, c) = brute_force_dbscan(&o, &DbscanParams::new(1.0, 2)).unwrap();
        save_clustering(&path, &l, &c).unwrap();
        assert_eq!(
            fs::read_to_string(&path).unwrap(),
            "point_index,label,cluster_id\n0,outlier,-1\n"
        );

        let two = Dataset::new(1, vec![0.0, 1.0]).unwrap();
        let o = DistanceOracle::new(&two, Metric::Euclidean).unwrap();
        let (l, c) = brute_force_dbscan(&o, &DbscanParams::new(5.0, 1)).unwrap();
        save_clustering(&path, &l, &c).unwrap();
        assert_eq!(
            fs::read_to_string(&path).unwrap(),
            "point_index,label,cluster_id\n0,core,0\n1,core,0\n"
        );
    }

    #[test]
    fn cluster_count_survives_reload() {
        let data = Dataset::new(
            1,
            (0..60)
                .map(|i| f64::from(i % 20) + f64::from(i / 20) * 50.0)
                .collect(),
        )
        .unwrap();
        let o = DistanceOracle::new(&data, Metric::Euclidean).unwrap();
        let (l, c) = brute_force_dbscan(&o, &DbscanParams::new(1.0, 3)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        save_clustering(&path, &l, &c).unwrap();
        let rows = load_clustering(&path).unwrap();
        let mut ids: Vec<u32> = rows.iter().filter_map(|r| r.cluster).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), c.cluster_count());
        assert_eq!(c.cluster_count(), 3);
    }

    #[test]
    fn io_errors_name_the_path() {
        let err = load_points(Path::new("/definitely/not/here.csv")).unwrap_err();
        assert!(err.to_string().starts_with("/definitely/not/here.csv"));
    }
}
