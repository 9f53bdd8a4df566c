//! Splitting the source into `K` disjoint, non-empty subsets.
//!
//! Labels are zero-based internally (`0..k`); file formats write them one-based.

use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::{Dataset, MetaValue};
use crate::linalg::{self, Matrix};
use crate::rng::SeedStream;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionMethod {
    Metadata,
    KMeans,
    Random,
}

impl PartitionMethod {
    pub fn name(self) -> &'static str {
        match self {
            PartitionMethod::Metadata => "metadata",
            PartitionMethod::KMeans => "kmeans",
            PartitionMethod::Random => "random",
        }
    }
}

/// Assignment of source rows to subsets. Every subset is non-empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    labels: Vec<usize>,
    members: Vec<Vec<usize>>,
    method: PartitionMethod,
}

impl Partition {
    pub fn new(labels: Vec<usize>, k: usize, method: PartitionMethod) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter {
                name: "k",
                reason: "must be at least 1",
            });
        }
        let mut members = vec![Vec::new(); k];
        for (row, &label) in labels.iter().enumerate() {
            if label >= k {
                return Err(Error::InvalidParameter {
                    name: "partition label",
                    reason: "label outside 0..k",
                });
            }
            members[label].push(row);
        }
        if let Some(subset) = members.iter().position(Vec::is_empty) {
            return Err(Error::EmptySubset { subset });
        }
        Ok(Partition {
            labels,
            members,
            method,
        })
    }

    pub fn k(&self) -> usize {
        self.members.len()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn method(&self) -> PartitionMethod {
        self.method
    }

    /// Row indices of subset `k`, ascending.
    pub fn members(&self, k: usize) -> &[usize] {
        &self.members[k]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }
}

/// Bins rows by a numeric metadata column. Bins are left-open and right-closed:
/// with boundaries `[b1, b2]` the bins are `(-inf, b1]`, `(b1, b2]`, `(b2, inf)`.
pub fn partition_by_metadata(source: &Dataset, column: &str, boundaries: &[f64]) -> Result<Partition> {
    if boundaries.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter {
            name: "boundaries",
            reason: "must be strictly increasing",
        });
    }
    let values = source.numeric_meta(column)?;
    let labels = values
        .iter()
        .map(|&x| boundaries.iter().filter(|&&b| x > b).count())
        .collect();
    Partition::new(labels, boundaries.len() + 1, PartitionMethod::Metadata)
}

/// One subset per distinct value of a metadata column (e.g. hospital id).
/// Subsets follow the sorted order of the distinct values, which are returned
/// alongside the partition.
pub fn partition_by_category(source: &Dataset, column: &str) -> Result<(Partition, Vec<MetaValue>)> {
    let values = &source.meta_column(column)?.values;
    let mut categories: Vec<MetaValue> = Vec::new();
    for v in values {
        if let Err(pos) = categories.binary_search_by(|c| c.total_cmp(v)) {
            categories.insert(pos, v.clone());
        }
    }
    let labels = values
        .iter()
        .map(|v| {
            categories
                .binary_search_by(|c| c.total_cmp(v))
                .unwrap_or_default()
        })
        .collect();
    let k = categories.len();
    Ok((Partition::new(labels, k, PartitionMethod::Metadata)?, categories))
}

/// Balanced random assignment: shuffle the rows, then deal labels round-robin
/// so subset sizes differ by at most one.
pub fn partition_random(n_source: usize, k: usize, seed: u64) -> Result<Partition> {
    if k == 0 || k > n_source {
        return Err(Error::TooManySubsets { k, n: n_source });
    }
    let mut order: Vec<usize> = (0..n_source).collect();
    SeedStream::new(seed).shuffle(&mut order);
    let mut labels = vec![0; n_source];
    for (position, &row) in order.iter().enumerate() {
        labels[row] = position % k;
    }
    Partition::new(labels, k, PartitionMethod::Random)
}

/// Principal component model fitted by SVD of the column-centered matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `p x c`, orthonormal columns.
    pub components: Matrix,
    /// Variance along each component, nonincreasing.
    pub explained_variance: Vec<f64>,
    /// Sum of the variances of all original columns.
    pub total_variance: f64,
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.components.ncols()
    }

    pub fn explained_variance_ratio(&self) -> Vec<f64> {
        self.explained_variance
            .iter()
            .map(|v| v / self.total_variance)
            .collect()
    }

    /// `(x - mean) * components`.
    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        self.center(x)?.matmul(&self.components)
    }

    /// `scores * components^T + mean`.
    pub fn inverse_transform(&self, scores: &Matrix) -> Result<Matrix> {
        let mut x = scores.matmul(&self.components.transpose())?;
        for i in 0..x.nrows() {
            for (v, m) in x.row_mut(i).iter_mut().zip(&self.mean) {
                *v += m;
            }
        }
        Ok(x)
    }

    fn center(&self, x: &Matrix) -> Result<Matrix> {
        if x.ncols() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                context: "PCA input columns",
                expected: self.mean.len(),
                found: x.ncols(),
            });
        }
        let mut centered = x.clone();
        for i in 0..centered.nrows() {
            for (v, m) in centered.row_mut(i).iter_mut().zip(&self.mean) {
                *v -= m;
            }
        }
        Ok(centered)
    }
}

pub fn fit_pca(features: &Matrix, n_components: usize) -> Result<PcaModel> {
    let (n, p) = (features.nrows(), features.ncols());
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "rows",
            reason: "PCA needs at least two rows",
        });
    }
    if n_components == 0 || n_components > n.min(p) {
        return Err(Error::InvalidParameter {
            name: "n_components",
            reason: "must be between 1 and min(rows, columns)",
        });
    }
    let mean = features.column_means();
    let mut centered = features.clone();
    for i in 0..n {
        for (v, m) in centered.row_mut(i).iter_mut().zip(&mean) {
            *v -= m;
        }
    }
    let decomposition = linalg::svd(&centered);
    let denom = (n - 1) as f64;
    let variances: Vec<f64> = decomposition
        .singular_values
        .iter()
        .map(|s| s * s / denom)
        .collect();
    let total_variance: f64 = variances.iter().sum();
    if total_variance == 0.0 {
        return Err(Error::Degenerate("all columns are constant"));
    }
    let mut components = Matrix::zeros(p, n_components);
    for i in 0..p {
        for j in 0..n_components {
            components.set(i, j, decomposition.v.get(i, j));
        }
    }
    Ok(PcaModel {
        mean,
        components,
        explained_variance: variances[..n_components].to_vec(),
        total_variance,
    })
}

/// Column z-scores using the sample standard deviation. Constant columns are
/// centered only.
pub fn standardize(features: &Matrix) -> Matrix {
    let n = features.nrows();
    let mean = features.column_means();
    let mut sd = vec![0.0; features.ncols()];
    for row in features.rows_iter() {
        for ((s, &x), m) in sd.iter_mut().zip(row).zip(&mean) {
            *s += (x - m) * (x - m);
        }
    }
    for s in sd.iter_mut() {
        *s = if n > 1 { libm::sqrt(*s / (n - 1) as f64) } else { 0.0 };
    }
    let mut out = features.clone();
    for i in 0..n {
        for (j, v) in out.row_mut(i).iter_mut().enumerate() {
            *v -= mean[j];
            if sd[j] > 0.0 {
                *v /= sd[j];
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansOptions {
    pub max_iters: usize,
    /// Cluster on column z-scores instead of raw values.
    pub standardize: bool,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        KMeansOptions {
            max_iters: 300,
            standardize: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub partition: Partition,
    /// Centroids in the (possibly standardized) clustering space.
    pub centroids: Matrix,
    /// Within-cluster sum of squares after each centroid update.
    pub inertia_trace: Vec<f64>,
    pub converged: bool,
}

impl KMeansFit {
    pub fn inertia(&self) -> f64 {
        self.inertia_trace.last().copied().unwrap_or(0.0)
    }
}

/// K-means with default options (z-scored features, 300 Lloyd iterations).
pub fn kmeans(features: &Matrix, k: usize, seed: u64) -> Result<Partition> {
    kmeans_with(features, k, seed, &KMeansOptions::default()).map(|fit| fit.partition)
}

/// Lloyd's algorithm from a k-means++ start. Iterates until assignments stop
/// changing or `max_iters` is reached.
pub fn kmeans_with(features: &Matrix, k: usize, seed: u64, options: &KMeansOptions) -> Result<KMeansFit> {
    let n = features.nrows();
    if k == 0 || k > n {
        return Err(Error::TooManySubsets { k, n });
    }
    let data = if options.standardize {
        standardize(features)
    } else {
        features.clone()
    };
    let mut rng = SeedStream::new(seed);
    let mut centroids = plus_plus_init(&data, k, &mut rng);
    let mut labels = assign(&data, &centroids);
    repair_empty(&data, &mut labels, &mut centroids);

    let mut inertia_trace = Vec::new();
    let mut converged = false;
    for _ in 0..options.max_iters.max(1) {
        centroids = centroids_of(&data, &labels, k);
        let inertia = inertia(&data, &labels, &centroids);
        if let Some(&last) = inertia_trace.last() {
            debug_assert!(
                inertia <= last * (1.0 + 1e-12) + 1e-12,
                "k-means objective increased: {last} -> {inertia}"
            );
        }
        inertia_trace.push(inertia);

        let mut next = assign(&data, &centroids);
        repair_empty(&data, &mut next, &mut centroids);
        if next == labels {
            converged = true;
            break;
        }
        labels = next;
    }
    Ok(KMeansFit {
        partition: Partition::new(labels, k, PartitionMethod::KMeans)?,
        centroids,
        inertia_trace,
        converged,
    })
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn plus_plus_init(data: &Matrix, k: usize, rng: &mut SeedStream) -> Matrix {
    let n = data.nrows();
    let mut centroids = Matrix::zeros(k, data.ncols());
    let first = rng.index(n);
    centroids.row_mut(0).copy_from_slice(data.row(first));
    let mut nearest: Vec<f64> = data.rows_iter().map(|r| sq_dist(r, centroids.row(0))).collect();
    for c in 1..k {
        let total: f64 = nearest.iter().sum();
        let chosen = if total > 0.0 {
            let mut target = rng.uniform() * total;
            let mut pick = n - 1;
            for (i, &d) in nearest.iter().enumerate() {
                if target < d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            pick
        } else {
            rng.index(n)
        };
        centroids.row_mut(c).copy_from_slice(data.row(chosen));
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(sq_dist(data.row(i), centroids.row(c)));
        }
    }
    centroids
}

/// Nearest centroid per row; ties go to the lowest centroid index.
fn assign(data: &Matrix, centroids: &Matrix) -> Vec<usize> {
    data.rows_iter()
        .map(|r| {
            let mut best = (0, f64::INFINITY);
            for (c, centroid) in centroids.rows_iter().enumerate() {
                let d = sq_dist(r, centroid);
                if d < best.1 {
                    best = (c, d);
                }
            }
            best.0
        })
        .collect()
}

/// Moves the point farthest from its centroid into each empty cluster.
fn repair_empty(data: &Matrix, labels: &mut [usize], centroids: &mut Matrix) {
    let k = centroids.nrows();
    loop {
        let mut sizes = vec![0usize; k];
        for &l in labels.iter() {
            sizes[l] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        let mut farthest: Option<(usize, f64)> = None;
        for (i, &l) in labels.iter().enumerate() {
            if sizes[l] < 2 {
                continue;
            }
            let d = sq_dist(data.row(i), centroids.row(l));
            if farthest.is_none_or(|(_, best)| d > best) {
                farthest = Some((i, d));
            }
        }
        // k <= n guarantees some cluster holds two or more rows
        let (row, _) = farthest.expect("a cluster with at least two rows");
        labels[row] = empty;
        centroids.row_mut(empty).copy_from_slice(data.row(row));
    }
}

fn centroids_of(data: &Matrix, labels: &[usize], k: usize) -> Matrix {
    let mut sums = Matrix::zeros(k, data.ncols());
    let mut counts = vec![0usize; k];
    for (r, &l) in data.rows_iter().zip(labels) {
        counts[l] += 1;
        for (s, x) in sums.row_mut(l).iter_mut().zip(r) {
            *s += x;
        }
    }
    for (c, &count) in counts.iter().enumerate() {
        let count = count as f64;
        sums.row_mut(c).iter_mut().for_each(|s| *s /= count);
    }
    sums
}

fn inertia(data: &Matrix, labels: &[usize], centroids: &Matrix) -> f64 {
    data.rows_iter()
        .zip(labels)
        .map(|(r, &l)| sq_dist(r, centroids.row(l)))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::MetaColumn;

    fn with_meta(values: Vec<f64>) -> Dataset {
        let n = values.len();
        Dataset::new(Matrix::zeros(n, 1), vec![0.0; n])
            .unwrap()
            .with_meta(MetaColumn::numeric("z", values))
            .unwrap()
    }

    #[test]
    fn metadata_bins_are_right_closed() {
        let data = with_meta(vec![1.0, 2.0, 4.0, 6.0]);
        let p = partition_by_metadata(&data, "z", &[3.0, 5.0]).unwrap();
        assert_eq!(p.labels(), &[0, 0, 1, 2]);
        assert_eq!(p.k(), 3);

        let edge = with_meta(vec![3.0, 5.0, 5.5]);
        let p = partition_by_metadata(&edge, "z", &[3.0, 5.0]).unwrap();
        assert_eq!(p.labels(), &[0, 1, 2]);
    }

    #[test]
    fn metadata_empty_bin_is_an_error() {
        let data = with_meta(vec![1.0, 2.0, 6.0]);
        assert_eq!(
            partition_by_metadata(&data, "z", &[3.0, 5.0]).unwrap_err(),
            Error::EmptySubset { subset: 1 }
        );
        assert!(matches!(
            partition_by_metadata(&data, "t", &[3.0]),
            Err(Error::UnknownColumn(_))
        ));
        assert!(partition_by_metadata(&data, "z", &[5.0, 3.0]).is_err());
    }

    #[test]
    fn categories_become_subsets() {
        let ids = vec![3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 3.0];
        let (p, cats) = partition_by_category(&with_meta(ids), "z").unwrap();
        assert_eq!(p.k(), 5);
        assert_eq!(cats[0], MetaValue::Number(1.0));
        assert_eq!(p.labels(), &[1, 0, 2, 0, 3, 4, 1]);
    }

    #[test]
    fn random_partition_is_balanced() {
        let p = partition_random(10, 5, 1).unwrap();
        assert_eq!(p.sizes(), vec![2; 5]);
        let mut sizes = partition_random(11, 5, 1).unwrap().sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![2, 2, 2, 2, 3]);
        assert_eq!(partition_random(11, 5, 9), partition_random(11, 5, 9));
        assert!(partition_random(3, 4, 0).is_err());
    }

    #[test]
    fn kmeans_single_point() {
        let x = Matrix::from_rows(&[[2.0, -1.0]]).unwrap();
        let fit = kmeans_with(&x, 1, 0, &KMeansOptions::default()).unwrap();
        assert_eq!(fit.partition.labels(), &[0]);
        let raw = kmeans_with(
            &x,
            1,
            0,
            &KMeansOptions {
                standardize: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(raw.centroids.row(0), &[2.0, -1.0]);
        assert!(kmeans(&x, 2, 0).is_err());
    }

    #[test]
    fn kmeans_duplicate_points_keep_clusters_nonempty() {
        let x = Matrix::from_rows(&[[1.0], [1.0], [1.0], [1.0]]).unwrap();
        let p = kmeans(&x, 3, 5).unwrap();
        assert!(p.sizes().iter().all(|&s| s > 0));
    }

    #[test]
    fn pca_on_a_line() {
        let x = Matrix::from_rows(&[[0.0, 0.0], [1.0, 2.0], [2.0, 4.0], [-3.0, -6.0]]).unwrap();
        let model = fit_pca(&x, 2).unwrap();
        let ratio = model.explained_variance_ratio();
        assert!((ratio[0] - 1.0).abs() < 1e-8);
        assert!(fit_pca(&x, 3).is_err());
        let constant = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert_eq!(fit_pca(&constant, 1).unwrap_err(), Error::Degenerate("all columns are constant"));
    }

    #[test]
    fn standardize_constant_column() {
        let x = Matrix::from_rows(&[[1.0, 5.0], [3.0, 5.0]]).unwrap();
        let z = standardize(&x);
        assert_eq!(z.column(1), vec![0.0, 0.0]);
        assert!((z.get(0, 0) + z.get(1, 0)).abs() < 1e-15);
    }
}
