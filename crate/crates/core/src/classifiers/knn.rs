use crate::error::{Error, Result};
use crate::features::FeatureVector;

/// Lazy k-nearest-neighbour learner over Euclidean distance.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    pub k: usize,
    pub features: Vec<FeatureVector>,
    pub labels: Vec<bool>,
}

impl KnnModel {
    pub fn fit(k: usize, features: &[FeatureVector], labels: &[bool]) -> Result<Self> {
        assert_eq!(features.len(), labels.len());
        if k == 0 || k > features.len() {
            return Err(Error::InvalidK { k, n: features.len() });
        }
        Ok(Self {
            k,
            features: features.to_vec(),
            labels: labels.to_vec(),
        })
    }

    /// Indices of the `k` nearest training examples. Equal distances are
    /// ordered by training index.
    pub fn neighbors(&self, query: &FeatureVector) -> Vec<usize> {
        let mut by_distance: Vec<(f64, usize)> = self
            .features
            .iter()
            .enumerate()
            .map(|(i, f)| (f.squared_distance(query).sqrt(), i))
            .collect();
        by_distance.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        by_distance.into_iter().take(self.k).map(|(_, i)| i).collect()
    }

    /// Fraction of positive labels among the `k` nearest neighbours.
    pub fn score(&self, query: &FeatureVector) -> f64 {
        let positives = self
            .neighbors(query)
            .into_iter()
            .filter(|&i| self.labels[i])
            .count();
        positives as f64 / self.k as f64
    }
}
