use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack for symmetry and the triangle inequality of explicit matrices.
const METRIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
enum Metric {
    Euclidean { coords: Vec<f64>, dim: usize },
    Matrix(Vec<f64>),
}

/// A finite metric measure space: weighted points with Euclidean coordinates
/// or an explicit distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSpace {
    metric: Metric,
    weights: Vec<f64>,
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::InvalidSpace("no points".into()));
    }
    if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::InvalidSpace(format!("weight {} at point {i} is not positive", weights[i])));
    }
    Ok(())
}

impl DiscreteSpace {
    pub fn from_coords(coords: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        check_weights(&weights)?;
        if coords.len() != weights.len() {
            return Err(Error::InvalidSpace(format!("{} points but {} weights", coords.len(), weights.len())));
        }
        let dim = coords[0].len();
        if dim == 0 {
            return Err(Error::InvalidSpace("zero-dimensional coordinates".into()));
        }
        let mut flat = Vec::with_capacity(coords.len() * dim);
        for (i, c) in coords.iter().enumerate() {
            if c.len() != dim {
                return Err(Error::InvalidSpace(format!("point {i} has dimension {}, expected {dim}", c.len())));
            }
            if c.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidSpace(format!("point {i} has a non-finite coordinate")));
            }
            flat.extend_from_slice(c);
        }
        Ok(Self { metric: Metric::Euclidean { coords: flat, dim }, weights })
    }

    /// Validates symmetry, zero diagonal, positivity off the diagonal and the
    /// triangle inequality.
    pub fn from_distances(dist: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        check_weights(&weights)?;
        let n = weights.len();
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidSpace(format!("distance matrix must be {n}x{n}")));
        }
        let bad = |m: String| Err(Error::InvalidSpace(m));
        for i in 0..n {
            if dist[i][i] != 0.0 {
                return bad(format!("d({i},{i}) = {} is not zero", dist[i][i]));
            }
            for j in 0..n {
                let d = dist[i][j];
                if !d.is_finite() || (i != j && d <= 0.0) {
                    return bad(format!("d({i},{j}) = {d} must be finite and positive"));
                }
                if (d - dist[j][i]).abs() > METRIC_TOL * d.max(1.0) {
                    return bad(format!("d({i},{j}) != d({j},{i})"));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let (dij, dik, dkj) = (dist[i][j], dist[i][k], dist[k][j]);
                    if dij > dik + dkj + METRIC_TOL * dij.max(1.0) {
                        return bad(format!("triangle inequality fails: d({i},{j}) > d({i},{k}) + d({k},{j})"));
                    }
                }
            }
        }
        Ok(Self { metric: Metric::Matrix(dist.into_iter().flatten().collect()), weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_embedded(&self) -> bool {
        matches!(self.metric, Metric::Euclidean { .. })
    }

    pub fn dim(&self) -> Option<usize> {
        match self.metric {
            Metric::Euclidean { dim, .. } => Some(dim),
            Metric::Matrix(_) => None,
        }
    }

    pub fn coords(&self, i: usize) -> Option<&[f64]> {
        match &self.metric {
            Metric::Euclidean { coords, dim } => Some(&coords[i * dim..(i + 1) * dim]),
            Metric::Matrix(_) => None,
        }
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        match &self.metric {
            Metric::Euclidean { coords, dim } => {
                let (a, b) = (&coords[i * dim..(i + 1) * dim], &coords[j * dim..(j + 1) * dim]);
                a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
            }
            Metric::Matrix(m) => m[i * self.weights.len() + j],
        }
    }

    /// The same points with every distance multiplied by `c > 0`.
    pub fn scale_metric(&self, c: f64) -> Self {
        let metric = match &self.metric {
            Metric::Euclidean { coords, dim } => {
                Metric::Euclidean { coords: coords.iter().map(|x| x * c).collect(), dim: *dim }
            }
            Metric::Matrix(m) => Metric::Matrix(m.iter().map(|x| x * c).collect()),
        };
        Self { metric, weights: self.weights.clone() }
    }
}

#[derive(Serialize, Deserialize)]
struct SpaceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coords: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dist: Option<Vec<Vec<f64>>>,
    weights: Vec<f64>,
}

impl Serialize for DiscreteSpace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.len();
        let file = match &self.metric {
            Metric::Euclidean { coords, dim } => SpaceFile {
                coords: Some(coords.chunks(*dim).map(<[f64]>::to_vec).collect()),
                dist: None,
                weights: self.weights.clone(),
            },
            Metric::Matrix(m) => SpaceFile {
                coords: None,
                dist: Some(m.chunks(n).map(<[f64]>::to_vec).collect()),
                weights: self.weights.clone(),
            },
        };
        file.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DiscreteSpace {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let f = SpaceFile::deserialize(d)?;
        match (f.coords, f.dist) {
            (Some(c), None) => DiscreteSpace::from_coords(c, f.weights),
            (None, Some(m)) => DiscreteSpace::from_distances(m, f.weights),
            _ => Err(Error::InvalidSpace("exactly one of \"coords\" or \"dist\" is required".into())),
        }
        .map_err(D::Error::custom)
    }
}
