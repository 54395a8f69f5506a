//! Scenario draws of the random vector `delta`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distribution of `delta`, with independent coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioDistribution {
    Normal { mean: f64, std: f64, dim: usize },
    Uniform { low: f64, high: f64, dim: usize },
}

impl ScenarioDistribution {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ScenarioDistribution::Normal { mean, std, dim } => {
                mean.is_finite() && std.is_finite() && std > 0.0 && dim > 0
            }
            ScenarioDistribution::Uniform { low, high, dim } => {
                low.is_finite() && high.is_finite() && low < high && dim > 0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid scenario distribution {self:?}")))
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            ScenarioDistribution::Normal { dim, .. } | ScenarioDistribution::Uniform { dim, .. } => dim,
        }
    }

    /// Opens a seeded stream of draws.
    pub fn stream(&self, seed: u64) -> Result<DistributionStream> {
        self.validate()?;
        let sampler = match *self {
            ScenarioDistribution::Normal { mean, std, .. } => {
                Sampler::Normal(Normal::new(mean, std).map_err(|e| Error::Config(e.to_string()))?)
            }
            ScenarioDistribution::Uniform { low, high, .. } => {
                Sampler::Uniform(Uniform::new(low, high).map_err(|e| Error::Config(e.to_string()))?)
            }
        };
        Ok(DistributionStream { sampler, dim: self.dim(), rng: ChaCha8Rng::seed_from_u64(seed), draws: 0 })
    }
}

#[derive(Debug, Clone)]
enum Sampler {
    Normal(Normal<f64>),
    Uniform(Uniform<f64>),
}

impl Sampler {
    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Normal(d) => d.sample(rng),
            Sampler::Uniform(d) => d.sample(rng),
        }
    }
}

/// Something that yields scenario vectors one at a time.
pub trait ScenarioSource {
    fn dim(&self) -> usize;

    /// Writes the next draw into `out`; false when exhausted.
    fn next_scenario(&mut self, out: &mut [f64]) -> bool;
}

#[derive(Debug, Clone)]
pub struct DistributionStream {
    sampler: Sampler,
    dim: usize,
    rng: ChaCha8Rng,
    draws: u64,
}

impl DistributionStream {
    pub fn draws_made(&self) -> u64 {
        self.draws
    }
}

impl ScenarioSource for DistributionStream {
    fn dim(&self) -> usize {
        self.dim
    }

    fn next_scenario(&mut self, out: &mut [f64]) -> bool {
        for v in out.iter_mut() {
            *v = self.sampler.draw(&mut self.rng);
        }
        self.draws += 1;
        true
    }
}

/// A fixed, immutable collection of scenario rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSet {
    data: Vec<f64>,
    dim: usize,
    seed: Option<u64>,
}

impl ScenarioSet {
    /// Draws `n` rows from `dist` using a ChaCha8 stream seeded with `seed`.
    pub fn generate(dist: &ScenarioDistribution, n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("scenario count must be positive".into()));
        }
        let mut stream = dist.stream(seed)?;
        let dim = dist.dim();
        let mut data = vec![0.0; n * dim];
        for row in data.chunks_exact_mut(dim) {
            stream.next_scenario(row);
        }
        Ok(Self { data, dim, seed: Some(seed) })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map(Vec::len).ok_or(Error::Empty("scenario set has no rows"))?;
        if dim == 0 {
            return Err(Error::Domain("scenario rows must be nonempty".into()));
        }
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("row has {} values, expected {dim}", row.len()),
                });
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::Parse { line: i + 1, message: format!("non-finite value {v}") });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { data, dim, seed: None })
    }

    /// Headerless CSV, one scenario per row. Blank lines are ignored.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        let mut lines = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|f| {
                    let f = f.trim();
                    f.parse::<f64>()
                        .map_err(|_| Error::Parse { line: i + 1, message: format!("`{f}` is not a decimal number") })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
            lines.push(i + 1);
        }
        // re-map row indices from from_rows onto file line numbers
        Self::from_rows(rows).map_err(|e| match e {
            Error::Parse { line, message } => Error::Parse { line: lines[line - 1], message },
            other => other,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.rows() {
            let fields: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    /// Replays the rows as a finite [`ScenarioSource`].
    pub fn replay(&self) -> Replay<'_> {
        Replay { set: self, pos: 0 }
    }
}

pub struct Replay<'a> {
    set: &'a ScenarioSet,
    pos: usize,
}

impl ScenarioSource for Replay<'_> {
    fn dim(&self) -> usize {
        self.set.dim
    }

    fn next_scenario(&mut self, out: &mut [f64]) -> bool {
        if self.pos >= self.set.len() {
            return false;
        }
        out.copy_from_slice(self.set.row(self.pos));
        self.pos += 1;
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_rows() {
        let dist = ScenarioDistribution::Normal { mean: 0.0, std: 0.5, dim: 2 };
        let a = ScenarioSet::generate(&dist, 100, 3).unwrap();
        let b = ScenarioSet::generate(&dist, 100, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 100);
        assert_eq!(a.dim(), 2);
        assert_ne!(a, ScenarioSet::generate(&dist, 100, 4).unwrap());
    }

    #[test]
    fn uniform_rows_in_range() {
        let dist = ScenarioDistribution::Uniform { low: 0.0, high: 1.0, dim: 1 };
        let s = ScenarioSet::generate(&dist, 1000, 0).unwrap();
        assert!(s.rows().all(|r| (0.0..1.0).contains(&r[0])));
    }

    #[test]
    fn csv_round_trip() {
        let dist = ScenarioDistribution::Normal { mean: 1.0, std: 2.0, dim: 3 };
        let s = ScenarioSet::generate(&dist, 20, 9).unwrap();
        let back = ScenarioSet::from_csv(&s.to_csv()).unwrap();
        assert_eq!(back.len(), 20);
        assert!(s.rows().zip(back.rows()).all(|(a, b)| a == b));
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        assert!(matches!(ScenarioSet::from_csv("1,2\n\n3,x\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(ScenarioSet::from_csv("1,2\n\n3\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(ScenarioSet::from_csv("\n"), Err(Error::Empty(_))));
    }

    #[test]
    fn invalid_distributions() {
        assert!(ScenarioDistribution::Normal { mean: 0.0, std: 0.0, dim: 1 }.validate().is_err());
        assert!(ScenarioDistribution::Uniform { low: 1.0, high: 1.0, dim: 1 }.validate().is_err());
        assert!(ScenarioDistribution::Uniform { low: 0.0, high: 1.0, dim: 0 }.validate().is_err());
    }

    #[test]
    fn replay_exhausts() {
        let s = ScenarioSet::from_rows(vec![vec![1.0], vec![2.0]]).unwrap();
        let mut r = s.replay();
        let mut buf = [0.0];
        assert!(r.next_scenario(&mut buf));
        assert!(r.next_scenario(&mut buf));
        assert_eq!(buf, [2.0]);
        assert!(!r.next_scenario(&mut buf));
    }
}
