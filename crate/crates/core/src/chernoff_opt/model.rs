//! Performance functions `Y(theta, delta)` and the named model registry.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// The performance function whose sign decides failure: the event of
/// interest is `Y(theta, delta) <= 0`.
///
/// `evaluate` may be only piecewise continuous in `theta`. When
/// `gradient_theta` returns `Some`, it must agree with central finite
/// differences of `evaluate` away from kinks.
pub trait PerformanceModel: Send + Sync {
    fn dim_theta(&self) -> usize;

    fn dim_delta(&self) -> usize;

    fn evaluate(&self, theta: &[f64], delta: &[f64]) -> f64;

    /// `dY/dtheta`, if the model can supply it analytically.
    fn gradient_theta(&self, _theta: &[f64], _delta: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

/// `Y = a . theta + b . delta + c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Affine {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: f64,
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

impl PerformanceModel for Affine {
    fn dim_theta(&self) -> usize {
        self.a.len()
    }

    fn dim_delta(&self) -> usize {
        self.b.len()
    }

    fn evaluate(&self, theta: &[f64], delta: &[f64]) -> f64 {
        dot(&self.a, theta) + dot(&self.b, delta) + self.c
    }

    fn gradient_theta(&self, _theta: &[f64], _delta: &[f64]) -> Option<Vec<f64>> {
        Some(self.a.clone())
    }
}

/// `Y = 1 - (theta_1 - delta_1)^2`: fails when the draw lands more than
/// one unit away from `theta_1`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QuadraticWell;

impl PerformanceModel for QuadraticWell {
    fn dim_theta(&self) -> usize {
        1
    }

    fn dim_delta(&self) -> usize {
        1
    }

    fn evaluate(&self, theta: &[f64], delta: &[f64]) -> f64 {
        let d = theta[0] - delta[0];
        1.0 - d * d
    }

    fn gradient_theta(&self, theta: &[f64], delta: &[f64]) -> Option<Vec<f64>> {
        Some(vec![-2.0 * (theta[0] - delta[0])])
    }
}

/// `Y = theta_1 - delta_1`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct UniformGap;

impl PerformanceModel for UniformGap {
    fn dim_theta(&self) -> usize {
        1
    }

    fn dim_delta(&self) -> usize {
        1
    }

    fn evaluate(&self, theta: &[f64], delta: &[f64]) -> f64 {
        theta[0] - delta[0]
    }

    fn gradient_theta(&self, _theta: &[f64], _delta: &[f64]) -> Option<Vec<f64>> {
        Some(vec![1.0])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelId {
    Affine,
    QuadraticWell,
    UniformGap,
}

impl ModelId {
    pub const ALL: [ModelId; 3] = [ModelId::Affine, ModelId::QuadraticWell, ModelId::UniformGap];

    pub fn name(self) -> &'static str {
        match self {
            ModelId::Affine => "affine",
            ModelId::QuadraticWell => "quadratic_well",
            ModelId::UniformGap => "uniform_gap",
        }
    }
}

impl std::str::FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelId::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| {
            Error::Config(format!("unknown model `{s}` (expected affine, quadratic_well or uniform_gap)"))
        })
    }
}

/// A registry model with its parameters bound.
#[derive(Debug, Clone, PartialEq)]
pub enum RegistryModel {
    Affine(Affine),
    QuadraticWell(QuadraticWell),
    UniformGap(UniformGap),
}

impl RegistryModel {
    /// Builds a model from its registry name and a JSON parameter object.
    /// `quadratic_well` and `uniform_gap` take no parameters.
    pub fn from_params(id: ModelId, params: &Value) -> Result<Self> {
        let empty = match params {
            Value::Null => true,
            Value::Object(m) => m.is_empty(),
            _ => false,
        };
        match id {
            ModelId::Affine => {
                let affine: Affine =
                    serde_path_to_error::deserialize(params).map_err(|e| Error::Config(format!("model_params.{e}")))?;
                if affine.a.is_empty() || affine.b.is_empty() {
                    return Err(Error::Config("model_params.a and model_params.b must be nonempty".into()));
                }
                Ok(RegistryModel::Affine(affine))
            }
            ModelId::QuadraticWell | ModelId::UniformGap if !empty => {
                Err(Error::Config(format!("model_params: `{}` takes no parameters", id.name())))
            }
            ModelId::QuadraticWell => Ok(RegistryModel::QuadraticWell(QuadraticWell)),
            ModelId::UniformGap => Ok(RegistryModel::UniformGap(UniformGap)),
        }
    }

    pub fn id(&self) -> ModelId {
        match self {
            RegistryModel::Affine(_) => ModelId::Affine,
            RegistryModel::QuadraticWell(_) => ModelId::QuadraticWell,
            RegistryModel::UniformGap(_) => ModelId::UniformGap,
        }
    }

    fn inner(&self) -> &dyn PerformanceModel {
        match self {
            RegistryModel::Affine(m) => m,
            RegistryModel::QuadraticWell(m) => m,
            RegistryModel::UniformGap(m) => m,
        }
    }
}

impl PerformanceModel for RegistryModel {
    fn dim_theta(&self) -> usize {
        self.inner().dim_theta()
    }

    fn dim_delta(&self) -> usize {
        self.inner().dim_delta()
    }

    fn evaluate(&self, theta: &[f64], delta: &[f64]) -> f64 {
        self.inner().evaluate(theta, delta)
    }

    fn gradient_theta(&self, theta: &[f64], delta: &[f64]) -> Option<Vec<f64>> {
        self.inner().gradient_theta(theta, delta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn registry_lookup() {
        assert_eq!("quadratic_well".parse::<ModelId>().unwrap(), ModelId::QuadraticWell);
        assert!("cubic".parse::<ModelId>().is_err());
    }

    #[test]
    fn affine_params() {
        let m = RegistryModel::from_params(ModelId::Affine, &json!({"a": [1.0, -2.0], "b": [0.5], "c": 0.25})).unwrap();
        assert_eq!(m.dim_theta(), 2);
        assert_eq!(m.dim_delta(), 1);
        assert_eq!(m.evaluate(&[1.0, 1.0], &[2.0]), 1.0 - 2.0 + 1.0 + 0.25);
        let err = RegistryModel::from_params(ModelId::Affine, &json!({"a": [1.0], "b": "x", "c": 0.0})).unwrap_err();
        assert!(err.to_string().contains("model_params.b"), "{err}");
        let err = RegistryModel::from_params(ModelId::Affine, &json!({"a": [1.0], "c": 0.0})).unwrap_err();
        assert!(err.to_string().contains("`b`"), "{err}");
    }

    #[test]
    fn parameterless_models_reject_params() {
        assert!(RegistryModel::from_params(ModelId::QuadraticWell, &json!({})).is_ok());
        assert!(RegistryModel::from_params(ModelId::UniformGap, &Value::Null).is_ok());
        assert!(RegistryModel::from_params(ModelId::UniformGap, &json!({"k": 1})).is_err());
    }

    #[test]
    fn analytic_gradients_match_differences() {
        let h = 1e-6;
        let models = [
            RegistryModel::QuadraticWell(QuadraticWell),
            RegistryModel::UniformGap(UniformGap),
            RegistryModel::Affine(Affine { a: vec![0.3, -1.1], b: vec![2.0, 0.1], c: -0.4 }),
        ];
        for m in &models {
            let theta: Vec<f64> = (0..m.dim_theta()).map(|i| 0.3 - 0.2 * i as f64).collect();
            let delta: Vec<f64> = (0..m.dim_delta()).map(|i| 0.7 + 0.1 * i as f64).collect();
            let g = m.gradient_theta(&theta, &delta).unwrap();
            for j in 0..theta.len() {
                let (mut up, mut dn) = (theta.clone(), theta.clone());
                up[j] += h;
                dn[j] -= h;
                let fd = (m.evaluate(&up, &delta) - m.evaluate(&dn, &delta)) / (2.0 * h);
                assert!((fd - g[j]).abs() <= 1e-5 * g[j].abs().max(1.0));
            }
        }
    }
}
