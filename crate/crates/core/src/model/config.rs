use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{DdeSystem, HopfHint, Ndde, NddeParams, Sir, SirParams};
use crate::error::{Error, Result};
use crate::series::ModelScalar;

/// Optional override of a model's built-in Hopf search start.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HopfHintConfig {
    pub omega: Option<f64>,
    pub lambda: Option<f64>,
}

/// JSON model configuration: `{model, params, hopf_hint}`.
///
/// `params` only needs the keys being changed; the rest keep their
/// built-in values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub model: String,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default)]
    pub hopf_hint: HopfHintConfig,
}

impl ModelConfig {
    pub fn named(model: &str) -> Self {
        ModelConfig { model: model.to_string(), params: Map::new(), hopf_hint: HopfHintConfig::default() }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Layers `other` on top of `self`; the model names must agree.
    pub fn overlay(mut self, other: &ModelConfig) -> Result<Self> {
        if other.model != self.model {
            return Err(Error::InvalidInput(format!(
                "parameter file is for model '{}', not '{}'",
                other.model, self.model
            )));
        }
        for (k, v) in &other.params {
            self.params.insert(k.clone(), v.clone());
        }
        if other.hopf_hint.omega.is_some() {
            self.hopf_hint.omega = other.hopf_hint.omega;
        }
        if other.hopf_hint.lambda.is_some() {
            self.hopf_hint.lambda = other.hopf_hint.lambda;
        }
        Ok(self)
    }

    pub fn build(&self) -> Result<BuiltinModel> {
        let kind = match self.model.to_ascii_lowercase().as_str() {
            "ndde" => BuiltinKind::Ndde(Ndde::new(merge(NddeParams::default(), &self.params)?)),
            "sir" => BuiltinKind::Sir(Sir::new(merge(SirParams::default(), &self.params)?)),
            other => return Err(Error::InvalidInput(format!("unknown model '{other}' (expected ndde or sir)"))),
        };
        let model = BuiltinModel { kind, hint: self.hopf_hint };
        model.validate()?;
        Ok(model)
    }
}

fn merge<P: Serialize + for<'de> Deserialize<'de>>(defaults: P, overrides: &Map<String, Value>) -> Result<P> {
    let Value::Object(mut base) = serde_json::to_value(defaults)? else {
        unreachable!("parameter structs serialize to objects")
    };
    for (k, v) in overrides {
        if !base.contains_key(k) {
            let known: Vec<&String> = base.keys().collect();
            return Err(Error::InvalidInput(format!("unknown parameter '{k}' (known: {known:?})")));
        }
        base.insert(k.clone(), v.clone());
    }
    Ok(serde_json::from_value(Value::Object(base))?)
}

#[derive(Debug, Clone, PartialEq)]
enum BuiltinKind {
    Ndde(Ndde),
    Sir(Sir),
}

/// One of the shipped models, with an optional Hopf-hint override.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltinModel {
    kind: BuiltinKind,
    hint: HopfHintConfig,
}

impl BuiltinModel {
    pub fn ndde(params: NddeParams) -> Self {
        BuiltinModel { kind: BuiltinKind::Ndde(Ndde::new(params)), hint: HopfHintConfig::default() }
    }

    pub fn sir(params: SirParams) -> Self {
        BuiltinModel { kind: BuiltinKind::Sir(Sir::new(params)), hint: HopfHintConfig::default() }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        ModelConfig::named(name).build()
    }

    /// Current parameters as a JSON object.
    pub fn params_json(&self) -> Value {
        match &self.kind {
            BuiltinKind::Ndde(m) => serde_json::to_value(m.params()),
            BuiltinKind::Sir(m) => serde_json::to_value(m.params()),
        }
        .expect("parameter structs serialize")
    }

    pub fn as_ndde(&self) -> Option<&Ndde> {
        match &self.kind {
            BuiltinKind::Ndde(m) => Some(m),
            BuiltinKind::Sir(_) => None,
        }
    }

    pub fn as_sir(&self) -> Option<&Sir> {
        match &self.kind {
            BuiltinKind::Sir(m) => Some(m),
            BuiltinKind::Ndde(_) => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let Value::Object(map) = self.params_json() else { unreachable!() };
        for (k, v) in &map {
            let x = v.as_f64().unwrap_or(f64::NAN);
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::InvalidInput(format!("parameter '{k}' must be positive and finite, got {v}")));
            }
        }
        if let BuiltinKind::Sir(m) = &self.kind {
            if m.params().f > 1.0 {
                return Err(Error::InvalidInput(format!("recovered fraction f must be ≤ 1, got {}", m.params().f)));
            }
        }
        for (name, v) in [("omega", self.hint.omega), ("lambda", self.hint.lambda)] {
            if let Some(x) = v {
                if !(x > 0.0 && x.is_finite()) {
                    return Err(Error::InvalidInput(format!("hopf_hint.{name} must be positive, got {x}")));
                }
            }
        }
        Ok(())
    }
}

impl DdeSystem for BuiltinModel {
    fn name(&self) -> &str {
        match &self.kind {
            BuiltinKind::Ndde(m) => m.name(),
            BuiltinKind::Sir(m) => m.name(),
        }
    }

    fn dim(&self) -> usize {
        match &self.kind {
            BuiltinKind::Ndde(m) => m.dim(),
            BuiltinKind::Sir(m) => m.dim(),
        }
    }

    fn rhs<T: ModelScalar>(&self, lambda: &T, x: &[T], y: &[T]) -> Result<Vec<T>> {
        if x.len() != self.dim() || y.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.len().min(y.len()) });
        }
        match &self.kind {
            BuiltinKind::Ndde(m) => m.rhs(lambda, x, y),
            BuiltinKind::Sir(m) => m.rhs(lambda, x, y),
        }
    }

    fn equilibrium_hint(&self, lambda: f64) -> Vec<f64> {
        match &self.kind {
            BuiltinKind::Ndde(m) => m.equilibrium_hint(lambda),
            BuiltinKind::Sir(m) => m.equilibrium_hint(lambda),
        }
    }

    fn hopf_hint(&self) -> HopfHint {
        let base = match &self.kind {
            BuiltinKind::Ndde(m) => m.hopf_hint(),
            BuiltinKind::Sir(m) => m.hopf_hint(),
        };
        HopfHint { omega: self.hint.omega.unwrap_or(base.omega), lambda: self.hint.lambda.unwrap_or(base.lambda) }
    }

    fn state_labels(&self) -> Vec<String> {
        match &self.kind {
            BuiltinKind::Ndde(m) => m.state_labels(),
            BuiltinKind::Sir(m) => m.state_labels(),
        }
    }

    fn time_unit(&self) -> &str {
        match &self.kind {
            BuiltinKind::Ndde(m) => m.time_unit(),
            BuiltinKind::Sir(m) => m.time_unit(),
        }
    }

    fn integration_history(&self, equilibrium: &[f64]) -> Vec<f64> {
        match &self.kind {
            BuiltinKind::Ndde(m) => m.integration_history(equilibrium),
            BuiltinKind::Sir(m) => m.integration_history(equilibrium),
        }
    }
}
