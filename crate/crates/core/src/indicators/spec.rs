use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::catalog::{lookup, CatalogEntry, ParamDomain};
use super::IndicatorError;

/// A parameter value: numeric for periods and multipliers, a word for modes such as
/// `op=gt` or `direction=up`.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Num(f64),
    Word(String),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Num(x) if x.fract() == 0.0 && x.abs() < 1e15 => write!(f, "{}", *x as i64),
            ParamValue::Num(x) => write!(f, "{x}"),
            ParamValue::Word(w) => f.write_str(w),
        }
    }
}

/// Indicator name plus any explicitly given parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorSpec {
    name: String,
    params: BTreeMap<String, ParamValue>,
}

impl IndicatorSpec {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.trim().to_ascii_uppercase(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: ParamValue) -> Self {
        self.params.insert(key.to_ascii_lowercase(), value);
        self
    }

    pub fn with_num(self, key: &str, value: f64) -> Self {
        self.with(key, ParamValue::Num(value))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &BTreeMap<String, ParamValue> {
        &self.params
    }

    /// Canonical text: catalog name and every parameter (defaults filled) in catalog order.
    /// Falls back to the literal text when the name is unknown.
    pub fn canonical(&self) -> String {
        match lookup(&self.name).and_then(|e| self.resolved(e).map(|p| (e, p))) {
            Ok((entry, params)) => {
                if entry.params.is_empty() {
                    entry.name.to_string()
                } else {
                    let body: Vec<String> = entry
                        .params
                        .iter()
                        .map(|p| format!("{}={}", p.name, params.get(p.name)))
                        .collect();
                    format!("{}({})", entry.name, body.join(","))
                }
            }
            Err(_) => self.literal(),
        }
    }

    fn literal(&self) -> String {
        if self.params.is_empty() {
            self.name.clone()
        } else {
            let body: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            format!("{}({})", self.name, body.join(","))
        }
    }

    /// Fills defaults and validates every parameter against the entry's domain.
    pub(crate) fn resolved(&self, entry: &CatalogEntry) -> Result<Params, IndicatorError> {
        let perr = |param: &str, message: String| IndicatorError::Param {
            indicator: entry.name.to_string(),
            param: param.to_string(),
            message,
        };
        for key in self.params.keys() {
            if !entry.params.iter().any(|p| p.name == key) {
                return Err(perr(key, "not a parameter of this indicator".into()));
            }
        }
        let mut values = BTreeMap::new();
        for p in entry.params {
            let v = self.params.get(p.name).cloned().unwrap_or_else(|| p.default());
            match (&p.domain, &v) {
                (ParamDomain::Int { min, max, .. }, ParamValue::Num(x)) => {
                    if x.fract() != 0.0 || *x < *min as f64 || *x > *max as f64 {
                        return Err(perr(p.name, format!("expected an integer in [{min}, {max}], got {x}")));
                    }
                }
                (ParamDomain::Real { min, max, .. }, ParamValue::Num(x)) => {
                    if !x.is_finite() || x < min || x > max {
                        return Err(perr(p.name, format!("expected a number in [{min}, {max}], got {x}")));
                    }
                }
                (ParamDomain::Word { choices, .. }, ParamValue::Word(w)) => {
                    if !choices.contains(&w.as_str()) {
                        return Err(perr(p.name, format!("expected one of {choices:?}, got `{w}`")));
                    }
                }
                (ParamDomain::Word { choices, .. }, ParamValue::Num(x)) => {
                    return Err(perr(p.name, format!("expected one of {choices:?}, got {x}")));
                }
                (_, ParamValue::Word(w)) => {
                    return Err(perr(p.name, format!("expected a number, got `{w}`")));
                }
            }
            values.insert(p.name, v);
        }
        if let Some(check) = entry.check {
            check(&Params(values.clone())).map_err(|(param, message)| perr(param, message))?;
        }
        Ok(Params(values))
    }
}

impl fmt::Display for IndicatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

impl FromStr for IndicatorSpec {
    type Err = IndicatorError;

    /// Parses `NAME` or `NAME(key=value,...)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let syntax = |message: &str| IndicatorError::Syntax {
            input: s.to_string(),
            message: message.to_string(),
        };
        let s = s.trim();
        let (name, body) = match s.find('(') {
            Some(i) => {
                let rest = s[i + 1..].strip_suffix(')').ok_or_else(|| syntax("missing closing `)`"))?;
                (&s[..i], Some(rest))
            }
            None => (s, None),
        };
        let name = name.trim();
        if name.is_empty() {
            return Err(syntax("empty indicator name"));
        }
        let mut spec = IndicatorSpec::new(name);
        if let Some(body) = body {
            for part in body.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                let (k, v) = part.split_once('=').ok_or_else(|| syntax("expected `key=value`"))?;
                let (k, v) = (k.trim().to_ascii_lowercase(), v.trim());
                if k.is_empty() || v.is_empty() {
                    return Err(syntax("expected `key=value`"));
                }
                let value = match v.parse::<f64>() {
                    Ok(x) => ParamValue::Num(x),
                    Err(_) => ParamValue::Word(v.to_ascii_lowercase()),
                };
                if spec.params.insert(k.clone(), value).is_some() {
                    return Err(syntax(&format!("parameter `{k}` given twice")));
                }
            }
        }
        Ok(spec)
    }
}

impl Serialize for IndicatorSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.canonical())
    }
}

impl<'de> Deserialize<'de> for IndicatorSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Validated parameters with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Params(pub(crate) BTreeMap<&'static str, ParamValue>);

impl Params {
    pub fn get(&self, name: &str) -> &ParamValue {
        self.0
            .get(name)
            .unwrap_or_else(|| panic!("parameter `{name}` not declared in catalog"))
    }

    pub fn int(&self, name: &str) -> usize {
        match self.get(name) {
            ParamValue::Num(x) => *x as usize,
            ParamValue::Word(w) => panic!("parameter `{name}` is the word `{w}`"),
        }
    }

    pub fn num(&self, name: &str) -> f64 {
        match self.get(name) {
            ParamValue::Num(x) => *x,
            ParamValue::Word(w) => panic!("parameter `{name}` is the word `{w}`"),
        }
    }

    pub fn word(&self, name: &str) -> &str {
        match self.get(name) {
            ParamValue::Word(w) => w,
            ParamValue::Num(x) => panic!("parameter `{name}` is the number {x}"),
        }
    }
}
