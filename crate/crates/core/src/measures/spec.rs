//! Measure mini-spec: `name[:key=value,...]`.
//!
//! ```text
//! uniform
//! iid:q1=1/2,q2=1/6,q3=1/6,q4=1/6
//! carnap:l=2,g=uniform            (or g1=..,g2=..,g3=..,g4=..)
//! maher:l=2,pi=1/2,pf=1/1000,pg=1/10
//! exch:seed=7
//! random:seed=7
//! file:path/to/measure.json
//! ```
//!
//! Values are rationals (`num/den`, integers or exact decimals).

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use super::{
    carnap_measure, iid_product_measure, maher_measure, measure_from_file, random_exchangeable_measure,
    random_measure, uniform_measure, CategoryPrior, MaherParams, Measure, MeasureError,
};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MeasureSpec {
    Uniform,
    Iid(CategoryPrior),
    Carnap { lambda: Rational, gamma: CategoryPrior },
    Maher(MaherParams),
    /// A missing seed defers to the caller's default.
    RandomExch { seed: Option<u64> },
    Random { seed: Option<u64> },
    File(PathBuf),
}

impl MeasureSpec {
    pub fn build(&self, n: usize, default_seed: u64) -> Result<Measure, MeasureError> {
        match self {
            MeasureSpec::Uniform => uniform_measure(n),
            MeasureSpec::Iid(theta) => iid_product_measure(n, theta),
            MeasureSpec::Carnap { lambda, gamma } => carnap_measure(n, lambda, gamma),
            MeasureSpec::Maher(p) => maher_measure(n, p),
            MeasureSpec::RandomExch { seed } => random_exchangeable_measure(n, seed.unwrap_or(default_seed)),
            MeasureSpec::Random { seed } => random_measure(n, seed.unwrap_or(default_seed)),
            MeasureSpec::File(path) => {
                let m = measure_from_file(path)?;
                if m.universe_size() != n {
                    return Err(MeasureError::SizeMismatch {
                        expected: n,
                        found: m.universe_size(),
                    });
                }
                Ok(m)
            }
        }
    }

    /// Family name used in sweep output.
    pub fn family(&self) -> &'static str {
        match self {
            MeasureSpec::Uniform => "uniform",
            MeasureSpec::Iid(_) => "iid",
            MeasureSpec::Carnap { .. } => "carnap",
            MeasureSpec::Maher(_) => "maher",
            MeasureSpec::RandomExch { .. } => "exch",
            MeasureSpec::Random { .. } => "random",
            MeasureSpec::File(_) => "file",
        }
    }
}

impl fmt::Display for MeasureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = rational::to_fraction_string;
        let prior = |p: &CategoryPrior, prefix: &str| {
            p.values()
                .iter()
                .enumerate()
                .map(|(i, v)| format!("{prefix}{}={}", i + 1, r(v)))
                .collect::<Vec<_>>()
                .join(",")
        };
        let seed = |s: &Option<u64>| s.map(|s| format!(":seed={s}")).unwrap_or_default();
        match self {
            MeasureSpec::Uniform => f.write_str("uniform"),
            MeasureSpec::Iid(theta) => write!(f, "iid:{}", prior(theta, "q")),
            MeasureSpec::Carnap { lambda, gamma } => write!(f, "carnap:l={},{}", r(lambda), prior(gamma, "g")),
            MeasureSpec::Maher(p) => write!(f, "maher:l={},pi={},pf={},pg={}", r(&p.lambda), r(&p.pr_i), r(&p.pf), r(&p.pg)),
            MeasureSpec::RandomExch { seed: s } => write!(f, "exch{}", seed(s)),
            MeasureSpec::Random { seed: s } => write!(f, "random{}", seed(s)),
            MeasureSpec::File(path) => write!(f, "file:{}", path.display()),
        }
    }
}

struct Params<'a> {
    spec: &'a str,
    values: BTreeMap<String, String>,
}

impl Params<'_> {
    fn error(&self, reason: impl Into<String>) -> MeasureError {
        MeasureError::Spec {
            spec: self.spec.to_string(),
            reason: reason.into(),
        }
    }

    fn take(&mut self, keys: &[&str]) -> Option<String> {
        keys.iter().find_map(|k| self.values.remove(*k))
    }

    fn rational(&mut self, keys: &[&str]) -> Result<Option<Rational>, MeasureError> {
        match self.take(keys) {
            None => Ok(None),
            Some(text) => rational::parse_rational(&text)
                .map(Some)
                .map_err(|e| self.error(e.to_string())),
        }
    }

    fn required(&mut self, keys: &[&str]) -> Result<Rational, MeasureError> {
        self.rational(keys)?
            .ok_or_else(|| self.error(format!("missing parameter {}", keys[0])))
    }

    fn seed(&mut self) -> Result<Option<u64>, MeasureError> {
        match self.take(&["seed"]) {
            None => Ok(None),
            Some(text) => text
                .parse()
                .map(Some)
                .map_err(|_| self.error(format!("bad seed {text:?}"))),
        }
    }

    /// Four category values under `prefix1..prefix4`, or `prefix=uniform`.
    fn prior(&mut self, prefix: &str) -> Result<CategoryPrior, MeasureError> {
        if let Some(v) = self.take(&[prefix]) {
            return if v == "uniform" {
                Ok(CategoryPrior::uniform())
            } else {
                Err(self.error(format!("{prefix} must be 'uniform' or given per category")))
            };
        }
        let keys: Vec<String> = (1..=4).map(|i| format!("{prefix}{i}")).collect();
        if keys.iter().all(|k| !self.values.contains_key(k)) {
            return Ok(CategoryPrior::uniform());
        }
        let mut values = Vec::with_capacity(4);
        for k in &keys {
            values.push(self.required(&[k.as_str()])?);
        }
        CategoryPrior::new([values[0].clone(), values[1].clone(), values[2].clone(), values[3].clone()])
            .map_err(|e| self.error(e.to_string()))
    }

    fn finish(self) -> Result<(), MeasureError> {
        match self.values.keys().next() {
            Some(k) => Err(self.error(format!("unknown parameter {k:?}"))),
            None => Ok(()),
        }
    }
}

pub fn parse_measure_spec(text: &str) -> Result<MeasureSpec, MeasureError> {
    let spec_error = |reason: String| MeasureError::Spec {
        spec: text.to_string(),
        reason,
    };
    let trimmed = text.trim();
    let (name, rest) = trimmed.split_once(':').unwrap_or((trimmed, ""));
    if name == "file" {
        if rest.is_empty() {
            return Err(spec_error("missing path".into()));
        }
        return Ok(MeasureSpec::File(PathBuf::from(rest)));
    }
    let mut values = BTreeMap::new();
    for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| spec_error(format!("expected key=value, got {item:?}")))?;
        if values.insert(k.trim().to_ascii_lowercase(), v.trim().to_string()).is_some() {
            return Err(spec_error(format!("duplicate parameter {k:?}")));
        }
    }
    let mut p = Params { spec: text, values };
    let spec = match name.to_ascii_lowercase().as_str() {
        "uniform" => MeasureSpec::Uniform,
        "iid" => MeasureSpec::Iid(p.prior("q")?),
        "carnap" => MeasureSpec::Carnap {
            lambda: p.required(&["l", "lambda"])?,
            gamma: p.prior("g")?,
        },
        "maher" => {
            let params = MaherParams::new(
                p.required(&["l", "lambda"])?,
                p.required(&["pi", "pri"])?,
                p.required(&["pf"])?,
                p.required(&["pg"])?,
            );
            params.validate().map_err(|e| p.error(e.to_string()))?;
            MeasureSpec::Maher(params)
        }
        "exch" | "random-exch" => MeasureSpec::RandomExch { seed: p.seed()? },
        "random" => MeasureSpec::Random { seed: p.seed()? },
        other => return Err(spec_error(format!("unknown measure family {other:?}"))),
    };
    p.finish()?;
    Ok(spec)
}
