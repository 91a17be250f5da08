use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Measure, MeasureError, Provenance};
use crate::rational::{self, Rational};

/// On-disk form: `{"n": N, "weights": ["1/16", ...]}` in world-encoding order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureFile {
    pub n: usize,
    pub weights: Vec<String>,
}

impl MeasureFile {
    pub fn from_measure(m: &Measure) -> MeasureFile {
        MeasureFile {
            n: m.universe_size(),
            weights: m.weights().iter().map(rational::to_fraction_string).collect(),
        }
    }

    pub fn into_measure(self) -> Result<Measure, MeasureError> {
        let weights: Vec<Rational> = self
            .weights
            .iter()
            .map(|w| rational::parse_rational(w).map_err(|e| MeasureError::Format(e.to_string())))
            .collect::<Result<_, _>>()?;
        Measure::from_weights(self.n, &weights, Provenance::Custom)
    }
}

pub fn measure_from_json(text: &str) -> Result<Measure, MeasureError> {
    let file: MeasureFile = serde_json::from_str(text).map_err(|e| MeasureError::Format(e.to_string()))?;
    file.into_measure()
}

pub fn measure_from_file(path: impl AsRef<Path>) -> Result<Measure, MeasureError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| MeasureError::Io(format!("{}: {e}", path.display())))?;
    measure_from_json(&text)
}

impl Measure {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&MeasureFile::from_measure(self)).expect("measure file serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::carnap_measure;
    use crate::measures::CategoryPrior;
    use crate::rational::ratio;

    #[test]
    fn round_trip_through_json() {
        let m = carnap_measure(2, &ratio(2, 1), &CategoryPrior::uniform()).unwrap();
        let back = measure_from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.provenance(), &Provenance::Custom);
    }

    #[test]
    fn reports_error_codes() {
        let mut weights = vec!["1/16".to_string(); 16];
        weights[0] = "-1/4".into();
        let text = serde_json::to_string(&MeasureFile { n: 2, weights }).unwrap();
        assert_eq!(measure_from_json(&text).unwrap_err().code(), "NEGATIVE_WEIGHT");
        let text = serde_json::to_string(&MeasureFile {
            n: 1,
            weights: vec!["1/4".into(), "1/4".into(), "1/4".into(), "24/100".into()],
        })
        .unwrap();
        assert_eq!(measure_from_json(&text).unwrap_err().code(), "SUM_NOT_ONE");
        assert_eq!(measure_from_json(r#"{"n":2,"weights":["1/1"]}"#).unwrap_err().code(), "SIZE_MISMATCH");
        assert_eq!(measure_from_json("{").unwrap_err().code(), "FORMAT");
    }
}
