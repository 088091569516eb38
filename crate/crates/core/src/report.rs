//! Measure values with kind tags, and the JSON report schema.

use serde::{Deserialize, Serialize};

/// How much a reported number can be trusted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    /// Computed exactly (or to solver tolerance with matching certificates).
    Exact,
    /// Certified two-sided bracket; `value` is inside it.
    Bracket,
    LowerBound,
    UpperBound,
    /// Heuristic number with no certificate.
    Heuristic,
}

impl MeasureKind {
    pub fn is_certified(self) -> bool {
        matches!(self, MeasureKind::Exact | MeasureKind::Bracket)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureValue {
    pub id: String,
    #[serde(with = "tagged_float")]
    pub value: f64,
    pub kind: MeasureKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl MeasureValue {
    pub fn exact(id: impl Into<String>, value: f64) -> Self {
        Self { id: id.into(), value, kind: MeasureKind::Exact, lower: None, upper: None, note: None }
    }

    pub fn with_kind(id: impl Into<String>, value: f64, kind: MeasureKind) -> Self {
        Self { id: id.into(), value, kind, lower: None, upper: None, note: None }
    }

    pub fn bracket(id: impl Into<String>, value: f64, lower: f64, upper: f64) -> Self {
        Self {
            id: id.into(),
            value,
            kind: MeasureKind::Bracket,
            lower: Some(lower),
            upper: Some(upper),
            note: None,
        }
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Finite floats as JSON numbers, the rest as `"inf"`, `"-inf"` or `"nan"`.
mod tagged_float {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        match *x {
            v if v.is_finite() => s.serialize_f64(v),
            v if v.is_nan() => s.serialize_str("nan"),
            v if v > 0.0 => s.serialize_str("inf"),
            _ => s.serialize_str("-inf"),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Tag(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Tag(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(D::Error::custom(format!("bad float tag {other:?}"))),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Holds,
    Violated,
    Skipped,
    Reported,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationOutcome {
    pub id: String,
    pub outcome: Outcome,
    /// Slack of the inequality (`rhs - lhs` after scaling); negative means violated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// A measure that was not computed, with the reason.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedMeasure {
    pub id: String,
    pub reason: String,
}

/// Named collection of measure values plus relation outcomes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub matrix: String,
    pub measures: Vec<MeasureValue>,
    #[serde(default)]
    pub relations: Vec<RelationOutcome>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<SkippedMeasure>,
}

impl MeasureReport {
    pub fn new(matrix: impl Into<String>) -> Self {
        Self { matrix: matrix.into(), ..Default::default() }
    }

    pub fn get(&self, id: &str) -> Option<&MeasureValue> {
        self.measures.iter().find(|m| m.id == id)
    }

    pub fn value(&self, id: &str) -> Option<f64> {
        self.get(id).map(|m| m.value)
    }

    pub fn push(&mut self, m: MeasureValue) {
        if let Some(slot) = self.measures.iter_mut().find(|x| x.id == m.id) {
            *slot = m;
        } else {
            self.measures.push(m);
        }
    }

    pub fn violations(&self) -> Vec<&RelationOutcome> {
        self.relations.iter().filter(|r| r.outcome == Outcome::Violated).collect()
    }

    pub fn skip(&mut self, id: impl Into<String>, reason: impl Into<String>) {
        self.skipped.push(SkippedMeasure { id: id.into(), reason: reason.into() });
    }

    pub fn skip_reason(&self, id: &str) -> Option<&str> {
        self.skipped.iter().find(|s| s.id == id).map(|s| s.reason.as_str())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let mut r = MeasureReport::new("eq(2)");
        r.push(MeasureValue::exact("D", 3.0));
        r.push(MeasureValue::bracket("gamma2", 1.0, 0.99999, 1.00001));
        r.relations.push(RelationOutcome {
            id: "cover-sum".into(),
            outcome: Outcome::Holds,
            margin: Some(0.0),
            reason: None,
        });
        let back = MeasureReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(r.to_json().contains("\"kind\": \"bracket\""));
    }

    #[test]
    fn infinite_values_round_trip() {
        let mut r = MeasureReport::new("m");
        r.push(MeasureValue::exact("rec", f64::INFINITY));
        r.push(MeasureValue::exact("low", f64::NEG_INFINITY));
        let s = r.to_json();
        assert!(s.contains("\"inf\""));
        assert_eq!(MeasureReport::from_json(&s).unwrap(), r);
    }

    #[test]
    fn push_replaces_existing_id() {
        let mut r = MeasureReport::new("m");
        r.push(MeasureValue::exact("rank", 2.0));
        r.push(MeasureValue::exact("rank", 3.0));
        assert_eq!(r.measures.len(), 1);
        assert_eq!(r.value("rank"), Some(3.0));
    }
}
