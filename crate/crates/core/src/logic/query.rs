use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Formula, LogicError, Var};
use crate::frontend::interp::Value;

/// Assignment of values to variable names.
pub type Valuation = BTreeMap<String, Value>;

/// `forall inputs. exists placeholder. forall auxiliaries. body`.
///
/// Without a placeholder this degenerates to plain validity of the body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantifiedQuery {
    pub inputs: Vec<Var>,
    pub placeholder: Option<Var>,
    pub auxiliaries: Vec<Var>,
    pub body: Formula,
}

impl QuantifiedQuery {
    /// The closed sentence, with empty quantifier blocks omitted.
    pub fn closure(&self) -> Formula {
        let inner = Formula::forall(self.auxiliaries.clone(), self.body.clone());
        let mid = Formula::exists(self.placeholder.iter().cloned().collect(), inner);
        Formula::forall(self.inputs.clone(), mid)
    }

    pub fn all_vars(&self) -> impl Iterator<Item = &Var> {
        self.inputs
            .iter()
            .chain(self.placeholder.iter())
            .chain(self.auxiliaries.iter())
    }
}

impl fmt::Display for QuantifiedQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.closure().fmt(f)
    }
}

/// Classify the free variables of `body`. Every free variable must fall in
/// exactly one class; classified variables absent from the body are dropped.
/// Each class is sorted by name.
pub fn build_query(
    body: Formula,
    inputs: &[Var],
    placeholder: Option<&Var>,
    auxiliaries: &[Var],
) -> Result<QuantifiedQuery, LogicError> {
    let mut seen = BTreeSet::new();
    for v in inputs.iter().chain(placeholder).chain(auxiliaries) {
        if !seen.insert(v.name.as_str()) {
            return Err(LogicError::OverlappingClasses(v.name.clone()));
        }
    }
    let free = body.free_vars();
    for name in free.keys() {
        if !seen.contains(name.as_str()) {
            return Err(LogicError::UnclassifiedVariable(name.clone()));
        }
    }
    let keep = |vs: &[Var]| {
        let mut out: Vec<Var> = vs
            .iter()
            .filter(|v| free.contains_key(&v.name))
            .cloned()
            .collect();
        out.sort();
        out
    };
    Ok(QuantifiedQuery {
        inputs: keep(inputs),
        // The placeholder is kept even when it vanished from the body, so
        // that the query shape does not depend on folding.
        placeholder: placeholder.cloned(),
        auxiliaries: keep(auxiliaries),
        body,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum UnknownReason {
    Timeout,
    Resource,
    ProverUnknown,
    ProverCrash,
}

impl fmt::Display for UnknownReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnknownReason::Timeout => "timeout",
            UnknownReason::Resource => "resource limit",
            UnknownReason::ProverUnknown => "prover returned unknown",
            UnknownReason::ProverCrash => "prover crashed",
        })
    }
}

/// Outcome of deciding a closed query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    /// The witness, when known, assigns the outer universal variables.
    Invalid { witness: Option<Valuation> },
    Unknown(UnknownReason),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }

    pub fn is_invalid(&self) -> bool {
        matches!(self, Verdict::Invalid { .. })
    }

    /// Conjunction of verdicts of independent queries: any Invalid wins,
    /// then any Unknown, else Valid.
    pub fn combine(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
        let mut unknown = None;
        for v in verdicts {
            match v {
                Verdict::Invalid { .. } => return v,
                Verdict::Unknown(r) => unknown = unknown.or(Some(r)),
                Verdict::Valid => {}
            }
        }
        unknown.map_or(Verdict::Valid, Verdict::Unknown)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Valid => f.write_str("valid"),
            Verdict::Invalid { .. } => f.write_str("invalid"),
            Verdict::Unknown(r) => write!(f, "unknown ({r})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::BinKind;

    fn repair_body() -> Formula {
        Formula::or(vec![
            Formula::binary(BinKind::Le, Formula::int_var("b"), Formula::int_var("a")),
            Formula::binary(BinKind::Ge, Formula::int_var("c3"), Formula::int_var("b")),
        ])
    }

    #[test]
    fn closure_text() {
        let q = build_query(
            repair_body(),
            &[Var::int("b"), Var::int("a")],
            Some(&Var::int("c3")),
            &[],
        )
        .unwrap();
        assert_eq!(
            q.to_string(),
            "forall a:int, b:int. exists c3:int. ((b <= a) || (c3 >= b))"
        );
    }

    #[test]
    fn unclassified_variable() {
        let e = build_query(repair_body(), &[Var::int("a")], Some(&Var::int("c3")), &[]);
        assert_eq!(e, Err(LogicError::UnclassifiedVariable("b".into())));
    }

    #[test]
    fn overlapping_classes() {
        let e = build_query(
            repair_body(),
            &[Var::int("a"), Var::int("b")],
            Some(&Var::int("c3")),
            &[Var::int("a")],
        );
        assert_eq!(e, Err(LogicError::OverlappingClasses("a".into())));
    }

    #[test]
    fn combine_prefers_invalid() {
        let v = Verdict::combine([
            Verdict::Unknown(UnknownReason::Timeout),
            Verdict::Invalid { witness: None },
        ]);
        assert!(v.is_invalid());
        let v = Verdict::combine([Verdict::Valid, Verdict::Unknown(UnknownReason::Timeout)]);
        assert_eq!(v, Verdict::Unknown(UnknownReason::Timeout));
    }
}
