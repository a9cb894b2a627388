//! Rule identifiers and violation records shared by every checker.

use std::fmt;
use std::str::FromStr;

use crate::span::SourceSpan;

/// Stable identifier of a checked rule.
///
/// `W` rules constrain models, `I` rules constrain systems in isolation,
/// `C` rules relate a system to its model, `D` rules constrain traces (and
/// schema satisfaction), `E` rules constrain engineering structures. The
/// catalog in `docs/rules.md` describes each one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleId {
    W1,
    W2,
    W3,
    W4,
    W5,
    W6,
    W7,
    W8,
    W9,
    I1,
    I2,
    I3,
    I4,
    I5,
    C1,
    C2,
    C3,
    C4,
    C5,
    C6,
    C7,
    C8,
    D1,
    D2,
    D3,
    D4,
    D5,
    E1,
    E2,
    E3,
    E4,
    E5,
}

impl RuleId {
    pub const ALL: [RuleId; 32] = [
        RuleId::W1,
        RuleId::W2,
        RuleId::W3,
        RuleId::W4,
        RuleId::W5,
        RuleId::W6,
        RuleId::W7,
        RuleId::W8,
        RuleId::W9,
        RuleId::I1,
        RuleId::I2,
        RuleId::I3,
        RuleId::I4,
        RuleId::I5,
        RuleId::C1,
        RuleId::C2,
        RuleId::C3,
        RuleId::C4,
        RuleId::C5,
        RuleId::C6,
        RuleId::C7,
        RuleId::C8,
        RuleId::D1,
        RuleId::D2,
        RuleId::D3,
        RuleId::D4,
        RuleId::D5,
        RuleId::E1,
        RuleId::E2,
        RuleId::E3,
        RuleId::E4,
        RuleId::E5,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleId::W1 => "W1",
            RuleId::W2 => "W2",
            RuleId::W3 => "W3",
            RuleId::W4 => "W4",
            RuleId::W5 => "W5",
            RuleId::W6 => "W6",
            RuleId::W7 => "W7",
            RuleId::W8 => "W8",
            RuleId::W9 => "W9",
            RuleId::I1 => "I1",
            RuleId::I2 => "I2",
            RuleId::I3 => "I3",
            RuleId::I4 => "I4",
            RuleId::I5 => "I5",
            RuleId::C1 => "C1",
            RuleId::C2 => "C2",
            RuleId::C3 => "C3",
            RuleId::C4 => "C4",
            RuleId::C5 => "C5",
            RuleId::C6 => "C6",
            RuleId::C7 => "C7",
            RuleId::C8 => "C8",
            RuleId::D1 => "D1",
            RuleId::D2 => "D2",
            RuleId::D3 => "D3",
            RuleId::D4 => "D4",
            RuleId::D5 => "D5",
            RuleId::E1 => "E1",
            RuleId::E2 => "E2",
            RuleId::E3 => "E3",
            RuleId::E4 => "E4",
            RuleId::E5 => "E5",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown rule id `{0}`")]
pub struct UnknownRuleId(pub String);

impl FromStr for RuleId {
    type Err = UnknownRuleId;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RuleId::ALL
            .iter()
            .copied()
            .find(|r| r.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownRuleId(s.to_string()))
    }
}

/// One broken rule instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub rule: RuleId,
    /// Names or ids of the elements involved; never empty.
    pub subjects: Vec<String>,
    pub span: Option<SourceSpan>,
    pub message: String,
}

impl Violation {
    pub fn new<S: Into<String>>(
        rule: RuleId,
        subjects: impl IntoIterator<Item = S>,
        message: impl Into<String>,
    ) -> Self {
        let subjects: Vec<String> = subjects.into_iter().map(Into::into).collect();
        debug_assert!(!subjects.is_empty(), "violation of {rule} without subjects");
        Violation {
            rule,
            subjects,
            span: None,
            message: message.into(),
        }
    }

    pub fn at(mut self, span: Option<&SourceSpan>) -> Self {
        self.span = span.cloned();
        self
    }

    /// Sort key used by every report: rule id, then subjects.
    pub fn key(&self) -> (RuleId, &[String]) {
        (self.rule, &self.subjects)
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}] {}", self.rule, self.subjects.join(", "), self.message)
    }
}

/// Sorts violations into report order and removes exact duplicates.
pub fn sort_violations(violations: &mut Vec<Violation>) {
    violations.sort_by(|a, b| a.key().cmp(&b.key()).then_with(|| a.message.cmp(&b.message)));
    violations.dedup_by(|a, b| a.rule == b.rule && a.subjects == b.subjects && a.message == b.message);
}
