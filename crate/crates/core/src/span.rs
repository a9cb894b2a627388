//! Source locations.

use std::fmt;
use std::hash::{Hash, Hasher};

/// A region of an input file. Lines and columns are 1-based; the end is
/// inclusive of the last character of the token that closes the region.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SourceSpan {
    pub file: String,
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl SourceSpan {
    pub fn new(file: impl Into<String>, start: (u32, u32), end: (u32, u32)) -> Self {
        SourceSpan {
            file: file.into(),
            start_line: start.0,
            start_col: start.1,
            end_line: end.0,
            end_col: end.1,
        }
    }

    /// Smallest span covering both `self` and `other`.
    pub fn join(&self, other: &SourceSpan) -> SourceSpan {
        let start = (self.start_line, self.start_col).min((other.start_line, other.start_col));
        let end = (self.end_line, self.end_col).max((other.end_line, other.end_col));
        SourceSpan::new(self.file.clone(), start, end)
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.start_line, self.start_col)
    }
}

/// Optional location attached to a syntax or model element.
///
/// Locations never take part in equality, ordering or hashing: two values
/// parsed from differently laid out text compare equal when their content
/// does.
#[derive(Clone, Debug, Default)]
pub struct Loc(pub Option<SourceSpan>);

impl Loc {
    pub const NONE: Loc = Loc(None);

    pub fn span(&self) -> Option<&SourceSpan> {
        self.0.as_ref()
    }
}

impl From<SourceSpan> for Loc {
    fn from(span: SourceSpan) -> Self {
        Loc(Some(span))
    }
}

impl PartialEq for Loc {
    fn eq(&self, _: &Loc) -> bool {
        true
    }
}

impl Eq for Loc {}

impl PartialOrd for Loc {
    fn partial_cmp(&self, other: &Loc) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Loc {
    fn cmp(&self, _: &Loc) -> std::cmp::Ordering {
        std::cmp::Ordering::Equal
    }
}

impl Hash for Loc {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}
