use std::fmt;

/// Source location of an AST node: byte range plus the 1-based line/column of
/// its first character.
///
/// Spans never participate in structural equality, so two ASTs parsed from
/// differently formatted text compare equal when their shapes agree.
#[derive(Clone, Copy, Debug, Default, Eq)]
pub struct Span {
    pub line: u32,
    pub col: u32,
    pub start: usize,
    pub end: usize,
}

impl PartialEq for Span {
    fn eq(&self, _other: &Span) -> bool {
        true
    }
}

impl std::hash::Hash for Span {
    fn hash<H: std::hash::Hasher>(&self, _state: &mut H) {}
}

impl PartialOrd for Span {
    fn partial_cmp(&self, other: &Span) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Span {
    fn cmp(&self, _other: &Span) -> std::cmp::Ordering {
        std::cmp::Ordering::Equal
    }
}

impl Span {
    pub fn new(line: u32, col: u32, start: usize, end: usize) -> Span {
        Span { line, col, start, end }
    }

    /// Smallest span covering both `self` and `other`.
    pub fn to(self, other: Span) -> Span {
        let (first, _) = if self.start <= other.start { (self, other) } else { (other, self) };
        Span { line: first.line, col: first.col, start: self.start.min(other.start), end: self.end.max(other.end) }
    }

    /// Total ordering key, used to sort diagnostics deterministically.
    pub fn key(&self) -> (u32, u32, usize) {
        (self.line, self.col, self.end)
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}
