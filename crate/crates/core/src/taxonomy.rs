//! The QRAK constraint classes.
//!
//! A constraint class is a point on four binary axes: quantifiable or not,
//! relaxable or not, checkable a priori or only through a simulation, and
//! known to the solver or hidden. Hidden constraints only exist as
//! nonquantifiable, unrelaxable simulation constraints, so 9 of the 16 axis
//! combinations are valid. Leaves are numbered 1 through 9 in increasing order
//! of treatment difficulty.
//!
//! Classes are written as four-letter codes (`QRAK`, `NUSH`, ...). Codes with a
//! `*` in some slots denote a [`ClassPattern`] covering several leaves.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantifiability {
    Quantifiable,
    Nonquantifiable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relaxability {
    Relaxable,
    Unrelaxable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Availability {
    APriori,
    Simulation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Knowledge {
    Known,
    Hidden,
}

/// Which side of a quantifiable constraint can actually be measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum QuantifiableDetail {
    /// Only the distance to the boundary of a feasible point is known.
    FeasibilityOnly,
    /// Only the amount of violation of an infeasible point is known.
    ViolationOnly,
    #[default]
    Fully,
}

impl QuantifiableDetail {
    pub fn keyword(self) -> &'static str {
        match self {
            QuantifiableDetail::FeasibilityOnly => "feas",
            QuantifiableDetail::ViolationOnly => "viol",
            QuantifiableDetail::Fully => "full",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        match word.to_ascii_lowercase().as_str() {
            "feas" => Some(QuantifiableDetail::FeasibilityOnly),
            "viol" => Some(QuantifiableDetail::ViolationOnly),
            "full" => Some(QuantifiableDetail::Fully),
            _ => None,
        }
    }
}

impl Quantifiability {
    fn letter(self) -> char {
        match self {
            Quantifiability::Quantifiable => 'Q',
            Quantifiability::Nonquantifiable => 'N',
        }
    }
}

impl Relaxability {
    fn letter(self) -> char {
        match self {
            Relaxability::Relaxable => 'R',
            Relaxability::Unrelaxable => 'U',
        }
    }
}

impl Availability {
    fn letter(self) -> char {
        match self {
            Availability::APriori => 'A',
            Availability::Simulation => 'S',
        }
    }
}

impl Knowledge {
    fn letter(self) -> char {
        match self {
            Knowledge::Known => 'K',
            Knowledge::Hidden => 'H',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaxonomyError {
    #[error("hidden constraints must be nonquantifiable, unrelaxable and simulation-based (only NUSH exists)")]
    InvalidHiddenCombination,
    #[error("invalid class code {code:?}: {reason} at position {position}")]
    Syntax {
        code: String,
        position: usize,
        reason: String,
    },
}

/// One of the nine valid leaves of the taxonomy.
///
/// Fields are private: every value was checked by [`make_class`], so the
/// hidden rule holds for all instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ConstraintClass {
    q: Quantifiability,
    r: Relaxability,
    a: Availability,
    k: Knowledge,
}

/// Builds a class from its four axis values.
pub fn make_class(
    q: Quantifiability,
    r: Relaxability,
    a: Availability,
    k: Knowledge,
) -> Result<ConstraintClass, TaxonomyError> {
    if k == Knowledge::Hidden
        && (q, r, a)
            != (
                Quantifiability::Nonquantifiable,
                Relaxability::Unrelaxable,
                Availability::Simulation,
            )
    {
        return Err(TaxonomyError::InvalidHiddenCombination);
    }
    Ok(ConstraintClass { q, r, a, k })
}

impl ConstraintClass {
    pub const QRAK: Self = Self::known(Quantifiability::Quantifiable, Relaxability::Relaxable, Availability::APriori);
    pub const NRAK: Self = Self::known(Quantifiability::Nonquantifiable, Relaxability::Relaxable, Availability::APriori);
    pub const QUAK: Self = Self::known(Quantifiability::Quantifiable, Relaxability::Unrelaxable, Availability::APriori);
    pub const NUAK: Self = Self::known(Quantifiability::Nonquantifiable, Relaxability::Unrelaxable, Availability::APriori);
    pub const QRSK: Self = Self::known(Quantifiability::Quantifiable, Relaxability::Relaxable, Availability::Simulation);
    pub const NRSK: Self = Self::known(Quantifiability::Nonquantifiable, Relaxability::Relaxable, Availability::Simulation);
    pub const QUSK: Self = Self::known(Quantifiability::Quantifiable, Relaxability::Unrelaxable, Availability::Simulation);
    pub const NUSK: Self = Self::known(Quantifiability::Nonquantifiable, Relaxability::Unrelaxable, Availability::Simulation);
    pub const NUSH: Self = ConstraintClass {
        q: Quantifiability::Nonquantifiable,
        r: Relaxability::Unrelaxable,
        a: Availability::Simulation,
        k: Knowledge::Hidden,
    };

    const fn known(q: Quantifiability, r: Relaxability, a: Availability) -> Self {
        ConstraintClass { q, r, a, k: Knowledge::Known }
    }

    pub fn quantifiability(self) -> Quantifiability {
        self.q
    }

    pub fn relaxability(self) -> Relaxability {
        self.r
    }

    pub fn availability(self) -> Availability {
        self.a
    }

    pub fn knowledge(self) -> Knowledge {
        self.k
    }

    pub fn is_quantifiable(self) -> bool {
        self.q == Quantifiability::Quantifiable
    }

    pub fn is_relaxable(self) -> bool {
        self.r == Relaxability::Relaxable
    }

    pub fn is_a_priori(self) -> bool {
        self.a == Availability::APriori
    }

    pub fn is_hidden(self) -> bool {
        self.k == Knowledge::Hidden
    }

    /// Position of the leaf in the canonical ordering, 1 (`QRAK`) to 9 (`NUSH`).
    pub fn leaf_index(self) -> u8 {
        if self.k == Knowledge::Hidden {
            return 9;
        }
        1 + (self.q == Quantifiability::Nonquantifiable) as u8
            + 2 * (self.r == Relaxability::Unrelaxable) as u8
            + 4 * (self.a == Availability::Simulation) as u8
    }

    /// Same class with the quantifiability axis replaced, if still valid.
    pub fn with_quantifiability(self, q: Quantifiability) -> Result<Self, TaxonomyError> {
        make_class(q, self.r, self.a, self.k)
    }

    pub fn with_availability(self, a: Availability) -> Result<Self, TaxonomyError> {
        make_class(self.q, self.r, a, self.k)
    }

    pub fn code(self) -> String {
        format_class(self)
    }
}

impl PartialOrd for ConstraintClass {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ConstraintClass {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.leaf_index().cmp(&other.leaf_index())
    }
}

impl fmt::Display for ConstraintClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}{}{}",
            self.q.letter(),
            self.r.letter(),
            self.a.letter(),
            self.k.letter()
        )
    }
}

impl FromStr for ConstraintClass {
    type Err = TaxonomyError;

    /// Accepts exact codes only; patterns are rejected with a syntax error.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match parse_class_code(s)? {
            ParsedCode::Class(c) => Ok(c),
            ParsedCode::Pattern(_) => Err(TaxonomyError::Syntax {
                code: s.to_string(),
                position: s.find('*').map(|p| p + 1).unwrap_or(1),
                reason: "wildcard not allowed in an exact class code".into(),
            }),
        }
    }
}

/// Canonical uppercase four-letter code.
pub fn format_class(class: ConstraintClass) -> String {
    class.to_string()
}

/// The nine classes in leaf order.
pub fn enumerate_classes() -> [ConstraintClass; 9] {
    [
        ConstraintClass::QRAK,
        ConstraintClass::NRAK,
        ConstraintClass::QUAK,
        ConstraintClass::NUAK,
        ConstraintClass::QRSK,
        ConstraintClass::NRSK,
        ConstraintClass::QUSK,
        ConstraintClass::NUSK,
        ConstraintClass::NUSH,
    ]
}

pub fn leaf_index(class: ConstraintClass) -> u8 {
    class.leaf_index()
}

/// A class code with wildcards. `None` in a slot means `*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ClassPattern {
    pub q: Option<Quantifiability>,
    pub r: Option<Relaxability>,
    pub a: Option<Availability>,
    pub k: Option<Knowledge>,
}

impl ClassPattern {
    pub const ANY: ClassPattern = ClassPattern { q: None, r: None, a: None, k: None };

    pub fn matches(&self, class: ConstraintClass) -> bool {
        self.q.is_none_or(|q| q == class.q)
            && self.r.is_none_or(|r| r == class.r)
            && self.a.is_none_or(|a| a == class.a)
            && self.k.is_none_or(|k| k == class.k)
    }

    pub fn matching_classes(&self) -> Vec<ConstraintClass> {
        enumerate_classes()
            .into_iter()
            .filter(|c| self.matches(*c))
            .collect()
    }

    /// A wildcard in the knowledge slot can only ever add the single `NUSH`
    /// leaf, which is rarely what the author meant.
    pub fn has_knowledge_wildcard(&self) -> bool {
        self.k.is_none()
    }
}

impl fmt::Display for ClassPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let slot = |c: Option<char>| c.unwrap_or('*');
        write!(
            f,
            "{}{}{}{}",
            slot(self.q.map(Quantifiability::letter)),
            slot(self.r.map(Relaxability::letter)),
            slot(self.a.map(Availability::letter)),
            slot(self.k.map(Knowledge::letter)),
        )
    }
}

/// Result of parsing a class code: an exact class or a wildcard pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParsedCode {
    Class(ConstraintClass),
    Pattern(ClassPattern),
}

impl ParsedCode {
    pub fn matches(&self, class: ConstraintClass) -> bool {
        match self {
            ParsedCode::Class(c) => *c == class,
            ParsedCode::Pattern(p) => p.matches(class),
        }
    }

    pub fn matching_classes(&self) -> Vec<ConstraintClass> {
        match self {
            ParsedCode::Class(c) => vec![*c],
            ParsedCode::Pattern(p) => p.matching_classes(),
        }
    }
}

impl fmt::Display for ParsedCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParsedCode::Class(c) => c.fmt(f),
            ParsedCode::Pattern(p) => p.fmt(f),
        }
    }
}

/// Parses a class code, case-insensitively.
///
/// Besides four-letter codes this accepts the shorthands `S` (for `**S*`) and
/// `H` (for `NUSH`). Patterns fixing the hidden slot collapse to `NUSH`; a
/// pattern fixing `H` together with a contradicting letter is an error.
pub fn parse_class_code(text: &str) -> Result<ParsedCode, TaxonomyError> {
    let upper = text.trim().to_ascii_uppercase();
    match upper.as_str() {
        "S" => {
            return Ok(ParsedCode::Pattern(ClassPattern {
                a: Some(Availability::Simulation),
                ..ClassPattern::ANY
            }))
        }
        "H" => return Ok(ParsedCode::Class(ConstraintClass::NUSH)),
        _ => {}
    }
    let chars: Vec<char> = upper.chars().collect();
    if chars.len() != 4 {
        return Err(TaxonomyError::Syntax {
            code: text.to_string(),
            position: chars.len().min(4) + 1,
            reason: format!("expected 4 letters, found {}", chars.len()),
        });
    }
    let bad = |position: usize, expected: &str| TaxonomyError::Syntax {
        code: text.to_string(),
        position,
        reason: format!("expected one of {expected}, found {:?}", chars[position - 1]),
    };
    let q = match chars[0] {
        'Q' => Some(Quantifiability::Quantifiable),
        'N' => Some(Quantifiability::Nonquantifiable),
        '*' => None,
        _ => return Err(bad(1, "Q, N, *")),
    };
    let r = match chars[1] {
        'R' => Some(Relaxability::Relaxable),
        'U' => Some(Relaxability::Unrelaxable),
        '*' => None,
        _ => return Err(bad(2, "R, U, *")),
    };
    let a = match chars[2] {
        'A' => Some(Availability::APriori),
        'S' => Some(Availability::Simulation),
        '*' => None,
        _ => return Err(bad(3, "A, S, *")),
    };
    let k = match chars[3] {
        'K' => Some(Knowledge::Known),
        'H' => Some(Knowledge::Hidden),
        '*' => None,
        _ => return Err(bad(4, "K, H, *")),
    };

    if k == Some(Knowledge::Hidden) {
        let hidden_ok = q.is_none_or(|q| q == Quantifiability::Nonquantifiable)
            && r.is_none_or(|r| r == Relaxability::Unrelaxable)
            && a.is_none_or(|a| a == Availability::Simulation);
        if !hidden_ok {
            return Err(TaxonomyError::InvalidHiddenCombination);
        }
        return Ok(ParsedCode::Class(ConstraintClass::NUSH));
    }

    match (q, r, a, k) {
        (Some(q), Some(r), Some(a), Some(k)) => Ok(ParsedCode::Class(make_class(q, r, a, k)?)),
        _ => Ok(ParsedCode::Pattern(ClassPattern { q, r, a, k })),
    }
}

/// Whether `pattern` covers `class`.
pub fn matches(pattern: &ClassPattern, class: ConstraintClass) -> bool {
    pattern.matches(class)
}
