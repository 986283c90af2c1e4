use alloc::string::String;

/// Violations found while validating a raw system description.
///
/// Every variant carries the indices that witness the failure so that callers
/// can point at the offending table entry.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ValidationError {
    #[error("table shape: {0}")]
    Shape(String),
    #[error("cayley table entry ({g},{h}) = {value} is out of range for order {order}")]
    CayleyRange {
        g: usize,
        h: usize,
        value: usize,
        order: usize,
    },
    #[error("no two-sided identity element in the cayley table")]
    NoIdentity,
    #[error("element {g} has no two-sided inverse")]
    NoInverse { g: usize },
    #[error("associativity fails: ({g}·{h})·{k} != {g}·({h}·{k})")]
    Associativity { g: usize, h: usize, k: usize },
    #[error("action of element {g} is not a permutation of the points")]
    NotPermutation { g: usize },
    #[error("identity element moves point {x}")]
    ActionIdentity { x: usize },
    #[error("action is not a homomorphism: σ_({g}·{h})({x}) != σ_{g}(σ_{h}({x}))")]
    ActionComposition { g: usize, h: usize, x: usize },
    #[error("cocycle matrix at (g={g}, x={x}) has wrong shape or is not unitary")]
    NotUnitary { g: usize, x: usize },
    #[error("cocycle at the identity is not I at point {x}")]
    CocycleIdentity { x: usize },
    #[error("cocycle identity V_(gh)(x) = V_g(x)·V_h(σ_g⁻¹(x)) fails at (g={g}, h={h}, x={x})")]
    Cocycle { g: usize, h: usize, x: usize },
    #[error("central partition does not cover point {x} exactly once")]
    PartitionCover { x: usize },
    #[error("partition is not invariant: element {g} does not map block {block} onto a block")]
    PartitionNotInvariant { g: usize, block: usize },
    #[error("invalid tolerances: {0}")]
    Tolerances(String),
}

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("element is not in the span (relative residual {residual:e})")]
    NotInSpan { residual: f64 },
    #[error("no generic central element separated the blocks after {attempts} attempts")]
    DegenerateCenter { attempts: usize },
    #[error("invalid system: {0}")]
    Validation(#[from] ValidationError),
}
