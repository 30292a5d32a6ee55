//! Every floating-point tolerance and scale guard used by the library and the
//! acceptance suite lives here.

/// Relative agreement between the direct and divisor-sum routes of the
/// Heath-Brown approximant (floor of 1 on the magnitude).
pub const HB_TYPE1_REL: f64 = 1e-8;
/// Divisor-identity Ramanujan sum vs floating unit-sum oracle.
pub const RAMANUJAN_DIRECT_ABS: f64 = 1e-9;
/// Cramér weight vs its Ramanujan expansion.
pub const CRAMER_RAMANUJAN_ABS: f64 = 1e-8;
/// Symbol scaling invariance and CRT factorization.
pub const SYMBOL_ABS: f64 = 1e-10;
/// Adjoint identity of the averaging operators.
pub const DUALITY_ABS: f64 = 1e-10;
/// Recursive vs definitional Gowers norm (relative).
pub const GOWERS_ORACLE_REL: f64 = 1e-9;
/// p-adic identities (h-function identity, domination, constants).
pub const PADIC_ABS: f64 = 1e-10;
/// Mean-zero tolerance accepted by `h_function`.
pub const PADIC_MEAN_ZERO: f64 = 1e-10;
/// Plancherel bound slack.
pub const PLANCHEREL_SLACK: f64 = 1e-9;
/// Upper slack for the searched p-adic operator norm.
pub const PADIC_CONTRACTION_SLACK: f64 = 1e-6;

/// Largest sieve limit accepted by `build_sieve`.
pub const SIEVE_MAX: u64 = 1_000_000_000;
/// Largest enumeration for local factors (p^m).
pub const BETA_ENUM_MAX: u64 = 10_000_000;
/// Largest lattice-point count for linear-equation counts.
pub const LINEAR_COUNT_MAX: u64 = 100_000_000;
/// Largest sieve level for the Ramanujan expansion of the Cramér weight.
pub const CRAMER_EXPANSION_MAX_W: f64 = 31.0;
/// Largest modulus enumerated by `arithmetic_symbol`.
pub const SYMBOL_Q_MAX: u64 = 10_000_000;
/// Largest modulus for `plancherel_check`.
pub const PLANCHEREL_Q_MAX: u64 = 100_000;
/// Largest ring size p^j for the norm search.
pub const PADIC_SEARCH_MAX: u64 = 100_000;
/// Largest list length for the exhaustive variation oracle.
pub const VARIATION_BRUTE_MAX: usize = 12;
/// Largest list length for the variation dynamic program.
pub const VARIATION_DP_MAX: usize = 10_000;
/// Largest N^{d+2} for the brute-force Gowers norm.
pub const GOWERS_BRUTE_MAX: f64 = 1e8;
/// Largest scale for the exponential sums.
pub const EXP_SUM_N_MAX: u64 = 100_000_000;
/// Largest N for `improving_ratio`.
pub const IMPROVING_N_MAX: u64 = 100_000;

/// Gauss-Legendre quadrature: maximum number of panel doublings.
pub const QUADRATURE_MAX_DOUBLINGS: u32 = 24;
/// Minimum tolerance accepted by the quadrature.
pub const QUADRATURE_MIN_TOL: f64 = 1e-12;

/// Norm-search stagnation: relative improvement threshold and window.
pub const SEARCH_STAGNATION_REL: f64 = 1e-10;
pub const SEARCH_STAGNATION_WINDOW: usize = 5;
/// Largest dense output window for the averaging operators.
pub const DENSE_LEN_MAX: u64 = 50_000_000;
