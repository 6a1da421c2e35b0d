use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A strategy count below 2, or a product that does not fit in memory.
    InvalidDims(&'static str),
    DimensionOverflow,
    CapExceeded {
        what: &'static str,
        requested: u128,
        cap: usize,
    },
    InvalidProfile {
        player: usize,
        strategy: usize,
        cardinality: usize,
    },
    ProfileLength {
        expected: usize,
        found: usize,
    },
    IndexOutOfRange {
        index: usize,
        len: usize,
    },
    LengthMismatch {
        expected: usize,
        found: usize,
    },
    InvalidPlayer {
        player: usize,
        players: usize,
    },
    InvalidScope(&'static str),
    MissingUtility {
        player: usize,
    },
    InvalidRestriction {
        player: usize,
        strategy: usize,
        reason: &'static str,
    },
    InvalidSchedule(&'static str),
    InvalidGrid(&'static str),
    SolverFailure {
        player: usize,
        iterations: usize,
        best_residual: f64,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidDims(msg) => write!(f, "invalid dimensions: {msg}"),
            Error::DimensionOverflow => f.write_str("dimension product overflows"),
            Error::CapExceeded {
                what,
                requested,
                cap,
            } => write!(f, "{what} {requested} exceeds cap {cap}"),
            Error::InvalidProfile {
                player,
                strategy,
                cardinality,
            } => write!(
                f,
                "strategy {strategy} of player {player} outside 0..{cardinality}"
            ),
            Error::ProfileLength { expected, found } => {
                write!(f, "profile has {found} entries, expected {expected}")
            }
            Error::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range for length {len}")
            }
            Error::LengthMismatch { expected, found } => {
                write!(f, "vector length {found}, expected {expected}")
            }
            Error::InvalidPlayer { player, players } => {
                write!(f, "player {player} out of range for {players} players")
            }
            Error::InvalidScope(msg) => write!(f, "invalid scope: {msg}"),
            Error::MissingUtility { player } => write!(f, "player {player} has no utility"),
            Error::InvalidRestriction {
                player,
                strategy,
                reason,
            } => write!(
                f,
                "invalid restriction for player {player}, strategy {strategy}: {reason}"
            ),
            Error::InvalidSchedule(msg) => write!(f, "invalid beta schedule: {msg}"),
            Error::InvalidGrid(msg) => write!(f, "invalid grid spec: {msg}"),
            Error::SolverFailure {
                player,
                iterations,
                best_residual,
            } => write!(
                f,
                "solver did not converge for player {player} after {iterations} iterations \
                 (best normal residual {best_residual:e})"
            ),
        }
    }
}

impl core::error::Error for Error {}
